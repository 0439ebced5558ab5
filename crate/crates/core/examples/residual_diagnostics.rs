//! Box-Pierce checks for serial dependence in factor-model residuals.

use hdalpha::dgp::{generate_panel, Dependence, DgpConfig, Innovation};
use hdalpha::panel_io::diagnose;

fn main() -> hdalpha::Result<()> {
    for dep in [Dependence::Independent, Dependence::MDependent] {
        let config = DgpConfig::null(80, 500, dep, Innovation::Normal).with_seed(21);
        let report = diagnose(&generate_panel(&config)?.panel, 10, 5)?;
        let rejected = report.p_values.iter().filter(|&&p| p < 0.05).count();
        println!(
            "{dep:>11}: {rejected}/{} securities reject white noise at 5%, histogram {:?}",
            report.p_values.len(),
            report.histogram
        );
    }
    Ok(())
}
