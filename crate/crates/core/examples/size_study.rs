//! Empirical size under the null for the three dependence designs.
//!
//!     cargo run --release --example size_study -- [reps]

use hdalpha::dgp::{Dependence, DgpConfig, Innovation};
use hdalpha::mc::{run_study, studies_to_csv, StudyConfig};
use hdalpha::Method;

fn main() -> hdalpha::Result<()> {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let mut results = Vec::new();
    for dep in [Dependence::Independent, Dependence::MDependent, Dependence::Infinite] {
        let cfg = StudyConfig::new(DgpConfig::null(100, 200, dep, Innovation::Normal));
        results.push(run_study(&cfg, &Method::ALL, reps, 11)?);
    }
    print!("{}", studies_to_csv(&results));
    Ok(())
}
