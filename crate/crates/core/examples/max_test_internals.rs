//! Per-security long-run variances and the extreme-value centering of the
//! max-type statistic.

use hdalpha::dgp::{generate_panel, AlphaSpec, Dependence, DgpConfig, Innovation};
use hdalpha::max_test::{max_test, max_test_internals};
use hdalpha::{fit_factor_model, Bandwidth};

fn main() -> hdalpha::Result<()> {
    // two securities carry a sizeable alpha
    let config = DgpConfig::null(200, 400, Dependence::MDependent, Innovation::Normal)
        .with_alpha(AlphaSpec::SignalStrength { s: 2, delta: 16.0 })
        .with_seed(5);
    let sim = generate_panel(&config)?;
    let fit = fit_factor_model(&sim.panel)?;
    let bw = Bandwidth::default_for(200, 400);

    let int = max_test_internals(&fit, bw)?;
    let floored = int.floored.iter().filter(|&&f| f).count();
    println!("securities with floored variance: {floored}");

    let t = fit.n_periods() as f64;
    let mut ranked: Vec<(usize, f64)> = fit
        .alpha_hat
        .iter()
        .zip(&int.sigma)
        .enumerate()
        .map(|(i, (a, s))| (i, t * fit.omega_hat * a * a / s))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (i, score) in ranked.iter().take(5) {
        println!("security {i:>3}: true alpha = {:+.4}, score = {score:.2}", sim.alpha[*i]);
    }

    let outcome = max_test(&fit, bw)?;
    println!(
        "max = {:.3}, centered = {:.3}, p = {:.2e}",
        outcome.statistic,
        outcome.location_scale_adjusted.unwrap(),
        outcome.p_value
    );
    Ok(())
}
