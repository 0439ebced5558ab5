//! Inspect the pieces of the sum-type statistic: lagged trace estimates,
//! the bias correction and the split-sample variance components.

use hdalpha::dgp::{generate_panel, Dependence, DgpConfig, Innovation};
use hdalpha::sum_test::{sum_test, sum_test_internals};
use hdalpha::{fit_factor_model, Bandwidth};

fn main() -> hdalpha::Result<()> {
    let config = DgpConfig::null(120, 300, Dependence::MDependent, Innovation::StudentT3).with_seed(9);
    let fit = fit_factor_model(&generate_panel(&config)?.panel)?;
    let bw = Bandwidth(2);

    let int = sum_test_internals(&fit, bw)?;
    for (h, tr) in int.trace_autocov.iter().enumerate() {
        println!("tr Gamma_{h} = {tr:.4}");
    }
    println!("mu_hat      = {:.4}", int.mu_hat);
    println!("sigma_hat^2 = {:.4}", int.sigma_hat_sq);
    for (h1, row) in int.s_components.outer_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:9.3}")).collect();
        println!("S[{h1}, .] = {}", cells.join(" "));
    }

    let outcome = sum_test(&fit, bw)?;
    println!(
        "z = {:.4}, p = {:.4}",
        outcome.location_scale_adjusted.unwrap(),
        outcome.p_value
    );
    Ok(())
}
