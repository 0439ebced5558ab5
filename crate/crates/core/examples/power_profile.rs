//! Power of SUM, MAX and their combinations as alphas get denser.
//!
//!     cargo run --release --example power_profile -- [reps]

use hdalpha::dgp::{Dependence, DgpConfig, Innovation};
use hdalpha::mc::{power_profile, RunOptions, StudyConfig, Sweep};
use hdalpha::Method;

fn main() -> hdalpha::Result<()> {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let base = StudyConfig::new(DgpConfig::null(200, 300, Dependence::MDependent, Innovation::Normal));
    let grid = vec![1, 2, 5, 10, 25, 50];
    let results = power_profile(&base, &Sweep::Sparsity(grid.clone()), &Method::ALL, reps, 3, RunOptions::default())?;

    println!("{:>4} {:>7} {:>7} {:>7} {:>7}", "s", "SUM", "MAX", "CC", "MINP");
    for (s, r) in grid.iter().zip(&results) {
        let rate = |m| r.rate(m).map(|x| x.rate).unwrap_or(f64::NAN);
        println!(
            "{s:>4} {:>7.3} {:>7.3} {:>7.3} {:>7.3}",
            rate(Method::Sum),
            rate(Method::Max),
            rate(Method::CauchyCombo),
            rate(Method::MinPCombo)
        );
    }
    Ok(())
}
