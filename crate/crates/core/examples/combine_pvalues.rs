//! Cauchy and minimal-p combination of a (p_max, p_sum) pair.
//!
//!     cargo run --example combine_pvalues -- 0.01 0.5

use hdalpha::{cauchy_combine, min_p_combine};

fn main() -> hdalpha::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let pairs = if args.len() >= 2 {
        vec![(args[0], args[1])]
    } else {
        vec![(0.01, 0.5), (0.5, 0.5), (0.03, 0.04), (1e-8, 0.9), (0.0, 1.0)]
    };
    println!("{:>10} {:>10} {:>12} {:>12}", "p_max", "p_sum", "cauchy", "min-p");
    for (p_max, p_sum) in pairs {
        let cc = cauchy_combine(p_max, p_sum)?;
        let mp = min_p_combine(p_max, p_sum)?;
        println!("{p_max:>10.3e} {p_sum:>10.3e} {:>12.6} {:>12.6}", cc.p_value, mp.p_value);
    }
    Ok(())
}
