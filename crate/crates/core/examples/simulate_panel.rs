//! Draw a synthetic panel and write it in the CSV exchange format.
//!
//!     cargo run --example simulate_panel -- /tmp/panel

use std::path::PathBuf;

use hdalpha::dgp::{generate_panel, AlphaSpec, Dependence, DgpConfig, Innovation};
use hdalpha::panel_io::{load_panel, write_panel};

fn main() -> hdalpha::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hdalpha_panel"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let config = DgpConfig::null(50, 260, Dependence::Infinite, Innovation::StudentT3)
        .with_alpha(AlphaSpec::sparse_for(Dependence::Infinite, 5))
        .with_seed(2024);
    let sim = generate_panel(&config)?;
    let active: Vec<usize> = (0..50).filter(|&i| sim.alpha[i] != 0.0).collect();
    println!("nonzero alphas at {active:?}");

    let (r, f) = (out.join("returns.csv"), out.join("factors.csv"));
    write_panel(&sim.panel, &r, &f)?;
    let back = load_panel(&r, &f)?;
    assert_eq!(back.returns(), sim.panel.returns());
    println!("wrote {} and {}", r.display(), f.display());
    Ok(())
}
