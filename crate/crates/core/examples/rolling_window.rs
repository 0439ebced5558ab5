//! Rolling-window p-values on a panel whose alphas switch on in the middle.

use ndarray::{s, Array1};

use hdalpha::dgp::{generate_panel, Dependence, DgpConfig, Innovation};
use hdalpha::panel_io::rolling_test;
use hdalpha::regression::PanelData;

fn main() -> hdalpha::Result<()> {
    let (n, t) = (100, 600);
    let config = DgpConfig::null(n, t, Dependence::MDependent, Innovation::Normal).with_seed(8);
    let sim = generate_panel(&config)?;

    // five mispriced securities during periods 200..400
    let alpha = Array1::from_shape_fn(n, |i| if i % 20 == 3 { 1.5 } else { 0.0 });
    let mut y = sim.panel.returns().clone();
    let mut active = y.slice_mut(s![200..400, ..]);
    active += &alpha;
    let panel = PanelData::from_matrices(y, sim.panel.factors().clone())?;

    let report = rolling_test(&panel, 200, 25, None)?;
    println!("window_start,window_end,p_sum,p_max,p_cc");
    for e in &report.entries {
        println!("{},{},{:.4},{:.4},{:.2e}", e.window_start, e.window_end, e.p_sum, e.p_max, e.p_cc);
    }
    Ok(())
}
