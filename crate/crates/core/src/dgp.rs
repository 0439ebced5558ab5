//! Synthetic dependent panels for size and power studies.
//!
//! Factors follow AR(1) means with GARCH(1,1) variances, loadings are
//! uniform, and the idiosyncratic errors are a banded moving average
//! `ε_t = Σ_h A_h z_{t−h}` of cross-sectionally correlated shocks
//! `z_t = Σ^{1/2} ζ_t`.

use ndarray::{s, Array1, Array2, Axis};
use rand::seq::index;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::dist::RngStream;
use crate::error::{Error, Result};
use crate::linalg;
use crate::regression::PanelData;

/// Lags whose weight e^{−2h} falls below this are dropped in infinite mode.
pub const INFINITE_LAG_CUTOFF: f64 = 1e-12;

/// Time-series dependence of the error process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dependence {
    /// M_dep = 0.
    Independent,
    /// M_dep = 2.
    #[serde(rename = "m2")]
    MDependent,
    /// M_dep = T − 1.
    Infinite,
}

impl Dependence {
    /// Nominal moving-average order for a sample of length `t`.
    pub fn order(self, t: usize) -> usize {
        match self {
            Dependence::Independent => 0,
            Dependence::MDependent => 2,
            Dependence::Infinite => t.saturating_sub(1),
        }
    }

    /// Scale constant c_M of the sparse power design.
    pub fn power_constant(self) -> f64 {
        match self {
            Dependence::Independent => 12.0,
            Dependence::MDependent => 80.0,
            Dependence::Infinite => 90.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dependence::Independent => "independent",
            Dependence::MDependent => "m2",
            Dependence::Infinite => "infinite",
        }
    }
}

impl fmt::Display for Dependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Dependence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Dependence::Independent),
            "m2" => Ok(Dependence::MDependent),
            "infinite" => Ok(Dependence::Infinite),
            other => Err(Error::invalid(format!("unknown dependence {other}"))),
        }
    }
}

/// Law of the i.i.d. shocks ζ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Innovation {
    Normal,
    /// Raw Student-t with 3 degrees of freedom (variance 3).
    #[serde(rename = "t3")]
    StudentT3,
}

impl Innovation {
    pub fn label(self) -> &'static str {
        match self {
            Innovation::Normal => "normal",
            Innovation::StudentT3 => "t3",
        }
    }

    fn draw(self, stream: &mut RngStream) -> f64 {
        match self {
            Innovation::Normal => stream.sample_normal(),
            Innovation::StudentT3 => stream.sample_student_t(3.0),
        }
    }
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Innovation::Normal),
            "t3" => Ok(Innovation::StudentT3),
            other => Err(Error::invalid(format!("unknown innovation {other}"))),
        }
    }
}

/// Band width fraction ω and the decay constants φ₁ (lag operators) and
/// φ₂ (contemporaneous covariance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandParams {
    pub omega_band: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl Default for BandParams {
    fn default() -> Self {
        Self {
            omega_band: 0.9,
            phi1: 0.6,
            phi2: 0.4,
        }
    }
}

impl BandParams {
    fn in_band(&self, dist: usize, n: usize) -> bool {
        dist as f64 <= self.omega_band * n as f64
    }
}

/// How the intercepts are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSpec {
    Null,
    /// s nonzero alphas, each U(0, √(c log N / (s T))).
    SparseUniform { s: usize, c: f64 },
    /// s nonzero alphas, each U(0, √(δ log N / T)).
    SignalStrength { s: usize, delta: f64 },
}

impl AlphaSpec {
    /// Sparse design with the scale constant matching `dependence`.
    pub fn sparse_for(dependence: Dependence, s: usize) -> Self {
        AlphaSpec::SparseUniform {
            s,
            c: dependence.power_constant(),
        }
    }

    pub fn sparsity(&self) -> usize {
        match *self {
            AlphaSpec::Null => 0,
            AlphaSpec::SparseUniform { s, .. } | AlphaSpec::SignalStrength { s, .. } => s,
        }
    }

    /// Upper end of the uniform magnitude law.
    pub fn magnitude_bound(&self, n: usize, t: usize) -> f64 {
        let ln_n = (n as f64).ln();
        match *self {
            AlphaSpec::Null => 0.0,
            AlphaSpec::SparseUniform { s, c } => (c * ln_n / (s as f64 * t as f64)).sqrt(),
            AlphaSpec::SignalStrength { delta, .. } => (delta * ln_n / t as f64).sqrt(),
        }
    }
}

/// Complete recipe for one synthetic panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n: usize,
    pub t: usize,
    pub dependence: Dependence,
    pub band: BandParams,
    pub innovation: Innovation,
    pub alpha: AlphaSpec,
    pub seed: u64,
}

impl DgpConfig {
    /// Null design with default band parameters.
    pub fn null(n: usize, t: usize, dependence: Dependence, innovation: Innovation) -> Self {
        Self {
            n,
            t,
            dependence,
            band: BandParams::default(),
            innovation,
            alpha: AlphaSpec::Null,
            seed: 0,
        }
    }

    pub fn with_alpha(mut self, alpha: AlphaSpec) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.band;
        if self.n == 0 || self.t == 0 {
            return Err(Error::invalid("N and T must be positive"));
        }
        if !(b.omega_band > 0.0 && b.omega_band <= 1.0) {
            return Err(Error::invalid(format!("omega_band {} outside (0, 1]", b.omega_band)));
        }
        if self.n as f64 * b.omega_band < 1.0 {
            return Err(Error::invalid("N * omega_band must be at least 1"));
        }
        if !b.phi1.is_finite() || !b.phi2.is_finite() {
            return Err(Error::invalid("band constants must be finite"));
        }
        match self.alpha {
            AlphaSpec::Null => {}
            AlphaSpec::SparseUniform { s, c } => {
                check_sparsity(s, self.n)?;
                if !(c >= 0.0) {
                    return Err(Error::invalid(format!("scale constant {c} must be >= 0")));
                }
            }
            AlphaSpec::SignalStrength { s, delta } => {
                check_sparsity(s, self.n)?;
                if !(delta >= 0.0) {
                    return Err(Error::invalid(format!("signal strength {delta} must be >= 0")));
                }
            }
        }
        Ok(())
    }
}

fn check_sparsity(s: usize, n: usize) -> Result<()> {
    if s > n {
        return Err(Error::invalid(format!("sparsity {s} exceeds N = {n}")));
    }
    Ok(())
}

/// One term A_h of the moving-average filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LagOperator {
    Identity,
    /// c·I.
    Scalar(f64),
    /// scale × the shared banded matrix (diagonal φ₁, off-diagonal
    /// φ₁/(i−j)² inside the band).
    Banded { scale: f64 },
}

/// Σ, its Cholesky factor and the lag operators for a given design.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub sigma: Array2<f64>,
    pub sigma_chol: Array2<f64>,
    pub band_base: Array2<f64>,
    /// A_0, A_1, … up to the effective order.
    pub operators: Vec<LagOperator>,
}

impl BandStructure {
    /// Dense N×N matrix of A_h.
    pub fn operator_matrix(&self, h: usize) -> Array2<f64> {
        let n = self.sigma.nrows();
        match self.operators[h] {
            LagOperator::Identity => Array2::eye(n),
            LagOperator::Scalar(c) => Array2::eye(n) * c,
            LagOperator::Banded { scale } => &self.band_base * scale,
        }
    }

    pub fn order(&self) -> usize {
        self.operators.len() - 1
    }
}

/// Effective filter order: the nominal order, truncated in infinite mode
/// at the first lag with e^{−2h} below [`INFINITE_LAG_CUTOFF`].
pub fn effective_order(dependence: Dependence, t: usize) -> usize {
    let nominal = dependence.order(t);
    match dependence {
        Dependence::Infinite => {
            let mut h_star = 3;
            while (-2.0 * h_star as f64).exp() >= INFINITE_LAG_CUTOFF {
                h_star += 1;
            }
            nominal.min(h_star)
        }
        _ => nominal,
    }
}

/// Builds Σ (unit diagonal, φ₂/(i−j)² in the band) with its Cholesky
/// factor, and the lag operators A_0 = I, A_h = h⁻¹·band (h = 1, 2),
/// A_h = e^{−2h} I (h > 2).
pub fn build_band_matrices(
    n: usize,
    band: BandParams,
    dependence: Dependence,
    t: usize,
) -> Result<BandStructure> {
    let dist = |i: usize, j: usize| i.abs_diff(j);
    let sigma = Array2::from_shape_fn((n, n), |(i, j)| {
        let d = dist(i, j);
        if d == 0 {
            1.0
        } else if band.in_band(d, n) {
            band.phi2 / (d * d) as f64
        } else {
            0.0
        }
    });
    let band_base = Array2::from_shape_fn((n, n), |(i, j)| {
        let d = dist(i, j);
        if d == 0 {
            band.phi1
        } else if band.in_band(d, n) {
            band.phi1 / (d * d) as f64
        } else {
            0.0
        }
    });
    let sigma_chol = match linalg::cholesky(sigma.view(), 1e-12) {
        Some(l) => l,
        None => return Err(Error::NotPositiveDefinite(linalg::min_eigenvalue(sigma.view()))),
    };
    let order = effective_order(dependence, t);
    let operators = (0..=order)
        .map(|h| match h {
            0 => LagOperator::Identity,
            1 | 2 => LagOperator::Banded {
                scale: 1.0 / h as f64,
            },
            _ => LagOperator::Scalar((-2.0 * h as f64).exp()),
        })
        .collect();
    Ok(BandStructure {
        sigma,
        sigma_chol,
        band_base,
        operators,
    })
}

/// AR(1)/GARCH(1,1) coefficients of one factor:
/// (mean intercept, AR slope, variance intercept, GARCH slope, ARCH slope).
const FACTOR_COEFS: [(f64, f64, f64, f64, f64); 3] = [
    (0.53, 0.06, 0.89, 0.85, 0.11), // market
    (0.19, 0.19, 0.62, 0.74, 0.19), // SMB
    (0.19, 0.05, 0.80, 0.76, 0.15), // HML
];
/// Periods −49..=0 are burn-in.
const FACTOR_BURN_IN: usize = 50;

/// T×3 factor paths (market, SMB, HML), started at f = 0, h = 1 in period
/// −50 and run through the burn-in.
pub fn simulate_factors(t: usize, stream: &mut RngStream) -> Array2<f64> {
    let mut f_prev = [0.0; 3];
    let mut h_prev = [1.0; 3];
    let mut z_prev = [stream.sample_normal(), stream.sample_normal(), stream.sample_normal()];
    let mut out = Array2::zeros((t, 3));
    for step in 0..(FACTOR_BURN_IN + t) {
        for (j, &(mu, ar, omega, garch, arch)) in FACTOR_COEFS.iter().enumerate() {
            let z = stream.sample_normal();
            let h = omega + garch * h_prev[j] + arch * z_prev[j] * z_prev[j];
            let f = mu + ar * f_prev[j] + h.sqrt() * z;
            f_prev[j] = f;
            h_prev[j] = h;
            z_prev[j] = z;
            if step >= FACTOR_BURN_IN {
                out[[step - FACTOR_BURN_IN, j]] = f;
            }
        }
    }
    out
}

const BETA_RANGES: [(f64, f64); 3] = [(0.2, 2.0), (-1.0, 1.5), (-1.5, 1.5)];

/// N×3 loadings, column j uniform on its interval.
pub fn simulate_betas(n: usize, stream: &mut RngStream) -> Array2<f64> {
    let mut out = Array2::zeros((n, 3));
    for i in 0..n {
        for (j, &(lo, hi)) in BETA_RANGES.iter().enumerate() {
            out[[i, j]] = stream.sample_uniform(lo, hi);
        }
    }
    out
}

/// T×N errors `ε_t = Σ_h A_h z_{t−h}` including the pre-sample shocks each
/// period needs.
pub fn simulate_errors(
    t: usize,
    innovation: Innovation,
    structure: &BandStructure,
    stream: &mut RngStream,
) -> Array2<f64> {
    let n = structure.sigma.nrows();
    let order = structure.order();
    let rows = t + order;
    let zeta = Array2::from_shape_fn((rows, n), |_| innovation.draw(stream));
    // row r of z is period r − order
    let z = zeta.dot(&structure.sigma_chol.t());
    let lagged = |h: usize| z.slice(s![order - h..order - h + t, ..]);

    let mut eps = Array2::<f64>::zeros((t, n));
    let mut banded = Array2::<f64>::zeros((0, 0));
    for (h, op) in structure.operators.iter().enumerate() {
        match *op {
            LagOperator::Identity => eps += &lagged(h),
            LagOperator::Scalar(c) => eps.scaled_add(c, &lagged(h)),
            LagOperator::Banded { scale } => {
                if banded.is_empty() {
                    banded = Array2::zeros((t, n));
                }
                banded.scaled_add(scale, &lagged(h));
            }
        }
    }
    if !banded.is_empty() {
        // band_base is symmetric
        eps += &banded.dot(&structure.band_base);
    }
    eps
}

/// Length-N intercepts with exactly `s` nonzero entries on a uniformly
/// drawn support.
pub fn simulate_alphas(
    n: usize,
    t: usize,
    spec: &AlphaSpec,
    stream: &mut RngStream,
) -> Result<Array1<f64>> {
    let s = spec.sparsity();
    check_sparsity(s, n)?;
    let mut alpha = Array1::zeros(n);
    if s == 0 {
        return Ok(alpha);
    }
    let bound = spec.magnitude_bound(n, t);
    let support = index::sample(stream.rng(), n, s);
    for i in support.iter() {
        // a zero draw has probability zero but would break ‖α‖₀ = s
        let mut v = 0.0;
        while v == 0.0 {
            v = stream.sample_uniform(0.0, bound);
            if bound == 0.0 {
                break;
            }
        }
        alpha[i] = v;
    }
    Ok(alpha)
}

/// A simulated panel plus the ground truth that produced it.
#[derive(Debug, Clone)]
pub struct SimulatedPanel {
    pub panel: PanelData,
    pub alpha: Array1<f64>,
    pub beta: Array2<f64>,
    pub errors: Array2<f64>,
}

/// `y_t = α + B f_t + ε_t` using a prebuilt band structure.
pub fn generate_panel_with(
    config: &DgpConfig,
    structure: &BandStructure,
    stream: &mut RngStream,
) -> Result<SimulatedPanel> {
    config.validate()?;
    if structure.sigma.nrows() != config.n {
        return Err(Error::DimensionMismatch(format!(
            "band structure built for N = {}, config has N = {}",
            structure.sigma.nrows(),
            config.n
        )));
    }
    let factors = simulate_factors(config.t, stream);
    let beta = simulate_betas(config.n, stream);
    let errors = simulate_errors(config.t, config.innovation, structure, stream);
    let alpha = simulate_alphas(config.n, config.t, &config.alpha, stream)?;
    let mut y = factors.dot(&beta.t());
    y += &errors;
    y += &alpha.view().insert_axis(Axis(0));
    let panel = PanelData::from_matrices(y, factors)?;
    Ok(SimulatedPanel {
        panel,
        alpha,
        beta,
        errors,
    })
}

/// Builds the band structure and draws from stream `(config.seed, 0)`.
pub fn generate_panel(config: &DgpConfig) -> Result<SimulatedPanel> {
    config.validate()?;
    let structure = build_band_matrices(config.n, config.band, config.dependence, config.t)?;
    let mut stream = RngStream::new(config.seed, 0);
    generate_panel_with(config, &structure, &mut stream)
}
