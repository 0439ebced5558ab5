//! Replicated size and power studies.
//!
//! Replication `r` always draws from stream `(base_seed, r)`, so a study is
//! bit-for-bit reproducible regardless of how many worker threads execute
//! it or in which order replications finish.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::dgp::{self, AlphaSpec, DgpConfig};
use crate::dist::RngStream;
use crate::error::{Error, Result};
use crate::outcome::Method;
use crate::regression::{fit_factor_model, Bandwidth};
use crate::report::run_alpha_tests;

/// Version tag embedded in every JSON document the crate writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Column names of the study CSV.
pub const STUDY_CSV_HEADER: &str = "method,reps,rejections,rate,stderr,gamma,N,T,dependence,innovation,M";

/// A data-generating design plus the test settings applied to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyConfig {
    pub dgp: DgpConfig,
    /// Overrides ⌈min(N,T)^{1/8}⌉ when set.
    pub bandwidth: Option<usize>,
    /// Nominal level γ.
    pub gamma: f64,
}

impl StudyConfig {
    pub fn new(dgp: DgpConfig) -> Self {
        Self {
            dgp,
            bandwidth: None,
            gamma: 0.05,
        }
    }

    pub fn effective_bandwidth(&self) -> Bandwidth {
        self.bandwidth
            .map(Bandwidth)
            .unwrap_or_else(|| Bandwidth::default_for(self.dgp.n, self.dgp.t))
    }

    fn describe(&self) -> String {
        format!(
            "N={} T={} dependence={} innovation={} alpha={:?}",
            self.dgp.n, self.dgp.t, self.dgp.dependence, self.dgp.innovation, self.dgp.alpha
        )
    }
}

/// Execution knobs that do not affect results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Keep per-replication records.
    pub keep_raw: bool,
}

/// Per-replication statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub rep: u64,
    pub z_sum: f64,
    pub centered_max: f64,
    pub p_sum: f64,
    pub p_max: f64,
    pub p_cc: f64,
    pub p_minp: f64,
}

impl ReplicationRecord {
    pub fn p_value(&self, method: Method) -> f64 {
        match method {
            Method::Sum => self.p_sum,
            Method::Max => self.p_max,
            Method::CauchyCombo => self.p_cc,
            Method::MinPCombo => self.p_minp,
        }
    }
}

/// Rejection summary for one method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodRate {
    pub method: Method,
    pub rejections: u64,
    pub rate: f64,
    pub mc_stderr: f64,
}

impl MethodRate {
    fn from_counts(method: Method, rejections: u64, reps: u64) -> Self {
        let rate = rejections as f64 / reps as f64;
        Self {
            method,
            rejections,
            rate,
            mc_stderr: (rate * (1.0 - rate) / reps as f64).sqrt(),
        }
    }
}

/// Rejection rates of a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub schema_version: u32,
    pub config: StudyConfig,
    pub bandwidth: usize,
    pub reps: u64,
    pub base_seed: u64,
    pub methods: Vec<MethodRate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<ReplicationRecord>>,
}

impl StudyResult {
    pub fn rate(&self, method: Method) -> Option<&MethodRate> {
        self.methods.iter().find(|m| m.method == method)
    }

    /// One row per method under [`STUDY_CSV_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(STUDY_CSV_HEADER);
        out.push('\n');
        self.write_csv_rows(&mut out);
        out
    }

    pub(crate) fn write_csv_rows(&self, out: &mut String) {
        let d = &self.config.dgp;
        for m in &self.methods {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                m.method,
                self.reps,
                m.rejections,
                m.rate,
                m.mc_stderr,
                self.config.gamma,
                d.n,
                d.t,
                d.dependence,
                d.innovation,
                self.bandwidth
            );
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study result serializes")
    }
}

/// Concatenated CSV for several studies (one header).
pub fn studies_to_csv(results: &[StudyResult]) -> String {
    let mut out = String::from(STUDY_CSV_HEADER);
    out.push('\n');
    for r in results {
        r.write_csv_rows(&mut out);
    }
    out
}

fn run_replication(
    config: &StudyConfig,
    structure: &dgp::BandStructure,
    bandwidth: Bandwidth,
    base_seed: u64,
    rep: u64,
) -> Result<ReplicationRecord> {
    let mut stream = RngStream::new(base_seed, rep);
    let sim = dgp::generate_panel_with(&config.dgp, structure, &mut stream)?;
    let fit = fit_factor_model(&sim.panel)?;
    let report = run_alpha_tests(&fit, bandwidth)?;
    Ok(ReplicationRecord {
        rep,
        z_sum: report.sum.location_scale_adjusted.unwrap_or(f64::NAN),
        centered_max: report.max.location_scale_adjusted.unwrap_or(f64::NAN),
        p_sum: report.sum.p_value,
        p_max: report.max.p_value,
        p_cc: report.cauchy.p_value,
        p_minp: report.min_p.p_value,
    })
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs `reps` replications at level `config.gamma` with the default
/// options.
pub fn run_study(
    config: &StudyConfig,
    methods: &[Method],
    reps: u64,
    base_seed: u64,
) -> Result<StudyResult> {
    run_study_with(config, methods, reps, base_seed, RunOptions::default())
}

/// Runs a study. Any failing replication aborts the study and is reported
/// with its index; failures are never silently dropped.
pub fn run_study_with(
    config: &StudyConfig,
    methods: &[Method],
    reps: u64,
    base_seed: u64,
    options: RunOptions,
) -> Result<StudyResult> {
    if reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    if !(config.gamma > 0.0 && config.gamma < 1.0) {
        return Err(Error::invalid(format!("level {} outside (0, 1)", config.gamma)));
    }
    config.dgp.validate()?;
    let structure = dgp::build_band_matrices(
        config.dgp.n,
        config.dgp.band,
        config.dgp.dependence,
        config.dgp.t,
    )?;
    let bandwidth = config.effective_bandwidth();

    let outcomes: Vec<Result<ReplicationRecord>> = in_pool(options.threads, || {
        (0..reps)
            .into_par_iter()
            .map(|r| run_replication(config, &structure, bandwidth, base_seed, r))
            .collect()
    })?;
    let mut records = Vec::with_capacity(outcomes.len());
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(e) => {
                return Err(Error::Replication {
                    rep: rep as u64,
                    config: config.describe(),
                    source: Box::new(e),
                })
            }
        }
    }

    let rates = methods
        .iter()
        .map(|&m| {
            let hits = records.iter().filter(|r| r.p_value(m) <= config.gamma).count() as u64;
            MethodRate::from_counts(m, hits, reps)
        })
        .collect();
    Ok(StudyResult {
        schema_version: SCHEMA_VERSION,
        config: *config,
        bandwidth: bandwidth.0,
        reps,
        base_seed,
        methods: rates,
        raw: options.keep_raw.then_some(records),
    })
}

/// Grid swept by [`power_profile`].
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Sparse-uniform alphas with the dependence-matched scale constant.
    Sparsity(Vec<usize>),
    /// Fixed sparsity, varying signal strength δ.
    SignalStrength { s: usize, deltas: Vec<f64> },
}

impl Sweep {
    fn specs(&self, base: &StudyConfig) -> Vec<AlphaSpec> {
        match self {
            Sweep::Sparsity(grid) => grid
                .iter()
                .map(|&s| AlphaSpec::sparse_for(base.dgp.dependence, s))
                .collect(),
            Sweep::SignalStrength { s, deltas } => deltas
                .iter()
                .map(|&delta| AlphaSpec::SignalStrength { s: *s, delta })
                .collect(),
        }
    }
}

/// One study per grid point; point `k` uses base seed `base_seed + k + 1`
/// so the panels differ between points.
pub fn power_profile(
    base: &StudyConfig,
    sweep: &Sweep,
    methods: &[Method],
    reps: u64,
    base_seed: u64,
    options: RunOptions,
) -> Result<Vec<StudyResult>> {
    sweep
        .specs(base)
        .into_iter()
        .enumerate()
        .map(|(k, spec)| {
            let mut cfg = *base;
            cfg.dgp.alpha = spec;
            run_study_with(&cfg, methods, reps, base_seed.wrapping_add(k as u64 + 1), options)
        })
        .collect()
}

/// Summary statistics used to check limiting laws against simulated draws.
pub mod summary {
    /// Sample mean and (n − 1) standard deviation.
    pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    /// Pearson correlation.
    pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
        let (mx, sx) = mean_sd(xs);
        let (my, sy) = mean_sd(ys);
        let n = xs.len() as f64;
        let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
        cov / (sx * sy)
    }

    /// Kolmogorov–Smirnov distance sup |F_n − F| for a continuous `cdf`.
    pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn median(xs: &[f64]) -> f64 {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    }
}
