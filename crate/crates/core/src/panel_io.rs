//! File formats, rolling-window testing and residual diagnostics for real
//! return panels.
//!
//! Returns CSV: header `date,<id1>,...,<idN>`, one row per period.
//! Factors CSV: header `date,mkt_rf,smb,hml,rf`. Excess returns are formed
//! as `r_it − rf_t`; `mkt_rf` is taken as already in excess of the
//! risk-free rate.
//!
//! Study config: flat `key=value` lines, `#` starts a comment.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::dgp::{AlphaSpec, BandParams, Dependence, DgpConfig, Innovation};
use crate::dist::chi_square_sf;
use crate::error::{Error, Result};
use crate::mc::{StudyConfig, SCHEMA_VERSION};
use crate::regression::{fit_factor_model, Bandwidth, PanelData};
use crate::report::run_alpha_tests;

pub const FACTOR_COLUMNS: [&str; 4] = ["mkt_rf", "smb", "hml", "rf"];
pub const DEFAULT_WINDOW: usize = 260;
pub const DEFAULT_BOX_PIERCE_LAGS: usize = 10;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

struct Table {
    header: Vec<String>,
    dates: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let file = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| io_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("date") {
        return Err(Error::Parse {
            file,
            row: 1,
            col: 1,
            msg: "first column must be `date`".into(),
        });
    }
    let mut dates = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::Parse {
            file: file.clone(),
            row: line,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                file,
                row: line,
                col: record.len() + 1,
                msg: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let date = record[0].to_string();
        if date.is_empty() || !seen.insert(date.clone()) {
            return Err(Error::Parse {
                file,
                row: line,
                col: 1,
                msg: format!("missing or duplicate date `{date}`"),
            });
        }
        let mut values = Vec::with_capacity(header.len() - 1);
        for (c, cell) in record.iter().enumerate().skip(1) {
            // str::parse is locale-independent; NaN/inf spellings count as missing
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        file,
                        row: line,
                        col: c + 1,
                        msg: if cell.is_empty() {
                            "missing value".into()
                        } else {
                            format!("non-numeric cell `{cell}`")
                        },
                    })
                }
            }
        }
        dates.push(date);
        rows.push(values);
    }
    Ok(Table {
        header,
        dates,
        rows,
    })
}

/// Reads a returns file and a factors file into excess-return form.
pub fn load_panel(returns_path: impl AsRef<Path>, factors_path: impl AsRef<Path>) -> Result<PanelData> {
    let returns_path = returns_path.as_ref();
    let factors_path = factors_path.as_ref();
    let ret = read_table(returns_path)?;
    let fac = read_table(factors_path)?;

    if fac.header.len() != 5 || fac.header[1..] != FACTOR_COLUMNS {
        return Err(Error::Parse {
            file: factors_path.display().to_string(),
            row: 1,
            col: 2,
            msg: format!("factor header must be `date,{}`", FACTOR_COLUMNS.join(",")),
        });
    }
    let ids: Vec<String> = ret.header[1..].to_vec();
    let mut seen = HashSet::new();
    for id in &ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateSecurity(id.clone()));
        }
    }

    let fac_index: HashMap<&str, usize> =
        fac.dates.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    if let Some(d) = ret.dates.iter().find(|d| !fac_index.contains_key(d.as_str())) {
        return Err(Error::UnmatchedDate(d.clone()));
    }
    let ret_dates: HashSet<&str> = ret.dates.iter().map(String::as_str).collect();
    if let Some(d) = fac.dates.iter().find(|d| !ret_dates.contains(d.as_str())) {
        return Err(Error::UnmatchedDate(d.clone()));
    }

    let t = ret.dates.len();
    let n = ids.len();
    let mut y = Array2::zeros((t, n));
    let mut f = Array2::zeros((t, 3));
    for (row, date) in ret.dates.iter().enumerate() {
        let frow = &fac.rows[fac_index[date.as_str()]];
        let rf = frow[3];
        for j in 0..3 {
            f[[row, j]] = frow[j];
        }
        for i in 0..n {
            y[[row, i]] = ret.rows[row][i] - rf;
        }
    }
    PanelData::new(y, f, ids, ret.dates)
}

/// Writes a three-factor panel in the two-file format with `rf = 0`, so
/// loading it back reproduces the panel exactly.
pub fn write_panel(
    panel: &PanelData,
    returns_path: impl AsRef<Path>,
    factors_path: impl AsRef<Path>,
) -> Result<()> {
    if panel.n_factors() != 3 {
        return Err(Error::invalid(format!(
            "file format carries exactly 3 factors, panel has {}",
            panel.n_factors()
        )));
    }
    let mut ret = String::from("date");
    for id in panel.security_ids() {
        ret.push(',');
        ret.push_str(id);
    }
    ret.push('\n');
    let mut fac = format!("date,{}\n", FACTOR_COLUMNS.join(","));
    for (t, date) in panel.time_ids().iter().enumerate() {
        ret.push_str(date);
        for v in panel.returns().row(t) {
            let _ = write!(ret, ",{v}");
        }
        ret.push('\n');
        let f = panel.factors().row(t);
        let _ = writeln!(fac, "{date},{},{},{},0", f[0], f[1], f[2]);
    }
    let returns_path = returns_path.as_ref();
    let factors_path = factors_path.as_ref();
    std::fs::write(returns_path, ret).map_err(|e| io_err(returns_path, e))?;
    std::fs::write(factors_path, fac).map_err(|e| io_err(factors_path, e))?;
    Ok(())
}

/// A study config file: the design, test settings and an optional seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigFile {
    pub study: StudyConfig,
    pub seed: Option<u64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        file: "config".into(),
        row: line,
        col: 0,
        msg: format!("bad value `{value}` for {key}"),
    })
}

/// Parses the flat `key=value` study format.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut map: HashMap<String, (String, usize)> = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            file: "config".into(),
            row: k + 1,
            col: 0,
            msg: format!("expected key=value, got `{line}`"),
        })?;
        let key = key.trim().to_string();
        const KEYS: [&str; 14] = [
            "N", "T", "dependence", "innovation", "omega_band", "phi1", "phi2", "alpha_kind", "s",
            "c", "delta", "gamma", "bandwidth", "seed",
        ];
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                file: "config".into(),
                row: k + 1,
                col: 0,
                msg: format!("unknown key `{key}`"),
            });
        }
        map.insert(key, (value.trim().to_string(), k + 1));
    }
    let get = |key: &str| map.get(key);
    fn required<'a>(
        map: &'a HashMap<String, (String, usize)>,
        key: &str,
    ) -> Result<&'a (String, usize)> {
        map.get(key)
            .ok_or_else(|| Error::invalid(format!("config is missing `{key}`")))
    }
    let num = |key: &str| -> Result<Option<f64>> {
        get(key).map(|(v, l)| parse_value::<f64>(key, v, *l)).transpose()
    };

    let (n, nl) = required(&map, "N")?;
    let (t, tl) = required(&map, "T")?;
    let (dep, dl) = required(&map, "dependence")?;
    let n: usize = parse_value("N", n, *nl)?;
    let t: usize = parse_value("T", t, *tl)?;
    let dependence: Dependence = dep.parse().map_err(|_| Error::Parse {
        file: "config".into(),
        row: *dl,
        col: 0,
        msg: format!("dependence must be independent, m2 or infinite, got `{dep}`"),
    })?;
    let innovation = match get("innovation") {
        Some((v, _)) => v.parse::<Innovation>()?,
        None => Innovation::Normal,
    };
    let defaults = BandParams::default();
    let band = BandParams {
        omega_band: num("omega_band")?.unwrap_or(defaults.omega_band),
        phi1: num("phi1")?.unwrap_or(defaults.phi1),
        phi2: num("phi2")?.unwrap_or(defaults.phi2),
    };
    let s = get("s").map(|(v, l)| parse_value::<usize>("s", v, *l)).transpose()?;
    let alpha = match get("alpha_kind").map(|(v, _)| v.as_str()).unwrap_or("null") {
        "null" => AlphaSpec::Null,
        "sparse" => AlphaSpec::SparseUniform {
            s: s.ok_or_else(|| Error::invalid("alpha_kind=sparse needs `s`"))?,
            c: num("c")?.unwrap_or(dependence.power_constant()),
        },
        "signal" => AlphaSpec::SignalStrength {
            s: s.ok_or_else(|| Error::invalid("alpha_kind=signal needs `s`"))?,
            delta: num("delta")?.ok_or_else(|| Error::invalid("alpha_kind=signal needs `delta`"))?,
        },
        other => return Err(Error::invalid(format!("unknown alpha_kind `{other}`"))),
    };
    let seed = get("seed").map(|(v, l)| parse_value::<u64>("seed", v, *l)).transpose()?;
    let bandwidth = get("bandwidth")
        .map(|(v, l)| parse_value::<usize>("bandwidth", v, *l))
        .transpose()?;
    let dgp = DgpConfig {
        n,
        t,
        dependence,
        band,
        innovation,
        alpha,
        seed: seed.unwrap_or(0),
    };
    dgp.validate()?;
    let study = StudyConfig {
        dgp,
        bandwidth,
        gamma: num("gamma")?.unwrap_or(0.05),
    };
    if !(study.gamma > 0.0 && study.gamma < 1.0) {
        return Err(Error::invalid(format!("gamma {} outside (0, 1)", study.gamma)));
    }
    Ok(ConfigFile { study, seed })
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ConfigFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config(&text)
}

/// Inverse of [`parse_config`].
pub fn format_config(config: &ConfigFile) -> String {
    let d = &config.study.dgp;
    let mut out = format!(
        "N={}\nT={}\ndependence={}\ninnovation={}\nomega_band={}\nphi1={}\nphi2={}\n",
        d.n, d.t, d.dependence, d.innovation, d.band.omega_band, d.band.phi1, d.band.phi2
    );
    match d.alpha {
        AlphaSpec::Null => out.push_str("alpha_kind=null\n"),
        AlphaSpec::SparseUniform { s, c } => {
            let _ = write!(out, "alpha_kind=sparse\ns={s}\nc={c}\n");
        }
        AlphaSpec::SignalStrength { s, delta } => {
            let _ = write!(out, "alpha_kind=signal\ns={s}\ndelta={delta}\n");
        }
    }
    let _ = writeln!(out, "gamma={}", config.study.gamma);
    if let Some(m) = config.study.bandwidth {
        let _ = writeln!(out, "bandwidth={m}");
    }
    if let Some(seed) = config.seed {
        let _ = writeln!(out, "seed={seed}");
    }
    out
}

/// One rolling window's p-values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingEntry {
    pub window_start: String,
    pub window_end: String,
    pub p_sum: f64,
    pub p_max: f64,
    pub p_cc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingReport {
    pub schema_version: u32,
    pub window_length: usize,
    pub step: usize,
    pub entries: Vec<RollingEntry>,
}

impl RollingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_start,window_end,p_sum,p_max,p_cc\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.window_start, e.window_end, e.p_sum, e.p_max, e.p_cc
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rolling report serializes")
    }
}

/// Fits and tests every window `[k·step, k·step + window)`; bandwidth
/// defaults to ⌈min(N, window)^{1/8}⌉.
pub fn rolling_test(
    panel: &PanelData,
    window: usize,
    step: usize,
    bandwidth: Option<Bandwidth>,
) -> Result<RollingReport> {
    let total = panel.n_periods();
    if window == 0 || step == 0 {
        return Err(Error::invalid("window and step must be positive"));
    }
    if total < window {
        return Err(Error::invalid(format!(
            "panel has {total} periods, shorter than the window {window}"
        )));
    }
    let count = (total - window) / step + 1;
    let bw = bandwidth.unwrap_or_else(|| Bandwidth::default_for(panel.n_securities(), window));
    let results: Vec<Result<RollingEntry>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let start = k * step;
            let wrap = |e: Error| Error::Window {
                start: panel.time_ids()[start].clone(),
                source: Box::new(e),
            };
            let slice = panel.window(start, window).map_err(wrap)?;
            let fit = fit_factor_model(&slice).map_err(wrap)?;
            let report = run_alpha_tests(&fit, bw).map_err(wrap)?;
            Ok(RollingEntry {
                window_start: slice.time_ids()[0].clone(),
                window_end: slice.time_ids()[window - 1].clone(),
                p_sum: report.sum.p_value,
                p_max: report.max.p_value,
                p_cc: report.cauchy.p_value,
            })
        })
        .collect();
    Ok(RollingReport {
        schema_version: SCHEMA_VERSION,
        window_length: window,
        step,
        entries: results.into_iter().collect::<Result<_>>()?,
    })
}

/// Box-Pierce portmanteau statistic and its chi-square p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxPierce {
    pub q: f64,
    pub p_value: f64,
}

/// `Q = T Σ_{h=1}^L ρ̂_h²` with sample autocorrelations about the mean,
/// referred to χ²_L.
pub fn box_pierce(series: &[f64], lags: usize) -> Result<BoxPierce> {
    let t = series.len();
    if lags == 0 || t <= lags {
        return Err(Error::invalid(format!("need T > L >= 1, got T = {t}, L = {lags}")));
    }
    let mean = series.iter().sum::<f64>() / t as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if !(denom > 0.0) || denom <= 1e-28 * series.iter().map(|x| x * x).sum::<f64>() {
        return Err(Error::ZeroVarianceSeries);
    }
    let q = t as f64
        * (1..=lags)
            .map(|h| {
                let num: f64 = (h..t).map(|s| dev[s] * dev[s - h]).sum();
                (num / denom).powi(2)
            })
            .sum::<f64>();
    Ok(BoxPierce {
        q,
        p_value: chi_square_sf(q, lags)?,
    })
}

/// Per-security Box-Pierce p-values of factor-model residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    pub lags: usize,
    pub security_ids: Vec<String>,
    pub p_values: Vec<f64>,
    /// Counts over equal-width bins of [0, 1]; the last bin is closed.
    pub histogram: Vec<usize>,
}

impl DiagnosticsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("security,p_value\n");
        for (id, p) in self.security_ids.iter().zip(&self.p_values) {
            let _ = writeln!(out, "{id},{p}");
        }
        out
    }

    pub fn histogram_csv(&self) -> String {
        let bins = self.histogram.len();
        let mut out = String::from("bin_lower,bin_upper,count\n");
        for (b, c) in self.histogram.iter().enumerate() {
            let _ = writeln!(out, "{},{},{c}", b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagnostics serialize")
    }
}

/// Equal-width histogram of probabilities.
pub fn histogram(ps: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for &p in ps {
        let b = ((p * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

/// Fits the full-sample model and runs Box-Pierce on every residual series.
pub fn diagnose(panel: &PanelData, lags: usize, bins: usize) -> Result<DiagnosticsReport> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let fit = fit_factor_model(panel)?;
    let p_values = fit
        .residuals
        .columns()
        .into_iter()
        .map(|col| box_pierce(&col.to_vec(), lags).map(|b| b.p_value))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsReport {
        schema_version: SCHEMA_VERSION,
        lags,
        security_ids: panel.security_ids().to_vec(),
        histogram: histogram(&p_values, bins),
        p_values,
    })
}
