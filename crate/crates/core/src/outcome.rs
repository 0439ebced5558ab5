use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The four test procedures the toolkit can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Sum,
    Max,
    CauchyCombo,
    MinPCombo,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sum, Method::Max, Method::CauchyCombo, Method::MinPCombo];

    pub fn label(self) -> &'static str {
        match self {
            Method::Sum => "SUM",
            Method::Max => "MAX",
            Method::CauchyCombo => "CC",
            Method::MinPCombo => "MINP",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SUM" => Ok(Method::Sum),
            "MAX" => Ok(Method::Max),
            "CC" | "CAUCHY" => Ok(Method::CauchyCombo),
            "MINP" | "MIN-P" => Ok(Method::MinPCombo),
            other => Err(Error::invalid(format!("unknown method {other}"))),
        }
    }
}

/// Result of one test on one panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub method: Method,
    pub statistic: f64,
    /// Standardized z for SUM, the centered statistic for MAX, absent for
    /// the combiners.
    pub location_scale_adjusted: Option<f64>,
    pub p_value: f64,
}

impl TestOutcome {
    pub fn new(
        method: Method,
        statistic: f64,
        location_scale_adjusted: Option<f64>,
        p_value: f64,
    ) -> Result<Self> {
        if !statistic.is_finite() || location_scale_adjusted.is_some_and(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{method} statistic is not finite")));
        }
        if !(0.0..=1.0).contains(&p_value) {
            return Err(Error::invalid(format!("{method} p-value {p_value} outside [0, 1]")));
        }
        Ok(Self {
            method,
            statistic,
            location_scale_adjusted,
            p_value,
        })
    }

    pub fn rejects(&self, level: f64) -> bool {
        self.p_value <= level
    }
}
