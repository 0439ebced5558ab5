use serde::Serialize;

use crate::combine::{cauchy_combine, min_p_combine};
use crate::error::Result;
use crate::max_test::{self, MaxTestInternals};
use crate::outcome::TestOutcome;
use crate::regression::{Bandwidth, FactorFit};
use crate::sum_test::{self, SumTestInternals};

/// SUM, MAX and both combinations evaluated on one fit.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaTestReport {
    pub bandwidth: usize,
    pub sum: TestOutcome,
    pub max: TestOutcome,
    pub cauchy: TestOutcome,
    pub min_p: TestOutcome,
}

impl AlphaTestReport {
    pub fn outcomes(&self) -> [TestOutcome; 4] {
        [self.sum, self.max, self.cauchy, self.min_p]
    }
}

/// Runs every test on `fit`, sharing one Gram matrix between the sum-test
/// estimators.
pub fn run_alpha_tests(fit: &FactorFit, bandwidth: Bandwidth) -> Result<AlphaTestReport> {
    let (report, _, _) = run_alpha_tests_detailed(fit, bandwidth)?;
    Ok(report)
}

/// Like [`run_alpha_tests`] but also hands back the estimator internals.
pub fn run_alpha_tests_detailed(
    fit: &FactorFit,
    bandwidth: Bandwidth,
) -> Result<(AlphaTestReport, SumTestInternals, MaxTestInternals)> {
    let gram = sum_test::weighted_gram(fit.residuals.view(), fit.eta.view());
    let sum_int = sum_test::internals_from_gram(&gram, fit.n_factors, bandwidth)?;
    let sum = sum_test::outcome_from_internals(fit, &sum_int)?;
    let max_int = max_test::max_test_internals(fit, bandwidth)?;
    let max = max_test::outcome_from_internals(fit, &max_int)?;
    let cauchy = cauchy_combine(max.p_value, sum.p_value)?;
    let min_p = min_p_combine(max.p_value, sum.p_value)?;
    Ok((
        AlphaTestReport {
            bandwidth: bandwidth.0,
            sum,
            max,
            cauchy,
            min_p,
        },
        sum_int,
        max_int,
    ))
}
