//! OLS fit of the linear factor model `y_t = α + B f_t + ε_t`.
//!
//! The intercepts are obtained through the annihilator `M_F = I − F(FᵀF)⁻¹Fᵀ`
//! and the projection weights `η = M_F 1 / (T⁻¹ 1ᵀ M_F 1)`, so that
//! `α̂_i = T⁻¹ Σ_t y_it η_t`. Every downstream estimator consumes the
//! residuals together with `η`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative pivot tolerance for the normalized factor Gram matrix.
const GRAM_PIVOT_TOL: f64 = 1e-12;
/// Floor below which `T⁻¹ 1ᵀ M_F 1` counts as zero.
const OMEGA_FLOOR: f64 = 1e-12;

/// Observed excess returns and factor realizations over a common sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    returns: Array2<f64>,
    factors: Array2<f64>,
    security_ids: Vec<String>,
    time_ids: Vec<String>,
}

impl PanelData {
    /// `returns` is T×N (row t holds every security at period t) and
    /// `factors` is T×p.
    pub fn new(
        returns: Array2<f64>,
        factors: Array2<f64>,
        security_ids: Vec<String>,
        time_ids: Vec<String>,
    ) -> Result<Self> {
        let (t, n) = returns.dim();
        let p = factors.ncols();
        if factors.nrows() != t {
            return Err(Error::DimensionMismatch(format!(
                "returns have {t} periods but factors have {}",
                factors.nrows()
            )));
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("panel has no securities".into()));
        }
        if t < p + 2 {
            return Err(Error::DimensionMismatch(format!(
                "need T >= p + 2, got T = {t}, p = {p}"
            )));
        }
        if security_ids.len() != n || time_ids.len() != t {
            return Err(Error::DimensionMismatch(format!(
                "{} security ids / {} time ids for a {t}x{n} panel",
                security_ids.len(),
                time_ids.len()
            )));
        }
        check_finite(returns.view(), 0)?;
        check_finite(factors.view(), n)?;
        let mut seen = HashSet::with_capacity(n);
        for id in &security_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateSecurity(id.clone()));
            }
        }
        Ok(Self {
            returns,
            factors,
            security_ids,
            time_ids,
        })
    }

    /// Builds a panel with generated labels `s1..sN` and `1..T`.
    pub fn from_matrices(returns: Array2<f64>, factors: Array2<f64>) -> Result<Self> {
        let (t, n) = returns.dim();
        let sec = (1..=n).map(|i| format!("s{i}")).collect();
        let time = (1..=t).map(|i| i.to_string()).collect();
        Self::new(returns, factors, sec, time)
    }

    pub fn returns(&self) -> &Array2<f64> {
        &self.returns
    }

    pub fn factors(&self) -> &Array2<f64> {
        &self.factors
    }

    pub fn security_ids(&self) -> &[String] {
        &self.security_ids
    }

    pub fn time_ids(&self) -> &[String] {
        &self.time_ids
    }

    /// Number of securities N.
    pub fn n_securities(&self) -> usize {
        self.returns.ncols()
    }

    /// Number of periods T.
    pub fn n_periods(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n_factors(&self) -> usize {
        self.factors.ncols()
    }

    /// Sub-panel over periods `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        let end = start + len;
        if end > self.n_periods() {
            return Err(Error::invalid(format!(
                "window {start}..{end} exceeds {} periods",
                self.n_periods()
            )));
        }
        Self::new(
            self.returns.slice(ndarray::s![start..end, ..]).to_owned(),
            self.factors.slice(ndarray::s![start..end, ..]).to_owned(),
            self.security_ids.clone(),
            self.time_ids[start..end].to_vec(),
        )
    }
}

fn check_finite(m: ArrayView2<f64>, col_offset: usize) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row,
                col: col + col_offset,
            });
        }
    }
    Ok(())
}

/// Truncation lag M of the long-run estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bandwidth(pub usize);

impl Bandwidth {
    /// ⌈min(N, T)^{1/8}⌉, computed in integers so exact eighth powers do
    /// not round up.
    pub fn default_for(n: usize, t: usize) -> Self {
        let target = n.min(t) as u128;
        let mut m: u128 = 0;
        while m.pow(8) < target {
            m += 1;
        }
        Bandwidth(m as usize)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Everything the tests need from one OLS fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorFit {
    /// α̂, length N.
    pub alpha_hat: Array1<f64>,
    /// B̂, N×p.
    pub beta_hat: Array2<f64>,
    /// ε̂, T×N, time-major.
    pub residuals: Array2<f64>,
    /// η, length T, sums to T.
    pub eta: Array1<f64>,
    /// T⁻¹ 1ᵀ M_F 1.
    pub omega_hat: f64,
    pub n_factors: usize,
}

impl FactorFit {
    pub fn n_securities(&self) -> usize {
        self.residuals.ncols()
    }

    pub fn n_periods(&self) -> usize {
        self.residuals.nrows()
    }
}

/// Cholesky factor of the column-normalized factor Gram matrix together
/// with the normalization, i.e. `FᵀF = D⁻¹ L Lᵀ D⁻¹`.
struct GramFactor {
    chol: Array2<f64>,
    inv_scale: Array1<f64>,
}

impl GramFactor {
    fn new(factors: ArrayView2<f64>) -> Result<Self> {
        let gram = factors.t().dot(&factors);
        let p = gram.nrows();
        let mut inv_scale = Array1::zeros(p);
        for j in 0..p {
            let d = gram[[j, j]];
            if !(d > 0.0) {
                return Err(Error::SingularFactorDesign);
            }
            inv_scale[j] = 1.0 / d.sqrt();
        }
        let normalized =
            Array2::from_shape_fn((p, p), |(i, j)| gram[[i, j]] * inv_scale[i] * inv_scale[j]);
        let chol = linalg::cholesky(normalized.view(), GRAM_PIVOT_TOL)
            .ok_or(Error::SingularFactorDesign)?;
        Ok(Self { chol, inv_scale })
    }

    /// (FᵀF)⁻¹ b.
    fn solve(&self, b: ndarray::ArrayView1<f64>) -> Array1<f64> {
        let scaled = &b * &self.inv_scale;
        let x = linalg::cholesky_solve(&self.chol, scaled.view());
        x * &self.inv_scale
    }
}

/// Projection weights `η = M_F 1 / ω̂` and `ω̂ = T⁻¹ 1ᵀ M_F 1`.
pub fn projector_weights(factors: ArrayView2<f64>) -> Result<(Array1<f64>, f64)> {
    let t = factors.nrows();
    if factors.ncols() == 0 {
        return Ok((Array1::ones(t), 1.0));
    }
    let gram = GramFactor::new(factors)?;
    let coef = gram.solve(factors.sum_axis(Axis(0)).view());
    let m_one = factors.dot(&coef).mapv(|v| 1.0 - v);
    let omega = m_one.sum() / t as f64;
    if !(omega > OMEGA_FLOOR) {
        return Err(Error::InterceptSpanned(omega));
    }
    Ok((m_one / omega, omega))
}

/// Fits every security's regression on an intercept and the factors.
pub fn fit_factor_model(panel: &PanelData) -> Result<FactorFit> {
    let y = panel.returns();
    let f = panel.factors();
    let t = panel.n_periods();
    let p = panel.n_factors();
    let (eta, omega_hat) = projector_weights(f.view())?;

    let alpha_hat = y.t().dot(&eta) / t as f64;
    // y_{·i} − α̂_i 1, then project out the factors
    let centered = y - &alpha_hat.view().insert_axis(Axis(0));
    let (beta_hat, residuals) = if p == 0 {
        (Array2::zeros((panel.n_securities(), 0)), centered)
    } else {
        let gram = GramFactor::new(f.view())?;
        let cross = f.t().dot(&centered); // p×N
        let mut coef = Array2::zeros(cross.dim());
        for (i, col) in cross.axis_iter(Axis(1)).enumerate() {
            coef.column_mut(i).assign(&gram.solve(col));
        }
        let residuals = &centered - &f.dot(&coef);
        (coef.reversed_axes(), residuals)
    };

    Ok(FactorFit {
        alpha_hat,
        beta_hat,
        residuals,
        eta,
        omega_hat,
        n_factors: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::RngStream;
    use ndarray::{array, Array2};

    fn random_matrix(rows: usize, cols: usize, stream: &mut RngStream) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| stream.sample_normal())
    }

    /// Dense Gaussian elimination with partial pivoting; deliberately not
    /// the Cholesky path used by the implementation.
    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, piv);
            b.swap(c, piv);
            for r in (c + 1)..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    /// Regresses one column on [1 F] through the normal equations.
    fn ols_oracle(y: &[f64], f: &Array2<f64>) -> Vec<f64> {
        let (t, p) = f.dim();
        let x = |r: usize, c: usize| if c == 0 { 1.0 } else { f[[r, c - 1]] };
        let xtx = (0..=p)
            .map(|i| (0..=p).map(|j| (0..t).map(|r| x(r, i) * x(r, j)).sum()).collect())
            .collect();
        let xty = (0..=p).map(|i| (0..t).map(|r| x(r, i) * y[r]).sum()).collect();
        solve_dense(xtx, xty)
    }

    #[test]
    fn mean_zero_factors_give_unit_weights() {
        let f = array![[1.0, 2.0], [-1.0, 0.5], [2.0, -1.5], [-2.0, -1.0]];
        let (eta, omega) = projector_weights(f.view()).unwrap();
        assert!((omega - 1.0).abs() < 1e-12);
        for v in eta.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_for_single_trend_factor() {
        // Element-wise M_F = I - f fᵀ / (fᵀf) with fᵀf = 30.
        let f = array![[1.0], [2.0], [3.0], [4.0]];
        let fv = [1.0, 2.0, 3.0, 4.0];
        let m_one: Vec<f64> = (0..4)
            .map(|i| (0..4).map(|j| (i == j) as u8 as f64 - fv[i] * fv[j] / 30.0).sum())
            .collect();
        let omega_oracle = m_one.iter().sum::<f64>() / 4.0;
        let (eta, omega) = projector_weights(f.view()).unwrap();
        assert!((omega - omega_oracle).abs() < 1e-14);
        assert!((omega - 1.0 / 6.0).abs() < 1e-14);
        for (e, m) in eta.iter().zip(&m_one) {
            assert!((e - m / omega_oracle).abs() < 1e-12);
        }
        assert!((eta.sum() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_t() {
        let mut s = RngStream::new(11, 0);
        for t in [5, 17, 60] {
            let f = random_matrix(t, 3, &mut s).mapv(|v| v + 0.7);
            let (eta, _) = projector_weights(f.view()).unwrap();
            assert!((eta.sum() - t as f64).abs() < 1e-8 * t as f64);
        }
    }

    #[test]
    fn singular_designs_are_rejected() {
        let f = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [4.0, 8.0]];
        assert_eq!(projector_weights(f.view()), Err(Error::SingularFactorDesign));
        let f = array![[0.0], [0.0], [0.0], [0.0]];
        assert_eq!(projector_weights(f.view()), Err(Error::SingularFactorDesign));
        // a constant factor reproduces the intercept
        let f = array![[2.0], [2.0], [2.0], [2.0]];
        assert!(matches!(
            projector_weights(f.view()),
            Err(Error::InterceptSpanned(_))
        ));
    }

    #[test]
    fn constant_returns_are_interpolated() {
        let mut s = RngStream::new(3, 0);
        let f = random_matrix(12, 2, &mut s);
        let alpha = array![0.5, -1.25, 3.0];
        let y = Array2::from_shape_fn((12, 3), |(_, i)| alpha[i]);
        let fit = fit_factor_model(&PanelData::from_matrices(y, f).unwrap()).unwrap();
        for i in 0..3 {
            assert!((fit.alpha_hat[i] - alpha[i]).abs() < 1e-12);
        }
        assert!(fit.residuals.iter().all(|v| v.abs() < 1e-12));
        assert!(fit.beta_hat.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn matches_normal_equations() {
        let mut s = RngStream::new(5, 0);
        let f = random_matrix(10, 2, &mut s).mapv(|v| v + 0.3);
        let y = random_matrix(10, 3, &mut s);
        let fit = fit_factor_model(&PanelData::from_matrices(y.clone(), f.clone()).unwrap()).unwrap();
        for i in 0..3 {
            let col: Vec<f64> = y.column(i).to_vec();
            let coef = ols_oracle(&col, &f);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(fit.alpha_hat[i], coef[0]) < 1e-10);
            for j in 0..2 {
                assert!(rel(fit.beta_hat[[i, j]], coef[j + 1]) < 1e-10);
            }
        }
    }

    #[test]
    fn residuals_are_orthogonal_and_reconstruct() {
        let mut s = RngStream::new(9, 0);
        let f = random_matrix(40, 3, &mut s).mapv(|v| v * 2.0 + 0.5);
        let y = random_matrix(40, 6, &mut s);
        let fit = fit_factor_model(&PanelData::from_matrices(y.clone(), f.clone()).unwrap()).unwrap();
        for i in 0..6 {
            let e = fit.residuals.column(i);
            let norm = e.dot(&e).sqrt();
            assert!(e.sum().abs() <= 1e-8 * norm);
            for j in 0..3 {
                assert!(f.column(j).dot(&e).abs() <= 1e-8 * norm * f.column(j).dot(&f.column(j)).sqrt());
            }
            let alpha_direct = y.column(i).dot(&fit.eta) / 40.0;
            assert!((alpha_direct - fit.alpha_hat[i]).abs() < 1e-12);
            for t in 0..40 {
                let rebuilt = fit.alpha_hat[i] + f.row(t).dot(&fit.beta_hat.row(i)) + e[t];
                assert!((rebuilt - y[[t, i]]).abs() <= 1e-8 * y[[t, i]].abs().max(1.0));
            }
        }
    }

    #[test]
    fn single_security_panel() {
        let mut s = RngStream::new(2, 0);
        let f = random_matrix(8, 1, &mut s);
        let y = random_matrix(8, 1, &mut s);
        let fit = fit_factor_model(&PanelData::from_matrices(y, f).unwrap()).unwrap();
        assert_eq!(fit.n_securities(), 1);
    }

    #[test]
    fn panel_validation() {
        let y = Array2::zeros((3, 2));
        let f = Array2::zeros((3, 2));
        assert!(PanelData::from_matrices(y, f).is_err());
        let mut y = Array2::zeros((5, 2));
        y[[2, 1]] = f64::NAN;
        assert_eq!(
            PanelData::from_matrices(y, Array2::zeros((5, 1))),
            Err(Error::NonFinite { row: 2, col: 1 })
        );
        let dup = PanelData::new(
            Array2::zeros((4, 2)),
            Array2::zeros((4, 1)),
            vec!["a".into(), "a".into()],
            (0..4).map(|i| i.to_string()).collect(),
        );
        assert_eq!(dup, Err(Error::DuplicateSecurity("a".into())));
    }

    #[test]
    fn default_bandwidth() {
        assert_eq!(Bandwidth::default_for(250, 400), Bandwidth(2));
        assert_eq!(Bandwidth::default_for(500, 400), Bandwidth(3));
        assert_eq!(Bandwidth::default_for(256, 1000), Bandwidth(2));
        assert_eq!(Bandwidth::default_for(257, 1000), Bandwidth(3));
        assert_eq!(Bandwidth::default_for(1, 10), Bandwidth(1));
    }
}
