use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::system::SmoothingSystem;
use crate::error::{Error, Result};
use crate::geometry::NurbsSurface;

/// Condition numbers above this are treated as numerically singular.
pub const SINGULAR_CONDITION: f64 = 1.0 / f64::EPSILON;

/// How `trace(S)` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TraceMethod {
    /// `trace(A^-1 Psi^T Psi)` from the explicit inverse.
    #[default]
    Exact,
    /// Hutchinson estimator with Rademacher probes.
    Hutchinson { probes: usize, seed: u64 },
}

/// Penalised least-squares fit at a fixed smoothing parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub lambda: f64,
    /// Coefficients of the free basis functions (see
    /// [`SmoothingSystem::expand`]).
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residual_sq: f64,
    /// Equivalent degrees of freedom, `trace(S)`.
    pub edf: f64,
    /// `None` when `N <= trace(S)`.
    pub gcv: Option<f64>,
    /// `None` when `N <= trace(S)`.
    pub sigma2: Option<f64>,
    /// `||A||_inf ||A^-1||_inf`.
    pub cond_inf: f64,
    a_inv: DMatrix<f64>,
    cov_factor: DMatrix<f64>,
}

/// Value and estimated variance of the fitted field at a new location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub variance: Option<f64>,
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `A = Psi^T Psi + lambda R`.
pub fn system_matrix(sys: &SmoothingSystem, lambda: f64) -> DMatrix<f64> {
    &sys.gram + &sys.penalty * lambda
}

fn defined_denominator(n: usize, edf: f64) -> Option<f64> {
    let d = n as f64 - edf;
    (d > 1e-8 * n as f64).then_some(d)
}

/// Solves `(Psi^T Psi + lambda R) f = Psi^T y` by Cholesky factorisation.
pub fn solve_fixed_lambda(sys: &SmoothingSystem, y: &[f64], lambda: f64) -> Result<FitResult> {
    solve_with(sys, y, lambda, TraceMethod::Exact)
}

pub fn solve_with(sys: &SmoothingSystem, y: &[f64], lambda: f64, trace: TraceMethod) -> Result<FitResult> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if y.len() != sys.num_obs() {
        return Err(Error::InvalidInput(format!(
            "{} values for {} observation points",
            y.len(),
            sys.num_obs()
        )));
    }
    let n = sys.num_obs();
    let nh = sys.dim();
    let a = system_matrix(sys, lambda);
    let chol = a.clone().cholesky().ok_or_else(|| {
        Error::Solve(format!(
            "A = Psi^T Psi + lambda R is not positive definite at lambda = {lambda:e} \
             (rank-deficient Psi: {n} observations for {nh} coefficients?)"
        ))
    })?;
    let a_inv = chol.inverse();
    let cond_inf = inf_norm(&a) * inf_norm(&a_inv);
    if !(cond_inf < SINGULAR_CONDITION) {
        return Err(Error::Solve(format!(
            "A is numerically singular at lambda = {lambda:e} (condition {cond_inf:e}); \
             Psi is rank deficient and the penalty does not fix the null space"
        )));
    }
    let rhs = DVector::from_vec(sys.psi.t_mul_vec(y));
    let coef = chol.solve(&rhs);
    let coefficients: Vec<f64> = coef.iter().copied().collect();
    let fitted = sys.psi.mul_vec(&coefficients);
    let residual_sq: f64 = fitted.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();

    let edf = match trace {
        TraceMethod::Exact => a_inv.component_mul(&sys.gram.transpose()).sum(),
        TraceMethod::Hutchinson { probes, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let probes = probes.max(1);
            let mut acc = 0.0;
            for _ in 0..probes {
                let z = DVector::from_fn(nh, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
                let gz = &sys.gram * &z;
                acc += z.dot(&chol.solve(&gz));
            }
            acc / probes as f64
        }
    };
    let denom = defined_denominator(n, edf);
    let gcv = denom.map(|d| n as f64 * residual_sq / (d * d));
    let sigma2 = denom.map(|d| residual_sq / d);
    let cov_factor = &a_inv * &sys.gram * &a_inv;
    let cov_factor = (&cov_factor + cov_factor.transpose()) * 0.5;
    Ok(FitResult {
        lambda,
        coefficients,
        fitted,
        residual_sq,
        edf,
        gcv,
        sigma2,
        cond_inf,
        a_inv,
        cov_factor,
    })
}

/// GCV score `N ||y_hat - y||^2 / (N - trace S)^2`.
pub fn gcv_value(sys: &SmoothingSystem, y: &[f64], lambda: f64) -> Result<f64> {
    let fit = solve_fixed_lambda(sys, y, lambda)?;
    fit.gcv.ok_or(Error::GcvUndefined {
        n: sys.num_obs(),
        trace: fit.edf,
    })
}

impl FitResult {
    /// `A^-1`.
    pub fn a_inverse(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    /// `A^-1 Psi^T Psi A^-1`, the coefficient covariance per unit noise
    /// variance.
    pub fn covariance_factor(&self) -> &DMatrix<f64> {
        &self.cov_factor
    }

    /// Estimated coefficient covariance `sigma2_hat A^-1 Psi^T Psi A^-1`.
    pub fn coefficient_covariance(&self) -> Option<DMatrix<f64>> {
        self.sigma2.map(|s2| &self.cov_factor * s2)
    }

    /// Dense smoothing matrix `S = Psi A^-1 Psi^T`.
    pub fn smoothing_matrix(&self, sys: &SmoothingSystem) -> DMatrix<f64> {
        let psi = sys.psi.to_dense();
        let s = &psi * &self.a_inv * psi.transpose();
        (&s + s.transpose()) * 0.5
    }

    /// Estimated variance of each fitted value, the diagonal of
    /// `sigma2_hat S S^T`.
    pub fn fitted_variance(&self, sys: &SmoothingSystem) -> Option<Vec<f64>> {
        let s2 = self.sigma2?;
        Some(
            (0..sys.num_obs())
                .map(|i| {
                    let (c, v) = sys.psi.row(i);
                    s2 * quad_form(&self.cov_factor, c, v)
                })
                .collect(),
        )
    }

    /// Coefficients of all `N^h` basis functions.
    pub fn full_coefficients(&self, sys: &SmoothingSystem) -> Vec<f64> {
        sys.expand(&self.coefficients)
    }

    /// Galerkin residual `A f - Psi^T y`.
    pub fn galerkin_residual(&self, sys: &SmoothingSystem, y: &[f64]) -> Vec<f64> {
        let a = system_matrix(sys, self.lambda);
        let af = &a * DVector::from_column_slice(&self.coefficients);
        let rhs = sys.psi.t_mul_vec(y);
        af.iter().zip(rhs).map(|(a, b)| a - b).collect()
    }
}

fn quad_form(m: &DMatrix<f64>, idx: &[usize], val: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, va) in idx.iter().zip(val) {
        for (&b, vb) in idx.iter().zip(val) {
            acc += va * m[(a, b)] * vb;
        }
    }
    acc
}

/// Predicted value `psi(s)^T f` and plug-in variance
/// `sigma2_hat psi^T A^-1 Psi^T Psi A^-1 psi` at a new parametric location.
pub fn predict(fit: &FitResult, sys: &SmoothingSystem, surface: &NurbsSurface, s: [f64; 2]) -> Result<Prediction> {
    let r = surface.basis(s, 0)?;
    let (idx, val) = sys.restrict_row(&r.indices, &r.values);
    let value = idx.iter().zip(&val).map(|(&k, v)| v * fit.coefficients[k]).sum();
    let variance = fit.sigma2.map(|s2| s2 * quad_form(&fit.cov_factor, &idx, &val));
    Ok(Prediction { value, variance })
}

/// `sigma2_hat A^-1 Psi^T Psi A^-1`; `None` when the noise variance is
/// undefined.
pub fn coefficient_covariance(fit: &FitResult) -> Option<DMatrix<f64>> {
    fit.coefficient_covariance()
}
