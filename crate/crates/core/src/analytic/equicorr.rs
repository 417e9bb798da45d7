use nalgebra::{DMatrix, DVector};

use crate::error::{ensure, Error, Result};
use crate::linalg;

/// Smallest eigenvalue accepted when checking that a correlation matrix is
/// positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// `d` predictors with common mutual correlation `rho`, each correlated `tau`
/// with a unit-variance response.
///
/// Construction checks `-1/(d-1) < rho < 1`, `rho, tau >= 0`, and that the
/// full `(d+1) x (d+1)` correlation matrix is positive semidefinite. For
/// `d = 1` the value of `rho` is accepted but plays no role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicorrSpec {
    d: usize,
    rho: f64,
    tau: f64,
}

impl EquicorrSpec {
    pub fn new(d: usize, rho: f64, tau: f64) -> Result<Self> {
        check_range(d, rho, tau)?;
        let spec = Self { d, rho, tau };
        let min_eig = linalg::min_eigenvalue(&spec.full_matrix());
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::Validity(format!(
                "correlation matrix for d={d}, rho={rho}, tau={tau} is not positive semidefinite: \
                 smallest eigenvalue {min_eig:.6e} is negative"
            )));
        }
        Ok(spec)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// The same correlation structure with one more predictor.
    pub fn extended(&self) -> Result<Self> {
        Self::new(self.d + 1, self.rho, self.tau)
    }

    fn full_matrix(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(d + 1, d + 1, |i, j| match (i == d, j == d) {
            (true, true) => 1.0,
            (true, false) | (false, true) => self.tau,
            _ if i == j => 1.0,
            _ => self.rho,
        })
    }
}

fn check_range(d: usize, rho: f64, tau: f64) -> Result<()> {
    ensure!(d >= 1, Constraint, "need at least one predictor");
    ensure!(
        rho.is_finite() && tau.is_finite(),
        Constraint,
        "rho and tau must be finite"
    );
    ensure!(rho < 1.0, Constraint, "rho = {rho} must be below 1");
    if d >= 2 {
        let lower = -1.0 / (d as f64 - 1.0);
        ensure!(
            rho > lower,
            Constraint,
            "rho = {rho} must exceed -1/(d-1) = {lower} for d = {d} (predictor block not positive definite)"
        );
    }
    ensure!(rho >= 0.0, Constraint, "rho = {rho} must be nonnegative");
    ensure!(tau >= 0.0, Constraint, "tau = {tau} must be nonnegative");
    ensure!(tau <= 1.0, Constraint, "tau = {tau} is not a correlation");
    Ok(())
}

/// The `(d+1) x (d+1)` correlation matrix of predictors followed by the
/// response.
pub fn build_equicorr_sigma(spec: &EquicorrSpec) -> DMatrix<f64> {
    spec.full_matrix()
}

/// Residual variance of the response after regressing on all `d` predictors,
/// from the closed form
/// `1 - d tau^2 / (1 - rho) + rho d^2 tau^2 / ((1 + (d-1) rho)(1 - rho))`.
pub fn conditional_variance(spec: &EquicorrSpec) -> f64 {
    let d = spec.d as f64;
    let (rho, tau2) = (spec.rho, spec.tau * spec.tau);
    1.0 - d * tau2 / (1.0 - rho) + rho * d * d * tau2 / ((1.0 + (d - 1.0) * rho) * (1.0 - rho))
}

/// The same quantity by brute force: `S22 - S21 S11^-1 S12` with the
/// predictor block inverted through a Cholesky factorization.
pub fn conditional_variance_direct(spec: &EquicorrSpec) -> Result<f64> {
    let sigma = spec.full_matrix();
    let d = spec.d;
    let s11 = sigma.view((0, 0), (d, d)).into_owned();
    let s12: DVector<f64> = sigma.view((0, d), (d, 1)).column(0).into_owned();
    let l = linalg::cholesky(&s11)
        .ok_or_else(|| Error::Validity("predictor block is not positive definite".into()))?;
    let solved = linalg::cholesky_solve(&l, &s12);
    Ok(sigma[(d, d)] - s12.dot(&solved))
}

/// Drop in conditional variance when an extra predictor (correlated `rho`
/// with the others and `tau` with the response) joins the `d` already
/// present. Fails when the extended structure is invalid.
pub fn variance_reduction(spec: &EquicorrSpec) -> Result<f64> {
    spec.extended()?;
    let d = spec.d as f64;
    let (rho, tau2) = (spec.rho, spec.tau * spec.tau);
    let bracket = d * d / (1.0 + (d - 1.0) * rho) - (d + 1.0) * (d + 1.0) / (1.0 + d * rho);
    Ok(tau2 / (1.0 - rho) + rho * tau2 / (1.0 - rho) * bracket)
}
