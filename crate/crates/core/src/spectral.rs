//! Principal eigenpair of `(-Δ)^m` on the ball by power iteration on the
//! Green operator, which is positivity improving:
//!
//! ```text
//! φ_{j+1} = G[φ_j] / ∫ G[φ_j],   λ = ∫ φ_j / ∫ G[φ_j],   φ_0 ≡ 1.
//! ```

use alloc::format;

use crate::error::{Error, Result};
use crate::field::{Provenance, SampledField};
use crate::math;
use crate::operator::GreenOperator;

/// Default tolerance on the relative change of λ between iterations.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;
/// Default tolerance on `‖G[φ] - φ/λ‖_∞ / ‖φ‖_∞`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// `(λ_{1,m}, φ_{1,m})` with `∫ φ = 1` on its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub eigenfunction: SampledField,
    pub iterations: usize,
    pub residual: f64,
    pub m: usize,
}

/// Power iteration until the relative change of λ is below `tol` and the
/// residual is below `residual_tol`.
pub fn principal_eigenpair(op: &GreenOperator, tol: f64, residual_tol: f64, max_iters: usize) -> Result<EigenPair> {
    if !(tol > 0.0) || !(residual_tol > 0.0) {
        return Err(Error::param("eigen tolerances must be positive"));
    }
    let grid = op.grid();
    let total = grid.total_weight();
    let mut phi = SampledField::from_fn(grid, Provenance::Potential, |_| 1.0 / total)?;
    let mut gphi = op.apply(&phi)?;
    let mut lambda = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        let mass = grid.integrate_values(gphi.values());
        if !(mass > 0.0) {
            return Err(Error::Invariant(alloc::vec![format!("non-positive mass {mass} in power iteration")]));
        }
        let next_lambda = grid.integrate_values(phi.values()) / mass;
        phi = gphi.map(Provenance::Potential, |v| v / mass)?;
        gphi = op.apply(&phi)?;
        let phi_max = phi.max_abs();
        residual =
            phi.values().iter().zip(gphi.values()).fold(0.0f64, |acc, (p, g)| acc.max(math::abs(g - p / next_lambda)))
                / phi_max;
        let change = math::abs(next_lambda - lambda) / next_lambda;
        lambda = next_lambda;
        if change < tol && residual < residual_tol {
            return Ok(EigenPair {
                eigenvalue: lambda,
                eigenfunction: phi,
                iterations: it,
                residual,
                m: op.kernel().problem().m(),
            });
        }
    }
    Err(Error::Convergence { iterations: max_iters, residual })
}

/// `(c1, c2) = (min φ/d^m, max φ/d^m)` over the nodes of the pair's grid.
pub fn verify_sandwich(pair: &EigenPair, op: &GreenOperator) -> Result<(f64, f64)> {
    let grid = op.grid();
    pair.eigenfunction.ensure_on(grid)?;
    let m = pair.m as i32;
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for (x, phi) in grid.nodes().iter().zip(pair.eigenfunction.values()) {
        let r = phi / math::powi(1.0 - x.norm(), m);
        c1 = c1.min(r);
        c2 = c2.max(r);
    }
    if !(c1 > 0.0 && c2.is_finite()) {
        return Err(Error::Invariant(alloc::vec![format!("sandwich constants c1 = {c1}, c2 = {c2}")]));
    }
    Ok((c1, c2))
}

/// `∫ u φ_{1,m}` on the pair's grid.
pub fn eigen_moment(u: &SampledField, pair: &EigenPair, op: &GreenOperator) -> Result<f64> {
    let grid = op.grid();
    u.ensure_on(grid)?;
    pair.eigenfunction.ensure_on(grid)?;
    Ok(math::sum(grid.weights().iter().zip(u.values()).zip(pair.eigenfunction.values()).map(|((w, a), b)| w * a * b)))
}
