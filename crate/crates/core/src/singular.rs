//! Unbounded solutions from data concentrated in a boundary cone.
//!
//! For `0 < α < n - m` the right-hand side `f = |x - x0|^{-(α+2m)} χ_Σ` lies
//! in `L¹_{d^m}` and `u = G[f] >= C |x - x0|^{-α}` on `Σ`. With `α, β` the
//! exponents of `(p, q)` and `max(α, β) < n - m`, the pair
//! `u = G[φ]`, `v = G[ψ]` built from `φ` (exponent `α`) and `ψ` (exponent `β`)
//! solves the system with `a = φ / v^p`, `b = ψ / u^q`, which stay bounded
//! because `βp = α + 2m` and `αq = β + 2m`.
//!
//! Nodes closer to the vertex than [`vertex_cutoff`] are left out of every
//! minimum and supremum taken here.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exponents::{classify_regime, ExponentParams, Regime};
use crate::field::{Provenance, SampledField};
use crate::geometry::{BallProblem, ConeRegion, Point, MAX_DIM};
use crate::grid::{Cell, CellShape, QuadratureGrid, FOCUS_DEPTH};
use crate::math::{self, CompensatedSum};
use crate::operator::GreenOperator;

/// Radius around the cone vertex excluded from statistics: four times the
/// finest cell size of the focus refinement.
pub fn vertex_cutoff(grid: &QuadratureGrid) -> f64 {
    grid.spacing() / f64::from(1u32 << (FOCUS_DEPTH - 2))
}

/// Maximum subdivision depth for cells cut by the cone surface.
pub fn cone_subdivision_depth(n: usize) -> u32 {
    match n {
        2 => 8,
        3 => 6,
        _ => 5,
    }
}

/// Cut cells are split until their diameter is below this fraction of their
/// distance to the vertex.
fn cut_resolution(n: usize) -> f64 {
    if n >= 4 {
        0.125
    } else {
        0.0625
    }
}

/// `|x - x0|^{-(exponent + 2m)} χ_Σ(x)`.
pub fn singular_rhs_value(problem: &BallProblem, exponent: f64, region: &ConeRegion, x: &Point) -> f64 {
    if region.contains(x) {
        math::powf(x.dist(&region.x0), -(exponent + 2.0 * problem.m() as f64))
    } else {
        0.0
    }
}

fn check_exponent(problem: &BallProblem, exponent: f64, region: &ConeRegion, grid: &QuadratureGrid) -> Result<()> {
    let nm = problem.n() as f64 - problem.m() as f64;
    if !(exponent > 0.0 && exponent < nm) {
        return Err(Error::param(format!(
            "cone exponent {exponent} must lie in (0, n - m) = (0, {nm}) for f to be in L1_(d^m)"
        )));
    }
    if grid.problem() != problem || region.dim() != problem.n() {
        return Err(Error::Mismatch("grid or cone does not match the problem".into()));
    }
    Ok(())
}

#[derive(PartialEq)]
enum Side {
    Outside,
    Inside,
    Cut,
}

/// Position of the ball `B(c, r)` relative to the cone.
fn side(region: &ConeRegion, c: &Point, r: f64) -> Side {
    let v = *c - region.x0;
    let rho = v.norm();
    if rho - r >= region.cap_radius {
        return Side::Outside;
    }
    if rho <= r {
        return Side::Cut;
    }
    let cos = (v.dot(&region.axis) / rho).clamp(-1.0, 1.0);
    let angle = math::acos(cos);
    let spread = math::asin(r / rho);
    if angle - spread > region.half_aperture {
        Side::Outside
    } else if angle + spread < region.half_aperture && rho + r < region.cap_radius {
        Side::Inside
    } else {
        Side::Cut
    }
}

/// `∫_cell g χ_Σ`, subdividing cells cut by the cone surface and cells whose
/// size is not small against their distance to the vertex.
fn cone_cell_integral(
    shape: &CellShape,
    cell: &Cell,
    region: &ConeRegion,
    g: &dyn Fn(&Point) -> f64,
    vertex_scale: f64,
    depth: u32,
) -> f64 {
    let c = cell.centroid(shape);
    let diam = cell.diameter(shape);
    let pos = side(region, &c, diam);
    if pos == Side::Outside {
        return 0.0;
    }
    let rho = c.dist(&region.x0);
    let resolved = match pos {
        Side::Inside => 2.0 * diam < rho,
        _ if rho <= diam => diam < vertex_scale,
        _ => diam < cut_resolution(shape.n) * rho,
    };
    if resolved || depth == 0 {
        return if region.contains(&c) { g(&c) * cell.volume(shape) } else { 0.0 };
    }
    let e = cell.extents(shape);
    let widest = e.iter().copied().fold(0.0, f64::max);
    let mut mask = [false; MAX_DIM];
    for k in 0..shape.n {
        mask[k] = e[k] >= 0.25 * widest;
    }
    let mut children = Vec::with_capacity(16);
    cell.split(shape, mask, &mut children);
    let mut acc = CompensatedSum::new();
    for child in &children {
        acc.add(cone_cell_integral(shape, child, region, g, vertex_scale, depth - 1));
    }
    acc.value()
}

/// `∫_{cell_j} g χ_Σ` for every cell of `grid`.
pub fn cone_cell_integrals(grid: &QuadratureGrid, region: &ConeRegion, g: &dyn Fn(&Point) -> f64) -> Vec<f64> {
    let shape = grid.shape();
    let depth = cone_subdivision_depth(shape.n);
    let vertex_scale = grid.spacing() / (1u32 << (FOCUS_DEPTH + 2)) as f64;
    grid.cells().iter().map(|cell| cone_cell_integral(&shape, cell, region, g, vertex_scale, depth)).collect()
}

/// `|x - x0|^{-(exponent + 2m)} χ_Σ(x)` at the nodes of `grid`.
pub fn build_singular_rhs(
    problem: &BallProblem,
    exponent: f64,
    region: &ConeRegion,
    grid: &QuadratureGrid,
) -> Result<SampledField> {
    check_exponent(problem, exponent, region, grid)?;
    SampledField::from_fn(grid, Provenance::RightHandSide, |x| singular_rhs_value(problem, exponent, region, x))
}

/// `‖f‖_{L^p_{d^m}}` of the cone data, integrated cell by cell with subdivision
/// of cells cut by the cone surface. Node values misjudge the mass of cells
/// the cone passes through, which does not shrink under refinement for n = 4.
pub fn singular_rhs_norm(
    problem: &BallProblem,
    exponent: f64,
    region: &ConeRegion,
    grid: &QuadratureGrid,
    p: f64,
) -> Result<f64> {
    check_exponent(problem, exponent, region, grid)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("data norm exponent p = {p} must be finite and >= 1")));
    }
    let e = -(exponent + 2.0 * problem.m() as f64) * p;
    let m = problem.m() as i32;
    let x0 = region.x0;
    let integrals = cone_cell_integrals(grid, region, &|x| math::powf(x.dist(&x0), e) * math::powi(1.0 - x.norm(), m));
    Ok(math::powf(math::sum(integrals), 1.0 / p))
}

/// `min u(x) |x - x0|^exponent` over cone nodes at least `cutoff` from the vertex.
pub fn verify_pointwise_lower_bound(
    u: &SampledField,
    grid: &QuadratureGrid,
    exponent: f64,
    region: &ConeRegion,
    cutoff: f64,
) -> Result<f64> {
    u.ensure_on(grid)?;
    let mut c = f64::INFINITY;
    for (x, v) in grid.nodes().iter().zip(u.values()) {
        let r = x.dist(&region.x0);
        if r >= cutoff && region.contains(x) {
            c = c.min(v * math::powf(r, exponent));
        }
    }
    if c == f64::INFINITY {
        return Err(Error::Resolution(format!("no cone nodes farther than {cutoff} from the vertex")));
    }
    Ok(c)
}

/// Largest value of `u` over nodes at least `cutoff` from `x0`.
pub fn near_vertex_max(u: &SampledField, grid: &QuadratureGrid, x0: &Point, cutoff: f64) -> Result<f64> {
    u.ensure_on(grid)?;
    let mut best = f64::NEG_INFINITY;
    for (x, v) in grid.nodes().iter().zip(u.values()) {
        if x.dist(x0) >= cutoff {
            best = best.max(*v);
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Resolution("no nodes outside the vertex cutoff".into()));
    }
    Ok(best)
}

/// The fields of one counterexample on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSystem {
    /// `(p, q)` in the order given, with `α, β` for that order.
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub region: ConeRegion,
    pub level: u32,
    pub u: SampledField,
    pub v: SampledField,
    pub phi: SampledField,
    pub psi: SampledField,
    pub a: SampledField,
    pub b: SampledField,
    /// `min u |x-x0|^α` and `min v |x-x0|^β` over cone nodes.
    pub c_u: f64,
    pub c_v: f64,
    /// Suprema of `a`, `b` outside the vertex cutoff.
    pub sup_a: f64,
    pub sup_b: f64,
    pub near_vertex_max_u: f64,
    pub cutoff: f64,
}

/// Builds `φ, ψ, u, v, a, b` for `(p, q)` in the singular regime on the grid of `op`.
pub fn construct_counterexample(p: f64, q: f64, op: &GreenOperator, region: &ConeRegion) -> Result<SingularSystem> {
    let grid = op.grid();
    let problem = *grid.problem();
    let (n, m) = (problem.n(), problem.m());
    let params = ExponentParams::new(p, q, m)?;
    let regime = classify_regime(&params, n, m);
    if regime != Regime::Singular {
        return Err(Error::NotApplicable(format!(
            "cone counterexample needs max(alpha, beta) < n - m; got {} vs {} ({})",
            params.max_exponent(),
            n as f64 - m as f64,
            regime.name()
        )));
    }
    let d = p * q - 1.0;
    let alpha = 2.0 * m as f64 * (p + 1.0) / d;
    let beta = 2.0 * m as f64 * (q + 1.0) / d;

    let phi = build_singular_rhs(&problem, alpha, region, grid)?;
    let psi = build_singular_rhs(&problem, beta, region, grid)?;
    let u = op.apply(&phi)?;
    let v = op.apply(&psi)?;
    if let Some(i) = u.values().iter().chain(v.values()).position(|&x| !(x > 0.0)) {
        return Err(Error::Invariant(alloc::vec![format!("solution not positive at node {}", i % grid.len())]));
    }
    // φ and ψ vanish off the cone, so a and b do too.
    let a = phi.zip_with(&v, Provenance::RightHandSide, |f, w| if f == 0.0 { 0.0 } else { f / math::powf(w, p) })?;
    let b = psi.zip_with(&u, Provenance::RightHandSide, |f, w| if f == 0.0 { 0.0 } else { f / math::powf(w, q) })?;

    let cutoff = vertex_cutoff(grid);
    let c_u = verify_pointwise_lower_bound(&u, grid, alpha, region, cutoff)?;
    let c_v = verify_pointwise_lower_bound(&v, grid, beta, region, cutoff)?;
    let sup_a = near_vertex_max(&a, grid, &region.x0, cutoff)?;
    let sup_b = near_vertex_max(&b, grid, &region.x0, cutoff)?;
    let near = near_vertex_max(&u, grid, &region.x0, cutoff)?;
    Ok(SingularSystem {
        p,
        q,
        alpha,
        beta,
        region: *region,
        level: grid.level(),
        u,
        v,
        phi,
        psi,
        a,
        b,
        c_u,
        c_v,
        sup_a,
        sup_b,
        near_vertex_max_u: near,
        cutoff,
    })
}

/// `(‖u - G[a v^p]‖_∞ / ‖u‖_∞, ‖v - G[b u^q]‖_∞ / ‖v‖_∞)`.
pub fn verify_system_residual(system: &SingularSystem, op: &GreenOperator) -> Result<(f64, f64)> {
    let (un, vn) = (system.u.max_abs(), system.v.max_abs());
    if !(un > 0.0 && vn > 0.0) {
        return Err(Error::Precondition("residual of a zero system is undefined".into()));
    }
    let (p, q) = (system.p, system.q);
    let av = system.a.zip_with(&system.v, Provenance::RightHandSide, |a, v| a * math::powf(v, p))?;
    let bu = system.b.zip_with(&system.u, Provenance::RightHandSide, |b, u| b * math::powf(u, q))?;
    let ru = op.apply(&av)?;
    let rv = op.apply(&bu)?;
    let dev = |x: &SampledField, y: &SampledField| -> f64 {
        x.values().iter().zip(y.values()).fold(0.0f64, |acc, (a, b)| acc.max(math::abs(a - b)))
    };
    Ok((dev(&system.u, &ru) / un, dev(&system.v, &rv) / vn))
}

/// Per-level quantities of a refinement study of the counterexample.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularLevel {
    pub level: u32,
    pub nodes: usize,
    pub sup_a: f64,
    pub sup_b: f64,
    pub c_u: f64,
    pub c_v: f64,
    pub near_vertex_max_u: f64,
    pub residual_u: f64,
    pub residual_v: f64,
}

impl SingularLevel {
    pub fn from_system(system: &SingularSystem, op: &GreenOperator) -> Result<Self> {
        let (residual_u, residual_v) = verify_system_residual(system, op)?;
        Ok(Self {
            level: system.level,
            nodes: op.len(),
            sup_a: system.sup_a,
            sup_b: system.sup_b,
            c_u: system.c_u,
            c_v: system.c_v,
            near_vertex_max_u: system.near_vertex_max_u,
            residual_u,
            residual_v,
        })
    }
}

/// Ratios `x_{j+1} / x_j` of consecutive values.
pub fn growth_factors(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] / w[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::GreenKernel;
    use crate::grid::Grading;

    fn setup(level: u32) -> (GreenOperator, ConeRegion) {
        let p = BallProblem::new(3, 1).unwrap();
        let region = ConeRegion::default_for(&p);
        let g = QuadratureGrid::build(&p, level, Grading::default().with_focus(region.x0)).unwrap();
        (GreenOperator::new(&GreenKernel::new(&p).unwrap(), &g).unwrap(), region)
    }

    #[test]
    fn rhs_vanishes_off_cone_and_rejects_bad_exponents() {
        let (op, region) = setup(0);
        let p = *op.grid().problem();
        let f = build_singular_rhs(&p, 1.0, &region, op.grid()).unwrap();
        for (x, v) in op.grid().nodes().iter().zip(f.values()) {
            assert_eq!(*v == 0.0, !region.contains(x));
        }
        assert_eq!(singular_rhs_value(&p, 1.0, &region, &Point::ORIGIN), 0.0);
        assert!(build_singular_rhs(&p, 2.0, &region, op.grid()).is_err());
        assert!(build_singular_rhs(&p, 0.0, &region, op.grid()).is_err());
    }

    #[test]
    fn regime_gate() {
        let (op, region) = setup(0);
        assert!(matches!(construct_counterexample(1.5, 1.5, &op, &region), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn lower_bound_scales_with_u() {
        let (op, region) = setup(1);
        let p = *op.grid().problem();
        let f = build_singular_rhs(&p, 1.0, &region, op.grid()).unwrap();
        let u = op.apply(&f).unwrap();
        let cut = vertex_cutoff(op.grid());
        let c = verify_pointwise_lower_bound(&u, op.grid(), 1.0, &region, cut).unwrap();
        let u3 = u.map(Provenance::Potential, |v| 3.0 * v).unwrap();
        let c3 = verify_pointwise_lower_bound(&u3, op.grid(), 1.0, &region, cut).unwrap();
        assert!(c > 0.0);
        assert!((c3 - 3.0 * c).abs() <= 1e-14 * c3);
        assert!(matches!(verify_pointwise_lower_bound(&u, op.grid(), 1.0, &region, 10.0), Err(Error::Resolution(_))));
    }
}
