//! Discrete Green operator `u(x_i) = Σ_j W_ij f(y_j)`.
//!
//! Far from the target, `W_ij = G(x_i, y_j) w_j`. For cells within
//! [`NEAR_FACTOR`] cell diameters of the target (always including the target's
//! own cell) the weight is the integral of `G(x_i, ·)` over the cell, computed
//! by recursive halving of the cell toward the target. The recursion stops at
//! [`max_sub_depth`], where the remaining sub-cell around the target is
//! replaced by the analytic integral of the diagonal singularity over a ball of
//! the same volume.

use alloc::format;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Provenance, SampledField};
use crate::geometry::{BallProblem, Point, MAX_DIM};
use crate::green::{GreenKernel, DIAGONAL_GUARD};
use crate::grid::{Cell, CellShape, Grading, QuadratureGrid};
use crate::math::{self, CompensatedSum};

pub const NEAR_FACTOR: f64 = 2.0;
/// Sub-cells farther than this many diameters use the midpoint rule.
fn sub_far(n: usize) -> f64 {
    if n >= 4 {
        1.0
    } else {
        2.0
    }
}

/// Depth at which the subdivision stops.
pub fn max_sub_depth(n: usize) -> u32 {
    if n >= 4 {
        5
    } else {
        8
    }
}

/// Above this node count rows are recomputed on every application instead of
/// being stored.
pub const MAX_DENSE_NODES: usize = 11_000;

/// The Green operator of one kernel on one grid.
#[derive(Debug, Clone)]
pub struct GreenOperator {
    kernel: GreenKernel,
    grid: QuadratureGrid,
    shape: CellShape,
    diam: Vec<f64>,
    /// `1 - |y_j|²`.
    q: Vec<f64>,
    matrix: Option<Vec<f64>>,
}

impl GreenOperator {
    pub fn new(kernel: &GreenKernel, grid: &QuadratureGrid) -> Result<Self> {
        if kernel.problem() != grid.problem() {
            return Err(Error::Mismatch(format!(
                "kernel for n = {}, m = {} on a grid for n = {}, m = {}",
                kernel.problem().n(),
                kernel.problem().m(),
                grid.problem().n(),
                grid.problem().m()
            )));
        }
        let shape = grid.shape();
        let mut op = Self {
            kernel: kernel.clone(),
            grid: grid.clone(),
            shape,
            diam: grid.cells().iter().map(|c| c.diameter(&shape)).collect(),
            q: grid.nodes().iter().map(|y| 1.0 - y.norm_sq()).collect(),
            matrix: None,
        };
        let n = grid.len();
        if n <= MAX_DENSE_NODES {
            let mut m = vec![0.0; n * n];
            for (i, row) in m.chunks_exact_mut(n).enumerate() {
                op.row_weights(i, row);
            }
            op.matrix = Some(m);
        }
        Ok(op)
    }

    pub fn kernel(&self) -> &GreenKernel {
        &self.kernel
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Size of the stored matrix in bytes (0 when rows are recomputed).
    pub fn matrix_bytes(&self) -> usize {
        self.matrix.as_ref().map_or(0, |m| m.len() * core::mem::size_of::<f64>())
    }

    /// Stored row `i`, when the operator is dense.
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        let n = self.len();
        self.matrix.as_ref().map(|m| &m[i * n..(i + 1) * n])
    }

    /// Fills `out` with `W_ij` for target node `i`.
    pub fn row_weights(&self, i: usize, out: &mut [f64]) {
        let x = self.grid.nodes()[i];
        self.weights_at(&x, self.q[i], Some(i), out);
    }

    fn weights_at(&self, x: &Point, qx: f64, own: Option<usize>, out: &mut [f64]) {
        let nodes = self.grid.nodes();
        let weights = self.grid.weights();
        let cells = self.grid.cells();
        for j in 0..nodes.len() {
            let s2 = (*x - nodes[j]).norm_sq();
            let near = self.diam[j] * NEAR_FACTOR;
            out[j] = if Some(j) == own || s2 < near * near {
                self.cell_integral(x, qx, &cells[j], 0)
            } else {
                self.kernel.eval_parts(s2, qx * self.q[j]) * weights[j]
            };
        }
    }

    /// `∫_cell G(x, y) dy` by recursive halving toward `x`.
    pub fn cell_integral(&self, x: &Point, qx: f64, cell: &Cell, depth: u32) -> f64 {
        let shape = &self.shape;
        let vol = cell.volume(shape);
        let e = cell.extents(shape);
        let diam = math::sqrt(e.iter().map(|v| v * v).sum::<f64>()).min(2.0);
        let c = if cell.core { Point::ORIGIN } else { cell.midpoint(shape) };
        let s2 = (*x - c).norm_sq();
        let far = sub_far(shape.n) * diam;
        if s2 > far * far {
            return self.kernel.eval_parts(s2, qx * (1.0 - c.norm_sq())) * vol;
        }
        if depth == max_sub_depth(shape.n) {
            let s = math::sqrt(s2);
            if s < 0.5 * diam || s < DIAGONAL_GUARD {
                let n = shape.n;
                let rho = math::powf(vol / math::unit_ball_volume(n), 1.0 / n as f64);
                return self.kernel.small_ball_integral(x, rho);
            }
            return self.kernel.eval_parts(s2, qx * (1.0 - c.norm_sq())) * vol;
        }
        let widest = e.iter().copied().fold(0.0, f64::max);
        let mut mask = [false; MAX_DIM];
        for k in 0..shape.n {
            mask[k] = e[k] >= 0.25 * widest;
        }
        let mut children = Vec::with_capacity(16);
        cell.split(shape, mask, &mut children);
        let mut acc = CompensatedSum::new();
        for child in &children {
            acc.add(self.cell_integral(x, qx, child, depth + 1));
        }
        acc.value()
    }

    /// `u = G[f]` at every node.
    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        f.ensure_on(&self.grid)?;
        let fv = f.values();
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        match &self.matrix {
            Some(m) => {
                for row in m.chunks_exact(n) {
                    out.push(dot(row, fv));
                }
            }
            None => {
                let mut row = vec![0.0; n];
                for i in 0..n {
                    self.row_weights(i, &mut row);
                    out.push(dot(&row, fv));
                }
            }
        }
        SampledField::from_values(&self.grid, out, Provenance::Potential)
    }

    /// `G[f](x)` at an arbitrary interior point.
    pub fn potential_at(&self, x: &Point, f: &SampledField) -> Result<f64> {
        f.ensure_on(&self.grid)?;
        let qx = 1.0 - x.norm_sq();
        if qx <= 0.0 {
            return Err(Error::Domain("target must lie inside the ball".into()));
        }
        let mut row = vec![0.0; self.len()];
        self.weights_at(x, qx, None, &mut row);
        Ok(dot(&row, f.values()))
    }
}

#[inline]
fn dot(row: &[f64], f: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (a, b) in row.iter().zip(f) {
        acc.add(a * b);
    }
    acc.value()
}

/// Something that hands out Green operators for `(problem, level, grading)`.
pub trait OperatorSource {
    fn operator(&mut self, problem: &BallProblem, level: u32, grading: Grading) -> Result<Rc<GreenOperator>>;
}

/// Keeps recently used operators while their dense matrices fit in a byte budget.
#[derive(Debug, Default)]
pub struct OperatorCache {
    budget_bytes: usize,
    entries: Vec<Rc<GreenOperator>>,
    builds: usize,
}

impl OperatorCache {
    pub fn new(budget_bytes: usize) -> Self {
        Self { budget_bytes, entries: Vec::new(), builds: 0 }
    }

    /// Number of operators assembled so far.
    pub fn builds(&self) -> usize {
        self.builds
    }

    pub fn insert(&mut self, op: Rc<GreenOperator>) {
        self.entries.push(op);
        let mut used: usize = self.entries.iter().map(|o| o.matrix_bytes()).sum();
        while used > self.budget_bytes && self.entries.len() > 1 {
            used -= self.entries.remove(0).matrix_bytes();
        }
    }
}

impl OperatorCache {
    /// Cached operator for `(problem, level, grading)`, assembling it on the
    /// grid returned by `grid` on a miss.
    pub fn get_or_build(
        &mut self,
        problem: &BallProblem,
        level: u32,
        grading: Grading,
        grid: impl FnOnce() -> Result<QuadratureGrid>,
    ) -> Result<Rc<GreenOperator>> {
        let hit = self
            .entries
            .iter()
            .position(|o| o.grid.problem() == problem && o.grid.level() == level && *o.grid.grading() == grading);
        if let Some(i) = hit {
            let op = self.entries.remove(i);
            self.entries.push(op.clone());
            return Ok(op);
        }
        let grid = grid()?;
        if grid.problem() != problem || grid.level() != level || *grid.grading() != grading {
            return Err(Error::Mismatch("supplied grid does not match the request".into()));
        }
        let op = Rc::new(GreenOperator::new(&GreenKernel::new(problem)?, &grid)?);
        self.builds += 1;
        self.insert(op.clone());
        Ok(op)
    }
}

impl OperatorSource for OperatorCache {
    fn operator(&mut self, problem: &BallProblem, level: u32, grading: Grading) -> Result<Rc<GreenOperator>> {
        self.get_or_build(problem, level, grading, || QuadratureGrid::build(problem, level, grading))
    }
}

/// One-shot `G[f]` on `grid`.
pub fn apply_green_operator(kernel: &GreenKernel, grid: &QuadratureGrid, f: &SampledField) -> Result<SampledField> {
    GreenOperator::new(kernel, grid)?.apply(f)
}
