//! Graded quadrature grids on the unit ball.
//!
//! The ball is tiled by boxes in hyperspherical parameter space
//! `(t, angles...)`, with radius `r(t) = 1 - (1 - t)^g` so that shells cluster
//! toward the sphere. Each box is one quadrature cell: its weight is the exact
//! Euclidean volume of the box and its node is the centroid of the box in
//! parameter space under the product volume measure. The innermost shell is a
//! single ball-shaped cell whose node is the origin.
//!
//! With a focus point, cells are split (per dimension, by halving) until each
//! extent is at most a fixed fraction of the distance to the focus, for at
//! most [`FOCUS_DEPTH`] levels below the base cell.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{BallProblem, Point, MAX_DIM};
use crate::math::{self, PI};

/// Maximum number of halvings applied to a base cell around a focus point.
pub const FOCUS_DEPTH: u32 = 6;
/// A cell near the focus is split along every dimension whose extent exceeds
/// `dist / focus_ratio(n)`.
pub fn focus_ratio(n: usize) -> f64 {
    // in four dimensions the refined zone would hold most of the nodes
    if n >= 4 {
        1.0
    } else {
        2.0
    }
}
/// Default boundary-grading exponent.
pub const DEFAULT_GRADING: f64 = 2.0;

/// Boundary grading exponent and optional point of local refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub exponent: f64,
    pub focus: Option<Point>,
}

impl Default for Grading {
    fn default() -> Self {
        Self { exponent: DEFAULT_GRADING, focus: None }
    }
}

impl Grading {
    pub fn boundary(exponent: f64) -> Self {
        Self { exponent, focus: None }
    }

    pub fn with_focus(mut self, focus: Point) -> Self {
        self.focus = Some(focus);
        self
    }
}

/// Base tangential spacing at level 0. Chosen per dimension so that the
/// reference levels stay at a few thousand nodes.
pub fn base_spacing(n: usize) -> f64 {
    match n {
        2 => 0.5,
        3 => 1.0,
        _ => 2.0,
    }
}

const GL_X: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_W: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// `∫ x w(x) dx / ∫ w(x) dx` on `[a, b]` by 8-point Gauss-Legendre.
fn weighted_centroid(a: f64, b: f64, w: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, gw) in GL_X.iter().zip(GL_W.iter()) {
        for s in [-1.0, 1.0] {
            let t = mid + s * half * x;
            let v = gw * w(t);
            num += v * t;
            den += v;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        mid
    }
}

/// Largest value of `sin` on `[a, b] ⊂ [0, π]`.
fn sin_max(a: f64, b: f64) -> f64 {
    if a <= PI / 2.0 && b >= PI / 2.0 {
        1.0
    } else {
        math::sin(a).max(math::sin(b))
    }
}

/// `r^n` differences without cancellation: `b^k - a^k = (b - a) Σ b^j a^{k-1-j}`.
fn pow_diff(a: f64, b: f64, db: f64, k: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..k {
        s += math::powi(b, j as i32) * math::powi(a, (k - 1 - j) as i32);
    }
    db * s
}

/// One quadrature cell: a box in `(t, angle_1, ..., angle_{n-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
    /// The ball-shaped innermost cell, whose node is the origin.
    pub core: bool,
}

/// Mapping data shared by all cells of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellShape {
    pub n: usize,
    pub grading: f64,
}

impl CellShape {
    #[inline]
    pub fn radius(&self, t: f64) -> f64 {
        1.0 - math::powf(1.0 - t, self.grading)
    }

    /// Upper end of each parameter range.
    pub fn param_max(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else if k == self.n - 1 {
            2.0 * PI
        } else {
            PI
        }
    }

    /// Angular density factor of coordinate `k >= 1`: `sin^{n-1-k}`.
    fn angular_power(&self, k: usize) -> i32 {
        (self.n - 1 - k) as i32
    }

    /// Maps `(r, angles)` to Cartesian coordinates.
    pub fn to_point(&self, r: f64, ang: &[f64; MAX_DIM]) -> Point {
        let mut p = [0.0; MAX_DIM];
        match self.n {
            2 => {
                p[0] = r * math::cos(ang[1]);
                p[1] = r * math::sin(ang[1]);
            }
            3 => {
                let st = math::sin(ang[1]);
                p[0] = r * st * math::cos(ang[2]);
                p[1] = r * st * math::sin(ang[2]);
                p[2] = r * math::cos(ang[1]);
            }
            _ => {
                let sp = math::sin(ang[1]);
                let st = math::sin(ang[2]);
                p[0] = r * sp * st * math::cos(ang[3]);
                p[1] = r * sp * st * math::sin(ang[3]);
                p[2] = r * sp * math::cos(ang[2]);
                p[3] = r * math::cos(ang[1]);
            }
        }
        Point(p)
    }
}

impl Cell {
    fn radial_bounds(&self, shape: &CellShape) -> (f64, f64, f64) {
        let ra = shape.radius(self.lo[0]);
        let rb = shape.radius(self.hi[0]);
        let dr = math::powf(1.0 - self.lo[0], shape.grading) - math::powf(1.0 - self.hi[0], shape.grading);
        (ra, rb, dr)
    }

    /// Exact Euclidean volume.
    pub fn volume(&self, shape: &CellShape) -> f64 {
        let n = shape.n;
        let (ra, rb, dr) = self.radial_bounds(shape);
        let mut v = pow_diff(ra, rb, dr, n) / n as f64;
        for k in 1..n {
            let (a, b) = (self.lo[k], self.hi[k]);
            v *= match shape.angular_power(k) {
                0 => b - a,
                1 => 2.0 * math::sin(0.5 * (a + b)) * math::sin(0.5 * (b - a)),
                _ => 0.5 * (b - a) - 0.5 * math::cos(a + b) * math::sin(b - a),
            };
        }
        v
    }

    /// Parameter-space centroid under the volume measure, mapped to `R^n`.
    pub fn centroid(&self, shape: &CellShape) -> Point {
        if self.core {
            return Point::ORIGIN;
        }
        let n = shape.n;
        let (ra, rb, _) = self.radial_bounds(shape);
        let r = weighted_centroid(ra, rb, |r| math::powi(r, (n - 1) as i32));
        let mut ang = [0.0; MAX_DIM];
        for k in 1..n {
            let (a, b) = (self.lo[k], self.hi[k]);
            let pw = shape.angular_power(k);
            ang[k] = if pw == 0 { 0.5 * (a + b) } else { weighted_centroid(a, b, |x| math::powi(math::sin(x), pw)) };
        }
        shape.to_point(r, &ang)
    }

    /// Parameter midpoint mapped to `R^n` (cheaper than [`Cell::centroid`]).
    pub fn midpoint(&self, shape: &CellShape) -> Point {
        let mut ang = [0.0; MAX_DIM];
        for k in 1..shape.n {
            ang[k] = 0.5 * (self.lo[k] + self.hi[k]);
        }
        shape.to_point(shape.radius(0.5 * (self.lo[0] + self.hi[0])), &ang)
    }

    /// Upper bounds for the Euclidean extent along each parameter direction.
    pub fn extents(&self, shape: &CellShape) -> [f64; MAX_DIM] {
        let n = shape.n;
        let (_, rb, dr) = self.radial_bounds(shape);
        let mut e = [0.0; MAX_DIM];
        e[0] = dr;
        let mut scale = rb;
        for k in 1..n {
            let width = self.hi[k] - self.lo[k];
            e[k] = (scale * width).min(2.0 * rb);
            if k < n - 1 {
                scale *= sin_max(self.lo[k], self.hi[k]);
            }
        }
        e
    }

    pub fn diameter(&self, shape: &CellShape) -> f64 {
        let e = self.extents(shape);
        math::sqrt(e.iter().map(|x| x * x).sum::<f64>()).min(2.0)
    }

    /// Halves the cell along every dimension set in `mask`.
    pub fn split(&self, shape: &CellShape, mask: [bool; MAX_DIM], out: &mut Vec<Cell>) {
        let n = shape.n;
        let dims: Vec<usize> = (0..n).filter(|&k| mask[k]).collect();
        let count = 1usize << dims.len();
        for code in 0..count {
            let mut c = Cell { lo: self.lo, hi: self.hi, core: false };
            for (bit, &k) in dims.iter().enumerate() {
                let mid = 0.5 * (self.lo[k] + self.hi[k]);
                if code >> bit & 1 == 0 {
                    c.hi[k] = mid;
                } else {
                    c.lo[k] = mid;
                }
            }
            out.push(c);
        }
    }
}

/// Nodes, positive weights and the generating cells of a ball quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    problem: BallProblem,
    level: u32,
    grading: Grading,
    spacing: f64,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    cells: Vec<Cell>,
    id: u64,
}

/// FNV-1a over the bit patterns of the grid description, nodes and weights.
fn fingerprint(problem: &BallProblem, level: u32, grading: &Grading, nodes: &[Point], weights: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(problem.n() as u64);
    eat(problem.m() as u64);
    eat(u64::from(level));
    eat(grading.exponent.to_bits());
    if let Some(f) = grading.focus {
        f.0.iter().for_each(|c| eat(c.to_bits()));
    }
    for (x, w) in nodes.iter().zip(weights) {
        x.0.iter().for_each(|c| eat(c.to_bits()));
        eat(w.to_bits());
    }
    h
}

impl QuadratureGrid {
    /// Builds the level-`level` grid. Tangential spacing is
    /// `base_spacing(n) / 2^level`; the number of radial shells is `2 / spacing`.
    pub fn build(problem: &BallProblem, level: u32, grading: Grading) -> Result<Self> {
        problem.ensure_supported()?;
        if !(grading.exponent >= 1.0) || !grading.exponent.is_finite() {
            return Err(Error::param(format!("grading exponent {} must be >= 1", grading.exponent)));
        }
        if level > 12 {
            return Err(Error::param(format!("level {level} is beyond the supported ladder")));
        }
        if let Some(f) = grading.focus {
            if f.norm() > 1.0 + 1e-12 {
                return Err(Error::Domain("focus point outside the closed ball".into()));
            }
        }
        let n = problem.n();
        let shape = CellShape { n, grading: grading.exponent };
        let h = base_spacing(n) / f64::from(1u32 << level);
        let shells = (math::ceil(2.0 / h) as usize).max(2);

        let mut base = Vec::new();
        let full = |core: bool, t0: f64, t1: f64| {
            let mut lo = [0.0; MAX_DIM];
            let mut hi = [0.0; MAX_DIM];
            lo[0] = t0;
            hi[0] = t1;
            for k in 1..n {
                hi[k] = shape.param_max(k);
            }
            Cell { lo, hi, core }
        };
        base.push(full(true, 0.0, 1.0 / shells as f64));
        for i in 1..shells {
            let t0 = i as f64 / shells as f64;
            let t1 = (i + 1) as f64 / shells as f64;
            let shell = full(false, t0, t1);
            let r = shell.centroid(&shape).norm();
            partition_angles(&shape, shell, 1, r, h, &mut base);
        }

        let mut cells = Vec::with_capacity(base.len());
        match grading.focus {
            Some(f) => {
                for c in base {
                    refine_toward(&shape, c, f, 0, &mut cells);
                }
            }
            None => cells = base,
        }

        let nodes: Vec<Point> = cells.iter().map(|c| c.centroid(&shape)).collect();
        let weights: Vec<f64> = cells.iter().map(|c| c.volume(&shape)).collect();
        let id = fingerprint(problem, level, &grading, &nodes, &weights);
        Ok(Self { problem: *problem, level, grading, spacing: h, nodes, weights, cells, id })
    }

    /// Reassembles a grid from stored parts (e.g. a cache file). Nodes and
    /// weights are recomputed from the cells and must match bit for bit.
    pub fn from_parts(
        problem: &BallProblem,
        level: u32,
        grading: Grading,
        nodes: Vec<Point>,
        weights: Vec<f64>,
        cells: Vec<Cell>,
    ) -> Result<Self> {
        problem.ensure_supported()?;
        if nodes.len() != weights.len() || nodes.len() != cells.len() {
            return Err(Error::Mismatch("node, weight and cell counts differ".into()));
        }
        let shape = CellShape { n: problem.n(), grading: grading.exponent };
        for ((c, x), w) in cells.iter().zip(&nodes).zip(&weights) {
            if c.centroid(&shape) != *x || c.volume(&shape) != *w {
                return Err(Error::Mismatch("stored node or weight disagrees with its cell".into()));
            }
        }
        let id = fingerprint(problem, level, &grading, &nodes, &weights);
        Ok(Self {
            problem: *problem,
            level,
            grading,
            spacing: base_spacing(problem.n()) / f64::from(1u32 << level),
            nodes,
            weights,
            cells,
            id,
        })
    }

    pub fn problem(&self) -> &BallProblem {
        &self.problem
    }

    /// Content hash identifying this grid; fields remember it.
    pub fn fingerprint(&self) -> u64 {
        self.id
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    /// Nominal tangential spacing `h` of this level.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn shape(&self) -> CellShape {
        CellShape { n: self.problem.n(), grading: self.grading.exponent }
    }

    /// Largest cell diameter.
    pub fn max_cell_diameter(&self) -> f64 {
        let shape = self.shape();
        self.cells.iter().map(|c| c.diameter(&shape)).fold(0.0, f64::max)
    }

    /// Compensated, index-ordered `Σ w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        math::sum(self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)))
    }

    /// Compensated, index-ordered `Σ w_i v_i`.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        math::sum(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }

    pub fn total_weight(&self) -> f64 {
        math::sum(self.weights.iter().copied())
    }
}

/// Recursively partitions the angular coordinates `k..n` of a shell so that
/// the tangential extent of each cell is about `h` at radius `r`.
fn partition_angles(shape: &CellShape, cell: Cell, k: usize, r: f64, h: f64, out: &mut Vec<Cell>) {
    let n = shape.n;
    if k == n {
        out.push(cell);
        return;
    }
    // Circumference scale of this coordinate at the current position.
    let mut scale = r;
    for j in 1..k {
        scale *= math::sin(0.5 * (cell.lo[j] + cell.hi[j]));
    }
    let range = shape.param_max(k);
    let min_count = if k == n - 1 { 3 } else { 2 };
    let count = (math::ceil(scale * range / h) as usize).max(min_count);
    for i in 0..count {
        let mut c = cell;
        c.lo[k] = range * i as f64 / count as f64;
        c.hi[k] = if i + 1 == count { range } else { range * (i + 1) as f64 / count as f64 };
        partition_angles(shape, c, k + 1, r, h, out);
    }
}

fn refine_toward(shape: &CellShape, cell: Cell, focus: Point, depth: u32, out: &mut Vec<Cell>) {
    if depth == FOCUS_DEPTH || cell.core {
        out.push(cell);
        return;
    }
    let e = cell.extents(shape);
    let diam = math::sqrt(e.iter().map(|x| x * x).sum::<f64>());
    let dist = (cell.centroid(shape).dist(&focus) - 0.5 * diam).max(0.0);
    let widest = e.iter().copied().fold(0.0, f64::max);
    let ratio = focus_ratio(shape.n);
    let mut mask = [false; MAX_DIM];
    let mut any = false;
    for k in 0..shape.n {
        if e[k] * ratio > dist && e[k] >= 0.25 * widest {
            mask[k] = true;
            any = true;
        }
    }
    if !any {
        out.push(cell);
        return;
    }
    let mut children = Vec::with_capacity(16);
    cell.split(shape, mask, &mut children);
    for c in children {
        refine_toward(shape, c, focus, depth + 1, out);
    }
}
