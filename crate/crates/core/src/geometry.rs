//! Unit-ball geometry: points, the `(n, m)` problem descriptor, the distance
//! weight `d(x) = 1 - |x|` and the boundary cones carrying singular data.

use core::ops::{Add, Mul, Sub};

use alloc::format;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;

/// Largest supported space dimension.
pub const MAX_DIM: usize = 4;
/// Largest supported operator order.
pub const MAX_ORDER: usize = 3;

/// A point of `R^n`, `n <= MAX_DIM`, zero-padded in the unused coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point(pub [f64; MAX_DIM]);

impl Point {
    pub const ORIGIN: Point = Point([0.0; MAX_DIM]);

    pub fn from_slice(c: &[f64]) -> Self {
        assert!(c.len() <= MAX_DIM, "point has more than {MAX_DIM} coordinates");
        let mut p = [0.0; MAX_DIM];
        p[..c.len()].copy_from_slice(c);
        Point(p)
    }

    /// Unit vector along coordinate axis `k`.
    pub fn axis(k: usize) -> Self {
        let mut p = [0.0; MAX_DIM];
        p[k] = 1.0;
        Point(p)
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2] + self.0[3] * other.0[3]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    #[inline]
    fn mul(self, p: Point) -> Point {
        Point([self * p.0[0], self * p.0[1], self * p.0[2], self * p.0[3]])
    }
}

/// Space dimension `n` and operator order `m` of `(-Δ)^m` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BallProblem {
    n: usize,
    m: usize,
}

impl BallProblem {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param(format!("dimension n = {n} must be >= 2")));
        }
        if m < 1 {
            return Err(Error::param("operator order m must be >= 1"));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Rejects `(n, m)` beyond the desk-scale caps `n <= 4`, `m <= 3`.
    pub fn ensure_supported(&self) -> Result<()> {
        if self.n > MAX_DIM {
            return Err(Error::Unsupported(format!("dimension n = {} exceeds {MAX_DIM}", self.n)));
        }
        if self.m > MAX_ORDER {
            return Err(Error::Unsupported(format!("order m = {} exceeds {MAX_ORDER}", self.m)));
        }
        Ok(())
    }

    /// Volume of the unit ball in `R^n`.
    pub fn ball_volume(&self) -> f64 {
        math::unit_ball_volume(self.n)
    }
}

/// `d(x) = 1 - |x|` for `|x| <= 1`.
pub fn distance_to_boundary(x: &Point) -> Result<f64> {
    let r = x.norm();
    if r > 1.0 {
        return Err(Error::Domain(format!("|x| = {r} > 1")));
    }
    Ok(1.0 - r)
}

/// Truncated revolution cone with vertex on the sphere:
/// `Σ = {x : angle(x - x0, axis) <= half_aperture, 0 < |x - x0| < cap_radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeRegion {
    pub x0: Point,
    pub axis: Point,
    pub half_aperture: f64,
    pub cap_radius: f64,
    dim: usize,
}

impl ConeRegion {
    pub const DEFAULT_HALF_APERTURE: f64 = math::PI / 6.0;
    pub const DEFAULT_CAP_RADIUS: f64 = 0.5;

    pub fn new(problem: &BallProblem, x0: Point, axis: Point, half_aperture: f64, cap_radius: f64) -> Result<Self> {
        if (x0.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::param("cone vertex must lie on the unit sphere"));
        }
        if (axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::param("cone axis must be a unit vector"));
        }
        if axis.dot(&x0) >= 0.0 {
            return Err(Error::param("cone axis must point into the ball"));
        }
        if !(half_aperture > 0.0 && half_aperture < math::PI / 2.0) {
            return Err(Error::param("cone half-aperture must lie in (0, π/2)"));
        }
        if !(cap_radius > 0.0 && cap_radius <= 1.0) {
            return Err(Error::param("cone cap radius must lie in (0, 1]"));
        }
        Ok(Self { x0, axis, half_aperture, cap_radius, dim: problem.n() })
    }

    /// Vertex `(1, 0, ..., 0)`, inward axis, aperture π/6, cap radius 1/2.
    pub fn default_for(problem: &BallProblem) -> Self {
        let x0 = Point::axis(0);
        Self {
            x0,
            axis: -1.0 * x0,
            half_aperture: Self::DEFAULT_HALF_APERTURE,
            cap_radius: Self::DEFAULT_CAP_RADIUS,
            dim: problem.n(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, x: &Point) -> bool {
        let v = *x - self.x0;
        let rho = v.norm();
        rho > 0.0 && rho < self.cap_radius && v.dot(&self.axis) >= rho * math::cos(self.half_aperture)
    }

    /// Deterministic pseudo-random points of Σ, roughly uniform in the
    /// distance to the vertex and the angle to the axis.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut e = Point::ORIGIN;
            for k in 0..self.dim {
                e.0[k] = rng.random::<f64>() * 2.0 - 1.0;
            }
            e = e - e.dot(&self.axis) * self.axis;
            let len = e.norm();
            if len < 1e-3 {
                continue;
            }
            e = (1.0 / len) * e;
            let gamma = rng.random::<f64>() * self.half_aperture;
            let rho = self.cap_radius * (1e-4 + (1.0 - 2e-4) * rng.random::<f64>());
            let dir = math::cos(gamma) * self.axis + math::sin(gamma) * e;
            out.push(self.x0 + rho * dir);
        }
        out
    }

    /// Smallest `d(x) / |x - x0|` over the given points of Σ; points outside
    /// the closed ball give a non-positive value.
    pub fn boundary_ratio_min(&self, points: &[Point]) -> f64 {
        points
            .iter()
            .filter(|x| self.contains(x))
            .map(|x| (1.0 - x.norm()) / x.dist(&self.x0))
            .fold(f64::INFINITY, f64::min)
    }
}
