//! Boggio's Green function of `(-Δ)^m` with Dirichlet data on the unit ball,
//!
//! ```text
//! G(x, y) = k_{m,n} |x-y|^{2m-n} ∫_1^{A(x,y)} (v² - 1)^{m-1} v^{1-n} dv,
//! A(x, y) = √(|x|²|y|² - 2x·y + 1) / |x - y|,
//! k_{m,n} = 1 / (n ω_n 4^{m-1} ((m-1)!)²),   ω_n = |B_1|,
//! ```
//!
//! and sampling checks of its lower bounds in the three regimes of `2m - n`.
//!
//! Writing `s = |x-y|`, `P = (1-|x|²)(1-|y|²)` and `W = √(s² + P) = s A`, the
//! inner integral is expanded term by term in closed form using only `s` and
//! `W`, which stays accurate as `s → 0`. Close to the sphere `A - 1 = P / (s (W+s))`
//! is small and the expansion cancels, so there the integrand is summed as a
//! power series in `A - 1` instead.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{BallProblem, Point};
use crate::math;

/// `|x - y|` below this is treated as the diagonal.
pub const DIAGONAL_GUARD: f64 = 1e-9;
/// Switch to the series form when `A - 1` is below this.
const SERIES_SWITCH: f64 = 0.25;
const SERIES_TERMS: usize = 40;

/// Sign of `2m - n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelCase {
    /// `2m < n`: `G ~ |x-y|^{2m-n}` on the diagonal.
    Subcritical,
    /// `2m = n`: logarithmic diagonal singularity.
    Critical,
    /// `2m > n`: bounded kernel.
    Supercritical,
}

/// Which pointwise lower bound to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    /// `|x-y|^{2m-n} min{1, d(x)^m d(y)^m / |x-y|^{2m}}`, for `2m < n`.
    G1,
    /// `log(1 + d(x)^m d(y)^m / |x-y|^{2m})`, for `2m = n`.
    G2,
    /// `d(x)^{m-n/2} d(y)^{m-n/2} min{1, d(x)^{n/2} d(y)^{n/2} / |x-y|^n}`, for `2m > n`.
    G3,
}

impl BoundCase {
    pub fn name(&self) -> &'static str {
        match self {
            BoundCase::G1 => "g1",
            BoundCase::G2 => "g2",
            BoundCase::G3 => "g3",
        }
    }

    pub fn for_case(case: KernelCase) -> Self {
        match case {
            KernelCase::Subcritical => BoundCase::G1,
            KernelCase::Critical => BoundCase::G2,
            KernelCase::Supercritical => BoundCase::G3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    coeff: f64,
    /// Exponent `e_j = 2j + 2 - n` of `v` after integration.
    exp: i32,
    /// Power of `s` multiplying `W^{e_j}`: `2(m - 1 - j)`.
    s_pow: i32,
}

/// Green function of `(-Δ)^m` on the unit ball of `R^n`.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    problem: BallProblem,
    norm: f64,
    case: KernelCase,
    terms: Vec<Term>,
    series: [f64; SERIES_TERMS],
}

impl GreenKernel {
    pub fn new(problem: &BallProblem) -> Result<Self> {
        problem.ensure_supported()?;
        let (n, m) = (problem.n(), problem.m());
        let two_m = 2 * m as i32;
        let case = match two_m.cmp(&(n as i32)) {
            core::cmp::Ordering::Less => KernelCase::Subcritical,
            core::cmp::Ordering::Equal => KernelCase::Critical,
            core::cmp::Ordering::Greater => KernelCase::Supercritical,
        };
        let mf = (m - 1) as u32;
        let norm = 1.0
            / (n as f64
                * math::unit_ball_volume(n)
                * math::powi(4.0, mf as i32)
                * math::factorial(mf)
                * math::factorial(mf));

        // (v² - 1)^{m-1} v^{1-n} = Σ_j C(m-1, j) (-1)^{m-1-j} v^{2j+1-n}
        let terms = (0..m)
            .map(|j| {
                let sign = if (m - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
                Term {
                    coeff: sign * math::binomial(mf, j as u32),
                    exp: 2 * j as i32 + 2 - n as i32,
                    s_pow: 2 * (m - 1 - j) as i32,
                }
            })
            .collect();

        // With v = 1 + t the integrand is t^{m-1} (2+t)^{m-1} (1+t)^{1-n} = Σ a_k t^{k+m-1};
        // store a_k / (k + m) so that the integral is Σ stored_k t^{k+m}.
        let mut series = [0.0; SERIES_TERMS];
        for (k, slot) in series.iter_mut().enumerate() {
            let mut a = 0.0;
            for i in 0..=(m - 1).min(k) {
                let p = math::binomial(mf, i as u32) * math::powi(2.0, (m - 1 - i) as i32);
                let j = (k - i) as u32;
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                let q = sign * math::binomial(n as u32 - 2 + j, j);
                a += p * q;
            }
            *slot = a / (k + m) as f64;
        }

        Ok(Self { problem: *problem, norm, case, terms, series })
    }

    pub fn problem(&self) -> &BallProblem {
        &self.problem
    }

    /// The constant `k_{m,n}`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn case(&self) -> KernelCase {
        self.case
    }

    /// Checked evaluation of `G(x, y)`.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        let (nx, ny) = (x.norm_sq(), y.norm_sq());
        if nx >= 1.0 || ny >= 1.0 {
            return Err(Error::Domain(format!(
                "Green function needs |x|, |y| < 1 (got {}, {})",
                math::sqrt(nx),
                math::sqrt(ny)
            )));
        }
        let s2 = (*x - *y).norm_sq();
        if s2 < DIAGONAL_GUARD * DIAGONAL_GUARD {
            return Err(Error::Singularity);
        }
        Ok(self.eval_parts(s2, (1.0 - nx) * (1.0 - ny)))
    }

    /// `G` from `s² = |x-y|² > 0` and `P = (1-|x|²)(1-|y|²) > 0`; no checks.
    #[inline]
    pub fn eval_parts(&self, s2: f64, p: f64) -> f64 {
        let s = math::sqrt(s2);
        let w = math::sqrt(s2 + p);
        let t = p / (s * (w + s));
        if t < SERIES_SWITCH {
            self.series_form(s, t)
        } else {
            self.closed_form(s, w)
        }
    }

    #[inline]
    fn series_form(&self, s: f64, t: f64) -> f64 {
        let two_m_minus_n = 2 * self.problem.m() as i32 - self.problem.n() as i32;
        // Horner in t, then the common factor t^m.
        let mut acc = 0.0;
        for c in self.series.iter().rev() {
            acc = acc * t + c;
        }
        self.norm * math::powi(s, two_m_minus_n) * acc * math::powi(t, self.problem.m() as i32)
    }

    #[inline]
    fn closed_form(&self, s: f64, w: f64) -> f64 {
        let two_m_minus_n = 2 * self.problem.m() as i32 - self.problem.n() as i32;
        let sp = math::powi(s, two_m_minus_n);
        let mut acc = 0.0;
        for term in &self.terms {
            let v = if term.exp == 0 {
                sp * (math::ln(w) - math::ln(s))
            } else {
                (math::powi(s, term.s_pow) * math::powi(w, term.exp) - sp) / f64::from(term.exp)
            };
            acc += term.coeff * v;
        }
        self.norm * acc
    }

    /// `lim_{y→x} G(x, y)` for the bounded kernel (`2m > n`): `k W^{2m-n} / (2m-n)`
    /// with `W = 1 - |x|²`.
    pub fn diagonal_limit(&self, x: &Point) -> Option<f64> {
        if self.case != KernelCase::Supercritical {
            return None;
        }
        let e = 2 * self.problem.m() as i32 - self.problem.n() as i32;
        Some(self.norm * math::powi(1.0 - x.norm_sq(), e) / f64::from(e))
    }

    /// Integral of the diagonal singularity of `G(x, ·)` over a ball of radius
    /// `rho` around `x`, plus the regular part times the ball volume. Used for
    /// leftover cells far below the grid scale.
    pub fn small_ball_integral(&self, x: &Point, rho: f64) -> f64 {
        let (n, m) = (self.problem.n(), self.problem.m());
        let vol = math::unit_ball_volume(n) * math::powi(rho, n as i32);
        let area = math::unit_sphere_area(n);
        let w = 1.0 - x.norm_sq();
        match self.case {
            KernelCase::Supercritical => self.diagonal_limit(x).unwrap_or(0.0) * vol,
            KernelCase::Subcritical => {
                // singular part k I(∞) s^{2m-n}, regular part k W^{2m-n}/(2m-n)
                let e = 2 * m as i32 - n as i32;
                let i_inf: f64 = self.terms.iter().map(|t| -t.coeff / f64::from(t.exp)).sum();
                let sing = self.norm * i_inf * area * math::powi(rho, 2 * m as i32) / (2 * m) as f64;
                let reg = self.norm * math::powi(w, e) / f64::from(e) * vol;
                sing + reg
            }
            KernelCase::Critical => {
                // singular part -k ln s, regular part k (ln W - Σ_{e_j≠0} c_j / e_j)
                let nf = n as f64;
                let sing = -self.norm * area * math::powi(rho, n as i32) * (math::ln(rho) / nf - 1.0 / (nf * nf));
                let c: f64 = self.terms.iter().filter(|t| t.exp != 0).map(|t| -t.coeff / f64::from(t.exp)).sum();
                sing + self.norm * (math::ln(w) + c) * vol
            }
        }
    }

    /// Right-hand side of the lower bound `case` at `(x, y)`, without its constant.
    pub fn bound_rhs(&self, case: BoundCase, x: &Point, y: &Point) -> f64 {
        let (n, m) = (self.problem.n() as i32, self.problem.m() as i32);
        let dx = 1.0 - x.norm();
        let dy = 1.0 - y.norm();
        let s = x.dist(y);
        match case {
            BoundCase::G1 => {
                let q = math::powi(dx * dy, m) / math::powi(s, 2 * m);
                math::powi(s, 2 * m - n) * q.min(1.0)
            }
            BoundCase::G2 => math::ln_1p(math::powi(dx * dy, m) / math::powi(s, 2 * m)),
            BoundCase::G3 => {
                let half_n = f64::from(n) / 2.0;
                let q = math::powf(dx * dy, half_n) / math::powi(s, n);
                math::powf(dx * dy, f64::from(m) - half_n) * q.min(1.0)
            }
        }
    }

    /// Samples `G / rhs` for the lower bound `case` at increasing sampling
    /// densities (`base_pairs · 4^level` pairs at level `level`) and records the
    /// minimum per level.
    pub fn verify_lower_bound(
        &self,
        case: BoundCase,
        base_pairs: usize,
        levels: u32,
        seed: u64,
    ) -> Result<MinRatioReport> {
        let expected = BoundCase::for_case(self.case);
        if case != expected {
            return Err(Error::param(format!(
                "bound {} does not apply to n = {}, m = {} (use {})",
                case.name(),
                self.problem.n(),
                self.problem.m(),
                expected.name()
            )));
        }
        if levels == 0 || base_pairs == 0 {
            return Err(Error::param("need at least one level and one pair"));
        }
        let mut per_level = Vec::with_capacity(levels as usize);
        let mut counts = Vec::with_capacity(levels as usize);
        for level in 0..levels {
            let count = base_pairs << (2 * level);
            let pairs = sample_pairs(self.problem.n(), count, seed.wrapping_add(u64::from(level)));
            let mut min = f64::INFINITY;
            for (x, y) in &pairs {
                let g = self.eval(x, y)?;
                let rhs = self.bound_rhs(case, x, y);
                if rhs > 0.0 && rhs.is_finite() {
                    min = min.min(g / rhs);
                }
            }
            per_level.push(min);
            counts.push(count);
        }
        let min_ratio = per_level.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(MinRatioReport { case, sample_counts: counts, per_level_min: per_level, min_ratio })
    }
}

/// Minimum of `G / rhs` over sampled pairs, per sampling density.
#[derive(Debug, Clone, PartialEq)]
pub struct MinRatioReport {
    pub case: BoundCase,
    pub sample_counts: Vec<usize>,
    pub per_level_min: Vec<f64>,
    pub min_ratio: f64,
}

impl MinRatioReport {
    /// Relative change of the minimum between the last two densities.
    pub fn last_variation(&self) -> f64 {
        match self.per_level_min.as_slice() {
            [.., a, b] => (a - b).abs() / a.abs().max(b.abs()),
            _ => f64::NAN,
        }
    }
}

fn uniform_in_ball(n: usize, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let mut p = Point::ORIGIN;
        for k in 0..n {
            p.0[k] = 2.0 * rng.random::<f64>() - 1.0;
        }
        if p.norm_sq() < 1.0 {
            return p;
        }
    }
}

fn unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p = uniform_in_ball(n, rng);
        let r = p.norm();
        if r > 1e-3 {
            return (1.0 / r) * p;
        }
    }
}

/// Pair sample mixing uniform pairs, near-boundary pairs at all scales and
/// near-diagonal interior pairs (in thirds).
pub fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let kind = out.len() % 3;
        let (x, y) = match kind {
            0 => (uniform_in_ball(n, &mut rng), uniform_in_ball(n, &mut rng)),
            1 => {
                // depth d in [1e-4, 1], offset at scale d · 10^[-1, 1]
                let d = math::powf(10.0, -4.0 * rng.random::<f64>());
                let x = (1.0 - d) * unit_vector(n, &mut rng);
                let scale = d * math::powf(10.0, 2.0 * rng.random::<f64>() - 1.0);
                (x, x + scale * unit_vector(n, &mut rng))
            }
            _ => {
                let x = uniform_in_ball(n, &mut rng);
                let scale = math::powf(10.0, -6.0 * rng.random::<f64>());
                (x, x + scale * unit_vector(n, &mut rng))
            }
        };
        if y.norm_sq() < 1.0 && x.dist(&y) >= 10.0 * DIAGONAL_GUARD {
            out.push((x, y));
        }
    }
    out
}
