//! Refinement studies of the a priori estimates for `(-Δ)^m u = f`:
//!
//! | id             | ratio                                              | hypothesis                          |
//! |----------------|----------------------------------------------------|-------------------------------------|
//! | `prop21_1`     | `‖u‖_∞ / ‖f‖_{L¹_{d^m}}`                           | `n <= m`                            |
//! | `prop21_2`     | `‖u‖_{L^q_{d^m}} / ‖f‖_{L^p_{d^m}}`                | `1/p - 1/q < 2m/(n+m)`              |
//! | `prop23`       | `‖u‖_{L^k_{d^m}} / ‖u‖_{L¹_{d^m}}`                 | `1 <= k < (n+m)/(n-m)`, `f > 0`     |
//! | `lemma_propDS` | `‖u d^{-m+θnα}‖_{L^q} / ‖f d^{m-(1-θ)nα}‖_{L^p}`   | see [`LemmaParams`]                 |
//!
//! At each level the ratio is the largest over the right-hand-side family. A
//! bounded estimate shows up as a ratio that stops changing; a failing one
//! (the cone data of [`falsify_estimate`]) as a ratio that keeps growing.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Provenance, SampledField};
use crate::geometry::{BallProblem, ConeRegion, Point};
use crate::grid::Grading;
use crate::math;
use crate::operator::{GreenOperator, OperatorSource};
use crate::singular::{build_singular_rhs, singular_rhs_norm};

/// A growing trend needs this factor between first and last level...
pub const GROWTH_FACTOR: f64 = 4.0;
/// ...over at least this many levels.
pub const MIN_GROWTH_LEVELS: usize = 4;
/// Relative difference of the last two ratios for a bounded trend.
pub const BOUNDED_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Bounded,
    Growing,
    Inconclusive,
}

impl Trend {
    pub fn name(&self) -> &'static str {
        match self {
            Trend::Bounded => "bounded",
            Trend::Growing => "growing",
            Trend::Inconclusive => "inconclusive",
        }
    }

    /// Classifies a sequence of per-level ratios.
    pub fn classify(ratios: &[f64]) -> Trend {
        let n = ratios.len();
        if n >= MIN_GROWTH_LEVELS
            && ratios.windows(2).all(|w| w[1] > w[0])
            && ratios[n - 1] >= GROWTH_FACTOR * ratios[0]
        {
            return Trend::Growing;
        }
        if n >= 2 {
            let (a, b) = (ratios[n - 2], ratios[n - 1]);
            if math::abs(b - a) <= BOUNDED_TOL * math::abs(a).max(math::abs(b)) {
                return Trend::Bounded;
            }
        }
        Trend::Inconclusive
    }
}

/// Parameters of the weighted-L^p form of the Lemma estimate. With
/// `2m > n`, `(p, q, α) = (1, ∞, 1)` is the `L^∞`-`L¹` form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaParams {
    pub theta: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateCase {
    /// `‖u‖_∞ <= C ‖f‖_{L¹_{d^m}}` for `n <= m`.
    SupNorm,
    /// `‖u‖_{L^q_{d^m}} <= C ‖f‖_{L^p_{d^m}}`.
    WeightedLpLq {
        p: f64,
        q: f64,
    },
    /// `‖u‖_{L^k_{d^m}} <= C ‖u‖_{L¹_{d^m}}` for positive data.
    HigherIntegrability {
        k: f64,
    },
    Lemma(LemmaParams),
}

impl EstimateCase {
    pub fn id(&self) -> &'static str {
        match self {
            EstimateCase::SupNorm => "prop21_1",
            EstimateCase::WeightedLpLq { .. } => "prop21_2",
            EstimateCase::HigherIntegrability { .. } => "prop23",
            EstimateCase::Lemma(_) => "lemma_propDS",
        }
    }

    /// Checks the hypotheses for `problem`, naming the violated inequality.
    pub fn check(&self, problem: &BallProblem) -> Result<()> {
        let (n, m) = (problem.n() as f64, problem.m() as f64);
        let pq_order = |p: f64, q: f64| -> Result<()> {
            if !(p >= 1.0 && q >= p) {
                return Err(Error::param(format!("need 1 <= p <= q, got p = {p}, q = {q}")));
            }
            Ok(())
        };
        match *self {
            EstimateCase::SupNorm => {
                if n > m {
                    return Err(Error::param(format!("prop21_1 needs n <= m, got n = {n}, m = {m}")));
                }
            }
            EstimateCase::WeightedLpLq { p, q } => {
                pq_order(p, q)?;
                let gap = 1.0 / p - 1.0 / q;
                let bound = 2.0 * m / (n + m);
                if !(gap < bound) {
                    return Err(Error::param(format!("prop21_2 needs 1/p - 1/q < 2m/(n+m): {gap} >= {bound}")));
                }
            }
            EstimateCase::HigherIntegrability { k } => {
                if !(k >= 1.0) {
                    return Err(Error::param(format!("prop23 needs k >= 1, got {k}")));
                }
                if n > m {
                    let cap = (n + m) / (n - m);
                    if !(k < cap) {
                        return Err(Error::param(format!("prop23 needs k < (n+m)/(n-m) = {cap}, got {k}")));
                    }
                }
            }
            EstimateCase::Lemma(l) => {
                if !(0.0..=1.0).contains(&l.theta) {
                    return Err(Error::param(format!("lemma needs theta in [0, 1], got {}", l.theta)));
                }
                pq_order(l.p, l.q)?;
                let first_form = 2.0 * m > n && l.p == 1.0 && l.q == f64::INFINITY && l.alpha == 1.0;
                if !first_form {
                    let gap = 1.0 / l.p - 1.0 / l.q;
                    let top = (2.0 * m / n).min(1.0);
                    if !(gap < top) {
                        return Err(Error::param(format!("lemma needs 1/p - 1/q < min(2m/n, 1): {gap} >= {top}")));
                    }
                    if !(l.alpha > gap && l.alpha <= top) {
                        return Err(Error::param(format!(
                            "lemma needs alpha in (1/p - 1/q, min(2m/n, 1)] = ({gap}, {top}], got {}",
                            l.alpha
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Right-hand sides of the bounded-regime studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsProfile {
    Constant,
    /// `1 + |x|`.
    Linear,
    /// `exp(-|x|²)`.
    Gaussian,
    /// `d(x)^{-m + 0.1}`: singular at the sphere but in `L¹_{d^m}`.
    BoundarySingular,
    /// Indicator of a small interior ball.
    InteriorBump {
        center: Point,
        radius: f64,
    },
}

impl RhsProfile {
    /// The smooth positive profiles plus the boundary-singular one.
    pub const DEFAULT_FAMILY: [RhsProfile; 4] =
        [RhsProfile::Constant, RhsProfile::Linear, RhsProfile::Gaussian, RhsProfile::BoundarySingular];

    pub fn name(&self) -> &'static str {
        match self {
            RhsProfile::Constant => "const",
            RhsProfile::Linear => "linear",
            RhsProfile::Gaussian => "gaussian",
            RhsProfile::BoundarySingular => "boundary_singular",
            RhsProfile::InteriorBump { .. } => "interior_bump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "const" => RhsProfile::Constant,
            "linear" => RhsProfile::Linear,
            "gaussian" => RhsProfile::Gaussian,
            "boundary_singular" => RhsProfile::BoundarySingular,
            "interior_bump" => RhsProfile::InteriorBump { center: Point::ORIGIN, radius: 0.25 },
            _ => return None,
        })
    }

    pub fn eval(&self, x: &Point, m: usize) -> f64 {
        match *self {
            RhsProfile::Constant => 1.0,
            RhsProfile::Linear => 1.0 + x.norm(),
            RhsProfile::Gaussian => math::exp(-x.norm_sq()),
            RhsProfile::BoundarySingular => math::powf(1.0 - x.norm(), 0.1 - m as f64),
            RhsProfile::InteriorBump { center, radius } => {
                if x.dist(&center) < radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, op: &GreenOperator) -> Result<SampledField> {
        let m = op.kernel().problem().m();
        SampledField::from_fn(op.grid(), Provenance::RightHandSide, |x| self.eval(x, m))
    }
}

/// The ratio at one level: the maximum over the family, and each member's value.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRatio {
    pub level: u32,
    pub nodes: usize,
    pub ratio: f64,
    pub per_rhs: Vec<f64>,
}

/// Parameters recorded with a report; unused ones are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimateParams {
    pub n: usize,
    pub m: usize,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub k: Option<f64>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate_id: &'static str,
    pub params: EstimateParams,
    pub rhs: Vec<String>,
    pub levels: Vec<LevelRatio>,
    pub trend: Trend,
    /// Largest ratio, when the trend is bounded.
    pub empirical_c: Option<f64>,
    /// Norm of the data per level (falsification runs).
    pub data_norms: Vec<f64>,
    /// Set for falsification runs outside the proved range.
    pub exploratory: bool,
}

impl EstimateReport {
    fn finish(
        estimate_id: &'static str,
        params: EstimateParams,
        rhs: Vec<String>,
        levels: Vec<LevelRatio>,
        data_norms: Vec<f64>,
        exploratory: bool,
    ) -> Self {
        let ratios: Vec<f64> = levels.iter().map(|l| l.ratio).collect();
        let trend = Trend::classify(&ratios);
        let empirical_c = (trend == Trend::Bounded).then(|| ratios.iter().copied().fold(0.0, f64::max));
        Self { estimate_id, params, rhs, levels, trend, empirical_c, data_norms, exploratory }
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.ratio).collect()
    }

    /// Whether the stored trend follows from the stored ratios.
    pub fn trend_is_consistent(&self) -> bool {
        Trend::classify(&self.ratios()) == self.trend
    }
}

fn case_ratio(case: &EstimateCase, op: &GreenOperator, f: &SampledField) -> Result<f64> {
    let grid = op.grid();
    let problem = grid.problem();
    let (n, m) = (problem.n() as f64, problem.m());
    let u = op.apply(f)?;
    let (num, den) = match *case {
        EstimateCase::SupNorm => (u.max_abs(), f.weighted_norm(grid, 1.0, m as u32)?),
        EstimateCase::WeightedLpLq { p, q } => {
            (u.weighted_norm(grid, q, m as u32)?, f.weighted_norm(grid, p, m as u32)?)
        }
        EstimateCase::HigherIntegrability { k } => {
            (u.weighted_norm(grid, k, m as u32)?, u.weighted_norm(grid, 1.0, m as u32)?)
        }
        EstimateCase::Lemma(l) => {
            let mf = m as f64;
            (
                u.lebesgue_norm(grid, l.q, -mf + l.theta * n * l.alpha)?,
                f.lebesgue_norm(grid, l.p, mf - (1.0 - l.theta) * n * l.alpha)?,
            )
        }
    };
    if !(den > 0.0) || !num.is_finite() {
        return Err(Error::Precondition(format!("degenerate norms {num} / {den}")));
    }
    Ok(num / den)
}

/// Runs `case` for each profile of `family` on each level of `levels`.
pub fn verify_estimate(
    source: &mut dyn OperatorSource,
    problem: &BallProblem,
    case: EstimateCase,
    family: &[RhsProfile],
    levels: &[u32],
    grading: Grading,
) -> Result<EstimateReport> {
    case.check(problem)?;
    if family.is_empty() || levels.is_empty() {
        return Err(Error::param("need at least one right-hand side and one level"));
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let op = source.operator(problem, level, grading)?;
        let mut per_rhs = Vec::with_capacity(family.len());
        for profile in family {
            let f = profile.sample(&op)?;
            if matches!(case, EstimateCase::HigherIntegrability { .. }) && f.values().iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Precondition(format!(
                    "prop23 needs positive data; {} vanishes somewhere",
                    profile.name()
                )));
            }
            per_rhs.push(case_ratio(&case, &op, &f)?);
        }
        rows.push(LevelRatio {
            level,
            nodes: op.len(),
            ratio: per_rhs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            per_rhs,
        });
    }
    let mut params = EstimateParams { n: problem.n(), m: problem.m(), ..Default::default() };
    match case {
        EstimateCase::SupNorm => {
            params.p = Some(1.0);
            params.q = Some(f64::INFINITY);
        }
        EstimateCase::WeightedLpLq { p, q } => {
            params.p = Some(p);
            params.q = Some(q);
        }
        EstimateCase::HigherIntegrability { k } => params.k = Some(k),
        EstimateCase::Lemma(l) => {
            params.p = Some(l.p);
            params.q = Some(l.q);
            params.theta = Some(l.theta);
            params.alpha = Some(l.alpha);
        }
    }
    let names = family.iter().map(|f| String::from(f.name())).collect();
    Ok(EstimateReport::finish(case.id(), params, names, rows, Vec::new(), false))
}

/// The cone exponent used by the falsification run: the midpoint of
/// `((n+m)/q, (n+m)/p - 2m) ∩ (0, n-m)`.
pub fn falsification_alpha(problem: &BallProblem, p: f64, q: f64) -> Result<f64> {
    let (n, m) = (problem.n() as f64, problem.m() as f64);
    let lo = ((n + m) / q).max(0.0);
    let hi = ((n + m) / p - 2.0 * m).min(n - m);
    if !(hi > lo) {
        return Err(Error::param(format!("empty cone-exponent window ({lo}, {hi}) for p = {p}, q = {q}")));
    }
    Ok(0.5 * (lo + hi))
}

/// Ratio `‖u‖_{L^q_{d^m}} / ‖f‖_{L^p_{d^m}}` for the cone data of exponent
/// [`falsification_alpha`] on focused grids. Requires `1/p - 1/q > 2m/(n-m)`,
/// or only `> 2m/(n+m)` when `exploratory` is set.
pub fn falsify_estimate(
    source: &mut dyn OperatorSource,
    problem: &BallProblem,
    p: f64,
    q: f64,
    levels: &[u32],
    region: &ConeRegion,
    exploratory: bool,
) -> Result<EstimateReport> {
    let (n, m) = (problem.n() as f64, problem.m() as f64);
    if n <= m {
        return Err(Error::param("falsification needs n > m"));
    }
    if !(p >= 1.0 && q >= p) {
        return Err(Error::param(format!("need 1 <= p <= q, got p = {p}, q = {q}")));
    }
    if levels.is_empty() {
        return Err(Error::param("need at least one level"));
    }
    let gap = 1.0 / p - 1.0 / q;
    let proved = 2.0 * m / (n - m);
    let remark = 2.0 * m / (n + m);
    let needed = if exploratory { remark } else { proved };
    if !(gap > needed) {
        return Err(Error::param(format!(
            "falsification needs 1/p - 1/q > {}: {gap} <= {needed}",
            if exploratory { "2m/(n+m)" } else { "2m/(n-m)" }
        )));
    }
    let alpha = falsification_alpha(problem, p, q)?;
    let grading = Grading::default().with_focus(region.x0);
    let mut rows = Vec::with_capacity(levels.len());
    let mut data_norms = Vec::with_capacity(levels.len());
    for &level in levels {
        let op = source.operator(problem, level, grading)?;
        let f = build_singular_rhs(problem, alpha, region, op.grid())?;
        let u = op.apply(&f)?;
        let mw = problem.m() as u32;
        let fnorm = singular_rhs_norm(problem, alpha, region, op.grid(), p)?;
        let unorm = u.weighted_norm(op.grid(), q, mw)?;
        if !(fnorm > 0.0) {
            return Err(Error::Resolution(format!("no grid nodes in the cone at level {level}")));
        }
        data_norms.push(fnorm);
        rows.push(LevelRatio { level, nodes: op.len(), ratio: unorm / fnorm, per_rhs: alloc::vec![unorm / fnorm] });
    }
    let params = EstimateParams {
        n: problem.n(),
        m: problem.m(),
        p: Some(p),
        q: Some(q),
        alpha: Some(alpha),
        ..Default::default()
    };
    let exploratory = exploratory && !(gap > proved);
    Ok(EstimateReport::finish("falsify", params, alloc::vec![String::from("cone")], rows, data_norms, exploratory))
}

/// `min_i (v_i / d_i^m) / ∫ h d^m` with `v = G[h]`.
pub fn verify_lemma_x(op: &GreenOperator, h: &SampledField) -> Result<f64> {
    let grid = op.grid();
    h.ensure_on(grid)?;
    if let Some(i) = h.values().iter().position(|&v| v < 0.0) {
        return Err(Error::Precondition(format!("h is negative at node {i}")));
    }
    let m = grid.problem().m();
    let mass = h.weighted_integral(grid, m as u32)?;
    if !(mass > 0.0) {
        return Err(Error::Precondition("h vanishes identically".into()));
    }
    let v = op.apply(h)?;
    let min = grid
        .nodes()
        .iter()
        .zip(v.values())
        .map(|(x, v)| v / math::powi(1.0 - x.norm(), m as i32))
        .fold(f64::INFINITY, f64::min);
    Ok(min / mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rules() {
        assert_eq!(Trend::classify(&[1.0]), Trend::Inconclusive);
        assert_eq!(Trend::classify(&[1.0, 1.05]), Trend::Bounded);
        assert_eq!(Trend::classify(&[1.0, 2.0, 4.0, 8.0]), Trend::Growing);
        assert_eq!(Trend::classify(&[1.0, 2.0, 3.0, 3.9]), Trend::Inconclusive);
        assert_eq!(Trend::classify(&[1.0, 2.0, 1.5, 8.0]), Trend::Inconclusive);
    }

    #[test]
    fn hypotheses_are_named() {
        let p3 = BallProblem::new(3, 1).unwrap();
        let e = EstimateCase::SupNorm.check(&p3).unwrap_err();
        assert!(format!("{e}").contains("n <= m"));
        assert!(EstimateCase::HigherIntegrability { k: 2.0 }.check(&p3).is_err());
        assert!(EstimateCase::HigherIntegrability { k: 1.5 }.check(&p3).is_ok());
        assert!(EstimateCase::WeightedLpLq { p: 1.0, q: f64::INFINITY }.check(&p3).is_err());
        let l = LemmaParams { theta: 0.5, alpha: 1.0, p: 1.0, q: f64::INFINITY };
        assert!(EstimateCase::Lemma(l).check(&p3).is_err());
        assert!(EstimateCase::Lemma(l).check(&BallProblem::new(3, 2).unwrap()).is_ok());
    }

    #[test]
    fn falsification_window() {
        let p4 = BallProblem::new(4, 1).unwrap();
        assert_eq!(falsification_alpha(&p4, 1.0, f64::INFINITY).unwrap(), 1.5);
    }
}
