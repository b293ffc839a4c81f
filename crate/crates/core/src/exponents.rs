//! Exponent arithmetic for the system `(-Δ)^m u = a v^p`, `(-Δ)^m v = b u^q`:
//! the scaling exponents
//!
//! ```text
//! α = 2m(p+1)/(pq-1),   β = 2m(q+1)/(pq-1),
//! ```
//!
//! the regime split at `max(α, β) = n - m`, and the bootstrap that upgrades
//! `L^k_{d^m}` bounds on `u, v` to `L^∞` when `max(α, β) > n - m`.
//!
//! One bootstrap round starts from a `k` with `u, v ∈ L^k_{d^m}` and picks
//! `ρ ∈ (0, 1)`, `k1`, `k2` such that
//!
//! ```text
//! A := p/k - 2m/(n+m) < 1/k1 < min(ρ/k, 1/q)
//! q/k1 - 2m/(n+m) < 1/k2 < ρ/k
//! ```
//!
//! after which the bound holds with `k/ρ`. Once `k > (n+m)pq/(2m(q+1))`
//! one can take `k1 > (n+m)q/(2m)` and `k2 = ∞`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Slack applied to every strict inequality.
pub const SLACK: f64 = 1e-12;

/// `p`, `q` normalized to `q >= p`, with their exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
    /// Whether the input `(p, q)` was exchanged.
    pub swapped: bool,
}

impl ExponentParams {
    pub fn new(p: f64, q: f64, m: usize) -> Result<Self> {
        if !(p > 0.0 && q > 0.0) || !p.is_finite() || !q.is_finite() {
            return Err(Error::param(format!("p = {p}, q = {q} must be positive and finite")));
        }
        if m == 0 {
            return Err(Error::param("m must be at least 1"));
        }
        if p * q <= 1.0 {
            return Err(Error::param(format!("pq = {} must exceed 1", p * q)));
        }
        let swapped = p > q;
        let (p, q) = if swapped { (q, p) } else { (p, q) };
        let (alpha, beta) = alpha_beta(p, q, m);
        Ok(Self { p, q, alpha, beta, m, swapped })
    }

    /// `max(α, β)`, which is `β` after normalization.
    pub fn max_exponent(&self) -> f64 {
        self.alpha.max(self.beta)
    }
}

fn alpha_beta(p: f64, q: f64, m: usize) -> (f64, f64) {
    let two_m = 2.0 * m as f64;
    let d = p * q - 1.0;
    (two_m * (p + 1.0) / d, two_m * (q + 1.0) / d)
}

/// `compute_exponents(p, q, m)`.
pub fn compute_exponents(p: f64, q: f64, m: usize) -> Result<ExponentParams> {
    ExponentParams::new(p, q, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `n <= m`: every solution is bounded.
    LowDimension,
    /// `max(α, β) > n - m`.
    Bounded,
    /// `max(α, β) < n - m`.
    Singular,
    /// `max(α, β) = n - m`, left open.
    Border,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::LowDimension => "low_dimension",
            Regime::Bounded => "bounded",
            Regime::Singular => "singular",
            Regime::Border => "border",
        }
    }
}

/// Regime of `params` in dimension `n`. Equality is decided with
/// [`SLACK`] relative tolerance.
pub fn classify_regime(params: &ExponentParams, n: usize, m: usize) -> Regime {
    if n <= m {
        return Regime::LowDimension;
    }
    let (alpha, beta) = alpha_beta(params.p, params.q, m);
    let e = alpha.max(beta);
    let nm = (n - m) as f64;
    if (e - nm).abs() <= SLACK * nm {
        Regime::Border
    } else if e > nm {
        Regime::Bounded
    } else {
        Regime::Singular
    }
}

/// Selection rules for the free choices of the bootstrap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapRules {
    /// Initial `k` is this fraction of `(n+m)/(n-m)`.
    pub initial_fraction: f64,
    /// `ρ = L + rho_position (1 - L)`.
    pub rho_position: f64,
    /// `1/k1 = max(A, 0) + k1_position (upper - max(A, 0))`.
    pub k1_position: f64,
    /// `1/k2` at this position of its interval.
    pub k2_position: f64,
    pub max_rounds: usize,
}

impl Default for BootstrapRules {
    fn default() -> Self {
        Self { initial_fraction: 0.98, rho_position: 0.5, k1_position: 0.1, k2_position: 0.5, max_rounds: 100 }
    }
}

impl BootstrapRules {
    fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !(unit(self.initial_fraction) && unit(self.rho_position) && unit(self.k1_position) && unit(self.k2_position))
        {
            return Err(Error::param("bootstrap rule positions must lie in (0, 1)"));
        }
        if self.max_rounds == 0 {
            return Err(Error::param("max_rounds must be positive"));
        }
        Ok(())
    }
}

/// One bootstrap round. `k2 = None` stands for `k2 = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapRound {
    pub k: f64,
    pub eta: f64,
    pub rho: f64,
    pub k1: f64,
    pub k2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapTrace {
    pub p: f64,
    pub q: f64,
    pub m: usize,
    pub n: usize,
    pub swapped: bool,
    /// `(n+m)/(n-m) - k0`.
    pub epsilon: f64,
    pub initial_k: f64,
    pub rounds: Vec<BootstrapRound>,
    pub k_bar: f64,
    pub k1_final: f64,
    /// `None` for `k2 = ∞`.
    pub k2_final: Option<f64>,
    pub terminated: bool,
    pub failure: Option<String>,
}

impl BootstrapTrace {
    /// `(n+m)pq / (2m(q+1))`: above it the final phase applies.
    pub fn threshold(&self) -> f64 {
        threshold(self.p, self.q, self.m, self.n)
    }

    /// Smallest ratio `k_{j+1}/k_j` over the rounds (`∞` with no rounds).
    pub fn min_growth(&self) -> f64 {
        let mut ks: Vec<f64> = self.rounds.iter().map(|r| r.k).collect();
        ks.push(self.k_bar);
        ks.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Guaranteed growth `δ` from the round-0 gap: `ρ <= 1 - ½ min(1 - (n-m)p/(n+m), η_0)`
    /// in every round (η only grows with `k`), so `k_{j+1}/k_j >= 1 + δ`.
    pub fn growth_bound(&self) -> f64 {
        let (nf, mf) = (self.n as f64, self.m as f64);
        let eta0 = eta(self.p, self.q, self.m, self.n, self.initial_k);
        let gap = (1.0 - (nf - mf) * self.p / (nf + mf)).min(eta0).min(1.0);
        let rho_max = 1.0 - 0.5 * gap;
        1.0 / rho_max - 1.0
    }
}

fn two_m_over(m: usize, n: usize) -> f64 {
    2.0 * m as f64 / (n + m) as f64
}

fn threshold(p: f64, q: f64, m: usize, n: usize) -> f64 {
    (n + m) as f64 * p * q / (2.0 * m as f64 * (q + 1.0))
}

fn eta(p: f64, q: f64, m: usize, n: usize, k: f64) -> f64 {
    two_m_over(m, n) * (q + 1.0) * k - (p * q - 1.0)
}

/// Runs the bootstrap under `rules` and validates the result.
pub fn run_bootstrap(p: f64, q: f64, m: usize, n: usize, rules: &BootstrapRules) -> Result<BootstrapTrace> {
    rules.validate()?;
    if n < 2 {
        return Err(Error::param(format!("n = {n} must be at least 2")));
    }
    let params = ExponentParams::new(p, q, m)?;
    let regime = classify_regime(&params, n, m);
    if regime != Regime::Bounded {
        return Err(Error::NotApplicable(format!(
            "bootstrap needs the bounded regime: max(alpha, beta) = {} vs n - m = {} ({})",
            params.max_exponent(),
            n as f64 - m as f64,
            regime.name()
        )));
    }
    let (p, q) = (params.p, params.q);
    let (nf, mf) = (n as f64, m as f64);
    let c = two_m_over(m, n);
    let k_cap = (nf + mf) / (nf - mf);

    // Lower bounds on the initial k: k >= p, k > (n+m)/β and p/k - 2m/(n+m) < 1/q.
    let lower_strict = ((nf + mf) / params.beta).max(p / (1.0 / q + c));
    let mut k = rules.initial_fraction * k_cap;
    if k < p || k <= lower_strict * (1.0 + SLACK) {
        let lo = p.max(lower_strict);
        if lo >= k_cap * (1.0 - SLACK) {
            return Err(Error::Precondition(format!(
                "empty window for the initial k: lower bound {lo} >= (n+m)/(n-m) = {k_cap}"
            )));
        }
        k = 0.5 * (lo + k_cap);
    }
    let initial_k = k;
    let thr = threshold(p, q, m, n);

    let mut rounds = Vec::new();
    let mut failure = None;
    while k <= thr {
        if rounds.len() == rules.max_rounds {
            failure = Some(format!("no termination within {} rounds", rules.max_rounds));
            break;
        }
        let e = eta(p, q, m, n, k);
        let l = ((nf - mf) * p / (nf + mf)).max(1.0 - e).max(0.0);
        let rho = l + rules.rho_position * (1.0 - l);
        let a = p / k - c;
        let a0 = a.max(0.0);
        let inv_k1 = a0 + rules.k1_position * ((rho / k).min(1.0 / q) - a0);
        let k1 = 1.0 / inv_k1;
        let lo2 = (q / k1 - c).max(0.0);
        let inv_k2 = lo2 + rules.k2_position * (rho / k - lo2);
        rounds.push(BootstrapRound { k, eta: e, rho, k1, k2: Some(1.0 / inv_k2) });
        k /= rho;
    }

    let a = p / k - c;
    let k1_lo = (nf + mf) * q / (2.0 * mf);
    // Midpoint of ((n+m)q/(2m), 1/A); with A <= 0 every large k1 works.
    let k1_final = if a > 0.0 { 0.5 * (k1_lo + 1.0 / a) } else { 2.0 * k1_lo };
    // k1_final > (n+m)q/(2m) makes q/k1 - 2m/(n+m) negative, so k2 = ∞; the
    // validator re-checks this.
    let k2_final = if q / k1_final - c < 0.0 { None } else { Some(k1_final) };

    let trace = BootstrapTrace {
        p,
        q,
        m,
        n,
        swapped: params.swapped,
        epsilon: k_cap - initial_k,
        initial_k,
        rounds,
        k_bar: k,
        k1_final,
        k2_final,
        terminated: failure.is_none(),
        failure,
    };
    if trace.failure.is_some() {
        return Err(Error::Convergence { iterations: trace.rounds.len(), residual: trace.threshold() - trace.k_bar });
    }
    let violations = validate_trace(&trace);
    if !violations.is_empty() {
        return Err(Error::Invariant(violations));
    }
    Ok(trace)
}

/// Re-checks every inequality of `trace` from its stored numbers alone.
/// Returns the names of the violated conditions.
pub fn validate_trace(trace: &BootstrapTrace) -> Vec<String> {
    let mut v = Vec::new();
    let (p, q, m, n) = (trace.p, trace.q, trace.m, trace.n);
    if n <= m || m == 0 || !(p > 0.0 && q > 0.0) {
        v.push(String::from("trace inputs: need n > m >= 1 and p, q > 0"));
        return v;
    }
    let (nf, mf) = (n as f64, m as f64);
    let c = two_m_over(m, n);
    let k_cap = (nf + mf) / (nf - mf);
    let beta = 2.0 * mf * (q + 1.0) / (p * q - 1.0);
    // strict inequalities must hold with a margin of SLACK (relative, floor 1)
    let less = |a: f64, b: f64| b - a > SLACK * a.abs().max(b.abs()).max(1.0);
    let mut push = |name: &str, cond: bool, ctx: String| {
        if !cond {
            v.push(format!("{name}: {ctx}"));
        }
    };

    push("q >= p", q >= p, format!("p = {p}, q = {q}"));
    push("pq > 1", p * q > 1.0, format!("pq = {}", p * q));
    let k0 = trace.initial_k;
    push("k >= p", k0 >= p, format!("k = {k0}, p = {p}"));
    push("k < (n+m)/(n-m)", less(k0, k_cap), format!("k = {k0}, cap = {k_cap}"));

    let thr = threshold(p, q, m, n);
    for (j, r) in trace.rounds.iter().enumerate() {
        let k = r.k;
        let at = |s: &str| format!("round {j}: {s}");
        push("k <= (n+m)pq/(2m(q+1))", k <= thr, at(&format!("k = {k}, threshold = {thr}")));
        push("k > (n+m)/beta", less((nf + mf) / beta, k), at(&format!("k = {k}, (n+m)/beta = {}", (nf + mf) / beta)));
        let eta = two_m_over(m, n) * (q + 1.0) * k - (p * q - 1.0);
        push("eta", (eta - r.eta).abs() <= 1e-9 * eta.abs().max(1.0), at(&format!("stored {} vs {eta}", r.eta)));
        push("rho < 1", less(r.rho, 1.0), at(&format!("rho = {}", r.rho)));
        push("rho > (n-m)p/(n+m)", less((nf - mf) * p / (nf + mf), r.rho), at(&format!("rho = {}", r.rho)));
        push("rho > 1 - eta", less(1.0 - eta, r.rho), at(&format!("rho = {}, eta = {eta}", r.rho)));
        push("(p - rho)/k < 2m/(n+m)", less((p - r.rho) / k, c), at(&format!("rho = {}", r.rho)));
        let a = p / k - c;
        push("p/k - 2m/(n+m) < 1/q", less(a, 1.0 / q), at(&format!("A = {a}")));
        let inv_k1 = 1.0 / r.k1;
        push("1/k1 > p/k - 2m/(n+m)", less(a, inv_k1), at(&format!("1/k1 = {inv_k1}, A = {a}")));
        push("k1 > q", less(q, r.k1), at(&format!("k1 = {}, q = {q}", r.k1)));
        push("1/k1 < rho/k", less(inv_k1, r.rho / k), at(&format!("1/k1 = {inv_k1}")));
        push("1/k1 < 1/q", less(inv_k1, 1.0 / q), at(&format!("1/k1 = {inv_k1}")));
        let inv_k2 = r.k2.map_or(0.0, |k2| 1.0 / k2);
        push("1/k2 > q/k1 - 2m/(n+m)", less(q * inv_k1 - c, inv_k2), at(&format!("1/k2 = {inv_k2}")));
        push("1/k2 < rho/k", less(inv_k2, r.rho / k), at(&format!("1/k2 = {inv_k2}")));
        let next = trace.rounds.get(j + 1).map_or(trace.k_bar, |s| s.k);
        push(
            "k <- k/rho",
            (next - k / r.rho).abs() <= 1e-12 * next,
            at(&format!("next k = {next}, k/rho = {}", k / r.rho)),
        );
    }
    if trace.rounds.is_empty() {
        push("k_bar = initial k", trace.k_bar == k0, format!("k_bar = {}, k0 = {k0}", trace.k_bar));
    }

    let kb = trace.k_bar;
    push("final k > (n+m)pq/(2m(q+1))", less(thr, kb), format!("k_bar = {kb}, threshold = {thr}"));
    let a = p / kb - c;
    let k1 = trace.k1_final;
    push("final k1 > (n+m)q/(2m)", less((nf + mf) * q / (2.0 * mf), k1), format!("k1 = {k1}"));
    push("final 1/k1 > p/k - 2m/(n+m)", less(a, 1.0 / k1), format!("1/k1 = {}, A = {a}", 1.0 / k1));
    let lo2 = q / k1 - c;
    match trace.k2_final {
        None => push("final q/k1 - 2m/(n+m) < 0", less(lo2, 0.0), format!("q/k1 - 2m/(n+m) = {lo2}")),
        Some(k2) => push("final 1/k2 > q/k1 - 2m/(n+m)", less(lo2, 1.0 / k2), format!("k2 = {k2}")),
    }
    push("terminated", trace.terminated, format!("{:?}", trace.failure));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        let e = compute_exponents(3.0, 3.0, 1).unwrap();
        assert_eq!((e.alpha, e.beta), (1.0, 1.0));
        let e = compute_exponents(2.0, 3.0, 1).unwrap();
        assert!((e.alpha - 1.2).abs() < 1e-15 && (e.beta - 1.6).abs() < 1e-15);
        let e = compute_exponents(3.0, 2.0, 1).unwrap();
        assert!(e.swapped && e.p == 2.0);
        assert!(compute_exponents(1.0, 1.0, 1).is_err());
    }

    #[test]
    fn regimes() {
        let r = |p, q, n| classify_regime(&compute_exponents(p, q, 1).unwrap(), n, 1);
        assert_eq!(r(1.5, 1.5, 3), Regime::Bounded);
        assert_eq!(r(2.0, 3.0, 3), Regime::Singular);
        assert_eq!(r(2.0, 2.0, 3), Regime::Border);
        assert_eq!(classify_regime(&compute_exponents(2.0, 2.0, 2).unwrap(), 2, 2), Regime::LowDimension);
    }

    #[test]
    fn border_is_not_applicable() {
        assert!(matches!(run_bootstrap(2.0, 2.0, 1, 3, &BootstrapRules::default()), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn corrupted_rho_is_reported() {
        let mut t = run_bootstrap(1.2, 1.2, 1, 4, &BootstrapRules::default()).unwrap();
        t.rounds[0].rho = 1.01;
        let v = validate_trace(&t);
        assert!(v.iter().any(|s| s.starts_with("rho < 1")), "{v:?}");
    }
}
