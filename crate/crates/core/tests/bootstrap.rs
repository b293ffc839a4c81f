use polyharm_core::exponents::{classify_regime, compute_exponents, run_bootstrap, validate_trace};
use polyharm_core::{BootstrapRules, Error, Regime};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

#[test]
fn exponent_arithmetic() {
    let e = compute_exponents(2.0, 3.0, 1).unwrap();
    assert!(close(e.alpha, 6.0 / 5.0) && close(e.beta, 8.0 / 5.0));
    let e = compute_exponents(1.5, 1.5, 1).unwrap();
    assert!(close(e.alpha, 4.0) && close(e.beta, 4.0));
    let e = compute_exponents(3.0, 2.0, 1).unwrap();
    assert!(e.swapped && e.p == 2.0 && e.q == 3.0);
    assert!(matches!(compute_exponents(0.5, 2.0, 1), Err(Error::Parameter(_))));
}

#[test]
fn regime_table() {
    let r = |p: f64, q: f64, n: usize, m: usize| classify_regime(&compute_exponents(p, q, m).unwrap(), n, m);
    assert_eq!(r(1.5, 1.5, 3, 1), Regime::Bounded);
    assert_eq!(r(2.0, 3.0, 3, 1), Regime::Singular);
    assert_eq!(r(2.0, 2.0, 3, 1), Regime::Border);
    assert_eq!(r(5.0, 5.0, 2, 2), Regime::LowDimension);
}

/// n = 4, m = 1, p = q = 1.2 by hand: k = 0.98 · 5/3 = 49/30, threshold
/// 5 · 1.44 / 4.4, η = (2/5) · 2.2 · k - 0.44, L = max(3 · 1.2 / 5, 1 - η) = 0.72.
#[test]
fn worked_trace_with_one_round() {
    let t = run_bootstrap(1.2, 1.2, 1, 4, &BootstrapRules::default()).unwrap();
    let k0 = 49.0 / 30.0;
    assert!(close(t.initial_k, k0));
    assert!(close(t.threshold(), 7.2 / 4.4));
    assert_eq!(t.rounds.len(), 1);
    let r = &t.rounds[0];
    let eta = 0.4 * 2.2 * k0 - 0.44;
    assert!(close(r.eta, eta));
    assert!(close(r.rho, 0.86));
    let a0 = 1.2 / k0 - 0.4;
    let inv_k1 = a0 + 0.1 * (0.86 / k0 - a0);
    assert!(close(r.k1, 1.0 / inv_k1));
    let lo2 = 1.2 * inv_k1 - 0.4;
    assert!(close(r.k2.unwrap(), 1.0 / (lo2 + 0.5 * (0.86 / k0 - lo2))));
    let k_bar = k0 / 0.86;
    assert!(close(t.k_bar, k_bar));
    assert!((t.k_bar - 1.8992).abs() < 1e-4);
    let a = 1.2 / k_bar - 0.4;
    assert!(close(t.k1_final, 0.5 * (3.0 + 1.0 / a)));
    assert!((t.k1_final - 3.6567).abs() < 1e-4);
    assert_eq!(t.k2_final, None);
    assert!(t.terminated && validate_trace(&t).is_empty());
}

/// n = 3, m = 1, p = q = 1.5: k = 0.98 · 2 = 1.96 exceeds the threshold
/// 4 · 2.25 / 5 = 1.8, so no rounds; k1 is the midpoint of (3, 1/A).
#[test]
fn worked_trace_without_rounds() {
    let t = run_bootstrap(1.5, 1.5, 1, 3, &BootstrapRules::default()).unwrap();
    assert!(close(t.initial_k, 1.96));
    assert!(close(t.threshold(), 1.8));
    assert!(t.rounds.is_empty());
    let a = 1.5 / 1.96 - 0.5;
    assert!(close(t.k1_final, 0.5 * (3.0 + 1.0 / a)));
    assert_eq!(t.k2_final, None);
}

#[test]
fn non_bounded_regimes_are_rejected() {
    let rules = BootstrapRules::default();
    assert!(matches!(run_bootstrap(2.0, 2.0, 1, 3, &rules), Err(Error::NotApplicable(_))));
    assert!(matches!(run_bootstrap(2.0, 3.0, 1, 3, &rules), Err(Error::NotApplicable(_))));
}

#[test]
fn injected_faults_are_named() {
    let t = run_bootstrap(1.2, 1.2, 1, 4, &BootstrapRules::default()).unwrap();
    let mut bad = t.clone();
    bad.rounds[0].rho = 1.01;
    assert!(validate_trace(&bad).iter().any(|v| v.starts_with("rho < 1")));
    let mut bad = t.clone();
    bad.rounds[0].k1 = bad.q;
    assert!(validate_trace(&bad).iter().any(|v| v.starts_with("k1 > q")));
    let mut bad = t;
    bad.k_bar = 1.0;
    assert!(!validate_trace(&bad).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bootstrap_invariants(nm in prop::sample::select(vec![(3usize, 1usize), (4, 1), (3, 2), (4, 2)]), p in 0.05f64..5.0, q in 0.05f64..5.0) {
        let (n, m) = nm;
        prop_assume!(p * q > 1.0 + 1e-6);
        let e = compute_exponents(p, q, m).unwrap();
        prop_assume!(classify_regime(&e, n, m) == Regime::Bounded);
        let t = run_bootstrap(p, q, m, n, &BootstrapRules::default()).unwrap();
        prop_assert!(t.terminated && t.rounds.len() <= 100);
        prop_assert!(validate_trace(&t).is_empty());
        let bound = 1.0 + t.growth_bound();
        let ks: Vec<f64> = t.rounds.iter().map(|r| r.k).chain([t.k_bar]).collect();
        for w in ks.windows(2) {
            prop_assert!(w[1] / w[0] >= bound * (1.0 - 1e-12));
        }
    }

    #[test]
    fn regime_is_swap_invariant(p in 0.05f64..5.0, q in 0.05f64..5.0, n in 2usize..=4, m in 1usize..=3) {
        prop_assume!(p * q > 1.0 + 1e-9);
        let a = classify_regime(&compute_exponents(p, q, m).unwrap(), n, m);
        let b = classify_regime(&compute_exponents(q, p, m).unwrap(), n, m);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn bounded_set_is_an_interval_down_to_pq_one(q in 0.3f64..5.0, n in 3usize..=4, m in 1usize..=2) {
        prop_assume!(n > m);
        let lo = 1.0 / q;
        let bounded: Vec<bool> = (1..400)
            .map(|i| lo * (1.0 + 1e-6) + (5.0 - lo) * i as f64 / 400.0)
            .map(|p| classify_regime(&compute_exponents(p, q, m).unwrap(), n, m) == Regime::Bounded)
            .collect();
        prop_assert!(bounded[0] || !bounded.iter().any(|&b| b));
        let first_gap = bounded.iter().position(|&b| !b).unwrap_or(bounded.len());
        prop_assert!(bounded[first_gap..].iter().all(|&b| !b));
    }
}
