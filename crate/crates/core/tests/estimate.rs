use polyharm_core::estimate::{falsification_alpha, falsify_estimate, verify_estimate, LemmaParams};
use polyharm_core::{BallProblem, ConeRegion, Error, EstimateCase, Grading, OperatorCache, RhsProfile, Trend};
use proptest::prelude::*;

const BUDGET: usize = 1 << 30;

#[test]
fn bounded_regime_studies() {
    let mut cache = OperatorCache::new(BUDGET);
    let fam = RhsProfile::DEFAULT_FAMILY;
    let p3 = BallProblem::new(3, 1).unwrap();
    for (problem, case, levels) in [
        (BallProblem::new(2, 2).unwrap(), EstimateCase::SupNorm, vec![1u32, 2, 3, 4]),
        (p3, EstimateCase::HigherIntegrability { k: 1.5 }, vec![0, 1, 2]),
        (p3, EstimateCase::WeightedLpLq { p: 2.0, q: 2.0 }, vec![0, 1, 2]),
    ] {
        let r = verify_estimate(&mut cache, &problem, case, &fam, &levels, Grading::default()).unwrap();
        assert_eq!(r.trend, Trend::Bounded, "{}: {:?}", r.estimate_id, r.ratios());
        assert_eq!(r.levels.len(), levels.len());
        assert!(r.levels.iter().all(|l| l.per_rhs.len() == fam.len()));
        assert!(r.trend_is_consistent());
    }
}

#[test]
fn lemma_family_is_bounded() {
    let mut cache = OperatorCache::new(BUDGET);
    let case = EstimateCase::Lemma(LemmaParams { theta: 0.5, alpha: 0.5, p: 2.0, q: 2.0 });
    let p = BallProblem::new(3, 1).unwrap();
    let r = verify_estimate(&mut cache, &p, case, &RhsProfile::DEFAULT_FAMILY, &[0, 1, 2], Grading::default()).unwrap();
    assert_eq!(r.trend, Trend::Bounded, "{:?}", r.ratios());
}

#[test]
fn violated_hypotheses_are_rejected_before_work() {
    let mut cache = OperatorCache::new(BUDGET);
    let p3 = BallProblem::new(3, 1).unwrap();
    let fam = RhsProfile::DEFAULT_FAMILY;
    for case in [
        EstimateCase::HigherIntegrability { k: 2.5 },
        EstimateCase::SupNorm,
        EstimateCase::WeightedLpLq { p: 1.0, q: f64::INFINITY },
    ] {
        let r = verify_estimate(&mut cache, &p3, case, &fam, &[0], Grading::default());
        assert!(matches!(r, Err(Error::Parameter(_))), "{case:?}");
    }
    assert_eq!(cache.builds(), 0);
}

#[test]
fn falsification_rejects_the_boundary_case() {
    let p3 = BallProblem::new(3, 1).unwrap();
    let mut cache = OperatorCache::new(BUDGET);
    let r = falsify_estimate(&mut cache, &p3, 1.0, f64::INFINITY, &[0], &ConeRegion::default_for(&p3), false);
    assert!(matches!(r, Err(Error::Parameter(_))));
    assert_eq!(cache.builds(), 0);
}

#[test]
fn falsification_window() {
    let p4 = BallProblem::new(4, 1).unwrap();
    assert!((falsification_alpha(&p4, 1.0, f64::INFINITY).unwrap() - 1.5).abs() < 1e-15);
}

#[test]
fn short_falsification_ladder_is_inconclusive() {
    let p4 = BallProblem::new(4, 1).unwrap();
    let mut cache = OperatorCache::new(BUDGET);
    let r =
        falsify_estimate(&mut cache, &p4, 1.0, f64::INFINITY, &[0, 1], &ConeRegion::default_for(&p4), false).unwrap();
    assert_eq!(r.trend, Trend::Inconclusive);
    assert_eq!(r.data_norms.len(), 2);
    assert!(r.levels[1].ratio > r.levels[0].ratio);
}

proptest! {
    #[test]
    fn trend_is_scale_invariant(ratios in prop::collection::vec(0.01f64..100.0, 1..8), scale in 0.01f64..100.0) {
        let scaled: Vec<f64> = ratios.iter().map(|r| r * scale).collect();
        prop_assert_eq!(Trend::classify(&ratios), Trend::classify(&scaled));
    }

    #[test]
    fn geometric_growth_is_detected(start in 0.1f64..10.0, factor in 1.6f64..3.0, len in 4usize..8) {
        let ratios: Vec<f64> = (0..len).map(|i| start * factor.powi(i as i32)).collect();
        prop_assert_eq!(Trend::classify(&ratios), Trend::Growing);
    }
}
