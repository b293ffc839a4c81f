use std::f64::consts::PI;

use polyharm_core::estimate::verify_lemma_x;
use polyharm_core::spectral::{eigen_moment, principal_eigenpair, verify_sandwich};
use polyharm_core::{
    BallProblem, Error, Grading, GreenKernel, GreenOperator, Point, Provenance, QuadratureGrid, SampledField,
};
use proptest::prelude::*;

fn operator(n: usize, m: usize, level: u32) -> GreenOperator {
    let p = BallProblem::new(n, m).unwrap();
    let g = QuadratureGrid::build(&p, level, Grading::default()).unwrap();
    GreenOperator::new(&GreenKernel::new(&p).unwrap(), &g).unwrap()
}

/// Exact solution of `(-Δ)^m u = 1` with homogeneous Dirichlet data.
fn exact_constant_rhs(n: usize, m: usize, x: &Point) -> f64 {
    let c: f64 = (0..m).map(|j| 4.0 * (j as f64 + 1.0) * (n as f64 / 2.0 + j as f64)).product();
    (1.0 - x.norm_sq()).powi(m as i32) / c
}

fn one(op: &GreenOperator) -> SampledField {
    SampledField::from_fn(op.grid(), Provenance::RightHandSide, |_| 1.0).unwrap()
}

#[test]
fn grid_volume_and_weights() {
    for (n, exact) in [(2, PI), (3, 4.0 * PI / 3.0), (4, PI * PI / 2.0)] {
        let p = BallProblem::new(n, 1).unwrap();
        for level in 0..3 {
            let g = QuadratureGrid::build(&p, level, Grading::default()).unwrap();
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert!((g.total_weight() - exact).abs() < 1e-12 * exact);
        }
    }
}

#[test]
fn constant_rhs_converges_to_polynomial_solution() {
    for (n, m, levels) in [(3, 1, 0..3), (2, 1, 1..4), (3, 2, 0..3), (2, 2, 1..4)] {
        let mut sup_errors = Vec::new();
        let mut center = 0.0;
        for level in levels {
            let op = operator(n, m, level);
            let u = op.apply(&one(&op)).unwrap();
            let err = op
                .grid()
                .nodes()
                .iter()
                .zip(u.values())
                .map(|(x, v)| (v / exact_constant_rhs(n, m, x) - 1.0).abs())
                .fold(0.0, f64::max);
            sup_errors.push(err);
            center = u.values()[0] / exact_constant_rhs(n, m, &Point::ORIGIN) - 1.0;
        }
        assert!(center.abs() < 0.02, "n = {n}, m = {m}: u(0) error {center}");
        assert!(sup_errors.windows(2).all(|w| w[1] < w[0]), "n = {n}, m = {m}: {sup_errors:?}");
    }
}

#[test]
fn zero_rhs_gives_zero() {
    let op = operator(3, 2, 1);
    let z = SampledField::zeros(op.grid(), Provenance::RightHandSide);
    assert!(op.apply(&z).unwrap().values().iter().all(|&v| v == 0.0));
}

#[test]
fn off_grid_potential_matches_exact_solution() {
    let op = operator(2, 1, 3);
    let f = one(&op);
    for x in [[0.3, 0.1], [-0.5, 0.5], [0.0, -0.9]] {
        let x = Point::from_slice(&x);
        let u = op.potential_at(&x, &f).unwrap();
        let exact = exact_constant_rhs(2, 1, &x);
        assert!((u / exact - 1.0).abs() < 0.02);
    }
    assert!(matches!(op.potential_at(&Point::from_slice(&[1.0, 0.0]), &f), Err(Error::Domain(_))));
}

#[test]
fn weighted_norm_of_one() {
    let op = operator(3, 1, 3);
    let n1 = one(&op).weighted_norm(op.grid(), 1.0, 1).unwrap();
    assert!((n1 - PI / 3.0).abs() < 0.005 * PI / 3.0);
}

#[test]
fn eigenvalues_match_bessel_zeros() {
    let disk = operator(2, 1, 3);
    let pair = principal_eigenpair(&disk, 1e-10, 1e-6, 500).unwrap();
    let j0 = 2.404_825_557_695_773f64;
    assert!((pair.eigenvalue / (j0 * j0) - 1.0).abs() < 0.01);

    let ball = operator(3, 1, 2);
    let pair = principal_eigenpair(&ball, 1e-10, 1e-6, 500).unwrap();
    assert!((pair.eigenvalue / (PI * PI) - 1.0).abs() < 0.01, "{}", pair.eigenvalue);
    let (c1, c2) = verify_sandwich(&pair, &ball).unwrap();
    assert!(c1 > 0.0 && c2 / c1 <= 10.0);
    let u = one(&ball);
    assert!((eigen_moment(&u, &pair, &ball).unwrap() - 1.0).abs() < 1e-8);
    let z = SampledField::zeros(ball.grid(), Provenance::Oracle);
    assert_eq!(eigen_moment(&z, &pair, &ball).unwrap(), 0.0);
}

#[test]
fn biharmonic_sandwich_is_stable() {
    let mut c1 = Vec::new();
    for level in [2, 3] {
        let op = operator(2, 2, level);
        let pair = principal_eigenpair(&op, 1e-10, 1e-6, 500).unwrap();
        c1.push(verify_sandwich(&pair, &op).unwrap().0);
    }
    assert!((c1[1] - c1[0]).abs() < 0.2 * c1[1], "{c1:?}");
}

#[test]
fn lemma_constant_for_constant_data() {
    let op = operator(3, 1, 2);
    let c = verify_lemma_x(&op, &one(&op)).unwrap();
    assert!((c * 2.0 * PI - 1.0).abs() < 0.05, "{c}");
    let bump = SampledField::from_fn(op.grid(), Provenance::RightHandSide, |x| {
        if x.dist(&Point::from_slice(&[0.2, 0.1, 0.0])) < 0.3 {
            1.0
        } else {
            0.0
        }
    })
    .unwrap();
    assert!(verify_lemma_x(&op, &bump).unwrap() > 0.0);
    let z = SampledField::zeros(op.grid(), Provenance::RightHandSide);
    assert!(matches!(verify_lemma_x(&op, &z), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_linear_and_monotone(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        cx in -0.5f64..0.5,
        cy in -0.5f64..0.5,
    ) {
        let op = operator(2, 2, 1);
        let f = SampledField::from_fn(op.grid(), Provenance::RightHandSide, |x| (x.0[0] - cx).powi(2) + 0.1).unwrap();
        let g = SampledField::from_fn(op.grid(), Provenance::RightHandSide, |x| (x.0[1] * cy).exp()).unwrap();
        let h = f.zip_with(&g, Provenance::RightHandSide, |s, t| a * s + b * t).unwrap();
        let (uf, ug, uh) = (op.apply(&f).unwrap(), op.apply(&g).unwrap(), op.apply(&h).unwrap());
        let scale = uf.max_abs() * a.abs() + ug.max_abs() * b.abs();
        for i in 0..uh.len() {
            let lin = a * uf.values()[i] + b * ug.values()[i];
            prop_assert!((uh.values()[i] - lin).abs() <= 1e-12 * scale.max(1e-300));
        }
        let fg = f.zip_with(&g, Provenance::RightHandSide, |s, t| s + t.abs()).unwrap();
        let ufg = op.apply(&fg).unwrap();
        for (lo, hi) in uf.values().iter().zip(ufg.values()) {
            prop_assert!(*lo > 0.0 && lo <= hi);
        }
    }
}
