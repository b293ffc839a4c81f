use std::f64::consts::PI;

use polyharm_core::singular::{
    build_singular_rhs, construct_counterexample, near_vertex_max, singular_rhs_norm, verify_pointwise_lower_bound,
    verify_system_residual, vertex_cutoff,
};
use polyharm_core::spectral::{eigen_moment, principal_eigenpair};
use polyharm_core::{
    BallProblem, ConeRegion, Error, Grading, GreenKernel, GreenOperator, Provenance, QuadratureGrid, SampledField,
};

fn focused(n: usize, m: usize, level: u32) -> GreenOperator {
    let p = BallProblem::new(n, m).unwrap();
    let region = ConeRegion::default_for(&p);
    let g = QuadratureGrid::build(&p, level, Grading::default().with_focus(region.x0)).unwrap();
    GreenOperator::new(&GreenKernel::new(&p).unwrap(), &g).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// `∫_Σ |x - x0|^{-(α+2)} d(x) dx` for the default cone, in polar coordinates
/// about the vertex: `x = x0 + r ω`, `angle(ω, -x0) = θ`, so
/// `|x|² = 1 - 2 r cos θ + r²`. The radius is substituted as `r = R s^5`.
fn cone_mass(n: usize, alpha: f64) -> f64 {
    let cap = ConeRegion::DEFAULT_CAP_RADIUS;
    let sphere = match n {
        3 => 2.0 * PI,
        4 => 4.0 * PI,
        _ => unreachable!(),
    };
    let radial = |theta: f64| {
        simpson(
            |s| {
                if s == 0.0 {
                    return 0.0;
                }
                let r = cap * s.powi(5);
                let d = 1.0 - (1.0 - 2.0 * r * theta.cos() + r * r).sqrt();
                r.powf(-(alpha + 2.0)) * d * r.powi(n as i32 - 1) * 5.0 * cap * s.powi(4)
            },
            0.0,
            1.0,
            2000,
        )
    };
    sphere * simpson(|t| radial(t) * t.sin().powi(n as i32 - 2), 0.0, PI / 6.0, 400)
}

#[test]
fn cone_data_norm_matches_polar_integral() {
    for (n, alpha, level) in [(3, 1.0, 2), (3, 1.2, 2), (4, 1.5, 2)] {
        let p = BallProblem::new(n, 1).unwrap();
        let region = ConeRegion::default_for(&p);
        let exact = cone_mass(n, alpha);
        let mut norms = Vec::new();
        for l in [level, level + 1] {
            let g = QuadratureGrid::build(&p, l, Grading::default().with_focus(region.x0)).unwrap();
            norms.push(singular_rhs_norm(&p, alpha, &region, &g, 1.0).unwrap());
        }
        assert!((norms[1] - norms[0]).abs() < 0.05 * norms[1], "{norms:?}");
        assert!((norms[1] / exact - 1.0).abs() < 0.01, "n = {n}, α = {alpha}: {norms:?} vs {exact}");
    }
}

#[test]
fn cone_data_support_and_admissible_exponents() {
    let op = focused(3, 1, 1);
    let p = BallProblem::new(3, 1).unwrap();
    let region = ConeRegion::default_for(&p);
    let f = build_singular_rhs(&p, 1.0, &region, op.grid()).unwrap();
    for (x, v) in op.grid().nodes().iter().zip(f.values()) {
        assert_eq!(*v == 0.0, !region.contains(x));
    }
    assert!(matches!(build_singular_rhs(&p, 2.0, &region, op.grid()), Err(Error::Parameter(_))));
    assert!(build_singular_rhs(&p, 0.0, &region, op.grid()).is_err());
}

#[test]
fn lower_bound_constant_is_positive_and_homogeneous() {
    for (n, alpha) in [(3, 1.0), (2, 0.5)] {
        let op = focused(n, 1, 2);
        let p = BallProblem::new(n, 1).unwrap();
        let region = ConeRegion::default_for(&p);
        let f = build_singular_rhs(&p, alpha, &region, op.grid()).unwrap();
        let u = op.apply(&f).unwrap();
        let cutoff = vertex_cutoff(op.grid());
        let c = verify_pointwise_lower_bound(&u, op.grid(), alpha, &region, cutoff).unwrap();
        assert!(c > 0.0);
        let u3 = u.map(Provenance::Potential, |v| 3.0 * v).unwrap();
        let c3 = verify_pointwise_lower_bound(&u3, op.grid(), alpha, &region, cutoff).unwrap();
        assert!((c3 / c - 3.0).abs() < 1e-12);
    }
}

#[test]
fn lower_bound_constant_is_level_stable() {
    let p = BallProblem::new(3, 1).unwrap();
    let region = ConeRegion::default_for(&p);
    let mut cs = Vec::new();
    for level in [1, 2] {
        let op = focused(3, 1, level);
        let u = op.apply(&build_singular_rhs(&p, 1.0, &region, op.grid()).unwrap()).unwrap();
        cs.push(verify_pointwise_lower_bound(&u, op.grid(), 1.0, &region, vertex_cutoff(op.grid())).unwrap());
    }
    assert!((cs[1] - cs[0]).abs() < 0.3 * cs[0].max(cs[1]), "{cs:?}");
}

#[test]
fn counterexample_pipeline() {
    let p = BallProblem::new(3, 1).unwrap();
    let region = ConeRegion::default_for(&p);
    let mut near = Vec::new();
    let mut moments = Vec::new();
    for level in [1, 2] {
        let op = focused(3, 1, level);
        let s = construct_counterexample(2.0, 3.0, &op, &region).unwrap();
        assert!((s.alpha - 1.2).abs() < 1e-12 && (s.beta - 1.6).abs() < 1e-12);
        assert!(s.sup_a.is_finite() && s.sup_b.is_finite() && s.c_u > 0.0 && s.c_v > 0.0);
        let (ru, rv) = verify_system_residual(&s, &op).unwrap();
        assert!(ru <= 1e-2 && rv <= 1e-2);
        let mut bad = s.clone();
        bad.a = bad.a.map(Provenance::RightHandSide, |v| 2.0 * v).unwrap();
        let (ru, _) = verify_system_residual(&bad, &op).unwrap();
        assert!((ru - 1.0).abs() < 1e-6, "{ru}");
        near.push(near_vertex_max(&s.u, op.grid(), &region.x0, s.cutoff).unwrap());
        let pair = principal_eigenpair(&op, 1e-10, 1e-6, 500).unwrap();
        let moment = eigen_moment(&s.u, &pair, &op).unwrap();
        // G is self-adjoint: ∫ G[φ_data] φ_1 = ∫ φ_data φ_1 / λ.
        let dual = eigen_moment(&s.phi, &pair, &op).unwrap() / pair.eigenvalue;
        assert!((moment / dual - 1.0).abs() < 0.02, "{moment} vs {dual}");
        moments.push(moment);
    }
    assert!(near[1] >= 2.0 * near[0], "{near:?}");
    assert!((moments[1] - moments[0]).abs() < 0.2 * moments[0].max(moments[1]), "{moments:?}");
}

#[test]
fn symmetric_exponents_give_comparable_coefficients() {
    let p = BallProblem::new(3, 1).unwrap();
    let op = focused(3, 1, 1);
    let s = construct_counterexample(3.0, 3.0, &op, &ConeRegion::default_for(&p)).unwrap();
    assert_eq!(s.alpha, s.beta);
    assert!(s.sup_a <= 2.0 * s.sup_b && s.sup_b <= 2.0 * s.sup_a);
}

#[test]
fn counterexample_needs_the_singular_regime() {
    let p = BallProblem::new(3, 1).unwrap();
    let op = focused(3, 1, 0);
    let r = construct_counterexample(1.5, 1.5, &op, &ConeRegion::default_for(&p));
    assert!(matches!(r, Err(Error::NotApplicable(_))));
}

#[test]
fn residual_of_zero_system_is_guarded() {
    let p = BallProblem::new(3, 1).unwrap();
    let op = focused(3, 1, 0);
    let mut s = construct_counterexample(2.0, 3.0, &op, &ConeRegion::default_for(&p)).unwrap();
    s.u = SampledField::zeros(op.grid(), Provenance::Potential);
    s.v = SampledField::zeros(op.grid(), Provenance::Potential);
    assert!(matches!(verify_system_residual(&s, &op), Err(Error::Precondition(_))));
}
