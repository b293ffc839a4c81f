use polyharm_core::green::sample_pairs;
use polyharm_core::math::{unit_ball_volume, unit_sphere_area};
use polyharm_core::{BallProblem, BoundCase, GreenKernel, Point};
use proptest::prelude::*;

/// Laplace Green function of the unit ball by the method of images.
fn image_green(n: usize, x: &Point, y: &Point) -> f64 {
    let r = x.dist(y);
    // |y|² |x - y*|² = (1 - |x|²)(1 - |y|²) + |x - y|² with y* = y / |y|².
    let reflected = ((1.0 - x.norm_sq()) * (1.0 - y.norm_sq()) + r * r).sqrt();
    match n {
        2 => (reflected.ln() - r.ln()) / (2.0 * std::f64::consts::PI),
        _ => {
            let c = 1.0 / ((n as f64 - 2.0) * unit_sphere_area(n));
            c * (r.powf(2.0 - n as f64) - reflected.powf(2.0 - n as f64))
        }
    }
}

/// `∫ G(0, y) dy` by composite Simpson in the radius after `r = s²`.
fn radial_mass(kernel: &GreenKernel, n: usize) -> f64 {
    let steps = 4000;
    let h = 1.0 / steps as f64;
    let f = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let r = s * s;
        let y = Point::from_slice(&[r, 0.0, 0.0, 0.0][..n]);
        kernel.eval(&Point::ORIGIN, &y).unwrap() * r.powi(n as i32 - 1) * 2.0 * s
    };
    let mut acc = f(0.0) + f(1.0);
    for i in 1..steps {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 * unit_sphere_area(n)
}

/// `u(0)` for `(-Δ)^m u = 1`: `u = (1 - |x|²)^m / Π_{j<m} 4 (j+1) (n/2 + j)`.
fn constant_rhs_center(n: usize, m: usize) -> f64 {
    1.0 / (0..m).map(|j| 4.0 * (j as f64 + 1.0) * (n as f64 / 2.0 + j as f64)).product::<f64>()
}

#[test]
fn laplace_kernel_matches_image_formula() {
    for n in 2..=4 {
        let k = GreenKernel::new(&BallProblem::new(n, 1).unwrap()).unwrap();
        for (x, y) in sample_pairs(n, 1000, 7) {
            let exact = image_green(n, &x, &y);
            let got = k.eval(&x, &y).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-10, "n = {n}: {got} vs {exact} at {x:?}, {y:?}");
        }
    }
}

#[test]
fn center_value_for_laplace_in_three_dimensions() {
    let k = GreenKernel::new(&BallProblem::new(3, 1).unwrap()).unwrap();
    let y = Point::from_slice(&[0.5, 0.0, 0.0]);
    let g = k.eval(&Point::ORIGIN, &y).unwrap();
    assert!((g - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-14);
}

#[test]
fn kernel_mass_at_center_matches_polynomial_solutions() {
    for n in 2..=4 {
        for m in 1..=3 {
            let k = GreenKernel::new(&BallProblem::new(n, m).unwrap()).unwrap();
            let mass = radial_mass(&k, n);
            let exact = constant_rhs_center(n, m);
            assert!(((mass - exact) / exact).abs() < 1e-6, "n = {n}, m = {m}: {mass} vs {exact}");
        }
    }
}

#[test]
fn biharmonic_center_mass_in_three_dimensions() {
    let k = GreenKernel::new(&BallProblem::new(3, 2).unwrap()).unwrap();
    assert!((radial_mass(&k, 3) - 1.0 / 120.0).abs() < 1e-8);
}

#[test]
fn dirichlet_decay_along_a_ray() {
    for (n, m) in [(3, 1), (3, 2), (2, 2), (4, 1)] {
        let k = GreenKernel::new(&BallProblem::new(n, m).unwrap()).unwrap();
        let x = Point::from_slice(&[0.1, -0.2, 0.05, 0.0][..n]);
        let mut ratios = Vec::new();
        for j in 2..9 {
            let d = 0.5f64.powi(j);
            let y = Point::from_slice(&[0.0, 1.0 - d, 0.0, 0.0][..n]);
            ratios.push(k.eval(&x, &y).unwrap() / d.powi(m as i32));
        }
        let [.., prev, last] = ratios[..] else { unreachable!() };
        assert!(last > 0.0 && last.is_finite());
        assert!((last - prev).abs() < 0.01 * last, "n = {n}, m = {m}: {ratios:?}");
        let max = ratios.iter().copied().fold(0.0, f64::max);
        assert!(max < 2.0 * last, "n = {n}, m = {m}: {ratios:?}");
    }
}

#[test]
fn lower_bounds_have_positive_minimum() {
    for (n, m, case) in [(3, 1, BoundCase::G1), (2, 1, BoundCase::G2), (3, 2, BoundCase::G3)] {
        let k = GreenKernel::new(&BallProblem::new(n, m).unwrap()).unwrap();
        let r = k.verify_lower_bound(case, 200, 2, 11).unwrap();
        assert!(r.min_ratio > 0.0, "{case:?}: {r:?}");
        assert_eq!(r.sample_counts, vec![200, 800]);
    }
    let k = GreenKernel::new(&BallProblem::new(3, 1).unwrap()).unwrap();
    assert!(k.verify_lower_bound(BoundCase::G3, 10, 1, 0).is_err());
}

#[test]
fn ball_volume_constant() {
    assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
}

fn interior_point(n: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-1.0f64..1.0, n).prop_filter_map("inside", move |c| {
        let p = Point::from_slice(&c);
        (p.norm() < 0.98).then_some(p)
    })
}

fn problem() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=4, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_is_symmetric_and_positive(
        (n, m) in problem(),
        seed in 0u64..1000,
    ) {
        let k = GreenKernel::new(&BallProblem::new(n, m).unwrap()).unwrap();
        for (x, y) in sample_pairs(n, 5, seed) {
            let a = k.eval(&x, &y).unwrap();
            let b = k.eval(&y, &x).unwrap();
            prop_assert!(a > 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn kernel_is_rotation_invariant(x in interior_point(3), y in interior_point(3), theta in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(x.dist(&y) > 1e-6);
        let k = GreenKernel::new(&BallProblem::new(3, 2).unwrap()).unwrap();
        let rot = |p: &Point| {
            let (s, c) = theta.sin_cos();
            Point::from_slice(&[c * p.0[0] - s * p.0[1], s * p.0[0] + c * p.0[1], p.0[2]])
        };
        let a = k.eval(&x, &y).unwrap();
        let b = k.eval(&rot(&x), &rot(&y)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }
}
