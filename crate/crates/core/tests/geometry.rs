use drheat_core::algebra::{build_htype, HTypeAlgebra};
use drheat_core::group::{
    cayley, distance, distance_to_origin, haar_monte_carlo, inverse, multiply, radial_integral, GroupElement,
    HaarSampler, SpaceParams,
};
use drheat_core::quadrature::QuadOptions;
use nalgebra::DVector;
use proptest::prelude::*;

const CASES: [(usize, usize); 5] = [(2, 0), (2, 1), (4, 3), (8, 1), (8, 5)];

fn algebras() -> Vec<HTypeAlgebra> {
    CASES.iter().map(|&(m, k)| build_htype(m, k).unwrap()).collect()
}

fn element(alg: &HTypeAlgebra, xs: &[f64], zs: &[f64], log_a: f64) -> GroupElement {
    let x = DVector::from_fn(alg.m(), |i, _| xs[i % xs.len()] * (1.0 + 0.1 * i as f64));
    let z = DVector::from_fn(alg.k(), |i, _| zs[i % zs.len()] * (1.0 - 0.05 * i as f64));
    GroupElement::new(x, z, log_a.exp()).unwrap()
}

fn coords() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (
        prop::collection::vec(-3.0..3.0f64, 3),
        prop::collection::vec(-3.0..3.0f64, 3),
        (0.1f64.ln())..(10f64.ln()),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn j_squares_to_minus_norm(zs in prop::collection::vec(-2.0..2.0f64, 8), xs in prop::collection::vec(-2.0..2.0f64, 16)) {
        for alg in algebras() {
            let z = DVector::from_fn(alg.k(), |i, _| zs[i % 8]);
            let x = DVector::from_fn(alg.m(), |i, _| xs[i % 16]);
            let jjx = alg.j_map(&z, &alg.j_map(&z, &x).unwrap()).unwrap();
            prop_assert!((jjx + &x * z.norm_squared()).amax() < 1e-12);
            let jx = alg.j_map(&z, &x).unwrap();
            prop_assert!((jx.norm() - z.norm() * x.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_is_adjoint_and_antisymmetric(zs in prop::collection::vec(-2.0..2.0f64, 8), xs in prop::collection::vec(-2.0..2.0f64, 16), ys in prop::collection::vec(-2.0..2.0f64, 16)) {
        for alg in algebras() {
            let z = DVector::from_fn(alg.k(), |i, _| zs[i % 8]);
            let x = DVector::from_fn(alg.m(), |i, _| xs[i % 16]);
            let y = DVector::from_fn(alg.m(), |i, _| ys[(i + 3) % 16]);
            let lhs = alg.j_map(&z, &x).unwrap().dot(&y);
            let rhs = z.dot(&alg.bracket(&x, &y).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-12);
            let sym = alg.bracket(&x, &y).unwrap() + alg.bracket(&y, &x).unwrap();
            prop_assert!(sym.iter().all(|v| v.abs() < 1e-14));
            prop_assert!(alg.bracket(&x, &x).unwrap().iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn polarized_anticommutation(zs in prop::collection::vec(-2.0..2.0f64, 8), ws in prop::collection::vec(-2.0..2.0f64, 8)) {
        for alg in algebras() {
            let z = DVector::from_fn(alg.k(), |i, _| zs[i]);
            let w = DVector::from_fn(alg.k(), |i, _| ws[i]);
            let jz = alg.j_matrix(&z).unwrap();
            let jw = alg.j_matrix(&w).unwrap();
            let id = nalgebra::DMatrix::<f64>::identity(alg.m(), alg.m());
            let defect = &jz * &jw + &jw * &jz + id * (2.0 * z.dot(&w));
            prop_assert!(defect.amax() < 1e-12);
        }
    }

    #[test]
    fn group_axioms(g in coords(), h in coords(), w in coords()) {
        for alg in algebras() {
            let g = element(&alg, &g.0, &g.1, g.2);
            let h = element(&alg, &h.0, &h.1, h.2);
            let w = element(&alg, &w.0, &w.1, w.2);
            let e = GroupElement::identity(&alg);
            let left = multiply(&alg, &multiply(&alg, &g, &h).unwrap(), &w).unwrap();
            let right = multiply(&alg, &g, &multiply(&alg, &h, &w).unwrap()).unwrap();
            let scale = 1.0 + left.x.amax().max(left.z.amax().max(left.a));
            prop_assert!(left.max_abs_diff(&right) < 1e-12 * scale);
            prop_assert_eq!(multiply(&alg, &g, &e).unwrap(), g.clone());
            prop_assert_eq!(multiply(&alg, &e, &g).unwrap(), g.clone());
            let gi = inverse(&alg, &g).unwrap();
            prop_assert!(multiply(&alg, &g, &gi).unwrap().max_abs_diff(&e) < 1e-12);
            prop_assert!(multiply(&alg, &gi, &g).unwrap().max_abs_diff(&e) < 1e-12);
            prop_assert!(inverse(&alg, &gi).unwrap().max_abs_diff(&g) < 1e-12);
        }
    }

    #[test]
    fn cayley_stays_in_ball_and_matches_hyperbolic_distance(g in coords()) {
        for alg in algebras() {
            let g = element(&alg, &g.0, &g.1, g.2);
            let b = cayley(&alg, &g).unwrap();
            prop_assert!(b.norm() < 1.0);
            // Independent closed form: cosh²(r/2) = Dn / 4a.
            let s = g.a + 0.25 * g.x.norm_squared();
            let dn = (1.0 + s) * (1.0 + s) + g.z.norm_squared();
            let r_oracle = 2.0 * (dn / (4.0 * g.a)).sqrt().acosh();
            let r = distance_to_origin(&alg, &g).unwrap();
            prop_assert!((r - r_oracle).abs() < 1e-9 * (1.0 + r), "{} vs {}", r, r_oracle);
        }
    }

    #[test]
    fn distance_is_a_metric(g in coords(), h in coords(), w in coords()) {
        for alg in algebras() {
            let g = element(&alg, &g.0, &g.1, g.2);
            let h = element(&alg, &h.0, &h.1, h.2);
            let w = element(&alg, &w.0, &w.1, w.2);
            let dgh = distance(&alg, &g, &h).unwrap();
            prop_assert!((dgh - distance(&alg, &h, &g).unwrap()).abs() < 1e-10 * (1.0 + dgh));
            prop_assert!(distance(&alg, &g, &g).unwrap() < 1e-7);
            let via = distance(&alg, &g, &w).unwrap() + distance(&alg, &w, &h).unwrap();
            prop_assert!(dgh <= via + 1e-10 * (1.0 + via));
        }
    }
}

fn bump_family(r: f64, which: usize, radius: f64) -> f64 {
    if r >= radius {
        return 0.0;
    }
    let u = r / radius;
    match which {
        0 => (1.0 - u * u).powi(2),
        1 => (-r * r).exp() * (1.0 - u).powi(2),
        2 => 1.0 - u,
        3 => 0.5 * (1.0 + (std::f64::consts::PI * u).cos()),
        _ => (u * (1.0 - u)).powi(2) * 16.0,
    }
}

#[test]
fn haar_and_polar_routes_differ_by_sphere_area() {
    let radius = 2.0;
    for (m, k) in [(2, 0), (2, 1)] {
        let alg = build_htype(m, k).unwrap();
        let params = SpaceParams::from_algebra(&alg);
        let mut ratios = Vec::new();
        for which in 0..5 {
            let radial = radial_integral(&params, |r| bump_family(r, which, radius), radius, &QuadOptions::with_rtol(1e-10))
                .unwrap()
                .value[0];
            let plan = HaarSampler { log_a_max: radius, scale: 2.5, samples: 400_000, seed: 11 + which as u64 };
            let mc = haar_monte_carlo(&alg, |g| bump_family(distance_to_origin(&alg, g).unwrap(), which, radius), &plan).unwrap();
            let ratio = mc.mean / radial;
            let sigma = mc.std_error / radial;
            assert!(
                (ratio - params.sphere_constant()).abs() < 4.0 * sigma,
                "(m,k)=({m},{k}) f{which}: ratio {ratio} ± {sigma}, sphere area {}",
                params.sphere_constant()
            );
            ratios.push((ratio, sigma));
        }
        for w in ratios.windows(2) {
            let s = (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
            assert!((w[0].0 - w[1].0).abs() < 4.0 * s);
        }
    }
}

#[test]
fn haar_measure_is_left_invariant() {
    let radius = 1.5;
    let alg = build_htype(2, 1).unwrap();
    let g = GroupElement::new(DVector::from_vec(vec![0.4, -0.3]), DVector::from_vec(vec![0.5]), 1.6).unwrap();
    let f = |x: &GroupElement| bump_family(distance_to_origin(&alg, x).unwrap(), 0, radius);
    let shift = distance_to_origin(&alg, &inverse(&alg, &g).unwrap()).unwrap();
    let plan = HaarSampler { log_a_max: radius + shift, scale: 3.0, samples: 400_000, seed: 5 };
    let base = haar_monte_carlo(&alg, f, &plan).unwrap();
    let moved = haar_monte_carlo(&alg, |x| f(&multiply(&alg, &g, x).unwrap()), &HaarSampler { seed: 6, ..plan }).unwrap();
    let s = (base.std_error.powi(2) + moved.std_error.powi(2)).sqrt();
    assert!((base.mean - moved.mean).abs() < 3.0 * s, "{} vs {} (σ {s})", base.mean, moved.mean);
}

#[test]
fn monte_carlo_is_reproducible() {
    let alg = build_htype(2, 0).unwrap();
    let plan = HaarSampler { log_a_max: 1.0, scale: 1.0, samples: 20_000, seed: 3 };
    let f = |g: &GroupElement| (-g.x.norm_squared() - g.a.ln().powi(2)).exp();
    let a = haar_monte_carlo(&alg, f, &plan).unwrap();
    let b = haar_monte_carlo(&alg, f, &plan).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
}
