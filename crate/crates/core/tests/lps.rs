use drheat_core::group::SpaceParams;
use drheat_core::lps::*;
use drheat_core::spherical::kernel::HeatKernel;
use proptest::prelude::*;
use std::sync::OnceLock;

fn h3() -> &'static HeatKernel {
    static K: OnceLock<HeatKernel> = OnceLock::new();
    K.get_or_init(|| HeatKernel::new(SpaceParams::new(2, 0).unwrap()).unwrap())
}

#[test]
fn full_piece_is_max_of_split() {
    let k = h3();
    for (r, sigma, i) in [(0.5, 0.0, 0), (2.0, 0.1, 1), (6.0, 0.2, 0)] {
        let full = k_sigma(k, r, sigma, i, Piece::Full).unwrap();
        let local = k_sigma(k, r, sigma, i, Piece::Local).unwrap();
        let global = k_sigma(k, r, sigma, i, Piece::Global).unwrap();
        let best = local.value.max(global.value);
        assert!((full.value - best).abs() <= 1e-6 * best, "r = {r}");
    }
}

#[test]
fn scan_density_does_not_move_the_supremum() {
    let k = h3();
    let coarse = k_sigma(k, 2.0, 0.0, 1, Piece::Full).unwrap();
    let fine = k_sigma_with(
        k,
        2.0,
        0.0,
        1,
        Piece::Full,
        &ScanOptions {
            points_per_decade: 128,
            t_max: None,
        },
    )
    .unwrap();
    assert!((coarse.value - fine.value).abs() <= 1e-2 * fine.value);
}

#[test]
fn h3_global_maximiser_matches_calculus() {
    // For n = 3, i = 0: maximise −(1/4 − σ)t − r²/4t − (3/2)ln t.
    let (r, sigma): (f64, f64) = (10.0, 0.15);
    let a = 0.25 - sigma;
    let t_exact = (-1.5 + (2.25 + 4.0 * a * r * r / 4.0).sqrt()) / (2.0 * a);
    let e = k_sigma(h3(), r, sigma, 0, Piece::Global).unwrap();
    assert!((e.t_star - t_exact).abs() < 1e-4 * t_exact);
    assert!(!e.divergent);
}

#[test]
fn local_piece_diverges_near_origin() {
    let e = k_sigma(h3(), 0.0, 0.0, 0, Piece::Local).unwrap();
    assert!(e.divergent && e.value.is_infinite());
    let e = k_sigma(h3(), 0.5, 0.0, 0, Piece::Local).unwrap();
    assert!(!e.divergent);
}

#[test]
fn global_piece_diverges_past_bottom_of_spectrum() {
    let e = k_sigma(h3(), 2.0, 0.3, 0, Piece::Global).unwrap();
    assert!(e.divergent);
}

#[test]
fn global_piece_decreasing_and_interior() {
    let k = h3();
    let sigma = 0.15;
    let mut prev = f64::INFINITY;
    for r in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let e = k_sigma(k, r, sigma, 0, Piece::Global).unwrap();
        assert!(e.value <= prev);
        assert!(e.t_star < t_max_for(r));
        prev = e.value;
    }
}

#[test]
fn lemma_bound_dominates_up_to_constant() {
    let k = h3();
    let params = *k.params();
    let sigma = 0.1;
    let ratios: Vec<f64> = [1.0, 4.0, 8.0, 16.0, 24.0]
        .iter()
        .map(|&r| k_sigma(k, r, sigma, 0, Piece::Global).unwrap().value / global_lemma_bound(&params, r, sigma, 0.05).unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn lemma_probe_brackets_threshold() {
    let k = h3();
    for p in [4.0 / 3.0, 1.5, 2.0] {
        let s = sigma_threshold(1.0, p).unwrap();
        let below = lp_integral(k, p, 0.8 * s, 0, Integrand::LemmaBound { eps: 1e-3 }).unwrap();
        let above = lp_integral(k, p, 1.25 * s, 0, Integrand::LemmaBound { eps: 1e-3 }).unwrap();
        assert_eq!(below.flag, GrowthFlag::Convergent, "p = {p}");
        assert_eq!(above.flag, GrowthFlag::Divergent, "p = {p}");
        assert_eq!(below.flag, below.analytic_flag);
        assert_eq!(above.flag, above.analytic_flag);
    }
}

#[test]
fn dual_exponent_gives_same_report() {
    let k = h3();
    let s = 0.1;
    let a = lp_integral(k, 4.0, s, 0, Integrand::LemmaBound { eps: 1e-3 }).unwrap();
    let b = lp_integral(k, 4.0 / 3.0, s, 0, Integrand::LemmaBound { eps: 1e-3 }).unwrap();
    assert_eq!(a.flag, b.flag);
    assert!((a.increment_ratio - b.increment_ratio).abs() < 1e-12);
}

#[test]
fn invalid_arguments_rejected() {
    assert!(k_sigma(h3(), 1.0, -0.1, 0, Piece::Full).is_err());
    assert!(lp_integral(h3(), 1.0, 0.1, 0, Integrand::Oracle).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn threshold_symmetric_under_duality(q in 0.5f64..10.0, p in 1.01f64..10.0) {
        let dual = p / (p - 1.0);
        let a = sigma_threshold(q, p).unwrap();
        let b = sigma_threshold(q, dual).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!(a <= q * q / 4.0 + 1e-12);
    }

    #[test]
    fn sharp_exponent_sign_matches_threshold(q in 0.5f64..10.0, p in 1.05f64..2.0, f in 0.05f64..0.95) {
        let s = sigma_threshold(q, p).unwrap();
        prop_assert_eq!(analytic_flag(q, p, f * s, 0.0), GrowthFlag::Convergent);
        let above = s + f * (q * q / 4.0 - s);
        if above > s * (1.0 + 1e-9) {
            prop_assert_eq!(analytic_flag(q, p, above, 0.0), GrowthFlag::Divergent);
        }
    }

    #[test]
    fn lemma_bound_monotone(r in 0.0f64..40.0, dr in 0.01f64..5.0, sigma in 0.0f64..0.2) {
        let params = SpaceParams::new(2, 1).unwrap();
        let a = global_lemma_bound(&params, r, sigma, 0.01).unwrap();
        let b = global_lemma_bound(&params, r + dr, sigma, 0.01).unwrap();
        prop_assert!(b < a && a <= 1.0);
    }
}

#[test]
fn report_serialises_expected_fields() {
    let rep = lp_integral(h3(), 2.0, 0.2, 0, Integrand::LemmaBound { eps: 1e-3 }).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    for key in ["p", "sigma", "threshold", "flag", "partial_values", "t_star_profile"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["flag"], "CONVERGENT");
    assert_eq!(v["integrand"]["kind"], "lemma-bound");
}
