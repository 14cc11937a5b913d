#![allow(dead_code)]

use drheat_core::group::{radial_integral_to_infinity, SpaceParams};
use drheat_core::quadrature::QuadOptions;
use drheat_core::spherical::kernel::HeatKernel;
use drheat_core::spherical::phi::{eigenvalue, phi_lambda_with, PhiOptions, SERIES_RADIUS};
use num_complex::Complex64;

/// Largest scaled residual of `φ'' + Dφ' + Eφ` on `[r₀, r_max]`, with `φ''`
/// from a five-point stencil on the solver's `φ'`. The residual is measured
/// in the variable `e^{Qr/2}φ`.
pub fn max_eigen_residual(params: &SpaceParams, lambda: Complex64, r_max: f64) -> f64 {
    let h = 1e-3;
    let e = eigenvalue(params, lambda).unwrap();
    let opts = PhiOptions { rtol: 1e-13, atol: 1e-300 };
    let lo = SERIES_RADIUS + 3.0 * h;
    let mut worst: f64 = 0.0;
    for j in 0..=300 {
        let r = lo + (r_max - lo) * j as f64 / 300.0;
        let pts: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|s| r + s * h).collect();
        let ev = phi_lambda_with(params, lambda, &pts, &opts).unwrap();
        let d = &ev.dphi;
        let d2 = (d[0] - 8.0 * d[1] + 8.0 * d[3] - d[4]) / (12.0 * h);
        let res = d2 + params.volume_log_derivative(r) * d[2] + e * ev.phi[2];
        let g = (0.5 * params.q * r).exp();
        worst = worst.max(res.abs() * g / (1.0 + ev.phi[2].abs() * g));
    }
    worst
}

/// `ω ∫ h_t² A dr`, which equals `h_{2t}(0)`.
pub fn semigroup_square(kernel: &HeatKernel, t: f64) -> f64 {
    let params = kernel.params();
    let step = (params.q * t + 6.0 * t.sqrt()).max(2.0) / 4.0;
    let res = radial_integral_to_infinity(
        params,
        |r| kernel.eval(t, r, 0).unwrap().value.powi(2),
        step,
        1e-13,
        &QuadOptions::with_rtol(1e-10),
    )
    .unwrap();
    params.sphere_constant() * res.value[0]
}

/// `(min, max)` of a slice.
pub fn band(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// `(lo, hi)` grid of `n` points, linear.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

/// `(lo, hi)` grid of `n` points, logarithmic.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}
