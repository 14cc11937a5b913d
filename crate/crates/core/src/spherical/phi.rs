//! Elementary spherical functions from the radial eigenvalue ODE
//! `φ'' + (A'/A) φ' + (λ² + Q²/4) φ = 0`, `φ(0) = 1`.
//!
//! A power series clears the regular singular point at `r = 0`; beyond
//! `r₀` the scaled function `ψ = e^{Qr/2} φ` is integrated, which stays
//! bounded for real `λ` and keeps the error control relative.

use crate::error::{Error, Result};
use crate::group::SpaceParams;
use crate::ode::{integrate_to, OdeOptions};
use num_complex::Complex64;
use serde::Serialize;

/// Radius where the series start hands over to the stepper.
pub const SERIES_RADIUS: f64 = 1e-3;

/// Values of `φ_λ` and `φ'_λ` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalEval {
    #[serde(skip)]
    pub lambda: Complex64,
    pub r_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

/// Eigenvalue `λ² + Q²/4` of `-Δ` for a real or purely imaginary `λ`.
pub fn eigenvalue(params: &SpaceParams, lambda: Complex64) -> Result<f64> {
    let l2 = lambda * lambda;
    if l2.im.abs() > 1e-12 * l2.norm().max(1.0) {
        return Err(Error::InvalidArgument {
            name: "lambda",
            value: lambda.im,
            reason: "spectral parameter must be real or purely imaginary",
        });
    }
    Ok(l2.re + 0.25 * params.q * params.q)
}

/// `(φ, φ')` at `r <= r₀` from the series `1 + a₂r² + a₄r⁴`.
pub fn series_start(params: &SpaceParams, e: f64, r: f64) -> [f64; 2] {
    let n = params.n as f64;
    let d1 = (params.m + params.k) as f64 / 12.0 + params.k as f64 / 4.0;
    let a2 = -e / (2.0 * n);
    let a4 = -a2 * (2.0 * d1 + e) / (4.0 * (n + 2.0));
    let r2 = r * r;
    [1.0 + r2 * (a2 + a4 * r2), r * (2.0 * a2 + 4.0 * a4 * r2)]
}

/// Solver tolerances for [`phi_lambda_with`].
#[derive(Debug, Clone, Copy)]
pub struct PhiOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for PhiOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-14 }
    }
}

/// `φ_λ` and `φ'_λ` on `r_grid` with default tolerances.
pub fn phi_lambda(params: &SpaceParams, lambda: Complex64, r_grid: &[f64]) -> Result<SphericalEval> {
    phi_lambda_with(params, lambda, r_grid, &PhiOptions::default())
}

pub fn phi_lambda_with(
    params: &SpaceParams,
    lambda: Complex64,
    r_grid: &[f64],
    opts: &PhiOptions,
) -> Result<SphericalEval> {
    if r_grid.windows(2).any(|w| w[1] < w[0]) || r_grid.first().is_some_and(|&r| r < 0.0) {
        return Err(Error::InvalidArgument {
            name: "r_grid",
            value: r_grid.first().copied().unwrap_or(f64::NAN),
            reason: "must be non-negative and non-decreasing",
        });
    }
    let e = eigenvalue(params, lambda)?;
    let psi = scaled_solution(params, e, r_grid, opts)?;
    let half_q = 0.5 * params.q;
    let (mut phi, mut dphi) = (Vec::with_capacity(r_grid.len()), Vec::with_capacity(r_grid.len()));
    for (&r, s) in r_grid.iter().zip(&psi) {
        let damp = (-half_q * r).exp();
        phi.push(damp * s[0]);
        dphi.push(damp * (s[1] - half_q * s[0]));
    }
    Ok(SphericalEval {
        lambda,
        r_grid: r_grid.to_vec(),
        phi,
        dphi,
    })
}

/// `(ψ, ψ')` with `ψ = e^{Qr/2} φ` at each grid point, for eigenvalue `e`.
pub(crate) fn scaled_solution(params: &SpaceParams, e: f64, r_grid: &[f64], opts: &PhiOptions) -> Result<Vec<[f64; 2]>> {
    let q = params.q;
    let half_q = 0.5 * q;
    let to_scaled = |r: f64, [p, dp]: [f64; 2]| {
        let g = (half_q * r).exp();
        [g * p, g * (dp + half_q * p)]
    };
    let mut out = Vec::with_capacity(r_grid.len());
    let split = r_grid.partition_point(|&r| r <= SERIES_RADIUS);
    for &r in &r_grid[..split] {
        out.push(to_scaled(r, series_start(params, e, r)));
    }
    if split == r_grid.len() {
        return Ok(out);
    }
    let r0 = SERIES_RADIUS;
    let y0 = to_scaled(r0, series_start(params, e, r0));
    let lambda2 = e - 0.25 * q * q;
    let omega = (lambda2.abs() + 0.25 * q * q).sqrt();
    let mut ode = OdeOptions::new(opts.rtol, opts.atol);
    ode.weight = [1.0, omega.max(1e-3)];
    ode.h_init = 1e-4;
    let shift = lambda2 + 0.5 * q * q;
    let rhs = |r: f64, y: &[f64; 2]| {
        let d = params.volume_log_derivative(r);
        [y[1], -(d - q) * y[1] - (shift - 0.5 * d * q) * y[0]]
    };
    out.extend(integrate_to(rhs, r0, y0, &r_grid[split..], &ode)?);
    Ok(out)
}
