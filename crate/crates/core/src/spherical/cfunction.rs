//! Harish-Chandra `c`-function, Plancherel density and the
//! Harish-Chandra expansion `Φ_λ(r) = e^{(iλ − Q/2)r} Σ Γ_j e^{−jr}`.
//!
//! For real `λ ≠ 0`, `φ_λ = c(λ)Φ_λ + c(−λ)Φ_{−λ}` and the Plancherel
//! density is `|c(λ)|^{−2}`. The density has two routes: the Gamma-function
//! formula, and a least-squares fit of the large-`r` oscillation of the ODE
//! solution.

use super::phi::{eigenvalue, scaled_solution, PhiOptions};
use crate::error::{Error, Result};
use crate::group::SpaceParams;
use crate::special::ln_gamma;
use num_complex::Complex64;
use serde::Serialize;

/// `ln c(λ)` for `c(λ) = 2^{ρ−iμ}Γ(α+1)Γ(iμ) / [Γ((iμ+ρ)/2)Γ((iμ+α−β+1)/2)]`, `μ = 2λ`.
///
/// Valid for `Im λ <= 0`'s mirror image too as long as no Gamma argument
/// hits a pole; the imaginary part is only defined modulo `2π`.
pub fn ln_c_function(params: &SpaceParams, lambda: Complex64) -> Complex64 {
    let (al, be) = (params.jacobi_alpha, params.jacobi_beta);
    let rho = params.rho();
    let imu = Complex64::new(0.0, 2.0) * lambda;
    (rho - imu) * std::f64::consts::LN_2 + ln_gamma(Complex64::new(al + 1.0, 0.0)) + ln_gamma(imu)
        - ln_gamma(0.5 * (imu + rho))
        - ln_gamma(0.5 * (imu + al - be + 1.0))
}

pub fn c_function(params: &SpaceParams, lambda: Complex64) -> Complex64 {
    ln_c_function(params, lambda).exp()
}

/// `|c(λ)|^{−2}` from the Gamma formula.
pub fn plancherel_density(params: &SpaceParams, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument {
            name: "lambda",
            value: lambda,
            reason: "Plancherel density is evaluated at positive λ",
        });
    }
    Ok((-2.0 * ln_c_function(params, Complex64::new(lambda, 0.0)).re).exp())
}

/// Start of the fitting window for [`fit_c_function`].
pub const FIT_RADIUS: f64 = 28.0;

/// `c(λ)` recovered from `ψ(r) = e^{Qr/2}φ_λ(r) ≈ a cos λr + b sin λr` on a
/// window past [`FIT_RADIUS`], where corrections are `O(e^{−r})`.
pub fn fit_c_function(params: &SpaceParams, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument {
            name: "lambda",
            value: lambda,
            reason: "asymptotic fit needs positive λ",
        });
    }
    let period = 2.0 * std::f64::consts::PI / lambda;
    let width = (2.0 * period).max(4.0);
    let samples = 96;
    let grid: Vec<f64> = (0..samples)
        .map(|j| FIT_RADIUS + width * j as f64 / (samples - 1) as f64)
        .collect();
    let e = eigenvalue(params, Complex64::new(lambda, 0.0))?;
    let psi = scaled_solution(params, e, &grid, &PhiOptions { rtol: 1e-12, atol: 1e-15 })?;
    let (mut scc, mut scs, mut sss, mut syc, mut sys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (r, y) in grid.iter().zip(&psi) {
        let (s, c) = (lambda * r).sin_cos();
        scc += c * c;
        scs += c * s;
        sss += s * s;
        syc += y[0] * c;
        sys += y[0] * s;
    }
    let det = scc * sss - scs * scs;
    let a = (syc * sss - sys * scs) / det;
    let b = (sys * scc - syc * scs) / det;
    Ok(Complex64::new(0.5 * a, -0.5 * b))
}

/// `|c(λ)|^{−2}` from the asymptotic fit.
pub fn plancherel_density_fit(params: &SpaceParams, lambda: f64) -> Result<f64> {
    Ok(fit_c_function(params, lambda)?.norm_sqr().recip())
}

/// Both density routes and their relative gap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PlancherelCheck {
    pub lambda: f64,
    pub analytic: f64,
    pub fitted: f64,
    pub relative_gap: f64,
}

/// Evaluates both routes and fails if they differ by more than `rtol`.
pub fn plancherel_density_checked(params: &SpaceParams, lambda: f64, rtol: f64) -> Result<PlancherelCheck> {
    let analytic = plancherel_density(params, lambda)?;
    let fitted = plancherel_density_fit(params, lambda)?;
    let relative_gap = (analytic - fitted).abs() / analytic;
    if !(relative_gap <= rtol) {
        return Err(Error::RouteDisagreement {
            context: "plancherel density",
            a: analytic,
            b: fitted,
            gap: relative_gap,
        });
    }
    Ok(PlancherelCheck {
        lambda,
        analytic,
        fitted,
        relative_gap,
    })
}

/// Partial sums of the Harish-Chandra expansion at a fixed `(λ, r)`.
#[derive(Debug, Clone, Copy)]
pub struct HcSums {
    /// `Σ Γ_j e^{−jr}`.
    pub value: Complex64,
    /// `Σ Γ_j (κ − j) e^{−jr}` with `κ = iλ − Q/2`, so `Φ' = e^{κr}·derivative`.
    pub derivative: Complex64,
    pub terms: usize,
}

const HC_MAX_TERMS: usize = 20_000;
const HC_REL_TOL: f64 = 1e-17;

/// Coefficient sums for `Φ_λ(r)`; requires `r > 0` and `2iλ` off the
/// positive integers.
pub fn harish_chandra_sums(params: &SpaceParams, lambda: Complex64, r: f64) -> Result<HcSums> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument {
            name: "r",
            value: r,
            reason: "Harish-Chandra expansion needs r > 0",
        });
    }
    let mk = (params.m + params.k) as f64;
    let kz = params.k as f64;
    let q = params.q;
    let imu = Complex64::new(0.0, 2.0) * lambda;
    let kappa = Complex64::new(0.0, 1.0) * lambda - 0.5 * q;
    let decay = (-r).exp();

    let mut gamma = Complex64::new(1.0, 0.0);
    let nu0 = imu - q;
    let mut p = nu0 * gamma;
    let mut rr = nu0 * gamma;
    let mut value = gamma;
    let mut derivative = gamma * kappa;
    let mut weight = 1.0;
    let mut quiet = 0;
    for j in 1..HC_MAX_TERMS {
        let jf = j as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        gamma = -(2.0 * mk * p + 2.0 * kz * sign * rr) / (4.0 * jf * (jf - imu));
        let nu = imu - q - 2.0 * jf;
        p += nu * gamma;
        rr += sign * nu * gamma;
        weight *= decay;
        let term = gamma * weight;
        value += term;
        derivative += term * (kappa - jf);
        if term.norm() * (1.0 + (kappa - jf).norm()) <= HC_REL_TOL * value.norm().max(derivative.norm()) {
            quiet += 1;
            if quiet >= 4 {
                return Ok(HcSums {
                    value,
                    derivative,
                    terms: j + 1,
                });
            }
        } else {
            quiet = 0;
        }
        if weight == 0.0 {
            return Ok(HcSums {
                value,
                derivative,
                terms: j + 1,
            });
        }
    }
    Err(Error::SeriesNonConvergent {
        context: "Harish-Chandra expansion",
        terms: HC_MAX_TERMS,
    })
}

/// `(Φ_λ(r), Φ'_λ(r))`.
pub fn harish_chandra_phi(params: &SpaceParams, lambda: Complex64, r: f64) -> Result<(Complex64, Complex64)> {
    let s = harish_chandra_sums(params, lambda, r)?;
    let kappa = Complex64::new(0.0, 1.0) * lambda - 0.5 * params.q;
    let g = (kappa * r).exp();
    Ok((g * s.value, g * s.derivative))
}
