//! Gamma-function machinery for real and complex arguments.
//!
//! `ln_gamma` uses the Lanczos approximation (g = 7, nine coefficients) for
//! `Re z >= 1/2` and upward recurrence below that, so arguments on or near the
//! imaginary axis never go through the reflection formula.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-ish branch of `ln Γ(z)` for `Re z >= 0`.
///
/// The imaginary part is only defined modulo `2π`; every caller exponentiates.
/// Returns `+∞` at the pole `z = 0`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        if z.norm() == 0.0 {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        // Γ(z) = Γ(z + 1) / z
        return ln_gamma(z + 1.0) - z.ln();
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}

/// `Γ(x)` for real `x > 0`.
pub fn gamma_real(x: f64) -> f64 {
    ln_gamma_real(x).exp()
}

/// Surface area of the unit sphere `S^{d-1} ⊂ R^d`.
pub fn unit_sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma_real(h)
}
