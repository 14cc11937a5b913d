//! Dormand–Prince 5(4) integrator with step-size control.
//!
//! The stepper lands exactly on every requested output abscissa, so callers
//! get values at their own grid without dense-output interpolation.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Tolerances of the stepper.
///
/// The error of component `i` is measured against
/// `atol + rtol · weight[i] · max_j(|y_j| / weight[j])`, i.e. against a shared
/// amplitude. This keeps oscillating components from forcing tiny steps at
/// their zero crossings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<const N: usize> {
    pub rtol: f64,
    pub atol: f64,
    pub weight: [f64; N],
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl<const N: usize> OdeOptions<N> {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            weight: [1.0; N],
            h_init: 1e-3,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `(x0, y0)` and returns the state at every
/// abscissa in `outputs` (which must be non-decreasing and `>= x0`).
pub fn integrate_to<const N: usize, F>(
    mut f: F,
    x0: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: &OdeOptions<N>,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut x = x0;
    let mut y = y0;
    let mut h = opts.h_init;
    let mut k1 = f(x, &y);
    let mut out = Vec::with_capacity(outputs.len());
    let mut steps = 0usize;

    for &target in outputs {
        debug_assert!(target >= x);
        while target - x > 1e-14 * target.abs().max(1.0) {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeUnderflow { r: x, h });
            }
            let mut hs = h.min(opts.h_max);
            let last = hs >= target - x;
            if last {
                hs = target - x;
            }

            let k2 = f(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
            let k3 = f(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + hs,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(x + hs, &y_new);

            let amp = (0..N)
                .map(|i| y[i].abs().max(y_new[i].abs()) / opts.weight[i])
                .fold(0.0, f64::max);
            let mut err = 0.0;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * opts.weight[i] * amp;
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();

            if !err.is_finite() {
                h = hs * 0.1;
            } else if err <= 1.0 {
                x = if last { target } else { x + hs };
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // Do not let a short final step to an output shrink the next one.
                h = if last { h.max(hs * fac) } else { hs * fac };
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
            if h < 1e-14 * x.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { r: x, h });
            }
        }
        out.push(y);
    }
    Ok(out)
}
