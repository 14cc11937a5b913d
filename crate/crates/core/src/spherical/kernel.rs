//! Heat kernel `h_t(r)` and its time derivatives by inverse spherical transform.
//!
//! `h_t(r) = C ∫₀^∞ e^{−(λ²+Q²/4)t} φ_λ(r) |c(λ)|^{−2} dλ`, with
//! `∂_t^i` bringing down `(−(λ²+Q²/4))^i` and `∂_r` replacing `φ` by `φ'`.
//!
//! Near the origin the integral is taken along the real axis with `φ_λ` from
//! the ODE. Away from it, the integrand `φ_λ|c|^{−2} = Φ_λ/c(−λ) + Φ_{−λ}/c(λ)`
//! is folded onto the line `Im λ = r/2t`, where the Gaussian and the
//! oscillation of `Φ_λ` combine into a non-oscillating factor
//! `e^{−x²t − r²/4t}`; on the real axis the same integral suffers
//! cancellation of order `e^{r²/4t}`.
//!
//! `C` is calibrated once by unit mass at `t = 1`.

use super::cfunction::{harish_chandra_sums, ln_c_function};
use super::phi::{scaled_solution, PhiOptions};
use crate::error::{Error, Result};
use crate::group::{radial_integral_to_infinity, SpaceParams};
use crate::quadrature::{integrate_vec, QuadOptions};
use num_complex::Complex64;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::PI;

/// Highest time-derivative order carried by [`HeatKernel::jet`].
pub const MAX_ORDER: usize = 4;

/// Time at which the normalisation is fixed by unit mass.
pub const CALIBRATION_TIME: f64 = 1.0;

const VALUE_RTOL: f64 = 1e-10;
const TAIL_RTOL: f64 = 1e-10;

/// Which oracle produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Oracle {
    Inversion,
    Pde,
    ExactH3,
}

impl Oracle {
    pub fn as_str(self) -> &'static str {
        match self {
            Oracle::Inversion => "inversion",
            Oracle::Pde => "pde",
            Oracle::ExactH3 => "exact-h3",
        }
    }
}

/// Integration path in the spectral variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralPath {
    RealAxis,
    Shifted,
}

/// Quadrature provenance of an inversion value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadMeta {
    pub lambda_max: f64,
    pub nodes: usize,
    pub est_error: f64,
    pub tail_bound: f64,
    pub path: SpectralPath,
}

/// One value of `∂_t^i h_t(r)` with provenance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelEval {
    pub t: f64,
    pub r: f64,
    pub i: usize,
    pub value: f64,
    pub oracle: Oracle,
    pub quad_meta: Option<QuadMeta>,
}

impl KernelEval {
    pub const CSV_HEADER: &'static str = "t,r,i,value,oracle,est_error";

    pub fn csv_row(&self) -> String {
        let err = self.quad_meta.map_or(0.0, |q| q.est_error + q.tail_bound);
        format!(
            "{:.16e},{:.16e},{},{:.16e},{},{:.16e}",
            self.t,
            self.r,
            self.i,
            self.value,
            self.oracle.as_str(),
            err
        )
    }
}

/// `∂_t^i h_t(r)` for `i = 0..=MAX_ORDER` and `∂_r h_t(r)` from one quadrature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelJet {
    pub t: f64,
    pub r: f64,
    pub max_order: usize,
    pub time_derivatives: [f64; MAX_ORDER + 1],
    pub radial_derivative: f64,
    /// Error estimates matching `time_derivatives` then `radial_derivative`.
    pub errors: [f64; MAX_ORDER + 2],
    pub meta: QuadMeta,
}

/// Outcome of the unit-mass calibration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Calibration {
    pub reference_time: f64,
    pub constant: f64,
    pub analytic_constant: f64,
    pub relative_gap: f64,
}

/// Inversion oracle for one space.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    params: SpaceParams,
    calibration: Calibration,
}

/// `2^{2β}/(π ω_{n−1})`, the normalisation the calibration should reproduce.
pub fn analytic_constant(params: &SpaceParams) -> f64 {
    (2.0 * params.jacobi_beta * std::f64::consts::LN_2).exp() / (PI * params.sphere_constant())
}

impl HeatKernel {
    /// Builds the oracle and calibrates `C` by unit mass at `t = 1`.
    pub fn new(params: SpaceParams) -> Result<Self> {
        let mut kernel = Self {
            params,
            calibration: Calibration {
                reference_time: CALIBRATION_TIME,
                constant: 1.0,
                analytic_constant: analytic_constant(&params),
                relative_gap: f64::NAN,
            },
        };
        let raw_mass = kernel.mass(CALIBRATION_TIME)?;
        let c = 1.0 / raw_mass;
        kernel.calibration.constant = c;
        kernel.calibration.relative_gap = (c - kernel.calibration.analytic_constant).abs() / kernel.calibration.analytic_constant;
        Ok(kernel)
    }

    /// Oracle with a prescribed constant, skipping calibration.
    pub fn with_constant(params: SpaceParams, constant: f64) -> Self {
        Self {
            params,
            calibration: Calibration {
                reference_time: f64::NAN,
                constant,
                analytic_constant: analytic_constant(&params),
                relative_gap: (constant - analytic_constant(&params)).abs() / analytic_constant(&params),
            },
        }
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    /// `ω_{n−1} ∫₀^∞ h_t(r) A(r) dr`.
    pub fn mass(&self, t: f64) -> Result<f64> {
        let q = self.params.q;
        // The mass sits around r ≈ Qt with Gaussian spread √t.
        let step = (q * t + 6.0 * t.sqrt()).max(2.0) / 4.0;
        let failure = RefCell::new(None);
        let res = radial_integral_to_infinity(
            &self.params,
            |r| match self.jet(t, r, 0) {
                Ok(j) => j.time_derivatives[0],
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            step,
            1e-13,
            &QuadOptions::with_rtol(1e-11),
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(self.params.sphere_constant() * res?.value[0])
    }

    /// `∂_t^i h_t(r)`.
    pub fn eval(&self, t: f64, r: f64, i: usize) -> Result<KernelEval> {
        if i > MAX_ORDER {
            return Err(Error::InvalidArgument {
                name: "i",
                value: i as f64,
                reason: "derivative order above the supported maximum",
            });
        }
        let jet = self.jet(t, r, i)?;
        Ok(KernelEval {
            t,
            r,
            i,
            value: jet.time_derivatives[i],
            oracle: Oracle::Inversion,
            quad_meta: Some(QuadMeta {
                est_error: jet.errors[i],
                ..jet.meta
            }),
        })
    }

    /// `∂_r h_t(r)`, which is `−|∇h_t|` for the radial kernel.
    pub fn gradient(&self, t: f64, r: f64) -> Result<f64> {
        Ok(self.jet(t, r, 0)?.radial_derivative)
    }

    /// All time derivatives up to `max_order` and the radial derivative.
    pub fn jet(&self, t: f64, r: f64, max_order: usize) -> Result<KernelJet> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument {
                name: "t",
                value: t,
                reason: "time must be positive and finite",
            });
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument {
                name: "r",
                value: r,
                reason: "radius must be non-negative and finite",
            });
        }
        let max_order = max_order.min(MAX_ORDER);
        let q = self.params.q;
        let lambda_max = 0.5 * q + (12.0 + 2.0 * max_order as f64) / t.sqrt();
        let shifted = r >= 0.5 || (r >= 0.1 && r * r / (4.0 * t) > 10.0);
        // Values that underflow to subnormals are reported as converged.
        let opts = QuadOptions {
            rtol: VALUE_RTOL,
            atol: 1e-300,
            ..QuadOptions::default()
        };
        let mut failure: Option<Error> = None;
        let res = if shifted {
            let y = r / (2.0 * t);
            integrate_vec(
                |x| match self.shifted_integrand(t, r, Complex64::new(x, y), max_order) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        [0.0; MAX_ORDER + 2]
                    }
                },
                0.0,
                lambda_max,
                &opts,
            )
        } else {
            integrate_vec(
                |x| match self.real_integrand(t, r, x, max_order) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        [0.0; MAX_ORDER + 2]
                    }
                },
                0.0,
                lambda_max,
                &opts,
            )
        };
        if let Some(e) = failure {
            return Err(e);
        }
        if !res.converged {
            return Err(Error::QuadratureNonConvergent {
                context: "heat kernel inversion",
                error: res.error.iter().cloned().fold(0.0, f64::max),
                tolerance: VALUE_RTOL,
            });
        }
        // Tail beyond λ_max: |g(X)|·∫_X^∞ e^{−(x²−X²)t} dx ≤ |g(X)| / (2Xt).
        let edge = if shifted {
            self.shifted_integrand(t, r, Complex64::new(lambda_max, r / (2.0 * t)), max_order)?
        } else {
            self.real_integrand(t, r, lambda_max, max_order)?
        };
        let tail_factor = 1.0 / (2.0 * lambda_max * t);
        let mut tail_bound: f64 = 0.0;
        for j in 0..MAX_ORDER + 2 {
            let tail = edge[j].abs() * tail_factor;
            tail_bound = tail_bound.max(tail);
            if tail > TAIL_RTOL * res.abs_integral[j] && tail > 1e-300 {
                return Err(Error::TailTooLarge {
                    tail,
                    scale: res.abs_integral[j],
                });
            }
        }
        let c = self.calibration.constant;
        let mut time_derivatives = [0.0; MAX_ORDER + 1];
        let mut errors = [0.0; MAX_ORDER + 2];
        for j in 0..=MAX_ORDER {
            time_derivatives[j] = c * res.value[j];
            errors[j] = c * res.error[j];
        }
        errors[MAX_ORDER + 1] = c * res.error[MAX_ORDER + 1];
        Ok(KernelJet {
            t,
            r,
            max_order,
            time_derivatives,
            radial_derivative: c * res.value[MAX_ORDER + 1],
            errors,
            meta: QuadMeta {
                lambda_max,
                nodes: res.evaluations,
                est_error: errors.iter().cloned().fold(0.0, f64::max),
                tail_bound: c * tail_bound,
                path: if shifted { SpectralPath::Shifted } else { SpectralPath::RealAxis },
            },
        })
    }

    fn real_integrand(&self, t: f64, r: f64, x: f64, max_order: usize) -> Result<[f64; MAX_ORDER + 2]> {
        let mut out = [0.0; MAX_ORDER + 2];
        if x <= 0.0 {
            return Ok(out);
        }
        let q = self.params.q;
        let e = x * x + 0.25 * q * q;
        let density = (-2.0 * ln_c_function(&self.params, Complex64::new(x, 0.0)).re).exp();
        let (phi, dphi) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            let s = scaled_solution(&self.params, e, &[r], &PhiOptions { rtol: 1e-12, atol: 1e-15 })?[0];
            let damp = (-0.5 * q * r).exp();
            (damp * s[0], damp * (s[1] - 0.5 * q * s[0]))
        };
        let g = (-e * t).exp() * density;
        let mut power = 1.0;
        for slot in out.iter_mut().take(max_order + 1) {
            *slot = g * power * phi;
            power *= -e;
        }
        out[MAX_ORDER + 1] = g * dphi;
        Ok(out)
    }

    fn shifted_integrand(&self, t: f64, r: f64, lambda: Complex64, max_order: usize) -> Result<[f64; MAX_ORDER + 2]> {
        let q = self.params.q;
        let e = lambda * lambda + 0.25 * q * q;
        let kappa = Complex64::new(0.0, 1.0) * lambda - 0.5 * q;
        let sums = harish_chandra_sums(&self.params, lambda, r)?;
        let base = (-e * t + kappa * r - ln_c_function(&self.params, -lambda)).exp();
        let mut out = [0.0; MAX_ORDER + 2];
        let mut power = Complex64::new(2.0, 0.0);
        let val = base * sums.value;
        for slot in out.iter_mut().take(max_order + 1) {
            *slot = (val * power).re;
            power *= -e;
        }
        out[MAX_ORDER + 1] = 2.0 * (base * sums.derivative).re;
        Ok(out)
    }
}

/// One-shot `∂_t^i h_t(r)`. Builds and calibrates a kernel per call; reuse a
/// [`HeatKernel`] for repeated evaluation.
pub fn heat_kernel(params: &SpaceParams, t: f64, r: f64, i: usize) -> Result<KernelEval> {
    HeatKernel::new(*params)?.eval(t, r, i)
}

/// One-shot `∂_r h_t(r)`.
pub fn gradient_kernel(params: &SpaceParams, t: f64, r: f64) -> Result<f64> {
    HeatKernel::new(*params)?.gradient(t, r)
}

/// Closed-form heat kernel of real hyperbolic 3-space with `A(r) = 4 sinh²(r/2)`:
/// `(4πt)^{−3/2} · (r/2)/sinh(r/2) · e^{−t/4 − r²/4t}`.
pub fn exact_h3(t: f64, r: f64) -> f64 {
    let shape = if r < 1e-8 { 1.0 - r * r / 24.0 } else { (0.5 * r) / (0.5 * r).sinh() };
    (4.0 * PI * t).powf(-1.5) * shape * (-t / 4.0 - r * r / (4.0 * t)).exp()
}

/// [`exact_h3`] tagged as a [`KernelEval`].
pub fn exact_h3_eval(t: f64, r: f64) -> KernelEval {
    KernelEval {
        t,
        r,
        i: 0,
        value: exact_h3(t, r),
        oracle: Oracle::ExactH3,
        quad_meta: None,
    }
}
