//! The solvable group `S = N ⋊ R⁺` in coordinates `(X, Z, a)`.
//!
//! Group law, inverse, the Cayley map onto the unit ball, the left-invariant
//! distance, Haar measure and polar volume. Haar integrals can be estimated
//! by Monte Carlo and compared with radial quadrature against `A(r)`.

use crate::algebra::{min_module_dim, HTypeAlgebra};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions, QuadResult};
use crate::special::unit_sphere_area;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::Serialize;

/// Constants derived from `(m, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceParams {
    pub m: usize,
    pub k: usize,
    /// Manifold dimension `m + k + 1`.
    pub n: usize,
    /// Homogeneous dimension `m/2 + k`.
    pub q: f64,
    pub jacobi_alpha: f64,
    pub jacobi_beta: f64,
}

impl SpaceParams {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        let d = min_module_dim(k);
        if m == 0 || !m.is_multiple_of(d) {
            return Err(Error::InfeasibleDimensions { m, k, min_m: d });
        }
        Ok(Self {
            m,
            k,
            n: m + k + 1,
            q: m as f64 / 2.0 + k as f64,
            jacobi_alpha: (m + k) as f64 / 2.0 - 0.5,
            jacobi_beta: k as f64 / 2.0 - 0.5,
        })
    }

    pub fn from_algebra(alg: &HTypeAlgebra) -> Self {
        Self::new(alg.m(), alg.k()).expect("algebra dimensions are feasible")
    }

    /// `ρ = α + β + 1`, which equals `Q`.
    pub fn rho(&self) -> f64 {
        self.jacobi_alpha + self.jacobi_beta + 1.0
    }

    /// Area of the unit sphere in `R^n`, the angular factor in polar coordinates.
    pub fn sphere_constant(&self) -> f64 {
        unit_sphere_area(self.n)
    }

    /// `log A(r)`; `-∞` at `r = 0`.
    pub fn log_volume_density(&self, r: f64) -> f64 {
        let mk = (self.m + self.k) as f64;
        let h = 0.5 * r;
        // log sinh h computed without overflow for large h.
        let log_sinh = if h > 20.0 {
            h - std::f64::consts::LN_2 + (-(-(2.0 * h)).exp()).ln_1p()
        } else {
            h.sinh().ln()
        };
        let log_cosh = h + (-(2.0 * h)).exp().ln_1p() - std::f64::consts::LN_2;
        mk * std::f64::consts::LN_2 + mk * log_sinh + self.k as f64 * log_cosh
    }

    /// `A(r) = 2^{m+k} sinh^{m+k}(r/2) cosh^k(r/2)`.
    pub fn volume_density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.log_volume_density(r).exp()
    }

    /// `A'(r)/A(r) = (m+k)/2 · coth(r/2) + k/2 · tanh(r/2)`.
    pub fn volume_log_derivative(&self, r: f64) -> f64 {
        let h = 0.5 * r;
        0.5 * (self.m + self.k) as f64 / h.tanh() + 0.5 * self.k as f64 * h.tanh()
    }

    /// Haar density `a^{-Q-1}` against `dX dZ da`.
    pub fn haar_density(&self, a: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument {
                name: "a",
                value: a,
                reason: "must be positive",
            });
        }
        Ok(a.powf(-self.q - 1.0))
    }
}

/// A point `(X, Z, a)` of `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub a: f64,
}

impl GroupElement {
    pub fn new(x: DVector<f64>, z: DVector<f64>, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument {
                name: "a",
                value: a,
                reason: "must be a finite positive number",
            });
        }
        Ok(Self { x, z, a })
    }

    pub fn identity(alg: &HTypeAlgebra) -> Self {
        Self {
            x: DVector::zeros(alg.m()),
            z: DVector::zeros(alg.k()),
            a: 1.0,
        }
    }

    fn check(&self, alg: &HTypeAlgebra, context: &'static str) -> Result<()> {
        if self.x.len() != alg.m() {
            return Err(Error::DimensionMismatch {
                context,
                expected: alg.m(),
                found: self.x.len(),
            });
        }
        if self.z.len() != alg.k() {
            return Err(Error::DimensionMismatch {
                context,
                expected: alg.k(),
                found: self.z.len(),
            });
        }
        Ok(())
    }

    /// Largest coordinate difference, used by tests of the group axioms.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let dx = (&self.x - &other.x).amax();
        let dz = if self.z.is_empty() { 0.0 } else { (&self.z - &other.z).amax() };
        dx.max(dz).max((self.a - other.a).abs())
    }
}

/// A point `(X', Z', l')` of the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    pub xp: DVector<f64>,
    pub zp: DVector<f64>,
    pub lp: f64,
}

impl BallPoint {
    pub fn norm_squared(&self) -> f64 {
        self.xp.norm_squared() + self.zp.norm_squared() + self.lp * self.lp
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

/// `(X, Z, a)(X', Z', a') = (X + a^{1/2}X', Z + aZ' + ½a^{1/2}[X, X'], aa')`.
pub fn multiply(alg: &HTypeAlgebra, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    g.check(alg, "multiply")?;
    h.check(alg, "multiply")?;
    let sa = g.a.sqrt();
    let x = &g.x + &h.x * sa;
    let z = &g.z + &h.z * g.a + alg.bracket_unchecked(&g.x, &h.x) * (0.5 * sa);
    Ok(GroupElement { x, z, a: g.a * h.a })
}

/// `(X, Z, a)^{-1} = (-a^{-1/2}X, -a^{-1}Z, a^{-1})`.
pub fn inverse(alg: &HTypeAlgebra, g: &GroupElement) -> Result<GroupElement> {
    g.check(alg, "inverse")?;
    Ok(GroupElement {
        x: &g.x * (-1.0 / g.a.sqrt()),
        z: &g.z * (-1.0 / g.a),
        a: 1.0 / g.a,
    })
}

/// Cayley map onto the unit ball.
///
/// With `s = a + |X|²/4` and `Dn = (1 + s)² + |Z|²`:
/// `X' = ((1 + s) − J_Z)X / Dn`, `Z' = 2Z / Dn`, `l' = (s² − 1 + |Z|²) / Dn`,
/// which gives `1 − ‖x'‖² = 4a / Dn`.
pub fn cayley(alg: &HTypeAlgebra, g: &GroupElement) -> Result<BallPoint> {
    g.check(alg, "cayley")?;
    let s = g.a + 0.25 * g.x.norm_squared();
    let z2 = g.z.norm_squared();
    let dn = (1.0 + s) * (1.0 + s) + z2;
    let jx = alg.j_map_unchecked(&g.z, &g.x);
    let xp = (&g.x * (1.0 + s) - jx) / dn;
    let zp = &g.z * (2.0 / dn);
    let lp = ((s - 1.0) * (s + 1.0) + z2) / dn;
    Ok(BallPoint { xp, zp, lp })
}

/// `d(e, g) = log((1 + ρ)/(1 − ρ))` with `ρ = ‖cayley(g)‖`.
pub fn distance_to_origin(alg: &HTypeAlgebra, g: &GroupElement) -> Result<f64> {
    let rho = cayley(alg, g)?.norm();
    Ok(2.0 * rho.min(1.0).atanh())
}

/// Left-invariant distance `d(g, h) = d(e, g^{-1}h)`.
pub fn distance(alg: &HTypeAlgebra, g: &GroupElement, h: &GroupElement) -> Result<f64> {
    let gi = inverse(alg, g)?;
    distance_to_origin(alg, &multiply(alg, &gi, h)?)
}

/// `∫₀^{r_max} f(r) A(r) dr` by adaptive Gauss–Kronrod.
pub fn radial_integral<F>(params: &SpaceParams, f: F, r_max: f64, opts: &QuadOptions) -> Result<QuadResult<1>>
where
    F: Fn(f64) -> f64,
{
    if !(r_max >= 0.0) {
        return Err(Error::InvalidArgument {
            name: "r_max",
            value: r_max,
            reason: "must be non-negative",
        });
    }
    let res = integrate(|r| f(r) * params.volume_density(r), 0.0, r_max, opts);
    if !res.converged {
        return Err(Error::QuadratureNonConvergent {
            context: "radial_integral",
            error: res.error[0],
            tolerance: opts.rtol * res.value[0].abs(),
        });
    }
    Ok(res)
}

/// `∫₀^∞ f(r) A(r) dr`, extended in chunks of width `step` until a chunk adds
/// less than `tail_rtol` of the accumulated value.
pub fn radial_integral_to_infinity<F>(
    params: &SpaceParams,
    f: F,
    step: f64,
    tail_rtol: f64,
    opts: &QuadOptions,
) -> Result<QuadResult<1>>
where
    F: Fn(f64) -> f64,
{
    let mut total = QuadResult {
        value: [0.0],
        error: [0.0],
        abs_integral: [0.0],
        evaluations: 0,
        intervals: 0,
        converged: true,
    };
    for chunk in 0..10_000 {
        let a = chunk as f64 * step;
        let piece = integrate(|r| f(r) * params.volume_density(r), a, a + step, opts);
        if !piece.converged {
            return Err(Error::QuadratureNonConvergent {
                context: "radial_integral_to_infinity",
                error: piece.error[0],
                tolerance: opts.rtol * piece.value[0].abs(),
            });
        }
        total.value[0] += piece.value[0];
        total.error[0] += piece.error[0];
        total.abs_integral[0] += piece.abs_integral[0];
        total.evaluations += piece.evaluations;
        total.intervals += piece.intervals;
        if chunk >= 1 && piece.abs_integral[0] <= tail_rtol * total.value[0].abs() {
            return Ok(total);
        }
    }
    Err(Error::QuadratureNonConvergent {
        context: "radial_integral_to_infinity",
        error: f64::INFINITY,
        tolerance: tail_rtol,
    })
}

/// Monte Carlo estimate of a Haar integral.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Sampling plan for [`haar_monte_carlo`].
///
/// Points are drawn as `X = a^{1/2}ξ`, `Z = aζ`, `a = e^s` with `ξ, ζ`
/// centred Gaussians of standard deviation `scale` and `s` uniform on
/// `[-log_a_max, log_a_max]`. In `(ξ, ζ, s)` Haar measure is Lebesgue
/// measure, so the importance weight is the reciprocal sampling density.
/// Since `|log a| ≤ d(e, (X, Z, a))`, `log_a_max` equal to the support
/// radius of the integrand covers its support.
#[derive(Debug, Clone, Copy)]
pub struct HaarSampler {
    pub log_a_max: f64,
    pub scale: f64,
    pub samples: usize,
    pub seed: u64,
}

const MC_CHUNK: usize = 8192;

/// Monte Carlo estimate of `∫_S f dλ`, split into independently seeded
/// chunks that are reduced in order.
pub fn haar_monte_carlo<F>(alg: &HTypeAlgebra, f: F, plan: &HaarSampler) -> Result<MonteCarloEstimate>
where
    F: Fn(&GroupElement) -> f64 + Sync,
{
    if !(plan.log_a_max > 0.0) || !(plan.scale > 0.0) || plan.samples < 2 {
        return Err(Error::InvalidArgument {
            name: "haar sampler",
            value: plan.samples as f64,
            reason: "need log_a_max > 0, scale > 0 and at least two samples",
        });
    }
    let (m, k) = (alg.m(), alg.k());
    let dim = (m + k) as f64;
    let log_norm = dim * (plan.scale.ln() + 0.5 * (2.0 * std::f64::consts::PI).ln()) + (2.0 * plan.log_a_max).ln();
    let chunks = plan.samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(plan.seed);
            rng.set_stream(c as u64);
            let uni = Uniform::new_inclusive(-plan.log_a_max, plan.log_a_max).expect("valid range");
            let count = MC_CHUNK.min(plan.samples - c * MC_CHUNK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let xi = DVector::from_fn(m, |_, _| {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    v * plan.scale
                });
                let zeta = DVector::from_fn(k, |_, _| {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    v * plan.scale
                });
                let s = uni.sample(&mut rng);
                let a = s.exp();
                let q2 = (xi.norm_squared() + zeta.norm_squared()) / (plan.scale * plan.scale);
                let g = GroupElement {
                    x: xi * a.sqrt(),
                    z: zeta * a,
                    a,
                };
                let w = (0.5 * q2 + log_norm).exp();
                let v = f(&g) * w;
                s1 += v;
                s2 += v * v;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let n = plan.samples as f64;
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples: plan.samples,
        seed: plan.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_htype;
    use std::f64::consts::E;

    fn elem(x: &[f64], z: &[f64], a: f64) -> GroupElement {
        GroupElement::new(DVector::from_column_slice(x), DVector::from_column_slice(z), a).unwrap()
    }

    #[test]
    fn derived_constants() {
        let p = SpaceParams::new(2, 0).unwrap();
        assert_eq!((p.n, p.q, p.jacobi_alpha, p.jacobi_beta), (3, 1.0, 0.5, -0.5));
        let p = SpaceParams::new(8, 3).unwrap();
        assert_eq!(p.n, 12);
        assert_eq!(p.q, 7.0);
        assert_eq!(p.rho(), p.q);
        assert!(SpaceParams::new(2, 3).is_err());
    }

    #[test]
    fn volume_density_values() {
        let p = SpaceParams::new(2, 0).unwrap();
        assert_eq!(p.volume_density(0.0), 0.0);
        for r in [0.1f64, 1.0, 3.0, 45.0] {
            let exact = 4.0 * (0.5 * r).sinh().powi(2);
            assert!((p.volume_density(r) / exact - 1.0).abs() < 1e-13, "r = {r}");
        }
        let p = SpaceParams::new(4, 3).unwrap();
        assert!((p.log_volume_density(50.0) / 50.0 / p.q - 1.0).abs() < 0.01);
        assert!(p.volume_density(2000.0).is_infinite() || p.log_volume_density(2000.0).is_finite());
    }

    #[test]
    fn log_derivative_matches_finite_difference() {
        let p = SpaceParams::new(4, 1).unwrap();
        for r in [0.3, 1.0, 7.0] {
            let h = 1e-5;
            let fd = (p.log_volume_density(r + h) - p.log_volume_density(r - h)) / (2.0 * h);
            assert!((fd - p.volume_log_derivative(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn haar_density_values() {
        let p = SpaceParams::new(2, 0).unwrap();
        assert_eq!(p.haar_density(1.0).unwrap(), 1.0);
        assert!((p.haar_density(E).unwrap() - E.powi(-2)).abs() < 1e-15);
        assert!(p.haar_density(0.0).is_err());
    }

    #[test]
    fn inverse_of_axis_element() {
        let alg = build_htype(2, 1).unwrap();
        let g = elem(&[0.0, 0.0], &[3.0], 2.0);
        let gi = inverse(&alg, &g).unwrap();
        assert_eq!(gi, elem(&[0.0, 0.0], &[-1.5], 0.5));
        let e = GroupElement::identity(&alg);
        assert!(multiply(&alg, &g, &gi).unwrap().max_abs_diff(&e) < 1e-15);
    }

    #[test]
    fn cayley_of_identity_and_axis() {
        let alg = build_htype(4, 3).unwrap();
        let e = GroupElement::identity(&alg);
        assert_eq!(cayley(&alg, &e).unwrap().norm(), 0.0);
        assert_eq!(distance_to_origin(&alg, &e).unwrap(), 0.0);
        for a in [0.2, 0.5, 2.0, 7.0] {
            let g = elem(&[0.0; 4], &[0.0; 3], a);
            let b = cayley(&alg, &g).unwrap();
            assert!((b.lp - (a - 1.0) / (a + 1.0)).abs() < 1e-15);
            assert!((distance_to_origin(&alg, &g).unwrap() - a.ln().abs()).abs() < 1e-13);
        }
    }

    #[test]
    fn dimension_errors() {
        let alg = build_htype(2, 1).unwrap();
        let bad = elem(&[0.0; 3], &[0.0], 1.0);
        let e = GroupElement::identity(&alg);
        assert!(multiply(&alg, &bad, &e).is_err());
        assert!(cayley(&alg, &bad).is_err());
        assert!(GroupElement::new(DVector::zeros(2), DVector::zeros(1), -1.0).is_err());
    }

    #[test]
    fn radial_integral_indicator() {
        let p = SpaceParams::new(2, 0).unwrap();
        let r = radial_integral(&p, |_| 1.0, 1.0, &QuadOptions::with_rtol(1e-9)).unwrap();
        let exact = 2.0 * 1f64.sinh() - 2.0;
        assert!((r.value[0] - exact).abs() < 1e-12);
        let z = radial_integral(&p, |_| 0.0, 5.0, &QuadOptions::default()).unwrap();
        assert_eq!(z.value[0], 0.0);
    }

    #[test]
    fn radial_integral_to_infinity_gaussian() {
        let p = SpaceParams::new(2, 0).unwrap();
        // ∫ e^{-r²} 4 sinh²(r/2) dr = √π (e^{1/4} − 1) / 1 over [0, ∞).
        let r = radial_integral_to_infinity(&p, |r| (-r * r).exp(), 2.0, 1e-14, &QuadOptions::with_rtol(1e-11)).unwrap();
        let exact = std::f64::consts::PI.sqrt() * (0.25f64.exp() - 1.0);
        assert!((r.value[0] / exact - 1.0).abs() < 1e-10, "{} vs {}", r.value[0], exact);
    }
}
