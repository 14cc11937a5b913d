//! σ-maximal kernels and the `L^p` integrability probe.
//!
//! `k_σ(r) = sup_{t>0} e^{σt} t^i |∂_t^i h_t(r)|`, split at `t = 1` into a
//! local and a global piece. The probe integrates the global piece against
//! the growth `e^{Qr/p}` of the spherical function `φ_{i(1/p−1/2)Q}` and
//! classifies convergence from successive increments.

use crate::error::{Error, Result};
use crate::group::SpaceParams;
use crate::quadrature::{integrate, QuadOptions};
use crate::spherical::kernel::HeatKernel;
use serde::Serialize;

/// Smallest time in the local scan.
pub const T_MIN: f64 = 1e-3;
/// Scan density in points per decade of `t`.
pub const POINTS_PER_DECADE: usize = 64;

/// Which part of the time axis the supremum is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Piece {
    /// `t ∈ [T_MIN, T_max]`.
    Full,
    /// `t ∈ [T_MIN, 1)`.
    Local,
    /// `t ∈ [1, T_max]`.
    Global,
}

/// One value of a σ-maximal kernel.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MaximalKernelEval {
    pub r: f64,
    pub sigma: f64,
    pub i: usize,
    pub value: f64,
    pub t_star: f64,
    pub piece: Piece,
    /// The maximiser sits on a boundary where the supremum escapes
    /// (`t → 0` for the local piece, `t = T_max` for the global one).
    pub divergent: bool,
}

/// `T_max = max(50, 10r)`.
pub fn t_max_for(r: f64) -> f64 {
    50f64.max(10.0 * r)
}

/// Options for [`k_sigma_with`].
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub points_per_decade: usize,
    pub t_max: Option<f64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            points_per_decade: POINTS_PER_DECADE,
            t_max: None,
        }
    }
}

/// `sup e^{σt} t^i |∂_t^i h_t(r)|` over the chosen piece.
pub fn k_sigma(kernel: &HeatKernel, r: f64, sigma: f64, i: usize, piece: Piece) -> Result<MaximalKernelEval> {
    k_sigma_with(kernel, r, sigma, i, piece, &ScanOptions::default())
}

pub fn k_sigma_with(
    kernel: &HeatKernel,
    r: f64,
    sigma: f64,
    i: usize,
    piece: Piece,
    opts: &ScanOptions,
) -> Result<MaximalKernelEval> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument {
            name: "sigma",
            value: sigma,
            reason: "must be finite and non-negative",
        });
    }
    let t_max = opts.t_max.unwrap_or_else(|| t_max_for(r));
    let (lo, hi) = match piece {
        Piece::Full => (T_MIN, t_max),
        Piece::Local => (T_MIN, 1.0),
        Piece::Global => (1.0, t_max),
    };
    // log of e^{σt} t^i |∂_t^i h_t(r)|
    let objective = |log_t: f64| -> Result<f64> {
        let t = log_t.exp();
        let v = kernel.eval(t, r, i)?.value.abs();
        Ok(sigma * t + i as f64 * log_t + v.ln())
    };
    let (a, b) = (lo.ln(), hi.ln());
    let decades = (hi / lo).log10();
    let n = ((decades * opts.points_per_decade as f64).ceil() as usize).max(2);
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        values.push(objective(a + (b - a) * j as f64 / n as f64)?);
    }
    let best = values
        .iter()
        .enumerate()
        .fold(0, |acc, (j, v)| if *v > values[acc] { j } else { acc });
    let step = (b - a) / n as f64;
    let (mut x_star, mut f_star) = (a + step * best as f64, values[best]);
    if best > 0 && best < n {
        // Golden-section search on the bracketing cells.
        let (mut x0, mut x3) = (x_star - step, x_star + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = x3 - g * (x3 - x0);
        let mut x2 = x0 + g * (x3 - x0);
        let mut f1 = objective(x1)?;
        let mut f2 = objective(x2)?;
        while x3 - x0 > 1e-7 {
            if f1 >= f2 {
                x3 = x2;
                x2 = x1;
                f2 = f1;
                x1 = x3 - g * (x3 - x0);
                f1 = objective(x1)?;
            } else {
                x0 = x1;
                x1 = x2;
                f1 = f2;
                x2 = x0 + g * (x3 - x0);
                f2 = objective(x2)?;
            }
        }
        let (xb, fb) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        if fb > f_star {
            x_star = xb;
            f_star = fb;
        }
    }
    // Past the bottom of the spectrum e^{σt} beats the e^{−Q²t/4} decay, so
    // the supremum over t → ∞ is infinite whatever the finite scan shows.
    let past_spectrum = sigma > 0.25 * kernel.params().q.powi(2);
    let divergent = match piece {
        Piece::Full => best == 0 || best == n || past_spectrum,
        Piece::Local => best == 0,
        Piece::Global => best == n || past_spectrum,
    };
    Ok(MaximalKernelEval {
        r,
        sigma,
        i,
        value: if divergent { f64::INFINITY } else { f_star.exp() },
        t_star: x_star.exp(),
        piece,
        divergent,
    })
}

/// `e^{−(1−ε)Qr/2} e^{−(1−ε) r √(Q²/4 − σ/(1−ε))}`.
pub fn global_lemma_bound(params: &SpaceParams, r: f64, sigma: f64, eps: f64) -> Result<f64> {
    let q = params.q;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument {
            name: "eps",
            value: eps,
            reason: "must lie in (0, 1)",
        });
    }
    let inner = q * q / 4.0 - sigma / (1.0 - eps);
    if !(inner >= 0.0) {
        return Err(Error::InvalidArgument {
            name: "sigma",
            value: sigma,
            reason: "need sigma <= (1 - eps) Q^2/4",
        });
    }
    Ok((-(1.0 - eps) * r * (0.5 * q + inner.sqrt())).exp())
}

/// Shape of `φ_{i(1/p−1/2)Q}(r)`: `e^{−Qr/p'}` for `1 <= p < 2` and
/// `(1 + r)e^{−Qr/2}` at `p = 2`.
pub fn spherical_asymptote(params: &SpaceParams, p: f64, r: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidArgument {
            name: "p",
            value: p,
            reason: "must lie in [1, 2]",
        });
    }
    let q = params.q;
    if p == 2.0 {
        Ok((1.0 + r) * (-0.5 * q * r).exp())
    } else {
        Ok((-(q * r) * (1.0 - 1.0 / p)).exp())
    }
}

/// `Q²/(pp')` with `1/p + 1/p' = 1`.
pub fn sigma_threshold(q: f64, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument {
            name: "p",
            value: p,
            reason: "must lie in (1, ∞)",
        });
    }
    Ok(q * q * (1.0 / p) * (1.0 - 1.0 / p))
}

/// Exponent of the large-`r` integrand `e^{Qr/p}·(global bound)`:
/// `Q/p − (1−ε)Q/2 − (1−ε)√(Q²/4 − σ/(1−ε))`, or `None` when the root is
/// imaginary (the global supremum itself diverges). `ε = 0` gives the sharp
/// exponent.
pub fn sigma_exponent(q: f64, p: f64, sigma: f64, eps: f64) -> Option<f64> {
    let p = if p > 2.0 { p / (p - 1.0) } else { p };
    let inner = q * q / 4.0 - sigma / (1.0 - eps);
    if inner < 0.0 {
        return None;
    }
    Some(q / p - (1.0 - eps) * 0.5 * q - (1.0 - eps) * inner.sqrt())
}

/// Growth classification of a truncated integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GrowthFlag {
    Convergent,
    Divergent,
    Indeterminate,
}

/// Analytic classification from [`sigma_exponent`].
pub fn analytic_flag(q: f64, p: f64, sigma: f64, eps: f64) -> GrowthFlag {
    match sigma_exponent(q, p, sigma, eps) {
        None => GrowthFlag::Divergent,
        Some(e) if e < 0.0 => GrowthFlag::Convergent,
        Some(e) if e > 0.0 => GrowthFlag::Divergent,
        Some(_) => GrowthFlag::Indeterminate,
    }
}

/// What stands in for `k_σ^∞` in the probe.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Integrand {
    /// The maximised oracle.
    Oracle,
    /// The global-piece bound with the given `ε`.
    LemmaBound { eps: f64 },
}

/// Radii at which partial integrals are recorded.
pub const PARTIAL_RADII: [f64; 3] = [10.0, 20.0, 40.0];

/// Report of [`lp_integral`].
#[derive(Debug, Clone, Serialize)]
pub struct LpReport {
    pub p: f64,
    pub sigma: f64,
    pub i: usize,
    pub threshold: f64,
    pub integrand: Integrand,
    pub flag: GrowthFlag,
    pub analytic_flag: GrowthFlag,
    pub local_part: f64,
    pub partial_values: Vec<(f64, f64)>,
    pub increment_ratio: f64,
    /// Maximising times of the oracle at sample radii; empty for the bound.
    pub t_star_profile: Vec<(f64, f64)>,
}

fn classify(ratio: f64) -> GrowthFlag {
    if ratio < 0.9 {
        GrowthFlag::Convergent
    } else if ratio > 1.1 {
        GrowthFlag::Divergent
    } else {
        GrowthFlag::Indeterminate
    }
}

/// `∫₀¹ r^{n−1}k(r) dr + ∫₁^{R} w_p(r) k(r) dr` with `w_p = e^{Qr/p}`
/// (times `1 + r` at `p = 2`), at `R ∈ {10, 20, 40}`. `p > 2` is mapped to
/// its dual exponent.
pub fn lp_integral(kernel: &HeatKernel, p: f64, sigma: f64, i: usize, integrand: Integrand) -> Result<LpReport> {
    let params = *kernel.params();
    let q = params.q;
    let threshold = sigma_threshold(q, p)?;
    let p = if p > 2.0 { p / (p - 1.0) } else { p };
    let eps_analytic = match integrand {
        Integrand::Oracle => 0.0,
        Integrand::LemmaBound { eps } => eps,
    };
    let analytic = analytic_flag(q, p, sigma, eps_analytic);
    let divergent_report = |profile: Vec<(f64, f64)>| LpReport {
        p,
        sigma,
        i,
        threshold,
        integrand,
        flag: GrowthFlag::Divergent,
        analytic_flag: analytic,
        local_part: f64::INFINITY,
        partial_values: PARTIAL_RADII.iter().map(|&r| (r, f64::INFINITY)).collect(),
        increment_ratio: f64::INFINITY,
        t_star_profile: profile,
    };

    let k = |r: f64| -> Result<Option<MaximalKernelEval>> {
        match integrand {
            Integrand::Oracle => {
                let e = k_sigma(kernel, r, sigma, i, Piece::Global)?;
                Ok(if e.divergent { None } else { Some(e) })
            }
            Integrand::LemmaBound { eps } => match global_lemma_bound(&params, r, sigma, eps) {
                Ok(v) => Ok(Some(MaximalKernelEval {
                    r,
                    sigma,
                    i,
                    value: v,
                    t_star: f64::NAN,
                    piece: Piece::Global,
                    divergent: false,
                })),
                Err(_) => Ok(None),
            },
        }
    };

    // A divergent supremum at any radius makes the integral infinite.
    let mut profile = Vec::new();
    for r in [1.0, 5.0, 10.0, 20.0, 30.0, 40.0] {
        match k(r)? {
            Some(e) if e.t_star.is_finite() => profile.push((r, e.t_star)),
            Some(_) => {}
            None => {
                profile.push((r, f64::INFINITY));
                return Ok(divergent_report(profile));
            }
        }
    }

    let weight = |r: f64| {
        let w = (q * r / p).exp();
        if p == 2.0 {
            (1.0 + r) * w
        } else {
            w
        }
    };
    let opts = QuadOptions::with_rtol(1e-6);
    let mut failure = None;
    let mut eval = |r: f64, w: f64| match k(r) {
        Ok(Some(e)) => w * e.value,
        Ok(None) => {
            failure.get_or_insert(Error::Divergent(format!("k_sigma diverges at r = {r}")));
            0.0
        }
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let n1 = params.n as i32 - 1;
    let local_part = integrate(|r| eval(r, r.powi(n1)), 0.0, 1.0, &opts).value[0];
    let mut partial_values = Vec::new();
    let mut acc = local_part;
    let mut lo = 1.0;
    for &hi in &PARTIAL_RADII {
        acc += integrate(|r| eval(r, weight(r)), lo, hi, &opts).value[0];
        partial_values.push((hi, acc));
        lo = hi;
    }
    if let Some(e) = failure {
        return match e {
            Error::Divergent(_) => Ok(divergent_report(profile)),
            other => Err(other),
        };
    }
    let inc1 = partial_values[1].1 - partial_values[0].1;
    let inc2 = partial_values[2].1 - partial_values[1].1;
    let increment_ratio = inc2 / inc1;
    Ok(LpReport {
        p,
        sigma,
        i,
        threshold,
        integrand,
        flag: classify(increment_ratio),
        analytic_flag: analytic,
        local_part,
        partial_values,
        increment_ratio,
        t_star_profile: profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_values() {
        assert_eq!(sigma_threshold(1.0, 2.0).unwrap(), 0.25);
        let a = sigma_threshold(2.0, 4.0 / 3.0).unwrap();
        let b = sigma_threshold(2.0, 4.0).unwrap();
        assert!((a - b).abs() < 1e-15 && (a - 3.0 * 4.0 / 16.0).abs() < 1e-15);
        assert!(sigma_threshold(1.0, 1.0).is_err());
    }

    #[test]
    fn lemma_bound_values() {
        let p = SpaceParams::new(2, 0).unwrap();
        let b = global_lemma_bound(&p, 3.0, 0.0, 0.2).unwrap();
        assert!((b - (-0.8f64 * 3.0).exp()).abs() < 1e-15);
        let b = global_lemma_bound(&p, 4.0, 3.0 / 16.0, 0.25).unwrap();
        assert!((b - (-1.5f64).exp()).abs() < 1e-15);
        assert!(global_lemma_bound(&p, 1.0, 0.3, 0.1).is_err());
    }

    #[test]
    fn asymptote_endpoints() {
        let p = SpaceParams::new(2, 1).unwrap();
        assert_eq!(spherical_asymptote(&p, 1.0, 7.0).unwrap(), 1.0);
        assert_eq!(spherical_asymptote(&p, 2.0, 0.0).unwrap(), 1.0);
        assert!(spherical_asymptote(&p, 2.5, 1.0).is_err());
    }

    #[test]
    fn analytic_sign_brackets_threshold() {
        for p in [4.0 / 3.0, 1.5, 2.0, 4.0] {
            let s = sigma_threshold(1.0, p).unwrap();
            assert_eq!(analytic_flag(1.0, p, 0.8 * s, 0.0), GrowthFlag::Convergent);
            assert_eq!(analytic_flag(1.0, p, 1.25 * s, 0.0), GrowthFlag::Divergent);
        }
    }
}
