//! Estimate machinery for time derivatives of the heat kernel.
//!
//! * the on-diagonal iterated-integral bound `1/√(f f_{2i})`;
//! * propagation of Gaussian-type exponents from `f` and `f''` to `f'`;
//! * the `(β, γ)` recurrence and its closed-form limits;
//! * an empirical-constant checker for the final derivative estimate.

use crate::error::{Error, Result};
use crate::group::SpaceParams;
use crate::quadrature::{integrate, QuadOptions};
use crate::spherical::kernel::{HeatKernel, KernelJet};
use rayon::prelude::*;
use serde::Serialize;

/// `λ_ε = (1 − ε)/(1 + ε)`.
pub fn lambda_eps(eps: f64) -> f64 {
    (1.0 - eps) / (1.0 + eps)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument {
            name: "eps",
            value: eps,
            reason: "must lie in (0, 1)",
        });
    }
    Ok(())
}

/// Exponents of `t^{−α}(1+t)^β(1+r)^γ e^{−Dt − Br − Cr²/4t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub d: f64,
    pub b: f64,
    pub c: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > self.beta && self.beta >= 0.0) {
            return Err(Error::HypothesisViolation("need alpha > beta >= 0"));
        }
        if !(self.d >= 0.0 && self.b >= 0.0 && self.c >= 0.0) {
            return Err(Error::HypothesisViolation("exponent coefficients D, B, C must be non-negative"));
        }
        Ok(())
    }

    /// The bound shape at `(t, r)`.
    pub fn shape(&self, t: f64, r: f64) -> f64 {
        self.log_shape(t, r).exp()
    }

    pub fn log_shape(&self, t: f64, r: f64) -> f64 {
        -self.alpha * t.ln() + self.beta * t.ln_1p() + self.gamma * r.ln_1p()
            - self.d * t
            - self.b * r
            - self.c * r * r / (4.0 * t)
    }
}

/// Exponents bounding `f'` given bounds `p` on `f` and `p_star` on `f''`
/// (the latter with `t`-power `α + 2`):
/// `(α + 1, β, γ, (D + D*)/2, (B + B*)/2, (C* + Cλ_ε)/2)`.
pub fn porper_propagate(p: &BoundParams, p_star: &BoundParams, eps: f64) -> Result<BoundParams> {
    check_eps(eps)?;
    p.validate()?;
    if !(p_star.d >= 0.0 && p_star.b >= 0.0 && p_star.c >= 0.0) {
        return Err(Error::HypothesisViolation("starred coefficients must be non-negative"));
    }
    if !(p.d >= p_star.d && p.b >= p_star.b && p.c >= p_star.c) {
        return Err(Error::HypothesisViolation("need D >= D*, B >= B*, C >= C*"));
    }
    Ok(BoundParams {
        alpha: p.alpha + 1.0,
        beta: p.beta,
        gamma: p.gamma,
        d: 0.5 * (p.d + p_star.d),
        b: 0.5 * (p.b + p_star.b),
        c: 0.5 * (p_star.c + p.c * lambda_eps(eps)),
    })
}

/// Rectangular `(t, r)` grid, logarithmic in `t` and uniform in `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub t_points: usize,
    pub r_points: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max >= self.t_min && self.r_min >= 0.0 && self.r_max >= self.r_min) {
            return Err(Error::InvalidArgument {
                name: "grid",
                value: self.t_min,
                reason: "need 0 < t_min <= t_max and 0 <= r_min <= r_max",
            });
        }
        if self.t_points == 0 || self.r_points == 0 {
            return Err(Error::InvalidArgument {
                name: "grid points",
                value: 0.0,
                reason: "grid must be non-empty",
            });
        }
        Ok(())
    }

    pub fn ts(&self) -> Vec<f64> {
        if self.t_points == 1 {
            return vec![self.t_min];
        }
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.t_points)
            .map(|j| (a + (b - a) * j as f64 / (self.t_points - 1) as f64).exp())
            .collect()
    }

    pub fn rs(&self) -> Vec<f64> {
        if self.r_points == 1 {
            return vec![self.r_min];
        }
        (0..self.r_points)
            .map(|j| self.r_min + (self.r_max - self.r_min) * j as f64 / (self.r_points - 1) as f64)
            .collect()
    }

    /// Halves both spacings, keeping the original nodes.
    pub fn refined(&self) -> Self {
        Self {
            t_points: 2 * self.t_points - 1,
            r_points: 2 * self.r_points - 1,
            ..*self
        }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let rs = self.rs();
        self.ts()
            .into_iter()
            .flat_map(|t| rs.iter().map(move |&r| (t, r)))
            .collect()
    }
}

/// Maximum of a ratio over a grid and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMax {
    pub value: f64,
    pub argmax_t: f64,
    pub argmax_r: f64,
}

fn grid_max(points: impl Iterator<Item = (f64, f64, f64)>) -> GridMax {
    let mut best = GridMax {
        value: f64::NEG_INFINITY,
        argmax_t: f64::NAN,
        argmax_r: f64::NAN,
    };
    for (t, r, v) in points {
        if v > best.value || v.is_nan() {
            best = GridMax {
                value: v,
                argmax_t: t,
                argmax_r: r,
            };
        }
    }
    best
}

/// Maximum of `ratio(t, r)` on a grid and on its refinement.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StableConstant {
    pub coarse: GridMax,
    pub refined: GridMax,
    pub relative_change: f64,
}

impl StableConstant {
    pub fn from_maxima(coarse: GridMax, refined: GridMax) -> Self {
        let relative_change = (refined.value - coarse.value).abs() / coarse.value.abs();
        Self {
            coarse,
            refined,
            relative_change,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coarse.value.is_finite() && self.refined.value.is_finite()
    }

    pub fn is_stable(&self, tol: f64) -> bool {
        self.is_finite() && self.relative_change < tol
    }
}

/// Relative change tolerated under 2× grid refinement.
pub const GRID_STABILITY_TOL: f64 = 0.05;

/// Finite-difference certificate of [`porper_propagate`] on the synthetic
/// `f_r(t) = t^{−α}(1+t)^β(1+r)^γ e^{−Dt − Br − Cr²/4t}`.
#[derive(Debug, Clone, Serialize)]
pub struct PorperCertificate {
    pub p: BoundParams,
    pub p_star: BoundParams,
    pub eps: f64,
    pub propagated: BoundParams,
    /// Constant in the second-derivative hypothesis.
    pub hypothesis_constant: StableConstant,
    /// Constant in the propagated first-derivative bound.
    pub constant: StableConstant,
}

impl PorperCertificate {
    pub fn passed(&self) -> bool {
        self.hypothesis_constant.is_stable(GRID_STABILITY_TOL) && self.constant.is_stable(GRID_STABILITY_TOL)
    }
}

/// Runs the certificate with central differences of step `1e−4·t`.
pub fn porper_certificate(p: &BoundParams, p_star: &BoundParams, eps: f64, grid: &GridSpec) -> Result<PorperCertificate> {
    grid.validate()?;
    let propagated = porper_propagate(p, p_star, eps)?;
    let hyp_shape = BoundParams {
        alpha: p.alpha + 2.0,
        beta: p.beta,
        gamma: p.gamma,
        ..*p_star
    };
    let f = |t: f64, r: f64| p.shape(t, r);
    let scan = |g: &GridSpec| {
        let pts = g.points();
        let d1 = grid_max(pts.iter().map(|&(t, r)| {
            let h = 1e-4 * t;
            let fd = (f(t + h, r) - f(t - h, r)) / (2.0 * h);
            (t, r, fd.abs() / propagated.shape(t, r))
        }));
        let d2 = grid_max(pts.iter().map(|&(t, r)| {
            let h = 1e-3 * t;
            let fd = (f(t + h, r) - 2.0 * f(t, r) + f(t - h, r)) / (h * h);
            (t, r, fd.abs() / hyp_shape.shape(t, r))
        }));
        (d1, d2)
    };
    let (c1, h1) = scan(grid);
    let (c2, h2) = scan(&grid.refined());
    Ok(PorperCertificate {
        p: *p,
        p_star: *p_star,
        eps,
        propagated,
        hypothesis_constant: StableConstant::from_maxima(h1, h2),
        constant: StableConstant::from_maxima(c1, c2),
    })
}

/// `β_ℓ^i`, `γ_ℓ^i` for `0 <= ℓ <= L`, `0 <= i <= I`.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceTable {
    pub epsilon: f64,
    pub lambda_eps: f64,
    pub levels: usize,
    pub orders: usize,
    /// Row `ℓ`, column `i`.
    pub beta_table: Vec<Vec<f64>>,
    pub gamma_table: Vec<Vec<f64>>,
}

/// Fills the table from `β_0^i = γ_0^i = 0 (i >= 1)`, `β_ℓ^0 = γ_ℓ^0 = 1`,
/// `β_ℓ^i = ½(β_{ℓ−1}^{i−1} + β_{ℓ−1}^{i+1})` and
/// `γ_ℓ^i = ½(λ_ε γ_{ℓ−1}^{i−1} + γ_{ℓ−1}^{i+1})`.
///
/// Row `ℓ` up to column `i` needs row `ℓ − 1` up to `i + 1`, so rows are
/// carried with width `I + L + 1`.
pub fn recurrence_table(eps: f64, levels: usize, orders: usize) -> Result<RecurrenceTable> {
    check_eps(eps)?;
    let lam = lambda_eps(eps);
    let width = orders + levels + 2;
    let mut beta = vec![0.0; width];
    let mut gamma = vec![0.0; width];
    beta[0] = 1.0;
    gamma[0] = 1.0;
    let mut beta_table = vec![beta[..=orders].to_vec()];
    let mut gamma_table = vec![gamma[..=orders].to_vec()];
    for level in 1..=levels {
        // Entries past column I + L − ℓ are never read again.
        let live = (orders + levels - level + 1).min(width - 1);
        let mut nb = vec![0.0; width];
        let mut ng = vec![0.0; width];
        nb[0] = 1.0;
        ng[0] = 1.0;
        for i in 1..=live {
            nb[i] = 0.5 * (beta[i - 1] + beta[i + 1]);
            ng[i] = 0.5 * (lam * gamma[i - 1] + gamma[i + 1]);
        }
        beta = nb;
        gamma = ng;
        beta_table.push(beta[..=orders].to_vec());
        gamma_table.push(gamma[..=orders].to_vec());
    }
    Ok(RecurrenceTable {
        epsilon: eps,
        lambda_eps: lam,
        levels,
        orders,
        beta_table,
        gamma_table,
    })
}

/// `lim_ℓ γ_ℓ^i = (1 − √(1 − λ_ε))^i`.
pub fn recurrence_limit(eps: f64, i: usize) -> Result<f64> {
    check_eps(eps)?;
    Ok((1.0 - (1.0 - lambda_eps(eps)).sqrt()).powi(i as i32))
}

/// `lim_ℓ β_ℓ^i = 1`.
pub fn beta_limit(_i: usize) -> f64 {
    1.0
}

/// Structural checks on a [`RecurrenceTable`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TableInvariants {
    pub within_unit_interval: bool,
    pub gamma_monotone: bool,
    pub beta_monotone: bool,
    pub boundary_conditions: bool,
    pub max_gamma_gap: f64,
    pub max_beta_gap: f64,
}

impl TableInvariants {
    pub fn structural_ok(&self) -> bool {
        self.within_unit_interval && self.gamma_monotone && self.beta_monotone && self.boundary_conditions
    }
}

impl RecurrenceTable {
    pub fn gamma(&self, level: usize, i: usize) -> f64 {
        self.gamma_table[level][i]
    }

    pub fn beta(&self, level: usize, i: usize) -> f64 {
        self.beta_table[level][i]
    }

    pub fn invariants(&self) -> TableInvariants {
        let all = |tab: &Vec<Vec<f64>>| tab.iter().flatten().all(|&v| (0.0..=1.0).contains(&v));
        let monotone = |tab: &Vec<Vec<f64>>| tab.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        let boundary = self.beta_table.iter().chain(&self.gamma_table).all(|row| row[0] == 1.0)
            && self.beta_table[0][1..].iter().chain(&self.gamma_table[0][1..]).all(|&v| v == 0.0);
        let last = self.levels;
        let mut max_gamma_gap: f64 = 0.0;
        let mut max_beta_gap: f64 = 0.0;
        for i in 0..=self.orders {
            let lim = (1.0 - (1.0 - self.lambda_eps).sqrt()).powi(i as i32);
            max_gamma_gap = max_gamma_gap.max((self.gamma(last, i) - lim).abs());
            max_beta_gap = max_beta_gap.max((self.beta(last, i) - 1.0).abs());
        }
        TableInvariants {
            within_unit_interval: all(&self.beta_table) && all(&self.gamma_table),
            gamma_monotone: monotone(&self.gamma_table),
            beta_monotone: monotone(&self.beta_table),
            boundary_conditions: boundary,
            max_gamma_gap,
            max_beta_gap,
        }
    }

    /// CSV with one row per level: `level, gamma_0..gamma_I, limit_0..limit_I`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level");
        for i in 0..=self.orders {
            out.push_str(&format!(",gamma_{i}"));
        }
        for i in 0..=self.orders {
            out.push_str(&format!(",limit_{i}"));
        }
        out.push('\n');
        let limits: Vec<f64> = (0..=self.orders)
            .map(|i| (1.0 - (1.0 - self.lambda_eps).sqrt()).powi(i as i32))
            .collect();
        for (level, row) in self.gamma_table.iter().enumerate() {
            out.push_str(&level.to_string());
            for v in row.iter().chain(&limits) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Two-sided shape `t^{−3/2}(1+r)(1+(1+r)/t)^{(n−3)/2} e^{−Q²t/4 − Qr/2 − r²/4t}`.
pub fn two_sided_shape(params: &SpaceParams, t: f64, r: f64) -> f64 {
    let (n, q) = (params.n as f64, params.q);
    (-1.5 * t.ln() + r.ln_1p() + 0.5 * (n - 3.0) * ((1.0 + r) / t).ln_1p() + gaussian_exponent(q, t, r)).exp()
}

/// Gradient shape `t^{−(n+2)/2}(1+t)^{(n−1)/2}(1+r)^{(n−1)/2} e^{−Q²t/4 − Qr/2 − r²/4t}`.
pub fn gradient_shape(params: &SpaceParams, t: f64, r: f64) -> f64 {
    let (n, q) = (params.n as f64, params.q);
    (-0.5 * (n + 2.0) * t.ln() + 0.5 * (n - 1.0) * (t.ln_1p() + r.ln_1p()) + gaussian_exponent(q, t, r)).exp()
}

fn gaussian_exponent(q: f64, t: f64, r: f64) -> f64 {
    -q * q * t / 4.0 - q * r / 2.0 - r * r / (4.0 * t)
}

/// Exponent `m' = (n − 3)/2` of `(1 + t)` in the on-diagonal bound.
pub fn grigoryan_exponent(params: &SpaceParams) -> f64 {
    (params.n as f64 - 3.0) / 2.0
}

/// `f(t) = t^{n/2}(1 + t)^{−m'}`.
pub fn grigoryan_f(params: &SpaceParams, t: f64) -> f64 {
    let n2 = params.n as f64 / 2.0;
    (n2 * t.ln() - grigoryan_exponent(params) * t.ln_1p()).exp()
}

/// `f_i(t)`, the `i`-fold iterated integral of `f` from 0, via
/// `f_i(t) = t^i/(i−1)! ∫₀¹ (1 − u)^{i−1} f(tu) du`.
pub fn grigoryan_fi(params: &SpaceParams, i: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument {
            name: "t",
            value: t,
            reason: "must be positive",
        });
    }
    if i == 0 {
        return Ok(grigoryan_f(params, t));
    }
    let k = (i - 1) as i32;
    let res = integrate(
        |u| (1.0 - u).powi(k) * grigoryan_f(params, t * u),
        0.0,
        1.0,
        &QuadOptions::with_rtol(1e-12),
    );
    if !res.converged {
        return Err(Error::QuadratureNonConvergent {
            context: "iterated integral",
            error: res.error[0],
            tolerance: 1e-12 * res.value[0].abs(),
        });
    }
    let log_fact: f64 = (1..i).map(|j| (j as f64).ln()).sum();
    Ok(res.value[0] * (i as f64 * t.ln() - log_fact).exp())
}

/// `f_i(t_j)` for `i = 0..=i_max`: row `i`, column `j`.
pub fn grigoryan_f_sequence(params: &SpaceParams, i_max: usize, t_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "t_grid",
            value: t_grid.first().copied().unwrap_or(f64::NAN),
            reason: "must be positive and strictly increasing",
        });
    }
    (0..=i_max)
        .map(|i| t_grid.iter().map(|&t| grigoryan_fi(params, i, t)).collect())
        .collect()
}

/// `t^{n/2+i}(1 + t)^{−m'}`, the constant-free lower bound for `f_i`.
pub fn fi_lower_bound(params: &SpaceParams, i: usize, t: f64) -> f64 {
    grigoryan_f(params, t) * t.powi(i as i32)
}

/// `t^{n/2+i}(1 + t)^{−m'} / Π_{j=1}^{i} (n/2 + j)`, which `f_i` always dominates.
pub fn fi_lower_bound_with_constant(params: &SpaceParams, i: usize, t: f64) -> f64 {
    let n2 = params.n as f64 / 2.0;
    let denom: f64 = (1..=i).map(|j| n2 + j as f64).product();
    fi_lower_bound(params, i, t) / denom
}

/// `1/√(f(t) f_{2i}(t))`.
pub fn grigoryan_bound(params: &SpaceParams, i: usize, t: f64) -> Result<f64> {
    let f = grigoryan_f(params, t);
    let f2i = grigoryan_fi(params, 2 * i, t)?;
    Ok(1.0 / (f * f2i).sqrt())
}

/// Oracle jets `∂_t^i h_t(r)` sampled on a grid.
#[derive(Debug, Clone)]
pub struct JetTable {
    pub grid: GridSpec,
    pub jets: Vec<KernelJet>,
}

impl JetTable {
    /// Samples the oracle at every grid node, in parallel, in grid order.
    pub fn sample(kernel: &HeatKernel, grid: &GridSpec, max_order: usize) -> Result<Self> {
        grid.validate()?;
        let jets = grid
            .points()
            .par_iter()
            .map(|&(t, r)| kernel.jet(t, r, max_order))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: *grid, jets })
    }

    /// Max over the grid of `|∂_t^i h| / shape(t, r)`.
    pub fn max_ratio(&self, i: usize, shape: impl Fn(f64, f64) -> f64) -> GridMax {
        grid_max(
            self.jets
                .iter()
                .map(|j| (j.t, j.r, j.time_derivatives[i].abs() / shape(j.t, j.r))),
        )
    }

    /// Max of `ratio(jet)` over the grid.
    pub fn max_of(&self, ratio: impl Fn(&KernelJet) -> f64) -> GridMax {
        grid_max(self.jets.iter().map(|j| (j.t, j.r, ratio(j))))
    }
}

/// `t^{−n/2−i} e^{−(1−ε)(Q²t/4 + Qr/2 + r²/4t)}`.
pub fn theorem1_shape(params: &SpaceParams, eps: f64, i: usize, t: f64, r: f64) -> f64 {
    let q = params.q;
    let expo = q * q * t / 4.0 + q * r / 2.0 + r * r / (4.0 * t);
    (-(params.n as f64 / 2.0 + i as f64) * t.ln() - (1.0 - eps) * expo).exp()
}

/// Serialisable outcome of [`theorem1_check`].
#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub epsilon: f64,
    pub i: usize,
    pub c_min: f64,
    pub argmax_t: f64,
    pub argmax_r: f64,
    pub grid_spec: GridSpec,
    pub refined_c_min: f64,
    pub relative_change: f64,
    pub passed: bool,
}

/// Empirical constant from precomputed coarse and refined jet tables.
pub fn theorem1_from_tables(params: &SpaceParams, eps: f64, i: usize, coarse: &JetTable, refined: &JetTable) -> Result<Theorem1Report> {
    check_eps(eps)?;
    if i > 3 {
        return Err(Error::InvalidArgument {
            name: "i",
            value: i as f64,
            reason: "derivative order must be at most 3",
        });
    }
    let shape = |t: f64, r: f64| theorem1_shape(params, eps, i, t, r);
    let s = StableConstant::from_maxima(coarse.max_ratio(i, shape), refined.max_ratio(i, shape));
    Ok(Theorem1Report {
        epsilon: eps,
        i,
        c_min: s.coarse.value,
        argmax_t: s.coarse.argmax_t,
        argmax_r: s.coarse.argmax_r,
        grid_spec: coarse.grid,
        refined_c_min: s.refined.value,
        relative_change: s.relative_change,
        passed: s.is_stable(GRID_STABILITY_TOL),
    })
}

/// Samples the oracle on `grid` and on its 2× refinement and reports the
/// empirical constant of the derivative estimate.
pub fn theorem1_check(kernel: &HeatKernel, eps: f64, i: usize, grid: &GridSpec) -> Result<Theorem1Report> {
    let coarse = JetTable::sample(kernel, grid, i)?;
    let refined = JetTable::sample(kernel, &grid.refined(), i)?;
    theorem1_from_tables(kernel.params(), eps, i, &coarse, &refined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(alpha: f64, beta: f64, gamma: f64, d: f64, b: f64, c: f64) -> BoundParams {
        BoundParams { alpha, beta, gamma, d, b, c }
    }

    #[test]
    fn propagation_examples() {
        let z = bp(2.0, 1.0, 1.0, 0.0, 0.0, 0.0);
        let out = porper_propagate(&z, &z, 0.3).unwrap();
        assert_eq!(out, bp(3.0, 1.0, 1.0, 0.0, 0.0, 0.0));
        let p = bp(2.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        let ps = bp(2.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let out = porper_propagate(&p, &ps, 1.0 / 3.0).unwrap();
        assert!((out.d - 0.5).abs() < 1e-15 && (out.b - 0.5).abs() < 1e-15 && (out.c - 0.25).abs() < 1e-15);
        assert!(porper_propagate(&ps, &p, 0.3).is_err());
        assert!(porper_propagate(&bp(1.0, 1.0, 0.0, 0.0, 0.0, 0.0), &z, 0.3).is_err());
        assert!(porper_propagate(&p, &ps, 1.0).is_err());
    }

    #[test]
    fn recurrence_first_entries() {
        let t = recurrence_table(1.0 / 3.0, 3, 2).unwrap();
        assert_eq!(t.beta(1, 1), 0.5);
        assert!((t.gamma(1, 1) - 0.25).abs() < 1e-15);
        assert_eq!(t.gamma(0, 1), 0.0);
        assert_eq!(t.gamma(3, 0), 1.0);
    }

    #[test]
    fn recurrence_converges_to_limit() {
        let t = recurrence_table(1.0 / 3.0, 200, 2).unwrap();
        assert!((t.gamma(50, 1) - (1.0 - 0.5f64.sqrt())).abs() <= 1e-6);
        assert!((t.gamma(200, 2) - recurrence_limit(1.0 / 3.0, 2).unwrap()).abs() <= 1e-8);
        assert!((recurrence_limit(1.0 / 3.0, 2).unwrap() - 0.085_786_437_626_904_95).abs() < 1e-15);
        assert_eq!(recurrence_limit(0.2, 0).unwrap(), 1.0);
        assert!((recurrence_limit(1e-12, 5).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn recurrence_csv_shape() {
        let t = recurrence_table(0.5, 4, 3).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0].split(',').count(), 1 + 2 * 4);
    }

    #[test]
    fn fi_exact_in_three_dimensions() {
        // n = 3: f = t^{3/2}, f_i = t^{3/2+i} / Π_{j=1}^{i} (3/2 + j).
        let p = SpaceParams::new(2, 0).unwrap();
        for i in 0..=6 {
            for t in [0.01, 1.0, 100.0] {
                let exact = fi_lower_bound_with_constant(&p, i, t);
                let v = grigoryan_fi(&p, i, t).unwrap();
                assert!((v / exact - 1.0).abs() < 1e-11, "i={i} t={t}");
            }
        }
    }

    #[test]
    fn grigoryan_bound_order_zero() {
        let p = SpaceParams::new(2, 1).unwrap();
        for t in [0.1, 2.0] {
            let b = grigoryan_bound(&p, 0, t).unwrap();
            assert!((b * grigoryan_f(&p, t) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn grid_refinement_keeps_nodes() {
        let g = GridSpec { t_min: 0.1, t_max: 10.0, r_min: 0.0, r_max: 12.0, t_points: 5, r_points: 4 };
        let coarse = g.ts();
        let fine = g.refined().ts();
        for (j, t) in coarse.iter().enumerate() {
            assert!((fine[2 * j] - t).abs() < 1e-12 * t);
        }
        assert_eq!(g.points().len(), 20);
    }
}
