//! Method-of-lines solve of the radial heat equation
//! `∂_t u = u'' + (A'/A) u'` from a small-time kernel profile.
//!
//! Fourth-order central differences on a uniform grid, even reflection at
//! `r = 0` (where the operator is `n·u''`), zero Dirichlet data at `r_max`,
//! classical RK4 in time below the explicit stability limit.

use super::kernel::{HeatKernel, KernelEval, Oracle};
use crate::error::{Error, Result};
use serde::Serialize;

/// Start time of the cross-check.
pub const PDE_START_TIME: f64 = 0.05;

/// Spatial grid of the solve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PdeGrid {
    pub r_max: f64,
    pub dr: f64,
}

impl Default for PdeGrid {
    fn default() -> Self {
        Self { r_max: 20.0, dr: 0.02 }
    }
}

/// Solution at `t_final` compared with the inversion oracle.
#[derive(Debug, Clone, Serialize)]
pub struct PdeCrosscheck {
    pub t0: f64,
    pub t_final: f64,
    pub grid: PdeGrid,
    pub steps: usize,
    pub dt: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// Largest `|u − h_t|/h_t` over `r ≤ r_max/2`.
    pub max_relative_deviation: f64,
}

impl PdeCrosscheck {
    pub fn mass_drift(&self) -> f64 {
        (self.mass_final - self.mass_initial).abs() / self.mass_initial.abs()
    }

    pub fn evals(&self) -> Vec<KernelEval> {
        self.r
            .iter()
            .zip(&self.u)
            .map(|(&r, &value)| KernelEval {
                t: self.t_final,
                r,
                i: 0,
                value,
                oracle: Oracle::Pde,
                quad_meta: None,
            })
            .collect()
    }
}

struct Operator {
    inv_dr2: f64,
    inv_dr: f64,
    n: f64,
    drift: Vec<f64>,
}

impl Operator {
    // u at index j, reflected evenly through the origin and zero past the end.
    #[inline]
    fn at(u: &[f64], j: isize) -> f64 {
        let idx = j.unsigned_abs();
        if idx < u.len() {
            u[idx]
        } else {
            0.0
        }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let last = u.len() - 1;
        for j in 0..last {
            let jj = j as isize;
            let (m2, m1, c, p1, p2) = (
                Self::at(u, jj - 2),
                Self::at(u, jj - 1),
                u[j],
                Self::at(u, jj + 1),
                Self::at(u, jj + 2),
            );
            let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) * (self.inv_dr2 / 12.0);
            out[j] = if j == 0 {
                self.n * d2
            } else {
                let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) * (self.inv_dr / 12.0);
                d2 + self.drift[j] * d1
            };
        }
        out[last] = 0.0;
    }
}

/// Solves from `t₀ = 0.05` to `t_final` and compares with the oracle.
pub fn heat_pde_crosscheck(kernel: &HeatKernel, t_final: f64, grid: PdeGrid) -> Result<PdeCrosscheck> {
    let t0 = PDE_START_TIME;
    if !(t_final >= t0) {
        return Err(Error::InvalidArgument {
            name: "t_final",
            value: t_final,
            reason: "must not precede the start time 0.05",
        });
    }
    if !(grid.dr > 0.0) || !(grid.r_max > 8.0 * grid.dr) {
        return Err(Error::InvalidArgument {
            name: "dr",
            value: grid.dr,
            reason: "need a positive step and at least eight cells",
        });
    }
    let params = *kernel.params();
    let cells = (grid.r_max / grid.dr).round() as usize;
    let dr = grid.r_max / cells as f64;
    let r: Vec<f64> = (0..=cells).map(|j| j as f64 * dr).collect();
    let mut u = Vec::with_capacity(r.len());
    for &rj in &r {
        u.push(kernel.eval(t0, rj, 0)?.value);
    }
    let op = Operator {
        inv_dr2: 1.0 / (dr * dr),
        inv_dr: 1.0 / dr,
        n: params.n as f64,
        drift: r.iter().map(|&rj| if rj > 0.0 { params.volume_log_derivative(rj) } else { 0.0 }).collect(),
    };
    // Largest eigenvalue of the discrete operator is below n·16/(3dr²);
    // RK4 is stable on the negative axis up to 2.78.
    let lmax = params.n as f64 * 16.0 / 3.0 / (dr * dr);
    let dt_max = 2.5 / lmax;
    let span = t_final - t0;
    let steps = if span == 0.0 { 0 } else { (span / dt_max).ceil() as usize };
    let dt = if steps == 0 { 0.0 } else { span / steps as f64 };

    let mass = |u: &[f64]| -> f64 {
        // Composite Simpson on the grid (even cell count assumed; trapezoid for a leftover cell).
        let f: Vec<f64> = u.iter().zip(&r).map(|(v, &rj)| v * params.volume_density(rj)).collect();
        let pairs = (f.len() - 1) / 2;
        let mut s = 0.0;
        for p in 0..pairs {
            s += f[2 * p] + 4.0 * f[2 * p + 1] + f[2 * p + 2];
        }
        s *= dr / 3.0;
        if (f.len() - 1) % 2 == 1 {
            s += 0.5 * dr * (f[f.len() - 2] + f[f.len() - 1]);
        }
        params.sphere_constant() * s
    };
    let mass_initial = mass(&u);

    let len = u.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    for step in 0..steps {
        op.apply(&u, &mut k1);
        for j in 0..len {
            tmp[j] = u[j] + 0.5 * dt * k1[j];
        }
        op.apply(&tmp, &mut k2);
        for j in 0..len {
            tmp[j] = u[j] + 0.5 * dt * k2[j];
        }
        op.apply(&tmp, &mut k3);
        for j in 0..len {
            tmp[j] = u[j] + dt * k3[j];
        }
        op.apply(&tmp, &mut k4);
        for j in 0..len {
            u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !u[0].is_finite() {
            return Err(Error::PdeFailure(format!("solution blew up at step {step} (dt = {dt:e})")));
        }
    }
    let mass_final = mass(&u);

    let half = grid.r_max / 2.0;
    let stride = ((0.1 / dr).round() as usize).max(1);
    let mut max_relative_deviation: f64 = 0.0;
    for j in (0..len).step_by(stride).take_while(|&j| r[j] <= half + 1e-12) {
        let exact = kernel.eval(t_final, r[j], 0)?.value;
        max_relative_deviation = max_relative_deviation.max(((u[j] - exact) / exact).abs());
    }
    Ok(PdeCrosscheck {
        t0,
        t_final,
        grid: PdeGrid { r_max: grid.r_max, dr },
        steps,
        dt,
        r,
        u,
        mass_initial,
        mass_final,
        max_relative_deviation,
    })
}
