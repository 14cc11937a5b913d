//! One function per subcommand.

use crate::config::{IntegrandKind, RunConfig};
use crate::report::{Cell, Check, Report, Table};
use drheat_core::algebra::build_htype;
use drheat_core::bounds::{recurrence_table, theorem1_check, GridSpec};
use drheat_core::group::{
    cayley, distance, distance_to_origin, haar_monte_carlo, inverse, multiply, radial_integral, GroupElement, HaarSampler,
    SpaceParams,
};
use drheat_core::lps::{k_sigma, lp_integral, sigma_threshold, Integrand, Piece};
use drheat_core::quadrature::QuadOptions;
use drheat_core::spherical::kernel::{exact_h3, HeatKernel, KernelEval};
use drheat_core::Result;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde_json::json;

fn space(cfg: &RunConfig) -> Result<SpaceParams> {
    SpaceParams::new(cfg.m, cfg.k)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

pub fn geometry_check(cfg: &RunConfig) -> Result<Report> {
    let params = space(cfg)?;
    let alg = build_htype(cfg.m, cfg.k)?;
    let (m, k) = (cfg.m, cfg.k);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let normal = |rng: &mut ChaCha20Rng, n: usize| DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let element = |rng: &mut ChaCha20Rng| {
        let a = rng.random_range(-1.0f64..1.0).exp();
        GroupElement::new(normal(rng, m), normal(rng, k), a)
    };
    let id = DMatrix::<f64>::identity(m, m);
    let mut defects = [0.0f64; 6];
    for _ in 0..cfg.samples {
        let z = normal(&mut rng, k);
        let w = normal(&mut rng, k);
        let jz = alg.j_matrix(&z)?;
        let jw = alg.j_matrix(&w)?;
        defects[0] = defects[0].max((&jz * &jz + &id * z.norm_squared()).amax());
        defects[1] = defects[1].max((&jz * &jw + &jw * &jz + &id * (2.0 * z.dot(&w))).amax());
        defects[2] = defects[2].max((&jz + jz.transpose()).amax());
        let (g, h, f) = (element(&mut rng)?, element(&mut rng)?, element(&mut rng)?);
        let left = multiply(&alg, &multiply(&alg, &g, &h)?, &f)?;
        let right = multiply(&alg, &g, &multiply(&alg, &h, &f)?)?;
        defects[3] = defects[3].max(left.max_abs_diff(&right));
        let e = multiply(&alg, &g, &inverse(&alg, &g)?)?;
        defects[4] = defects[4].max(e.max_abs_diff(&GroupElement::identity(&alg)));
        // Left translation is an isometry and the Cayley image lies in the ball.
        let d = distance(&alg, &g, &h)?;
        let moved = distance(&alg, &multiply(&alg, &f, &g)?, &multiply(&alg, &f, &h)?)?;
        defects[5] = defects[5].max((d - moved).abs() / (1.0 + d));
        if cayley(&alg, &g)?.norm() >= 1.0 {
            defects[5] = f64::INFINITY;
        }
    }
    let mut checks = vec![
        Check::at_most("j_squared", defects[0], 1e-12),
        Check::at_most("anticommutation", defects[1], 1e-12),
        Check::at_most("skew_symmetry", defects[2], 1e-12),
        Check::at_most("associativity", defects[3], 1e-12),
        Check::at_most("inverse", defects[4], 1e-12),
        Check::at_most("left_invariant_distance", defects[5], 1e-9),
        Check::at_most("generator_defect", alg.invariant_defect(), 1e-12),
    ];
    // Haar integral of a radial bump against its polar-coordinate value.
    let radius = 2.0;
    let bump = |r: f64| if r < radius { (1.0 - (r / radius).powi(2)).powi(2) } else { 0.0 };
    let radial = radial_integral(&params, bump, radius, &QuadOptions::with_rtol(1e-10))?.value[0];
    let plan = HaarSampler {
        log_a_max: radius,
        scale: 2.5,
        samples: 200_000,
        seed: cfg.seed,
    };
    let mc = haar_monte_carlo(&alg, |g| bump(distance_to_origin(&alg, g).unwrap_or(f64::INFINITY)), &plan)?;
    let ratio = mc.mean / radial;
    let sigma = mc.std_error / radial;
    let z_score = (ratio - params.sphere_constant()).abs() / sigma;
    checks.push(Check::at_most("haar_polar_z_score", z_score, 5.0));
    let table = Table {
        header: vec!["check".into(), "value".into(), "tolerance".into(), "passed".into()],
        rows: checks
            .iter()
            .map(|c| {
                vec![
                    Cell::Text(c.name.clone()),
                    Cell::Num(c.value),
                    Cell::Num(c.tolerance),
                    Cell::Int(c.passed as i64),
                ]
            })
            .collect(),
    };
    Ok(Report {
        summary: json!({
            "space": params,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "haar_ratio": ratio,
            "haar_ratio_std_error": sigma,
            "sphere_constant": params.sphere_constant(),
        }),
        table: Some(table),
        checks,
        csv_body: None,
    })
}

pub fn eval_kernel(cfg: &RunConfig) -> Result<Report> {
    let params = space(cfg)?;
    let kernel = HeatKernel::new(params)?;
    let mut rows: Vec<KernelEval> = Vec::with_capacity(cfg.points * cfg.points);
    for &t in &logspace(cfg.t_min, cfg.t_max, cfg.points) {
        for &r in &linspace(0.0, cfg.r_max, cfg.points) {
            rows.push(kernel.eval(t, r, cfg.i)?);
        }
    }
    let cal = kernel.calibration();
    let mut checks = vec![
        Check::flag("finite_values", rows.iter().all(|e| e.value.is_finite())),
        Check::at_most("calibration_gap", cal.relative_gap, 1e-8),
    ];
    if (cfg.m, cfg.k, cfg.i) == (2, 0, 0) {
        let gap = rows
            .iter()
            .map(|e| (e.value - exact_h3(e.t, e.r)).abs() / exact_h3(e.t, e.r))
            .filter(|g| g.is_finite())
            .fold(0.0, f64::max);
        checks.push(Check::at_most("closed_form_gap", gap, 1e-4));
    }
    let mut body = String::from(KernelEval::CSV_HEADER);
    body.push('\n');
    for e in &rows {
        body.push_str(&e.csv_row());
        body.push('\n');
    }
    let table = Table {
        header: KernelEval::CSV_HEADER.split(',').map(String::from).collect(),
        rows: rows
            .iter()
            .map(|e| {
                vec![
                    Cell::Num(e.t),
                    Cell::Num(e.r),
                    Cell::Int(e.i as i64),
                    Cell::Num(e.value),
                    Cell::Text(e.oracle.as_str().into()),
                    Cell::Num(e.quad_meta.map_or(0.0, |q| q.est_error)),
                ]
            })
            .collect(),
    };
    Ok(Report {
        summary: json!({ "space": params, "calibration": cal }),
        table: Some(table),
        checks,
        csv_body: Some(body),
    })
}

pub fn check_bounds(cfg: &RunConfig) -> Result<Report> {
    let params = space(cfg)?;
    let kernel = HeatKernel::new(params)?;
    let grid = GridSpec {
        t_min: cfg.t_min,
        t_max: cfg.t_max,
        r_min: 0.0,
        r_max: cfg.r_max,
        t_points: cfg.points,
        r_points: cfg.points,
    };
    let rep = theorem1_check(&kernel, cfg.eps, cfg.i, &grid)?;
    let checks = vec![
        Check::flag("constant_finite", rep.c_min.is_finite()),
        Check::at_most("refinement_change", rep.relative_change, drheat_core::bounds::GRID_STABILITY_TOL),
    ];
    let table = Table {
        header: ["epsilon", "i", "c_min", "argmax_t", "argmax_r", "refined_c_min", "relative_change"]
            .map(String::from)
            .to_vec(),
        rows: vec![vec![
            Cell::Num(rep.epsilon),
            Cell::Int(rep.i as i64),
            Cell::Num(rep.c_min),
            Cell::Num(rep.argmax_t),
            Cell::Num(rep.argmax_r),
            Cell::Num(rep.refined_c_min),
            Cell::Num(rep.relative_change),
        ]],
    };
    Ok(Report {
        summary: serde_json::to_value(&rep).unwrap_or_default(),
        table: Some(table),
        checks,
        csv_body: None,
    })
}

pub fn recurrence(cfg: &RunConfig) -> Result<Report> {
    let tab = recurrence_table(cfg.eps, cfg.levels, cfg.orders)?;
    let inv = tab.invariants();
    let checks = vec![
        Check::flag("structure", inv.structural_ok()),
        Check::at_most("gamma_limit_gap", inv.max_gamma_gap, 1e-6),
    ];
    let last = cfg.levels;
    Ok(Report {
        summary: json!({
            "epsilon": tab.epsilon,
            "lambda_eps": tab.lambda_eps,
            "levels": tab.levels,
            "orders": tab.orders,
            "invariants": inv,
            "gamma_final": tab.gamma_table[last],
            "beta_final": tab.beta_table[last],
        }),
        table: None,
        checks,
        csv_body: Some(tab.to_csv()),
    })
}

pub fn threshold(cfg: &RunConfig) -> Result<(f64, Report)> {
    let q = match cfg.q {
        Some(q) => q,
        None => space(cfg)?.q,
    };
    let value = sigma_threshold(q, cfg.p)?;
    let report = Report {
        summary: json!({ "q": q, "p": cfg.p, "threshold": value }),
        table: Some(Table {
            header: vec!["q".into(), "p".into(), "threshold".into()],
            rows: vec![vec![Cell::Num(q), Cell::Num(cfg.p), Cell::Num(value)]],
        }),
        checks: Vec::new(),
        csv_body: None,
    };
    Ok((value, report))
}

pub fn lp_probe(cfg: &RunConfig) -> Result<Report> {
    let params = space(cfg)?;
    let kernel = HeatKernel::new(params)?;
    let integrand = match cfg.integrand {
        IntegrandKind::Oracle => Integrand::Oracle,
        IntegrandKind::Lemma => Integrand::LemmaBound { eps: 1e-3 },
    };
    let rep = lp_integral(&kernel, cfg.p, cfg.sigma, cfg.i, integrand)?;
    let checks = vec![Check::flag("numeric_matches_analytic", rep.flag == rep.analytic_flag)];
    let mut rows = Vec::new();
    for &r in &linspace(0.0, cfg.r_max, cfg.points) {
        let e = k_sigma(&kernel, r, cfg.sigma, cfg.i, Piece::Global)?;
        rows.push(vec![
            Cell::Num(r),
            Cell::Num(e.value),
            Cell::Num(e.t_star),
            Cell::Int(e.divergent as i64),
        ]);
    }
    Ok(Report {
        summary: serde_json::to_value(&rep).unwrap_or_default(),
        table: Some(Table {
            header: ["r", "k_sigma_global", "t_star", "divergent"].map(String::from).to_vec(),
            rows,
        }),
        checks,
        csv_body: None,
    })
}
