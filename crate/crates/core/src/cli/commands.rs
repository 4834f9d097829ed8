use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{RunConfig, ScanAxis};
use super::output::{Cell, Check, Report, Table};
use super::CliError;
use crate::asymptotics::{fit_p_slope, fit_w_slope, hessian_at_zero, quadratic_lower_bound, uniform_p2_residual};
use crate::discrete_oracle::{lowest_eigenvalue_dense, secular_root, GridModel};
use crate::dispersion::band_edges;
use crate::eigensolver::{band_scan, eigenvalue};
use crate::form_factor::FormFactor;
use crate::fredholm::{
    classify_threshold, critical_coupling, d_fn, delta, lambda_fn, threshold_function_diagnostics, ModelParams,
    CRITICAL_REL_TOL, PHI_ZERO_TOL,
};
use crate::quadrature::IntegralValue;
use crate::torus::TorusPoint;

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

struct Setup {
    ff: FormFactor,
    mu0: Option<IntegralValue>,
    mu: f64,
}

impl Setup {
    fn new(cfg: &RunConfig, want_mu0: bool) -> Result<Self, CliError> {
        let ff = cfg.form_factor().map_err(|e| CliError::Config(e.0))?;
        let mu0 = if want_mu0 || cfg.mu.needs_mu0() {
            Some(critical_coupling(&ff, &cfg.quad).map_err(compute)?)
        } else {
            None
        };
        let mu = cfg.mu.resolve(mu0.map_or(f64::NAN, |m| m.value));
        Ok(Self { ff, mu0, mu })
    }

    fn params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.mu, self.ff.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    fn critical(&self) -> Result<ModelParams, CliError> {
        let m0 = self.mu0.expect("mu0 requested").value;
        ModelParams::new(m0, self.ff.clone()).map_err(compute)
    }

    fn annotate(&self, report: &mut Report) {
        if let Some(m0) = self.mu0 {
            report.resolved.push(("mu0".into(), m0.value));
            report.resolved.push(("mu0_err_est".into(), m0.err_est));
        }
        report.resolved.push(("mu".into(), self.mu));
    }
}

fn point_cells(p: &TorusPoint) -> Vec<Cell> {
    p.coords().iter().map(|&x| x.into()).collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn edges(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new("edges", cfg);
    let mut t = Table::new("edges", &["index", "p1", "p2", "p3", "m", "M", "deg1", "deg2", "deg3"]);
    for (i, p) in cfg.path_points().iter().enumerate() {
        let e = band_edges(p);
        let mut row: Vec<Cell> = vec![i.into()];
        row.extend(point_cells(p));
        row.push(e.lower.into());
        row.push(e.upper.into());
        row.extend(p.boundary_axes().iter().map(|&b| Cell::I(b as i64)));
        t.push(row);
    }
    report.tables.push(t);
    Ok(report)
}

pub fn mu0(cfg: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(cfg, true)?;
    let mut report = Report::new("mu0", cfg);
    setup.annotate(&mut report);
    let m0 = setup.mu0.expect("requested");
    let class = classify_threshold(&setup.params()?, &cfg.quad, CRITICAL_REL_TOL).map_err(compute)?;
    let mut t = Table::new("mu0", &["mu0", "err_est", "lambda0", "mu", "phi0", "class"]);
    t.push(vec![
        m0.value.into(),
        m0.err_est.into(),
        (1.0 / m0.value).into(),
        setup.mu.into(),
        setup.ff.value_at_zero().into(),
        class.class.as_str().into(),
    ]);
    report.tables.push(t);
    let rows = threshold_function_diagnostics(&setup.ff, &[0.2, 0.1, 0.05, 0.025], &cfg.quad).map_err(compute)?;
    let mut t = Table::new("threshold_function", &["delta", "l1", "l2"]);
    for r in rows {
        t.push(vec![r.delta.into(), r.l1.into(), r.l2.into()]);
    }
    report.tables.push(t);
    Ok(report)
}

/// Leading cells, Λ or D, Δ and error estimate for one scan sample.
type ScanSample = (Vec<Cell>, f64, f64, f64);

pub fn det_scan(cfg: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(cfg, false)?;
    let params = setup.params()?;
    let mut report = Report::new("det-scan", cfg);
    setup.annotate(&mut report);
    let s = &cfg.scan;
    let grid = linspace(s.from, s.to, s.count);
    let quad = &cfg.quad;
    let (name, columns, expected): (&str, &[&str], f64) = match s.axis {
        ScanAxis::Z => ("z_scan", &["z", "w", "lambda", "delta", "err_est", "trend", "error"], -1.0),
        ScanAxis::W => ("w_scan", &["w", "z", "d", "delta", "err_est", "trend", "error"], 1.0),
        ScanAxis::P => ("p_scan", &["s", "p1", "p2", "p3", "lambda", "delta", "err_est", "trend", "error"], 0.0),
    };
    let unit = {
        let d = s.direction;
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if !(n > 0.0) {
            return Err(CliError::Config("scan.direction must be nonzero".into()));
        }
        d.map(|x| x / n)
    };
    let p0 = TorusPoint::from_array(s.p);
    let rows: Vec<Result<ScanSample, String>> = grid
        .par_iter()
        .map(|&x| {
            let r = match s.axis {
                ScanAxis::Z => {
                    let m = band_edges(&p0).lower;
                    let lam = lambda_fn(&p0, x, &params, quad).map_err(|e| e.to_string())?;
                    let d = 1.0 - params.mu() * lam.value;
                    (vec![x.into(), (m - x).max(0.0).sqrt().into()], lam.value, d, params.mu() * lam.err_est)
                }
                ScanAxis::W => {
                    let m = band_edges(&p0).lower;
                    let dv = d_fn(&p0, x, &params, quad).map_err(|e| e.to_string())?;
                    let d = 1.0 - params.mu() * dv.value;
                    (vec![x.into(), (m - x * x).into()], dv.value, d, params.mu() * dv.err_est)
                }
                ScanAxis::P => {
                    let p = TorusPoint::new(x * unit[0], x * unit[1], x * unit[2]);
                    let dv = delta(&p, s.z, &params, quad).map_err(|e| e.to_string())?;
                    let mut lead = vec![x.into()];
                    lead.extend(point_cells(&p));
                    (lead, (1.0 - dv.value) / params.mu(), dv.value, dv.err_est)
                }
            };
            Ok(r)
        })
        .collect();
    let mut t = Table::new(name, columns);
    let mut prev: Option<f64> = None;
    let mut monotone = true;
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok((mut cells, v, d, err)) => {
                let trend = prev.map_or(0.0, |p| sign(d - p));
                if expected != 0.0 && trend == -expected {
                    monotone = false;
                }
                prev = Some(d);
                cells.extend([v.into(), d.into(), err.into(), trend.into(), Cell::Empty]);
                t.push(cells);
            }
            Err(e) => {
                let mut cells = vec![grid[i].into()];
                cells.extend(std::iter::repeat_n(Cell::Empty, columns.len() - 2));
                cells.push(e.into());
                t.push(cells);
            }
        }
    }
    report.tables.push(t);
    if expected != 0.0 {
        let what = if expected < 0.0 { "delta_decreasing_in_z" } else { "delta_increasing_in_w" };
        report.checks.push(Check::new(what, monotone as i32 as f64, 1.0, 0.0, monotone));
    }
    Ok(report)
}

pub fn band(cfg: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(cfg, false)?;
    let params = setup.params()?;
    let mut report = Report::new("band", cfg);
    setup.annotate(&mut report);
    let rows = band_scan(&params, &cfg.path_points(), &cfg.quad, cfg.solver_tol);
    let mut t = Table::new(
        "band",
        &["index", "p1", "p2", "p3", "m", "M", "exists", "e", "gap", "residual", "iterations", "error"],
    );
    for (i, r) in rows.iter().enumerate() {
        let mut row: Vec<Cell> = vec![i.into()];
        row.extend(point_cells(&r.p));
        row.push(r.lower.into());
        row.push(r.upper.into());
        row.push(r.existence.map(|e| e.as_str()).into());
        row.push(r.state.map(|s| s.e).into());
        row.push(r.state.map(|s| s.gap).into());
        row.push(r.state.map(|s| s.residual).into());
        row.push(r.state.map(|s| s.iterations).into());
        row.push(r.error.clone().into());
        t.push(row);
    }
    report.tables.push(t);
    Ok(report)
}

pub fn asymptotics(cfg: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(cfg, true)?;
    let mut report = Report::new("asymptotics", cfg);
    setup.annotate(&mut report);
    let quad = &cfg.quad;
    let a = &cfg.asym;
    let scale = a.slope_scale;
    let crit = setup.critical()?;
    let resonance = setup.ff.value_at_zero().abs() > PHI_ZERO_TOL;

    let wfit = fit_w_slope(&setup.params()?, quad, &a.w_grid).map_err(compute)?;
    let mut t = Table::new("w_fit", &["w", "delta"]);
    for &(w, v) in &wfit.samples {
        t.push(vec![w.into(), v.into()]);
    }
    report.tables.push(t);
    let w_ref = scale * wfit.theoretical_slope;
    if resonance {
        let rel = wfit.rel_error_against(w_ref);
        report.checks.push(Check::new("w_slope", wfit.fitted_slope, w_ref, 0.02, rel < 0.02));
    } else {
        report.checks.push(Check::new(
            "w_slope_vanishes",
            wfit.fitted_slope,
            w_ref,
            1e-3,
            (wfit.fitted_slope - w_ref).abs() < 1e-3,
        ));
    }

    let mut t = Table::new("p_fit", &["direction", "s", "delta"]);
    let mut slopes = vec![];
    let mut sandwich = true;
    for (k, dir) in a.directions.iter().enumerate() {
        let fit = fit_p_slope(&crit, quad, *dir, &a.s_grid).map_err(compute)?;
        for &(s, v) in &fit.samples {
            t.push(vec![k.into(), s.into(), v.into()]);
            let r = v / s;
            sandwich &= r >= 0.5 * fit.fitted_slope && r <= 2.0 * fit.fitted_slope;
        }
        let p_ref = scale * fit.theoretical_slope;
        let name = format!("p_slope_{k}");
        if resonance {
            let rel = fit.rel_error_against(p_ref);
            report.checks.push(Check::new(&name, fit.fitted_slope, p_ref, 0.03, rel < 0.03));
        } else {
            report.checks.push(Check::new(
                &name,
                fit.fitted_slope,
                p_ref,
                1e-4,
                (fit.fitted_slope - p_ref).abs() < 1e-4,
            ));
        }
        slopes.push(fit.fitted_slope);
    }
    report.tables.push(t);
    if resonance && !slopes.is_empty() {
        let hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
        report.checks.push(Check::new("p_slope_isotropy", hi / lo - 1.0, 0.0, 0.03, hi / lo - 1.0 < 0.03));
        report.checks.push(Check::new("p_sandwich", sandwich as i32 as f64, 1.0, 0.0, sandwich));
        let predicted = wfit.fitted_slope * 3f64.sqrt() / 2.0 * crit.mu() / setup.mu;
        let rel = (slopes[0] - predicted).abs() / predicted;
        report.checks.push(Check::new("p_vs_w_slope", slopes[0], predicted, 0.05, rel < 0.05));
    }

    let h = hessian_at_zero(&crit, quad, a.h_step).map_err(compute)?;
    let mut t = Table::new("hessian", &["i", "j", "value"]);
    for (i, row) in h.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t.push(vec![i.into(), j.into(), (*v).into()]);
        }
    }
    report.tables.push(t);
    let diag_max = (0..3).map(|i| h[i][i]).fold(f64::NEG_INFINITY, f64::max);
    report.checks.push(Check::new("hessian_negative", diag_max, 0.0, 0.0, diag_max < 0.0));
    let spread = (0..3).map(|i| ((h[i][i] - h[0][0]) / h[0][0]).abs()).fold(0.0, f64::max);
    report.checks.push(Check::new("hessian_isotropic", spread, 0.0, 1e-6, spread < 1e-6));
    let off = [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| h[i][j].abs() / h[i][i].abs()).fold(0.0, f64::max);
    report.checks.push(Check::new("hessian_off_diagonal", off, 0.0, 1e-3, off < 1e-3));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pi = std::f64::consts::PI;
    let samples: Vec<TorusPoint> = (0..a.hessian_samples)
        .map(|_| TorusPoint::new(rng.random_range(-pi..pi), rng.random_range(-pi..pi), rng.random_range(-pi..pi)))
        .collect();
    let lam0 = lambda_fn(&TorusPoint::ZERO, 0.0, &crit, quad).map_err(compute)?.value;
    let worst = samples
        .par_iter()
        .map(|p| Ok(lambda_fn(p, 0.0, &crit, quad)?.value))
        .collect::<Result<Vec<f64>, crate::fredholm::FredholmError>>()
        .map_err(compute)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !samples.is_empty() {
        report.checks.push(Check::new("lambda_maximum_at_zero", worst, lam0, 0.0, worst < lam0));
    }

    let w = [0.0, 0.1, 0.5, 1.0];
    let big = uniform_p2_residual(&crit, quad, &[TorusPoint::new(0.2, 0.0, 0.0)], &w).map_err(compute)?;
    let small = uniform_p2_residual(&crit, quad, &[TorusPoint::new(0.1, 0.0, 0.0)], &w).map_err(compute)?;
    report.resolved.push(("p2_residual_constant".into(), big.max(small)));
    let ratio = big / small;
    report.checks.push(Check::new("p2_residual_stable", ratio, 1.0, 0.5, (ratio - 1.0).abs() < 0.5));

    if !resonance {
        let samples: Vec<TorusPoint> = (0..a.lb_samples)
            .map(|k| {
                let r = 0.01 * 50f64.powf(k as f64 / (a.lb_samples.max(2) - 1) as f64);
                let d: [f64; 3] =
                    [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                TorusPoint::new(r * d[0] / n, r * d[1] / n, r * d[2] / n)
            })
            .collect();
        match quadratic_lower_bound(&crit, quad, &samples) {
            Ok(lb) => {
                let mut t = Table::new("lower_bound", &["norm_p", "ratio"]);
                for &(n, r) in &lb.ratios {
                    t.push(vec![n.into(), r.into()]);
                }
                report.tables.push(t);
                report.checks.push(Check::new("lower_bound_positive", lb.c, 0.0, 0.0, lb.c > 0.0));
                let spread = lb.max_ratio / lb.c;
                report.checks.push(Check::new("lower_bound_ratio_spread", spread, 1.0, 10.0, spread < 10.0));
            }
            Err(crate::asymptotics::AsymptoticsError::TheoremViolation(c)) => {
                report.checks.push(Check::new("lower_bound_positive", c, 0.0, 0.0, false));
            }
            Err(e) => return Err(compute(e)),
        }
    }
    Ok(report)
}

pub fn oracle(cfg: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(cfg, true)?;
    let params = setup.params()?;
    let mut report = Report::new("oracle", cfg);
    setup.annotate(&mut report);
    let p = TorusPoint::from_array(cfg.oracle.p);
    let m0 = setup.mu0.expect("requested").value;
    if setup.mu < 1.2 * m0 && p.norm() < 0.5 {
        report
            .warnings
            .push("outside the oracle validity regime (mu >= 1.2 mu0 or |p| >= 0.5); expect slow convergence".into());
    }
    let continuum = eigenvalue(&p, &params, &cfg.quad, cfg.solver_tol).map_err(compute)?.map(|s| s.e);
    report.resolved.push(("continuum_e".into(), continuum.unwrap_or(f64::NAN)));
    let results = cfg
        .oracle
        .sizes
        .par_iter()
        .map(|&n| {
            let model = GridModel::build(&p, setup.mu, &setup.ff, n)?;
            let sec = secular_root(&model)?;
            let dense = if n <= cfg.oracle.dense_max_n { Some(lowest_eigenvalue_dense(&model)?) } else { None };
            Ok((n, sec, dense))
        })
        .collect::<Result<Vec<_>, crate::discrete_oracle::OracleError>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut t = Table::new("oracle", &["n", "secular_e", "dense_e", "continuum_e", "gap"]);
    let mut gaps = vec![];
    let mut agree = 0.0f64;
    for &(n, sec, dense) in &results {
        let gap = match (sec, continuum) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        if let (Some(a), Some(d)) = (sec, dense) {
            agree = agree.max((a - d).abs());
        }
        gaps.extend(gap);
        t.push(vec![n.into(), sec.into(), dense.into(), continuum.into(), gap.into()]);
    }
    report.tables.push(t);
    report.checks.push(Check::new("secular_vs_dense", agree, 0.0, 1e-9, agree < 1e-9));
    let shrinking = gaps.len() == results.len() && gaps.windows(2).all(|w| w[1] <= w[0]);
    report.checks.push(Check::new("gap_shrinks", shrinking as i32 as f64, 1.0, 0.0, shrinking));
    Ok(report)
}
