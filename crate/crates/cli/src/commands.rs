use std::fs::File;
use std::io::BufReader;

use fluctlab::ensembles::io::MatrixJson;
use fluctlab::ensembles::eigenvalues;
use fluctlab::frechet::{frechet_integral, frechet_variation, rho_from_kernel, FrechetMesh, VariationMode};
use fluctlab::moments::{g2_series, MomentTable, MAX_PAIRING_SIZE};
use fluctlab::quadrature::{
    rho_polynomial_reference, rho_via_contour, AnalyticFunction, Contour, DEFAULT_ENCLOSED, DEFAULT_NODES,
    DEFAULT_W_RADIUS, DEFAULT_Z_RADIUS,
};
use fluctlab::statistics::{clt_experiment, covariance_mc};
use fluctlab::suite::checks;
use fluctlab::transforms::{g2_empirical, g2_gue_free, g2_gue_ps, MIN_G2_REPLICAS};
use fluctlab::{RngStream, TestFunction};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::Settings;
use crate::output::{num, Report};
use crate::{CliError, DEFAULT_SEED};

fn root(settings: &Settings) -> u64 {
    settings.seed.unwrap_or(DEFAULT_SEED)
}

/// Stream of the `k`-th independent piece of work in a run.
fn stream(settings: &Settings, k: u64) -> RngStream {
    RngStream::new(root(settings), k)
}

fn sizes(settings: &Settings, default: &[usize]) -> Vec<usize> {
    match (&settings.n_values, settings.n) {
        (Some(v), _) => v.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => default.to_vec(),
    }
}

fn complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn sample(s: &Settings) -> Result<Report, CliError> {
    #[derive(Serialize)]
    struct Draw {
        replica: usize,
        seed: u64,
        stream_id: u64,
        norm: f64,
        eigenvalues: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        matrix: Option<MatrixJson>,
    }
    let spec = s.ensemble_spec()?;
    let replicas = s.replicas_or(1);
    let base = stream(s, 0);
    let mut report = Report::new(vec!["replica", "index", "eigenvalue"]);
    let mut draws = Vec::with_capacity(replicas);
    for r in 0..replicas {
        let rs = base.replica(r);
        let x = spec.sample(rs)?;
        let spectrum = eigenvalues(&x)?;
        for (i, &l) in spectrum.values().iter().enumerate() {
            report.push(vec![r.to_string(), i.to_string(), num(l)]);
        }
        draws.push(Draw {
            replica: r,
            seed: rs.seed,
            stream_id: rs.stream_id,
            norm: spectrum.norm(),
            eigenvalues: spectrum.values().to_vec(),
            matrix: s.matrices.unwrap_or(false).then(|| MatrixJson::from(x.as_matrix())),
        });
    }
    report.with_json(json!({ "ensemble": spec.descriptor(), "draws": draws }))
}

pub fn covariance(s: &Settings) -> Result<Report, CliError> {
    let (f, g) = (s.function("f", "id")?, s.function("g", "id")?);
    let spec = s.ensemble_spec()?;
    let replicas = s.replicas_or(1000);
    let mut report = Report::new(vec!["n", "f", "g", "replicas", "value_re", "value_im", "stderr", "seed", "stream_id"]);
    let mut estimates = Vec::new();
    for (k, n) in sizes(s, &[spec.index_n()]).into_iter().enumerate() {
        let spec_n = spec.with_n(n).map_err(|e| CliError::field("n_values", e))?;
        let est = covariance_mc(&f, &g, &spec_n, replicas, stream(s, k as u64))?;
        report.push(vec![
            n.to_string(),
            f.name.clone(),
            g.name.clone(),
            replicas.to_string(),
            num(est.value.re),
            num(est.value.im),
            num(est.stderr),
            est.seed.to_string(),
            est.stream_id.to_string(),
        ]);
        estimates.push(json!({ "n": n, "estimate": est }));
    }
    report.with_json(json!({ "f": f.name, "g": g.name, "estimates": estimates }))
}

fn grid_points(size: usize) -> Vec<Complex64> {
    let axis: Vec<f64> = (0..size)
        .map(|i| -6.0 + 12.0 * i as f64 / (size - 1) as f64)
        .collect();
    axis.iter()
        .flat_map(|&x| axis.iter().map(move |&y| Complex64::new(x, y)))
        .filter(|z| (z.re.abs() - 2.0).max(0.0).hypot(z.im) > 0.2)
        .collect()
}

pub fn g2(s: &Settings) -> Result<Report, CliError> {
    if s.grid.unwrap_or(false) {
        let size = s.grid_size.unwrap_or(8);
        if size < 2 {
            return Err(CliError::Validation("field `grid_size`: must be at least 2".into()));
        }
        let points = grid_points(size);
        let mut report = Report::new(vec![
            "z_re", "z_im", "w_re", "w_im", "free_re", "free_im", "ps_re", "ps_im", "abs_diff",
        ]);
        let mut worst: f64 = 0.0;
        for &z in &points {
            for &w in &points {
                if (z - w).norm() <= 0.2 {
                    continue;
                }
                let (a, b) = (g2_gue_free(z, w)?, g2_gue_ps(z, w)?);
                let d = (a - b).norm();
                worst = worst.max(d);
                report.push(vec![
                    num(z.re),
                    num(z.im),
                    num(w.re),
                    num(w.im),
                    num(a.re),
                    num(a.im),
                    num(b.re),
                    num(b.im),
                    num(d),
                ]);
            }
        }
        let rows = report.rows.len();
        return report.with_json(json!({ "rows": rows, "max_abs_diff": worst }));
    }
    let z = complex(s.z.unwrap_or([0.0, 3.0]));
    let w = complex(s.w.unwrap_or([2.0, 2.0]));
    let free = g2_gue_free(z, w)?;
    let ps = g2_gue_ps(z, w)?;
    let mut report = Report::new(vec!["method", "value_re", "value_im", "error_bound"]);
    report.push(vec!["closed_free".into(), num(free.re), num(free.im), String::new()]);
    report.push(vec!["closed_ps".into(), num(ps.re), num(ps.im), String::new()]);
    let mut doc = json!({ "z": [z.re, z.im], "w": [w.re, w.im], "free": free, "ps": ps });
    let degree = s.degree.unwrap_or(12);
    if z.norm() > 3.0 && w.norm() > 3.0 {
        let table = MomentTable::gue(degree)?;
        let series = g2_series(z, w, degree, &table)?;
        report.push(vec![
            format!("series_{degree}"),
            num(series.value.re),
            num(series.value.im),
            num(series.tail_bound),
        ]);
        doc["series"] = serde_json::to_value(series).map_err(|e| CliError::Io(e.to_string()))?;
    }
    if let Some(replicas) = s.replicas {
        if replicas < MIN_G2_REPLICAS {
            return Err(CliError::Validation(format!(
                "field `replicas`: must be at least {MIN_G2_REPLICAS}"
            )));
        }
        let spec = s.ensemble_spec()?;
        let est = g2_empirical(&spec, z, w, replicas, stream(s, 0))?;
        report.push(vec![
            format!("empirical_n{}", spec.index_n()),
            num(est.value.re),
            num(est.value.im),
            num(est.stderr),
        ]);
        doc["empirical"] = serde_json::to_value(est).map_err(|e| CliError::Io(e.to_string()))?;
    }
    report.with_json(doc)
}

struct ContourPair {
    cz: Contour,
    cw: Contour,
}

fn contours(s: &Settings) -> Result<ContourPair, CliError> {
    let c = s.contour.clone().unwrap_or_default();
    let nodes = c.nodes.unwrap_or(DEFAULT_NODES);
    let enclosed = c.enclosed.unwrap_or(DEFAULT_ENCLOSED);
    let cz = Contour::circle(0.0, c.z_radius.unwrap_or(DEFAULT_Z_RADIUS), nodes, enclosed)
        .map_err(|e| CliError::field("contour", e))?;
    let cw = Contour::circle(0.0, c.w_radius.unwrap_or(DEFAULT_W_RADIUS), nodes, enclosed)
        .map_err(|e| CliError::field("contour", e))?;
    Ok(ContourPair { cz, cw })
}

fn analytic(f: &TestFunction, field: &str) -> Result<AnalyticFunction, CliError> {
    f.analytic_extension
        .clone()
        .ok_or_else(|| CliError::Validation(format!("field `{field}`: {} has no analytic extension", f.name)))
}

/// Exact `ρ(p, q)` when both functions are polynomials within the pairing cap.
fn polynomial_oracle(f: &TestFunction, g: &TestFunction) -> Result<Option<f64>, CliError> {
    match (f.as_polynomial(), g.as_polynomial()) {
        (Some(p), Some(q)) if p.degree() + q.degree() <= MAX_PAIRING_SIZE => {
            let degree = (p.degree() + q.degree()).max(2);
            Ok(Some(rho_polynomial_reference(p, q, &MomentTable::gue(degree)?)?))
        }
        _ => Ok(None),
    }
}

fn rho_value(f: &TestFunction, g: &TestFunction, c: &ContourPair) -> Result<Complex64, CliError> {
    Ok(rho_via_contour(&analytic(f, "f")?, &analytic(g, "g")?, g2_gue_free, &c.cz, &c.cw)?)
}

pub fn rho(s: &Settings) -> Result<Report, CliError> {
    let (f, g) = (s.function("f", "id")?, s.function("g", "id")?);
    let c = contours(s)?;
    let value = rho_value(&f, &g, &c)?;
    let oracle = polynomial_oracle(&f, &g)?;
    let mut report = Report::new(vec!["f", "g", "nodes", "contour_re", "contour_im", "oracle", "abs_diff"]);
    report.push(vec![
        f.name.clone(),
        g.name.clone(),
        c.cz.nodes().to_string(),
        num(value.re),
        num(value.im),
        oracle.map(num).unwrap_or_default(),
        oracle.map(|o| num((value - o).norm())).unwrap_or_default(),
    ]);
    report.with_json(json!({
        "f": f.name,
        "g": g.name,
        "nodes": c.cz.nodes(),
        "contour": value,
        "oracle": oracle,
    }))
}

pub fn clt(s: &Settings) -> Result<Report, CliError> {
    let f = s.function("f", "id")?;
    let spec = s.ensemble_spec()?;
    let target = match s.rho_target {
        Some(t) => t,
        None => match polynomial_oracle(&f, &f)? {
            Some(t) => t,
            None => rho_value(&f, &f, &contours(s)?)?.re,
        },
    };
    let ns = sizes(s, &[16, 64, 256]);
    let replicas = s.replicas_or(10_000);
    let r = clt_experiment(&f, &spec, &ns, replicas, target, stream(s, 0))?;
    let mut report = Report::new(vec![
        "n", "replicas", "mean", "mean_stderr", "variance", "variance_stderr", "k3", "k3_stderr", "k4",
        "k4_stderr", "ks", "ks_p_value", "rho_target",
    ]);
    for row in &r.rows {
        report.push(vec![
            row.n.to_string(),
            row.replicas.to_string(),
            num(row.mean),
            num(row.mean_stderr),
            num(row.variance),
            num(row.variance_stderr),
            num(row.k3),
            num(row.k3_stderr),
            num(row.k4),
            num(row.k4_stderr),
            num(row.ks),
            num(row.ks_p_value),
            num(r.rho_target),
        ]);
    }
    report.with_json(&r)
}

/// Returns the report and whether every selected check passed.
pub fn check(s: &Settings) -> Result<(Report, bool), CliError> {
    let all = checks();
    if let Some(only) = &s.only {
        if let Some(bad) = only.iter().find(|id| !all.iter().any(|c| c.id == **id)) {
            return Err(CliError::Validation(format!("field `only`: no check with id {bad}")));
        }
    }
    let mut report = Report::new(vec!["id", "name", "pass", "detail"]);
    let mut outcomes = Vec::new();
    let mut all_pass = true;
    for c in all.iter().filter(|c| s.only.as_ref().map_or(true, |o| o.contains(&c.id))) {
        let outcome = c.run(root(s));
        eprintln!("{}", outcome.line());
        all_pass &= outcome.pass;
        report.push(vec![
            outcome.id.to_string(),
            outcome.name.to_string(),
            outcome.pass.to_string(),
            outcome.detail.clone(),
        ]);
        outcomes.push(json!({
            "id": outcome.id,
            "name": outcome.name,
            "pass": outcome.pass,
            "detail": outcome.detail,
        }));
    }
    Ok((report.with_json(json!({ "all_pass": all_pass, "checks": outcomes }))?, all_pass))
}

pub fn frechet(s: &Settings) -> Result<Report, CliError> {
    let path = s
        .mesh
        .as_ref()
        .ok_or_else(|| CliError::Validation("field `mesh`: a mesh CSV is required".into()))?;
    let file = File::open(path)
        .map_err(|e| CliError::Validation(format!("field `mesh`: cannot open {}: {e}", path.display())))?;
    let mesh = FrechetMesh::from_csv(BufReader::new(file)).map_err(|e| CliError::field("mesh", e))?;
    let mode = s.mode.unwrap_or(VariationMode::UpperBound);
    let variation = frechet_variation(&mesh, mode)?;
    let majorant = frechet_variation(&mesh, VariationMode::UpperBound)?;
    let (f, g) = (s.function("f", "one")?, s.function("g", "one")?);
    let kernel = s.kernel.unwrap_or(false);
    let value = if kernel {
        rho_from_kernel(&f, &g, &mesh)
    } else {
        frechet_integral(|x| f.eval(x), |y| g.eval(y), &mesh)
    };
    let (cx, cy) = mesh.cells();
    let mode_name = match mode {
        VariationMode::Exact => "exact",
        VariationMode::UpperBound => "upper_bound",
    };
    let quantity = if kernel { "kernel_rho" } else { "integral" };
    let mut report = Report::new(vec![
        "cells_x", "cells_y", "f", "g", "quantity", "value_re", "value_im", "variation_mode", "variation",
        "upper_bound",
    ]);
    report.push(vec![
        cx.to_string(),
        cy.to_string(),
        f.name.clone(),
        g.name.clone(),
        quantity.into(),
        num(value.re),
        num(value.im),
        mode_name.into(),
        num(variation),
        num(majorant),
    ]);
    report.with_json(json!({
        "cells": [cx, cy],
        "f": f.name,
        "g": g.name,
        "quantity": quantity,
        "value": value,
        "variation_mode": mode,
        "variation": variation,
        "upper_bound": majorant,
    }))
}
