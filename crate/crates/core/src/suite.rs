//! End-to-end validation checks: closed-form identities, oracle
//! equivalences and the Monte Carlo diagnostics, each with a fixed seed and
//! a pass/fail verdict.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::ensembles::{EnsembleSpec, HermitianMatrix};
use crate::error::Result;
use crate::frechet::{frechet_integral, frechet_integral_refined, frechet_variation, FrechetMesh, VariationMode};
use crate::moments::{g2_series, MomentTable};
use crate::polynomial::Polynomial;
use crate::quadrature::{
    convergence_sweep, rho_polynomial_reference, rho_via_contour, sweep_is_monotone, AnalyticFunction,
    Contour, DEFAULT_ENCLOSED, DEFAULT_NODES, DEFAULT_W_RADIUS, DEFAULT_Z_RADIUS,
};
use crate::rng::RngStream;
use crate::statistics::{clt_experiment_many, poincare_check, tail_fraction, truncation_gap, TestFunction};
use crate::transforms::{g2_empirical, g2_gue_free, g2_gue_ps};

pub const DEFAULT_SUITE_SEED: u64 = 0x5eed_f1c7;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = fn(RngStream) -> Result<(bool, String)>;

pub struct Check {
    pub id: usize,
    pub name: &'static str,
    run: CheckFn,
}

impl Check {
    /// Run with streams derived from `seed`. Errors count as failures.
    pub fn run(&self, seed: u64) -> CheckOutcome {
        let start = Instant::now();
        let (pass, detail) = match (self.run)(RngStream::new(seed, self.id as u64)) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        CheckOutcome {
            id: self.id,
            name: self.name,
            pass,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub fn checks() -> Vec<Check> {
    let c = |id, name, run| Check { id, name, run };
    vec![
        c(1, "G2 closed-form identity", formula_identity as CheckFn),
        c(2, "contour vs Wick oracle", contour_oracle),
        c(3, "series vs closed form", series_consistency),
        c(4, "empirical resolvent covariance", empirical_g2),
        c(5, "CLT for linear statistics", clt),
        c(6, "Poincaré variance bound", poincare),
        c(7, "operator norm tail", tail),
        c(8, "truncation gap", truncation),
        c(9, "Fréchet calculus", frechet),
        c(10, "quadrature robustness", quadrature_robustness),
    ]
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn distance_to_cut(z: Complex64) -> f64 {
    (z.re.abs() - 2.0).max(0.0).hypot(z.im)
}

/// Both forms on every pair of a 20×20 grid of `[-6, 6]²`, away from the
/// cut and the diagonal.
fn formula_identity(_: RngStream) -> Result<(bool, String)> {
    let axis = linspace(-6.0, 6.0, 20);
    let points: Vec<Complex64> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| Complex64::new(x, y)))
        .filter(|&z| distance_to_cut(z) > 0.2)
        .collect();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for &z in &points {
        for &w in &points {
            if (z - w).norm() <= 0.2 {
                continue;
            }
            worst = worst.max((g2_gue_free(z, w)? - g2_gue_ps(z, w)?).norm());
            pairs += 1;
        }
    }
    Ok((worst < 1e-10, format!("max diff {worst:.2e} over {pairs} pairs from {} points", points.len())))
}

fn default_contours(nodes: usize) -> Result<(Contour, Contour)> {
    Ok((
        Contour::circle(0.0, DEFAULT_Z_RADIUS, nodes, DEFAULT_ENCLOSED)?,
        Contour::circle(0.0, DEFAULT_W_RADIUS, nodes, DEFAULT_ENCLOSED)?,
    ))
}

fn contour_oracle(_: RngStream) -> Result<(bool, String)> {
    let table = MomentTable::gue(10)?;
    let (cz, cw) = default_contours(DEFAULT_NODES)?;
    let mut worst: f64 = 0.0;
    let mut anchors = Vec::new();
    for m in 0..=5 {
        for n in 0..=5 {
            let v = rho_via_contour(
                &AnalyticFunction::monomial(m),
                &AnalyticFunction::monomial(n),
                g2_gue_free,
                &cz,
                &cw,
            )?;
            let exact = rho_polynomial_reference(&Polynomial::monomial(m), &Polynomial::monomial(n), &table)?;
            let err = (v - exact).norm();
            worst = worst.max(err);
            if (m, n) == (1, 1) || (m, n) == (2, 2) {
                anchors.push((m, exact, err));
            }
        }
    }
    let anchors_ok = anchors.iter().all(|&(m, exact, err)| exact == m as f64 && err < 1e-7);
    Ok((
        worst < 1e-7 && anchors_ok,
        format!("max |contour - oracle| {worst:.2e} (α11 = 1, α22 = 2 {})", if anchors_ok { "ok" } else { "wrong" }),
    ))
}

fn series_consistency(_: RngStream) -> Result<(bool, String)> {
    let (z, w) = (Complex64::new(4.0, 0.0), Complex64::new(0.0, 4.0));
    let table = MomentTable::gue(12)?;
    let s = g2_series(z, w, 12, &table)?;
    let exact = g2_gue_free(z, w)?;
    let err = (s.value - exact).norm();
    Ok((err <= s.tail_bound, format!("|series - closed| {err:.2e} vs tail bound {:.2e}", s.tail_bound)))
}

fn empirical_g2(stream: RngStream) -> Result<(bool, String)> {
    let (z, w) = (Complex64::new(0.0, 3.0), Complex64::new(2.0, 2.0));
    let spec = EnsembleSpec::gue(256)?;
    let est = g2_empirical(&spec, z, w, 4000, stream)?;
    let exact = g2_gue_free(z, w)?;
    let dev = (est.value - exact).norm();
    Ok((
        dev <= 3.0 * est.stderr && est.stderr < 0.02,
        format!(
            "estimate {:.5}{:+.5}i vs {:.5}{:+.5}i, |dev| {dev:.4} = {:.2} stderr, stderr {:.4}",
            est.value.re,
            est.value.im,
            exact.re,
            exact.im,
            dev / est.stderr,
            est.stderr
        ),
    ))
}

fn clt(stream: RngStream) -> Result<(bool, String)> {
    let (id, x2) = (TestFunction::identity(), TestFunction::monomial(2));
    let spec = EnsembleSpec::gue(16)?;
    let sizes = [16, 64, 256];
    let reports = clt_experiment_many(&[(&id, 1.0), (&x2, 2.0)], &spec, &sizes, 10_000, stream)?;
    let (rid, rx2) = (&reports[0], &reports[1]);
    let ks_ok = rid.rows.iter().all(|r| r.ks_p_value > 0.01);
    let var_ok = rx2.rows.iter().all(|r| (r.variance - 2.0).abs() <= 3.0 * r.variance_stderr);
    let k4_ok = rx2.trend.k4_decreasing;
    let ks: Vec<String> = rid.rows.iter().map(|r| format!("{:.3}", r.ks_p_value)).collect();
    let var: Vec<String> = rx2
        .rows
        .iter()
        .map(|r| format!("{:.3}±{:.3}", r.variance, r.variance_stderr))
        .collect();
    let k4: Vec<String> = rx2.rows.iter().map(|r| format!("{:.3}", r.k4)).collect();
    Ok((
        ks_ok && var_ok && k4_ok,
        format!(
            "id KS p-values [{}]; x² variance [{}]; x² k4 [{}]",
            ks.join(", "),
            var.join(", "),
            k4.join(", ")
        ),
    ))
}

fn poincare(stream: RngStream) -> Result<(bool, String)> {
    let gue = EnsembleSpec::gue(64)?;
    let block = EnsembleSpec::block_gaussian(vec![HermitianMatrix::from_real_diagonal(&[1.0, -1.0])?], 64)?;
    let cases = [
        ("sin/GUE", TestFunction::sin(), &gue),
        ("id/GUE", TestFunction::identity(), &gue),
        ("sin/block", TestFunction::sin(), &block),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (label, f, spec)) in cases.iter().enumerate() {
        let r = poincare_check(f, spec, 10_000, stream.child(i as u64))?;
        pass &= r.pass;
        parts.push(format!(
            "{label} var {:.4}±{:.4} bound {:.3} ratio {:.3}",
            r.variance.value, r.variance.stderr, r.bound, r.ratio
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn tail(stream: RngStream) -> Result<(bool, String)> {
    let gue = tail_fraction(&EnsembleSpec::gue(128)?, 3.0, 10_000, stream.child(0))?;
    let n = 64;
    let signs: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }).collect();
    let alternating: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let additive = EnsembleSpec::additive(
        HermitianMatrix::from_real_diagonal(&signs)?,
        HermitianMatrix::from_real_diagonal(&alternating)?,
    )?;
    let add = tail_fraction(&additive, 2.0, 2000, stream.child(1))?;
    let (e1, e2) = (gue.diagnostics["exceedances"], add.diagnostics["exceedances"]);
    Ok((
        e1 == 0.0 && e2 == 0.0,
        format!(
            "GUE(128) M=3: {e1} of 10000 (max ‖X‖ {:.6}); A+UBU* M=2: {e2} of 2000 (max ‖X‖ {:.6})",
            gue.diagnostics["max_norm"], add.diagnostics["max_norm"]
        ),
    ))
}

fn truncation(stream: RngStream) -> Result<(bool, String)> {
    let sin = TestFunction::sin();
    let r = truncation_gap(&sin, &sin, &EnsembleSpec::gue(8)?, 2.0, 10_000, stream)?;
    Ok((
        r.within_bound,
        format!(
            "gap {:.3e}±{:.1e}, tail {:.4}, bound {:.3}",
            r.gap, r.gap_stderr, r.tail_fraction, r.bound
        ),
    ))
}

/// Composite Simpson rule, the independent 1-D oracle.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let inner: f64 = (1..intervals)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn frechet(stream: RngStream) -> Result<(bool, String)> {
    // Separable kernel F(x)G(y): the integral factors into two Stieltjes integrals.
    let big_f = |x: f64| x * x * x / 3.0;
    let big_g = |y: f64| y.exp();
    let f = |x: f64| x.cos();
    let g = |y: f64| 1.0 / (2.0 + y);
    let u = |x: f64, y: f64| big_f(x) * big_g(y);
    let oracle = simpson(|x| f(x) * x * x, -1.0, 1.0, 20_000) * simpson(|y| g(y) * y.exp(), -1.0, 1.0, 20_000);
    let mesh = FrechetMesh::uniform(1.0, 200, 200, u)?;
    let rows = frechet_integral_refined(
        |x| Complex64::new(f(x), 0.0),
        |y| Complex64::new(g(y), 0.0),
        u,
        &mesh,
        2,
    )?;
    let sep_err = (rows[2].value - oracle).norm();

    let grid = linspace(-1.0, 1.0, 21);
    let xy = FrechetMesh::from_fn(grid.clone(), grid, |x, y| x * y)?;
    let var_xy = frechet_variation(&xy, VariationMode::Exact)?;

    let kernel = FrechetMesh::uniform(2.0, 16, 16, |x, y| (3.0 * x * y).sin() + x * x * y)?;
    let bound_v = frechet_variation(&kernel, VariationMode::UpperBound)?;
    let mut rng = stream.rng();
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let mut random_poly = || {
            let degree = rng.random_range(0..=6);
            Polynomial::new((0..=degree).map(|_| rng.sample(StandardNormal)).collect())
        };
        let (p, q) = (random_poly(), random_poly());
        let sup = |p: &Polynomial| {
            let dense = linspace(-2.0, 2.0, 40_001);
            dense
                .iter()
                .chain(kernel.midpoints_x().iter())
                .map(|&x| p.eval(x).abs())
                .fold(0.0, f64::max)
        };
        let phi = frechet_integral(
            |x| Complex64::new(p.eval(x), 0.0),
            |y| Complex64::new(q.eval(y), 0.0),
            &kernel,
        );
        let limit = sup(&p) * sup(&q) * bound_v;
        if limit > 0.0 {
            worst_ratio = worst_ratio.max(phi.norm() / limit);
        } else if phi.norm() > 0.0 {
            worst_ratio = f64::INFINITY;
        }
    }
    Ok((
        sep_err < 1e-6 && (var_xy - 4.0).abs() < 1e-12 && worst_ratio <= 1.0,
        format!(
            "separable error {sep_err:.2e} at {}×{} cells; variation(xy) {var_xy}; max |Φ|/bound {worst_ratio:.3}",
            rows[2].cells_x, rows[2].cells_y
        ),
    ))
}

fn quadrature_robustness(_: RngStream) -> Result<(bool, String)> {
    let pairs = [
        (AnalyticFunction::exp(), AnalyticFunction::exp()),
        (AnalyticFunction::sin(), AnalyticFunction::cos()),
        (AnalyticFunction::monomial(3), AnalyticFunction::polynomial(&Polynomial::new(vec![0.0, 1.0, 1.0]))),
    ];
    let at_radius = |f: &AnalyticFunction, g: &AnalyticFunction, r: f64, nodes: usize| -> Result<Complex64> {
        let cz = Contour::circle(0.0, r, nodes, DEFAULT_ENCLOSED)?;
        let cw = Contour::circle(0.0, r + 0.5, nodes, DEFAULT_ENCLOSED)?;
        rho_via_contour(f, g, g2_gue_free, &cz, &cw)
    };
    let (mut radius_dev, mut imag, mut asym): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut monotone = true;
    for (f, g) in &pairs {
        let vals: Vec<Complex64> = [2.5, 3.0, 4.0]
            .iter()
            .map(|&r| at_radius(f, g, r, DEFAULT_NODES))
            .collect::<Result<_>>()?;
        for i in 0..3 {
            for j in i + 1..3 {
                radius_dev = radius_dev.max((vals[i] - vals[j]).norm());
            }
            imag = imag.max(vals[i].im.abs());
        }
        let swapped = at_radius(g, f, 3.0, DEFAULT_NODES)?;
        asym = asym.max((vals[1] - swapped).norm());
        let rows = convergence_sweep(|n| at_radius(f, g, 2.5, n), &[32, 64, 128, 256])?;
        monotone &= sweep_is_monotone(&rows, 1e-12);
    }
    Ok((
        radius_dev < 1e-8 && imag < 1e-9 && asym < 1e-9 && monotone,
        format!(
            "radius spread {radius_dev:.2e}, max |Im| {imag:.2e}, asymmetry {asym:.2e}, sweep {}",
            if monotone { "monotone" } else { "not monotone" }
        ),
    ))
}
