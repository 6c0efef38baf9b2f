use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::estimate::{mean, replicate};
use super::kstat::k_statistic;
use super::mc::linear_statistic;
use super::test_function::TestFunction;
use crate::ensembles::{eigenvalues, EnsembleSpec, HermitianMatrix};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const MIN_CLT_REPLICAS: usize = 1000;

/// Distribution summary of the centered statistic at one matrix size.
#[derive(Debug, Clone, Serialize)]
pub struct CltRow {
    pub n: usize,
    pub replicas: usize,
    /// Mean of the pilot batch used for centering.
    pub pilot_mean: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
    pub k3: f64,
    pub k3_stderr: f64,
    pub k4: f64,
    pub k4_stderr: f64,
    /// Kolmogorov–Smirnov distance to `N(0, ρ_target)`.
    pub ks: f64,
    pub ks_p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltTrend {
    /// `|k₃|` at the largest size is below its value at the smallest.
    pub k3_decreasing: bool,
    pub k4_decreasing: bool,
    pub ks_decreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub function: String,
    pub rho_target: f64,
    pub seed: u64,
    pub stream_id: u64,
    pub rows: Vec<CltRow>,
    pub trend: CltTrend,
}

impl CltReport {
    pub fn row(&self, n: usize) -> Option<&CltRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Sample `Tr f(X_N)` at each size and compare the centered law with
/// `N(0, ρ_target)`. Centering uses the mean of an independent pilot batch
/// of the same size.
pub fn clt_experiment(
    f: &TestFunction,
    spec: &EnsembleSpec,
    n_values: &[usize],
    replicas: usize,
    rho_target: f64,
    stream: RngStream,
) -> Result<CltReport> {
    let mut out = clt_experiment_many(&[(f, rho_target)], spec, n_values, replicas, stream)?;
    Ok(out.remove(0))
}

/// [`clt_experiment`] for several functions evaluated on common draws.
pub fn clt_experiment_many(
    targets: &[(&TestFunction, f64)],
    spec: &EnsembleSpec,
    n_values: &[usize],
    replicas: usize,
    stream: RngStream,
) -> Result<Vec<CltReport>> {
    if replicas < MIN_CLT_REPLICAS {
        return Err(Error::Configuration(format!(
            "clt_experiment needs at least {MIN_CLT_REPLICAS} replicas, got {replicas}"
        )));
    }
    if n_values.is_empty() {
        return Err(Error::Configuration("clt_experiment needs at least one size".into()));
    }
    for (f, rho) in targets {
        if !(*rho > 0.0 && rho.is_finite()) {
            return Err(Error::Configuration(format!("rho_target must be positive, got {rho}")));
        }
        if !f.real_valued {
            return Err(Error::InvalidInput(format!("{} is not real valued", f.name)));
        }
    }
    let fs: Vec<&TestFunction> = targets.iter().map(|t| t.0).collect();
    let mut rows: Vec<Vec<CltRow>> = vec![Vec::new(); targets.len()];
    for (i, &n) in n_values.iter().enumerate() {
        let spec_n = spec.with_n(n)?;
        let size_stream = stream.child(i as u64);
        let pilot = sample_real_statistics(&fs, &spec_n, replicas, size_stream.child(0))?;
        let main = sample_real_statistics(&fs, &spec_n, replicas, size_stream.child(1))?;
        for (j, (_, rho)) in targets.iter().enumerate() {
            rows[j].push(summarize(n, &pilot[j], &main[j], *rho));
        }
    }
    Ok(targets
        .iter()
        .zip(rows)
        .map(|((f, rho), rows)| {
            let (first, last) = (&rows[0], &rows[rows.len() - 1]);
            let trend = CltTrend {
                k3_decreasing: last.k3.abs() < first.k3.abs(),
                k4_decreasing: last.k4.abs() < first.k4.abs(),
                ks_decreasing: last.ks < first.ks,
            };
            CltReport {
                function: f.name.clone(),
                rho_target: *rho,
                seed: stream.seed,
                stream_id: stream.stream_id,
                rows,
                trend,
            }
        })
        .collect())
}

/// `Tr f(X)` for each function, one column per function.
///
/// When every function is a polynomial of degree at most two the traces come
/// straight from the matrix entries and no eigendecomposition is needed.
fn sample_real_statistics(
    fs: &[&TestFunction],
    spec: &EnsembleSpec,
    replicas: usize,
    stream: RngStream,
) -> Result<Vec<Vec<f64>>> {
    let quadratic: Option<Vec<[f64; 3]>> = fs
        .iter()
        .map(|f| {
            let p = f.as_polynomial()?;
            (p.degree() <= 2).then(|| {
                let c = p.coeffs();
                [0, 1, 2].map(|k| c.get(k).copied().unwrap_or(0.0))
            })
        })
        .collect();
    let rows = replicate(replicas, stream, |s| {
        let x = spec.sample(s)?;
        Ok(match &quadratic {
            Some(ps) => {
                let traces = [x.dim() as f64, x.trace(), x.trace_of_square()];
                ps.iter().map(|c| c.iter().zip(&traces).map(|(a, t)| a * t).sum()).collect()
            }
            None => from_spectrum(fs, &x)?,
        })
    })?;
    Ok((0..fs.len()).map(|j| rows.iter().map(|r: &Vec<f64>| r[j]).collect()).collect())
}

fn from_spectrum(fs: &[&TestFunction], x: &HermitianMatrix) -> Result<Vec<f64>> {
    let spectrum = eigenvalues(x)?;
    Ok(fs.iter().map(|f| linear_statistic(f, &spectrum).re).collect())
}

fn summarize(n: usize, pilot: &[f64], main: &[f64], rho: f64) -> CltRow {
    let pilot_mean = mean(pilot);
    let centered: Vec<f64> = main.iter().map(|x| x - pilot_mean).collect();
    let m = centered.len() as f64;
    let mu = mean(&centered);
    let k2 = k_statistic(&centered, 2);
    let k3 = k_statistic(&centered, 3);
    let k4 = k_statistic(&centered, 4);
    let ks = ks_statistic(&centered, rho.sqrt());
    CltRow {
        n,
        replicas: main.len(),
        pilot_mean,
        mean: mu,
        mean_stderr: (k2.value / m).sqrt(),
        variance: k2.value,
        variance_stderr: k2.stderr,
        k3: k3.value,
        k3_stderr: k3.stderr,
        k4: k4.value,
        k4_stderr: k4.stderr,
        ks,
        ks_p_value: kolmogorov_p_value(ks, centered.len()),
    }
}

/// `sup_x |F_n(x) - Φ(x/σ)|`
pub fn ks_statistic(xs: &[f64], sigma: f64) -> f64 {
    let normal = Normal::new(0.0, sigma).expect("positive standard deviation");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the one-sample KS statistic, with Stephens'
/// finite-sample correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = d * (sn + 0.12 + 0.11 / sn);
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn kolmogorov_distribution_reference_points() {
        // Asymptotic critical values: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
        let big = 1_000_000_000;
        assert!((kolmogorov_p_value(1.3581 / (big as f64).sqrt(), big) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_p_value(1.6276 / (big as f64).sqrt(), big) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_p_value(0.0, 100), 1.0);
    }

    #[test]
    fn ks_detects_wrong_scale() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = ks_statistic(&xs, 1.0);
        assert!(kolmogorov_p_value(d, xs.len()) > 0.01);
        let d = ks_statistic(&xs, 1.5);
        assert!(kolmogorov_p_value(d, xs.len()) < 1e-6);
    }

    #[test]
    fn trace_is_gaussian() {
        let spec = EnsembleSpec::gue(8).unwrap();
        let r = clt_experiment(&TestFunction::identity(), &spec, &[4, 8], 2000, 1.0, RngStream::new(8, 0))
            .unwrap();
        for row in &r.rows {
            assert!(row.ks_p_value > 0.01, "{row:?}");
            assert!(row.mean.abs() <= 4.0 * row.mean_stderr);
            assert!((row.variance - 1.0).abs() <= 4.0 * row.variance_stderr);
        }
    }

    #[test]
    fn quadratic_fast_path_matches_spectrum() {
        let spec = EnsembleSpec::gue(12).unwrap();
        let f = TestFunction::polynomial(crate::polynomial::Polynomial::new(vec![1.0, -2.0, 0.5]));
        let s = RngStream::new(3, 3);
        let fast = sample_real_statistics(&[&f], &spec, 50, s).unwrap();
        let slow = replicate(50, s, |s| from_spectrum(&[&f], &spec.sample(s)?)).unwrap();
        for (a, b) in fast[0].iter().zip(&slow) {
            assert!((a - b[0]).abs() < 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        let spec = EnsembleSpec::gue(4).unwrap();
        let s = RngStream::new(0, 0);
        let id = TestFunction::identity();
        assert!(matches!(
            clt_experiment(&id, &spec, &[4], 1000, 0.0, s),
            Err(Error::Configuration(_))
        ));
        assert!(clt_experiment(&id, &spec, &[4], 10, 1.0, s).is_err());
    }
}
