use num_complex::Complex64;
use serde::Serialize;

use super::estimate::{
    covariance_jackknife, covariance_leave_one_out, jackknife_stderr, replicate, EstimateWithError,
};
use super::kstat::k_statistic;
use super::test_function::TestFunction;
use crate::ensembles::{EnsembleSpec, Spectrum};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const MIN_COVARIANCE_REPLICAS: usize = 100;
pub const MIN_CUMULANT_REPLICAS: usize = 1000;
pub const MIN_TAIL_REPLICAS: usize = 1000;

/// One-sided 99% normal quantile.
const Z99: f64 = 2.326_347_874_040_841;

/// `Tr f(X) = Σ_k f(λ_k)`
pub fn linear_statistic(f: &TestFunction, spectrum: &Spectrum) -> Complex64 {
    spectrum.values().iter().map(|&l| f.eval(l)).sum()
}

/// `Σ_{|λ_k| ≤ m} f(λ_k)`
pub fn truncated_linear_statistic(f: &TestFunction, spectrum: &Spectrum, m: f64) -> Complex64 {
    spectrum
        .values()
        .iter()
        .filter(|l| l.abs() <= m)
        .map(|&l| f.eval(l))
        .sum()
}

/// Linear statistics of several functions evaluated on common draws.
#[derive(Debug, Clone)]
pub struct SampledStatistics {
    /// `values[j][r]` is `Tr f_j(X_r)`.
    pub values: Vec<Vec<Complex64>>,
    /// `‖X_r‖`
    pub norms: Vec<f64>,
}

pub fn sample_statistics(
    fs: &[&TestFunction],
    spec: &EnsembleSpec,
    replicas: usize,
    stream: RngStream,
) -> Result<SampledStatistics> {
    let rows = replicate(replicas, stream, |s| {
        let spectrum = spec.sample_spectrum(s)?;
        let vals: Vec<Complex64> = fs.iter().map(|f| linear_statistic(f, &spectrum)).collect();
        Ok((vals, spectrum.norm()))
    })?;
    let mut values = vec![Vec::with_capacity(replicas); fs.len()];
    let mut norms = Vec::with_capacity(replicas);
    for (vals, norm) in rows {
        for (col, v) in values.iter_mut().zip(vals) {
            col.push(v);
        }
        norms.push(norm);
    }
    Ok(SampledStatistics { values, norms })
}

fn check_replicas(replicas: usize, min: usize, what: &str) -> Result<()> {
    if replicas < min {
        return Err(Error::Configuration(format!(
            "{what} needs at least {min} replicas, got {replicas}"
        )));
    }
    Ok(())
}

fn real_parts(xs: &[Complex64]) -> Vec<f64> {
    xs.iter().map(|z| z.re).collect()
}

/// `Cov(Tr f(X), Tr g(X))` across independent draws, jackknife stderr.
pub fn covariance_mc(
    f: &TestFunction,
    g: &TestFunction,
    spec: &EnsembleSpec,
    replicas: usize,
    stream: RngStream,
) -> Result<EstimateWithError<Complex64>> {
    check_replicas(replicas, MIN_COVARIANCE_REPLICAS, "covariance_mc")?;
    let s = sample_statistics(&[f, g], spec, replicas, stream)?;
    let (cov, se) = covariance_jackknife(&s.values[0], &s.values[1]);
    Ok(EstimateWithError::new(cov, se, replicas, stream))
}

/// Unbiased k-statistic of order `r ∈ {2, 3, 4}` of `Tr f(X)`.
pub fn cumulant_mc(
    f: &TestFunction,
    spec: &EnsembleSpec,
    r: usize,
    replicas: usize,
    stream: RngStream,
) -> Result<EstimateWithError<f64>> {
    if !(2..=4).contains(&r) {
        return Err(Error::InvalidInput(format!("cumulant order must be 2, 3 or 4, got {r}")));
    }
    if !f.real_valued {
        return Err(Error::InvalidInput(format!("{} is not real valued", f.name)));
    }
    let min = if r >= 3 { MIN_CUMULANT_REPLICAS } else { MIN_COVARIANCE_REPLICAS };
    check_replicas(replicas, min, "cumulant_mc")?;
    let s = sample_statistics(&[f], spec, replicas, stream)?;
    let k = k_statistic(&real_parts(&s.values[0]), r);
    Ok(EstimateWithError::new(k.value, k.stderr, replicas, stream))
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareReport {
    pub function: String,
    pub variance: EstimateWithError<f64>,
    /// `K ‖f'‖∞²`
    pub bound: f64,
    /// One-sided 99% upper and lower confidence limits of the variance.
    pub variance_upper: f64,
    pub variance_lower: f64,
    /// `variance_upper / bound`
    pub ratio: f64,
    /// The bound is not rejected at the 1% level: `variance_lower ≤ bound`.
    pub pass: bool,
}

/// Check `Var Tr f(X) ≤ K ‖f'‖∞²`.
pub fn poincare_check(
    f: &TestFunction,
    spec: &EnsembleSpec,
    replicas: usize,
    stream: RngStream,
) -> Result<PoincareReport> {
    let sup = f.sup_deriv_bound.ok_or_else(|| {
        Error::Configuration(format!("{} has no finite bound on its derivative", f.name))
    })?;
    check_replicas(replicas, MIN_COVARIANCE_REPLICAS, "poincare_check")?;
    let s = sample_statistics(&[f], spec, replicas, stream)?;
    let xs = &s.values[0];
    let conj: Vec<Complex64> = xs.iter().map(|z| z.conj()).collect();
    let (var, se) = covariance_jackknife(xs, &conj);
    let variance = EstimateWithError::new(var.re, se, replicas, stream);
    let bound = spec.k_bound() * sup * sup;
    let upper = variance.value + Z99 * se;
    let lower = variance.value - Z99 * se;
    Ok(PoincareReport {
        function: f.name.clone(),
        ratio: if bound > 0.0 { upper / bound } else { f64::INFINITY },
        pass: lower <= bound,
        bound,
        variance_upper: upper,
        variance_lower: lower,
        variance,
    })
}

/// Fraction of draws with `‖X‖ > m`.
///
/// Diagnostics: `exceedances` and `n_pow8_fraction` (`N⁸` times the
/// fraction, `N` the ensemble index).
pub fn tail_fraction(
    spec: &EnsembleSpec,
    m: f64,
    replicas: usize,
    stream: RngStream,
) -> Result<EstimateWithError<f64>> {
    check_replicas(replicas, MIN_TAIL_REPLICAS, "tail_fraction")?;
    let norms = replicate(replicas, stream, |s| Ok(spec.sample_spectrum(s)?.norm()))?;
    let hits = norms.iter().filter(|&&x| x > m).count();
    let p = hits as f64 / replicas as f64;
    let se = (p * (1.0 - p) / replicas as f64).sqrt();
    let n = spec.index_n() as f64;
    Ok(EstimateWithError::new(p, se, replicas, stream)
        .with_diagnostic("exceedances", hits as f64)
        .with_diagnostic("n_pow8_fraction", n.powi(8) * p)
        .with_diagnostic("max_norm", norms.iter().copied().fold(0.0, f64::max)))
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    /// `ρ_N(f, g)`
    pub full: Complex64,
    /// `ρ_N(f_M, g_M)`
    pub truncated: Complex64,
    pub gap: f64,
    pub gap_stderr: f64,
    pub tail_fraction: f64,
    /// `4 ‖f‖∞ ‖g‖∞ N² P(‖X‖ > M)^{1/4}` with the empirical tail.
    pub bound: f64,
    pub within_bound: bool,
    pub replicas: usize,
}

/// Compare `ρ_N(f, g)` with `ρ_N(f_M, g_M)`, `f_M = f·1_{|x|≤M}`, on common
/// draws.
pub fn truncation_gap(
    f: &TestFunction,
    g: &TestFunction,
    spec: &EnsembleSpec,
    m: f64,
    replicas: usize,
    stream: RngStream,
) -> Result<TruncationReport> {
    let (fs, gs) = match (f.sup_bound, g.sup_bound) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Configuration(
                "truncation_gap needs bounded test functions".into(),
            ))
        }
    };
    check_replicas(replicas, MIN_COVARIANCE_REPLICAS, "truncation_gap")?;
    let rows = replicate(replicas, stream, |s| {
        let spectrum = spec.sample_spectrum(s)?;
        Ok([
            linear_statistic(f, &spectrum),
            linear_statistic(g, &spectrum),
            truncated_linear_statistic(f, &spectrum, m),
            truncated_linear_statistic(g, &spectrum, m),
            Complex64::new(if spectrum.norm() > m { 1.0 } else { 0.0 }, 0.0),
        ])
    })?;
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let (full, loo_full) = covariance_leave_one_out(&col(0), &col(1));
    let (trunc, loo_trunc) = covariance_leave_one_out(&col(2), &col(3));
    let loo_gap: Vec<Complex64> = loo_full.iter().zip(&loo_trunc).map(|(a, b)| a - b).collect();
    let gap = (full - trunc).norm();
    let gap_stderr = jackknife_stderr(&loo_gap);
    let tail = rows.iter().filter(|r| r[4].re > 0.0).count() as f64 / replicas as f64;
    let n = spec.dim() as f64;
    let bound = 4.0 * fs * gs * n * n * tail.powf(0.25);
    Ok(TruncationReport {
        full,
        truncated: trunc,
        gap,
        gap_stderr,
        tail_fraction: tail,
        bound,
        within_bound: gap <= bound + 4.0 * gap_stderr,
        replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_gue, eigenvalues, HermitianMatrix};
    use crate::polynomial::Polynomial;

    #[test]
    fn linear_statistic_examples() {
        let s = Spectrum::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(linear_statistic(&TestFunction::identity(), &s).re, 6.0);
        assert_eq!(linear_statistic(&TestFunction::constant(1.0), &s).re, 3.0);
        let x = sample_gue(64, RngStream::new(2, 2)).unwrap();
        let v = linear_statistic(&TestFunction::monomial(2), &eigenvalues(&x).unwrap()).re;
        let direct = x.trace_of_square();
        assert!((v - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn covariance_identity_and_parity() {
        let spec = EnsembleSpec::gue(16).unwrap();
        let s = RngStream::new(21, 0);
        let est = covariance_mc(&TestFunction::identity(), &TestFunction::identity(), &spec, 4000, s)
            .unwrap()
            .real_part();
        assert!(est.within(1.0, 3.0), "{est:?}");
        let est = covariance_mc(&TestFunction::identity(), &TestFunction::monomial(2), &spec, 4000, s)
            .unwrap()
            .real_part();
        assert!(est.within(0.0, 3.0), "{est:?}");
    }

    #[test]
    fn constant_function_has_zero_covariance() {
        let spec = EnsembleSpec::gue(8).unwrap();
        let est = covariance_mc(
            &TestFunction::constant(1.0),
            &TestFunction::sin(),
            &spec,
            200,
            RngStream::new(1, 1),
        )
        .unwrap();
        assert_eq!(est.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bilinearity_and_symmetry_on_common_draws() {
        let spec = EnsembleSpec::gue(10).unwrap();
        let f = TestFunction::sin();
        let g = TestFunction::monomial(2);
        let h = TestFunction::gaussian();
        let (a, b) = (2.0, -0.5);
        let afbg = TestFunction::real(
            "af+bg",
            move |x| a * x.sin() + b * x * x,
            move |x| a * x.cos() + 2.0 * b * x,
        );
        let s = sample_statistics(&[&f, &g, &h, &afbg], &spec, 500, RngStream::new(5, 0)).unwrap();
        let cov = |i: usize, j: usize| covariance_jackknife(&s.values[i], &s.values[j]).0;
        let lhs = cov(3, 2);
        let rhs = cov(0, 2) * a + cov(1, 2) * b;
        assert!((lhs - rhs).norm() < 1e-10);
        assert_eq!(cov(0, 1), cov(1, 0));
    }

    #[test]
    fn trace_cumulants_vanish() {
        let spec = EnsembleSpec::gue(8).unwrap();
        for r in [3, 4] {
            let k = cumulant_mc(&TestFunction::identity(), &spec, r, 5000, RngStream::new(9, r as u64))
                .unwrap();
            assert!(k.within(0.0, 4.0), "r={r}: {k:?}");
        }
        assert!(cumulant_mc(&TestFunction::identity(), &spec, 3, 500, RngStream::new(0, 0)).is_err());
        assert!(cumulant_mc(&TestFunction::identity(), &spec, 5, 5000, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn poincare_identity_is_the_equality_case() {
        let spec = EnsembleSpec::gue(8).unwrap();
        let r = poincare_check(&TestFunction::identity(), &spec, 4000, RngStream::new(3, 3)).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.ratio - 1.0).abs() < 0.15);
        assert!(poincare_check(&TestFunction::monomial(2), &spec, 200, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn tail_examples() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        let b = HermitianMatrix::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        let spec = EnsembleSpec::additive(a, b).unwrap();
        let t = tail_fraction(&spec, 2.0, 1000, RngStream::new(1, 0)).unwrap();
        assert_eq!(t.value, 0.0);
        let t = tail_fraction(&EnsembleSpec::gue(8).unwrap(), 2.0, 2000, RngStream::new(1, 1)).unwrap();
        assert!(t.value > 0.0);
        assert_eq!(t.diagnostics["n_pow8_fraction"], 8f64.powi(8) * t.value);
    }

    #[test]
    fn truncation_examples() {
        let sin = TestFunction::sin();
        let spec = EnsembleSpec::gue(16).unwrap();
        let r = truncation_gap(&sin, &sin, &spec, 3.0, 300, RngStream::new(2, 0)).unwrap();
        assert_eq!(r.tail_fraction, 0.0);
        assert_eq!(r.gap, 0.0);
        let r = truncation_gap(&sin, &sin, &spec, 1e6, 300, RngStream::new(2, 1)).unwrap();
        assert_eq!(r.gap, 0.0);
        let small = EnsembleSpec::gue(8).unwrap();
        let r = truncation_gap(&sin, &sin, &small, 2.0, 2000, RngStream::new(2, 2)).unwrap();
        assert!(r.tail_fraction > 0.0 && r.within_bound, "{r:?}");
        let x2 = TestFunction::polynomial(Polynomial::monomial(2));
        assert!(truncation_gap(&x2, &sin, &small, 2.0, 200, RngStream::new(0, 0)).is_err());
    }
}
