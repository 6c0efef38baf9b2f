use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::rng::RngStream;

/// Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateWithError<T> {
    pub value: T,
    pub stderr: f64,
    pub replicas: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl<T> EstimateWithError<T> {
    pub fn new(value: T, stderr: f64, replicas: usize, stream: RngStream) -> Self {
        Self {
            value,
            stderr,
            replicas,
            seed: stream.seed,
            stream_id: stream.stream_id,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with_diagnostic(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

impl EstimateWithError<f64> {
    /// `|value - target| ≤ k·stderr`
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

impl EstimateWithError<Complex64> {
    pub fn real_part(&self) -> EstimateWithError<f64> {
        EstimateWithError {
            value: self.value.re,
            stderr: self.stderr,
            replicas: self.replicas,
            seed: self.seed,
            stream_id: self.stream_id,
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.value - target).norm() <= k * self.stderr
    }
}

/// Run `f` once per replica on its own child stream. Order of the output
/// matches replica index regardless of scheduling.
pub fn replicate<T, F>(replicas: usize, stream: RngStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(RngStream) -> Result<T> + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| f(stream.replica(r)))
        .collect()
}

pub(crate) trait Field:
    Copy
    + Send
    + Sync
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Mul<f64, Output = Self>
    + std::ops::Div<f64, Output = Self>
{
    fn zero() -> Self;
    fn abs_sqr(self) -> f64;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
}

pub(crate) fn mean<T: Field>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |a, &b| a + b) / xs.len() as f64
}

/// Jackknife standard error from leave-one-out estimates.
pub(crate) fn jackknife_stderr<T: Field>(leave_one_out: &[T]) -> f64 {
    let n = leave_one_out.len() as f64;
    let bar = mean(leave_one_out);
    let ss: f64 = leave_one_out.iter().map(|&t| (t - bar).abs_sqr()).sum();
    ((n - 1.0) / n * ss).sqrt()
}

/// Bilinear sample covariance `Σ (a-ā)(b-b̄)/(n-1)` with jackknife stderr.
pub(crate) fn covariance_jackknife<T: Field>(a: &[T], b: &[T]) -> (T, f64) {
    let (cov, loo) = covariance_leave_one_out(a, b);
    (cov, jackknife_stderr(&loo))
}

/// Sample covariance and its leave-one-out replicates.
pub(crate) fn covariance_leave_one_out<T: Field>(a: &[T], b: &[T]) -> (T, Vec<T>) {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    assert!(n >= 3, "covariance needs at least three samples");
    let (ma, mb) = (mean(a), mean(b));
    let da: Vec<T> = a.iter().map(|&x| x - ma).collect();
    let db: Vec<T> = b.iter().map(|&x| x - mb).collect();
    let sa = da.iter().fold(T::zero(), |s, &x| s + x);
    let sb = db.iter().fold(T::zero(), |s, &x| s + x);
    let sab = da.iter().zip(&db).fold(T::zero(), |s, (&x, &y)| s + x * y);
    let nf = n as f64;
    let cov = (sab - sa * sb / nf) / (nf - 1.0);
    let m = nf - 1.0;
    let loo = da
        .iter()
        .zip(&db)
        .map(|(&x, &y)| {
            let (sa_i, sb_i, sab_i) = (sa - x, sb - y, sab - x * y);
            (sab_i - sa_i * sb_i / m) / (m - 1.0)
        })
        .collect();
    (cov, loo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_of_known_data() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        let (c, _) = covariance_jackknife(&a, &b);
        assert!((c - 10.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn jackknife_of_mean_is_classical_stderr() {
        // For the mean the jackknife reproduces s/√n exactly.
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let n = xs.len() as f64;
        let total: f64 = xs.iter().sum();
        let loo: Vec<f64> = xs.iter().map(|x| (total - x) / (n - 1.0)).collect();
        let m = total / n;
        let s2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((jackknife_stderr(&loo) - (s2 / n).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn replicate_is_ordered_and_deterministic() {
        let s = RngStream::new(3, 0);
        let a = replicate(64, s, |r| Ok(r.stream_id)).unwrap();
        let b = replicate(64, s, |r| Ok(r.stream_id)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[5], s.replica(5).stream_id);
    }
}
