//! Fisher's unbiased k-statistics from power sums.

use serde::Serialize;

use super::estimate::{jackknife_stderr, mean};

/// Power sums `S_1 … S_4` of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PowerSums {
    pub n: f64,
    pub s: [f64; 4],
}

impl PowerSums {
    pub fn from_slice(xs: &[f64]) -> Self {
        let mut out = Self::default();
        for &x in xs {
            out.push(x);
        }
        out
    }

    pub fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.n += 1.0;
        self.s[0] += x;
        self.s[1] += x2;
        self.s[2] += x2 * x;
        self.s[3] += x2 * x2;
    }

    pub fn merge(&self, other: &Self) -> Self {
        let mut s = self.s;
        for (a, b) in s.iter_mut().zip(other.s) {
            *a += b;
        }
        Self {
            n: self.n + other.n,
            s,
        }
    }

    /// Sums with one observation removed.
    pub fn without(&self, x: f64) -> Self {
        let x2 = x * x;
        Self {
            n: self.n - 1.0,
            s: [
                self.s[0] - x,
                self.s[1] - x2,
                self.s[2] - x2 * x,
                self.s[3] - x2 * x2,
            ],
        }
    }

    /// Unbiased k-statistic of order `r ∈ {1, 2, 3, 4}`; NaN when the sample
    /// is too small.
    pub fn k(&self, r: usize) -> f64 {
        let n = self.n;
        let [s1, s2, s3, s4] = self.s;
        match r {
            1 => s1 / n,
            2 if n >= 2.0 => (n * s2 - s1 * s1) / (n * (n - 1.0)),
            3 if n >= 3.0 => {
                (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0))
            }
            4 if n >= 4.0 => {
                (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2
                    - 3.0 * n * (n - 1.0) * s2 * s2
                    - 4.0 * n * (n + 1.0) * s1 * s3
                    + n * n * (n + 1.0) * s4)
                    / (n * (n - 1.0) * (n - 2.0) * (n - 3.0))
            }
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KStatistic {
    pub order: usize,
    pub value: f64,
    pub stderr: f64,
}

/// k-statistic of order `r` with jackknife standard error. The sample is
/// centred first; k-statistics of order ≥ 2 are shift invariant.
pub fn k_statistic(xs: &[f64], r: usize) -> KStatistic {
    let shift = if r >= 2 { mean(xs) } else { 0.0 };
    let centred: Vec<f64> = xs.iter().map(|x| x - shift).collect();
    let sums = PowerSums::from_slice(&centred);
    let loo: Vec<f64> = centred.iter().map(|&x| sums.without(x).k(r)).collect();
    let value = sums.k(r);
    KStatistic {
        order: r,
        value,
        stderr: jackknife_stderr(&loo),
    }
}
