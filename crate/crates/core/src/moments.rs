//! Exact GUE trace moments by Wick pairing enumeration.
//!
//! `E[Tr X^m Tr X^n] = Σ_π N^{#cycles(γπ) - (m+n)/2}` where `π` runs over
//! pair partitions of the `m+n` matrix positions and `γ` is the permutation
//! with cycles `(0 … m-1)(m … m+n-1)`. Pairings with no pair crossing the
//! two cycles contribute exactly `E[Tr X^m]·E[Tr X^n]`, so the covariance is
//! the sum over connecting pairings alone. Everything here is integer
//! arithmetic.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::HermitianMatrix;
use crate::error::{Error, Result};

/// Largest `m + n` the enumerator accepts (`15!! = 2 027 025` pairings).
pub const MAX_PAIRING_SIZE: usize = 16;

/// Norm cutoff and Poincaré constant used for the GUE moment bound
/// `|α_{m,n}| ≤ K m n M^{m+n-2}`.
pub const GUE_SERIES_CUTOFF: f64 = 3.0;
pub const GUE_SERIES_CONSTANT: f64 = 1.0;

const FREE: u8 = u8::MAX;

/// A perfect matching of `0..len`, stored as an involution without fixed
/// points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPartition {
    partner: Vec<u8>,
}

impl PairPartition {
    pub fn from_pairs(len: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if len > MAX_PAIRING_SIZE || len % 2 == 1 || pairs.len() * 2 != len {
            return Err(Error::InvalidInput(format!(
                "{} pairs cannot partition {len} points",
                pairs.len()
            )));
        }
        let mut partner = vec![FREE; len];
        for &(i, j) in pairs {
            if i >= len || j >= len || i == j || partner[i] != FREE || partner[j] != FREE {
                return Err(Error::InvalidInput(format!("bad pair ({i}, {j})")));
            }
            partner[i] = j as u8;
            partner[j] = i as u8;
        }
        Ok(Self { partner })
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    #[inline]
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i] as usize
    }

    /// Pairs `(i, j)` with `i < j`, ordered by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter(|&i| i < self.partner(i))
            .map(|i| (i, self.partner(i)))
            .collect()
    }

    /// True if some pair joins `0..m` with `m..len`.
    pub fn connects(&self, m: usize) -> bool {
        (0..m).any(|i| self.partner(i) >= m)
    }

    /// Number of cycles of `γ∘π` for the two-cycle `γ` split at `m`.
    pub fn cycles_with_two_traces(&self, m: usize) -> usize {
        let len = self.len();
        let n = len - m;
        let gamma = |i: usize| {
            if i < m {
                if i + 1 == m {
                    0
                } else {
                    i + 1
                }
            } else if i + 1 == len {
                m
            } else {
                debug_assert!(n > 0);
                i + 1
            }
        };
        let mut seen = 0u32;
        let mut cycles = 0;
        for start in 0..len {
            if seen & (1 << start) != 0 {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while seen & (1 << i) == 0 {
                seen |= 1 << i;
                i = gamma(self.partner(i));
            }
        }
        cycles
    }

    /// Exponent of `N` this pairing contributes to `E[Tr X^m Tr X^{len-m}]`.
    pub fn exponent(&self, m: usize) -> i32 {
        self.cycles_with_two_traces(m) as i32 - (self.len() / 2) as i32
    }
}

/// Streams every pair partition of `0..len` exactly once.
#[derive(Debug)]
pub struct Pairings {
    partner: Vec<u8>,
    stack: Vec<(u8, u8)>,
    started: bool,
    done: bool,
}

impl Pairings {
    fn new(len: usize) -> Self {
        Self {
            partner: vec![FREE; len],
            stack: Vec::with_capacity(len / 2),
            started: false,
            done: len % 2 == 1,
        }
    }

    fn next_free_after(&self, j: usize) -> Option<usize> {
        (j + 1..self.partner.len()).find(|&k| self.partner[k] == FREE)
    }

    fn pair(&mut self, i: usize, j: usize) {
        self.partner[i] = j as u8;
        self.partner[j] = i as u8;
        self.stack.push((i as u8, j as u8));
    }

    fn descend(&mut self) {
        while let Some(i) = self.partner.iter().position(|&p| p == FREE) {
            let j = self.next_free_after(i).expect("even number of free points");
            self.pair(i, j);
        }
    }

    /// Advance in place; returns false when exhausted.
    fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            self.descend();
            return true;
        }
        while let Some((i, j)) = self.stack.pop() {
            let (i, j) = (i as usize, j as usize);
            self.partner[i] = FREE;
            self.partner[j] = FREE;
            if let Some(k) = self.next_free_after(j) {
                self.pair(i, k);
                self.descend();
                return true;
            }
        }
        self.done = true;
        false
    }

    /// Visit every pairing without allocating per item.
    pub fn for_each_ref(mut self, mut f: impl FnMut(&PairPartition)) {
        let mut current = PairPartition {
            partner: Vec::new(),
        };
        while self.advance() {
            current.partner.clone_from(&self.partner);
            f(&current);
        }
    }
}

impl Iterator for Pairings {
    type Item = PairPartition;

    fn next(&mut self) -> Option<PairPartition> {
        self.advance().then(|| PairPartition {
            partner: self.partner.clone(),
        })
    }
}

fn check_cap(total: usize) -> Result<()> {
    if total > MAX_PAIRING_SIZE {
        return Err(Error::Capacity {
            what: "m + n",
            value: total,
            limit: MAX_PAIRING_SIZE,
        });
    }
    Ok(())
}

/// All pair partitions of `m + n` points.
pub fn enumerate_pairings(m: usize, n: usize) -> Result<Pairings> {
    check_cap(m + n)?;
    if (m + n) % 2 == 1 {
        return Err(Error::InvalidInput(format!("m + n = {} is odd", m + n)));
    }
    Ok(Pairings::new(m + n))
}

/// `(len - 1)!!`
pub fn pairing_count(len: usize) -> u64 {
    if len % 2 == 1 {
        return 0;
    }
    (1..len as u64).step_by(2).product()
}

/// Limit of `(1/N) E Tr X^n`: the Catalan number `C_{n/2}` for even `n`.
pub fn semicircle_moment(n: usize) -> f64 {
    catalan_for_moment(n) as f64
}

fn catalan_for_moment(n: usize) -> u64 {
    if n % 2 == 1 {
        return 0;
    }
    let mut c: u64 = 1;
    for k in 0..(n / 2) as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// Polynomial in `1/N`: `coeffs[p]` multiplies `N^{-p}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InversePolynomial {
    pub coeffs: Vec<u64>,
}

impl InversePolynomial {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.first().copied().unwrap_or(0)
    }

    pub fn eval(&self, n: f64) -> f64 {
        // Horner in x = 1/n
        let x = 1.0 / n;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
    }
}

/// Exact `Cov(Tr X^m, Tr X^n)` for GUE(N) as a polynomial in `1/N`.
pub fn gue_trace_covariance_exact(m: usize, n: usize) -> Result<InversePolynomial> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("trace powers must be at least 1".into()));
    }
    check_cap(m + n)?;
    if (m + n) % 2 == 1 {
        return Ok(InversePolynomial::default());
    }
    let mut coeffs = vec![0u64; (m + n) / 2 + 1];
    Pairings::new(m + n).for_each_ref(|p| {
        if p.connects(m) {
            let e = p.exponent(m);
            debug_assert!(e <= 0);
            coeffs[(-e) as usize] += 1;
        }
    });
    while coeffs.len() > 1 && coeffs.last() == Some(&0) {
        coeffs.pop();
    }
    Ok(InversePolynomial { coeffs })
}

/// `α_{m,n}`: number of connecting pairings of genus zero.
pub fn second_order_moment(m: usize, n: usize) -> Result<f64> {
    Ok(gue_trace_covariance_exact(m, n)?.leading() as f64)
}

/// Covariance with each connecting pairing weighted by `weight`. Returns
/// coefficients of `N^{-p}`.
pub fn trace_covariance_weighted(
    m: usize,
    n: usize,
    weight: &dyn Fn(&PairPartition) -> f64,
) -> Result<Vec<f64>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("trace powers must be at least 1".into()));
    }
    check_cap(m + n)?;
    if (m + n) % 2 == 1 {
        return Ok(vec![0.0]);
    }
    let mut coeffs = vec![0.0; (m + n) / 2 + 1];
    Pairings::new(m + n).for_each_ref(|p| {
        if p.connects(m) {
            coeffs[(-p.exponent(m)) as usize] += weight(p);
        }
    });
    Ok(coeffs)
}

/// Pairing weight for `Σ_k A_k ⊗ X_k`: sum over colourings of the pairs
/// (both ends of a pair share the GUE factor `X_k`) of
/// `Tr(A_{k_0}⋯A_{k_{m-1}})·Tr(A_{k_m}⋯A_{k_{m+n-1}})`.
pub fn block_gaussian_weight(
    blocks: &[HermitianMatrix],
    m: usize,
) -> impl Fn(&PairPartition) -> f64 + '_ {
    move |p: &PairPartition| {
        let pairs = p.pairs();
        let r = blocks.len();
        let total = r.pow(pairs.len() as u32);
        let mut colour = vec![0usize; p.len()];
        let mut acc = 0.0;
        for code in 0..total {
            let mut c = code;
            for &(i, j) in &pairs {
                colour[i] = c % r;
                colour[j] = c % r;
                c /= r;
            }
            let t1 = trace_of_word(blocks, &colour[..m]);
            let t2 = trace_of_word(blocks, &colour[m..]);
            acc += (t1 * t2).re;
        }
        acc
    }
}

fn trace_of_word(blocks: &[HermitianMatrix], word: &[usize]) -> Complex64 {
    let mut prod = blocks[word[0]].as_matrix().clone();
    for &k in &word[1..] {
        prod = prod.matmul(blocks[k].as_matrix());
    }
    prod.trace()
}

/// Exact first- and second-order GUE moments up to a total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    max_degree: usize,
    first_order: BTreeMap<usize, u64>,
    second_order: BTreeMap<(usize, usize), u64>,
    finite_n_cov: BTreeMap<(usize, usize), InversePolynomial>,
}

impl MomentTable {
    /// Covers `α_n` for `n ≤ max_degree` and `α_{m,n}` for `m + n ≤ max_degree`.
    pub fn gue(max_degree: usize) -> Result<Self> {
        check_cap(max_degree)?;
        let first_order = (0..=max_degree).map(|n| (n, catalan_for_moment(n))).collect();
        let mut second_order = BTreeMap::new();
        let mut finite_n_cov = BTreeMap::new();
        for m in 1..max_degree {
            for n in m..=(max_degree - m) {
                let poly = gue_trace_covariance_exact(m, n)?;
                second_order.insert((m, n), poly.leading());
                second_order.insert((n, m), poly.leading());
                finite_n_cov.insert((n, m), poly.clone());
                finite_n_cov.insert((m, n), poly);
            }
        }
        Ok(Self {
            max_degree,
            first_order,
            second_order,
            finite_n_cov,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn first(&self, n: usize) -> Option<u64> {
        self.first_order.get(&n).copied()
    }

    /// `α_{m,n}`; zero when either index is zero (constants do not fluctuate).
    pub fn second(&self, m: usize, n: usize) -> Result<u64> {
        if m == 0 || n == 0 {
            return Ok(0);
        }
        self.second_order.get(&(m, n)).copied().ok_or(Error::Capacity {
            what: "m + n",
            value: m + n,
            limit: self.max_degree,
        })
    }

    pub fn covariance_polynomial(&self, m: usize, n: usize) -> Option<&InversePolynomial> {
        self.finite_n_cov.get(&(m, n))
    }

    pub fn to_json(&self) -> MomentTableJson {
        let key = |m: usize, n: usize| format!("{m},{n}");
        MomentTableJson {
            max_degree: self.max_degree,
            first_order: self
                .first_order
                .iter()
                .map(|(n, v)| (n.to_string(), v.to_string()))
                .collect(),
            second_order: self
                .second_order
                .iter()
                .map(|(&(m, n), v)| (key(m, n), v.to_string()))
                .collect(),
            finite_n_cov: self
                .finite_n_cov
                .iter()
                .map(|(&(m, n), p)| (key(m, n), p.coeffs.iter().map(u64::to_string).collect()))
                .collect(),
        }
    }
}

/// JSON layout of a [`MomentTable`]; integers are decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTableJson {
    pub max_degree: usize,
    pub first_order: BTreeMap<String, String>,
    pub second_order: BTreeMap<String, String>,
    /// Coefficients of `N^0, N^-1, N^-2, …`.
    pub finite_n_cov: BTreeMap<String, Vec<String>>,
}

/// Partial sum of the second-order Cauchy transform with a rigorous bound on
/// the discarded terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `Σ_{m,n≥1, m+n≤D} α_{m,n} z^{-m-1} w^{-n-1}` for `|z|, |w| > 3`.
///
/// The tail bound sums `m n M^{m+n-2} |z|^{-m-1} |w|^{-n-1}` over the
/// discarded indices in closed form (product of two geometric-type series
/// minus the retained block).
pub fn g2_series(
    z: Complex64,
    w: Complex64,
    max_total_degree: usize,
    table: &MomentTable,
) -> Result<SeriesValue> {
    let cutoff = GUE_SERIES_CUTOFF;
    if z.norm() <= cutoff || w.norm() <= cutoff {
        return Err(Error::Domain(format!(
            "series needs |z|, |w| > {cutoff}, got |z| = {}, |w| = {}",
            z.norm(),
            w.norm()
        )));
    }
    if max_total_degree > table.max_degree() {
        return Err(Error::Capacity {
            what: "series degree",
            value: max_total_degree,
            limit: table.max_degree(),
        });
    }
    let (zi, wi) = (z.inv(), w.inv());
    let mut value = Complex64::new(0.0, 0.0);
    let a = cutoff / z.norm();
    let b = cutoff / w.norm();
    let mut kept_majorant = 0.0;
    let mut zp = zi * zi; // z^{-m-1} at m = 1
    for m in 1..max_total_degree {
        let mut wp = wi * wi;
        for n in 1..=(max_total_degree - m) {
            let alpha = table.second(m, n)?;
            if alpha != 0 {
                value += zp * wp * alpha as f64;
            }
            kept_majorant += (m as f64) * a.powi(m as i32) * (n as f64) * b.powi(n as i32);
            wp *= wi;
        }
        zp *= zi;
    }
    let full = a / (1.0 - a).powi(2) * (b / (1.0 - b).powi(2));
    let scale = GUE_SERIES_CONSTANT / (cutoff * cutoff * z.norm() * w.norm());
    let tail_bound = (full - kept_majorant).max(0.0) * scale;
    Ok(SeriesValue { value, tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircle_moments() {
        assert_eq!(semicircle_moment(0), 1.0);
        assert_eq!(semicircle_moment(3), 0.0);
        assert_eq!(semicircle_moment(2), 1.0);
        assert_eq!(semicircle_moment(4), 2.0);
        assert_eq!(semicircle_moment(6), 5.0);
        assert_eq!(semicircle_moment(20), 16796.0);
    }

    #[test]
    fn semicircle_moments_match_quadrature() {
        // x = 2 cos θ turns ∫ x^n √(4-x²)/(2π) dx into a smooth periodic
        // integral, which the midpoint rule resolves to rounding.
        for n in 0..=8 {
            let k = 4000;
            let h = std::f64::consts::PI / k as f64;
            let q: f64 = (0..k)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    (2.0 * t.cos()).powi(n as i32) * 4.0 * t.sin().powi(2) / (2.0 * std::f64::consts::PI)
                })
                .sum::<f64>()
                * h;
            assert!((q - semicircle_moment(n)).abs() < 1e-10, "n={n}: {q}");
        }
    }

    #[test]
    fn pairing_counts() {
        for len in [2usize, 4, 6, 8, 10] {
            let got = enumerate_pairings(len / 2, len - len / 2).unwrap().count() as u64;
            assert_eq!(got, pairing_count(len));
        }
        assert_eq!(pairing_count(2), 1);
        assert_eq!(pairing_count(4), 3);
        assert_eq!(pairing_count(8), 105);
    }

    #[test]
    fn pairings_are_distinct_and_perfect() {
        let all: Vec<_> = enumerate_pairings(3, 3).unwrap().collect();
        for p in &all {
            for i in 0..p.len() {
                assert_ne!(p.partner(i), i);
                assert_eq!(p.partner(p.partner(i)), i);
            }
        }
        let mut keys: Vec<_> = all.iter().map(|p| p.pairs()).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 15);
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_pairings(9, 9),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            gue_trace_covariance_exact(10, 8),
            Err(Error::Capacity { .. })
        ));
        assert!(enumerate_pairings(1, 2).is_err());
    }

    #[test]
    fn hand_computed_covariances() {
        let p = gue_trace_covariance_exact(1, 1).unwrap();
        assert_eq!(p.coeffs, vec![1]);
        let p = gue_trace_covariance_exact(2, 2).unwrap();
        assert_eq!(p.coeffs, vec![2]);
        assert!(gue_trace_covariance_exact(1, 2).unwrap().is_zero());
        assert_eq!(second_order_moment(1, 1).unwrap(), 1.0);
        assert_eq!(second_order_moment(2, 2).unwrap(), 2.0);
        assert_eq!(second_order_moment(3, 4).unwrap(), 0.0);
    }

    #[test]
    fn third_power_covariance() {
        // Var Tr X³ = 12 + 3/N² for the GUE
        let p = gue_trace_covariance_exact(3, 3).unwrap();
        assert_eq!(p.coeffs, vec![12, 0, 3]);
        assert_eq!(gue_trace_covariance_exact(1, 3).unwrap().coeffs, vec![3]);
    }

    #[test]
    fn genus_exponents_are_even_and_nonpositive() {
        for total in (2..=12).step_by(2) {
            for m in 1..total {
                let n = total - m;
                enumerate_pairings(m, n).unwrap().for_each_ref(|p| {
                    if p.connects(m) {
                        let e = p.exponent(m);
                        assert!(e <= 0 && e % 2 == 0, "m={m} n={n} e={e}");
                    }
                });
            }
        }
    }

    #[test]
    fn table_symmetry_parity_and_bound() {
        let t = MomentTable::gue(12).unwrap();
        for m in 1..12 {
            for n in 1..=(12 - m) {
                let a = t.second(m, n).unwrap();
                assert_eq!(a, t.second(n, m).unwrap());
                if (m + n) % 2 == 1 {
                    assert_eq!(a, 0);
                }
                let bound = (m * n) as f64 * 3f64.powi((m + n - 2) as i32);
                assert!(a as f64 <= bound, "α_{m},{n} = {a} > {bound}");
            }
        }
        assert_eq!(t.first(4), Some(2));
        assert!(t.second(6, 7).is_err());
    }

    #[test]
    fn table_json_uses_strings() {
        let t = MomentTable::gue(4).unwrap();
        let j = t.to_json();
        assert_eq!(j.second_order["2,2"], "2");
        assert_eq!(j.finite_n_cov["1,3"], vec!["3".to_string()]);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"first_order\":{\"0\":\"1\""));
    }

    #[test]
    fn block_weight_reduces_to_gue_for_unit_block() {
        let one = vec![HermitianMatrix::identity(1).unwrap()];
        let w = block_gaussian_weight(&one, 2);
        let c = trace_covariance_weighted(2, 2, &w).unwrap();
        assert_eq!(c[0], 2.0);
        let w = block_gaussian_weight(&one, 3);
        let c = trace_covariance_weighted(3, 3, &w).unwrap();
        assert_eq!(c, vec![12.0, 0.0, 3.0, 0.0]);
    }

    #[test]
    fn block_weight_for_sign_block() {
        // diag(1,-1) ⊗ X: Tr X^m picks up (1 + (-1)^m)
        let blk = vec![HermitianMatrix::from_real_diagonal(&[1.0, -1.0]).unwrap()];
        let w = block_gaussian_weight(&blk, 2);
        let c = trace_covariance_weighted(2, 2, &w).unwrap();
        assert_eq!(c[0], 8.0);
        let w = block_gaussian_weight(&blk, 1);
        let c = trace_covariance_weighted(1, 1, &w).unwrap();
        assert_eq!(c[0], 0.0);
    }

    #[test]
    fn series_empty_sum_and_symmetry() {
        let t = MomentTable::gue(12).unwrap();
        let z = Complex64::new(4.0, 0.0);
        let w = Complex64::new(0.0, 4.0);
        let s0 = g2_series(z, w, 0, &t).unwrap();
        assert_eq!(s0.value, Complex64::new(0.0, 0.0));
        assert!(s0.tail_bound > 0.0);
        let a = g2_series(z, w, 12, &t).unwrap();
        let b = g2_series(w, z, 12, &t).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.tail_bound < s0.tail_bound);
        assert!(g2_series(Complex64::new(3.0, 0.0), w, 4, &t).is_err());
        assert!(g2_series(z, w, 14, &t).is_err());
    }
}
