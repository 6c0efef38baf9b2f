use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::eigen::householder;
use super::matrix::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::rng::RngStream;

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn fill_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let diag_sd = (1.0 / n as f64).sqrt();
    let off_sd = (0.5 / n as f64).sqrt();
    HermitianMatrix::from_upper(n, |i, j| {
        if i == j {
            Complex64::new(diag_sd * normal(rng), 0.0)
        } else {
            let re = normal(rng);
            let im = normal(rng);
            Complex64::new(off_sd * re, off_sd * im)
        }
    })
}

/// GUE(n): real diagonal with variance `1/n`, complex off-diagonal with
/// independent real and imaginary parts of variance `1/(2n)`.
pub fn sample_gue(n: usize, stream: RngStream) -> Result<HermitianMatrix> {
    fill_gue(n, &mut stream.rng())
}

pub(crate) fn validate_blocks(blocks: &[HermitianMatrix]) -> Result<usize> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidInput("block Gaussian needs at least one block".into()))?;
    let d = first.dim();
    if let Some(bad) = blocks.iter().position(|b| b.dim() != d) {
        return Err(Error::InvalidInput(format!(
            "block {bad} has dimension {} but block 0 has {d}",
            blocks[bad].dim()
        )));
    }
    if let Some(bad) = blocks.iter().position(|b| !b.is_exactly_hermitian()) {
        return Err(Error::InvalidInput(format!("block {bad} is not Hermitian")));
    }
    Ok(d)
}

/// `Σ_k A_k ⊗ X_k` with independent GUE(n) draws `X_k`; dimension `d·n`.
pub fn sample_block_gaussian(
    blocks: &[HermitianMatrix],
    n: usize,
    stream: RngStream,
) -> Result<HermitianMatrix> {
    let d = validate_blocks(blocks)?;
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut rng = stream.rng();
    let draws = blocks
        .iter()
        .map(|_| fill_gue(n, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    HermitianMatrix::from_upper(d * n, |row, col| {
        let (a, i) = (row / n, row % n);
        let (b, j) = (col / n, col % n);
        blocks
            .iter()
            .zip(&draws)
            .map(|(blk, x)| blk[(a, b)] * x[(i, j)])
            .sum()
    })
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the columns
/// of `Q` rephased so that `R` has a positive real diagonal.
pub fn sample_haar_unitary(n: usize, stream: RngStream) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut rng = stream.rng();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // column-major Ginibre draw
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re = normal(&mut rng);
                    let im = normal(&mut rng);
                    Complex64::new(scale * re, scale * im)
                })
                .collect()
        })
        .collect();

    let mut reflectors = Vec::with_capacity(n);
    let mut r_diag = Vec::with_capacity(n);
    for k in 0..n {
        let (head, tail) = cols.split_at_mut(k + 1);
        let col = &mut head[k];
        let alpha = col[k];
        let (beta, tau) = householder(alpha, &mut col[k + 1..]);
        let mut v = Vec::with_capacity(n - k);
        v.push(Complex64::new(1.0, 0.0));
        v.extend_from_slice(&col[k + 1..]);
        // apply H^H to the remaining columns
        for c in tail.iter_mut() {
            let seg = &mut c[k..];
            let dot: Complex64 = v.iter().zip(seg.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
            let s = tau.conj() * dot;
            for (ci, vi) in seg.iter_mut().zip(&v) {
                *ci -= s * vi;
            }
        }
        r_diag.push(beta);
        reflectors.push((tau, v));
    }

    // Q = H_0 ... H_{n-1}; column j of U is Q e_j times sign(R_jj).
    let mut u = CMatrix::zeros(n);
    for j in 0..n {
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        y[j] = Complex64::new(1.0, 0.0);
        for (k, (tau, v)) in reflectors.iter().enumerate().rev() {
            let seg = &mut y[k..];
            let dot: Complex64 = v.iter().zip(seg.iter()).map(|(vi, yi)| vi.conj() * yi).sum();
            let s = tau * dot;
            for (yi, vi) in seg.iter_mut().zip(v) {
                *yi -= s * vi;
            }
        }
        let phase = r_diag[j].signum();
        for (i, yi) in y.into_iter().enumerate() {
            u[(i, j)] = yi * phase;
        }
    }
    Ok(u)
}

/// `A + U B U^*` with `U` Haar. When `B = c·I` the product is skipped, so
/// the result is exact.
pub fn sample_additive(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    stream: RngStream,
) -> Result<HermitianMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "additive model needs equal dimensions, got {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let n = a.dim();
    if let Some(c) = b.as_scalar() {
        return HermitianMatrix::from_upper(n, |i, j| {
            if i == j {
                a[(i, i)] + c
            } else {
                a[(i, j)]
            }
        });
    }
    let u = sample_haar_unitary(n, stream)?;
    let rotated = u.matmul(b.as_matrix()).matmul(&u.adjoint());
    let rotated = HermitianMatrix::hermitize(&rotated)?;
    a.add(&rotated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::eigen::operator_norm;

    fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn zero_dimension_rejected() {
        let s = RngStream::new(0, 0);
        assert_eq!(sample_gue(0, s), Err(Error::InvalidDimension(0)));
        assert!(sample_haar_unitary(0, s).is_err());
        let blk = vec![HermitianMatrix::identity(1).unwrap()];
        assert!(sample_block_gaussian(&blk, 0, s).is_err());
    }

    #[test]
    fn gue_is_exactly_hermitian_and_replayable() {
        let s = RngStream::new(99, 4);
        let a = sample_gue(17, s).unwrap();
        assert!(a.is_exactly_hermitian());
        assert_eq!(a, sample_gue(17, s).unwrap());
        assert_ne!(a, sample_gue(17, s.child(1)).unwrap());
    }

    #[test]
    fn gue_one_by_one_variance() {
        // Var of a N(0,1) sample; the variance estimate has stderr sqrt(2/n).
        let root = RngStream::new(1, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|r| sample_gue(1, root.replica(r)).unwrap()[(0, 0)].re)
            .collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (v, se) = mean_and_stderr(&sq);
        assert!((v - 1.0).abs() <= 3.0 * se, "var {v} se {se}");
    }

    #[test]
    fn trace_variance_is_one() {
        let root = RngStream::new(2, 0);
        for &n in &[3usize, 10] {
            let sq: Vec<f64> = (0..20_000)
                .map(|r| sample_gue(n, root.child(n as u64).replica(r)).unwrap().trace().powi(2))
                .collect();
            let (v, se) = mean_and_stderr(&sq);
            assert!((v - 1.0).abs() <= 3.0 * se, "n={n} var {v} se {se}");
        }
    }

    #[test]
    fn block_identity_matches_gue_law() {
        let blk = vec![HermitianMatrix::identity(1).unwrap()];
        let s = RngStream::new(8, 8);
        let x = sample_block_gaussian(&blk, 12, s).unwrap();
        // one block consumes the stream exactly as sample_gue does
        assert_eq!(x, sample_gue(12, s).unwrap());
    }

    #[test]
    fn block_traceless_has_zero_trace() {
        let blk = vec![HermitianMatrix::from_real_diagonal(&[1.0, -1.0]).unwrap()];
        let x = sample_block_gaussian(&blk, 64, RngStream::new(4, 2)).unwrap();
        assert_eq!(x.dim(), 128);
        assert!(x.is_exactly_hermitian());
        let scale: f64 = (0..128).map(|i| x[(i, i)].re.abs()).sum();
        assert!(x.trace().abs() <= 1e-12 * scale);
    }

    #[test]
    fn block_rejects_bad_input() {
        let s = RngStream::new(0, 0);
        let a = HermitianMatrix::identity(2).unwrap();
        let b = HermitianMatrix::identity(3).unwrap();
        assert!(matches!(
            sample_block_gaussian(&[a, b], 4, s),
            Err(Error::InvalidInput(_))
        ));
        assert!(sample_block_gaussian(&[], 4, s).is_err());
    }

    #[test]
    fn haar_is_unitary() {
        let u = sample_haar_unitary(64, RngStream::new(5, 5)).unwrap();
        let err = u.matmul(&u.adjoint()).max_abs_diff(&CMatrix::identity(64));
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn haar_one_by_one_is_uniform_phase() {
        let root = RngStream::new(6, 0);
        let n = 100_000;
        let zs: Vec<Complex64> = (0..n)
            .map(|r| sample_haar_unitary(1, root.replica(r)).unwrap()[(0, 0)])
            .collect();
        assert!(zs.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        let re: Vec<f64> = zs.iter().map(|z| z.re).collect();
        let im: Vec<f64> = zs.iter().map(|z| z.im).collect();
        for xs in [re, im] {
            let (m, se) = mean_and_stderr(&xs);
            assert!(m.abs() <= 3.0 * se, "mean {m} se {se}");
        }
    }

    #[test]
    fn haar_entry_second_moment() {
        let root = RngStream::new(7, 0);
        let xs: Vec<f64> = (0..20_000)
            .map(|r| sample_haar_unitary(16, root.replica(r)).unwrap()[(0, 0)].norm_sqr())
            .collect();
        let (m, se) = mean_and_stderr(&xs);
        assert!((m - 1.0 / 16.0).abs() <= 3.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn haar_phase_corrected_diagonal_is_not_biased() {
        // Without phase correction the diagonal of Q is biased toward the
        // negative real axis by the Householder sign convention.
        let root = RngStream::new(70, 0);
        let xs: Vec<f64> = (0..20_000)
            .map(|r| sample_haar_unitary(4, root.replica(r)).unwrap()[(0, 0)].re)
            .collect();
        let (m, se) = mean_and_stderr(&xs);
        assert!(m.abs() <= 4.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn additive_special_cases() {
        let s = RngStream::new(9, 0);
        let a = sample_gue(8, s).unwrap();
        let zero = HermitianMatrix::zeros(8).unwrap();
        assert_eq!(sample_additive(&a, &zero, s.child(1)).unwrap(), a);

        let id = HermitianMatrix::identity(8).unwrap();
        let two = HermitianMatrix::from_real_diagonal(&[2.0; 8]).unwrap();
        assert_eq!(sample_additive(&id, &id, s.child(2)).unwrap(), two);

        assert!(sample_additive(&a, &HermitianMatrix::zeros(3).unwrap(), s).is_err());
    }

    #[test]
    fn additive_norm_bound() {
        let n = 12;
        let a = HermitianMatrix::from_real_diagonal(
            &(0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>(),
        )
        .unwrap();
        let b = HermitianMatrix::from_real_diagonal(
            &(0..n).map(|i| (i as f64 / (n - 1) as f64) * 2.0 - 1.0).collect::<Vec<_>>(),
        )
        .unwrap();
        let root = RngStream::new(10, 0);
        for r in 0..200 {
            let x = sample_additive(&a, &b, root.replica(r)).unwrap();
            assert!(x.is_exactly_hermitian());
            assert!(operator_norm(&x).unwrap() <= 2.0 + 1e-12);
        }
    }
}
