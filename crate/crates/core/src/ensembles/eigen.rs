//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit-shift QL.

use num_complex::Complex64;

use super::matrix::{CMatrix, HermitianMatrix, Spectrum};
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Elementary reflector `H = I - tau v v^H` with `H^H [alpha; x] = [beta; 0]`,
/// `beta` real. On return `x` holds `v[1..]` (`v[0] = 1`).
pub(crate) fn householder(alpha: Complex64, x: &mut [Complex64]) -> (f64, Complex64) {
    let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if xnorm == 0.0 && alpha.im == 0.0 {
        return (alpha.re, Complex64::new(0.0, 0.0));
    }
    let mag = (alpha.norm_sqr() + xnorm * xnorm).sqrt();
    let beta = if alpha.re >= 0.0 { -mag } else { mag };
    let tau = Complex64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = Complex64::new(1.0, 0.0) / (alpha - beta);
    for z in x.iter_mut() {
        *z *= scale;
    }
    (beta, tau)
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Reflector `k` acts on indices `k+1..n`; `vectors[k]` is its `v`.
    reflectors: Vec<(Complex64, Vec<Complex64>)>,
}

/// `p += s * conj(row)` on split real/imaginary slices.
#[inline]
fn axpy_conj(s: Complex64, row_re: &[f64], row_im: &[f64], p_re: &mut [f64], p_im: &mut [f64]) {
    for (((pr, pi), &x), &y) in p_re.iter_mut().zip(p_im.iter_mut()).zip(row_re).zip(row_im) {
        *pr += s.re * x + s.im * y;
        *pi += s.im * x - s.re * y;
    }
}

/// `row -= a * conj(w) + b * conj(v)`.
#[inline]
fn rank2_row(
    a: Complex64,
    b: Complex64,
    (w_re, w_im): (&[f64], &[f64]),
    (v_re, v_im): (&[f64], &[f64]),
    row_re: &mut [f64],
    row_im: &mut [f64],
) {
    let len = row_re.len();
    let (w_re, w_im, v_re, v_im) = (&w_re[..len], &w_im[..len], &v_re[..len], &v_im[..len]);
    let row_im = &mut row_im[..len];
    for c in 0..len {
        let (wr, wi, vr, vi) = (w_re[c], w_im[c], v_re[c], v_im[c]);
        row_re[c] -= a.re * wr + a.im * wi + b.re * vr + b.im * vi;
        row_im[c] -= a.im * wr - a.re * wi + b.im * vr - b.re * vi;
    }
}

struct Reflector {
    tau: Complex64,
    v: Vec<Complex64>,
    v_re: Vec<f64>,
    v_im: Vec<f64>,
}

impl Reflector {
    fn is_identity(&self) -> bool {
        self.tau.re == 0.0 && self.tau.im == 0.0
    }
}

/// Reflector annihilating column `k` below the subdiagonal, read from row
/// `k` (the column is its conjugate).
fn reflector_from_row(re: &[f64], im: &[f64], n: usize, k: usize) -> (f64, Reflector) {
    let m = n - k - 1;
    let base = k * n + k + 1;
    let mut v: Vec<Complex64> = (0..m)
        .map(|t| Complex64::new(re[base + t], -im[base + t]))
        .collect();
    let (beta, tau) = householder(v[0], &mut v[1..]);
    v[0] = Complex64::new(1.0, 0.0);
    let v_re = v.iter().map(|z| z.re).collect();
    let v_im = v.iter().map(|z| z.im).collect();
    (
        beta,
        Reflector {
            tau,
            v,
            v_re,
            v_im,
        },
    )
}

/// Reduction of a full Hermitian matrix stored as split real/imaginary
/// row-major arrays. Both triangles are kept up to date so every kernel is a
/// contiguous row sweep; the rank-2 update of one step and the
/// matrix-vector product of the next share a single pass over the rows.
fn tridiagonalize(a: &[Complex64], n: usize, keep_reflectors: bool) -> Tridiagonal {
    let mut re: Vec<f64> = a.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = a.iter().map(|z| z.im).collect();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::new();
    if n == 0 {
        return Tridiagonal {
            diag,
            off,
            reflectors,
        };
    }
    let (mut p_re, mut p_im) = (vec![0.0; n], vec![0.0; n]);
    let (mut q_re, mut q_im) = (vec![0.0; n], vec![0.0; n]);

    let mut current = if n > 1 {
        let (beta, h) = reflector_from_row(&re, &im, n, 0);
        off[0] = beta;
        if !h.is_identity() {
            let m = n - 1;
            for c in 0..m {
                let base = (1 + c) * n + 1;
                axpy_conj(h.v[c], &re[base..base + m], &im[base..base + m], &mut p_re[..m], &mut p_im[..m]);
            }
        }
        Some(h)
    } else {
        None
    };

    for k in 0..n.saturating_sub(1) {
        let h = current.take().expect("reflector for every step");
        let m = n - k - 1;
        let lo = k + 1;
        diag[k] = re[k * n + k];
        let active = !h.is_identity();

        if active {
            // w = tau A v - (tau/2)(tau A v)^H v · v
            let mut dot = Complex64::new(0.0, 0.0);
            for t in 0..m {
                let pt = h.tau * Complex64::new(p_re[t], p_im[t]);
                p_re[t] = pt.re;
                p_im[t] = pt.im;
                dot += pt.conj() * h.v[t];
            }
            let shift = -0.5 * h.tau * dot;
            for t in 0..m {
                p_re[t] += shift.re * h.v_re[t] - shift.im * h.v_im[t];
                p_im[t] += shift.re * h.v_im[t] + shift.im * h.v_re[t];
            }
        }

        let update_row = |r: usize, re: &mut [f64], im: &mut [f64], p_re: &[f64], p_im: &[f64]| {
            let base = (lo + r) * n + lo;
            let wr = Complex64::new(p_re[r], p_im[r]);
            let (row_re, row_im) = (&mut re[base..base + m], &mut im[base..base + m]);
            rank2_row(
                h.v[r],
                wr,
                (&p_re[..m], &p_im[..m]),
                (&h.v_re[..m], &h.v_im[..m]),
                row_re,
                row_im,
            );
            row_im[r] = 0.0;
        };

        if active {
            update_row(0, &mut re, &mut im, &p_re, &p_im);
        } else {
            im[lo * n + lo] = 0.0;
        }

        let next = if lo + 1 < n {
            let (beta, g) = reflector_from_row(&re, &im, n, lo);
            off[lo] = beta;
            Some(g)
        } else {
            None
        };
        let next_active = next.as_ref().is_some_and(|g| !g.is_identity());
        q_re[..m].iter_mut().for_each(|x| *x = 0.0);
        q_im[..m].iter_mut().for_each(|x| *x = 0.0);

        for r in 1..m {
            if active {
                update_row(r, &mut re, &mut im, &p_re, &p_im);
            }
            if let (true, Some(g)) = (next_active, next.as_ref()) {
                let base = (lo + r) * n + lo + 1;
                axpy_conj(
                    g.v[r - 1],
                    &re[base..base + m - 1],
                    &im[base..base + m - 1],
                    &mut q_re[..m - 1],
                    &mut q_im[..m - 1],
                );
            }
        }

        if keep_reflectors {
            reflectors.push((h.tau, h.v));
        }
        std::mem::swap(&mut p_re, &mut q_re);
        std::mem::swap(&mut p_im, &mut q_im);
        current = next;
    }
    diag[n - 1] = re[(n - 1) * n + n - 1];
    Tridiagonal {
        diag,
        off,
        reflectors,
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `off[i]` couples
/// `i` and `i+1`. When `z` is given (column-major, `n x n`), the rotations
/// are accumulated into it.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    let mut total = 0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence { iterations: total });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(x: &HermitianMatrix) -> Result<Spectrum> {
    let n = x.dim();
    let mut t = tridiagonalize(x.as_matrix().as_slice(), n, false);
    tridiagonal_ql(&mut t.diag, &mut t.off, None)?;
    Ok(Spectrum::new(t.diag))
}

/// Full decomposition `X = Q diag(λ) Q^H`; columns of the returned matrix
/// are the eigenvectors in the order of the (ascending) spectrum.
pub fn eigen_decomposition(x: &HermitianMatrix) -> Result<(Spectrum, CMatrix)> {
    let n = x.dim();
    let mut t = tridiagonalize(x.as_matrix().as_slice(), n, true);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut t.diag, &mut t.off, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| t.diag[a].total_cmp(&t.diag[b]));

    let mut q = CMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let mut y: Vec<Complex64> = z[src * n..(src + 1) * n]
            .iter()
            .map(|&r| Complex64::new(r, 0.0))
            .collect();
        // y <- H_0 H_1 ... H_{n-2} y
        for (k, (tau, v)) in t.reflectors.iter().enumerate().rev() {
            let seg = &mut y[k + 1..];
            let dot: Complex64 = v.iter().zip(seg.iter()).map(|(vi, yi)| vi.conj() * yi).sum();
            let s = tau * dot;
            for (yi, vi) in seg.iter_mut().zip(v) {
                *yi -= s * vi;
            }
        }
        for (row, val) in y.into_iter().enumerate() {
            q[(row, col)] = val;
        }
    }
    let values = order.iter().map(|&i| t.diag[i]).collect();
    Ok((Spectrum::new(values), q))
}

/// `max(|λ_min|, |λ_max|)`.
pub fn operator_norm(x: &HermitianMatrix) -> Result<f64> {
    Ok(eigenvalues(x)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sampling::sample_gue;
    use crate::rng::RngStream;

    fn herm(rows: &[Vec<f64>]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn diagonal_input() {
        let s = eigenvalues(&herm(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]))
        .unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_swap() {
        let s = eigenvalues(&herm(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert!((s.values()[0] + 1.0).abs() < 1e-15);
        assert!((s.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_two_by_two() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let x = HermitianMatrix::from_upper(2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(1.0, 0.0),
        })
        .unwrap();
        let s = eigenvalues(&x).unwrap();
        assert!(s.values()[0].abs() < 1e-15);
        assert!((s.values()[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_by_one() {
        let s = eigenvalues(&herm(&[vec![-4.5]])).unwrap();
        assert_eq!(s.values(), &[-4.5]);
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&herm(&[vec![-5.0, 0.0], vec![0.0, 2.0]])).unwrap(), 5.0);
        assert_eq!(operator_norm(&HermitianMatrix::identity(7).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn trace_invariance_gue64() {
        let x = sample_gue(64, RngStream::new(11, 0)).unwrap();
        let s = eigenvalues(&x).unwrap();
        let norm = s.norm();
        assert!((s.sum() - x.trace()).abs() <= 1e-10 * norm * 64.0);
        assert!(s.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn backward_error_gue() {
        for &n in &[1usize, 2, 5, 33, 64] {
            let x = sample_gue(n, RngStream::new(3, n as u64)).unwrap();
            let (s, q) = eigen_decomposition(&x).unwrap();
            let lam = CMatrix::from_fn(n, |i, j| {
                if i == j {
                    Complex64::new(s.values()[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let recon = q.matmul(&lam).matmul(&q.adjoint());
            let err = recon.max_abs_diff(x.as_matrix());
            let bound = 10.0 * n as f64 * f64::EPSILON * s.norm().max(1e-300);
            assert!(err <= bound, "n={n}: backward error {err:e} > {bound:e}");
            let orth = q.matmul(&q.adjoint()).max_abs_diff(&CMatrix::identity(n));
            assert!(orth < 10.0 * n as f64 * f64::EPSILON, "n={n}: orthogonality {orth:e}");
        }
    }

    #[test]
    fn eigenvalues_match_decomposition() {
        let x = sample_gue(40, RngStream::new(5, 1)).unwrap();
        let a = eigenvalues(&x).unwrap();
        let (b, _) = eigen_decomposition(&x).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
