use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Dense complex Hermitian matrix.
///
/// Symmetry is exact: `entries[j][i]` is bitwise the conjugate of
/// `entries[i][j]` and the diagonal has zero imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    /// Validate exact Hermitian symmetry.
    pub fn new(inner: CMatrix) -> Result<Self> {
        let n = inner.dim();
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        for i in 0..n {
            if inner[(i, i)].im != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry ({i},{i}) has nonzero imaginary part"
                )));
            }
            for j in (i + 1)..n {
                if inner[(j, i)] != inner[(i, j)].conj() {
                    return Err(Error::InvalidInput(format!(
                        "entry ({j},{i}) is not the conjugate of ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { inner })
    }

    /// Build from the upper triangle (including the diagonal); the lower
    /// triangle is mirrored and the diagonal's imaginary part dropped.
    pub fn from_upper(dim: usize, mut upper: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(upper(i, i).re, 0.0);
            for j in (i + 1)..dim {
                let v = upper(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        Ok(Self { inner: m })
    }

    /// Project an arbitrary square matrix onto exact Hermitian symmetry by
    /// averaging with its adjoint.
    pub fn hermitize(m: &CMatrix) -> Result<Self> {
        Self::from_upper(m.dim(), |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_upper(diag.len(), |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::new(CMatrix::from_row_major(n, data)?)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_real_diagonal(&vec![0.0; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).sum()
    }

    /// Tr(X²) straight from the entries: the squared Frobenius norm.
    pub fn trace_of_square(&self) -> f64 {
        self.inner.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// If the matrix is `c·I`, return `c`.
    pub fn as_scalar(&self) -> Option<f64> {
        let n = self.dim();
        let c = self.inner[(0, 0)].re;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { c } else { 0.0 };
                let v = self.inner[(i, j)];
                if v.re != expected || v.im != 0.0 {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Self::from_upper(self.dim(), |i, j| self.inner[(i, j)] + other.inner[(i, j)])
    }

    pub fn is_exactly_hermitian(&self) -> bool {
        Self::new(self.inner.clone()).is_ok()
    }
}

impl std::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

/// Eigenvalues of one draw, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts the input.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.total_cmp(b));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// max |λ|
    pub fn norm(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.min().abs().max(self.max().abs())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}
