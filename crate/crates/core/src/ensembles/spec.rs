use serde::{Deserialize, Serialize};

use super::eigen::operator_norm;
use super::matrix::{HermitianMatrix, Spectrum};
use super::sampling::{sample_additive, sample_block_gaussian, sample_gue, validate_blocks};
use super::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const DEFAULT_GUE_CUTOFF: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Ensemble {
    Gue { n: usize },
    BlockGaussian { blocks: Vec<HermitianMatrix>, n: usize },
    AdditivePerturbation { a: HermitianMatrix, b: HermitianMatrix },
}

/// A sampleable ensemble together with its norm cutoff `M` (draws with
/// `‖X‖ > M` are rare) and Poincaré constant `K`
/// (`Var Tr f(X) ≤ K ‖f'‖∞²`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    ensemble: Ensemble,
    m_bound: f64,
    k_bound: f64,
}

impl EnsembleSpec {
    pub fn gue(n: usize) -> Result<Self> {
        Self::gue_with_cutoff(n, DEFAULT_GUE_CUTOFF)
    }

    pub fn gue_with_cutoff(n: usize, m_bound: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if m_bound.is_nan() || m_bound <= 2.0 {
            return Err(Error::InvalidInput(format!(
                "GUE cutoff must exceed 2, got {m_bound}"
            )));
        }
        Ok(Self {
            ensemble: Ensemble::Gue { n },
            m_bound,
            k_bound: 1.0,
        })
    }

    pub fn block_gaussian(blocks: Vec<HermitianMatrix>, n: usize) -> Result<Self> {
        validate_blocks(&blocks)?;
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let r = blocks.len() as f64;
        let max_norm = blocks
            .iter()
            .map(operator_norm)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let d = blocks[0].dim();
        let sum_sq = blocks.iter().try_fold(HermitianMatrix::zeros(d)?, |acc, b| {
            acc.add(&HermitianMatrix::hermitize(&b.as_matrix().matmul(b.as_matrix()))?)
        })?;
        let sum_sq_norm = operator_norm(&sum_sq)?;
        Ok(Self {
            ensemble: Ensemble::BlockGaussian { blocks, n },
            m_bound: 4.0 * r * max_norm,
            k_bound: r * r * sum_sq_norm * sum_sq_norm,
        })
    }

    pub fn additive(a: HermitianMatrix, b: HermitianMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::InvalidInput(format!(
                "additive model needs equal dimensions, got {} and {}",
                a.dim(),
                b.dim()
            )));
        }
        let t = operator_norm(&a)?.max(operator_norm(&b)?);
        Ok(Self {
            ensemble: Ensemble::AdditivePerturbation { a, b },
            m_bound: 2.0 * t,
            k_bound: 4.0 * t * t,
        })
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    /// Matrix size of a draw.
    pub fn dim(&self) -> usize {
        match &self.ensemble {
            Ensemble::Gue { n } => *n,
            Ensemble::BlockGaussian { blocks, n } => blocks[0].dim() * n,
            Ensemble::AdditivePerturbation { a, .. } => a.dim(),
        }
    }

    /// The ensemble index `N`: the GUE size for the Gaussian models, the
    /// matrix size for the additive model.
    pub fn index_n(&self) -> usize {
        match &self.ensemble {
            Ensemble::Gue { n } | Ensemble::BlockGaussian { n, .. } => *n,
            Ensemble::AdditivePerturbation { a, .. } => a.dim(),
        }
    }

    /// Same ensemble at a different GUE size. The additive model has fixed
    /// matrices, so it only accepts its own dimension.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        match &self.ensemble {
            Ensemble::Gue { .. } => Self::gue_with_cutoff(n, self.m_bound),
            Ensemble::BlockGaussian { blocks, .. } => {
                if n == 0 {
                    return Err(Error::InvalidDimension(0));
                }
                Ok(Self {
                    ensemble: Ensemble::BlockGaussian {
                        blocks: blocks.clone(),
                        n,
                    },
                    ..self.clone()
                })
            }
            Ensemble::AdditivePerturbation { a, .. } if a.dim() == n => Ok(self.clone()),
            Ensemble::AdditivePerturbation { a, .. } => Err(Error::InvalidInput(format!(
                "additive model is fixed at dimension {}, cannot resize to {n}",
                a.dim()
            ))),
        }
    }

    pub fn sample(&self, stream: RngStream) -> Result<HermitianMatrix> {
        match &self.ensemble {
            Ensemble::Gue { n } => sample_gue(*n, stream),
            Ensemble::BlockGaussian { blocks, n } => sample_block_gaussian(blocks, *n, stream),
            Ensemble::AdditivePerturbation { a, b } => sample_additive(a, b, stream),
        }
    }

    pub fn sample_spectrum(&self, stream: RngStream) -> Result<Spectrum> {
        eigenvalues(&self.sample(stream)?)
    }

    pub fn descriptor(&self) -> EnsembleDescriptor {
        match &self.ensemble {
            Ensemble::Gue { n } => EnsembleDescriptor::Gue {
                n: *n,
                cutoff: Some(self.m_bound),
            },
            Ensemble::BlockGaussian { blocks, n } => EnsembleDescriptor::BlockGaussian {
                blocks: blocks.iter().map(MatrixDescriptor::from_matrix).collect(),
                n: *n,
            },
            Ensemble::AdditivePerturbation { a, b } => EnsembleDescriptor::Additive {
                a: MatrixDescriptor::from_matrix(a),
                b: MatrixDescriptor::from_matrix(b),
            },
        }
    }
}

/// Serializable description of a Hermitian matrix: either a real diagonal
/// or full rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixDescriptor {
    Diagonal(Vec<f64>),
    Rows(Vec<Vec<[f64; 2]>>),
}

impl MatrixDescriptor {
    pub fn build(&self) -> Result<HermitianMatrix> {
        match self {
            MatrixDescriptor::Diagonal(d) => HermitianMatrix::from_real_diagonal(d),
            MatrixDescriptor::Rows(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidInput("matrix rows must be square".into()));
                }
                let data = rows
                    .iter()
                    .flatten()
                    .map(|&[re, im]| num_complex::Complex64::new(re, im))
                    .collect();
                HermitianMatrix::new(super::matrix::CMatrix::from_row_major(n, data)?)
            }
        }
    }

    pub fn from_matrix(m: &HermitianMatrix) -> Self {
        let n = m.dim();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() == 0.0));
        if diagonal {
            MatrixDescriptor::Diagonal((0..n).map(|i| m[(i, i)].re).collect())
        } else {
            MatrixDescriptor::Rows(
                (0..n)
                    .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect(),
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleDescriptor {
    Gue {
        n: usize,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    BlockGaussian {
        blocks: Vec<MatrixDescriptor>,
        n: usize,
    },
    Additive {
        a: MatrixDescriptor,
        b: MatrixDescriptor,
    },
}

impl EnsembleDescriptor {
    pub fn build(&self) -> Result<EnsembleSpec> {
        match self {
            EnsembleDescriptor::Gue { n, cutoff } => {
                EnsembleSpec::gue_with_cutoff(*n, cutoff.unwrap_or(DEFAULT_GUE_CUTOFF))
            }
            EnsembleDescriptor::BlockGaussian { blocks, n } => EnsembleSpec::block_gaussian(
                blocks.iter().map(|b| b.build()).collect::<Result<_>>()?,
                *n,
            ),
            EnsembleDescriptor::Additive { a, b } => EnsembleSpec::additive(a.build()?, b.build()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gue_bounds() {
        let s = EnsembleSpec::gue(10).unwrap();
        assert_eq!(s.m_bound(), 3.0);
        assert_eq!(s.k_bound(), 1.0);
        assert!(EnsembleSpec::gue_with_cutoff(10, 2.0).is_err());
        assert!(EnsembleSpec::gue(0).is_err());
    }

    #[test]
    fn block_bounds() {
        let a1 = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]).unwrap();
        let s = EnsembleSpec::block_gaussian(vec![a1.clone()], 4).unwrap();
        assert_eq!(s.m_bound(), 4.0);
        assert_eq!(s.k_bound(), 1.0);
        assert_eq!(s.dim(), 8);

        let a2 = HermitianMatrix::from_real_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let s = EnsembleSpec::block_gaussian(vec![a1, a2], 4).unwrap();
        // r = 2, max‖A_k‖ = 2, ΣA_k² = diag(5,5)
        assert!((s.m_bound() - 16.0).abs() < 1e-12);
        assert!((s.k_bound() - 4.0 * 25.0).abs() < 1e-9);
    }

    #[test]
    fn additive_bounds() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, -0.5]).unwrap();
        let b = HermitianMatrix::from_real_diagonal(&[0.25, -3.0]).unwrap();
        let s = EnsembleSpec::additive(a, b).unwrap();
        assert_eq!(s.m_bound(), 6.0);
        assert_eq!(s.k_bound(), 36.0);
        assert!(s.with_n(3).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let json = r#"{"kind":"block_gaussian","blocks":[{"diagonal":[1.0,-1.0]}],"n":16}"#;
        let d: EnsembleDescriptor = serde_json::from_str(json).unwrap();
        let spec = d.build().unwrap();
        assert_eq!(spec.dim(), 32);
        assert_eq!(spec.descriptor(), d);
    }
}
