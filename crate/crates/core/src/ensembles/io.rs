//! Matrix dump formats.
//!
//! Binary layout: little-endian `u64` dimension, then `dim²` entries in
//! row-major order, each a `(re, im)` pair of little-endian `f64`.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, HermitianMatrix};
use crate::error::Error;

pub fn write_binary<W: Write>(m: &CMatrix, mut out: W) -> io::Result<()> {
    out.write_all(&(m.dim() as u64).to_le_bytes())?;
    for z in m.as_slice() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> io::Result<CMatrix> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let dim = u64::from_le_bytes(word) as usize;
    let mut data = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        input.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        data.push(Complex64::new(re, im));
    }
    CMatrix::from_row_major(dim, data).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self, Error> {
        let data = j.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        HermitianMatrix::new(CMatrix::from_row_major(j.dim, data)?)
    }
}
