//! JSON matrix files: `{"dims": [...], "cut": k, "real": [[...]], "imag": [[...]]}`.
//!
//! Rows are stored row-major. Floats are written with the shortest
//! representation that parses back to the identical `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::linalg::{CMat, C64};
use crate::operator::{BipartiteOperator, FactorSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub cut: usize,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMat, dims: Vec<usize>, cut: usize) -> Self {
        let real = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
            .collect();
        let imag = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
            .collect();
        Self {
            dims,
            cut,
            real,
            imag,
        }
    }

    pub fn from_operator(op: &BipartiteOperator) -> Self {
        Self::from_matrix(op.matrix(), op.space().dims().to_vec(), op.cut())
    }

    /// Rebuilds the complex matrix, checking that both blocks are square and
    /// of equal shape.
    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.real.len();
        if self.imag.len() != n {
            return Err(SepError::Parse(format!(
                "real block has {n} rows, imag block has {}",
                self.imag.len()
            )));
        }
        for (i, (r, im)) in self.real.iter().zip(&self.imag).enumerate() {
            if r.len() != n || im.len() != n {
                return Err(SepError::Parse(format!("row {i} is not of length {n}")));
            }
        }
        Ok(CMat::from_fn(n, n, |i, j| {
            C64::new(self.real[i][j], self.imag[i][j])
        }))
    }

    pub fn to_operator(&self, tol_herm: f64) -> Result<BipartiteOperator> {
        let space = FactorSpace::new(self.dims.clone())?;
        BipartiteOperator::new(self.to_matrix()?, space, self.cut, tol_herm)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SepError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix file serializes")
    }
}

/// Pure state vector file: `{"real": [...], "imag": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

impl VectorFile {
    pub fn to_vector(&self) -> Result<crate::linalg::CVec> {
        if self.real.len() != self.imag.len() {
            return Err(SepError::Parse("real and imag lengths differ".into()));
        }
        Ok(crate::linalg::CVec::from_iterator(
            self.real.len(),
            self.real
                .iter()
                .zip(&self.imag)
                .map(|(&r, &i)| C64::new(r, i)),
        ))
    }
}
