//! JSON matrix file format shared by the CLI, the search persistence layer
//! and the browser demo.
//!
//! Floats are emitted with shortest-round-trip encoding, so save -> load is
//! exact for every finite input.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::MatrixField;
use crate::linalg::Mat;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    /// `[rows, cols]`.
    pub dims: [usize; 2],
    pub field: MatrixField,
    /// Row-major real parts.
    pub re: Vec<f64>,
    /// Row-major imaginary parts; omitted for real matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &Mat) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        if im.iter().all(|&v| v == 0.0) {
            Self {
                dims: [rows, cols],
                field: MatrixField::Real,
                re,
                im: None,
            }
        } else {
            Self {
                dims: [rows, cols],
                field: MatrixField::Complex,
                re,
                im: Some(im),
            }
        }
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        let [rows, cols] = self.dims;
        let len = rows.checked_mul(cols).ok_or_else(|| {
            Error::InvalidArgument("matrix dimensions overflow".into())
        })?;
        if self.re.len() != len {
            return Err(Error::InvalidArgument(format!(
                "re has {} entries, expected {len}",
                self.re.len()
            )));
        }
        if let Some(im) = &self.im {
            if im.len() != len {
                return Err(Error::InvalidArgument(format!(
                    "im has {} entries, expected {len}",
                    im.len()
                )));
            }
        }
        let zero = vec![];
        let im = self.im.as_ref().unwrap_or(&zero);
        if self.re.iter().any(|v| !v.is_finite()) || im.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Mat::from_fn(rows, cols, |i, j| {
            let idx = i * cols + j;
            Complex64::new(self.re[idx], im.get(idx).copied().unwrap_or(0.0))
        }))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{path:?}: {e}")))
    }
}

pub fn load_matrix(path: &Path) -> Result<Mat> {
    MatrixFile::load(path)?.to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_from_parts, mat_from_real};

    #[test]
    fn real_matrices_omit_im() {
        let m = mat_from_real(2, 2, &[1.0, -2.5, 0.125, 3.0]);
        let f = MatrixFile::from_matrix(&m);
        assert_eq!(f.field, MatrixField::Real);
        assert!(f.im.is_none());
        assert_eq!(f.to_matrix().unwrap(), m);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = mat_from_parts(
            2,
            3,
            &[0.1, 1.0 / 3.0, 2e-308, -1.5, 9.99e99, 0.0],
            &[-0.7, 0.0, 1e-12, 2.0, 0.3, 4.5],
        );
        let f = MatrixFile::from_matrix(&m);
        let json = serde_json::to_string(&f).unwrap();
        let back: MatrixFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }

    #[test]
    fn length_and_finiteness_validated() {
        let bad = MatrixFile {
            dims: [2, 2],
            field: MatrixField::Real,
            re: vec![1.0, 2.0, 3.0],
            im: None,
        };
        assert!(bad.to_matrix().is_err());

        let nan = MatrixFile {
            dims: [1, 1],
            field: MatrixField::Real,
            re: vec![f64::NAN],
            im: None,
        };
        assert!(nan.to_matrix().is_err());
    }
}
