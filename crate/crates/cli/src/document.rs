//! JSON document format for bi-graded complexes.
//!
//! Complex scalars are stored as `[re, im]` pairs; matrices as row-major
//! nested arrays. `d[j]` maps degree `j` to `j + 1` and has shape
//! `dims[j+1] x dims[j]`; `dstar[j]` maps degree `j + 1` to `j`. When
//! `dstar` is omitted it is built as `h^-1 d^H h` from the (optionally
//! supplied, default identity) per-degree Hermitian weights.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use torsionlab_core::bicomplex::BiGradedComplex;
use torsionlab_core::CMatrix;

pub type MatrixData = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexDocument {
    pub top_degree: usize,
    pub dims: Vec<usize>,
    pub d: Vec<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dstar: Option<Vec<MatrixData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Vec<MatrixData>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

fn matrix_from_data(data: &MatrixData, rows: usize, cols: usize, what: &str) -> Result<CMatrix, String> {
    if data.len() != rows {
        return Err(format!("{what}: expected {rows} rows, found {}", data.len()));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            ));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(data[i][j][0], data[i][j][1])
    }))
}

pub fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ComplexDocument {
    pub fn from_complex(x: &BiGradedComplex, metadata: BTreeMap<String, String>) -> Self {
        Self {
            top_degree: x.top_degree(),
            dims: x.dims().to_vec(),
            d: x.d_maps().iter().map(matrix_to_data).collect(),
            dstar: Some(x.dstar_maps().iter().map(matrix_to_data).collect()),
            weight: None,
            metadata,
        }
    }

    /// Shape-level validation and conversion. Errors here are input errors
    /// (exit code 2), not check failures.
    pub fn to_complex(&self) -> Result<BiGradedComplex, String> {
        let n = self.top_degree;
        if self.dims.len() != n + 1 {
            return Err(format!(
                "dims has {} entries, expected top_degree + 1 = {}",
                self.dims.len(),
                n + 1
            ));
        }
        if self.d.len() != n {
            return Err(format!("d has {} matrices, expected {n}", self.d.len()));
        }
        let mut d = Vec::with_capacity(n);
        for j in 0..n {
            d.push(matrix_from_data(
                &self.d[j],
                self.dims[j + 1],
                self.dims[j],
                &format!("d[{j}]"),
            )?);
        }
        let weights = match &self.weight {
            Some(w) => {
                if w.len() != n + 1 {
                    return Err(format!(
                        "weight has {} matrices, expected {}",
                        w.len(),
                        n + 1
                    ));
                }
                let mut parsed = Vec::with_capacity(n + 1);
                for (j, data) in w.iter().enumerate() {
                    parsed.push(matrix_from_data(
                        data,
                        self.dims[j],
                        self.dims[j],
                        &format!("weight[{j}]"),
                    )?);
                }
                Some(parsed)
            }
            None => None,
        };
        let dstar = match &self.dstar {
            Some(ds) => {
                if ds.len() != n {
                    return Err(format!("dstar has {} matrices, expected {n}", ds.len()));
                }
                let mut parsed = Vec::with_capacity(n);
                for j in 0..n {
                    parsed.push(matrix_from_data(
                        &ds[j],
                        self.dims[j],
                        self.dims[j + 1],
                        &format!("dstar[{j}]"),
                    )?);
                }
                parsed
            }
            None => {
                // h_j^{-1} d_j^H h_{j+1} per degree pair.
                let mut parsed = Vec::with_capacity(n);
                for j in 0..n {
                    let adj = d[j].adjoint();
                    let built = match &weights {
                        Some(w) => {
                            let inv = w[j].clone().try_inverse().ok_or_else(|| {
                                format!("weight[{j}] is singular")
                            })?;
                            inv * adj * &w[j + 1]
                        }
                        None => adj,
                    };
                    parsed.push(built);
                }
                parsed
            }
        };
        BiGradedComplex::new(self.dims.clone(), d, dstar).map_err(|e| e.to_string())
    }

    /// Canonical serialized form; parsing and re-serializing a canonical
    /// document reproduces it byte for byte.
    pub fn canonical_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("serializable document");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_term_doc() -> ComplexDocument {
        ComplexDocument {
            top_degree: 1,
            dims: vec![1, 1],
            d: vec![vec![vec![[2.0, 0.0]]]],
            dstar: Some(vec![vec![vec![[3.0, 0.0]]]]),
            weight: None,
            metadata: BTreeMap::new(),
        }
    }

    #[test]
    fn canonical_round_trip_is_bit_identical() {
        let doc = two_term_doc();
        let canon = doc.canonical_json();
        let parsed: ComplexDocument = serde_json::from_str(&canon).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.canonical_json(), canon);
    }

    #[test]
    fn dstar_defaults_to_adjoint() {
        let mut doc = two_term_doc();
        doc.dstar = None;
        let x = doc.to_complex().unwrap();
        assert_eq!(x.dstar_maps()[0][(0, 0)], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn mismatched_dims_rejected() {
        let mut doc = two_term_doc();
        doc.dims = vec![1, 2];
        assert!(doc.to_complex().is_err());
    }
}
