//! Kernel functions and Gram-matrix construction.
//!
//! Both kernels here are *normalized*: k(x, x) = 1 for every x, so the
//! trace-normalized Gram matrix K/n has unit trace and its eigenvalues form
//! a probability vector — the object every score in this crate consumes.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row norms below this are treated as zero vectors for the cosine kernel.
pub const MIN_ROW_NORM: f64 = 1e-12;

/// Similarity function declaration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// Cosine similarity ⟨x/‖x‖, y/‖y‖⟩; feature dimension equals the
    /// embedding dimension.
    Cosine,
    /// Gaussian (RBF) kernel exp(-‖x-y‖² / 2σ²); no finite feature map.
    Gaussian { sigma: f64 },
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParams(format!(
                "gaussian bandwidth must be a positive finite number, got {sigma}"
            )));
        }
        Ok(KernelSpec::Gaussian { sigma })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Cosine => Ok(()),
            KernelSpec::Gaussian { sigma } => {
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    Err(Error::InvalidParams(format!(
                        "gaussian bandwidth must be a positive finite number, got {sigma}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Cosine => "cosine",
            KernelSpec::Gaussian { .. } => "gaussian",
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match self {
            KernelSpec::Cosine => None,
            KernelSpec::Gaussian { sigma } => Some(*sigma),
        }
    }
}

/// n samples × d coordinates of double-precision embeddings; the raw input
/// to every score.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    values: Array2<f64>,
}

impl EmbeddingMatrix {
    /// Validates shape (n ≥ 1, d ≥ 1) and finiteness of every entry.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidParams(format!(
                "embedding matrix must be non-empty, got {n}x{d}"
            )));
        }
        for ((row, col), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row, col });
            }
        }
        Ok(Self { values })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParams("no embedding rows".into()));
        }
        let d = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: d,
                    got: r.len(),
                });
            }
        }
        let n = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let values = Array2::from_shape_vec((n, d), flat)
            .expect("shape checked above");
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// Rows scaled to unit Euclidean norm, the cosine-kernel feature map.
    ///
    /// Normalization happens once here rather than per pair; a row with norm
    /// below [`MIN_ROW_NORM`] is an error, never silently clamped.
    pub(crate) fn unit_rows(&self) -> Result<Array2<f64>> {
        let mut out = self.values.clone();
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < MIN_ROW_NORM {
                return Err(Error::ZeroNormVector { row: i, norm });
            }
            row.mapv_inplace(|v| v / norm);
        }
        Ok(out)
    }
}

/// Pairwise kernel similarity matrix, optionally divided by n so that the
/// trace is 1.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: Array2<f64>,
    normalized: bool,
}

impl GramMatrix {
    /// Wrap an externally built matrix, checking symmetry (1e-12 absolute)
    /// and, for unnormalized matrices, a unit diagonal.
    pub fn from_parts(entries: Array2<f64>, normalized: bool) -> Result<Self> {
        let (n, m) = entries.dim();
        if n != m || n == 0 {
            return Err(Error::InvalidParams(format!(
                "gram matrix must be square and non-empty, got {n}x{m}"
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (entries[[i, j]] - entries[[j, i]]).abs() > 1e-12 {
                    return Err(Error::InvalidParams(format!(
                        "gram matrix asymmetric at ({i},{j})"
                    )));
                }
            }
            let expect = if normalized { 1.0 / n as f64 } else { 1.0 };
            if (entries[[i, i]] - expect).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "gram diagonal entry {i} is {} (expected {expect})",
                    entries[[i, i]]
                )));
            }
        }
        Ok(Self { entries, normalized })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// Rows ready for raw pairwise evaluation: unit-normalized for cosine,
/// untouched for Gaussian.
pub(crate) fn prepared_points(spec: &KernelSpec, e: &EmbeddingMatrix) -> Result<Array2<f64>> {
    match spec {
        KernelSpec::Cosine => e.unit_rows(),
        KernelSpec::Gaussian { .. } => Ok(e.values().clone()),
    }
}

/// k(x, y) on prepared rows; no validation.
pub(crate) fn kernel_entry(spec: &KernelSpec, x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    match spec {
        KernelSpec::Cosine => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        KernelSpec::Gaussian { sigma } => {
            let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            (-sq / (2.0 * sigma * sigma)).exp()
        }
    }
}

/// Evaluate k(x, y) for one pair of vectors.
pub fn evaluate_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    match spec {
        KernelSpec::Cosine => {
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nx < MIN_ROW_NORM {
                return Err(Error::ZeroNormVector { row: 0, norm: nx });
            }
            if ny < MIN_ROW_NORM {
                return Err(Error::ZeroNormVector { row: 1, norm: ny });
            }
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            Ok(dot / (nx * ny))
        }
        KernelSpec::Gaussian { sigma } => {
            let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok((-sq / (2.0 * sigma * sigma)).exp())
        }
    }
}

/// Build the n×n Gram matrix K[i,j] = k(x_i, x_j).
///
/// The upper triangle is computed entry by entry (a pure per-pair formula,
/// parallel over rows, so the result does not depend on the partitioning)
/// and mirrored. With `normalize`, every entry is divided by n.
pub fn gram_matrix(spec: &KernelSpec, e: &EmbeddingMatrix, normalize: bool) -> Result<GramMatrix> {
    spec.validate()?;
    let n = e.n();
    let scale = if normalize { 1.0 / n as f64 } else { 1.0 };

    // For cosine, normalize rows once so each entry is a plain dot product.
    let points = prepared_points(spec, e)?;

    let mut entries = Array2::<f64>::zeros((n, n));
    let flat = entries
        .as_slice_mut()
        .expect("freshly allocated arrays are contiguous");
    flat.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = points.row(i);
        for j in i..n {
            row[j] = kernel_entry(spec, xi, points.row(j)) * scale;
        }
    });
    for i in 1..n {
        for j in 0..i {
            entries[[i, j]] = entries[[j, i]];
        }
    }
    Ok(GramMatrix {
        entries,
        normalized: normalize,
    })
}
