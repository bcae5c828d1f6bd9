//! Eigenspectra of normalized kernel and covariance matrices, and the
//! truncate-with-redistribution operator.
//!
//! A trace-normalized PSD matrix has nonnegative eigenvalues summing to 1:
//! a probability vector. All entropy scores consume that vector, so this
//! module is the bridge between matrices and probability models.
//!
//! Truncation keeps the top-t eigenvalues and shifts each by the same
//! constant (1 - S_t)/t so they sum to 1 again. For a sorted spectrum this
//! closed form equals the Euclidean projection onto the probability simplex
//! supported on the top-t coordinates, which is what makes the truncated
//! score stable: projections onto a convex set never expand distances.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::kernels::{EmbeddingMatrix, GramMatrix, KernelSpec};
use crate::{linalg, Error, Result};

/// Eigenvalues in [-NEG_EIG_TOL, 0) are rounding noise and clamped to zero;
/// anything lower means the input was not a kernel matrix.
pub const NEG_EIG_TOL: f64 = 1e-8;

/// Largest matrix order accepted for dense eigendecomposition.
pub const MAX_EIG_ORDER: usize = 20_000;

/// Where a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    Gram,
    Covariance,
    Fkea,
    Nystrom,
    Oracle,
}

/// Descending nonnegative eigenvalue sequence of a trace-normalized PSD
/// matrix.
///
/// `raw_sum` records the eigenvalue sum *before* clamping tiny negatives, so
/// numerical drift away from 1 stays observable; spectra are never silently
/// renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    raw_sum: f64,
    source: SpectrumSource,
}

impl Spectrum {
    /// Build a spectrum from raw eigenvalues (any order); applies the
    /// clamping policy and sorts descending.
    pub fn from_values(values: Vec<f64>, source: SpectrumSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParams("empty spectrum".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row: i, col: 0 });
            }
        }
        let raw_sum = linalg::pairwise_sum(&values);
        let mut values = values;
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v < -NEG_EIG_TOL {
                    return Err(Error::NotPsd { min_eigenvalue: *v });
                }
                *v = 0.0;
            }
        }
        values.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite values"));
        Ok(Self {
            values,
            raw_sum,
            source,
        })
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

    /// Eigenvalue sum before clamping; 1 up to rounding for spectra of
    /// trace-normalized matrices.
    pub fn raw_sum(&self) -> f64 {
        self.raw_sum
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }
}

/// Top-t eigenvalues after uniform tail redistribution; sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpectrum {
    t: usize,
    values: Vec<f64>,
    shift: f64,
}

impl TruncatedSpectrum {
    pub fn t(&self) -> usize {
        self.t
    }

    /// Exactly t values, sorted descending, summing to 1.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The constant (1 - S_t)/t added to each retained eigenvalue.
    pub fn shift(&self) -> f64 {
        self.shift
    }
}

/// Eigendecompose a symmetric PSD matrix and apply the spectrum policy.
pub(crate) fn spectrum_of_psd(a: &ArrayView2<'_, f64>, source: SpectrumSource) -> Result<Spectrum> {
    let n = a.nrows();
    if n > MAX_EIG_ORDER {
        return Err(Error::InvalidParams(format!(
            "matrix order {n} exceeds the dense eigendecomposition cap {MAX_EIG_ORDER}"
        )));
    }
    let values = linalg::symmetric_eigenvalues_desc(a)?;
    Spectrum::from_values(values, source)
}

/// Eigenvalues of a normalized Gram matrix, sorted descending.
pub fn spectrum_from_gram(g: &GramMatrix) -> Result<Spectrum> {
    if !g.is_normalized() {
        return Err(Error::InvalidParams(
            "spectrum_from_gram requires a trace-normalized gram matrix".into(),
        ));
    }
    spectrum_of_psd(&g.entries().view(), SpectrumSource::Gram)
}

/// Eigenvalues of the empirical feature covariance (1/n)ΦᵀΦ for the cosine
/// kernel, whose rows are the unit-normalized embeddings.
///
/// Shares its nonzero eigenvalues with the normalized Gram matrix of the
/// same data, but costs O(n·d² + d³) instead of O(n³) — the cheap route
/// when d < n. Infinite-dimensional kernels have no such finite map.
pub fn spectrum_from_covariance(e: &EmbeddingMatrix, spec: &KernelSpec) -> Result<Spectrum> {
    match spec {
        KernelSpec::Cosine => {}
        KernelSpec::Gaussian { .. } => return Err(Error::InfiniteDimensionalKernel),
    }
    if e.d() > MAX_EIG_ORDER {
        return Err(Error::InvalidParams(format!(
            "embedding dimension {} exceeds the covariance-path cap {MAX_EIG_ORDER}",
            e.d()
        )));
    }
    let phi = e.unit_rows()?;
    let mut cov = linalg::ata(&phi.view());
    cov.mapv_inplace(|v| v / e.n() as f64);
    spectrum_of_psd(&cov.view(), SpectrumSource::Covariance)
}

/// Keep the top-t eigenvalues (zero-padding first when t exceeds the
/// spectrum length) and add the same constant (1 - S_t)/t to each so they
/// sum to 1.
pub fn truncate_spectrum(s: &Spectrum, t: usize) -> Result<TruncatedSpectrum> {
    if t == 0 {
        return Err(Error::InvalidParams("truncation order t must be >= 1".into()));
    }
    let mut values: Vec<f64> = s.values().iter().copied().take(t).collect();
    values.resize(t, 0.0);
    let s_t = linalg::pairwise_sum(&values);
    let shift = (1.0 - s_t) / t as f64;
    for v in values.iter_mut() {
        *v += shift;
    }
    Ok(TruncatedSpectrum { t, values, shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{evaluate_kernel, gram_matrix};
    use ndarray::{array, Array2};

    fn emb(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn diagonal_gram_spectrum() {
        let g = GramMatrix::from_parts(array![[0.5, 0.0], [0.0, 0.5]], true).unwrap();
        let s = spectrum_from_gram(&g).unwrap();
        assert_eq!(s.values(), &[0.5, 0.5]);
        assert!((s.raw_sum() - 1.0).abs() < 1e-12);
        assert_eq!(s.source(), SpectrumSource::Gram);
    }

    #[test]
    fn duplicate_points_give_rank_one_spectrum() {
        let n = 6;
        let e = emb(vec![vec![1.0, 2.0, 3.0]; n]);
        let g = gram_matrix(&KernelSpec::gaussian(1.0).unwrap(), &e, true).unwrap();
        let s = spectrum_from_gram(&g).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-10);
        for v in &s.values()[1..] {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn two_point_gaussian_spectrum_closed_form() {
        let sigma = 0.8;
        let spec = KernelSpec::gaussian(sigma).unwrap();
        let e = emb(vec![vec![0.0, 0.0], vec![1.0, 0.5]]);
        let g = evaluate_kernel(&spec, &[0.0, 0.0], &[1.0, 0.5]).unwrap();
        let gram = gram_matrix(&spec, &e, true).unwrap();
        let s = spectrum_from_gram(&gram).unwrap();
        assert!((s.values()[0] - (1.0 + g) / 2.0).abs() < 1e-12);
        assert!((s.values()[1] - (1.0 - g) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_gram_rejected() {
        let e = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let g = gram_matrix(&KernelSpec::Cosine, &e, false).unwrap();
        assert!(spectrum_from_gram(&g).is_err());
    }

    #[test]
    fn not_psd_detected() {
        // Symmetric, unit-trace, but indefinite: eigenvalues 1.5 and -0.5.
        let m = array![[0.5, 1.0], [1.0, 0.5]];
        let err = spectrum_of_psd(&m.view(), SpectrumSource::Gram).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }

    #[test]
    fn covariance_orthogonal_pair() {
        let e = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let s = spectrum_from_covariance(&e, &KernelSpec::Cosine).unwrap();
        assert!((s.values()[0] - 0.5).abs() < 1e-12);
        assert!((s.values()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn covariance_single_point() {
        let e = emb(vec![vec![1.0, 2.0, -1.0]]);
        let s = spectrum_from_covariance(&e, &KernelSpec::Cosine).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-12);
        assert!(s.values()[1].abs() < 1e-12);
        assert!(s.values()[2].abs() < 1e-12);
    }

    #[test]
    fn covariance_rejects_gaussian() {
        let e = emb(vec![vec![1.0, 0.0]]);
        let err = spectrum_from_covariance(&e, &KernelSpec::gaussian(1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InfiniteDimensionalKernel));
    }

    #[test]
    fn covariance_matches_gram_on_nonzero_eigenvalues() {
        let n = 200;
        let d = 8;
        let mut vals = Vec::with_capacity(n * d);
        let mut state = 123456789u64;
        for _ in 0..n * d {
            // xorshift; plenty for a fixture
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            vals.push((state % 1000) as f64 / 500.0 - 1.0 + 0.001);
        }
        let e = EmbeddingMatrix::new(Array2::from_shape_vec((n, d), vals).unwrap()).unwrap();
        let sg = spectrum_from_gram(&gram_matrix(&KernelSpec::Cosine, &e, true).unwrap()).unwrap();
        let sc = spectrum_from_covariance(&e, &KernelSpec::Cosine).unwrap();
        for i in 0..d {
            assert!(
                (sg.values()[i] - sc.values()[i]).abs() < 1e-8,
                "eigenvalue {i}: {} vs {}",
                sg.values()[i],
                sc.values()[i]
            );
        }
        for v in &sg.values()[d..] {
            assert!(v.abs() < 1e-8);
        }
    }

    #[test]
    fn truncation_example() {
        let s = Spectrum::from_values(vec![0.5, 0.3, 0.2], SpectrumSource::Oracle).unwrap();
        let t = truncate_spectrum(&s, 2).unwrap();
        assert!((t.values()[0] - 0.6).abs() < 1e-15);
        assert!((t.values()[1] - 0.4).abs() < 1e-15);
        assert!((t.shift() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn truncation_at_full_length_is_identity() {
        let s = Spectrum::from_values(vec![0.5, 0.3, 0.2], SpectrumSource::Oracle).unwrap();
        let t = truncate_spectrum(&s, 3).unwrap();
        assert!(t.shift().abs() < 1e-15);
        for (a, b) in t.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn truncation_pads_with_zeros() {
        let s = Spectrum::from_values(vec![1.0], SpectrumSource::Oracle).unwrap();
        let t = truncate_spectrum(&s, 4).unwrap();
        assert_eq!(t.values(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.shift(), 0.0);
    }

    #[test]
    fn truncation_preserves_gaps_and_sums_to_one() {
        let s = Spectrum::from_values(vec![0.4, 0.25, 0.2, 0.1, 0.05], SpectrumSource::Oracle)
            .unwrap();
        let t = truncate_spectrum(&s, 3).unwrap();
        let sum: f64 = t.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
        for i in 0..2 {
            let gap_in = s.values()[i] - s.values()[i + 1];
            let gap_out = t.values()[i] - t.values()[i + 1];
            assert!((gap_in - gap_out).abs() < 1e-12);
        }
        assert!(t.values().iter().all(|&v| v >= t.shift()));
    }

    #[test]
    fn truncation_rejects_t_zero() {
        let s = Spectrum::from_values(vec![1.0], SpectrumSource::Oracle).unwrap();
        assert!(truncate_spectrum(&s, 0).is_err());
    }

    #[test]
    fn clamping_keeps_raw_sum() {
        let s = Spectrum::from_values(vec![1.0, -5e-9], SpectrumSource::Gram).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0]);
        assert!((s.raw_sum() - (1.0 - 5e-9)).abs() < 1e-15);
        let err = Spectrum::from_values(vec![1.0, -1e-6], SpectrumSource::Gram).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }
}
