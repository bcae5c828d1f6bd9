//! Sub-cubic spectrum estimators: random Fourier features (FKEA) and
//! Nyström landmarks.
//!
//! Both replace the O(n³) eigendecomposition of the n×n Gram matrix with a
//! small eigenproblem whose size is set by the budget parameter t, and both
//! feed the same truncated-score pipeline. Their estimates concentrate
//! around the t-truncated score, not the untruncated one — the truncation
//! is what they are implicitly computing.
//!
//! | Estimator | Small problem | Cost |
//! |-----------|---------------|------|
//! | FKEA      | 2t×2t feature covariance | O(n·t·d + n·t² + t³) |
//! | Nyström   | t×t landmark system      | O(n·t·d + n·t² + t³) |
//!
//! FKEA applies only to shift-invariant kernels (Gaussian here): it draws t
//! frequencies from the kernel's spectral measure and uses the paired
//! cos/sin feature map, whose proxy kernel is unbiased for the true one.
//! Nyström works for any kernel by reconstructing the spectrum from t
//! uniformly sampled landmark columns.

use std::time::Instant;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::kernels::{kernel_entry, prepared_points, EmbeddingMatrix, KernelSpec};
use crate::scores::{renyi_entropy, ScoreMethod, ScoreReport};
use crate::spectra::{spectrum_of_psd, truncate_spectrum, Spectrum, SpectrumSource};
use crate::{linalg, Error, Result};

/// Default relative cutoff for the landmark pseudo-inverse.
pub const DEFAULT_RCOND: f64 = 1e-10;

/// t random Fourier frequencies for the Gaussian kernel with bandwidth
/// `sigma`: rows are i.i.d. N(0, σ⁻²·I) draws in a fixed row-major order,
/// so regeneration from the same (seed, t, d, σ) is bit-identical.
#[derive(Debug, Clone)]
pub struct RffBasis {
    frequencies: Array2<f64>,
    sigma: f64,
    seed: u64,
}

impl RffBasis {
    pub fn t(&self) -> usize {
        self.frequencies.nrows()
    }

    pub fn d(&self) -> usize {
        self.frequencies.ncols()
    }

    pub fn frequencies(&self) -> &Array2<f64> {
        &self.frequencies
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Proxy kernel entry (1/t) Σ cos(ωᵢᵀ(x-y)); its expectation over the
    /// frequency draw is exactly the Gaussian kernel value.
    pub fn proxy_kernel(&self, x: &[f64], y: &[f64]) -> f64 {
        let t = self.t();
        let mut acc = 0.0;
        for i in 0..t {
            let row = self.frequencies.row(i);
            let dot: f64 = row
                .iter()
                .zip(x.iter().zip(y))
                .map(|(w, (a, b))| w * (a - b))
                .sum();
            acc += dot.cos();
        }
        acc / t as f64
    }
}

/// Draw t Gaussian-kernel frequencies, N(0, 1/σ²) per coordinate.
pub fn sample_rff(d: usize, t: usize, sigma: f64, seed: u64) -> Result<RffBasis> {
    if d == 0 || t == 0 {
        return Err(Error::InvalidParams(format!(
            "rff basis needs d >= 1 and t >= 1, got d={d}, t={t}"
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParams(format!(
            "rff bandwidth must be positive and finite, got {sigma}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0 / sigma).expect("validated std");
    let mut frequencies = Array2::<f64>::zeros((t, d));
    for i in 0..t {
        for j in 0..d {
            frequencies[[i, j]] = normal.sample(&mut rng);
        }
    }
    Ok(RffBasis {
        frequencies,
        sigma,
        seed,
    })
}

fn require_gaussian(spec: &KernelSpec) -> Result<f64> {
    match spec {
        KernelSpec::Gaussian { sigma } => Ok(*sigma),
        KernelSpec::Cosine => Err(Error::ShiftInvariantRequired),
    }
}

/// Spectrum estimate from t random Fourier features.
///
/// Builds the n×2t feature matrix Φ with paired columns cos(ωᵢᵀx)/√t and
/// sin(ωᵢᵀx)/√t, then returns the eigenvalues of the 2t×2t covariance
/// (1/n)ΦᵀΦ. The paired features make the trace exactly 1. Never forms the
/// n×n proxy Gram matrix — this is the linear-in-n path.
pub fn fkea_spectrum(
    e: &EmbeddingMatrix,
    spec: &KernelSpec,
    t: usize,
    seed: u64,
) -> Result<Spectrum> {
    let sigma = require_gaussian(spec)?;
    let basis = sample_rff(e.d(), t, sigma, seed)?;
    let n = e.n();

    // projections P = X·Ωᵀ, shape n×t
    let proj = linalg::matmul(&e.values().view(), &basis.frequencies.t());

    let inv_sqrt_t = 1.0 / (t as f64).sqrt();
    let mut phi = Array2::<f64>::zeros((n, 2 * t));
    phi.as_slice_mut()
        .expect("freshly allocated arrays are contiguous")
        .par_chunks_mut(2 * t)
        .enumerate()
        .for_each(|(i, row)| {
            for j in 0..t {
                let (s, c) = proj[[i, j]].sin_cos();
                row[2 * j] = c * inv_sqrt_t;
                row[2 * j + 1] = s * inv_sqrt_t;
            }
        });

    let mut cov = linalg::ata(&phi.view());
    cov.mapv_inplace(|v| v / n as f64);
    spectrum_of_psd(&cov.view(), SpectrumSource::Fkea)
}

/// t distinct sample indices drawn uniformly without replacement.
#[derive(Debug, Clone)]
pub struct LandmarkSet {
    indices: Vec<usize>,
    seed: u64,
    rcond: f64,
}

impl LandmarkSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }
}

/// Sample t of n landmark indices, deterministic for a fixed seed.
pub fn sample_landmarks(n: usize, t: usize, seed: u64, rcond: f64) -> Result<LandmarkSet> {
    if t == 0 || t > n {
        return Err(Error::InvalidParams(format!(
            "landmark count must satisfy 1 <= t <= n, got t={t}, n={n}"
        )));
    }
    if !(rcond >= 0.0) || !rcond.is_finite() {
        return Err(Error::InvalidParams(format!(
            "rcond must be a nonnegative finite number, got {rcond}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = rand::seq::index::sample(&mut rng, n, t).into_vec();
    indices.sort_unstable();
    Ok(LandmarkSet {
        indices,
        seed,
        rcond,
    })
}

/// Spectrum estimate from t Nyström landmarks.
///
/// With landmark set S, W = K[S,S] and C = K[:,S]; the estimate is the
/// eigenvalue set of (1/n)·W^{+/2} CᵀC W^{+/2}, where the pseudo-inverse
/// square root drops W eigenvalues at or below rcond·λ_max(W).
pub fn nystrom_spectrum(
    e: &EmbeddingMatrix,
    spec: &KernelSpec,
    t: usize,
    seed: u64,
    rcond: f64,
) -> Result<Spectrum> {
    spec.validate()?;
    let n = e.n();
    let landmarks = sample_landmarks(n, t, seed, rcond)?;
    let points = prepared_points(spec, e)?;

    // C = K[:, S], n×t
    let mut c = Array2::<f64>::zeros((n, t));
    c.as_slice_mut()
        .expect("freshly allocated arrays are contiguous")
        .par_chunks_mut(t)
        .enumerate()
        .for_each(|(i, row)| {
            let xi = points.row(i);
            for (j, &s) in landmarks.indices().iter().enumerate() {
                row[j] = kernel_entry(spec, xi, points.row(s));
            }
        });

    // W = K[S, S] is the landmark sub-block of C.
    let mut w = Array2::<f64>::zeros((t, t));
    for (i, &s) in landmarks.indices().iter().enumerate() {
        for j in 0..t {
            w[[i, j]] = c[[s, j]];
        }
    }

    let (evals, evecs) = linalg::symmetric_eigen_desc(&w.view())?;
    let lambda_max = evals[0];
    if !(lambda_max > 0.0) {
        return Err(Error::DegenerateLandmarks);
    }
    let cutoff = rcond * lambda_max;
    let kept: Vec<usize> = (0..t).filter(|&i| evals[i] > cutoff && evals[i] > 0.0).collect();
    if kept.is_empty() {
        return Err(Error::DegenerateLandmarks);
    }

    // Target spectrum: (1/n)·W^{+/2} CᵀC W^{+/2} with W^{+/2} = U diag(w^{-1/2}) Uᵀ
    // over the retained pairs. Conjugating by the orthonormal U leaves
    // eigenvalues unchanged, so the k×k covariance of F = C·U·diag(w^{-1/2})
    // has the same nonzero spectrum at lower cost.
    let mut scaled = Array2::<f64>::zeros((t, kept.len()));
    for (col, &i) in kept.iter().enumerate() {
        let inv_sqrt = 1.0 / evals[i].sqrt();
        for r in 0..t {
            scaled[[r, col]] = evecs[[r, i]] * inv_sqrt;
        }
    }
    let f = linalg::matmul(&c.view(), &scaled.view()); // n×k
    let mut m = linalg::ata(&f.view());
    m.mapv_inplace(|v| v / n as f64);
    spectrum_of_psd(&m.view(), SpectrumSource::Nystrom)
}

/// FKEA estimate of the order-α t-truncated Vendi score.
///
/// Keeps the top t of the 2t feature-covariance eigenvalues, redistributes
/// the tail, and exponentiates the entropy.
pub fn fkea_truncated_vendi(
    e: &EmbeddingMatrix,
    spec: &KernelSpec,
    alpha: f64,
    t: usize,
    seed: u64,
) -> Result<ScoreReport> {
    let started = Instant::now();
    let spectrum = fkea_spectrum(e, spec, t, seed)?;
    let truncated = truncate_spectrum(&spectrum, t)?;
    let entropy = renyi_entropy(truncated.values(), alpha)?;
    Ok(ScoreReport::new(
        ScoreMethod::Fkea,
        spec,
        alpha,
        Some(t),
        Some(seed),
        e.n(),
        entropy,
        started,
    ))
}

/// Nyström estimate of the order-α t-truncated Vendi score.
///
/// The Nyström spectrum has at most t entries; truncation zero-pads when it
/// has fewer.
pub fn nystrom_truncated_vendi(
    e: &EmbeddingMatrix,
    spec: &KernelSpec,
    alpha: f64,
    t: usize,
    seed: u64,
    rcond: f64,
) -> Result<ScoreReport> {
    let started = Instant::now();
    let spectrum = nystrom_spectrum(e, spec, t, seed, rcond)?;
    let truncated = truncate_spectrum(&spectrum, t)?;
    let entropy = renyi_entropy(truncated.values(), alpha)?;
    Ok(ScoreReport::new(
        ScoreMethod::Nystrom,
        spec,
        alpha,
        Some(t),
        Some(seed),
        e.n(),
        entropy,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{evaluate_kernel, gram_matrix};
    use crate::spectra::spectrum_from_gram;
    use rand::Rng;

    fn emb(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    fn gaussian(sigma: f64) -> KernelSpec {
        KernelSpec::gaussian(sigma).unwrap()
    }

    fn random_emb(n: usize, d: usize, seed: u64, scale: f64) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-scale..scale)).collect())
            .collect();
        emb(rows)
    }

    #[test]
    fn rff_regeneration_is_bit_identical() {
        let a = sample_rff(3, 10, 0.7, 99).unwrap();
        let b = sample_rff(3, 10, 0.7, 99).unwrap();
        assert_eq!(a.frequencies(), b.frequencies());
        let c = sample_rff(3, 10, 0.7, 100).unwrap();
        assert_ne!(a.frequencies(), c.frequencies());
    }

    #[test]
    fn rff_coordinates_have_the_spectral_measure_moments() {
        // central-limit oracle on the mean and a sample-variance oracle
        let t = 100_000;
        let basis = sample_rff(1, t, 1.0, 7).unwrap();
        let mean: f64 = basis.frequencies().iter().sum::<f64>() / t as f64;
        assert!(mean.abs() <= 0.02, "mean {mean} drifted");

        let basis2 = sample_rff(1, t, 2.0, 8).unwrap();
        let m2: f64 = basis2.frequencies().iter().map(|v| v * v).sum::<f64>() / t as f64;
        let want = 0.25; // variance 1/σ² at σ = 2
        assert!((m2 - want).abs() <= 0.05 * want, "variance {m2} vs {want}");
    }

    #[test]
    fn fkea_on_duplicates_is_rank_one() {
        let e = emb(vec![vec![0.4, -1.0, 2.2]; 12]);
        let s = fkea_spectrum(&e, &gaussian(1.0), 16, 5).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-12);
        for v in &s.values()[1..] {
            assert!(v.abs() < 1e-12);
        }
        let r = fkea_truncated_vendi(&e, &gaussian(1.0), 1.0, 16, 5).unwrap();
        assert!((r.score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fkea_spectrum_has_unit_trace() {
        let e = random_emb(40, 5, 11, 2.0);
        let s = fkea_spectrum(&e, &gaussian(0.9), 32, 3).unwrap();
        assert!((s.raw_sum() - 1.0).abs() < 1e-8);
        assert_eq!(s.len(), 64);
        assert_eq!(s.source(), SpectrumSource::Fkea);
    }

    #[test]
    fn fkea_rejects_cosine() {
        let e = random_emb(8, 3, 1, 1.0);
        assert!(matches!(
            fkea_spectrum(&e, &KernelSpec::Cosine, 4, 0).unwrap_err(),
            Error::ShiftInvariantRequired
        ));
    }

    #[test]
    fn proxy_kernel_tracks_the_gaussian_entry() {
        let t = 256;
        let sigma = 1.3;
        let basis = sample_rff(4, t, sigma, 21).unwrap();
        let spec = gaussian(sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut abs_err = 0.0;
        let pairs = 400;
        for _ in 0..pairs {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let truth = evaluate_kernel(&spec, &x, &y).unwrap();
            abs_err += (basis.proxy_kernel(&x, &y) - truth).abs();
        }
        let mean_err = abs_err / pairs as f64;
        let cap = 3.0 / (t as f64).sqrt();
        assert!(mean_err <= cap, "mean error {mean_err} above {cap}");
    }

    #[test]
    fn fkea_score_reproducible_bit_for_bit() {
        let e = random_emb(30, 4, 2, 1.5);
        let a = fkea_truncated_vendi(&e, &gaussian(1.0), 1.5, 24, 77).unwrap();
        let b = fkea_truncated_vendi(&e, &gaussian(1.0), 1.5, 24, 77).unwrap();
        assert_eq!(a.score.to_bits(), b.score.to_bits());
        assert_eq!(a.seed, Some(77));
    }

    #[test]
    fn nystrom_full_landmarks_match_exact_spectrum() {
        let e = random_emb(60, 4, 4, 1.2);
        let spec = gaussian(1.1);
        let exact = spectrum_from_gram(&gram_matrix(&spec, &e, true).unwrap()).unwrap();
        let nys = nystrom_spectrum(&e, &spec, 60, 9, DEFAULT_RCOND).unwrap();
        for i in 0..60 {
            let want = exact.values()[i];
            let got = nys.values()[i];
            if want > 1e-10 {
                assert!(
                    (got - want).abs() <= 1e-6 * want,
                    "eigenvalue {i}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn nystrom_recovers_low_rank_exactly() {
        // 4 orthonormal atoms, each duplicated 10 times: rank 4.
        let mut rows = Vec::new();
        for i in 0..4 {
            let mut v = vec![0.0; 4];
            v[i] = 1.0;
            for _ in 0..10 {
                rows.push(v.clone());
            }
        }
        let e = emb(rows);
        let spec = gaussian(0.8);
        let exact = spectrum_from_gram(&gram_matrix(&spec, &e, true).unwrap()).unwrap();
        let nys = nystrom_spectrum(&e, &spec, 20, 13, DEFAULT_RCOND).unwrap();
        for i in 0..nys.len() {
            assert!(
                (nys.values()[i] - exact.values()[i]).abs() < 1e-8,
                "eigenvalue {i}"
            );
        }
    }

    #[test]
    fn nystrom_on_duplicates_is_rank_one() {
        let e = emb(vec![vec![1.0, 1.0]; 9]);
        let s = nystrom_spectrum(&e, &gaussian(1.0), 3, 0, DEFAULT_RCOND).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-10);
        for v in &s.values()[1..] {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn nystrom_orthogonal_modes_score_their_count() {
        let k = 5;
        let mut rows = Vec::new();
        for i in 0..k {
            let mut v = vec![0.0; k];
            v[i] = 3.0;
            for _ in 0..6 {
                rows.push(v.clone());
            }
        }
        let e = emb(rows);
        // bandwidth small enough that distinct modes are orthogonal in kernel space
        let r = nystrom_truncated_vendi(&e, &gaussian(0.5), 1.0, 15, 3, DEFAULT_RCOND).unwrap();
        assert!((r.score - k as f64).abs() < 1e-6, "score {}", r.score);
    }

    #[test]
    fn degenerate_cutoff_reported() {
        let e = random_emb(10, 2, 6, 1.0);
        // rcond > 1 pushes the cutoff above λ_max, so nothing survives
        let err = nystrom_spectrum(&e, &gaussian(1.0), 4, 0, 2.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateLandmarks));
    }

    #[test]
    fn landmark_validation() {
        assert!(sample_landmarks(5, 0, 0, 1e-10).is_err());
        assert!(sample_landmarks(5, 6, 0, 1e-10).is_err());
        assert!(sample_landmarks(5, 5, 0, f64::NAN).is_err());
        let l = sample_landmarks(100, 10, 42, 1e-10).unwrap();
        let l2 = sample_landmarks(100, 10, 42, 1e-10).unwrap();
        assert_eq!(l.indices(), l2.indices());
        let mut sorted = l.indices().to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), 10, "indices distinct");
    }
}
