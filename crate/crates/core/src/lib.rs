//! # vendi
//!
//! Reference-free diversity scores for embedding sets.
//!
//! Given n embedding vectors, the order-α Vendi score is the exponential of
//! the order-α Rényi entropy of the eigenvalues of the trace-normalized
//! kernel similarity matrix K/n. It behaves like an "effective number of
//! distinct modes" in the sample: n orthogonal points score n, n copies of
//! one point score 1.
//!
//! ## Key Functions
//!
//! | Function | Computes | Cost |
//! |----------|----------|------|
//! | [`scores::vendi_score`] | exp(H_α(K/n)) via full eigendecomposition | O(n³) |
//! | [`scores::rke_score`] | order-2 score 1/‖K/n‖²_F, no eigensolve | O(n²) |
//! | [`scores::truncated_vendi_score`] | score of the top-t eigenvalues after tail redistribution | O(n³) |
//! | [`lowrank::fkea_truncated_vendi`] | random-Fourier-feature estimate of the truncated score | O(n·t²) |
//! | [`lowrank::nystrom_truncated_vendi`] | landmark (Nyström) estimate of the truncated score | O(n·t²) |
//! | [`oracle::population_vendi`] | exact score of a finitely supported distribution | O(m³) |
//! | [`bounds::theoretical_bound`] | concentration-bound calculator for all score variants | O(1) |
//! | [`bounds::monte_carlo_check`] | empirical validation of a bound over seeded trials | — |
//!
//! ## Quick Start
//!
//! ```rust
//! use ndarray::array;
//! use vendi::{EmbeddingMatrix, KernelSpec};
//! use vendi::scores::vendi_score;
//!
//! // Three mutually orthogonal unit vectors: three distinct modes.
//! let e = EmbeddingMatrix::new(array![
//!     [1.0, 0.0, 0.0],
//!     [0.0, 1.0, 0.0],
//!     [0.0, 0.0, 1.0],
//! ]).unwrap();
//!
//! let report = vendi_score(&e, &KernelSpec::Cosine, 1.0).unwrap();
//! assert!((report.score - 3.0).abs() < 1e-9);
//! ```
//!
//! ## Truncation
//!
//! With an infinite-dimensional kernel (Gaussian), the plain Vendi score can
//! keep growing with the sample size and never settle. The t-truncated score
//! keeps the top-t eigenvalues and spreads the discarded tail mass uniformly
//! over them, which is exactly the Euclidean projection of the spectrum onto
//! the probability simplex supported on its top-t coordinates. The truncated
//! score stabilizes with O(t) samples for every kernel, and the FKEA and
//! Nyström estimators converge to it rather than to the untruncated score.
//!
//! ## Determinism
//!
//! Every randomized operation takes an explicit 64-bit seed and derives its
//! draws from a counter-based ChaCha stream in a fixed order, so results are
//! reproducible bit-for-bit for a fixed seed regardless of thread count.
//! Dense eigendecompositions are delegated to LAPACK (`dsyevd`), which is
//! deterministic for a fixed input and BLAS thread count.
//!
//! ## What Can Go Wrong
//!
//! 1. **Bandwidth too small**: every sample counts as its own mode, the score
//!    approaches n and keeps climbing as samples are added.
//! 2. **Bandwidth too large**: everything looks similar, the score pins near 1.
//! 3. **Zero rows with the cosine kernel**: cosine similarity is undefined for
//!    zero vectors; loading rejects rows with near-zero norm instead of
//!    clamping them.
//! 4. **Trusting raw spectra**: eigensolvers return tiny negative eigenvalues
//!    for rank-deficient inputs. Values in [-1e-8, 0) are clamped to zero;
//!    anything below that threshold is reported as a broken kernel.
//! 5. **Comparing scores across kernels**: the score depends on the kernel and
//!    its bandwidth; only compare scores computed with identical settings.
//!
//! ## References
//!
//! - Friedman & Dieng (2023). "The Vendi Score: A Diversity Evaluation Metric
//!   for Machine Learning"
//! - Jalali, Li & Farnia (2023). "An Information-Theoretic Evaluation of
//!   Generative Models in Learning Multi-modal Distributions"
//! - Ospanov et al. (2024). "Towards a Scalable Reference-Free Evaluation of
//!   Generative Models"
//! - Rahimi & Recht (2007). "Random Features for Large-Scale Kernel Machines"
//! - Williams & Seeger (2000). "Using the Nyström Method to Speed Up Kernel
//!   Machines"

// openblas-src selects the system BLAS/LAPACK the `lapack-sys`/`cblas-sys`
// symbols link against; the crate is otherwise unused.
extern crate openblas_src as _openblas_src;

use thiserror::Error;

pub mod bounds;
pub mod harness;
pub mod io;
pub mod kernels;
mod linalg;
pub mod lowrank;
pub mod oracle;
pub mod scores;
pub mod spectra;

pub use kernels::{EmbeddingMatrix, GramMatrix, KernelSpec};
pub use scores::{ScoreMethod, ScoreReport};
pub use spectra::{Spectrum, SpectrumSource, TruncatedSpectrum};

/// Errors for kernel, spectrum, score, and file operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("row {row} has near-zero norm ({norm:.3e}); cosine similarity is undefined")]
    ZeroNormVector { row: usize, norm: f64 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("matrix is not positive semi-definite: eigenvalue {min_eigenvalue:.3e} below -1e-8")]
    NotPsd { min_eigenvalue: f64 },

    #[error("eigensolver failed (LAPACK info = {info})")]
    EigensolverFailure { info: i32 },

    #[error("kernel has no finite-dimensional feature map; use the Gram-matrix path")]
    InfiniteDimensionalKernel,

    #[error("invalid entropy order alpha = {0}: {1}")]
    InvalidAlpha(f64, &'static str),

    #[error("not a probability vector: {0}")]
    NotAProbability(String),

    #[error("method requires a shift-invariant (Gaussian) kernel")]
    ShiftInvariantRequired,

    #[error("all landmark-matrix eigenvalues fall below the pseudo-inverse cutoff")]
    DegenerateLandmarks,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("bad magic bytes {0:?}; not an embedding file")]
    BadMagic([u8; 4]),

    #[error("unsupported embedding file header: version {version}, flags {flags}")]
    UnsupportedHeader { version: u16, flags: u16 },

    #[error("payload length mismatch: header declares {expected} values, file holds {got}")]
    TruncatedPayload { expected: u64, got: u64 },

    #[error("ragged row {row}: expected {expected} columns, found {got}")]
    RaggedRows { row: usize, expected: usize, got: usize },

    #[error("unparseable number {text:?} at row {row}, column {col}")]
    BadNumber { row: usize, col: usize, text: String },

    #[error("sample grid needs {need} rows but the source holds {have}")]
    GridExceedsData { need: usize, have: usize },

    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Set the number of BLAS/LAPACK threads used by dense linear algebra.
///
/// Call before any scoring work; the setting is process-global.
pub fn set_num_threads(n: usize) {
    linalg::set_blas_threads(n);
}

/// Independent ChaCha stream keyed by a master seed and up to three stream
/// coordinates (trial index, grid position, method slot, ...). Streams for
/// different coordinates never overlap, so parallel work derived from them
/// is reproducible regardless of scheduling.
pub(crate) fn derive_rng(seed: u64, a: u64, b: u64, c: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..24].copy_from_slice(&b.to_le_bytes());
    key[24..].copy_from_slice(&c.to_le_bytes());
    rand_chacha::ChaCha8Rng::from_seed(key)
}
