//! Exact population scores for finitely supported distributions.
//!
//! For a distribution over m atoms with probabilities p, the population
//! kernel covariance operator shares its nonzero eigenvalues with the m×m
//! matrix [√(pᵢpⱼ)·k(xᵢ,xⱼ)], so every population Vendi variant has a
//! closed-form spectrum at desk scale. That makes finitely supported
//! distributions the one setting where empirical scores can be checked
//! against their exact limits — which is precisely what the Monte Carlo
//! harness in [`crate::bounds`] does.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kernels::{kernel_entry, EmbeddingMatrix, KernelSpec, MIN_ROW_NORM};
use crate::scores::{renyi_entropy, ScoreMethod, ScoreReport};
use crate::spectra::{spectrum_of_psd, truncate_spectrum, Spectrum, SpectrumSource};
use crate::{Error, Result};

/// Finitely supported distribution: m atoms in R^d with probabilities
/// summing to 1 (within 1e-12). Duplicate atoms are allowed; the kernel
/// merges them semantically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionDoc", into = "DistributionDoc")]
pub struct DiscreteDistribution {
    support: Array2<f64>,
    probs: Vec<f64>,
    label: String,
}

/// Serialized form: support as an array of rows, probs, label.
#[derive(Serialize, Deserialize)]
struct DistributionDoc {
    support: Vec<Vec<f64>>,
    probs: Vec<f64>,
    label: String,
}

impl TryFrom<DistributionDoc> for DiscreteDistribution {
    type Error = Error;

    fn try_from(doc: DistributionDoc) -> Result<Self> {
        let e = EmbeddingMatrix::from_rows(doc.support)?;
        DiscreteDistribution::new(e.values().clone(), doc.probs, doc.label)
    }
}

impl From<DiscreteDistribution> for DistributionDoc {
    fn from(d: DiscreteDistribution) -> Self {
        DistributionDoc {
            support: d.support.rows().into_iter().map(|r| r.to_vec()).collect(),
            probs: d.probs,
            label: d.label,
        }
    }
}

impl DiscreteDistribution {
    pub fn new(support: Array2<f64>, probs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let (m, d) = support.dim();
        if m == 0 || d == 0 {
            return Err(Error::InvalidParams(format!(
                "support must be non-empty, got {m}x{d}"
            )));
        }
        if probs.len() != m {
            return Err(Error::InvalidParams(format!(
                "{m} atoms but {} probabilities",
                probs.len()
            )));
        }
        for ((row, col), v) in support.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row, col });
            }
        }
        let mut sum = 0.0;
        for (i, p) in probs.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "probability {i} is {p}; must be nonnegative"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "probabilities sum to {sum}, not 1 (tolerance 1e-12)"
            )));
        }
        Ok(Self {
            support,
            probs,
            label: label.into(),
        })
    }

    /// Uniform distribution over the given atoms.
    pub fn uniform(support: Array2<f64>, label: impl Into<String>) -> Result<Self> {
        let m = support.nrows();
        if m == 0 {
            return Err(Error::InvalidParams("support must be non-empty".into()));
        }
        let probs = vec![1.0 / m as f64; m];
        Self::new(support, probs, label)
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.support.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // m >= 1 by construction
    }

    /// Atom dimension.
    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn support(&self) -> &Array2<f64> {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Build the m×m matrix [√(pᵢpⱼ)·k(xᵢ,xⱼ)] whose eigenvalues are the
/// nonzero population spectrum, with `weights[i]` standing in for √pᵢ.
fn weighted_kernel_matrix(
    spec: &KernelSpec,
    points: &Array2<f64>,
    weights: &[f64],
) -> Array2<f64> {
    let m = points.nrows();
    let mut out = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        for j in i..m {
            let v = weights[i] * weights[j] * kernel_entry(spec, points.row(i), points.row(j));
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

fn prepared_support(spec: &KernelSpec, d: &DiscreteDistribution) -> Result<Array2<f64>> {
    match spec {
        KernelSpec::Gaussian { .. } => Ok(d.support.clone()),
        KernelSpec::Cosine => {
            let mut out = d.support.clone();
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
}

/// Exact spectrum of the population kernel covariance operator.
///
/// The trace is Σ pᵢ·k(xᵢ,xᵢ) = 1 for a normalized kernel, so the result is
/// a probability vector like every other spectrum in this crate.
pub fn population_spectrum(d: &DiscreteDistribution, spec: &KernelSpec) -> Result<Spectrum> {
    spec.validate()?;
    let points = prepared_support(spec, d)?;
    let weights: Vec<f64> = d.probs.iter().map(|p| p.sqrt()).collect();
    let m = weighted_kernel_matrix(spec, &points, &weights);
    spectrum_of_psd(&m.view(), SpectrumSource::Oracle)
}

/// Exact population Vendi score, optionally truncated at t.
pub fn population_vendi(
    d: &DiscreteDistribution,
    spec: &KernelSpec,
    alpha: f64,
    t: Option<usize>,
) -> Result<ScoreReport> {
    let started = Instant::now();
    let spectrum = population_spectrum(d, spec)?;
    let entropy = match t {
        Some(t) => renyi_entropy(truncate_spectrum(&spectrum, t)?.values(), alpha)?,
        None => renyi_entropy(spectrum.values(), alpha)?,
    };
    Ok(ScoreReport::new(
        ScoreMethod::Oracle,
        spec,
        alpha,
        t,
        None,
        d.len(),
        entropy,
        started,
    ))
}

/// Draw n atom indices i.i.d. from the distribution by inverse CDF.
pub(crate) fn sample_atom_indices(
    d: &DiscreteDistribution,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(d.len());
    let mut acc = 0.0;
    for p in &d.probs {
        acc += p;
        cdf.push(acc);
    }
    let total = *cdf.last().expect("non-empty support");
    (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(0.0..total);
            cdf.partition_point(|&c| c <= u).min(d.len() - 1)
        })
        .collect()
}

/// Draw n i.i.d. samples as an embedding matrix, deterministic per seed.
pub fn sample_from(d: &DiscreteDistribution, n: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if n == 0 {
        return Err(Error::InvalidParams("sample count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = sample_atom_indices(d, n, &mut rng);
    embedding_from_indices(d, &indices)
}

pub(crate) fn embedding_from_indices(
    d: &DiscreteDistribution,
    indices: &[usize],
) -> Result<EmbeddingMatrix> {
    let mut values = Array2::<f64>::zeros((indices.len(), d.dim()));
    for (r, &i) in indices.iter().enumerate() {
        values.row_mut(r).assign(&d.support.row(i));
    }
    EmbeddingMatrix::new(values)
}

/// Spectrum of the normalized Gram matrix of a sample given only its atom
/// counts.
///
/// A sample with counts c over the atoms has the same nonzero Gram
/// eigenvalues as the reduced matrix [√(cᵢcⱼ)/n · k(xᵢ,xⱼ)] over the atoms
/// actually seen — the empirical distribution viewed through
/// [`population_spectrum`]. This turns an O(n³) eigensolve into one sized
/// by the number of distinct atoms, with identical spectra.
pub(crate) fn spectrum_from_atom_counts(
    d: &DiscreteDistribution,
    counts: &[usize],
    n: usize,
    spec: &KernelSpec,
) -> Result<Spectrum> {
    let seen: Vec<usize> = (0..d.len()).filter(|&i| counts[i] > 0).collect();
    let mut points = Array2::<f64>::zeros((seen.len(), d.dim()));
    for (r, &i) in seen.iter().enumerate() {
        points.row_mut(r).assign(&d.support.row(i));
    }
    let points = match spec {
        KernelSpec::Cosine => {
            let mut p = points;
            for (r, mut row) in p.rows_mut().into_iter().enumerate() {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < MIN_ROW_NORM {
                    return Err(Error::ZeroNormVector { row: seen[r], norm });
                }
                row.mapv_inplace(|v| v / norm);
            }
            p
        }
        KernelSpec::Gaussian { .. } => points,
    };
    let weights: Vec<f64> = seen
        .iter()
        .map(|&i| (counts[i] as f64 / n as f64).sqrt())
        .collect();
    let m = weighted_kernel_matrix(spec, &points, &weights);
    spectrum_of_psd(&m.view(), SpectrumSource::Gram)
}
