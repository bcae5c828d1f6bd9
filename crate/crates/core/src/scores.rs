//! Rényi entropies of spectra and the Vendi / RKE / truncated Vendi scores.
//!
//! All entropies use the natural logarithm, so `entropy` fields are in nats;
//! the scores exponentiate, which makes the base irrelevant to them.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::kernels::{gram_matrix, EmbeddingMatrix, KernelSpec};
use crate::spectra::{
    spectrum_from_covariance, spectrum_from_gram, truncate_spectrum, Spectrum,
};
use crate::{linalg, Error, Result};

/// Orders within this distance of 1 take the Shannon branch; the generic
/// formula divides by 1-α and would cancel catastrophically.
pub const ALPHA_ONE_EPS: f64 = 1e-9;

/// How a score was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMethod {
    Exact,
    Truncated,
    Nystrom,
    Fkea,
    Oracle,
}

/// One computed score with the settings that produced it.
///
/// Field order matches the serialized record: method, kernel, sigma, alpha,
/// t, seed, n, score, entropy, elapsed_seconds. `score` is always
/// `entropy.exp()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub method: ScoreMethod,
    pub kernel: String,
    pub sigma: Option<f64>,
    pub alpha: f64,
    pub t: Option<usize>,
    pub seed: Option<u64>,
    pub n: usize,
    pub score: f64,
    pub entropy: f64,
    pub elapsed_seconds: f64,
}

impl ScoreReport {
    pub(crate) fn new(
        method: ScoreMethod,
        spec: &KernelSpec,
        alpha: f64,
        t: Option<usize>,
        seed: Option<u64>,
        n: usize,
        entropy: f64,
        started: Instant,
    ) -> Self {
        Self {
            method,
            kernel: spec.name().to_string(),
            sigma: spec.sigma(),
            alpha,
            t,
            seed,
            n,
            score: entropy.exp(),
            entropy,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

fn check_probability(values: &[f64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v < -1e-12 {
            return Err(Error::NotAProbability(format!(
                "entry {i} is {v}; probabilities must be nonnegative"
            )));
        }
    }
    let sum = linalg::pairwise_sum(values);
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::NotAProbability(format!(
            "values sum to {sum}, not 1 (tolerance 1e-6)"
        )));
    }
    Ok(())
}

/// Order-α Rényi entropy of a probability vector, in nats.
///
/// α = 1 is the Shannon limit Σ p ln(1/p) with 0·ln 0 = 0; other orders use
/// ln(Σ pᵅ)/(1-α) with 0ᵅ = 0. The result lies in [0, ln m] for m outcomes.
pub fn renyi_entropy(values: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidAlpha(alpha, "order must be a positive real"));
    }
    check_probability(values)?;
    if (alpha - 1.0).abs() < ALPHA_ONE_EPS {
        let h = values
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum::<f64>();
        Ok(h)
    } else {
        let power_sum = values
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p.powf(alpha))
            .sum::<f64>();
        Ok(power_sum.ln() / (1.0 - alpha))
    }
}

/// ‖v‖_α = (Σ vᵢᵅ)^{1/α} for a nonnegative vector.
///
/// For a spectrum λ this equals Vendi_α^{(1-α)/α}, the transformed space in
/// which the concentration bounds are stated.
pub(crate) fn lp_norm(values: &[f64], alpha: f64) -> f64 {
    values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.powf(alpha))
        .sum::<f64>()
        .powf(1.0 / alpha)
}

/// Spectrum of the normalized kernel matrix by the cheapest exact route:
/// the d×d feature covariance when the cosine kernel has fewer feature
/// dimensions than samples, the n×n Gram matrix otherwise.
pub(crate) fn exact_spectrum(e: &EmbeddingMatrix, spec: &KernelSpec) -> Result<Spectrum> {
    match spec {
        KernelSpec::Cosine if e.d() < e.n() => spectrum_from_covariance(e, spec),
        _ => spectrum_from_gram(&gram_matrix(spec, e, true)?),
    }
}

/// Order-α Vendi score exp(H_α(K/n)) by exact eigendecomposition.
pub fn vendi_score(e: &EmbeddingMatrix, spec: &KernelSpec, alpha: f64) -> Result<ScoreReport> {
    let started = Instant::now();
    let spectrum = exact_spectrum(e, spec)?;
    let entropy = renyi_entropy(spectrum.values(), alpha)?;
    Ok(ScoreReport::new(
        ScoreMethod::Exact,
        spec,
        alpha,
        None,
        None,
        e.n(),
        entropy,
        started,
    ))
}

/// RKE score 1/‖K/n‖²_F — the order-2 Vendi score computed directly from
/// Gram entries, no eigendecomposition.
///
/// The Frobenius accumulation sums one partial per row and reduces the
/// partials pairwise in a fixed order, so the result is independent of
/// thread count.
pub fn rke_score(e: &EmbeddingMatrix, spec: &KernelSpec) -> Result<ScoreReport> {
    let started = Instant::now();
    let g = gram_matrix(spec, e, true)?;
    let row_partials: Vec<f64> = g
        .entries()
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|v| v * v).sum())
        .collect();
    let fro_sq = linalg::pairwise_sum(&row_partials);
    let entropy = -fro_sq.ln(); // H₂ = ln(1/Σλ²)
    Ok(ScoreReport::new(
        ScoreMethod::Exact,
        spec,
        2.0,
        None,
        None,
        e.n(),
        entropy,
        started,
    ))
}

/// Order-α t-truncated Vendi score: exp(H_α) of the truncated spectrum.
///
/// Equal to [`vendi_score`] whenever t is at least the rank of the Gram
/// matrix, since truncation then moves nothing.
pub fn truncated_vendi_score(
    e: &EmbeddingMatrix,
    spec: &KernelSpec,
    alpha: f64,
    t: usize,
) -> Result<ScoreReport> {
    let started = Instant::now();
    let spectrum = exact_spectrum(e, spec)?;
    let truncated = truncate_spectrum(&spectrum, t)?;
    let entropy = renyi_entropy(truncated.values(), alpha)?;
    Ok(ScoreReport::new(
        ScoreMethod::Truncated,
        spec,
        alpha,
        Some(t),
        None,
        e.n(),
        entropy,
        started,
    ))
}
