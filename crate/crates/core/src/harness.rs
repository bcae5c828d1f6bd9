//! Desk-scale experiment harness: synthetic mixture sources, convergence
//! sweeps over sample-size grids, and diversity sweeps over mode counts.
//!
//! The synthetic sources have known ground truth (mode count, exact
//! population scores via [`crate::oracle`]), so sweep outputs can be judged
//! against closed-form targets instead of eyeballed.
//!
//! Reproducibility: every cell of a sweep derives its RNG stream from
//! (master seed, grid position, repeat, method slot). Adding a method or a
//! grid point never reshuffles the draws of existing cells, and re-running
//! a sweep with the same config reproduces every score bit-for-bit
//! (elapsed times excluded). Cells run in a work pool and rows are sorted
//! canonically before writing, so the output bytes are schedule-independent.

use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{DiversityRow, EmbeddingFormat, SweepRow};
use crate::kernels::{EmbeddingMatrix, KernelSpec};
use crate::lowrank::{fkea_spectrum, nystrom_spectrum, DEFAULT_RCOND};
use crate::oracle::{sample_from, DiscreteDistribution};
use crate::scores::{exact_spectrum, renyi_entropy, rke_score};
use crate::spectra::{truncate_spectrum, Spectrum};
use crate::{derive_rng, Error, Result};

/// Atoms per synthetic mode.
pub const ATOMS_PER_MODE: usize = 32;

/// Which estimator a sweep cell runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Exact,
    Truncated,
    Nystrom,
    Fkea,
    Rke,
}

impl SweepMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepMethod::Exact => "exact",
            SweepMethod::Truncated => "truncated",
            SweepMethod::Nystrom => "nystrom",
            SweepMethod::Fkea => "fkea",
            SweepMethod::Rke => "rke",
        }
    }

    fn slot(&self) -> u64 {
        match self {
            SweepMethod::Exact => 0,
            SweepMethod::Truncated => 1,
            SweepMethod::Nystrom => 2,
            SweepMethod::Fkea => 3,
            SweepMethod::Rke => 4,
        }
    }

    fn needs_t(&self) -> bool {
        matches!(
            self,
            SweepMethod::Truncated | SweepMethod::Nystrom | SweepMethod::Fkea
        )
    }
}

/// Where sweep samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSource {
    /// Draw i.i.d. samples from an exact discrete distribution.
    Distribution(DiscreteDistribution),
    /// Subsample rows (without replacement) from an embedding file.
    EmbeddingFile { path: String, format: EmbeddingFormat },
}

/// Convergence-sweep configuration; mirrors the JSON config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Strictly increasing sample sizes.
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    pub methods: Vec<SweepMethod>,
    pub alpha: Vec<f64>,
    /// Truncation / budget parameter; required when any truncated or
    /// approximate method is selected.
    #[serde(default)]
    pub t: Option<usize>,
    pub kernel: KernelSpec,
    pub seed: u64,
    pub source: SweepSource,
    #[serde(default = "default_rcond")]
    pub rcond: f64,
}

fn default_repeats() -> usize {
    1
}

fn default_rcond() -> f64 {
    DEFAULT_RCOND
}

/// The default grid: 250 to 8000 in 10 log-spaced steps.
pub fn default_n_grid() -> Vec<usize> {
    let (lo, hi, steps) = (250.0f64, 8000.0f64, 10u32);
    let ratio = (hi / lo).powf(1.0 / (steps - 1) as f64);
    let mut grid: Vec<usize> = (0..steps)
        .map(|i| (lo * ratio.powi(i as i32)).round() as usize)
        .collect();
    grid.dedup();
    grid
}

impl SweepConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        let cfg: SweepConfig = serde_json::from_reader(reader)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "n_grid must be non-empty and strictly increasing".into(),
            ));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::InvalidParams("grid sizes must be >= 1".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParams("repeats must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParams("select at least one method".into()));
        }
        if self.alpha.is_empty() || self.alpha.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParams(
                "alpha grid must be non-empty with positive entries".into(),
            ));
        }
        if self.methods.iter().any(SweepMethod::needs_t) && self.t.is_none() {
            return Err(Error::InvalidParams(
                "t is required when a truncated or approximate method is selected".into(),
            ));
        }
        if let Some(t) = self.t {
            if t == 0 {
                return Err(Error::InvalidParams("t must be >= 1".into()));
            }
            if self.methods.contains(&SweepMethod::Nystrom) && t > self.n_grid[0] {
                return Err(Error::InvalidParams(format!(
                    "nystrom needs t <= every grid size; t = {t} exceeds n = {}",
                    self.n_grid[0]
                )));
            }
        }
        if self.methods.contains(&SweepMethod::Fkea)
            && !matches!(self.kernel, KernelSpec::Gaussian { .. })
        {
            return Err(Error::ShiftInvariantRequired);
        }
        Ok(())
    }
}

/// Diversity-sweep configuration: score synthetic k-mode mixtures over a
/// grid of mode counts with all four estimators at matched t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityConfig {
    /// Strictly increasing mode counts.
    pub k_grid: Vec<usize>,
    /// Embedding dimension of the synthetic atoms.
    pub d: usize,
    pub kernel: KernelSpec,
    pub alpha: f64,
    pub t: usize,
    #[serde(default = "default_diversity_n")]
    pub n: usize,
    #[serde(default = "default_diversity_repeats")]
    pub repeats: usize,
    /// Radius of the sphere the mode centers are drawn on.
    #[serde(default = "default_spread")]
    pub spread: f64,
    /// Standard deviation of the atom cloud around each center.
    #[serde(default)]
    pub within_std: f64,
    #[serde(default = "default_rcond")]
    pub rcond: f64,
    pub seed: u64,
}

fn default_diversity_n() -> usize {
    1024
}

fn default_diversity_repeats() -> usize {
    3
}

fn default_spread() -> f64 {
    8.0
}

impl DiversityConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        let cfg: DiversityConfig = serde_json::from_reader(reader)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.k_grid.is_empty() || self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "k_grid must be non-empty and strictly increasing".into(),
            ));
        }
        if self.k_grid[0] == 0 || self.d == 0 || self.n == 0 || self.repeats == 0 {
            return Err(Error::InvalidParams(
                "k_grid entries, d, n, repeats must all be >= 1".into(),
            ));
        }
        if self.t == 0 || self.t > self.n {
            return Err(Error::InvalidParams(format!(
                "need 1 <= t <= n, got t = {}, n = {}",
                self.t, self.n
            )));
        }
        if !matches!(self.kernel, KernelSpec::Gaussian { .. }) {
            // the sweep always includes the FKEA column
            return Err(Error::ShiftInvariantRequired);
        }
        if !(self.spread >= 0.0) || !(self.within_std >= 0.0) {
            return Err(Error::InvalidParams(
                "spread and within_std must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// The k mode centers `synth_mixture` places on a sphere of radius
/// `spread`: a pure function of (k, d, spread, seed).
pub fn mixture_centers(k: usize, d: usize, spread: f64, seed: u64) -> Result<Array2<f64>> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidParams("need k >= 1 and d >= 1".into()));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::InvalidParams(format!(
            "spread must be nonnegative and finite, got {spread}"
        )));
    }
    let mut rng = derive_rng(seed, 0x6365_6e74, k as u64, d as u64); // centers stream
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut centers = Array2::<f64>::zeros((k, d));
    for mut row in centers.rows_mut() {
        loop {
            for v in row.iter_mut() {
                *v = normal.sample(&mut rng);
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                row.mapv_inplace(|v| v / norm * spread);
                break;
            }
        }
    }
    Ok(centers)
}

/// Synthesize a k-mode mixture: centers on a sphere of radius `spread`,
/// each expanded into [`ATOMS_PER_MODE`] atoms jittered by Gaussian noise of
/// scale `within_std`, uniform probabilities.
pub fn synth_mixture(
    k: usize,
    d: usize,
    spread: f64,
    within_std: f64,
    seed: u64,
) -> Result<DiscreteDistribution> {
    if !(within_std >= 0.0) || !within_std.is_finite() {
        return Err(Error::InvalidParams(format!(
            "within_std must be nonnegative and finite, got {within_std}"
        )));
    }
    let centers = mixture_centers(k, d, spread, seed)?;
    let m = k * ATOMS_PER_MODE;
    let mut atoms = Array2::<f64>::zeros((m, d));
    let mut rng = derive_rng(seed, 0x6174_6f6d, k as u64, d as u64); // atoms stream
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    for mode in 0..k {
        for a in 0..ATOMS_PER_MODE {
            let row = mode * ATOMS_PER_MODE + a;
            for col in 0..d {
                let noise = if within_std > 0.0 {
                    within_std * normal.sample(&mut rng)
                } else {
                    0.0
                };
                atoms[[row, col]] = centers[[mode, col]] + noise;
            }
        }
    }
    DiscreteDistribution::uniform(atoms, format!("mixture-k{k}-d{d}"))
}

struct Cell {
    n: usize,
    repeat: usize,
    method: SweepMethod,
}

fn draw_cell_sample(
    source: &SweepSource,
    loaded: Option<&EmbeddingMatrix>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<EmbeddingMatrix> {
    match source {
        SweepSource::Distribution(d) => {
            let sample_seed: u64 = rng.random();
            sample_from(d, n, sample_seed)
        }
        SweepSource::EmbeddingFile { .. } => {
            let data = loaded.expect("file sources are preloaded");
            let picks = rand::seq::index::sample(rng, data.n(), n);
            let mut values = Array2::<f64>::zeros((n, data.d()));
            for (r, i) in picks.into_iter().enumerate() {
                values.row_mut(r).assign(&data.row(i));
            }
            EmbeddingMatrix::new(values)
        }
    }
}

/// Scores shared across the alpha grid of one cell: the spectrum (or the
/// RKE Frobenius value) is computed once per drawn sample.
fn cell_rows(cfg: &SweepConfig, loaded: Option<&EmbeddingMatrix>, cell: &Cell) -> Result<Vec<SweepRow>> {
    let mut rng = derive_rng(cfg.seed, cell.n as u64, cell.repeat as u64, cell.method.slot());
    let cell_seed: u64 = rng.random();
    let started = Instant::now();
    let sample = draw_cell_sample(&cfg.source, loaded, cell.n, &mut rng)?;

    let sigma = cfg.kernel.sigma();
    let mut rows = Vec::new();
    let mut push = |alpha: f64, t: Option<usize>, score: f64, elapsed: f64| {
        rows.push(SweepRow {
            method: cell.method.as_str().to_string(),
            alpha,
            t,
            sigma,
            n: cell.n,
            repeat: cell.repeat,
            seed: cell_seed,
            score,
            elapsed_seconds: elapsed,
        });
    };

    match cell.method {
        SweepMethod::Rke => {
            let report = rke_score(&sample, &cfg.kernel)?;
            push(2.0, None, report.score, started.elapsed().as_secs_f64());
        }
        SweepMethod::Exact => {
            let spectrum = exact_spectrum(&sample, &cfg.kernel)?;
            for &alpha in &cfg.alpha {
                let h = renyi_entropy(spectrum.values(), alpha)?;
                push(alpha, None, h.exp(), started.elapsed().as_secs_f64());
            }
        }
        SweepMethod::Truncated | SweepMethod::Nystrom | SweepMethod::Fkea => {
            let t = cfg.t.expect("validated");
            let spectrum: Spectrum = match cell.method {
                SweepMethod::Truncated => exact_spectrum(&sample, &cfg.kernel)?,
                SweepMethod::Nystrom => {
                    let approx_seed: u64 = rng.random();
                    nystrom_spectrum(&sample, &cfg.kernel, t, approx_seed, cfg.rcond)?
                }
                SweepMethod::Fkea => {
                    let approx_seed: u64 = rng.random();
                    fkea_spectrum(&sample, &cfg.kernel, t, approx_seed)?
                }
                _ => unreachable!(),
            };
            let truncated = truncate_spectrum(&spectrum, t)?;
            for &alpha in &cfg.alpha {
                let h = renyi_entropy(truncated.values(), alpha)?;
                push(alpha, Some(t), h.exp(), started.elapsed().as_secs_f64());
            }
        }
    }
    Ok(rows)
}

/// Run the convergence sweep: one scored cell per (n, repeat, method),
/// one row per alpha (the RKE method is fixed at order 2 and emits a
/// single row per cell).
pub fn convergence_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let loaded = match &cfg.source {
        SweepSource::Distribution(_) => None,
        SweepSource::EmbeddingFile { path, format } => {
            let data = crate::io::read_embeddings(path, *format)?;
            let need = *cfg.n_grid.last().expect("validated non-empty");
            if data.n() < need {
                return Err(Error::GridExceedsData {
                    need,
                    have: data.n(),
                });
            }
            Some(data)
        }
    };

    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        for repeat in 0..cfg.repeats {
            for &method in &cfg.methods {
                cells.push(Cell { n, repeat, method });
            }
        }
    }

    let nested: Vec<Vec<SweepRow>> = cells
        .par_iter()
        .map(|cell| cell_rows(cfg, loaded.as_ref(), cell))
        .collect::<Result<_>>()?;
    let mut rows: Vec<SweepRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.n, a.repeat, &a.method, a.alpha.to_bits()).cmp(&(b.n, b.repeat, &b.method, b.alpha.to_bits()))
    });
    Ok(rows)
}

/// Run the diversity sweep: for each mode count k, synthesize a mixture
/// and score it with the exact, truncated, Nyström, and FKEA estimators at
/// matched t.
pub fn diversity_sweep(cfg: &DiversityConfig) -> Result<Vec<DiversityRow>> {
    cfg.validate()?;
    let methods = [
        SweepMethod::Exact,
        SweepMethod::Truncated,
        SweepMethod::Nystrom,
        SweepMethod::Fkea,
    ];

    let mut cells = Vec::new();
    for &k in &cfg.k_grid {
        for repeat in 0..cfg.repeats {
            for method in methods {
                cells.push((k, repeat, method));
            }
        }
    }

    let rows: Vec<DiversityRow> = cells
        .par_iter()
        .map(|&(k, repeat, method)| -> Result<DiversityRow> {
            let mixture_seed: u64 = derive_rng(cfg.seed, 0x6d69_78, k as u64, 0).random();
            let d = synth_mixture(k, cfg.d, cfg.spread, cfg.within_std, mixture_seed)?;
            let mut rng = derive_rng(cfg.seed, k as u64, repeat as u64, method.slot());
            let cell_seed: u64 = rng.random();
            let started = Instant::now();
            let sample_seed: u64 = rng.random();
            let sample = sample_from(&d, cfg.n, sample_seed)?;
            let spectrum = match method {
                SweepMethod::Exact | SweepMethod::Truncated => {
                    exact_spectrum(&sample, &cfg.kernel)?
                }
                SweepMethod::Nystrom => {
                    let approx_seed: u64 = rng.random();
                    nystrom_spectrum(&sample, &cfg.kernel, cfg.t, approx_seed, cfg.rcond)?
                }
                SweepMethod::Fkea => {
                    let approx_seed: u64 = rng.random();
                    fkea_spectrum(&sample, &cfg.kernel, cfg.t, approx_seed)?
                }
                SweepMethod::Rke => unreachable!("not in the method list"),
            };
            let (score, t_col) = match method {
                SweepMethod::Exact => (renyi_entropy(spectrum.values(), cfg.alpha)?.exp(), None),
                _ => {
                    let truncated = truncate_spectrum(&spectrum, cfg.t)?;
                    (
                        renyi_entropy(truncated.values(), cfg.alpha)?.exp(),
                        Some(cfg.t),
                    )
                }
            };
            Ok(DiversityRow {
                k,
                method: method.as_str().to_string(),
                alpha: cfg.alpha,
                t: t_col,
                sigma: cfg.kernel.sigma(),
                n: cfg.n,
                repeat,
                seed: cell_seed,
                score,
                elapsed_seconds: started.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = rows;
    rows.sort_by(|a, b| {
        (a.k, a.repeat, &a.method, a.alpha.to_bits()).cmp(&(b.k, b.repeat, &b.method, b.alpha.to_bits()))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::population_vendi;

    fn gaussian(sigma: f64) -> KernelSpec {
        KernelSpec::gaussian(sigma).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let grid = default_n_grid();
        assert_eq!(grid.first(), Some(&250));
        assert_eq!(grid.last(), Some(&8000));
        assert_eq!(grid.len(), 10);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn mixture_is_deterministic_and_sized() {
        let a = synth_mixture(3, 4, 5.0, 0.2, 9).unwrap();
        let b = synth_mixture(3, 4, 5.0, 0.2, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3 * ATOMS_PER_MODE);
        assert_eq!(a.dim(), 4);
        let c = synth_mixture(3, 4, 5.0, 0.2, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_mode_zero_noise_atoms_identical() {
        let d = synth_mixture(1, 3, 2.0, 0.0, 4).unwrap();
        let first = d.support().row(0).to_vec();
        for i in 1..d.len() {
            assert_eq!(d.support().row(i).to_vec(), first);
        }
        let norm: f64 = first.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 2.0).abs() < 1e-12, "center on the sphere");
    }

    #[test]
    fn centers_match_the_mixture_stream() {
        let centers = mixture_centers(4, 6, 3.0, 17).unwrap();
        let d = synth_mixture(4, 6, 3.0, 0.0, 17).unwrap();
        for mode in 0..4 {
            let atom = d.support().row(mode * ATOMS_PER_MODE);
            for (a, c) in atom.iter().zip(centers.row(mode)) {
                assert_eq!(a, c);
            }
        }
    }

    #[test]
    fn separated_mixture_population_score_counts_modes() {
        // deterministic geometry check via the exact oracle
        let k = 6;
        let d = synth_mixture(k, 24, 10.0, 0.0, 3).unwrap();
        let centers = mixture_centers(k, 24, 10.0, 3).unwrap();
        let mut min_dist = f64::INFINITY;
        for i in 0..k {
            for j in (i + 1)..k {
                let dist: f64 = centers
                    .row(i)
                    .iter()
                    .zip(centers.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(dist);
            }
        }
        let sigma = min_dist / 8.0; // cross-mode similarity e^{-32} ≈ 0
        let r = population_vendi(&d, &gaussian(sigma), 1.0, None).unwrap();
        assert!(
            (r.score - k as f64).abs() < 0.01,
            "population score {} for k={k}",
            r.score
        );
    }

    fn small_config(methods: Vec<SweepMethod>, kernel: KernelSpec) -> SweepConfig {
        SweepConfig {
            n_grid: vec![20, 40],
            repeats: 2,
            methods,
            alpha: vec![1.0, 2.0],
            t: Some(8),
            kernel,
            seed: 11,
            source: SweepSource::Distribution(synth_mixture(3, 4, 6.0, 0.0, 2).unwrap()),
            rcond: DEFAULT_RCOND,
        }
    }

    #[test]
    fn sweep_validation_catches_bad_configs() {
        let mut cfg = small_config(vec![SweepMethod::Exact], gaussian(1.0));
        cfg.n_grid = vec![40, 20];
        assert!(cfg.validate().is_err());

        let mut cfg = small_config(vec![SweepMethod::Truncated], gaussian(1.0));
        cfg.t = None;
        assert!(cfg.validate().is_err());

        let cfg = small_config(vec![SweepMethod::Fkea], KernelSpec::Cosine);
        assert!(matches!(
            cfg.validate().unwrap_err(),
            Error::ShiftInvariantRequired
        ));

        let mut cfg = small_config(vec![SweepMethod::Nystrom], gaussian(1.0));
        cfg.t = Some(30); // exceeds smallest grid point
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_rows_are_deterministic_and_sorted() {
        let cfg = small_config(
            vec![SweepMethod::Exact, SweepMethod::Fkea, SweepMethod::Rke],
            gaussian(1.5),
        );
        let rows = convergence_sweep(&cfg).unwrap();
        let rows2 = convergence_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), rows2.len());
        for (a, b) in rows.iter().zip(&rows2) {
            assert_eq!(a.score.to_bits(), b.score.to_bits(), "cell determinism");
            assert_eq!(a.seed, b.seed);
        }
        // rke emits one row per cell, others one per alpha
        let rke_rows = rows.iter().filter(|r| r.method == "rke").count();
        assert_eq!(rke_rows, 2 * 2); // grid × repeats
        let exact_rows = rows.iter().filter(|r| r.method == "exact").count();
        assert_eq!(exact_rows, 2 * 2 * 2);
        // canonical order: n, then repeat, then method name
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| {
            (a.n, a.repeat, &a.method, a.alpha.to_bits())
                .cmp(&(b.n, b.repeat, &b.method, b.alpha.to_bits()))
        });
        assert_eq!(rows, sorted);
    }

    #[test]
    fn adding_a_method_does_not_reshuffle_existing_cells() {
        let base = small_config(vec![SweepMethod::Exact], gaussian(1.5));
        let more = small_config(vec![SweepMethod::Exact, SweepMethod::Rke], gaussian(1.5));
        let key = |r: &SweepRow| (r.n, r.repeat, r.alpha.to_bits(), r.seed, r.score.to_bits());
        let rows_base: Vec<_> = convergence_sweep(&base).unwrap().iter().map(key).collect();
        let rows_more: Vec<_> = convergence_sweep(&more)
            .unwrap()
            .iter()
            .filter(|r| r.method == "exact")
            .map(key)
            .collect();
        assert_eq!(rows_base, rows_more);
    }

    #[test]
    fn single_atom_source_scores_one_everywhere() {
        let atoms = Array2::from_shape_vec((1, 3), vec![1.0, 2.0, 3.0]).unwrap();
        let d = DiscreteDistribution::uniform(atoms, "one").unwrap();
        let cfg = SweepConfig {
            n_grid: vec![10, 30],
            repeats: 1,
            methods: vec![SweepMethod::Exact, SweepMethod::Rke, SweepMethod::Truncated],
            alpha: vec![1.0],
            t: Some(4),
            kernel: gaussian(1.0),
            seed: 5,
            source: SweepSource::Distribution(d),
            rcond: DEFAULT_RCOND,
        };
        for row in convergence_sweep(&cfg).unwrap() {
            assert!((row.score - 1.0).abs() < 1e-9, "{row:?}");
        }
    }

    #[test]
    fn cosine_scores_saturate_at_source_rank() {
        // rank-k source (orthonormal atoms): exact cosine scores sit at k,
        // up to multinomial wobble in the mode frequencies, for every grid
        // point with n >= k
        let k = 4;
        let atoms = Array2::from_shape_fn((k, k), |(i, j)| if i == j { 1.0 } else { 0.0 });
        let d = DiscreteDistribution::uniform(atoms, "orthogonal").unwrap();
        let cfg = SweepConfig {
            n_grid: vec![32, 64, 128],
            repeats: 1,
            methods: vec![SweepMethod::Exact],
            alpha: vec![1.0],
            t: None,
            kernel: KernelSpec::Cosine,
            seed: 3,
            source: SweepSource::Distribution(d),
            rcond: DEFAULT_RCOND,
        };
        let rows = convergence_sweep(&cfg).unwrap();
        for row in &rows {
            assert!(
                (row.score - k as f64).abs() < 0.35,
                "n={} score={}",
                row.n,
                row.score
            );
        }
        let s32 = rows.iter().find(|r| r.n == 32).unwrap().score;
        let s128 = rows.iter().find(|r| r.n == 128).unwrap().score;
        assert!((s32 - s128).abs() < 0.35, "flat across the grid");
    }

    #[test]
    fn file_source_grid_guard() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        std::fs::write(&path, "1.0,0.0\n0.0,1.0\n0.5,0.5\n").unwrap();
        let cfg = SweepConfig {
            n_grid: vec![2, 8],
            repeats: 1,
            methods: vec![SweepMethod::Exact],
            alpha: vec![1.0],
            t: None,
            kernel: KernelSpec::Cosine,
            seed: 0,
            source: SweepSource::EmbeddingFile {
                path: path.to_string_lossy().into_owned(),
                format: EmbeddingFormat::Csv,
            },
            rcond: DEFAULT_RCOND,
        };
        assert!(matches!(
            convergence_sweep(&cfg).unwrap_err(),
            Error::GridExceedsData { need: 8, have: 3 }
        ));
    }

    #[test]
    fn diversity_sweep_produces_all_methods_per_k() {
        let cfg = DiversityConfig {
            k_grid: vec![2, 4],
            d: 8,
            kernel: gaussian(1.0),
            alpha: 1.0,
            t: 16,
            n: 64,
            repeats: 2,
            spread: 8.0,
            within_std: 0.0,
            rcond: DEFAULT_RCOND,
            seed: 19,
        };
        let rows = diversity_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 4);
        for k in [2usize, 4] {
            for m in ["exact", "truncated", "nystrom", "fkea"] {
                assert!(rows.iter().any(|r| r.k == k && r.method == m));
            }
        }
        let rows2 = diversity_sweep(&cfg).unwrap();
        for (a, b) in rows.iter().zip(&rows2) {
            assert_eq!(a.score.to_bits(), b.score.to_bits());
        }
    }
}
