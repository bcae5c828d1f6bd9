//! File formats: the `vemb` binary embedding container, CSV embeddings,
//! score records, and sweep tables.
//!
//! These layouts are the crate's compatibility contract:
//!
//! - **vemb**: magic `VEMB`, version u16 = 1 (little-endian), flags u16 = 0,
//!   n u64, d u64, then n·d IEEE-754 single-precision values, row-major,
//!   little-endian regardless of host. Values are widened to f64 on load —
//!   producers ship f32, score math wants f64.
//! - **score records**: one JSON object per line (or CSV rows) with fields
//!   in the order method, kernel, sigma, alpha, t, seed, n, score, entropy,
//!   elapsed_seconds.
//! - **sweep tables**: CSV with header
//!   `method,alpha,t,sigma,n,repeat,seed,score,elapsed_seconds`.
//! - **distributions**: a JSON document with `support` (array of rows),
//!   `probs`, `label`.
//!
//! Output bytes are deterministic for identical inputs; nothing here embeds
//! timestamps. The elapsed_seconds field reflects measured wall time and is
//! excluded from determinism claims.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::kernels::EmbeddingMatrix;
use crate::oracle::DiscreteDistribution;
use crate::scores::ScoreReport;
use crate::{Error, Result};

const MAGIC: [u8; 4] = *b"VEMB";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 24;

/// On-disk embedding layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    Vemb,
    Csv,
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vemb" => Ok(EmbeddingFormat::Vemb),
            "csv" => Ok(EmbeddingFormat::Csv),
            other => Err(Error::InvalidParams(format!(
                "unknown embedding format {other:?} (expected vemb or csv)"
            ))),
        }
    }
}

/// Score record layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreFormat {
    JsonLines,
    Csv,
}

impl std::str::FromStr for ScoreFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json-lines" | "jsonl" => Ok(ScoreFormat::JsonLines),
            "csv" => Ok(ScoreFormat::Csv),
            other => Err(Error::InvalidParams(format!(
                "unknown score format {other:?} (expected json-lines or csv)"
            ))),
        }
    }
}

/// Read an embedding file in the given format.
pub fn read_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingMatrix> {
    match format {
        EmbeddingFormat::Vemb => read_vemb(path.as_ref()),
        EmbeddingFormat::Csv => read_csv_embeddings(path.as_ref()),
    }
}

fn read_vemb(path: &Path) -> Result<EmbeddingMatrix> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            expected: HEADER_LEN as u64,
            got: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("length checked");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().expect("length checked"));
    let flags = u16::from_le_bytes(bytes[6..8].try_into().expect("length checked"));
    if version != VERSION || flags != 0 {
        return Err(Error::UnsupportedHeader { version, flags });
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("length checked"));
    let d = u64::from_le_bytes(bytes[16..24].try_into().expect("length checked"));
    let declared = n
        .checked_mul(d)
        .ok_or_else(|| Error::InvalidParams(format!("header n·d overflows: {n}·{d}")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() % 4 != 0 || (payload.len() / 4) as u64 != declared {
        return Err(Error::TruncatedPayload {
            expected: declared,
            got: (payload.len() / 4) as u64,
        });
    }
    let (n, d) = (n as usize, d as usize);
    let mut values = Vec::with_capacity(n * d);
    for chunk in payload.chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().expect("chunks_exact"));
        values.push(v as f64);
    }
    let array = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::InvalidParams(format!("bad shape in embedding file: {e}")))?;
    EmbeddingMatrix::new(array)
}

fn read_csv_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, usize> = fields
            .iter()
            .enumerate()
            .map(|(col, f)| f.parse::<f64>().map_err(|_| col))
            .collect();
        match parsed {
            Ok(values) => {
                if let Some(w) = width {
                    if values.len() != w {
                        return Err(Error::RaggedRows {
                            row: lineno,
                            expected: w,
                            got: values.len(),
                        });
                    }
                } else {
                    width = Some(values.len());
                }
                for (col, v) in values.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteValue { row: lineno, col });
                    }
                }
                rows.push(values);
            }
            Err(col) => {
                // a non-numeric first row is a header; anywhere else it is an error
                if lineno == 0 && rows.is_empty() {
                    continue;
                }
                return Err(Error::BadNumber {
                    row: lineno,
                    col,
                    text: fields[col].to_string(),
                });
            }
        }
    }
    EmbeddingMatrix::from_rows(rows)
}

/// Write an embedding matrix in the vemb layout (f32 payload).
pub fn write_embeddings(e: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&(e.n() as u64).to_le_bytes())?;
    w.write_all(&(e.d() as u64).to_le_bytes())?;
    for v in e.values().iter() {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Append score records to a writer, one JSON line or CSV row per report.
pub fn write_scores<W: Write>(
    reports: &[ScoreReport],
    writer: &mut W,
    format: ScoreFormat,
) -> Result<()> {
    match format {
        ScoreFormat::JsonLines => {
            for r in reports {
                serde_json::to_writer(&mut *writer, r)?;
                writer.write_all(b"\n")?;
            }
        }
        ScoreFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            csv.write_record([
                "method",
                "kernel",
                "sigma",
                "alpha",
                "t",
                "seed",
                "n",
                "score",
                "entropy",
                "elapsed_seconds",
            ])?;
            for r in reports {
                csv.write_record(&[
                    match r.method {
                        crate::ScoreMethod::Exact => "exact".to_string(),
                        crate::ScoreMethod::Truncated => "truncated".to_string(),
                        crate::ScoreMethod::Nystrom => "nystrom".to_string(),
                        crate::ScoreMethod::Fkea => "fkea".to_string(),
                        crate::ScoreMethod::Oracle => "oracle".to_string(),
                    },
                    r.kernel.clone(),
                    r.sigma.map(|v| v.to_string()).unwrap_or_default(),
                    r.alpha.to_string(),
                    r.t.map(|v| v.to_string()).unwrap_or_default(),
                    r.seed.map(|v| v.to_string()).unwrap_or_default(),
                    r.n.to_string(),
                    r.score.to_string(),
                    r.entropy.to_string(),
                    r.elapsed_seconds.to_string(),
                ])?;
            }
            csv.flush()?;
        }
    }
    Ok(())
}

/// Write score records to a file.
pub fn write_scores_to_path(
    reports: &[ScoreReport],
    path: impl AsRef<Path>,
    format: ScoreFormat,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_scores(reports, &mut w, format)?;
    w.flush()?;
    Ok(())
}

/// One row of a convergence sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub alpha: f64,
    pub t: Option<usize>,
    pub sigma: Option<f64>,
    pub n: usize,
    pub repeat: usize,
    pub seed: u64,
    pub score: f64,
    pub elapsed_seconds: f64,
}

/// Write the convergence table, header first; an empty row set produces a
/// header-only file.
pub fn write_table<W: Write>(rows: &[SweepRow], writer: &mut W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record([
        "method",
        "alpha",
        "t",
        "sigma",
        "n",
        "repeat",
        "seed",
        "score",
        "elapsed_seconds",
    ])?;
    for r in rows {
        csv.write_record(&[
            r.method.clone(),
            r.alpha.to_string(),
            r.t.map(|v| v.to_string()).unwrap_or_default(),
            r.sigma.map(|v| v.to_string()).unwrap_or_default(),
            r.n.to_string(),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.score.to_string(),
            r.elapsed_seconds.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_table_to_path(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_table(rows, &mut w)?;
    w.flush()?;
    Ok(())
}

/// One row of a diversity sweep table; like [`SweepRow`] plus the
/// ground-truth mode count of the synthetic source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityRow {
    pub k: usize,
    pub method: String,
    pub alpha: f64,
    pub t: Option<usize>,
    pub sigma: Option<f64>,
    pub n: usize,
    pub repeat: usize,
    pub seed: u64,
    pub score: f64,
    pub elapsed_seconds: f64,
}

/// Write the diversity table with header
/// `k,method,alpha,t,sigma,n,repeat,seed,score,elapsed_seconds`.
pub fn write_diversity_table<W: Write>(rows: &[DiversityRow], writer: &mut W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record([
        "k",
        "method",
        "alpha",
        "t",
        "sigma",
        "n",
        "repeat",
        "seed",
        "score",
        "elapsed_seconds",
    ])?;
    for r in rows {
        csv.write_record(&[
            r.k.to_string(),
            r.method.clone(),
            r.alpha.to_string(),
            r.t.map(|v| v.to_string()).unwrap_or_default(),
            r.sigma.map(|v| v.to_string()).unwrap_or_default(),
            r.n.to_string(),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.score.to_string(),
            r.elapsed_seconds.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_diversity_table_to_path(
    rows: &[DiversityRow],
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_diversity_table(rows, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Read a distribution document (JSON: support, probs, label).
pub fn read_distribution(path: impl AsRef<Path>) -> Result<DiscreteDistribution> {
    let reader = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(reader)?)
}

/// Write a distribution document.
pub fn write_distribution(d: &DiscreteDistribution, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, d)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
