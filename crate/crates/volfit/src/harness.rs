//! Cross-model RMSE benchmark harness.
//!
//! Takes a corpus of labeled smiles, calibrates a set of models to every
//! smile with one shared [`FitConfig`], and aggregates the unweighted RMSE
//! per (group, model) cell — optionally as a 5% trimmed mean so a single
//! pathological chain cannot dominate a group. Fits across smiles run on
//! the Rayon pool, but every fit is deterministic and the aggregation is
//! sequential in corpus order, so a report (and its fingerprint) is
//! reproducible bit for bit.
//!
//! Corpus files follow the naming convention
//! `<contract>__<timestamp>.csv`; the contract prefix becomes the group and
//! the timestamp part is matchable with a substring filter.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::{fit, FitConfig, ModelKind, Smile};
use crate::error::{Result, VolfitError};
use crate::market::{build_smile, parse_chain_file, SelectionRule};

/// One corpus entry: the smile plus its group (e.g. contract) and label
/// (e.g. file stem) for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSmile {
    pub group: String,
    pub label: String,
    pub smile: Smile,
}

/// Benchmark settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Calibration settings shared by every fit.
    pub fit: FitConfig,
    /// Use a 5% trimmed mean (drop `floor(0.05 n)` smiles at each end of
    /// the per-cell RMSE distribution) instead of the plain mean.
    pub trim: bool,
}

/// One (group, model) cell of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub group: String,
    pub model: ModelKind,
    /// Mean (or trimmed mean) RMSE over the group's successful fits;
    /// `None` when every fit in the cell failed.
    pub mean_rmse: Option<f64>,
    /// Number of smiles in the group.
    pub n_smiles: usize,
    /// Fits that errored or produced a non-finite RMSE.
    pub n_failures: usize,
}

/// The full benchmark outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Hex digest of the row contents; equal corpora, models, and settings
    /// give equal fingerprints.
    pub fingerprint: String,
    pub config: BenchConfig,
}

/// Output formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = VolfitError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(VolfitError::invalid(format!(
                "unknown report format {other:?}; expected csv, json, or markdown"
            ))),
        }
    }
}

impl std::fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "markdown",
        })
    }
}

/// Mean of `values` after dropping `floor(0.05 n)` entries at each end
/// (when `trim` is set). `None` on an empty slice.
fn trimmed_mean(values: &[f64], trim: bool) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cut = if trim {
        (0.05 * sorted.len() as f64).floor() as usize
    } else {
        0
    };
    let kept = &sorted[cut..sorted.len() - cut];
    Some(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Calibrates every model to every smile and tabulates per-group RMSE.
///
/// Rows are ordered by group name ascending, then by the order of `models`.
pub fn run_benchmark(
    corpus: &[LabeledSmile],
    models: &[ModelKind],
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    if corpus.is_empty() {
        return Err(VolfitError::invalid("benchmark corpus is empty".to_string()));
    }
    if models.is_empty() {
        return Err(VolfitError::invalid("no models requested".to_string()));
    }

    // One fit per (smile, model); parallel over smiles, order preserved.
    let per_smile: Vec<Vec<Option<f64>>> = corpus
        .par_iter()
        .map(|entry| {
            models
                .iter()
                .map(|&kind| match fit(kind, &entry.smile, &cfg.fit) {
                    Ok(result) if result.rmse.is_finite() => Some(result.rmse),
                    _ => None,
                })
                .collect()
        })
        .collect();

    let mut groups: Vec<String> = corpus.iter().map(|s| s.group.clone()).collect();
    groups.sort();
    groups.dedup();

    let mut rows = Vec::with_capacity(groups.len() * models.len());
    for group in &groups {
        let member_indices: Vec<usize> = corpus
            .iter()
            .enumerate()
            .filter(|(_, s)| &s.group == group)
            .map(|(i, _)| i)
            .collect();
        for (m, &model) in models.iter().enumerate() {
            let rmses: Vec<f64> = member_indices
                .iter()
                .filter_map(|&i| per_smile[i][m])
                .collect();
            rows.push(BenchRow {
                group: group.clone(),
                model,
                mean_rmse: trimmed_mean(&rmses, cfg.trim),
                n_smiles: member_indices.len(),
                n_failures: member_indices.len() - rmses.len(),
            });
        }
    }

    let mut hasher = DefaultHasher::new();
    for row in &rows {
        row.group.hash(&mut hasher);
        row.model.name().hash(&mut hasher);
        row.mean_rmse.map(f64::to_bits).unwrap_or(u64::MAX).hash(&mut hasher);
        row.n_smiles.hash(&mut hasher);
        row.n_failures.hash(&mut hasher);
    }
    Ok(BenchReport {
        rows,
        fingerprint: format!("{:016x}", hasher.finish()),
        config: cfg.clone(),
    })
}

/// Writes the report in the requested format. Columns are always
/// `group,model,mean_rmse,n_smiles,n_failures`.
pub fn emit_report<W: Write>(report: &BenchReport, format: ReportFormat, out: &mut W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            writeln!(out, "group,model,mean_rmse,n_smiles,n_failures")?;
            for row in &report.rows {
                let mean = row
                    .mean_rmse
                    .map(|v| format!("{v:.16e}"))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.group, row.model, mean, row.n_smiles, row.n_failures
                )?;
            }
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)
                .map_err(|e| VolfitError::invalid(format!("json serialization failed: {e}")))?;
            writeln!(out)?;
        }
        ReportFormat::Markdown => {
            writeln!(out, "| group | model | mean_rmse | n_smiles | n_failures |")?;
            writeln!(out, "|---|---|---|---|---|")?;
            for row in &report.rows {
                let mean = row
                    .mean_rmse
                    .map(|v| format!("{v:.6e}"))
                    .unwrap_or_else(|| "-".to_string());
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    row.group, row.model, mean, row.n_smiles, row.n_failures
                )?;
            }
        }
    }
    Ok(())
}

/// Loads every `*.csv` chain in `dir` as a labeled smile.
///
/// File stems split as `<contract>__<timestamp>`; the contract becomes the
/// group (the whole stem when there is no `__`) and `timestamp_filter`
/// keeps only files whose timestamp part contains the given substring.
/// Files are visited in name order; a chain that cannot produce a valid
/// smile fails the load with the file named in the error.
pub fn load_corpus_dir(
    dir: &Path,
    rule: SelectionRule,
    timestamp_filter: Option<&str>,
) -> Result<Vec<LabeledSmile>> {
    let mut paths: Vec<std::path::PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
        .collect();
    paths.sort();

    let mut corpus = Vec::with_capacity(paths.len());
    for path in paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| {
                VolfitError::invalid(format!("unreadable file name {}", path.display()))
            })?
            .to_string();
        let (group, timestamp) = match stem.split_once("__") {
            Some((g, t)) => (g.to_string(), t.to_string()),
            None => (stem.clone(), String::new()),
        };
        if let Some(filter) = timestamp_filter {
            if !timestamp.contains(filter) {
                continue;
            }
        }
        let with_file = |e: VolfitError| {
            VolfitError::invalid(format!("{}: {e}", path.display()))
        };
        let parsed = parse_chain_file(&path).map_err(with_file)?;
        let built = build_smile(&parsed.records, rule).map_err(with_file)?;
        corpus.push(LabeledSmile {
            group,
            label: stem,
            smile: built.smile,
        });
    }
    if corpus.is_empty() {
        return Err(VolfitError::invalid(format!(
            "no usable chains found in {}",
            dir.display()
        )));
    }
    Ok(corpus)
}
