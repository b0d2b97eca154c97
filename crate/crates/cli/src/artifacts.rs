//! Output artifacts: JSON with embedded run configuration and tool version,
//! plus CSV and PGM writers.
//!
//! Deterministic content and volatile provenance are kept apart: reruns with
//! an artifact's embedded config reproduce every field except
//! `generated_at_unix` and the stage timings.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ohmkernel::kernel::{FeatureMode, GramMatrix, SeparationStats};
use ohmkernel::svm::BenchmarkReport;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolved invocation, echoed into every artifact.
#[derive(Debug, Default, Serialize)]
pub struct ConfigEcho {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<FeatureMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_per_class: Option<usize>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_string_pretty(value).context("artifact serialization")?;
    json.push('\n');
    write_text(path, &json)
}

#[derive(Serialize)]
struct GramArtifact<'a> {
    gamma: f64,
    mode: FeatureMode,
    seed: u64,
    dataset: &'a str,
    matrix: Vec<Vec<f64>>,
    vector_lengths: Vec<usize>,
    feature_extraction_ms: u64,
    config: &'a ConfigEcho,
    version: &'a str,
    generated_at_unix: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn write_gram_json(
    path: &Path,
    gram: &GramMatrix,
    gamma: f64,
    mode: FeatureMode,
    seed: u64,
    dataset: &str,
    vector_lengths: Vec<usize>,
    feature_extraction_ms: u64,
    config: &ConfigEcho,
) -> Result<()> {
    write_json(
        path,
        &GramArtifact {
            gamma,
            mode,
            seed,
            dataset,
            matrix: gram.to_rows(),
            vector_lengths,
            feature_extraction_ms,
            config,
            version: VERSION,
            generated_at_unix: unix_now(),
        },
    )
}

#[derive(Serialize)]
struct BenchmarkArtifact<'a> {
    #[serde(flatten)]
    report: &'a BenchmarkReport,
    config: &'a ConfigEcho,
    version: &'a str,
    generated_at_unix: u64,
}

pub fn write_benchmark_json(
    path: &Path,
    report: &BenchmarkReport,
    config: &ConfigEcho,
) -> Result<()> {
    write_json(
        path,
        &BenchmarkArtifact {
            report,
            config,
            version: VERSION,
            generated_at_unix: unix_now(),
        },
    )
}

#[derive(Serialize)]
struct ErArtifact<'a> {
    stats: &'a SeparationStats,
    matrix: Vec<Vec<f64>>,
    config: &'a ConfigEcho,
    version: &'a str,
    generated_at_unix: u64,
}

pub fn write_er_json(
    path: &Path,
    gram: &GramMatrix,
    stats: &SeparationStats,
    config: &ConfigEcho,
) -> Result<()> {
    write_json(
        path,
        &ErArtifact {
            stats,
            matrix: gram.to_rows(),
            config,
            version: VERSION,
            generated_at_unix: unix_now(),
        },
    )
}

/// Plain-text grayscale render (PGM P2): kernel value 0 maps to black,
/// 1 to white.
pub fn gram_to_pgm(gram: &GramMatrix) -> String {
    let n = gram.dim();
    let mut out = format!("P2\n{n} {n}\n255\n");
    for i in 0..n {
        for j in 0..n {
            let gray = (gram.get(i, j).clamp(0.0, 1.0) * 255.0).round() as u8;
            out.push_str(&format!("{gray}\n"));
        }
    }
    out
}
