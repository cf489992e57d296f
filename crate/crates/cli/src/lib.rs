//! Command implementations behind the `parcelingam` binary.

pub mod bench;
mod io;

pub use io::{read_data, write_data_csv, InputData};

use std::fs;
use std::path::{Path, PathBuf};

use parcelingam::discovery::{parce_lingam, DiscoveryConfig, DiscoveryError, DiscoveryResult, StopReason};
use parcelingam::independence::{HsicConfig, HsicTest};
use parcelingam::ordering::CausalOrderingMatrix;
use parcelingam::simgen::{generate, SemGroundTruth, SemSpec, SpecError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "PARCELINGAM_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: u64, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    /// 2 for malformed or invalid input, 3 for an exceeded subset budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Invalid(_) | Self::Spec(_) => 2,
            Self::Discovery(DiscoveryError::SubsetBudgetExceeded { .. }) => 3,
            Self::Discovery(_) => 2,
            Self::Io { .. } | Self::Other(_) => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Options shared by every discovery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub seed: u64,
    pub subset_cap: usize,
    /// Largest sample count used by one HSIC test; larger inputs are strided.
    pub hsic_cap: Option<usize>,
    pub threads: Option<usize>,
    pub format: OutputFormat,
    /// Input rows are variables rather than samples.
    pub transpose: bool,
    pub exclude_path_free: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            seed: 0,
            subset_cap: 15,
            hsic_cap: None,
            threads: None,
            format: OutputFormat::Json,
            transpose: false,
            exclude_path_free: false,
        }
    }
}

impl RunConfig {
    pub fn discovery(&self) -> DiscoveryConfig {
        DiscoveryConfig { alpha: self.alpha, subset_cap: self.subset_cap, ..Default::default() }
    }

    pub fn hsic(&self) -> HsicTest {
        HsicTest { config: HsicConfig { sample_cap: self.hsic_cap, ..Default::default() } }
    }

    /// `PARCELINGAM_THREADS` wins over the configured value.
    pub fn effective_threads(&self) -> Option<usize> {
        std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&t| t > 0).or(self.threads)
    }
}

/// Runs `f` on a pool with the configured thread count, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Serialize)]
struct JsonStrength {
    target: usize,
    source: usize,
    value: f64,
}

#[derive(Serialize)]
struct JsonSubset {
    subset: Vec<usize>,
    p_value: f64,
}

#[derive(Serialize)]
struct DiscoverJson<'a> {
    schema: u32,
    variables: &'a [String],
    alpha: f64,
    seed: u64,
    n_samples: usize,
    ordering: &'a CausalOrderingMatrix,
    k_head: &'a [usize],
    k_tail: &'a [usize],
    stop_reasons: &'a [StopReason],
    has_cycle: bool,
    strengths: Vec<JsonStrength>,
    subset_records: Vec<JsonSubset>,
    warnings: &'a [String],
}

/// Renders a result in the requested format. JSON keys come out in a fixed
/// order and floats are rounded to 12 decimals.
pub fn render_result(
    result: &DiscoveryResult,
    data: &InputData,
    config: &RunConfig,
) -> Result<String, CliError> {
    match config.format {
        OutputFormat::Csv => Ok(result.ordering.to_csv()),
        OutputFormat::Json => {
            let out = DiscoverJson {
                schema: SCHEMA,
                variables: &data.names,
                alpha: config.alpha,
                seed: config.seed,
                n_samples: data.matrix.n_samples(),
                ordering: &result.ordering,
                k_head: &result.trace.lists.k_head,
                k_tail: &result.trace.lists.k_tail,
                stop_reasons: &result.trace.stop_reasons,
                has_cycle: result.has_cycle,
                strengths: result
                    .strengths
                    .iter()
                    .map(|s| JsonStrength { target: s.target, source: s.source, value: round12(s.value) })
                    .collect(),
                subset_records: result
                    .subset_records
                    .iter()
                    .map(|r| JsonSubset { subset: r.subset.clone(), p_value: round12(r.p_value) })
                    .collect(),
                warnings: &result.warnings,
            };
            let mut s = serde_json::to_string_pretty(&out).map_err(|e| CliError::Other(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// `discover`: reads a CSV, runs the full pipeline and returns the rendered
/// result.
pub fn cmd_discover(input: &Path, config: &RunConfig) -> Result<String, CliError> {
    let mut data = read_data(input, config.transpose)?;
    let discovery = config.discovery();
    discovery.validate()?;
    let test = config.hsic();
    let mut result = with_threads(config.effective_threads(), || parce_lingam(&data.matrix, &test, &discovery))??;
    let mut warnings = std::mem::take(&mut data.warnings);
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    render_result(&result, &data, config)
}

#[derive(Serialize)]
struct TruthJson<'a> {
    schema: u32,
    label: Option<&'a str>,
    representative: bool,
    n_samples: usize,
    #[serde(flatten)]
    truth: &'a SemGroundTruth,
}

/// Sibling path for the ground truth of `out`: `data.csv` gives
/// `data.truth.json`.
pub fn truth_path(out: &Path) -> PathBuf {
    out.with_extension("truth.json")
}

/// `simulate`: draws `n` samples from a TOML spec, writes them as CSV and the
/// ground truth next to them. `seed` replaces the spec's seed.
pub fn cmd_simulate(spec_path: &Path, n: usize, out: &Path, seed: Option<u64>) -> Result<PathBuf, CliError> {
    let text = fs::read_to_string(spec_path).map_err(|e| CliError::io(spec_path, e))?;
    let mut spec = SemSpec::from_toml(&text)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if n < 3 {
        return Err(CliError::Invalid(format!("need at least 3 samples, got {n}")));
    }
    let (x, truth) = generate(&spec, n)?;
    let names: Vec<String> = (0..x.n_vars()).map(|i| format!("x{i}")).collect();
    write_data_csv(out, &names, &x)?;
    let label = spec.label.as_deref();
    let json = TruthJson {
        schema: SCHEMA,
        label,
        representative: label.is_some_and(|l| l.starts_with("fig")),
        n_samples: n,
        truth: &truth,
    };
    let path = truth_path(out);
    let text = serde_json::to_string_pretty(&json).map_err(|e| CliError::Other(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
