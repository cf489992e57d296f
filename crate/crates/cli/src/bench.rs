//! `benchmark` suites. Each cell is appended to its CSV and flushed as soon
//! as it finishes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use parcelingam::evaluation::calibration::{
    exogenous_rates, hsic_false_positive_rate, hsic_vs_permutation, sink_rates,
};
use parcelingam::evaluation::{mean_scores, run_trials, score_ordering, Method, TrialSetup};
use parcelingam::simgen::NetworkName;
use serde::{Deserialize, Serialize};

use crate::{CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Table14Desk,
    LemmaCalibration,
}

impl std::str::FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "table1_4_desk" => Ok(Self::Table14Desk),
            "lemma_calibration" => Ok(Self::LemmaCalibration),
            other => Err(CliError::Invalid(format!(
                "unknown suite `{other}`; expected table1_4_desk or lemma_calibration"
            ))),
        }
    }
}

/// Cells of the desk-scale table suite.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGrid {
    pub networks: Vec<NetworkName>,
    pub sizes: Vec<usize>,
    pub methods: Vec<Method>,
}

impl Default for TableGrid {
    fn default() -> Self {
        Self {
            networks: vec![NetworkName::Fig2FiveVar, NetworkName::Fig3TenVar],
            sizes: vec![500, 1000],
            methods: vec![Method::ParceLingam, Method::HybridOnly],
        }
    }
}

struct CsvSink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvSink {
    fn create(path: PathBuf, header: &str) -> Result<Self, CliError> {
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut sink = Self { path, out: BufWriter::new(file) };
        sink.line(header)?;
        Ok(sink)
    }

    fn line(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.out, "{line}").and_then(|_| self.out.flush()).map_err(|e| CliError::io(&self.path, e))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

pub const TABLE_HEADER: &str = "method,network,dim,n,trials,precision,recall,f_measure,max_recall,\
precision_excl,recall_excl,f_measure_excl,rmse,mean_seconds,wall_seconds";

/// Runs every (method, network, n) cell and writes `table1_4_desk.csv`.
pub fn run_table(grid: &TableGrid, trials: usize, config: &RunConfig, out_dir: &Path) -> Result<PathBuf, CliError> {
    let path = out_dir.join("table1_4_desk.csv");
    let mut sink = CsvSink::create(path.clone(), TABLE_HEADER)?;
    for &method in &grid.methods {
        for network in &grid.networks {
            for &n in &grid.sizes {
                let setup = TrialSetup {
                    network: network.clone(),
                    n,
                    method,
                    discovery: config.discovery(),
                    hsic: config.hsic().config,
                    exclude_path_free: false,
                };
                let start = Instant::now();
                let outcomes =
                    run_trials(&setup, trials, config.seed).map_err(|e| CliError::Other(e.to_string()))?;
                let wall = start.elapsed().as_secs_f64();
                let with: Vec<_> = outcomes.iter().map(|o| o.score.clone()).collect();
                let without: Vec<_> = outcomes
                    .iter()
                    .map(|o| score_ordering(&o.result.ordering, &o.truth, true).expect("generated ids"))
                    .collect();
                let (m, mx) = (mean_scores(&with), mean_scores(&without));
                let max_recall = outcomes.iter().map(|o| o.max_recall).sum::<f64>() / trials.max(1) as f64;
                let mean_secs = outcomes.iter().map(|o| o.seconds).sum::<f64>() / trials.max(1) as f64;
                let dim = outcomes.first().map_or(0, |o| o.truth.true_b.len());
                sink.line(&format!(
                    "{method},{network},{dim},{n},{trials},{},{:.4},{:.4},{max_recall:.4},{},{:.4},{:.4},{},{mean_secs:.3},{wall:.3}",
                    opt(m.precision),
                    m.recall,
                    m.f_measure,
                    opt(mx.precision),
                    mx.recall,
                    mx.f_measure,
                    opt(m.rmse),
                ))?;
                log::info!(
                    "{method} {network} n={n}: precision {} recall {:.3} ({wall:.1}s)",
                    opt(m.precision),
                    m.recall
                );
            }
        }
    }
    Ok(path)
}

pub const CALIBRATION_HEADER: &str = "check,n,trials,rate,lower,upper,pass";

/// Residual-property rates and HSIC calibration, written to
/// `lemma_calibration.csv`. `reps` is the null repetition count.
pub fn run_calibration(trials: usize, reps: usize, config: &RunConfig, out_dir: &Path) -> Result<PathBuf, CliError> {
    let path = out_dir.join("lemma_calibration.csv");
    let mut sink = CsvSink::create(path.clone(), CALIBRATION_HEADER)?;
    let alpha = config.alpha;
    let mut row = |check: &str, n: usize, count: usize, rate: f64, lo: f64, hi: f64| {
        let pass = (lo..=hi).contains(&rate);
        log::info!("{check} n={n}: {rate:.3} [{lo}, {hi}] {}", if pass { "pass" } else { "FAIL" });
        sink.line(&format!("{check},{n},{count},{rate:.4},{lo},{hi},{pass}"))
    };
    let other = |e: parcelingam::evaluation::calibration::CalibrationError| CliError::Other(e.to_string());
    let n = 2000;
    let ex = exogenous_rates(4, n, trials, config.seed, alpha).map_err(other)?;
    row("exogenous_accepted", n, trials, ex.accept_true, 0.9, 1.0)?;
    row("non_exogenous_rejected", n, trials, ex.reject_others, 0.9, 1.0)?;
    let sk = sink_rates(4, n, trials, config.seed, alpha).map_err(other)?;
    row("sink_accepted", n, trials, sk.accept_true, 0.9, 1.0)?;
    row("non_sink_rejected", n, trials, sk.reject_others, 0.9, 1.0)?;
    for n in [100, 500] {
        let fp = hsic_false_positive_rate(n, reps, config.seed, alpha);
        row("hsic_false_positive", n, reps, fp, 0.02, 0.09)?;
        let (g, p) = hsic_vs_permutation(n, 50, 1000, config.seed, alpha);
        row("hsic_minus_permutation", n, 50, g - p, -0.04, 0.04)?;
    }
    Ok(path)
}

/// `benchmark`: runs one suite into `out_dir`. `trials` defaults to 20 for
/// the table suite and 50 for the calibration suite.
pub fn cmd_benchmark(
    suite: Suite,
    trials: Option<usize>,
    grid: &TableGrid,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    crate::with_threads(config.effective_threads(), || match suite {
        Suite::Table14Desk => run_table(grid, trials.unwrap_or(20), config, out_dir),
        Suite::LemmaCalibration => run_calibration(trials.unwrap_or(50), 500, config, out_dir),
    })?
}
