use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use parcelingam::evaluation::Method;
use parcelingam::simgen::{builtin_network, NetworkName};
use parcelingam_cli::bench::{cmd_benchmark, Suite, TableGrid};
use parcelingam_cli::{cmd_discover, cmd_simulate, CliError, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "parcelingam", version, about = "Causal ordering estimation robust to latent confounders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a causal ordering matrix from a CSV (header row, one sample per row).
    Discover {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Rows are variables (name first), not samples.
        #[arg(long)]
        transpose: bool,
        #[arg(long, default_value_t = 15)]
        subset_cap: usize,
        /// Cap on samples per HSIC test.
        #[arg(long)]
        hsic_cap: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw data from a TOML model spec; the ground truth goes next to the CSV.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a builtin network as a TOML spec.
    Spec {
        /// fig2_5var, fig3_10var, fig4_15var, confounded_chain_4var, chain:D, random_dag:D:DENSITY:Q
        #[arg(long)]
        network: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite: table1_4_desk or lemma_calibration.
    Benchmark {
        #[arg(long)]
        suite: String,
        /// Trials per cell (default 20; 50 for lemma_calibration).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Comma-separated network names for table1_4_desk.
        #[arg(long, value_delimiter = ',')]
        networks: Option<Vec<String>>,
        /// Comma-separated sample sizes for table1_4_desk.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Only run the full pipeline, not the hybrid-only baseline.
        #[arg(long)]
        skip_baseline: bool,
        #[arg(long, default_value_t = 15)]
        subset_cap: usize,
        #[arg(long)]
        hsic_cap: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io { path: p.display().to_string(), source: e }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io { path: "<stdout>".into(), source: e }),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Discover { input, alpha, seed, format, transpose, subset_cap, hsic_cap, threads, out } => {
            let config = RunConfig {
                alpha,
                seed,
                subset_cap,
                hsic_cap,
                threads,
                format: match format {
                    Format::Json => OutputFormat::Json,
                    Format::Csv => OutputFormat::Csv,
                },
                transpose,
                ..Default::default()
            };
            let text = cmd_discover(&input, &config)?;
            write_out(out.as_ref(), &text)
        }
        Command::Simulate { spec, n, out, seed } => {
            let truth = cmd_simulate(&spec, n, &out, seed)?;
            log::info!("wrote {} and {}", out.display(), truth.display());
            Ok(())
        }
        Command::Spec { network, seed, out } => {
            let name: NetworkName = network.parse()?;
            let text = builtin_network(&name, seed)?.to_toml()?;
            write_out(out.as_ref(), &text)
        }
        Command::Benchmark {
            suite,
            trials,
            out,
            seed,
            alpha,
            networks,
            sizes,
            skip_baseline,
            subset_cap,
            hsic_cap,
            threads,
        } => {
            let suite: Suite = suite.parse()?;
            let config = RunConfig { alpha, seed, subset_cap, hsic_cap, threads, ..Default::default() };
            config.discovery().validate()?;
            let mut grid = TableGrid::default();
            if let Some(names) = networks {
                grid.networks = names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
            }
            if let Some(sizes) = sizes {
                grid.sizes = sizes;
            }
            if skip_baseline {
                grid.methods = vec![Method::ParceLingam];
            }
            let path = cmd_benchmark(suite, trials, &grid, &config, &out)?;
            log::info!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Discovery(parcelingam::discovery::DiscoveryError::SubsetBudgetExceeded { .. }) = e {
                eprintln!("hint: pass a larger --subset-cap, or analyze a subset of the variables");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
