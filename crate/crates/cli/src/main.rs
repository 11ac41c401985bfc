//! `mfqec`: threshold sweeps, plot data and circuit listings.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mfqec::builders::{build_scheme, CodeKind};
use mfqec::circuit::{enumerate_error_sites, CycleSelector, Variant};
use mfqec::stats::derive_seed;
use mfqec::threshold::{find_threshold_crossing, point_seed, sweep_point, ThresholdError};

use config::{parse_code, parse_variant, RawConfig, RunConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_NO_CROSSING: u8 = 2;

#[derive(Parser)]
#[command(name = "mfqec", version, about = "Measurement-free QEC threshold simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep physical error rates and write one CSV row per point.
    Run(RunArgs),
    /// Turn a sweep CSV into two-column curve files and an identity line.
    Plot {
        csv: PathBuf,
        /// Directory for the .dat files (defaults to the CSV's directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the instruction listing of the built circuits.
    ListCircuits {
        #[arg(long)]
        code: Option<String>,
        #[arg(long)]
        variant: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<String>,
    /// perfect, simplified or none (uncorrected baseline).
    #[arg(long)]
    variant: Option<String>,
    /// Comma-separated physical error rates.
    #[arg(long = "p-grid", visible_alias = "p", alias = "p_grid", value_delimiter = ',', allow_negative_numbers = true)]
    p_grid: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long = "master-seed", visible_alias = "seed", alias = "master_seed")]
    master_seed: Option<u64>,
    #[arg(long = "max-cycles", alias = "max_cycles")]
    max_cycles: Option<u64>,
    #[arg(long, env = "MFQEC_WORKERS")]
    workers: Option<u64>,
    /// CSV destination; standard output when omitted.
    #[arg(long = "output-path", visible_alias = "output", alias = "output_path", short = 'o')]
    output_path: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, config::ConfigError> {
        let file = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        let flags = RawConfig {
            code: self.code,
            variant: self.variant,
            p_grid: self.p_grid,
            trials: self.trials,
            master_seed: self.master_seed,
            max_cycles: self.max_cycles,
            workers: self.workers,
            output_path: self.output_path,
        };
        file.overridden_by(flags).validate()
    }
}

fn run(cfg: RunConfig) -> anyhow::Result<ExitCode> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let mut points = Vec::with_capacity(cfg.p_grid.len());
    for (i, &p) in cfg.p_grid.iter().enumerate() {
        eprintln!("[{}/{}] {} {} p={p:e} trials={}", i + 1, cfg.p_grid.len(), cfg.code_name, cfg.variant_name, cfg.trials);
        let seed = point_seed(cfg.master_seed, i);
        let pt = pool.install(|| sweep_point(cfg.code, cfg.variant, p, cfg.trials, seed, cfg.max_cycles))?;
        if pt.all_censored {
            eprintln!("    all {} trials censored", pt.n_trials);
        } else {
            eprintln!("    p_log={:e} [{:e}, {:e}]", pt.p_log, pt.ci_low, pt.ci_high);
        }
        points.push(pt);
        if let Some(path) = &cfg.output_path {
            let text = output::render_csv(&cfg.code_name, &cfg.variant_name, cfg.master_seed, &points, None, true);
            output::write_atomic(path, &text).with_context(|| format!("writing {}", path.display()))?;
        }
    }

    let mut status = ExitCode::SUCCESS;
    let threshold = if points.len() >= 2 {
        match find_threshold_crossing(&points, derive_seed(cfg.master_seed, u64::MAX - 1)) {
            Ok(t) => Some(t),
            Err(ThresholdError::NoCrossing | ThresholdError::TooFewPoints(_)) => {
                eprintln!("no crossing of p_log = p within the grid");
                status = ExitCode::from(EXIT_NO_CROSSING);
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let text = output::render_csv(&cfg.code_name, &cfg.variant_name, cfg.master_seed, &points, threshold.as_ref(), false);
    match &cfg.output_path {
        Some(path) => {
            output::write_atomic(path, &text).with_context(|| format!("writing {}", path.display()))?;
            if let Some(t) = &threshold {
                println!("{}", output::threshold_line(&cfg.code_name, &cfg.variant_name, t));
            }
        }
        None => print!("{text}"),
    }
    Ok(status)
}

fn list_circuits(code: Option<String>, variant: Option<String>) -> anyhow::Result<ExitCode> {
    let codes = match code.as_deref() {
        Some(name) => vec![parse_code(name)?],
        None => vec![CodeKind::BitFlip, CodeKind::Surface17],
    };
    let variants = match variant.as_deref() {
        Some(name) => vec![parse_variant(name)?],
        None => vec![Some(Variant::Perfect), Some(Variant::Simplified)],
    };
    for &c in &codes {
        for &v in &variants {
            let circuit = build_scheme(c, v);
            let n = enumerate_error_sites(&circuit, CycleSelector::A)?.len();
            println!("# error sites per cycle: {n}");
            print!("{}", circuit.listing());
            if v.is_none() {
                return Ok(ExitCode::SUCCESS);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => match args.resolve() {
            Ok(cfg) => run(cfg),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        Command::Plot { csv, out_dir } => {
            let dir = out_dir.unwrap_or_else(|| csv.parent().map(PathBuf::from).unwrap_or_default());
            output::emit_plot_data(&csv, &dir).map(|files| {
                for f in files.curves.iter().chain([&files.identity]) {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }).map_err(Into::into)
        }
        Command::ListCircuits { code, variant } => list_circuits(code, variant),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
