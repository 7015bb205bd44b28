//! `bt`: spectra of invariant Toeplitz operators on weighted Bergman spaces.

mod config;
mod output;
mod spectrum;
mod table;
mod verify;

use clap::{Args, Parser, Subcommand};
use config::{read_config_file, Format, JobConfig};
use serde_json::{Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "bt", version, about = "Spectra of invariant Toeplitz operators on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral function of an invariant symbol on a frequency box.
    Spectrum(JobArgs),
    /// Run self-checks and print a JSON report.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the convolution kernel or its Fourier transform as CSV.
    KernelTable {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, value_enum, default_value = "samples")]
        table: table::Table,
        /// Torus grid points per axis.
        #[arg(long, default_value_t = 64)]
        torus_points: usize,
        #[arg(long, default_value_t = 4.0)]
        x_max: f64,
        #[arg(long, default_value_t = 0.25)]
        x_step: f64,
    },
}

/// Job flags; each overrides the same key of `--config`.
#[derive(Args, Default)]
struct JobArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// E, P, H or N.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Torus rank of a quasi-nilpotent family.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Symbol spec such as `modulus_sq` or `height_decay(0.5)`.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_max: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi_step: Option<f64>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

impl JobArgs {
    fn resolve(&self) -> bt_core::Result<JobConfig> {
        let mut map = match &self.config {
            Some(path) => read_config_file(path)?,
            None => Map::new(),
        };
        let mut set = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                map.insert(key.into(), v);
            }
        };
        set("family", self.family.clone().map(Value::from));
        set("n", self.n.map(Value::from));
        set("k", self.k.map(Value::from));
        set("lambda", self.lambda.map(Value::from));
        set("symbol", self.symbol.clone().map(Value::from));
        set("alpha_min", self.alpha_min.map(Value::from));
        set("alpha_max", self.alpha_max.map(Value::from));
        set("xi_min", self.xi_min.map(Value::from));
        set("xi_max", self.xi_max.map(Value::from));
        set("xi_step", self.xi_step.map(Value::from));
        set("level", self.level.map(Value::from));
        set("out", self.out.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned())));
        set("format", self.format.map(|f| serde_json::to_value(f).expect("format serializes")));
        JobConfig::from_map(map)
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("BT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("BT_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    if let Err(e) = init_threads() {
        return input_error(e);
    }
    match cli.command {
        Command::Spectrum(args) => match args.resolve() {
            Ok(cfg) if args.dump_config => {
                println!("{}", cfg.to_json());
                ExitCode::SUCCESS
            }
            Ok(cfg) => match spectrum::run(&cfg) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => input_error(e),
            },
            Err(e) => input_error(e),
        },
        Command::KernelTable {
            job,
            table,
            torus_points,
            x_max,
            x_step,
        } => {
            let grid = table::SampleGrid {
                torus_points,
                x_max,
                x_step,
            };
            match job.resolve().and_then(|cfg| table::run(&cfg, table, grid)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => input_error(e),
            }
        }
        Command::Verify { suite, level, out } => {
            if !(1..=8).contains(&level) {
                return input_error(format!("level {level} outside 1..=8"));
            }
            let report = match verify::run(&suite, level) {
                Ok(r) => r,
                Err(e) => return input_error(e),
            };
            let written = output::sink(out.as_deref()).and_then(|w| output::write_json(w, &report));
            if let Err(e) = written {
                return input_error(format!("output: {e}"));
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY)
            }
        }
    }
}
