//! Command-line front end.
//!
//! Subcommands exchange curves as CSV files so each stage can be scripted
//! on its own. Exit codes: 0 success, 1 usage error, 2 config or
//! validation error, 3 I/O error. Diagnostics go to standard error.

pub mod config;
pub mod csv_io;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::curves::{self, RealCurve};
use crate::engine::{self, SimConfig, SweepParam};
use crate::fit::{self, FitSpec, FreeParam};

pub use config::{parse_config, ConfigError};
pub use csv_io::{read_csv, read_real_csv, write_csv, write_real_csv, CsvError};
pub use plot::{render_plot, PlotError};

#[derive(Debug, Parser)]
#[command(
    name = "explorer",
    version,
    about = "Novelty-versus-fear exploration simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one run and write its curve as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replicate-mean curves across values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        values: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        replicates: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover fear parameters from a target curve; prints JSON.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        free: Vec<String>,
        #[arg(long, default_value_t = 32)]
        replicates: u64,
        /// Coarse grid spacing over [0, 1].
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Timing and area differences of curve B relative to A; prints JSON.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Draw one or more curves as an SVG line chart.
    Plot {
        #[arg(long = "in", value_delimiter = ',', required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Series::Novel)]
        series: Series,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Series {
    Novel,
    Crossings,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Invalid(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invalid(m) | CliError::Io(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    parse_config(&read_file(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_curve(path: &Path) -> Result<RealCurve, CliError> {
    read_real_csv(&read_file(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Replicate seeds continue from the config seed.
fn replicate_seeds(config: &SimConfig, replicates: u64) -> Result<Vec<u64>, CliError> {
    if replicates == 0 {
        return Err(CliError::Usage("--replicates must be at least 1".into()));
    }
    Ok((0..replicates)
        .map(|i| config.seed.wrapping_add(i))
        .collect())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain structs serialise")
}

fn execute(
    command: Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let print =
        |w: &mut dyn Write, s: &str| writeln!(w, "{s}").map_err(|e| CliError::Io(e.to_string()));
    match command {
        Command::Run { config, seed, out } => {
            let mut config = load_config(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let result = engine::run_sim(&config).map_err(invalid)?;
            write_file(&out, &write_csv(&result.curve))?;
            print(
                stderr,
                &format!(
                    "completed={} ticks_used={} novel_total={}",
                    result.completed,
                    result.ticks_used,
                    result.curve.novel_total()
                ),
            )?;
        }
        Command::Sweep {
            config,
            param,
            values,
            replicates,
            out,
        } => {
            let config = load_config(&config)?;
            let param: SweepParam = param.parse().map_err(invalid)?;
            let seeds = replicate_seeds(&config, replicates)?;
            let rows = engine::sweep(&config, param, &values, &seeds).map_err(invalid)?;
            fs::create_dir_all(&out)
                .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            let mut summary = String::from("value,auc,peak_bin,t50\n");
            let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
            for row in &rows {
                let name = format!("{}_{}.csv", param.name(), row.value);
                write_file(&out.join(name), &write_real_csv(&row.mean.curve))?;
                summary.push_str(&format!(
                    "{},{},{},{}\n",
                    row.value,
                    row.auc,
                    opt(row.peak_bin),
                    opt(row.t50)
                ));
            }
            write_file(&out.join("summary.csv"), &summary)?;
        }
        Command::Fit {
            config,
            target,
            free,
            replicates,
            step,
        } => {
            let free = free
                .iter()
                .map(|s| {
                    FreeParam::parse(s)
                        .ok_or_else(|| CliError::Usage(format!("--free: unknown parameter `{s}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if !(step > 0.0 && step <= 1.0) {
                return Err(CliError::Usage("--step must lie in (0, 1]".into()));
            }
            let config = load_config(&config)?;
            let target = load_curve(&target)?;
            let seeds = replicate_seeds(&config, replicates)?;
            let spec = FitSpec::with_uniform_grid(config, free, seeds, step);
            let result = fit::fit_params(&spec, &target).map_err(invalid)?;
            print(stdout, &to_json(&result))?;
        }
        Command::Compare { a, b } => {
            let stats = curves::shift_stats(&load_curve(&a)?, &load_curve(&b)?).map_err(invalid)?;
            print(stdout, &to_json(&stats))?;
        }
        Command::Plot {
            inputs,
            out,
            series,
        } => {
            let curves = inputs
                .iter()
                .map(|path| {
                    let curve = load_curve(path)?;
                    let name = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| path.display().to_string());
                    let values = match series {
                        Series::Novel => curve.novel,
                        Series::Crossings => curve.crossings,
                    };
                    Ok((name, values))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let y_label = match series {
                Series::Novel => "novel cells per bin",
                Series::Crossings => "grid lines crossed per bin",
            };
            let svg = render_plot(&curves, "bin", y_label).map_err(invalid)?;
            write_file(&out, &svg)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let rendered = e.render().to_string();
            let _ = if informational {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return if informational { 0 } else { 1 };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
