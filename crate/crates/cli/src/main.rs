//! Command-line experiments on substitution tilings: validation, spectral
//! classification, cocycle sweeps, decay experiments and ε-traces.

mod args;
mod commands;
mod failure;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aperiodic_spectra::weakmixing::{Assertions, DEFAULT_WINDOW_RATIO, SEARCH_STEPS};

use commands::{EpsilonOptions, Source};
use failure::Failure;
use report::{Format, Report};

#[derive(Parser)]
#[command(name = "aperiodic-spectra", version, about = "Spectral experiments on substitution tilings")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Built-in rule: fib, np13, np21, npprod or fibprod
    #[arg(long, global = true)]
    fixture: Option<String>,

    /// Rule description in JSON
    #[arg(long, global = true)]
    rule: Option<PathBuf>,

    /// Replace the rule by its p-th power
    #[arg(long, global = true, default_value_t = 1)]
    power: usize,

    /// Worker threads; all cores when unset
    #[arg(long, global = true, env = "APERIODIC_SPECTRA_THREADS")]
    threads: Option<usize>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the rule and print its geometric constants
    Validate,
    /// Classify the expansion spectrum and the weak-mixing hypotheses
    Classify {
        #[arg(long)]
        assert_aperiodic: bool,
        #[arg(long)]
        assert_injective: bool,
    },
    /// List the tiles of an n-th order supertile
    Supertile {
        /// Prototile index or name
        #[arg(long = "type", default_value = "0")]
        kind: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Cocycle products against the Riesz bound over frequencies
    CocycleSweep {
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        /// a:b:pitch along --direction
        #[arg(long, allow_hyphen_values = true)]
        omega_grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Spectral-measure bounds on shrinking boxes around ω
    SpectralDecay {
        #[arg(long, default_value = "0.37", allow_hyphen_values = true)]
        omega: String,
        /// Box half-widths, e.g. 2^-3..2^-10
        #[arg(long, default_value = "2^-3..2^-10")]
        r: String,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Prototile carrying the hat observable
        #[arg(long, default_value = "0")]
        hat_type: String,
    },
    /// Cesàro means of squared correlations
    CorrelationDecay {
        /// Radii, e.g. 16..4096
        #[arg(long = "R", default_value = "16..4096")]
        radii: String,
        #[arg(long, default_value_t = aperiodic_spectra::birkhoff::DEFAULT_HORIZON_FACTOR)]
        horizon_factor: usize,
        #[arg(long, default_value = "0")]
        hat_type: String,
    },
    /// ε-trace of a frequency, or an eigenvalue search over a grid
    Epsilon {
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega_grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = SEARCH_STEPS)]
        n: usize,
        /// Window threshold; the companion-matrix δ₀ when unset
        #[arg(long)]
        delta0: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_RATIO)]
        window_ratio: usize,
    },
    /// Spectral bounds on cubes and on deformed boxes at the origin
    SelfaffineDecay {
        #[arg(long, default_value = "2^-2..2^-6")]
        r: String,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value = "0")]
        hat_type: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Classify { .. } => "classify",
            Command::Supertile { .. } => "supertile",
            Command::CocycleSweep { .. } => "cocycle-sweep",
            Command::SpectralDecay { .. } => "spectral-decay",
            Command::CorrelationDecay { .. } => "correlation-decay",
            Command::Epsilon { .. } => "epsilon",
            Command::SelfaffineDecay { .. } => "selfaffine-decay",
        }
    }
}

fn execute(command: &Command, src: &Source) -> Result<Report, Failure> {
    match command {
        Command::Validate => commands::cmd_validate(src),
        Command::Classify { assert_aperiodic, assert_injective } => commands::cmd_classify(
            src,
            Assertions { aperiodic: *assert_aperiodic, injective: *assert_injective },
        ),
        Command::Supertile { kind, n } => commands::cmd_supertile(src, kind, *n),
        Command::CocycleSweep { omega, omega_grid, direction, n } => {
            commands::cmd_cocycle_sweep(src, omega.as_deref(), omega_grid.as_deref(), direction.as_deref(), *n)
        }
        Command::SpectralDecay { omega, r, samples, hat_type } => {
            commands::cmd_spectral_decay(src, omega, r, *samples, hat_type)
        }
        Command::CorrelationDecay { radii, horizon_factor, hat_type } => {
            commands::cmd_correlation_decay(src, radii, *horizon_factor, hat_type)
        }
        Command::Epsilon { omega, omega_grid, direction, n, delta0, window_ratio } => commands::cmd_epsilon(
            src,
            &EpsilonOptions {
                omega: omega.as_deref(),
                grid: omega_grid.as_deref(),
                direction: direction.as_deref(),
                steps: *n,
                delta0: *delta0,
                window_ratio: *window_ratio,
            },
        ),
        Command::SelfaffineDecay { r, samples, hat_type } => {
            commands::cmd_selfaffine_decay(src, r, *samples, hat_type)
        }
    }
}

fn emit(cli: &Cli, report: Report) -> Result<(), Failure> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let name = cli.command.name();
    match report {
        Report::Table { table, summary } => match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                report::write_csv(&table, &mut out)?;
                for line in report::summary_lines(&summary) {
                    eprintln!("{line}");
                }
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &report::table_json(name, &table, &summary))?;
                writeln!(out)?;
            }
        },
        Report::Document(body) => {
            if cli.format == Some(Format::Csv) {
                return Err(Failure::Usage(format!("{name} reports JSON only")));
            }
            serde_json::to_writer_pretty(&mut out, &report::document_json(name, body))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let src = commands::load(cli.fixture.as_deref(), cli.rule.as_deref(), cli.power)?;
    let report = match cli.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(|| execute(&cli.command, &src))?,
        None => execute(&cli.command, &src)?,
    };
    emit(cli, report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
