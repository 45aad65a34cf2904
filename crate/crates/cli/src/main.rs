//! `maglattice`: field maps, trap tables, mode couplings and Josephson
//! dynamics for the asymmetric 2D magnetic lattice.
//!
//! Every run writes its data files plus `manifest.json` into `--out`.
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! failure, 4 I/O.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;
mod parse;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maglattice::config::ConfigDocument;
use maglattice::{ErrorKind, RunConfig};

use crate::manifest::{compare_csv, FileCheck, RunManifest};
use crate::parse::{ChainInit, Height};

#[derive(Parser, Debug)]
#[command(
    name = "maglattice",
    version,
    about = "Asymmetric 2D magnetic lattice: fields, traps, couplings, Josephson dynamics"
)]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true, env = "MAGLATTICE_CONFIG")]
    config: Option<PathBuf>,

    /// Override one configuration key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Which data formats to write.
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Recompute and compare against the files recorded in the manifest in
    /// `--out` instead of overwriting them.
    #[arg(long, global = true)]
    check: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }
    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// |B| on a plane.
    Field(FieldArgs),
    /// Locate and characterize a trap site, or scan a bias component.
    Traps(TrapArgs),
    /// Zero-point, interaction and Josephson energies for a chain of sites.
    Coupling(CouplingArgs),
    /// Two-mode or n-site Josephson dynamics.
    Bjj(BjjArgs),
    /// List configuration keys and units.
    Keys,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlaneArg {
    Xy,
    Zx,
    Yz,
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    #[arg(long, value_enum)]
    pub plane: PlaneArg,
    /// Height of an xy plane in µm above z = 0, or `at-dmin`.
    #[arg(long, value_parser = parse::height, default_value = "at-dmin")]
    pub z: Height,
    /// y of a zx plane (µm).
    #[arg(long, value_parser = parse::angle, default_value = "0")]
    pub y: f64,
    /// x of a yz plane (µm).
    #[arg(long, value_parser = parse::angle, default_value = "0")]
    pub x: f64,
    /// First in-plane axis range, µm (default: two periods, or film top
    /// upwards for z).
    #[arg(long, value_parser = parse::interval)]
    pub u_range: Option<(f64, f64)>,
    /// Second in-plane axis range, µm.
    #[arg(long, value_parser = parse::interval)]
    pub v_range: Option<(f64, f64)>,
    /// Samples per axis.
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    pub resolution: u64,
}

#[derive(Args, Debug)]
pub struct TrapArgs {
    /// Scan one bias component: AXIS LO:HI:STEPS with values in gauss,
    /// e.g. `--scan bz 1:20:40`.
    #[arg(long, num_args = 2, value_names = ["AXIS", "LO:HI:STEPS"])]
    pub scan: Option<Vec<String>>,
    /// Locate degenerate minima at the fallback height instead of failing.
    #[arg(long)]
    pub fallback: bool,
}

#[derive(Args, Debug)]
pub struct CouplingArgs {
    /// Number of sites along x.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub sites: u64,
    /// Instead of the configured bias, compare the untilted (Bx = By = 10 G,
    /// Bz = 0, δ = 0) and tilted (Bx = By = −Bz = 10 G, δ ≠ 0) pair.
    #[arg(long)]
    pub tilt_compare: bool,
    /// Tilt for the tilted case in multiples of M·g (used when the
    /// configuration has no tilt).
    #[arg(long, default_value_t = 1.0)]
    pub tilt_gravity: f64,
}

#[derive(Args, Debug)]
pub struct BjjArgs {
    /// Initial population imbalance Ñ(0).
    #[arg(long, value_parser = parse::angle, default_value = "0.99")]
    pub n0: f64,
    /// Run one trajectory per listed Ñ(0).
    #[arg(long, value_parser = parse::angle, value_delimiter = ',', num_args = 1..)]
    pub sweep_n0: Option<Vec<f64>>,
    /// Initial phase difference θ̃(0); accepts multiples of pi.
    #[arg(long, value_parser = parse::angle, default_value = "pi")]
    pub theta0: f64,
    /// End time: rescaled units 2|Ω^J|t/ħ for two-mode runs, ħ/|Ω^J| for
    /// chains.
    #[arg(long, value_parser = parse::angle, default_value = "20pi")]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Keep every k-th step.
    #[arg(long, default_value_t = 10)]
    pub decimation: usize,
    /// Coupling Ω^J in h·kHz.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega_j: f64,
    /// Take E^o, Γ and Ω^J from a couplings JSON written by `coupling`.
    #[arg(long)]
    pub couplings: Option<PathBuf>,
    /// Add the closed-form Ñ(t) as a column.
    #[arg(long)]
    pub oracle: bool,
    /// Integrate an n-site chain instead of the two-mode equations.
    #[arg(long)]
    pub chain: Option<usize>,
    /// Chain initial state: center, site:K or pair:N0[:THETA].
    #[arg(long, value_parser = parse::chain_init, default_value = "center")]
    pub init: ChainInit,
    /// Chain diagonal: frozen or self-consistent.
    #[arg(long, default_value = "frozen")]
    pub chain_mode: String,
}

/// Outcome of a subcommand: a user-facing error with its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<maglattice::Error> for Failure {
    fn from(e: maglattice::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 4,
            message: format!("I/O error: {e}"),
        }
    }
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

/// Files produced by a run, relative to the output directory, with their
/// contents.
pub type Outputs = Vec<(PathBuf, String)>;

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut doc = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure {
                code: 4,
                message: format!("cannot read config {}: {e}", path.display()),
            })?;
            ConfigDocument::parse(&text)?
        }
        None => ConfigDocument::default(),
    };
    for assignment in &cli.set {
        doc.set_override(assignment)?;
    }
    Ok(doc.resolve()?)
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Field(_) => "field",
        Command::Traps(_) => "traps",
        Command::Coupling(_) => "coupling",
        Command::Bjj(_) => "bjj",
        Command::Keys => "keys",
    }
}

fn produce(cli: &Cli, run: &RunConfig) -> Result<Outputs, Failure> {
    match &cli.command {
        Command::Field(a) => commands::field(run, a, cli.format),
        Command::Traps(a) => commands::traps(run, a, cli.format),
        Command::Coupling(a) => commands::coupling(run, a, cli.format),
        Command::Bjj(a) => commands::bjj(run, a, cli.format),
        Command::Keys => unreachable!("handled before producing outputs"),
    }
}

fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<Vec<PathBuf>, Failure> {
    for (rel, text) in outputs {
        fs::write(dir.join(rel), text)?;
    }
    Ok(outputs.iter().map(|(p, _)| p.clone()).collect())
}

/// Numeric tolerance for `--check` when files are not byte-identical.
const CHECK_TOLERANCE: f64 = 1e-9;

fn check(cli: &Cli, run: &RunConfig) -> Result<(), Failure> {
    let recorded = RunManifest::read(&cli.out)?;
    if recorded.status != "complete" {
        return Err(Failure::usage(format!(
            "manifest in {} is not from a completed run",
            cli.out.display()
        )));
    }
    let outputs = produce(cli, run)?;
    let mut failed = false;
    for rec in &recorded.outputs {
        let Some((_, fresh)) = outputs
            .iter()
            .find(|(p, _)| p.to_string_lossy() == rec.path)
        else {
            println!("{}: not produced by this invocation", rec.path);
            failed = true;
            continue;
        };
        let old = fs::read_to_string(cli.out.join(&rec.path))?;
        let verdict = if manifest::sha256_hex(old.as_bytes()) != rec.sha256 {
            FileCheck::Differs {
                reason: "file on disk no longer matches its recorded hash".into(),
            }
        } else if rec.path.ends_with(".csv") {
            compare_csv(&old, fresh, CHECK_TOLERANCE)
        } else if old == *fresh {
            FileCheck::Identical
        } else {
            FileCheck::Differs {
                reason: "content differs".into(),
            }
        };
        match verdict {
            FileCheck::Identical => println!("{}: identical", rec.path),
            FileCheck::WithinTolerance { max_relative } => {
                println!(
                    "{}: within tolerance (max relative {max_relative:.2e})",
                    rec.path
                )
            }
            FileCheck::Differs { reason } => {
                println!("{}: DIFFERS ({reason})", rec.path);
                failed = true;
            }
        }
    }
    if failed {
        Err(Failure {
            code: 3,
            message: "recomputed outputs differ from the manifest".into(),
        })
    } else {
        Ok(())
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    if let Command::Keys = cli.command {
        for (key, unit) in maglattice::config::CONFIG_KEYS {
            println!("{key:<24} {unit}");
        }
        return Ok(());
    }
    let run = load_config(cli)?;
    if cli.check {
        return check(cli, &run);
    }
    fs::create_dir_all(&cli.out)?;
    let config = serde_json::to_value(&run).map_err(|e| Failure::usage(e.to_string()))?;
    let mut manifest = RunManifest::begin(
        subcommand_name(&cli.command),
        std::env::args().skip(1).collect(),
        config,
    );
    manifest.write(&cli.out)?;
    let outputs = produce(cli, &run)?;
    let files = write_outputs(&cli.out, &outputs)?;
    manifest.finish(&cli.out, &files)?;
    for f in &files {
        println!("{}", cli.out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
