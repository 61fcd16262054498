//! Command-line front end (`ewb`).
//!
//! Exit codes: 0 success, 1 a bound violation was detected, 2 usage or
//! validation error. Tables are long-format CSV with floats printed at 17
//! significant digits; reports are JSON. When `--out` is given, a run manifest
//! (command, parameters, seeds, version, timestamp, generator) is written next
//! to the artifact as `<out>.manifest.json`; otherwise it goes to stderr. The
//! artifacts themselves carry no timestamp, so reruns are byte-identical.

mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};

pub use commands::run;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "ewb",
    version,
    about = "Erasure Welch bounds for unit-norm frames"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build a frame and write it as JSON.
    Construct(ConstructArgs),
    /// Expected erasure moments m_d(p).
    Moments(MomentsArgs),
    /// Erasure Welch bound reports.
    Bound(BoundArgs),
    /// MANOVA moment or density tables.
    Manova(ManovaArgs),
    /// Moment/bound sweep over a frame family.
    Sweep(SweepArgs),
    /// Eigenvalues of sampled subset Gram matrices.
    Spectrum(SpectrumArgs),
    /// KS distance between pooled subset eigenvalues and the MANOVA law.
    Ks(SpectrumArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameKind {
    Random,
    Simplex,
    Harmonic,
    RepeatedOnb,
    NearestUtf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for crate::frames::Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => crate::frames::Field::Real,
            FieldArg::Complex => crate::frames::Field::Complex,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Poly,
    Brute,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Random,
    Simplex,
    Harmonic,
    RepeatedOnb,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub kind: FrameKind,
    /// Ambient dimension (random, simplex, repeated-onb; nearest-utf without --frame).
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of vectors (random; nearest-utf without --frame).
    #[arg(long)]
    pub n: Option<usize>,
    /// Prime q ≡ 3 (mod 4) (harmonic).
    #[arg(long)]
    pub q: Option<u64>,
    /// Number of basis copies (repeated-onb).
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
    #[arg(long, value_enum, default_value = "real")]
    pub field: FieldArg,
    #[arg(long, env = "EWB_DEFAULT_SEED")]
    pub seed: Option<u64>,
    /// Input frame for nearest-utf.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
    #[arg(long, value_enum, default_value = "poly")]
    pub method: Method,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, env = "EWB_DEFAULT_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub d: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct ManovaArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub d: Vec<usize>,
    /// Emit the bulk density on an even grid instead of the moment table.
    #[arg(long)]
    pub density: bool,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Family parameter list: m for simplex/repeated-onb, q for harmonic.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<u64>,
    /// Dimensions for the random family.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of random frames (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
    #[arg(long, value_enum, default_value = "real")]
    pub field: FieldArg,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub d: Vec<usize>,
    /// Subset-spectrum trials for the optional KS column.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, env = "EWB_DEFAULT_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub trials: usize,
    #[arg(long, env = "EWB_DEFAULT_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a Command,
    pub seeds: Vec<u64>,
    pub library_version: &'static str,
    pub generator: &'static str,
    pub timestamp: String,
}

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn write_artifact(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn write_manifest(
    command: &Command,
    seeds: Vec<u64>,
    out: Option<&Path>,
    stderr: &mut dyn Write,
) -> Result<()> {
    let manifest = RunManifest {
        command,
        seeds,
        library_version: env!("CARGO_PKG_VERSION"),
        generator: crate::rng::GENERATOR,
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    match out {
        Some(path) => {
            let mut name = path.as_os_str().to_owned();
            name.push(".manifest.json");
            std::fs::write(
                PathBuf::from(name),
                serde_json::to_string_pretty(&manifest)? + "\n",
            )?;
        }
        None => writeln!(stderr, "manifest: {}", serde_json::to_string(&manifest)?)?,
    }
    Ok(())
}
