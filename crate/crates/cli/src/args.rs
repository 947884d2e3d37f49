use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use srcd_core::ExtReal;

#[derive(Debug, Parser)]
#[command(name = "srcd", version, about = "Curvature-dimension analysis of left-invariant sub-Riemannian structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure checks, bound constants and the underlying tensors.
    Analyze(Common),
    /// Curvature-dimension parameters over a list of c values.
    Cd(CdArgs),
    /// Checks the inequality on random 2-jets.
    Verify(VerifyArgs),
    /// Spectral-gap lower bounds, compared with the oracle when available.
    Spectral(SpectralArgs),
    /// Simulates horizontal Brownian paths and checks the generator.
    Simulate(SimulateArgs),
    /// Exact sub-Laplacian eigenvalues over low irreducible representations.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct Common {
    /// JSON structure file.
    #[arg(long, value_name = "PATH", required_unless_present = "example", conflicts_with = "example")]
    pub structure: Option<PathBuf>,
    /// Built-in structure, e.g. `su2-double-v2:rho=1` or `free-step2:n=3`.
    #[arg(long, value_name = "NAME[:params]")]
    pub example: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit JSON (the default).
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    /// Emit a plain-text rendering of the JSON report.
    #[arg(long)]
    pub text: bool,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// One entry of `--c`: a positive number, `inf`, or `auto`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CChoice {
    Auto,
    Value(ExtReal),
}

impl FromStr for CChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "auto" {
            return Ok(CChoice::Auto);
        }
        let v: ExtReal = s.trim().parse().map_err(|_| format!("`{s}` is not a number, `inf` or `auto`"))?;
        match v {
            ExtReal::Finite(x) if x > 0.0 => Ok(CChoice::Value(v)),
            ExtReal::PosInf => Ok(CChoice::Value(v)),
            _ => Err(format!("c must be positive, got {s}")),
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct CdArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    pub c: Vec<CChoice>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10", value_parser = positive)]
    pub ell: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "auto,1")]
    pub c: Vec<CChoice>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest spin per factor for the oracle comparison.
    #[arg(long, default_value_t = 2.5)]
    pub jmax: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub t: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// `trace`, `entry:R,C`, `entry2:R,C`, `heis-r2` or `heis-r4`.
    #[arg(long, default_value = "trace")]
    pub function: String,
    /// Also write every path to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2.5)]
    pub jmax: f64,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Analyze(c) => c,
            Command::Cd(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Spectral(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Oracle(a) => &a.common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Cd(_) => "cd",
            Command::Verify(_) => "verify",
            Command::Spectral(_) => "spectral",
            Command::Simulate(_) => "simulate",
            Command::Oracle(_) => "oracle",
        }
    }
}
