//! Command-line pipeline: configuration, stage execution and JSON reports.

pub mod config;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hdx_core::rational::{from_text, Rational};

use config::{ConstructionKind, ExperimentConfig, Stage};

#[derive(Debug, Parser)]
#[command(name = "hdx", version, about = "Coset complex experiments with JSON reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the group and its coset complex (or load a complex file).
    Build,
    /// Strong symmetry and bounded generation.
    Symmetry,
    /// Reduced F2 (co)homology and systoles.
    Homology,
    /// Cone functions and cone radius.
    Cones,
    /// Expansion constants and their certified lower bounds.
    Expansion,
    /// Walk spectra of the complex and its links.
    Spectral,
    /// Relations, triangle words, residual relations and the Dehn estimate.
    Presentation,
    /// Hypotheses of the cosystolic expansion criterion.
    Checklist,
    /// Every stage in order.
    All,
    /// Build the 4 x 4 group over F_q[t]/(t^s) and check symmetry.
    Xsq,
}

#[derive(Debug, Args)]
pub struct Options {
    #[arg(long, global = true, value_enum, default_value = "unip_fq")]
    pub construction: ConstructionKind,
    /// Matrices are (n+1) x (n+1); the complex has dimension n-1.
    #[arg(long, global = true, default_value_t = 3)]
    pub n: usize,
    /// Field size (defaults to 3, or 2 for `xsq`).
    #[arg(long, global = true)]
    pub q: Option<u32>,
    /// Truncation degree for `xsq`.
    #[arg(long, global = true, default_value_t = 5)]
    pub s: usize,
    /// Complex file for `--construction file`.
    #[arg(long, global = true)]
    pub complex: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub k: isize,
    /// Exhaustive searches are capped at 2^budget-log2 steps.
    #[arg(long = "budget-log2", global = true, default_value_t = 20)]
    pub budget_log2: u32,
    /// Group enumeration stops beyond 2^size-cap-log2 elements.
    #[arg(long = "size-cap-log2", global = true, default_value_t = 22)]
    pub size_cap_log2: u32,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "hdx-out")]
    pub out: PathBuf,
    /// Local spectral threshold for the checklist.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub lambda: f64,
    /// Link coboundary expansion threshold, as "p/q".
    #[arg(long, global = true, default_value = "1/10", value_parser = parse_rational)]
    pub epsilon: Rational,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    from_text(s).ok_or_else(|| format!("not a rational: {s}"))
}

impl Cli {
    pub fn config(&self) -> ExperimentConfig {
        let o = &self.opts;
        let stages = match self.command {
            Command::Build => vec![Stage::Build],
            Command::Symmetry | Command::Xsq => vec![Stage::Build, Stage::Symmetry],
            Command::Homology => vec![Stage::Build, Stage::Homology],
            Command::Cones => vec![Stage::Build, Stage::Cones],
            Command::Expansion => vec![Stage::Build, Stage::Expansion],
            Command::Spectral => vec![Stage::Build, Stage::Spectral],
            Command::Presentation => vec![Stage::Build, Stage::Presentation],
            Command::Checklist => vec![Stage::Build, Stage::Checklist],
            Command::All => vec![
                Stage::Build,
                Stage::Symmetry,
                Stage::Homology,
                Stage::Cones,
                Stage::Expansion,
                Stage::Spectral,
                Stage::Presentation,
                Stage::Checklist,
            ],
        };
        let xsq = matches!(self.command, Command::Xsq);
        ExperimentConfig {
            construction: if xsq { ConstructionKind::Xsq } else { o.construction },
            n: o.n,
            q: o.q.unwrap_or(if xsq { 2 } else { 3 }),
            s: o.s,
            complex: o.complex.clone(),
            k: o.k,
            budget_log2: o.budget_log2,
            size_cap_log2: o.size_cap_log2,
            lambda: o.lambda,
            epsilon: o.epsilon,
            stages,
            seed: o.seed,
        }
    }
}
