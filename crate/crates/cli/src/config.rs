//! Command-line parsing and the resolved run configuration.
//!
//! Every option can come from a flag, from a `FERMI_OT_*` environment
//! variable, or from a TOML or JSON config file. Flags win over the
//! environment, which wins over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "fermi-ot", version, about = "Optimal-transport geometry on fermionic density matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Config file (.toml or .json) with defaults for any option below.
    #[arg(long, global = true, env = "FERMI_OT_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Heat-flow trajectory of a density as CSV.
    Flow,
    /// Transport distance between two densities as JSON.
    Distance,
    /// Geodesic between two interior densities as CSV.
    Geodesic,
    /// Smallest eigenvalue of the entropy Hessian relative to the metric over random densities, as CSV.
    Hessian,
    /// Run the property suites; exit 1 if any check fails.
    Verify,
    /// Scalar inequalities behind two-mode convexity on a grid of radii, as CSV.
    SweepEssential,
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InjectedBug {
    /// Negate the kernel of the inverse operator used by the inversion check.
    NegatedKernel,
}

/// Options as given by one source; unset fields fall through to the next.
#[derive(Args, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Number of fermionic modes.
    #[arg(long, global = true, env = "FERMI_OT_N")]
    pub n: Option<usize>,
    /// Density file (JSON).
    #[arg(long, global = true, env = "FERMI_OT_INPUT")]
    pub input: Option<PathBuf>,
    /// Second density file (JSON).
    #[arg(long, global = true, env = "FERMI_OT_INPUT2")]
    pub input2: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "FERMI_OT_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "FERMI_OT_SEED")]
    pub seed: Option<u64>,
    /// Number of random samples, or grid points for sweep-essential.
    #[arg(long, global = true, env = "FERMI_OT_SAMPLES")]
    pub samples: Option<usize>,
    /// Final time of the heat flow.
    #[arg(long, global = true, env = "FERMI_OT_T_MAX")]
    pub t_max: Option<f64>,
    /// Number of time steps.
    #[arg(long, global = true, env = "FERMI_OT_STEPS")]
    pub steps: Option<usize>,
    /// Regularisation levels for boundary densities, comma separated and decreasing.
    #[arg(long, global = true, env = "FERMI_OT_EPS_LIST", value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// Newton tolerance for distance and geodesic, check tolerance for verify.
    #[arg(long, global = true, env = "FERMI_OT_TOL")]
    pub tol: Option<f64>,
    /// Lower bound on the spectrum of random densities.
    #[arg(long, global = true, env = "FERMI_OT_FLOOR")]
    pub floor: Option<f64>,
    /// Deliberately break one check, to test that verify reports failures.
    #[arg(long, global = true, env = "FERMI_OT_INJECT_BUG")]
    pub inject_bug: Option<InjectedBug>,
}

impl Options {
    /// Fields set here, else from `other`.
    fn or(self, other: Options) -> Options {
        Options {
            n: self.n.or(other.n),
            input: self.input.or(other.input),
            input2: self.input2.or(other.input2),
            out: self.out.or(other.out),
            seed: self.seed.or(other.seed),
            samples: self.samples.or(other.samples),
            t_max: self.t_max.or(other.t_max),
            steps: self.steps.or(other.steps),
            eps_list: self.eps_list.or(other.eps_list),
            tol: self.tol.or(other.tol),
            floor: self.floor.or(other.floor),
            inject_bug: self.inject_bug.or(other.inject_bug),
        }
    }
}

pub fn load_config_file(path: &Path) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |msg: String| CliError::Usage(format!("config file {}: {msg}", path.display()));
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| bad(e.to_string())),
        Some("json") => serde_json::from_str(&text).map_err(|e| bad(e.to_string())),
        _ => Err(bad("expected a .toml or .json extension".into())),
    }
}

/// Fully resolved and validated settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Mode count; for commands reading densities it must match the files.
    pub n: Option<usize>,
    pub input: Option<PathBuf>,
    pub input2: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
    pub t_max: f64,
    pub steps: usize,
    pub eps_list: Vec<f64>,
    pub tol: f64,
    pub floor: f64,
    pub inject_bug: Option<InjectedBug>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => load_config_file(p)?,
            None => Options::default(),
        };
        Self::resolve(cli.command, cli.options.or(file))
    }

    pub fn resolve(command: Command, o: Options) -> Result<Self, CliError> {
        let (samples, tol) = match command {
            Command::SweepEssential => (10_000, 0.0),
            Command::Verify => (20, 1e-9),
            _ => (100, 1e-10),
        };
        let cfg = RunConfig {
            command,
            n: o.n,
            input: o.input,
            input2: o.input2,
            out: o.out,
            seed: o.seed.unwrap_or(0),
            samples: o.samples.unwrap_or(samples),
            t_max: o.t_max.unwrap_or(2.0),
            steps: o.steps.unwrap_or(20),
            eps_list: o.eps_list.unwrap_or_else(|| vec![1e-2, 5e-3, 2.5e-3]),
            tol: o.tol.unwrap_or(tol),
            floor: o.floor.unwrap_or(1e-3),
            inject_bug: o.inject_bug,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Usage(msg));
        if let Some(n) = self.n {
            if !(1..=fermi_ot::clifford::DEFAULT_MAX_MODES).contains(&n) {
                return fail(format!("--n must be in 1..={}, got {n}", fermi_ot::clifford::DEFAULT_MAX_MODES));
            }
        }
        if self.samples == 0 {
            return fail("--samples must be positive".into());
        }
        if self.steps == 0 {
            return fail("--steps must be positive".into());
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return fail(format!("--t-max must be positive and finite, got {}", self.t_max));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) || (self.tol == 0.0 && self.command != Command::SweepEssential) {
            return fail(format!("--tol must be positive and finite, got {}", self.tol));
        }
        if !(0.0..1.0).contains(&self.floor) {
            return fail(format!("--floor must be in [0, 1), got {}", self.floor));
        }
        if self.eps_list.is_empty() {
            return fail("--eps-list must not be empty".into());
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return fail(format!("--eps-list entries must be in (0, 1), got {:?}", self.eps_list));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return fail(format!("--eps-list must be strictly decreasing, got {:?}", self.eps_list));
        }
        Ok(())
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("--input is required".into()))
    }

    pub fn input2(&self) -> Result<&Path, CliError> {
        self.input2
            .as_deref()
            .ok_or_else(|| CliError::Usage("--input2 is required".into()))
    }

    /// Mode count for commands that generate their own samples.
    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }
}
