use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdsp_core::Method;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qdsp",
    version,
    about = "Characteristic functions and expectations of discrete stochastic processes on a statevector simulator",
    after_help = "Exit codes: 0 success, 1 usage error, 2 model or domain error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic function on the grid v_l = 2πl/P, l = -L..=L.
    Charfn(CharfnArgs),
    /// Delta of a European call via the CDF Fourier series.
    Delta(DeltaArgs),
    /// Correlated random walk characteristic function with oracle columns.
    Crw(CrwArgs),
    /// Amplitude-estimation outcome distribution for one evaluation point.
    AeDemo(AeDemoArgs),
    /// Error comparison of Monte Carlo, shot sampling and amplitude estimation.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Exact,
    Shots,
    Ae,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::Shots => Method::Shots,
            MethodArg::Ae => Method::Ae,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Cos,
    Sin,
}

/// Flags shared by every command.
#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Estimation method [default: exact].
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Shots per Pauli measurement batch [default: 8192].
    #[arg(long)]
    pub shots: Option<u64>,
    /// Amplitude-estimation ancillas m (M = 2^m) [default: 6].
    #[arg(long = "ae-m")]
    pub ae_m: Option<u32>,
    /// Base seed for all sampling [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fourier order L [default: 100].
    #[arg(long = "L")]
    pub order: Option<usize>,
    /// Fourier period P [default: 100].
    #[arg(long = "P")]
    pub period: Option<f64>,
    /// Worker threads [default: logical cores].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output CSV path [default: stdout].
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CharfnArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Explicit evaluation points instead of the grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub v: Vec<f64>,
    /// Run negative grid points instead of using conjugate symmetry.
    #[arg(long)]
    pub explicit_negative: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    /// Market parameters JSON file.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Strike list; overrides K in the parameter file.
    #[arg(long = "K", value_delimiter = ',')]
    pub strikes: Vec<f64>,
    /// Random-walk steps n [default: 4].
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CrwArgs {
    /// Walk parameters JSON file (x0, x_plus, x_minus, p, q).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Run negative grid points instead of using conjugate symmetry.
    #[arg(long)]
    pub explicit_negative: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AeDemoArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Evaluation point.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub v: f64,
    /// Component to estimate.
    #[arg(long, value_enum, default_value_t = ModeArg::Cos)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Evaluation point.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub v: f64,
    /// Repetitions per sweep point.
    #[arg(long, default_value_t = 20)]
    pub reps: u64,
    /// Shot counts for the Monte Carlo and shot sweeps.
    #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10000])]
    pub shots_list: Vec<u64>,
    /// Ancilla counts for the amplitude-estimation sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [4u32, 5, 6, 7, 8])]
    pub m_list: Vec<u32>,
    /// Fill the wall_time_s column (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub common: Common,
}

/// JSON run configuration. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Option<Method>,
    pub shots: Option<u64>,
    pub ae_m: Option<u32>,
    pub seed: Option<u64>,
    #[serde(rename = "L")]
    pub order: Option<usize>,
    #[serde(rename = "P")]
    pub period: Option<f64>,
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub strikes: Option<Vec<f64>>,
    pub threads: Option<usize>,
    pub model: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Run(anyhow::anyhow!(
                "cannot read config {}: {e}",
                path.display()
            ))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Run(anyhow::anyhow!("invalid config {}: {e}", path.display())))
    }
}

/// Flag values merged over the config file and defaults.
#[derive(Debug)]
pub struct Resolved {
    pub method: Method,
    pub shots: u64,
    pub ae_m: u32,
    pub seed: u64,
    pub order: usize,
    pub period: f64,
    pub n: usize,
    pub strikes: Vec<f64>,
    pub threads: Option<usize>,
    pub model: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Common {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let r = Resolved {
            method: self
                .method
                .map(Method::from)
                .or(cfg.method)
                .unwrap_or(Method::Exact),
            shots: self.shots.or(cfg.shots).unwrap_or(8192),
            ae_m: self.ae_m.or(cfg.ae_m).unwrap_or(6),
            seed: self.seed.or(cfg.seed).unwrap_or(0),
            order: self.order.or(cfg.order).unwrap_or(100),
            period: self.period.or(cfg.period).unwrap_or(100.0),
            n: cfg.n.unwrap_or(4),
            strikes: cfg.strikes.unwrap_or_default(),
            threads: self.threads.or(cfg.threads),
            model: cfg.model,
            params: cfg.params,
            output: self.output.clone().or(cfg.output),
        };
        if r.shots < 2 {
            return Err(CliError::Usage("--shots must be at least 2".into()));
        }
        if !(r.period > 0.0 && r.period.is_finite()) {
            return Err(CliError::Usage("--P must be positive".into()));
        }
        if r.threads == Some(0) {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        if r.method == Method::Ae && !(3..=20).contains(&r.ae_m) {
            return Err(CliError::Usage("--ae-m must be in 3..=20".into()));
        }
        Ok(r)
    }
}

impl Resolved {
    pub fn model_path(&self, flag: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| self.model.clone())
            .ok_or_else(|| CliError::Usage("--model is required".into()))
    }

    pub fn params_path(&self, flag: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| self.params.clone())
            .ok_or_else(|| CliError::Usage("--params is required".into()))
    }
}
