use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use purikit::spectra::{DistributionKind, DistributionParams};
use serde::Serialize;

use crate::error::{validation, CliError};

#[derive(Parser, Debug, Clone)]
#[command(name = "purikit", version, about = "Purification experiments for one-dimensional mixed states")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance of numerical ranks.
    #[arg(long, global = true, default_value_t = purikit::DEFAULT_RANK_TOL)]
    pub tol: f64,
    /// Result file. CSV results go to stdout without it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Ranks of the regular-polygon states and PSD factorization searches.
    Counterexample(CounterexampleArgs),
    /// Sum-of-squares distance curves and decay fits per distribution.
    BenchDistributions(BenchArgs),
    /// Samples of p_k(lambda) - lambda for plotting.
    PolyExport(PolyArgs),
    /// Rank bounds of the sum-of-squares and eigenbasis routes per accuracy.
    CompareMethods(CompareArgs),
    /// Purifies a density matrix read from a JSON file.
    Purify(PurifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Counterexample(_) => "counterexample",
            Self::BenchDistributions(_) => "bench-distributions",
            Self::PolyExport(_) => "poly-export",
            Self::CompareMethods(_) => "compare-methods",
            Self::Purify(_) => "purify",
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Self::Counterexample(a) => a.validate(),
            Self::BenchDistributions(a) => a.validate(),
            Self::PolyExport(a) => a.validate(),
            Self::CompareMethods(a) => a.validate(),
            Self::Purify(a) => a.validate(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlackLayout {
    /// Two sites of dimension t.
    Flat,
    /// 2 log2(t) qubits.
    Binary,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CounterexampleArgs {
    /// Polygon sizes.
    #[arg(long = "t", value_delimiter = ',', default_values_t = [4, 5, 6, 8])]
    pub t: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SlackLayout::Flat)]
    pub layout: SlackLayout,
    /// Factor sizes tried by the PSD factorization search.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    pub psd_r: Vec<usize>,
    /// Skip the PSD factorization search.
    #[arg(long)]
    pub no_psd: bool,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub sweeps: usize,
    /// Sampled entries when checking the Fourier operator above 16 x 16.
    #[arg(long, default_value_t = 200)]
    pub mpo_samples: usize,
}

impl CounterexampleArgs {
    fn validate(&self) -> Result<(), CliError> {
        nonempty(&self.t, "--t")?;
        if let Some(&t) = self.t.iter().find(|&&t| t < 3) {
            return Err(validation(format!("a polygon needs t >= 3, got {t}")));
        }
        if self.layout == SlackLayout::Binary {
            if let Some(&t) = self.t.iter().find(|&&t| !t.is_power_of_two()) {
                return Err(validation(format!("binary layout needs powers of two, got t = {t}")));
            }
        }
        if !self.no_psd {
            nonempty(&self.psd_r, "--psd-r")?;
            if self.psd_r.contains(&0) {
                return Err(validation("--psd-r values must be positive"));
            }
            if self.restarts == 0 || self.sweeps == 0 {
                return Err(validation("--restarts and --sweeps must be positive"));
            }
        }
        Ok(())
    }
}

/// Distribution parameters shared by the spectrum-based commands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct DistArgs {
    /// Decay constant of the exponential distribution.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Lower end of the sampling interval of the random distribution.
    #[arg(long, default_value_t = 0.0)]
    pub random_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub random_hi: f64,
}

impl DistArgs {
    pub fn params(&self, seed: u64) -> DistributionParams {
        DistributionParams {
            b: self.b,
            seed,
            interval: (self.random_lo, self.random_hi),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(validation("--b must be positive"));
        }
        if !(self.random_lo >= 0.0 && self.random_hi > self.random_lo && self.random_hi.is_finite()) {
            return Err(validation("random interval must satisfy 0 <= lo < hi"));
        }
        Ok(())
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = DistributionKind::ALL)]
    pub kinds: Vec<DistributionKind>,
    #[arg(long = "n", value_delimiter = ',', default_values_t = [50, 100, 200])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    /// First k entering the decay fit.
    #[arg(long, default_value_t = purikit::fit::DEFAULT_FIT_RANGE.0)]
    pub fit_min: usize,
    #[arg(long, default_value_t = purikit::fit::DEFAULT_FIT_RANGE.1)]
    pub fit_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
}

impl BenchArgs {
    fn validate(&self) -> Result<(), CliError> {
        nonempty(&self.kinds, "--kinds")?;
        validate_n(&self.n, &self.kinds)?;
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(validation(format!("invalid k range {}..={}", self.k_min, self.k_max)));
        }
        if self.fit_min > self.fit_max {
            return Err(validation("--fit-min exceeds --fit-max"));
        }
        self.dist.validate()
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PolyArgs {
    #[arg(long, default_value_t = DistributionKind::EquallySpaced)]
    pub kind: DistributionKind,
    #[arg(long = "n", default_value_t = 100)]
    pub n: usize,
    #[arg(long = "k", value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
    pub k: Vec<usize>,
    /// Grid points on [0, lambda_max].
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
}

impl PolyArgs {
    fn validate(&self) -> Result<(), CliError> {
        validate_n(&[self.n], &[self.kind])?;
        nonempty(&self.k, "--k")?;
        if self.k.contains(&0) {
            return Err(validation("--k values must be positive"));
        }
        if self.grid < 2 {
            return Err(validation("--grid needs at least 2 points"));
        }
        self.dist.validate()
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CompareArgs {
    #[arg(long, default_value_t = DistributionKind::EquallySpaced)]
    pub kind: DistributionKind,
    #[arg(long = "n", default_value_t = 100)]
    pub n: usize,
    /// Operator Schmidt rank D of the state.
    #[arg(long = "d", default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001])]
    pub eps: Vec<f64>,
    /// Largest k tried on the sum-of-squares route.
    #[arg(long, default_value_t = 6)]
    pub k_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
}

impl CompareArgs {
    fn validate(&self) -> Result<(), CliError> {
        validate_n(&[self.n], &[self.kind])?;
        if self.d == 0 {
            return Err(validation("--d must be positive"));
        }
        nonempty(&self.eps, "--eps")?;
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e <= 2.0)) {
            return Err(validation(format!("eps = {e} outside (0, 2]")));
        }
        if self.k_max == 0 {
            return Err(validation("--k-max must be positive"));
        }
        self.dist.validate()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SosExact,
    SosSdp,
    EigenExact,
    EigenTrunc,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PurifyArgs {
    /// Density matrix `{n_sites, local_dim, entries: [[re, im], ..]}`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Polynomial degree bound (sos_sdp; lower bound check for sos_exact).
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Kept eigenvalues (eigen_trunc).
    #[arg(long = "s")]
    pub s: Option<usize>,
}

impl PurifyArgs {
    fn validate(&self) -> Result<(), CliError> {
        match self.method {
            Method::SosSdp if self.k.is_none() => Err(validation("sos_sdp needs --k")),
            Method::EigenTrunc if self.s.is_none() => Err(validation("eigen_trunc needs --s")),
            _ if self.k == Some(0) || self.s == Some(0) => Err(validation("--k and --s must be positive")),
            _ => Ok(()),
        }
    }
}

fn nonempty<T>(v: &[T], flag: &str) -> Result<(), CliError> {
    if v.is_empty() {
        Err(validation(format!("{flag} needs at least one value")))
    } else {
        Ok(())
    }
}

fn validate_n(n: &[usize], kinds: &[DistributionKind]) -> Result<(), CliError> {
    nonempty(n, "--n")?;
    let min = if kinds.contains(&DistributionKind::OneFixed) { 2 } else { 1 };
    match n.iter().find(|&&x| x < min) {
        Some(x) => Err(validation(format!("n = {x} is too small, need n >= {min}"))),
        None => Ok(()),
    }
}
