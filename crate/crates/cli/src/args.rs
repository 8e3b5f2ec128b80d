use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Tables for the Prabhakar discrete-time counting process and the random
/// walks it drives on graphs.
///
/// Every flag can also be set through a `PDTP_<FLAG>` environment variable
/// (dashes become underscores, e.g. `PDTP_EPS_TAIL`) or a `--config` file of
/// `key=value` lines. Flags win over the environment, which wins over the
/// config file.
#[derive(Debug, Parser)]
#[command(name = "pdtp", version, args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Evaluation route for discrete-time probabilities.
    #[arg(long, global = true, value_enum, default_value_t = RouteArg::Auto, env = "PDTP_ROUTE")]
    pub route: RouteArg,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv, env = "PDTP_FORMAT")]
    pub format: Format,

    /// Write here instead of stdout.
    #[arg(long, global = true, env = "PDTP_OUTPUT")]
    pub output: Option<PathBuf>,

    /// Flat `key=value` file; a leading `# ` is ignored, so any CSV header
    /// this tool wrote can be fed back in.
    #[arg(long, global = true, env = "PDTP_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads for simulation; output does not depend on it.
    #[arg(long, global = true, env = "PDTP_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Auto,
    ClosedForm,
    Oracle,
}

impl RouteArg {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteArg::Auto => "auto",
            RouteArg::ClosedForm => "closed-form",
            RouteArg::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailModeArg {
    State,
    Interarrival,
}

impl TailModeArg {
    pub fn as_str(self) -> &'static str {
        match self {
            TailModeArg::State => "state",
            TailModeArg::Interarrival => "interarrival",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inter-arrival pmf θ(t).
    Pmf(PmfArgs),
    /// State probabilities Φ⁽ⁿ⁾(t) for n = 0..=t.
    States(StatesArgs),
    /// Continuous-time (GFPP) state probabilities with error estimates.
    CtStates(CtStatesArgs),
    /// Exact tail against its power-law asymptote.
    Tail(TailArgs),
    /// Discrete chain at ξ₀h^α and t/h steps against the continuous limit.
    LimitProbe(LimitProbeArgs),
    /// Transition matrix of the subordinated random walk on a graph.
    Walk(WalkArgs),
    /// Monte Carlo ensemble against the analytic values.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct Discrete {
    #[arg(long, env = "PDTP_ALPHA")]
    pub alpha: f64,
    #[arg(long, env = "PDTP_NU")]
    pub nu: f64,
    #[arg(long, env = "PDTP_XI")]
    pub xi: f64,
}

#[derive(Debug, Args)]
pub struct Continuous {
    #[arg(long, env = "PDTP_ALPHA")]
    pub alpha: f64,
    #[arg(long, env = "PDTP_NU")]
    pub nu: f64,
    #[arg(long, env = "PDTP_XI0")]
    pub xi0: f64,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[command(flatten)]
    pub params: Discrete,
    /// Times: `40`, `0..40`, `1,2,8` or `log:1..1000:20`.
    #[arg(long, env = "PDTP_T")]
    pub t: String,
}

#[derive(Debug, Args)]
pub struct StatesArgs {
    #[command(flatten)]
    pub params: Discrete,
    /// Times, same syntax as for `pmf`.
    #[arg(long, env = "PDTP_T")]
    pub t: String,
}

#[derive(Debug, Args)]
pub struct CtStatesArgs {
    #[command(flatten)]
    pub params: Continuous,
    /// States, e.g. `1..7`.
    #[arg(long, default_value = "0..7", env = "PDTP_N")]
    pub n: String,
    /// Times: `log:a..b:k`, `lin:a..b:k` or a list.
    #[arg(long, default_value = "log:0.01..100:64", env = "PDTP_T_GRID")]
    pub t_grid: String,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub params: Discrete,
    #[arg(long, value_enum, default_value_t = TailModeArg::State, env = "PDTP_MODE")]
    pub mode: TailModeArg,
    /// State for `--mode state`.
    #[arg(long, default_value_t = 0, env = "PDTP_N")]
    pub n: u64,
    /// Positive times, e.g. `log:10..2000:16`.
    #[arg(long, env = "PDTP_T")]
    pub t: String,
}

#[derive(Debug, Args)]
pub struct LimitProbeArgs {
    #[command(flatten)]
    pub params: Continuous,
    #[arg(long, default_value_t = 1, env = "PDTP_N")]
    pub n: u64,
    /// Continuous time.
    #[arg(long, env = "PDTP_T")]
    pub t: f64,
    /// Step lengths.
    #[arg(long, default_value = "0.2,0.1,0.05,0.025", env = "PDTP_H")]
    pub h: String,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub params: Discrete,
    /// Edge list: `N <count>`, then one `i j` pair per line.
    #[arg(long, env = "PDTP_GRAPH")]
    pub graph: PathBuf,
    #[arg(long, env = "PDTP_T")]
    pub t: u64,
    /// Emit only this row of P(t).
    #[arg(long, env = "PDTP_START")]
    pub start: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: Discrete,
    /// Observation times, e.g. `1,4,16`.
    #[arg(long, default_value = "1,4,16", env = "PDTP_T")]
    pub t: String,
    #[arg(long, default_value_t = 0, env = "PDTP_SEED")]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000, env = "PDTP_WALKERS")]
    pub walkers: usize,
    /// Survival mass left out of the inter-arrival sampler table.
    #[arg(long, default_value_t = pdtp_core::montecarlo::DEFAULT_EPS_TAIL, env = "PDTP_EPS_TAIL")]
    pub eps_tail: f64,
    /// Simulate a walk on this graph instead of the bare counting process.
    #[arg(long, env = "PDTP_GRAPH")]
    pub graph: Option<PathBuf>,
    /// Start node of the walk.
    #[arg(long, default_value_t = 0, env = "PDTP_START")]
    pub start: usize,
}
