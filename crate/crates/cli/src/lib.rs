//! Command-line front end: reads a run configuration, applies flag
//! overrides, dispatches a subcommand and renders CSV or JSON.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, Format, OutputConfig, RunConfig};
pub use output::Report;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "LEVY_INVENTORY_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] levy_inventory::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for anything the user can fix in the input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "validation",
            CliError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "levy-inventory", version, about = "Reorder times, demand tails and inventory costs under Lévy demand")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form moments of the n-th reorder time next to Monte Carlo estimates
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Demand tail P(D_s >= b) from the series and from simulation
    Tail {
        #[command(flatten)]
        common: Common,
        /// Time (defaults to mc.horizon)
        #[arg(long)]
        s: Option<f64>,
        /// Demand level (defaults to policy.a)
        #[arg(long)]
        b: Option<f64>,
    },
    /// Expected cost on [0, t], analytic and simulated
    Cost {
        #[command(flatten)]
        common: Common,
        /// Horizon (defaults to mc.horizon)
        #[arg(long)]
        t: Option<f64>,
    },
    /// Long-run average cost and total/t at checkpoints
    Longrun {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "10,100")]
        checkpoints: Vec<f64>,
    },
    /// Jump log of simulated demand paths
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Horizon (defaults to mc.horizon)
        #[arg(long)]
        t: Option<f64>,
    },
    /// Expected cost over a grid of (a, Q)
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        grid_a: Option<Vec<f64>>,
        #[arg(long = "grid-q", value_delimiter = ',')]
        grid_q: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML)
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<u64>,
    /// Skip the Monte Carlo columns
    #[arg(long)]
    pub analytic_only: bool,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Moments { common, .. }
            | Command::Tail { common, .. }
            | Command::Cost { common, .. }
            | Command::Longrun { common, .. }
            | Command::Simulate { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}

/// Loads the config named on the command line with flag overrides applied.
pub fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    if let Some(p) = &common.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(seed) = common.seed {
        cfg.mc.seed = seed;
    }
    Ok(cfg)
}

/// Runs one subcommand and returns the rendered artifact.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let common = command.common();
    let mut cfg = cfg.clone();
    let simulate = matches!(command, Command::Simulate { .. });
    if let Some(p) = common.paths {
        cfg.mc.paths = p;
    }
    if !simulate {
        cfg.mc.validate()?;
    }
    let mc = !common.analytic_only;
    match command {
        Command::Moments { n, .. } => commands::moments(&cfg, *n, mc),
        Command::Tail { s, b, .. } => commands::tail(
            &cfg,
            s.unwrap_or(cfg.mc.horizon),
            b.unwrap_or(cfg.policy.reorder_offset()),
            mc,
        ),
        Command::Cost { t, .. } => commands::cost(&cfg, t.unwrap_or(cfg.mc.horizon), mc),
        Command::Longrun { checkpoints, .. } => commands::longrun(&cfg, checkpoints),
        Command::Simulate { t, .. } => {
            commands::simulate(&cfg, t.unwrap_or(cfg.mc.horizon), common.paths.unwrap_or(10))
        }
        Command::Sweep {
            t, grid_a, grid_q, ..
        } => commands::sweep(
            &cfg,
            t.unwrap_or(cfg.mc.horizon),
            grid_a.as_deref().unwrap_or(&[cfg.policy.reorder_offset()]),
            grid_q.as_deref().unwrap_or(&[cfg.policy.order_quantity()]),
        ),
    }
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got \"{v}\""))),
        },
    }
}
