// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! `ycel`: prefactors, moment dynamics, steady states, Fock-space oracle runs
//! and witness sweeps for the Y-shaped four-level correlated emission laser.
//!
//! Exit codes: 0 success, 2 invalid input, 3 instability or truncation
//! failure, 1 I/O failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{RunConfig, SweepKind};

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Runtime(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Runtime(m) | Failure::Io(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "ycel", version, about = "Y-shaped four-level correlated emission laser simulator")]
struct Cli {
    /// Flat TOML/JSON parameter file, or a JSON document written by ycel.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// ehrenfest | paper-literal
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Interpret rates and times in absolute units instead of units of kappa.
    #[arg(long, global = true)]
    absolute_units: bool,
    /// Sweep worker count (overrides YCEL_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// rho00 - rho33
    #[arg(long, allow_negative_numbers = true)]
    eta1: Option<f64>,
    /// rho00 - rho22
    #[arg(long, allow_negative_numbers = true)]
    eta2: Option<f64>,
    /// Linear gain A (overrides r_a, g, gamma).
    #[arg(long = "A", allow_negative_numbers = true)]
    a: Option<f64>,
    /// Cavity loss rate (needs --absolute-units unless 1).
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Atomic decay rate.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Atom-field coupling.
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Atomic injection rate.
    #[arg(long = "r-a", allow_negative_numbers = true)]
    r_a: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct TimeArgs {
    /// Final time.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Number of equal intervals on [0, t].
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Populations, coherences and the prefactors A..G.
    Prefactors {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Second-moment trajectory from vacuum.
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// auto | closed-form | ode
        #[arg(long)]
        route: Option<String>,
    },
    /// Stationary second moments and witnesses.
    Steady {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Truncated Fock-space master-equation reference run.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// Truncation: one value, or three comma-separated per-mode values.
        #[arg(long = "nmax", value_delimiter = ',')]
        n_max: Option<Vec<usize>>,
        /// RK4 step.
        #[arg(long)]
        dt: Option<f64>,
        /// Largest tolerated top-layer population.
        #[arg(long)]
        edge_tol: Option<f64>,
        /// Skip the rerun at dt/2.
        #[arg(long)]
        no_convergence_check: bool,
        /// Store the full density matrix.
        #[arg(long)]
        dense: bool,
    },
    /// Witness sweep over the (eta1, eta2) plane.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// N1xN2 grid over [-1, 1]^2.
        #[arg(long)]
        eta_grid: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<SweepKind>,
        /// Time for --mode fixed-time.
        #[arg(long, allow_negative_numbers = true)]
        t: Option<f64>,
        /// Use the default gains instead of optimized ones.
        #[arg(long)]
        no_optimize: bool,
        /// Drop grid points outside the physical triangle.
        #[arg(long)]
        valid_only: bool,
    },
}

fn apply_model(cfg: &mut RunConfig, m: &ModelArgs) {
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = m.$field { cfg.$field = v; } )* };
    }
    set!(eta1, eta2, kappa, gamma, g, r_a);
    if m.a.is_some() {
        cfg.a = m.a;
    }
}

fn apply_time(cfg: &mut RunConfig, t: &TimeArgs) {
    if let Some(v) = t.t {
        cfg.t = v;
    }
    if let Some(v) = t.samples {
        cfg.samples = v;
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(b) = &cli.backend {
        cfg.backend = b.parse().map_err(Failure::Input)?;
    }
    if cli.absolute_units {
        cfg.absolute_units = true;
    }
    match &cli.command {
        Command::Prefactors { model } | Command::Steady { model } => apply_model(&mut cfg, model),
        Command::Evolve { model, time, route } => {
            apply_model(&mut cfg, model);
            apply_time(&mut cfg, time);
            if let Some(r) = route {
                cfg.route = r.parse().map_err(Failure::Input)?;
            }
        }
        Command::Oracle {
            model,
            time,
            n_max,
            dt,
            edge_tol,
            no_convergence_check,
            dense,
        } => {
            apply_model(&mut cfg, model);
            apply_time(&mut cfg, time);
            if let Some(n) = n_max {
                cfg.n_max = n.clone();
            }
            if let Some(v) = dt {
                cfg.dt = *v;
            }
            if let Some(v) = edge_tol {
                cfg.edge_tol = *v;
            }
            if *no_convergence_check {
                cfg.convergence_check = false;
            }
            if *dense {
                cfg.dense = true;
            }
        }
        Command::Sweep {
            model,
            eta_grid,
            mode,
            t,
            no_optimize,
            valid_only,
        } => {
            apply_model(&mut cfg, model);
            if let Some(g) = eta_grid {
                cfg.eta_grid = g.clone();
            }
            if let Some(m) = mode {
                cfg.sweep_mode = *m;
            }
            if let Some(v) = t {
                cfg.t = *v;
            }
            if *no_optimize {
                cfg.optimize = false;
            }
            if *valid_only {
                cfg.valid_only = true;
            }
        }
    }
    cfg.check()?;
    Ok(cfg)
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("YCEL_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| Failure::Input(format!("YCEL_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = resolve(&cli)?;
    let output = match &cli.command {
        Command::Prefactors { .. } => commands::prefactors(&cfg, cli.format)?,
        Command::Evolve { .. } => commands::evolve(&cfg, cli.format.unwrap_or(Format::Csv))?,
        Command::Steady { .. } => commands::steady(&cfg, cli.format.unwrap_or(Format::Csv))?,
        Command::Oracle { .. } => commands::oracle(&cfg, cli.format.unwrap_or(Format::Csv))?,
        Command::Sweep { .. } => commands::sweep(&cfg, cli.format.unwrap_or(Format::Csv), threads(cli.threads)?)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, output).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(output.as_bytes())
                .map_err(|e| Failure::Io(format!("cannot write stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
