//! `ncna`: synthesize, propagate and benchmark NCNA geometric gates and run
//! the two-qubit Bell pipeline. Every run writes its files and a
//! `manifest.json` into one output directory.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncna_core::geometry::ScheduleKind;
use ncna_core::rb::SweepAxis;

use crate::commands::Ctx;
use crate::config::{Angle, BellInit, RbMode, RunConfig};
use crate::error::CliResult;
use crate::manifest::RunDir;

#[derive(Parser)]
#[command(name = "ncna", version, about = "NCNA geometric gate toolkit")]
struct Cli {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random stream of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory (default: runs/<command>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct GateArgs {
    /// T, S, H, identity or custom.
    #[arg(long)]
    gate: Option<String>,
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ScheduleKind>,
    #[arg(long, allow_hyphen_values = true)]
    chi1: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    xi1: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    xi2: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_prime: Option<Angle>,
}

#[derive(Args, Default)]
struct ErrorArgs {
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a gate's pulse schedule and its half-area report.
    Synth {
        #[command(flatten)]
        gate: GateArgs,
    },
    /// Propagate a gate and report its fidelity and Bloch trajectory.
    Evolve {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        errors: ErrorArgs,
        /// Initial state: 0, 1, +, -, +i or -i.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        init: String,
    },
    /// Reference or interleaved randomized benchmarking.
    Rb {
        #[arg(long, value_enum)]
        mode: Option<RbMode>,
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        errors: ErrorArgs,
        /// Fit a planted noiseless decay A = B = 0.5, p = 0.99 and require
        /// recovery to 1e-6.
        #[arg(long)]
        planted: bool,
    },
    /// Interleaved-RB and direct-infidelity sweep over an error axis.
    Sweep {
        /// epsilon or delta (default: both).
        #[arg(long, value_parser = parse_axis)]
        axis: Option<SweepAxis>,
        /// Comma-separated gate list, e.g. T,S,H.
        #[arg(long, value_delimiter = ',')]
        gates: Option<Vec<String>>,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        /// Exit 4 if any geometric point is worse than its dynamical twin.
        #[arg(long)]
        check_ordering: bool,
    },
    /// Bell-state generation through the exchange interaction, with tomography.
    Bell {
        #[arg(long, value_enum)]
        init: Option<BellInit>,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Deterministic battery of numerical checks.
    Selftest,
}

fn parse_kind(s: &str) -> Result<ScheduleKind, String> {
    s.parse().map_err(|e: ncna_core::Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: ncna_core::Error| e.to_string())
}

impl GateArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let g = &mut cfg.gate;
        if let Some(name) = &self.gate {
            g.name = name.clone();
        }
        if let Some(k) = self.kind {
            g.kind = k;
        }
        g.chi1 = self.chi1.or(g.chi1);
        g.xi1 = self.xi1.or(g.xi1);
        g.xi2 = self.xi2.or(g.xi2);
        g.gamma_prime = self.gamma_prime.or(g.gamma_prime);
    }
}

impl ErrorArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(e) = self.epsilon {
            cfg.errors.epsilon = e;
        }
        if let Some(d) = self.delta {
            cfg.errors.delta = d;
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Evolve { .. } => "evolve",
            Command::Rb { .. } => "rb",
            Command::Sweep { .. } => "sweep",
            Command::Bell { .. } => "bell",
            Command::Selftest => "selftest",
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        match self {
            Command::Synth { gate } => gate.apply(cfg),
            Command::Evolve { gate, errors, .. } => {
                gate.apply(cfg);
                errors.apply(cfg);
            }
            Command::Rb { mode, gate, errors, .. } => {
                gate.apply(cfg);
                errors.apply(cfg);
                if let Some(m) = mode {
                    cfg.rb.mode = *m;
                }
            }
            Command::Sweep { axis, gates, grid, .. } => {
                if let Some(a) = axis {
                    cfg.sweep.axes = vec![*a];
                }
                if let Some(g) = gates {
                    cfg.sweep.gates = g.clone();
                }
                if let Some(g) = grid {
                    cfg.sweep.grid = g.clone();
                }
            }
            Command::Bell { init, shots } => {
                if let Some(i) = init {
                    cfg.bell.init = *i;
                }
                if shots.is_some() {
                    cfg.bell.shots = *shots;
                }
            }
            Command::Selftest => {}
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cli.command.apply(&mut cfg);
    cfg.validate()?;

    let name = cli.command.name();
    let root = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(name));
    let mut ctx = Ctx { cfg, dir: RunDir::create(&root)?, quiet: cli.quiet };
    let outcome = match &cli.command {
        Command::Synth { .. } => commands::synth::run(&mut ctx),
        Command::Evolve { init, .. } => commands::evolve::run(&mut ctx, init),
        Command::Rb { planted, .. } => commands::rb::run(&mut ctx, *planted),
        Command::Sweep { check_ordering, .. } => commands::sweep::run(&mut ctx, *check_ordering),
        Command::Bell { .. } => commands::bell::run(&mut ctx),
        Command::Selftest => commands::selftest::run(&mut ctx),
    };
    let Ctx { cfg, dir, quiet } = ctx;
    let root = dir.root().to_path_buf();
    dir.finish(name, &cfg, &outcome)?;
    if !quiet {
        println!("wrote {}", root.join(manifest::MANIFEST_FILE).display());
    }
    outcome
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ncna: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
