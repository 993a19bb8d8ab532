//! `specctrl`: build truncated spectral models, synthesize observer-based
//! controllers, evaluate decay certificates, simulate the closed loop and
//! reproduce the bundled studies.
//!
//! Exit codes: 0 success, 1 numerical/model failure (or failed reproduction
//! thresholds), 2 usage errors.

mod reproduce;
mod runs;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "specctrl", version, about = "reduced-order controller synthesis and certification for truncated spectral plant models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a spectral model from a plant description.
    Build {
        /// Plant JSON ({"kind":"toy"|"transport"|"reaction_diffusion", ...}).
        #[arg(long)]
        plant: PathBuf,
        /// Target decay rate delta > 0.
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Retained stable modes beyond the unstable block (for the toy
        /// plant this is the retained stable order itself).
        #[arg(long)]
        extra_stable: Option<usize>,
        /// Order of the rational PDE surrogate.
        #[arg(long, default_value_t = 10)]
        approx_order: usize,
        /// Stored tail length (default: toy 200, PDE plants all remaining
        /// surrogate modes).
        #[arg(long)]
        n_tail: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize gains, certify, and write controller + certificate.
    Synthesize {
        #[arg(long)]
        model: PathBuf,
        /// Gains config JSON: {"controller_poles":[[re,im],..],"observer_poles":[..]}.
        #[arg(long)]
        gains: PathBuf,
        /// Knowledge model for the mismatch design (gains are placed on it).
        #[arg(long)]
        knowledge: Option<PathBuf>,
        #[arg(long)]
        out_controller: PathBuf,
        #[arg(long)]
        out_certificate: PathBuf,
        /// Emit the controller in real block-diagonal form.
        #[arg(long)]
        realify: bool,
    },
    /// Evaluate the decay certificate only.
    Certify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        gains: PathBuf,
        #[arg(long)]
        knowledge: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate the closed loop and write the norm/Lyapunov time series.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        controller: Option<PathBuf>,
        /// Simulate the plant alone (zero gains).
        #[arg(long)]
        open_loop: bool,
        /// Certificate JSON supplying the Lyapunov weighting for the V column.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Knowledge model; enables the mismatch closed-loop assembly.
        #[arg(long)]
        knowledge: Option<PathBuf>,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized uncertainty sweep with per-trial synthesis.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        gains: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        magnitude: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write one trajectory CSV + uncertainty JSON per trial.
        #[arg(long)]
        trajectories_dir: Option<PathBuf>,
    },
    /// Run a built-in study end to end and compare against its thresholds.
    Reproduce {
        #[arg(value_enum)]
        target: reproduce::Target,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("SPECCTRL_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("ignoring invalid SPECCTRL_THREADS = {threads:?}");
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Build {
            plant,
            delta,
            extra_stable,
            approx_order,
            n_tail,
            out,
        } => {
            runs::build(&runs::BuildArgs {
                plant,
                delta,
                extra_stable,
                approx_order,
                n_tail,
                out,
            })?;
            Ok(true)
        }
        Command::Synthesize {
            model,
            gains,
            knowledge,
            out_controller,
            out_certificate,
            realify,
        } => {
            runs::synthesize(&runs::SynthArgs {
                model,
                gains,
                knowledge,
                out_certificate,
                out_controller: Some(out_controller),
                realify,
            })?;
            Ok(true)
        }
        Command::Certify {
            model,
            gains,
            knowledge,
            out,
        } => {
            runs::synthesize(&runs::SynthArgs {
                model,
                gains,
                knowledge,
                out_certificate: out,
                out_controller: None,
                realify: false,
            })?;
            Ok(true)
        }
        Command::Simulate {
            model,
            controller,
            open_loop,
            certificate,
            knowledge,
            t_end,
            dt,
            out,
        } => {
            runs::simulate(&runs::SimulateArgs {
                model,
                controller,
                open_loop,
                certificate,
                knowledge,
                t_end,
                dt,
                out,
            })?;
            Ok(true)
        }
        Command::Sweep {
            model,
            gains,
            magnitude,
            trials,
            seed,
            t_end,
            dt,
            out,
            trajectories_dir,
        } => {
            runs::sweep(&runs::SweepArgs {
                model,
                gains,
                magnitude,
                trials,
                seed,
                t_end,
                dt,
                out,
                trajectories_dir,
            })?;
            Ok(true)
        }
        Command::Reproduce { target, out_dir } => {
            let dir = out_dir.unwrap_or_else(|| reproduce::default_out_dir(target));
            let ok = reproduce::run(target, &dir)?;
            if !ok {
                eprintln!("reproduction thresholds failed; see {}/report.txt", dir.display());
            }
            Ok(ok)
        }
    }
}
