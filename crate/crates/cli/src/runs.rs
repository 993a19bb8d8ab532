//! Implementations of the pipeline subcommands.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use specctrl_core::io::{
    self, CertificateFile, ControllerFile, GainsFile, ModelFile, PlantFile, UncertaintyFile,
};
use specctrl_core::linalg::CMatrix;
use specctrl_core::plants;
use specctrl_core::sim::{self, SweepConfig, VWeights};
use specctrl_core::spectral::SpectralModel;
use specctrl_core::synthesis::{self, Certificate, Gains, LyapunovPair};
use specctrl_core::{C64, ControllerRealization, UncertaintySpec};

use crate::util::{fmt, write_manifest, write_trajectory_csv};

pub fn read_model(path: &Path) -> Result<SpectralModel> {
    let file: ModelFile = io::read_json(path).with_context(|| format!("reading model {}", path.display()))?;
    let model = file.into_model()?;
    let violations = model.validate();
    if !violations.is_empty() {
        bail!("model {} invalid:\n  {}", path.display(), violations.join("\n  "));
    }
    Ok(model)
}

fn read_gains_file(path: &Path) -> Result<GainsFile> {
    io::read_json(path).with_context(|| format!("reading gains config {}", path.display()))
}

fn read_controller(path: &Path) -> Result<ControllerRealization> {
    let file: ControllerFile =
        io::read_json(path).with_context(|| format!("reading controller {}", path.display()))?;
    Ok(file.into_controller()?)
}

pub struct BuildArgs {
    pub plant: PathBuf,
    pub delta: f64,
    pub extra_stable: Option<usize>,
    pub approx_order: usize,
    pub n_tail: Option<usize>,
    pub out: PathBuf,
}

pub fn build(args: &BuildArgs) -> Result<()> {
    let plant_file: PlantFile =
        io::read_json(&args.plant).with_context(|| format!("reading plant {}", args.plant.display()))?;
    let model = match &plant_file {
        PlantFile::Toy { n1_dim } => {
            let n1 = args.extra_stable.unwrap_or(*n1_dim);
            let n_tail = args.n_tail.unwrap_or(200);
            plants::build_toy_with_delta(n1, n_tail, args.delta)?
        }
        _ => {
            let plant = plant_file.into_plant()?.expect("non-toy plant");
            let approx = match plant.kind {
                plants::PlantKind::Transport { h } => plants::pade_exp(args.approx_order, h)?,
                plants::PlantKind::ReactionDiffusion { nu, lambda } => {
                    plants::rational_diffusion(args.approx_order, nu, lambda)?
                }
            };
            let (a, b, c) = plants::interconnect(&plant, &approx)?;
            let extra = args.extra_stable.unwrap_or(0);
            match args.n_tail {
                Some(nt) => plants::to_spectral(&a, &b, &c, args.delta, extra, nt)?,
                None => plants::to_spectral_remainder(&a, &b, &c, args.delta, extra)?,
            }
        }
    };
    let violations = model.validate();
    if !violations.is_empty() {
        bail!("built model fails validation:\n  {}", violations.join("\n  "));
    }
    io::write_json(&args.out, &ModelFile::from_model(&model))?;
    write_manifest(
        &args.out,
        "build",
        &[args.plant.as_path()],
        json!({
            "delta": args.delta,
            "extra_stable": args.extra_stable,
            "approx_order": args.approx_order,
            "n_tail": args.n_tail,
        }),
    )?;
    println!(
        "model written to {} (n0 = {}, n1 = {}, tail = {})",
        args.out.display(),
        model.n0(),
        model.n1_dim(),
        model.n_tail()
    );
    Ok(())
}

pub struct SynthArgs {
    pub model: PathBuf,
    pub gains: PathBuf,
    pub knowledge: Option<PathBuf>,
    pub out_certificate: PathBuf,
    pub out_controller: Option<PathBuf>,
    pub realify: bool,
}

pub struct SynthOutcome {
    #[allow(dead_code)]
    pub certificate: Certificate,
}

/// Shared by `synthesize` and `certify`; the latter just skips the
/// controller output.
pub fn synthesize(args: &SynthArgs) -> Result<SynthOutcome> {
    let model = read_model(&args.model)?;
    let gains_file = read_gains_file(&args.gains)?;
    let ctrl_poles = gains_file.controller_poles();
    let obs_poles = gains_file.observer_poles();

    let (gains, cert, pair, design_model) = match &args.knowledge {
        None => {
            let gains = place(&model, &ctrl_poles, &obs_poles)?;
            let pair = synthesis::lyapunov_pair(&model, &gains)?;
            let cert = synthesis::certify_exact(&model, &gains, &pair.p0, &pair.p1)?;
            (gains, cert, pair, model.clone())
        }
        Some(kpath) => {
            let hat = read_model(kpath)?;
            let unc = tilde_between(&model, &hat)?;
            let gains = place(&hat, &ctrl_poles, &obs_poles)?;
            let f0_hat = synthesis::f0_matrix(&hat.a0, &hat.b0, &hat.c0, &gains);
            let p0 = synthesis::solve_shifted_lyapunov(&f0_hat, model.delta)?;
            let p1 = synthesis::solve_shifted_lyapunov(&model.a1, model.delta)?;
            let cert = synthesis::certify_uncertain(&hat, &unc, &gains, &p0, &p1)?;
            let pair = LyapunovPair { p0, p1, delta: model.delta };
            (gains, cert, pair, hat)
        }
    };

    io::write_json(
        &args.out_certificate,
        &CertificateFile::from_parts(&cert, &pair.p0, &pair.p1),
    )?;
    let mut inputs: Vec<&Path> = vec![args.model.as_path(), args.gains.as_path()];
    if let Some(k) = &args.knowledge {
        inputs.push(k.as_path());
    }
    write_manifest(
        &args.out_certificate,
        if args.out_controller.is_some() { "synthesize" } else { "certify" },
        &inputs,
        json!({ "realify": args.realify }),
    )?;
    println!(
        "certificate written to {} (rho = {:.6e}, eta = {:.6e}, satisfied = {})",
        args.out_certificate.display(),
        cert.rho,
        cert.eta,
        cert.satisfied,
    );

    if let Some(out_ctrl) = &args.out_controller {
        let hat_opt = if args.knowledge.is_some() { Some(&design_model) } else { None };
        let mut ctrl = synthesis::assemble_controller(&model, &gains, hat_opt)?;
        if args.realify {
            ctrl = synthesis::realify(&ctrl)?;
        }
        io::write_json(out_ctrl, &ControllerFile::from_controller(&ctrl))?;
        println!("controller written to {} (order {})", out_ctrl.display(), ctrl.order());
    }
    Ok(SynthOutcome { certificate: cert })
}

fn place(model: &SpectralModel, ctrl_poles: &[C64], obs_poles: &[C64]) -> Result<Gains> {
    Ok(Gains {
        k0: synthesis::place_poles(&model.a0, &model.b0, ctrl_poles)?,
        g0: synthesis::place_observer(&model.a0, &model.c0, obs_poles)?,
        desired_controller_poles: ctrl_poles.to_vec(),
        desired_observer_poles: obs_poles.to_vec(),
    })
}

fn tilde_between(truth: &SpectralModel, hat: &SpectralModel) -> Result<UncertaintySpec> {
    if truth.n0() != hat.n0() || truth.n1_dim() != hat.n1_dim() {
        bail!(
            "knowledge model split ({}, {}) differs from the true model ({}, {})",
            hat.n0(),
            hat.n1_dim(),
            truth.n0(),
            truth.n1_dim()
        );
    }
    Ok(UncertaintySpec::new(
        &truth.a0 - &hat.a0,
        &truth.a1 - &hat.a1,
        &truth.b0 - &hat.b0,
        &truth.b1 - &hat.b1,
        &truth.c0 - &hat.c0,
        &truth.c1 - &hat.c1,
    ))
}

pub struct SimulateArgs {
    pub model: PathBuf,
    pub controller: Option<PathBuf>,
    pub open_loop: bool,
    pub certificate: Option<PathBuf>,
    pub knowledge: Option<PathBuf>,
    pub t_end: f64,
    pub dt: f64,
    pub out: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let ctrl = match (&args.controller, args.open_loop) {
        (Some(path), false) => read_controller(path)?,
        (None, true) => {
            let zero = Gains {
                k0: CMatrix::zeros(model.n_u(), model.n0()),
                g0: CMatrix::zeros(model.n0(), model.n_y()),
                desired_controller_poles: Vec::new(),
                desired_observer_poles: Vec::new(),
            };
            synthesis::assemble_controller(&model, &zero, None)?
        }
        (Some(_), true) => bail!("--controller and --open-loop are mutually exclusive"),
        (None, false) => bail!("need either --controller or --open-loop"),
    };
    let unc = match &args.knowledge {
        Some(kpath) => Some(tilde_between(&model, &read_model(kpath)?)?),
        None => None,
    };
    let weighting = match &args.certificate {
        Some(cpath) => {
            let file: CertificateFile =
                io::read_json(cpath).with_context(|| format!("reading certificate {}", cpath.display()))?;
            let n0 = model.n0();
            let n1 = model.n1_dim();
            Some(VWeights {
                alpha: file.alpha,
                beta: file.beta,
                gamma: file.gamma,
                p0: io::cmatrix_from_dto(&file.p0, 2 * n0, 2 * n0, "P0")?,
                p1: io::cmatrix_from_dto(&file.p1, n1, n1, "P1")?,
            })
        }
        None => None,
    };
    let sys = sim::assemble(&model, &ctrl, unc.as_ref())?;
    let x0 = sim::default_initial_state(&sys.labels);
    let traj = sim::propagate(&sys, &x0, args.t_end, args.dt, weighting.as_ref(), false)?;
    write_trajectory_csv(&args.out, &traj)?;
    let fit = sim::fit_decay(&traj, 0.5)?;
    let mut inputs: Vec<&Path> = vec![args.model.as_path()];
    if let Some(cpath) = &args.controller {
        inputs.push(cpath.as_path());
    }
    if let Some(cpath) = &args.certificate {
        inputs.push(cpath.as_path());
    }
    if let Some(kpath) = &args.knowledge {
        inputs.push(kpath.as_path());
    }
    write_manifest(
        &args.out,
        "simulate",
        &inputs,
        json!({ "t_end": args.t_end, "dt": args.dt, "open_loop": args.open_loop }),
    )?;
    println!(
        "trajectory written to {} (fitted rate {:.6}, overshoot {:.4})",
        args.out.display(),
        fit.rate,
        fit.overshoot
    );
    Ok(())
}

pub struct SweepArgs {
    pub model: PathBuf,
    pub gains: PathBuf,
    pub magnitude: f64,
    pub trials: usize,
    pub seed: u64,
    pub t_end: f64,
    pub dt: f64,
    pub out: PathBuf,
    pub trajectories_dir: Option<PathBuf>,
}

pub fn sweep(args: &SweepArgs) -> Result<f64> {
    let model = read_model(&args.model)?;
    let gains_file = read_gains_file(&args.gains)?;
    let gains = place(&model, &gains_file.controller_poles(), &gains_file.observer_poles())?;
    let cfg = SweepConfig {
        magnitude: args.magnitude,
        trials: args.trials,
        seed: args.seed,
        t_end: args.t_end,
        dt: args.dt,
    };
    let trials = sim::uncertainty_sweep(&model, &gains, &cfg)?;
    let mut out = String::from("trial,eta,rho,fitted_rate,stable\n");
    for t in &trials {
        let (eta, rho) = t
            .certificate
            .as_ref()
            .map(|c| (c.eta, c.rho))
            .unwrap_or((f64::NAN, f64::NAN));
        let rate = t.fit.map(|f| f.rate).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t.index,
            fmt(eta),
            fmt(rho),
            fmt(rate),
            if t.stable { 1 } else { 0 }
        ));
    }
    std::fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(dir) = &args.trajectories_dir {
        std::fs::create_dir_all(dir)?;
        rerun_trial_trajectories(&model, &gains, &cfg, &trials, dir)?;
    }
    let frac = sim::fraction_stable(&trials);
    write_manifest(
        &args.out,
        "sweep",
        &[args.model.as_path(), args.gains.as_path()],
        json!({
            "magnitude": args.magnitude,
            "trials": args.trials,
            "seed": args.seed,
            "t_end": args.t_end,
            "dt": args.dt,
        }),
    )?;
    println!(
        "sweep summary written to {} (fraction stable {:.3})",
        args.out.display(),
        frac
    );
    Ok(frac)
}

fn rerun_trial_trajectories(
    model: &SpectralModel,
    gains: &Gains,
    cfg: &SweepConfig,
    trials: &[sim::SweepTrial],
    dir: &Path,
) -> Result<()> {
    for t in trials {
        io::write_json(
            &dir.join(format!("trial_{:04}_uncertainty.json", t.index)),
            &UncertaintyFile::from_spec(&t.uncertainty),
        )?;
        // rebuild the trial closed loop to export its trajectory
        let hat = t.uncertainty_knowledge_model(model);
        let trial_gains = Gains {
            k0: synthesis::place_poles(&hat.a0, &hat.b0, &gains.desired_controller_poles)
                .map_err(|e| anyhow!("trial {}: {e}", t.index))?,
            g0: synthesis::place_observer(&hat.a0, &hat.c0, &gains.desired_observer_poles)
                .map_err(|e| anyhow!("trial {}: {e}", t.index))?,
            desired_controller_poles: gains.desired_controller_poles.clone(),
            desired_observer_poles: gains.desired_observer_poles.clone(),
        };
        let ctrl = synthesis::assemble_controller(model, &trial_gains, Some(&hat))?;
        let sys = sim::assemble(model, &ctrl, Some(&t.uncertainty))?;
        let x0 = sim::default_initial_state(&sys.labels);
        let traj = sim::propagate(&sys, &x0, cfg.t_end, cfg.dt, None, false)?;
        write_trajectory_csv(&dir.join(format!("trial_{:04}.csv", t.index)), &traj)?;
    }
    Ok(())
}

trait KnowledgeModel {
    fn uncertainty_knowledge_model(&self, truth: &SpectralModel) -> SpectralModel;
}

impl KnowledgeModel for sim::SweepTrial {
    /// Knowledge model the trial synthesized on: truth - tilde.
    fn uncertainty_knowledge_model(&self, truth: &SpectralModel) -> SpectralModel {
        let u = &self.uncertainty;
        let mut hat = truth.clone();
        hat.a0 = &truth.a0 - &u.da0;
        hat.a1 = &truth.a1 - &u.da1;
        hat.b0 = &truth.b0 - &u.db0;
        hat.b1 = &truth.b1 - &u.db1;
        hat.c0 = &truth.c0 - &u.dc0;
        hat.c1 = &truth.c1 - &u.dc1;
        hat
    }
}
