//! Command-line frontend: resolves a run configuration, dispatches to the
//! computation modules and emits plot-ready CSV files with metadata
//! sidecars.
//!
//! Exit codes: 0 success, 1 validation/computation failure, 2 usage or
//! configuration error.

mod config;
mod output;

use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use blipsim::analytic::AnalyticSolution;
use blipsim::dyson::DysonExpansion;
use blipsim::openquantum::{integrate_master, mc_trajectories, JumpSampling, McConfig};
use blipsim::propagator::{fit_decay_rate, run, PropagatorConfig};
use blipsim::spectroscopy::{spectrum_asymptotic, spectrum_from_state, SpectrumSeries};
use blipsim::state::RadialGrid;
use blipsim::system::SystemParams;
use blipsim::validation;

use config::{CommonArgs, Resolved};
use output::{emit_csv, emit_json, emit_rows, sci, sidecar};

#[derive(Parser)]
#[command(
    name = "blipsim",
    version,
    about = "Spontaneous photon emission as unitary emitter-field dynamics",
    after_help = "All quantities are in natural units with c = 1; \
                  the defaults additionally set Γ = 1 (times in decay times, \
                  lengths in decay lengths)."
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the photon wave-packet profiles p_r(t) against r and against t.
    Wavepacket(WavepacketArgs),
    /// Emit Lorentzian line shapes and the transformed spectrum of a state.
    Spectrum(SpectrumArgs),
    /// Integrate the grid propagator and compare p0(t) with the closed form.
    Decay(DecayArgs),
    /// Emit the truncation-error profile of the series amplitudes.
    Dyson(DysonArgs),
    /// Integrate the master equation and compare with the partial trace.
    Master(MasterArgs),
    /// Run a Monte Carlo jump ensemble and emit summary statistics.
    Mc(McArgs),
    /// Run the full cross-module validation suite (fixed scenarios).
    Validate(ValidateArgs),
}

#[derive(Args)]
struct WavepacketArgs {
    /// Observation times for the p_r-vs-r profiles.
    #[arg(long, value_delimiter = ',', default_value = "1.0,2.0,3.0")]
    times: Vec<f64>,
    /// Detector radii for the p_r-vs-t profiles.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,2.0")]
    radii: Vec<f64>,
    /// Sample count per profile.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Add a numerically propagated |c_r|² overlay column to the r-profiles.
    #[arg(long)]
    overlay: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Decay rates for the analytic line-shape files.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,2.0")]
    gammas: Vec<f64>,
    /// Lower edge of the frequency window; default 0.
    #[arg(long)]
    omega_min: Option<f64>,
    /// Upper edge of the frequency window; default 2ω₀.
    #[arg(long)]
    omega_max: Option<f64>,
    /// Frequency bins per file.
    #[arg(long, default_value_t = 2000)]
    bins: usize,
    /// Evaluation time of the transformed spectrum; default 12/Γ.
    #[arg(long)]
    t_eval: Option<f64>,
}

#[derive(Args)]
struct DecayArgs {
    /// At most this many CSV rows (the run is strided down to fit).
    #[arg(long, default_value_t = 5000)]
    max_rows: usize,
    /// Also dump the full field state at these times, one file each.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<f64>,
}

#[derive(Args)]
struct DysonArgs {
    /// Evaluation time; default 1/Γ.
    #[arg(long)]
    t: Option<f64>,
    /// Largest truncation order.
    #[arg(long, default_value_t = 40)]
    max_order: usize,
}

#[derive(Args)]
struct MasterArgs {
    /// Number of sample intervals over [0, t_end].
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Integrator step; default 0.005/Γ.
    #[arg(long)]
    master_dt: Option<f64>,
}

#[derive(Args)]
struct McArgs {
    /// Ensemble size.
    #[arg(long, default_value_t = 10_000)]
    n_traj: usize,
    /// Number of sample intervals over [0, t_end].
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Also emit one row per jump event (traj_index, jump_time).
    #[arg(long)]
    dump_trajectories: bool,
    /// Report jump times referenced to a detector at this radius (adds r/c).
    #[arg(long)]
    detector_radius: Option<f64>,
    /// Use per-step Bernoulli thinning with this step instead of the exact
    /// inverse-CDF sampler.
    #[arg(long)]
    bernoulli_dt: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Name of the JSON report file.
    #[arg(long, default_value = "validate_report.json")]
    report: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let resolved = match config::resolve(&cli.common) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.cmd {
        Cmd::Wavepacket(args) => cmd_wavepacket(&resolved, args),
        Cmd::Spectrum(args) => cmd_spectrum(&resolved, args),
        Cmd::Decay(args) => cmd_decay(&resolved, args),
        Cmd::Dyson(args) => cmd_dyson(&resolved, args),
        Cmd::Master(args) => cmd_master(&resolved, args),
        Cmd::Mc(args) => cmd_mc(&resolved, args),
        Cmd::Validate(args) => cmd_validate(&resolved, args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn cmd_wavepacket(res: &Resolved, args: &WavepacketArgs) -> anyhow::Result<ExitCode> {
    let sol = AnalyticSolution::new(&res.params);
    let mut times = args.times.clone();
    times.sort_by(f64::total_cmp);
    anyhow::ensure!(!times.is_empty(), "need at least one observation time");
    anyhow::ensure!(times[0] >= 0.0, "observation times must be non-negative");

    let overlay_snapshots = if args.overlay {
        let t_max = *times.last().unwrap();
        let grid =
            RadialGrid::from_dr(t_max.max(res.dr), res.dr).map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut cfg = PropagatorConfig::new(grid, res.dt, t_max);
        cfg.norm_budget = res.norm_budget;
        if let Err(e) = cfg.check(&res.params) {
            eprintln!("configuration error: {e}");
            return Ok(ExitCode::from(2));
        }
        let run = run(&res.params, &cfg, &times).map_err(|e| anyhow::anyhow!("{e}"))?;
        Some(run.snapshots)
    } else {
        None
    };

    for (i, &t) in times.iter().enumerate() {
        let r_max = t; // c = 1
        let rows: Vec<Vec<f64>> = (0..=args.samples)
            .map(|j| {
                let r = r_max * (j as f64 / args.samples as f64);
                let mut row = vec![r, sol.pr(r, t)];
                if let Some(snaps) = &overlay_snapshots {
                    let snap = &snaps[i];
                    let cell = snap.grid.cell_of(r).unwrap_or(snap.grid.n_cells() - 1);
                    row.push(snap.cr[cell].norm_sqr());
                }
                row
            })
            .collect();
        let header = if args.overlay {
            "r,p_r,p_r_numeric"
        } else {
            "r,p_r"
        };
        let meta = sidecar(
            "wavepacket",
            res,
            serde_json::json!({ "profile": "p_r vs r", "t": t, "overlay": args.overlay }),
        );
        let path = emit_csv(
            &res.out_dir,
            &format!("pr_vs_r_t{}.csv", i + 1),
            header,
            &rows,
            &meta,
        )?;
        println!("wrote {}", path.display());
    }

    for (i, &r) in args.radii.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (0..=args.samples)
            .map(|j| {
                let t = res.t_end * (j as f64 / args.samples as f64);
                vec![t, sol.pr(r, t)]
            })
            .collect();
        let meta = sidecar(
            "wavepacket",
            res,
            serde_json::json!({ "profile": "p_r vs t", "r": r }),
        );
        let path = emit_csv(
            &res.out_dir,
            &format!("pr_vs_t_r{}.csv", i + 1),
            "t,p_r",
            &rows,
            &meta,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_spectrum(res: &Resolved, args: &SpectrumArgs) -> anyhow::Result<ExitCode> {
    let omega_min = args.omega_min.unwrap_or(0.0);
    let omega_max = args.omega_max.unwrap_or(2.0 * res.omega0);
    anyhow::ensure!(omega_max > omega_min, "empty frequency window");
    let window = (omega_min, omega_max);

    for &g in &args.gammas {
        let params = SystemParams::superposition(res.omega0, g, res.alpha, res.beta_sq.sqrt())
            .map_err(|e| anyhow::anyhow!("gamma {g}: {e}"))?;
        let spec = SpectrumSeries::from_asymptotic(&params, window, args.bins);
        let rows: Vec<Vec<f64>> = spec
            .omegas
            .iter()
            .zip(&spec.density)
            .map(|(&w, &p)| vec![w, p])
            .collect();
        let meta = sidecar(
            "spectrum",
            res,
            serde_json::json!({
                "kind": "asymptotic",
                "gamma": g,
                "window": [window.0, window.1],
                "fwhm": spec.fwhm(),
                "peak_omega": spec.peak_omega(),
            }),
        );
        let path = emit_csv(
            &res.out_dir,
            &format!("spectrum_gamma{g}.csv"),
            "omega,p_omega",
            &rows,
            &meta,
        )?;
        println!("wrote {}", path.display());
    }

    // numerically transformed spectrum of the sampled emission state
    let t_eval = args.t_eval.unwrap_or(12.0 / res.gamma);
    let grid =
        RadialGrid::from_dr(t_eval.max(res.dr), res.dr).map_err(|e| anyhow::anyhow!("{e}"))?;
    let sol = AnalyticSolution::new(&res.params);
    let state = sol.sample_state(grid, t_eval);
    let spec = spectrum_from_state(&res.params, &state, window, args.bins)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut max_rel: f64 = 0.0;
    let rows: Vec<Vec<f64>> = spec
        .omegas
        .iter()
        .zip(&spec.density)
        .map(|(&w, &p)| {
            let reference = spectrum_asymptotic(&res.params, w);
            if (w - res.omega0).abs() <= 3.0 * res.gamma && res.beta_sq > 0.0 {
                max_rel = max_rel.max((p / res.beta_sq - reference).abs() / reference);
            }
            vec![w, p, reference]
        })
        .collect();
    let fwhm = spec.fwhm();
    let meta = sidecar(
        "spectrum",
        res,
        serde_json::json!({
            "kind": "transformed",
            "t_eval": t_eval,
            "window": [window.0, window.1],
            "fwhm": fwhm,
            "peak_omega": spec.peak_omega(),
            "max_rel_deviation_core": max_rel,
        }),
    );
    let path = emit_csv(
        &res.out_dir,
        "spectrum_transformed.csv",
        "omega,p_omega,p_omega_asymptotic",
        &rows,
        &meta,
    )?;
    println!(
        "wrote {} (peak {:.4}, FWHM {}, core deviation {:.3}%)",
        path.display(),
        spec.peak_omega(),
        fwhm.map_or("n/a".to_string(), |w| format!("{w:.4}")),
        100.0 * max_rel
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_decay(res: &Resolved, args: &DecayArgs) -> anyhow::Result<ExitCode> {
    let grid =
        RadialGrid::from_dr(res.t_end.max(res.dr), res.dr).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut cfg = PropagatorConfig::new(grid, res.dt, res.t_end);
    cfg.norm_budget = res.norm_budget;
    if let Err(e) = cfg.check(&res.params) {
        eprintln!("configuration error: {e}");
        return Ok(ExitCode::from(2));
    }
    let mut snapshot_times = args.snapshots.clone();
    snapshot_times.sort_by(f64::total_cmp);
    if let Some(&t) = snapshot_times.iter().find(|&&t| t < 0.0 || t > res.t_end) {
        eprintln!("configuration error: snapshot time {t} outside [0, {}]", res.t_end);
        return Ok(ExitCode::from(2));
    }
    let run = run(&res.params, &cfg, &snapshot_times).map_err(|e| anyhow::anyhow!("{e}"))?;
    let sol = AnalyticSolution::new(&res.params);

    for (i, snap) in run.snapshots.iter().enumerate() {
        let rows: Vec<Vec<f64>> = snap
            .grid
            .centers()
            .zip(&snap.cr)
            .map(|(r, a)| vec![snap.t, r, a.re, a.im, a.norm_sqr()])
            .collect();
        let meta = sidecar(
            "decay",
            res,
            serde_json::json!({ "snapshot_t": snap.t, "scheme": "UpwindEuler" }),
        );
        let path = emit_csv(
            &res.out_dir,
            &format!("snapshot_t{}.csv", i + 1),
            "t,r,re_cr,im_cr,abs2_cr",
            &rows,
            &meta,
        )?;
        println!("wrote {}", path.display());
    }

    let stride = (run.times.len() / args.max_rows.max(1)).max(1);
    let vac = res.alpha * res.alpha;
    let rows: Vec<Vec<f64>> = run
        .times
        .iter()
        .zip(&run.p0)
        .step_by(stride)
        .map(|(&t, &p)| vec![t, vac + p, sol.p0(t)])
        .collect();

    let gamma_eff = if res.beta_sq > 0.0 {
        Some(fit_decay_rate(&run, 0.0, res.t_end))
    } else {
        None
    };
    let meta = sidecar(
        "decay",
        res,
        serde_json::json!({
            "gamma_eff": gamma_eff,
            "norm_drift_max": run.norm_drift_max,
            "scheme": "UpwindEuler",
        }),
    );
    let path = emit_csv(
        &res.out_dir,
        "decay.csv",
        "t,p0_numeric,p0_analytic",
        &rows,
        &meta,
    )?;
    match gamma_eff {
        Some(g) => println!(
            "wrote {} (gamma_eff = {g:.6}, norm drift {:.2e})",
            path.display(),
            run.norm_drift_max
        ),
        None => println!("wrote {}", path.display()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_dyson(res: &Resolved, args: &DysonArgs) -> anyhow::Result<ExitCode> {
    let t = args.t.unwrap_or(1.0 / res.gamma);
    let dy = DysonExpansion::new(&res.params, args.max_order);
    let profile = dy
        .convergence_profile(t, args.max_order)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let rows: Vec<Vec<f64>> = profile
        .iter()
        .map(|&(m, err)| vec![m as f64, err, dy.remainder_bound(t, m)])
        .collect();
    let meta = sidecar(
        "dyson",
        res,
        serde_json::json!({ "t": t, "max_order": args.max_order }),
    );
    let path = emit_csv(
        &res.out_dir,
        "dyson_convergence.csv",
        "order,error,bound",
        &rows,
        &meta,
    )?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_master(res: &Resolved, args: &MasterArgs) -> anyhow::Result<ExitCode> {
    let dt = args.master_dt.unwrap_or(0.005 / res.gamma);
    let times: Vec<f64> = (0..=args.samples)
        .map(|j| res.t_end * (j as f64 / args.samples as f64))
        .collect();
    let rhos = integrate_master(&res.params, &times, dt).map_err(|e| anyhow::anyhow!("{e}"))?;
    let sol = AnalyticSolution::new(&res.params);
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(&rhos)
        .map(|(&t, rho)| {
            let exact = sol.rho_emitter(t);
            vec![
                t,
                rho.rho11(),
                rho.rho00(),
                rho.rho01().norm(),
                exact.rho11(),
                exact.rho01().norm(),
            ]
        })
        .collect();
    let meta = sidecar("master", res, serde_json::json!({ "master_dt": dt }));
    let path = emit_csv(
        &res.out_dir,
        "master.csv",
        "t,rho11,rho00,rho01_abs,rho11_exact,rho01_abs_exact",
        &rows,
        &meta,
    )?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_mc(res: &Resolved, args: &McArgs) -> anyhow::Result<ExitCode> {
    let times: Vec<f64> = (0..=args.samples)
        .map(|j| res.t_end * (j as f64 / args.samples as f64))
        .collect();
    let mut cfg = McConfig::new(args.n_traj, res.seed);
    cfg.detector_radius = args.detector_radius;
    if let Some(dt) = args.bernoulli_dt {
        anyhow::ensure!(dt > 0.0, "bernoulli step must be positive");
        cfg.sampling = JumpSampling::BernoulliSteps { dt };
    }
    let ensemble = mc_trajectories(&res.params, &cfg, &times, false);
    let rows: Vec<Vec<f64>> = ensemble
        .rows
        .iter()
        .map(|r| vec![r.t, r.p_excited_mean, r.p_excited_ci95, r.rho01_abs_mean])
        .collect();
    let meta = sidecar(
        "mc",
        res,
        serde_json::json!({
            "n_traj": args.n_traj,
            "sampling": cfg.sampling,
            "detector_radius": args.detector_radius,
        }),
    );
    let path = emit_csv(
        &res.out_dir,
        "mc_summary.csv",
        "t,p_excited_mean,p_excited_ci95,rho01_abs_mean",
        &rows,
        &meta,
    )?;
    println!("wrote {}", path.display());

    if args.dump_trajectories {
        let lines: Vec<String> = ensemble
            .records
            .iter()
            .filter_map(|r| r.jump_time.map(|t| format!("{},{}", r.index, sci(t))))
            .collect();
        let meta = sidecar("mc", res, serde_json::json!({ "n_traj": args.n_traj }));
        let path = emit_rows(
            &res.out_dir,
            "mc_trajectories.csv",
            "traj_index,jump_time",
            &lines,
            &meta,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(res: &Resolved, args: &ValidateArgs) -> anyhow::Result<ExitCode> {
    let report = validation::run_full_report(res.seed);
    for check in &report.checks {
        println!(
            "{:<22} {}  {}",
            check.name,
            if check.passed { "PASS" } else { "FAIL" },
            check.detail
        );
    }
    let doc = serde_json::json!({
        "command": "validate",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": res.seed,
        "passed": report.passed,
        "checks": report.checks,
    });
    let path = emit_json(&res.out_dir, &args.report, &doc)
        .with_context(|| "cannot write validation report")?;
    println!("wrote {}", path.display());
    if report.passed {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("validation failed");
        Ok(ExitCode::from(1))
    }
}
