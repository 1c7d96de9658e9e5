//! Reduced dynamics of the emitter: conditional (no-detection) evolution,
//! the master equation and its Monte Carlo jump unraveling.
//!
//! The conditional generator is H_cond = ħ(ω₀ − iΓ/2)|1⟩⟨1|; the master
//! equation it induces reads, element-wise,
//! ρ̇₁₁ = −Γρ₁₁, ρ̇₀₁ = (iω₀ − Γ/2)ρ₀₁, ρ̇₀₀ = +Γρ₁₁.
//! All three reduced descriptions (partial trace of the pure state, master
//! integration, trajectory ensemble) must agree; `consistency_report`
//! quantifies how well they do.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::AnalyticSolution;
use crate::system::SystemParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("not a density matrix: {reason} (trace = {trace})")]
    NotAState { reason: &'static str, trace: f64 },
}

/// 2x2 emitter density matrix. Hermitian by construction: only ρ₀₀, ρ₁₁ and
/// ρ₀₁ are stored, ρ₁₀ is the conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    rho00: f64,
    rho11: f64,
    rho01: Complex64,
}

impl DensityMatrix2 {
    pub fn from_parts(rho00: f64, rho11: f64, rho01: Complex64) -> Self {
        Self {
            rho00,
            rho11,
            rho01,
        }
    }

    /// Pure ground state |0⟩⟨0|.
    pub fn ground() -> Self {
        Self::from_parts(1.0, 0.0, Complex64::new(0.0, 0.0))
    }

    /// Pure state (a|0⟩ + b|1⟩)(…)†; amplitudes are normalized first.
    pub fn pure(a: Complex64, b: Complex64) -> Self {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        Self::from_parts(a.norm_sqr(), b.norm_sqr(), a * b.conj())
    }

    pub fn rho00(&self) -> f64 {
        self.rho00
    }

    pub fn rho11(&self) -> f64 {
        self.rho11
    }

    pub fn rho01(&self) -> Complex64 {
        self.rho01
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11
    }

    /// Eigenvalues (low, high) of the Hermitian matrix.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.rho00 + self.rho11);
        let d = 0.5 * (self.rho00 - self.rho11);
        let disc = (d * d + self.rho01.norm_sqr()).sqrt();
        (mean - disc, mean + disc)
    }

    /// Largest element-wise difference, comparing ρ₀₀, ρ₁₁ and |Δρ₀₁|.
    pub fn max_elementwise_diff(&self, other: &Self) -> f64 {
        let d00 = (self.rho00 - other.rho00).abs();
        let d11 = (self.rho11 - other.rho11).abs();
        let d01 = (self.rho01 - other.rho01).norm();
        d00.max(d11).max(d01)
    }

    fn check(&self) -> Result<(), StateError> {
        let trace = self.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(StateError::NotAState {
                reason: "trace differs from one",
                trace,
            });
        }
        let (lo, _) = self.eigenvalues();
        if lo < -1e-10 {
            return Err(StateError::NotAState {
                reason: "negative eigenvalue",
                trace,
            });
        }
        Ok(())
    }
}

/// Conditional (no-detection) evolution under H_cond = ħ(ω₀ − iΓ/2)|1⟩⟨1|.
///
/// Returns the unnormalized amplitude pair (α, β·e^{−(iω₀ + Γ/2)t}) and the
/// no-jump probability |α|² + |β|²e^{−Γt}, which coincides with the survival
/// probability of the full solution.
pub fn conditional_evolve(params: &SystemParams, t: f64) -> ((Complex64, Complex64), f64) {
    let decayed =
        params.beta() * (-Complex64::new(0.5 * params.gamma(), params.omega0()) * t).exp();
    let p_nojump =
        params.alpha().norm_sqr() + params.beta().norm_sqr() * (-params.gamma() * t).exp();
    ((params.alpha(), decayed), p_nojump)
}

fn master_rhs(params: &SystemParams, rho: &DensityMatrix2) -> DensityMatrix2 {
    let gamma = params.gamma();
    DensityMatrix2 {
        rho00: gamma * rho.rho11,
        rho11: -gamma * rho.rho11,
        rho01: Complex64::new(-0.5 * gamma, params.omega0()) * rho.rho01,
    }
}

fn axpy(rho: &DensityMatrix2, k: &DensityMatrix2, h: f64) -> DensityMatrix2 {
    DensityMatrix2 {
        rho00: rho.rho00 + h * k.rho00,
        rho11: rho.rho11 + h * k.rho11,
        rho01: rho.rho01 + h * k.rho01,
    }
}

/// One fourth-order Runge-Kutta step of the master equation.
///
/// The accuracy regime is Γ·dt ≤ 0.01; `integrate_master` subdivides
/// automatically. The trace is preserved exactly by the right-hand side
/// (ρ̇₀₀ + ρ̇₁₁ = 0), so drift is rounding only.
pub fn master_step(
    params: &SystemParams,
    rho: &DensityMatrix2,
    dt: f64,
) -> Result<DensityMatrix2, StateError> {
    rho.check()?;
    let k1 = master_rhs(params, rho);
    let k2 = master_rhs(params, &axpy(rho, &k1, 0.5 * dt));
    let k3 = master_rhs(params, &axpy(rho, &k2, 0.5 * dt));
    let k4 = master_rhs(params, &axpy(rho, &k3, dt));
    Ok(DensityMatrix2 {
        rho00: rho.rho00 + dt / 6.0 * (k1.rho00 + 2.0 * k2.rho00 + 2.0 * k3.rho00 + k4.rho00),
        rho11: rho.rho11 + dt / 6.0 * (k1.rho11 + 2.0 * k2.rho11 + 2.0 * k3.rho11 + k4.rho11),
        rho01: rho.rho01 + dt / 6.0 * (k1.rho01 + 2.0 * k2.rho01 + 2.0 * k3.rho01 + k4.rho01),
    })
}

/// Integrate the master equation from the initial state implied by the
/// parameters and sample at the requested (sorted, non-negative) times.
pub fn integrate_master(
    params: &SystemParams,
    times: &[f64],
    dt_max: f64,
) -> Result<Vec<DensityMatrix2>, StateError> {
    let mut rho = DensityMatrix2::pure(params.alpha(), params.beta());
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &target in times {
        assert!(target >= t, "sample times must be sorted and non-negative");
        let span = target - t;
        if span > 0.0 {
            let n = (span / dt_max).ceil().max(1.0) as usize;
            let dt = span / n as f64;
            for _ in 0..n {
                rho = master_step(params, &rho, dt)?;
            }
        }
        t = target;
        out.push(rho);
    }
    Ok(out)
}

/// How jump times are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JumpSampling {
    /// Invert the exact no-jump law p₀(t); one uniform draw per trajectory.
    InverseCdf,
    /// First-order thinning: at each step of width `dt`, jump with
    /// probability Γ⟨σ⁺σ⁻⟩dt. Kept for cross-checking the exact sampler.
    BernoulliSteps { dt: f64 },
}

/// Monte Carlo ensemble configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub sampling: JumpSampling,
    /// Report jump times shifted by r/c, referencing a detector at radius r
    /// instead of the emitter. Off by default.
    pub detector_radius: Option<f64>,
}

impl McConfig {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        Self {
            n_traj,
            seed,
            sampling: JumpSampling::InverseCdf,
            detector_radius: None,
        }
    }
}

/// One trajectory: the jump time (emitter-referenced, `None` if the photon
/// is never detected) and the conditional states at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub seed: u64,
    pub jump_time: Option<f64>,
    /// Normalized conditional state (a, b) at each requested time; after a
    /// jump the state is exactly |0⟩.
    pub states: Vec<(Complex64, Complex64)>,
}

/// Ensemble statistics at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub t: f64,
    /// Mean per-trajectory excited population; estimates ρ₁₁.
    pub p_excited_mean: f64,
    /// Half-width of the 95% confidence interval of the mean.
    pub p_excited_ci95: f64,
    /// Modulus of the mean per-trajectory coherence; estimates |ρ₀₁|.
    pub rho01_abs_mean: f64,
    /// Fraction of trajectories that have not jumped by t.
    pub unjumped_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEnsemble {
    pub times: Vec<f64>,
    pub rows: Vec<EnsembleRow>,
    pub records: Vec<TrajectoryRecord>,
}

/// RNG for trajectory `index`: a fixed-seed ChaCha stream per trajectory, so
/// results depend only on (seed, index), never on evaluation order.
fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Draw the jump time of trajectory `index`.
pub fn sample_jump_time(params: &SystemParams, cfg: &McConfig, index: usize) -> Option<f64> {
    let mut rng = trajectory_rng(cfg.seed, index);
    let alpha_sq = params.alpha().norm_sqr();
    let beta_sq = params.beta().norm_sqr();
    match cfg.sampling {
        JumpSampling::InverseCdf => {
            let u: f64 = rng.gen();
            if u <= alpha_sq || beta_sq == 0.0 {
                return None;
            }
            let t = -((u - alpha_sq) / beta_sq).ln() / params.gamma();
            t.is_finite().then_some(t)
        }
        JumpSampling::BernoulliSteps { dt } => {
            // jump probability per step: Γ·⟨σ⁺σ⁻⟩_cond·dt with the
            // conditional excited population β²e^{-Γt}/p₀(t)
            let gamma = params.gamma();
            let mut t = 0.0;
            // stop once the remaining jump probability is negligible
            let t_stop = (50.0 / gamma).max(1.0);
            while t < t_stop {
                let decayed = beta_sq * (-gamma * t).exp();
                let p_cond = decayed / (alpha_sq + decayed);
                let p_jump = (gamma * p_cond * dt).min(1.0);
                if rng.gen::<f64>() < p_jump {
                    return Some(t + 0.5 * dt);
                }
                t += dt;
            }
            None
        }
    }
}

/// Conditional state of a trajectory at time t given its jump time.
fn trajectory_state(
    params: &SystemParams,
    jump_time: Option<f64>,
    t: f64,
) -> (Complex64, Complex64) {
    if let Some(tj) = jump_time {
        if t >= tj {
            return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        }
    }
    let ((a, b), p) = conditional_evolve(params, t);
    let n = p.sqrt();
    (a / n, b / n)
}

/// Run `n_traj` trajectories and accumulate projector statistics at the
/// requested times. Per-trajectory results are a pure function of
/// (params, seed, index); the reduction order is fixed, so the ensemble is
/// reproducible bit-for-bit.
pub fn mc_trajectories(
    params: &SystemParams,
    cfg: &McConfig,
    times: &[f64],
    keep_states: bool,
) -> McEnsemble {
    let n = cfg.n_traj;
    let mut jump_times = Vec::with_capacity(n);
    let mut records = Vec::new();
    for i in 0..n {
        let jt = sample_jump_time(params, cfg, i);
        jump_times.push(jt);
        let states = if keep_states {
            times
                .iter()
                .map(|&t| trajectory_state(params, jt, t))
                .collect()
        } else {
            Vec::new()
        };
        let reported = match cfg.detector_radius {
            Some(r) => jt.map(|t| t + r / params.c()),
            None => jt,
        };
        records.push(TrajectoryRecord {
            index: i,
            seed: cfg.seed,
            jump_time: reported,
            states,
        });
    }

    let rows = times
        .iter()
        .map(|&t| {
            let mut sum_p = 0.0;
            let mut sum_p2 = 0.0;
            let mut sum_coh = Complex64::new(0.0, 0.0);
            let mut unjumped = 0usize;
            for &jt in &jump_times {
                let alive = jt.is_none_or(|tj| t < tj);
                if alive {
                    unjumped += 1;
                    let (a, b) = trajectory_state(params, jt, t);
                    let p = b.norm_sqr();
                    sum_p += p;
                    sum_p2 += p * p;
                    sum_coh += a * b.conj();
                }
            }
            let nf = n as f64;
            let mean = sum_p / nf;
            let var = (sum_p2 / nf - mean * mean).max(0.0);
            EnsembleRow {
                t,
                p_excited_mean: mean,
                p_excited_ci95: 1.96 * (var / nf).sqrt(),
                rho01_abs_mean: (sum_coh / nf).norm(),
                unjumped_fraction: unjumped as f64 / nf,
            }
        })
        .collect();

    McEnsemble {
        times: times.to_vec(),
        rows,
        records,
    }
}

/// One row of the three-way comparison at a single time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub t: f64,
    pub partial_trace: DensityMatrix2,
    pub master: DensityMatrix2,
    pub mc_rho11: f64,
    pub mc_rho01_abs: f64,
    /// Binomial standard error of the MC ρ₁₁ estimate.
    pub mc_sigma: f64,
    pub pt_vs_master: f64,
    /// |MC − partial trace| of ρ₁₁ in units of the MC standard error.
    pub mc_z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub max_pt_vs_master: f64,
    pub max_mc_z_score: f64,
}

/// Compare the reduced density matrix from the partial trace, the master
/// integration and the Monte Carlo ensemble on a common time grid.
pub fn consistency_report(
    params: &SystemParams,
    times: &[f64],
    mc: &McConfig,
) -> Result<ConsistencyReport, StateError> {
    let sol = AnalyticSolution::new(params);
    let master = integrate_master(params, times, 0.005 / params.gamma())?;
    let ensemble = mc_trajectories(params, mc, times, false);

    let mut rows = Vec::with_capacity(times.len());
    let mut max_pt_vs_master: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let pt = sol.rho_emitter(t);
        let me = master[i];
        let row_mc = ensemble.rows[i];
        let pt_vs_master = pt.max_elementwise_diff(&me);
        let p = pt.rho11().clamp(0.0, 1.0);
        let sigma = (p * (1.0 - p) / mc.n_traj as f64).sqrt();
        let z = if sigma > 0.0 {
            (row_mc.p_excited_mean - pt.rho11()).abs() / sigma
        } else {
            // exactly deterministic cases (pure ground, t = 0)
            if (row_mc.p_excited_mean - pt.rho11()).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        max_pt_vs_master = max_pt_vs_master.max(pt_vs_master);
        max_z = max_z.max(z);
        rows.push(ConsistencyRow {
            t,
            partial_trace: pt,
            master: me,
            mc_rho11: row_mc.p_excited_mean,
            mc_rho01_abs: row_mc.rho01_abs_mean,
            mc_sigma: sigma,
            pt_vs_master,
            mc_z_score: z,
        });
    }
    Ok(ConsistencyReport {
        rows,
        max_pt_vs_master,
        max_mc_z_score: max_z,
    })
}
