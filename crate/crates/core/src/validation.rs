//! Cross-module validation: every closed-form prediction checked against
//! every numerical route, bundled as a machine-readable report.
//!
//! Each check pins its tolerances as constants here; the acceptance test
//! suite asserts through the same functions, so the thresholds live in one
//! place.

use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticSolution;
use crate::dyson::DysonExpansion;
use crate::numeric::adaptive_simpson;
use crate::openquantum::{consistency_report, McConfig};
use crate::propagator::{
    fit_decay_rate, fitted_decay_rate, run, PropagatorConfig, SourceConvention,
};
use crate::spectroscopy::{
    energy_report, negative_frequency_weight_lorentzian, spectrum_from_state, spectrum_natural,
};
use crate::state::RadialGrid;
use crate::system::SystemParams;

/// Criterion 1: absolute error budget for p₀(t) on the reference grid.
pub const DECAY_P0_TOL: f64 = 1e-3;
/// Criterion 1: relative error budget for the fitted decay rate.
pub const DECAY_RATE_TOL: f64 = 5e-3;
/// Criterion 2: relative error budget for |c_r|² away from the wavefront.
pub const WAVEFRONT_REL_TOL: f64 = 5e-3;
/// Criterion 2: cells excluded around the wavefront.
pub const WAVEFRONT_WINDOW_CELLS: usize = 10;
/// Criterion 3: FWHM tolerance relative to Γ.
pub const FWHM_REL_TOL: f64 = 0.03;
/// Criterion 3: tolerance on the total transformed weight.
pub const SPECTRUM_WEIGHT_TOL: f64 = 1e-4;
/// Criterion 4: double-precision floor added to the Taylor remainder bound.
pub const DYSON_ROUNDOFF_FLOOR: f64 = 1e-14;
/// Criterion 5: quadrature tolerance of the analytic normalization.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Criterion 5: propagator norm-drift budget.
pub const NORM_DRIFT_TOL: f64 = 1e-4;
/// Criterion 6: partial trace vs master integration.
pub const REDUCED_PT_VS_MASTER_TOL: f64 = 1e-8;
/// Criterion 6: Monte Carlo agreement in binomial standard errors.
pub const REDUCED_MC_SIGMA_TOL: f64 = 5.0;
/// Criterion 7: relative energy-conservation tolerance.
pub const ENERGY_REL_TOL: f64 = 0.02;
/// Criterion 7: relative tolerance on the negative-frequency deficit.
pub const DEFICIT_REL_TOL: f64 = 0.10;
/// Criterion 8: acceptance interval for the full-cell rate ratio.
pub const FULL_CELL_RATIO: (f64, f64) = (1.8, 2.2);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: Vec<(String, f64)>,
    pub detail: String,
}

impl CheckResult {
    pub fn value(&self, key: &str) -> f64 {
        self.measured
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("no measured value named {key} in {}", self.name))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn result(
    name: &'static str,
    passed: bool,
    measured: Vec<(String, f64)>,
    detail: String,
) -> CheckResult {
    CheckResult {
        name: name.to_owned(),
        passed,
        measured,
        detail,
    }
}

/// Criterion 1: the grid propagator reproduces the exponential decay law.
///
/// β = 1, Γ = 1, ω₀ = 0, Δr = 1e-3 at CFL = 1 over t ∈ [0, 5]. The norm
/// budget for this run is relaxed to 1e-3: the half-cell source carries an
/// inherent drift of Δr/4·(1 − e^{−Γt}) ≈ 2.5e-4 at this resolution.
pub fn check_exponential_decay() -> CheckResult {
    let params = SystemParams::excited(0.0, 1.0).unwrap();
    let mut cfg = PropagatorConfig::cfl_one(&params, 1e-3, 5.0);
    cfg.norm_budget = 1e-3;
    let run = match run(&params, &cfg, &[]) {
        Ok(r) => r,
        Err(e) => return result("exponential_decay", false, vec![], e.to_string()),
    };
    let max_abs_err = run
        .times
        .iter()
        .zip(&run.p0)
        .map(|(&t, &p)| (p - (-t).exp()).abs())
        .fold(0.0, f64::max);
    let gamma_eff = fit_decay_rate(&run, 0.0, 5.0);
    let passed = max_abs_err < DECAY_P0_TOL && (gamma_eff - 1.0).abs() < DECAY_RATE_TOL;
    result(
        "exponential_decay",
        passed,
        vec![
            ("max_abs_error".into(), max_abs_err),
            ("gamma_eff".into(), gamma_eff),
        ],
        format!(
            "max |p0 - e^(-t)| = {max_abs_err:.3e} (tol {DECAY_P0_TOL:.0e}), \
             gamma_eff = {gamma_eff:.6} (tol ±{DECAY_RATE_TOL})"
        ),
    )
}

/// Criterion 2: exact causal support and the wavefront profile.
///
/// At CFL = 1 the field is bitwise zero for r > ct and r < 0; inside the
/// light cone |c_r|² matches (Γ/c)e^{Γ(r/c−t)} within 5e-3 relative outside
/// a ten-cell wavefront window.
pub fn check_causal_wavefront() -> CheckResult {
    let params = SystemParams::excited(0.0, 1.0).unwrap();
    let grid = RadialGrid::new(-0.5, 3.5, 4000).unwrap();
    let mut cfg = PropagatorConfig::new(grid, grid.dr(), 3.0);
    cfg.norm_budget = 1e-3;
    let t_eval = 3.0;
    let run = match run(&params, &cfg, &[t_eval]) {
        Ok(r) => r,
        Err(e) => return result("causal_wavefront", false, vec![], e.to_string()),
    };
    let snap = &run.snapshots[0];
    let acausal = snap.acausal_amplitude(params.c());

    let sol = AnalyticSolution::new(&params);
    let dr = snap.grid.dr();
    let exclusion = t_eval - WAVEFRONT_WINDOW_CELLS as f64 * dr;
    let mut max_rel: f64 = 0.0;
    for (r, a) in snap.grid.centers().zip(&snap.cr) {
        if r >= 0.0 && r <= exclusion {
            let exact = sol.pr(r, t_eval);
            max_rel = max_rel.max((a.norm_sqr() - exact).abs() / exact);
        }
    }
    let passed = acausal == 0.0 && max_rel < WAVEFRONT_REL_TOL;
    result(
        "causal_wavefront",
        passed,
        vec![
            ("acausal_amplitude".into(), acausal),
            ("max_rel_error".into(), max_rel),
        ],
        format!(
            "amplitude beyond r = ct: {acausal:e} (must be exactly 0), \
             interior |cr|^2 deviation = {max_rel:.3e} (tol {WAVEFRONT_REL_TOL:.0e})"
        ),
    )
}

/// Criterion 3: the transformed spectrum is the Lorentzian line.
///
/// Analytic state at Γt = 12, ω₀/Γ = 10, Δr = 1e-3. The natural comb must
/// carry the full field weight 1 − e^{−12}; the windowed transform must
/// peak at ω₀ within one bin with FWHM = Γ within 3%.
pub fn check_lorentzian_spectrum() -> CheckResult {
    let params = SystemParams::excited(10.0, 1.0).unwrap();
    let sol = AnalyticSolution::new(&params);
    let grid = RadialGrid::from_dr(12.0, 1e-3).unwrap();
    let state = sol.sample_state(grid, 12.0);

    let natural = match spectrum_natural(&params, &state) {
        Ok(s) => s,
        Err(e) => return result("lorentzian_spectrum", false, vec![], e.to_string()),
    };
    let weight = natural.total_weight();
    let weight_err = (weight - (1.0 - (-12.0_f64).exp())).abs();

    let zoom = match spectrum_from_state(&params, &state, (0.0, 20.0), 2000) {
        Ok(s) => s,
        Err(e) => return result("lorentzian_spectrum", false, vec![], e.to_string()),
    };
    let peak_err = (zoom.peak_omega() - 10.0).abs();
    let fwhm = zoom.fwhm().unwrap_or(f64::NAN);
    let fwhm_err = (fwhm - 1.0).abs();

    let passed =
        weight_err < SPECTRUM_WEIGHT_TOL && peak_err <= zoom.bin_width() && fwhm_err < FWHM_REL_TOL;
    result(
        "lorentzian_spectrum",
        passed,
        vec![
            ("total_weight".into(), weight),
            ("weight_error".into(), weight_err),
            ("peak_omega".into(), zoom.peak_omega()),
            ("fwhm".into(), fwhm),
        ],
        format!(
            "weight = {weight:.9} (err {weight_err:.2e}, tol {SPECTRUM_WEIGHT_TOL:.0e}), \
             peak at {peak:.4} (bin {bin:.3}), FWHM = {fwhm:.5} (tol 3%)",
            peak = zoom.peak_omega(),
            bin = zoom.bin_width(),
        ),
    )
}

/// Criterion 4: factorial convergence of the series amplitudes.
///
/// |c0_partial(t, M) − c₀(t)| obeys the Taylor remainder bound for all
/// M ≤ 40 and Γt ≤ 10 (with a 1e-14 double-precision floor); at Γt = 1 the
/// M = 20 truncation is exact to 1e-14.
pub fn check_dyson_convergence() -> CheckResult {
    let params = SystemParams::excited(3.0, 1.0).unwrap();
    let dy = DysonExpansion::new(&params, 60);
    let sol = AnalyticSolution::new(&params);

    let mut worst_excess = f64::NEG_INFINITY;
    let mut bound_ok = true;
    for &t in &[0.25, 1.0, 2.0, 5.0, 10.0] {
        let exact = sol.c0_exact(t);
        for order in 0..=40 {
            let err = (dy.c0_partial(t, order).unwrap() - exact).norm();
            let allowed = dy.remainder_bound(t, order) + DYSON_ROUNDOFF_FLOOR;
            worst_excess = worst_excess.max(err - allowed);
            if err > allowed {
                bound_ok = false;
            }
        }
    }
    let err_m20 = (dy.c0_partial(1.0, 20).unwrap() - sol.c0_exact(1.0)).norm();
    let passed = bound_ok && err_m20 <= 1e-14;
    result(
        "dyson_convergence",
        passed,
        vec![
            ("worst_bound_excess".into(), worst_excess),
            ("error_m20_gt1".into(), err_m20),
        ],
        format!(
            "remainder bound holds for M <= 40, gamma*t <= 10 \
             (worst excess {worst_excess:.2e}); M = 20 at gamma*t = 1: {err_m20:.2e} (tol 1e-14)"
        ),
    )
}

/// Criterion 5: normalization of the closed form and unitarity of the grid.
///
/// p₀(t) + ∫ p_r dr = 1 to 1e-10 by quadrature; the propagator norm drift
/// stays below 1e-4 over Γt = 5 (Δr = 2e-4, where the source-cell drift law
/// predicts ≈ 5e-5).
pub fn check_normalization() -> CheckResult {
    let mut max_quad_defect: f64 = 0.0;
    for &(alpha, beta) in &[
        (0.0, 1.0),
        (0.6, 0.8),
        (1.0 / 1.25_f64.sqrt(), 0.5 / 1.25_f64.sqrt()),
    ] {
        let params = SystemParams::superposition(4.0, 1.0, alpha, beta).unwrap();
        let sol = AnalyticSolution::new(&params);
        for &t in &[0.3, 1.0, 2.0, 5.0] {
            let integral = adaptive_simpson(&|r| sol.pr(r, t), 0.0, t, 1e-13);
            max_quad_defect = max_quad_defect.max((sol.p0(t) + integral - 1.0).abs());
        }
    }

    let params = SystemParams::excited(0.0, 1.0).unwrap();
    let cfg = PropagatorConfig::cfl_one(&params, 2e-4, 5.0);
    let drift = match run(&params, &cfg, &[]) {
        Ok(r) => r.norm_drift_max,
        Err(e) => return result("normalization", false, vec![], e.to_string()),
    };

    let passed = max_quad_defect < NORMALIZATION_TOL && drift < NORM_DRIFT_TOL;
    result(
        "normalization",
        passed,
        vec![
            ("quadrature_defect".into(), max_quad_defect),
            ("norm_drift".into(), drift),
        ],
        format!(
            "analytic p0 + integral(pr) - 1 = {max_quad_defect:.2e} (tol {NORMALIZATION_TOL:.0e}); \
             propagator norm drift = {drift:.2e} (tol {NORM_DRIFT_TOL:.0e})"
        ),
    )
}

/// Criterion 6: the three reduced descriptions agree.
///
/// Partial trace vs fourth-order master integration to 1e-8 element-wise;
/// a 10⁵-trajectory ensemble with a fixed seed within five binomial
/// standard errors.
pub fn check_reduced_dynamics(seed: u64) -> CheckResult {
    let times = [0.0, 0.5, 1.0, 2.0, 5.0];
    let s = 1.0 / 2.0_f64.sqrt();
    let cases = [
        SystemParams::excited(0.0, 1.0).unwrap(),
        SystemParams::superposition(1.0, 1.0, s, s).unwrap(),
    ];
    let mut max_pt_vs_master: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    for (i, params) in cases.iter().enumerate() {
        let mc = McConfig::new(100_000, seed + i as u64);
        match consistency_report(params, &times, &mc) {
            Ok(rep) => {
                max_pt_vs_master = max_pt_vs_master.max(rep.max_pt_vs_master);
                max_z = max_z.max(rep.max_mc_z_score);
            }
            Err(e) => return result("reduced_dynamics", false, vec![], e.to_string()),
        }
    }
    let passed = max_pt_vs_master < REDUCED_PT_VS_MASTER_TOL && max_z < REDUCED_MC_SIGMA_TOL;
    result(
        "reduced_dynamics",
        passed,
        vec![
            ("max_pt_vs_master".into(), max_pt_vs_master),
            ("max_mc_z_score".into(), max_z),
        ],
        format!(
            "partial trace vs master = {max_pt_vs_master:.2e} (tol {REDUCED_PT_VS_MASTER_TOL:.0e}); \
             MC z-score = {max_z:.2} (tol {REDUCED_MC_SIGMA_TOL})"
        ),
    )
}

/// Criterion 7: free energy is conserved and the positive-frequency deficit
/// is the Lorentzian tail.
///
/// At ω₀/Γ = 10 the band energy stays within 2% of ħω₀ at Γt ∈ {3, 6, 12};
/// the negative-frequency weight of the natural comb at Γt = 12 matches
/// 1/2 − arctan(2ω₀/Γ)/π within 10%.
pub fn check_energy_conservation() -> CheckResult {
    let params = SystemParams::excited(10.0, 1.0).unwrap();
    let sol = AnalyticSolution::new(&params);
    let band = crate::spectroscopy::default_energy_band(&params);
    let mut max_rel_dev: f64 = 0.0;
    let mut deficit_measured = 0.0;
    for &t in &[3.0, 6.0, 12.0] {
        let grid = RadialGrid::from_dr(t, 1e-3).unwrap();
        let state = sol.sample_state(grid, t);
        let report = match energy_report(&params, &state, band, 8000) {
            Ok(r) => r,
            Err(e) => return result("energy_conservation", false, vec![], e.to_string()),
        };
        max_rel_dev = max_rel_dev.max((report.total - params.omega0()).abs() / params.omega0());
        if t == 12.0 {
            let natural = match spectrum_natural(&params, &state) {
                Ok(s) => s,
                Err(e) => return result("energy_conservation", false, vec![], e.to_string()),
            };
            deficit_measured = natural.negative_weight() / natural.total_weight();
        }
    }
    let deficit_formula = negative_frequency_weight_lorentzian(&params);
    let deficit_rel_err = (deficit_measured - deficit_formula).abs() / deficit_formula;
    let passed = max_rel_dev < ENERGY_REL_TOL && deficit_rel_err < DEFICIT_REL_TOL;
    result(
        "energy_conservation",
        passed,
        vec![
            ("max_rel_deviation".into(), max_rel_dev),
            ("deficit_measured".into(), deficit_measured),
            ("deficit_formula".into(), deficit_formula),
        ],
        format!(
            "energy within {max_rel_dev:.4} of omega0 (tol {ENERGY_REL_TOL}); \
             negative-frequency deficit {deficit_measured:.5} vs {deficit_formula:.5} \
             (tol {DEFICIT_REL_TOL})"
        ),
    )
}

/// Criterion 8: the half-cell convention audit.
///
/// Re-running the decay fit with the full-cell read-back weight must double
/// the emergent rate (ratio in [1.8, 2.2]); the half-cell rate must stay
/// at Γ.
pub fn check_source_convention() -> CheckResult {
    let params = SystemParams::excited(0.0, 1.0).unwrap();
    let mut cfg = PropagatorConfig::cfl_one(&params, 1e-3, 3.0);
    cfg.norm_budget = 1e-2;
    let half = match fitted_decay_rate(&params, &cfg) {
        Ok(v) => v,
        Err(e) => return result("source_convention", false, vec![], e.to_string()),
    };
    cfg.source_convention = SourceConvention::FullCell;
    // the miscalibrated weight is not unitary; disable the drift guard
    cfg.norm_budget = f64::INFINITY;
    let full = match fitted_decay_rate(&params, &cfg) {
        Ok(v) => v,
        Err(e) => return result("source_convention", false, vec![], e.to_string()),
    };
    let ratio = full / params.gamma();
    let flagged = !(0.95..=1.05).contains(&ratio);
    let passed = (half - 1.0).abs() < DECAY_RATE_TOL
        && (FULL_CELL_RATIO.0..=FULL_CELL_RATIO.1).contains(&ratio)
        && flagged;
    result(
        "source_convention",
        passed,
        vec![
            ("gamma_eff_half_cell".into(), half),
            ("gamma_eff_full_cell".into(), full),
            ("full_cell_ratio".into(), ratio),
        ],
        format!(
            "half-cell gamma_eff = {half:.5}; full-cell gamma_eff = {full:.5} \
             (ratio {ratio:.3}, expected within [{}, {}] and flagged as miscalibrated)",
            FULL_CELL_RATIO.0, FULL_CELL_RATIO.1
        ),
    )
}

/// Run every check. `mc_seed` fixes the Monte Carlo streams.
pub fn run_full_report(mc_seed: u64) -> ValidationReport {
    let checks = vec![
        check_exponential_decay(),
        check_causal_wavefront(),
        check_lorentzian_spectrum(),
        check_dyson_convergence(),
        check_normalization(),
        check_reduced_dynamics(mc_seed),
        check_energy_conservation(),
        check_source_convention(),
    ];
    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
