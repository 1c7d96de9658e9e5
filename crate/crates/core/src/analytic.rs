//! Closed-form solution of the emitter-field dynamics.
//!
//! The excited-state amplitude decays as c₀(t) = e^{−(Γ/2 + iω₀)t} and the
//! field carries a delayed copy of the emitter history,
//! c_r(t) = −i√(Γ/c)·e^{(Γ/2 + iω₀)(r/c − t)} on the causal support
//! 0 ≤ r ≤ ct. These formulas are the oracle for the series, grid and
//! reduced-dynamics solvers.

use num_complex::Complex64;

use crate::openquantum::DensityMatrix2;
use crate::state::{JointState, RadialGrid};
use crate::system::SystemParams;

/// Stateless evaluator of the closed-form solution; safe to share across
/// threads.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSolution {
    params: SystemParams,
}

impl AnalyticSolution {
    pub fn new(params: &SystemParams) -> Self {
        Self { params: *params }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Excited-emitter amplitude c₀(t) = e^{−(Γ/2 + iω₀)t} for t ≥ 0.
    ///
    /// Before the interaction starts (t < 0) the amplitude is one.
    pub fn c0_exact(&self, t: f64) -> Complex64 {
        if t < 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let p = &self.params;
        (-Complex64::new(0.5 * p.gamma(), p.omega0()) * t).exp()
    }

    /// Field amplitude density c_r(t) = −i√(Γ/c)·e^{(Γ/2 + iω₀)(r/c − t)}
    /// on 0 ≤ r ≤ ct (wavefront included), zero elsewhere.
    pub fn cr_exact(&self, r: f64, t: f64) -> Complex64 {
        let p = &self.params;
        if t < 0.0 || r < 0.0 || r > p.c() * t {
            return Complex64::new(0.0, 0.0);
        }
        let scale = Complex64::new(0.0, -(p.gamma() / p.c()).sqrt());
        let tau = r / p.c() - t;
        scale * (Complex64::new(0.5 * p.gamma(), p.omega0()) * tau).exp()
    }

    /// Probability of finding the emitter still excited (no photon yet),
    /// p₀(t) = |α|² + |β|²·e^{−Γt}.
    pub fn p0(&self, t: f64) -> f64 {
        let p = &self.params;
        if t < 0.0 {
            return 1.0;
        }
        p.alpha().norm_sqr() + p.beta().norm_sqr() * (-p.gamma() * t).exp()
    }

    /// Detection probability density per distance,
    /// p_r(t) = (Γ/c)·|β|²·e^{Γ(r/c − t)} on 0 ≤ r ≤ ct, zero elsewhere.
    ///
    /// Integrating over the support complements `p0`:
    /// p₀(t) + ∫₀^{ct} p_r dr = 1.
    pub fn pr(&self, r: f64, t: f64) -> f64 {
        let p = &self.params;
        if t < 0.0 || r < 0.0 || r > p.c() * t {
            return 0.0;
        }
        (p.gamma() / p.c()) * p.beta().norm_sqr() * (p.gamma() * (r / p.c() - t)).exp()
    }

    /// Reduced emitter density matrix from the partial trace over the field:
    /// ρ₁₁ = |β|²|c₀|², ρ₀₁ = α β* c₀*, ρ₀₀ = 1 − ρ₁₁.
    pub fn rho_emitter(&self, t: f64) -> DensityMatrix2 {
        let p = &self.params;
        let c0 = self.c0_exact(t);
        let rho11 = p.beta().norm_sqr() * c0.norm_sqr();
        let rho01 = p.alpha() * p.beta().conj() * c0.conj();
        DensityMatrix2::from_parts(1.0 - rho11, rho11, rho01)
    }

    /// Sample the joint state on a grid at time t. Amplitudes carry the
    /// initial factors: c0 = β·c₀(t), cr = β·c_r(t), cvac = α.
    pub fn sample_state(&self, grid: RadialGrid, t: f64) -> JointState {
        let p = &self.params;
        let cr = grid
            .centers()
            .map(|r| p.beta() * self.cr_exact(r, t))
            .collect();
        JointState {
            t,
            c0: p.beta() * self.c0_exact(t),
            cvac: p.alpha(),
            grid,
            cr,
        }
    }
}
