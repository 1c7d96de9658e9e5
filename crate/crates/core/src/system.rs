//! Physical parameters of a run and the natural-unit rescaling.
//!
//! Every solver consumes a validated [`SystemParams`]; construction goes
//! through [`SystemParams::new`], which is the only place the invariants are
//! checked. The effective coupling is derived, never supplied: g = √(Γc).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted deviation of |α|² + |β|² from one before construction
/// refuses to renormalize.
pub const NORM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("decay rate and propagation speed must be positive (gamma = {gamma}, c = {c_light})")]
    NonPositiveRate { gamma: f64, c_light: f64 },
    #[error("initial amplitudes not normalized: |alpha|^2 + |beta|^2 = {norm_sq}")]
    BadNormalization { norm_sq: f64 },
}

/// Validated physical constants of one emitter-field run.
///
/// * `omega0` - transition angular frequency (sign unrestricted),
/// * `gamma`  - spontaneous decay rate Γ > 0,
/// * `c_light` - propagation speed c > 0,
/// * `alpha`, `beta` - initial ground/excited amplitudes, |α|² + |β|² = 1.
///
/// The coupling constant g = √(Γc) is stored alongside; it is real and
/// non-negative by construction (complex couplings are unsupported).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    omega0: f64,
    gamma: f64,
    c_light: f64,
    alpha: Complex64,
    beta: Complex64,
    g: f64,
}

impl SystemParams {
    /// Validate and normalize a parameter set.
    ///
    /// Renormalizes (α, β) when their norm is off by at most [`NORM_SLACK`],
    /// errors otherwise. Derives g = √(Γc).
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // the negation rejects NaN
    pub fn new(
        omega0: f64,
        gamma: f64,
        c_light: f64,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<Self, ParamsError> {
        if !(gamma > 0.0) || !(c_light > 0.0) || !omega0.is_finite() {
            return Err(ParamsError::NonPositiveRate { gamma, c_light });
        }
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_SLACK {
            return Err(ParamsError::BadNormalization { norm_sq });
        }
        let norm = norm_sq.sqrt();
        Ok(Self {
            omega0,
            gamma,
            c_light,
            alpha: alpha / norm,
            beta: beta / norm,
            g: (gamma * c_light).sqrt(),
        })
    }

    /// Fully excited emitter (α = 0, β = 1) in natural units c = 1.
    pub fn excited(omega0: f64, gamma: f64) -> Result<Self, ParamsError> {
        Self::new(
            omega0,
            gamma,
            1.0,
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Real superposition amplitudes (α, β) in natural units c = 1.
    pub fn superposition(
        omega0: f64,
        gamma: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self, ParamsError> {
        Self::new(
            omega0,
            gamma,
            1.0,
            Complex64::new(alpha, 0.0),
            Complex64::new(beta, 0.0),
        )
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> f64 {
        self.c_light
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Effective emitter-field coupling, g = √(Γc).
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Rescale to natural units Γ = c = 1.
    ///
    /// Time is measured in decay times 1/Γ and length in decay lengths c/Γ.
    /// The returned [`UnitScale`] maps results back to the original units.
    pub fn natural_units(&self) -> (Self, UnitScale) {
        let scale = UnitScale {
            time_unit: 1.0 / self.gamma,
            length_unit: self.c_light / self.gamma,
        };
        let natural = Self {
            omega0: self.omega0 / self.gamma,
            gamma: 1.0,
            c_light: 1.0,
            alpha: self.alpha,
            beta: self.beta,
            g: 1.0,
        };
        (natural, scale)
    }
}

/// Scale factors taking natural-unit results back to the input units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    /// Original-unit duration of one natural time unit (= 1/Γ).
    pub time_unit: f64,
    /// Original-unit length of one natural length unit (= c/Γ).
    pub length_unit: f64,
}

impl UnitScale {
    /// Identity scaling, for parameter sets already in natural units.
    pub fn identity() -> Self {
        Self {
            time_unit: 1.0,
            length_unit: 1.0,
        }
    }

    pub fn time_to_natural(&self, t: f64) -> f64 {
        t / self.time_unit
    }

    pub fn time_from_natural(&self, t: f64) -> f64 {
        t * self.time_unit
    }

    pub fn length_to_natural(&self, r: f64) -> f64 {
        r / self.length_unit
    }

    pub fn length_from_natural(&self, r: f64) -> f64 {
        r * self.length_unit
    }

    /// Undo the rescaling of a parameter set produced by `natural_units`.
    pub fn restore(&self, natural: &SystemParams) -> SystemParams {
        let gamma = 1.0 / self.time_unit;
        let c_light = self.length_unit / self.time_unit;
        SystemParams {
            omega0: natural.omega0 * gamma,
            gamma: natural.gamma * gamma,
            c_light: natural.c_light * c_light,
            alpha: natural.alpha,
            beta: natural.beta,
            g: (natural.gamma * gamma * natural.c_light * c_light).sqrt(),
        }
    }
}
