//! Truncated series approximations to the amplitudes, built from the
//! per-order closed forms of the time-ordered expansion.
//!
//! Even orders contribute to the excited amplitude,
//! c₀(t) = e^{−iω₀t} Σₘ (−Γt/2)^m / m!,
//! odd orders to the field amplitude,
//! c_r(t) = −i(g/c)·e^{iω₀(r/c−t)} Σₘ [(g²/2c)(r/c − t)]^m / m!.
//! The factor 1/2 in the even terms comes from the delta function sitting at
//! the boundary of the time-ordered integration domain (a field excitation
//! can only be re-absorbed immediately after its creation); the grid
//! propagator must reproduce the same rate, which is the cross-module test
//! of that convention.

use num_complex::Complex64;
use thiserror::Error;

use crate::analytic::AnalyticSolution;
use crate::numeric::TwoFloat;
use crate::system::SystemParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DysonError {
    #[error("order {requested} exceeds the configured maximum {max_order}")]
    OrderOverflow { requested: usize, max_order: usize },
}

/// Hard ceiling on the truncation order; beyond this the per-order factors
/// are not representable in double precision anyway.
pub const ORDER_CEILING: usize = 170;

#[derive(Debug, Clone, Copy)]
pub struct DysonExpansion {
    params: SystemParams,
    max_order: usize,
}

impl DysonExpansion {
    pub fn new(params: &SystemParams, max_order: usize) -> Self {
        Self {
            params: *params,
            max_order: max_order.min(ORDER_CEILING),
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Σ_{m=0}^{M} x^m / m!.
    ///
    /// Terms and sum are carried in double-double precision: the alternating
    /// series cancels by up to e^{|x|}, which plain f64 accumulation cannot
    /// survive at the required absolute accuracy for Γt up to 50.
    fn exp_partial(x: f64, order: usize) -> f64 {
        let mut sum = TwoFloat::ZERO;
        let mut term = TwoFloat::from_f64(1.0);
        for m in 0..=order {
            sum = sum + term;
            term = term.mul_f64(x).div_f64(m as f64 + 1.0);
        }
        sum.value()
    }

    /// Partial sum of the excited amplitude through order 2M:
    /// e^{−iω₀t}·Σ_{m=0}^{M} (−Γt/2)^m / m!.
    pub fn c0_partial(&self, t: f64, order: usize) -> Result<Complex64, DysonError> {
        if order > self.max_order {
            return Err(DysonError::OrderOverflow {
                requested: order,
                max_order: self.max_order,
            });
        }
        let p = &self.params;
        let sum = Self::exp_partial(-0.5 * p.gamma() * t, order);
        Ok(Complex64::from_polar(1.0, -p.omega0() * t) * sum)
    }

    /// Partial sum of the field amplitude through order 2M+1:
    /// −i(g/c)·e^{iω₀(r/c−t)}·Σ_{m=0}^{M} [(g²/2c)(r/c−t)]^m / m!
    /// on the causal support 0 ≤ r ≤ ct, zero elsewhere.
    pub fn cr_partial(&self, r: f64, t: f64, order: usize) -> Result<Complex64, DysonError> {
        if order > self.max_order {
            return Err(DysonError::OrderOverflow {
                requested: order,
                max_order: self.max_order,
            });
        }
        let p = &self.params;
        if t < 0.0 || r < 0.0 || r > p.c() * t {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let tau = r / p.c() - t;
        let sum = Self::exp_partial(0.5 * p.g() * p.g() / p.c() * tau, order);
        let prefactor = Complex64::new(0.0, -p.g() / p.c());
        Ok(prefactor * Complex64::from_polar(1.0, p.omega0() * tau) * sum)
    }

    /// Truncation error |c0_partial(t, M) − c₀(t)| for M = 0..=m_max.
    ///
    /// The sequence is bounded by the Taylor remainder
    /// (Γt/2)^{M+1}/(M+1)!·e^{Γt/2} and is eventually strictly decreasing.
    pub fn convergence_profile(
        &self,
        t: f64,
        m_max: usize,
    ) -> Result<Vec<(usize, f64)>, DysonError> {
        let exact = AnalyticSolution::new(&self.params).c0_exact(t);
        (0..=m_max)
            .map(|m| Ok((m, (self.c0_partial(t, m)? - exact).norm())))
            .collect()
    }

    /// Taylor remainder bound (Γt/2)^{M+1}/(M+1)!·e^{Γt/2}.
    pub fn remainder_bound(&self, t: f64, order: usize) -> f64 {
        let x = 0.5 * self.params.gamma() * t;
        let mut lead = 1.0;
        for m in 0..=order {
            lead *= x / (m as f64 + 1.0);
        }
        lead * x.exp()
    }
}
