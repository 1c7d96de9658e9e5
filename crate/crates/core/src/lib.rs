//! Simulation of spontaneous photon emission from a two-level emitter,
//! modelled as unitary Schrödinger evolution of a locally coupled
//! position-space field.
//!
//! The joint emitter-field state is computed by four independent routes and
//! cross-validated:
//!
//! * [`analytic`] - the closed-form solution (the oracle for everything else),
//! * [`dyson`] - truncated series approximations with factorial convergence,
//! * [`propagator`] - a radial-grid integrator with a point source at r = 0,
//! * [`openquantum`] - reduced dynamics: conditional evolution, the master
//!   equation and Monte Carlo jump unraveling.
//!
//! [`spectroscopy`] transforms field amplitudes to momentum space and checks
//! the Lorentzian line shape and energy bookkeeping. [`validation`] bundles
//! the cross-module checks behind a machine-readable report.
//!
//! All solvers work in the single-excitation sector: the state is spanned by
//! the excited emitter with vacuum field, the ground emitter with one local
//! field excitation at radius r, and the inert vacuum component.

pub mod analytic;
pub mod dyson;
pub mod numeric;
pub mod openquantum;
pub mod propagator;
pub mod spectroscopy;
pub mod state;
pub mod system;
pub mod validation;

pub use state::{GridError, JointState, RadialGrid};
pub use system::{ParamsError, SystemParams, UnitScale};
