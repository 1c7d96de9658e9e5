//! Radial grid and joint emitter-field state.
//!
//! The field amplitude is a density over the radial coordinate r, sampled at
//! uniform cell centers. A state carries the full amplitudes of the
//! single-excitation expansion: `c0` for the excited emitter with vacuum
//! field (including the initial factor β), `cr[i]` for one field excitation
//! in cell i with the emitter in the ground state, and the inert vacuum
//! amplitude `cvac` (= α at all times).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least one cell")]
    Empty,
    #[error("grid extent is not positive: r_min = {r_min}, r_max = {r_max}")]
    BadExtent { r_min: f64, r_max: f64 },
}

/// Uniform radial grid. Cell i spans `[r_min + i·Δr, r_min + (i+1)·Δr)` and
/// is sampled at its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n_cells: usize,
}

impl RadialGrid {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // the negation rejects NaN
    pub fn new(r_min: f64, r_max: f64, n_cells: usize) -> Result<Self, GridError> {
        if n_cells == 0 {
            return Err(GridError::Empty);
        }
        if !(r_max > r_min) {
            return Err(GridError::BadExtent { r_min, r_max });
        }
        Ok(Self {
            r_min,
            r_max,
            n_cells,
        })
    }

    /// Grid over `[0, r_max]` with the given cell width. The extent is
    /// rounded up to a whole number of cells.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // the negation rejects NaN
    pub fn from_dr(r_max: f64, dr: f64) -> Result<Self, GridError> {
        if !(dr > 0.0) || !(r_max > 0.0) {
            return Err(GridError::BadExtent { r_min: 0.0, r_max });
        }
        let n_cells = (r_max / dr).ceil() as usize;
        Ok(Self {
            r_min: 0.0,
            r_max: n_cells as f64 * dr,
            n_cells,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / self.n_cells as f64
    }

    /// Center of cell i.
    pub fn center(&self, i: usize) -> f64 {
        self.r_min + (i as f64 + 0.5) * self.dr()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(move |i| self.center(i))
    }

    /// Index of the cell containing r; a point on a cell edge belongs to the
    /// cell on its right. `None` when r is outside the grid.
    pub fn cell_of(&self, r: f64) -> Option<usize> {
        if r < self.r_min || r >= self.r_max {
            return None;
        }
        let i = ((r - self.r_min) / self.dr()).floor() as usize;
        Some(i.min(self.n_cells - 1))
    }
}

/// Pure joint state of emitter and field at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    /// Evolution time.
    pub t: f64,
    /// Amplitude of the excited emitter with the field in vacuum.
    pub c0: Complex64,
    /// Inert vacuum amplitude (constant α).
    pub cvac: Complex64,
    pub grid: RadialGrid,
    /// Field amplitude density at the cell centers, units 1/√length.
    pub cr: Vec<Complex64>,
}

impl JointState {
    /// Zero-field state: emitter amplitude `c0`, vacuum amplitude `cvac`.
    pub fn vacuum_field(grid: RadialGrid, c0: Complex64, cvac: Complex64) -> Self {
        let cr = vec![Complex64::new(0.0, 0.0); grid.n_cells()];
        Self {
            t: 0.0,
            c0,
            cvac,
            grid,
            cr,
        }
    }

    /// Σ |cr|² Δr over all cells, the probability of one field excitation.
    pub fn field_weight(&self) -> f64 {
        let dr = self.grid.dr();
        self.cr.iter().map(|a| a.norm_sqr()).sum::<f64>() * dr
    }

    /// |cvac|² + |c0|² + Σ |cr|² Δr; equals one for a unitarily evolved state.
    pub fn total_norm(&self) -> f64 {
        self.cvac.norm_sqr() + self.c0.norm_sqr() + self.field_weight()
    }

    /// Largest |cr| over cells with center outside `[0, c·t]`. Zero for any
    /// causally evolved state started from a vacuum field.
    pub fn acausal_amplitude(&self, c_light: f64) -> f64 {
        let front = c_light * self.t;
        self.grid
            .centers()
            .zip(&self.cr)
            .filter(|(r, _)| *r < 0.0 || *r > front)
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max)
    }
}
