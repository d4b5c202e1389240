//! Per-mode radial profiles in physical (r) and spectral (ρ) variables.

use crate::error::{Error, Result};
use crate::geometry::SpectrumTable;
use crate::grid::RadialGrid;
use num_complex::Complex64;
use std::marker::PhantomData;
use std::sync::Arc;

/// Position of a mode: table entry and 1-based index ℓ ≤ d(ν).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct ModeIndex {
    pub entry: usize,
    pub ell: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Physical;
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spectral;

/// Profiles indexed by (mode, node); `D` marks the variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<D> {
    pub table: Arc<SpectrumTable>,
    pub grid: Arc<RadialGrid>,
    pub modes: Vec<ModeIndex>,
    /// data[mode][node]
    pub data: Vec<Vec<Complex64>>,
    /// L² mass discarded when this field was produced from samples.
    pub tail_mass: f64,
    _domain: PhantomData<D>,
}

/// a_{ν,ℓ}(r_i).
pub type ModeField = Field<Physical>;
/// b_{ν,ℓ}(ρ_j).
pub type SpectralField = Field<Spectral>;

impl<D> Field<D> {
    pub fn zeros(table: Arc<SpectrumTable>, grid: Arc<RadialGrid>) -> Self {
        let modes = table.modes();
        let data = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; modes.len()];
        Field {
            table,
            grid,
            modes,
            data,
            tail_mass: 0.0,
            _domain: PhantomData,
        }
    }

    pub fn from_data(
        table: Arc<SpectrumTable>,
        grid: Arc<RadialGrid>,
        data: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let modes = table.modes();
        if data.len() != modes.len() || data.iter().any(|d| d.len() != grid.len()) {
            return Err(Error::Shape(format!(
                "field data must be {} modes x {} nodes",
                modes.len(),
                grid.len()
            )));
        }
        if data.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("field contains non-finite values".into()));
        }
        Ok(Field {
            table,
            grid,
            modes,
            data,
            tail_mass: 0.0,
            _domain: PhantomData,
        })
    }

    /// Same table, new grid and data, domain changed to `E`.
    pub(crate) fn rebuild<E>(&self, grid: Arc<RadialGrid>, data: Vec<Vec<Complex64>>) -> Field<E> {
        Field {
            table: self.table.clone(),
            grid,
            modes: self.modes.clone(),
            data,
            tail_mass: 0.0,
            _domain: PhantomData,
        }
    }

    /// Flat position of (entry, ℓ).
    pub fn mode_position(&self, entry: usize, ell: u32) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| m.entry == entry && m.ell == ell)
    }

    pub fn nu_of(&self, mode: usize) -> f64 {
        self.table.entries[self.modes[mode].entry].nu
    }

    /// ‖·‖²_{L²} = Σ_modes Σ_i w_i |f_i|².
    pub fn mass(&self) -> f64 {
        self.data.iter().map(|d| self.grid.norm_sqr(d)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Modes with any nonzero value.
    pub fn active_modes(&self) -> Vec<usize> {
        (0..self.data.len())
            .filter(|&m| self.data[m].iter().any(|c| c.norm_sqr() > 0.0))
            .collect()
    }
}

impl ModeField {
    /// A single mode (entry, ℓ) carrying radial profile g.
    pub fn single_mode<F: Fn(f64) -> f64>(
        table: Arc<SpectrumTable>,
        grid: Arc<RadialGrid>,
        entry: usize,
        ell: u32,
        g: F,
    ) -> Result<Self> {
        let mut f = Self::zeros(table, grid);
        let pos = f.mode_position(entry, ell).ok_or_else(|| {
            Error::InvalidParameter(format!("no mode (entry {entry}, ell {ell}) in the table"))
        })?;
        f.data[pos] = f.grid.nodes.iter().map(|&r| Complex64::new(g(r), 0.0)).collect();
        Ok(f)
    }
}
