//! Schrödinger propagator on metric cones via mode decomposition and Hankel
//! transforms, with numerical scans of localized restriction and Strichartz
//! estimates.

pub mod bessel;
pub mod cutoff;
pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod hankel;
pub mod estimates;
pub mod propagator;
pub mod quad;
pub mod registry;

pub use error::{Error, Result};
pub use field::{ModeField, ModeIndex, SpectralField};
pub use geometry::{build_spectrum, ConeModel, CrossSection, SpectrumTable};
pub use grid::{make_grid, GridKind, RadialGrid};
