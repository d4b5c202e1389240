//! Distorted Fourier transform and the evolution e^{itH} as a Hankel multiplier.

use crate::cutoff::{BumpKind, CutoffProfile};
use crate::error::{Error, Result};
use crate::field::{ModeField, SpectralField};
use crate::grid::{GridKind, RadialGrid};
use crate::hankel;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Log-uniform grid on [ρ_min, ρ_max] sharing the log step of `grid`, so that
/// transforms between the two keep the index-additive kernel.
pub fn spectral_grid_for(grid: &RadialGrid, rho_min: f64, rho_max: f64) -> Result<RadialGrid> {
    let dx = grid.log_step().ok_or_else(|| {
        Error::InvalidParameter("a matched spectral grid needs a log-uniform radial grid".into())
    })?;
    if !(rho_min > 0.0 && rho_max > rho_min) {
        return Err(Error::InvalidParameter(format!(
            "spectral range must satisfy 0 < rho_min < rho_max; got [{rho_min}, {rho_max}]"
        )));
    }
    let count = ((rho_max / rho_min).ln() / dx).round().max(16.0) as usize;
    let r_min = rho_max * (-(count as f64) * dx).exp();
    let x0 = r_min.ln();
    let nodes: Vec<f64> = (0..count)
        .map(|i| (x0 + (i as f64 + 0.5) * dx).exp())
        .collect();
    let nf = grid.n as f64;
    let weights = nodes.iter().map(|r| r.powf(nf) * dx).collect();
    Ok(RadialGrid {
        n: grid.n,
        kind: GridKind::LogUniform { r_min },
        r_max: rho_max,
        nodes,
        weights,
    })
}

/// b_{ν,ℓ} = H_ν a_{ν,ℓ} for every mode, on `spectral_grid`.
pub fn distorted_fourier(field: &ModeField, spectral_grid: &Arc<RadialGrid>) -> Result<SpectralField> {
    let data: Result<Vec<Vec<Complex64>>> = (0..field.data.len())
        .into_par_iter()
        .map(|m| hankel::hankel_transform(field.nu_of(m), &field.data[m], &field.grid, spectral_grid))
        .collect();
    Ok(field.rebuild(spectral_grid.clone(), data?))
}

/// Physical field at time t: v_{ν,ℓ}(t, r) = H_ν[e^{itρ²} b_{ν,ℓ}](r) on `grid_out`.
pub fn evolve(spec: &SpectralField, t: f64, grid_out: &Arc<RadialGrid>) -> Result<ModeField> {
    let phases: Vec<Complex64> = spec
        .grid
        .nodes
        .iter()
        .map(|&rho| Complex64::from_polar(1.0, t * rho * rho))
        .collect();
    let data: Result<Vec<Vec<Complex64>>> = (0..spec.data.len())
        .into_par_iter()
        .map(|m| {
            let b = &spec.data[m];
            if b.iter().all(|c| c.norm_sqr() == 0.0) {
                return Ok(vec![Complex64::new(0.0, 0.0); grid_out.len()]);
            }
            let tb: Vec<Complex64> = b.iter().zip(&phases).map(|(x, p)| x * p).collect();
            hankel::hankel_transform(spec.nu_of(m), &tb, &spec.grid, grid_out)
        })
        .collect();
    Ok(spec.rebuild(grid_out.clone(), data?))
}

/// Multiplies every b_{ν,ℓ}(ρ) by β(ρ/N).
pub fn frequency_localize(spec: &SpectralField, n: f64, kind: BumpKind) -> Result<SpectralField> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "frequency center N must be positive; got {n}"
        )));
    }
    let cut = CutoffProfile::new(kind, n);
    let mask: Vec<f64> = spec.grid.nodes.iter().map(|&rho| cut.eval(rho)).collect();
    let data = spec
        .data
        .iter()
        .map(|b| b.iter().zip(&mask).map(|(x, m)| x * m).collect())
        .collect();
    Ok(spec.rebuild(spec.grid.clone(), data))
}

/// Snapshots of a solution over a time grid.
#[derive(Debug, Clone)]
pub struct EvolvedField {
    pub times: Vec<f64>,
    pub fields: Vec<ModeField>,
    pub masses: Vec<f64>,
}

impl EvolvedField {
    /// Largest relative deviation of the mass from `reference`.
    pub fn mass_defect(&self, reference: f64) -> f64 {
        self.masses
            .iter()
            .map(|m| (m - reference).abs() / reference.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Evolves to every time in `times`, recording the L² mass of each snapshot.
pub fn sample_solution(spec: &SpectralField, times: &[f64], grid_out: &Arc<RadialGrid>) -> Result<EvolvedField> {
    let mut fields = Vec::with_capacity(times.len());
    let mut masses = Vec::with_capacity(times.len());
    for &t in times {
        let u = evolve(spec, t, grid_out)?;
        masses.push(u.mass());
        fields.push(u);
    }
    Ok(EvolvedField {
        times: times.to_vec(),
        fields,
        masses,
    })
}

/// Free evolution in ℝ² of e^{−|x|²/2} under i u_t − Δu = 0:
/// u(t, r) = (1 − 2it)^{−1} exp(−r² / (2(1 − 2it))).
pub fn euclidean_gaussian(t: f64, r: f64) -> Complex64 {
    let a = Complex64::new(1.0, -2.0 * t);
    (-(r * r) / (2.0 * a)).exp() / a
}
