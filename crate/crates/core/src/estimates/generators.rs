//! Seeded random coefficient generators for the dyadic scans.

use crate::geometry::SpectrumTable;
use crate::registry::Registry;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

/// Draws one coefficient c_{ν,ℓ} per mode of `table`.
///
/// Modes are drawn in table order and modes with ν > `band` are zero without
/// consuming randomness, so enlarging the table leaves the draw unchanged.
pub trait CoefficientGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn draw(&self, table: &SpectrumTable, band: f64, r: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64>;
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn draw_with<F: Fn(f64) -> f64>(table: &SpectrumTable, band: f64, rng: &mut ChaCha8Rng, scale: F) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(table.mode_count());
    for e in &table.entries {
        for _ in 0..e.d {
            if e.nu > band {
                out.push(Complex64::new(0.0, 0.0));
            } else {
                out.push(complex_normal(rng) * scale(e.nu));
            }
        }
    }
    out
}

/// Complex Gaussians scaled by (1+ν)^{−(n−1)/2−1}.
pub struct GaussianModes;

impl CoefficientGenerator for GaussianModes {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn draw(&self, table: &SpectrumTable, band: f64, _r: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let power = -(table.n as f64 - 1.0) / 2.0 - 1.0;
        draw_with(table, band, rng, |nu| (1.0 + nu).powf(power))
    }
}

/// Complex Gaussians concentrated on orders near the turning point
/// ν ≈ 1.5R, where r·ρ ≈ ν inside the annulus.
pub struct TransitionModes;

impl CoefficientGenerator for TransitionModes {
    fn name(&self) -> &'static str {
        "transition"
    }

    fn draw(&self, table: &SpectrumTable, band: f64, r: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let top = table
            .entries
            .iter()
            .map(|e| e.nu)
            .filter(|&nu| nu <= band)
            .fold(0.0, f64::max);
        let target = (1.5 * r).min(top);
        draw_with(table, band, rng, |nu| (-0.5 * (nu - target).powi(2)).exp())
    }
}

static GENERATORS: Lazy<Registry<dyn CoefficientGenerator>> = Lazy::new(|| {
    let mut reg: Registry<dyn CoefficientGenerator> = Registry::new("generator");
    reg.register("gaussian", Arc::new(GaussianModes));
    reg.register("transition", Arc::new(TransitionModes));
    reg
});

pub fn generators() -> &'static Registry<dyn CoefficientGenerator> {
    &GENERATORS
}
