//! Cone model, the truncated spectrum χ_K, and circle mode decomposition.

use crate::error::{Error, Result};
use crate::field::{ModeField, ModeIndex};
use crate::grid::RadialGrid;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// The cross-section Σ of the cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossSection {
    /// Circle of circumference 2πα (only for n = 2).
    Circle { alpha: f64 },
    /// Round unit sphere S^{n−1}.
    Sphere,
    /// User-supplied eigenvalues λ with multiplicities d.
    Explicit { eigenvalues: Vec<(f64, u32)> },
}

impl CrossSection {
    pub fn label(&self) -> String {
        match self {
            CrossSection::Circle { alpha } => format!("circle(alpha = {alpha})"),
            CrossSection::Sphere => "sphere".to_string(),
            CrossSection::Explicit { eigenvalues } => {
                format!("explicit({} eigenvalues)", eigenvalues.len())
            }
        }
    }
}

/// Metric cone (0, ∞) × Σ of dimension n with potential a/r².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeModel {
    pub n: u32,
    pub cross_section: CrossSection,
    pub a: f64,
}

impl ConeModel {
    pub fn new(n: u32, cross_section: CrossSection, a: f64) -> Result<Self> {
        let model = ConeModel { n, cross_section, a };
        model.validate()?;
        Ok(model)
    }

    /// The Euclidean plane as a cone over the unit circle.
    pub fn euclidean_plane() -> Self {
        ConeModel {
            n: 2,
            cross_section: CrossSection::Circle { alpha: 1.0 },
            a: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "cone dimension n must be >= 2; got {}",
                self.n
            )));
        }
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "potential a must be finite and >= 0; got {}",
                self.a
            )));
        }
        match &self.cross_section {
            CrossSection::Circle { alpha } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "circle scale alpha must be > 0; got {alpha}"
                    )));
                }
                if self.n != 2 {
                    return Err(Error::InvalidParameter(format!(
                        "a circle cross-section needs n = 2; got n = {}",
                        self.n
                    )));
                }
            }
            CrossSection::Sphere => {}
            CrossSection::Explicit { eigenvalues } => {
                for &(lambda, d) in eigenvalues {
                    if !(lambda >= 0.0) || !lambda.is_finite() || d < 1 {
                        return Err(Error::InvalidParameter(format!(
                            "explicit eigenvalues need lambda >= 0 and d >= 1; got ({lambda}, {d})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// (n − 2)/2.
    pub fn half_gap(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }
}

/// One distinct order ν with its eigenvalue and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub nu: f64,
    /// λ_ν = ν² − ((n−2)/2)², the potential included.
    pub lambda: f64,
    pub d: u32,
    /// Harmonic degree k for circle and sphere; list position for explicit spectra.
    pub degree: u32,
}

/// The truncated set χ_K.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub n: u32,
    pub k: f64,
    pub cross_section: CrossSection,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of modes Σ d(ν).
    pub fn mode_count(&self) -> usize {
        self.entries.iter().map(|e| e.d as usize).sum()
    }

    /// All (entry, ℓ) pairs in table order.
    pub fn modes(&self) -> Vec<ModeIndex> {
        let mut out = Vec::with_capacity(self.mode_count());
        for (entry, e) in self.entries.iter().enumerate() {
            for ell in 1..=e.d {
                out.push(ModeIndex { entry, ell });
            }
        }
        out
    }

    pub fn nu(&self, entry: usize) -> f64 {
        self.entries[entry].nu
    }

    /// Largest harmonic degree present.
    pub fn max_degree(&self) -> u32 {
        self.entries.iter().map(|e| e.degree).max().unwrap_or(0)
    }

    /// CSV with header `nu,lambda,d`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("nu,lambda,d\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{}\n", e.nu, e.lambda, e.d));
        }
        s
    }
}

fn binomial(top: i64, k: i64) -> u64 {
    if k < 0 || top < k || top < 0 {
        return 0;
    }
    let k = k.min(top - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (top - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Dimension of degree-k spherical harmonics on S^{n−1}.
pub fn sphere_multiplicity(n: u32, k: u32) -> u32 {
    let (n, k) = (n as i64, k as i64);
    (binomial(k + n - 1, n - 1) - binomial(k + n - 3, n - 1)) as u32
}

/// χ_K for the model: all ν = sqrt(λ + ((n−2)/2)²) ≤ K.
pub fn build_spectrum(model: &ConeModel, k_max: f64) -> Result<SpectrumTable> {
    model.validate()?;
    let g2 = model.half_gap().powi(2);
    if !(k_max >= model.half_gap()) {
        return Err(Error::InvalidParameter(format!(
            "truncation K = {k_max} is below (n-2)/2 = {}",
            model.half_gap()
        )));
    }
    let mut raw: Vec<(f64, u32, u32)> = Vec::new();
    match &model.cross_section {
        CrossSection::Circle { alpha } => {
            let mut k = 0u32;
            loop {
                let lambda = (k as f64 / alpha).powi(2) + model.a;
                if (lambda + g2).sqrt() > k_max {
                    break;
                }
                raw.push((lambda, if k == 0 { 1 } else { 2 }, k));
                k += 1;
            }
        }
        CrossSection::Sphere => {
            let mut k = 0u32;
            loop {
                let kf = k as f64;
                let lambda = kf * (kf + model.n as f64 - 2.0) + model.a;
                if (lambda + g2).sqrt() > k_max {
                    break;
                }
                raw.push((lambda, sphere_multiplicity(model.n, k), k));
                k += 1;
            }
        }
        CrossSection::Explicit { eigenvalues } => {
            for (i, &(lambda, d)) in eigenvalues.iter().enumerate() {
                let lambda = lambda + model.a;
                if (lambda + g2).sqrt() <= k_max {
                    raw.push((lambda, d, i as u32));
                }
            }
            raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
    }

    let mut entries: Vec<SpectrumEntry> = Vec::with_capacity(raw.len());
    for (lambda, d, degree) in raw {
        let nu = (lambda + g2).sqrt();
        match entries.last_mut() {
            Some(last) if last.nu == nu => last.d += d,
            _ => entries.push(SpectrumEntry {
                nu,
                lambda: nu * nu - g2,
                d,
                degree,
            }),
        }
    }
    if entries.is_empty() {
        let nu_min = smallest_nu(model);
        return Err(Error::EmptySpectrum { k: k_max, nu_min });
    }
    Ok(SpectrumTable {
        n: model.n,
        k: k_max,
        cross_section: model.cross_section.clone(),
        entries,
    })
}

fn smallest_nu(model: &ConeModel) -> f64 {
    let g2 = model.half_gap().powi(2);
    let lambda0 = match &model.cross_section {
        CrossSection::Explicit { eigenvalues } => eigenvalues
            .iter()
            .map(|e| e.0)
            .fold(f64::INFINITY, f64::min),
        _ => 0.0,
    };
    (lambda0 + model.a + g2).sqrt()
}

fn circle_alpha(table: &SpectrumTable, operation: &'static str) -> Result<f64> {
    match table.cross_section {
        CrossSection::Circle { alpha } => Ok(alpha),
        ref other => Err(Error::UnsupportedCrossSection {
            operation,
            cross_section: other.label(),
        }),
    }
}

/// Normalized circle eigenfunction for degree k and ℓ ∈ {1, 2} (cos, sin).
pub fn circle_eigenfunction(alpha: f64, k: u32, ell: u32, theta: f64) -> f64 {
    if k == 0 {
        return 1.0 / (2.0 * PI * alpha).sqrt();
    }
    let arg = k as f64 * theta / alpha;
    let c = 1.0 / (PI * alpha).sqrt();
    if ell == 1 {
        c * arg.cos()
    } else {
        c * arg.sin()
    }
}

/// Sample angles θ_j = 2πα j / M.
pub fn circle_angles(alpha: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| 2.0 * PI * alpha * j as f64 / m as f64)
        .collect()
}

/// Trapezoid projection of f(r_i, θ_j) onto the circle eigenfunctions.
///
/// `samples[i][j]` is f at node r_i and angle θ_j = 2πα j/M.
pub fn mode_decompose(
    samples: &[Vec<Complex64>],
    grid: Arc<RadialGrid>,
    table: Arc<SpectrumTable>,
) -> Result<ModeField> {
    let alpha = circle_alpha(&table, "mode_decompose")?;
    if samples.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{} sample rows for a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    let m = samples.first().map_or(0, |row| row.len());
    if samples.iter().any(|row| row.len() != m) {
        return Err(Error::Shape("ragged angular sample rows".into()));
    }
    let kmax = table.max_degree();
    let required = 4 * (kmax as usize).max(1);
    if m < required {
        return Err(Error::Aliasing {
            samples: m,
            degree: kmax,
            required,
        });
    }
    let thetas = circle_angles(alpha, m);
    let dtheta = 2.0 * PI * alpha / m as f64;
    let modes = table.modes();
    let basis: Vec<Vec<f64>> = modes
        .iter()
        .map(|mi| {
            let k = table.entries[mi.entry].degree;
            thetas
                .iter()
                .map(|&t| circle_eigenfunction(alpha, k, mi.ell, t) * dtheta)
                .collect()
        })
        .collect();

    let per_node: Vec<Vec<Complex64>> = samples
        .par_iter()
        .map(|row| {
            basis
                .iter()
                .map(|b| row.iter().zip(b).map(|(f, w)| f * w).sum())
                .collect()
        })
        .collect();

    let mut data = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; modes.len()];
    for (i, coeffs) in per_node.iter().enumerate() {
        for (mode, c) in coeffs.iter().enumerate() {
            data[mode][i] = *c;
        }
    }

    // discarded mass: ∫ (‖f(r,·)‖² − Σ|a|²) dμ
    let mut tail = 0.0;
    for (i, row) in samples.iter().enumerate() {
        let full: f64 = row.iter().map(|f| f.norm_sqr()).sum::<f64>() * dtheta;
        let kept: f64 = per_node[i].iter().map(|c| c.norm_sqr()).sum();
        tail += grid.weights[i] * (full - kept).max(0.0);
    }

    let mut field = ModeField::from_data(table, grid, data)?;
    field.tail_mass = tail;
    Ok(field)
}

/// Inverse of `mode_decompose`: f(r_i, θ_j) = Σ a_{ν,ℓ}(r_i) φ_{ν,ℓ}(θ_j).
pub fn mode_recompose(field: &ModeField, m: usize) -> Result<Vec<Vec<Complex64>>> {
    let alpha = circle_alpha(&field.table, "mode_recompose")?;
    let thetas = circle_angles(alpha, m);
    let basis: Vec<Vec<f64>> = field
        .modes
        .iter()
        .map(|mi| {
            let k = field.table.entries[mi.entry].degree;
            thetas
                .iter()
                .map(|&t| circle_eigenfunction(alpha, k, mi.ell, t))
                .collect()
        })
        .collect();
    Ok((0..field.grid.len())
        .into_par_iter()
        .map(|i| {
            let mut row = vec![Complex64::new(0.0, 0.0); m];
            for (mode, b) in basis.iter().enumerate() {
                let a = field.data[mode][i];
                for (out, &phi) in row.iter_mut().zip(b) {
                    *out += a * phi;
                }
            }
            row
        })
        .collect())
}

/// max_i | ‖f(r_i, ·)‖²_{L²(Σ)} − Σ |a_{ν,ℓ}(r_i)|² |.
pub fn parseval_check(field: &ModeField, samples: &[Vec<Complex64>]) -> f64 {
    let alpha = match field.table.cross_section {
        CrossSection::Circle { alpha } => alpha,
        _ => return f64::NAN,
    };
    let mut worst: f64 = 0.0;
    for (i, row) in samples.iter().enumerate() {
        let dtheta = 2.0 * PI * alpha / row.len() as f64;
        let full: f64 = row.iter().map(|f| f.norm_sqr()).sum::<f64>() * dtheta;
        let kept: f64 = field.data.iter().map(|d| d[i].norm_sqr()).sum();
        worst = worst.max((full - kept).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_spectrum() {
        let t = build_spectrum(&ConeModel::euclidean_plane(), 3.0).unwrap();
        let nus: Vec<f64> = t.entries.iter().map(|e| e.nu).collect();
        let ds: Vec<u32> = t.entries.iter().map(|e| e.d).collect();
        assert_eq!(nus, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(ds, vec![1, 2, 2, 2]);
    }

    #[test]
    fn three_sphere_spectrum() {
        let m = ConeModel::new(3, CrossSection::Sphere, 0.0).unwrap();
        let t = build_spectrum(&m, 2.5).unwrap();
        assert_eq!(t.len(), 3);
        for (k, e) in t.entries.iter().enumerate() {
            assert!((e.nu - (k as f64 + 0.5)).abs() < 1e-15);
            assert_eq!(e.d, 2 * k as u32 + 1);
        }
    }

    #[test]
    fn potential_shifts_orders() {
        let m = ConeModel::new(2, CrossSection::Circle { alpha: 1.0 }, 3.0).unwrap();
        let t = build_spectrum(&m, 2.5).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t.entries[0].nu - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.entries[1].nu, 2.0);
    }

    #[test]
    fn sphere_multiplicities() {
        // S^3: (k+1)^2
        for k in 0..6 {
            assert_eq!(sphere_multiplicity(4, k), (k + 1) * (k + 1));
        }
        assert_eq!(sphere_multiplicity(2, 0), 1);
        assert_eq!(sphere_multiplicity(2, 3), 2);
    }

    #[test]
    fn explicit_merges_duplicates() {
        let cs = CrossSection::Explicit {
            eigenvalues: vec![(2.0, 1), (0.0, 1), (2.0, 3)],
        };
        let t = build_spectrum(&ConeModel::new(2, cs, 0.0).unwrap(), 10.0).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.entries[1].d, 4);
    }

    #[test]
    fn empty_spectrum_reported() {
        let m = ConeModel::new(2, CrossSection::Circle { alpha: 1.0 }, 9.0).unwrap();
        assert!(matches!(
            build_spectrum(&m, 2.0),
            Err(Error::EmptySpectrum { .. })
        ));
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(ConeModel::new(1, CrossSection::Sphere, 0.0).is_err());
        assert!(ConeModel::new(3, CrossSection::Circle { alpha: 1.0 }, 0.0).is_err());
        assert!(ConeModel::new(2, CrossSection::Circle { alpha: 0.0 }, 0.0).is_err());
        assert!(ConeModel::new(2, CrossSection::Sphere, -1.0).is_err());
    }

    #[test]
    fn orders_satisfy_defining_relation() {
        let m = ConeModel::new(5, CrossSection::Sphere, 0.7).unwrap();
        let t = build_spectrum(&m, 20.0).unwrap();
        for e in &t.entries {
            assert!(((e.lambda + 1.5f64.powi(2)).sqrt() - e.nu).abs() < 1e-13);
            assert!(e.nu >= 1.5);
        }
    }
}
