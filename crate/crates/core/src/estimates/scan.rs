//! Localized ratios LHS/RHS and their dyadic scans in R.

use super::generators::generators;
use super::norms::{annulus_power, entry_weights, ChirpProblem, LocalizedDatum, SamplingOptions};
use super::EstimateSpec;
use crate::cutoff::{BumpKind, CutoffProfile};
use crate::error::{Error, Result};
use crate::geometry::{build_spectrum, ConeModel, SpectrumTable};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::sync::Arc;

/// One R of a scan: the trial with the largest ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub estimate: String,
    pub p: f64,
    pub q: f64,
    pub generator: String,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<RatioRow>,
    /// Empirical constant: the largest ratio over all R and trials.
    pub max_ratio: f64,
    /// Least-squares slope of log max-ratio against log R.
    pub slope: f64,
    /// 95% confidence interval of the slope; equal to (slope, slope) below three rows.
    pub slope_band: (f64, f64),
    pub tolerance: f64,
    pub passed: bool,
}

/// Everything a scan needs besides the estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSetup {
    pub model: ConeModel,
    /// Spectrum truncation K.
    pub k_max: f64,
    /// Coefficients vanish for ν above this.
    pub band: f64,
    pub generator: String,
    pub trials: usize,
    pub seed: u64,
    /// R runs over 2^lo, …, 2^hi.
    pub r_exponents: (i32, i32),
    pub sampling: SamplingOptions,
}

impl ScanSetup {
    /// Circle α = 1 in the plane, K = 8, R ∈ {2⁰, …, 2¹⁰}, 20 Gaussian trials.
    pub fn new(model: ConeModel, seed: u64) -> Self {
        ScanSetup {
            model,
            k_max: 8.0,
            band: 8.0,
            generator: "gaussian".into(),
            trials: 20,
            seed,
            r_exponents: (0, 10),
            sampling: SamplingOptions::default(),
        }
    }
}

/// ‖|p|·β‖ in L^p(ρ^{n−1}dρ) over the cutoff's support.
fn shape_norm(datum_shape: &dyn Fn(f64) -> Complex64, rho: (f64, f64), n: u32, p: f64) -> f64 {
    let (xs, ws) = GaussLegendre::cached(20).composite(rho.0, rho.1, 16);
    let s: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(&x, &w)| w * datum_shape(x).norm().powf(p) * x.powi(n as i32 - 1))
        .sum();
    s.powf(1.0 / p)
}

fn rhs_value(spec: &EstimateSpec, table: &SpectrumTable, weights: &[f64], shape_norm: f64, r: f64) -> f64 {
    let weighted: f64 = weights
        .iter()
        .zip(&table.entries)
        .map(|(a, e)| a * spec.weight_at(e.nu))
        .sum();
    spec.envelope_at(r) * weighted.sqrt() * shape_norm
}

fn check_dimension(spec: &EstimateSpec, table: &SpectrumTable) -> Result<()> {
    if spec.n != table.n {
        return Err(Error::InvalidParameter(format!(
            "{} built for n = {} but the cone has n = {}",
            spec.id.as_str(),
            spec.n,
            table.n
        )));
    }
    Ok(())
}

fn check_dyadic(r: f64) -> Result<()> {
    if !(r > 0.0) || r.log2().fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("R must be dyadic; got {r}")));
    }
    Ok(())
}

fn root(v: f64, q: f64) -> f64 {
    if q.is_infinite() {
        v
    } else {
        v.powf(1.0 / q)
    }
}

/// LHS/RHS of one estimate for one datum on the annulus [R, 2R].
pub fn localized_ratio(spec: &EstimateSpec, datum: &LocalizedDatum, r: f64, sampling: &SamplingOptions) -> Result<RatioRow> {
    check_dimension(spec, &datum.table)?;
    check_dyadic(r)?;
    let nus: Vec<f64> = datum.table.entries.iter().map(|e| e.nu).collect();
    let weights = vec![datum.entry_weights()];
    let shape = |x: f64| datum.shape(x);
    let problem = ChirpProblem {
        n: datum.table.n,
        nus: &nus,
        weights: &weights,
        shape: &shape,
        rho_range: datum.rho_range(),
        q: spec.q,
        source_radius: 0.0,
        opts: *sampling,
    };
    let context = format!("{} at R = {r}", spec.id.as_str());
    let lhs = root(annulus_power(&problem, (r, 2.0 * r), &context)?[0], spec.q);
    let norm = shape_norm(&shape, datum.rho_range(), datum.table.n, spec.p);
    let rhs = rhs_value(spec, &datum.table, &weights[0], norm, r);
    Ok(RatioRow {
        r,
        lhs,
        rhs,
        ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs },
        trial: 0,
    })
}

/// Least-squares slope of y against x with a 95% confidence interval.
pub fn trend(x: &[f64], y: &[f64]) -> (f64, (f64, f64)) {
    let n = x.len();
    if n < 2 {
        return (0.0, (0.0, 0.0));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if n < 3 {
        return (slope, (slope, slope));
    }
    let resid: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let se = (resid / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(2.0);
    (slope, (slope - t * se, slope + t * se))
}

/// One scan per spec over the same draws; specs sharing q share the
/// left-hand side computation.
pub fn dyadic_scans(specs: &[EstimateSpec], setup: &ScanSetup) -> Result<Vec<ScanReport>> {
    if setup.trials == 0 {
        return Err(Error::InvalidParameter("a scan needs at least one trial".into()));
    }
    let (lo, hi) = setup.r_exponents;
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty R range 2^{lo}..2^{hi}")));
    }
    if setup.band > setup.k_max {
        return Err(Error::InvalidParameter(format!(
            "data band {} exceeds the truncation K = {}",
            setup.band, setup.k_max
        )));
    }
    let table = Arc::new(build_spectrum(&setup.model, setup.k_max)?);
    for spec in specs {
        check_dimension(spec, &table)?;
    }
    let generator = generators().get(&setup.generator)?;
    let cutoff = CutoffProfile::new(BumpKind::Standard, 1.0);
    let shape = |x: f64| Complex64::new(cutoff.eval(x), 0.0);
    let rho = (1.0, 2.0);
    let nus: Vec<f64> = table.entries.iter().map(|e| e.nu).collect();

    let mut rows: Vec<Vec<RatioRow>> = vec![Vec::new(); specs.len()];
    for k in lo..=hi {
        let r = (k as f64).exp2();
        let weights: Vec<Vec<f64>> = (0..setup.trials)
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
                rng.set_stream(trial as u64);
                let c = generator.draw(&table, setup.band, r, &mut rng);
                entry_weights(&table, &c)
            })
            .collect();
        let mut done: Vec<(u64, Vec<f64>)> = Vec::new();
        for (i, spec) in specs.iter().enumerate() {
            let key = spec.q.to_bits();
            let powers = match done.iter().find(|(kq, _)| *kq == key) {
                Some((_, p)) => p.clone(),
                None => {
                    let problem = ChirpProblem {
                        n: table.n,
                        nus: &nus,
                        weights: &weights,
                        shape: &shape,
                        rho_range: rho,
                        q: spec.q,
                        source_radius: 0.0,
                        opts: setup.sampling,
                    };
                    let context = format!("{} scan at R = {r}, seed {}", spec.id.as_str(), setup.seed);
                    let p = annulus_power(&problem, (r, 2.0 * r), &context)?;
                    done.push((key, p.clone()));
                    p
                }
            };
            let norm = shape_norm(&shape, rho, table.n, spec.p);
            let mut best = RatioRow {
                r,
                lhs: 0.0,
                rhs: 0.0,
                ratio: -1.0,
                trial: 0,
            };
            for (trial, (w, &pw)) in weights.iter().zip(&powers).enumerate() {
                let lhs = root(pw, spec.q);
                let rhs = rhs_value(spec, &table, w, norm, r);
                let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
                if ratio > best.ratio {
                    best = RatioRow { r, lhs, rhs, ratio, trial };
                }
            }
            rows[i].push(best);
        }
    }

    Ok(specs
        .iter()
        .zip(rows)
        .map(|(spec, rows)| {
            let x: Vec<f64> = rows.iter().map(|row| row.r.log2()).collect();
            let y: Vec<f64> = rows.iter().map(|row| row.ratio.max(f64::MIN_POSITIVE).log2()).collect();
            let (slope, slope_band) = trend(&x, &y);
            let max_ratio = rows.iter().map(|row| row.ratio).fold(0.0, f64::max);
            let tolerance = spec.slope_tolerance();
            ScanReport {
                estimate: spec.id.as_str().to_string(),
                p: spec.p,
                q: spec.q,
                generator: setup.generator.clone(),
                trials: setup.trials,
                seed: setup.seed,
                rows,
                max_ratio,
                slope,
                slope_band,
                tolerance,
                passed: slope <= tolerance,
            }
        })
        .collect())
}

/// Scan of a single estimate.
pub fn dyadic_scan(spec: &EstimateSpec, setup: &ScanSetup) -> Result<ScanReport> {
    Ok(dyadic_scans(std::slice::from_ref(spec), setup)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.3 - 0.2 * v).collect();
        let (s, band) = trend(&x, &y);
        assert!((s + 0.2).abs() < 1e-14);
        assert!((band.0 - s).abs() < 1e-12 && (band.1 - s).abs() < 1e-12);
        assert_eq!(trend(&[1.0], &[2.0]).0, 0.0);
    }

    #[test]
    fn rejects_non_dyadic_radius() {
        assert!(check_dyadic(3.0).is_err());
        assert!(check_dyadic(0.25).is_ok());
    }
}
