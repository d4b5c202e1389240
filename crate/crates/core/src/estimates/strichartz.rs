//! Global L^q_{t,z} norm of a frequency-localized radial solution against
//! N^{n/2−(n+2)/q}‖u₀‖_{L²}.
//!
//! For general q the radial axis is cut into dyadic annuli, each integrated
//! over all times, and the remainder is extrapolated geometrically. At the
//! pseudo-conformal exponent q = 2 + 4/n the long-time part is instead mapped
//! to short times: with τ = 1/(4t), ξ = r/(2t),
//!
//!   |u(t, r)| = (2|t|)^{−n/2} |H_ν[e^{−iτs²} u_N](ξ)|,
//!
//! and |u|^q r^{n−1} dr dt = |v|^q ξ^{n−1} dξ dτ exactly. A smooth partition
//! in time splits the integral into a short-time piece of u and a short-time
//! piece of v, both cheap.

use super::norms::{
    annulus_power, dense_cost, dense_windowed_power, windowed_cost, windowed_power, Chebyshev, ChirpProblem,
    DenseProblem, LocalizedDatum, RhoProfile, SamplingOptions, TimeWindow,
};
use crate::bessel;
use crate::cutoff::{smooth_step, BumpKind, CutoffProfile};
use crate::error::{Error, Result};
use crate::field::ModeField;
use crate::geometry::CrossSection;
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Stop adding annuli once the uncertainty of the extrapolated remainder
/// is below this fraction of the accumulated ∫∫|u|^q.
pub const TAIL_FRACTION: f64 = 5e-3;
const MAX_ANNULI: usize = 40;
/// |u_N| below this fraction of its peak counts as outside its support.
const PROFILE_CUTOFF: f64 = 1e-5;
/// Where |u_N| drops below this fraction, its share of ∫|u|^q is negligible.
const CORE_CUTOFF: f64 = 1e-3;
/// Past the reach of the flow, regions stop once one adds less than this.
const REGION_FRACTION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrichartzMethod {
    /// Dyadic annuli over all times with a geometric tail.
    Annuli,
    /// Short-time pieces of u and of its pseudo-conformal image.
    Lens,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrichartzResult {
    pub n_freq: f64,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub method: StrichartzMethod,
    /// (r_a, r_b, ∫∫|u|^q) per radial region.
    pub regions: Vec<(f64, f64, f64)>,
    /// Regions of the pseudo-conformal image, in ξ; empty for annuli.
    pub dual_regions: Vec<(f64, f64, f64)>,
    /// Geometric extrapolation of the annuli not computed; zero for the lens.
    pub tail: f64,
    /// Time t₁ at which the lens partition switches; None for annuli.
    pub split_time: Option<f64>,
}

fn cross_section_volume(cs: &CrossSection, n: u32) -> Result<f64> {
    match cs {
        CrossSection::Circle { alpha } => Ok(2.0 * PI * alpha),
        CrossSection::Sphere => {
            let h = n as f64 / 2.0;
            Ok(2.0 * PI.powf(h) / gamma(h))
        }
        CrossSection::Explicit { .. } => Err(Error::UnsupportedCrossSection {
            operation: "strichartz_ratio",
            cross_section: cs.label(),
        }),
    }
}

/// Ratio for u₀ localized to frequencies [N, 2N] by β(ρ/N); the lens is
/// used whenever q = 2 + 4/n.
pub fn strichartz_ratio(u0: &ModeField, q: f64, n_freq: f64, sampling: &SamplingOptions) -> Result<StrichartzResult> {
    strichartz_ratio_with(u0, q, n_freq, sampling, None)
}

/// As [`strichartz_ratio`] with the method forced.
pub fn strichartz_ratio_with(
    u0: &ModeField,
    q: f64,
    n_freq: f64,
    sampling: &SamplingOptions,
    method: Option<StrichartzMethod>,
) -> Result<StrichartzResult> {
    let table = &u0.table;
    let n = table.n;
    let nf = n as f64;
    let q_min = 2.0 * (2.0 * nf + 1.0) / (2.0 * nf - 1.0);
    if !(q > q_min) || q.is_infinite() {
        return Err(Error::InvalidParameter(format!("Strichartz ratio needs finite q > {q_min}; got {q}")));
    }
    if !(n_freq > 0.0) || n_freq.log2().fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("N must be dyadic; got {n_freq}")));
    }
    let conformal = (q - (2.0 + 4.0 / nf)).abs() < 1e-12;
    let method = method.unwrap_or(if conformal {
        StrichartzMethod::Lens
    } else {
        StrichartzMethod::Annuli
    });
    if method == StrichartzMethod::Lens && !conformal {
        return Err(Error::InvalidParameter(format!(
            "the lens split needs q = 2 + 4/n = {}; got {q}",
            2.0 + 4.0 / nf
        )));
    }
    let volume = cross_section_volume(&table.cross_section, n)?;
    let radial = u0
        .mode_position(0, 1)
        .filter(|_| table.entries[0].degree == 0 && table.entries[0].d == 1)
        .ok_or_else(|| Error::InvalidParameter("the table has no radial mode".into()))?;
    if u0.active_modes().iter().any(|&m| m != radial) {
        return Err(Error::InvalidParameter("Strichartz datum must be radial".into()));
    }
    let nu0 = table.nu(0);
    let a = &u0.data[radial];
    let grid = &u0.grid;
    let peak = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let support = grid
        .nodes
        .iter()
        .zip(a)
        .filter(|(_, v)| v.norm() > 1e-12 * peak)
        .map(|(&r, _)| r)
        .fold(0.0, f64::max);
    let terms: Vec<(f64, f64, Complex64)> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .zip(a)
        .filter(|(_, v)| v.norm() != 0.0)
        .map(|((&r, &w), &v)| (r, w, v))
        .collect();
    let transform = |rho: f64| -> Complex64 {
        terms
            .iter()
            .map(|&(r, w, v)| v * (w * (r * rho).powf(-(nf - 2.0) / 2.0) * bessel::eval_fast(nu0, r * rho)))
            .sum()
    };
    // cancellation in the sum leaves evaluation noise of this absolute size
    let floor = 1e-11
        * terms
            .iter()
            .map(|&(r, w, v)| v.norm() * w * (r * n_freq).powf(-(nf - 2.0) / 2.0).max(1.0))
            .sum::<f64>();
    let cutoff = CutoffProfile::new(BumpKind::Standard, n_freq);
    let profile = if terms.is_empty() {
        RhoProfile::Constant
    } else {
        RhoProfile::Interpolated(std::sync::Arc::new(Chebyshev::fit_with_floor(
            n_freq,
            2.0 * n_freq,
            transform,
            1e-10,
            floor,
        )?))
    };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); table.mode_count()];
    if !terms.is_empty() {
        coeffs[radial] = Complex64::new(1.0, 0.0);
    }
    let datum = LocalizedDatum::new(table.clone(), coeffs, profile, cutoff)?;
    let rho = datum.rho_range();
    let (xs, ws) = GaussLegendre::cached(20).composite(rho.0, rho.1, 32);
    let mass: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(&x, &w)| w * datum.shape(x).norm_sqr() * x.powf(nf - 1.0))
        .sum::<f64>()
        * datum.coeffs[radial].norm_sqr();
    let rhs = n_freq.powf(nf / 2.0 - (nf + 2.0) / q) * mass.sqrt();
    let mut result = StrichartzResult {
        n_freq,
        q,
        lhs: 0.0,
        rhs,
        ratio: 0.0,
        method: StrichartzMethod::Annuli,
        regions: Vec::new(),
        dual_regions: Vec::new(),
        tail: 0.0,
        split_time: None,
    };
    if mass == 0.0 {
        return Ok(result);
    }

    let context = format!("Strichartz q = {q}, N = {n_freq}");
    let total = if method == StrichartzMethod::Lens {
        let lens = lens_total(&datum, nu0, q, support, sampling, &context)?;
        result.method = StrichartzMethod::Lens;
        result.regions = lens.direct;
        result.dual_regions = lens.dual;
        result.split_time = Some(lens.split_time);
        result.regions.iter().chain(&result.dual_regions).map(|x| x.2).sum()
    } else {
        let (regions, tail) = annulus_total(&datum, nu0, q, support, sampling, &context)?;
        let total = regions.iter().map(|x| x.2).sum::<f64>() + tail;
        result.regions = regions;
        result.tail = tail;
        total
    };
    result.lhs = (volume.powf(1.0 - q / 2.0) * total).powf(1.0 / q);
    result.ratio = result.lhs / rhs;
    Ok(result)
}

type Regions = Vec<(f64, f64, f64)>;

fn annulus_total(
    datum: &LocalizedDatum,
    nu0: f64,
    q: f64,
    support: f64,
    sampling: &SamplingOptions,
    context: &str,
) -> Result<(Regions, f64)> {
    let n_freq = datum.cutoff.n;
    let nus = [nu0];
    let weights = vec![vec![1.0]];
    let shape = |x: f64| datum.shape(x);
    let problem = ChirpProblem {
        n: datum.table.n,
        nus: &nus,
        weights: &weights,
        shape: &shape,
        rho_range: datum.rho_range(),
        q,
        source_radius: support,
        opts: *sampling,
    };
    let unit = 1.0 / n_freq;
    let mut regions = Vec::new();
    let mut total = 0.0;
    let first = annulus_power(&problem, (0.0, unit), context)?[0];
    regions.push((0.0, unit, first));
    total += first;
    let mut prev_decay = f64::NAN;
    for k in 0..MAX_ANNULI {
        let (ra, rb) = (unit * (k as f64).exp2(), unit * ((k + 1) as f64).exp2());
        let c = annulus_power(&problem, (ra, rb), context)?[0];
        let prev = regions.last().map(|x| x.2).unwrap_or(0.0);
        regions.push((ra, rb, c));
        total += c;
        let decay = c / prev;
        let drift = (decay - prev_decay).abs();
        prev_decay = decay;
        if ra < 4.0 * support.max(unit) || k < 2 || !(decay < 0.9) || drift.is_nan() {
            continue;
        }
        // the remainder is extrapolated geometrically; stop once the
        // uncertainty of that extrapolation is small
        let est = c * decay / (1.0 - decay);
        let spread = c * drift / (1.0 - decay).powi(2);
        if spread < TAIL_FRACTION * total {
            return Ok((regions, est));
        }
    }
    let last = regions.last().map(|x| x.2).unwrap_or(0.0);
    Err(Error::Truncation {
        context: format!("{context}: radial annuli did not decay geometrically"),
        previous: regions[regions.len() - 2].2,
        last,
    })
}

struct LensParts {
    direct: Regions,
    dual: Regions,
    split_time: f64,
}

/// u_N(s) = H_ν[β(·/N) B](s) by Gauss–Legendre in ρ, accurate for s ≤ s_max.
struct PhysicalProfile<'a> {
    datum: &'a LocalizedDatum,
    nu: f64,
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
}

impl<'a> PhysicalProfile<'a> {
    fn new(datum: &'a LocalizedDatum, nu: f64, support: f64, s_max: f64) -> Self {
        let (a, b) = datum.rho_range();
        let nf = datum.table.n as f64;
        let panels = ((b - a) * (s_max + support + 1.0) / (4.0 * PI)).ceil() as usize + 4;
        let (nodes, ws) = GaussLegendre::cached(20).composite(a, b, panels);
        let weights = nodes
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| datum.shape(x) * (w * x.powf(nf - 1.0)))
            .collect();
        PhysicalProfile {
            datum,
            nu,
            nodes,
            weights,
        }
    }

    /// Σ|weights|. Bessel errors put a noise floor in `eval` near 1e-11 times this.
    fn scale(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    fn eval(&self, s: f64) -> Complex64 {
        let p = (self.datum.table.n as f64 - 2.0) / 2.0;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * bessel::eval_scaled(self.nu, p, s * x))
            .sum()
    }
}

/// Radii beyond which |u_N| stays below PROFILE_CUTOFF and CORE_CUTOFF of
/// its peak.
fn effective_support(datum: &LocalizedDatum, nu: f64, support: f64) -> Result<(f64, f64)> {
    let n_freq = datum.cutoff.n;
    let step = PI / (16.0 * n_freq);
    let scan = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        let prof = PhysicalProfile::new(datum, nu, support, hi);
        let count = ((hi - lo) / step).ceil() as usize + 1;
        (0..=count)
            .map(|i| {
                let s = lo + (hi - lo) * i as f64 / count as f64;
                (s, prof.eval(s).norm())
            })
            .collect()
    };
    let max = |v: &[(f64, f64)]| v.iter().map(|x| x.1).fold(0.0, f64::max);
    let mut hi = 2.0 * support.max(1.0 / n_freq);
    let peak = max(&scan(0.0, hi));
    for _ in 0..16 {
        if max(&scan(hi, 2.0 * hi)) < PROFILE_CUTOFF * peak {
            let samples = scan(0.0, hi);
            let last_above = |level: f64| {
                samples
                    .iter()
                    .filter(|x| x.1 >= level * peak)
                    .map(|x| x.0)
                    .fold(0.0, f64::max)
                    + step
            };
            return Ok((last_above(PROFILE_CUTOFF), last_above(CORE_CUTOFF)));
        }
        hi *= 2.0;
    }
    Err(Error::Truncation {
        context: format!("localized datum at N = {n_freq} does not decay in r"),
        previous: hi,
        last: 2.0 * hi,
    })
}

/// Sum over regions [0, u], [u, 2u], … of one windowed integrand. Regions
/// double until they pass `reach`; the sum stops once a thin slab beyond
/// the last region adds a negligible amount.
fn region_sum<F>(power: F, unit: f64, reach: f64, context: &str) -> Result<Regions>
where
    F: Fn((f64, f64)) -> Result<f64>,
{
    let mut regions = vec![(0.0, unit, power((0.0, unit))?)];
    let mut total = regions[0].2;
    let mut ra = unit;
    for _ in 0..MAX_ANNULI {
        let rb = if 2.0 * ra > reach && ra < reach { (1.1 * reach).min(2.0 * ra) } else { 2.0 * ra };
        let c = power((ra, rb))?;
        regions.push((ra, rb, c));
        total += c;
        if rb >= reach {
            let slab = (rb, rb + (0.1 * rb).max(unit));
            let probe = power(slab)?;
            regions.push((slab.0, slab.1, probe));
            total += probe;
            if probe <= REGION_FRACTION * total {
                return Ok(regions);
            }
            ra = slab.1;
        } else {
            ra = rb;
        }
    }
    Err(Error::Truncation {
        context: format!("{context}: windowed regions past r = {reach} did not vanish"),
        previous: regions[regions.len() - 2].2,
        last: regions[regions.len() - 1].2,
    })
}

fn lens_total(
    datum: &LocalizedDatum,
    nu0: f64,
    q: f64,
    support: f64,
    sampling: &SamplingOptions,
    context: &str,
) -> Result<LensParts> {
    let n = datum.table.n;
    let n_freq = datum.cutoff.n;
    let (s_eff, s_core) = effective_support(datum, nu0, support)?;
    let s_pad = 1.5 * s_eff;
    let prof = PhysicalProfile::new(datum, nu0, support, s_pad);
    let dual_fit = Chebyshev::fit_with_floor(0.0, s_pad, |s| prof.eval(s), 1e-10, 1e-10 * prof.scale())?;
    let dual_shape = |s: f64| dual_fit.eval(s) * smooth_step((s_pad - s) / (s_pad - s_eff));
    let direct_shape = |x: f64| datum.shape(x);
    let nus = [nu0];
    let weights = vec![vec![1.0]];
    let direct = ChirpProblem {
        n,
        nus: &nus,
        weights: &weights,
        shape: &direct_shape,
        rho_range: datum.rho_range(),
        q,
        source_radius: s_eff,
        opts: *sampling,
    };
    let dual = DenseProblem {
        n,
        nu: nu0,
        shape: &dual_shape,
        rho_b: s_pad,
        q,
        opts: *sampling,
    };
    let rho_b = datum.rho_range().1;
    let direct_reach = |t1: f64| s_core + 2.0 * rho_b * t1;
    let dual_reach = |t1: f64| rho_b + s_core / t1;

    // pick the split that minimizes the estimated work
    let t1 = (-6..=12)
        .map(|k| (k as f64).exp2() / n_freq)
        .map(|t1| {
            let cost = windowed_cost(&direct, (0.0, direct_reach(t1)), t1)
                + dense_cost(&dual, (0.0, dual_reach(t1)), 0.5 / t1);
            (t1, cost)
        })
        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
        .0;

    let near = |t: f64| smooth_step((t1 - t.abs()) / (0.5 * t1));
    let far = |tau: f64| {
        if tau == 0.0 {
            1.0
        } else {
            1.0 - near(0.25 / tau)
        }
    };
    let near_window = TimeWindow {
        half_width: t1,
        weight: &near,
    };
    let far_window = TimeWindow {
        half_width: 0.5 / t1,
        weight: &far,
    };
    let direct_regions = region_sum(
        |r| Ok(windowed_power(&direct, r, &near_window)?[0]),
        1.0 / n_freq,
        direct_reach(t1),
        context,
    )?;
    let dual_regions = region_sum(
        |r| dense_windowed_power(&dual, r, &far_window),
        1.0 / s_pad,
        dual_reach(t1),
        context,
    )?;
    Ok(LensParts {
        direct: direct_regions,
        dual: dual_regions,
        split_time: t1,
    })
}
