//! Mixed L^q_t L^q_{μ(r)} L²_θ norms of frequency-localized solutions.
//!
//! By orthogonality of the angular eigenfunctions the L²_θ norm of
//! Σ φ_{ν,ℓ}(θ) w_{ν,ℓ}(t, r) is (Σ |w_{ν,ℓ}|²)^{1/2}, so only the radial
//! profiles w_{ν,ℓ}(t, r) = r^{−(n−2)/2} ∫ e^{itρ²} J_ν(rρ) b_{ν,ℓ}(ρ) β(ρ) ρ^{n/2} dρ
//! are ever computed.
//!
//! In s = ρ² the profile is a Fourier integral over a compact interval, so
//! one FFT per (r, ν) yields it on a whole time grid.

use crate::bessel;
use crate::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::geometry::SpectrumTable;
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Below this fraction of the peak, a time sample is skipped.
const SKIP_FRACTION: f64 = 1e-14;
/// Oscillations per 20-point Gauss–Legendre panel in the dense evaluator.
const WAVES_PER_PANEL: f64 = 2.5;

/// Discretization controls for the time and radial quadratures.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SamplingOptions {
    /// Multiplies every sampling density.
    pub resolution: f64,
    /// Relative norm increment over one doubling of T accepted as converged.
    pub increment_tolerance: f64,
    pub max_doublings: u32,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            resolution: 1.0,
            increment_tolerance: 1e-3,
            max_doublings: 10,
        }
    }
}

/// Smooth ρ-profile known through samples at Chebyshev points.
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    pub a: f64,
    pub b: f64,
    nodes: Vec<f64>,
    values: Vec<Complex64>,
    bary: Vec<f64>,
}

impl Chebyshev {
    fn with_values(a: f64, b: f64, values: Vec<Complex64>) -> Self {
        let m = values.len();
        let nodes = cheb_nodes(a, b, m);
        let bary = (0..m)
            .map(|j| {
                let s = ((2 * j + 1) as f64 * PI / (2 * m) as f64).sin();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Chebyshev {
            a,
            b,
            nodes,
            values,
            bary,
        }
    }

    /// Samples `f` on [a, b], doubling the node count until the interpolant
    /// reproduces `f` at the next level to `tol` relative.
    pub fn fit<F: Fn(f64) -> Complex64 + Sync>(a: f64, b: f64, f: F, tol: f64) -> Result<Self> {
        Chebyshev::fit_with_floor(a, b, f, tol, 0.0)
    }

    /// As [`Chebyshev::fit`], but errors below `floor` always count as converged.
    pub fn fit_with_floor<F: Fn(f64) -> Complex64 + Sync>(a: f64, b: f64, f: F, tol: f64, floor: f64) -> Result<Self> {
        let sample = |m: usize| -> Vec<Complex64> { cheb_nodes(a, b, m).par_iter().map(|&x| f(x)).collect() };
        let mut m = 32;
        let mut cur = Chebyshev::with_values(a, b, sample(m));
        while m <= 4096 {
            let next = Chebyshev::with_values(a, b, sample(2 * m));
            let scale = next.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = next
                .nodes
                .iter()
                .zip(&next.values)
                .map(|(&x, v)| (cur.eval(x) - v).norm())
                .fold(0.0, f64::max);
            if err <= (tol * scale).max(floor).max(f64::MIN_POSITIVE) {
                return Ok(next);
            }
            m *= 2;
            cur = next;
        }
        Err(Error::Quadrature {
            context: format!("Chebyshev fit on [{a}, {b}]"),
            residual: f64::NAN,
            threshold: tol,
        })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((&xj, &vj), &wj) in self.nodes.iter().zip(&self.values).zip(&self.bary) {
            let d = x - xj;
            if d == 0.0 {
                return vj;
            }
            let c = wj / d;
            num += vj * c;
            den += c;
        }
        num / den
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn cheb_nodes(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let c = ((2 * j + 1) as f64 * PI / (2 * m) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * c
        })
        .collect()
}

/// ρ-dependence shared by every mode of a datum.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoProfile {
    Constant,
    Interpolated(Arc<Chebyshev>),
}

impl RhoProfile {
    pub fn eval(&self, rho: f64) -> Complex64 {
        match self {
            RhoProfile::Constant => Complex64::new(1.0, 0.0),
            RhoProfile::Interpolated(c) => c.eval(rho),
        }
    }
}

/// Spectral datum b_{ν,ℓ}(ρ) = c_{ν,ℓ}·p(ρ), localized by β(ρ/N).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedDatum {
    pub table: Arc<SpectrumTable>,
    /// c_{ν,ℓ} in table mode order.
    pub coeffs: Vec<Complex64>,
    pub profile: RhoProfile,
    pub cutoff: CutoffProfile,
}

impl LocalizedDatum {
    pub fn new(table: Arc<SpectrumTable>, coeffs: Vec<Complex64>, profile: RhoProfile, cutoff: CutoffProfile) -> Result<Self> {
        if coeffs.len() != table.mode_count() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                table.mode_count()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        Ok(LocalizedDatum {
            table,
            coeffs,
            profile,
            cutoff,
        })
    }

    /// Σ_ℓ |c_{ν,ℓ}|² for every table entry.
    pub fn entry_weights(&self) -> Vec<f64> {
        entry_weights(&self.table, &self.coeffs)
    }

    /// p(ρ)·β(ρ/N).
    pub fn shape(&self, rho: f64) -> Complex64 {
        let beta = self.cutoff.eval(rho);
        if beta == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.profile.eval(rho) * beta
        }
    }

    pub fn rho_range(&self) -> (f64, f64) {
        let (lo, hi) = self.cutoff.kind.support();
        (lo * self.cutoff.n, hi * self.cutoff.n)
    }
}

pub(crate) fn entry_weights(table: &SpectrumTable, coeffs: &[Complex64]) -> Vec<f64> {
    let mut out = vec![0.0; table.len()];
    for (m, c) in table.modes().iter().zip(coeffs) {
        out[m.entry] += c.norm_sqr();
    }
    out
}

/// The L²_θ norm at one (t, r) by direct quadrature in ρ.
pub fn angular_l2_profile(datum: &LocalizedDatum, t: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("angular profile needs finite t and r > 0; got t = {t}, r = {r}")));
    }
    let n = datum.table.n as f64;
    let (a, b) = datum.rho_range();
    let panels = (((2.0 * t.abs() * b + r) * (b - a) / PI).ceil() as usize).max(1) + 4;
    let (xs, ws) = GaussLegendre::cached(16).composite(a, b, panels);
    let weights = datum.entry_weights();
    let mut total = 0.0;
    for (e, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let nu = datum.table.nu(e);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&rho, &wq) in xs.iter().zip(&ws) {
            let j = bessel::eval_fast(nu, r * rho);
            acc += Complex64::from_polar(1.0, t * rho * rho) * datum.shape(rho) * (j * rho.powf(n / 2.0) * wq);
        }
        total += w * acc.norm_sqr();
    }
    Ok(r.powf(-(n - 2.0) / 2.0) * total.sqrt())
}

/// Nonnegative samples v(t_k, r_i) with their quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSamples {
    /// Uniform time step; every time sample has weight dt.
    pub dt: f64,
    /// Radial weights including r^{n−1}.
    pub r_weights: Vec<f64>,
    /// values[i][k] at r_i, t_k.
    pub values: Vec<Vec<f64>>,
}

/// (Σ_i w_i Σ_k dt |v_ik|^q)^{1/q}, or the largest sample when q = ∞.
pub fn mixed_norm(samples: &ProfileSamples, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("mixed norm needs q >= 1; got {q}")));
    }
    if samples.values.len() != samples.r_weights.len() {
        return Err(Error::Shape(format!(
            "{} radial rows for {} radial weights",
            samples.values.len(),
            samples.r_weights.len()
        )));
    }
    if q.is_infinite() {
        return Ok(samples
            .values
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(0.0, f64::max));
    }
    let mut acc = 0.0;
    for (row, &w) in samples.values.iter().zip(&samples.r_weights) {
        let s: f64 = row.iter().map(|v| v.abs().powf(q)).sum();
        acc += w * samples.dt * s;
    }
    Ok(acc.powf(1.0 / q))
}

/// How the Bessel values of all components are produced at one argument.
enum BesselPlan {
    /// ν_c = ν_0 + k_c with integer k_c: one recurrence sequence per point.
    Ladder { base: f64, offsets: Vec<usize>, top: usize },
    Separate(Vec<f64>),
}

impl BesselPlan {
    fn new(nus: &[f64]) -> Self {
        let base = nus.iter().cloned().fold(f64::INFINITY, f64::min);
        let offsets: Option<Vec<usize>> = nus
            .iter()
            .map(|&nu| {
                let k = (nu - base).round();
                ((nu - base - k).abs() < 1e-9).then_some(k as usize)
            })
            .collect();
        match offsets {
            Some(offsets) if nus.len() > 1 => {
                let top = offsets.iter().cloned().max().unwrap_or(0);
                BesselPlan::Ladder { base, offsets, top }
            }
            _ => BesselPlan::Separate(nus.to_vec()),
        }
    }

    fn fill(&self, x: f64, out: &mut [f64]) {
        match self {
            BesselPlan::Ladder { base, offsets, top } => {
                let seq = bessel::eval_sequence(*base, x, *top);
                for (o, &k) in out.iter_mut().zip(offsets) {
                    *o = seq[k];
                }
            }
            BesselPlan::Separate(nus) => {
                for (o, &nu) in out.iter_mut().zip(nus) {
                    *o = bessel::eval_fast(nu, x);
                }
            }
        }
    }
}

/// One left-hand side over a radial interval: components ν_c share the
/// ρ-shape; trial τ weights component c by weights[τ][c].
pub(crate) struct ChirpProblem<'a> {
    pub n: u32,
    pub nus: &'a [f64],
    pub weights: &'a [Vec<f64>],
    pub shape: &'a (dyn Fn(f64) -> Complex64 + Sync),
    pub rho_range: (f64, f64),
    pub q: f64,
    /// Radius outside which the datum is negligible; sets the travel time.
    pub source_radius: f64,
    pub opts: SamplingOptions,
}

struct TimePlan {
    s0: f64,
    ds: f64,
    n_s: usize,
    m: usize,
    dt: f64,
    k_full: usize,
    k_half: usize,
}

fn effective_q(q: f64) -> f64 {
    if q.is_infinite() {
        8.0
    } else {
        q.max(2.0)
    }
}

impl TimePlan {
    fn new(rho: (f64, f64), q: f64, t_max: f64, resolution: f64) -> Self {
        let (sa, sb) = (rho.0 * rho.0, rho.1 * rho.1);
        let len = sb - sa;
        // the discrete sum in s is periodic in t; keep images beyond the decay range
        let period = 2.5 * t_max + 200.0 / sa;
        let ds = 2.0 * PI / period;
        let n_s = (len / ds).floor() as usize + 2;
        let omega = len * effective_q(q) / 2.0;
        let dt_target = 2.0 * PI / (1.25 * omega * resolution);
        let m = ((period / dt_target).ceil() as usize).max(n_s).next_power_of_two();
        let dt = period / m as f64;
        TimePlan {
            s0: sa,
            ds,
            n_s,
            m,
            dt,
            k_full: (t_max / dt).floor() as usize,
            k_half: (0.5 * t_max / dt).floor() as usize,
        }
    }

    /// Plan for samples inside [−w, w] only; the period still covers the
    /// decay time so that images of the window stay negligible.
    fn windowed(rho: (f64, f64), q: f64, t_decay: f64, w: f64, resolution: f64) -> Self {
        let mut plan = TimePlan::new(rho, q, t_decay.max(w), resolution);
        plan.k_full = ((w / plan.dt).floor() as usize).min(plan.m / 2 - 1);
        plan.k_half = plan.k_full / 2;
        plan
    }

    /// Rough work estimate for one radial node.
    fn cost(&self) -> f64 {
        self.n_s as f64 * BESSEL_COST + 5.0 * self.m as f64 * (self.m as f64).log2()
    }
}

/// Radial nodes and weights (r^{n−1} included) on [r_a, r_b].
fn radial_rule(n: u32, r: (f64, f64), rho_b: f64, q: f64, resolution: f64) -> (Vec<f64>, Vec<f64>) {
    let omega = rho_b * effective_q(q);
    let h = (r.1 - r.0).min(8.0 / rho_b);
    let panels = ((r.1 - r.0) / h).ceil().max(1.0) as usize;
    let h = (r.1 - r.0) / panels as f64;
    let order = (0.5 * omega * h * resolution).ceil() as usize + 4;
    let (xs, mut ws) = GaussLegendre::cached(order).composite(r.0, r.1, panels);
    for (w, &x) in ws.iter_mut().zip(&xs) {
        *w *= x.powi(n as i32 - 1);
    }
    (xs, ws)
}

/// Per-trial (full window, half window) contributions of one radial node.
fn node_contribution(
    p: &ChirpProblem,
    plan: &TimePlan,
    bessel_plan: &BesselPlan,
    h: &[Complex64],
    rho: &[f64],
    fft: &Arc<dyn Fft<f64>>,
    time_weights: Option<&[f64]>,
    r: f64,
    wr: f64,
    bufs: &mut (Vec<Complex64>, Vec<Complex64>, Vec<f64>, Vec<f64>),
) -> (Vec<f64>, Vec<f64>) {
    let comps = p.nus.len();
    let trials = p.weights.len();
    let span = 2 * plan.k_full + 1;
    let (buf, scratch, jv, power) = bufs;
    power.clear();
    power.resize(comps * span, 0.0);
    let radial = r.powf(-(p.n as f64 - 2.0) / 2.0);
    let mut js = vec![0.0; plan.n_s * comps];
    for (j, &rj) in rho.iter().enumerate() {
        if h[j] == Complex64::new(0.0, 0.0) {
            continue;
        }
        bessel_plan.fill(r * rj, jv);
        js[j * comps..(j + 1) * comps].copy_from_slice(jv);
    }
    let active: Vec<bool> = (0..comps).map(|c| p.weights.iter().any(|w| w[c] != 0.0)).collect();
    for c in 0..comps {
        if !active[c] {
            continue;
        }
        buf.clear();
        buf.resize(plan.m, Complex64::new(0.0, 0.0));
        for j in 0..plan.n_s {
            buf[j] = h[j] * (js[j * comps + c] * radial);
        }
        fft.process_with_scratch(buf, scratch);
        let row = &mut power[c * span..(c + 1) * span];
        for (i, slot) in row.iter_mut().enumerate() {
            let k = i as isize - plan.k_full as isize;
            let idx = k.rem_euclid(plan.m as isize) as usize;
            *slot = buf[idx].norm_sqr();
        }
    }
    let peak_weights: Vec<f64> = (0..comps)
        .map(|c| p.weights.iter().map(|w| w[c]).fold(0.0, f64::max))
        .collect();
    let envelope: Vec<f64> = (0..span)
        .map(|i| (0..comps).map(|c| peak_weights[c] * power[c * span + i]).sum())
        .collect();
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    let mut full = vec![0.0; trials];
    let mut half = vec![0.0; trials];
    if peak == 0.0 {
        return (full, half);
    }
    let infinite = p.q.is_infinite();
    for (i, &env) in envelope.iter().enumerate() {
        let tw = time_weights.map_or(1.0, |tw| tw[i]);
        if env < SKIP_FRACTION * peak || tw == 0.0 {
            continue;
        }
        let k = (i as isize - plan.k_full as isize).unsigned_abs();
        let in_half = k <= plan.k_half;
        for (tr, w) in p.weights.iter().enumerate() {
            let s: f64 = (0..comps).map(|c| w[c] * power[c * span + i]).sum();
            if infinite {
                let v = s.sqrt();
                full[tr] = full[tr].max(v);
                if in_half {
                    half[tr] = half[tr].max(v);
                }
            } else {
                let v = wr * plan.dt * tw * s.powf(0.5 * p.q);
                full[tr] += v;
                if in_half {
                    half[tr] += v;
                }
            }
        }
    }
    (full, half)
}

fn sample_pass(
    p: &ChirpProblem,
    plan: &TimePlan,
    nodes: &[f64],
    rweights: &[f64],
    bessel_plan: &BesselPlan,
    time_weights: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let comps = p.nus.len();
    let rho: Vec<f64> = (0..plan.n_s).map(|j| (plan.s0 + j as f64 * plan.ds).sqrt()).collect();
    let nf = p.n as f64;
    let h: Vec<Complex64> = rho
        .iter()
        .map(|&x| (p.shape)(x) * (x.powf(nf / 2.0) / (2.0 * x) * plan.ds))
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(plan.m);
    let scratch_len = fft.get_inplace_scratch_len();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .par_iter()
        .zip(rweights.par_iter())
        .map_init(
            || {
                (
                    Vec::with_capacity(plan.m),
                    vec![Complex64::new(0.0, 0.0); scratch_len],
                    vec![0.0; comps],
                    Vec::new(),
                )
            },
            |bufs, (&x, &w)| node_contribution(p, plan, bessel_plan, &h, &rho, &fft, time_weights, x, w, bufs),
        )
        .collect();
    let trials = p.weights.len();
    let mut full = vec![0.0f64; trials];
    let mut half = vec![0.0f64; trials];
    for (f, hf) in &rows {
        for tr in 0..trials {
            if p.q.is_infinite() {
                full[tr] = full[tr].max(f[tr]);
                half[tr] = half[tr].max(hf[tr]);
            } else {
                full[tr] += f[tr];
                half[tr] += hf[tr];
            }
        }
    }
    (full, half)
}

/// Smooth weight φ(t) vanishing for |t| ≥ half_width.
pub(crate) struct TimeWindow<'a> {
    pub half_width: f64,
    pub weight: &'a (dyn Fn(f64) -> f64 + Sync),
}

/// Per-trial ∫∫ φ(t) (Σ_c w_c |W_c|²)^{q/2} r^{n−1} dr dt over [r_a, r_b]; q finite.
pub(crate) fn windowed_power(p: &ChirpProblem, r: (f64, f64), window: &TimeWindow) -> Result<Vec<f64>> {
    let (ra, rb) = p.rho_range;
    if !(ra > 0.0 && rb > ra) || !p.q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "windowed sampling needs 0 < rho_a < rho_b and finite q; got [{ra}, {rb}], q = {}",
            p.q
        )));
    }
    let plan = windowed_plan(p, r, window.half_width);
    let (nodes, rweights) = radial_rule(p.n, r, rb, p.q, p.opts.resolution);
    let bessel_plan = BesselPlan::new(p.nus);
    let tw: Vec<f64> = (0..2 * plan.k_full + 1)
        .map(|i| (window.weight)((i as f64 - plan.k_full as f64) * plan.dt))
        .collect();
    Ok(sample_pass(p, &plan, &nodes, &rweights, &bessel_plan, Some(&tw)).0)
}

fn windowed_plan(p: &ChirpProblem, r: (f64, f64), w: f64) -> TimePlan {
    let ra = p.rho_range.0;
    let t_decay = (r.1 + p.source_radius) / ra + 32.0 / (ra * ra);
    TimePlan::windowed(p.rho_range, p.q, t_decay, w, p.opts.resolution)
}

/// Work estimate of [`windowed_power`] on [r_a, r_b].
pub(crate) fn windowed_cost(p: &ChirpProblem, r: (f64, f64), w: f64) -> f64 {
    let plan = windowed_plan(p, r, w);
    let (nodes, _) = radial_rule(p.n, r, p.rho_range.1, p.q, p.opts.resolution);
    nodes.len() as f64 * plan.cost()
}

/// Flop-equivalent cost of one Bessel evaluation in the work estimates.
const BESSEL_COST: f64 = 100.0;

/// Single-profile problem for [`dense_windowed_power`]: W(t, r) =
/// r^{−(n−2)/2} ∫_0^{ρ_b} e^{itρ²} J_ν(rρ) f(ρ) ρ^{n/2} dρ.
pub(crate) struct DenseProblem<'a> {
    pub n: u32,
    pub nu: f64,
    pub shape: &'a (dyn Fn(f64) -> Complex64 + Sync),
    pub rho_b: f64,
    pub q: f64,
    pub opts: SamplingOptions,
}

struct DensePlan {
    rho: Vec<f64>,
    rho_w: Vec<f64>,
    dt: f64,
    k: usize,
}

impl DensePlan {
    fn new(p: &DenseProblem, r_b: f64, w: f64) -> Self {
        let freq = r_b + 2.0 * w * p.rho_b;
        let panels = (p.rho_b * freq / (2.0 * PI * WAVES_PER_PANEL) * p.opts.resolution).ceil() as usize + 2;
        let (rho, rho_w) = GaussLegendre::cached(20).composite(0.0, p.rho_b, panels);
        let omega = p.rho_b * p.rho_b * effective_q(p.q) / 2.0;
        let dt = 2.0 * PI / (1.25 * omega * p.opts.resolution);
        DensePlan {
            rho,
            rho_w,
            dt,
            k: (w / dt).ceil() as usize,
        }
    }
}

/// ∫∫ φ(t) |W(t, r)|^q r^{n−1} dr dt over [r_a, r_b] by Gauss–Legendre in ρ
/// and direct time samples; suited to short windows, and ρ may reach 0.
pub(crate) fn dense_windowed_power(p: &DenseProblem, r: (f64, f64), window: &TimeWindow) -> Result<f64> {
    if !(p.rho_b > 0.0) || !p.q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dense sampling needs rho_b > 0 and finite q; got {}, q = {}",
            p.rho_b, p.q
        )));
    }
    let w = window.half_width;
    let plan = DensePlan::new(p, r.1, w);
    let (nodes, rweights) = radial_rule(p.n, r, p.rho_b, p.q, p.opts.resolution);
    let nf = p.n as f64;
    let f: Vec<Complex64> = plan
        .rho
        .iter()
        .zip(&plan.rho_w)
        .map(|(&x, &wx)| (p.shape)(x) * (wx * x.powf(nf / 2.0)))
        .collect();
    let times: Vec<(f64, f64)> = (0..=2 * plan.k)
        .map(|i| {
            let t = (i as f64 - plan.k as f64) * plan.dt;
            (t, (window.weight)(t) * plan.dt)
        })
        .filter(|&(_, tw)| tw != 0.0)
        .collect();
    let phases: Vec<Vec<Complex64>> = times
        .iter()
        .map(|&(t, _)| plan.rho.iter().map(|&x| Complex64::from_polar(1.0, t * x * x)).collect())
        .collect();
    let total: f64 = nodes
        .par_iter()
        .zip(rweights.par_iter())
        .map(|(&x, &wr)| {
            let radial = x.powf(-(nf - 2.0) / 2.0);
            let a: Vec<Complex64> = plan
                .rho
                .iter()
                .zip(&f)
                .map(|(&rho, &fj)| fj * (bessel::eval_fast(p.nu, x * rho) * radial))
                .collect();
            let mut acc = 0.0;
            for (row, &(_, tw)) in phases.iter().zip(&times) {
                let v: Complex64 = row.iter().zip(&a).map(|(e, aj)| e * aj).sum();
                acc += tw * v.norm_sqr().powf(0.5 * p.q);
            }
            wr * acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total)
}

/// Work estimate of [`dense_windowed_power`] on [r_a, r_b].
pub(crate) fn dense_cost(p: &DenseProblem, r: (f64, f64), w: f64) -> f64 {
    let plan = DensePlan::new(p, r.1, w);
    let (nodes, _) = radial_rule(p.n, r, p.rho_b, p.q, p.opts.resolution);
    let nr = plan.rho.len() as f64;
    nodes.len() as f64 * nr * (BESSEL_COST + 8.0 * (2 * plan.k + 1) as f64)
}

/// Per-trial ∫∫ (Σ_c w_c |W_c|²)^{q/2} r^{n−1} dr dt over [r_a, r_b] × [−T, T]
/// (the supremum of (Σ_c w_c |W_c|²)^{1/2} when q = ∞), with T doubled until
/// the last doubling changes every trial's norm by less than the tolerance.
pub(crate) fn annulus_power(p: &ChirpProblem, r: (f64, f64), context: &str) -> Result<Vec<f64>> {
    let (ra, rb) = p.rho_range;
    if !(ra > 0.0 && rb > ra) {
        return Err(Error::InvalidParameter(format!("frequency support must be inside (0, inf); got [{ra}, {rb}]")));
    }
    let mut t_max = (r.1 + p.source_radius) / ra + 32.0 / (ra * ra);
    let (nodes, rweights) = radial_rule(p.n, r, rb, p.q, p.opts.resolution);
    let bessel_plan = BesselPlan::new(p.nus);
    let mut last = (0.0, 0.0);
    for _ in 0..=p.opts.max_doublings {
        let plan = TimePlan::new(p.rho_range, p.q, t_max, p.opts.resolution);
        let (full, half) = sample_pass(p, &plan, &nodes, &rweights, &bessel_plan, None);
        let trials = p.weights.len();
        let root = |v: f64| if p.q.is_infinite() { v } else { v.powf(1.0 / p.q) };
        let mut worst = 0.0;
        for tr in 0..trials {
            let (a, b) = (root(half[tr]), root(full[tr]));
            let inc = if b > 0.0 { (b - a).abs() / b } else { 0.0 };
            if inc >= worst {
                worst = inc;
                last = (a, b);
            }
        }
        if worst < p.opts.increment_tolerance {
            return Ok(full);
        }
        t_max *= 2.0;
    }
    Err(Error::Truncation {
        context: format!("{context}, r in [{}, {}], q = {}, T = {}", r.0, r.1, p.q, t_max / 2.0),
        previous: last.0,
        last: last.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::BumpKind;
    use crate::geometry::{build_spectrum, ConeModel};

    fn datum(k: f64, coeffs: impl Fn(usize) -> Complex64) -> LocalizedDatum {
        let table = Arc::new(build_spectrum(&ConeModel::euclidean_plane(), k).unwrap());
        let c = (0..table.mode_count()).map(coeffs).collect();
        LocalizedDatum::new(table, c, RhoProfile::Constant, CutoffProfile::new(BumpKind::Standard, 1.0)).unwrap()
    }

    #[test]
    fn chebyshev_reproduces_smooth_function() {
        let f = |x: f64| Complex64::new((3.0 * x).sin(), x * x);
        let c = Chebyshev::fit(1.0, 2.0, f, 1e-13).unwrap();
        for i in 0..50 {
            let x = 1.0 + i as f64 / 49.0;
            assert!((c.eval(x) - f(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn mixed_norm_of_windowed_constant() {
        // q = 2, value c on [−T, T] × [R, 2R] with r dr: c²·2T·(3R²/2)
        let (c, t, r) = (0.7, 5.0, 3.0);
        let k = 1000;
        let dt = 2.0 * t / k as f64;
        let (xs, ws) = GaussLegendre::new(8).composite(r, 2.0 * r, 4);
        let ws: Vec<f64> = ws.iter().zip(&xs).map(|(w, x)| w * x).collect();
        let samples = ProfileSamples {
            dt,
            r_weights: ws,
            values: vec![vec![c; k]; xs.len()],
        };
        let exact = (c * c * 2.0 * t * 1.5 * r * r).sqrt();
        assert!((mixed_norm(&samples, 2.0).unwrap() - exact).abs() < 1e-12);
        assert_eq!(mixed_norm(&samples, f64::INFINITY).unwrap(), c);
        let zero = ProfileSamples { values: vec![vec![0.0; k]; samples.r_weights.len()], ..samples };
        assert_eq!(mixed_norm(&zero, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn mixed_norm_increases_with_q_on_probability_measure() {
        let values: Vec<Vec<f64>> = (0..10).map(|i| (0..10).map(|k| ((i * k) as f64).sin().abs()).collect()).collect();
        let samples = ProfileSamples {
            dt: 0.1,
            r_weights: vec![0.1; 10],
            values,
        };
        let mut prev = 0.0;
        for q in [1.0, 2.0, 3.0, 4.5, 8.0, f64::INFINITY] {
            let v = mixed_norm(&samples, q).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn zero_coefficients_give_zero_profile() {
        let d = datum(2.0, |_| Complex64::new(0.0, 0.0));
        assert_eq!(angular_l2_profile(&d, 0.3, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn static_single_mode_matches_direct_integral() {
        // t = 0, b = ρ^{−n/2} on the bump: r^{−(n−2)/2}|∫ J_ν(rρ) β(ρ) dρ|
        let table = Arc::new(build_spectrum(&ConeModel::euclidean_plane(), 0.0).unwrap());
        let cheb = Chebyshev::fit(1.0, 2.0, |x| Complex64::new(1.0 / x, 0.0), 1e-14).unwrap();
        let d = LocalizedDatum::new(
            table,
            vec![Complex64::new(1.0, 0.0)],
            RhoProfile::Interpolated(Arc::new(cheb)),
            CutoffProfile::new(BumpKind::Standard, 1.0),
        )
        .unwrap();
        for r in [0.5, 3.0, 17.0] {
            let direct = crate::quad::adaptive(1.0, 2.0, 1e-13, 1e-12, 2000, |x| {
                bessel::eval(0.0, r * x).unwrap() * crate::cutoff::bump(x)
            })
            .unwrap();
            let v = angular_l2_profile(&d, 0.0, r).unwrap();
            assert!((v - direct.abs()).abs() < 1e-11, "{r}: {v} vs {direct}");
        }
    }

    #[test]
    fn orthogonal_modes_add_in_square() {
        let both = datum(1.0, |m| if m == 0 { Complex64::new(1.0, 0.5) } else if m == 2 { Complex64::new(0.0, -2.0) } else { Complex64::new(0.0, 0.0) });
        let first = datum(1.0, |m| if m == 0 { Complex64::new(1.0, 0.5) } else { Complex64::new(0.0, 0.0) });
        let second = datum(1.0, |m| if m == 2 { Complex64::new(0.0, -2.0) } else { Complex64::new(0.0, 0.0) });
        let (t, r) = (0.8, 4.0);
        let lhs = angular_l2_profile(&both, t, r).unwrap().powi(2);
        let rhs = angular_l2_profile(&first, t, r).unwrap().powi(2) + angular_l2_profile(&second, t, r).unwrap().powi(2);
        assert!((lhs - rhs).abs() < 1e-13 * lhs);
    }

    fn fft_profile(d: &LocalizedDatum, q: f64, r: (f64, f64)) -> f64 {
        let nus: Vec<f64> = d.table.entries.iter().map(|e| e.nu).collect();
        let w = vec![d.entry_weights()];
        let shape = |x: f64| d.shape(x);
        let p = ChirpProblem {
            n: d.table.n,
            nus: &nus,
            weights: &w,
            shape: &shape,
            rho_range: d.rho_range(),
            q,
            source_radius: 0.0,
            opts: SamplingOptions::default(),
        };
        annulus_power(&p, r, "test").unwrap()[0]
    }

    #[test]
    fn chirp_sampler_agrees_with_direct_profile() {
        let d = datum(3.0, |m| Complex64::new(1.0 / (1.0 + m as f64), 0.3));
        // sup over the sampler's grid cannot exceed the true supremum
        let r = (4.0, 8.0);
        let sup = fft_profile(&d, f64::INFINITY, r);
        let mut direct: f64 = 0.0;
        let mut ti = -6.0;
        while ti <= 6.0 {
            for k in 0..=20 {
                let rr = r.0 + (r.1 - r.0) * k as f64 / 20.0;
                direct = direct.max(angular_l2_profile(&d, ti, rr).unwrap());
            }
            ti += 0.05;
        }
        assert!((sup - direct).abs() < 2e-3 * direct, "{sup} vs {direct}");
    }

    #[test]
    fn q2_power_matches_plancherel() {
        // ∫|W|²dt = 2π∫|g(s)|²ds, g = J_ν(r√s) β(√s) ρ^{n/2}/(2ρ)
        let d = datum(1.0, |m| if m == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        let r = (2.0, 4.0);
        let power = fft_profile(&d, 2.0, r);
        let (xs, ws) = GaussLegendre::new(20).composite(r.0, r.1, 8);
        let mut exact = 0.0;
        for (&x, &w) in xs.iter().zip(&ws) {
            let inner = crate::quad::adaptive(1.0, 2.0, 1e-15, 1e-13, 2000, |rho| {
                let j = bessel::eval(1.0, x * rho).unwrap();
                j * j * crate::cutoff::bump(rho).powi(2) * rho / 2.0
            })
            .unwrap();
            exact += w * x * 2.0 * PI * inner;
        }
        assert!((power - exact).abs() < 1e-8 * exact, "{power} vs {exact}");
    }
}
