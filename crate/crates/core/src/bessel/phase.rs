//! Schläfli phase partition and the oscillatory kernel ψ_m^ν.

use super::schlafli::oscillatory_integral;
use super::series::check_domain;
use crate::cutoff::{chi_delta, BumpKind, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// The three pieces (J̃¹, J̃², J̃³) of J̃_ν(r):
/// J̃¹ carries χ_δ, J̃² lives on [−π, −π/2−δ] ∪ [π/2+δ, π], J̃³ carries 1 − χ_δ on the rest.
pub fn eval_schlafli_pieces(nu: f64, r: f64, delta: f64) -> Result<(f64, f64, f64)> {
    check_domain(nu, r)?;
    if r < 1.0 {
        return Err(Error::Domain(format!("pieces require r >= 1; got r = {r}")));
    }
    if !(delta > 0.0 && delta < PI / 8.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, pi/8); got {delta}"
        )));
    }
    let norm = 1.0 / (2.0 * PI);
    // χ_δ switches over a length δ; resolve it with several panels
    let fine = delta / 8.0;
    let (j1, _) = oscillatory_integral(nu, r, -2.0 * delta, 2.0 * delta, fine, |t| {
        chi_delta(t, delta)
    });
    let edge = FRAC_PI_2 + delta;
    let (a, _) = oscillatory_integral(nu, r, -PI, -edge, PI, |_| 1.0);
    let (b, _) = oscillatory_integral(nu, r, edge, PI, PI, |_| 1.0);
    let off = |t: f64| 1.0 - chi_delta(t, delta);
    let (c, _) = oscillatory_integral(nu, r, -edge, -delta, fine, off);
    let (d, _) = oscillatory_integral(nu, r, delta, edge, fine, off);
    Ok((j1 * norm, (a + b) * norm, (c + d) * norm))
}

/// Parameters of ψ_m^ν(r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseKernelParams {
    pub nu: f64,
    pub r: f64,
    /// Shifted time m = t + j/4.
    pub m: f64,
    pub delta: f64,
    pub beta: BumpKind,
    /// Cone dimension entering the weight ρ^{n/2}.
    pub n: u32,
    /// Overall amplitude on β; zero switches the kernel off.
    pub beta_scale: f64,
}

impl PhaseKernelParams {
    pub fn new(nu: f64, r: f64, m: f64) -> Self {
        PhaseKernelParams {
            nu,
            r,
            m,
            delta: DEFAULT_DELTA,
            beta: BumpKind::Standard,
            n: 2,
            beta_scale: 1.0,
        }
    }
}

const PSI_MAX_NODES: usize = 200_000_000;

/// ψ_m^ν(r) = ∫∫ e^{i(mρ² + ρ r sin θ − νθ)} χ_δ(θ) β(ρ) ρ^{n/2} dθ dρ.
///
/// Tensor-product composite GL-10 with panels of at most a quarter phase
/// period in each variable; panel counts grow by half until two successive
/// values agree.
pub fn eval_psi(p: &PhaseKernelParams) -> Result<Complex64> {
    check_domain(p.nu, p.r)?;
    if p.beta_scale == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (rho_a, rho_b) = p.beta.support();
    let th_b = 2.0 * p.delta;
    let rho_rate = 2.0 * p.m.abs() * rho_b + p.r * th_b.sin();
    let th_rate = rho_b * p.r + p.nu;
    let mut n_rho = (((rho_b - rho_a) / (PI / (2.0 * rho_rate.max(1.0)))).ceil() as usize).max(8);
    let mut n_th = ((2.0 * th_b / (PI / (2.0 * th_rate.max(1.0)))).ceil() as usize).max(8);

    let mut prev = psi_tensor(p, n_rho, n_th);
    loop {
        n_rho += n_rho / 2;
        n_th += n_th / 2;
        if n_rho * n_th * 100 > PSI_MAX_NODES {
            return Err(Error::Quadrature {
                context: format!("psi kernel at nu = {}, r = {}, m = {}", p.nu, p.r, p.m),
                residual: f64::NAN,
                threshold: 1e-10,
            });
        }
        let next = psi_tensor(p, n_rho, n_th);
        let diff = (next - prev).norm();
        if diff <= 1e-10 * next.norm().max(1e-6) {
            return Ok(next);
        }
        prev = next;
    }
}

fn psi_tensor(p: &PhaseKernelParams, n_rho: usize, n_th: usize) -> Complex64 {
    let rule = GaussLegendre::cached(10);
    let (rho_a, rho_b) = p.beta.support();
    let (rho_x, rho_w) = rule.composite(rho_a, rho_b, n_rho);
    let th_b = 2.0 * p.delta;
    let (th_x, th_w) = rule.composite(-th_b, th_b, n_th);
    let half_n = p.n as f64 / 2.0;
    let chi: Vec<f64> = th_x.iter().map(|&t| chi_delta(t, p.delta)).collect();
    let sin_th: Vec<f64> = th_x.iter().map(|t| t.sin()).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (&rho, &wr) in rho_x.iter().zip(&rho_w) {
        let amp = p.beta_scale * p.beta.eval(rho) * rho.powf(half_n) * wr;
        if amp == 0.0 {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for i in 0..th_x.len() {
            let wt = th_w[i] * chi[i];
            if wt == 0.0 {
                continue;
            }
            let ph = rho * p.r * sin_th[i] - p.nu * th_x[i];
            let (s, c) = ph.sin_cos();
            inner += Complex64::new(c, s) * wt;
        }
        let (s, c) = (p.m * rho * rho).sin_cos();
        total += Complex64::new(c, s) * inner * amp;
    }
    total
}
