use super::series::check_domain;
use crate::error::Result;
use statrs::function::gamma::ln_gamma;

const RESCALE_ABOVE: f64 = 1e250;

/// J_{μ+k}(x) for k = 0..=kmax by Miller's backward recurrence, μ ∈ [0, 1).
///
/// Normalization uses (x/2)^μ = Σ_k (μ+2k) Γ(μ+k)/k! · J_{μ+2k}(x), which for
/// μ = 0 is the familiar J₀ + 2ΣJ_{2k} = 1. Intended for x ≳ 1; tiny x loses
/// relative accuracy in the high orders.
pub fn miller_sequence(mu: f64, x: f64, kmax: usize) -> Vec<f64> {
    debug_assert!((0.0..1.0).contains(&mu));
    if x == 0.0 {
        let mut out = vec![0.0; kmax + 1];
        if mu == 0.0 {
            out[0] = 1.0;
        }
        return out;
    }
    let top = (1.1 * (kmax as f64).max(x) + 60.0).ceil() as usize;
    let mut vals = vec![0.0; top + 2];
    vals[top] = 1e-30;
    let two_over_x = 2.0 / x;
    for k in (1..=top).rev() {
        let next = two_over_x * (mu + k as f64) * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            for v in vals[k - 1..].iter_mut() {
                *v *= s;
            }
        }
    }

    // Σ over even offsets, coefficients divided through by Γ(μ+1)
    let mut norm = vals[0];
    let mut g = 1.0; // Γ(μ+k)/(k! Γ(μ+1)) at k = 1
    let mut k = 1usize;
    while 2 * k <= top {
        let c = (mu + 2.0 * k as f64) * g;
        norm += c * vals[2 * k];
        g *= (mu + k as f64) / (k as f64 + 1.0);
        k += 1;
    }
    let lhs = (mu * (0.5 * x).ln() - ln_gamma(mu + 1.0)).exp();
    let scale = lhs / norm;
    vals.truncate(kmax + 1);
    for v in vals.iter_mut() {
        *v *= scale;
    }
    vals
}

/// Single-order evaluation through the Miller sequence.
pub fn eval_recurrence(nu: f64, r: f64) -> Result<f64> {
    check_domain(nu, r)?;
    let k = nu.floor();
    let mu = nu - k;
    Ok(miller_sequence(mu, r, k as usize)[k as usize])
}
