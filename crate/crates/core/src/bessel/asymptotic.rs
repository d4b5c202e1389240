use super::series::check_domain;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Default truncation order of the Hankel expansion.
pub const DEFAULT_ORDER: usize = 6;

/// Coefficients a_m(ν), b_m(ν) of the large-argument expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymCoeffs {
    pub m: usize,
    pub a: f64,
    pub b: f64,
}

/// Finite-product form of the Γ-ratio coefficients.
///
/// a_m = (−1)^m / (2^{2m} (2m)!) · Π_{i=0}^{4m−1} (ν + 1/2 − 2m + i)
/// b_m = (−1)^m / (2^{2m+1} (2m+1)!) · Π_{i=0}^{4m+1} (ν − 1/2 − 2m + i)
pub fn asym_coeff(m: usize, nu: f64) -> AsymCoeffs {
    let mf = m as f64;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut a = sign;
    for i in 0..4 * m {
        a *= nu + 0.5 - 2.0 * mf + i as f64;
    }
    // divide by 4^m (2m)! factor by factor to keep magnitudes moderate
    for k in 1..=2 * m {
        a /= k as f64;
    }
    a /= 4f64.powi(m as i32);

    let mut b = sign;
    for i in 0..4 * m + 2 {
        b *= nu - 0.5 - 2.0 * mf + i as f64;
    }
    for k in 1..=2 * m + 1 {
        b /= k as f64;
    }
    b /= 2.0 * 4f64.powi(m as i32);

    AsymCoeffs { m, a, b }
}

/// Lower edge of the asymptotic regime, r ≥ max(2ν², 10).
pub fn asymptotic_threshold(nu: f64) -> f64 {
    (2.0 * nu * nu).max(10.0)
}

/// Truncated large-argument expansion with m ≤ `order`.
pub fn eval_asymptotic(nu: f64, r: f64, order: usize) -> Result<f64> {
    check_domain(nu, r)?;
    let threshold = asymptotic_threshold(nu).max(2.0 * nu);
    if r < threshold {
        return Err(Error::Regime(format!(
            "asymptotic expansion needs r >= {threshold}; got nu = {nu}, r = {r}"
        )));
    }
    Ok(asymptotic_unchecked(nu, r, order))
}

pub(crate) fn asymptotic_unchecked(nu: f64, r: f64, order: usize) -> f64 {
    let (p, q) = hankel_pq(nu, r, order);
    let omega = phase(nu, r);
    (2.0 / (PI * r)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// The amplitude sums P = Σ a_m r^{−2m} and Q = Σ b_m r^{−2m−1}.
pub fn hankel_pq(nu: f64, r: f64, order: usize) -> (f64, f64) {
    let inv2 = 1.0 / (r * r);
    let mut scale = 1.0;
    let (mut p, mut q) = (0.0, 0.0);
    for m in 0..=order {
        let c = asym_coeff(m, nu);
        p += c.a * scale;
        q += c.b * scale / r;
        scale *= inv2;
    }
    (p, q)
}

/// ω = r − νπ/2 − π/4, reduced before the trig call.
fn phase(nu: f64, r: f64) -> f64 {
    // shift taken modulo 2π to keep accuracy for large ν
    let shift = (0.5 * nu + 0.25).rem_euclid(2.0) * PI;
    r - shift
}

/// Σ_{m≤M} R^{−2m} · sup_{ν≤√R} |a_m(ν)|, with the sup taken on a fine ν lattice.
pub fn uniform_coefficient_sum(big_r: f64, order: usize) -> f64 {
    let nu_max = big_r.sqrt();
    let samples = 400;
    let mut total = 0.0;
    for m in 0..=order {
        let mut sup: f64 = 0.0;
        for i in 0..=samples {
            let nu = nu_max * i as f64 / samples as f64;
            sup = sup.max(asym_coeff(m, nu).a.abs());
        }
        total += sup * big_r.powi(-2 * m as i32);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn leading_coefficients() {
        let c = asym_coeff(0, 3.0);
        assert_eq!(c.a, 1.0);
        assert!((c.b - (9.0 - 0.25) / 2.0).abs() < 1e-15);
        // b_0 against the Gamma ratio Γ(ν+3/2)/(2Γ(ν−1/2)) at ν = 3
        let ratio = gamma(4.5) / (2.0 * gamma(2.5));
        assert!((c.b - ratio).abs() < 1e-12);
    }

    #[test]
    fn a1_at_zero_order() {
        assert!((asym_coeff(1, 0.0).a + 9.0 / 128.0).abs() < 1e-16);
    }

    #[test]
    fn half_integer_terminates() {
        assert_eq!(asym_coeff(2, 0.5).a, 0.0);
        assert_eq!(asym_coeff(1, 0.5).a, 0.0);
        assert_eq!(asym_coeff(0, 0.5).b, 0.0);
        let r = 50.0;
        let v = eval_asymptotic(0.5, r, 1).unwrap();
        assert!((v - (2.0 / (PI * r)).sqrt() * r.sin()).abs() < 1e-15);
    }

    #[test]
    fn j0_at_hundred() {
        // J_0(100) = 0.019985850304223122
        let v = eval_asymptotic(0.0, 100.0, 6).unwrap();
        assert!((v - 0.019_985_850_304_223_122).abs() < 1e-12);
    }

    #[test]
    fn threshold_enforced() {
        assert!(matches!(eval_asymptotic(4.0, 20.0, 6), Err(Error::Regime(_))));
        assert!(eval_asymptotic(4.0, 40.0, 6).is_ok());
    }

    #[test]
    fn uniform_sum_is_bounded() {
        for k in 4..=12 {
            let s = uniform_coefficient_sum(2f64.powi(k), 8);
            assert!(s < 2.0, "R = 2^{k}: {s}");
        }
    }
}
