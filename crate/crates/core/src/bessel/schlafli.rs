use super::series::check_domain;
use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre};
use std::f64::consts::PI;

/// Imaginary residue allowed in the Schläfli oscillatory integral.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Constant C in |E_ν(r)| ≤ C/(r+ν); sinh s ≥ s gives C = 1/π.
pub const E_BOUND_CONSTANT: f64 = 1.0 / PI;

/// sin(πx) that is exactly zero at integers and exactly ±1 at half-integers.
pub fn sin_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y == 0.0 || y == 1.0 {
        return 0.0;
    }
    let (y, sign) = if y > 1.0 { (y - 1.0, -1.0) } else { (y, 1.0) };
    let y = if y > 0.5 { 1.0 - y } else { y };
    sign * (PI * y).sin()
}

/// The correction E_ν(r) = (sin νπ / π) ∫₀^∞ e^{−(r sinh s + ν s)} ds.
pub fn eval_e(nu: f64, r: f64) -> Result<f64> {
    check_domain(nu, r)?;
    if r == 0.0 {
        return Err(Error::Domain("E_nu requires r > 0".into()));
    }
    let s = sin_pi(nu);
    if s == 0.0 {
        return Ok(0.0);
    }
    // e^{-r sinh S} < 1e-16
    let upper = (36.9 / r).asinh();
    let integral = quad::adaptive(0.0, upper, 1e-17, 1e-14, 2000, |t| {
        (-(r * t.sinh() + nu * t)).exp()
    })?;
    Ok(s / PI * integral)
}

/// The oscillatory part J̃_ν(r) = (1/2π)∫_{−π}^{π} e^{i(r sin θ − νθ)} dθ as (re, im).
pub fn schlafli_oscillatory(nu: f64, r: f64) -> (f64, f64) {
    let (re, im) = oscillatory_integral(nu, r, -PI, PI, PI, |_| 1.0);
    (re / (2.0 * PI), im / (2.0 * PI))
}

/// Composite GL-10 integral of w(θ)·e^{i(r sin θ − νθ)} over [a, b] with
/// panels no wider than a quarter of the local phase period.
///
/// `max_width` additionally caps the panel width when the weight has
/// structure of its own.
pub(crate) fn oscillatory_integral<W: Fn(f64) -> f64>(
    nu: f64,
    r: f64,
    a: f64,
    b: f64,
    max_width: f64,
    weight: W,
) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let width = max_width
        .min(PI / 8.0)
        .min(PI / (2.0 * (r + nu).max(1e-300)));
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let rule = GaussLegendre::cached(10);
    let h = (b - a) / panels as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let (mut pr, mut pi) = (0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let th = lo + 0.5 * h * (x + 1.0);
            let wt = weight(th);
            if wt == 0.0 {
                continue;
            }
            let (s, c) = (r * th.sin() - nu * th).sin_cos();
            pr += w * wt * c;
            pi += w * wt * s;
        }
        re += 0.5 * h * pr;
        im += 0.5 * h * pi;
    }
    (re, im)
}

/// J_ν(r) from Schläfli's representation, J̃_ν(r) − E_ν(r).
pub fn eval_schlafli(nu: f64, r: f64) -> Result<f64> {
    check_domain(nu, r)?;
    if r > 1e6 {
        return Err(Error::Regime(format!(
            "Schlafli quadrature limited to r <= 1e6; got r = {r}"
        )));
    }
    if r == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let (re, im) = schlafli_oscillatory(nu, r);
    if im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::Quadrature {
            context: format!("Schlafli integral at nu = {nu}, r = {r}"),
            residual: im.abs(),
            threshold: IMAG_RESIDUE_TOL,
        });
    }
    Ok(re - eval_e(nu, r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::series::eval_series;

    #[test]
    fn sin_pi_exact_at_special_points() {
        assert_eq!(sin_pi(4.0), 0.0);
        assert_eq!(sin_pi(-3.0), 0.0);
        assert_eq!(sin_pi(0.5), 1.0);
        assert_eq!(sin_pi(1.5), -1.0);
        assert!((sin_pi(0.25) - (PI / 4.0).sin()).abs() < 1e-16);
    }

    #[test]
    fn e_vanishes_for_integer_order() {
        assert_eq!(eval_e(4.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn e_half_order_against_refined_oracle() {
        // oracle: plain trapezoid on a long, very fine grid
        let (nu, r) = (0.5, 10.0);
        let n = 400_000;
        let upper = 6.0;
        let h = upper / n as f64;
        let f = |s: f64| (-(r * f64::sinh(s) + nu * s)).exp();
        let mut acc = 0.5 * (f(0.0) + f(upper));
        for i in 1..n {
            acc += f(i as f64 * h);
        }
        let oracle = acc * h / PI;
        let e = eval_e(nu, r).unwrap();
        assert!(e > 0.0);
        assert!(e <= E_BOUND_CONSTANT / (r + nu));
        assert!((e - oracle).abs() < 1e-10, "{e} vs {oracle}");
    }

    #[test]
    fn e_decays_like_inverse_r() {
        let e = eval_e(0.5, 1e4).unwrap();
        assert!(e.abs() <= 1e-4 * E_BOUND_CONSTANT);
    }

    #[test]
    fn integer_order_matches_series() {
        let s = eval_schlafli(3.0, 2.0).unwrap();
        assert!((s - eval_series(3.0, 2.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn near_origin() {
        assert!((eval_schlafli(0.0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_orders_match_series() {
        for &(nu, r) in &[(0.3, 0.7), (2.5, 4.0), (5.0, 5.0), (7.25, 12.0)] {
            let a = eval_schlafli(nu, r).unwrap();
            let b = eval_series(nu, r).unwrap();
            assert!((a - b).abs() < 1e-12, "nu = {nu}, r = {r}: {a} vs {b}");
        }
    }
}
