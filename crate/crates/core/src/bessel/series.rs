use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Power series for J_ν(r).
///
/// Terms are generated by the ratio recurrence and summed relative to the
/// leading term, whose magnitude is carried in log space so that large ν
/// neither overflows nor underflows prematurely.
pub fn eval_series(nu: f64, r: f64) -> Result<f64> {
    check_domain(nu, r)?;
    if r > 20.0_f64.max(nu) {
        return Err(Error::Regime(format!(
            "series requires r <= max(20, nu); got nu = {nu}, r = {r}"
        )));
    }
    Ok(series_unchecked(nu, r))
}

pub(crate) fn check_domain(nu: f64, r: f64) -> Result<()> {
    if !(nu >= 0.0) || !(r >= 0.0) || !nu.is_finite() || !r.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel J requires finite nu >= 0 and r >= 0; got nu = {nu}, r = {r}"
        )));
    }
    Ok(())
}

pub(crate) fn series_unchecked(nu: f64, r: f64) -> f64 {
    scaled_series(nu, 0.0, r)
}

/// r^{-p}·J_ν(r) via the series, finite as r → 0 when p ≤ ν.
pub(crate) fn scaled_series(nu: f64, p: f64, r: f64) -> f64 {
    if r == 0.0 {
        return if nu == p {
            if nu == 0.0 {
                return 1.0;
            }
            (-(nu * std::f64::consts::LN_2) - ln_gamma(nu + 1.0)).exp()
        } else {
            0.0
        };
    }
    let ln_t0 = nu * (0.5 * r).ln() - p * r.ln() - ln_gamma(nu + 1.0);
    let q = 0.25 * r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        term *= -q / ((m + 1.0) * (nu + m + 1.0));
        sum += term;
        m += 1.0;
        if (term.abs() < 1e-18 * sum.abs() && m * (nu + m) > q) || m > 10_000.0 {
            break;
        }
    }
    if sum == 0.0 {
        return 0.0;
    }
    sum.signum() * (ln_t0 + sum.abs().ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_term_at_origin() {
        assert_eq!(eval_series(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(eval_series(2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_integer_closed_form() {
        // cancellation in the alternating sum costs about e^r ulps
        for &r in &[0.3, 1.0, 2.5, PI, 7.0, 15.0] {
            let exact = (2.0 / (PI * r)).sqrt() * r.sin();
            let tol = 1e-15 * r.exp().max(100.0);
            assert!((eval_series(0.5, r).unwrap() - exact).abs() < tol, "r = {r}");
        }
        assert!(eval_series(0.5, PI).unwrap().abs() < 1e-14);
    }

    #[test]
    fn j0_at_one() {
        assert!((eval_series(0.0, 1.0).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-14);
    }

    #[test]
    fn huge_order_small_argument_underflows_gracefully() {
        let v = eval_series(400.0, 3.0).unwrap();
        assert!((0.0..1e-300).contains(&v));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(eval_series(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(eval_series(0.0, 50.0), Err(Error::Regime(_))));
    }

    #[test]
    fn scaled_series_limit() {
        // r^{-1} J_1(r) -> 1/2
        assert!((scaled_series(1.0, 1.0, 0.0) - 0.5).abs() < 1e-15);
        assert!((scaled_series(1.0, 1.0, 1e-6) - 0.5).abs() < 1e-12);
    }
}
