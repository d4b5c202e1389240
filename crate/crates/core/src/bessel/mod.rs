//! Bessel functions of the first kind J_ν(r) for real ν ≥ 0, r ≥ 0.
//!
//! Several independent evaluation methods sit behind [`BesselMethod`] and are
//! selected by name through [`methods`]. The `regime` method dispatches on the
//! (ν, r) quadrant; the `fast` method is the one the transform kernels use.

pub mod asymptotic;
pub mod phase;
pub mod recurrence;
pub mod schlafli;
pub mod series;

pub use asymptotic::{asym_coeff, eval_asymptotic, AsymCoeffs};
pub use phase::{eval_psi, eval_schlafli_pieces, PhaseKernelParams};
pub use recurrence::{eval_recurrence, miller_sequence};
pub use schlafli::{eval_e, eval_schlafli, sin_pi};
pub use series::eval_series;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::registry::Registry;
use once_cell::sync::Lazy;
use std::sync::Arc;

/// Constant of the transition envelope |J_ν(r)| ≤ C ν^{−1/3}(ν^{−1/3}|r−ν|+1)^{−1/4}.
///
/// The measured supremum is about 0.79 (first maximum past r = ν).
pub const TRANSITION_ENVELOPE: f64 = 1.0;

/// Regions of the (ν, r) quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselRegime {
    /// Small order fallback: ν < 1 and r ≤ 20.
    Series,
    /// r ≤ ν/2.
    SmallArgument,
    /// ν/2 ≤ r ≤ 2ν.
    Transition,
    /// r ≥ 2ν.
    Oscillatory,
}

impl BesselRegime {
    pub fn classify(nu: f64, r: f64) -> Self {
        if nu < 1.0 && r <= 20.0 {
            BesselRegime::Series
        } else if r <= 0.5 * nu {
            BesselRegime::SmallArgument
        } else if r <= 2.0 * nu {
            BesselRegime::Transition
        } else {
            BesselRegime::Oscillatory
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BesselRegime::Series => "series",
            BesselRegime::SmallArgument => "small_argument",
            BesselRegime::Transition => "transition",
            BesselRegime::Oscillatory => "oscillatory",
        }
    }
}

/// A way of evaluating J_ν(r).
pub trait BesselMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn eval(&self, nu: f64, r: f64) -> Result<f64>;
}

struct Series;
impl BesselMethod for Series {
    fn name(&self) -> &'static str {
        "series"
    }
    fn eval(&self, nu: f64, r: f64) -> Result<f64> {
        eval_series(nu, r)
    }
}

struct Schlafli;
impl BesselMethod for Schlafli {
    fn name(&self) -> &'static str {
        "schlafli"
    }
    fn eval(&self, nu: f64, r: f64) -> Result<f64> {
        eval_schlafli(nu, r)
    }
}

/// Large-argument expansion truncated at `order`.
pub struct Asymptotic {
    pub order: usize,
}
impl BesselMethod for Asymptotic {
    fn name(&self) -> &'static str {
        "asymptotic"
    }
    fn eval(&self, nu: f64, r: f64) -> Result<f64> {
        eval_asymptotic(nu, r, self.order)
    }
}

struct Recurrence;
impl BesselMethod for Recurrence {
    fn name(&self) -> &'static str {
        "recurrence"
    }
    fn eval(&self, nu: f64, r: f64) -> Result<f64> {
        eval_recurrence(nu, r)
    }
}

struct Regime;
impl BesselMethod for Regime {
    fn name(&self) -> &'static str {
        "regime"
    }
    fn eval(&self, nu: f64, r: f64) -> Result<f64> {
        eval(nu, r)
    }
}

struct Fast;
impl BesselMethod for Fast {
    fn name(&self) -> &'static str {
        "fast"
    }
    fn eval(&self, nu: f64, r: f64) -> Result<f64> {
        series::check_domain(nu, r)?;
        Ok(eval_fast(nu, r))
    }
}

static METHODS: Lazy<Registry<dyn BesselMethod>> = Lazy::new(|| {
    let mut reg: Registry<dyn BesselMethod> = Registry::new("bessel method");
    reg.register("regime", Arc::new(Regime))
        .register("series", Arc::new(Series))
        .register("schlafli", Arc::new(Schlafli))
        .register(
            "asymptotic",
            Arc::new(Asymptotic {
                order: asymptotic::DEFAULT_ORDER,
            }),
        )
        .register("recurrence", Arc::new(Recurrence))
        .register("fast", Arc::new(Fast));
    reg
});

/// All registered evaluation methods.
pub fn methods() -> &'static Registry<dyn BesselMethod> {
    &METHODS
}

/// Name of the method `eval` picks at (ν, r).
pub fn dispatch_method(nu: f64, r: f64) -> &'static str {
    if r == 0.0 {
        return "series";
    }
    match BesselRegime::classify(nu, r) {
        BesselRegime::Series | BesselRegime::SmallArgument => "series",
        BesselRegime::Transition => "schlafli",
        BesselRegime::Oscillatory => {
            if r >= asymptotic::asymptotic_threshold(nu) {
                "asymptotic"
            } else {
                "schlafli"
            }
        }
    }
}

/// J_ν(r) by regime dispatch.
pub fn eval(nu: f64, r: f64) -> Result<f64> {
    series::check_domain(nu, r)?;
    match dispatch_method(nu, r) {
        "series" => eval_series(nu, r),
        "asymptotic" => eval_asymptotic(nu, r, asymptotic::DEFAULT_ORDER),
        _ => {
            let v = eval_schlafli(nu, r)?;
            if BesselRegime::classify(nu, r) == BesselRegime::Transition {
                let env = transition_envelope(nu, r);
                if v.abs() > TRANSITION_ENVELOPE * env {
                    return Err(Error::Regime(format!(
                        "transition envelope violated at nu = {nu}, r = {r}: |J| = {} > {}",
                        v.abs(),
                        TRANSITION_ENVELOPE * env
                    )));
                }
            }
            Ok(v)
        }
    }
}

/// ν^{−1/3}(ν^{−1/3}|r−ν| + 1)^{−1/4}.
pub fn transition_envelope(nu: f64, r: f64) -> f64 {
    let c = nu.cbrt().recip();
    c * (c * (r - nu).abs() + 1.0).powf(-0.25)
}

/// J_ν(r) without error plumbing, for inner loops.
///
/// Series while its terms do not grow (or r ≤ 8), the expansion once
/// r ≥ max(2ν², 10), Miller's recurrence in between.
pub fn eval_fast(nu: f64, r: f64) -> f64 {
    if r <= 8.0 || r * r <= 4.0 * (nu + 1.0) {
        series::series_unchecked(nu, r)
    } else if r >= asymptotic::asymptotic_threshold(nu) {
        asymptotic::asymptotic_unchecked(nu, r, asymptotic::DEFAULT_ORDER)
    } else {
        let k = nu.floor();
        miller_sequence(nu - k, r, k as usize)[k as usize]
    }
}

/// (rρ)^{−p}·J_ν(rρ) style kernel value z^{−p} J_ν(z), finite at z = 0 when p ≤ ν.
pub fn eval_scaled(nu: f64, p: f64, z: f64) -> f64 {
    if z <= 8.0 {
        series::scaled_series(nu, p, z)
    } else if p == 0.0 {
        eval_fast(nu, z)
    } else {
        eval_fast(nu, z) * z.powf(-p)
    }
}

/// J_{μ+k}(x) for k = 0..=kmax, choosing the cheapest accurate route.
pub fn eval_sequence(mu: f64, x: f64, kmax: usize) -> Vec<f64> {
    if x >= 20.0 && mu + kmax as f64 + 1.0 < x && x >= asymptotic::asymptotic_threshold(mu + 1.0) {
        // forward recurrence is stable below the turning point
        let mut out = Vec::with_capacity(kmax + 1);
        out.push(asymptotic::asymptotic_unchecked(mu, x, asymptotic::DEFAULT_ORDER));
        if kmax >= 1 {
            out.push(asymptotic::asymptotic_unchecked(mu + 1.0, x, asymptotic::DEFAULT_ORDER));
        }
        for k in 1..kmax {
            let next = 2.0 * (mu + k as f64) / x * out[k] - out[k - 1];
            out.push(next);
        }
        out
    } else if x <= 8.0 {
        (0..=kmax)
            .map(|k| series::series_unchecked(mu + k as f64, x))
            .collect()
    } else {
        let shift = mu.floor() as usize;
        miller_sequence(mu - shift as f64, x, kmax + shift).split_off(shift)
    }
}

/// ∫_R^{2R} J_{μ+k}(r)² dr for k = 0..=kmax.
///
/// GL-20 on unit panels; J² oscillates with period about π.
pub fn annulus_energies(mu: f64, kmax: usize, big_r: f64) -> Result<Vec<f64>> {
    series::check_domain(mu, big_r)?;
    if !(big_r > 0.0) || !big_r.is_finite() {
        return Err(Error::Domain(format!("annulus needs R > 0; got {big_r}")));
    }
    let panels = (big_r.ceil() as usize).max(8);
    let (xs, ws) = GaussLegendre::cached(20).composite(big_r, 2.0 * big_r, panels);
    let mut total = vec![0.0; kmax + 1];
    for (&x, &w) in xs.iter().zip(&ws) {
        for (t, j) in total.iter_mut().zip(eval_sequence(mu, x, kmax)) {
            *t += w * j * j;
        }
    }
    Ok(total)
}
