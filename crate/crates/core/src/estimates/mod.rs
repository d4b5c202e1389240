//! Mixed norms, localized restriction estimates, dyadic scans and the
//! Strichartz ratio.

pub mod generators;
pub mod norms;
pub mod scan;
pub mod strichartz;
pub mod whitney;

pub use generators::{generators, CoefficientGenerator};
pub use norms::{angular_l2_profile, mixed_norm, LocalizedDatum, ProfileSamples, SamplingOptions};
pub use scan::{dyadic_scan, dyadic_scans, localized_ratio, trend, RatioRow, ScanReport, ScanSetup};
pub use strichartz::{strichartz_ratio, strichartz_ratio_with, StrichartzMethod, StrichartzResult};
pub use whitney::{whitney_decompose, WhitneyPair};

use crate::error::{Error, Result};
use crate::registry::Registry;
use once_cell::sync::Lazy;
use serde::Serialize;
use std::sync::Arc;

/// Label of one of the six localized estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EstimateId {
    E31,
    E32,
    E33,
    E34,
    E35,
    E36,
}

impl EstimateId {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateId::E31 => "E31",
            EstimateId::E32 => "E32",
            EstimateId::E33 => "E33",
            EstimateId::E34 => "E34",
            EstimateId::E35 => "E35",
            EstimateId::E36 => "E36",
        }
    }
}

/// ν-weight multiplying |b_{ν,ℓ}|² on the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeightLaw {
    /// 1
    Unit,
    /// (1+ν)^{1/3}
    CubeRoot,
    /// (1+ν)^{4/q}
    FourOverQ,
    /// (1+ν)^{2/q+1/3}
    TwoOverQPlusThird,
    /// (1+ν)
    Linear,
}

impl WeightLaw {
    pub fn exponent(self, q: f64) -> f64 {
        let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
        match self {
            WeightLaw::Unit => 0.0,
            WeightLaw::CubeRoot => 1.0 / 3.0,
            WeightLaw::FourOverQ => 4.0 * inv_q,
            WeightLaw::TwoOverQPlusThird => 2.0 * inv_q + 1.0 / 3.0,
            WeightLaw::Linear => 1.0,
        }
    }
}

/// Exponents and weights of one localized estimate in dimension n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSpec {
    pub id: EstimateId,
    pub n: u32,
    /// Exponent of the right-hand ρ-norm.
    pub p: f64,
    /// Time and radial exponent on the left; may be infinite.
    pub q: f64,
    pub weight: WeightLaw,
    /// Envelope min{R^{e1}, R^{e2}}.
    pub envelope: (f64, f64),
    /// Slack exponent; nonzero only for E36.
    pub epsilon: f64,
}

impl EstimateSpec {
    pub fn envelope_at(&self, r: f64) -> f64 {
        r.powf(self.envelope.0).min(r.powf(self.envelope.1))
    }

    pub fn weight_at(&self, nu: f64) -> f64 {
        (1.0 + nu).powf(self.weight.exponent(self.q))
    }

    /// Same spec with a different weight law; used to show a weight is needed.
    pub fn with_weight(mut self, weight: WeightLaw) -> Self {
        self.weight = weight;
        self
    }

    /// Largest slope of the max-ratio trend that still counts as bounded.
    pub fn slope_tolerance(&self) -> f64 {
        if self.id == EstimateId::E36 {
            self.epsilon
        } else {
            0.05
        }
    }
}

/// Free parameters of the estimates that admit a choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct EstimateParams {
    /// p for E34 (2 ≤ p < 4) and E35 (1 ≤ p < 2); None picks the default.
    pub p: Option<f64>,
    /// ε for E36.
    pub epsilon: f64,
}

impl Default for EstimateParams {
    fn default() -> Self {
        EstimateParams {
            p: None,
            epsilon: 0.1,
        }
    }
}

/// Builds an [`EstimateSpec`] for a dimension and parameter set.
pub trait EstimateFamily: Send + Sync {
    fn id(&self) -> EstimateId;
    fn build(&self, n: u32, params: &EstimateParams) -> Result<EstimateSpec>;
}

fn dual(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

struct Family {
    id: EstimateId,
}

impl EstimateFamily for Family {
    fn id(&self) -> EstimateId {
        self.id
    }

    fn build(&self, n: u32, params: &EstimateParams) -> Result<EstimateSpec> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("estimates need n >= 2; got {n}")));
        }
        let nf = n as f64;
        let p = params.p;
        let spec = |p: f64, q: f64, weight, envelope, epsilon| EstimateSpec {
            id: self.id,
            n,
            p,
            q,
            weight,
            envelope,
            epsilon,
        };
        let sub = |q: f64| ((nf - 1.0) * (1.0 / q - 0.5), nf / q);
        Ok(match self.id {
            EstimateId::E31 => spec(2.0, 2.0, WeightLaw::Unit, (0.5, nf / 2.0), 0.0),
            EstimateId::E32 => spec(1.0, f64::INFINITY, WeightLaw::CubeRoot, (-(nf - 1.0) / 2.0, 0.0), 0.0),
            EstimateId::E33 => spec(2.0, f64::INFINITY, WeightLaw::Unit, (-(nf - 1.0) / 2.0, 0.0), 0.0),
            EstimateId::E34 => {
                let p = p.unwrap_or(3.0);
                if !(2.0..4.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!("E34 needs 2 <= p < 4; got p = {p}")));
                }
                let q = 3.0 * dual(p);
                spec(p, q, WeightLaw::FourOverQ, sub(q), 0.0)
            }
            EstimateId::E35 => {
                let p = p.unwrap_or(1.75);
                if !(1.0..2.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!("E35 needs 1 <= p < 2; got p = {p}")));
                }
                let q = 3.0 * dual(p);
                let env = if q.is_infinite() { (-(nf - 1.0) / 2.0, 0.0) } else { sub(q) };
                spec(p, q, WeightLaw::TwoOverQPlusThird, env, 0.0)
            }
            EstimateId::E36 => {
                let eps = params.epsilon;
                if !(eps > 0.0) {
                    return Err(Error::InvalidParameter(format!("E36 needs epsilon > 0; got {eps}")));
                }
                spec(4.0, 4.0, WeightLaw::Linear, (-(nf - 1.0) / 4.0 + eps, nf / 4.0), eps)
            }
        })
    }
}

static ESTIMATES: Lazy<Registry<dyn EstimateFamily>> = Lazy::new(|| {
    let mut reg: Registry<dyn EstimateFamily> = Registry::new("estimate");
    for id in [
        EstimateId::E31,
        EstimateId::E32,
        EstimateId::E33,
        EstimateId::E34,
        EstimateId::E35,
        EstimateId::E36,
    ] {
        reg.register(id.as_str(), Arc::new(Family { id }));
    }
    reg
});

pub fn estimates() -> &'static Registry<dyn EstimateFamily> {
    &ESTIMATES
}

/// Looks up an estimate by name and builds its spec.
pub fn estimate_spec(name: &str, n: u32, params: &EstimateParams) -> Result<EstimateSpec> {
    estimates().get(name)?.build(n, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_displays() {
        let d = EstimateParams::default();
        let e31 = estimate_spec("e31", 3, &d).unwrap();
        assert_eq!((e31.q, e31.p, e31.envelope), (2.0, 2.0, (0.5, 1.5)));
        let e32 = estimate_spec("E32", 2, &d).unwrap();
        assert!(e32.q.is_infinite());
        assert_eq!(e32.p, 1.0);
        assert!((e32.weight_at(7.0) - 2.0).abs() < 1e-14);
        let e34 = estimate_spec("E34", 2, &d).unwrap();
        assert!((e34.q - 4.5).abs() < 1e-14);
        assert!((e34.envelope.0 - (1.0 / 4.5 - 0.5)).abs() < 1e-14);
        let e35 = estimate_spec("E35", 2, &d).unwrap();
        assert!((e35.q - 7.0).abs() < 1e-12);
        assert!((e35.weight.exponent(e35.q) - (2.0 / 7.0 + 1.0 / 3.0)).abs() < 1e-12);
        let e36 = estimate_spec("E36", 2, &d).unwrap();
        assert_eq!(e36.envelope, (-0.25 + 0.1, 0.5));
        assert_eq!(e36.slope_tolerance(), 0.1);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let bad = EstimateParams { p: Some(4.0), epsilon: 0.1 };
        assert!(estimate_spec("E34", 2, &bad).is_err());
        let bad = EstimateParams { p: Some(2.0), epsilon: 0.1 };
        assert!(estimate_spec("E35", 2, &bad).is_err());
        let bad = EstimateParams { p: None, epsilon: 0.0 };
        assert!(estimate_spec("E36", 2, &bad).is_err());
        assert!(matches!(estimate_spec("E37", 2, &EstimateParams::default()), Err(Error::Unknown { .. })));
    }

    #[test]
    fn envelope_takes_the_minimum() {
        let e33 = estimate_spec("E33", 3, &EstimateParams::default()).unwrap();
        assert_eq!(e33.envelope_at(0.25), 1.0);
        assert!((e33.envelope_at(16.0) - 1.0 / 16.0).abs() < 1e-15);
    }
}
