//! Smooth cutoffs: the spectral bump β, its partition-of-unity variant, and χ_δ.

/// Width parameter of χ_δ.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Standard C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// χ_δ: 1 on [−δ, δ], 0 outside [−2δ, 2δ].
pub fn chi_delta(theta: f64, delta: f64) -> f64 {
    smooth_step((2.0 * delta - theta.abs()) / delta)
}

/// exp(−1/(x−1))·exp(−1/(2−x)) scaled to peak value 1; support [1, 2].
pub fn bump(x: f64) -> f64 {
    if x <= 1.0 || x >= 2.0 {
        return 0.0;
    }
    (4.0 - 1.0 / (x - 1.0) - 1.0 / (2.0 - x)).exp()
}

/// Partition variant φ(x) − φ(2x) with φ = 1 on [0, 1], 0 on [2, ∞).
///
/// Σ_{N dyadic} partition_bump(ρ/N) = 1 for every ρ > 0. Its support is
/// [1/2, 2], not [1, 2]: no function supported in [1, 2] can sum to one
/// over dyadic dilations.
pub fn partition_bump(x: f64) -> f64 {
    if x <= 0.5 || x >= 2.0 {
        return 0.0;
    }
    phi(x) - phi(2.0 * x)
}

fn phi(x: f64) -> f64 {
    smooth_step(2.0 - x)
}

/// Which β profile a cutoff uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    #[default]
    Standard,
    Partition,
}

impl BumpKind {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BumpKind::Standard => bump(x),
            BumpKind::Partition => partition_bump(x),
        }
    }

    /// Interval outside which the profile vanishes.
    pub fn support(self) -> (f64, f64) {
        match self {
            BumpKind::Standard => (1.0, 2.0),
            BumpKind::Partition => (0.5, 2.0),
        }
    }
}

/// β(·/N) for a dyadic frequency center N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub kind: BumpKind,
    pub n: f64,
}

impl CutoffProfile {
    pub fn new(kind: BumpKind, n: f64) -> Self {
        CutoffProfile { kind, n }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.kind.eval(rho / self.n)
    }
}
