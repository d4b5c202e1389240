//! Quadrature primitives: Gauss–Legendre rules and adaptive Gauss–Kronrod.

use crate::error::{Error, Result};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes an `order`-point rule by Newton iteration on P_order.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared cached rule of the given order.
    pub fn cached(order: usize) -> Arc<GaussLegendre> {
        static CACHE: Lazy<RwLock<HashMap<usize, Arc<GaussLegendre>>>> =
            Lazy::new(|| RwLock::new(HashMap::new()));
        if let Some(rule) = CACHE.read().unwrap().get(&order) {
            return rule.clone();
        }
        let rule = Arc::new(GaussLegendre::new(order));
        CACHE.write().unwrap().entry(order).or_insert(rule).clone()
    }

    /// Integrates `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Composite rule on `panels` equal panels; returns (nodes, weights) mapped to [a, b].
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(lo + 0.5 * h * (x + 1.0));
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One GK15 application: returns (Kronrod estimate, |Kronrod − Gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Globally adaptive GK15 on [a, b] with bisection of the worst interval.
pub fn adaptive<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
    mut f: F,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(a, b, &mut f);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if parts.len() >= max_intervals {
            return Err(Error::Quadrature {
                context: format!("adaptive GK15 on [{a}, {b}]"),
                residual: err,
                threshold: abs_tol.max(rel_tol * total.abs()),
            });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, v0, e0) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(lo, mid, &mut f);
        let (v2, e2) = gk15(mid, hi, &mut f);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // re-sum to remove drift from incremental updates
    Ok(parts.iter().map(|p| p.2).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 10, 32] {
            let rule = GaussLegendre::new(order);
            let deg = 2 * order - 1;
            let v = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "order {order}");
            let ws: f64 = rule.weights.iter().sum();
            assert!((ws - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gl10_nodes_match_tabulated() {
        let rule = GaussLegendre::new(10);
        assert!((rule.nodes[9] - 0.973_906_528_517_171_7).abs() < 1e-15);
        assert!((rule.weights[9] - 0.066_671_344_308_688_14).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive(-1.0, 1.0, 1e-13, 1e-13, 500, |x| 1.0 / (1e-4 + x * x)).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-11);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(0.0, 1.0, 1e-15, 0.0, 2, |x| (1.0 / (x + 1e-9)).sin());
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
