//! Radial quadrature grids for the measure r^{n−1} dr.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Node layout of a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    /// r_i = i·h, i = 1..=count, trapezoid weights.
    Uniform,
    /// Midpoint rule in x = ln r on [ln r_min, ln r_max].
    LogUniform { r_min: f64 },
}

impl Default for GridKind {
    fn default() -> Self {
        GridKind::LogUniform { r_min: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    pub n: u32,
    pub kind: GridKind,
    pub r_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Step in ln r for log grids.
    pub fn log_step(&self) -> Option<f64> {
        match self.kind {
            GridKind::LogUniform { r_min } => Some((self.r_max / r_min).ln() / self.len() as f64),
            GridKind::Uniform => None,
        }
    }

    /// Step in r for uniform grids.
    pub fn step(&self) -> Option<f64> {
        match self.kind {
            GridKind::Uniform => Some(self.r_max / self.len() as f64),
            GridKind::LogUniform { .. } => None,
        }
    }

    /// Σ w_i |f_i|².
    pub fn norm_sqr<T: Copy + Into<num_complex::Complex64>>(&self, f: &[T]) -> f64 {
        self.weights
            .iter()
            .zip(f)
            .map(|(w, &v)| w * v.into().norm_sqr())
            .sum()
    }

    /// Index of the node closest to r.
    pub fn nearest(&self, r: f64) -> usize {
        match self.nodes.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.len() => self.len() - 1,
            Err(i) => {
                if r - self.nodes[i - 1] < self.nodes[i] - r {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

/// Builds a grid of `count` nodes on (0, r_max].
pub fn make_grid(n: u32, r_max: f64, count: usize, kind: GridKind) -> Result<RadialGrid> {
    if count < 16 {
        return Err(Error::InvalidParameter(format!(
            "grid count must be >= 16; got {count}"
        )));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid r_max must be positive; got {r_max}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("grid dimension must be >= 1".into()));
    }
    let nf = n as f64;
    let (nodes, weights) = match kind {
        GridKind::Uniform => {
            let h = r_max / count as f64;
            let mut nodes: Vec<f64> = (1..=count).map(|i| i as f64 * h).collect();
            nodes[count - 1] = r_max;
            let mut weights: Vec<f64> = nodes.iter().map(|r| r.powf(nf - 1.0) * h).collect();
            weights[count - 1] *= 0.5;
            (nodes, weights)
        }
        GridKind::LogUniform { r_min } => {
            if !(r_min > 0.0 && r_min < r_max) {
                return Err(Error::InvalidParameter(format!(
                    "log grid needs 0 < r_min < r_max; got r_min = {r_min}, r_max = {r_max}"
                )));
            }
            let x0 = r_min.ln();
            let dx = (r_max / r_min).ln() / count as f64;
            let nodes: Vec<f64> = (0..count)
                .map(|i| (x0 + (i as f64 + 0.5) * dx).exp())
                .collect();
            let weights = nodes.iter().map(|r| r.powf(nf) * dx).collect();
            (nodes, weights)
        }
    };
    Ok(RadialGrid {
        n,
        kind,
        r_max,
        nodes,
        weights,
    })
}
