//! Sinc quadrature for `1/z = (2/√π) ∫₀^∞ exp(−z²t²) dt`.
//!
//! With `t = c·sinh(u)` the integrand decays double-exponentially in `u` and
//! the trapezoidal rule on `u_k = k·h_K` converges like `exp(−π²/(2h_K))`.
//! The rule is symmetric in `u`, so the nodes `±u_k` fold into one node with
//! doubled weight; `k = 0` keeps its single weight. The scale `c = 1/z_max`
//! keeps the product `z·c` below one on the whole interval, which is what the
//! strip-of-analyticity bound needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CQ: f64 = std::f64::consts::FRAC_PI_2;

const SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub k: usize,
    /// `t_k`, ascending, `t_0 = 0`.
    pub nodes: Vec<f64>,
    /// `a_k > 0`.
    pub weights: Vec<f64>,
    /// Step `h_K` in the substituted variable.
    pub step: f64,
    pub scale: f64,
    pub interval: (f64, f64),
    pub expected_error: f64,
    /// Max relative error over log-spaced samples of `interval`.
    pub measured_error: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_k a_k exp(−t_k² z²)`.
    pub fn eval(&self, z: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, a)| a * (-(t * z) * (t * z)).exp())
            .sum()
    }

    pub fn max_relative_error(&self, z_min: f64, z_max: f64, samples: usize) -> f64 {
        let (l0, l1) = (z_min.ln(), z_max.ln());
        (0..samples)
            .map(|i| {
                let z = (l0 + (l1 - l0) * i as f64 / (samples - 1) as f64).exp();
                (self.eval(z) * z - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn build_quadrature(k: usize, z_min: f64, z_max: f64) -> Result<QuadratureRule> {
    build_quadrature_with(k, z_min, z_max, DEFAULT_CQ)
}

pub fn build_quadrature_with(k: usize, z_min: f64, z_max: f64, cq: f64) -> Result<QuadratureRule> {
    if k < 1 {
        return Err(Error::InvalidArgument("quadrature needs K ≥ 1".into()));
    }
    if !(z_min > 0.0 && z_max > z_min && z_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "validation interval [{z_min}, {z_max}] must satisfy 0 < z_min < z_max"
        )));
    }
    let step = cq / (k as f64).sqrt();
    let scale = 1.0 / z_max;
    let pref = 2.0 * scale * step / std::f64::consts::PI.sqrt();
    let mut nodes = Vec::with_capacity(2 * k + 1);
    let mut weights = Vec::with_capacity(2 * k + 1);
    for j in 0..=2 * k {
        let u = j as f64 * step;
        nodes.push(scale * u.sinh());
        let a = pref * u.cosh();
        weights.push(if j == 0 { 0.5 * a } else { a });
    }
    let t_max = *nodes.last().unwrap_or(&0.0);
    let expected_error =
        (4.0 * (-std::f64::consts::PI.powi(2) / (2.0 * step)).exp() + libm::erfc(z_min * t_max)).max(1e-13);
    let mut rule = QuadratureRule {
        k,
        nodes,
        weights,
        step,
        scale,
        interval: (z_min, z_max),
        expected_error,
        measured_error: 0.0,
    };
    rule.measured_error = rule.max_relative_error(z_min, z_max, SAMPLES);
    if !rule.measured_error.is_finite() || rule.measured_error > 10.0 * expected_error {
        return Err(Error::ConstructionFailure(format!(
            "quadrature with K={k} on [{z_min}, {z_max}]: measured error {:.3e} exceeds 10× expected {:.3e}",
            rule.measured_error, expected_error
        )));
    }
    Ok(rule)
}
