//! Real-line fractional operators.

pub mod cesaro;
pub mod norm;
pub mod rl;
pub mod weyl;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::func::{Decay, RealFn};

/// A positive fractional order together with `n = floor(alpha) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Order {
    alpha: f64,
    n: u32,
}

impl Order {
    pub fn new(alpha: f64) -> Result<Order> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("order must be positive and finite, got {alpha}")));
        }
        Ok(Order { alpha, n: alpha.floor() as u32 + 1 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The integer with `n > alpha >= n - 1`.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_integer(&self) -> bool {
        self.alpha.fract() == 0.0
    }
}

/// `f`'s own breaks plus a geometric ladder around its decay scale, so that
/// rescaled integrals resolve the region where `f` lives for any evaluation point.
pub(crate) fn scale_breaks(f: &RealFn) -> Vec<f64> {
    let scale = match f.decay() {
        Decay::Exponential { rate } => 1.0 / rate,
        _ => 1.0,
    };
    let mut out = f.breaks().to_vec();
    out.extend((-6..=6).map(|k| scale * 2f64.powi(k)));
    out
}

pub(crate) fn positive_point(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("evaluation point must be positive, got {t}")));
    }
    Ok(())
}
