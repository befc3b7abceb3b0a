//! Norms on the range spaces and the checks built from them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::func::{Decay, RealFn};
use crate::numerics::adaptive::{halfline, Pair, Tail};
use crate::numerics::special::{beta_fn, gamma_fn};
use crate::numerics::Tolerance;
use crate::ops::rl::theta_isometry;
use crate::ops::weyl::weyl_derivative;
use crate::ops::Order;

/// `||f||_{2,(a)} = ||t^a W^a f||_2` with the propagated error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevNormResult {
    pub value: f64,
    pub quadrature_error: f64,
}

fn squared_tail(f: &RealFn) -> Tail {
    match f.decay() {
        Decay::CompactSupport { b, .. } => Tail::Compact { end: b },
        Decay::Exponential { rate } => Tail::Exponential { rate: 2.0 * rate },
        Decay::Algebraic { power } => Tail::Algebraic { power: 2.0 * power },
    }
}

/// `||f||_{2,(a)}`.
pub fn sobolev_norm(f: &RealFn, alpha: f64) -> Result<SobolevNormResult> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    if f.is_zero() {
        return Ok(SobolevNormResult { value: 0.0, quadrature_error: 0.0 });
    }
    // the second component integrates the first-order effect of the
    // pointwise derivative errors
    let integrand = |t: f64| {
        if t <= 0.0 {
            return Pair(0.0, 0.0);
        }
        match weyl_derivative(f, a, t) {
            Ok(w) => {
                let weight = t.powf(2.0 * a);
                Pair(weight * w.value * w.value, weight * 2.0 * w.value.abs() * w.error)
            }
            Err(_) => Pair(f64::NAN, f64::NAN),
        }
    };
    let tail = match squared_tail(f) {
        Tail::Algebraic { power } => Tail::Algebraic { power: power + 2.0 * a - 2.0 * a },
        other => other,
    };
    let e = halfline(&integrand, tail, f.breaks(), Tolerance::new(1e-14, 1e-8))?;
    let sq = e.value.0.max(0.0);
    let err = e.error + e.value.1;
    let value = sq.sqrt();
    let quadrature_error = if value > 0.0 { err / (2.0 * value) } else { err.sqrt() };
    Ok(SobolevNormResult { value, quadrature_error })
}

/// The constant `C` in `|W^a f(t)| t^(a + 1/2) <= C ||f||_{2,(b)}`,
/// `C = sqrt(B(2a + 1, 2(b - a) - 1)) / Gamma(b - a)`, valid for `b > a + 1/2`.
pub fn pointwise_bound_constant(alpha: f64, beta: f64) -> Result<f64> {
    Order::new(alpha)?;
    if !(beta > alpha + 0.5) {
        return Err(invalid(format!("need beta > alpha + 1/2, got alpha={alpha}, beta={beta}")));
    }
    Ok(beta_fn(2.0 * alpha + 1.0, 2.0 * (beta - alpha) - 1.0)?.sqrt() / gamma_fn(beta - alpha)?)
}

/// `|W^a f(t)| t^(a + 1/2) / ||f||_{2,(b)}` at each point of `ts`.
pub fn pointwise_bound_ratios(f: &RealFn, alpha: f64, beta: f64, ts: &[f64]) -> Result<Vec<f64>> {
    let norm = sobolev_norm(f, beta)?;
    if norm.value == 0.0 {
        return Ok(vec![0.0; ts.len()]);
    }
    ts.iter()
        .map(|&t| {
            let w = weyl_derivative(f, alpha, t)?;
            Ok(w.value.abs() * t.powf(alpha + 0.5) / norm.value)
        })
        .collect()
}

/// `(int |Theta_a f(x)|^2 x^(-2a) dx, int |f|^2)`; the two agree for every `a`.
pub fn theta_norm_pair(f: &RealFn, alpha: f64) -> Result<(f64, f64)> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let tol = Tolerance::new(1e-15, 1e-12);
    let direct = halfline(&|t| f.eval(t).powi(2), squared_tail(f), f.breaks(), tol)?;
    let phi = theta_isometry(f, a)?;
    let tail = match phi.decay() {
        Decay::CompactSupport { b, .. } => Tail::Compact { end: b },
        _ => Tail::Algebraic { power: 2.0 },
    };
    let mut breaks = phi.breaks().to_vec();
    breaks.extend([0.1, 1.0, 10.0]);
    let reflected = halfline(&|x| phi.eval(x).powi(2) * x.powf(-2.0 * a), tail, &breaks, tol)?;
    Ok((reflected.value, direct.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_exponential() {
        let r = sobolev_norm(&RealFn::exponential(1.0).unwrap(), 1.0).unwrap();
        assert!((r.value - 0.5).abs() < 1e-8, "{r:?}");
        let z = sobolev_norm(&RealFn::zero(), 1.3).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn fractional_norm_of_exponential() {
        // W^a e^-t = e^-t, so the norm is (Gamma(2a + 1) / 2^(2a + 1))^(1/2)
        let a = 0.7;
        let r = sobolev_norm(&RealFn::exponential(1.0).unwrap(), a).unwrap();
        let exact = (gamma_fn(2.0 * a + 1.0).unwrap() / 2f64.powf(2.0 * a + 1.0)).sqrt();
        assert!((r.value - exact).abs() < 1e-7, "{r:?} vs {exact}");
    }

    #[test]
    fn pointwise_ratios_below_constant() {
        let f = RealFn::exponential(1.0).unwrap();
        let c = pointwise_bound_constant(0.5, 1.5).unwrap();
        let ratios = pointwise_bound_ratios(&f, 0.5, 1.5, &[0.1, 1.0, 10.0]).unwrap();
        assert!(ratios.iter().all(|r| *r <= c), "{ratios:?} vs {c}");
    }

    #[test]
    fn theta_preserves_norm() {
        let f = RealFn::exponential(1.0).unwrap();
        for a in [0.0001, 0.5, 1.0, 1.7] {
            let (l, r) = theta_norm_pair(&f, a).unwrap();
            assert!((l - r).abs() < 1e-9, "a={a}: {l} vs {r}");
        }
    }
}
