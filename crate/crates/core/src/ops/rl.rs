//! Riemann-Liouville integrals and the reflection `Theta_a f(x) = x^(a-1) f(1/x)`.

use crate::error::Result;
use crate::func::{Decay, RealFn};
use crate::numerics::adaptive::jacobi_weighted;
use crate::numerics::special::gamma_fn;
use crate::numerics::{Estimate, Tolerance};
use crate::ops::{positive_point, scale_breaks, Order};

/// `D^-a f(x) = (1/Gamma(a)) int_0^x (x - y)^(a-1) f(y) dy`.
pub fn riemann_liouville_integral(f: &RealFn, alpha: f64, x: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(x)?;
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let a = order.alpha();
    let breaks: Vec<f64> = scale_breaks(f).iter().filter(|b| **b < x).map(|b| b / x).collect();
    let e = jacobi_weighted(&|u: f64| f.eval(x * u), a, &breaks, Tolerance::default())?;
    let scale = x.powf(a) / gamma_fn(a)?;
    Ok(Estimate::new(e.value * scale, e.error * scale))
}

/// `D^-a f` as a function. For integrable `f` it grows like `x^(a-1)`.
pub fn riemann_liouville_fn(f: &RealFn, alpha: f64) -> Result<RealFn> {
    let order = Order::new(alpha)?;
    let inner = f.clone();
    Ok(RealFn::derived(
        move |x| riemann_liouville_integral(&inner, order.alpha(), x).map(|e| e.value).unwrap_or(f64::NAN),
        Decay::Algebraic { power: 1.0 - order.alpha() },
        f.smoothness(),
        f.breaks().to_vec(),
        f.is_zero(),
    ))
}

/// `Theta_a f(x) = x^(a-1) f(1/x)`.
///
/// Compact support `[a, b]` with `a > 0` maps to `[1/b, 1/a]`; otherwise the
/// image is tagged with algebraic decay `x^(a-1)`, which assumes `f` is
/// bounded near the origin.
pub fn theta_isometry(f: &RealFn, alpha: f64) -> Result<RealFn> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let decay = match f.decay() {
        Decay::CompactSupport { a: lo, b: hi } if lo > 0.0 => Decay::CompactSupport { a: 1.0 / hi, b: 1.0 / lo },
        _ => Decay::Algebraic { power: 1.0 - a },
    };
    let breaks = f.breaks().iter().map(|b| 1.0 / b).collect();
    let inner = f.clone();
    Ok(RealFn::derived(
        move |x| x.powf(a - 1.0) * inner.eval(1.0 / x),
        decay,
        f.smoothness(),
        breaks,
        f.is_zero(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rl_examples() {
        let one = RealFn::new(|_| 1.0, Decay::Algebraic { power: 0.0 }, crate::func::Smoothness::Smooth).unwrap();
        assert!((riemann_liouville_integral(&one, 1.0, 2.0).unwrap().value - 2.0).abs() < 1e-12);
        assert!((riemann_liouville_integral(&one, 2.0, 3.0).unwrap().value - 4.5).abs() < 1e-12);
        let v = riemann_liouville_integral(&one, 0.5, 1.0).unwrap().value;
        assert!((v - 1.1283791670955126).abs() < 1e-12);
    }

    #[test]
    fn theta_reflects_indicator() {
        let f = RealFn::indicator(0.0, 1.0).unwrap();
        let g = theta_isometry(&f, 1.0).unwrap();
        assert_eq!(g.eval(0.5), 0.0);
        assert_eq!(g.eval(2.0), 1.0);
    }

    #[test]
    fn theta_is_an_involution() {
        let f = RealFn::exponential(1.0).unwrap();
        for alpha in [0.5, 1.3, 2.0] {
            let g = theta_isometry(&theta_isometry(&f, alpha).unwrap(), alpha).unwrap();
            for x in [0.2, 1.0, 3.0] {
                assert!((g.eval(x) - f.eval(x)).abs() < 1e-14);
            }
        }
    }
}
