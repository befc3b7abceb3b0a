//! Fractional Cesàro averages and their adjoints.
//!
//! `C_a f(t) = (a / t^a) int_0^t (t - u)^(a-1) f(u) du` and
//! `C*_a f(t) = a int_t^inf (u - t)^(a-1) u^(-a) f(u) du`.

use crate::error::{Error, Result};
use crate::func::{Decay, RealFn, Smoothness};
use crate::numerics::adaptive::{halfline, jacobi_weighted, origin_power_halfline, QuadValue, Tail};
use crate::numerics::special::gamma_fn;
use crate::numerics::{Estimate, Tolerance};
use crate::ops::{positive_point, scale_breaks, Order};

/// `C_a g(t)` for any integrand type; `breaks` are break points of `g`.
pub fn cesaro_plus_with<T: QuadValue, G: Fn(f64) -> T>(
    g: &G,
    alpha: f64,
    t: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    let xb: Vec<f64> = breaks.iter().filter(|b| **b < t).map(|b| b / t).collect();
    let e = jacobi_weighted(&|x: f64| g(t * x), alpha, &xb, tol)?;
    Ok(Estimate::new(e.value * alpha, e.error * alpha))
}

/// `C*_a g(t)` through `u = t / x`; `support_end` is where `g` vanishes for good.
pub fn cesaro_star_with<T: QuadValue, G: Fn(f64) -> T>(
    g: &G,
    alpha: f64,
    t: f64,
    breaks: &[f64],
    support_end: Option<f64>,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    let mut xb: Vec<f64> = breaks.iter().filter(|b| **b > t).map(|b| t / b).collect();
    if let Some(end) = support_end {
        if end <= t {
            return Ok(Estimate::new(T::zero(), 0.0));
        }
        xb.push(t / end);
    }
    let integrand = |x: f64| {
        if x <= 0.0 {
            return T::zero();
        }
        g(t / x) * (1.0 / x)
    };
    let e = jacobi_weighted(&integrand, alpha, &xb, tol)?;
    Ok(Estimate::new(e.value * alpha, e.error * alpha))
}

fn check_star_decay(f: &RealFn) -> Result<Option<f64>> {
    match f.decay() {
        Decay::CompactSupport { b, .. } => Ok(Some(b)),
        Decay::Exponential { .. } => Ok(None),
        Decay::Algebraic { power } if power > 0.0 => Ok(None),
        Decay::Algebraic { power } => Err(Error::UnsupportedFunction(format!(
            "C*_a needs decay at infinity; declared power {power}"
        ))),
    }
}

/// `C_a f(t)`.
pub fn cesaro_plus(f: &RealFn, alpha: f64, t: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    cesaro_plus_with(&|u| f.eval(u), order.alpha(), t, &scale_breaks(f), Tolerance::default())
}

/// `C*_a f(t)` by the direct substitution `u = t / x`.
pub fn cesaro_star(f: &RealFn, alpha: f64, t: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    let end = check_star_decay(f)?;
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    cesaro_star_with(&|u| f.eval(u), order.alpha(), t, &scale_breaks(f), end, Tolerance::default())
}

/// `C*_a f(t)` through its subordination to the dilation group:
/// `a int_0^inf (1 - e^(-s))^(a-1) f(e^s t) ds`.
pub fn cesaro_star_subordinated(f: &RealFn, alpha: f64, t: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    let end = check_star_decay(f)?;
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let a = order.alpha();
    let mut breaks: Vec<f64> = f.breaks().iter().filter(|b| **b > t).map(|b| (b / t).ln()).collect();
    let tail = match f.decay() {
        Decay::CompactSupport { .. } => {
            let end = end.unwrap_or(f64::INFINITY);
            if end <= t {
                return Ok(Estimate::new(0.0, 0.0));
            }
            Tail::Compact { end: (end / t).ln() }
        }
        Decay::Exponential { rate } => {
            let knee = (1.0 / (rate * t)).ln();
            if knee > 0.0 {
                breaks.push(knee);
            }
            Tail::Exponential { rate: 1.0 }
        }
        Decay::Algebraic { power } => Tail::Exponential { rate: power },
    };
    // (1 - e^-s)^(a-1) = s^(a-1) * ((1 - e^-s) / s)^(a-1)
    let g = |s: f64| {
        let ratio = if s == 0.0 { 1.0 } else { -(-s).exp_m1() / s };
        ratio.powf(a - 1.0) * f.eval((s).exp() * t)
    };
    let e = origin_power_halfline(&g, a, 1.0, tail, &breaks, Tolerance::default())?;
    Ok(Estimate::new(a * e.value, a * e.error))
}

/// `C_a f` as a function in its own right; decays like `1/t` when `f` is integrable.
pub fn cesaro_plus_fn(f: &RealFn, alpha: f64) -> Result<RealFn> {
    let order = Order::new(alpha)?;
    let inner = f.clone();
    Ok(RealFn::derived(
        move |t| cesaro_plus(&inner, order.alpha(), t).map(|e| e.value).unwrap_or(f64::NAN),
        Decay::Algebraic { power: 1.0 },
        Smoothness::Continuous,
        Vec::new(),
        f.is_zero(),
    ))
}

/// `C*_a f` as a function; it inherits the decay class of `f`.
pub fn cesaro_star_fn(f: &RealFn, alpha: f64) -> Result<RealFn> {
    let order = Order::new(alpha)?;
    check_star_decay(f)?;
    let inner = f.clone();
    let decay = match f.decay() {
        Decay::CompactSupport { b, .. } => Decay::CompactSupport { a: 0.0, b },
        other => other,
    };
    Ok(RealFn::derived(
        move |t| cesaro_star(&inner, order.alpha(), t).map(|e| e.value).unwrap_or(f64::NAN),
        decay,
        Smoothness::Continuous,
        f.breaks().to_vec(),
        f.is_zero(),
    ))
}

/// `|C*_a (C_b f)(t) - C_b (C*_a f)(t)|`.
pub fn commutation_residual(f: &RealFn, alpha: f64, beta: f64, t: f64) -> Result<Estimate<f64>> {
    let a = Order::new(alpha)?.alpha();
    let b = Order::new(beta)?.alpha();
    positive_point(t)?;
    let end = check_star_decay(f)?;
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    // nested at the default tolerance, the log singularity of C*_a f at 0
    // drives the outer rule down to u ~ 1e-15
    let tol = Tolerance::new(1e-13, 1e-10);
    let breaks = scale_breaks(f);
    let plus = |u: f64| cesaro_plus_with(&|v| f.eval(v), b, u, &breaks, tol).map_or(f64::NAN, |e| e.value);
    let left = cesaro_star_with(&plus, a, t, &breaks, end, tol)?;
    let star = |u: f64| cesaro_star_with(&|v| f.eval(v), a, u, &breaks, end, tol).map_or(f64::NAN, |e| e.value);
    let right = cesaro_plus_with(&star, b, t, &breaks, tol)?;
    Ok(Estimate::new((left.value - right.value).abs(), left.error + right.error))
}

/// Outcome of the L2 Hardy inequality check for `C*_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub error: f64,
}

impl HardyReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.error
    }
}

/// Compares `||C*_a g||_2` against `B_2 ||g||_2`,
/// `B_2 = Gamma(a + 1) Gamma(1/2) / Gamma(a + 1/2)`.
pub fn hardy_check(g: &RealFn, alpha: f64) -> Result<HardyReport> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let constant = gamma_fn(a + 1.0)? * gamma_fn(0.5)? / gamma_fn(a + 0.5)?;
    let tail = match g.decay() {
        Decay::CompactSupport { b, .. } => Tail::Compact { end: b },
        Decay::Exponential { rate } => Tail::Exponential { rate: 2.0 * rate },
        Decay::Algebraic { power } => Tail::Algebraic { power: 2.0 * power },
    };
    let tol = Tolerance::new(1e-12, 1e-10);
    let norm_g = halfline(&|t| g.eval(t).powi(2), tail, g.breaks(), tol)?;
    let star = cesaro_star_fn(g, a)?;
    let mut breaks = g.breaks().to_vec();
    breaks.extend([1e-6, 1e-4, 1e-2]);
    let norm_c = halfline(&|t| star.eval(t).powi(2), tail, &breaks, tol)?;
    let lhs = norm_c.value.sqrt();
    let rhs = constant * norm_g.value.sqrt();
    let error = norm_c.error / (2.0 * lhs.max(1e-300)) + constant * norm_g.error / (2.0 * norm_g.value.sqrt().max(1e-300));
    Ok(HardyReport { lhs, rhs, constant, error })
}
