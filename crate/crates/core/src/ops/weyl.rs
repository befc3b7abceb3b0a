//! Weyl fractional integrals and derivatives.
//!
//! `W^-a g(t) = (1/Gamma(a)) int_t^inf (s - t)^(a-1) g(s) ds`, and for
//! `n - 1 <= a < n`, `W^a f = (-1)^n d^n/dt^n W^-(n-a) f`.

use crate::error::{invalid, Error, Result};
use crate::func::{Decay, RealFn, Smoothness};
use crate::numerics::adaptive::{origin_power_halfline, Tail};
use crate::numerics::quad::{jacobi_rule, legendre_rule};
use crate::numerics::special::gamma_fn;
use crate::numerics::{Estimate, Tolerance};
use crate::ops::{positive_point, Order};

/// `W^-a g(t)`.
pub fn weyl_integral(g: &RealFn, alpha: f64, t: f64) -> Result<Estimate<f64>> {
    weyl_integral_tol(g, alpha, t, Tolerance::default())
}

pub(crate) fn weyl_integral_tol(g: &RealFn, alpha: f64, t: f64, tol: Tolerance) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    if g.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let a = order.alpha();
    let (tail, r0) = match g.decay() {
        Decay::CompactSupport { b, .. } => {
            if b <= t {
                return Ok(Estimate::new(0.0, 0.0));
            }
            (Tail::Compact { end: b - t }, (b - t).min(1.0))
        }
        Decay::Exponential { rate } => (Tail::Exponential { rate }, (1.0 / rate).min(1.0)),
        Decay::Algebraic { power } if power > a => (Tail::Algebraic { power: power - a + 1.0 }, 1.0),
        Decay::Algebraic { power } => {
            return Err(Error::UnsupportedFunction(format!(
                "W^-{a} needs decay faster than t^-{a}; declared t^-{power}"
            )))
        }
    };
    let breaks: Vec<f64> = g.breaks().iter().filter(|b| **b > t).map(|b| b - t).collect();
    let e = origin_power_halfline(&|r| g.eval(t + r), a, r0, tail, &breaks, tol)?;
    let gamma = gamma_fn(a)?;
    Ok(Estimate::new(e.value / gamma, e.error / gamma))
}

/// `W^-a g` as a function.
pub fn weyl_integral_fn(g: &RealFn, alpha: f64) -> Result<RealFn> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let decay = match g.decay() {
        Decay::CompactSupport { b, .. } => Decay::CompactSupport { a: 0.0, b },
        Decay::Exponential { rate } => Decay::Exponential { rate },
        Decay::Algebraic { power } => Decay::Algebraic { power: power - a },
    };
    let inner = g.clone();
    Ok(RealFn::derived(
        move |t| weyl_integral(&inner, a, t).map(|e| e.value).unwrap_or(f64::NAN),
        decay,
        if g.smoothness() == Smoothness::Smooth { Smoothness::Smooth } else { Smoothness::Continuous },
        g.breaks().to_vec(),
        g.is_zero(),
    ))
}

/// A fixed composite rule for `W^-b g` near a point.
///
/// The nodes are laid out once around `t` and reused unchanged at nearby
/// points, so finite differences of the result see a smooth function of the
/// evaluation point instead of the jitter of an adaptive scheme.
#[derive(Debug, Clone)]
pub struct WeylRule {
    offsets: Vec<f64>,
    weights: Vec<f64>,
    error: f64,
}

impl WeylRule {
    /// Builds a rule for `g` and order `b` around `t`, doubling node counts
    /// until two levels agree to `1e-13` relative.
    pub fn build(g: &RealFn, beta: f64, t: f64) -> Result<WeylRule> {
        Order::new(beta)?;
        positive_point(t)?;
        let (rate, end, algebraic) = match g.decay() {
            Decay::CompactSupport { b, .. } => (1.0 / (b - t).max(1e-300), Some(b - t), None),
            Decay::Exponential { rate } => (rate, None, None),
            Decay::Algebraic { power } if power > beta => (1.0, None, Some(power)),
            Decay::Algebraic { power } => {
                return Err(Error::UnsupportedFunction(format!(
                    "W^-{beta} needs decay faster than t^-{beta}; declared t^-{power}"
                )))
            }
        };
        if let Some(e) = end {
            if e <= 0.0 {
                return Ok(WeylRule { offsets: Vec::new(), weights: Vec::new(), error: 0.0 });
            }
        }
        let gamma = gamma_fn(beta)?;
        let mut previous: Option<f64> = None;
        for n in [16usize, 32, 64, 128] {
            let rule = Self::assemble(beta, t, rate, end, algebraic.is_some(), n, gamma)?;
            let v = rule.apply(g, t);
            if let Some(pv) = previous {
                let diff = (v - pv).abs();
                if diff <= 1e-13 * v.abs().max(1e-300) || n == 128 {
                    return Ok(WeylRule { error: diff, ..rule });
                }
            }
            previous = Some(v);
        }
        unreachable!("loop returns at n = 128")
    }

    fn assemble(
        beta: f64,
        t: f64,
        rate: f64,
        end: Option<f64>,
        algebraic: bool,
        n: usize,
        gamma: f64,
    ) -> Result<WeylRule> {
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let limit = end.unwrap_or(if algebraic { 1e4 * t.max(1.0) } else { 64.0 / rate });
        let r0 = (1.0 / rate).min(0.5 * t).min(1.0).min(limit);
        let gj = jacobi_rule(n, beta)?;
        let scale = r0.powf(beta) / gamma;
        for (&c, &w) in gj.complements().iter().zip(gj.weights()) {
            offsets.push(r0 * c);
            weights.push(w * scale);
        }
        let gl = legendre_rule(n)?;
        let mut a = r0;
        while a < limit {
            let b = (2.0 * a).min(limit);
            let h = b - a;
            for (&x, &w) in gl.nodes().iter().zip(gl.weights()) {
                let r = a + h * x;
                offsets.push(r);
                weights.push(w * h * r.powf(beta - 1.0) / gamma);
            }
            a = b;
        }
        if algebraic && end.is_none() {
            // r = limit / u on (0, 1]
            for (&u, &w) in gl.nodes().iter().zip(gl.weights()) {
                let r = limit / u;
                offsets.push(r);
                weights.push(w * limit / (u * u) * r.powf(beta - 1.0) / gamma);
            }
        }
        Ok(WeylRule { offsets, weights, error: 0.0 })
    }

    /// `sum_i w_i g(s + r_i)`.
    pub fn apply(&self, g: &RealFn, s: f64) -> f64 {
        self.offsets.iter().zip(&self.weights).map(|(&r, &w)| w * g.eval(s + r)).sum()
    }

    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `n`-th central difference quotient of `h` at `t` with step `step`.
fn central_difference(h: &impl Fn(f64) -> f64, n: u32, t: f64, step: f64) -> (f64, f64) {
    let mut acc = 0.0;
    let mut mag = 0.0;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let v = binomial(n, k) * h(t + (n as f64 / 2.0 - k as f64) * step);
        acc += sign * v;
        mag += v.abs();
    }
    let scale = step.powi(n as i32);
    (acc / scale, mag * f64::EPSILON / scale)
}

/// `W^a f(t)` for smooth `f`, by Richardson-extrapolated central differences
/// of `W^-(n-a) f`.
pub fn weyl_derivative(f: &RealFn, alpha: f64, t: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    if f.smoothness() != Smoothness::Smooth {
        return Err(Error::UnsupportedFunction(
            "the Weyl derivative needs a function tagged smooth".into(),
        ));
    }
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let (n, rule) = if order.is_integer() {
        (order.alpha() as u32, None)
    } else {
        let n = order.n();
        (n, Some(WeylRule::build(f, n as f64 - order.alpha(), t)?))
    };
    let h = |s: f64| match &rule {
        Some(r) => r.apply(f, s),
        None => f.eval(s),
    };
    let mut step = (1e-3 * t).max(1e-4);
    let reach = 0.5 * n as f64 * step;
    if reach >= 0.5 * t {
        step = t / n as f64 * 0.5;
    }
    let (d1, r1) = central_difference(&h, n, t, step);
    let (d2, r2) = central_difference(&h, n, t, 0.5 * step);
    let rich = (4.0 * d2 - d1) / 3.0;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    // the rule's own error is a smooth bias in s and largely differences out
    let bias = rule.as_ref().map_or(0.0, |r| r.error()) * 2f64.powi(n as i32);
    let error = (rich - d2).abs() + (4.0 * r2 + r1) / 3.0 + bias;
    Ok(Estimate::new(sign * rich, error))
}

/// `W^a f` as a function; evaluation failures surface as NaN.
pub fn weyl_derivative_fn(f: &RealFn, alpha: f64) -> Result<RealFn> {
    let order = Order::new(alpha)?;
    let inner = f.clone();
    Ok(RealFn::derived(
        move |t| weyl_derivative(&inner, order.alpha(), t).map(|e| e.value).unwrap_or(f64::NAN),
        f.decay(),
        Smoothness::Smooth,
        Vec::new(),
        f.is_zero(),
    ))
}

/// `|W^a f(t) - (1/Gamma(b-a)) int_t^inf (s-t)^(b-a-1) W^b f(s) ds|`.
pub fn weyl_scale_identity_check(f: &RealFn, alpha: f64, beta: f64, t: f64) -> Result<Estimate<f64>> {
    Order::new(alpha)?;
    Order::new(beta)?;
    if beta <= alpha {
        return Err(invalid(format!("need beta > alpha, got alpha={alpha}, beta={beta}")));
    }
    positive_point(t)?;
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let left = weyl_derivative(f, alpha, t)?;
    let wb = weyl_derivative_fn(f, beta)?;
    let right = weyl_integral_tol(&wb, beta - alpha, t, Tolerance::new(1e-12, 1e-10))?;
    Ok(Estimate::new((left.value - right.value).abs(), left.error + right.error))
}

/// `|W^a f_l(t) - l^a (W^a f)(l t)|` with `f_l(t) = f(l t)`.
pub fn homogeneity_residual(f: &RealFn, alpha: f64, lambda: f64, t: f64) -> Result<Estimate<f64>> {
    let fl = f.dilate(lambda)?;
    let left = weyl_derivative(&fl, alpha, t)?;
    let right = weyl_derivative(f, alpha, lambda * t)?;
    let scale = lambda.powf(alpha);
    Ok(Estimate::new(
        (left.value - scale * right.value).abs(),
        left.error + scale * right.error,
    ))
}
