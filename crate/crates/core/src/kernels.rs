//! Real reproducing kernels, the Green function, fBm covariances and Gram matrices.
//!
//! `k_a(s, t) = 2F1(1 - a, 1; a + 1; m / M) / (M Gamma(a) Gamma(a + 1))` with
//! `m = min(s, t)`, `M = max(s, t)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::func::{Decay, RealFn};
use crate::numerics::adaptive::{jacobi_weighted, origin_power_halfline, Tail};
use crate::numerics::hyp::hyp2f1_kernel_split;
use crate::numerics::linalg::{cholesky_spd, CholeskyFactor};
use crate::numerics::special::{gamma_fn, ln_gamma};
use crate::numerics::{Estimate, SpecialFnContext, Tolerance};
use crate::ops::weyl::weyl_derivative;
use crate::ops::{positive_point, Order};

/// Largest grid accepted by [`gram`].
pub const MAX_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Hypergeometric,
    IntegerSum,
    QuadratureOracle,
}

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Hypergeometric => "hyp",
            Strategy::IntegerSum => "int",
            Strategy::QuadratureOracle => "quad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    order: Order,
    strategy: Strategy,
}

impl KernelSpec {
    pub fn new(alpha: f64, strategy: Strategy) -> Result<KernelSpec> {
        let order = Order::new(alpha)?;
        if strategy == Strategy::IntegerSum && !order.is_integer() {
            return Err(invalid(format!("the integer sum needs an integer order, got {alpha}")));
        }
        Ok(KernelSpec { order, strategy })
    }

    pub fn alpha(&self) -> f64 {
        self.order.alpha()
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }
}

fn ordered(s: f64, t: f64) -> (f64, f64) {
    if s <= t {
        (s, t)
    } else {
        (t, s)
    }
}

fn diagonal_guard(alpha: f64) -> Result<()> {
    if alpha <= 0.5 {
        return Err(Error::Divergence(format!(
            "k_a(t, t) is infinite for a = {alpha} <= 1/2"
        )));
    }
    Ok(())
}

/// `k_a(s, t)` under the chosen strategy.
pub fn kernel_k(spec: KernelSpec, s: f64, t: f64) -> Result<f64> {
    positive_point(s)?;
    positive_point(t)?;
    let a = spec.alpha();
    let (lo, hi) = ordered(s, t);
    if lo == hi {
        diagonal_guard(a)?;
    }
    match spec.strategy {
        Strategy::Hypergeometric => {
            let f = hyp_factor(a, lo, hi)?;
            Ok(f / (hi * gamma_fn(a)? * gamma_fn(a + 1.0)?))
        }
        Strategy::IntegerSum => Ok(integer_sum(a as usize, lo, hi)),
        Strategy::QuadratureOracle => Ok(quadrature_oracle(a, lo, hi)?.value),
    }
}

fn hyp_factor(alpha: f64, lo: f64, hi: f64) -> Result<f64> {
    let x = lo / hi;
    let y = (hi - lo) / hi;
    Ok(hyp2f1_kernel_split(&SpecialFnContext::default(), alpha, x, y)?.value)
}

fn integer_sum(n: usize, lo: f64, hi: f64) -> f64 {
    let x = lo / hi;
    let mut fact = vec![1.0f64; 2 * n + 1];
    for k in 1..fact.len() {
        fact[k] = fact[k - 1] * k as f64;
    }
    let mut acc = 0.0;
    let mut pow = 1.0;
    for j in 0..n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * pow / (fact[n + j] * fact[n - 1 - j]);
        pow *= x;
    }
    acc / hi
}

/// `int_0^1 (1 - y)^(a-1) (1 - x y)^(a-1) dy / (M Gamma(a)^2)`.
fn quadrature_oracle(alpha: f64, lo: f64, hi: f64) -> Result<Estimate<f64>> {
    let x = lo / hi;
    let delta = (hi - lo) / hi;
    let tol = Tolerance::new(1e-15, 1e-13);
    let e = if delta == 0.0 {
        // both factors collapse onto the weight
        jacobi_weighted(&|_y: f64| 1.0, 2.0 * alpha - 1.0, &[], tol)?
    } else {
        let breaks: Vec<f64> = if delta < 0.5 { vec![1.0 - delta] } else { Vec::new() };
        jacobi_weighted(&|y: f64| (delta + x * (1.0 - y)).powf(alpha - 1.0), alpha, &breaks, tol)?
    };
    let scale = 1.0 / (hi * gamma_fn(alpha)?.powi(2));
    Ok(Estimate::new(e.value * scale, e.error * scale))
}

/// `||k_{a,t}||_{2,(a)} = 1 / (Gamma(a) sqrt(2a - 1) sqrt(t))`.
pub fn kernel_norm(alpha: f64, t: f64) -> Result<f64> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    diagonal_guard(order.alpha())?;
    let a = order.alpha();
    Ok(1.0 / (gamma_fn(a)? * (2.0 * a - 1.0).sqrt() * t.sqrt()))
}

/// `g_a(t, r) = (r - t)_+^(a-1) / (r^a Gamma(a))`.
pub fn green_fn(alpha: f64, t: f64, r: f64) -> Result<f64> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    positive_point(r)?;
    if r <= t {
        return Ok(0.0);
    }
    let a = order.alpha();
    Ok((r - t).powf(a - 1.0) / (r.powf(a) * gamma_fn(a)?))
}

/// `int_0^inf g_a(s, r) g_a(t, r) dr`, an independent route to `k_a(s, t)`.
pub fn kernel_via_green(alpha: f64, s: f64, t: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(s)?;
    positive_point(t)?;
    let a = order.alpha();
    let (lo, hi) = ordered(s, t);
    if lo == hi {
        diagonal_guard(a)?;
    }
    let gap = hi - lo;
    let g2 = gamma_fn(a)?.powi(2);
    // r = hi + rho; the factor rho^(a-1) is carried by the panel
    let g = |rho: f64| {
        let r = hi + rho;
        (rho + gap).powf(a - 1.0) / (r.powf(2.0 * a) * g2)
    };
    let (alpha_eff, g_eff): (f64, Box<dyn Fn(f64) -> f64>) = if gap == 0.0 {
        (2.0 * a - 1.0, Box::new(move |rho: f64| (hi + rho).powf(-2.0 * a) / g2))
    } else {
        (a, Box::new(g))
    };
    let mut breaks = vec![hi];
    if gap > 0.0 {
        breaks.push(gap);
    }
    origin_power_halfline(
        &g_eff,
        alpha_eff,
        hi.min(if gap > 0.0 { gap } else { hi }),
        Tail::Algebraic { power: 2.0 },
        &breaks,
        Tolerance::new(1e-15, 1e-12),
    )
}

/// `n_a(t, s) = (ts)^a k_a(t, s)`, with the prefactor assembled in log space.
pub fn covariance_n(alpha: f64, t: f64, s: f64) -> Result<f64> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    positive_point(s)?;
    let a = order.alpha();
    let (lo, hi) = ordered(s, t);
    if lo == hi {
        diagonal_guard(a)?;
    }
    if a == 1.0 {
        return Ok(lo);
    }
    let f = hyp_factor(a, lo, hi)?;
    let log_pref = a * (t.ln() + s.ln()) - hi.ln() - ln_gamma(a) - ln_gamma(a + 1.0);
    Ok(f * log_pref.exp())
}

/// `n_a(t, s) = int_0^(t ^ s) (t - u)^(a-1) (s - u)^(a-1) du / Gamma(a)^2` by direct quadrature.
pub fn covariance_n_direct(alpha: f64, t: f64, s: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    positive_point(s)?;
    let a = order.alpha();
    let (lo, hi) = ordered(s, t);
    if lo == hi {
        diagonal_guard(a)?;
    }
    let tol = Tolerance::new(1e-15, 1e-13);
    // u = lo v: lo^a int_0^1 (1 - v)^(a-1) (hi - lo v)^(a-1) dv
    let gap = hi - lo;
    let e = if gap == 0.0 {
        let e = jacobi_weighted(&|_v: f64| 1.0, 2.0 * a - 1.0, &[], tol)?;
        let scale = lo.powf(2.0 * a - 1.0);
        Estimate::new(e.value * scale, e.error * scale)
    } else {
        let breaks: Vec<f64> = if gap < 0.5 * hi { vec![1.0 - gap / lo] } else { Vec::new() };
        let breaks: Vec<f64> = breaks.into_iter().filter(|b| *b > 0.0).collect();
        let e = jacobi_weighted(&|v: f64| (gap + lo * (1.0 - v)).powf(a - 1.0), a, &breaks, tol)?;
        let scale = lo.powf(a);
        Estimate::new(e.value * scale, e.error * scale)
    };
    let g2 = gamma_fn(a)?.powi(2);
    Ok(Estimate::new(e.value / g2, e.error / g2))
}

/// `b_a = n_(a+1)`, the covariance of Riemann-Liouville fBm; `a >= 0`.
pub fn covariance_b(alpha: f64, t: f64, s: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("order must be nonnegative, got {alpha}")));
    }
    covariance_n(alpha + 1.0, t, s)
}

/// `|<f, k_{a,t}>_{2,(a)} - f(t)|`, the inner product taken with the explicit
/// `W^a k_{a,t}(u) = (u - t)_+^(a-1) / (Gamma(a) u^(2a))`.
pub fn reproducing_residual(f: &RealFn, alpha: f64, t: f64) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    positive_point(t)?;
    let a = order.alpha();
    let ga = gamma_fn(a)?;
    let tail = match f.decay() {
        Decay::CompactSupport { b, .. } => Tail::Compact { end: (b - t).max(0.0) },
        Decay::Exponential { rate } => Tail::Exponential { rate },
        Decay::Algebraic { power } => Tail::Algebraic { power: power + 1.0 },
    };
    let failed = std::sync::Mutex::new(None);
    let g = |rho: f64| match weyl_derivative(f, a, t + rho) {
        Ok(w) => w.value / ga,
        Err(e) => {
            failed.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    };
    let breaks: Vec<f64> = f.breaks().iter().filter(|b| **b > t).map(|b| b - t).collect();
    // the finite-difference noise in W^a f is near 1e-9; asking for less stalls the subdivision
    let res = origin_power_halfline(&g, a, t.min(1.0), tail, &breaks, Tolerance::new(1e-10, 1e-8));
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e);
    }
    let e = res?;
    Ok(Estimate::new((e.value - f.eval(t)).abs(), e.error))
}

/// What a Gram matrix is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GramSource {
    Kernel(KernelSpec),
    /// `n_a`, requires `a > 1/2`.
    CovarianceN(f64),
    /// `b_a`, requires `a >= 0`.
    CovarianceB(f64),
}

impl GramSource {
    pub fn entry(&self, s: f64, t: f64) -> Result<f64> {
        match *self {
            GramSource::Kernel(spec) => kernel_k(spec, s, t),
            GramSource::CovarianceN(a) => covariance_n(a, s, t),
            GramSource::CovarianceB(a) => covariance_b(a, s, t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub grid: Vec<f64>,
    pub entries: DMatrix<f64>,
    pub source: GramSource,
    pub factor: CholeskyFactor,
}

/// Checks that a grid is nonempty, positive, strictly increasing and at most `max` long.
pub fn validate_grid(grid: &[f64], max: usize) -> Result<()> {
    if grid.is_empty() || grid.len() > max {
        return Err(invalid(format!("grid size must lie in [1, {max}], got {}", grid.len())));
    }
    if !grid.iter().all(|t| *t > 0.0 && t.is_finite()) {
        return Err(invalid("grid points must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    Ok(())
}

/// Assembles the Gram matrix over `grid` and checks it through a jittered Cholesky.
pub fn gram(source: GramSource, grid: &[f64]) -> Result<GramMatrix> {
    validate_grid(grid, MAX_GRID)?;
    let n = grid.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| source.entry(grid[i], grid[j])).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let mut entries = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            entries[(i, i + k)] = *v;
            entries[(i + k, i)] = *v;
        }
    }
    let factor = cholesky_spd(&entries)?;
    Ok(GramMatrix { grid: grid.to_vec(), entries, source, factor })
}
