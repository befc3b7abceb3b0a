//! The kernel hypergeometric function `2F1(1 - alpha, 1; alpha + 1; x)`.
//!
//! Only this one-parameter family is needed. On `[0, 1/2]` the Gauss series
//! is summed directly. On `(1/2, 1)` the series in `1 - x` from the standard
//! connection formula is used; when `2 alpha - 1` is an even integer the two
//! terms of that formula collide and the logarithmic form takes over.

use crate::error::{invalid, Error, Result};
use crate::numerics::special::{digamma, gamma_signed};
use crate::numerics::{Estimate, SpecialFnContext};

/// Distance from a degenerate order inside which the degenerate form is used.
const DEGENERATE_BAND: f64 = 1e-9;

/// `2F1(1 - alpha, 1; alpha + 1; x)` for `0 <= x <= 1`.
pub fn hyp2f1_kernel(alpha: f64, x: f64) -> Result<Estimate<f64>> {
    hyp2f1_kernel_split(&SpecialFnContext::default(), alpha, x, 1.0 - x)
}

/// Same as [`hyp2f1_kernel`] with `y = 1 - x` passed in separately, so that a
/// caller who knows `1 - x` exactly does not lose it to cancellation.
pub fn hyp2f1_kernel_split(
    ctx: &SpecialFnContext,
    alpha: f64,
    x: f64,
    y: f64,
) -> Result<Estimate<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("order must be positive, got {alpha}")));
    }
    if !(x >= 0.0) || x > 1.0 + 1e-12 || !y.is_finite() {
        return Err(invalid(format!("argument must lie in [0, 1], got {x}")));
    }
    let (x, y) = if y <= 0.0 { (1.0, 0.0) } else { (x.min(1.0), y) };

    let nearest = alpha.round();
    if nearest >= 1.0 && (alpha - nearest).abs() <= DEGENERATE_BAND {
        let mut est = terminating(nearest as usize, x);
        est.error += 10.0 * (alpha - nearest).abs() * est.value.abs();
        return Ok(est);
    }

    let m = 2.0 * alpha - 1.0;
    if y == 0.0 {
        if m <= 0.0 {
            return Err(Error::Divergence(format!(
                "2F1(1-a, 1; a+1; 1) diverges for a = {alpha} <= 1/2"
            )));
        }
        // Gauss: Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))
        let v = alpha / m;
        return Ok(Estimate::new(v, 4.0 * f64::EPSILON * v));
    }
    if x <= 0.5 {
        return gauss_series(ctx, alpha, x);
    }
    let m_even = (m / 2.0).round() * 2.0;
    if m_even >= 0.0 && (m - m_even).abs() <= DEGENERATE_BAND {
        let mut est = logarithmic(ctx, alpha, m_even as usize, y)?;
        est.error += 10.0 * (m - m_even).abs() * (1.0 + y.ln().abs()) * est.value.abs();
        return Ok(est);
    }
    connection(ctx, alpha, x, y)
}

/// Exact finite sum for integer order `n`: the series stops after `n` terms.
fn terminating(n: usize, x: f64) -> Estimate<f64> {
    let alpha = n as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut abs_sum = 1.0;
    for k in 0..n.saturating_sub(1) {
        let k = k as f64;
        term *= (1.0 - alpha + k) / (alpha + 1.0 + k) * x;
        sum += term;
        abs_sum += term.abs();
    }
    Estimate::new(sum, 2.0 * n as f64 * f64::EPSILON * abs_sum)
}

/// Sums `sum_n t_n` where `t_{n+1} = t_n * ratio(n)`, starting from `t_0 = 1`.
fn power_series(
    ctx: &SpecialFnContext,
    z: f64,
    ratio: impl Fn(f64) -> f64,
) -> Result<Estimate<f64>> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut abs_sum = 1.0;
    let mut small = 0;
    for n in 0..ctx.max_terms() {
        term *= ratio(n as f64);
        sum += term;
        abs_sum += term.abs();
        if term == 0.0 {
            return Ok(Estimate::new(sum, 4.0 * f64::EPSILON * abs_sum));
        }
        if term.abs() <= ctx.tolerance() * 1e-3 * sum.abs() {
            small += 1;
            if small >= 2 {
                let tail = term.abs() * z / (1.0 - z);
                return Ok(Estimate::new(sum, tail + 4.0 * f64::EPSILON * abs_sum * (n as f64 + 1.0).sqrt()));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "hypergeometric series did not converge in {} terms",
        ctx.max_terms()
    )))
}

fn gauss_series(ctx: &SpecialFnContext, alpha: f64, x: f64) -> Result<Estimate<f64>> {
    power_series(ctx, x, |k| (1.0 - alpha + k) / (alpha + 1.0 + k) * x)
}

/// Connection formula for non-degenerate `m = 2 alpha - 1`:
/// `F = alpha/(2 alpha - 1) * 2F1(1-alpha, 1; 2-2alpha; y)
///    + Gamma(alpha+1) Gamma(1-2alpha) / Gamma(1-alpha) * y^(2alpha-1) x^(-alpha)`.
fn connection(ctx: &SpecialFnContext, alpha: f64, x: f64, y: f64) -> Result<Estimate<f64>> {
    let m = 2.0 * alpha - 1.0;
    let s = power_series(ctx, y, |n| (1.0 - alpha + n) / (2.0 - 2.0 * alpha + n) * y)?;
    let a = alpha / m;
    let b = gamma_signed(alpha + 1.0)? * gamma_signed(1.0 - 2.0 * alpha)? / gamma_signed(1.0 - alpha)?;
    let second = b * y.powf(m) * x.powf(-alpha);
    let value = a * s.value + second;
    let rounding = 8.0 * f64::EPSILON * ((a * s.value).abs() + second.abs());
    Ok(Estimate::new(value, a.abs() * s.error + rounding))
}

/// Degenerate case `2 alpha - 1 = m` with `m` a nonnegative even integer.
fn logarithmic(ctx: &SpecialFnContext, alpha: f64, m: usize, y: f64) -> Result<Estimate<f64>> {
    let mf = m as f64;
    // finite part: (alpha/m) sum_{n<m} (1-alpha)_n / (1-m)_n y^n
    let mut finite = 0.0;
    let mut finite_abs = 0.0;
    if m > 0 {
        let mut term = 1.0;
        for n in 0..m {
            if n > 0 {
                let k = (n - 1) as f64;
                term *= (1.0 - alpha + k) / (1.0 - mf + k) * y;
            }
            finite += term;
            finite_abs += term.abs();
        }
        finite *= alpha / mf;
        finite_abs *= (alpha / mf).abs();
    }
    // log part: sum_n (alpha)_n / n! y^n [ln y - psi(n+1) + psi(alpha+n)]
    let ln_y = y.ln();
    let mut c = 1.0;
    let mut psi_n1 = digamma(1.0);
    let mut psi_an = digamma(alpha);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut small = 0;
    let mut converged = false;
    let mut last = 0.0;
    for n in 0..ctx.max_terms() {
        let nf = n as f64;
        if n > 0 {
            c *= (alpha + nf - 1.0) / nf * y;
            psi_n1 += 1.0 / nf;
            psi_an += 1.0 / (alpha + nf - 1.0);
        }
        let term = c * (ln_y - psi_n1 + psi_an);
        sum += term;
        abs_sum += term.abs();
        last = term;
        if c.abs() * (1.0 + ln_y.abs()) <= ctx.tolerance() * 1e-3 * sum.abs() || c == 0.0 {
            small += 1;
            if small >= 2 {
                converged = true;
                break;
            }
        } else {
            small = 0;
        }
    }
    if !converged {
        return Err(Error::NonConvergence("logarithmic hypergeometric series".into()));
    }
    let mut factorial = 1.0;
    for k in 1..=m {
        factorial *= k as f64;
    }
    let pref = gamma_signed(alpha + 1.0)? / (gamma_signed(1.0 - alpha)? * factorial);
    // (-y)^m with m even
    let scale = y.powi(m as i32) * pref;
    let value = finite - scale * sum;
    let error = 8.0 * f64::EPSILON * (finite_abs + (scale * abs_sum).abs())
        + (scale * last).abs() * y / (1.0 - y);
    Ok(Estimate::new(value, error))
}
