//! Checks on the half-plane side: the kernel norm sandwich, intertwining of the
//! Cesàro operators with the Laplace transform, and the Paley-Wiener identity.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::func::{Decay, RealFn};
use crate::laplace::kernel::kernel_k_diag;
use crate::laplace::{laplace, laplace_with, ComplexValue, HalfPlanePoint};
use crate::numerics::adaptive::{halfline, Tail};
use crate::numerics::special::gamma_fn;
use crate::numerics::{Estimate, Tolerance};
use crate::ops::cesaro::{cesaro_plus_with, cesaro_star_with};
use crate::ops::rl::riemann_liouville_fn;
use crate::ops::{scale_breaks, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `a >= 1`.
    Large,
    /// `1/2 < a < 1`.
    Middle,
    /// `0 < a <= 1/2`.
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub modulus: f64,
    pub theta: f64,
    pub regime: Regime,
    pub value: f64,
    pub error: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// The proved lower and upper bounds for `K_a(z, z)`.
pub fn estimation_bounds(alpha: f64, z: HalfPlanePoint) -> Result<(Regime, f64, f64)> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let g2 = gamma_fn(a)?.powi(2);
    let m = z.modulus();
    Ok(if a >= 1.0 {
        (Regime::Large, 1.0 / ((2.0 * a - 1.0) * g2 * m), PI / (a * g2 * m))
    } else if a > 0.5 {
        (Regime::Middle, 1.0 / (g2 * m), PI / ((2.0 * a - 1.0) * g2 * m))
    } else {
        let g1 = gamma_fn(a + 1.0)?.powi(2);
        let upper = if z.theta().abs() <= FRAC_PI_4 { 2.0 / (g1 * m) } else { 2.0 / (g1 * z.re()) };
        (Regime::Small, 1.0 / (g2 * m), upper)
    })
}

/// Evaluates `K_a(z, z)` and tests it against the bounds of its regime.
pub fn check_estimation_bounds(alpha: f64, z: HalfPlanePoint) -> Result<BoundReport> {
    let (regime, lower, upper) = estimation_bounds(alpha, z)?;
    let k = kernel_k_diag(alpha, z)?;
    let pass = k.value + k.error >= lower && k.value - k.error <= upper;
    Ok(BoundReport {
        alpha,
        modulus: z.modulus(),
        theta: z.theta(),
        regime,
        value: k.value,
        error: k.error,
        lower,
        upper,
        pass,
    })
}

/// Orders, arguments and moduli of the default bound lattice (5 x 7 x 5).
pub fn default_lattice() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let edge = FRAC_PI_2 - 1e-3;
    (
        vec![0.3, 0.5, 0.75, 1.0, 2.0],
        vec![-edge, -PI / 3.0, -PI / 6.0, 0.0, PI / 6.0, PI / 3.0, edge],
        vec![0.1, 0.5, 1.0, 2.0, 10.0],
    )
}

/// Runs [`check_estimation_bounds`] over a lattice.
pub fn bound_sweep(alphas: &[f64], thetas: &[f64], moduli: &[f64]) -> Result<Vec<BoundReport>> {
    use rayon::prelude::*;
    let cases: Vec<(f64, f64, f64)> = alphas
        .iter()
        .flat_map(|&a| thetas.iter().flat_map(move |&t| moduli.iter().map(move |&m| (a, t, m))))
        .collect();
    cases
        .par_iter()
        .map(|&(a, t, m)| check_estimation_bounds(a, HalfPlanePoint::new(m, t)?))
        .collect()
}

/// Residuals of both intertwining relations at `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningReport {
    /// `|L(C_a f)(z) - C*_a(Lf)(z)|`.
    pub plus: Estimate<f64>,
    /// `|L(C*_a f)(z) - C_a(Lf)(z)|`.
    pub star: Estimate<f64>,
}

/// The complex operators act along the ray through `z`: `(C F)(z) = C F_theta(|z|)`
/// with `F_theta(r) = F(r e^(i theta))`.
pub fn check_intertwining(f: &RealFn, alpha: f64, z: HalfPlanePoint) -> Result<IntertwiningReport> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    if f.is_zero() {
        let zero = Estimate::new(0.0, 0.0);
        return Ok(IntertwiningReport { plus: zero, star: zero });
    }
    let theta = z.theta();
    let ray = |r: f64| -> Complex64 {
        HalfPlanePoint::new(r, theta)
            .and_then(|p| laplace(f, p))
            .map(|v| v.value)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let tol = Tolerance::new(1e-14, 1e-10);
    // the nested transforms only need to resolve the residual to ~1e-10
    let breaks = scale_breaks(f);
    let end = match f.decay() {
        Decay::CompactSupport { b, .. } => Some(b),
        _ => None,
    };
    let plus = |t: f64| cesaro_plus_with(&|u| f.eval(u), a, t, &breaks, tol).map_or(f64::NAN, |e| e.value);
    let lhs = laplace_with(&plus, Decay::Algebraic { power: 1.0 }, &breaks, z, tol)?;
    let rhs = cesaro_star_with(&ray, a, z.modulus(), &[], None, tol)?;
    let plus = Estimate::new((lhs.value - rhs.value).norm(), lhs.error + rhs.error);
    let star = |t: f64| cesaro_star_with(&|u| f.eval(u), a, t, &breaks, end, tol).map_or(f64::NAN, |e| e.value);
    let lhs = laplace_with(&star, f.decay(), &breaks, z, tol)?;
    let rhs = cesaro_plus_with(&ray, a, z.modulus(), &[], tol)?;
    let star = Estimate::new((lhs.value - rhs.value).norm(), lhs.error + rhs.error);
    Ok(IntertwiningReport { plus, star })
}

/// `|Lf(z) - z^a L(D^-a f)(z)|`.
pub fn check_rl_paley_wiener(f: &RealFn, alpha: f64, z: HalfPlanePoint) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let phi = riemann_liouville_fn(f, order.alpha())?;
    let lf = laplace(f, z)?;
    let lphi = laplace(&phi, z)?.scale(z.powf(order.alpha()));
    let d = lf - lphi;
    Ok(Estimate::new(d.norm(), d.error))
}

/// Both sides of `int |Lf(x + iy)|^2 dy = 2 pi int e^(-2xt) f(t)^2 dt` for `f`
/// smooth on `[0, inf)`.
///
/// The `y`-integral is computed on `|y| <= cutoff` from numerical transforms
/// and beyond it from `Lf(z) ~ f(0)/z + f'(0)/z^2`.
pub fn laplace_plancherel_pair(f: &RealFn, x: f64, cutoff: f64) -> Result<(Estimate<f64>, Estimate<f64>)> {
    if !(x > 0.0) || !(cutoff > 0.0) {
        return Err(invalid("need x > 0 and a positive cutoff"));
    }
    let tol = Tolerance::new(1e-14, 1e-11);
    let tail = match f.tail() {
        Tail::Exponential { rate } => Tail::Exponential { rate: 2.0 * (rate + x) },
        Tail::Compact { end } => Tail::Compact { end },
        Tail::Algebraic { .. } => Tail::Exponential { rate: 2.0 * x },
    };
    let rhs = halfline(&|t: f64| (-2.0 * x * t).exp() * f.eval(t).powi(2), tail, f.breaks(), tol)?;
    let rhs = Estimate::new(2.0 * PI * rhs.value, 2.0 * PI * rhs.error);

    let point = |y: f64| HalfPlanePoint::from_complex(Complex64::new(x, y));
    let failure = std::sync::Mutex::new(None);
    let near = |y: f64| match point(y).and_then(|p| laplace(f, p)) {
        Ok(v) => v.value.norm_sqr(),
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    };
    let breaks: Vec<f64> = (0..).map(|k| x * 2f64.powi(k)).take_while(|b| *b < cutoff).collect();
    let body = crate::numerics::adaptive::integrate(&near, 0.0, cutoff, &breaks, tol);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let body = body?;
    // f(0), f'(0), f''(0) from one-sided differences
    let h = 1e-3;
    let v: Vec<f64> = (0..4).map(|k| f.eval(k as f64 * h)).collect();
    let d1 = (-11.0 * v[0] + 18.0 * v[1] - 9.0 * v[2] + 2.0 * v[3]) / (6.0 * h);
    let d2 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
    let asym = |y: f64| {
        let z = Complex64::new(x, cutoff + y);
        (v[0] / z + d1 / (z * z) + d2 / (z * z * z)).norm_sqr()
    };
    let far = halfline(&asym, Tail::Algebraic { power: 2.0 }, &[], tol)?;
    // neglected terms are O(cutoff^-5); the derivative estimates contribute O(h^2 / cutoff^3)
    let model = 1.0 / cutoff.powi(5) + h * h / cutoff.powi(3);
    let lhs = Estimate::new(2.0 * (body.value + far.value), 2.0 * (body.error + far.error + model * v[0].abs().max(1.0)));
    Ok((lhs, rhs))
}

/// `1 / |z + conj w|` scale used in tests of the kernel's Hermitian symmetry.
pub fn hermitian_residual(alpha: f64, z: HalfPlanePoint, w: HalfPlanePoint) -> Result<ComplexValue> {
    let a = crate::laplace::kernel::kernel_k_complex(alpha, z, w)?;
    let b = crate::laplace::kernel::kernel_k_complex(alpha, w, z)?;
    Ok(a - b.conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(m: f64, th: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(m, th).unwrap()
    }

    #[test]
    fn bound_examples() {
        let r = check_estimation_bounds(1.0, pt(1.0, 0.0)).unwrap();
        assert!(r.pass && (r.lower - 1.0).abs() < 1e-15 && (r.upper - PI).abs() < 1e-14, "{r:?}");
        let r = check_estimation_bounds(0.75, pt(1.0, 0.0)).unwrap();
        assert!(r.pass, "{r:?}");
        let r = check_estimation_bounds(0.3, pt(1.0, PI / 3.0)).unwrap();
        assert_eq!(r.regime, Regime::Small);
        assert!((r.upper - 2.0 / (gamma_fn(1.3).unwrap().powi(2) * 0.5)).abs() < 1e-12);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn intertwining_examples() {
        let e = RealFn::exponential(1.0).unwrap();
        let r = check_intertwining(&e, 1.0, pt(1.0, 0.0)).unwrap();
        assert!(r.plus.value <= 1e-6 && r.star.value <= 1e-6, "{r:?}");
        let r = check_intertwining(&RealFn::zero(), 1.0, pt(1.0, 0.0)).unwrap();
        assert_eq!(r.plus.value, 0.0);
    }

    #[test]
    fn paley_wiener_examples() {
        let e = RealFn::exponential(1.0).unwrap();
        assert!(check_rl_paley_wiener(&e, 1.0, pt(1.0, 0.0)).unwrap().value <= 1e-8);
        let ind = RealFn::indicator(0.0, 1.0).unwrap();
        assert!(check_rl_paley_wiener(&ind, 0.5, pt(2.0, 0.0)).unwrap().value <= 1e-6);
    }

    #[test]
    fn plancherel_exponential() {
        let e = RealFn::exponential(1.0).unwrap();
        let (l, r) = laplace_plancherel_pair(&e, 0.5, 100.0).unwrap();
        assert!((r.value - PI / 1.5).abs() < 1e-12);
        assert!((l.value - r.value).abs() < 1e-7, "{l:?} vs {r:?}");
    }
}
