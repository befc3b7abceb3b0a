//! The right half-plane: Laplace transforms, the Laguerre bases and the
//! reproducing kernel `K_a(z, w)` of the Hardy-Sobolev space.

pub mod checks;
pub mod kernel;

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::func::{Decay, RealFn, Smoothness};
use crate::numerics::adaptive::{halfline, jacobi_weighted, origin_power_halfline, Tail};
use crate::numerics::laguerre::laguerre_fn;
use crate::numerics::special::gamma_fn;
use crate::numerics::{Estimate, Tolerance};
use crate::ops::weyl::weyl_integral_fn;
use crate::ops::Order;

/// A point `z = |z| e^(i theta)` of the open right half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    modulus: f64,
    theta: f64,
    re: f64,
    im: f64,
}

impl HalfPlanePoint {
    pub fn new(modulus: f64, theta: f64) -> Result<HalfPlanePoint> {
        if !(modulus > 0.0) || !modulus.is_finite() {
            return Err(domain(format!("modulus must be positive and finite, got {modulus}")));
        }
        if !(theta.abs() < FRAC_PI_2) {
            return Err(domain(format!("argument must lie in (-pi/2, pi/2), got {theta}")));
        }
        let (sin, cos) = theta.sin_cos();
        let re = modulus * cos;
        if !(re > 0.0) {
            return Err(domain(format!("Re z underflows to {re}")));
        }
        Ok(HalfPlanePoint { modulus, theta, re, im: modulus * sin })
    }

    pub fn from_complex(z: Complex64) -> Result<HalfPlanePoint> {
        if !(z.re > 0.0) || !z.im.is_finite() {
            return Err(domain(format!("point {z} is not in the right half-plane")));
        }
        HalfPlanePoint::new(z.norm(), z.im.atan2(z.re))
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `1 / (4z)`, computed in polar form.
    pub fn reflect(&self) -> HalfPlanePoint {
        HalfPlanePoint::new(0.25 / self.modulus, -self.theta).expect("reflection stays in the half-plane")
    }

    pub fn scale(&self, lambda: f64) -> Result<HalfPlanePoint> {
        HalfPlanePoint::new(self.modulus * lambda, self.theta)
    }

    /// `z^p` on the principal branch.
    pub fn powf(&self, p: f64) -> Complex64 {
        Complex64::from_polar(self.modulus.powf(p), p * self.theta)
    }
}

/// A complex number with an error radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub value: Complex64,
    pub error: f64,
}

impl ComplexValue {
    pub fn new(value: Complex64, error: f64) -> ComplexValue {
        ComplexValue { value, error: error.abs() }
    }

    pub fn exact(value: Complex64) -> ComplexValue {
        ComplexValue { value, error: 0.0 }
    }

    pub fn conj(self) -> ComplexValue {
        ComplexValue::new(self.value.conj(), self.error)
    }

    pub fn scale(self, c: Complex64) -> ComplexValue {
        ComplexValue::new(self.value * c, self.error * c.norm())
    }

    pub fn norm(&self) -> f64 {
        self.value.norm()
    }
}

impl From<Estimate<Complex64>> for ComplexValue {
    fn from(e: Estimate<Complex64>) -> ComplexValue {
        ComplexValue::new(e.value, e.error)
    }
}

impl Add for ComplexValue {
    type Output = ComplexValue;
    fn add(self, o: ComplexValue) -> ComplexValue {
        ComplexValue::new(self.value + o.value, self.error + o.error)
    }
}

impl Sub for ComplexValue {
    type Output = ComplexValue;
    fn sub(self, o: ComplexValue) -> ComplexValue {
        ComplexValue::new(self.value - o.value, self.error + o.error)
    }
}

impl Mul for ComplexValue {
    type Output = ComplexValue;
    fn mul(self, o: ComplexValue) -> ComplexValue {
        let error = self.value.norm() * o.error + o.value.norm() * self.error + self.error * o.error;
        ComplexValue::new(self.value * o.value, error)
    }
}

fn tol() -> Tolerance {
    Tolerance::new(1e-15, 1e-12)
}

/// `Lf(z) = int_0^inf f(t) e^(-zt) dt`.
pub fn laplace(f: &RealFn, z: HalfPlanePoint) -> Result<ComplexValue> {
    if f.is_zero() {
        return Ok(ComplexValue::exact(Complex64::new(0.0, 0.0)));
    }
    laplace_with(&|t| f.eval(t), f.decay(), f.breaks(), z, tol())
}

pub(crate) fn laplace_with<G: Fn(f64) -> f64>(
    g: &G,
    decay: Decay,
    breaks: &[f64],
    z: HalfPlanePoint,
    tol: Tolerance,
) -> Result<ComplexValue> {
    let tail = match decay {
        Decay::CompactSupport { b, .. } => Tail::Compact { end: b },
        Decay::Exponential { rate } => Tail::Exponential { rate: rate + z.re() },
        Decay::Algebraic { .. } => Tail::Exponential { rate: z.re() },
    };
    let zz = z.z();
    let e = halfline(&|t: f64| (-zz * t).exp() * g(t), tail, breaks, tol)?;
    Ok(e.into())
}

/// `L(l_m)(z) = 2 (2z - 1)^m / (2z + 1)^(m+1)`.
pub fn laplace_laguerre(m: usize, z: HalfPlanePoint) -> ComplexValue {
    let zz = z.z();
    let ratio = (2.0 * zz - 1.0) / (2.0 * zz + 1.0);
    let value = ratio.powu(m as u32) * 2.0 / (2.0 * zz + 1.0);
    ComplexValue::new(value, 4.0 * (m as f64 + 2.0) * f64::EPSILON * value.norm())
}

/// `l_m` as a registered function.
pub fn laguerre_basis_fn(m: usize) -> RealFn {
    RealFn::laguerre(m)
}

/// `l_(m,a) = W^-a (t^-a l_m)`, the image of the Laguerre basis in the range space.
pub fn laguerre_alpha_fn(m: usize, alpha: f64) -> Result<RealFn> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let g = RealFn::derived(
        move |t| t.powf(-a) * laguerre_fn(m, t),
        Decay::Exponential { rate: 0.5 },
        Smoothness::Smooth,
        Vec::new(),
        false,
    );
    weyl_integral_fn(&g, a)
}

/// `L(l_(m,a))(z) = (2 / Gamma(a)) int_0^1 (1 - x)^(a-1) (2zx - 1)^m / (2zx + 1)^(m+1) dx`,
/// the integral over `(1, inf)` folded by `u = 1/x`.
pub fn laplace_laguerre_alpha(m: usize, alpha: f64, z: HalfPlanePoint) -> Result<ComplexValue> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let zz = z.z();
    let g = |x: f64| {
        let p = 2.0 * zz * x;
        ((p - 1.0) / (p + 1.0)).powu(m as u32) / (p + 1.0)
    };
    let e = jacobi_weighted(&g, a, &[], tol())?;
    let c = 2.0 / gamma_fn(a)?;
    Ok(ComplexValue::new(e.value * c, e.error * c))
}

/// Both evaluations of the basis function `frak L_(m,a)(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrakValue {
    /// `(2/Gamma(a)) int_1^inf (u-1)^(a-1) u^-a (2uz-1)^m / (2uz+1)^(m+1) du`.
    pub direct: ComplexValue,
    /// `((-1)^m / 2z) L(l_(m,a))(1/(4z))`.
    pub reflected: ComplexValue,
}

impl FrakValue {
    pub fn discrepancy(&self) -> f64 {
        (self.direct.value - self.reflected.value).norm()
    }
}

pub fn frak_basis_direct(m: usize, alpha: f64, z: HalfPlanePoint) -> Result<ComplexValue> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let zz = z.z();
    let g = |rho: f64| {
        let u = 1.0 + rho;
        let p = 2.0 * zz * u;
        ((p - 1.0) / (p + 1.0)).powu(m as u32) / (p + 1.0) * u.powf(-a)
    };
    let e = origin_power_halfline(&g, a, 1.0, Tail::Algebraic { power: 2.0 }, &[], tol())?;
    let c = 2.0 / gamma_fn(a)?;
    Ok(ComplexValue::new(e.value * c, e.error * c))
}

pub fn frak_basis_reflected(m: usize, alpha: f64, z: HalfPlanePoint) -> Result<ComplexValue> {
    let inner = laplace_laguerre_alpha(m, alpha, z.reflect())?;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Ok(inner.scale(sign / (2.0 * z.z())))
}

pub fn frak_basis(m: usize, alpha: f64, z: HalfPlanePoint) -> Result<FrakValue> {
    Ok(FrakValue {
        direct: frak_basis_direct(m, alpha, z)?,
        reflected: frak_basis_reflected(m, alpha, z)?,
    })
}

/// `sum_(j<M) frak L_j(z) conj(frak L_j(w))`.
pub fn basis_expansion_partial(alpha: f64, z: HalfPlanePoint, w: HalfPlanePoint, terms: usize) -> Result<ComplexValue> {
    if terms == 0 {
        return Err(crate::error::invalid("need at least one term"));
    }
    let mut acc = ComplexValue::exact(Complex64::new(0.0, 0.0));
    for j in 0..terms {
        let a = frak_basis_direct(j, alpha, z)?;
        let b = if z == w { a } else { frak_basis_direct(j, alpha, w)? };
        acc = acc + a * b.conj();
    }
    Ok(acc)
}

/// `J(theta) = int_0^1 dt / (t^2 + 1 + 2t cos 2theta) = |theta| / |sin 2theta|`, `J(0) = 1/2`.
pub fn j_integral(theta: f64) -> Result<f64> {
    if !(theta.abs() < FRAC_PI_2) {
        return Err(domain(format!("argument must lie in (-pi/2, pi/2), got {theta}")));
    }
    let x = 2.0 * theta;
    if x.abs() < 1e-4 {
        // x / sin x = 1 + x^2/6 + 7x^4/360
        let x2 = x * x;
        return Ok(0.5 * (1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0));
    }
    Ok(theta.abs() / x.sin().abs())
}

/// `J(theta)` by direct quadrature.
pub fn j_integral_quadrature(theta: f64) -> Result<Estimate<f64>> {
    if !(theta.abs() < FRAC_PI_2) {
        return Err(domain(format!("argument must lie in (-pi/2, pi/2), got {theta}")));
    }
    let c2 = theta.cos().powi(2);
    // t^2 + 1 + 2t cos 2theta = (1 - t)^2 + 4t cos^2 theta
    let f = |t: f64| 1.0 / ((1.0 - t).powi(2) + 4.0 * t * c2);
    let peak = 1.0 - 2.0 * theta.cos();
    let breaks: Vec<f64> = if peak > 0.0 { vec![peak] } else { Vec::new() };
    crate::numerics::adaptive::integrate(&f, 0.0, 1.0, &breaks, Tolerance::new(1e-15, 1e-13))
}
