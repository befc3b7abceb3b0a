//! `K_a(z, w) = (1/Gamma(a)^2) int_0^1 int_0^1 (1-x)^(a-1) (1-y)^(a-1) / (xz + y conj(w)) dx dy`.
//!
//! Splitting the square along its diagonal (`y = xs` and `x = ys`) cancels the
//! `1/r` singularity at the corner and leaves
//! `(1/Gamma(a)^2) int_0^1 I(s) [1/(z + s conj w) + 1/(sz + conj w)] ds`
//! with `I(s) = int_0^1 (1-x)^(a-1) (1-xs)^(a-1) dx`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::laplace::{ComplexValue, HalfPlanePoint};
use crate::numerics::adaptive::{endpoint_weighted, integrate};
use crate::numerics::hyp::hyp2f1_kernel_split;
use crate::numerics::linalg::cholesky_spd;
use crate::numerics::special::gamma_fn;
use crate::numerics::{Estimate, SpecialFnContext, Tolerance};
use crate::ops::Order;

/// Exponent `q` of the substitution `e = v^q` that flattens `e^(2a-1)` for `a < 1/2`.
fn flattening_power(alpha: f64) -> f64 {
    if alpha < 0.5 {
        1.0 / (2.0 * alpha)
    } else {
        1.0
    }
}

/// `I(1 - e)` by quadrature.
pub(crate) fn inner_quadrature(alpha: f64, e: f64) -> Result<Estimate<f64>> {
    let s = 1.0 - e;
    // in d = 1 - x the second factor is (e + s d)^(a-1), which turns over at d ~ e
    let breaks: Vec<f64> = (0..).map(|k| e * 4f64.powi(k)).take_while(|d| *d < 1.0).collect();
    endpoint_weighted(&|d: f64| (e + s * d).powf(alpha - 1.0), alpha, &breaks, Tolerance::new(1e-16, 1e-13))
}

/// `I(1 - e)` through the hypergeometric closed form `2F1(1-a, 1; a+1; 1-e) / a`.
fn inner_closed(ctx: &SpecialFnContext, alpha: f64, e: f64) -> Result<Estimate<f64>> {
    let h = hyp2f1_kernel_split(ctx, alpha, 1.0 - e, e)?;
    Ok(Estimate::new(h.value / alpha, h.error / alpha))
}

/// Break points in `v` around the width `c` of a peak in `e`, plus a geometric
/// ladder towards `v = 0` where the integrand may carry a logarithm.
fn peak_breaks(c: f64, q: f64) -> Vec<f64> {
    let mut out: Vec<f64> = [0.01, 0.1, 1.0, 10.0]
        .iter()
        .map(|k| k * c)
        .filter(|e| *e > 0.0 && *e < 1.0)
        .map(|e| e.powf(1.0 / q))
        .collect();
    out.extend((1..=12).map(|k| 10f64.powi(-k)));
    out
}

/// `K_a(z, w)` by the diagonal split, with `I` computed by quadrature.
pub fn kernel_k_complex(alpha: f64, z: HalfPlanePoint, w: HalfPlanePoint) -> Result<ComplexValue> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let q = flattening_power(a);
    let zz = z.z();
    let wb = w.z().conj();
    let failure = std::sync::Mutex::new(None);
    let integrand = |v: f64| {
        let e = v.powf(q).max(f64::MIN_POSITIVE);
        let s = 1.0 - e;
        let jac = q * v.powf(q - 1.0);
        match inner_quadrature(a, e) {
            Ok(i) => (1.0 / (zz + s * wb) + 1.0 / (s * zz + wb)) * (i.value * jac),
            Err(err) => {
                failure.lock().unwrap().get_or_insert(err);
                Complex64::new(f64::NAN, 0.0)
            }
        }
    };
    // the bracket varies on the scale |z + conj w| / max(|z|, |w|) near s = 1
    let width = (zz + wb).norm() / z.modulus().max(w.modulus());
    let res = integrate(&integrand, 0.0, 1.0, &peak_breaks(width, q), Tolerance::new(1e-15, 1e-11));
    if let Some(err) = failure.into_inner().unwrap() {
        return Err(err);
    }
    let e = res?;
    let c = 1.0 / gamma_fn(a)?.powi(2);
    Ok(ComplexValue::new(e.value * c, e.error * c + 1e-13 * e.value.norm() * c))
}

/// `K_a(z, z) = (2 cos theta / (Gamma(a)^2 |z|)) int_0^1 I(t) (1+t) / (t^2 + 1 + 2t cos 2theta) dt`,
/// with `I` from its hypergeometric closed form.
pub fn kernel_k_diag(alpha: f64, z: HalfPlanePoint) -> Result<Estimate<f64>> {
    let order = Order::new(alpha)?;
    let a = order.alpha();
    let q = flattening_power(a);
    let ctx = SpecialFnContext::default();
    let cos = z.theta().cos();
    let c2 = cos * cos;
    let failure = std::sync::Mutex::new(None);
    let integrand = |v: f64| {
        let e = v.powf(q).max(f64::MIN_POSITIVE);
        let t = 1.0 - e;
        let jac = q * v.powf(q - 1.0);
        match inner_closed(&ctx, a, e) {
            // t^2 + 1 + 2t cos 2theta = e^2 + 4t cos^2 theta
            Ok(i) => i.value * (2.0 - e) / (e * e + 4.0 * t * c2) * jac,
            Err(err) => {
                failure.lock().unwrap().get_or_insert(err);
                f64::NAN
            }
        }
    };
    let res = integrate(&integrand, 0.0, 1.0, &peak_breaks(2.0 * cos, q), Tolerance::new(1e-15, 1e-12));
    if let Some(err) = failure.into_inner().unwrap() {
        return Err(err);
    }
    let e = res?;
    let c = 2.0 * cos / (gamma_fn(a)?.powi(2) * z.modulus());
    Ok(Estimate::new(e.value * c, e.error * c + 1e-13 * (e.value * c).abs()))
}

/// Hermitian Gram matrix of `K_a` over half-plane points.
#[derive(Debug, Clone)]
pub struct HermitianGram {
    pub entries: DMatrix<Complex64>,
    pub errors: DMatrix<f64>,
    pub jitter: f64,
}

/// Assembles `[K_a(z_i, z_j)]` and checks positive semidefiniteness through the
/// real embedding `[[A, -B], [B, A]]` of `A + iB`.
pub fn kernel_gram(alpha: f64, points: &[HalfPlanePoint]) -> Result<HermitianGram> {
    if points.is_empty() {
        return Err(invalid("need at least one point"));
    }
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<ComplexValue> = pairs
        .par_iter()
        .map(|&(i, j)| kernel_k_complex(alpha, points[i], points[j]))
        .collect::<Result<_>>()?;
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut errors = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(&values) {
        let mut value = v.value;
        if i == j {
            value.im = 0.0;
        }
        entries[(i, j)] = value;
        entries[(j, i)] = value.conj();
        errors[(i, j)] = v.error;
        errors[(j, i)] = v.error;
    }
    let mut real = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = entries[(i, j)];
            real[(i, j)] = c.re;
            real[(i + n, j + n)] = c.re;
            real[(i, j + n)] = -c.im;
            real[(i + n, j)] = c.im;
        }
    }
    let factor = cholesky_spd(&real)?;
    Ok(HermitianGram { entries, errors, jitter: factor.jitter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, LN_2};

    fn pt(m: f64, th: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(m, th).unwrap()
    }

    #[test]
    fn kernel_at_one() {
        let one = pt(1.0, 0.0);
        let k = kernel_k_complex(1.0, one, one).unwrap();
        assert!((k.value.re - 2.0 * LN_2).abs() < 1e-9, "{k:?}");
        assert!(k.value.im.abs() < 1e-15);
        let d = kernel_k_diag(1.0, one).unwrap();
        assert!((d.value - 2.0 * LN_2).abs() < 1e-12);
        let d = kernel_k_diag(1.0, pt(3.0, 0.0)).unwrap();
        assert!((d.value - 2.0 * LN_2 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn diag_routes_agree() {
        let z = pt(2.0, FRAC_PI_4);
        let d = kernel_k_diag(0.75, z).unwrap();
        assert!((d.value - 0.795_643_689_438_649_2).abs() < 1e-10, "{d:?}");
        let k = kernel_k_complex(0.75, z, z).unwrap();
        assert!(k.value.im.abs() < 1e-9);
        assert!((k.value.re - d.value).abs() < 1e-8, "{k:?} vs {d:?}");
        for (a, expect) in [(0.3, 0.916_375_693_898_105), (2.0, 0.590_862_907_413_260_4)] {
            let d = kernel_k_diag(a, pt(1.0, 0.0)).unwrap();
            assert!((d.value - expect).abs() < 1e-10, "a={a}: {d:?}");
            let k = kernel_k_complex(a, pt(1.0, 0.0), pt(1.0, 0.0)).unwrap();
            assert!((k.value.re - expect).abs() < 1e-8, "a={a}: {k:?}");
        }
    }

    #[test]
    fn hermitian_and_scaling() {
        let z = HalfPlanePoint::from_complex(Complex64::new(1.0, 1.0)).unwrap();
        let w = HalfPlanePoint::from_complex(Complex64::new(2.0, -1.0)).unwrap();
        let a = kernel_k_complex(1.5, z, w).unwrap();
        let b = kernel_k_complex(1.5, w, z).unwrap();
        assert!((a.value - b.value.conj()).norm() < 1e-9);
        let s = kernel_k_complex(0.8, z.scale(2.0).unwrap(), w.scale(2.0).unwrap()).unwrap();
        let o = kernel_k_complex(0.8, z, w).unwrap();
        assert!((s.value * 2.0 - o.value).norm() < 1e-9 * o.value.norm());
    }

    #[test]
    fn gram_is_psd() {
        let pts: Vec<HalfPlanePoint> = [(0.5, -1.0), (1.0, 0.0), (2.0, 0.7), (5.0, 1.3)]
            .iter()
            .map(|&(m, t)| pt(m, t))
            .collect();
        for a in [0.5, 1.0, 2.0] {
            let g = kernel_gram(a, &pts).unwrap();
            assert!(g.jitter <= 1e-10, "a={a}: jitter {}", g.jitter);
        }
    }
}
