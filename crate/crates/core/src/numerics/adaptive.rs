//! Adaptive Gauss-Kronrod integration and the composite schemes built on it.
//!
//! Everything is generic over [`QuadValue`] so that the real-line operators
//! and the Laplace-domain integrals share one integrator.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::numerics::quad::jacobi_rule;
use crate::numerics::{Estimate, Tolerance};

/// Scalar types the integrators can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Two reals integrated together; only the first drives adaptivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair(self.0 - o.0, self.1 - o.1)
    }
}

impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, k: f64) -> Pair {
        Pair(self.0 * k, self.1 * k)
    }
}

impl QuadValue for Pair {
    fn zero() -> Self {
        Pair(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.0.abs()
    }
    fn is_finite_value(self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Default cap on the number of subintervals of one adaptive run.
pub const MAX_INTERVALS: usize = 4000;

/// 15-point Kronrod rule on `[a, b]` with the QUADPACK error rescaling.
fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = fc.magnitude() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let h = half.abs();
    resabs *= h;
    resasc *= h;
    let mut err = ((resk - resg) * half).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (resk * half, err)
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Sorted, deduplicated copy of `points` restricted to the open interval `(a, b)`,
/// with `a` and `b` added at the ends.
pub fn partition(a: f64, b: f64, points: &[f64]) -> Vec<f64> {
    let mut out = vec![a];
    let mut inner: Vec<f64> = points
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > a && *p < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    out.extend(inner);
    out.push(b);
    out
}

/// Adaptive G7K15 over the partition `edges`, bisecting the worst piece until
/// the summed error estimate meets `tol`.
pub fn integrate_pieces<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    edges: &[f64],
    tol: Tolerance,
    max_intervals: usize,
) -> Result<Estimate<T>> {
    if edges.len() < 2 {
        return Ok(Estimate::new(T::zero(), 0.0));
    }
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Piece<T>> = Vec::new();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(f, w[0], w[1]);
            heap.push(Piece { a: w[0], b: w[1], value, error });
        }
    }
    let total = |heap: &BinaryHeap<Piece<T>>, settled: &[Piece<T>]| {
        let mut v = T::zero();
        let mut e = 0.0;
        for p in heap.iter().chain(settled.iter()) {
            v = v + p.value;
            e += p.error;
        }
        (v, e)
    };
    let (mut value, mut error) = total(&heap, &settled);
    let mut count = heap.len();
    while error > tol.target(value.magnitude()) && count < max_intervals {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-15 * worst.a.abs().max(1e-300) {
            settled.push(worst);
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        value = value - worst.value + v1 + v2;
        error += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
        if count % 64 == 0 {
            (value, error) = total(&heap, &settled);
        }
    }
    let (value, error) = total(&heap, &settled);
    if !value.is_finite_value() || !error.is_finite() {
        return Err(Error::NonConvergence("integrand produced non-finite values".into()));
    }
    Ok(Estimate::new(value, error))
}

/// `int_a^b f` with interior break points.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    integrate_pieces(f, &partition(a, b, breaks), tol, MAX_INTERVALS)
}

/// `int_0^1 d^(alpha - 1) g(d) dd` for a `g` that is smooth near `d = 0`.
///
/// A Gauss-Jacobi panel absorbs the power at the origin; the panel is halved
/// until the 24- and 48-point rules agree, and everything to its right goes to
/// the adaptive integrator with the weight evaluated explicitly.
pub fn endpoint_weighted<T: QuadValue, F: Fn(f64) -> T>(
    g: &F,
    alpha: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("endpoint exponent must be positive, got {alpha}")));
    }
    let weighted = |d: f64| g(d) * d.powf(alpha - 1.0);
    if alpha == 1.0 {
        return integrate(&weighted, 0.0, 1.0, breaks, tol);
    }
    let coarse = jacobi_rule(24, alpha)?;
    let fine = jacobi_rule(48, alpha)?;
    let panel = |len: f64, rule: &crate::numerics::quad::QuadRule| {
        let scale = len.powf(alpha);
        let mut acc = T::zero();
        for (&c, &w) in rule.complements().iter().zip(rule.weights()) {
            acc = acc + g(len * c) * w;
        }
        acc * scale
    };
    let mut edges = partition(0.0, 1.0, breaks);
    let mut len = edges[1];
    let mut extra = Vec::new();
    let mut head = None;
    for _ in 0..60 {
        let c = panel(len, &coarse);
        let f = panel(len, &fine);
        let diff = (f - c).magnitude();
        if diff <= tol.target(f.magnitude()) || len < 1e-300 {
            head = Some(Estimate::new(f, diff));
            break;
        }
        extra.push(0.5 * len);
        len *= 0.5;
    }
    let head = head.ok_or_else(|| {
        Error::NonConvergence("endpoint panel did not settle after 60 halvings".into())
    })?;
    edges[0] = len;
    edges.extend(extra);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let rest = integrate_pieces(&weighted, &edges, tol, MAX_INTERVALS)?;
    Ok(Estimate::new(head.value + rest.value, head.error + rest.error))
}

/// `int_0^1 (1 - x)^(alpha - 1) g(x) dx`, with `breaks` given in `x`.
pub fn jacobi_weighted<T: QuadValue, F: Fn(f64) -> T>(
    g: &F,
    alpha: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    let mirrored: Vec<f64> = breaks.iter().map(|b| 1.0 - b).collect();
    endpoint_weighted(&|d: f64| g(1.0 - d), alpha, &mirrored, tol)
}

/// How an integrand behaves at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Zero beyond `end`.
    Compact { end: f64 },
    /// Bounded by a multiple of `(1 + t)^k e^(-rate t)` for moderate `k`.
    Exponential { rate: f64 },
    /// Bounded by a multiple of `t^(-power)`.
    Algebraic { power: f64 },
}

/// Truncation point for exponential tails, in units of `1 / rate`.
const EXP_CUTOFF: f64 = 80.0;

/// `int_0^inf f(t) dt` with the tail handled according to `tail`.
pub fn halfline<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    tail: Tail,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    halfline_with_budget(f, tail, breaks, tol, MAX_INTERVALS)
}

pub(crate) fn halfline_with_budget<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    tail: Tail,
    breaks: &[f64],
    tol: Tolerance,
    budget: usize,
) -> Result<Estimate<T>> {
    match tail {
        Tail::Compact { end } => {
            if !(end >= 0.0) {
                return Err(invalid(format!("support end must be nonnegative, got {end}")));
            }
            if end == 0.0 {
                return Ok(Estimate::new(T::zero(), 0.0));
            }
            integrate_pieces(f, &partition(0.0, end, breaks), tol, budget)
        }
        Tail::Exponential { rate } => {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(invalid(format!("decay rate must be positive, got {rate}")));
            }
            let end = EXP_CUTOFF / rate;
            let mut pts: Vec<f64> = (-6..=6).map(|k| 2f64.powi(k) / rate).collect();
            pts.extend_from_slice(breaks);
            integrate_pieces(f, &partition(0.0, end, &pts), tol, budget)
        }
        Tail::Algebraic { power } => {
            if !(power > 1.0) {
                return Err(Error::UnsupportedFunction(format!(
                    "decay t^-{power} is not integrable at infinity"
                )));
            }
            // t = u / (1 - u)
            let mapped = |u: f64| {
                let v = 1.0 - u;
                f(u / v) * (1.0 / (v * v))
            };
            let mut pts: Vec<f64> = vec![0.5, 0.9, 0.99, 0.999];
            pts.extend(breaks.iter().map(|b| b / (1.0 + b)));
            integrate_pieces(&mapped, &partition(0.0, 1.0, &pts), tol, budget)
        }
    }
}

/// `int_0^inf r^(alpha - 1) g(r) dr`, splitting at `r0` into a Jacobi panel and
/// a half-line remainder.
pub fn origin_power_halfline<T: QuadValue, F: Fn(f64) -> T>(
    g: &F,
    alpha: f64,
    r0: f64,
    tail: Tail,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    if !(r0 > 0.0) {
        return Err(invalid(format!("panel length must be positive, got {r0}")));
    }
    let r0 = match tail {
        Tail::Compact { end } if end <= r0 => end,
        _ => r0,
    };
    if r0 == 0.0 {
        return Ok(Estimate::new(T::zero(), 0.0));
    }
    let inner_breaks: Vec<f64> = breaks.iter().filter(|b| **b < r0).map(|b| b / r0).collect();
    let head = endpoint_weighted(&|d: f64| g(r0 * d), alpha, &inner_breaks, tol)?;
    let head_value = head.value * r0.powf(alpha);
    let shifted = |s: f64| g(r0 + s) * (r0 + s).powf(alpha - 1.0);
    let shifted_tail = match tail {
        Tail::Compact { end } => Tail::Compact { end: end - r0 },
        other => other,
    };
    let outer_breaks: Vec<f64> = breaks.iter().filter(|b| **b > r0).map(|b| b - r0).collect();
    let rest = halfline(&shifted, shifted_tail, &outer_breaks, tol)?;
    Ok(Estimate::new(
        head_value + rest.value,
        head.error * r0.powf(alpha) + rest.error,
    ))
}
