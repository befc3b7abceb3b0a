//! Gauss rules on the unit interval.
//!
//! Two families are provided: plain Gauss-Legendre, and Gauss-Jacobi rules for
//! the one-sided weight `(1 - x)^(alpha - 1)` on `[0, 1]`, which absorbs the
//! endpoint singularity of every Riemann-Liouville style kernel in the crate.
//! Rules are validated against exact moments when they are built.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};

/// Where a rule lives and which weight it integrates against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[0, 1]` with unit weight.
    UnitInterval,
    /// `[0, 1]` with weight `(1 - x)^(alpha - 1)`.
    Jacobi { alpha: f64 },
    /// `(0, inf)` obtained from a unit-interval rule through `t = u / (1 - u)`.
    HalfLine,
}

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    complements: Vec<f64>,
    weights: Vec<f64>,
    domain: Domain,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `1 - x_i`, computed without cancellation near the right end.
    pub fn complements(&self) -> &[f64] {
        &self.complements
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(x_i)`; the weight function of the domain is implicit.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Maps a unit-interval rule onto `(0, inf)` with `t = u / (1 - u)`.
    pub fn to_half_line(&self) -> Result<QuadRule> {
        if self.domain != Domain::UnitInterval {
            return Err(invalid("only unit-interval rules can be mapped to the half-line"));
        }
        let (nodes, weights): (Vec<f64>, Vec<f64>) = self
            .nodes
            .iter()
            .zip(&self.complements)
            .zip(&self.weights)
            .map(|((&u, &v), &w)| (u / v, w / (v * v)))
            .unzip();
        let complements = vec![f64::INFINITY; nodes.len()];
        Ok(QuadRule { nodes, complements, weights, domain: Domain::HalfLine })
    }

    fn check_invariants(&self) -> Result<()> {
        let n = self.nodes.len();
        let ordered = self.nodes.windows(2).all(|p| p[0] < p[1]);
        let interior = self.nodes.iter().all(|&x| x > 0.0 && x < 1.0);
        let positive = self.weights.iter().all(|&w| w > 0.0 && w.is_finite());
        if !(ordered && interior && positive) {
            return Err(Error::NonConvergence(format!(
                "{n}-point rule violates node ordering or weight positivity"
            )));
        }
        let alpha = match self.domain {
            Domain::UnitInterval => 1.0,
            Domain::Jacobi { alpha } => alpha,
            Domain::HalfLine => return Ok(()),
        };
        // exactness on monomials x^k up to degree 2n - 1
        for k in [0, 1, n, 2 * n - 1] {
            // B(k + 1, alpha) = (1/alpha) prod_{j<=k} j / (j + alpha)
            let exact = (1..=k).fold(1.0 / alpha, |acc, j| acc * j as f64 / (j as f64 + alpha));
            let got = self.integrate(|x| x.powi(k as i32));
            if (got - exact).abs() > 1e-12 * exact {
                return Err(Error::NonConvergence(format!(
                    "{n}-point rule integrates x^{k} to {got:e}, expected {exact:e}"
                )));
            }
        }
        Ok(())
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Result<QuadRule> {
    if n == 0 {
        return Err(invalid("rule size must be at least 1"));
    }
    let mut nodes = vec![0.0; n];
    let mut complements = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, q) = legendre_pair(n, z);
            dp = n as f64 * (z * p - q) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (p, q) = legendre_pair(n, z);
        if dp == 0.0 || !p.is_finite() {
            dp = n as f64 * (z * p - q) / (z * z - 1.0);
        }
        let w = 1.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        complements[i] = nodes[n - 1 - i];
        complements[n - 1 - i] = nodes[i];
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
        complements[n / 2] = 0.5;
    }
    let rule = QuadRule { nodes, complements, weights, domain: Domain::UnitInterval };
    rule.check_invariants()?;
    Ok(rule)
}

/// `(P_n(z), P_{n-1}(z))` by the three-term recurrence.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let (mut p, mut q) = (1.0, 0.0);
    for j in 1..=n {
        let r = q;
        q = p;
        p = ((2 * j - 1) as f64 * z * q - (j - 1) as f64 * r) / j as f64;
    }
    (p, q)
}

/// `n`-point rule for `int_0^1 (1 - x)^(alpha - 1) f(x) dx`.
///
/// Nodes come from the Golub-Welsch eigenvalue problem and are polished by
/// Newton iteration on the Jacobi polynomial; weights use the closed form in
/// terms of `P_n'`, which keeps full relative accuracy near the singular end.
pub fn gauss_jacobi_endpoint(n: usize, alpha: f64) -> Result<QuadRule> {
    if n == 0 {
        return Err(invalid("rule size must be at least 1"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("Jacobi order must be positive, got {alpha}")));
    }
    // weight (1 - xi)^a (1 + xi)^b on [-1, 1]
    let a = alpha - 1.0;
    let b = 0.0;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jac[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + a + b;
            let off = if k == 0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))).sqrt()
            } else {
                (4.0 * j * (j + a) * (j + b) * (j + a + b) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mut xi: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    xi.sort_by(f64::total_cmp);

    // with b = 0 the Gamma ratio in the weight formula is exactly 1
    let ln_norm = (a + 1.0) * std::f64::consts::LN_2;
    let mut nodes = Vec::with_capacity(n);
    let mut complements = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    // Newton in d = 1 - xi keeps relative accuracy for nodes crowding the
    // singular end.
    for &x0 in xi.iter().rev() {
        let mut d = 1.0 - x0;
        for _ in 0..8 {
            let (p, dp) = jacobi_at_complement(n, a, b, d);
            let step = p / dp;
            d += step;
            if step.abs() < 1e-16 * d {
                break;
            }
        }
        let (_, dp) = jacobi_at_complement(n, a, b, d);
        let w = (ln_norm - (d * (2.0 - d) * dp * dp).ln()).exp();
        // map to [0, 1]: (1 - x) = (1 - xi) / 2, dx = dxi / 2
        nodes.push(1.0 - 0.5 * d);
        complements.push(0.5 * d);
        weights.push(w * 2f64.powf(-(a + 1.0)));
    }
    nodes.reverse();
    complements.reverse();
    weights.reverse();
    let rule = QuadRule { nodes, complements, weights, domain: Domain::Jacobi { alpha } };
    rule.check_invariants()?;
    Ok(rule)
}

/// `(P_n^{(a,b)}(xi), d/dxi P_n^{(a,b)}(xi))` at `xi = 1 - d`.
fn jacobi_at_complement(n: usize, a: f64, b: f64, d: f64) -> (f64, f64) {
    let nf = n as f64;
    if 0.5 * nf * (nf + a + b + 1.0) * d <= 2.0 {
        return jacobi_series(n, a, b, d);
    }
    let mut prev = 1.0;
    let mut cur = (a + 1.0) - 0.5 * (a + b + 2.0) * d;
    if n == 1 {
        return (cur, 0.5 * (a + b + 2.0));
    }
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let a1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let a2 = (s - 1.0) * (a * a - b * b);
        let a3 = (s - 2.0) * (s - 1.0) * s;
        let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (((a2 + a3) - a3 * d) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    let s = 2.0 * nf + a + b;
    let deriv = (nf * ((a - b - s) + s * d) * cur + 2.0 * (nf + a) * (nf + b) * prev)
        / (s * d * (2.0 - d));
    (cur, deriv)
}

/// `P_n(1 - d) = C(n+a, n) 2F1(-n, n+a+b+1; a+1; d/2)`, which keeps full
/// relative accuracy in `d` near the endpoint where the recurrence does not.
fn jacobi_series(n: usize, a: f64, b: f64, d: f64) -> (f64, f64) {
    let nf = n as f64;
    let lead = (1..=n).fold(1.0, |p, j| p * (j as f64 + a) / j as f64);
    let (mut t, mut sum, mut dsum) = (1.0, 1.0, 0.0);
    for k in 0..n {
        let kf = k as f64;
        t *= (kf - nf) * (kf + nf + a + b + 1.0) / ((kf + a + 1.0) * (kf + 1.0)) * 0.5 * d;
        sum += t;
        dsum += (kf + 1.0) * t;
    }
    // dP/dxi = -dP/dd
    (lead * sum, -lead * dsum / d)
}

type RuleKey = (u8, usize, u64);

static RULES: LazyLock<RwLock<HashMap<RuleKey, Arc<QuadRule>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

fn cached(key: RuleKey, build: impl FnOnce() -> Result<QuadRule>) -> Result<Arc<QuadRule>> {
    if let Some(rule) = RULES.read().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build()?);
    RULES
        .write()
        .expect("rule cache poisoned")
        .entry(key)
        .or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}

/// Shared, lazily built Gauss-Legendre rule.
pub fn legendre_rule(n: usize) -> Result<Arc<QuadRule>> {
    cached((0, n, 0), || gauss_legendre(n))
}

/// Shared, lazily built Gauss-Jacobi rule.
pub fn jacobi_rule(n: usize, alpha: f64) -> Result<Arc<QuadRule>> {
    cached((1, n, alpha.to_bits()), || gauss_jacobi_endpoint(n, alpha))
}
