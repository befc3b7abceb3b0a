//! Property suites, one per stated invariant, runnable as a single report.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fbm::{empirical_covariance, sample_paths, FbmConfig, Mode};
use crate::func::{smooth_test_family, RealFn};
use crate::kernels::{
    covariance_n, covariance_n_direct, gram, kernel_k, reproducing_residual, GramSource, KernelSpec, Strategy,
};
use crate::laplace::checks::{bound_sweep, default_lattice};
use crate::laplace::kernel::{inner_quadrature, kernel_gram, kernel_k_complex};
use crate::laplace::{frak_basis, laplace, laplace_laguerre, HalfPlanePoint};
use crate::numerics::hyp::hyp2f1_kernel;
use crate::numerics::laguerre::{laguerre_fn, laguerre_fn_explicit};
use crate::numerics::linalg::cholesky_spd;
use crate::numerics::quad::{gauss_jacobi_endpoint, gauss_legendre};
use crate::ops::cesaro::{cesaro_star, cesaro_star_subordinated, commutation_residual};
use crate::ops::norm::{pointwise_bound_constant, pointwise_bound_ratios, theta_norm_pair};
use crate::ops::weyl::{homogeneity_residual, weyl_derivative, weyl_integral_fn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Multiplies every suite tolerance; below 1 tightens.
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tolerance_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub module: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual / tolerance over the cases, capped at `f64::MAX`.
    pub worst_ratio: f64,
    pub worst_case: String,
    pub pass: bool,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub suites: Vec<SuiteResult>,
    pub failed: usize,
}

struct Cases {
    scale: f64,
    cases: usize,
    failures: usize,
    worst_ratio: f64,
    worst_case: String,
}

impl Cases {
    fn new(opts: &VerifyOptions) -> Cases {
        Cases { scale: opts.tolerance_scale, cases: 0, failures: 0, worst_ratio: 0.0, worst_case: String::new() }
    }

    /// Records `residual <= tol` (after scaling); an error counts as a failure.
    fn check(&mut self, label: impl Into<String>, residual: Result<f64>, tol: f64) {
        self.cases += 1;
        let label = label.into();
        match residual {
            Ok(r) => {
                let limit = tol * self.scale;
                let ratio = if limit > 0.0 { r / limit } else if r == 0.0 { 0.0 } else { f64::INFINITY };
                if !(r <= limit) {
                    self.failures += 1;
                }
                if !(ratio <= self.worst_ratio) {
                    self.worst_ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
                    self.worst_case = format!("{label}: residual {r:.3e}, tolerance {limit:.3e}");
                }
            }
            Err(e) => {
                self.failures += 1;
                self.worst_ratio = f64::INFINITY;
                self.worst_case = format!("{label}: {e}");
            }
        }
    }

    /// Like [`Cases::check`] for a proved bound or a statistical limit, which
    /// the tolerance scale does not touch.
    fn check_fixed(&mut self, label: impl Into<String>, residual: Result<f64>, limit: f64) {
        let scale = std::mem::replace(&mut self.scale, 1.0);
        self.check(label, residual, limit);
        self.scale = scale;
    }

    /// Records a pass/fail case with no residual.
    fn flag(&mut self, label: impl Into<String>, ok: Result<bool>) {
        let r = ok.map(|b| if b { 0.0 } else { f64::INFINITY });
        self.check(label, r, 1.0);
    }
}

type SuiteFn = fn(&mut Cases) -> ();

/// Names and modules of every suite, in report order.
pub fn suite_names() -> Vec<(&'static str, &'static str)> {
    SUITES.iter().map(|(n, m, _)| (*n, *m)).collect()
}

const SUITES: &[(&str, &str, SuiteFn)] = &[
    ("quadrature-exactness", "numerics-core", quadrature_exactness),
    ("hyp2f1-euler-oracle", "numerics-core", hyp2f1_euler_oracle),
    ("laguerre-recurrence", "numerics-core", laguerre_recurrence),
    ("cholesky-reconstruction", "numerics-core", cholesky_reconstruction),
    ("cesaro-commutation", "fractional-ops", cesaro_commutation),
    ("cesaro-subordination", "fractional-ops", cesaro_subordination),
    ("weyl-round-trip", "fractional-ops", weyl_round_trip),
    ("weyl-homogeneity", "fractional-ops", weyl_homogeneity),
    ("weyl-pointwise-bound", "fractional-ops", weyl_pointwise_bound),
    ("theta-embedding", "fractional-ops", theta_embedding),
    ("kernel-strategy-agreement", "kernels", kernel_strategy_agreement),
    ("kernel-reproducing", "kernels", kernel_reproducing),
    ("kernel-self-similarity", "kernels", kernel_self_similarity),
    ("covariance-n-identity", "kernels", covariance_identity),
    ("gram-psd", "kernels", gram_psd),
    ("half-plane-gram-psd", "laplace-domain", half_plane_gram_psd),
    ("half-plane-scaling", "laplace-domain", half_plane_scaling),
    ("half-plane-diagonal-real", "laplace-domain", half_plane_diagonal_real),
    ("laplace-laguerre-closed-form", "laplace-domain", laplace_laguerre_closed_form),
    ("frak-basis-routes", "laplace-domain", frak_basis_routes),
    ("estimation-bounds", "laplace-domain", estimation_bounds),
    ("fbm-reproducible", "fbm-sim", fbm_reproducible),
    ("fbm-brownian-variance", "fbm-sim", fbm_brownian_variance),
    ("fbm-self-similarity", "fbm-sim", fbm_self_similarity),
];

/// Runs one suite by name.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> Option<SuiteResult> {
    let (n, m, f) = SUITES.iter().find(|(n, _, _)| *n == name)?;
    let start = Instant::now();
    let mut cases = Cases::new(opts);
    f(&mut cases);
    Some(SuiteResult {
        name: n.to_string(),
        module: m.to_string(),
        cases: cases.cases,
        failures: cases.failures,
        worst_ratio: cases.worst_ratio.min(f64::MAX),
        worst_case: cases.worst_case,
        pass: cases.failures == 0 && cases.cases > 0,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs every suite.
pub fn run_all(opts: &VerifyOptions) -> VerifyReport {
    let suites: Vec<SuiteResult> = SUITES.iter().filter_map(|(n, _, _)| run_suite(n, opts)).collect();
    let failed = suites.iter().filter(|s| !s.pass).count();
    VerifyReport { options: *opts, suites, failed }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn quadrature_exactness(c: &mut Cases) {
    for n in [1usize, 2, 5, 16, 32, 64] {
        let r = gauss_legendre(n).map(|rule| {
            (0..2 * n as i32)
                .map(|k| rel(rule.integrate(|x| x.powi(k)), 1.0 / (k as f64 + 1.0)))
                .fold(0.0, f64::max)
        });
        c.check(format!("legendre n={n}"), r, 1e-12);
        for alpha in [0.05, 0.5, 1.5, 3.0] {
            let r = gauss_jacobi_endpoint(n, alpha).and_then(|rule| {
                let mut worst = 0.0f64;
                for k in [0, 1, n, 2 * n - 1] {
                    // B(k+1, a) as a product, accurate for large k
                    let exact = (1..=k).fold(1.0 / alpha, |p, j| p * j as f64 / (j as f64 + alpha));
                    worst = worst.max(rel(rule.integrate(|x| x.powi(k as i32)), exact));
                }
                Ok::<_, crate::Error>(worst)
            });
            c.check(format!("jacobi n={n} a={alpha}"), r, 1e-12);
        }
    }
}

fn hyp2f1_euler_oracle(c: &mut Cases) {
    // 2F1(1-a, 1; a+1; x) = a int_0^1 (1-y)^(a-1) (1-xy)^(a-1) dy
    let xs = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999, 1.0 - 1e-6];
    for a in [0.6, 0.75, 1.0, 1.5, 2.0, 3.0] {
        for x in xs {
            let r = hyp2f1_kernel(a, x).and_then(|h| {
                let q = inner_quadrature(a, 1.0 - x)?;
                Ok(rel(h.value, a * q.value))
            });
            c.check(format!("a={a} x={x}"), r, 1e-9);
        }
    }
}

fn laguerre_recurrence(c: &mut Cases) {
    for m in 0..=10 {
        for t in [0.1, 1.0, 10.0] {
            let a = laguerre_fn(m, t);
            let b = laguerre_fn_explicit(m, t);
            // relative to the size of the terms when the value itself is tiny
            let scale = b.abs().max((-0.5 * t).exp() * 1e-3);
            c.check(format!("m={m} t={t}"), Ok((a - b).abs() / scale), 1e-10);
        }
    }
}

fn log_grid(rng: &mut ChaCha20Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            (lo.ln() + u * (hi.ln() - lo.ln())).exp()
        })
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn cholesky_reconstruction(c: &mut Cases) {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for (k, source) in [GramSource::CovarianceB(0.0), GramSource::CovarianceB(0.7), GramSource::CovarianceN(1.5)]
        .into_iter()
        .enumerate()
    {
        let grid = log_grid(&mut rng, 24, 0.1, 10.0);
        let r = gram(source, &grid).and_then(|g| {
            let f = cholesky_spd(&g.entries)?;
            let back = &f.lower * f.lower.transpose();
            let norm = g.entries.amax();
            let dev = (back - &g.entries).amax();
            Ok(dev / (f.jitter + 1e-12 * norm))
        });
        c.check(format!("matrix {k}"), r, 1.0);
    }
    let mut m = DMatrix::<f64>::zeros(3, 3);
    m[(0, 0)] = 4.0;
    m[(1, 1)] = 1e-20;
    m[(2, 2)] = 1.0;
    let r = cholesky_spd(&m).map(|f| ((&f.lower * f.lower.transpose()) - &m).amax() / (f.jitter + 1e-12 * 4.0));
    c.check("near-singular diagonal", r, 1.0);
}

fn cesaro_commutation(c: &mut Cases) {
    let f = RealFn::exponential(1.0).expect("valid rate");
    for (a, b) in [(1.0, 1.0), (0.7, 1.3), (2.0, 0.5)] {
        for t in [0.5, 1.0, 3.0] {
            let r = commutation_residual(&f, a, b, t).map(|e| e.value);
            c.check(format!("a={a} b={b} t={t}"), r, 1e-7);
        }
    }
}

fn cesaro_subordination(c: &mut Cases) {
    for (name, f) in smooth_test_family() {
        for a in [0.6, 1.0, 2.5] {
            for t in [0.2, 1.0, 5.0] {
                let r = cesaro_star(&f, a, t)
                    .and_then(|d| Ok((d.value - cesaro_star_subordinated(&f, a, t)?.value).abs()));
                c.check(format!("{name} a={a} t={t}"), r, 1e-8);
            }
        }
    }
}

fn weyl_round_trip(c: &mut Cases) {
    let family = [
        ("exp(-t)", RealFn::exponential(1.0).expect("valid rate")),
        ("exp(-2t)", RealFn::exponential(2.0).expect("valid rate")),
        ("l_1", RealFn::laguerre(1)),
    ];
    for (name, g) in family {
        for a in [0.4, 0.7, 1.5] {
            let wg = match weyl_integral_fn(&g, a) {
                Ok(w) => w,
                Err(e) => {
                    c.check(format!("{name} a={a}"), Err(e), 1e-6);
                    continue;
                }
            };
            for t in [0.5, 2.0] {
                let r = weyl_derivative(&wg, a, t).map(|v| (v.value - g.eval(t)).abs());
                c.check(format!("{name} a={a} t={t}"), r, 1e-6);
            }
        }
    }
}

fn weyl_homogeneity(c: &mut Cases) {
    let f = RealFn::exponential(1.0).expect("valid rate");
    for a in [0.3, 0.6, 1.0, 1.7] {
        for lambda in [0.5, 2.0] {
            for t in [0.5, 1.0, 2.0] {
                let r = homogeneity_residual(&f, a, lambda, t).map(|e| e.value);
                c.check(format!("a={a} l={lambda} t={t}"), r, 1e-6);
            }
        }
    }
}

fn weyl_pointwise_bound(c: &mut Cases) {
    let ts = [0.1, 0.3, 1.0, 3.0, 10.0];
    let family = [
        ("exp(-t)", RealFn::exponential(1.0).expect("valid rate")),
        ("t exp(-t)", RealFn::power_exponential(1, 1.0).expect("valid rate")),
        ("l_1", RealFn::laguerre(1)),
    ];
    for (name, f) in family {
        for a in [0.5, 1.0] {
            let r = pointwise_bound_constant(a, a + 1.0).and_then(|constant| {
                let ratios = pointwise_bound_ratios(&f, a, a + 1.0, &ts)?;
                Ok(ratios.into_iter().fold(0.0, f64::max) / constant)
            });
            c.check_fixed(format!("{name} a={a}"), r, 1.0);
        }
    }
}

fn theta_embedding(c: &mut Cases) {
    for (name, f) in smooth_test_family() {
        for a in [0.0001, 0.5, 1.0, 1.7] {
            let r = theta_norm_pair(&f, a).map(|(l, r)| (l - r).abs());
            c.check(format!("{name} a={a}"), r, 1e-8);
        }
    }
}

fn grid5() -> [f64; 5] {
    [0.1, 10f64.powf(-0.5), 1.0, 10f64.powf(0.5), 10.0]
}

fn kernel_strategy_agreement(c: &mut Cases) {
    for a in [0.75f64, 1.0, 1.5, 2.0, 3.0] {
        let mut strategies = vec![Strategy::Hypergeometric, Strategy::QuadratureOracle];
        if a.fract() == 0.0 {
            strategies.push(Strategy::IntegerSum);
        }
        for s in grid5() {
            for t in grid5() {
                let r = strategies
                    .iter()
                    .map(|&st| KernelSpec::new(a, st).and_then(|spec| kernel_k(spec, s, t)))
                    .collect::<Result<Vec<f64>>>()
                    .map(|v| {
                        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
                        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
                        hi - lo
                    });
                c.check(format!("a={a} s={s:.3} t={t:.3}"), r, 1e-8);
            }
        }
    }
}

fn kernel_reproducing(c: &mut Cases) {
    let family = [
        ("exp(-t)", RealFn::exponential(1.0).expect("valid rate")),
        ("t exp(-t)", RealFn::power_exponential(1, 1.0).expect("valid rate")),
        ("l_1", RealFn::laguerre(1)),
    ];
    for (name, f) in family {
        for a in [1.0, 1.5, 2.0] {
            for t in [0.5, 1.0, 2.0] {
                let r = reproducing_residual(&f, a, t).map(|e| e.value);
                c.check(format!("{name} a={a} t={t}"), r, 1e-5);
            }
        }
    }
}

fn kernel_self_similarity(c: &mut Cases) {
    for a in [0.75, 1.5, 2.0, 3.0] {
        let spec = KernelSpec::new(a, Strategy::Hypergeometric).expect("valid order");
        for (s, t) in [(0.3, 1.7), (1.0, 1.0), (2.0, 5.0)] {
            for lambda in [0.5, 2.0, 10.0] {
                let r = kernel_k(spec, lambda * s, lambda * t)
                    .and_then(|scaled| Ok(rel(lambda * scaled, kernel_k(spec, s, t)?)));
                c.check(format!("a={a} s={s} t={t} l={lambda}"), r, 1e-10);
            }
        }
    }
}

fn covariance_identity(c: &mut Cases) {
    for a in [0.3, 0.75, 1.0, 1.5, 2.0, 3.0] {
        for s in grid5() {
            for t in grid5() {
                if s == t && a <= 0.5 {
                    continue;
                }
                let r = covariance_n_direct(a, t, s).and_then(|d| Ok((d.value - covariance_n(a, t, s)?).abs()));
                c.check(format!("a={a} s={s:.3} t={t:.3}"), r, 1e-8);
            }
        }
    }
}

fn gram_psd(c: &mut Cases) {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let sources = [
        GramSource::Kernel(KernelSpec::new(0.75, Strategy::Hypergeometric).expect("valid order")),
        GramSource::Kernel(KernelSpec::new(1.5, Strategy::Hypergeometric).expect("valid order")),
        GramSource::Kernel(KernelSpec::new(2.0, Strategy::IntegerSum).expect("valid order")),
        GramSource::CovarianceN(0.8),
        GramSource::CovarianceB(0.0),
        GramSource::CovarianceB(1.3),
    ];
    for (k, source) in sources.into_iter().enumerate() {
        for size in [4usize, 16, 64] {
            let grid = log_grid(&mut rng, size, 0.05, 20.0);
            let r = gram(source, &grid).map(|g| {
                let scale = g.entries.diagonal().amax();
                g.factor.jitter / (1e-10 * scale)
            });
            c.check(format!("source {k} size {size}"), r, 1.0);
        }
    }
}

fn probe_points() -> Vec<HalfPlanePoint> {
    let mut out = Vec::new();
    for m in [0.3, 1.0, 4.0] {
        for th in [-1.2, 0.0, 0.9] {
            out.push(HalfPlanePoint::new(m, th).expect("inside the half-plane"));
        }
    }
    out
}

fn half_plane_gram_psd(c: &mut Cases) {
    let pts = probe_points();
    for a in [0.5, 1.0, 2.0] {
        let r = kernel_gram(a, &pts).map(|g| {
            let scale = (0..pts.len()).map(|i| g.entries[(i, i)].re).fold(0.0, f64::max);
            g.jitter / (1e-10 * scale)
        });
        c.check(format!("a={a} n={}", pts.len()), r, 1.0);
    }
}

fn half_plane_scaling(c: &mut Cases) {
    let z = HalfPlanePoint::from_complex(Complex64::new(1.0, 1.0)).expect("inside the half-plane");
    let w = HalfPlanePoint::from_complex(Complex64::new(2.0, -1.0)).expect("inside the half-plane");
    for a in [0.3, 0.8, 1.5] {
        for lambda in [0.5, 2.0, 10.0] {
            let r = (|| {
                let base = kernel_k_complex(a, z, w)?;
                let scaled = kernel_k_complex(a, z.scale(lambda)?, w.scale(lambda)?)?;
                Ok((scaled.value * lambda - base.value).norm() / base.value.norm())
            })();
            c.check(format!("a={a} l={lambda}"), r, 1e-9);
        }
    }
    let r = (|| {
        let a = kernel_k_complex(1.5, z, w)?;
        let b = kernel_k_complex(1.5, w, z)?;
        Ok((a.value - b.value.conj()).norm())
    })();
    c.check("hermitian a=1.5", r, 1e-9);
}

fn half_plane_diagonal_real(c: &mut Cases) {
    for a in [0.3, 0.75, 1.0, 2.0] {
        for z in probe_points() {
            let r = kernel_k_complex(a, z, z).map(|k| k.value.im.abs());
            c.check(format!("a={a} |z|={} th={}", z.modulus(), z.theta()), r, 1e-9);
        }
    }
}

fn laplace_laguerre_closed_form(c: &mut Cases) {
    let pts = probe_points();
    for m in 0..=8 {
        let f = RealFn::laguerre(m);
        for z in &pts {
            let r = laplace(&f, *z).map(|v| (v.value - laplace_laguerre(m, *z).value).norm());
            c.check(format!("m={m} |z|={} th={}", z.modulus(), z.theta()), r, 1e-8);
        }
    }
}

fn frak_basis_routes(c: &mut Cases) {
    for a in [0.3, 1.0, 1.5, 2.5] {
        for m in [0usize, 1, 4, 8] {
            for z in probe_points() {
                let r = frak_basis(m, a, z).map(|v| v.discrepancy());
                c.check(format!("m={m} a={a} |z|={} th={}", z.modulus(), z.theta()), r, 1e-8);
            }
        }
    }
}

fn estimation_bounds(c: &mut Cases) {
    let (alphas, thetas, moduli) = default_lattice();
    match bound_sweep(&alphas, &thetas, &moduli) {
        Ok(rows) => {
            for r in rows {
                let label = format!("a={} |z|={} th={:.4}", r.alpha, r.modulus, r.theta);
                c.flag(label, Ok(r.pass));
            }
        }
        Err(e) => c.flag("lattice", Err(e)),
    }
}

fn fbm_reproducible(c: &mut Cases) {
    for (alpha, mode) in [(0.0, Mode::BProcess), (0.8, Mode::BProcess), (1.5, Mode::NProcess)] {
        let cfg = FbmConfig { grid: vec![0.25, 0.5, 1.0, 2.0], alpha, n_paths: 64, seed: 2024, mode };
        let r = sample_paths(&cfg).and_then(|a| Ok(a == sample_paths(&cfg)?));
        c.flag(format!("a={alpha} {mode:?}"), r);
    }
}

fn fbm_brownian_variance(c: &mut Cases) {
    let grid = vec![0.25, 0.5, 1.0, 2.0];
    let cfg = FbmConfig { grid: grid.clone(), alpha: 0.0, n_paths: 10_000, seed: 99, mode: Mode::BProcess };
    match sample_paths(&cfg).and_then(|e| empirical_covariance(&e)) {
        Ok(report) => {
            for (i, t) in grid.iter().enumerate() {
                let dev = (report.empirical[i][i] - t).abs();
                c.check_fixed(format!("t={t}"), Ok(dev / report.standard_errors[i][i]), 5.0);
            }
        }
        Err(e) => c.check_fixed("ensemble", Err(e), 5.0),
    }
}

fn fbm_self_similarity(c: &mut Cases) {
    for a in [0.0, 0.3, 1.0, 2.5] {
        for lambda in [0.5, 3.0] {
            for (t, s) in [(0.2, 0.9), (1.0, 1.0), (2.0, 7.0)] {
                let r = covariance_n(a + 1.0, lambda * t, lambda * s).and_then(|scaled| {
                    Ok(rel(scaled, lambda.powf(2.0 * a + 1.0) * covariance_n(a + 1.0, t, s)?))
                });
                c.check(format!("a={a} l={lambda} t={t} s={s}"), r, 1e-10);
            }
        }
    }
}
