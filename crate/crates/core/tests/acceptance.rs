//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines always reach the test log.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, LN_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cesaro_core::fbm::{empirical_covariance, sample_paths, FbmConfig, Mode};
use cesaro_core::func::smooth_test_family;
use cesaro_core::kernels::{covariance_n, gram, kernel_k, GramSource, KernelSpec, Strategy};
use cesaro_core::laplace::checks::{
    bound_sweep, check_intertwining, default_lattice, hermitian_residual, laplace_plancherel_pair,
};
use cesaro_core::laplace::kernel::{kernel_k_complex, kernel_k_diag};
use cesaro_core::laplace::{frak_basis, laplace, laplace_laguerre, HalfPlanePoint};
use cesaro_core::numerics::special::gamma_fn;
use cesaro_core::ops::cesaro::{cesaro_star, cesaro_star_subordinated, commutation_residual};
use cesaro_core::ops::norm::theta_norm_pair;
use cesaro_core::ops::weyl::{homogeneity_residual, weyl_derivative, weyl_integral_fn};
use cesaro_core::kernels::reproducing_residual;
use cesaro_core::{RealFn, Result};

/// Worst `residual / tolerance` over a criterion's cases; an error counts as infinite.
#[derive(Default)]
struct Tally {
    cases: usize,
    worst: f64,
    label: String,
}

impl Tally {
    fn check(&mut self, label: impl FnOnce() -> String, residual: Result<f64>, tol: f64) {
        self.cases += 1;
        let (ratio, text) = match residual {
            Ok(r) if r.is_nan() => (f64::INFINITY, format!("{}: NaN", label())),
            Ok(r) => (r / tol, format!("{}: {r:.3e} vs {tol:.0e}", label())),
            Err(e) => (f64::INFINITY, format!("{}: {e}", label())),
        };
        if ratio >= self.worst {
            self.worst = ratio;
            self.label = text;
        }
    }

    fn pass(&self) -> bool {
        self.cases > 0 && self.worst <= 1.0
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn pt(m: f64, th: f64) -> HalfPlanePoint {
    HalfPlanePoint::new(m, th).expect("inside the half-plane")
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn exp_laguerre_family() -> Vec<(&'static str, RealFn)> {
    vec![
        ("exp(-t)", RealFn::exponential(1.0).expect("valid rate")),
        ("l_1", RealFn::laguerre(1)),
        ("l_2", RealFn::laguerre(2)),
    ]
}

fn kernel_closed_forms(t: &mut Tally) {
    let spec = KernelSpec::new(1.0, Strategy::Hypergeometric).unwrap();
    let grid = log_grid(0.05, 20.0, 10);
    for &s in &grid {
        for &u in &grid {
            t.check(|| format!("k_1({s:.3}, {u:.3})"), kernel_k(spec, s, u).map(|k| rel(k, 1.0 / s.max(u))), 1e-12);
        }
    }
    for a in [0.75, 1.0, 1.5, 2.0, 3.0] {
        let spec = KernelSpec::new(a, Strategy::Hypergeometric).unwrap();
        for x in [0.1, 1.0, 10.0] {
            let r = (|| {
                let exact = 1.0 / (gamma_fn(a)?.powi(2) * (2.0 * a - 1.0) * x);
                Ok(rel(kernel_k(spec, x, x)?, exact))
            })();
            t.check(|| format!("k_{a}({x}, {x})"), r, 1e-10);
        }
    }
}

fn strategy_triangulation(t: &mut Tally) {
    let grid = log_grid(0.1, 10.0, 5);
    let route = |a: f64, st: Strategy, s: f64, u: f64| kernel_k(KernelSpec::new(a, st)?, s, u);
    for &s in &grid {
        for &u in &grid {
            for a in [1.0, 2.0, 3.0] {
                let r = (|| {
                    let h = route(a, Strategy::Hypergeometric, s, u)?;
                    let i = route(a, Strategy::IntegerSum, s, u)?;
                    let q = route(a, Strategy::QuadratureOracle, s, u)?;
                    Ok(rel(h, i).max(rel(q, i)))
                })();
                t.check(|| format!("a={a} ({s:.2}, {u:.2}) hyp/int/quad"), r, 1e-8);
            }
            for a in [0.75, 1.5] {
                let r = (|| Ok(rel(route(a, Strategy::Hypergeometric, s, u)?, route(a, Strategy::QuadratureOracle, s, u)?)))();
                t.check(|| format!("a={a} ({s:.2}, {u:.2}) hyp/quad"), r, 1e-8);
            }
        }
    }
}

fn operator_identities(t: &mut Tally) {
    for (name, f) in exp_laguerre_family() {
        for a in [0.6, 1.0, 2.5] {
            for x in [0.2, 1.0, 5.0] {
                let r = (|| Ok((cesaro_star(&f, a, x)?.value - cesaro_star_subordinated(&f, a, x)?.value).abs()))();
                t.check(|| format!("subordination {name} a={a} t={x}"), r, 1e-8);
            }
        }
    }
    for (name, f) in exp_laguerre_family().into_iter().take(2) {
        for (a, b) in [(1.0, 1.0), (0.7, 1.3), (2.0, 0.5)] {
            for x in [0.5, 1.0, 3.0] {
                let r = commutation_residual(&f, a, b, x).map(|e| e.value);
                t.check(|| format!("commutation {name} a={a} b={b} t={x}"), r, 1e-7);
            }
        }
    }
    for (name, g) in exp_laguerre_family() {
        for a in [0.4, 0.7, 1.5] {
            for x in [0.5, 2.0] {
                let r = weyl_integral_fn(&g, a).and_then(|wg| Ok((weyl_derivative(&wg, a, x)?.value - g.eval(x)).abs()));
                t.check(|| format!("weyl round trip {name} a={a} t={x}"), r, 1e-6);
            }
        }
    }
    for (name, f) in exp_laguerre_family().into_iter().take(2) {
        for a in [0.3, 0.6, 1.0, 1.7] {
            for lambda in [0.5, 2.0] {
                for x in [0.5, 2.0] {
                    let r = homogeneity_residual(&f, a, lambda, x).map(|e| e.value);
                    t.check(|| format!("homogeneity {name} a={a} l={lambda} t={x}"), r, 1e-6);
                }
            }
        }
    }
}

fn reproducing_property(t: &mut Tally) {
    for (name, f) in smooth_test_family() {
        for a in [1.0, 1.5, 2.0] {
            for x in [0.5, 1.0, 2.0] {
                let r = reproducing_residual(&f, a, x).map(|e| e.value);
                t.check(|| format!("{name} a={a} t={x}"), r, 1e-5);
            }
        }
    }
}

fn laplace_domain(t: &mut Tally) {
    let pts: Vec<HalfPlanePoint> = [0.2, 1.0, 5.0]
        .iter()
        .flat_map(|&m| [-1.4, -FRAC_PI_3, 0.0, FRAC_PI_3, 1.4].map(|th| pt(m, th)))
        .collect();
    for m in 0..=8 {
        let f = RealFn::laguerre(m);
        for z in &pts {
            let r = laplace(&f, *z).map(|v| (v.value - laplace_laguerre(m, *z).value).norm());
            t.check(|| format!("L l_{m} at {:?}", z.z()), r, 1e-8);
        }
    }
    for a in [0.3, 1.0, 1.5, 2.5] {
        for m in [0, 1, 4, 8] {
            for z in &pts {
                let r = frak_basis(m, a, *z).map(|v| v.discrepancy());
                t.check(|| format!("basis routes m={m} a={a} at {:?}", z.z()), r, 1e-8);
            }
        }
    }
    let family = [("exp(-t)", RealFn::exponential(1.0).unwrap()), ("l_1", RealFn::laguerre(1))];
    for (name, f) in &family {
        for a in [0.5, 1.0, 2.0] {
            for z in [pt(1.0, 0.0), pt(2.0, FRAC_PI_4), pt(0.5, -FRAC_PI_3)] {
                let r = check_intertwining(f, a, z).map(|r| r.plus.value.max(r.star.value));
                t.check(|| format!("intertwining {name} a={a} at {:?}", z.z()), r, 1e-6);
            }
        }
    }
    t.check(|| "K_1(1, 1)".into(), kernel_k_diag(1.0, pt(1.0, 0.0)).map(|k| (k.value - 2.0 * LN_2).abs()), 1e-9);
    let z = pt(1.5, 0.4);
    let w = pt(0.7, -1.1);
    for a in [0.3, 0.8, 1.0, 2.0] {
        t.check(|| format!("hermitian a={a}"), hermitian_residual(a, z, w).map(|d| d.value.norm()), 1e-9);
        for lambda in [0.1, 3.0] {
            let r = (|| {
                let base = kernel_k_complex(a, z, w)?.value;
                let scaled = kernel_k_complex(a, z.scale(lambda)?, w.scale(lambda)?)?.value;
                Ok((scaled * lambda - base).norm() / base.norm())
            })();
            t.check(|| format!("scaling a={a} l={lambda}"), r, 1e-9);
        }
    }
}

fn norm_bounds(t: &mut Tally) {
    let (alphas, thetas, moduli) = default_lattice();
    match bound_sweep(&alphas, &thetas, &moduli) {
        Ok(rows) => {
            for r in rows {
                // the sweep's pass flag already allows the propagated quadrature error
                let ok = if r.pass { 0.0 } else { f64::INFINITY };
                t.check(|| format!("a={} |z|={} th={:.4}", r.alpha, r.modulus, r.theta), Ok(ok), 1.0);
            }
        }
        Err(e) => t.check(|| "lattice".into(), Err(e), 1.0),
    }
    let n = t.cases;
    if n < 175 {
        t.check(|| format!("only {n} lattice points"), Ok(f64::INFINITY), 1.0);
    }
}

fn fbm_criteria(t: &mut Tally) {
    let grid = vec![0.25, 0.5, 1.0, 2.0];
    let cfg = FbmConfig { grid: grid.clone(), alpha: 0.0, n_paths: 10_000, seed: 2024, mode: Mode::BProcess };
    let first = sample_paths(&cfg);
    let second = sample_paths(&cfg);
    let same = match (&first, &second) {
        (Ok(a), Ok(b)) => Ok(if a == b { 0.0 } else { f64::INFINITY }),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    t.check(|| "seed reproducible".into(), same, 1.0);
    match first.and_then(|e| empirical_covariance(&e)) {
        Ok(rep) => {
            for i in 0..grid.len() {
                for j in 0..grid.len() {
                    let dev = (rep.empirical[i][j] - grid[i].min(grid[j])).abs();
                    t.check(|| format!("cov({}, {}) in SE", grid[i], grid[j]), Ok(dev / rep.standard_errors[i][j]), 5.0);
                }
            }
        }
        Err(e) => t.check(|| "covariance".into(), Err(e), 5.0),
    }
    let base = [0.2, 0.9, 1.0, 2.0, 7.0];
    for a in [0.0, 0.3, 1.0, 2.5] {
        for lambda in [0.5, 3.0] {
            let r = (|| {
                let g = gram(GramSource::CovarianceB(a), &base)?;
                let scaled: Vec<f64> = base.iter().map(|x| lambda * x).collect();
                let gs = gram(GramSource::CovarianceB(a), &scaled)?;
                let f = lambda.powf(2.0 * a + 1.0);
                let mut worst = 0.0f64;
                for i in 0..base.len() {
                    for j in 0..base.len() {
                        worst = worst.max(rel(gs.entries[(i, j)], f * g.entries[(i, j)]));
                        worst = worst.max(rel(
                            covariance_n(a + 1.0, lambda * base[i], lambda * base[j])?,
                            f * covariance_n(a + 1.0, base[i], base[j])?,
                        ));
                    }
                }
                Ok(worst)
            })();
            t.check(|| format!("self-similarity a={a} l={lambda}"), r, 1e-10);
        }
    }
}

fn isometry_surrogates(t: &mut Tally) {
    for (name, f) in smooth_test_family() {
        for a in [0.25, 0.5, 1.0, 1.7] {
            let r = theta_norm_pair(&f, a).map(|(l, r)| (l - r).abs());
            t.check(|| format!("theta {name} a={a}"), r, 1e-7);
        }
        for x in [0.5, 1.0, 2.0] {
            let r = laplace_plancherel_pair(&f, x, 100.0).map(|(l, r)| (l.value - r.value).abs());
            t.check(|| format!("plancherel {name} x={x}"), r, 1e-7);
        }
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn(&mut Tally), u64);
    let criteria: [Criterion; 8] = [
        ("1 kernel closed forms", kernel_closed_forms, 1),
        ("2 strategy triangulation", strategy_triangulation, 5),
        ("3 operator identities", operator_identities, 30),
        ("4 reproducing property", reproducing_property, 30),
        ("5 laplace domain", laplace_domain, 60),
        ("6 norm bounds", norm_bounds, 60),
        ("7 fbm", fbm_criteria, 60),
        ("8 isometry surrogates", isometry_surrogates, 60),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let mut tally = Tally::default();
        let start = Instant::now();
        run(&mut tally);
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let ok = tally.pass() && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {name:<26} {} cases={:<4} worst={:.2e} time={:.2}s/{budget}s  [{}]",
            if ok { "PASS" } else { "FAIL" },
            tally.cases,
            tally.worst,
            elapsed.as_secs_f64(),
            tally.label,
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
