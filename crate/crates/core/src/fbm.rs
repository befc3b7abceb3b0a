//! Seeded sampling of Riemann-Liouville fBm (covariance `b_a`) and of
//! integrated white noise (covariance `n_a`).
//!
//! Path `p` draws from ChaCha20 seeded with `seed_from_u64(seed)` on stream `p`.
//! Normals come from Box-Muller on uniforms `u = ((x >> 11) + 1) 2^-53`, `x` a
//! 64-bit output, pairing `(u1, u2)` into `sqrt(-2 ln u1) (cos 2 pi u2, sin 2 pi u2)`.
//! Samples are `L z` with `L` the jittered Cholesky factor of the covariance.

use std::f64::consts::TAU;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{gram, validate_grid, GramSource};

pub const MAX_FBM_GRID: usize = 4096;
/// Paths needed before an empirical covariance is reported.
pub const MIN_PATHS_FOR_COVARIANCE: usize = 100;
/// Grid points needed by [`average_paths`].
pub const MIN_AVERAGING_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Riemann-Liouville fBm, covariance `b_a = n_(a+1)`, `a >= 0`.
    BProcess,
    /// `a`-times integrated white noise, covariance `n_a`, `a > 1/2`.
    NProcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmConfig {
    pub grid: Vec<f64>,
    pub alpha: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl FbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {}", self.grid.len())));
        }
        validate_grid(&self.grid, MAX_FBM_GRID)?;
        if self.n_paths == 0 {
            return Err(invalid("need at least one path"));
        }
        if !self.alpha.is_finite() {
            return Err(invalid("order must be finite"));
        }
        match self.mode {
            Mode::BProcess if self.alpha < 0.0 => {
                Err(invalid(format!("b-process needs a >= 0, got {}", self.alpha)))
            }
            Mode::NProcess if self.alpha <= 0.5 => {
                Err(invalid(format!("n-process needs a > 1/2, got {}", self.alpha)))
            }
            _ => Ok(()),
        }
    }

    pub fn source(&self) -> GramSource {
        match self.mode {
            Mode::BProcess => GramSource::CovarianceB(self.alpha),
            Mode::NProcess => GramSource::CovarianceN(self.alpha),
        }
    }

    /// The analytic covariance on the grid.
    pub fn covariance(&self) -> Result<Vec<Vec<f64>>> {
        let g = gram(self.source(), &self.grid)?;
        let n = self.grid.len();
        Ok((0..n).map(|i| (0..n).map(|j| g.entries[(i, j)]).collect()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub config: FbmConfig,
    /// One row per path, one column per grid point.
    pub samples: Vec<Vec<f64>>,
    pub jitter: f64,
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `n` standard normals from stream `stream` of the generator seeded with `seed`.
pub fn normals(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = uniform(&mut rng);
        let u2 = uniform(&mut rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(n);
    out
}

pub fn sample_paths(config: &FbmConfig) -> Result<PathEnsemble> {
    config.validate()?;
    let g = gram(config.source(), &config.grid)?;
    let lower = &g.factor.lower;
    let n = config.grid.len();
    let samples: Vec<Vec<f64>> = (0..config.n_paths)
        .into_par_iter()
        .map(|p| {
            let z = normals(config.seed, p as u64, n);
            (0..n).map(|i| (0..=i).map(|j| lower[(i, j)] * z[j]).sum()).collect()
        })
        .collect();
    Ok(PathEnsemble { config: config.clone(), samples, jitter: g.factor.jitter })
}

/// Empirical covariance against the analytic one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub empirical: Vec<Vec<f64>>,
    pub analytic: Vec<Vec<f64>>,
    /// Standard error of each empirical entry.
    pub standard_errors: Vec<Vec<f64>>,
    pub max_deviation: f64,
    /// Largest `|empirical - analytic| / SE`.
    pub max_score: f64,
    /// Every entry within 5 standard errors.
    pub pass: bool,
}

/// Covariance with the mean fixed at its known value 0, so `cov_ij = mean(x_i x_j)`
/// and the standard error is that of a sample mean of the products.
pub fn empirical_covariance(ens: &PathEnsemble) -> Result<CovarianceReport> {
    let paths = ens.samples.len();
    if paths < MIN_PATHS_FOR_COVARIANCE {
        return Err(Error::InsufficientSamples { needed: MIN_PATHS_FOR_COVARIANCE, got: paths });
    }
    let n = ens.config.grid.len();
    let analytic = ens.config.covariance()?;
    let mut empirical = vec![vec![0.0; n]; n];
    let mut standard_errors = vec![vec![0.0; n]; n];
    let mut max_deviation = 0.0f64;
    let mut max_score = 0.0f64;
    let mut pass = true;
    let count = paths as f64;
    for i in 0..n {
        for j in i..n {
            let (mut s1, mut s2) = (0.0, 0.0);
            for row in &ens.samples {
                let p = row[i] * row[j];
                s1 += p;
                s2 += p * p;
            }
            let mean = s1 / count;
            let var = ((s2 / count - mean * mean) * count / (count - 1.0)).max(0.0);
            let se = (var / count).sqrt();
            let dev = (mean - analytic[i][j]).abs();
            max_deviation = max_deviation.max(dev);
            if se > 0.0 {
                max_score = max_score.max(dev / se);
            }
            if dev > 5.0 * se {
                pass = false;
            }
            empirical[i][j] = mean;
            empirical[j][i] = mean;
            standard_errors[i][j] = se;
            standard_errors[j][i] = se;
        }
    }
    Ok(CovarianceReport { empirical, analytic, standard_errors, max_deviation, max_score, pass })
}

/// Output of [`average_paths`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedEnsemble {
    pub ensemble: PathEnsemble,
    /// Per grid point, the largest over paths of the linear-interpolation error
    /// bound `sum_j w_j h_j^2 |X''_j| / 8` with `X''` from divided differences.
    pub discretization_bound: Vec<f64>,
}

/// `t^-a int_0^t (t - s)^(a-1) X(s) ds` for each path, with `X` linear between
/// grid points and extended to `[0, t_0]` along its first segment.
///
/// On each piece the weight `(t - s)^(a-1)` is integrated exactly against the
/// linear interpolant.
pub fn average_paths(ens: &PathEnsemble, alpha: f64) -> Result<AveragedEnsemble> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("order must be positive, got {alpha}")));
    }
    let grid = &ens.config.grid;
    let n = grid.len();
    if n < MIN_AVERAGING_GRID {
        return Err(invalid(format!("averaging needs at least {MIN_AVERAGING_GRID} grid points, got {n}")));
    }
    // knots 0, t_0, ..., t_(n-1)
    let knots: Vec<f64> = std::iter::once(0.0).chain(grid.iter().copied()).collect();
    // weights[k][j]: (I0, I1) moments of (t_k - s)^(a-1) over piece j in u = t_k - s
    let moments: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|k| {
            let t = grid[k];
            (0..=k)
                .map(|j| {
                    let (lo, hi) = (t - knots[j + 1], t - knots[j]);
                    let i0 = (hi.powf(alpha) - lo.powf(alpha)) / alpha;
                    let i1 = (hi.powf(alpha + 1.0) - lo.powf(alpha + 1.0)) / (alpha + 1.0);
                    (i0, i1)
                })
                .collect()
        })
        .collect();
    let mut bounds = vec![0.0f64; n];
    let rows: Vec<(Vec<f64>, Vec<f64>)> = ens
        .samples
        .par_iter()
        .map(|row| {
            let slope0 = (row[1] - row[0]) / (grid[1] - grid[0]);
            let values: Vec<f64> = std::iter::once(row[0] - slope0 * grid[0]).chain(row.iter().copied()).collect();
            // |X''| per piece from the nearest three-point divided difference
            let curv: Vec<f64> = (0..n)
                .map(|j| {
                    let c = j.clamp(1, n - 1);
                    let (a, b, d) = (c - 1, c, c + 1);
                    let d1 = (values[b] - values[a]) / (knots[b] - knots[a]);
                    let d2 = (values[d] - values[b]) / (knots[d] - knots[b]);
                    (2.0 * (d2 - d1) / (knots[d] - knots[a])).abs()
                })
                .collect();
            let mut out = Vec::with_capacity(n);
            let mut bound = Vec::with_capacity(n);
            for k in 0..n {
                let t = grid[k];
                let mut acc = 0.0;
                let mut err = 0.0;
                for (j, &(i0, i1)) in moments[k].iter().enumerate() {
                    let h = knots[j + 1] - knots[j];
                    let hi = t - knots[j];
                    // X(s) = X_j + (X_(j+1) - X_j)(hi - u) / h
                    acc += values[j] * i0 + (values[j + 1] - values[j]) / h * (hi * i0 - i1);
                    err += i0 * h * h * curv[j] / 8.0;
                }
                let scale = t.powf(-alpha);
                out.push(acc * scale);
                bound.push(err * scale);
            }
            (out, bound)
        })
        .collect();
    let mut samples = Vec::with_capacity(rows.len());
    for (out, bound) in rows {
        for (b, v) in bounds.iter_mut().zip(&bound) {
            *b = b.max(*v);
        }
        samples.push(out);
    }
    Ok(AveragedEnsemble {
        ensemble: PathEnsemble { config: ens.config.clone(), samples, jitter: ens.jitter },
        discretization_bound: bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(grid: Vec<f64>, alpha: f64, n_paths: usize, mode: Mode) -> FbmConfig {
        FbmConfig { grid, alpha, n_paths, seed: 42, mode }
    }

    #[test]
    fn brownian_covariance_matrix() {
        let c = config(vec![1.0, 2.0, 3.0], 0.0, 1, Mode::BProcess).covariance().unwrap();
        let want = [[1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 2.0, 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((c[i][j] - want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reproducible() {
        let c = config(vec![0.5, 1.0, 1.5], 0.7, 50, Mode::BProcess);
        assert_eq!(sample_paths(&c).unwrap(), sample_paths(&c).unwrap());
    }

    #[test]
    fn config_errors() {
        assert!(sample_paths(&config(vec![1.0], 0.0, 10, Mode::BProcess)).is_err());
        assert!(sample_paths(&config(vec![1.0, 2.0], 0.4, 10, Mode::NProcess)).is_err());
        assert!(sample_paths(&config(vec![1.0, 2.0], 0.0, 0, Mode::BProcess)).is_err());
        let e = sample_paths(&config(vec![1.0, 2.0], 0.0, 10, Mode::BProcess)).unwrap();
        assert!(matches!(empirical_covariance(&e), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn brownian_two_points() {
        let e = sample_paths(&config(vec![1.0, 2.0], 0.0, 2000, Mode::BProcess)).unwrap();
        let r = empirical_covariance(&e).unwrap();
        assert!((r.empirical[0][1] - 1.0).abs() <= 5.0 * r.standard_errors[0][1]);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn langevin_entry() {
        let e = sample_paths(&config(vec![0.5, 1.0], 1.0, 5000, Mode::BProcess)).unwrap();
        let r = empirical_covariance(&e).unwrap();
        assert!((r.analytic[1][1] - 1.0 / 3.0).abs() < 1e-14);
        assert!((r.empirical[1][1] - 1.0 / 3.0).abs() <= 5.0 * r.standard_errors[1][1], "{r:?}");
    }

    #[test]
    fn zero_paths_have_zero_covariance() {
        let cfg = config(vec![1.0, 2.0], 0.0, 100, Mode::BProcess);
        let ens = PathEnsemble { config: cfg, samples: vec![vec![0.0, 0.0]; 100], jitter: 0.0 };
        let r = empirical_covariance(&ens).unwrap();
        assert!(r.empirical.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn averaging_examples() {
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 4.0).collect();
        let cfg = config(grid.clone(), 0.0, 2, Mode::BProcess);
        let ens = PathEnsemble {
            config: cfg,
            samples: vec![vec![3.0; 20], grid.clone()],
            jitter: 0.0,
        };
        let avg = average_paths(&ens, 1.0).unwrap();
        for (k, t) in grid.iter().enumerate() {
            assert!((avg.ensemble.samples[0][k] - 3.0).abs() < 1e-12);
            assert!((avg.ensemble.samples[1][k] - t / 2.0).abs() < 1e-12);
        }
        assert!(avg.discretization_bound.iter().all(|b| *b < 1e-12));
        // a = 1/2 on a constant: t^-a * c t^a / a = 2c
        let half = average_paths(&ens, 0.5).unwrap();
        assert!((half.ensemble.samples[0][7] - 6.0).abs() < 1e-12);
        assert_eq!(average_paths(&ens, 0.7).unwrap(), average_paths(&ens, 0.7).unwrap());
        assert!(average_paths(&ens, 0.0).is_err());
    }
}
