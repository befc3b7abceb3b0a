//! Cholesky factorisation with a diagonal jitter ladder.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{invalid, Error, Result};

/// Jitter levels tried in turn, as multiples of the largest diagonal entry.
pub const JITTER_LADDER: [f64; 5] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6];

/// A lower-triangular factor `L` with `L L^T = G + jitter I`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub lower: DMatrix<f64>,
    pub jitter: f64,
}

/// Factorises a symmetric matrix, adding diagonal jitter only if needed.
pub fn cholesky_spd(g: &DMatrix<f64>) -> Result<CholeskyFactor> {
    let n = g.nrows();
    if n != g.ncols() {
        return Err(invalid(format!("matrix is {}x{}, not square", n, g.ncols())));
    }
    if n > 10_000 {
        return Err(invalid(format!("dimension {n} exceeds 10^4")));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let scale = g.diagonal().iter().fold(0.0f64, |m, &d| m.max(d.abs())).max(f64::MIN_POSITIVE);
    let mut last = 0.0;
    for level in JITTER_LADDER {
        let jitter = level * scale;
        last = jitter;
        let mut a = g.clone();
        for i in 0..n {
            a[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(a) {
            let lower = c.l();
            if lower.diagonal().iter().all(|d| *d > 0.0 && d.is_finite()) {
                return Ok(CholeskyFactor { lower, jitter });
            }
        }
    }
    Err(Error::NotPositiveDefinite { jitter: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor() {
        let f = cholesky_spd(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(f.jitter, 0.0);
        assert_eq!(f.lower, DMatrix::identity(4, 4));
    }

    #[test]
    fn brownian_reconstruction() {
        let t = [1.0f64, 2.0, 3.0];
        let g = DMatrix::from_fn(3, 3, |i, j| t[i].min(t[j]));
        let f = cholesky_spd(&g).unwrap();
        let back = &f.lower * f.lower.transpose();
        assert!((back - &g).amax() <= 1e-12 * g.amax());
    }

    #[test]
    fn indefinite_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_spd(&g), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn singular_psd_needs_jitter() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = cholesky_spd(&g).unwrap();
        assert!(f.jitter > 0.0);
        let back = &f.lower * f.lower.transpose();
        assert!((back - &g).amax() <= f.jitter + 1e-12);
    }
}
