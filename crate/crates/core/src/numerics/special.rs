//! Gamma-family special functions.

use crate::error::{domain, Result};

/// `Gamma(x)` for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma needs a positive argument, got {x}")));
    }
    if x == x.round() && x <= 171.0 {
        // factorials are exact up to 22!, correctly rounded beyond
        return Ok((1..x as u32).fold(1.0, |p, k| p * k as f64));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// `Gamma(x)` for any real `x` off the poles `0, -1, -2, ...`.
pub(crate) fn gamma_signed(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.round() {
        return Err(domain(format!("gamma has a pole at {x}")));
    }
    if x < 0.5 {
        // reflection with the sine taken at the exact distance to the nearest integer
        let k = x.round();
        let s = (std::f64::consts::PI * (x - k)).sin();
        let s = if k.rem_euclid(2.0) == 0.0 { s } else { -s };
        return Ok(std::f64::consts::PI / (s * statrs::function::gamma::gamma(1.0 - x)));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// `ln Gamma(x)` for `x > 0`; NaN outside the domain.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x == x.round() && x <= 171.0 {
        return gamma_fn(x).map(f64::ln).unwrap_or(f64::NAN);
    }
    statrs::function::gamma::ln_gamma(x)
}

/// Digamma `psi(x)`.
pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// `B(a, b)` through `ln Gamma`, so large arguments do not overflow.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain(format!("beta needs positive arguments, got ({a}, {b})")));
    }
    Ok((ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp())
}

/// Rising factorial `(a)_k = a (a + 1) ... (a + k - 1)`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).map(|j| a + j as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn gamma_of_five() {
        assert!((gamma_fn(5.0).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_half() {
        let v = gamma_fn(0.5).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gamma_rejects_poles() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-2.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_signed(-3.0), Err(Error::Domain(_))));
        let g = gamma_signed(-0.5).unwrap();
        assert!((g + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn beta_unit_case() {
        // B(1, 2 alpha - 1) at alpha = 1
        assert!((beta_fn(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(beta_fn(0.0, 1.0).is_err());
        let big = beta_fn(300.0, 400.0).unwrap();
        assert!(big > 0.0 && big.is_finite());
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(1.0, 3), 6.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
        assert_eq!(pochhammer(0.5, 0), 1.0);
    }
}
