//! Quadrature, special functions and dense linear algebra.

pub mod adaptive;
pub mod hyp;
pub mod laguerre;
pub mod linalg;
pub mod quad;
pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A computed value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

impl<T> Estimate<T> {
    pub fn new(value: T, error: f64) -> Self {
        Estimate { value, error }
    }
}

/// Absolute and relative targets for adaptive routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-13, rel: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub(crate) fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Controls for series-based special functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnContext {
    tolerance: f64,
    max_terms: usize,
}

impl Default for SpecialFnContext {
    fn default() -> Self {
        SpecialFnContext { tolerance: 1e-12, max_terms: 4096 }
    }
}

impl SpecialFnContext {
    pub fn new(tolerance: f64, max_terms: usize) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance <= 1e-6) {
            return Err(invalid(format!("series tolerance must lie in (0, 1e-6], got {tolerance}")));
        }
        if max_terms < 64 {
            return Err(invalid(format!("max series terms must be at least 64, got {max_terms}")));
        }
        Ok(SpecialFnContext { tolerance, max_terms })
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_validation() {
        assert!(SpecialFnContext::new(1e-12, 64).is_ok());
        assert!(SpecialFnContext::new(1e-5, 64).is_err());
        assert!(SpecialFnContext::new(0.0, 64).is_err());
        assert!(SpecialFnContext::new(1e-10, 10).is_err());
    }
}
