//! Real functions on the half-line, tagged with how they decay.
//!
//! The integral operators need to know how to treat infinity, so a bare
//! closure is not enough: every [`RealFn`] carries a [`Decay`] tag that is
//! probed once at registration, plus the points where it stops being smooth.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::adaptive::{halfline_with_budget, Tail};
use crate::numerics::laguerre::laguerre_fn;
use crate::numerics::{Estimate, Tolerance};

/// Behaviour at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decay {
    /// Identically zero outside `[a, b]`.
    CompactSupport { a: f64, b: f64 },
    /// `|f(t)| <= C (1 + rate t)^16 e^(-rate t)`.
    Exponential { rate: f64 },
    /// `|f(t)| <= C t^(-power)` for `t >= 1`; a negative power allows growth.
    Algebraic { power: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    Smooth,
    Continuous,
    Measurable,
}

/// Slack allowed by the registration probe, relative to the largest probed value.
pub const ENVELOPE_CONSTANT: f64 = 1e6;
/// Polynomial allowance in the exponential envelope.
pub const ENVELOPE_DEGREE: i32 = 16;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An evaluatable function on `(0, inf)` with decay metadata.
#[derive(Clone)]
pub struct RealFn {
    eval: Eval,
    decay: Decay,
    smoothness: Smoothness,
    breaks: Vec<f64>,
    zero: bool,
}

impl fmt::Debug for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFn")
            .field("decay", &self.decay)
            .field("smoothness", &self.smoothness)
            .field("breaks", &self.breaks)
            .field("zero", &self.zero)
            .finish()
    }
}

fn probe_points(decay: Decay) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=80).map(|k| 10f64.powf(-4.0 + 0.1 * k as f64)).collect();
    match decay {
        Decay::Exponential { rate } if rate > 0.0 => {
            pts.extend((1..=40).map(|k| 25.0 * k as f64 / rate));
        }
        Decay::CompactSupport { a, b } => {
            pts.extend((0..=20).map(|k| a + (b - a) * k as f64 / 20.0).filter(|t| *t > 0.0));
        }
        Decay::Algebraic { .. } => {
            pts.extend((1..=16).map(|k| 10f64.powi(4 + k / 2) * if k % 2 == 0 { 1.0 } else { 3.0 }));
        }
        _ => {}
    }
    pts
}

impl RealFn {
    /// Registers `f`, probing it for finiteness and for consistency with `decay`.
    pub fn new<F>(f: F, decay: Decay, smoothness: Smoothness) -> Result<RealFn>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        match decay {
            Decay::CompactSupport { a, b } if !(a >= 0.0 && b > a && b.is_finite()) => {
                return Err(invalid(format!("support [{a}, {b}] is not a bounded interval in [0, inf)")));
            }
            Decay::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                return Err(invalid(format!("decay rate must be positive, got {rate}")));
            }
            Decay::Algebraic { power } if !power.is_finite() => {
                return Err(invalid("algebraic power must be finite"));
            }
            _ => {}
        }
        let pts = probe_points(decay);
        let values: Vec<f64> = pts.iter().map(|&t| f(t)).collect();
        if let Some((t, v)) = pts.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("function is not finite at t = {t}: {v}")));
        }
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // envelope scale: the size of f near the origin, or globally if f vanishes there
        let near = pts
            .iter()
            .zip(&values)
            .filter(|(t, _)| match decay {
                Decay::Exponential { rate } => rate * **t <= 1.0,
                Decay::Algebraic { .. } => **t <= 1.0,
                Decay::CompactSupport { .. } => true,
            })
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        let scale = if near > 0.0 { near } else { peak };
        for (&t, &v) in pts.iter().zip(&values) {
            let ok = match decay {
                Decay::CompactSupport { a, b } => (t >= a && t <= b) || v == 0.0,
                Decay::Exponential { rate } => {
                    let rt = rate * t;
                    rt < 1.0
                        || v.abs()
                            <= ENVELOPE_CONSTANT
                                * scale
                                * (1.0 + rt).powi(ENVELOPE_DEGREE)
                                * (-rt).exp()
                }
                Decay::Algebraic { power } => {
                    t < 1.0 || v.abs() <= ENVELOPE_CONSTANT * scale * t.powf(-power)
                }
            };
            if !ok {
                return Err(invalid(format!(
                    "value {v:e} at t = {t} is inconsistent with the declared decay {decay:?}"
                )));
            }
        }
        let mut breaks = Vec::new();
        if let Decay::CompactSupport { a, b } = decay {
            breaks.extend([a, b].into_iter().filter(|p| *p > 0.0));
        }
        Ok(RealFn { eval: Arc::new(f), decay, smoothness, breaks, zero: peak == 0.0 })
    }

    /// Registration without probing, for transforms whose metadata follows
    /// from an already checked function.
    pub(crate) fn derived<F>(f: F, decay: Decay, smoothness: Smoothness, breaks: Vec<f64>, zero: bool) -> RealFn
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RealFn { eval: Arc::new(f), decay, smoothness, breaks, zero }
    }

    /// Adds points where `f` or its derivatives jump.
    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        self.breaks.extend(breaks.iter().copied().filter(|b| *b > 0.0 && b.is_finite()));
        self.breaks.sort_by(f64::total_cmp);
        self.breaks.dedup();
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        (self.eval)(t)
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// True when every probe returned exactly zero.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Tail description for half-line integration of `f` itself.
    pub fn tail(&self) -> Tail {
        match self.decay {
            Decay::CompactSupport { b, .. } => Tail::Compact { end: b },
            Decay::Exponential { rate } => Tail::Exponential { rate },
            Decay::Algebraic { power } => Tail::Algebraic { power },
        }
    }

    /// Asymptotic decay rate, if exponential; compact support counts as infinitely fast.
    pub fn exp_rate(&self) -> Option<f64> {
        match self.decay {
            Decay::CompactSupport { .. } => Some(f64::INFINITY),
            Decay::Exponential { rate } => Some(rate),
            Decay::Algebraic { .. } => None,
        }
    }

    /// `t -> f(lambda t)`.
    pub fn dilate(&self, lambda: f64) -> Result<RealFn> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("dilation must be positive, got {lambda}")));
        }
        let inner = self.eval.clone();
        let decay = match self.decay {
            Decay::CompactSupport { a, b } => Decay::CompactSupport { a: a / lambda, b: b / lambda },
            Decay::Exponential { rate } => Decay::Exponential { rate: rate * lambda },
            other => other,
        };
        let breaks = self.breaks.iter().map(|b| b / lambda).collect();
        Ok(RealFn::derived(move |t| inner(lambda * t), decay, self.smoothness, breaks, self.zero))
    }

    /// `e^(-rate t)`.
    pub fn exponential(rate: f64) -> Result<RealFn> {
        RealFn::new(move |t| (-rate * t).exp(), Decay::Exponential { rate }, Smoothness::Smooth)
    }

    /// `t^k e^(-rate t)`.
    pub fn power_exponential(k: i32, rate: f64) -> Result<RealFn> {
        if k < 0 {
            return Err(invalid("power must be nonnegative"));
        }
        RealFn::new(move |t| t.powi(k) * (-rate * t).exp(), Decay::Exponential { rate }, Smoothness::Smooth)
    }

    /// `e^(-t^2)`.
    pub fn gaussian() -> RealFn {
        RealFn::new(|t| (-t * t).exp(), Decay::Exponential { rate: 1.0 }, Smoothness::Smooth)
            .expect("gaussian satisfies its envelope")
    }

    /// The Laguerre function `l_m`.
    pub fn laguerre(m: usize) -> RealFn {
        RealFn::new(move |t| laguerre_fn(m, t), Decay::Exponential { rate: 0.5 }, Smoothness::Smooth)
            .expect("Laguerre functions satisfy their envelope")
    }

    /// Indicator of `(a, b)`.
    pub fn indicator(a: f64, b: f64) -> Result<RealFn> {
        RealFn::new(
            move |t| if t > a && t < b { 1.0 } else { 0.0 },
            Decay::CompactSupport { a, b },
            Smoothness::Measurable,
        )
    }

    /// The zero function.
    pub fn zero() -> RealFn {
        RealFn::derived(|_| 0.0, Decay::Exponential { rate: 1.0 }, Smoothness::Smooth, Vec::new(), true)
    }
}

/// The smooth functions the identity checks run over: `e^-t`, `e^-2t`,
/// `t e^-t`, `e^(-t^2)` and `l_0, l_1, l_2`.
pub fn smooth_test_family() -> Vec<(&'static str, RealFn)> {
    vec![
        ("exp(-t)", RealFn::exponential(1.0).expect("valid rate")),
        ("exp(-2t)", RealFn::exponential(2.0).expect("valid rate")),
        ("t exp(-t)", RealFn::power_exponential(1, 1.0).expect("valid rate")),
        ("exp(-t^2)", RealFn::gaussian()),
        ("l_0", RealFn::laguerre(0)),
        ("l_1", RealFn::laguerre(1)),
        ("l_2", RealFn::laguerre(2)),
    ]
}

/// `int_0^inf f` for `f` with exponential, compact or integrable algebraic decay.
///
/// Exponential tails are truncated where `e^(-rate t)` falls below `1e-35`
/// (`rate` is the smaller of the argument and the declared rate); algebraic
/// tails go through `t = u / (1 - u)`. `rule_size` caps the number of
/// Gauss-Kronrod panels.
pub fn integrate_halfline(f: &RealFn, decay_rate: f64, rule_size: usize) -> Result<Estimate<f64>> {
    if rule_size == 0 {
        return Err(invalid("panel budget must be at least 1"));
    }
    if !(decay_rate > 0.0) {
        return Err(invalid(format!("decay rate must be positive, got {decay_rate}")));
    }
    if f.is_zero() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let tail = match f.decay() {
        Decay::CompactSupport { b, .. } => Tail::Compact { end: b },
        Decay::Exponential { rate } => Tail::Exponential { rate: rate.min(decay_rate) },
        Decay::Algebraic { power } if power > 1.0 => Tail::Algebraic { power },
        Decay::Algebraic { power } => {
            return Err(Error::UnsupportedFunction(format!(
                "decay t^-{power} is not integrable on the half-line"
            )))
        }
    };
    halfline_with_budget(&|t| f.eval(t), tail, f.breaks(), Tolerance::default(), rule_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registration_rejects_wrong_decay() {
        assert!(RealFn::new(|t| (-0.5 * t).exp(), Decay::Exponential { rate: 1.0 }, Smoothness::Smooth).is_err());
        assert!(RealFn::new(|t| 1.0 / t, Decay::Exponential { rate: 1.0 }, Smoothness::Smooth).is_err());
        assert!(RealFn::new(|_| 1.0, Decay::CompactSupport { a: 0.0, b: 1.0 }, Smoothness::Smooth).is_err());
        assert!(RealFn::new(|t| t, Decay::Algebraic { power: 0.0 }, Smoothness::Smooth).is_err());
        assert!(RealFn::new(|t| 1.0 / (1.0 + t * t), Decay::Algebraic { power: 2.0 }, Smoothness::Smooth).is_ok());
    }

    #[test]
    fn registration_rejects_non_finite() {
        assert!(RealFn::new(|t| if t > 5.0 { f64::NAN } else { 0.0 }, Decay::Exponential { rate: 1.0 }, Smoothness::Smooth).is_err());
    }

    #[test]
    fn builders() {
        assert_eq!(RealFn::indicator(0.0, 1.0).unwrap().eval(0.5), 1.0);
        assert_eq!(RealFn::indicator(0.0, 1.0).unwrap().eval(1.5), 0.0);
        assert!(RealFn::zero().is_zero());
        assert!((RealFn::laguerre(0).eval(1.0) - (-0.5f64).exp()).abs() < 1e-15);
        let f = RealFn::exponential(1.0).unwrap().dilate(2.0).unwrap();
        assert!((f.eval(1.0) - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(f.decay(), Decay::Exponential { rate: 2.0 });
    }

    #[test]
    fn halfline_examples() {
        let e = integrate_halfline(&RealFn::exponential(1.0).unwrap(), 1.0, 200).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
        let e = integrate_halfline(&RealFn::power_exponential(1, 1.0).unwrap(), 1.0, 200).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
        let e = integrate_halfline(&RealFn::gaussian(), 1.0, 200).unwrap();
        assert!((e.value - 0.8862269254527580).abs() < 1e-10);
    }

    #[test]
    fn halfline_algebraic_and_unsupported() {
        let f = RealFn::new(|t| 1.0 / (1.0 + t * t), Decay::Algebraic { power: 2.0 }, Smoothness::Smooth).unwrap();
        let e = integrate_halfline(&f, 1.0, 500).unwrap();
        assert!((e.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        let g = RealFn::new(|t| 1.0 / (1.0 + t), Decay::Algebraic { power: 1.0 }, Smoothness::Smooth).unwrap();
        assert!(matches!(integrate_halfline(&g, 1.0, 500), Err(Error::UnsupportedFunction(_))));
    }
}
