//! Parsers for the compact grid and polar-lattice flags.

use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

/// `start:stop:count:{lin|log}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

fn num<T: FromStr>(flag: &str, field: &str, s: &str) -> Result<T, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| ConfigError::new(flag, format!("{field} is not a number: {s:?}")))
}

impl FromStr for GridSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count, rest @ ..] = parts.as_slice() else {
            return Err(ConfigError::new("--grid", format!("expected start:stop:count[:lin|log], got {s:?}")));
        };
        let spacing = match rest {
            [] | ["lin"] => Spacing::Lin,
            ["log"] => Spacing::Log,
            _ => return Err(ConfigError::new("--grid", format!("unknown spacing in {s:?}"))),
        };
        let g = GridSpec {
            start: num("--grid", "start", start)?,
            stop: num("--grid", "stop", stop)?,
            count: num("--grid", "count", count)?,
            spacing,
        };
        g.points()?;
        Ok(g)
    }
}

fn spaced(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
    let h = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| match i {
            0 => start,
            i if i + 1 == count => stop,
            i if log => (a + h * i as f64).exp(),
            i => a + h * i as f64,
        })
        .collect()
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, ConfigError> {
        let err = |m: String| ConfigError::new("--grid", m);
        if self.count == 0 {
            return Err(err("empty grid".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start <= 0.0 {
            return Err(err(format!("points must be finite and positive, got start {}", self.start)));
        }
        if self.stop < self.start || (self.count > 1 && self.stop == self.start) {
            return Err(err(format!("stop {} must exceed start {}", self.stop, self.start)));
        }
        Ok(spaced(self.start, self.stop, self.count, self.spacing == Spacing::Log))
    }
}

/// `mod-start:mod-stop:count/theta-count`. Moduli are geometric, arguments
/// uniform on `[-(pi/2 - 1e-3), pi/2 - 1e-3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarSpec {
    pub mod_start: f64,
    pub mod_stop: f64,
    pub mod_count: usize,
    pub theta_count: usize,
}

/// Closest approach of the polar lattice to the imaginary axis.
pub const EDGE_GAP: f64 = 1e-3;

impl FromStr for PolarSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::new("--polar", format!("expected mod-start:mod-stop:count/theta-count, got {s:?}"));
        let (moduli, thetas) = s.split_once('/').ok_or_else(bad)?;
        let parts: Vec<&str> = moduli.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad());
        };
        let p = PolarSpec {
            mod_start: num("--polar", "mod-start", start)?,
            mod_stop: num("--polar", "mod-stop", stop)?,
            mod_count: num("--polar", "count", count)?,
            theta_count: num("--polar", "theta-count", thetas)?,
        };
        p.moduli()?;
        p.thetas()?;
        Ok(p)
    }
}

impl PolarSpec {
    pub fn moduli(&self) -> Result<Vec<f64>, ConfigError> {
        GridSpec { start: self.mod_start, stop: self.mod_stop, count: self.mod_count, spacing: Spacing::Log }
            .points()
            .map_err(|e| ConfigError::new("--polar", e.message))
    }

    pub fn thetas(&self) -> Result<Vec<f64>, ConfigError> {
        let edge = FRAC_PI_2 - EDGE_GAP;
        match self.theta_count {
            0 => Err(ConfigError::new("--polar", "theta-count must be positive")),
            1 => Ok(vec![0.0]),
            n => Ok(spaced(-edge, edge, n, false)),
        }
    }
}

/// Comma-separated numbers.
pub fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    let v: Vec<f64> = s.split(',').map(|p| num(flag, "entry", p)).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(ConfigError::new(flag, "empty list"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g: GridSpec = "1:3:3:lin".parse().unwrap();
        assert_eq!(g.points().unwrap(), vec![1.0, 2.0, 3.0]);
        let g: GridSpec = "0.01:100:5:log".parse().unwrap();
        let p = g.points().unwrap();
        assert_eq!(p[0], 0.01);
        assert_eq!(p[4], 100.0);
        assert!((p[2] - 1.0).abs() < 1e-15);
        assert!("1:2:0".parse::<GridSpec>().is_err());
        assert!("0:2:3:lin".parse::<GridSpec>().is_err());
        assert!("1:2:3:cubic".parse::<GridSpec>().is_err());
        assert!("1:2".parse::<GridSpec>().is_err());
    }

    #[test]
    fn polar() {
        let p: PolarSpec = "0.1:10:3/5".parse().unwrap();
        assert_eq!(p.moduli().unwrap().len(), 3);
        let t = p.thetas().unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t[2], 0.0);
        assert_eq!(t[4], FRAC_PI_2 - EDGE_GAP);
        assert!("0.1:10:3".parse::<PolarSpec>().is_err());
        assert!("0.1:10:3/0".parse::<PolarSpec>().is_err());
    }
}
