//! Laguerre functions `l_m(t) = e^(-t/2) L_m(t)`.

/// `l_m(t)` through the three-term recurrence for `L_m`.
pub fn laguerre_fn(m: usize, t: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..m {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - t) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    (-0.5 * t).exp() * cur
}

/// Explicit alternating sum; only for cross-checking small `m`.
pub fn laguerre_fn_explicit(m: usize, t: f64) -> f64 {
    let mut binom = 1.0;
    let mut fact = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for j in 0..=m {
        if j > 0 {
            binom *= (m - j + 1) as f64 / j as f64;
            fact *= j as f64;
            pow *= t;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * pow / fact;
    }
    (-0.5 * t).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        assert!((laguerre_fn(0, 1.0) - 0.6065306597126334).abs() < 1e-15);
        assert!((laguerre_fn(1, 2.0) + (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for m in 0..=10 {
            for t in [0.1, 1.0, 10.0] {
                let a = laguerre_fn(m, t);
                let b = laguerre_fn_explicit(m, t);
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-3), "m={m} t={t}");
            }
        }
    }
}
