//! Lower bounds for the intermediate point in the binomial Taylor remainder
//!
//! `(a+x)^s = a^s + Σ_{k=1}^{n−1} binom(s,k) a^{s−k} x^k + binom(s,n) (a+αx)^{s−n} x^n`.

use crate::error::{Error, Result};
use crate::series_comb::binom_real;

/// Solved intermediate point together with the claimed bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCertificate {
    pub n: usize,
    pub s: f64,
    pub a: f64,
    pub x: f64,
    pub alpha: f64,
    /// `L(1,s)` for n = 1, `(a/x)^{(n−1−s)/(n−s)} L(n,s)` otherwise.
    pub bound: f64,
    /// Whether `a/x ≤ M(n,s)`, i.e. the bound is claimed.
    pub threshold_ok: bool,
    /// Identity residual relative to the largest term magnitude.
    pub residual: f64,
}

impl AlphaCertificate {
    /// The bound holds, or is not claimed.
    pub fn holds(&self) -> bool {
        !self.threshold_ok || self.alpha >= self.bound
    }
}

pub fn bound_l(n: usize, s: f64) -> f64 {
    assert!(n >= 1);
    if n == 1 {
        return 2f64.powf(-1.0 / (1.0 - s));
    }
    let ratio = binom_real(s, n).abs() / (binom_real(s, n - 1).abs() + 1.0);
    0.5 * ratio.powf(1.0 / (n as f64 - s))
}

pub fn threshold_m(n: usize, s: f64) -> f64 {
    assert!(n >= 1);
    if n == 1 {
        return 2f64.powf(-s / (1.0 - s) - 1.0);
    }
    let c1 = 2f64.powf(s) + (0..=n - 2).map(|k| binom_real(s, k).abs()).sum::<f64>();
    let ratio = binom_real(s, n).abs() / (binom_real(s, n - 1).abs() + 1.0);
    let third = 0.5f64.powf(n as f64 - s) * ratio;
    1f64.min((1.0 / c1).powf(1.0 / (1.0 - s))).min(third)
}

/// First-order bound with the factor `s` kept when solving `s(t+α)^{s−1} = (t+1)^s − t^s`:
/// `α ≥ ½(s·2^{−s})^{1/(1−s)}` whenever `a/x` is at most the same value.
///
/// [`bound_l`]`(1, s)` exceeds the true α near `a/x → 0` for every `s < 1/2`.
pub fn first_order_bound_corrected(s: f64) -> f64 {
    0.5 * (s * 2f64.powf(-s)).powf(1.0 / (1.0 - s))
}

/// Bisection for the unique α ∈ [0,1] making the remainder identity exact.
pub fn solve_alpha(n: usize, s: f64, a: f64, x: f64) -> Result<AlphaCertificate> {
    if n == 0 || !(s > 0.0 && s < 1.0) || a <= 0.0 || x <= 0.0 {
        return Err(Error::Invalid(format!(
            "solve_alpha needs n>=1, s in (0,1), a,x>0 (got n={n}, s={s}, a={a}, x={x})"
        )));
    }
    // work in t = a/x after dividing by x^s
    let t = a / x;
    let cn = binom_real(s, n);
    let mut terms = vec![t.powf(s)];
    for k in 1..n {
        terms.push(binom_real(s, k) * t.powf(s - k as f64));
    }
    let lhs = (t + 1.0).powf(s);
    let partial: f64 = terms.iter().sum();
    let target = lhs - partial;
    let f = |alpha: f64| cn * (t + alpha).powf(s - n as f64) - target;

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoRoot);
    }
    let rising = fhi > flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1e-300) {
            break;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let rem = cn * (t + alpha).powf(s - n as f64);
    let scale = terms
        .iter()
        .map(|v| v.abs())
        .fold(lhs.abs().max(rem.abs()), f64::max);
    let residual = (partial + rem - lhs).abs() / scale;

    let l = bound_l(n, s);
    let bound = if n == 1 {
        l
    } else {
        t.powf((n as f64 - 1.0 - s) / (n as f64 - s)) * l
    };
    Ok(AlphaCertificate {
        n,
        s,
        a,
        x,
        alpha,
        bound,
        threshold_ok: t <= threshold_m(n, s),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_constants() {
        assert!((bound_l(1, 0.5) - 0.25).abs() < 1e-16);
        assert!((threshold_m(1, 0.5) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn first_order_closed_form() {
        let (s, a, x) = (0.5f64, 0.25f64, 1.0f64);
        let closed = (((a + x).powf(s) - a.powf(s)) / (s * x)).powf(1.0 / (s - 1.0)) - a / x;
        let cert = solve_alpha(1, s, a, x).unwrap();
        assert!((cert.alpha - closed).abs() < 1e-13);
        assert!((cert.alpha - 0.404509).abs() < 1e-6);
        assert!(cert.threshold_ok);
        assert_eq!(cert.bound, 0.25);
        assert!(cert.holds());
        assert!(cert.residual < 1e-14);
    }

    #[test]
    fn above_threshold_makes_no_claim() {
        let s = 0.4;
        let m = threshold_m(2, s);
        let cert = solve_alpha(2, s, 3.0 * m, 1.0).unwrap();
        assert!(!cert.threshold_ok);
        assert!(cert.holds());
    }

    #[test]
    fn second_order_bound_at_half_threshold() {
        let s = 0.3;
        let t = threshold_m(2, s) / 2.0;
        let cert = solve_alpha(2, s, t, 1.0).unwrap();
        let want = t.powf((1.0 - s) / (2.0 - s)) * bound_l(2, s);
        assert!((cert.bound - want).abs() < 1e-15);
        assert!(cert.threshold_ok && cert.alpha >= cert.bound);
    }

    #[test]
    fn third_order_constants_positive_and_continuous() {
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..200 {
            let s = i as f64 / 200.0;
            let (l, m) = (bound_l(3, s), threshold_m(3, s));
            assert!(l > 0.0 && m > 0.0);
            if let Some((pl, pm)) = prev {
                assert!((l - pl).abs() < 0.05 && (m - pm).abs() < 0.05);
            }
            prev = Some((l, m));
        }
    }

    #[test]
    fn first_order_bound_fails_below_one_half() {
        let s = 0.2;
        let cert = solve_alpha(1, s, 1e-40, 1.0).unwrap();
        assert!(cert.threshold_ok && !cert.holds());
        // α → s^{1/(1−s)} as a/x → 0
        assert!((cert.alpha - s.powf(1.0 / (1.0 - s))).abs() < 1e-5);
    }

    #[test]
    fn corrected_first_order_bound() {
        for i in 1..100 {
            let s = i as f64 / 100.0;
            let m = first_order_bound_corrected(s);
            for f in [1e-9, 1e-3, 0.5, 1.0] {
                assert!(solve_alpha(1, s, m * f, 1.0).unwrap().alpha >= m, "s={s} f={f}");
            }
        }
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(solve_alpha(2, 1.0, 0.1, 1.0).is_err());
    }
}
