//! Closed forms for the linear IFS `1/5^e + ε/a^e`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series_comb::{a_coeffs, series_power, SeriesCoefficients};
use crate::special::poly_geometric_sum;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// `s_k` from the double sum over `(v,q) ≠ (0,1)` with inner sums `Σ_e e^m (5^v/(2a^v))^e`.
///
/// Lower coefficients are generated on the way; each inner sum must converge.
pub fn closed_form_sk_ifs1(k: usize, a: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Invalid("closed form needs k >= 1".into()));
    }
    let s0 = 2f64.ln() / 5f64.ln();
    let l5 = 5f64.ln();
    let mut s: Vec<f64> = Vec::with_capacity(k);
    for kk in 1..=k {
        let mut centred = vec![0.0; kk + 1];
        centred[1..kk].copy_from_slice(&s[..kk - 1]);
        let centred = SeriesCoefficients::new(centred);
        let mut total = 0.0;
        for v in 0..=kk {
            let r = 5f64.powi(v as i32) / (2.0 * a.powi(v as i32));
            for q in 0..=kk - v {
                if (v, q) == (0, 1) {
                    continue;
                }
                let sq = series_power(&centred, q, kk).get(kk - v);
                if sq == 0.0 {
                    continue;
                }
                if r >= 1.0 {
                    return Err(Error::SeriesDivergent(format!(
                        "inner sum ratio 5^{v}/(2a^{v}) = {r} >= 1"
                    )));
                }
                let mut inner = 0.0;
                for j in 0..=v.min(q) {
                    let m = q - j;
                    inner += a_coeffs(v, j, s0) / factorial(m)
                        * (-l5).powi(m as i32)
                        * poly_geometric_sum(m as u32, r);
                }
                total += sq * inner;
            }
        }
        s.push(total / (2.0 * l5));
    }
    Ok(s[k - 1])
}

/// `(log 2/(log 5)²) · 5/(4a − 10)`
pub fn displayed_s1_ifs1(a: f64) -> f64 {
    2f64.ln() / 5f64.ln().powi(2) * 5.0 / (4.0 * a - 10.0)
}

/// The printed second-coefficient formula, evaluated literally.
pub fn displayed_s2_ifs1(a: f64) -> f64 {
    let l2 = 2f64.ln();
    let b = 2.0 * a - 5.0;
    25.0 * l2 / 5f64.ln().powi(3)
        * (1.0 / (2.0 * b * b) - a * l2 / (b * (4.0 * a * a - 5.0).powi(2)) + (0.4f64).ln() / (8.0 * a * a - 100.0))
}

/// Remainder behaviour of `s(ε)` for `1 < a < 5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalOrder {
    /// Number of integer-order coefficients.
    pub k: usize,
    /// `log 2 / log(5/a)`
    pub exponent: f64,
    /// True when the exponent equals `k+1` and the remainder is `ε^{k+1} log ε`.
    pub boundary: bool,
}

/// `k` with `k < log2/log(5/a) ≤ k+1`.
pub fn fractional_order_ifs1(a: f64) -> Result<FractionalOrder> {
    if !(a > 1.0 && a < 5.0) {
        return Err(Error::Invalid(format!("fractional regime needs 1 < a < 5, got {a}")));
    }
    let gamma = 2f64.ln() / (5.0 / a).ln();
    let rounded = gamma.round();
    let boundary = (gamma - rounded).abs() < 1e-9 * gamma.max(1.0);
    let k = if boundary { rounded as usize - 1 } else { gamma.ceil() as usize - 1 };
    Ok(FractionalOrder {
        k,
        exponent: if boundary { rounded } else { gamma },
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_coefficient_matches_display() {
        for a in [6.0, 10.0, 50.0] {
            let c = closed_form_sk_ifs1(1, a).unwrap();
            assert!((c - displayed_s1_ifs1(a)).abs() < 1e-14 * c.abs().max(1.0));
        }
        assert!((displayed_s1_ifs1(10.0) - 0.044_599_065_171_148_42).abs() < 1e-15);
    }

    #[test]
    fn second_coefficient_at_ten() {
        let c = closed_form_sk_ifs1(2, 10.0).unwrap();
        assert!((c + 2.889_493e-4).abs() < 1e-9);
        // the printed formula does not reproduce it
        assert!((displayed_s2_ifs1(10.0) - 0.003_783_683_6).abs() < 1e-9);
    }

    #[test]
    fn inner_sum_half() {
        assert!((poly_geometric_sum(1, 0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fractional_orders() {
        let f = fractional_order_ifs1(3.0).unwrap();
        assert_eq!(f.k, 1);
        assert!((f.exponent - 1.356_92).abs() < 1e-5);
        assert_eq!(fractional_order_ifs1(4.0).unwrap().k, 3);
        let b = fractional_order_ifs1(2.5).unwrap();
        assert!(b.boundary && b.k == 0);
        assert!(fractional_order_ifs1(5.0).is_err());
    }

    #[test]
    fn divergent_inner_sum() {
        assert!(matches!(closed_form_sk_ifs1(3, 2.0), Err(Error::SeriesDivergent(_))));
    }
}
