//! Generalized binomials, composition sums and truncated power series.
//!
//! These are the building blocks for Taylor coefficients of `|g(ε,e)|^p ψ(ε,e)`
//! in ε and in `p − s`.

use crate::special;

/// s(s−1)…(s−l+1)/l!
pub fn binom_real(s: f64, l: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..l {
        acc *= (s - i as f64) / (i + 1) as f64;
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Coefficient of `(p−s)^j` in `binom(p, l)`.
///
/// Equals `e_{l−j}(s, s−1, …, s−l+1) / l!` with `e_m` the elementary symmetric sum.
pub fn a_coeffs(l: usize, j: usize, s: f64) -> f64 {
    if j > l {
        return 0.0;
    }
    if j == l {
        return 1.0 / factorial(l);
    }
    if j == 0 {
        return binom_real(s, l);
    }
    // elementary symmetric sums by polynomial expansion of Π (1 + (s−i) z)
    let mut e = vec![0.0; l + 1];
    e[0] = 1.0;
    for i in 0..l {
        let r = s - i as f64;
        for m in (1..=i + 1).rev() {
            e[m] += r * e[m - 1];
        }
    }
    e[l - j] / factorial(l)
}

/// Tuples `(j_1..j_k)` with `Σ j_i = l` and `Σ i·j_i = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionSet {
    pub k: usize,
    pub l: usize,
    pub tuples: Vec<Vec<usize>>,
}

/// Enumerate compositions in lexicographic order of the tuples.
pub fn compositions(k: usize, l: usize) -> CompositionSet {
    fn rec(
        idx: usize,
        k: usize,
        left_count: usize,
        left_weight: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if idx > k {
            if left_count == 0 && left_weight == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let max_j = left_count.min(left_weight / idx);
        for j in 0..=max_j {
            cur.push(j);
            rec(idx + 1, k, left_count - j, left_weight - idx * j, cur, out);
            cur.pop();
        }
    }
    let mut tuples = Vec::new();
    rec(1, k, l, k, &mut Vec::with_capacity(k), &mut tuples);
    CompositionSet { k, l, tuples }
}

/// Value of a weight and its ε-expansion coefficients at one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeJet {
    pub value: f64,
    /// `coeffs[i-1]` is the coefficient of `ε^i`.
    pub coeffs: Vec<f64>,
}

impl EdgeJet {
    pub fn new(value: f64, coeffs: Vec<f64>) -> Self {
        EdgeJet { value, coeffs }
    }

    /// Coefficient of `ε^i`, with index 0 the value itself and zero past the declared order.
    pub fn coeff(&self, i: usize) -> f64 {
        if i == 0 {
            self.value
        } else {
            self.coeffs.get(i - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * eps;
        }
        acc + self.value
    }
}

/// `Σ l!/(j_1!…j_k!) r_1^{j_1}…r_k^{j_k}` over [`compositions`]`(k, l)`, with `r_i = g_i/g`.
pub fn composition_sum(ratios: &[f64], l: usize, k: usize) -> f64 {
    if k == 0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let lf = factorial(l);
    compositions(k, l)
        .tuples
        .iter()
        .map(|t| {
            let mut term = lf;
            for (i, &j) in t.iter().enumerate() {
                if j > 0 {
                    term *= ratios.get(i).copied().unwrap_or(0.0).powi(j as i32) / factorial(j);
                }
            }
            term
        })
        .sum()
}

/// `G^p_{l,k} = |g|^p / g^l · Σ l!/(j_1!…j_k!) g_1^{j_1}…g_k^{j_k}`; `|g|^p` when k = 0.
#[allow(non_snake_case)]
pub fn G_plk(g: &EdgeJet, p: f64, l: usize, k: usize) -> f64 {
    let ratios: Vec<f64> = g.coeffs.iter().map(|c| c / g.value).collect();
    g.value.abs().powf(p) * composition_sum(&ratios, l, k)
}

/// [`G_plk`] from `ln|g|` and the ratios `g_i/g`, with every term formed in log space.
#[allow(non_snake_case)]
pub fn G_plk_scaled(ln_abs_g: f64, ratios: &[f64], p: f64, l: usize, k: usize) -> f64 {
    if k == 0 {
        return if l == 0 { (p * ln_abs_g).exp() } else { 0.0 };
    }
    let ln_lf = factorial(l).ln();
    compositions(k, l)
        .tuples
        .iter()
        .map(|t| {
            let mut ln_term = p * ln_abs_g + ln_lf;
            let mut sign = 1.0;
            for (i, &j) in t.iter().enumerate() {
                if j > 0 {
                    let r = ratios.get(i).copied().unwrap_or(0.0);
                    if r == 0.0 {
                        return 0.0;
                    }
                    ln_term += j as f64 * r.abs().ln() - factorial(j).ln();
                    if r < 0.0 && j % 2 == 1 {
                        sign = -sign;
                    }
                }
            }
            sign * ln_term.exp()
        })
        .sum()
}

/// k-th Taylor coefficient in ε of `|g(ε,e)|^p`.
pub fn g_kp(g: &EdgeJet, p: f64, k: usize) -> f64 {
    (0..=k).map(|l| binom_real(p, l) * G_plk(g, p, l, k)).sum()
}

/// k-th Taylor coefficient in ε of `|g(ε,e)|^p ψ(ε,e)`.
pub fn zeta_kp(g: &EdgeJet, psi: &EdgeJet, p: f64, k: usize) -> f64 {
    (0..=k).map(|i| g_kp(g, p, i) * psi.coeff(k - i)).sum()
}

/// Truncated power series `c_0 + c_1 ε + … + c_n ε^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub coeffs: Vec<f64>,
}

impl SeriesCoefficients {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        SeriesCoefficients { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Truncated product through `ε^n`.
    pub fn mul_trunc(&self, other: &SeriesCoefficients, n: usize) -> SeriesCoefficients {
        let mut out = vec![0.0; n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] += a * b;
            }
        }
        SeriesCoefficients { coeffs: out }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * eps + c)
    }
}

/// Coefficients of `s(ε)^k` through `ε^n` by repeated truncated multiplication.
pub fn series_power(s: &SeriesCoefficients, k: usize, n: usize) -> SeriesCoefficients {
    let mut acc = SeriesCoefficients::new({
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        v
    });
    for _ in 0..k {
        acc = acc.mul_trunc(s, n);
    }
    acc
}

/// Literal multinomial display for the coefficient of `ε^i` in `(s(ε)−s(0))^k`:
/// the sum of `s_1^{j_1}…s_{i−1}^{j_{i−1}} / (j_1!…j_{i−1}!)` over `Σ j = k`, `Σ m·j_m = i`.
///
/// This omits the `k!` multinomial factor, so it differs from [`series_power`]
/// by exactly `k!` whenever `k ≥ 2`.
pub fn series_power_display(s: &SeriesCoefficients, k: usize, i: usize) -> f64 {
    if k == 0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if k == 1 {
        return s.get(i);
    }
    if i < k {
        return 0.0;
    }
    compositions(i, k)
        .tuples
        .iter()
        .filter(|t| t[i - 1] == 0)
        .map(|t| {
            t.iter()
                .enumerate()
                .map(|(m, &j)| s.get(m + 1).powi(j as i32) / factorial(j))
                .product::<f64>()
        })
        .sum()
}

/// `∫₀¹ (1−u)^{i−1}/(i−1)! |g|^{u(p−s)} (log|g|)^i du`.
pub fn gamma_hat(s: f64, p: f64, i: usize, log_weight: f64) -> f64 {
    assert!(i >= 1, "gamma_hat needs i >= 1");
    let c = (p - s) * log_weight;
    let norm = factorial(i - 1);
    let v = special::integrate(
        |u| (1.0 - u).powi(i as i32 - 1) / norm * (u * c).exp(),
        0.0,
        1.0,
        1e-14,
    );
    v * log_weight.powi(i as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_examples() {
        assert_eq!(binom_real(0.37, 0), 1.0);
        assert!((binom_real(0.5, 2) + 0.125).abs() < 1e-16);
        assert_eq!(binom_real(3.0, 5), 0.0);
        assert!((binom_real(7.0, 3) - 35.0).abs() < 1e-12);
    }

    #[test]
    fn a_coeff_corner_cases() {
        assert_eq!(a_coeffs(0, 0, 0.3), 1.0);
        assert!((a_coeffs(3, 3, 0.8) - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(a_coeffs(2, 3, 0.8), 0.0);
    }

    fn a_coeffs_subsets(l: usize, j: usize, s: f64) -> f64 {
        // sum over subsets of {0..l-1} of size l-j of Π (s - i)
        let m = l - j;
        let mut total = 0.0;
        for mask in 0u32..(1 << l) {
            if mask.count_ones() as usize == m {
                let mut prod = 1.0;
                for i in 0..l {
                    if mask & (1 << i) != 0 {
                        prod *= s - i as f64;
                    }
                }
                total += prod;
            }
        }
        total / factorial(l)
    }

    #[test]
    fn a_coeffs_match_subset_enumeration() {
        for l in 0..7 {
            for j in 0..=l {
                let s = 0.43 + 0.1 * l as f64;
                let d = a_coeffs(l, j, s) - a_coeffs_subsets(l, j, s);
                assert!(d.abs() < 1e-14, "l={l} j={j}");
            }
        }
    }

    #[test]
    fn compositions_small_cases() {
        assert_eq!(compositions(2, 1).tuples, vec![vec![0, 1]]);
        assert_eq!(compositions(2, 2).tuples, vec![vec![2, 0]]);
        assert_eq!(compositions(0, 0).tuples, vec![Vec::<usize>::new()]);
        assert!(compositions(3, 0).tuples.is_empty());
    }

    #[test]
    fn compositions_match_exhaustive_filter() {
        let (k, l) = (6, 3);
        let mut brute = Vec::new();
        let mut t = vec![0usize; k];
        loop {
            let cnt: usize = t.iter().sum();
            let wt: usize = t.iter().enumerate().map(|(i, j)| (i + 1) * j).sum();
            if cnt == l && wt == k {
                brute.push(t.clone());
            }
            let mut idx = k;
            loop {
                if idx == 0 {
                    assert_eq!(compositions(k, l).tuples, brute);
                    return;
                }
                idx -= 1;
                if t[idx] < k {
                    t[idx] += 1;
                    break;
                }
                t[idx] = 0;
            }
        }
    }

    #[test]
    fn g_plk_simple_cases() {
        let g = EdgeJet::new(0.2, vec![0.25, 1.0 / 3.0]);
        assert!((G_plk(&g, 0.4, 0, 0) - 0.2f64.powf(0.4)).abs() < 1e-16);
        let v = G_plk(&g, 0.4, 1, 1);
        assert!((v - 0.2f64.powf(0.4) * 0.25 / 0.2).abs() < 1e-15);
    }

    #[test]
    fn g_kp_first_order() {
        let g = EdgeJet::new(-0.3, vec![0.7]);
        let p = 0.6;
        let want = p * 0.3f64.powf(p) * 0.7 / -0.3;
        assert!((g_kp(&g, p, 1) - want).abs() < 1e-15);
    }

    #[test]
    fn series_power_examples() {
        let s = SeriesCoefficients::new(vec![0.0, 0.3, -0.7]);
        assert_eq!(series_power(&s, 0, 3).coeffs, vec![1.0, 0.0, 0.0, 0.0]);
        let sq = series_power(&s, 2, 3);
        assert!((sq.get(2) - 0.09).abs() < 1e-16);
        assert!((sq.get(3) - 2.0 * 0.3 * -0.7).abs() < 1e-16);
        assert_eq!(series_power(&s, 1, 2).coeffs, s.coeffs);
    }

    #[test]
    fn display_differs_by_factorial() {
        let s = SeriesCoefficients::new(vec![0.0, 0.3, -0.7, 0.2, 0.05]);
        for k in 2..4 {
            for i in k..5 {
                let lit = series_power_display(&s, k, i);
                let truth = series_power(&s, k, 4).get(i);
                assert!((lit * factorial(k) - truth).abs() < 1e-14, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn gamma_hat_constant_integrand() {
        let lg = 0.2f64.ln();
        assert!((gamma_hat(0.4, 0.4, 1, lg) - lg).abs() < 1e-15);
        for i in 1..6 {
            let want = lg.powi(i as i32) / factorial(i);
            assert!((gamma_hat(0.4, 0.4, i, lg) - want).abs() < 1e-13 * want.abs());
        }
    }

    #[test]
    fn gamma_hat_matches_series_oracle() {
        let (s, p, i) = (0.4, 0.45, 2usize);
        let lg = 0.2f64.ln();
        let c = (p - s) * lg;
        // Σ_m c^m / (i+m)!
        let mut series = 0.0;
        for m in 0..40 {
            series += c.powi(m) / factorial(i + m as usize);
        }
        series *= lg.powi(i as i32);
        assert!((gamma_hat(s, p, i, lg) - series).abs() < 1e-10 * series.abs());
    }
}
