//! Quadrature and special sums shared by several modules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre on [a, b], doubling panels until two successive
/// estimates agree to `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (x, w) = gauss_legendre(16);
    let panel_sum = |panels: usize| {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (xi, wi) in x.iter().zip(&w) {
                total += wi * f(mid + 0.5 * h * xi);
            }
        }
        0.5 * h * total
    };
    let mut prev = panel_sum(1);
    let mut panels = 2;
    while panels <= 1 << 12 {
        let cur = panel_sum(panels);
        if (cur - prev).abs() <= rel_tol * cur.abs().max(f64::MIN_POSITIVE) {
            return cur;
        }
        prev = cur;
        panels *= 2;
    }
    prev
}

/// Hurwitz zeta ζ(s, q) = Σ_{k≥0} (k+q)^{-s} for s > 1, q > 0, by Euler–Maclaurin.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const B2K: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let n = 12usize;
    let mut sum = 0.0;
    for k in 0..n {
        sum += (k as f64 + q).powf(-s);
    }
    let a = n as f64 + q;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s(s+1)...(s+2k-2) / (2k)! * a^{-s-2k+1}
    let mut fact = s * a.powf(-s - 1.0);
    let mut denom = 2.0;
    for (k, b) in B2K.iter().enumerate() {
        let term = b / denom * fact;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let m = (2 * k) as f64 + 1.0;
        fact *= (s + m) * (s + m + 1.0) / (a * a);
        denom *= (m + 2.0) * (m + 3.0);
    }
    sum
}

/// Σ_{e≥1} e^m r^e for 0 ≤ r < 1, summed until terms fall below 1e-17 of the total.
pub fn poly_geometric_sum(m: u32, r: f64) -> f64 {
    assert!((0.0..1.0).contains(&r));
    let mut total = 0.0;
    let mut e = 1u64;
    loop {
        let term = (e as f64).powi(m as i32) * r.powi(e as i32);
        total += term;
        if e as f64 > m as f64 / (-r.ln()).max(1e-300) && term <= 1e-17 * total.abs() {
            break;
        }
        if term == 0.0 && e > 1 {
            break;
        }
        e += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 4e-15);
    }

    #[test]
    fn hurwitz_matches_riemann_zeta_two() {
        let z = hurwitz_zeta(2.0, 1.0);
        assert!((z - PI * PI / 6.0).abs() < 1e-14);
        let z4 = hurwitz_zeta(4.0, 1.0);
        assert!((z4 - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn hurwitz_shift_identity() {
        let (s, q) = (2.37, 0.41);
        let lhs = hurwitz_zeta(s, q) - hurwitz_zeta(s, q + 1.0);
        assert!((lhs - q.powf(-s)).abs() < 1e-13 * lhs);
    }

    #[test]
    fn poly_geometric_known_sums() {
        assert!((poly_geometric_sum(1, 0.5) - 2.0).abs() < 1e-14);
        assert!((poly_geometric_sum(0, 0.5) - 1.0).abs() < 1e-14);
        assert!((poly_geometric_sum(2, 0.5) - 6.0).abs() < 1e-13);
    }
}
