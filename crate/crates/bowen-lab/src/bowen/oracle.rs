//! Numeric oracle for `s₁..sₙ`: interpolate high-precision Bowen roots on shrinking
//! ε stencils and extrapolate the coefficients to zero step.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::recursion::{ExpansionMethod, ExpansionReport};
use super::system::{Depth1System, GraphSpec, System, TruncationPolicy};
use super::{dimension, solve_bowen};
use crate::dd::Dd;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Coarsest stencil step; chosen from the order and precision when `None`.
    pub h0: Option<f64>,
    pub levels: usize,
    /// Largest accepted extrapolation uncertainty, relative to `max(|s_k|, 1e-2)`.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            h0: None,
            levels: 8,
            tol: 1e-5,
        }
    }
}

/// Per-edge data for double-double evaluation.
struct DdEdges {
    log_g: Vec<Dd>,
    psi: Vec<Dd>,
    from: Vec<usize>,
    to: Vec<usize>,
    n_vertices: usize,
}

fn jet_dd(value: f64, coeffs: &[f64], eps: Dd) -> Dd {
    let mut acc = Dd::ZERO;
    for &c in coeffs.iter().rev() {
        acc = (acc + Dd::new(c)) * eps;
    }
    acc + Dd::new(value)
}

fn dd_edges(sys: &Depth1System, eps: f64, s_guess: f64) -> Result<DdEdges> {
    let e_dd = Dd::new(eps);
    let weight = |e: usize| -> Result<(Dd, Dd)> {
        let jet = sys.weights.jet(e);
        let mut g = jet_dd(jet.value, &jet.coeffs, e_dd);
        if let Some(hook) = &sys.weights.remainder {
            g = g + Dd::new(hook(eps, e) * eps.powi(sys.weights.order() as i32));
        }
        let pj = sys.psi.jet(e);
        let mut p = jet_dd(pj.value, &pj.coeffs, e_dd);
        if let Some(hook) = &sys.psi.remainder {
            p = p + Dd::new(hook(eps, e) * eps.powi(sys.psi.coeffs.len() as i32));
        }
        if g.hi == 0.0 || g.abs().hi >= 1.0 {
            return Err(Error::Invalid(format!("weight {} at edge {e} violates 0 < |g| < 1", g.to_f64())));
        }
        Ok((g.abs().ln(), p))
    };
    let mut out = DdEdges {
        log_g: vec![],
        psi: vec![],
        from: vec![],
        to: vec![],
        n_vertices: 1,
    };
    match &sys.graph {
        GraphSpec::Graph(g) => {
            out.n_vertices = g.n_vertices();
            for (i, edge) in g.edges().iter().enumerate() {
                let (l, p) = weight(i + 1)?;
                out.log_g.push(l);
                out.psi.push(p);
                out.from.push(edge.from);
                out.to.push(edge.to);
            }
        }
        GraphSpec::FullShift => {
            let fixed = match (sys.weights.alphabet_size(), sys.truncation) {
                (Some(m), _) => Some(m),
                (None, TruncationPolicy::Fixed(n)) => Some(n),
                _ => None,
            };
            let mut total = 0.0;
            let mut e = 1;
            loop {
                if fixed.is_some_and(|m| e > m) {
                    break;
                }
                let (l, p) = weight(e)?;
                let term = (l.to_f64() * s_guess).exp() * p.to_f64().abs();
                total += term;
                out.log_g.push(l);
                out.psi.push(p);
                out.from.push(0);
                out.to.push(0);
                if fixed.is_none() && e > 8 && term < 1e-35 * total {
                    break;
                }
                e += 1;
                if e > 1 << 16 {
                    return Err(Error::TailBoundExceeded {
                        tail: term,
                        tol: 1e-35,
                        trunc: e,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `det(I − M(s))` for the vertex matrix in double-double.
fn det_defect(edges: &DdEdges, s: Dd) -> Dd {
    let nv = edges.n_vertices;
    let mut m = vec![vec![Dd::ZERO; nv]; nv];
    for i in 0..edges.log_g.len() {
        let w = (s * edges.log_g[i]).exp() * edges.psi[i];
        m[edges.to[i]][edges.from[i]] = m[edges.to[i]][edges.from[i]] + w;
    }
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j { Dd::ONE - *x } else { -*x };
        }
    }
    let mut det = Dd::ONE;
    for c in 0..nv {
        let p = (c..nv)
            .max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap())
            .unwrap();
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c];
        if piv.hi == 0.0 {
            return Dd::ZERO;
        }
        det = det * piv;
        for r in c + 1..nv {
            let f = m[r][c] / piv;
            for k in c..nv {
                let v = m[c][k];
                m[r][k] = m[r][k] - f * v;
            }
        }
    }
    det
}

/// Bowen root at ε to about 30 digits by secant steps on `det(I − M(s))`.
fn dd_root(sys: &Depth1System, eps: f64, s_guess: f64) -> Result<Dd> {
    let edges = dd_edges(sys, eps, s_guess)?;
    let mut a = Dd::new(s_guess);
    let mut b = Dd::new(s_guess + 1e-9);
    let mut fa = det_defect(&edges, a);
    let mut fb = det_defect(&edges, b);
    for _ in 0..40 {
        if fb.hi == 0.0 || fb == fa {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        let step = (c - b).abs().to_f64();
        a = b;
        fa = fb;
        b = c;
        fb = det_defect(&edges, b);
        if step < 1e-31 {
            break;
        }
    }
    if !b.is_finite() || (b.to_f64() - s_guess).abs() > 1e-3 {
        return Err(Error::Invalid(format!(
            "double-double root {} strayed from {s_guess}",
            b.to_f64()
        )));
    }
    Ok(b)
}

/// Monomial coefficients `c_1..c_n` of the interpolant through `(i·h, y_i)`, `i = 0..=n+1`.
fn stencil_coefficients(y: &[Dd], h: f64, n: usize) -> Vec<Dd> {
    let m = y.len();
    // forward differences Δ^j y_0
    let mut diffs = y.to_vec();
    let mut newton = vec![diffs[0]];
    for j in 1..m {
        for i in 0..m - j {
            diffs[i] = diffs[i + 1] - diffs[i];
        }
        let mut c = diffs[0];
        for k in 1..=j {
            c = c / Dd::new(k as f64 * h);
        }
        newton.push(c);
    }
    // expand Σ_j newton_j Π_{i<j} (ε − i h)
    let mut poly = vec![Dd::ZERO; m];
    let mut basis = vec![Dd::ZERO; m];
    basis[0] = Dd::ONE;
    for (j, c) in newton.iter().enumerate() {
        for k in 0..=j {
            poly[k] = poly[k] + *c * basis[k];
        }
        if j + 1 < m {
            let shift = Dd::new(j as f64 * h);
            for k in (0..=j + 1).rev() {
                let lower = if k > 0 { basis[k - 1] } else { Dd::ZERO };
                basis[k] = lower - shift * basis[k];
            }
        }
    }
    poly[1..=n].to_vec()
}

/// Repeated Richardson elimination with exponents estimated from successive differences.
fn extrapolate(seq: &[Dd]) -> (f64, f64) {
    let mut t = seq.to_vec();
    loop {
        let m = t.len();
        if m < 3 {
            break;
        }
        let d1 = t[m - 2] - t[m - 3];
        let d2 = t[m - 1] - t[m - 2];
        let scale = t[m - 1].abs().to_f64().max(1e-300);
        if d2.abs().to_f64() < 1e-28 * scale {
            break;
        }
        let ratio = (d1 / d2).to_f64();
        if !(ratio > 1.05) {
            break;
        }
        let mut p = ratio.log2();
        if (p - p.round()).abs() < 0.02 {
            p = p.round();
        }
        let f = Dd::new(2f64.powf(p) - 1.0);
        t = (1..m).map(|i| t[i] + (t[i] - t[i - 1]) / f).collect();
    }
    let m = t.len();
    let unc = if m >= 2 { (t[m - 1] - t[m - 2]).abs().to_f64() } else { f64::INFINITY };
    (t[m - 1].to_f64(), unc)
}

/// Coefficients and uncertainties from a root function on stencils `i·h0/2^l`.
pub fn richardson_coefficients<F>(root: F, n: usize, h0: f64, levels: usize) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<Dd> + Sync,
{
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    let y0 = root(0.0)?;
    let points: Vec<(usize, usize)> = (0..levels).flat_map(|l| (1..=n + 1).map(move |i| (l, i))).collect();
    let vals = points
        .par_iter()
        .map(|&(l, i)| root(i as f64 * h0 / 2f64.powi(l as i32)))
        .collect::<Result<Vec<Dd>>>()?;
    let mut table = DMatrix::from_element(levels, n, Dd::ZERO);
    for l in 0..levels {
        let mut y = vec![y0];
        y.extend_from_slice(&vals[l * (n + 1)..(l + 1) * (n + 1)]);
        let c = stencil_coefficients(&y, h0 / 2f64.powi(l as i32), n);
        for k in 0..n {
            table[(l, k)] = c[k];
        }
    }
    let mut coeffs = Vec::with_capacity(n);
    let mut unc = Vec::with_capacity(n);
    for k in 0..n {
        let seq: Vec<Dd> = (0..levels).map(|l| table[(l, k)]).collect();
        let (v, u) = extrapolate(&seq);
        coeffs.push(v);
        unc.push(u);
    }
    Ok((coeffs, unc))
}

/// Extrapolate from each coarsest step in `10⁻²..10⁻⁷` and keep the finer member of the
/// adjacent pair that agrees best; their disagreement is the uncertainty.
///
/// Log-periodic remainders defeat the within-run error estimate, so it only enters as a floor.
fn step_ladder<F>(root: &F, n: usize, levels: usize, eps_max: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<Dd> + Sync,
{
    let runs: Vec<(Vec<f64>, Vec<f64>)> = (2..=7)
        .map(|j| 10f64.powi(-j))
        .filter(|h| (n + 1) as f64 * h <= eps_max)
        .map(|h| richardson_coefficients(root, n, h, levels))
        .collect::<Result<_>>()?;
    if runs.len() < 2 {
        return Err(Error::Invalid(format!("ε range up to {eps_max} is too short for the oracle stencils")));
    }
    let spread = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect() };
    let score = |w: &[(Vec<f64>, Vec<f64>)]| -> f64 {
        spread(&w[0].0, &w[1].0)
            .iter()
            .zip(&w[1].0)
            .map(|(d, c)| d / c.abs().max(1e-2))
            .fold(0.0, f64::max)
    };
    let best = runs
        .windows(2)
        .min_by(|a, b| score(a).total_cmp(&score(b)))
        .expect("at least one pair");
    let unc = spread(&best[0].0, &best[1].0)
        .iter()
        .zip(&best[1].1)
        .zip(&best[1].0)
        .map(|((d, u), c)| d.max(*u).max(4.0 * f64::EPSILON * c.abs()))
        .collect();
    Ok((best[1].0.clone(), unc))
}

/// `s₁..sₙ` from the numeric oracle.
pub fn expansion_coeffs_numeric(system: &System, n: usize, opts: &OracleOptions) -> Result<ExpansionReport> {
    let base = dimension(system, 0.0)?;
    let s0 = base.s_star;
    let guess = |e: f64| -> Result<f64> {
        Ok(solve_bowen(system, e, 0.0, Some((base.bracket.0, base.bracket.1)))
            .or_else(|_| dimension(system, e))?
            .s_star)
    };
    let (coeffs, unc, s0_hp) = match system {
        System::Depth1(d) => {
            let root = |e: f64| dd_root(d, e, guess(e)?);
            let (c, u) = match opts.h0 {
                Some(h0) => richardson_coefficients(root, n, h0, opts.levels)?,
                None => step_ladder(&root, n, opts.levels, system.eps_max())?,
            };
            (c, u, dd_root(d, 0.0, s0)?.to_f64())
        }
        System::ContinuedFraction(_) => {
            let h0 = opts.h0.unwrap_or(2e-3);
            let root = |e: f64| guess(e).map(Dd::new);
            let (c, u) = richardson_coefficients(root, n, h0, opts.levels.min(5))?;
            (c, u, s0)
        }
    };
    for (k, (c, u)) in coeffs.iter().zip(&unc).enumerate() {
        let tol = opts.tol * c.abs().max(1e-2);
        if !(*u <= tol) {
            return Err(Error::GridTooCoarse {
                k: k + 1,
                uncertainty: *u,
                tol,
            });
        }
    }
    let p_n = system.threshold(n)?;
    Ok(ExpansionReport {
        system: system.name().to_string(),
        order: n,
        s0: s0_hp,
        coeffs,
        uncertainties: unc,
        method: ExpansionMethod::NumericOracle,
        remainder_samples: vec![],
        fitted_order: None,
        fitted_model: None,
        threshold_pn: p_n,
        admissible: s0 - p_n > 1e-12,
        truncation: base.truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_recovers_polynomial() {
        let h = 1e-3;
        let y: Vec<Dd> = (0..4)
            .map(|i| {
                let e = i as f64 * h;
                Dd::new(0.5) + Dd::new(0.25) * Dd::new(e) - Dd::new(3.0) * Dd::new(e) * Dd::new(e)
            })
            .collect();
        let c = stencil_coefficients(&y, h, 2);
        assert!((c[0].to_f64() - 0.25).abs() < 1e-20);
        assert!((c[1].to_f64() + 3.0).abs() < 1e-16);
    }

    #[test]
    fn synthetic_linear_root() {
        let (c, _) = richardson_coefficients(|e| Ok(Dd::new(0.4) + Dd::new(1.7) * Dd::new(e)), 1, 1e-3, 4).unwrap();
        assert!((c[0] - 1.7).abs() < 1e-10);
    }

    #[test]
    fn golden_root_to_double_double() {
        let System::Depth1(d) = System::finite_full_shift(&[0.5, 0.25]) else { unreachable!() };
        let r = dd_root(&d, 0.0, 0.6942).unwrap();
        // x + x² = 1 with x = 2^{-s}
        let x = (Dd::new(5.0).ln().mul_f64(0.5).exp() - Dd::ONE).mul_f64(0.5);
        let exact = -(x.ln() / Dd::new(2.0).ln());
        assert!((r - exact).abs().to_f64() < 1e-29);
    }

    #[test]
    fn ifs1_oracle_a10() {
        let r = expansion_coeffs_numeric(&System::linear_ifs1(10.0), 2, &OracleOptions::default()).unwrap();
        assert!((r.coeffs[0] - 0.044_599_065_171_148_42).abs() < 1e-12, "{:?}", r);
        assert!((r.coeffs[1] + 2.889_493e-4).abs() < 1e-9, "{:?}", r);
    }
}
