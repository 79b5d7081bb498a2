//! Operators `Z_{v,q,s}` (coefficient of `εᵛ(p−s)^q` in the transfer operator of
//! `p log|g(ε,·)| + log ψ(ε,·)`) and the combinations `N_u`.

use nalgebra::{DMatrix, DVector};

use super::system::{ContinuedFractionSystem, Depth1System, GraphSpec, System};
use crate::eigen_perturb::OperatorFamily;
use crate::error::{Error, Result};
use crate::series_comb::{a_coeffs, series_power, G_plk_scaled, SeriesCoefficients};
use crate::transfer::collocation::ChebyshevGrid;
use crate::transfer::{vertex_reduce, Form};
use crate::weights::DigitSet;

#[derive(Debug, Clone)]
pub struct PerturbationOperatorSet {
    pub s0: f64,
    pub order: usize,
    pub truncation: usize,
    /// Neglected tail of `Σ_e max_{v,q} |h_{v,q}(e)|`.
    pub tail_bound: f64,
    pub form: Form,
    /// `z[v][q]` for `0 ≤ v, q ≤ n`.
    pub z: Vec<Vec<DMatrix<f64>>>,
    /// The constant function on the index set.
    pub one: DVector<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

impl PerturbationOperatorSet {
    pub fn dim(&self) -> usize {
        self.one.len()
    }

    pub fn z(&self, v: usize, q: usize) -> &DMatrix<f64> {
        &self.z[v][q]
    }

    /// `L_{k,s(0)}`, the ε^k coefficient at fixed `p = s(0)`.
    pub fn l_k(&self, k: usize) -> &DMatrix<f64> {
        &self.z[k][0]
    }

    /// `N_u = Σ s_{q,u−v} Z_{v,q}` over `(v,q) ≠ (0,1)`, `q ≥ 1` or `v = u`.
    ///
    /// `s` holds `s₁, s₂, …`; only `s₁..s_{u−1}` are read.
    pub fn n_u(&self, u: usize, s: &[f64]) -> DMatrix<f64> {
        assert!(u >= 1 && u <= self.order, "N_u needs 1 <= u <= n");
        let mut centred = vec![0.0; u + 1];
        centred[1..u].copy_from_slice(&s[..u - 1]);
        let centred = SeriesCoefficients::new(centred);
        let mut out = self.z[u][0].clone();
        for q in 1..=u {
            let pow = series_power(&centred, q, u);
            for v in 0..=u - q {
                if (v, q) == (0, 1) {
                    continue;
                }
                let c = pow.get(u - v);
                if c != 0.0 {
                    out += &self.z[v][q] * c;
                }
            }
        }
        out
    }

    /// `L_u = s_u Z_{0,1} + N_u` of the family `ε ↦ L_{s(ε) log|g(ε)| + log ψ(ε)}`.
    pub fn family_coeff(&self, u: usize, s: &[f64]) -> DMatrix<f64> {
        self.n_u(u, s) + &self.z[0][1] * s[u - 1]
    }

    /// `L_0, L_1..L_m` with `m = s.len()`.
    pub fn operator_family(&self, s: &[f64]) -> OperatorFamily {
        let orders = (1..=s.len()).map(|u| self.family_coeff(u, s)).collect();
        OperatorFamily::new(self.z[0][0].clone(), orders).expect("operator shapes agree")
    }
}

/// `h_{v,q,s}(e)` for all `v, q ≤ n` at one edge.
pub(crate) fn edge_h_table(sys: &Depth1System, s0: f64, n: usize, e: usize) -> Vec<Vec<f64>> {
    let (lg, ratios) = sys.weights.scaled_jet(e);
    let psi = sys.psi.jet(e);
    let mut gt = vec![vec![0.0; n + 1]; n + 1];
    for (k, row) in gt.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate().take(k + 1) {
            *slot = G_plk_scaled(lg, &ratios, s0, l, k);
        }
    }
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for (l, row) in a.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate().take(l + 1) {
            *slot = a_coeffs(l, j, s0);
        }
    }
    let lg_pow: Vec<f64> = (0..=n).map(|i| lg.powi(i as i32) / factorial(i)).collect();
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    for (v, row) in h.iter_mut().enumerate() {
        for (q, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..=v {
                let pk = psi.coeff(v - k);
                if pk == 0.0 {
                    continue;
                }
                for l in 0..=k {
                    for j in 0..=l.min(q) {
                        acc += a[l][j] * lg_pow[q - j] * gt[k][l] * pk;
                    }
                }
            }
            *slot = acc;
        }
    }
    h
}

fn depth1_truncation(sys: &Depth1System, s0: f64, n: usize) -> Result<(usize, f64)> {
    use super::system::TruncationPolicy;
    if let GraphSpec::Graph(g) = &sys.graph {
        return Ok((g.n_edges(), 0.0));
    }
    if let Some(m) = sys.weights.alphabet_size() {
        return Ok((m, 0.0));
    }
    let mag = |e: usize| {
        edge_h_table(sys, s0, n, e)
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    };
    if let TruncationPolicy::Fixed(n_fixed) = sys.truncation {
        return Ok((n_fixed, crate::weights::tail_sum(mag, n_fixed)));
    }
    const CAP: usize = 1 << 20;
    let mut m = vec![mag(1)];
    let mut closure;
    loop {
        let e = m.len() + 1;
        let t = mag(e);
        if !t.is_finite() {
            return Err(Error::TailBoundExceeded {
                tail: f64::INFINITY,
                tol: sys.tail_tol,
                trunc: e,
            });
        }
        m.push(t);
        if t == 0.0 {
            closure = 0.0;
            break;
        }
        if e >= 16 {
            let r = m[e - 1] / m[e - 2];
            let steady = m[e - 8..].windows(2).all(|w| w[1] <= w[0]);
            if steady && r < 1.0 {
                closure = t * r / (1.0 - r);
                if closure < 1e-3 * sys.tail_tol {
                    break;
                }
            }
        }
        if e >= CAP {
            return Err(Error::TailBoundExceeded {
                tail: f64::NAN,
                tol: sys.tail_tol,
                trunc: e,
            });
        }
    }
    // smallest N whose suffix sum is below tolerance
    let mut suffix = closure;
    let mut n_edges = m.len();
    while n_edges > 0 && suffix + m[n_edges - 1] < sys.tail_tol {
        suffix += m[n_edges - 1];
        n_edges -= 1;
    }
    Ok((n_edges.max(1), suffix))
}

fn assemble_depth1(sys: &Depth1System, s0: f64, n: usize) -> Result<PerturbationOperatorSet> {
    let (trunc, tail) = depth1_truncation(sys, s0, n)?;
    let graph = sys.graph_with(trunc);
    let tables: Vec<Vec<Vec<f64>>> = (1..=graph.n_edges()).map(|e| edge_h_table(sys, s0, n, e)).collect();
    let z = (0..=n)
        .map(|v| {
            (0..=n)
                .map(|q| {
                    let vals: Vec<f64> = tables.iter().map(|t| t[v][q]).collect();
                    vertex_reduce(&graph, &vals)
                })
                .collect()
        })
        .collect();
    Ok(PerturbationOperatorSet {
        s0,
        order: n,
        truncation: trunc,
        tail_bound: tail,
        form: Form::VertexMatrix,
        z,
        one: DVector::from_element(graph.n_vertices(), 1.0),
    })
}

fn assemble_collocation(sys: &ContinuedFractionSystem, s0: f64, n: usize) -> Result<PerturbationOperatorSet> {
    let digits = match &sys.family.digits {
        DigitSet::Finite(v) => v.clone(),
        DigitSet::From(_) => {
            return Err(Error::Invalid(
                "the perturbation pipeline for continued fractions needs a finite digit set".into(),
            ))
        }
    };
    let grid = ChebyshevGrid::new(sys.collocation.nodes);
    let m = grid.len();
    let cheb = grid.lagrange_chebyshev();
    let a = sys.family.a;
    let mut z = vec![vec![DMatrix::<f64>::zeros(m, m); n + 1]; n + 1];
    let mut row = vec![0.0; m];
    for i in 0..m {
        for &d in &digits {
            let u = d as f64 + grid.nodes[i];
            let r = a / u;
            // (u+aε)^{-2s0}
            let mut c = 1.0;
            let weight = SeriesCoefficients::new(
                (0..=n)
                    .map(|k| {
                        let v = u.powf(-2.0 * s0) * c;
                        c *= (-2.0 * s0 - k as f64) / (k + 1) as f64 * r;
                        v
                    })
                    .collect(),
            );
            // −2 log(u+aε)
            let log_series = SeriesCoefficients::new(
                (0..=n)
                    .map(|k| {
                        if k == 0 {
                            -2.0 * u.ln()
                        } else {
                            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                            -2.0 * sign * r.powi(k as i32) / k as f64
                        }
                    })
                    .collect(),
            );
            // t(ε) = 2/(u+aε) − 1 and T_k(t(ε)) by the three-term recurrence
            let t = SeriesCoefficients::new(
                (0..=n)
                    .map(|k| 2.0 * (-a).powi(k as i32) * u.powi(-(k as i32) - 1) - if k == 0 { 1.0 } else { 0.0 })
                    .collect(),
            );
            let mut tn = vec![SeriesCoefficients::new(vec![1.0]), t.clone()];
            for k in 2..m {
                let next = t.mul_trunc(&tn[k - 1], n);
                let mut c = next.coeffs.clone();
                for (d, x) in c.iter_mut().enumerate() {
                    *x = 2.0 * *x - tn[k - 2].get(d);
                }
                tn.push(SeriesCoefficients::new(c));
            }
            // ℓ_j(y(ε)) coefficients; the constant term from the barycentric formula
            grid.lagrange_row(1.0 / u, &mut row);
            let mut ell = vec![vec![0.0; n + 1]; m];
            for j in 0..m {
                ell[j][0] = row[j];
                for (deg, tk) in tn.iter().enumerate().take(m) {
                    let cj = cheb[(j, deg)];
                    for k in 1..=n {
                        ell[j][k] += cj * tk.get(k);
                    }
                }
            }
            for q in 0..=n {
                let pq = weight.mul_trunc(&series_power(&log_series, q, n), n);
                let scale = 1.0 / factorial(q);
                for v in 0..=n {
                    for (j, lj) in ell.iter().enumerate() {
                        let mut acc = 0.0;
                        for b in 0..=v {
                            acc += pq.get(v - b) * lj[b];
                        }
                        z[v][q][(i, j)] += acc * scale;
                    }
                }
            }
        }
    }
    Ok(PerturbationOperatorSet {
        s0,
        order: n,
        truncation: digits.len(),
        tail_bound: 0.0,
        form: Form::Collocation,
        z,
        one: DVector::from_element(m, 1.0),
    })
}

/// Build `Z_{v,q,s0}` for `0 ≤ v, q ≤ n`; refuses when `s0 ≤ p(n)`.
pub fn assemble_perturbation_operators(system: &System, s0: f64, n: usize) -> Result<PerturbationOperatorSet> {
    let p_n = system.threshold(n)?;
    if s0 - p_n <= 1e-12 {
        return Err(Error::AdmissibilityViolated { s0, n, p_n });
    }
    match system {
        System::Depth1(d) => assemble_depth1(d, s0, n),
        System::ContinuedFraction(c) => assemble_collocation(c, s0, n),
    }
}
