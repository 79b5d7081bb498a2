//! Chebyshev collocation of `(Lf)(x) = Σ_e (e+x+aε)^{-2s} f(1/(e+x+aε))` on [0,1].

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{Form, TransferOperatorRealization, Truncation};
use crate::error::{Error, Result};
use crate::special::hurwitz_zeta;
use crate::weights::{ConformalMapFamily, DigitSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationOptions {
    pub nodes: usize,
    /// Last explicit digit for infinite digit sets.
    pub truncation: u64,
    /// Taylor terms in the Hurwitz-zeta tail correction (0 disables it).
    pub tail_terms: usize,
}

impl Default for CollocationOptions {
    fn default() -> Self {
        CollocationOptions {
            nodes: 32,
            truncation: 10_000,
            tail_terms: 10,
        }
    }
}

/// Chebyshev–Gauss–Lobatto nodes on [0,1] with barycentric weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevGrid {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "need at least two nodes");
        let deg = m - 1;
        let nodes = (0..m)
            .map(|i| 0.5 * (1.0 - (PI * i as f64 / deg as f64).cos()))
            .collect();
        let weights = (0..m)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == deg {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        ChebyshevGrid { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `ℓ_j(y)` for every j.
    pub fn lagrange_row(&self, y: f64, out: &mut [f64]) {
        for (j, &x) in self.nodes.iter().enumerate() {
            if y == x {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[j] = 1.0;
                return;
            }
        }
        let mut denom = 0.0;
        for j in 0..self.len() {
            let t = self.weights[j] / (y - self.nodes[j]);
            out[j] = t;
            denom += t;
        }
        out.iter_mut().for_each(|o| *o /= denom);
    }

    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        let mut row = vec![0.0; self.len()];
        self.lagrange_row(y, &mut row);
        row.iter().zip(values).map(|(a, b)| a * b).sum()
    }

    /// `coeffs[(j, n)]`: Chebyshev coefficient of `T_n(2y−1)` in `ℓ_j(y)`.
    pub fn lagrange_chebyshev(&self) -> DMatrix<f64> {
        let m = self.len();
        let deg = m - 1;
        DMatrix::from_fn(m, deg + 1, |j, n| {
            let tj = 2.0 * self.nodes[j] - 1.0;
            let mut a = 2.0 / deg as f64 * (n as f64 * tj.clamp(-1.0, 1.0).acos()).cos();
            if j == 0 || j == deg {
                a *= 0.5;
            }
            if n == 0 || n == deg {
                a *= 0.5;
            }
            a
        })
    }

    /// `coeffs[(j, k)] = ℓ_j^{(k)}(0)/k!` for `k < terms`.
    pub fn lagrange_taylor_at_zero(&self, terms: usize) -> DMatrix<f64> {
        let cheb = self.lagrange_chebyshev();
        let m = self.len();
        // T_n^{(k)}(−1) = (−1)^{n+k} Π_{i<k} (n²−i²)/(2i+1)
        let mut d = DMatrix::zeros(m, terms);
        for k in 0..terms {
            let mut kfact = 1.0;
            for i in 1..=k {
                kfact *= i as f64;
            }
            for n in 0..m {
                let mut tk = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                for i in 0..k {
                    tk *= (n * n) as f64 - (i * i) as f64;
                    tk /= (2 * i + 1) as f64;
                }
                let scale = 2f64.powi(k as i32) * tk / kfact;
                for j in 0..m {
                    d[(j, k)] += cheb[(j, n)] * scale;
                }
            }
        }
        d
    }
}

/// Digits summed explicitly and whether a tail correction follows.
pub fn explicit_digits(cf: &ConformalMapFamily, truncation: u64) -> (Vec<u64>, bool) {
    match &cf.digits {
        DigitSet::Finite(v) => (v.clone(), false),
        DigitSet::From(start) => ((*start..=truncation.max(*start)).collect(), true),
    }
}

pub fn assemble_gauss_collocation(
    cf: &ConformalMapFamily,
    s: f64,
    eps: f64,
    opts: &CollocationOptions,
) -> Result<TransferOperatorRealization> {
    if opts.nodes < 8 {
        return Err(Error::Invalid(format!("need at least 8 nodes, got {}", opts.nodes)));
    }
    let (digits, tail) = explicit_digits(cf, opts.truncation);
    if tail && s <= 0.5 {
        return Err(Error::SeriesDivergent(format!(
            "Σ_e (e+x)^(-2s) diverges for s = {s} <= 1/2"
        )));
    }
    let grid = ChebyshevGrid::new(opts.nodes);
    let m = grid.len();
    let shift = cf.a * eps;
    let mut k = DMatrix::zeros(m, m);
    let mut row = vec![0.0; m];
    for i in 0..m {
        let x = grid.nodes[i];
        for &e in &digits {
            let u = e as f64 + x + shift;
            let w = u.powf(-2.0 * s);
            grid.lagrange_row(1.0 / u, &mut row);
            for j in 0..m {
                k[(i, j)] += w * row[j];
            }
        }
    }
    let mut tail_bound = 0.0;
    if tail && opts.tail_terms > 0 {
        let taylor = grid.lagrange_taylor_at_zero(opts.tail_terms);
        let last = *digits.last().unwrap();
        for i in 0..m {
            let q = last as f64 + 1.0 + grid.nodes[i] + shift;
            let zetas: Vec<f64> = (0..opts.tail_terms)
                .map(|t| hurwitz_zeta(2.0 * s + t as f64, q))
                .collect();
            for j in 0..m {
                let add: f64 = (0..opts.tail_terms).map(|t| taylor[(j, t)] * zetas[t]).sum();
                k[(i, j)] += add;
            }
            tail_bound = f64::max(tail_bound, zetas[0]);
        }
    } else if tail {
        tail_bound = hurwitz_zeta(2.0 * s, *digits.last().unwrap() as f64 + 1.0);
    }
    Ok(TransferOperatorRealization {
        matrix: k,
        index_map: grid.nodes.iter().map(|x| format!("x={x:.6}")).collect(),
        truncation: Truncation {
            level: digits.len(),
            tail_bound: if tail && opts.tail_terms > 0 { 0.0 } else { tail_bound },
        },
        form: Form::Collocation,
        discretization_error: None,
    })
}

/// Assemble at `m` nodes and record the eigenvalue change under doubling to `2m`.
pub fn assemble_with_refinement(
    cf: &ConformalMapFamily,
    s: f64,
    eps: f64,
    opts: &CollocationOptions,
) -> Result<TransferOperatorRealization> {
    let mut op = assemble_gauss_collocation(cf, s, eps, opts)?;
    let fine = assemble_gauss_collocation(
        cf,
        s,
        eps,
        &CollocationOptions {
            nodes: 2 * opts.nodes,
            ..*opts
        },
    )?;
    let p = super::power::PowerOptions::default();
    let a = super::leading_eigenpair(&op.matrix, &p)?.value;
    let b = super::leading_eigenpair(&fine.matrix, &p)?.value;
    op.discretization_error = Some((a - b).abs());
    Ok(op)
}
