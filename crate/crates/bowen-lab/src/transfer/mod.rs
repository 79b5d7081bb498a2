//! Finite realizations of Ruelle transfer operators, pressure and RPF data.

pub mod collocation;
pub mod power;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph_shift::DirectedMultigraph;
use crate::weights::{weight_tail, Alphabet, PerturbedWeightFamily, PsiFamily};

pub use collocation::{assemble_gauss_collocation, CollocationOptions};
pub use power::{leading_eigenpair, PowerOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    EdgeMatrix,
    /// `|V|×|V|` reduction acting on vertex functions.
    VertexMatrix,
    Collocation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub level: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
pub struct TransferOperatorRealization {
    pub matrix: DMatrix<f64>,
    pub index_map: Vec<String>,
    pub truncation: Truncation,
    pub form: Form,
    /// Eigenvalue change under node doubling, when measured.
    pub discretization_error: Option<f64>,
}

/// Default tolerance on the neglected tail of an edge sum.
pub const TAIL_TOL: f64 = 1e-14;

fn edge_weights(
    graph: &DirectedMultigraph,
    fam: &PerturbedWeightFamily,
    psi: &PsiFamily,
    s: f64,
    eps: f64,
) -> Result<Vec<f64>> {
    if let Alphabet::Finite(m) = fam.alphabet {
        if graph.n_edges() > m {
            return Err(Error::Invalid(format!(
                "graph has {} edges but the family only {m}",
                graph.n_edges()
            )));
        }
    }
    (1..=graph.n_edges())
        .map(|e| {
            let g = fam.eval_weight(e, eps)?;
            if g == 0.0 || g.abs() >= 1.0 {
                return Err(Error::Invalid(format!("weight {g} at edge {e} violates 0 < |g| < 1")));
            }
            Ok(g.abs().powf(s) * psi.eval(e, eps))
        })
        .collect()
}

fn tail_for(
    graph: &DirectedMultigraph,
    fam: &PerturbedWeightFamily,
    psi: &PsiFamily,
    s: f64,
    eps: f64,
    tol: f64,
) -> Result<f64> {
    let tail = weight_tail(fam, psi, s, eps, graph.n_edges());
    if !(tail <= tol) {
        return Err(Error::TailBoundExceeded {
            tail,
            tol,
            trunc: graph.n_edges(),
        });
    }
    Ok(tail)
}

/// Edge matrix with `entry(e′,e) = |g(ε,e)|^s ψ(ε,e) A(e,e′)`.
///
/// Edge `i` of the graph carries ordinal `i+1` of the family.
pub fn assemble_edge_matrix(
    graph: &DirectedMultigraph,
    fam: &PerturbedWeightFamily,
    psi: &PsiFamily,
    s: f64,
    eps: f64,
    tail_tol: f64,
) -> Result<TransferOperatorRealization> {
    let w = edge_weights(graph, fam, psi, s, eps)?;
    let tail = tail_for(graph, fam, psi, s, eps, tail_tol)?;
    let n = graph.n_edges();
    let matrix = DMatrix::from_fn(n, n, |e2, e| if graph.incidence(e, e2) { w[e] } else { 0.0 });
    Ok(TransferOperatorRealization {
        matrix,
        index_map: graph.edges().iter().map(|e| e.id.clone()).collect(),
        truncation: Truncation {
            level: n,
            tail_bound: tail,
        },
        form: Form::EdgeMatrix,
        discretization_error: None,
    })
}

/// `M(v,u) = Σ_{e: t(e)=v, i(e)=u} w_e` for arbitrary per-edge values.
pub fn vertex_reduce(graph: &DirectedMultigraph, values: &[f64]) -> DMatrix<f64> {
    let nv = graph.n_vertices();
    let mut m = DMatrix::zeros(nv, nv);
    for (e, edge) in graph.edges().iter().enumerate() {
        m[(edge.to, edge.from)] += values[e];
    }
    m
}

/// Edge matrix with arbitrary per-edge values in place of weights.
pub fn edge_matrix_from_values(graph: &DirectedMultigraph, values: &[f64]) -> DMatrix<f64> {
    let n = graph.n_edges();
    DMatrix::from_fn(n, n, |e2, e| if graph.incidence(e, e2) { values[e] } else { 0.0 })
}

/// Vertex-reduced operator `(MF)(v) = Σ_{e: t(e)=v} w_e F(i(e))`, same leading eigenvalue.
pub fn assemble_vertex_matrix(
    graph: &DirectedMultigraph,
    fam: &PerturbedWeightFamily,
    psi: &PsiFamily,
    s: f64,
    eps: f64,
    tail_tol: f64,
) -> Result<TransferOperatorRealization> {
    let w = edge_weights(graph, fam, psi, s, eps)?;
    let tail = tail_for(graph, fam, psi, s, eps, tail_tol)?;
    Ok(TransferOperatorRealization {
        matrix: vertex_reduce(graph, &w),
        index_map: graph.vertices().to_vec(),
        truncation: Truncation {
            level: graph.n_edges(),
            tail_bound: tail,
        },
        form: Form::VertexMatrix,
        discretization_error: None,
    })
}

/// Log of the leading eigenvalue.
pub fn pressure(op: &TransferOperatorRealization) -> Result<f64> {
    let pair = leading_eigenpair(&op.matrix, &PowerOptions::default())?;
    if !(pair.value > 0.0) {
        return Err(Error::Invalid(format!("leading eigenvalue {} is not positive", pair.value)));
    }
    Ok(pair.value.ln())
}

#[derive(Debug, Clone)]
pub struct RpfTriplet {
    pub lambda: f64,
    pub h: DVector<f64>,
    /// Left eigenvector with `Σν = 1`.
    pub nu: DVector<f64>,
    /// `|λ₂|/λ` estimate.
    pub gap: f64,
    /// `‖Lh − λh‖∞ / (λ‖h‖∞)`
    pub residual_right: f64,
    /// `‖νL − λν‖₁ / (λ‖ν‖₁)`
    pub residual_left: f64,
}

impl RpfTriplet {
    pub fn pressure(&self) -> f64 {
        self.lambda.ln()
    }

    /// `ν(f)` for a vector of values on the index set.
    pub fn nu_of(&self, f: &DVector<f64>) -> f64 {
        self.nu.dot(f)
    }
}

/// Leading eigenvalue with right and left eigenvectors; ν normalized first, then `ν(h) = 1`.
pub fn rpf_triplet_of(matrix: &DMatrix<f64>) -> Result<RpfTriplet> {
    let opts = PowerOptions::default();
    let right = leading_eigenpair(matrix, &opts)?;
    let left = leading_eigenpair(&matrix.transpose(), &opts)?;
    let mut nu = left.vector;
    let mass = nu.sum();
    if mass == 0.0 {
        return Err(Error::ZeroMassNormalization);
    }
    nu /= mass;
    let mut h = right.vector;
    let nh = nu.dot(&h);
    if nh == 0.0 {
        return Err(Error::DegenerateLeadingEigenvalue(0.0));
    }
    h /= nh;
    // second-order accurate eigenvalue from both eigenvectors
    let lambda = nu.dot(&(matrix * &h));
    let rr = (matrix * &h - &h * lambda).amax() / (lambda * h.amax());
    let rl = (matrix.tr_mul(&nu) - &nu * lambda).lp_norm(1) / (lambda * nu.lp_norm(1));

    let n = matrix.nrows();
    let (gap, separation) = if n == 1 {
        (0.0, 1.0)
    } else {
        let deflated = matrix - &h * nu.transpose() * lambda;
        let rho = power::growth_rate(&deflated, 400) / lambda;
        let sep = if rho < 1.0 - 1e-6 {
            1.0 - rho
        } else {
            // not strictly dominant; λ must still be a simple eigenvalue
            let shifted = &deflated - DMatrix::identity(n, n) * lambda;
            let lu = shifted.lu();
            let u = lu.u();
            let max = u.diagonal().amax();
            u.diagonal().iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min) / max.max(f64::MIN_POSITIVE)
        };
        (rho, sep)
    };
    if separation < 1e-10 {
        return Err(Error::DegenerateLeadingEigenvalue(separation));
    }
    Ok(RpfTriplet {
        lambda,
        h,
        nu,
        gap,
        residual_right: rr,
        residual_left: rl,
    })
}

pub fn rpf_triplet(op: &TransferOperatorRealization) -> Result<RpfTriplet> {
    rpf_triplet_of(&op.matrix)
}

/// Extreme ratios of `μ([w])` to `exp(−nP + Σ log-weights)` over cylinders of length ≤ depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsBounds {
    pub c_min: f64,
    pub c_max: f64,
    pub cylinders: usize,
}

impl GibbsBounds {
    /// Smallest `c` with all ratios in `[1/c, c]`.
    pub fn constant(&self) -> f64 {
        self.c_max.max(1.0 / self.c_min)
    }
}

/// Cylinder masses come from the stationary Markov measure `π(e) = h_e ν_e`,
/// `p(e,e′) = A(e,e′) ν_{e′} / Σ_{f: A(e,f)} ν_f` of the normalized edge operator.
pub fn gibbs_check(
    triplet: &RpfTriplet,
    graph: &DirectedMultigraph,
    log_weights: &[f64],
    depth: usize,
) -> Result<GibbsBounds> {
    let n = graph.n_edges();
    if triplet.h.len() != n || log_weights.len() != n {
        return Err(Error::Invalid("triplet and weights must be indexed by graph edges".into()));
    }
    if depth == 0 || depth > 8 {
        return Err(Error::Invalid(format!("depth {depth} outside 1..=8")));
    }
    let p = triplet.pressure();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|e| (0..n).filter(|&f| graph.incidence(e, f)).collect())
        .collect();
    let log_trans: Vec<Vec<f64>> = succ
        .iter()
        .map(|s| {
            let tot: f64 = s.iter().map(|&f| triplet.nu[f]).sum();
            s.iter().map(|&f| (triplet.nu[f] / tot).ln()).collect()
        })
        .collect();
    let mut out = GibbsBounds {
        c_min: f64::INFINITY,
        c_max: 0.0,
        cylinders: 0,
    };
    // stack of (edge, depth, log mu, log comparison)
    let mut stack: Vec<(usize, usize, f64, f64)> = (0..n)
        .map(|e| ((triplet.h[e] * triplet.nu[e]).ln(), e))
        .map(|(lm, e)| (e, 1, lm, log_weights[e] - p))
        .collect();
    while let Some((e, d, lm, lc)) = stack.pop() {
        let r = (lm - lc).exp();
        out.c_min = out.c_min.min(r);
        out.c_max = out.c_max.max(r);
        out.cylinders += 1;
        if d < depth {
            for (i, &f) in succ[e].iter().enumerate() {
                stack.push((f, d + 1, lm + log_trans[e][i], lc + log_weights[f] - p));
            }
        }
    }
    Ok(out)
}

/// `∂P/∂s = ν(h log|g|)` for an edge-indexed triplet.
pub fn pressure_s_derivative(triplet: &RpfTriplet, log_g: &[f64]) -> Result<f64> {
    let d: f64 = (0..log_g.len()).map(|e| triplet.nu[e] * triplet.h[e] * log_g[e]).sum();
    if d >= 0.0 {
        return Err(Error::NonNegativeDerivative(d));
    }
    Ok(d)
}

/// Sampled `s ↦ P(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve {
    pub samples: Vec<(f64, f64)>,
    pub truncation: usize,
}

impl PressureCurve {
    pub fn sample<F: Fn(f64) -> Result<f64>>(grid: &[f64], truncation: usize, p: F) -> Result<Self> {
        let samples = grid.iter().map(|&s| p(s).map(|v| (s, v))).collect::<Result<Vec<_>>>()?;
        Ok(PressureCurve {
            samples,
            truncation,
        })
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// Most negative normalized second divided difference (0 when convex).
    pub fn convexity_defect(&self) -> f64 {
        self.samples
            .windows(3)
            .map(|w| {
                let d1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                let d2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
                (d2 - d1).min(0.0)
            })
            .fold(0.0, f64::min)
    }

    pub fn is_convex(&self, slack: f64) -> bool {
        self.convexity_defect() >= -slack
    }
}
