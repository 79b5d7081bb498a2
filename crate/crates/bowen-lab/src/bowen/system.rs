//! Systems whose Bowen root is computed: depth-1 weights on a graph, or perturbed
//! continued fractions.

use crate::error::{Error, Result};
use crate::graph_shift::DirectedMultigraph;
use crate::transfer::{
    assemble_gauss_collocation, assemble_vertex_matrix, leading_eigenpair, CollocationOptions, PowerOptions,
    TAIL_TOL,
};
use crate::weights::{
    abscissa_p, auto_truncation, estimate_exponents, threshold_p_n, Alphabet, ConformalMapFamily, DigitSet,
    PerturbedWeightFamily, Profile, PsiFamily,
};

#[derive(Debug, Clone)]
pub enum GraphSpec {
    /// Single vertex, one loop per family ordinal.
    FullShift,
    Graph(DirectedMultigraph),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationPolicy {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct Depth1System {
    pub name: String,
    pub graph: GraphSpec,
    pub weights: PerturbedWeightFamily,
    pub psi: PsiFamily,
    pub truncation: TruncationPolicy,
    pub tail_tol: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuedFractionSystem {
    pub name: String,
    pub family: ConformalMapFamily,
    pub collocation: CollocationOptions,
}

#[derive(Debug, Clone)]
pub enum System {
    Depth1(Depth1System),
    ContinuedFraction(ContinuedFractionSystem),
}

/// A pressure value with the truncation it was computed at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureValue {
    pub value: f64,
    pub truncation: usize,
    pub tail_bound: f64,
}

impl System {
    pub fn depth1(name: impl Into<String>, graph: GraphSpec, weights: PerturbedWeightFamily, psi: PsiFamily) -> Self {
        System::Depth1(Depth1System {
            name: name.into(),
            graph,
            weights,
            psi,
            truncation: TruncationPolicy::Auto,
            tail_tol: TAIL_TOL,
        })
    }

    pub fn linear_ifs1(a: f64) -> Self {
        let w = PerturbedWeightFamily::linear_ifs1(a);
        System::depth1(w.name.clone(), GraphSpec::FullShift, w, PsiFamily::default())
    }

    pub fn linear_ifs2() -> Self {
        let w = PerturbedWeightFamily::linear_ifs2();
        System::depth1(w.name.clone(), GraphSpec::FullShift, w, PsiFamily::default())
    }

    /// Finite full shift with constant weights `w_e` (no perturbation).
    pub fn finite_full_shift(weights: &[f64]) -> Self {
        let fam = PerturbedWeightFamily::new(
            format!("full_shift({})", weights.len()),
            Profile::Table(weights.to_vec()),
            vec![],
            Alphabet::Finite(weights.len()),
        );
        System::depth1(fam.name.clone(), GraphSpec::FullShift, fam, PsiFamily::default())
    }

    pub fn continued_fraction(digits: DigitSet, a: f64) -> Self {
        let name = match &digits {
            DigitSet::Finite(v) if v.len() > 2 && v.windows(2).all(|w| w[1] == w[0] + 1) => {
                format!("cont_frac(E={}..{},a={a})", v[0], v[v.len() - 1])
            }
            DigitSet::Finite(v) => format!("cont_frac(E={v:?},a={a})"),
            DigitSet::From(s) => format!("cont_frac(E>={s},a={a})"),
        };
        System::ContinuedFraction(ContinuedFractionSystem {
            name,
            family: ConformalMapFamily::continued_fraction(digits, a),
            collocation: CollocationOptions::default(),
        })
    }

    pub fn with_truncation(mut self, policy: TruncationPolicy) -> Self {
        if let System::Depth1(d) = &mut self {
            d.truncation = policy;
        }
        self
    }

    pub fn with_collocation(mut self, opts: CollocationOptions) -> Self {
        if let System::ContinuedFraction(c) = &mut self {
            c.collocation = opts;
        }
        self
    }

    pub fn with_eps_max(mut self, eps_max: f64) -> Self {
        match &mut self {
            System::Depth1(d) => d.weights.eps_max = eps_max,
            System::ContinuedFraction(c) => c.family.eps_max = eps_max,
        }
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        match &mut self {
            System::Depth1(d) => d.name = name.into(),
            System::ContinuedFraction(c) => c.name = name.into(),
        }
        self
    }

    pub fn name(&self) -> &str {
        match self {
            System::Depth1(d) => &d.name,
            System::ContinuedFraction(c) => &c.name,
        }
    }

    /// Convergence abscissa of the unperturbed pressure.
    pub fn abscissa(&self) -> Result<f64> {
        match self {
            System::Depth1(d) => {
                if d.is_finite() {
                    Ok(f64::NEG_INFINITY)
                } else {
                    abscissa_p(&d.weights, &d.psi)
                }
            }
            System::ContinuedFraction(c) => Ok(if c.family.is_finite() {
                f64::NEG_INFINITY
            } else {
                c.family.abscissa()
            }),
        }
    }

    pub fn eps_max(&self) -> f64 {
        match self {
            System::Depth1(d) => d.weights.eps_max,
            System::ContinuedFraction(c) => c.family.eps_max,
        }
    }

    /// `p(n)` from the weight exponents of every declared coefficient.
    pub fn threshold(&self, n: usize) -> Result<f64> {
        match self {
            System::Depth1(d) if d.is_finite() => Ok(0.0),
            System::Depth1(d) => {
                let est = estimate_exponents(&d.weights, &[256, 1024, 4096])?;
                let pl = abscissa_p(&d.weights, &d.psi)?;
                Ok(threshold_p_n(n, &est.t, est.t_tilde, pl))
            }
            System::ContinuedFraction(c) => Ok(if c.family.is_finite() { 0.0 } else { c.family.abscissa() }),
        }
    }

    /// Pressure `P(s log|g(ε,·)| + log ψ(ε,·))`.
    pub fn pressure(&self, s: f64, eps: f64) -> Result<PressureValue> {
        if !(0.0..=self.eps_max()).contains(&eps) {
            return Err(Error::OutOfRangeEpsilon { eps, max: self.eps_max() });
        }
        match self {
            System::Depth1(d) => d.pressure(s, eps),
            System::ContinuedFraction(c) => c.pressure(s, eps),
        }
    }
}

impl Depth1System {
    pub fn is_finite(&self) -> bool {
        matches!(self.graph, GraphSpec::Graph(_)) || self.weights.alphabet_size().is_some()
    }

    /// Number of edges used when the pressure parameter is at least `s_min`.
    pub fn truncation_at(&self, s_min: f64, eps: f64) -> Result<usize> {
        match (&self.graph, self.truncation) {
            (GraphSpec::Graph(g), _) => Ok(g.n_edges()),
            (GraphSpec::FullShift, _) if self.weights.alphabet_size().is_some() => {
                Ok(self.weights.alphabet_size().unwrap_or_default())
            }
            (GraphSpec::FullShift, TruncationPolicy::Fixed(n)) => Ok(n),
            (GraphSpec::FullShift, TruncationPolicy::Auto) => {
                auto_truncation(&self.weights, &self.psi, s_min, eps, self.tail_tol)
            }
        }
    }

    pub fn graph_with(&self, n_edges: usize) -> DirectedMultigraph {
        match &self.graph {
            GraphSpec::Graph(g) => g.clone(),
            GraphSpec::FullShift => DirectedMultigraph::full_shift(n_edges),
        }
    }

    fn pressure(&self, s: f64, eps: f64) -> Result<PressureValue> {
        if !self.is_finite() && s <= abscissa_p(&self.weights, &self.psi)? {
            return Err(Error::PressureInfinite(s));
        }
        let n = self.truncation_at(s, eps)?;
        let tol = match self.truncation {
            TruncationPolicy::Fixed(_) => f64::INFINITY,
            TruncationPolicy::Auto => self.tail_tol,
        };
        let op = assemble_vertex_matrix(&self.graph_with(n), &self.weights, &self.psi, s, eps, tol)?;
        let lambda = if op.matrix.nrows() == 1 {
            op.matrix[(0, 0)]
        } else {
            leading_eigenpair(&op.matrix, &PowerOptions::default())?.value
        };
        if !(lambda > 0.0) {
            return Err(Error::Invalid(format!("leading eigenvalue {lambda} is not positive")));
        }
        Ok(PressureValue {
            value: lambda.ln(),
            truncation: n,
            tail_bound: op.truncation.tail_bound,
        })
    }
}

impl ContinuedFractionSystem {
    fn pressure(&self, s: f64, eps: f64) -> Result<PressureValue> {
        if !self.family.is_finite() && s <= self.family.abscissa() {
            return Err(Error::PressureInfinite(s));
        }
        let op = assemble_gauss_collocation(&self.family, s, eps, &self.collocation)?;
        let lambda = leading_eigenpair(&op.matrix, &PowerOptions::default())?.value;
        if !(lambda > 0.0) {
            return Err(Error::Invalid(format!("leading eigenvalue {lambda} is not positive")));
        }
        Ok(PressureValue {
            value: lambda.ln(),
            truncation: op.truncation.level,
            tail_bound: op.truncation.tail_bound,
        })
    }
}
