//! JSON system descriptions and the named registry.

use serde::{Deserialize, Serialize};

use crate::bowen::{GraphSpec, System, TruncationPolicy};
use crate::graph_shift::DirectedMultigraph;
use crate::weights::{check_conditions, Alphabet, DigitSet, PerturbedWeightFamily, Profile, PsiFamily};

/// Rejected input; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescription {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub graph: Option<GraphSection>,
    pub weight: WeightSection,
    #[serde(default)]
    pub psi: Option<PsiSection>,
    #[serde(default)]
    pub truncation: Option<TruncationSection>,
    /// `[0, ε_max]`
    #[serde(default)]
    pub eps_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSection {
    pub id: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSection {
    /// `1/5^e + ε/a^e`
    LinearIfs1 { a: f64 },
    /// `1/5^e + ε/4^e + ε²/3^e`
    LinearIfs2,
    /// `1/(e + x + aε)` over a digit set.
    ContFrac {
        digits: DigitsSection,
        a: f64,
        #[serde(default)]
        nodes: Option<usize>,
    },
    /// Preset two-vertex Markov system.
    FiniteMarkov,
    /// Edge weights `g(e)` and coefficients `g_k(e)`, one entry per edge.
    Tabulated {
        base: Vec<f64>,
        #[serde(default)]
        coeffs: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DigitsSection {
    List(Vec<u64>),
    From { from: u64 },
    Range { range: [u64; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSection {
    pub base: Vec<f64>,
    #[serde(default)]
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruncationSection {
    Fixed(usize),
    Named(String),
}

pub fn parse_truncation(s: &str) -> Result<TruncationPolicy, SchemaError> {
    match s {
        "auto" => Ok(TruncationPolicy::Auto),
        n => n
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(TruncationPolicy::Fixed)
            .ok_or_else(|| SchemaError(format!("truncation must be `auto` or a positive integer, got `{n}`"))),
    }
}

pub const FINITE_MARKOV_WEIGHTS: [f64; 5] = [0.30, 0.40, 0.35, 0.20, 0.25];
pub const FINITE_MARKOV_COEFFS: [f64; 5] = [0.05, -0.02, 0.03, 0.01, -0.04];

pub fn finite_markov_graph() -> DirectedMultigraph {
    DirectedMultigraph::new(
        ["a", "b"],
        [
            ("aa", "a", "a"),
            ("ab", "a", "b"),
            ("ba", "b", "a"),
            ("bb", "b", "b"),
            ("bb2", "b", "b"),
        ],
    )
    .expect("preset graph is valid")
}

pub fn finite_markov() -> System {
    let fam = PerturbedWeightFamily::new(
        "finite_markov",
        Profile::Table(FINITE_MARKOV_WEIGHTS.to_vec()),
        vec![Profile::Table(FINITE_MARKOV_COEFFS.to_vec())],
        Alphabet::Finite(FINITE_MARKOV_WEIGHTS.len()),
    );
    System::depth1("finite_markov", GraphSpec::Graph(finite_markov_graph()), fam, PsiFamily::default())
}

/// Registry entries: name, parameters, summary.
pub const REGISTRY: [(&str, &str, &str); 6] = [
    ("linear_ifs1", "a (default 10)", "g = 1/5^e + eps/a^e on the countable full shift"),
    ("linear_ifs2", "-", "g = 1/5^e + eps/4^e + eps^2/3^e on the countable full shift"),
    ("cont_frac", "a (default 1)", "continued fractions 1/(e+x+a eps), digits 2..20"),
    ("cont_frac_12", "a (default 1)", "continued fractions 1/(e+x+a eps), digits {1,2}"),
    ("gauss", "a (default 1)", "continued fractions 1/(e+x+a eps), all digits >= 1"),
    ("finite_markov", "-", "two-vertex graph with five tabulated edge weights and a first-order term"),
];

/// Registry system by name, with an optional `a` override.
pub fn registry(name: &str, a: Option<f64>) -> Result<System, SchemaError> {
    let sys = match name {
        "linear_ifs1" => System::linear_ifs1(a.unwrap_or(10.0)),
        "linear_ifs2" => System::linear_ifs2(),
        "cont_frac" => System::continued_fraction(DigitSet::Finite((2..=20).collect()), a.unwrap_or(1.0)),
        "cont_frac_12" => System::continued_fraction(DigitSet::Finite(vec![1, 2]), a.unwrap_or(1.0)),
        "gauss" => System::continued_fraction(DigitSet::From(1), a.unwrap_or(1.0)),
        "finite_markov" => finite_markov(),
        other => {
            let names: Vec<&str> = REGISTRY.iter().map(|r| r.0).collect();
            return Err(SchemaError(format!("unknown registry system `{other}` (known: {})", names.join(", "))));
        }
    };
    Ok(sys)
}

/// Parse a description; errors carry the JSON line and column.
pub fn parse_description(text: &str) -> Result<SystemDescription, SchemaError> {
    serde_json::from_str(text).map_err(|e| SchemaError(format!("schema violation: {e}")))
}

fn positive_table(label: &str, v: &[f64]) -> Result<(), SchemaError> {
    if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(SchemaError(format!("{label} must be a nonempty list of positive numbers")));
    }
    Ok(())
}

fn table_coeffs(label: &str, rows: &[Vec<f64>], len: usize) -> Result<Vec<Profile>, SchemaError> {
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            if r.len() != len || r.iter().any(|x| !x.is_finite()) {
                Err(SchemaError(format!("{label}[{k}] must hold {len} finite numbers")))
            } else {
                Ok(Profile::Table(r.clone()))
            }
        })
        .collect()
}

fn digits(d: &DigitsSection) -> Result<DigitSet, SchemaError> {
    let set = match d {
        DigitsSection::List(v) => {
            let mut v = v.clone();
            v.sort_unstable();
            v.dedup();
            DigitSet::Finite(v)
        }
        DigitsSection::From { from } => DigitSet::From(*from),
        DigitsSection::Range { range: [lo, hi] } if lo <= hi => DigitSet::Finite((*lo..=*hi).collect()),
        DigitsSection::Range { .. } => return Err(SchemaError("digit range must be increasing".into())),
    };
    let ok = match &set {
        DigitSet::Finite(v) => !v.is_empty() && v[0] >= 1,
        DigitSet::From(s) => *s >= 1,
    };
    if !ok {
        return Err(SchemaError("digits must be positive integers".into()));
    }
    Ok(set)
}

impl SystemDescription {
    /// Build the system; `a` overrides the registry parameter when present.
    pub fn to_system(&self, a: Option<f64>) -> Result<System, SchemaError> {
        let eps_max = match self.eps_range {
            Some([lo, hi]) if lo == 0.0 && hi > 0.0 && hi.is_finite() => Some(hi),
            Some(r) => return Err(SchemaError(format!("eps_range must be [0, eps_max] with eps_max > 0, got {r:?}"))),
            None => None,
        };
        let graph_only_tabulated = || SchemaError("a graph section is only allowed with tabulated weights".into());
        let psi_only_tabulated = || SchemaError("a psi section is only allowed with tabulated weights".into());
        let mut sys = match &self.weight {
            WeightSection::LinearIfs1 { a: a0 } => {
                let a = a.unwrap_or(*a0);
                if !(a > 1.0) {
                    return Err(SchemaError(format!("linear_ifs1 needs a > 1, got {a}")));
                }
                System::linear_ifs1(a)
            }
            WeightSection::LinearIfs2 => System::linear_ifs2(),
            WeightSection::ContFrac { digits: d, a: a0, nodes } => {
                let mut s = System::continued_fraction(digits(d)?, a.unwrap_or(*a0));
                if let (Some(m), System::ContinuedFraction(c)) = (nodes, &mut s) {
                    if *m < 4 {
                        return Err(SchemaError("collocation needs at least 4 nodes".into()));
                    }
                    c.collocation.nodes = *m;
                }
                s
            }
            WeightSection::FiniteMarkov => finite_markov(),
            WeightSection::Tabulated { base, coeffs } => {
                positive_table("weight.base", base)?;
                let n = base.len();
                let graph = match &self.graph {
                    None => GraphSpec::FullShift,
                    Some(g) => {
                        let graph = DirectedMultigraph::new(
                            g.vertices.iter().cloned(),
                            g.edges.iter().map(|e| (e.id.clone(), e.from.clone(), e.to.clone())),
                        )
                        .map_err(|e| SchemaError(format!("graph: {e}")))?;
                        if graph.n_edges() != n {
                            return Err(SchemaError(format!(
                                "graph has {} edges but weight.base has {n} entries",
                                graph.n_edges()
                            )));
                        }
                        if !graph.is_finitely_irreducible().irreducible {
                            return Err(SchemaError("graph is not finitely irreducible".into()));
                        }
                        GraphSpec::Graph(graph)
                    }
                };
                let fam = PerturbedWeightFamily::new(
                    self.name.clone().unwrap_or_else(|| "tabulated".into()),
                    Profile::Table(base.clone()),
                    table_coeffs("weight.coeffs", coeffs, n)?,
                    Alphabet::Finite(n),
                );
                let psi = match &self.psi {
                    None => PsiFamily::default(),
                    Some(p) => {
                        positive_table("psi.base", &p.base)?;
                        if p.base.len() != n {
                            return Err(SchemaError(format!("psi.base must hold {n} entries")));
                        }
                        PsiFamily::new(Profile::Table(p.base.clone()), table_coeffs("psi.coeffs", &p.coeffs, n)?)
                    }
                };
                let report = check_conditions(&fam, &psi, fam.order());
                if !report.all_pass() {
                    let failed: Vec<String> = report
                        .entries
                        .iter()
                        .filter(|e| e.status == crate::weights::ConditionStatus::Fail)
                        .map(|e| format!("{} ({})", e.name, e.note))
                        .collect();
                    return Err(SchemaError(format!("tabulated weights fail: {}", failed.join("; "))));
                }
                let name = fam.name.clone();
                System::depth1(name, graph, fam, psi)
            }
        };
        if !matches!(self.weight, WeightSection::Tabulated { .. }) {
            if self.graph.is_some() {
                return Err(graph_only_tabulated());
            }
            if self.psi.is_some() {
                return Err(psi_only_tabulated());
            }
        }
        if let Some(t) = &self.truncation {
            let policy = match t {
                TruncationSection::Fixed(0) => return Err(SchemaError("truncation must be positive".into())),
                TruncationSection::Fixed(n) => TruncationPolicy::Fixed(*n),
                TruncationSection::Named(s) => parse_truncation(s)?,
            };
            sys = sys.with_truncation(policy);
        }
        if let Some(m) = eps_max {
            sys = sys.with_eps_max(m);
        }
        if let (Some(name), false) = (&self.name, matches!(self.weight, WeightSection::Tabulated { .. })) {
            sys = sys.with_name(name.clone());
        }
        Ok(sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_description_round_trip() {
        let d = parse_description(r#"{"weight":{"kind":"linear_ifs1","a":10}}"#).unwrap();
        let sys = d.to_system(Some(6.0)).unwrap();
        assert_eq!(sys.name(), "linear_ifs1(a=6)");
    }

    #[test]
    fn malformed_json_reports_location() {
        let e = parse_description("{\n  \"weight\": {\"kind\": \"linear_ifs1\", \"a\": }\n}").unwrap_err();
        assert!(e.0.contains("line 2"), "{}", e.0);
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(parse_description(r#"{"weight":{"kind":"linear_ifs2"},"colour":1}"#).is_err());
    }

    #[test]
    fn tabulated_graph() {
        let d = parse_description(
            r#"{"name":"two","graph":{"vertices":["a","b"],"edges":[
                {"id":"x","from":"a","to":"b"},{"id":"y","from":"b","to":"a"},{"id":"z","from":"a","to":"a"}]},
               "weight":{"kind":"tabulated","base":[0.3,0.4,0.2]}}"#,
        )
        .unwrap();
        assert_eq!(d.to_system(None).unwrap().name(), "two");
    }

    #[test]
    fn edge_count_mismatch() {
        let d = parse_description(
            r#"{"graph":{"vertices":["a"],"edges":[{"id":"x","from":"a","to":"a"}]},
               "weight":{"kind":"tabulated","base":[0.3,0.4]}}"#,
        )
        .unwrap();
        assert!(d.to_system(None).is_err());
    }

    #[test]
    fn truncation_policy() {
        assert_eq!(parse_truncation("auto").unwrap(), TruncationPolicy::Auto);
        assert_eq!(parse_truncation("64").unwrap(), TruncationPolicy::Fixed(64));
        assert!(parse_truncation("0").is_err());
    }
}
