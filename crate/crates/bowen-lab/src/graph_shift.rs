//! Directed multigraphs and the shift spaces they define.
//!
//! A countable alphabet is always represented by a finite truncation; the
//! `family_tag` records which parametric family it came from.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedMultigraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    /// Parametric countable family this graph truncates, if any.
    pub family_tag: Option<String>,
}

/// Admissible path of edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub symbols: Vec<usize>,
}

impl Word {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_admissible(&self, g: &DirectedMultigraph) -> bool {
        self.symbols.windows(2).all(|w| g.incidence(w[0], w[1]))
    }
}

/// Result of the finite-irreducibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// Distinct connecting words, sorted; the empty word stands for direct adjacency.
    pub witnesses: Vec<Word>,
}

impl DirectedMultigraph {
    /// Validate and build a graph from vertex ids and `(edge id, from, to)` triples.
    pub fn new<V, E, S, T>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = S>,
        E: IntoIterator<Item = (T, T, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if vertices.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(v.clone()));
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (id, from, to) in edges {
            let (id, from, to): (String, String, String) = (id.into(), from.into(), to.into());
            let f = *index.get(&from).ok_or(Error::UnknownVertex(from))?;
            let t = *index.get(&to).ok_or(Error::UnknownVertex(to))?;
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateEdgeId(id));
            }
            out.push(Edge { id, from: f, to: t });
        }
        Ok(DirectedMultigraph {
            vertices,
            edges: out,
            family_tag: None,
        })
    }

    /// Single vertex `v` with loops `1..=n`.
    pub fn full_shift(n: usize) -> Self {
        DirectedMultigraph {
            vertices: vec!["v".into()],
            edges: (1..=n)
                .map(|e| Edge {
                    id: e.to_string(),
                    from: 0,
                    to: 0,
                })
                .collect(),
            family_tag: None,
        }
    }

    pub fn with_family_tag(mut self, tag: impl Into<String>) -> Self {
        self.family_tag = Some(tag.into());
        self
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self, e: usize) -> usize {
        self.edges[e].from
    }

    pub fn terminal(&self, e: usize) -> usize {
        self.edges[e].to
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// A(e,e′) = [t(e) = i(e′)].
    pub fn incidence(&self, e: usize, e2: usize) -> bool {
        self.edges[e].to == self.edges[e2].from
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.n_edges();
        DMatrix::from_fn(n, n, |i, j| if self.incidence(i, j) { 1.0 } else { 0.0 })
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        (0..self.n_edges())
            .map(|e| (0..self.n_edges()).filter(|&f| self.incidence(e, f)).collect())
            .collect()
    }

    /// Relabel edges: edge `i` of the result is edge `perm[i]` of `self`.
    pub fn permute_edges(&self, perm: &[usize]) -> Self {
        DirectedMultigraph {
            vertices: self.vertices.clone(),
            edges: perm.iter().map(|&i| self.edges[i].clone()).collect(),
            family_tag: self.family_tag.clone(),
        }
    }

    /// Shortest connecting words for every ordered edge pair, lexicographically least among ties.
    pub fn is_finitely_irreducible(&self) -> Irreducibility {
        let n = self.n_edges();
        let succ = self.successors();
        let mut pred = vec![Vec::new(); n];
        for (e, s) in succ.iter().enumerate() {
            for &f in s {
                pred[f].push(e);
            }
        }
        let mut words: HashSet<Word> = HashSet::new();
        for target in 0..n {
            // dist[e] = number of steps from e to target in the edge graph
            let mut dist = vec![usize::MAX; n];
            dist[target] = 0;
            let mut queue = VecDeque::from([target]);
            while let Some(u) = queue.pop_front() {
                for &p in &pred[u] {
                    if dist[p] == usize::MAX {
                        dist[p] = dist[u] + 1;
                        queue.push_back(p);
                    }
                }
            }
            for start in 0..n {
                // a path start -> ... -> target of at least one step
                let first = succ[start]
                    .iter()
                    .copied()
                    .filter(|&f| dist[f] != usize::MAX)
                    .min_by_key(|&f| (dist[f], f));
                let Some(mut cur) = first else {
                    return Irreducibility {
                        irreducible: false,
                        witnesses: Vec::new(),
                    };
                };
                let mut w = Vec::new();
                while cur != target {
                    w.push(cur);
                    cur = succ[cur]
                        .iter()
                        .copied()
                        .filter(|&f| dist[f] == dist[cur] - 1)
                        .min()
                        .expect("distance labels are consistent");
                }
                words.insert(Word { symbols: w });
            }
        }
        let mut witnesses: Vec<Word> = words.into_iter().collect();
        witnesses.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Irreducibility {
            irreducible: true,
            witnesses,
        }
    }

    /// All admissible words of length `n`, lexicographic in edge order.
    pub fn enumerate_cylinders(&self, n: usize) -> Vec<Word> {
        assert!(n >= 1, "cylinder length must be positive");
        let succ = self.successors();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn rec(
            succ: &[Vec<usize>],
            n: usize,
            cur: &mut Vec<usize>,
            out: &mut Vec<Word>,
        ) {
            if cur.len() == n {
                out.push(Word {
                    symbols: cur.clone(),
                });
                return;
            }
            let last = *cur.last().unwrap();
            for &f in &succ[last] {
                cur.push(f);
                rec(succ, n, cur, out);
                cur.pop();
            }
        }
        for e in 0..self.n_edges() {
            cur.push(e);
            rec(&succ, n, &mut cur, &mut out);
            cur.pop();
        }
        out
    }
}
