//! Causal diagrams: directed graphs over named variables with an
//! exogenous/endogenous split, plus the DAG algorithms the pooling
//! pipelines rely on (validation, reachability, topological order,
//! longest path).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Whether a variable is a background factor or determined inside the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Exogenous,
    Endogenous,
}

/// A directed edge, serialized as a two-element `[source, target]` array.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub String, pub String);

impl Edge {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Edge(source.into(), target.into())
    }

    pub fn source(&self) -> &str {
        &self.0
    }

    pub fn target(&self) -> &str {
        &self.1
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.0, self.1)
    }
}

/// An invariant breach found by [`CausalDiagram::validate`].
///
/// Violations are data, not faults: an ill-formed diagram is a legitimate
/// input to validation and is described rather than rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SelfLoop { edge: Edge },
    DanglingEdge { edge: Edge, vertex: String },
    ExogenousIncoming { edge: Edge },
    Cycle { vertices: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { edge } => write!(f, "self-loop: {edge}"),
            Violation::DanglingEdge { edge, vertex } => {
                write!(f, "edge {edge} references unknown vertex {vertex}")
            }
            Violation::ExogenousIncoming { edge } => {
                write!(f, "exogenous vertex {} has incoming edge {edge}", edge.1)
            }
            Violation::Cycle { vertices } => write!(f, "cycle: {}", vertices.join(",")),
        }
    }
}

/// A directed graph over named variables.
///
/// Vertices and edges iterate in lexicographic order, which makes every
/// derived artifact (reports, DOT files, JSON) reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalDiagram {
    vertices: BTreeMap<String, VarKind>,
    edges: BTreeSet<Edge>,
}

impl CausalDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a diagram of endogenous vertices from name and edge lists.
    pub fn endogenous_from_parts<S: Into<String>>(
        vertices: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Self {
        let mut d = Self::new();
        for v in vertices {
            d.add_vertex(v, VarKind::Endogenous);
        }
        for e in edges {
            d.add_edge(e);
        }
        d
    }

    pub fn add_vertex(&mut self, name: impl Into<String>, kind: VarKind) {
        self.vertices.insert(name.into(), kind);
    }

    pub fn add_edge(&mut self, edge: Edge) {
        self.edges.insert(edge);
    }

    pub fn contains_vertex(&self, name: &str) -> bool {
        self.vertices.contains_key(name)
    }

    pub fn kind(&self, name: &str) -> Option<VarKind> {
        self.vertices.get(name).copied()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (&str, VarKind)> {
        self.vertices.iter().map(|(n, k)| (n.as_str(), *k))
    }

    pub fn vertex_names(&self) -> BTreeSet<String> {
        self.vertices.keys().cloned().collect()
    }

    pub fn endogenous(&self) -> BTreeSet<String> {
        self.of_kind(VarKind::Endogenous)
    }

    pub fn exogenous(&self) -> BTreeSet<String> {
        self.of_kind(VarKind::Exogenous)
    }

    fn of_kind(&self, kind: VarKind) -> BTreeSet<String> {
        self.vertices
            .iter()
            .filter(|(_, k)| **k == kind)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn parents(&self, vertex: &str) -> BTreeSet<String> {
        self.edges
            .iter()
            .filter(|e| e.target() == vertex)
            .map(|e| e.source().to_string())
            .collect()
    }

    pub fn children(&self, vertex: &str) -> BTreeSet<String> {
        self.edges
            .iter()
            .filter(|e| e.source() == vertex)
            .map(|e| e.target().to_string())
            .collect()
    }

    /// Checks every diagram invariant and reports each breach.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.source() == e.target() {
                out.push(Violation::SelfLoop { edge: e.clone() });
            }
            for endpoint in [e.source(), e.target()] {
                if !self.vertices.contains_key(endpoint) {
                    out.push(Violation::DanglingEdge {
                        edge: e.clone(),
                        vertex: endpoint.to_string(),
                    });
                }
            }
            if self.kind(e.target()) == Some(VarKind::Exogenous) {
                out.push(Violation::ExogenousIncoming { edge: e.clone() });
            }
        }
        if let Some(vertices) = self.cycle_vertices() {
            out.push(Violation::Cycle { vertices });
        }
        out
    }

    /// Returns this diagram or an [`Error::InvalidDiagram`] listing every breach.
    pub fn ensure_valid(&self) -> Result<&Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidDiagram(violations))
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.cycle_vertices().is_none()
    }

    /// Kahn's algorithm; the leftover vertices (all on or downstream of a
    /// cycle, minus those with no remaining incoming edge) witness the cycle.
    fn cycle_vertices(&self) -> Option<Vec<String>> {
        let mut indegree: BTreeMap<&str, usize> =
            self.vertices.keys().map(|v| (v.as_str(), 0)).collect();
        for e in &self.edges {
            if self.vertices.contains_key(e.target()) && self.vertices.contains_key(e.source()) {
                *indegree.get_mut(e.target()).unwrap() += 1;
            }
        }
        let mut queue: VecDeque<&str> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(v, _)| *v)
            .collect();
        let mut seen = 0usize;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for c in self.children(v) {
                // dangling targets have no indegree entry
                let Some(d) = indegree.get_mut(c.as_str()) else {
                    continue;
                };
                *d -= 1;
                if *d == 0 {
                    queue.push_back(self.vertices.get_key_value(&c).unwrap().0);
                }
            }
        }
        if seen == self.vertices.len() {
            None
        } else {
            let remaining: Vec<String> = indegree
                .iter()
                .filter(|(_, d)| **d > 0)
                .map(|(v, _)| v.to_string())
                .collect();
            Some(remaining)
        }
    }

    /// A topological order of all vertices (lexicographic among ties).
    pub fn topological_order(&self) -> Result<Vec<String>> {
        let mut indegree: BTreeMap<String, usize> =
            self.vertices.keys().map(|v| (v.clone(), 0)).collect();
        for e in &self.edges {
            *indegree
                .get_mut(e.target())
                .ok_or_else(|| Error::UnknownVertex(e.target().to_string()))? += 1;
        }
        let mut ready: BTreeSet<String> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(v, _)| v.clone())
            .collect();
        let mut order = Vec::with_capacity(self.vertices.len());
        while let Some(v) = ready.iter().next().cloned() {
            ready.remove(&v);
            for c in self.children(&v) {
                let d = indegree.get_mut(&c).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(c);
                }
            }
            order.push(v);
        }
        if order.len() == self.vertices.len() {
            Ok(order)
        } else {
            self.ensure_valid()?;
            unreachable!("cycle detection and topological sort disagree")
        }
    }

    /// All vertices reachable from `roots` by one or more directed edges.
    /// The roots themselves are excluded.
    pub fn descendants(&self, roots: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        for r in roots {
            if !self.vertices.contains_key(r) {
                return Err(Error::UnknownVertex(r.clone()));
            }
        }
        let mut out = BTreeSet::new();
        let mut queue: VecDeque<String> = roots.iter().cloned().collect();
        let mut visited: BTreeSet<String> = roots.clone();
        while let Some(v) = queue.pop_front() {
            for c in self.children(&v) {
                if visited.insert(c.clone()) {
                    out.insert(c.clone());
                    queue.push_back(c);
                } else if !roots.contains(&c) {
                    out.insert(c);
                }
            }
        }
        Ok(out)
    }

    /// Length in edges of the longest directed path. Zero for edge-free graphs.
    pub fn longest_path_len(&self) -> Result<usize> {
        let order = self.topological_order()?;
        let mut dist: BTreeMap<&str, usize> = order.iter().map(|v| (v.as_str(), 0)).collect();
        let mut best = 0;
        for v in &order {
            let dv = dist[v.as_str()];
            for c in self.children(v) {
                let dc = dist.get_mut(c.as_str()).unwrap();
                if dv + 1 > *dc {
                    *dc = dv + 1;
                    best = best.max(dv + 1);
                }
            }
        }
        Ok(best)
    }

    pub fn remove_edge(&mut self, edge: &Edge) -> bool {
        self.edges.remove(edge)
    }

    /// Drops every edge pointing into `target`.
    pub fn remove_incoming_edges(&mut self, target: &str) {
        self.edges.retain(|e| e.target() != target);
    }

    /// Copy of this diagram with the given vertices and all incident edges removed.
    pub fn without_vertices(&self, removed: &BTreeSet<String>) -> CausalDiagram {
        let vertices = self
            .vertices
            .iter()
            .filter(|(n, _)| !removed.contains(*n))
            .map(|(n, k)| (n.clone(), *k))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| !removed.contains(e.source()) && !removed.contains(e.target()))
            .cloned()
            .collect();
        CausalDiagram { vertices, edges }
    }

    /// The sub-diagram on endogenous vertices only.
    pub fn endogenous_subdiagram(&self) -> CausalDiagram {
        self.without_vertices(&self.exogenous())
    }
}
