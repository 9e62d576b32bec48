//! The JSON interchange format for expert models.
//!
//! A document declares variables (with optional finite domains), edges,
//! the predictor, and optionally lookup-table equations and exogenous root
//! distributions. Unknown fields are rejected. Canonical serialization
//! sorts variables, edges and table rows, so parse-then-serialize is the
//! identity on canonical documents.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagram::{CausalDiagram, Edge, VarKind};
use crate::scm::{ScmModel, StructuralEquation, Value};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
const DEFAULT_DOMAIN: [&str; 2] = ["0", "1"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    pub kind: VarKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub inputs: Vec<Value>,
    pub output: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDecl {
    pub parents: Vec<String>,
    pub table: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub variables: Vec<VariableDecl>,
    pub edges: Vec<Edge>,
    pub predictor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equations: Option<BTreeMap<String, EquationDecl>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exogenous_distributions: Option<BTreeMap<String, Vec<f64>>>,
}

impl ModelDocument {
    /// A document for an endogenous diagram, without quantitative parts.
    pub fn from_diagram(diagram: &CausalDiagram, predictor: &str) -> Self {
        let variables = diagram
            .vertices()
            .map(|(name, kind)| VariableDecl {
                name: name.to_string(),
                kind,
                domain: None,
            })
            .collect();
        ModelDocument {
            schema_version: SCHEMA_VERSION,
            variables,
            edges: diagram.edges().iter().cloned().collect(),
            predictor: predictor.to_string(),
            equations: None,
            exogenous_distributions: None,
        }
    }

    /// Sorts variables by name, edges and table rows lexicographically.
    pub fn canonicalize(&mut self) {
        self.variables.sort_by(|a, b| a.name.cmp(&b.name));
        self.edges.sort();
        self.edges.dedup();
        if let Some(eqs) = &mut self.equations {
            for eq in eqs.values_mut() {
                eq.table.sort_by(|a, b| a.inputs.cmp(&b.inputs));
            }
        }
    }

    /// Canonical pretty JSON, newline-terminated.
    pub fn to_canonical_json(&self) -> String {
        let mut doc = self.clone();
        doc.canonicalize();
        let mut s = serde_json::to_string_pretty(&doc).expect("document serialization");
        s.push('\n');
        s
    }

    /// Structural validation: declared names are unique, edges resolve,
    /// the predictor is a declared endogenous variable, the diagram
    /// invariants hold, and quantitative parts (when present) reference
    /// declared variables. Violation strings are human-readable.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if v.name.is_empty() {
                problems.push("empty variable name".into());
            }
            if !seen.insert(v.name.clone()) {
                problems.push(format!("duplicate variable {}", v.name));
            }
            if let Some(domain) = &v.domain {
                if domain.is_empty() {
                    problems.push(format!("empty domain for {}", v.name));
                }
            }
        }
        match self.kind_of(&self.predictor) {
            Some(VarKind::Endogenous) => {}
            Some(VarKind::Exogenous) => {
                problems.push(format!("predictor {} is exogenous", self.predictor))
            }
            None => problems.push(format!("predictor {} is not declared", self.predictor)),
        }
        let diagram = self.build_diagram();
        for violation in diagram.validate() {
            problems.push(violation.to_string());
        }
        if let Some(eqs) = &self.equations {
            for name in eqs.keys() {
                if self.kind_of(name) != Some(VarKind::Endogenous) {
                    problems.push(format!("equation for unknown endogenous variable {name}"));
                }
            }
        }
        if let Some(dists) = &self.exogenous_distributions {
            for name in dists.keys() {
                if self.kind_of(name) != Some(VarKind::Exogenous) {
                    problems.push(format!(
                        "distribution for unknown exogenous variable {name}"
                    ));
                }
            }
        }
        problems
    }

    fn kind_of(&self, name: &str) -> Option<VarKind> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.kind)
    }

    fn build_diagram(&self) -> CausalDiagram {
        let mut d = CausalDiagram::new();
        for v in &self.variables {
            d.add_vertex(v.name.clone(), v.kind);
        }
        for e in &self.edges {
            d.add_edge(e.clone());
        }
        d
    }

    /// The document's diagram, after structural validation.
    pub fn to_diagram(&self) -> Result<CausalDiagram> {
        let problems = self.validate();
        if !problems.is_empty() {
            return Err(Error::InvalidModel(problems.join("; ")));
        }
        Ok(self.build_diagram())
    }

    fn domain_of(&self, name: &str) -> Vec<Value> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .and_then(|v| v.domain.clone())
            .unwrap_or_else(|| DEFAULT_DOMAIN.iter().map(|s| s.to_string()).collect())
    }

    /// Builds a full structural model from the document.
    ///
    /// Variables without a declared domain default to binary {"0", "1"}.
    /// When `synthesize_roots` is set, each parentless endogenous variable
    /// lacking an equation receives an implicit uniform binary root
    /// `U_<name>` that it copies; every other endogenous variable must
    /// carry an equation.
    pub fn to_scm(&self, synthesize_roots: bool) -> Result<ScmModel> {
        let mut diagram = self.to_diagram()?;
        let equations_in = self.equations.clone().unwrap_or_default();
        let mut domains: BTreeMap<String, Vec<Value>> = BTreeMap::new();
        for v in &self.variables {
            domains.insert(v.name.clone(), self.domain_of(&v.name));
        }
        let mut exogenous_distribution = self.exogenous_distributions.clone().unwrap_or_default();
        let mut equations: BTreeMap<String, StructuralEquation> = BTreeMap::new();
        for target in diagram.endogenous() {
            if let Some(decl) = equations_in.get(&target) {
                let table = decl
                    .table
                    .iter()
                    .map(|row| (row.inputs.clone(), row.output.clone()))
                    .collect();
                equations.insert(
                    target.clone(),
                    StructuralEquation {
                        target: target.clone(),
                        parents: decl.parents.clone(),
                        table,
                    },
                );
            } else if synthesize_roots && diagram.parents(&target).is_empty() {
                let root = format!("U_{target}");
                if diagram.contains_vertex(&root) {
                    return Err(Error::InvalidModel(format!(
                        "cannot synthesize root {root}: the name is taken"
                    )));
                }
                let domain = domains[&target].clone();
                diagram.add_vertex(root.clone(), VarKind::Exogenous);
                diagram.add_edge(Edge::new(root.clone(), target.clone()));
                let uniform = vec![1.0 / domain.len() as f64; domain.len()];
                exogenous_distribution.insert(root.clone(), uniform);
                domains.insert(root.clone(), domain.clone());
                equations.insert(
                    target.clone(),
                    StructuralEquation::copy_of(target.clone(), root, &domain),
                );
            } else {
                return Err(Error::InvalidModel(format!(
                    "no equation for endogenous variable {target}"
                )));
            }
        }
        let model = ScmModel {
            diagram,
            domains,
            equations,
            exogenous_distribution,
        };
        model.validate()?;
        Ok(model)
    }
}

/// Cross-document consistency for a pooling run: same endogenous vertex
/// set, same predictor. Returns human-readable problems.
pub fn check_mutual_consistency(docs: &[(String, ModelDocument)]) -> Vec<String> {
    let mut problems = Vec::new();
    if docs.is_empty() {
        return problems;
    }
    let reference: BTreeSet<String> = docs[0]
        .1
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Endogenous)
        .map(|v| v.name.clone())
        .collect();
    for (name, doc) in &docs[1..] {
        let vars: BTreeSet<String> = doc
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Endogenous)
            .map(|v| v.name.clone())
            .collect();
        if vars != reference {
            problems.push(format!("{name}: vertex-set mismatch with {}", docs[0].0));
        }
        if doc.predictor != docs[0].1.predictor {
            problems.push(format!(
                "{name}: predictor {} differs from {}",
                doc.predictor, docs[0].1.predictor
            ));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn alice_doc() -> ModelDocument {
        ModelDocument::from_diagram(&fixtures::alice(), "Y")
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let doc = alice_doc();
        let first = doc.to_canonical_json();
        let parsed: ModelDocument = serde_json::from_str(&first).unwrap();
        assert_eq!(parsed.to_canonical_json(), first);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"schema_version":1,"variables":[],"edges":[],"predictor":"Y","bogus":1}"#;
        assert!(serde_json::from_str::<ModelDocument>(text).is_err());
    }

    #[test]
    fn diagram_round_trips_through_document() {
        let doc = alice_doc();
        assert!(doc.validate().is_empty());
        let d = doc.to_diagram().unwrap();
        assert_eq!(&d, &fixtures::alice());
    }

    #[test]
    fn validation_names_the_problems() {
        let mut doc = alice_doc();
        doc.predictor = "Nope".into();
        doc.edges.push(Edge::new("Y", "Y"));
        let problems = doc.validate();
        assert!(problems.iter().any(|p| p.contains("predictor Nope")));
        assert!(problems.iter().any(|p| p.contains("self-loop")));
    }

    #[test]
    fn mutual_consistency_flags_vertex_mismatch() {
        let a = alice_doc();
        let mut b = ModelDocument::from_diagram(&fixtures::bob(), "Y");
        b.variables.retain(|v| v.name != "Age");
        b.edges.retain(|e| e.source() != "Age");
        let problems = check_mutual_consistency(&[("a.json".into(), a), ("b.json".into(), b)]);
        assert!(problems.iter().any(|p| p.contains("vertex-set mismatch")));
    }

    #[test]
    fn scm_construction_requires_equations() {
        let doc = alice_doc();
        assert!(matches!(doc.to_scm(false), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn synthesized_roots_cover_parentless_variables() {
        let d = CausalDiagram::endogenous_from_parts(["A", "Y"], []);
        let mut doc = ModelDocument::from_diagram(&d, "Y");
        doc.canonicalize();
        let m = doc.to_scm(true).unwrap();
        m.validate().unwrap();
        assert!(m.diagram.contains_vertex("U_A"));
        assert!(m.diagram.contains_vertex("U_Y"));
        assert_eq!(m.exogenous_distribution["U_A"], vec![0.5, 0.5]);
    }

    #[test]
    fn full_document_builds_a_model() {
        let mut doc = ModelDocument {
            schema_version: SCHEMA_VERSION,
            variables: vec![
                VariableDecl {
                    name: "U".into(),
                    kind: VarKind::Exogenous,
                    domain: None,
                },
                VariableDecl {
                    name: "V".into(),
                    kind: VarKind::Endogenous,
                    domain: None,
                },
            ],
            edges: vec![Edge::new("U", "V")],
            predictor: "V".into(),
            equations: Some(
                [(
                    "V".to_string(),
                    EquationDecl {
                        parents: vec!["U".into()],
                        table: vec![
                            TableRow {
                                inputs: vec!["0".into()],
                                output: "0".into(),
                            },
                            TableRow {
                                inputs: vec!["1".into()],
                                output: "1".into(),
                            },
                        ],
                    },
                )]
                .into_iter()
                .collect(),
            ),
            exogenous_distributions: Some(
                [("U".to_string(), vec![0.25, 0.75])].into_iter().collect(),
            ),
        };
        doc.canonicalize();
        let m = doc.to_scm(false).unwrap();
        m.validate().unwrap();
        let t: BTreeSet<String> = ["V".to_string()].into_iter().collect();
        let dist = m.observational_distribution(&t).unwrap();
        assert!((dist[&vec!["1".to_string()]] - 0.75).abs() < 1e-12);
    }
}
