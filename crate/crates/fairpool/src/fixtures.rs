//! Built-in toy scenario used across tests and the documentation: two
//! professors, Alice and Bob, each sketch a causal diagram for PhD
//! admissions over the variables Age, Cvr (cover letter), Dpt
//! (department), Gnd (gender), Job (work experience), Mrk (final mark)
//! and the predictor Y.

use crate::diagram::{CausalDiagram, Edge, VarKind};
use crate::scm::{ScmModel, StructuralEquation, Value};

pub const ADMISSION_VARS: [&str; 7] = ["Age", "Cvr", "Dpt", "Gnd", "Job", "Mrk", "Y"];

/// Alice's model: gender influences both job history and department choice,
/// and age is not an input of the predictor.
pub fn alice() -> CausalDiagram {
    CausalDiagram::endogenous_from_parts(
        ADMISSION_VARS,
        [
            Edge::new("Gnd", "Job"),
            Edge::new("Gnd", "Dpt"),
            Edge::new("Dpt", "Mrk"),
            Edge::new("Age", "Job"),
            Edge::new("Cvr", "Y"),
            Edge::new("Job", "Y"),
            Edge::new("Dpt", "Y"),
            Edge::new("Mrk", "Y"),
        ],
    )
}

/// Bob's model: no gender-to-department edge, but age feeds the predictor.
pub fn bob() -> CausalDiagram {
    CausalDiagram::endogenous_from_parts(
        ADMISSION_VARS,
        [
            Edge::new("Gnd", "Job"),
            Edge::new("Dpt", "Mrk"),
            Edge::new("Age", "Job"),
            Edge::new("Cvr", "Y"),
            Edge::new("Job", "Y"),
            Edge::new("Dpt", "Y"),
            Edge::new("Mrk", "Y"),
            Edge::new("Age", "Y"),
        ],
    )
}

fn binary() -> Vec<Value> {
    vec!["0".into(), "1".into()]
}

/// U -> A -> W -> Yp where W is constant. The diagram fails the structural
/// fairness condition (Yp reads W, a descendant of A), yet the model is
/// counterfactually fair: interventions on A never reach the predictor.
pub fn constant_through_descendant() -> ScmModel {
    let mut diagram = CausalDiagram::new();
    diagram.add_vertex("U", VarKind::Exogenous);
    for v in ["A", "W", "Yp"] {
        diagram.add_vertex(v, VarKind::Endogenous);
    }
    diagram.add_edge(Edge::new("U", "A"));
    diagram.add_edge(Edge::new("A", "W"));
    diagram.add_edge(Edge::new("W", "Yp"));
    ScmModel {
        diagram,
        domains: ["U", "A", "W", "Yp"]
            .into_iter()
            .map(|n| (n.to_string(), binary()))
            .collect(),
        equations: [
            (
                "A".to_string(),
                StructuralEquation::copy_of("A", "U", &binary()),
            ),
            (
                "W".to_string(),
                StructuralEquation {
                    target: "W".into(),
                    parents: vec!["A".into()],
                    table: [("0", "0"), ("1", "0")]
                        .into_iter()
                        .map(|(i, o)| (vec![i.to_string()], o.to_string()))
                        .collect(),
                },
            ),
            (
                "Yp".to_string(),
                StructuralEquation::copy_of("Yp", "W", &binary()),
            ),
        ]
        .into_iter()
        .collect(),
        exogenous_distribution: [("U".to_string(), vec![0.5, 0.5])].into_iter().collect(),
    }
}
