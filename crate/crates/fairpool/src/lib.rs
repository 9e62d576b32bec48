//! Aggregation of expert causal diagrams under counterfactual fairness.
//!
//! Several experts each provide a causal diagram (optionally a full
//! structural causal model) over a shared set of variables. A decision maker
//! designates a predictor vertex and a set of protected attributes, then
//! merges the expert diagrams into a single pooled diagram whose predictor
//! is guaranteed to be counterfactually fair: no input of the predictor is a
//! protected attribute or a descendant of one.
//!
//! Two complementary pipelines are provided:
//!
//! - **removal-pooling**: delete protected attributes and their descendants
//!   in *every* expert model first, then aggregate the surviving edges by
//!   majority-style voting (the prudent route);
//! - **pooling-removal**: aggregate edges first, then delete protected
//!   attributes and their descendants in the pooled diagram (the
//!   compromise route).
//!
//! An exact brute-force fairness checker over finite-domain structural
//! causal models validates the structural guarantee independently.

pub mod aggregation;
pub mod bench;
pub mod diagram;
pub mod document;
pub mod dot;
pub mod fair_pooling;
pub mod fairness;
pub mod fixtures;
pub mod generate;
pub mod opinion;
pub mod scm;

pub use aggregation::{
    layer_edges, pool_edges, AggregationRule, AuditRecord, EdgeJudgmentProfile, EdgeLayering,
    PoolingOptions, TieBreak,
};
pub use diagram::{CausalDiagram, Edge, VarKind, Violation};
pub use fair_pooling::{
    compare_algorithms, pooling_removal, removal_pooling, Algorithm, ComparisonReport,
    PoolingReport,
};
pub use fairness::{
    check_fair_bruteforce, check_fair_lemma1, FairnessPartition, FairnessVerdict, Lemma1Result,
};
pub use opinion::{linear_pool, pool_root_distributions, WeightVector};
pub use scm::{Context, Intervention, ScmModel, StructuralEquation};

/// Absolute tolerance for probability comparisons throughout the crate.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Errors raised by model construction and the pooling pipelines.
///
/// Diagram invariant breaches discovered by [`diagram::validate_diagram`]
/// are reported as [`Violation`] data, not as errors; this type covers
/// misuse of otherwise-valid inputs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown vertex: {0}")]
    UnknownVertex(String),
    #[error("vertex {0} is not {1}")]
    WrongKind(String, &'static str),
    #[error("value {value:?} not in the domain of {variable}")]
    OutOfDomain { variable: String, value: String },
    #[error("invalid diagram: {}", display_violations(.0))]
    InvalidDiagram(Vec<Violation>),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("expert vertex sets do not match: {0}")]
    VertexSetMismatch(String),
    #[error("vote vector has length {got}, expected {expected}")]
    VoteCountMismatch { got: usize, expected: usize },
    #[error("invalid aggregation rule: {0}")]
    InvalidRule(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("distribution domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

fn display_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
