//! The two end-to-end pipelines that combine descendant removal with edge
//! aggregation so the pooled predictor is counterfactually fair by
//! construction.
//!
//! *Removal-pooling* deletes the protected attributes and their descendants
//! in every expert model before any edge is voted on: a single expert
//! connecting a protected attribute to a variable is enough to ban it
//! everywhere. *Pooling-removal* aggregates first and removes descendants
//! computed in the pooled diagram, so poorly-supported protected edges are
//! voted away before they can taint anything.
//!
//! Both pipelines ignore exogenous vertices: experts may include them, but
//! removal and pooling operate on the endogenous sub-diagrams and the
//! output diagram is endogenous-only.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::aggregation::{layer_edges, pool_edges, AuditRecord, PoolingOptions};
use crate::diagram::{CausalDiagram, Edge, VarKind};
use crate::fairness::{check_fair_lemma1, FairnessPartition, Lemma1Result};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    RemovalPooling,
    PoolingRemoval,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::RemovalPooling => write!(f, "removal-pooling"),
            Algorithm::PoolingRemoval => write!(f, "pooling-removal"),
        }
    }
}

/// Outcome of one pipeline run.
///
/// `fairness_certificate` re-checks the structural condition on the output
/// and must hold for every report either algorithm produces. An empty
/// `predictor_inputs` set is a legitimate outcome (a constant predictor),
/// reported through `warning`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolingReport {
    pub algorithm: Algorithm,
    pub pooled_diagram: CausalDiagram,
    pub predictor_inputs: BTreeSet<String>,
    pub removed_vertices: BTreeSet<String>,
    pub audit_trail: Vec<AuditRecord>,
    pub fairness_certificate: Lemma1Result,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl PoolingReport {
    /// Edges accepted during the pooling stage, before any later removal.
    pub fn pooled_edges_before_removal(&self) -> BTreeSet<Edge> {
        self.audit_trail
            .iter()
            .filter(|r| r.inserted)
            .map(|r| r.edge.clone())
            .collect()
    }
}

fn prepare_experts(
    experts: &[CausalDiagram],
    partition: &FairnessPartition,
) -> Result<Vec<CausalDiagram>> {
    if experts.is_empty() {
        return Err(Error::VertexSetMismatch("no expert models".into()));
    }
    if partition.protected.contains(&partition.predictor) {
        return Err(Error::InvalidPartition(format!(
            "predictor {} cannot be protected",
            partition.predictor
        )));
    }
    let reduced: Vec<CausalDiagram> = experts.iter().map(|d| d.endogenous_subdiagram()).collect();
    let universe = reduced[0].vertex_names();
    for (i, d) in reduced.iter().enumerate() {
        d.ensure_valid()?;
        if d.vertex_names() != universe {
            return Err(Error::VertexSetMismatch(format!(
                "expert {} has a different endogenous vertex set",
                i + 1
            )));
        }
        if !d.contains_vertex(&partition.predictor) {
            return Err(Error::UnknownVertex(partition.predictor.clone()));
        }
    }
    for a in &partition.protected {
        if !universe.contains(a) {
            return Err(Error::UnknownVertex(a.clone()));
        }
    }
    Ok(reduced)
}

fn pool_diagrams(
    diagrams: &[CausalDiagram],
    predictor: &str,
    options: &PoolingOptions,
) -> Result<(BTreeSet<Edge>, Vec<AuditRecord>)> {
    let depth = diagrams
        .iter()
        .map(|d| d.longest_path_len())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let layerings = diagrams
        .iter()
        .map(|d| layer_edges(d, predictor, depth))
        .collect::<Result<Vec<_>>>()?;
    let edge_sets: Vec<BTreeSet<Edge>> = diagrams.iter().map(|d| d.edges().clone()).collect();
    pool_edges(&layerings, &edge_sets, options)
}

fn diagram_from(vertices: &BTreeSet<String>, edges: &BTreeSet<Edge>) -> CausalDiagram {
    let mut d = CausalDiagram::new();
    for v in vertices {
        d.add_vertex(v, VarKind::Endogenous);
    }
    for e in edges {
        d.add_edge(e.clone());
    }
    d
}

fn finish_report(
    algorithm: Algorithm,
    pooled_diagram: CausalDiagram,
    removed_vertices: BTreeSet<String>,
    audit_trail: Vec<AuditRecord>,
    partition: &FairnessPartition,
) -> Result<PoolingReport> {
    let certificate = check_fair_lemma1(&pooled_diagram, partition)?;
    let predictor_inputs = pooled_diagram.parents(&partition.predictor);
    let warning = if predictor_inputs.is_empty() {
        Some("pooled predictor has no inputs; the fair predictor is constant".to_string())
    } else {
        None
    };
    Ok(PoolingReport {
        algorithm,
        pooled_diagram,
        predictor_inputs,
        removed_vertices,
        audit_trail,
        fairness_certificate: certificate,
        warning,
    })
}

/// Removal first, pooling second (the prudent pipeline).
///
/// A vertex is banned when it is a protected attribute or a descendant of
/// one in *any* expert's model; the predictor itself is never banned. Edges
/// touching a banned vertex are deleted from every expert before voting.
pub fn removal_pooling(
    experts: &[CausalDiagram],
    partition: &FairnessPartition,
    options: &PoolingOptions,
) -> Result<PoolingReport> {
    let diagrams = prepare_experts(experts, partition)?;
    let mut banned: BTreeSet<String> = BTreeSet::new();
    for d in &diagrams {
        let mut per_expert = d.descendants(&partition.protected)?;
        per_expert.extend(partition.protected.iter().cloned());
        per_expert.remove(&partition.predictor);
        banned.extend(per_expert);
    }
    let reduced: Vec<CausalDiagram> = diagrams
        .iter()
        .map(|d| d.without_vertices(&banned))
        .collect();
    let (pool, trail) = pool_diagrams(&reduced, &partition.predictor, options)?;
    let surviving = reduced[0].vertex_names();
    let pooled_diagram = diagram_from(&surviving, &pool);
    finish_report(
        Algorithm::RemovalPooling,
        pooled_diagram,
        banned,
        trail,
        partition,
    )
}

/// Pooling first, removal second (the compromise pipeline).
///
/// Experts vote on the full diagrams; protected attributes and their
/// descendants are then computed in the *pooled* diagram and removed from
/// it, again sparing the predictor.
pub fn pooling_removal(
    experts: &[CausalDiagram],
    partition: &FairnessPartition,
    options: &PoolingOptions,
) -> Result<PoolingReport> {
    let diagrams = prepare_experts(experts, partition)?;
    let (pool, trail) = pool_diagrams(&diagrams, &partition.predictor, options)?;
    let pooled_full = diagram_from(&diagrams[0].vertex_names(), &pool);
    let mut banned = pooled_full.descendants(&partition.protected)?;
    banned.extend(partition.protected.iter().cloned());
    banned.remove(&partition.predictor);
    let pooled_diagram = pooled_full.without_vertices(&banned);
    finish_report(
        Algorithm::PoolingRemoval,
        pooled_diagram,
        banned,
        trail,
        partition,
    )
}

/// Both pipelines on identical inputs, side by side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub removal_pooling: PoolingReport,
    pub pooling_removal: PoolingReport,
    pub removal_pooling_empty: bool,
    pub pooling_removal_empty: bool,
}

pub fn compare_algorithms(
    experts: &[CausalDiagram],
    partition: &FairnessPartition,
    options: &PoolingOptions,
) -> Result<ComparisonReport> {
    let rp = removal_pooling(experts, partition, options)?;
    let pr = pooling_removal(experts, partition, options)?;
    Ok(ComparisonReport {
        removal_pooling_empty: rp.pooled_diagram.edges().is_empty(),
        pooling_removal_empty: pr.pooled_diagram.edges().is_empty(),
        removal_pooling: rp,
        pooling_removal: pr,
    })
}
