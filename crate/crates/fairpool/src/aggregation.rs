//! Judgment aggregation over edges: each expert's diagram casts a
//! presence/absence vote per edge, edges are ordered by their incidence
//! distance from the predictor, and an aggregation rule plus an acyclicity
//! guard decide which edges enter the pooled edge set.
//!
//! The traversal is depth-major: all depth-1 edges across experts are
//! considered before any depth-2 edge, each distinct edge exactly once at
//! its minimal depth over the experts. Ties within a depth break
//! alphabetically by (source, target), or by a seeded shuffle for
//! order-sensitivity experiments.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{CausalDiagram, Edge};
use crate::{Error, Result, PROB_TOLERANCE};

/// Per-edge expert votes: `votes[i]` is true when expert `i`'s model
/// contains the edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJudgmentProfile {
    pub edge: Edge,
    pub votes: Vec<bool>,
}

/// How per-edge votes are collapsed into a single judgment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AggregationRule {
    /// Accept when yes-votes strictly exceed N/2.
    StrictMajority,
    /// Accept when yes-votes reach the ceiling of `threshold * N`.
    Quota { threshold: f64 },
    /// Accept only when every expert votes yes.
    Unanimity,
    /// Accept when the summed weight of yes-voters exceeds 1/2.
    WeightedMajority { weights: Vec<f64> },
}

impl AggregationRule {
    /// Checks rule parameters against the expert count.
    pub fn validate(&self, n_experts: usize) -> Result<()> {
        match self {
            AggregationRule::StrictMajority | AggregationRule::Unanimity => Ok(()),
            AggregationRule::Quota { threshold } => {
                if *threshold > 0.0 && *threshold <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidRule(format!(
                        "quota threshold {threshold} outside (0, 1]"
                    )))
                }
            }
            AggregationRule::WeightedMajority { weights } => {
                if weights.len() != n_experts {
                    return Err(Error::InvalidRule(format!(
                        "{} weights for {n_experts} experts",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| *w < 0.0) {
                    return Err(Error::InvalidRule("negative weight".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > PROB_TOLERANCE {
                    return Err(Error::InvalidRule(format!("weights sum to {total}")));
                }
                Ok(())
            }
        }
    }
}

/// Applies `rule` to one vote profile.
pub fn apply_rule(rule: &AggregationRule, profile: &EdgeJudgmentProfile) -> Result<bool> {
    let n = profile.votes.len();
    if n == 0 {
        return Err(Error::VoteCountMismatch {
            got: 0,
            expected: 1,
        });
    }
    rule.validate(n)?;
    let yes = profile.votes.iter().filter(|v| **v).count();
    Ok(match rule {
        AggregationRule::StrictMajority => 2 * yes > n,
        AggregationRule::Quota { threshold } => {
            let needed = (threshold * n as f64).ceil() as usize;
            yes >= needed.max(1)
        }
        AggregationRule::Unanimity => yes == n,
        AggregationRule::WeightedMajority { weights } => {
            let mass: f64 = weights
                .iter()
                .zip(&profile.votes)
                .filter(|(_, v)| **v)
                .map(|(w, _)| w)
                .sum();
            mass > 0.5
        }
    })
}

/// One expert's edges grouped by incidence distance from the predictor.
///
/// `layers[d]` holds the edges first touched at depth `d + 1`;
/// `vertex_sets[d]` is the cumulative vertex frontier after that depth
/// (`vertex_sets[0]` is the predictor alone). Edges never reached by the
/// incidence closure land in `unlayered`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLayering {
    pub predictor: String,
    pub layers: Vec<BTreeSet<Edge>>,
    pub vertex_sets: Vec<BTreeSet<String>>,
    pub unlayered: BTreeSet<Edge>,
}

impl EdgeLayering {
    /// A single layer holding every edge, used when no predictor-first
    /// priority is wanted.
    pub fn flat(predictor: impl Into<String>, edges: BTreeSet<Edge>) -> Self {
        let mut vertices = BTreeSet::new();
        for e in &edges {
            vertices.insert(e.source().to_string());
            vertices.insert(e.target().to_string());
        }
        let predictor = predictor.into();
        EdgeLayering {
            vertex_sets: vec![[predictor.clone()].into_iter().collect(), vertices],
            predictor,
            layers: vec![edges],
            unlayered: BTreeSet::new(),
        }
    }

    /// Depth of `edge` (1-based), or `None` when it is unlayered.
    pub fn depth_of(&self, edge: &Edge) -> Option<usize> {
        self.layers
            .iter()
            .position(|layer| layer.contains(edge))
            .map(|i| i + 1)
    }
}

/// Groups the edges of one diagram by incidence distance from `predictor`.
///
/// Layer `d` collects the not-yet-layered edges with at least one endpoint
/// in the frontier after layer `d - 1`; incidence counts both endpoints, so
/// the closure can walk edges against their direction. Edges still
/// unreached after `max_depth` layers are reported as unlayered.
pub fn layer_edges(
    diagram: &CausalDiagram,
    predictor: &str,
    max_depth: usize,
) -> Result<EdgeLayering> {
    if !diagram.contains_vertex(predictor) {
        return Err(Error::UnknownVertex(predictor.to_string()));
    }
    let mut remaining: BTreeSet<Edge> = diagram.edges().clone();
    let mut frontier: BTreeSet<String> = [predictor.to_string()].into_iter().collect();
    let mut layers = Vec::new();
    let mut vertex_sets = vec![frontier.clone()];
    for _ in 0..max_depth {
        let layer: BTreeSet<Edge> = remaining
            .iter()
            .filter(|e| frontier.contains(e.source()) || frontier.contains(e.target()))
            .cloned()
            .collect();
        for e in &layer {
            remaining.remove(e);
            frontier.insert(e.source().to_string());
            frontier.insert(e.target().to_string());
        }
        layers.push(layer);
        vertex_sets.push(frontier.clone());
    }
    Ok(EdgeLayering {
        predictor: predictor.to_string(),
        layers,
        vertex_sets,
        unlayered: remaining,
    })
}

/// Tie-break order among edges of equal depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TieBreak {
    Alphabetical,
    SeededRandom { seed: u64 },
}

/// Configuration of one pooling traversal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolingOptions {
    pub rule: AggregationRule,
    pub tie_break: TieBreak,
    /// When false, edges accepted by the rule enter the pool even if they
    /// close a cycle. Only the impossibility demonstration turns this off.
    pub acyclicity_guard: bool,
}

impl PoolingOptions {
    pub fn new(rule: AggregationRule, tie_break: TieBreak) -> Self {
        PoolingOptions {
            rule,
            tie_break,
            acyclicity_guard: true,
        }
    }
}

/// One row of the pooling audit trail. `depth` is `None` for edges that no
/// expert's layering reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub edge: Edge,
    pub depth: Option<usize>,
    pub votes: Vec<bool>,
    pub rule_result: bool,
    pub acyclic_ok: bool,
    pub inserted: bool,
}

/// Aggregates the experts' edges into a pooled edge set.
///
/// Every edge appearing in any expert's diagram is evaluated exactly once,
/// at the minimal depth any expert assigns it; votes come from plain
/// presence in each expert's full edge set. An edge is inserted when the
/// rule accepts it and (with the guard on) insertion keeps the pool
/// acyclic.
pub fn pool_edges(
    layerings: &[EdgeLayering],
    expert_edges: &[BTreeSet<Edge>],
    options: &PoolingOptions,
) -> Result<(BTreeSet<Edge>, Vec<AuditRecord>)> {
    if layerings.is_empty() || layerings.len() != expert_edges.len() {
        return Err(Error::VertexSetMismatch(format!(
            "{} layerings for {} edge sets",
            layerings.len(),
            expert_edges.len()
        )));
    }
    let predictor = &layerings[0].predictor;
    if layerings.iter().any(|l| &l.predictor != predictor) {
        return Err(Error::VertexSetMismatch(
            "layerings disagree on the predictor".into(),
        ));
    }
    options.rule.validate(expert_edges.len())?;

    let all_edges: BTreeSet<Edge> = expert_edges.iter().flatten().cloned().collect();
    let min_depth =
        |edge: &Edge| -> Option<usize> { layerings.iter().filter_map(|l| l.depth_of(edge)).min() };
    let max_depth = layerings.iter().map(|l| l.layers.len()).max().unwrap_or(0);

    let mut rng = match options.tie_break {
        TieBreak::Alphabetical => None,
        TieBreak::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut order_batch = |edges: Vec<Edge>| -> Vec<Edge> {
        let mut edges = edges;
        edges.sort();
        if let Some(rng) = rng.as_mut() {
            edges.shuffle(rng);
        }
        edges
    };

    let mut batches: Vec<Vec<Edge>> = Vec::new();
    for depth in 1..=max_depth {
        let batch: Vec<Edge> = all_edges
            .iter()
            .filter(|e| min_depth(e) == Some(depth))
            .cloned()
            .collect();
        batches.push(order_batch(batch));
    }
    let leftover: Vec<Edge> = all_edges
        .iter()
        .filter(|e| min_depth(e).is_none())
        .cloned()
        .collect();
    batches.push(order_batch(leftover));

    let mut pooled: BTreeSet<Edge> = BTreeSet::new();
    let mut pooled_diagram = CausalDiagram::new();
    let mut trail = Vec::new();
    for (batch_idx, batch) in batches.iter().enumerate() {
        let depth = if batch_idx < max_depth {
            Some(batch_idx + 1)
        } else {
            None
        };
        for edge in batch {
            let votes: Vec<bool> = expert_edges.iter().map(|es| es.contains(edge)).collect();
            let profile = EdgeJudgmentProfile {
                edge: edge.clone(),
                votes: votes.clone(),
            };
            let rule_result = apply_rule(&options.rule, &profile)?;
            let mut candidate = pooled_diagram.clone();
            candidate.add_vertex(edge.source(), crate::diagram::VarKind::Endogenous);
            candidate.add_vertex(edge.target(), crate::diagram::VarKind::Endogenous);
            candidate.add_edge(edge.clone());
            let acyclic_ok = candidate.is_acyclic();
            let inserted = rule_result && (acyclic_ok || !options.acyclicity_guard);
            if inserted {
                pooled.insert(edge.clone());
                pooled_diagram = candidate;
            }
            trail.push(AuditRecord {
                edge: edge.clone(),
                depth,
                votes,
                rule_result,
                acyclic_ok,
                inserted,
            });
        }
    }
    Ok((pooled, trail))
}

/// The three-expert instance whose pairwise majorities form a directed
/// cycle, evaluated under several rule configurations. Each configuration
/// names the collective-rationality property it gives up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpossibilityReport {
    pub expert_edges: Vec<BTreeSet<Edge>>,
    pub findings: Vec<ImpossibilityFinding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpossibilityFinding {
    pub configuration: String,
    pub pooled_edges: BTreeSet<Edge>,
    pub violated_property: String,
    pub detail: String,
}

impl ImpossibilityReport {
    pub fn finding(&self, configuration: &str) -> &ImpossibilityFinding {
        self.findings
            .iter()
            .find(|f| f.configuration == configuration)
            .expect("unknown configuration")
    }
}

/// Runs majority pooling on the cyclic-majority instance
/// `{A->B, B->C}`, `{B->C, C->A}`, `{C->A, A->B}`.
///
/// Without the acyclicity guard the majority output is the full cycle;
/// with the guard, which edge is dropped depends on the traversal order,
/// so two tie-break modes yield different pools; copying expert 1 is
/// acyclic and order-free but dictatorial.
pub fn demonstrate_impossibility() -> ImpossibilityReport {
    let ab = Edge::new("A", "B");
    let bc = Edge::new("B", "C");
    let ca = Edge::new("C", "A");
    let expert_edges: Vec<BTreeSet<Edge>> = vec![
        [ab.clone(), bc.clone()].into_iter().collect(),
        [bc.clone(), ca.clone()].into_iter().collect(),
        [ca.clone(), ab.clone()].into_iter().collect(),
    ];
    // flat layerings: every edge competes in the same batch
    let layerings: Vec<EdgeLayering> = expert_edges
        .iter()
        .map(|es| EdgeLayering::flat("A", es.clone()))
        .collect();
    let rule = AggregationRule::StrictMajority;

    let mut findings = Vec::new();

    let mut unguarded = PoolingOptions::new(rule.clone(), TieBreak::Alphabetical);
    unguarded.acyclicity_guard = false;
    let (pool, _) = pool_edges(&layerings, &expert_edges, &unguarded).unwrap();
    findings.push(ImpossibilityFinding {
        configuration: "strict-majority, no acyclicity guard".into(),
        violated_property: "acyclicity".into(),
        detail: format!(
            "majority accepts all of {}, a directed cycle",
            pool.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        pooled_edges: pool,
    });

    let guarded = PoolingOptions::new(rule.clone(), TieBreak::Alphabetical);
    let (alphabetical, _) = pool_edges(&layerings, &expert_edges, &guarded).unwrap();

    // find a seed whose shuffle order changes the surviving pair
    let mut seeded_outcome = None;
    for seed in 0..1024u64 {
        let opts = PoolingOptions::new(rule.clone(), TieBreak::SeededRandom { seed });
        let (pool, _) = pool_edges(&layerings, &expert_edges, &opts).unwrap();
        if pool != alphabetical {
            seeded_outcome = Some((seed, pool));
            break;
        }
    }
    let (seed, seeded) = seeded_outcome.expect("some shuffle must differ on a 3-cycle");

    findings.push(ImpossibilityFinding {
        configuration: "strict-majority, acyclicity guard, alphabetical ties".into(),
        violated_property: "unbiasedness".into(),
        detail: format!(
            "output is acyclic but depends on traversal order: alphabetical keeps {:?}, seed {} keeps {:?}",
            alphabetical.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            seed,
            seeded.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        ),
        pooled_edges: alphabetical.clone(),
    });
    findings.push(ImpossibilityFinding {
        configuration: format!("strict-majority, acyclicity guard, seeded ties (seed {seed})"),
        violated_property: "unbiasedness".into(),
        detail: "same inputs as the alphabetical run, different pooled edge set".into(),
        pooled_edges: seeded,
    });

    findings.push(ImpossibilityFinding {
        configuration: "copy expert 1".into(),
        violated_property: "non-dictatorship".into(),
        detail: "acyclic and order-free, but the pool is expert 1's edge set verbatim".into(),
        pooled_edges: expert_edges[0].clone(),
    });

    ImpossibilityReport {
        expert_edges,
        findings,
    }
}
