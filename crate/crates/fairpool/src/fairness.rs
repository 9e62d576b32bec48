//! Counterfactual fairness of a predictor, decided two ways.
//!
//! [`check_fair_bruteforce`] implements the definition exactly: for every
//! observable evidence pair of positive probability it conditions the
//! context distribution on the evidence, intervenes on the protected
//! attributes as a block, and compares the induced predictor distributions
//! for every alternative protected value.
//!
//! [`check_fair_lemma1`] is the structural sufficient condition: the
//! predictor is fair whenever none of its inputs is a protected attribute
//! or a descendant of one. The condition is one-sided; a diagram may fail
//! it while the attached model is still fair (for instance through a
//! constant equation).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagram::CausalDiagram;
use crate::scm::{Context, ScmModel, Value};
use crate::{Error, Result, PROB_TOLERANCE};

/// The decision maker's split of the endogenous variables: predictor,
/// protected attributes, and the remaining features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessPartition {
    pub predictor: String,
    pub protected: BTreeSet<String>,
    pub features: BTreeSet<String>,
}

impl FairnessPartition {
    /// Splits `endogenous` into predictor, protected and features.
    pub fn new(
        endogenous: &BTreeSet<String>,
        predictor: impl Into<String>,
        protected: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self> {
        let predictor = predictor.into();
        let protected: BTreeSet<String> = protected.into_iter().map(Into::into).collect();
        if !endogenous.contains(&predictor) {
            return Err(Error::UnknownVertex(predictor));
        }
        if protected.is_empty() {
            return Err(Error::InvalidPartition("no protected attributes".into()));
        }
        if protected.contains(&predictor) {
            return Err(Error::InvalidPartition(format!(
                "predictor {predictor} cannot be protected"
            )));
        }
        for a in &protected {
            if !endogenous.contains(a) {
                return Err(Error::UnknownVertex(a.clone()));
            }
        }
        let features = endogenous
            .iter()
            .filter(|v| **v != predictor && !protected.contains(*v))
            .cloned()
            .collect();
        Ok(FairnessPartition {
            predictor,
            protected,
            features,
        })
    }
}

/// One detected fairness violation: under the evidence `(observed_protected,
/// observed_features)`, forcing the protected attributes to `counterfactual`
/// shifts the probability of `predictor_value` from the first to the second
/// entry of `probability_pair`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub context: Context,
    pub observed_protected: BTreeMap<String, Value>,
    pub observed_features: BTreeMap<String, Value>,
    pub counterfactual: BTreeMap<String, Value>,
    pub predictor_value: Value,
    pub probability_pair: (f64, f64),
}

/// Outcome of the brute-force check. `fair` holds exactly when no witness
/// was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessVerdict {
    pub fair: bool,
    pub witnesses: Vec<Witness>,
}

/// Outcome of the structural check, with the offending predictor inputs
/// when the condition fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Result {
    pub holds: bool,
    pub offending_inputs: BTreeSet<String>,
}

/// Exhaustive counterfactual-fairness check over a finite-domain model.
///
/// For every evidence pair of positive probability and every joint
/// counterfactual value of the protected attributes, the posterior over
/// contexts is computed by enumeration and the factual and counterfactual
/// predictor distributions are compared pointwise within 1e-9.
pub fn check_fair_bruteforce(m: &ScmModel, p: &FairnessPartition) -> Result<FairnessVerdict> {
    m.validate()?;
    check_partition(&m.diagram.endogenous(), p)?;

    // group contexts by observed evidence (protected values, feature values)
    type Evidence = (Vec<Value>, Vec<Value>);
    let mut groups: BTreeMap<Evidence, Vec<(Context, f64)>> = BTreeMap::new();
    for (ctx, weight) in m.contexts() {
        if weight == 0.0 {
            continue;
        }
        let values = m.evaluate(&ctx)?;
        let a: Vec<Value> = p.protected.iter().map(|v| values[v].clone()).collect();
        let x: Vec<Value> = p.features.iter().map(|v| values[v].clone()).collect();
        groups.entry((a, x)).or_default().push((ctx, weight));
    }

    let alternatives = joint_values(m, &p.protected);
    let predictor_domain = m.domains[&p.predictor].clone();
    let mut witnesses = Vec::new();

    for ((a_obs, x_obs), members) in &groups {
        let mass: f64 = members.iter().map(|(_, w)| w).sum();
        if mass <= 0.0 {
            continue;
        }
        let factual: BTreeMap<String, Value> = p
            .protected
            .iter()
            .cloned()
            .zip(a_obs.iter().cloned())
            .collect();
        let factual_dist =
            predictor_distribution(m, &factual, members, mass, &p.predictor, &predictor_domain)?;
        for alt in &alternatives {
            if alt == &factual {
                continue;
            }
            let alt_dist =
                predictor_distribution(m, alt, members, mass, &p.predictor, &predictor_domain)?;
            for (value, (pf, pa)) in predictor_domain
                .iter()
                .zip(factual_dist.iter().zip(&alt_dist))
            {
                if (pf - pa).abs() > PROB_TOLERANCE {
                    witnesses.push(Witness {
                        context: members[0].0.clone(),
                        observed_protected: factual.clone(),
                        observed_features: p
                            .features
                            .iter()
                            .cloned()
                            .zip(x_obs.iter().cloned())
                            .collect(),
                        counterfactual: alt.clone(),
                        predictor_value: value.clone(),
                        probability_pair: (*pf, *pa),
                    });
                }
            }
        }
    }

    Ok(FairnessVerdict {
        fair: witnesses.is_empty(),
        witnesses,
    })
}

/// Distribution of the predictor under `do(protected = forced)`, averaged
/// over the posterior given by `members` (posterior weight = weight / mass).
fn predictor_distribution(
    m: &ScmModel,
    forced: &BTreeMap<String, Value>,
    members: &[(Context, f64)],
    mass: f64,
    predictor: &str,
    domain: &[Value],
) -> Result<Vec<f64>> {
    let intervened = m.intervene(forced)?;
    let mut dist = vec![0.0; domain.len()];
    for (ctx, weight) in members {
        let values = intervened.evaluate(ctx)?;
        let idx = domain
            .iter()
            .position(|v| v == &values[predictor])
            .expect("predictor value outside its domain");
        dist[idx] += weight / mass;
    }
    let total: f64 = dist.iter().sum();
    debug_assert!((total - 1.0).abs() <= PROB_TOLERANCE);
    Ok(dist)
}

/// All joint assignments to `vars`, as maps, in lexicographic order.
fn joint_values(m: &ScmModel, vars: &BTreeSet<String>) -> Vec<BTreeMap<String, Value>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        let mut next = Vec::new();
        for assignment in &out {
            for value in &m.domains[v] {
                let mut a = assignment.clone();
                a.insert(v.clone(), value.clone());
                next.push(a);
            }
        }
        out = next;
    }
    out
}

/// Structural sufficient condition: the predictor's parents are disjoint
/// from the protected attributes and their descendants.
///
/// Protected vertices absent from the diagram (for instance after a removal
/// stage) contribute nothing, so the condition holds vacuously for them.
pub fn check_fair_lemma1(d: &CausalDiagram, p: &FairnessPartition) -> Result<Lemma1Result> {
    d.ensure_valid()?;
    if !d.contains_vertex(&p.predictor) {
        return Err(Error::UnknownVertex(p.predictor.clone()));
    }
    let present: BTreeSet<String> = p
        .protected
        .iter()
        .filter(|a| d.contains_vertex(a))
        .cloned()
        .collect();
    let mut tainted = d.descendants(&present)?;
    tainted.extend(present);
    let offending: BTreeSet<String> = d
        .parents(&p.predictor)
        .intersection(&tainted)
        .cloned()
        .collect();
    Ok(Lemma1Result {
        holds: offending.is_empty(),
        offending_inputs: offending,
    })
}

fn check_partition(endogenous: &BTreeSet<String>, p: &FairnessPartition) -> Result<()> {
    let mut covered: BTreeSet<String> = p.protected.clone();
    covered.extend(p.features.iter().cloned());
    covered.insert(p.predictor.clone());
    if &covered != endogenous
        || p.protected.contains(&p.predictor)
        || !p.protected.is_disjoint(&p.features)
        || p.features.contains(&p.predictor)
    {
        return Err(Error::InvalidPartition(
            "partition does not split the endogenous variables".into(),
        ));
    }
    Ok(())
}
