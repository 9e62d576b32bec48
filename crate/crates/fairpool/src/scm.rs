//! Finite-domain structural causal models: deterministic lookup-table
//! equations over a causal diagram, a product distribution over the
//! exogenous roots, and the evaluation / intervention / enumeration
//! machinery the fairness oracle is built on.
//!
//! All domains are finite and ordered, so every distribution can be
//! computed by exhaustive enumeration of contexts. Probabilities are `f64`
//! compared within [`crate::PROB_TOLERANCE`].

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diagram::{CausalDiagram, VarKind};
use crate::{Error, Result, PROB_TOLERANCE};

/// Domain values are plain strings; a domain is an ordered list of them.
pub type Value = String;

/// A full assignment to the exogenous variables.
pub type Context = BTreeMap<String, Value>;

/// Forced values for a set of endogenous variables, `do(X = x)`.
pub type Intervention = BTreeMap<String, Value>;

/// A lookup-table equation for one endogenous variable.
///
/// `parents` fixes the order in which parent values are looked up; `table`
/// must be total over the Cartesian product of the parent domains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralEquation {
    pub target: String,
    pub parents: Vec<String>,
    pub table: BTreeMap<Vec<Value>, Value>,
}

impl StructuralEquation {
    /// An equation with no parents that always yields `value`.
    pub fn constant(target: impl Into<String>, value: impl Into<Value>) -> Self {
        let mut table = BTreeMap::new();
        table.insert(Vec::new(), value.into());
        StructuralEquation {
            target: target.into(),
            parents: Vec::new(),
            table,
        }
    }

    /// An equation with a single parent that copies its value.
    pub fn copy_of(target: impl Into<String>, parent: impl Into<String>, domain: &[Value]) -> Self {
        let parent = parent.into();
        let table = domain
            .iter()
            .map(|v| (vec![v.clone()], v.clone()))
            .collect();
        StructuralEquation {
            target: target.into(),
            parents: vec![parent],
            table,
        }
    }
}

/// A probabilistic causal model with finite discrete domains.
///
/// Exogenous variables are mutually independent: the joint over contexts is
/// the product of the per-root vectors in `exogenous_distribution`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmModel {
    pub diagram: CausalDiagram,
    pub domains: BTreeMap<String, Vec<Value>>,
    pub equations: BTreeMap<String, StructuralEquation>,
    pub exogenous_distribution: BTreeMap<String, Vec<f64>>,
}

impl ScmModel {
    /// Checks every model invariant; the diagram is validated first.
    pub fn validate(&self) -> Result<()> {
        self.diagram.ensure_valid()?;
        for (name, _) in self.diagram.vertices() {
            let domain = self
                .domains
                .get(name)
                .ok_or_else(|| Error::InvalidModel(format!("no domain for {name}")))?;
            if domain.is_empty() {
                return Err(Error::InvalidModel(format!("empty domain for {name}")));
            }
            let unique: BTreeSet<&Value> = domain.iter().collect();
            if unique.len() != domain.len() {
                return Err(Error::InvalidModel(format!(
                    "duplicate values in the domain of {name}"
                )));
            }
        }
        for root in self.diagram.exogenous() {
            let dist = self.exogenous_distribution.get(&root).ok_or_else(|| {
                Error::InvalidModel(format!("no distribution for exogenous {root}"))
            })?;
            let domain = &self.domains[&root];
            if dist.len() != domain.len() {
                return Err(Error::InvalidModel(format!(
                    "distribution of {root} has {} entries for a domain of {}",
                    dist.len(),
                    domain.len()
                )));
            }
            if dist.iter().any(|p| *p < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "negative probability for {root}"
                )));
            }
            let total: f64 = dist.iter().sum();
            if (total - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "distribution of {root} sums to {total}"
                )));
            }
        }
        for target in self.diagram.endogenous() {
            let eq = self
                .equations
                .get(&target)
                .ok_or_else(|| Error::InvalidModel(format!("no equation for {target}")))?;
            if eq.target != target {
                return Err(Error::InvalidModel(format!(
                    "equation stored under {target} targets {}",
                    eq.target
                )));
            }
            let declared: BTreeSet<String> = eq.parents.iter().cloned().collect();
            if declared.len() != eq.parents.len() {
                return Err(Error::InvalidModel(format!(
                    "duplicate parents in the equation of {target}"
                )));
            }
            if declared != self.diagram.parents(&target) {
                return Err(Error::InvalidModel(format!(
                    "equation parents of {target} do not match its incoming edges"
                )));
            }
            let target_domain = &self.domains[&target];
            let mut expected = 1usize;
            for p in &eq.parents {
                expected *= self.domains[p].len();
            }
            if eq.table.len() != expected {
                return Err(Error::InvalidModel(format!(
                    "equation table of {target} has {} rows, expected {expected}",
                    eq.table.len()
                )));
            }
            for (inputs, output) in &eq.table {
                if inputs.len() != eq.parents.len() {
                    return Err(Error::InvalidModel(format!(
                        "table row of {target} has {} inputs for {} parents",
                        inputs.len(),
                        eq.parents.len()
                    )));
                }
                for (p, v) in eq.parents.iter().zip(inputs) {
                    if !self.domains[p].contains(v) {
                        return Err(Error::OutOfDomain {
                            variable: p.clone(),
                            value: v.clone(),
                        });
                    }
                }
                if !target_domain.contains(output) {
                    return Err(Error::OutOfDomain {
                        variable: target.clone(),
                        value: output.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Propagates a context through the structural equations.
    pub fn evaluate(&self, context: &Context) -> Result<BTreeMap<String, Value>> {
        for root in self.diagram.exogenous() {
            let v = context
                .get(&root)
                .ok_or_else(|| Error::InvalidModel(format!("context misses {root}")))?;
            if !self.domains[&root].contains(v) {
                return Err(Error::OutOfDomain {
                    variable: root,
                    value: v.clone(),
                });
            }
        }
        let mut values: BTreeMap<String, Value> = context.clone();
        for v in self.diagram.topological_order()? {
            if self.diagram.kind(&v) == Some(VarKind::Exogenous) {
                continue;
            }
            let eq = &self.equations[&v];
            let inputs: Vec<Value> = eq.parents.iter().map(|p| values[p].clone()).collect();
            let out = eq.table.get(&inputs).ok_or_else(|| {
                Error::InvalidModel(format!("equation table of {v} misses {inputs:?}"))
            })?;
            values.insert(v, out.clone());
        }
        for root in self.diagram.exogenous() {
            values.remove(&root);
        }
        Ok(values)
    }

    /// The model after `do(assignments)`: each targeted variable gets a
    /// constant equation and loses its incoming edges. `self` is unchanged.
    pub fn intervene(&self, intervention: &Intervention) -> Result<ScmModel> {
        let mut model = self.clone();
        for (target, value) in intervention {
            match self.diagram.kind(target) {
                None => return Err(Error::UnknownVertex(target.clone())),
                Some(VarKind::Exogenous) => {
                    return Err(Error::WrongKind(target.clone(), "endogenous"))
                }
                Some(VarKind::Endogenous) => {}
            }
            if !self.domains[target].contains(value) {
                return Err(Error::OutOfDomain {
                    variable: target.clone(),
                    value: value.clone(),
                });
            }
            model.diagram.remove_incoming_edges(target);
            model
                .equations
                .insert(target.clone(), StructuralEquation::constant(target, value));
        }
        Ok(model)
    }

    /// Every context together with its probability under the product
    /// distribution, in lexicographic order of root names and values.
    pub fn contexts(&self) -> Vec<(Context, f64)> {
        let roots: Vec<String> = self.diagram.exogenous().into_iter().collect();
        let mut out = vec![(Context::new(), 1.0)];
        for root in &roots {
            let domain = &self.domains[root];
            let dist = &self.exogenous_distribution[root];
            let mut next = Vec::with_capacity(out.len() * domain.len());
            for (ctx, p) in &out {
                for (value, pv) in domain.iter().zip(dist) {
                    let mut c = ctx.clone();
                    c.insert(root.clone(), value.clone());
                    next.push((c, p * pv));
                }
            }
            out = next;
        }
        out
    }

    /// Exact joint distribution of the given endogenous variables, keyed by
    /// their values in lexicographic order of the target names.
    pub fn observational_distribution(
        &self,
        targets: &BTreeSet<String>,
    ) -> Result<BTreeMap<Vec<Value>, f64>> {
        for t in targets {
            match self.diagram.kind(t) {
                None => return Err(Error::UnknownVertex(t.clone())),
                Some(VarKind::Exogenous) => return Err(Error::WrongKind(t.clone(), "endogenous")),
                Some(VarKind::Endogenous) => {}
            }
        }
        let mut table: BTreeMap<Vec<Value>, f64> = BTreeMap::new();
        for (ctx, p) in self.contexts() {
            if p == 0.0 {
                continue;
            }
            let values = self.evaluate(&ctx)?;
            let key: Vec<Value> = targets.iter().map(|t| values[t].clone()).collect();
            *table.entry(key).or_insert(0.0) += p;
        }
        Ok(table)
    }
}
