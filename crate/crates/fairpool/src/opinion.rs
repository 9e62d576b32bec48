//! Weighted linear pooling of probability vectors: the unique pooling rule
//! that is event-wise independent and unanimity-preserving. Applied per
//! exogenous root to merge the experts' root distributions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scm::ScmModel;
use crate::{Error, Result, PROB_TOLERANCE};

/// Non-negative expert weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidWeights("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("no experts".into()));
        }
        Ok(WeightVector(vec![1.0 / n as f64; n]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `output[k] = sum_i w[i] * dists[i][k]` over a common ordered domain.
pub fn linear_pool(dists: &[Vec<f64>], weights: &WeightVector) -> Result<Vec<f64>> {
    if dists.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} distributions",
            weights.len(),
            dists.len()
        )));
    }
    let width = dists[0].len();
    for d in dists {
        if d.len() != width {
            return Err(Error::DomainMismatch(format!(
                "distribution lengths {} and {width} differ",
                d.len()
            )));
        }
        let total: f64 = d.iter().sum();
        if d.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::DomainMismatch(format!(
                "input is not a probability vector (sums to {total})"
            )));
        }
    }
    let mut out = vec![0.0; width];
    for (w, d) in weights.as_slice().iter().zip(dists) {
        for (o, p) in out.iter_mut().zip(d) {
            *o += w * p;
        }
    }
    Ok(out)
}

/// Pools each exogenous root's distribution independently across experts.
/// All experts must declare identical exogenous variables and domains.
pub fn pool_root_distributions(
    experts: &[ScmModel],
    weights: &WeightVector,
) -> Result<BTreeMap<String, Vec<f64>>> {
    if experts.is_empty() {
        return Err(Error::DomainMismatch("no expert models".into()));
    }
    let roots = experts[0].diagram.exogenous();
    for (i, m) in experts.iter().enumerate() {
        if m.diagram.exogenous() != roots {
            return Err(Error::DomainMismatch(format!(
                "expert {} declares different exogenous variables",
                i + 1
            )));
        }
        for r in &roots {
            if m.domains.get(r) != experts[0].domains.get(r) {
                return Err(Error::DomainMismatch(format!(
                    "expert {} declares a different domain for {r}",
                    i + 1
                )));
            }
        }
    }
    let mut out = BTreeMap::new();
    for r in &roots {
        let dists: Vec<Vec<f64>> = experts
            .iter()
            .map(|m| m.exogenous_distribution[r].clone())
            .collect();
        out.insert(r.clone(), linear_pool(&dists, weights)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn equal_weights_average() {
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let out = linear_pool(&[vec![0.2, 0.8], vec![0.6, 0.4]], &w).unwrap();
        assert!((out[0] - 0.4).abs() < 1e-12);
        assert!((out[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn identical_opinions_are_preserved() {
        let w = WeightVector::new(vec![0.3, 0.3, 0.4]).unwrap();
        let p = vec![0.1, 0.2, 0.7];
        let out = linear_pool(&[p.clone(), p.clone(), p.clone()], &w).unwrap();
        for (o, e) in out.iter().zip(&p) {
            assert!((o - e).abs() < PROB_TOLERANCE);
        }
    }

    #[test]
    fn dictator_weight_copies_the_first_expert() {
        let w = WeightVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let out = linear_pool(&[vec![0.2, 0.8], vec![0.9, 0.1], vec![0.5, 0.5]], &w).unwrap();
        assert_eq!(out, vec![0.2, 0.8]);
    }

    #[test]
    fn mismatched_widths_are_rejected() {
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            linear_pool(&[vec![0.5, 0.5], vec![1.0]], &w).unwrap_err(),
            Error::DomainMismatch(_)
        ));
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.5, 1.5]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn root_pooling_averages_per_root() {
        let mut a = fixtures::constant_through_descendant();
        let mut b = a.clone();
        a.exogenous_distribution.insert("U".into(), vec![0.7, 0.3]);
        b.exogenous_distribution.insert("U".into(), vec![0.5, 0.5]);
        let w = WeightVector::uniform(2).unwrap();
        let pooled = pool_root_distributions(&[a, b], &w).unwrap();
        assert!((pooled["U"][0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn single_expert_root_pooling_is_identity() {
        let m = fixtures::constant_through_descendant();
        let w = WeightVector::uniform(1).unwrap();
        let pooled = pool_root_distributions(std::slice::from_ref(&m), &w).unwrap();
        assert_eq!(pooled["U"], m.exogenous_distribution["U"]);
    }

    #[test]
    fn three_experts_match_hand_arithmetic() {
        // 0.2*0.1 + 0.3*0.5 + 0.5*0.9 = 0.62
        let w = WeightVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let out = linear_pool(&[vec![0.1, 0.9], vec![0.5, 0.5], vec![0.9, 0.1]], &w).unwrap();
        assert!((out[0] - 0.62).abs() < 1e-12);
        assert!((out[1] - 0.38).abs() < 1e-12);
    }
}
