use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryClass {
    Positive,
    Negative,
}

impl BinaryClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BinaryClass::Positive => "positive",
            BinaryClass::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total().max(1) as f64
    }
}

/// Maps every cluster to its majority class (ties go to positive) and scores the result.
pub fn score_binary(clustering: &Clustering, labels: &[BinaryClass]) -> Result<(ConfusionCounts, f64)> {
    if labels.len() != clustering.n_points() {
        return Err(Error::invalid(format!(
            "{} labels for {} points",
            labels.len(),
            clustering.n_points()
        )));
    }
    if clustering.is_empty() {
        return Err(Error::invalid("cannot score an empty clustering"));
    }
    let mut counts = ConfusionCounts::default();
    for cluster in clustering.clusters() {
        let pos = cluster
            .members
            .iter()
            .filter(|&&i| labels[i] == BinaryClass::Positive)
            .count();
        let neg = cluster.members.len() - pos;
        if pos >= neg {
            counts.tp += pos;
            counts.fp += neg;
        } else {
            counts.tn += neg;
            counts.fn_ += pos;
        }
    }
    Ok((counts, counts.accuracy()))
}

/// Size-weighted mean over clusters of the fraction belonging to the cluster's majority ring.
pub fn ring_purity(clustering: &Clustering, ring_labels: &[usize]) -> Result<f64> {
    if ring_labels.len() != clustering.n_points() {
        return Err(Error::invalid(format!(
            "{} ring labels for {} points",
            ring_labels.len(),
            clustering.n_points()
        )));
    }
    if ring_labels.is_empty() {
        return Ok(1.0);
    }
    let majority_total: usize = clustering
        .clusters()
        .iter()
        .map(|c| {
            let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
            for &i in &c.members {
                *tally.entry(ring_labels[i]).or_default() += 1;
            }
            tally.values().copied().max().unwrap_or(0)
        })
        .sum();
    Ok(majority_total as f64 / ring_labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ClusterParams;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use BinaryClass::{Negative as N, Positive as P};

    fn clustering(labels: &[usize]) -> Clustering {
        Clustering::from_assignments(labels, ClusterParams::new("test")).unwrap()
    }

    #[test]
    fn perfect_split_scores_one() {
        let (c, acc) = score_binary(&clustering(&[0, 0, 1, 1]), &[P, P, N, N]).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(c, ConfusionCounts { tp: 2, tn: 2, fp: 0, fn_: 0 });
    }

    #[test]
    fn single_cluster_scores_the_majority_share() {
        let labels = [P, P, P, N, N, P, N, P, P, N];
        let (c, acc) = score_binary(&clustering(&[0; 10]), &labels).unwrap();
        assert_abs_diff_eq!(acc, 0.6);
        assert_eq!(c.total(), 10);
        assert_eq!(c.fp, 4);
    }

    #[test]
    fn ties_map_to_positive() {
        let (c, _) = score_binary(&clustering(&[0, 0]), &[P, N]).unwrap();
        assert_eq!((c.tp, c.fp), (1, 1));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(score_binary(&clustering(&[0, 1]), &[P]).is_err());
        assert!(ring_purity(&clustering(&[0, 1]), &[0]).is_err());
    }

    #[test]
    fn purity_examples() {
        assert_eq!(ring_purity(&clustering(&[0, 0, 1, 1]), &[5, 5, 7, 7]).unwrap(), 1.0);
        assert_eq!(ring_purity(&clustering(&[0, 1, 2, 3]), &[0, 1, 0, 1]).unwrap(), 1.0);
        assert_eq!(ring_purity(&clustering(&[0, 0, 1, 1]), &[0, 1, 0, 1]).unwrap(), 0.5);
    }

    /// Expected purity of a uniformly random equal split of two equal rings,
    /// from the hypergeometric law of how many ring-0 points land in cluster 0.
    fn expected_random_purity(half: usize) -> f64 {
        let choose = |n: usize, k: usize| -> f64 { (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product() };
        let total = choose(2 * half, half);
        (0..=half)
            .map(|x| {
                let p = choose(half, x) * choose(half, half - x) / total;
                p * 2.0 * x.max(half - x) as f64 / (2 * half) as f64
            })
            .sum()
    }

    #[test]
    fn random_equal_split_purity_matches_enumeration() {
        let half = 4;
        let rings: Vec<usize> = (0..2 * half).map(|i| i / half).collect();
        let mut sum = 0.0;
        let mut count = 0;
        for mask in 0u32..(1 << (2 * half)) {
            if mask.count_ones() as usize != half {
                continue;
            }
            let labels: Vec<usize> = (0..2 * half).map(|i| (mask >> i & 1) as usize).collect();
            sum += ring_purity(&clustering(&labels), &rings).unwrap();
            count += 1;
        }
        assert_eq!(count, 70);
        assert_abs_diff_eq!(sum / count as f64, expected_random_purity(half), epsilon = 1e-12);
        assert_abs_diff_eq!(expected_random_purity(half), 44.0 / 70.0, epsilon = 1e-12);
        // tends to one half as the rings grow
        assert!((expected_random_purity(200) - 0.5).abs() < 0.03);
    }

    proptest! {
        #[test]
        fn accuracy_ignores_cluster_naming(
            assign in prop::collection::vec(0usize..4, 1..40),
            classes in prop::collection::vec(any::<bool>(), 40),
            perm_seed in any::<u64>(),
        ) {
            let labels: Vec<BinaryClass> = classes[..assign.len()].iter().map(|&b| if b { P } else { N }).collect();
            let mut perm = [0usize, 1, 2, 3];
            let mut s = perm_seed;
            for i in (1..4).rev() {
                perm.swap(i, (s % (i as u64 + 1)) as usize);
                s /= 7;
            }
            let renamed: Vec<usize> = assign.iter().map(|&a| perm[a]).collect();
            let a = score_binary(&clustering(&assign), &labels).unwrap().1;
            let b = score_binary(&clustering(&renamed), &labels).unwrap().1;
            prop_assert_eq!(a, b);
        }
    }
}
