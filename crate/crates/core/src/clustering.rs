use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings that produced a clustering, in the same vocabulary as the CLI
/// config so a saved record can be fed back in.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linkage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ClusterParams {
    pub fn new(algorithm: impl Into<String>) -> Self {
        ClusterParams {
            algorithm: algorithm.into(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub label: usize,
    /// Sorted point ids.
    pub members: Vec<usize>,
    /// Ancilla register value the cluster was read from, when it came straight off the register.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla_label: Option<u64>,
}

/// A partition of point ids `0..N` into nonempty clusters labeled `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    assignments: Vec<usize>,
    clusters: Vec<Cluster>,
    pub params: ClusterParams,
}

impl Clustering {
    /// Builds a clustering from groups of point ids; group order becomes label order.
    pub fn from_groups(groups: Vec<Vec<usize>>, n_points: usize, params: ClusterParams) -> Result<Self> {
        Self::from_tagged_groups(groups.into_iter().map(|g| (g, None)).collect(), n_points, params)
    }

    pub fn from_tagged_groups(
        groups: Vec<(Vec<usize>, Option<u64>)>,
        n_points: usize,
        params: ClusterParams,
    ) -> Result<Self> {
        let mut assignments = vec![usize::MAX; n_points];
        let mut clusters = Vec::with_capacity(groups.len());
        for (label, (mut members, ancilla_label)) in groups.into_iter().enumerate() {
            if members.is_empty() {
                return Err(Error::invalid(format!("cluster {label} is empty")));
            }
            members.sort_unstable();
            for &id in &members {
                let slot = assignments
                    .get_mut(id)
                    .ok_or_else(|| Error::invalid(format!("point id {id} out of range for {n_points} points")))?;
                if *slot != usize::MAX {
                    return Err(Error::invalid(format!("point {id} assigned twice")));
                }
                *slot = label;
            }
            clusters.push(Cluster {
                label,
                members,
                ancilla_label,
            });
        }
        if let Some(id) = assignments.iter().position(|&a| a == usize::MAX) {
            return Err(Error::invalid(format!("point {id} is not assigned to any cluster")));
        }
        Ok(Clustering {
            assignments,
            clusters,
            params,
        })
    }

    /// Builds a clustering from per-point labels, relabeling densely in order of first appearance.
    pub fn from_assignments(labels: &[usize], params: ClusterParams) -> Result<Self> {
        let mut order: Vec<usize> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (id, &l) in labels.iter().enumerate() {
            match order.iter().position(|&o| o == l) {
                Some(g) => groups[g].push(id),
                None => {
                    order.push(l);
                    groups.push(vec![id]);
                }
            }
        }
        Self::from_groups(groups, labels.len(), params)
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.assignments.len()
    }

    pub fn label_of(&self, point: usize) -> usize {
        self.assignments[point]
    }

    /// Member lists in label order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    /// Partition as a set of sorted member lists, independent of labels.
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut g = self.groups();
        g.sort();
        g
    }

    pub fn with_params(mut self, params: ClusterParams) -> Self {
        self.params = params;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_become_dense_labels() {
        let c = Clustering::from_groups(vec![vec![3, 1], vec![0, 2]], 4, ClusterParams::new("t")).unwrap();
        assert_eq!(c.assignments(), &[1, 0, 1, 0]);
        assert_eq!(c.clusters()[0].members, vec![1, 3]);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn partition_violations_are_rejected() {
        let p = ClusterParams::new("t");
        assert!(Clustering::from_groups(vec![vec![0], vec![0, 1]], 2, p.clone()).is_err());
        assert!(Clustering::from_groups(vec![vec![0]], 2, p.clone()).is_err());
        assert!(Clustering::from_groups(vec![vec![0, 1], vec![]], 2, p.clone()).is_err());
        assert!(Clustering::from_groups(vec![vec![0, 5]], 2, p).is_err());
    }

    #[test]
    fn assignments_relabel_by_first_appearance() {
        let c = Clustering::from_assignments(&[7, 7, 2, 9, 2], ClusterParams::new("t")).unwrap();
        assert_eq!(c.assignments(), &[0, 0, 1, 2, 1]);
    }
}
