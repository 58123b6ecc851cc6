//! Quantum hierarchical clustering: distance codes are superposed on an
//! `n`-qubit register, the top `m` bits are copied onto `m` ancillae, and the
//! ancilla readout names each point's cluster. Split/merge refinement then
//! reaches an exact cluster count when one is requested.

use std::collections::BTreeMap;

use crate::clustering::{ClusterParams, Clustering};
use crate::encoding::{ancilla_width, DistanceEncoding, EncodingConfig, Point};
use crate::error::{Error, Result};
use crate::quantum::{
    apply_label_unitary, enumerate_outcomes, prepare_superposition, sample_outcomes, OutcomeDistribution,
    RegisterLayout, StateVector, Weighting,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetK {
    Exact(usize),
    /// Keep every populated ancilla label as its own cluster.
    #[default]
    AllNonempty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AncillaSpec {
    Explicit(u32),
    /// Derive `m` from the widest cluster allowed, in unscaled distance units.
    MinClusterWidth(f64),
}

/// Finite-shot readout instead of exact enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shots {
    pub shots: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QhcaConfig {
    pub target_k: TargetK,
    pub ancillae: AncillaSpec,
    pub encoding: EncodingConfig,
    pub weighting: Weighting,
    pub shots: Option<Shots>,
}

impl Default for QhcaConfig {
    fn default() -> Self {
        QhcaConfig {
            target_k: TargetK::AllNonempty,
            ancillae: AncillaSpec::Explicit(2),
            encoding: EncodingConfig::default(),
            weighting: Weighting::UniformDistinct,
            shots: None,
        }
    }
}

/// Intermediate products of one run, kept for reporting and inspection.
#[derive(Debug, Clone)]
pub struct QhcaRun {
    pub encoding: DistanceEncoding,
    pub layout: RegisterLayout,
    pub state: StateVector,
    pub outcomes: OutcomeDistribution,
    pub clustering: Clustering,
}

pub fn qhca_run(points: &[Point], config: &QhcaConfig) -> Result<Clustering> {
    qhca_run_detailed(points, config).map(|r| r.clustering)
}

pub fn qhca_run_detailed(points: &[Point], config: &QhcaConfig) -> Result<QhcaRun> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: points.len(),
        });
    }
    let encoding = config.encoding.encode(points)?;
    let distinct = encoding.distinct_codes().len();
    if let TargetK::Exact(k) = config.target_k {
        if k == 0 {
            return Err(Error::invalid("target k must be at least 1"));
        }
        if k > distinct {
            return Err(Error::UnreachableTarget {
                target: k,
                available: distinct,
            });
        }
    }

    let requested = match config.ancillae {
        AncillaSpec::Explicit(0) => return Err(Error::invalid("at least one ancilla is required")),
        AncillaSpec::Explicit(m) => m,
        AncillaSpec::MinClusterWidth(_) if encoding.d_max_raw == 0.0 => 1,
        AncillaSpec::MinClusterWidth(w) => ancilla_width(encoding.d_max_raw, w.min(encoding.d_max_raw))?,
    };
    // more label bits than distance bits only splits codes that are already distinct
    let m = requested.min(encoding.n);
    let layout = RegisterLayout::with_cap(encoding.n, m, config.encoding.max_qubits)?;

    let state = prepare_superposition(&encoding.codes, layout, config.weighting)?;
    let state = apply_label_unitary(&state)?;
    let outcomes = match config.shots {
        None => enumerate_outcomes(&state),
        Some(s) => OutcomeDistribution::from_samples(&sample_outcomes(&state, s.shots, s.seed)?),
    };

    let mut clustering = extract_clusters(&outcomes, &encoding)?;
    if let TargetK::Exact(k) = config.target_k {
        clustering = refine_to_k(&clustering, &encoding, k)?;
    }

    let params = ClusterParams {
        algorithm: "qhca".into(),
        origin: Some(config.encoding.origin.to_string()),
        origin_index: encoding.origin_index,
        scale: Some(encoding.scale),
        n: Some(layout.n()),
        m: Some(layout.m()),
        k: match config.target_k {
            TargetK::Exact(k) => Some(k),
            TargetK::AllNonempty => None,
        },
        weighting: Some(config.weighting.as_str().into()),
        shots: config.shots.map(|s| s.shots),
        seed: config.shots.map(|s| s.seed),
        ..Default::default()
    };
    Ok(QhcaRun {
        clustering: clustering.with_params(params),
        encoding,
        layout,
        state,
        outcomes,
    })
}

/// Reads each point's cluster off the ancilla value paired with its code.
pub fn extract_clusters(outcomes: &OutcomeDistribution, encoding: &DistanceEncoding) -> Result<Clustering> {
    let mut label_of_code: BTreeMap<u64, u64> = BTreeMap::new();
    for code in encoding.distinct_codes() {
        let mut labels = outcomes.labels_for(code).filter(|&(_, p)| p > 0.0);
        let (label, _) = labels.next().ok_or(Error::MissingOutcome(code))?;
        if labels.next().is_some() {
            return Err(Error::invalid(format!(
                "code {code} is paired with several ancilla values; apply the labeling unitary first"
            )));
        }
        label_of_code.insert(code, label);
    }
    let mut buckets: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (id, code) in encoding.codes.iter().enumerate() {
        buckets.entry(label_of_code[code]).or_default().push(id);
    }
    Clustering::from_tagged_groups(
        buckets.into_iter().map(|(label, ids)| (ids, Some(label))).collect(),
        encoding.len(),
        ClusterParams::new("qhca"),
    )
}

#[derive(Debug, Clone)]
struct CodeGroup {
    /// Sorted distinct codes.
    codes: Vec<u64>,
    members: Vec<usize>,
    ancilla_label: Option<u64>,
}

impl CodeGroup {
    fn lo(&self) -> u64 {
        self.codes[0]
    }

    fn hi(&self) -> u64 {
        *self.codes.last().unwrap()
    }
}

/// Merges or splits clusters along the code axis until exactly `target_k` remain.
///
/// Merging joins the adjacent pair whose facing codes are closest. Splitting
/// cuts the cluster with the widest code range at its widest internal gap.
/// Ties go to the lowest position.
pub fn refine_to_k(clustering: &Clustering, encoding: &DistanceEncoding, target_k: usize) -> Result<Clustering> {
    if target_k == 0 {
        return Err(Error::invalid("target k must be at least 1"));
    }
    if clustering.n_points() != encoding.len() {
        return Err(Error::invalid(format!(
            "clustering covers {} points, encoding {}",
            clustering.n_points(),
            encoding.len()
        )));
    }
    let available = encoding.distinct_codes().len();
    if target_k > available {
        return Err(Error::UnreachableTarget {
            target: target_k,
            available,
        });
    }

    let mut groups: Vec<CodeGroup> = clustering
        .clusters()
        .iter()
        .map(|c| {
            let mut codes: Vec<u64> = c.members.iter().map(|&i| encoding.codes[i]).collect();
            codes.sort_unstable();
            codes.dedup();
            CodeGroup {
                codes,
                members: c.members.clone(),
                ancilla_label: c.ancilla_label,
            }
        })
        .collect();
    groups.sort_by_key(|g| (g.lo(), g.hi()));

    while groups.len() > target_k {
        let at = (0..groups.len() - 1)
            .min_by_key(|&i| groups[i + 1].lo().saturating_sub(groups[i].hi()))
            .unwrap();
        let right = groups.remove(at + 1);
        let left = &mut groups[at];
        left.codes.extend(right.codes);
        left.codes.sort_unstable();
        left.codes.dedup();
        left.members.extend(right.members);
        left.ancilla_label = None;
    }

    while groups.len() < target_k {
        // max_by_key keeps the last maximum, so scan in reverse for the lowest position
        let at = (0..groups.len())
            .rev()
            .max_by_key(|&i| groups[i].hi() - groups[i].lo())
            .unwrap();
        let g = &groups[at];
        if g.codes.len() < 2 {
            return Err(Error::UnreachableTarget {
                target: target_k,
                available,
            });
        }
        let cut = (0..g.codes.len() - 1)
            .rev()
            .max_by_key(|&i| g.codes[i + 1] - g.codes[i])
            .unwrap();
        let boundary = g.codes[cut];
        let (lo_members, hi_members): (Vec<usize>, Vec<usize>) =
            g.members.iter().partition(|&&id| encoding.codes[id] <= boundary);
        let lower = CodeGroup {
            codes: g.codes[..=cut].to_vec(),
            members: lo_members,
            ancilla_label: None,
        };
        let upper = CodeGroup {
            codes: g.codes[cut + 1..].to_vec(),
            members: hi_members,
            ancilla_label: None,
        };
        groups[at] = lower;
        groups.insert(at + 1, upper);
    }

    Clustering::from_tagged_groups(
        groups.into_iter().map(|g| (g.members, g.ancilla_label)).collect(),
        encoding.len(),
        clustering.params.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{bucket_of, Encoder, Metric, OriginPolicy, ScalePolicy};
    use proptest::prelude::*;

    fn on_line(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::new(vec![x]).unwrap()).collect()
    }

    fn explicit(m: u32, target_k: TargetK) -> QhcaConfig {
        QhcaConfig {
            target_k,
            ancillae: AncillaSpec::Explicit(m),
            encoding: EncodingConfig {
                origin: OriginPolicy::Fixed(vec![0.0]),
                scale: ScalePolicy::Explicit(1.0),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn encoding_of(codes: &[u64]) -> DistanceEncoding {
        let pts = on_line(&codes.iter().map(|&c| c as f64).collect::<Vec<_>>());
        Encoder::new(Metric::EUCLIDEAN, 1.0)
            .unwrap()
            .encode_from_point(&pts, &Point::new(vec![0.0]).unwrap())
            .unwrap()
    }

    fn singletons_by_code(enc: &DistanceEncoding, buckets: &[&[u64]]) -> Clustering {
        let groups = buckets
            .iter()
            .map(|b| (0..enc.len()).filter(|&i| b.contains(&enc.codes[i])).collect())
            .collect();
        Clustering::from_groups(groups, enc.len(), ClusterParams::new("test")).unwrap()
    }

    #[test]
    fn single_ancilla_splits_by_the_top_bit() {
        // distances {1, 2, 9, 10} on a 4-qubit register, origin outside the data
        let pts = on_line(&[1.0, 2.0, 9.0, 10.0]);
        let c = qhca_run(&pts, &explicit(1, TargetK::AllNonempty)).unwrap();
        assert_eq!(c.params.n, Some(4));
        assert_eq!(c.canonical(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(c.clusters()[1].ancilla_label, Some(1));
    }

    #[test]
    fn coincident_points_form_one_cluster() {
        let pts = on_line(&[3.0; 5]);
        for m in 1..4 {
            let c = qhca_run(&pts, &QhcaConfig { ancillae: AncillaSpec::Explicit(m), ..Default::default() }).unwrap();
            assert_eq!(c.len(), 1);
        }
    }

    #[test]
    fn run_errors() {
        let pts = on_line(&[1.0, 2.0]);
        assert!(matches!(
            qhca_run(&pts, &explicit(1, TargetK::Exact(3))),
            Err(Error::UnreachableTarget { target: 3, available: 2 })
        ));
        assert!(qhca_run(&pts[..1], &explicit(1, TargetK::AllNonempty)).is_err());
        assert!(qhca_run(&pts, &explicit(0, TargetK::AllNonempty)).is_err());
    }

    #[test]
    fn ancillae_from_cluster_width() {
        let pts = on_line(&[0.0, 3.0, 7.0, 12.0, 15.0]);
        let cfg = QhcaConfig {
            ancillae: AncillaSpec::MinClusterWidth(4.0),
            ..explicit(1, TargetK::AllNonempty)
        };
        let run = qhca_run_detailed(&pts, &cfg).unwrap();
        assert_eq!(run.layout.m(), 2);
        // buckets of width 4: {0, 3}, {7}, {12, 15}
        assert_eq!(run.clustering.canonical(), vec![vec![0, 1], vec![2], vec![3, 4]]);
    }

    #[test]
    fn extract_example() {
        let enc = encoding_of(&[3, 12]);
        let outcomes: OutcomeDistribution = [((3, 0), 0.5), ((12, 3), 0.5)].into_iter().collect();
        let c = extract_clusters(&outcomes, &enc).unwrap();
        assert_eq!(c.clusters()[0].members, vec![0]);
        assert_eq!(c.clusters()[0].ancilla_label, Some(0));
        assert_eq!(c.clusters()[1].members, vec![1]);
        assert_eq!(c.clusters()[1].ancilla_label, Some(3));

        let dup = encoding_of(&[3, 3, 12]);
        let c = extract_clusters(&outcomes, &dup).unwrap();
        assert_eq!(c.label_of(0), c.label_of(1));

        let missing = encoding_of(&[3, 7]);
        assert!(matches!(extract_clusters(&outcomes, &missing), Err(Error::MissingOutcome(7))));
    }

    #[test]
    fn refine_identity_and_errors() {
        let enc = encoding_of(&[1, 2, 9, 10]);
        let c = singletons_by_code(&enc, &[&[1, 2], &[9, 10]]);
        assert_eq!(refine_to_k(&c, &enc, 2).unwrap().canonical(), c.canonical());
        assert!(refine_to_k(&c, &enc, 5).is_err());
        assert!(refine_to_k(&c, &enc, 0).is_err());
    }

    #[test]
    fn refine_merges_closest_adjacent_buckets() {
        // four top-2-bit buckets whose merge to two matches the top-1-bit split
        let codes = [1, 3, 4, 5, 10, 11, 12, 14];
        let enc = encoding_of(&codes);
        let four = singletons_by_code(&enc, &[&[1, 3], &[4, 5], &[10, 11], &[12, 14]]);
        let merged = refine_to_k(&four, &enc, 2).unwrap();
        let halves: Vec<Vec<usize>> = {
            let mut g = vec![vec![], vec![]];
            for (i, &c) in codes.iter().enumerate() {
                g[bucket_of(c, 4, 1) as usize].push(i);
            }
            g
        };
        assert_eq!(merged.canonical(), halves);
    }

    #[test]
    fn refine_splits_at_widest_gap() {
        let enc = encoding_of(&[1, 2, 14, 15]);
        let one = singletons_by_code(&enc, &[&[1, 2, 14, 15]]);
        let two = refine_to_k(&one, &enc, 2).unwrap();
        assert_eq!(two.canonical(), vec![vec![0, 1], vec![2, 3]]);
        let four = refine_to_k(&one, &enc, 4).unwrap();
        assert_eq!(four.len(), 4);
        // boundaries stay in code order
        let los: Vec<u64> = four.clusters().iter().map(|c| enc.codes[c.members[0]]).collect();
        assert_eq!(los, vec![1, 2, 14, 15]);
    }

    #[test]
    fn shots_mode_reproduces_exact_partition() {
        let pts = on_line(&[1.0, 2.0, 9.0, 10.0, 13.0]);
        let exact = qhca_run(&pts, &explicit(2, TargetK::AllNonempty)).unwrap();
        let cfg = QhcaConfig {
            shots: Some(Shots { shots: 2000, seed: 1 }),
            ..explicit(2, TargetK::AllNonempty)
        };
        let sampled = qhca_run(&pts, &cfg).unwrap();
        assert_eq!(sampled.canonical(), exact.canonical());
        assert_eq!(sampled.params.shots, Some(2000));
        let starved = QhcaConfig {
            shots: Some(Shots { shots: 1, seed: 1 }),
            ..explicit(2, TargetK::AllNonempty)
        };
        assert!(matches!(qhca_run(&pts, &starved), Err(Error::MissingOutcome(_))));
    }

    /// Classical binning of codes by their top `m` bits.
    fn binning_oracle(codes: &[u64], n: u32, m: u32) -> Vec<Vec<usize>> {
        let mut buckets: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, &c) in codes.iter().enumerate() {
            buckets.entry(c / (1u64 << (n - m))).or_default().push(i);
        }
        let mut g: Vec<Vec<usize>> = buckets.into_values().collect();
        g.sort();
        g
    }

    proptest! {
        #[test]
        fn pipeline_equals_classical_binning(
            xs in prop::collection::vec(0f64..250.0, 2..64),
            m in 1u32..8,
        ) {
            let pts = on_line(&xs);
            let run = qhca_run_detailed(&pts, &explicit(m, TargetK::AllNonempty)).unwrap();
            let n = run.encoding.n;
            prop_assert_eq!(run.clustering.canonical(), binning_oracle(&run.encoding.codes, n, m.min(n)));
            // same-bucket codes differ by less than the bucket width
            let width = 1u64 << (n - m.min(n));
            for c in run.clustering.clusters() {
                let codes: Vec<u64> = c.members.iter().map(|&i| run.encoding.codes[i]).collect();
                let spread = codes.iter().max().unwrap() - codes.iter().min().unwrap();
                prop_assert!(spread < width);
            }
        }

        #[test]
        fn refine_reaches_any_feasible_k(
            xs in prop::collection::vec(0f64..200.0, 2..40),
            m in 1u32..5,
            k_seed in 0usize..100,
        ) {
            let pts = on_line(&xs);
            let run = qhca_run_detailed(&pts, &explicit(m, TargetK::AllNonempty)).unwrap();
            let distinct = run.encoding.distinct_codes().len();
            let k = 1 + k_seed % distinct;
            let refined = refine_to_k(&run.clustering, &run.encoding, k).unwrap();
            prop_assert_eq!(refined.len(), k);
            // clusters stay contiguous, ordered code intervals
            let mut last_hi: Option<u64> = None;
            for c in refined.clusters() {
                let codes: Vec<u64> = c.members.iter().map(|&i| run.encoding.codes[i]).collect();
                let lo = *codes.iter().min().unwrap();
                if let Some(h) = last_hi {
                    prop_assert!(lo > h);
                }
                last_hi = Some(*codes.iter().max().unwrap());
            }
        }
    }
}
