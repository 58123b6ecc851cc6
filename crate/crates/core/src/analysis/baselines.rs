use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterParams, Clustering};
use crate::encoding::{check_dataset, distance_unchecked, Metric, Point};
use crate::error::{Error, Result};

const KMEANS_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Single,
    Complete,
}

impl Linkage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
        }
    }

    fn combine(&self, a: f64, b: f64) -> f64 {
        match self {
            Linkage::Single => a.min(b),
            Linkage::Complete => a.max(b),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::invalid(format!("unknown linkage '{other}' (expected single or complete)"))),
        }
    }
}

fn check_k(points: &[Point], k: usize) -> Result<()> {
    check_dataset(points)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::UnreachableTarget {
            target: k,
            available: points.len(),
        });
    }
    Ok(())
}

fn euclid(a: &Point, b: &Point) -> f64 {
    distance_unchecked(a.coords(), b.coords(), Metric::EUCLIDEAN)
}

/// Bottom-up clustering on Euclidean distance, merging until `k` clusters remain.
///
/// Equal distances are broken by the smallest index pair.
pub fn agglomerative_baseline(points: &[Point], k: usize, linkage: Linkage) -> Result<Clustering> {
    check_k(points, k)?;
    let n = points.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclid(&points[i], &points[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut active = vec![true; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let nearest = |row: usize, dist: &[Vec<f64>], active: &[bool]| -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if j == row || !active[j] {
                continue;
            }
            if best.is_none_or(|b| dist[row][j] < dist[row][b]) {
                best = Some(j);
            }
        }
        best
    };
    let mut nn: Vec<Option<usize>> = (0..n).map(|i| nearest(i, &dist, &active)).collect();

    for _ in 0..(n - k) {
        let mut pick: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            if let Some(j) = nn[i] {
                let cand = (dist[i][j], i.min(j), i.max(j));
                let better = match pick {
                    None => true,
                    Some(p) => cand.0 < p.0 || (cand.0 == p.0 && (cand.1, cand.2) < (p.1, p.2)),
                };
                if better {
                    pick = Some(cand);
                }
            }
        }
        let (_, keep, gone) = pick.expect("at least two active clusters");
        active[gone] = false;
        let moved = std::mem::take(&mut members[gone]);
        members[keep].extend(moved);
        for r in 0..n {
            if active[r] && r != keep {
                let d = linkage.combine(dist[r][keep], dist[r][gone]);
                dist[r][keep] = d;
                dist[keep][r] = d;
            }
        }
        nn[gone] = None;
        nn[keep] = nearest(keep, &dist, &active);
        for r in 0..n {
            if !active[r] || r == keep {
                continue;
            }
            match nn[r] {
                Some(c) if c == keep || c == gone => nn[r] = nearest(r, &dist, &active),
                Some(c) => {
                    if (dist[r][keep], keep) < (dist[r][c], c) {
                        nn[r] = Some(keep);
                    }
                }
                None => nn[r] = nearest(r, &dist, &active),
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = members.into_iter().filter(|m| !m.is_empty()).collect();
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    let mut params = ClusterParams::new("agglomerative");
    params.k = Some(k);
    params.linkage = Some(linkage.as_str().to_string());
    Clustering::from_groups(groups, n, params)
}

fn diameter(points: &[Point], members: &[usize]) -> (f64, usize, usize) {
    let mut best = (0.0, members[0], members[0]);
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let d = euclid(&points[i], &points[j]);
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    best
}

fn centroid(points: &[Point], members: &[usize]) -> Vec<f64> {
    let dim = points[members[0]].dim();
    let mut c = vec![0.0; dim];
    for &i in members {
        for (a, v) in c.iter_mut().zip(points[i].coords()) {
            *a += v;
        }
    }
    c.iter_mut().for_each(|a| *a /= members.len() as f64);
    c
}

fn two_means(points: &[Point], members: &[usize], seeds: (usize, usize)) -> (Vec<usize>, Vec<usize>) {
    let mut centers = [points[seeds.0].coords().to_vec(), points[seeds.1].coords().to_vec()];
    let mut sides = (Vec::new(), Vec::new());
    for _ in 0..KMEANS_MAX_ITERS {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for &i in members {
            let p = points[i].coords();
            let d0 = distance_unchecked(p, &centers[0], Metric::EUCLIDEAN);
            let d1 = distance_unchecked(p, &centers[1], Metric::EUCLIDEAN);
            if d0 <= d1 {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        if right.is_empty() {
            right.push(left.pop().expect("cluster has at least two members"));
        } else if left.is_empty() {
            left.push(right.pop().expect("cluster has at least two members"));
        }
        if (&left, &right) == (&sides.0, &sides.1) {
            break;
        }
        centers = [centroid(points, &left), centroid(points, &right)];
        sides = (left, right);
    }
    sides
}

/// Top-down clustering: repeatedly bisects the cluster with the largest diameter
/// using two-means seeded at that cluster's farthest pair.
pub fn divisive_baseline(points: &[Point], k: usize) -> Result<Clustering> {
    check_k(points, k)?;
    let n = points.len();
    let all: Vec<usize> = (0..n).collect();
    let mut clusters: Vec<(Vec<usize>, (f64, usize, usize))> = vec![(all.clone(), diameter(points, &all))];
    while clusters.len() < k {
        let target = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.0.len() >= 2)
            .fold(None::<usize>, |best, (i, c)| match best {
                Some(b) if clusters[b].1 .0 >= c.1 .0 => Some(b),
                _ => Some(i),
            })
            .expect("k <= N leaves a splittable cluster");
        let (members, (_, a, b)) = clusters.remove(target);
        let (left, right) = two_means(points, &members, (a, b));
        let dl = diameter(points, &left);
        let dr = diameter(points, &right);
        clusters.insert(target, (right, dr));
        clusters.insert(target, (left, dl));
    }
    let mut groups: Vec<Vec<usize>> = clusters.into_iter().map(|c| c.0).collect();
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    let mut params = ClusterParams::new("divisive");
    params.k = Some(k);
    Clustering::from_groups(groups, n, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::xy(x, 0.0)).collect()
    }

    /// Straightforward O(N^3) agglomeration recomputing linkage from member sets.
    fn naive_agglomerative(points: &[Point], k: usize, linkage: Linkage) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
        while groups.len() > k {
            let mut best = (f64::INFINITY, 0, 0);
            for a in 0..groups.len() {
                for b in (a + 1)..groups.len() {
                    let ds = groups[a]
                        .iter()
                        .flat_map(|&i| groups[b].iter().map(move |&j| (i, j)))
                        .map(|(i, j)| euclid(&points[i], &points[j]));
                    let d = match linkage {
                        Linkage::Single => ds.fold(f64::INFINITY, f64::min),
                        Linkage::Complete => ds.fold(0.0, f64::max),
                    };
                    if d < best.0 {
                        best = (d, a, b);
                    }
                }
            }
            let moved = groups.remove(best.2);
            groups[best.1].extend(moved);
        }
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort();
        groups
    }

    #[test]
    fn single_linkage_chains_while_complete_does_not() {
        // a chain of gaps 1, 1.1, 1.2 then a gap of 2.0
        let pts = line(&[0.0, 1.0, 2.1, 3.3, 5.3]);
        let single = agglomerative_baseline(&pts, 2, Linkage::Single).unwrap();
        assert_eq!(single.canonical(), vec![vec![0, 1, 2, 3], vec![4]]);
        let complete = agglomerative_baseline(&pts, 2, Linkage::Complete).unwrap();
        assert_eq!(complete.canonical(), vec![vec![0, 1], vec![2, 3, 4]]);
    }

    #[test]
    fn k_equal_to_n_and_one() {
        let pts = line(&[0.0, 4.0, 9.0]);
        assert_eq!(agglomerative_baseline(&pts, 3, Linkage::Single).unwrap().len(), 3);
        assert_eq!(agglomerative_baseline(&pts, 1, Linkage::Complete).unwrap().len(), 1);
        assert_eq!(divisive_baseline(&pts, 3).unwrap().len(), 3);
        assert_eq!(divisive_baseline(&pts, 1).unwrap().len(), 1);
        assert!(agglomerative_baseline(&pts, 4, Linkage::Single).is_err());
        assert!(divisive_baseline(&pts, 4).is_err());
        assert!(divisive_baseline(&pts, 0).is_err());
    }

    #[test]
    fn divisive_separates_two_blobs() {
        let pts = line(&[0.0, 0.5, 1.0, 10.0, 10.5, 11.0]);
        let c = divisive_baseline(&pts, 2).unwrap();
        assert_eq!(c.canonical(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn divisive_handles_duplicates() {
        let pts = line(&[1.0, 1.0, 1.0, 1.0]);
        let c = divisive_baseline(&pts, 3).unwrap();
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn linkage_parses() {
        assert_eq!("complete".parse::<Linkage>().unwrap(), Linkage::Complete);
        assert!("average".parse::<Linkage>().is_err());
    }

    proptest! {
        #[test]
        fn cached_agglomeration_matches_naive(
            coords in prop::collection::vec((0u32..1000, 0u32..1000), 2..25),
            k_frac in 0.0f64..1.0,
            complete in any::<bool>(),
        ) {
            // distinct random distances make the merge order unambiguous
            let pts: Vec<Point> = coords.iter().map(|&(x, y)| Point::xy(x as f64 + y as f64 * 1e-4, y as f64 * 0.731)).collect();
            let k = 1 + ((pts.len() - 1) as f64 * k_frac) as usize;
            let linkage = if complete { Linkage::Complete } else { Linkage::Single };
            let fast = agglomerative_baseline(&pts, k, linkage).unwrap().canonical();
            prop_assert_eq!(fast, naive_agglomerative(&pts, k, linkage));
        }

        #[test]
        fn divisive_always_returns_k_clusters(
            xs in prop::collection::vec(-50.0f64..50.0, 1..40),
            k_frac in 0.0f64..1.0,
        ) {
            let pts = line(&xs);
            let k = 1 + ((pts.len() - 1) as f64 * k_frac) as usize;
            let c = divisive_baseline(&pts, k).unwrap();
            prop_assert_eq!(c.len(), k);
            prop_assert_eq!(divisive_baseline(&pts, k).unwrap(), c);
        }
    }
}
