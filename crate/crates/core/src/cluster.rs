//! OPTICS over cosine distance, ξ-cluster extraction, and placement of
//! noise methods into the most similar extracted cluster.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::facts::MethodId;
use crate::linalg::Matrix;
use crate::structsim::SimilarityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    /// OPTICS `minPts`, also the smallest cluster that may be extracted.
    pub min_methods: usize,
    /// Steepness for ξ extraction, in (0, 1).
    pub xi: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            min_methods: 3,
            xi: 0.05,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_methods < 2 {
            return Err(Error::Config(alloc::format!(
                "min_methods must be >= 2, got {}",
                self.min_methods
            )));
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(Error::Config(alloc::format!("xi must be in (0, 1), got {}", self.xi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionWarning {
    /// Clustering found no structure; the whole class is kept as one unit.
    NoClusters,
}

impl fmt::Display for PartitionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoClusters => f.write_str("no clusters found; no refactoring recommended"),
        }
    }
}

/// One proposed sub-class label per method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub k: usize,
    /// Methods that were OPTICS noise before being placed.
    pub noise_assigned: BTreeSet<MethodId>,
    pub warnings: Vec<PartitionWarning>,
}

impl Partition {
    pub fn single(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            k: 1,
            noise_assigned: BTreeSet::new(),
            warnings: Vec::new(),
        }
    }

    /// Builds a partition from arbitrary labels, compacting them to `0..k`
    /// in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let compact = labels
            .iter()
            .map(|&l| match map.iter().find(|(old, _)| *old == l) {
                Some(&(_, new)) => new,
                None => {
                    map.push((l, map.len()));
                    map.len() - 1
                }
            })
            .collect();
        Self {
            labels: compact,
            k: map.len().max(1),
            noise_assigned: BTreeSet::new(),
            warnings: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn members(&self, cluster: usize) -> Vec<MethodId> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == cluster).collect()
    }

    /// Labels are contiguous from 0 and every cluster is non-empty.
    pub fn is_well_formed(&self) -> bool {
        let used: BTreeSet<usize> = self.labels.iter().copied().collect();
        (self.labels.is_empty() || used.len() == self.k) && used.iter().all(|&l| l < self.k)
    }
}

/// `1 − similarity`, clamped to `[0, 2]`, zero diagonal.
pub fn to_distance(similarity: &SimilarityMatrix) -> Matrix {
    let n = similarity.n();
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (1.0 - similarity.get(i, j)).clamp(0.0, 2.0)
        }
    })
}

/// Result of an OPTICS run. `reachability[i]` and `predecessor[i]` are
/// indexed by method id; the first processed method has infinite
/// reachability and no predecessor.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticsOrdering {
    pub ordering: Vec<MethodId>,
    pub reachability: Vec<f64>,
    pub core_distance: Vec<f64>,
    pub predecessor: Vec<Option<MethodId>>,
}

impl OpticsOrdering {
    /// Reachability values in processing order.
    pub fn plot(&self) -> Vec<f64> {
        self.ordering.iter().map(|&i| self.reachability[i]).collect()
    }
}

/// OPTICS with unbounded radius. Processing starts at method 0; the next
/// point is the seed with the smallest reachability, ties to the smaller id.
pub fn optics_order(distance: &Matrix, min_methods: usize) -> Result<OpticsOrdering> {
    let n = distance.rows();
    if n < min_methods || n == 0 {
        return Err(Error::TooFewMethods { n, min: min_methods });
    }
    let core_distance: Vec<f64> = (0..n)
        .map(|p| {
            let mut d: Vec<f64> = (0..n).filter(|&q| q != p).map(|q| distance[(p, q)]).collect();
            d.sort_by(f64::total_cmp);
            d.get(min_methods.saturating_sub(2)).copied().unwrap_or(f64::INFINITY)
        })
        .collect();

    let mut reachability = vec![f64::INFINITY; n];
    let mut predecessor = vec![None; n];
    let mut processed = vec![false; n];
    let mut ordering = Vec::with_capacity(n);

    for start in 0..n {
        if processed[start] {
            continue;
        }
        let mut current = Some(start);
        while let Some(p) = current {
            processed[p] = true;
            ordering.push(p);
            for o in 0..n {
                if processed[o] {
                    continue;
                }
                let candidate = core_distance[p].max(distance[(p, o)]);
                if candidate < reachability[o] {
                    reachability[o] = candidate;
                    predecessor[o] = Some(p);
                }
            }
            current = (0..n)
                .filter(|&o| !processed[o] && reachability[o].is_finite())
                .min_by(|&a, &b| reachability[a].total_cmp(&reachability[b]).then(a.cmp(&b)));
        }
    }

    Ok(OpticsOrdering {
        ordering,
        reachability,
        core_distance,
        predecessor,
    })
}

/// Label value for noise in [`extract_clusters`] output.
pub const NOISE: isize = -1;

struct SteepDownArea {
    start: usize,
    end: usize,
    mib: f64,
}

/// ξ-steep-area cluster extraction over an OPTICS ordering.
///
/// Follows the standard steep-area scan with predecessor correction. Each
/// candidate cluster is additionally trimmed of boundary points whose own
/// reachability is ξ-steep above the cluster's interior level: such a point
/// is reached from the cluster only across a gap, so it is an outlier on the
/// cluster's wall rather than a member. Clusters smaller than `min_methods`
/// are dropped; innermost clusters win and remaining points are [`NOISE`].
/// Returned labels are indexed by method id.
pub fn extract_clusters(optics: &OpticsOrdering, xi: f64, min_methods: usize) -> Vec<isize> {
    let n = optics.ordering.len();
    let mut r = optics.plot();
    r.push(f64::INFINITY);
    let pred: Vec<Option<MethodId>> = optics.ordering.iter().map(|&i| optics.predecessor[i]).collect();
    let xi_c = 1.0 - xi;

    let ratio = |i: usize| r[i] / r[i + 1];
    let steep_up: Vec<bool> = (0..n).map(|i| ratio(i) <= xi_c).collect();
    let steep_down: Vec<bool> = (0..n).map(|i| ratio(i) >= 1.0 / xi_c).collect();
    let downward: Vec<bool> = (0..n).map(|i| ratio(i) > 1.0).collect();
    let upward: Vec<bool> = (0..n).map(|i| ratio(i) < 1.0).collect();

    let extend = |steep: &[bool], xward: &[bool], start: usize| -> usize {
        let mut non_xward = 0;
        let mut end = start;
        for idx in start..n {
            if steep[idx] {
                non_xward = 0;
                end = idx;
            } else if !xward[idx] {
                non_xward += 1;
                if non_xward > min_methods {
                    break;
                }
            } else {
                return end;
            }
        }
        end
    };

    let mut sdas: Vec<SteepDownArea> = Vec::new();
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut index = 0;
    let mut mib: f64 = 0.0;

    let filter_sdas = |sdas: &mut Vec<SteepDownArea>, mib: f64| {
        if mib.is_infinite() {
            sdas.clear();
            return;
        }
        sdas.retain(|d| mib <= r[d.start] * xi_c);
        for d in sdas.iter_mut() {
            d.mib = d.mib.max(mib);
        }
    };

    for steep_index in 0..n {
        if !(steep_up[steep_index] || steep_down[steep_index]) || steep_index < index {
            continue;
        }
        mib = r[index..=steep_index].iter().fold(mib, |a, &b| a.max(b));

        if steep_down[steep_index] {
            filter_sdas(&mut sdas, mib);
            let end = extend(&steep_down, &upward, steep_index);
            sdas.push(SteepDownArea {
                start: steep_index,
                end,
                mib: 0.0,
            });
            index = end + 1;
            mib = r[index];
            continue;
        }

        filter_sdas(&mut sdas, mib);
        let u_start = steep_index;
        let u_end = extend(&steep_up, &downward, u_start);
        index = u_end + 1;
        mib = r[index];

        let mut found = Vec::new();
        for d in &sdas {
            let mut c_start = d.start;
            let mut c_end = u_end;
            if r[c_end + 1] * xi_c < d.mib {
                continue;
            }
            let d_max = r[d.start];
            if d_max * xi_c >= r[c_end + 1] {
                while r[c_start + 1] > r[c_end + 1] && c_start < d.end {
                    c_start += 1;
                }
            } else if r[c_end + 1] * xi_c >= d_max {
                while r[c_end - 1] > d_max && c_end > u_start {
                    c_end -= 1;
                }
            }
            let Some((s, e)) = correct_predecessor(&r, &pred, &optics.ordering, c_start, c_end) else {
                continue;
            };
            let (s, e) = trim_wall_points(&r, s, e, xi_c);
            if e + 1 - s < min_methods || s > d.end || e < u_start {
                continue;
            }
            found.push((s, e));
        }
        found.reverse();
        clusters.extend(found);
    }

    let mut by_position = vec![NOISE; n];
    let mut next_label = 0;
    for (s, e) in clusters {
        if by_position[s..=e].iter().all(|&l| l == NOISE) {
            by_position[s..=e].iter_mut().for_each(|l| *l = next_label);
            next_label += 1;
        }
    }
    let mut labels = vec![NOISE; n];
    for (pos, &id) in optics.ordering.iter().enumerate() {
        labels[id] = by_position[pos];
    }
    labels
}

fn correct_predecessor(
    r: &[f64],
    pred: &[Option<MethodId>],
    ordering: &[MethodId],
    s: usize,
    mut e: usize,
) -> Option<(usize, usize)> {
    while s < e {
        if r[s] > r[e] {
            return Some((s, e));
        }
        if let Some(p) = pred[e] {
            if ordering[s..e].contains(&p) {
                return Some((s, e));
            }
        }
        e -= 1;
    }
    None
}

fn trim_wall_points(r: &[f64], mut s: usize, mut e: usize, xi_c: f64) -> (usize, usize) {
    let level = |from: usize, to: usize| r[from..=to].iter().fold(0.0f64, |a, &b| a.max(b));
    // right wall: the last point's own reachability towers over the interior
    while e >= s + 2 && r[e] * xi_c > level(s + 1, e - 1) {
        e -= 1;
    }
    // left wall: the second point is reached from the start across a gap
    while e >= s + 2 && r[s + 1] * xi_c > level(s + 2, e) {
        s += 1;
    }
    (s, e)
}

/// Places each noise method into the cluster with the highest mean
/// similarity to that cluster's original members (ties to the smaller
/// cluster), then compacts labels.
pub fn assign_noise(raw: &[isize], similarity: &SimilarityMatrix) -> Result<Partition> {
    let clusters: BTreeSet<isize> = raw.iter().copied().filter(|&l| l != NOISE).collect();
    if clusters.is_empty() {
        return Err(Error::NoClusters);
    }
    let clusters: Vec<isize> = clusters.into_iter().collect();
    let members: Vec<Vec<usize>> = clusters
        .iter()
        .map(|&c| (0..raw.len()).filter(|&i| raw[i] == c).collect())
        .collect();

    let mut labels = vec![0usize; raw.len()];
    let mut noise_assigned = BTreeSet::new();
    for (i, &l) in raw.iter().enumerate() {
        if l != NOISE {
            labels[i] = clusters.binary_search(&l).expect("label present");
            continue;
        }
        noise_assigned.insert(i);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (c, ms) in members.iter().enumerate() {
            let score = ms.iter().map(|&m| similarity.get(i, m)).sum::<f64>() / ms.len() as f64;
            if score > best_score {
                best = c;
                best_score = score;
            }
        }
        labels[i] = best;
    }
    Ok(Partition {
        labels,
        k: clusters.len(),
        noise_assigned,
        warnings: Vec::new(),
    })
}

/// Dissolves extracted clusters whose members share no positive similarity
/// on average; they carry no evidence of a common responsibility.
fn dissolve_unrelated(raw: &mut [isize], similarity: &SimilarityMatrix) {
    let labels: BTreeSet<isize> = raw.iter().copied().filter(|&l| l != NOISE).collect();
    for c in labels {
        let ms: Vec<usize> = (0..raw.len()).filter(|&i| raw[i] == c).collect();
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for (a, &i) in ms.iter().enumerate() {
            for &j in &ms[a + 1..] {
                sum += similarity.get(i, j);
                pairs += 1;
            }
        }
        if pairs > 0 && sum / pairs as f64 <= 0.0 {
            for &i in &ms {
                raw[i] = NOISE;
            }
        }
    }
}

/// `to_distance → optics_order → extract_clusters → assign_noise`.
///
/// When every method ends up as noise the class is returned whole with a
/// [`PartitionWarning::NoClusters`] warning.
pub fn refactor(similarity: &SimilarityMatrix, config: &ClusterConfig) -> Result<Partition> {
    config.validate()?;
    if !similarity.values.is_symmetric(1e-9) {
        return Err(Error::Config(alloc::string::String::from(
            "similarity matrix must be symmetric",
        )));
    }
    let distance = to_distance(similarity);
    let optics = optics_order(&distance, config.min_methods)?;
    let mut raw = extract_clusters(&optics, config.xi, config.min_methods);
    dissolve_unrelated(&mut raw, similarity);
    match assign_noise(&raw, similarity) {
        Ok(p) => Ok(p),
        Err(Error::NoClusters) => {
            let mut p = Partition::single(similarity.n());
            p.noise_assigned = (0..similarity.n()).collect();
            p.warnings.push(PartitionWarning::NoClusters);
            Ok(p)
        }
        Err(e) => Err(e),
    }
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
///
/// Returns 1.0 when both labelings are identical up to renaming, including
/// the degenerate case where either side has a single cluster and they
/// agree.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len() as u64;
    let ka = a.iter().max().map_or(0, |&m| m + 1);
    let kb = b.iter().max().map_or(0, |&m| m + 1);
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
    }
    let sum_cells: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sum_a: f64 = (0..ka).map(|x| choose2(table[x * kb..(x + 1) * kb].iter().sum())).sum();
    let sum_b: f64 = (0..kb).map(|y| choose2((0..ka).map(|x| table[x * kb + y]).sum())).sum();
    let total = choose2(n);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if max_index == expected {
        return 1.0;
    }
    (sum_cells - expected) / (max_index - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structsim::SimilarityKind;
    use proptest::prelude::*;

    fn sim(values: Matrix) -> SimilarityMatrix {
        SimilarityMatrix::new(SimilarityKind::Latent, values).unwrap()
    }

    fn two_groups_distance() -> Matrix {
        Matrix::from_fn(8, 8, |i, j| match (i == j, i / 4 == j / 4) {
            (true, _) => 0.0,
            (false, true) => 0.1,
            (false, false) => 0.9,
        })
    }

    #[test]
    fn distance_examples() {
        let s = sim(Matrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, -0.5], [0.0, -0.5, 1.0]]).unwrap());
        let d = to_distance(&s);
        assert_eq!(d[(0, 1)], 0.0);
        assert_eq!(d[(0, 2)], 1.0);
        assert_eq!(d[(1, 2)], 1.5);
        assert_eq!(d[(2, 2)], 0.0);
    }

    #[test]
    fn two_valleys() {
        let o = optics_order(&two_groups_distance(), 3).unwrap();
        let mut sorted = o.ordering.clone();
        sorted.sort();
        assert_eq!(sorted, (0..8).collect::<Vec<_>>());
        let plot = o.plot();
        let jumps: Vec<usize> = (1..8).filter(|&i| plot[i] >= 0.9).collect();
        assert_eq!(jumps.len(), 1);
        let j = jumps[0];
        assert_eq!(j, 4);
        assert!(plot[1..j].iter().chain(&plot[j + 1..]).all(|&r| r == 0.1));

        let labels = extract_clusters(&o, 0.05, 3);
        assert!(labels.iter().all(|&l| l != NOISE));
        assert_eq!(labels[..4], [labels[0]; 4]);
        assert_eq!(labels[4..], [labels[4]; 4]);
        assert_ne!(labels[0], labels[4]);
    }

    #[test]
    fn flat_plot_is_one_cluster() {
        let d = Matrix::from_fn(6, 6, |i, j| if i == j { 0.0 } else { 0.4 });
        let o = optics_order(&d, 3).unwrap();
        assert!(o.plot()[1..].iter().all(|&r| r == 0.4));
        assert_eq!(extract_clusters(&o, 0.05, 3), vec![0; 6]);
    }

    #[test]
    fn lone_outlier_is_noise() {
        for outlier in [4usize, 0] {
            let d = Matrix::from_fn(5, 5, |i, j| match (i == j, i == outlier || j == outlier) {
                (true, _) => 0.0,
                (false, true) => 1.5,
                (false, false) => 0.1,
            });
            let o = optics_order(&d, 3).unwrap();
            let labels = extract_clusters(&o, 0.05, 3);
            assert_eq!(labels[outlier], NOISE, "outlier {outlier}: {labels:?}");
            assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 4);
        }
    }

    #[test]
    fn too_few_methods() {
        let d = Matrix::zeros(2, 2);
        assert_eq!(optics_order(&d, 3).unwrap_err(), Error::TooFewMethods { n: 2, min: 3 });
    }

    #[test]
    fn assign_noise_examples() {
        let s = sim(Matrix::identity(3));
        let p = assign_noise(&[0, 0, 1], &s).unwrap();
        assert_eq!(p.labels, [0, 0, 1]);
        assert!(p.noise_assigned.is_empty());

        // method 4 is noise: 0.9 to cluster A = {0,1}, 0.1 to B = {2,3}
        let mut v = Matrix::identity(5);
        for (i, j, x) in [(4, 0, 0.9), (4, 1, 0.9), (4, 2, 0.1), (4, 3, 0.1)] {
            v[(i, j)] = x;
            v[(j, i)] = x;
        }
        let p = assign_noise(&[3, 3, 7, 7, NOISE], &sim(v)).unwrap();
        assert_eq!(p.labels, [0, 0, 1, 1, 0]);
        assert_eq!(p.k, 2);
        assert_eq!(p.noise_assigned.iter().copied().collect::<Vec<_>>(), [4]);

        assert_eq!(assign_noise(&[NOISE; 3], &s).unwrap_err(), Error::NoClusters);
    }

    #[test]
    fn refactor_block_diagonal() {
        let v = Matrix::from_fn(16, 16, |i, j| match (i == j, i / 8 == j / 8) {
            (true, _) => 1.0,
            (false, true) => 0.9,
            (false, false) => 0.0,
        });
        let p = refactor(&sim(v), &ClusterConfig::default()).unwrap();
        assert_eq!(p.k, 2);
        let planted: Vec<usize> = (0..16).map(|i| i / 8).collect();
        assert_eq!(adjusted_rand_index(&p.labels, &planted), 1.0);
    }

    #[test]
    fn refactor_boundary_and_fallback() {
        let p = refactor(&sim(Matrix::from_fn(3, 3, |_, _| 1.0)), &ClusterConfig::default()).unwrap();
        assert_eq!(p.k, 1);
        assert!(p.warnings.is_empty());

        let p = refactor(&sim(Matrix::identity(6)), &ClusterConfig::default()).unwrap();
        assert_eq!(p.k, 1);
        assert_eq!(p.warnings, [PartitionWarning::NoClusters]);
        assert_eq!(p.labels, [0; 6]);
    }

    #[test]
    fn ari_values() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
        // hand-computed: contingency [[2,1],[0,2]]
        let ari = adjusted_rand_index(&[0, 0, 0, 1, 1], &[0, 0, 1, 1, 1]);
        let (cells, a, b, total) = (1.0 + 1.0, 3.0 + 1.0, 1.0 + 3.0, 10.0);
        let exp = a * b / total;
        assert!((ari - (cells - exp) / (0.5 * (a + b) - exp)).abs() < 1e-15);
    }

    fn block_similarity(sizes: &[usize], within: f64, cross: f64) -> (Matrix, Vec<usize>) {
        let planted: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| core::iter::repeat_n(b, s)).collect();
        let n = planted.len();
        let v = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else if planted[i] == planted[j] {
                within
            } else {
                cross
            }
        });
        (v, planted)
    }

    proptest! {
        #[test]
        fn planted_blocks_recovered(
            sizes in proptest::collection::vec(3usize..7, 1..4),
            within in 0.8f64..1.0,
            cross in 0.0f64..0.2,
        ) {
            let (v, planted) = block_similarity(&sizes, within, cross);
            let p = refactor(&sim(v), &ClusterConfig::default()).unwrap();
            prop_assert_eq!(adjusted_rand_index(&p.labels, &planted), 1.0);
        }

        #[test]
        fn partition_total_and_deterministic(data in proptest::collection::vec(-1.0f64..1.0, 45)) {
            let n = 10;
            let mut v = Matrix::identity(n);
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    v[(i, j)] = data[k];
                    v[(j, i)] = data[k];
                    k += 1;
                }
            }
            let s = sim(v);
            let p = refactor(&s, &ClusterConfig::default()).unwrap();
            prop_assert_eq!(p.labels.len(), n);
            prop_assert!(p.is_well_formed());
            prop_assert_eq!(&p, &refactor(&s, &ClusterConfig::default()).unwrap());
        }

        #[test]
        fn relabeling_equivariance(
            sizes in proptest::collection::vec(3usize..6, 2..4),
            seed in any::<u64>(),
        ) {
            let (v, _) = block_similarity(&sizes, 0.85, 0.1);
            let n = v.rows();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let base = refactor(&sim(v.clone()), &ClusterConfig::default()).unwrap();
            let permuted = refactor(&sim(v.permute_symmetric(&perm)), &ClusterConfig::default()).unwrap();
            let base_in_new_order: Vec<usize> = perm.iter().map(|&old| base.labels[old]).collect();
            prop_assert_eq!(adjusted_rand_index(&base_in_new_order, &permuted.labels), 1.0);
        }
    }
}
