//! Partitions of `n` elements, reference-partition generation and the
//! confusion-matrix / pair-count machinery every measure is built on.

use crate::numeric::{choose2, snapped_floor};

/// Errors raised while building partitions or comparing them.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PartitionError {
    #[error("a partition needs at least one element")]
    Empty,
    #[error("label {label} at index {index} is outside 0..{k}")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        k: usize,
    },
    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: usize },
    #[error("invalid cluster count k={k} for n={n} (need 1 <= k <= n)")]
    InvalidClusterCount { n: usize, k: usize },
    #[error("heterogeneity h={h} is outside [0, 1]")]
    InvalidHeterogeneity { h: f64 },
    #[error(
        "infeasible sizes for n={n}, k={k}, h={h}: smallest cluster would hold {smallest} elements"
    )]
    Infeasible {
        n: usize,
        k: usize,
        h: f64,
        smallest: i64,
    },
    #[error("partitions cover different element counts ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("confusion matrix has {rows}x{cols} shape but {len} counts")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        len: usize,
    },
}

/// Assignment of `n` elements to `k` non-empty clusters labelled `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates labels that already use the dense range `0..k`.
    pub fn new(labels: Vec<usize>) -> Result<Self, PartitionError> {
        if labels.is_empty() {
            return Err(PartitionError::Empty);
        }
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(cluster) = seen.iter().position(|&s| !s) {
            return Err(PartitionError::EmptyCluster { cluster });
        }
        Ok(Self { labels, k })
    }

    /// Builds a partition from arbitrary labels, renumbering clusters in
    /// order of first appearance.
    pub fn from_raw_labels(raw: &[usize]) -> Result<Self, PartitionError> {
        if raw.is_empty() {
            return Err(PartitionError::Empty);
        }
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&r| {
                let next = map.len();
                *map.entry(r).or_insert(next)
            })
            .collect();
        Ok(Self {
            labels,
            k: map.len(),
        })
    }

    /// Clusters of sizes `sizes` laid out contiguously: cluster 0 first.
    pub fn contiguous(sizes: &[usize]) -> Result<Self, PartitionError> {
        if let Some(cluster) = sizes.iter().position(|&s| s == 0) {
            return Err(PartitionError::EmptyCluster { cluster });
        }
        let labels: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
            .collect();
        if labels.is_empty() {
            return Err(PartitionError::Empty);
        }
        Ok(Self {
            labels,
            k: sizes.len(),
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.k
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Element indices of each cluster, in increasing order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }
}

/// Cluster sizes forming an arithmetic progression whose spread is set by
/// the heterogeneity `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSizeSpec {
    pub n: usize,
    pub k: usize,
    pub h: f64,
    /// Increment reached at `h = 1`, where the first size equals the increment.
    pub beta_max: f64,
    pub increment: usize,
    /// Smallest cluster size before the remainder correction.
    pub alpha: usize,
    pub sizes: Vec<usize>,
}

/// Computes the arithmetic-progression cluster sizes for `(n, k, h)`.
///
/// `beta_max = 2n / (k(k+1))`, the increment is `floor(h * beta_max)`, the
/// first size is `floor((n - increment * k(k-1)/2) / k)`, and whatever is
/// left over so the sizes sum to `n` goes to the largest cluster.
pub fn cluster_sizes(n: usize, k: usize, h: f64) -> Result<ClusterSizeSpec, PartitionError> {
    if k == 0 || k > n {
        return Err(PartitionError::InvalidClusterCount { n, k });
    }
    if !(0.0..=1.0).contains(&h) {
        return Err(PartitionError::InvalidHeterogeneity { h });
    }
    let beta_max = 2.0 * n as f64 / (k * (k + 1)) as f64;
    let increment = snapped_floor(h * beta_max) as usize;
    let progression = (increment * k * (k - 1) / 2) as i64;
    let alpha = (n as i64 - progression).div_euclid(k as i64);
    if alpha < 1 {
        return Err(PartitionError::Infeasible {
            n,
            k,
            h,
            smallest: alpha,
        });
    }
    let alpha = alpha as usize;
    let mut sizes: Vec<usize> = (0..k).map(|i| alpha + i * increment).collect();
    let assigned: usize = sizes.iter().sum();
    sizes[k - 1] += n - assigned;
    Ok(ClusterSizeSpec {
        n,
        k,
        h,
        beta_max,
        increment,
        alpha,
        sizes,
    })
}

/// Canonical reference partition: cluster 0 occupies the first `sizes[0]`
/// indices, cluster 1 the next `sizes[1]`, and so on.
pub fn build_reference_partition(spec: &ClusterSizeSpec) -> Result<Partition, PartitionError> {
    Partition::contiguous(&spec.sizes)
}

/// Intersection counts `n_ij = |C_i ∩ C'_j|` between two partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    row_marginals: Vec<u64>,
    col_marginals: Vec<u64>,
    total: u64,
}

impl ConfusionMatrix {
    /// Builds a matrix from row-major counts.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Result<Self, PartitionError> {
        if counts.len() != rows * cols {
            return Err(PartitionError::ShapeMismatch {
                rows,
                cols,
                len: counts.len(),
            });
        }
        let mut row_marginals = vec![0u64; rows];
        let mut col_marginals = vec![0u64; cols];
        for i in 0..rows {
            for j in 0..cols {
                let c = counts[i * cols + j];
                row_marginals[i] += c;
                col_marginals[j] += c;
            }
        }
        let total = row_marginals.iter().sum();
        if total == 0 {
            return Err(PartitionError::Empty);
        }
        Ok(Self {
            rows,
            cols,
            counts,
            row_marginals,
            col_marginals,
            total,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.cols..(i + 1) * self.cols]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_marginals(&self) -> &[u64] {
        &self.row_marginals
    }

    pub fn col_marginals(&self) -> &[u64] {
        &self.col_marginals
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0u64; self.counts.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                counts[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            counts,
            row_marginals: self.col_marginals.clone(),
            col_marginals: self.row_marginals.clone(),
            total: self.total,
        }
    }
}

/// Confusion matrix of `p` (rows) against `p_prime` (columns).
pub fn confusion_matrix(
    p: &Partition,
    p_prime: &Partition,
) -> Result<ConfusionMatrix, PartitionError> {
    if p.len() != p_prime.len() {
        return Err(PartitionError::LengthMismatch {
            left: p.len(),
            right: p_prime.len(),
        });
    }
    let (rows, cols) = (p.cluster_count(), p_prime.cluster_count());
    let mut counts = vec![0u64; rows * cols];
    for (&a, &b) in p.labels().iter().zip(p_prime.labels()) {
        counts[a * cols + b] += 1;
    }
    ConfusionMatrix::from_counts(rows, cols, counts)
}

/// Unordered element-pair counts: together in both partitions (`n11`),
/// apart in both (`n00`), together only in the first (`n10`) or only in the
/// second (`n01`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub n11: u64,
    pub n00: u64,
    pub n10: u64,
    pub n01: u64,
    pub total: u64,
}

impl PairCounts {
    /// Pairs grouped together by the first partition.
    pub fn together_first(&self) -> u64 {
        self.n11 + self.n10
    }

    /// Pairs grouped together by the second partition.
    pub fn together_second(&self) -> u64 {
        self.n11 + self.n01
    }

    /// True when both partitions group exactly the same pairs, i.e. they are
    /// the same partition up to relabeling.
    pub fn identical(&self) -> bool {
        self.n10 == 0 && self.n01 == 0
    }
}

pub fn pair_counts(cm: &ConfusionMatrix) -> PairCounts {
    let n11: u64 = cm.counts().iter().map(|&c| choose2(c)).sum();
    let rows: u64 = cm.row_marginals().iter().map(|&c| choose2(c)).sum();
    let cols: u64 = cm.col_marginals().iter().map(|&c| choose2(c)).sum();
    let total = choose2(cm.total());
    let n10 = rows - n11;
    let n01 = cols - n11;
    PairCounts {
        n11,
        n10,
        n01,
        n00: total - n11 - n10 - n01,
        total,
    }
}
