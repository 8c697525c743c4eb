//! The five deterministic parametric transformations.
//!
//! Every transformation touches, in each cluster, a number of elements
//! proportional to the cluster size (see [`affected_counts`]). The touched
//! elements of a cluster are always its highest element indices. Outputs are
//! densely relabeled in order of first appearance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numeric::{snap, snapped_floor, snapped_round};
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("intensity q={q} is outside [0, 1]")]
    InvalidIntensity { q: f64 },
    #[error("proportion p={p} is outside [0, 1]")]
    InvalidProportion { p: f64 },
    #[error("{kind} needs k >= 2, got k={k}")]
    TooFewClusters { kind: TransformKind, k: usize },
    #[error("onc at q=1 would merge every element into one cluster")]
    FullIntensityOneNewCluster,
    #[error("unknown transformation {0:?} (expected knc, sc, onc, ncs or oc)")]
    UnknownKind(String),
}

/// Nature of a transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    /// k New Clusters: each cluster sheds a part that becomes its own cluster.
    Knc,
    /// Singleton Clusters: affected elements become singletons.
    Sc,
    /// 1 New Cluster: affected elements of all clusters form one cluster.
    Onc,
    /// Neighbor Cluster Swaps: affected elements move to the next cluster.
    Ncs,
    /// Orthogonal Clusters: new clusters take at most one element per cluster.
    Oc,
}

impl TransformKind {
    pub const ALL: [TransformKind; 5] = [Self::Knc, Self::Sc, Self::Onc, Self::Ncs, Self::Oc];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Knc => "knc",
            Self::Sc => "sc",
            Self::Onc => "onc",
            Self::Ncs => "ncs",
            Self::Oc => "oc",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Self::Knc => "k New Clusters",
            Self::Sc => "Singleton Clusters",
            Self::Onc => "1 New Cluster",
            Self::Ncs => "Neighbor Cluster Swaps",
            Self::Oc => "Orthogonal Clusters",
        }
    }

    /// Transformations whose effect is mirrored around a proportion of 0.5
    /// use `q` as twice the proportion.
    pub fn is_mirrored(self) -> bool {
        matches!(self, Self::Knc | Self::Ncs)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransformKind {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TransformError::UnknownKind(s.to_string()))
    }
}

/// A transformation kind with its intensity `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub q: f64,
}

impl TransformSpec {
    pub fn new(kind: TransformKind, q: f64) -> Result<Self, TransformError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(TransformError::InvalidIntensity { q });
        }
        Ok(Self { kind, q })
    }

    /// Proportion of each cluster actually touched.
    pub fn effective_proportion(&self) -> f64 {
        if self.kind.is_mirrored() {
            self.q / 2.0
        } else {
            self.q
        }
    }
}

/// Per-cluster counts of touched elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffectedAllocation {
    pub counts: Vec<usize>,
    pub total: usize,
}

/// Apportions `round(p * n)` touched elements over clusters proportionally
/// to their sizes with the largest-remainder method.
///
/// Each cluster first gets `floor(p * s_i)`. Leftover units go to the
/// largest fractional remainders; equal remainders favour the larger
/// cluster, then the lower index.
pub fn affected_counts(sizes: &[usize], p: f64) -> AffectedAllocation {
    let n: usize = sizes.iter().sum();
    let quotas: Vec<f64> = sizes.iter().map(|&s| snap(p * s as f64)).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|&x| snapped_floor(x) as usize).collect();
    let target = (snapped_round(p * n as f64) as usize).min(n);
    let assigned: usize = counts.iter().sum();
    if target > assigned {
        let mut order: Vec<usize> = (0..sizes.len()).filter(|&i| counts[i] < sizes[i]).collect();
        let remainder = |i: usize| quotas[i] - counts[i] as f64;
        order.sort_by(|&a, &b| {
            remainder(b)
                .total_cmp(&remainder(a))
                .then(sizes[b].cmp(&sizes[a]))
                .then(a.cmp(&b))
        });
        for &i in order.iter().take(target - assigned) {
            counts[i] += 1;
        }
    }
    let total = counts.iter().sum();
    AffectedAllocation { counts, total }
}

/// Affected elements of each cluster: its `c_i` highest indices, ascending.
fn affected_members(p: &Partition, proportion: f64) -> Vec<Vec<usize>> {
    let members = p.members();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let alloc = affected_counts(&sizes, proportion);
    members
        .into_iter()
        .zip(alloc.counts)
        .map(|(m, c)| m[m.len() - c..].to_vec())
        .collect()
}

fn check_proportion(p: f64) -> Result<(), TransformError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(TransformError::InvalidProportion { p })
    }
}

fn relabeled(raw: Vec<usize>) -> Partition {
    Partition::from_raw_labels(&raw).expect("transformations never drop elements")
}

/// Applies `spec` to `p`, rejecting `onc` at `q = 1`.
pub fn apply_transform(p: &Partition, spec: &TransformSpec) -> Result<Partition, TransformError> {
    if spec.kind == TransformKind::Onc && spec.q >= 1.0 {
        return Err(TransformError::FullIntensityOneNewCluster);
    }
    apply_transform_admitting_full(p, spec)
}

/// Like [`apply_transform`] but lets `onc` run at `q = 1`, where every
/// element ends up in the single new cluster. The factorial sweep uses this
/// so that its grid stays complete.
pub fn apply_transform_admitting_full(
    p: &Partition,
    spec: &TransformSpec,
) -> Result<Partition, TransformError> {
    let proportion = spec.effective_proportion();
    match spec.kind {
        TransformKind::Knc => k_new_clusters(p, proportion),
        TransformKind::Sc => singleton_clusters(p, proportion),
        TransformKind::Onc => one_new_cluster(p, proportion),
        TransformKind::Ncs => neighbor_cluster_swaps(p, proportion),
        TransformKind::Oc => orthogonal_clusters(p, proportion),
    }
}

/// The affected part of every cluster `i` becomes a new cluster of its own.
pub fn k_new_clusters(p: &Partition, proportion: f64) -> Result<Partition, TransformError> {
    check_proportion(proportion)?;
    let k = p.cluster_count();
    let mut raw = p.labels().to_vec();
    for (i, affected) in affected_members(p, proportion).iter().enumerate() {
        for &e in affected {
            raw[e] = k + i;
        }
    }
    Ok(relabeled(raw))
}

/// Every affected element becomes a singleton cluster.
pub fn singleton_clusters(p: &Partition, proportion: f64) -> Result<Partition, TransformError> {
    check_proportion(proportion)?;
    let k = p.cluster_count();
    let mut raw = p.labels().to_vec();
    let mut next = k;
    for affected in affected_members(p, proportion) {
        for e in affected {
            raw[e] = next;
            next += 1;
        }
    }
    Ok(relabeled(raw))
}

/// All affected elements, whatever their cluster, form one new cluster.
pub fn one_new_cluster(p: &Partition, proportion: f64) -> Result<Partition, TransformError> {
    check_proportion(proportion)?;
    let k = p.cluster_count();
    let mut raw = p.labels().to_vec();
    for affected in affected_members(p, proportion) {
        for e in affected {
            raw[e] = k;
        }
    }
    Ok(relabeled(raw))
}

/// The affected part of cluster `i` moves to cluster `(i + 1) mod k`.
pub fn neighbor_cluster_swaps(p: &Partition, proportion: f64) -> Result<Partition, TransformError> {
    check_proportion(proportion)?;
    let k = p.cluster_count();
    if k < 2 {
        return Err(TransformError::TooFewClusters {
            kind: TransformKind::Ncs,
            k,
        });
    }
    let mut raw = p.labels().to_vec();
    for (i, affected) in affected_members(p, proportion).iter().enumerate() {
        for &e in affected {
            raw[e] = (i + 1) % k;
        }
    }
    Ok(relabeled(raw))
}

/// The `j`-th affected element of every cluster joins new cluster `j`, so
/// no new cluster holds two elements from the same original cluster.
pub fn orthogonal_clusters(p: &Partition, proportion: f64) -> Result<Partition, TransformError> {
    check_proportion(proportion)?;
    let k = p.cluster_count();
    if k < 2 {
        return Err(TransformError::TooFewClusters {
            kind: TransformKind::Oc,
            k,
        });
    }
    let mut raw = p.labels().to_vec();
    for affected in affected_members(p, proportion) {
        for (j, &e) in affected.iter().enumerate() {
            raw[e] = k + j;
        }
    }
    Ok(relabeled(raw))
}
