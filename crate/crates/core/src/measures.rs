//! The six external measures, computed from a confusion matrix and turned
//! into dissimilarities by subtraction from one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::partition::{
    confusion_matrix, pair_counts, ConfusionMatrix, PairCounts, Partition, PartitionError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("at least two elements are needed to count pairs")]
    TooFewElements,
    #[error("adjusted Rand index is undefined: zero denominator for distinct partitions")]
    DegenerateAdjustedRand,
    #[error("unknown measure {0:?} (expected RI, ARI, JI, FMI, F or NMI)")]
    UnknownKind(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "RI")]
    Rand,
    #[serde(rename = "ARI")]
    AdjustedRand,
    #[serde(rename = "JI")]
    Jaccard,
    #[serde(rename = "FMI")]
    FowlkesMallows,
    #[serde(rename = "F")]
    FMeasure,
    #[serde(rename = "NMI")]
    Nmi,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        Self::Rand,
        Self::AdjustedRand,
        Self::Jaccard,
        Self::FowlkesMallows,
        Self::FMeasure,
        Self::Nmi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rand => "RI",
            Self::AdjustedRand => "ARI",
            Self::Jaccard => "JI",
            Self::FowlkesMallows => "FMI",
            Self::FMeasure => "F",
            Self::Nmi => "NMI",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Similarity between the partitions summarized by `cm`.
    pub fn similarity(self, cm: &ConfusionMatrix) -> Result<f64, MeasureError> {
        self.similarity_with(cm, &pair_counts(cm))
    }

    fn similarity_with(self, cm: &ConfusionMatrix, pc: &PairCounts) -> Result<f64, MeasureError> {
        match self {
            Self::Rand => rand_index(pc),
            Self::AdjustedRand => adjusted_rand(cm),
            Self::Jaccard => jaccard(pc),
            Self::FowlkesMallows => fowlkes_mallows(pc),
            Self::FMeasure => Ok(f_measure(cm)),
            Self::Nmi => Ok(nmi(cm)),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| MeasureError::UnknownKind(s.to_string()))
    }
}

/// A measure's similarity and the dissimilarity `1 - similarity` used as
/// the regression response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureScore {
    pub kind: MeasureKind,
    pub similarity: f64,
    pub dissimilarity: f64,
    /// Set when the similarity fell outside `[0, 1]` (negative ARI). The
    /// value is kept unclamped.
    pub out_of_range: bool,
}

impl MeasureScore {
    pub fn from_similarity(kind: MeasureKind, similarity: f64) -> Self {
        Self {
            kind,
            similarity,
            dissimilarity: 1.0 - similarity,
            out_of_range: !(0.0..=1.0).contains(&similarity),
        }
    }
}

/// Proportion of agreeing pairs, `(N11 + N00) / C(n, 2)`.
pub fn rand_index(pc: &PairCounts) -> Result<f64, MeasureError> {
    if pc.total == 0 {
        return Err(MeasureError::TooFewElements);
    }
    Ok((pc.n11 + pc.n00) as f64 / pc.total as f64)
}

/// Hubert and Arabie's chance-corrected Rand index under the permutation
/// (hypergeometric) model.
pub fn adjusted_rand(cm: &ConfusionMatrix) -> Result<f64, MeasureError> {
    let pc = pair_counts(cm);
    if pc.total == 0 {
        return Err(MeasureError::TooFewElements);
    }
    let index = pc.n11 as f64;
    let (a, b) = (pc.together_first() as f64, pc.together_second() as f64);
    let expected = a * b / pc.total as f64;
    let max_index = 0.5 * (a + b);
    let denominator = max_index - expected;
    if denominator == 0.0 {
        return if pc.identical() {
            Ok(1.0)
        } else {
            Err(MeasureError::DegenerateAdjustedRand)
        };
    }
    Ok((index - expected) / denominator)
}

/// `N11 / (N11 + N10 + N01)`; 1 when no pair is grouped by either partition.
pub fn jaccard(pc: &PairCounts) -> Result<f64, MeasureError> {
    if pc.total == 0 {
        return Err(MeasureError::TooFewElements);
    }
    let denominator = pc.n11 + pc.n10 + pc.n01;
    if denominator == 0 {
        return Ok(1.0);
    }
    Ok(pc.n11 as f64 / denominator as f64)
}

/// Geometric mean of the two pair-precision ratios.
pub fn fowlkes_mallows(pc: &PairCounts) -> Result<f64, MeasureError> {
    if pc.total == 0 {
        return Err(MeasureError::TooFewElements);
    }
    let product = pc.together_first() * pc.together_second();
    if product == 0 {
        return Ok(if pc.identical() { 1.0 } else { 0.0 });
    }
    Ok(pc.n11 as f64 / (product as f64).sqrt())
}

/// Share of elements that fall in the best-matching column of their row.
pub fn purity(cm: &ConfusionMatrix) -> f64 {
    let matched: u64 = (0..cm.rows())
        .map(|i| cm.row(i).iter().copied().max().unwrap_or(0))
        .sum();
    matched as f64 / cm.total() as f64
}

/// Harmonic mean of purity and inverse purity.
pub fn f_measure(cm: &ConfusionMatrix) -> f64 {
    let direct = purity(cm);
    let inverse = purity(&cm.transpose());
    2.0 * direct * inverse / (direct + inverse)
}

fn plogp_sum(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Shannon entropy (natural log) of the row clusters.
pub fn entropy(cm: &ConfusionMatrix) -> f64 {
    plogp_sum(cm.row_marginals(), cm.total() as f64)
}

/// Mutual information (natural log) between rows and columns.
pub fn mutual_information(cm: &ConfusionMatrix) -> f64 {
    let n = cm.total() as f64;
    let mut mi = 0.0;
    for i in 0..cm.rows() {
        let pi = cm.row_marginals()[i] as f64 / n;
        for (j, &c) in cm.row(i).iter().enumerate() {
            if c == 0 {
                continue;
            }
            let pij = c as f64 / n;
            let pj = cm.col_marginals()[j] as f64 / n;
            mi += pij * (pij / (pi * pj)).ln();
        }
    }
    mi
}

/// Mutual information normalized by the mean of the two entropies.
pub fn nmi(cm: &ConfusionMatrix) -> f64 {
    let h_sum = entropy(cm) + plogp_sum(cm.col_marginals(), cm.total() as f64);
    if h_sum == 0.0 || pair_counts(cm).identical() {
        return 1.0;
    }
    (2.0 * mutual_information(cm) / h_sum).clamp(0.0, 1.0)
}

/// Scores every requested measure from one confusion matrix.
pub fn score_confusion(
    cm: &ConfusionMatrix,
    kinds: &[MeasureKind],
) -> Result<Vec<MeasureScore>, MeasureError> {
    let pc = pair_counts(cm);
    kinds
        .iter()
        .map(|&kind| {
            Ok(MeasureScore::from_similarity(
                kind,
                kind.similarity_with(cm, &pc)?,
            ))
        })
        .collect()
}

/// Dissimilarity of `p_prime` with respect to `p` under `kind`.
pub fn dissimilarity(
    kind: MeasureKind,
    p: &Partition,
    p_prime: &Partition,
) -> Result<MeasureScore, MeasureError> {
    let cm = confusion_matrix(p, p_prime)?;
    Ok(MeasureScore::from_similarity(kind, kind.similarity(&cm)?))
}
