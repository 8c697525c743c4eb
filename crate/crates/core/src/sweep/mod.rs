//! Factorial parameter sweep: reference partition → transformation →
//! scoring, for every point of a [`GridConfig`].

mod config;
mod records;

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::measures::{score_confusion, MeasureError, MeasureKind, MeasureScore};
use crate::partition::{
    build_reference_partition, cluster_sizes, confusion_matrix, pair_counts, PairCounts,
    PartitionError,
};
use crate::transforms::{
    apply_transform_admitting_full, TransformError, TransformKind, TransformSpec,
};

pub use config::{ConfigError, ConfigFile};
pub(crate) use records::{csv_writer, io_error, parse_field, parse_real, read_table};
pub use records::{read_csv, read_records, write_csv, write_records, CsvError, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("grid list `{0}` is empty")]
    EmptyList(&'static str),
    #[error("grid list `{list}` has invalid value {value}: {reason}")]
    InvalidValue {
        list: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("grid list `{list}` repeats value {value}")]
    Duplicate { list: &'static str, value: String },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Lists of parameter values whose cross product defines the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub h_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub transforms: Vec<TransformKind>,
    pub measures: Vec<MeasureKind>,
}

/// n from 3,240 to 12,960 by 1,080; k from 2 to 11; h from 0 to 0.9 and q
/// from 0.1 to 1 by tenths; all five transformations and all six measures.
pub fn default_grid() -> GridConfig {
    GridConfig {
        n_values: (0..10).map(|i| 3240 + 1080 * i).collect(),
        k_values: (2..=11).collect(),
        h_values: (0..10).map(|i| i as f64 / 10.0).collect(),
        q_values: (1..=10).map(|i| i as f64 / 10.0).collect(),
        transforms: TransformKind::ALL.to_vec(),
        measures: MeasureKind::ALL.to_vec(),
    }
}

fn check_list<T: PartialEq + std::fmt::Display>(
    list: &'static str,
    values: &[T],
    valid: impl Fn(&T) -> Result<(), &'static str>,
) -> Result<(), SweepError> {
    if values.is_empty() {
        return Err(SweepError::EmptyList(list));
    }
    for (i, v) in values.iter().enumerate() {
        valid(v).map_err(|reason| SweepError::InvalidValue {
            list,
            value: v.to_string(),
            reason,
        })?;
        if values[..i].contains(v) {
            return Err(SweepError::Duplicate {
                list,
                value: v.to_string(),
            });
        }
    }
    Ok(())
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        check_list("n_values", &self.n_values, |&n| {
            if n >= 1 {
                Ok(())
            } else {
                Err("n must be >= 1")
            }
        })?;
        check_list("k_values", &self.k_values, |&k| {
            if k >= 1 {
                Ok(())
            } else {
                Err("k must be >= 1")
            }
        })?;
        let unit = |x: &f64| {
            if (0.0..=1.0).contains(x) {
                Ok(())
            } else {
                Err("must lie in [0, 1]")
            }
        };
        check_list("h_values", &self.h_values, unit)?;
        check_list("q_values", &self.q_values, unit)?;
        check_list("transforms", &self.transforms, |_| Ok(()))?;
        check_list("measures", &self.measures, |_| Ok(()))?;
        Ok(())
    }

    /// Number of (reference, transformed) pairs the grid evaluates.
    pub fn pair_count(&self) -> usize {
        self.n_values.len()
            * self.k_values.len()
            * self.h_values.len()
            * self.q_values.len()
            * self.transforms.len()
    }

    /// All grid points in canonical (n, k, h, q, t) order.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut points = Vec::with_capacity(self.pair_count());
        for &n in &self.n_values {
            for &k in &self.k_values {
                for &h in &self.h_values {
                    for &q in &self.q_values {
                        for &transform in &self.transforms {
                            points.push(GridPoint {
                                n,
                                k,
                                h,
                                q,
                                transform,
                            });
                        }
                    }
                }
            }
        }
        points.sort_by(GridPoint::canonical_cmp);
        points
    }
}

/// One (n, k, h, q, t) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub k: usize,
    pub h: f64,
    pub q: f64,
    pub transform: TransformKind,
}

impl GridPoint {
    pub fn canonical_cmp(a: &Self, b: &Self) -> Ordering {
        a.n.cmp(&b.n)
            .then(a.k.cmp(&b.k))
            .then(a.h.total_cmp(&b.h))
            .then(a.q.total_cmp(&b.q))
            .then(a.transform.cmp(&b.transform))
    }
}

/// One scored observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRecord {
    pub n: usize,
    pub k: usize,
    pub h: f64,
    pub q: f64,
    pub transform: TransformKind,
    pub measure: MeasureKind,
    pub y: f64,
    pub out_of_range: bool,
}

impl ScoreRecord {
    pub fn canonical_cmp(a: &Self, b: &Self) -> Ordering {
        a.n.cmp(&b.n)
            .then(a.k.cmp(&b.k))
            .then(a.h.total_cmp(&b.h))
            .then(a.q.total_cmp(&b.q))
            .then(a.transform.cmp(&b.transform))
            .then(a.measure.cmp(&b.measure))
    }
}

/// Everything computed for one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEvaluation {
    pub point: GridPoint,
    pub reference_clusters: usize,
    pub transformed_clusters: usize,
    pub pair_counts: PairCounts,
    pub scores: Vec<MeasureScore>,
}

/// Generates, transforms and scores a single grid point.
pub fn evaluate_point(
    point: GridPoint,
    measures: &[MeasureKind],
) -> Result<PairEvaluation, SweepError> {
    let sizes = cluster_sizes(point.n, point.k, point.h)?;
    let reference = build_reference_partition(&sizes)?;
    let spec = TransformSpec::new(point.transform, point.q)?;
    let transformed = apply_transform_admitting_full(&reference, &spec)?;
    let cm = confusion_matrix(&reference, &transformed)?;
    Ok(PairEvaluation {
        point,
        reference_clusters: reference.cluster_count(),
        transformed_clusters: transformed.cluster_count(),
        pair_counts: pair_counts(&cm),
        scores: score_confusion(&cm, measures)?,
    })
}

/// A grid point that could not be evaluated; excluded from the records.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub point: GridPoint,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutcome {
    pub records: Vec<ScoreRecord>,
    pub failures: Vec<SweepFailure>,
}

/// Evaluates every grid point on `workers` threads (0 picks the available
/// parallelism). The output order is canonical and does not depend on the
/// worker count.
pub fn run_sweep(config: &GridConfig, workers: usize) -> Result<SweepOutcome, SweepError> {
    config.validate()?;
    let points = config.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let evaluated: Vec<Result<PairEvaluation, SweepFailure>> = pool.install(|| {
        points
            .par_iter()
            .map(|&point| {
                evaluate_point(point, &config.measures).map_err(|e| SweepFailure {
                    point,
                    message: e.to_string(),
                })
            })
            .collect()
    });

    let mut outcome = SweepOutcome::default();
    for result in evaluated {
        match result {
            Ok(eval) => outcome
                .records
                .extend(eval.scores.iter().map(|s| ScoreRecord {
                    n: eval.point.n,
                    k: eval.point.k,
                    h: eval.point.h,
                    q: eval.point.q,
                    transform: eval.point.transform,
                    measure: s.kind,
                    y: s.dissimilarity,
                    out_of_range: s.out_of_range,
                })),
            Err(failure) => outcome.failures.push(failure),
        }
    }
    outcome.records.sort_by(ScoreRecord::canonical_cmp);
    Ok(outcome)
}
