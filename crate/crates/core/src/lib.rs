//! Benchmark toolkit for external partition-comparison measures.
//!
//! The pipeline generates reference partitions with controlled cluster-size
//! heterogeneity, perturbs them with deterministic parametric
//! transformations, scores each (reference, transformed) pair with six
//! dissimilarity measures, and explains the resulting scores with a
//! dummy-variable linear regression whose squared standardized
//! coefficients are clustered into a measure typology.
//!
//! Module map:
//!
//! * [`partition`]: partitions, cluster-size generation, confusion matrices, pair counts
//! * [`transforms`]: the five parametric transformations
//! * [`measures`]: RI, ARI, JI, FMI, F-measure and NMI as dissimilarities
//! * [`sweep`]: factorial grid expansion, parallel evaluation, CSV persistence
//! * [`regression`]: design matrix, OLS fit, relative importance, significance, trends
//! * [`typology`]: Hellinger distances, PAM k-medoids, silhouette selection
//! * [`report`]: SVG charts and tables

pub mod measures;
pub mod partition;
pub mod regression;
pub mod report;
pub mod sweep;
pub mod transforms;
pub mod typology;

mod numeric;

pub use measures::{MeasureKind, MeasureScore};
pub use numeric::{format_sig12, round_sig12};
pub use partition::{ClusterSizeSpec, ConfusionMatrix, PairCounts, Partition};
pub use regression::{ImportanceTable, RegressionModel, Term};
pub use sweep::{GridConfig, ScoreRecord};
pub use transforms::{TransformKind, TransformSpec};
pub use typology::{ImportanceProfile, TypologyResult};
