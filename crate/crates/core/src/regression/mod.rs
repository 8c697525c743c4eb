//! Dummy-variable regression of dissimilarity scores on the framework
//! parameters, with relative-importance decomposition, pairwise coefficient
//! tests and monotone-trend scans.
//!
//! The model has one block of eleven terms per (transformation, measure)
//! cell: an intercept, the four centered parameters `n, k, q, h` and their
//! six pairwise products. There is no global intercept.

mod design;
mod importance;
mod monotonic;
mod ols;
mod significance;

use std::fmt;
use std::str::FromStr;

pub use design::{build_design_matrix, CellBlock, Centering, Design, DesignSpec};
pub use importance::{
    read_importance, read_trends, relative_importance, standardized_coefficients, write_importance,
    write_trends, ImportanceEntry, ImportanceTable, TrendEntry, IMPORTANCE_HEADER, TREND_HEADER,
};
pub use monotonic::{monotonicity_scan, trend_table, Trend};
pub use ols::{fit_design, fit_ols, ColumnScale, RegressionModel};
pub use significance::{
    coefficient_difference_test, read_significance, significance_table, write_significance, Family,
    SignificanceRow, SIGNIFICANCE_HEADER,
};

use crate::measures::MeasureKind;
use crate::sweep::ScoreRecord;
use crate::transforms::TransformKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegressionError {
    #[error("no observations")]
    Empty,
    #[error(
        "rank-deficient design: column {column} is collinear with earlier columns or constant"
    )]
    RankDeficient { column: String },
    #[error("{n_obs} observations cannot fit {n_coef} coefficients")]
    TooFewObservations { n_obs: usize, n_coef: usize },
    #[error("design has {rows} rows but response has {len} values")]
    DimensionMismatch { rows: usize, len: usize },
    #[error("response has zero variance")]
    ConstantResponse,
    #[error("coefficient index {index} out of range (model has {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("variance of the coefficient difference is not positive ({variance})")]
    NonPositiveVariance { variance: f64 },
    #[error("model was not fitted on a cell design")]
    NoLayout,
    #[error("incomplete grid for {measure}/{transform} along {parameter}: {detail}")]
    IncompleteGrid {
        measure: MeasureKind,
        transform: TransformKind,
        parameter: Parameter,
        detail: String,
    },
    #[error("unknown {what} {value:?}")]
    Unknown { what: &'static str, value: String },
}

/// A term of the per-cell regression block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Intercept,
    N,
    K,
    Q,
    H,
    NK,
    NH,
    NQ,
    KH,
    KQ,
    HQ,
}

impl Term {
    pub const ALL: [Term; 11] = [
        Self::Intercept,
        Self::N,
        Self::K,
        Self::Q,
        Self::H,
        Self::NK,
        Self::NH,
        Self::NQ,
        Self::KH,
        Self::KQ,
        Self::HQ,
    ];

    /// The ten terms drawn as bar segments (everything but the intercept).
    pub const EFFECTS: [Term; 10] = [
        Self::N,
        Self::K,
        Self::Q,
        Self::H,
        Self::NK,
        Self::NH,
        Self::NQ,
        Self::KH,
        Self::KQ,
        Self::HQ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Intercept => "intercept",
            Self::N => "n",
            Self::K => "k",
            Self::Q => "q",
            Self::H => "h",
            Self::NK => "n:k",
            Self::NH => "n:h",
            Self::NQ => "n:q",
            Self::KH => "k:h",
            Self::KQ => "k:q",
            Self::HQ => "h:q",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// The single parameter this term is the main effect of, if any.
    pub fn main_effect(self) -> Option<Parameter> {
        match self {
            Self::N => Some(Parameter::N),
            Self::K => Some(Parameter::K),
            Self::Q => Some(Parameter::Q),
            Self::H => Some(Parameter::H),
            _ => None,
        }
    }

    /// Value of the term for centered parameters `(n, k, h, q)`.
    pub fn evaluate(self, n: f64, k: f64, h: f64, q: f64) -> f64 {
        match self {
            Self::Intercept => 1.0,
            Self::N => n,
            Self::K => k,
            Self::Q => q,
            Self::H => h,
            Self::NK => n * k,
            Self::NH => n * h,
            Self::NQ => n * q,
            Self::KH => k * h,
            Self::KQ => k * q,
            Self::HQ => h * q,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Term {
    type Err = RegressionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| RegressionError::Unknown {
                what: "term",
                value: s.to_string(),
            })
    }
}

/// One of the four quantitative framework parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parameter {
    N,
    K,
    H,
    Q,
}

impl Parameter {
    pub const ALL: [Parameter; 4] = [Self::N, Self::K, Self::H, Self::Q];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::N => "n",
            Self::K => "k",
            Self::H => "h",
            Self::Q => "q",
        }
    }

    pub fn of(self, r: &ScoreRecord) -> f64 {
        match self {
            Self::N => r.n as f64,
            Self::K => r.k as f64,
            Self::H => r.h,
            Self::Q => r.q,
        }
    }

    pub fn term(self) -> Term {
        match self {
            Self::N => Term::N,
            Self::K => Term::K,
            Self::H => Term::H,
            Self::Q => Term::Q,
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Parameter {
    type Err = RegressionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim())
            .ok_or_else(|| RegressionError::Unknown {
                what: "parameter",
                value: s.to_string(),
            })
    }
}
