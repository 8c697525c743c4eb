use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::ols::RegressionModel;
use super::{RegressionError, Term};
use crate::measures::MeasureKind;
use crate::numeric::format_sig12;
use crate::sweep::{csv_writer, parse_field, parse_real, read_table, CsvError};
use crate::transforms::TransformKind;

pub const SIGNIFICANCE_HEADER: [&str; 7] = [
    "family",
    "fixed_key",
    "param_set",
    "item_a",
    "item_b",
    "p_value",
    "significant",
];

/// Two-sided p-value for `H0: beta_a = beta_b`, using
/// `(b_a - b_b) / sqrt(var_a + var_b - 2 cov_ab)` against Student's t with
/// the model's residual degrees of freedom.
pub fn coefficient_difference_test(
    model: &RegressionModel,
    idx_a: usize,
    idx_b: usize,
) -> Result<f64, RegressionError> {
    let len = model.column_count();
    for index in [idx_a, idx_b] {
        if index >= len {
            return Err(RegressionError::IndexOutOfRange { index, len });
        }
    }
    if idx_a == idx_b {
        return Ok(1.0);
    }
    let cov = &model.covariance;
    let variance = cov[(idx_a, idx_a)] + cov[(idx_b, idx_b)] - 2.0 * cov[(idx_a, idx_b)];
    if variance.is_nan() || variance <= 0.0 {
        return Err(RegressionError::NonPositiveVariance { variance });
    }
    let t = (model.coefficients[idx_a] - model.coefficients[idx_b]) / variance.sqrt();
    let dist = StudentsT::new(0.0, 1.0, model.df_residual as f64).map_err(|_| {
        RegressionError::TooFewObservations {
            n_obs: model.n_obs,
            n_coef: len,
        }
    })?;
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

/// Which coefficient comparisons a significance row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Fixed measure; the compared items are transformations.
    Measure,
    /// Fixed transformation; the compared items are measures.
    Transform,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Measure => "measure",
            Self::Transform => "transform",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = RegressionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "measure" => Ok(Self::Measure),
            "transform" => Ok(Self::Transform),
            other => Err(RegressionError::Unknown {
                what: "family",
                value: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRow {
    pub family: Family,
    pub fixed_key: String,
    pub param_set: Term,
    pub item_a: String,
    pub item_b: String,
    pub p_value: f64,
    pub significant: bool,
}

/// Every pairwise comparison of one term's coefficient: across
/// transformations for each measure, then across measures for each
/// transformation. Pairs are ordered and include the diagonal, so each
/// (family, key, term) block is a full square matrix. No multiple-testing
/// correction is applied.
pub fn significance_table(
    model: &RegressionModel,
    alpha: f64,
) -> Result<Vec<SignificanceRow>, RegressionError> {
    let layout = model.layout.as_ref().ok_or(RegressionError::NoLayout)?;
    let mut measures: Vec<MeasureKind> = layout.cells.iter().map(|c| c.1).collect();
    measures.sort_unstable();
    measures.dedup();
    let mut transforms: Vec<TransformKind> = layout.cells.iter().map(|c| c.0).collect();
    transforms.sort_unstable();
    transforms.dedup();

    let mut rows = Vec::new();
    let mut push = |family,
                    fixed: String,
                    term,
                    a: String,
                    b: String,
                    ia,
                    ib|
     -> Result<(), RegressionError> {
        let p_value = coefficient_difference_test(model, ia, ib)?;
        rows.push(SignificanceRow {
            family,
            fixed_key: fixed,
            param_set: term,
            item_a: a,
            item_b: b,
            p_value,
            significant: p_value <= alpha && ia != ib,
        });
        Ok(())
    };
    for &m in &measures {
        for term in Term::EFFECTS {
            for &ta in &transforms {
                for &tb in &transforms {
                    if let (Some(ia), Some(ib)) =
                        (layout.column(ta, m, term), layout.column(tb, m, term))
                    {
                        push(
                            Family::Measure,
                            m.to_string(),
                            term,
                            ta.to_string(),
                            tb.to_string(),
                            ia,
                            ib,
                        )?;
                    }
                }
            }
        }
    }
    for &t in &transforms {
        for term in Term::EFFECTS {
            for &ma in &measures {
                for &mb in &measures {
                    if let (Some(ia), Some(ib)) =
                        (layout.column(t, ma, term), layout.column(t, mb, term))
                    {
                        push(
                            Family::Transform,
                            t.to_string(),
                            term,
                            ma.to_string(),
                            mb.to_string(),
                            ia,
                            ib,
                        )?;
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_significance<W: Write>(rows: &[SignificanceRow], out: W) -> Result<(), CsvError> {
    let mut w = csv_writer(out);
    w.write_record(SIGNIFICANCE_HEADER)?;
    for r in rows {
        w.write_record([
            r.family.to_string(),
            r.fixed_key.clone(),
            r.param_set.to_string(),
            r.item_a.clone(),
            r.item_b.clone(),
            format_sig12(r.p_value),
            r.significant.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CsvError::Write(e.into()))
}

fn check_kind<T: FromStr>(line: u64, column: &'static str, value: &str) -> Result<(), CsvError> {
    parse_field::<T>(line, column, value).map(|_| ())
}

pub fn read_significance<R: Read>(input: R) -> Result<Vec<SignificanceRow>, CsvError> {
    read_table(input, &SIGNIFICANCE_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let family: Family = parse_field(line, "family", &f[0])?;
            match family {
                Family::Measure => {
                    check_kind::<MeasureKind>(line, "fixed_key", &f[1])?;
                    check_kind::<TransformKind>(line, "item_a", &f[3])?;
                    check_kind::<TransformKind>(line, "item_b", &f[4])?;
                }
                Family::Transform => {
                    check_kind::<TransformKind>(line, "fixed_key", &f[1])?;
                    check_kind::<MeasureKind>(line, "item_a", &f[3])?;
                    check_kind::<MeasureKind>(line, "item_b", &f[4])?;
                }
            }
            let p_value = parse_real(line, "p_value", &f[5])?;
            if !(0.0..=1.0).contains(&p_value) {
                return Err(CsvError::Field {
                    line,
                    column: "p_value",
                    value: f[5].clone(),
                });
            }
            Ok(SignificanceRow {
                family,
                fixed_key: f[1].clone(),
                param_set: parse_field(line, "param_set", &f[2])?,
                item_a: f[3].clone(),
                item_b: f[4].clone(),
                p_value,
                significant: parse_field(line, "significant", &f[6])?,
            })
        })
        .collect()
}
