use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::monotonic::Trend;
use super::ols::{ColumnScale, RegressionModel};
use super::{Parameter, RegressionError, Term};
use crate::measures::MeasureKind;
use crate::numeric::format_sig12;
use crate::sweep::{csv_writer, io_error, parse_field, parse_real, read_table, CsvError};
use crate::transforms::TransformKind;

pub const IMPORTANCE_HEADER: [&str; 7] = [
    "measure",
    "transform",
    "term",
    "beta",
    "beta_std",
    "importance",
    "importance_sqrt",
];
pub const TREND_HEADER: [&str; 4] = ["measure", "transform", "parameter", "trend"];

/// Standardized coefficients. Slopes use `beta * sd(x) / sd(y)`; cell
/// indicators use their between-cell share (see [`ColumnScale`]). On a
/// balanced factorial design the squares sum to R².
pub fn standardized_coefficients(model: &RegressionModel) -> Result<Vec<f64>, RegressionError> {
    if model.y_sd <= 0.0 {
        return Err(RegressionError::ConstantResponse);
    }
    Ok(model
        .coefficients
        .iter()
        .zip(&model.x_sd)
        .zip(&model.scales)
        .map(|((&beta, &sd), scale)| match *scale {
            ColumnScale::Slope => beta * sd / model.y_sd,
            ColumnScale::Indicator { share, deviation } => deviation * share.sqrt() / model.y_sd,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImportanceEntry {
    pub measure: MeasureKind,
    pub transform: TransformKind,
    pub term: Term,
    pub beta: f64,
    pub beta_std: f64,
    /// `beta_std²`.
    pub importance: f64,
    /// `|beta_std|`, the scale the charts draw.
    pub importance_sqrt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrendEntry {
    pub measure: MeasureKind,
    pub transform: TransformKind,
    pub parameter: Parameter,
    pub trend: Trend,
}

/// Per-cell, per-term importances plus the monotone trend of each main
/// effect. Entries are kept sorted by (measure, transform, term).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImportanceTable {
    pub entries: Vec<ImportanceEntry>,
    pub trends: Vec<TrendEntry>,
}

impl ImportanceTable {
    pub fn new(mut entries: Vec<ImportanceEntry>, mut trends: Vec<TrendEntry>) -> Self {
        entries.sort_by_key(|e| (e.measure, e.transform, e.term));
        trends.sort_by_key(|e| (e.measure, e.transform, e.parameter));
        Self { entries, trends }
    }

    pub fn get(
        &self,
        measure: MeasureKind,
        transform: TransformKind,
        term: Term,
    ) -> Option<&ImportanceEntry> {
        self.entries
            .binary_search_by_key(&(measure, transform, term), |e| {
                (e.measure, e.transform, e.term)
            })
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn trend(
        &self,
        measure: MeasureKind,
        transform: TransformKind,
        parameter: Parameter,
    ) -> Option<Trend> {
        self.trends
            .iter()
            .find(|e| (e.measure, e.transform, e.parameter) == (measure, transform, parameter))
            .map(|e| e.trend)
    }

    pub fn measures(&self) -> Vec<MeasureKind> {
        self.entries
            .iter()
            .map(|e| e.measure)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn transforms(&self) -> Vec<TransformKind> {
        self.entries
            .iter()
            .map(|e| e.transform)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Every (measure, transform) cell present, in table order.
    pub fn cells(&self) -> Vec<(MeasureKind, TransformKind)> {
        let mut cells: Vec<_> = self
            .entries
            .iter()
            .map(|e| (e.measure, e.transform))
            .collect();
        cells.dedup();
        cells
    }

    /// Sum of squared standardized coefficients over the non-intercept terms.
    pub fn effect_importance(&self, measure: MeasureKind, transform: TransformKind) -> f64 {
        Term::EFFECTS
            .iter()
            .filter_map(|&t| self.get(measure, transform, t))
            .map(|e| e.importance)
            .sum()
    }
}

/// Importance of every term in every cell of a model fitted on a cell
/// design. Trends are left empty; fill them with
/// [`trend_table`](super::trend_table).
pub fn relative_importance(model: &RegressionModel) -> Result<ImportanceTable, RegressionError> {
    let layout = model.layout.as_ref().ok_or(RegressionError::NoLayout)?;
    let std = standardized_coefficients(model)?;
    let entries = (0..model.column_count())
        .map(|j| {
            let (transform, measure, term) = layout.describe(j);
            ImportanceEntry {
                measure,
                transform,
                term,
                beta: model.coefficients[j],
                beta_std: std[j],
                importance: std[j] * std[j],
                importance_sqrt: std[j].abs(),
            }
        })
        .collect();
    Ok(ImportanceTable::new(entries, Vec::new()))
}

pub fn write_importance<W: Write>(table: &ImportanceTable, out: W) -> Result<(), CsvError> {
    let mut w = csv_writer(out);
    w.write_record(IMPORTANCE_HEADER)?;
    for e in &table.entries {
        w.write_record([
            e.measure.to_string(),
            e.transform.to_string(),
            e.term.to_string(),
            format_sig12(e.beta),
            format_sig12(e.beta_std),
            format_sig12(e.importance),
            format_sig12(e.importance_sqrt),
        ])?;
    }
    w.flush().map_err(|e| CsvError::Write(e.into()))
}

pub fn write_trends<W: Write>(table: &ImportanceTable, out: W) -> Result<(), CsvError> {
    let mut w = csv_writer(out);
    w.write_record(TREND_HEADER)?;
    for e in &table.trends {
        w.write_record([
            e.measure.as_str(),
            e.transform.as_str(),
            e.parameter.as_str(),
            e.trend.as_str(),
        ])?;
    }
    w.flush().map_err(|e| CsvError::Write(e.into()))
}

fn check_unique<K: Ord + Copy>(seen: &mut BTreeSet<K>, key: K, line: u64) -> Result<(), CsvError> {
    if seen.insert(key) {
        Ok(())
    } else {
        Err(CsvError::Invalid {
            line,
            message: "duplicate row for the same key".into(),
        })
    }
}

/// Reads an importance table; trends are left empty.
pub fn read_importance<R: Read>(input: R) -> Result<ImportanceTable, CsvError> {
    let mut seen = BTreeSet::new();
    let mut entries = Vec::new();
    for (line, f) in read_table(input, &IMPORTANCE_HEADER)? {
        let e = ImportanceEntry {
            measure: parse_field(line, "measure", &f[0])?,
            transform: parse_field(line, "transform", &f[1])?,
            term: parse_field(line, "term", &f[2])?,
            beta: parse_real(line, "beta", &f[3])?,
            beta_std: parse_real(line, "beta_std", &f[4])?,
            importance: parse_real(line, "importance", &f[5])?,
            importance_sqrt: parse_real(line, "importance_sqrt", &f[6])?,
        };
        if e.importance < 0.0 || e.importance_sqrt < 0.0 {
            return Err(CsvError::Invalid {
                line,
                message: "importance must be nonnegative".into(),
            });
        }
        check_unique(&mut seen, (e.measure, e.transform, e.term), line)?;
        entries.push(e);
    }
    Ok(ImportanceTable::new(entries, Vec::new()))
}

pub fn read_trends<R: Read>(input: R) -> Result<Vec<TrendEntry>, CsvError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, f) in read_table(input, &TREND_HEADER)? {
        let e = TrendEntry {
            measure: parse_field(line, "measure", &f[0])?,
            transform: parse_field(line, "transform", &f[1])?,
            parameter: parse_field(line, "parameter", &f[2])?,
            trend: parse_field(line, "trend", &f[3])?,
        };
        check_unique(&mut seen, (e.measure, e.transform, e.parameter), line)?;
        out.push(e);
    }
    Ok(out)
}

impl ImportanceTable {
    pub fn write_files(&self, importance: &Path, trends: &Path) -> Result<(), CsvError> {
        write_importance(
            self,
            BufWriter::new(File::create(importance).map_err(io_error(importance))?),
        )?;
        write_trends(
            self,
            BufWriter::new(File::create(trends).map_err(io_error(trends))?),
        )
    }

    /// Reads `importance`, and `trends` when given.
    pub fn read_files(importance: &Path, trends: Option<&Path>) -> Result<Self, CsvError> {
        let table = read_importance(BufReader::new(
            File::open(importance).map_err(io_error(importance))?,
        ))?;
        let trends = match trends {
            Some(path) => read_trends(BufReader::new(File::open(path).map_err(io_error(path))?))?,
            None => Vec::new(),
        };
        Ok(Self::new(table.entries, trends))
    }
}
