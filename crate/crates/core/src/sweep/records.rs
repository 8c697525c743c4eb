use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::ScoreRecord;
use crate::numeric::format_sig12;

pub const CSV_HEADER: [&str; 8] = [
    "n",
    "k",
    "h",
    "q",
    "transform",
    "measure",
    "y",
    "out_of_range",
];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Syntax { line: u64, source: csv::Error },
    #[error("write failed: {0}")]
    Write(#[from] csv::Error),
    #[error("missing header")]
    MissingHeader,
    #[error("header is missing column `{column}`")]
    MissingColumn { column: &'static str },
    #[error("header has unexpected column `{column}`")]
    UnexpectedColumn { column: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: column `{column}`: cannot parse {value:?}")]
    Field {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("line {line}: {message}")]
    Invalid { line: u64, message: String },
}

pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CsvError + '_ {
    move |source| CsvError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes records with the fixed header; reals carry 12 significant digits.
pub fn write_records<W: Write>(records: &[ScoreRecord], out: W) -> Result<(), CsvError> {
    let mut w = csv_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            format_sig12(r.h),
            format_sig12(r.q),
            r.transform.to_string(),
            r.measure.to_string(),
            format_sig12(r.y),
            r.out_of_range.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CsvError::Write(e.into()))
}

pub fn write_csv(records: &[ScoreRecord], path: &Path) -> Result<(), CsvError> {
    let file = File::create(path).map_err(io_error(path))?;
    write_records(records, BufWriter::new(file))
}

/// Reads a CSV table whose header must list exactly `columns` (in any
/// order). Rows are returned reordered to match `columns`, with their
/// 1-based line numbers.
pub(crate) fn read_table<R: Read>(
    input: R,
    columns: &'static [&'static str],
) -> Result<Vec<(u64, Vec<String>)>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows = reader.records();
    let header = match rows.next() {
        None => return Err(CsvError::MissingHeader),
        Some(h) => h.map_err(|source| CsvError::Syntax { line: 1, source })?,
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if let Some(extra) = names.iter().find(|n| !columns.contains(n)) {
        return Err(CsvError::UnexpectedColumn {
            column: extra.to_string(),
        });
    }
    let mut order = Vec::with_capacity(columns.len());
    for &column in columns {
        let pos = names
            .iter()
            .position(|n| *n == column)
            .ok_or(CsvError::MissingColumn { column })?;
        order.push(pos);
    }
    if names.len() != columns.len() {
        let dup = names
            .iter()
            .find(|n| names.iter().filter(|m| m == n).count() > 1)
            .unwrap_or(&"");
        return Err(CsvError::UnexpectedColumn {
            column: dup.to_string(),
        });
    }

    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|source| {
            let line = source.position().map_or(0, |p| p.line());
            CsvError::Syntax { line, source }
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != columns.len() {
            return Err(CsvError::FieldCount {
                line,
                expected: columns.len(),
                found: row.len(),
            });
        }
        out.push((
            line,
            order.iter().map(|&i| row[i].trim().to_string()).collect(),
        ));
    }
    Ok(out)
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    line: u64,
    column: &'static str,
    value: &str,
) -> Result<T, CsvError> {
    value.parse().map_err(|_| CsvError::Field {
        line,
        column,
        value: value.to_string(),
    })
}

pub(crate) fn parse_real(line: u64, column: &'static str, value: &str) -> Result<f64, CsvError> {
    let x: f64 = parse_field(line, column, value)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CsvError::Field {
            line,
            column,
            value: value.to_string(),
        })
    }
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ScoreRecord>, CsvError> {
    read_table(input, &CSV_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(ScoreRecord {
                n: parse_field(line, "n", &f[0])?,
                k: parse_field(line, "k", &f[1])?,
                h: parse_real(line, "h", &f[2])?,
                q: parse_real(line, "q", &f[3])?,
                transform: parse_field(line, "transform", &f[4])?,
                measure: parse_field(line, "measure", &f[5])?,
                y: parse_real(line, "y", &f[6])?,
                out_of_range: parse_field(line, "out_of_range", &f[7])?,
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ScoreRecord>, CsvError> {
    let file = File::open(path).map_err(io_error(path))?;
    read_records(std::io::BufReader::new(file))
}
