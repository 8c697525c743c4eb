use nalgebra::{DMatrix, DVector};

use super::{RegressionError, Term};
use crate::measures::MeasureKind;
use crate::sweep::ScoreRecord;
use crate::transforms::TransformKind;

/// Means subtracted from the parameters before forming terms. They are
/// taken over the whole table, so every cell shares the same origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centering {
    pub n: f64,
    pub k: f64,
    pub h: f64,
    pub q: f64,
}

impl Centering {
    pub fn of(records: &[ScoreRecord]) -> Self {
        let len = records.len().max(1) as f64;
        let mean = |f: fn(&ScoreRecord) -> f64| records.iter().map(f).sum::<f64>() / len;
        Self {
            n: mean(|r| r.n as f64),
            k: mean(|r| r.k as f64),
            h: mean(|r| r.h),
            q: mean(|r| r.q),
        }
    }

    pub fn term_value(&self, term: Term, r: &ScoreRecord) -> f64 {
        term.evaluate(
            r.n as f64 - self.n,
            r.k as f64 - self.k,
            r.h - self.h,
            r.q - self.q,
        )
    }
}

/// Column layout: cells in (transform, measure) order, eleven terms each.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub cells: Vec<(TransformKind, MeasureKind)>,
    pub centering: Centering,
}

impl DesignSpec {
    pub const TERMS_PER_CELL: usize = Term::ALL.len();

    pub fn column_count(&self) -> usize {
        self.cells.len() * Self::TERMS_PER_CELL
    }

    pub fn cell_index(&self, transform: TransformKind, measure: MeasureKind) -> Option<usize> {
        self.cells.iter().position(|&c| c == (transform, measure))
    }

    pub fn column(
        &self,
        transform: TransformKind,
        measure: MeasureKind,
        term: Term,
    ) -> Option<usize> {
        self.cell_index(transform, measure)
            .map(|c| c * Self::TERMS_PER_CELL + term.index())
    }

    /// `(transform, measure, term)` of column `j`.
    pub fn describe(&self, j: usize) -> (TransformKind, MeasureKind, Term) {
        let (t, m) = self.cells[j / Self::TERMS_PER_CELL];
        (t, m, Term::ALL[j % Self::TERMS_PER_CELL])
    }

    pub fn column_label(&self, j: usize) -> String {
        let (t, m, term) = self.describe(j);
        format!("{t}/{m}/{term}")
    }
}

/// The rows of one cell and its eleven nonzero columns. Every other column
/// of the full design is zero on these rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CellBlock {
    pub rows: Vec<usize>,
    pub x: DMatrix<f64>,
}

/// Block-diagonal cell-means design. Rows follow canonical record order.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub spec: DesignSpec,
    pub blocks: Vec<CellBlock>,
    pub y: DVector<f64>,
}

impl Design {
    pub fn nrows(&self) -> usize {
        self.y.len()
    }

    pub fn ncols(&self) -> usize {
        self.spec.column_count()
    }

    /// The full design as a dense matrix. Only sensible for small tables.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let p = DesignSpec::TERMS_PER_CELL;
        let mut x = DMatrix::zeros(self.nrows(), self.ncols());
        for (c, block) in self.blocks.iter().enumerate() {
            for (local, &row) in block.rows.iter().enumerate() {
                for t in 0..p {
                    x[(row, c * p + t)] = block.x[(local, t)];
                }
            }
        }
        x
    }
}

/// Builds the cell-means design over `records`. Records are put in
/// canonical order first, so the result does not depend on input order.
pub fn build_design_matrix(records: &[ScoreRecord]) -> Result<Design, RegressionError> {
    if records.is_empty() {
        return Err(RegressionError::Empty);
    }
    let mut sorted = records.to_vec();
    sorted.sort_by(ScoreRecord::canonical_cmp);
    let centering = Centering::of(&sorted);

    let mut cells: Vec<(TransformKind, MeasureKind)> =
        sorted.iter().map(|r| (r.transform, r.measure)).collect();
    cells.sort_unstable();
    cells.dedup();
    let spec = DesignSpec { cells, centering };

    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); spec.cells.len()];
    for (i, r) in sorted.iter().enumerate() {
        let c = spec
            .cell_index(r.transform, r.measure)
            .expect("cell collected above");
        rows_of[c].push(i);
    }
    let blocks = rows_of
        .into_iter()
        .map(|rows| {
            let x = DMatrix::from_fn(rows.len(), DesignSpec::TERMS_PER_CELL, |i, t| {
                centering.term_value(Term::ALL[t], &sorted[rows[i]])
            });
            CellBlock { rows, x }
        })
        .collect();
    let y = DVector::from_iterator(sorted.len(), sorted.iter().map(|r| r.y));
    Ok(Design { spec, blocks, y })
}
