use nalgebra::{DMatrix, DVector};

use super::design::{Design, DesignSpec};
use super::{RegressionError, Term};

/// Relative tolerance on the QR diagonal below which a column counts as
/// linearly dependent on the columns before it.
const RANK_TOLERANCE: f64 = 1e-10;

/// How a column's coefficient is put on the standardized scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnScale {
    /// `beta * sd(x) / sd(y)`.
    Slope,
    /// A cell indicator: its standardized value is the between-cell share
    /// `deviation * sqrt(share) / sd(y)`, where `deviation` is the cell mean
    /// of y minus the grand mean and `share` the cell's fraction of rows.
    Indicator { share: f64, deviation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub coefficients: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub residuals: DVector<f64>,
    /// Residual variance estimate `SSE / (n_obs - p)`.
    pub sigma2: f64,
    /// `1 - SSE / SST` with SST about the mean of y; 0 when y is constant.
    pub r_squared: f64,
    pub n_obs: usize,
    pub df_residual: usize,
    /// Population standard deviation of each column over all rows.
    pub x_sd: Vec<f64>,
    pub y_sd: f64,
    pub scales: Vec<ColumnScale>,
    pub labels: Vec<String>,
    pub layout: Option<DesignSpec>,
}

impl RegressionModel {
    pub fn column_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn sse(&self) -> f64 {
        self.residuals.norm_squared()
    }
}

struct BlockFit {
    beta: DVector<f64>,
    r_inv: DMatrix<f64>,
    residuals: DVector<f64>,
}

fn solve_block(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    label: impl Fn(usize) -> String,
) -> Result<BlockFit, RegressionError> {
    let (rows, cols) = x.shape();
    if rows < cols {
        return Err(RegressionError::RankDeficient {
            column: label(rows),
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..cols {
        if r[(j, j)].abs() <= RANK_TOLERANCE * x.column(j).norm() {
            return Err(RegressionError::RankDeficient { column: label(j) });
        }
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let head = qty.rows(0, cols).into_owned();
    let beta = r
        .solve_upper_triangular(&head)
        .ok_or_else(|| RegressionError::RankDeficient { column: label(0) })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(cols, cols))
        .ok_or_else(|| RegressionError::RankDeficient { column: label(0) })?;
    let residuals = y - x * &beta;
    Ok(BlockFit {
        beta,
        r_inv,
        residuals,
    })
}

fn population_sd(values: impl Iterator<Item = f64> + Clone, len: usize) -> f64 {
    let mean = values.clone().sum::<f64>() / len as f64;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / len as f64).sqrt()
}

fn summary(y: &DVector<f64>, sse: f64) -> (f64, f64) {
    let mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
    (r_squared, (sst / y.len() as f64).sqrt())
}

/// Ordinary least squares on a dense design via Householder QR. Columns
/// are labelled `x0, x1, ...` and all standardize as slopes.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<RegressionModel, RegressionError> {
    let (rows, cols) = x.shape();
    if rows != y.len() {
        return Err(RegressionError::DimensionMismatch { rows, len: y.len() });
    }
    if rows == 0 {
        return Err(RegressionError::Empty);
    }
    if rows <= cols {
        return Err(RegressionError::TooFewObservations {
            n_obs: rows,
            n_coef: cols,
        });
    }
    let fit = solve_block(x, y, |j| format!("x{j}"))?;
    let df_residual = rows - cols;
    let sse = fit.residuals.norm_squared();
    let sigma2 = sse / df_residual as f64;
    let (r_squared, y_sd) = summary(y, sse);
    Ok(RegressionModel {
        covariance: &fit.r_inv * fit.r_inv.transpose() * sigma2,
        coefficients: fit.beta,
        residuals: fit.residuals,
        sigma2,
        r_squared,
        n_obs: rows,
        df_residual,
        x_sd: (0..cols)
            .map(|j| population_sd(x.column(j).iter().copied(), rows))
            .collect(),
        y_sd,
        scales: vec![ColumnScale::Slope; cols],
        labels: (0..cols).map(|j| format!("x{j}")).collect(),
        layout: None,
    })
}

/// Fits the cell-means design one block at a time. The result equals a
/// dense fit of [`Design::to_dense`] but never materialises it.
pub fn fit_design(design: &Design) -> Result<RegressionModel, RegressionError> {
    let n_obs = design.nrows();
    let p = DesignSpec::TERMS_PER_CELL;
    let cols = design.ncols();
    if n_obs <= cols {
        return Err(RegressionError::TooFewObservations {
            n_obs,
            n_coef: cols,
        });
    }
    let y_mean = design.y.mean();
    let mut coefficients = DVector::zeros(cols);
    let mut covariance = DMatrix::zeros(cols, cols);
    let mut residuals = DVector::zeros(n_obs);
    let mut x_sd = vec![0.0; cols];
    let mut scales = vec![ColumnScale::Slope; cols];

    for (c, block) in design.blocks.iter().enumerate() {
        let y_block =
            DVector::from_iterator(block.rows.len(), block.rows.iter().map(|&i| design.y[i]));
        let fit = solve_block(&block.x, &y_block, |j| design.spec.column_label(c * p + j))?;
        coefficients.rows_mut(c * p, p).copy_from(&fit.beta);
        covariance
            .view_mut((c * p, c * p), (p, p))
            .copy_from(&(&fit.r_inv * fit.r_inv.transpose()));
        for (local, &row) in block.rows.iter().enumerate() {
            residuals[row] = fit.residuals[local];
        }

        let rows_here = block.rows.len() as f64;
        let share = rows_here / n_obs as f64;
        for t in 0..p {
            let column = block.x.column(t);
            if Term::ALL[t] == Term::Intercept {
                x_sd[c * p + t] = (share * (1.0 - share)).sqrt();
                scales[c * p + t] = ColumnScale::Indicator {
                    share,
                    deviation: y_block.mean() - y_mean,
                };
            } else {
                let mean = column.sum() / n_obs as f64;
                let inside: f64 = column.iter().map(|v| (v - mean) * (v - mean)).sum();
                let outside = (n_obs as f64 - rows_here) * mean * mean;
                x_sd[c * p + t] = ((inside + outside) / n_obs as f64).sqrt();
            }
        }
    }

    let df_residual = n_obs - cols;
    let sse = residuals.norm_squared();
    let sigma2 = sse / df_residual as f64;
    let (r_squared, y_sd) = summary(&design.y, sse);
    Ok(RegressionModel {
        coefficients,
        covariance: covariance * sigma2,
        residuals,
        sigma2,
        r_squared,
        n_obs,
        df_residual,
        x_sd,
        y_sd,
        scales,
        labels: (0..cols).map(|j| design.spec.column_label(j)).collect(),
        layout: Some(design.spec.clone()),
    })
}
