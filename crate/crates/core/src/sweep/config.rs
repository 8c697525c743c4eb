use serde::Deserialize;

use super::{GridConfig, SweepError};
use crate::measures::MeasureKind;
use crate::transforms::TransformKind;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Grid(#[from] SweepError),
}

/// Key-value run configuration. Grid keys mirror [`GridConfig`]; any key
/// left out falls back to the default grid. The remaining keys feed the
/// command-line front end and are overridden by its flags.
///
/// ```toml
/// n_values = [3240, 4320]
/// k_values = [2, 3]
/// h_values = [0.0, 0.5]
/// q_values = [0.1, 0.2]
/// transforms = ["knc", "sc"]
/// measures = ["RI", "NMI"]
/// workers = 4
/// alpha = 0.05
/// parsimony_margin = 0.05
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_values: Option<Vec<usize>>,
    pub k_values: Option<Vec<usize>>,
    pub h_values: Option<Vec<f64>>,
    pub q_values: Option<Vec<f64>>,
    pub transforms: Option<Vec<TransformKind>>,
    pub measures: Option<Vec<MeasureKind>>,
    pub workers: Option<usize>,
    pub alpha: Option<f64>,
    pub parsimony_margin: Option<f64>,
    pub parsimony: Option<bool>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Grid obtained by overlaying the file's grid keys on `base`.
    pub fn grid_over(&self, base: GridConfig) -> Result<GridConfig, ConfigError> {
        let grid = GridConfig {
            n_values: self.n_values.clone().unwrap_or(base.n_values),
            k_values: self.k_values.clone().unwrap_or(base.k_values),
            h_values: self.h_values.clone().unwrap_or(base.h_values),
            q_values: self.q_values.clone().unwrap_or(base.q_values),
            transforms: self.transforms.clone().unwrap_or(base.transforms),
            measures: self.measures.clone().unwrap_or(base.measures),
        };
        grid.validate()?;
        Ok(grid)
    }
}
