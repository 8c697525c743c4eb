use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::importance::TrendEntry;
use super::{Parameter, RegressionError};
use crate::measures::MeasureKind;
use crate::sweep::ScoreRecord;
use crate::transforms::TransformKind;

/// Differences smaller than this count as ties.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trend {
    Increasing,
    Decreasing,
    None,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Increasing => "increasing",
            Self::Decreasing => "decreasing",
            Self::None => "none",
        }
    }
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Trend {
    type Err = RegressionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "increasing" => Ok(Self::Increasing),
            "decreasing" => Ok(Self::Decreasing),
            "none" => Ok(Self::None),
            other => Err(RegressionError::Unknown {
                what: "trend",
                value: other.to_string(),
            }),
        }
    }
}

/// Whether the score of one cell moves in a single direction along
/// `parameter` at every fixed combination of the other parameters.
/// Nondecreasing everywhere with at least one strict rise is `Increasing`
/// (symmetrically `Decreasing`); anything else, including a flat response,
/// is `None`. The cell's records must form a complete grid.
pub fn monotonicity_scan(
    records: &[ScoreRecord],
    measure: MeasureKind,
    transform: TransformKind,
    parameter: Parameter,
) -> Result<Trend, RegressionError> {
    let incomplete = |detail: String| RegressionError::IncompleteGrid {
        measure,
        transform,
        parameter,
        detail,
    };
    let cell: Vec<&ScoreRecord> = records
        .iter()
        .filter(|r| r.measure == measure && r.transform == transform)
        .collect();
    if cell.is_empty() {
        return Err(incomplete("no records".into()));
    }
    let others: Vec<Parameter> = Parameter::ALL
        .into_iter()
        .filter(|&p| p != parameter)
        .collect();
    let distinct = |p: Parameter| {
        cell.iter()
            .map(|r| p.of(r).to_bits())
            .collect::<BTreeSet<u64>>()
            .len()
    };
    let steps = distinct(parameter);
    let expected_groups: usize = others.iter().map(|&p| distinct(p)).product();

    let mut groups: BTreeMap<[u64; 3], Vec<(f64, f64)>> = BTreeMap::new();
    for r in &cell {
        let key = [
            others[0].of(r).to_bits(),
            others[1].of(r).to_bits(),
            others[2].of(r).to_bits(),
        ];
        groups.entry(key).or_default().push((parameter.of(r), r.y));
    }
    if groups.len() != expected_groups {
        return Err(incomplete(format!(
            "{} of {expected_groups} combinations present",
            groups.len()
        )));
    }

    let (mut rises, mut falls, mut violations_up, mut violations_down) =
        (false, false, false, false);
    for series in groups.values_mut() {
        series.sort_by(|a, b| a.0.total_cmp(&b.0));
        if series.len() != steps || series.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(incomplete(format!(
                "a combination has {} values instead of {steps}",
                series.len()
            )));
        }
        for w in series.windows(2) {
            let d = w[1].1 - w[0].1;
            rises |= d > SLACK;
            falls |= d < -SLACK;
            violations_up |= d < -SLACK;
            violations_down |= d > SLACK;
        }
    }
    Ok(if rises && !violations_up {
        Trend::Increasing
    } else if falls && !violations_down {
        Trend::Decreasing
    } else {
        Trend::None
    })
}

/// Trends of every cell present in `records` along all four parameters.
pub fn trend_table(records: &[ScoreRecord]) -> Result<Vec<TrendEntry>, RegressionError> {
    let cells: BTreeSet<(MeasureKind, TransformKind)> =
        records.iter().map(|r| (r.measure, r.transform)).collect();
    let mut out = Vec::with_capacity(cells.len() * 4);
    for (measure, transform) in cells {
        for parameter in Parameter::ALL {
            let trend = monotonicity_scan(records, measure, transform, parameter)?;
            out.push(TrendEntry {
                measure,
                transform,
                parameter,
                trend,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(f: impl Fn(usize, usize, f64, f64) -> f64) -> Vec<ScoreRecord> {
        let mut out = Vec::new();
        for n in [10, 20] {
            for k in [2, 3, 4] {
                for h in [0.0, 0.5] {
                    for q in [0.1, 0.2, 0.3] {
                        out.push(ScoreRecord {
                            n,
                            k,
                            h,
                            q,
                            transform: TransformKind::Sc,
                            measure: MeasureKind::Rand,
                            y: f(n, k, h, q),
                            out_of_range: false,
                        });
                    }
                }
            }
        }
        out
    }

    fn scan(records: &[ScoreRecord], p: Parameter) -> Result<Trend, RegressionError> {
        monotonicity_scan(records, MeasureKind::Rand, TransformKind::Sc, p)
    }

    #[test]
    fn classifies_directions() {
        let records = grid(|n, k, _, q| q * n as f64 - k as f64);
        assert_eq!(scan(&records, Parameter::Q).unwrap(), Trend::Increasing);
        assert_eq!(scan(&records, Parameter::K).unwrap(), Trend::Decreasing);
        assert_eq!(scan(&records, Parameter::H).unwrap(), Trend::None);
        assert_eq!(scan(&records, Parameter::N).unwrap(), Trend::Increasing);
    }

    #[test]
    fn sign_change_in_one_slice_is_none() {
        let records = grid(|_, k, h, _| if h == 0.0 { k as f64 } else { -(k as f64) });
        assert_eq!(scan(&records, Parameter::K).unwrap(), Trend::None);
    }

    #[test]
    fn ties_within_slack_do_not_break_monotonicity() {
        let records = grid(|_, _, _, q| if q < 0.25 { 0.5 - 1e-12 * q } else { 0.7 });
        assert_eq!(scan(&records, Parameter::Q).unwrap(), Trend::Increasing);
    }

    #[test]
    fn incomplete_grids_are_errors() {
        let mut records = grid(|_, _, _, q| q);
        records.remove(5);
        assert!(matches!(
            scan(&records, Parameter::Q),
            Err(RegressionError::IncompleteGrid { .. })
        ));
        let mut records = grid(|_, _, _, q| q);
        let extra = records[0];
        records.push(extra);
        assert!(matches!(
            scan(&records, Parameter::N),
            Err(RegressionError::IncompleteGrid { .. })
        ));
        assert!(
            monotonicity_scan(&records, MeasureKind::Nmi, TransformKind::Sc, Parameter::N).is_err()
        );
    }

    #[test]
    fn table_covers_every_cell_and_parameter() {
        let table = trend_table(&grid(|_, _, _, q| q)).unwrap();
        assert_eq!(table.len(), 4);
        assert_eq!(
            table
                .iter()
                .find(|e| e.parameter == Parameter::Q)
                .unwrap()
                .trend,
            Trend::Increasing
        );
        assert_eq!("decreasing".parse::<Trend>().unwrap(), Trend::Decreasing);
    }
}
