//! Typology of importance profiles: each (measure, transform) cell becomes a
//! probability vector over regression terms, profiles are compared with the
//! Hellinger distance and grouped by PAM k-medoids, and the number of
//! groups is picked by silhouette.

use std::io::{Read, Write};

use crate::measures::MeasureKind;
use crate::numeric::format_sig12;
use crate::regression::{ImportanceTable, Term};
use crate::sweep::{csv_writer, parse_field, parse_real, read_table, CsvError};
use crate::transforms::TransformKind;

pub const TYPOLOGY_HEADER: [&str; 4] = ["measure", "transform", "cluster_id", "is_medoid"];
pub const SILHOUETTE_HEADER: [&str; 2] = ["k", "silhouette"];

/// Terms whose squared weights make up a profile: the ten segments of a
/// stacked importance bar. Cell intercepts only set a cell's score level,
/// so they are left out.
pub const PROFILE_TERMS: [Term; 10] = Term::EFFECTS;

/// Improvements smaller than this do not count when swapping medoids.
const SWAP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TypologyError {
    #[error("vectors have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("cell {measure}/{transform} has no importance on the profile terms")]
    ZeroCell {
        measure: MeasureKind,
        transform: TransformKind,
    },
    #[error("cell {measure}/{transform} lacks term {term}")]
    MissingTerm {
        measure: MeasureKind,
        transform: TransformKind,
        term: Term,
    },
    #[error("distance matrix is not square")]
    NotSquare,
    #[error("k = {k} is out of range for {points} points (need 2 <= k < points)")]
    InvalidK { k: usize, points: usize },
    #[error("assignment has {len} labels for {points} points")]
    AssignmentLength { len: usize, points: usize },
    #[error("silhouette needs at least two clusters")]
    SingleCluster,
    #[error("need at least 3 profiles, got {0}")]
    TooFewProfiles(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceProfile {
    pub measure: MeasureKind,
    pub transform: TransformKind,
    /// One share per entry of [`PROFILE_TERMS`], summing to 1.
    pub proportions: Vec<f64>,
}

/// L1-normalized squared standardized coefficients of every cell, in table
/// order (measure, then transform).
pub fn importance_profiles(
    table: &ImportanceTable,
) -> Result<Vec<ImportanceProfile>, TypologyError> {
    table
        .cells()
        .into_iter()
        .map(|(measure, transform)| {
            let raw = PROFILE_TERMS
                .iter()
                .map(|&term| {
                    table
                        .get(measure, transform, term)
                        .map(|e| e.importance)
                        .ok_or(TypologyError::MissingTerm {
                            measure,
                            transform,
                            term,
                        })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let total: f64 = raw.iter().sum();
            if total.is_nan() || total <= 0.0 {
                return Err(TypologyError::ZeroCell { measure, transform });
            }
            Ok(ImportanceProfile {
                measure,
                transform,
                proportions: raw.iter().map(|v| v / total).collect(),
            })
        })
        .collect()
}

/// `(1/√2) · ‖√a − √b‖₂`, in [0, 1] for probability vectors.
pub fn hellinger(a: &[f64], b: &[f64]) -> Result<f64, TypologyError> {
    if a.len() != b.len() {
        return Err(TypologyError::LengthMismatch(a.len(), b.len()));
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
        .sum();
    Ok((sum / 2.0).sqrt())
}

pub fn distance_matrix(profiles: &[ImportanceProfile]) -> Result<Vec<Vec<f64>>, TypologyError> {
    profiles
        .iter()
        .map(|a| {
            profiles
                .iter()
                .map(|b| hellinger(&a.proportions, &b.proportions))
                .collect()
        })
        .collect()
}

/// A k-medoids solution. Cluster `c` is the one around `medoids[c]`;
/// medoids are listed by ascending point index.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub medoids: Vec<usize>,
    pub assignment: Vec<usize>,
    /// Sum of distances from each point to its medoid.
    pub cost: f64,
    /// Cost after BUILD and after every accepted swap.
    pub cost_trace: Vec<f64>,
}

fn check_square(d: &[Vec<f64>]) -> Result<(), TypologyError> {
    if d.iter().all(|row| row.len() == d.len()) {
        Ok(())
    } else {
        Err(TypologyError::NotSquare)
    }
}

fn total_cost(d: &[Vec<f64>], medoids: &[usize]) -> f64 {
    d.iter()
        .map(|row| {
            medoids
                .iter()
                .map(|&m| row[m])
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn assign(d: &[Vec<f64>], medoids: &[usize]) -> Vec<usize> {
    (0..d.len())
        .map(|i| {
            if let Some(own) = medoids.iter().position(|&m| m == i) {
                return own;
            }
            let mut best = 0;
            for c in 1..medoids.len() {
                if d[i][medoids[c]] < d[i][medoids[best]] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// PAM: greedy BUILD (ties to the lowest index) then best-improvement SWAP
/// until no swap lowers the cost. Points go to their nearest medoid, ties
/// to the lowest cluster id.
pub fn k_medoids(d: &[Vec<f64>], k: usize) -> Result<Clustering, TypologyError> {
    check_square(d)?;
    let points = d.len();
    if k < 2 || k >= points {
        return Err(TypologyError::InvalidK { k, points });
    }

    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    while medoids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        let free: Vec<usize> = (0..points).filter(|i| !medoids.contains(i)).collect();
        for i in free {
            medoids.push(i);
            let cost = total_cost(d, &medoids);
            medoids.pop();
            if best.is_none_or(|(_, b)| cost < b - SWAP_EPS) {
                best = Some((i, cost));
            }
        }
        medoids.push(best.expect("k < points leaves a candidate").0);
    }

    let mut cost = total_cost(d, &medoids);
    let mut cost_trace = vec![cost];
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        let free: Vec<usize> = (0..points).filter(|o| !medoids.contains(o)).collect();
        for slot in 0..k {
            for &o in &free {
                let old = std::mem::replace(&mut medoids[slot], o);
                let trial = total_cost(d, &medoids);
                medoids[slot] = old;
                if trial < cost - SWAP_EPS && best.is_none_or(|(_, _, b)| trial < b - SWAP_EPS) {
                    best = Some((slot, o, trial));
                }
            }
        }
        match best {
            Some((slot, o, trial)) => {
                medoids[slot] = o;
                cost = trial;
                cost_trace.push(cost);
            }
            None => break,
        }
    }

    medoids.sort_unstable();
    let assignment = assign(d, &medoids);
    Ok(Clustering {
        medoids,
        assignment,
        cost,
        cost_trace,
    })
}

/// Mean silhouette width. Singleton clusters, and points whose `a` and `b`
/// are both 0, contribute 0.
pub fn silhouette(d: &[Vec<f64>], assignment: &[usize]) -> Result<f64, TypologyError> {
    check_square(d)?;
    let points = d.len();
    if assignment.len() != points {
        return Err(TypologyError::AssignmentLength {
            len: assignment.len(),
            points,
        });
    }
    let clusters = assignment.iter().max().map_or(0, |m| m + 1);
    let sizes: Vec<usize> = (0..clusters)
        .map(|c| assignment.iter().filter(|&&a| a == c).count())
        .collect();
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(TypologyError::SingleCluster);
    }
    let mut total = 0.0;
    for i in 0..points {
        let own = assignment[i];
        if sizes[own] == 1 {
            continue;
        }
        let mut sums = vec![0.0; clusters];
        for j in (0..points).filter(|&j| j != i) {
            sums[assignment[j]] += d[i][j];
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..clusters)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let scale = a.max(b);
        if scale > 0.0 {
            total += (b - a) / scale;
        }
    }
    Ok(total / points as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub k: usize,
    pub clustering: Clustering,
    pub silhouette: f64,
}

/// How the number of clusters is chosen from the silhouette curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Highest silhouette; ties go to the smaller k.
    MaxSilhouette,
    /// Smallest k whose silhouette is within `margin` of the maximum.
    Parsimony { margin: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypologyResult {
    pub keys: Vec<(MeasureKind, TransformKind)>,
    pub distance: Vec<Vec<f64>>,
    pub candidates: Vec<Candidate>,
    pub chosen_k: usize,
}

/// One row of the exported typology table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypologyRow {
    pub measure: MeasureKind,
    pub transform: TransformKind,
    pub cluster_id: usize,
    pub is_medoid: bool,
}

impl TypologyResult {
    pub fn candidate(&self, k: usize) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.k == k)
    }

    pub fn chosen(&self) -> &Candidate {
        self.candidate(self.chosen_k)
            .expect("chosen k is a candidate")
    }

    pub fn medoid_keys(&self) -> Vec<(MeasureKind, TransformKind)> {
        self.chosen()
            .clustering
            .medoids
            .iter()
            .map(|&m| self.keys[m])
            .collect()
    }

    /// Rows of the solution with `k` clusters, in profile order.
    pub fn rows(&self, k: usize) -> Option<Vec<TypologyRow>> {
        let c = &self.candidate(k)?.clustering;
        Some(
            self.keys
                .iter()
                .enumerate()
                .map(|(i, &(measure, transform))| TypologyRow {
                    measure,
                    transform,
                    cluster_id: c.assignment[i],
                    is_medoid: c.medoids.contains(&i),
                })
                .collect(),
        )
    }
}

/// Clusters the profiles for every k from 2 to `min(10, count - 1)` and
/// picks one according to `selection`.
pub fn select_typology(
    profiles: &[ImportanceProfile],
    selection: Selection,
) -> Result<TypologyResult, TypologyError> {
    if profiles.len() < 3 {
        return Err(TypologyError::TooFewProfiles(profiles.len()));
    }
    let distance = distance_matrix(profiles)?;
    let candidates = (2..=10.min(profiles.len() - 1))
        .map(|k| {
            let clustering = k_medoids(&distance, k)?;
            let silhouette = silhouette(&distance, &clustering.assignment)?;
            Ok(Candidate {
                k,
                clustering,
                silhouette,
            })
        })
        .collect::<Result<Vec<_>, TypologyError>>()?;
    let best = candidates
        .iter()
        .map(|c| c.silhouette)
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen_k = match selection {
        Selection::MaxSilhouette => candidates.iter().find(|c| c.silhouette == best),
        Selection::Parsimony { margin } => {
            candidates.iter().find(|c| c.silhouette >= best - margin)
        }
    }
    .expect("at least one candidate")
    .k;
    Ok(TypologyResult {
        keys: profiles.iter().map(|p| (p.measure, p.transform)).collect(),
        distance,
        candidates,
        chosen_k,
    })
}

pub fn write_typology<W: Write>(rows: &[TypologyRow], out: W) -> Result<(), CsvError> {
    let mut w = csv_writer(out);
    w.write_record(TYPOLOGY_HEADER)?;
    for r in rows {
        w.write_record([
            r.measure.to_string(),
            r.transform.to_string(),
            r.cluster_id.to_string(),
            r.is_medoid.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CsvError::Write(e.into()))
}

pub fn read_typology<R: Read>(input: R) -> Result<Vec<TypologyRow>, CsvError> {
    let mut seen = std::collections::BTreeSet::new();
    read_table(input, &TYPOLOGY_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let row = TypologyRow {
                measure: parse_field(line, "measure", &f[0])?,
                transform: parse_field(line, "transform", &f[1])?,
                cluster_id: parse_field(line, "cluster_id", &f[2])?,
                is_medoid: parse_field(line, "is_medoid", &f[3])?,
            };
            if !seen.insert((row.measure, row.transform)) {
                return Err(CsvError::Invalid {
                    line,
                    message: "duplicate row for the same key".into(),
                });
            }
            Ok(row)
        })
        .collect()
}

pub fn write_silhouettes<W: Write>(result: &TypologyResult, out: W) -> Result<(), CsvError> {
    let mut w = csv_writer(out);
    w.write_record(SILHOUETTE_HEADER)?;
    for c in &result.candidates {
        w.write_record([c.k.to_string(), format_sig12(c.silhouette)])?;
    }
    w.flush().map_err(|e| CsvError::Write(e.into()))
}

pub fn read_silhouettes<R: Read>(input: R) -> Result<Vec<(usize, f64)>, CsvError> {
    read_table(input, &SILHOUETTE_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let s = parse_real(line, "silhouette", &f[1])?;
            if !(-1.0..=1.0).contains(&s) {
                return Err(CsvError::Field {
                    line,
                    column: "silhouette",
                    value: f[1].clone(),
                });
            }
            Ok((parse_field(line, "k", &f[0])?, s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::ImportanceEntry;
    use proptest::prelude::*;

    fn euclid(points: &[(f64, f64)]) -> Vec<Vec<f64>> {
        points
            .iter()
            .map(|a| {
                points
                    .iter()
                    .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                    .collect()
            })
            .collect()
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        (0..n)
            .flat_map(|last| {
                combinations(last, k - 1).into_iter().map(move |mut c| {
                    c.push(last);
                    c
                })
            })
            .collect()
    }

    fn brute_force_cost(d: &[Vec<f64>], k: usize) -> f64 {
        combinations(d.len(), k)
            .iter()
            .map(|m| total_cost(d, m))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn hellinger_examples() {
        assert_eq!(hellinger(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((hellinger(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let expected = ((1.0 - 0.5f64.sqrt()).powi(2) + 0.5) / 2.0;
        let h = hellinger(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((h - expected.sqrt()).abs() < 1e-15);
        assert!((h - 0.54120).abs() < 1e-5);
        assert_eq!(
            hellinger(&[1.0], &[0.5, 0.5]).unwrap_err(),
            TypologyError::LengthMismatch(1, 2)
        );
    }

    #[test]
    fn two_tight_pairs() {
        let d = euclid(&[(0.0, 0.0), (0.1, 0.0), (5.0, 5.0), (5.0, 5.1)]);
        let c = k_medoids(&d, 2).unwrap();
        assert_eq!(c.assignment[0], c.assignment[1]);
        assert_eq!(c.assignment[2], c.assignment[3]);
        assert_ne!(c.assignment[0], c.assignment[2]);
        assert!((c.cost - brute_force_cost(&d, 2)).abs() < 1e-12);
        assert!(silhouette(&d, &c.assignment).unwrap() > 0.9);
        assert_eq!(k_medoids(&d, 2).unwrap(), c);
    }

    #[test]
    fn k_one_below_points_leaves_one_pair() {
        let d = euclid(&[(0.0, 0.0), (3.0, 0.0), (0.0, 7.0), (9.0, 9.0), (3.2, 0.1)]);
        let c = k_medoids(&d, 4).unwrap();
        let mut sizes = vec![0; 4];
        c.assignment.iter().for_each(|&a| sizes[a] += 1);
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 2]);
        assert_eq!(c.assignment[1], c.assignment[4]);
        assert!((c.cost - brute_force_cost(&d, 4)).abs() < 1e-12);
        assert!(matches!(
            k_medoids(&d, 5),
            Err(TypologyError::InvalidK { .. })
        ));
        assert!(matches!(
            k_medoids(&d, 1),
            Err(TypologyError::InvalidK { .. })
        ));
    }

    #[test]
    fn silhouette_degenerate_cases() {
        let d = vec![vec![0.0; 4]; 4];
        assert_eq!(silhouette(&d, &[0, 0, 1, 1]).unwrap(), 0.0);
        assert_eq!(
            silhouette(&d, &[0, 0, 0, 0]).unwrap_err(),
            TypologyError::SingleCluster
        );
        let d = euclid(&[(0.0, 0.0), (1.0, 0.0), (5.0, 0.0)]);
        // Point 2 is a singleton; points 0 and 1 have a = 1, b = 5 and 4.
        let s = silhouette(&d, &[0, 0, 1]).unwrap();
        assert!((s - (0.8 + 0.75) / 3.0).abs() < 1e-15);
    }

    fn profile(measure: MeasureKind, transform: TransformKind, p: Vec<f64>) -> ImportanceProfile {
        ImportanceProfile {
            measure,
            transform,
            proportions: p,
        }
    }

    #[test]
    fn two_groups_of_identical_profiles_choose_two() {
        let a = vec![0.9, 0.1];
        let b = vec![0.2, 0.8];
        let profiles: Vec<ImportanceProfile> = TransformKind::ALL[..3]
            .iter()
            .flat_map(|&t| {
                [
                    profile(MeasureKind::Rand, t, a.clone()),
                    profile(MeasureKind::Nmi, t, b.clone()),
                ]
            })
            .collect();
        let result = select_typology(&profiles, Selection::MaxSilhouette).unwrap();
        assert_eq!(result.chosen_k, 2);
        assert_eq!(result.candidates.len(), 4);
        assert!((result.chosen().silhouette - 1.0).abs() < 1e-12);
        let parsimonious =
            select_typology(&profiles, Selection::Parsimony { margin: 0.05 }).unwrap();
        assert_eq!(parsimonious.chosen_k, 2);
        assert!(matches!(
            select_typology(&profiles[..2], Selection::MaxSilhouette),
            Err(TypologyError::TooFewProfiles(2))
        ));
    }

    fn table_with(cells: &[(MeasureKind, TransformKind, [f64; 11])]) -> ImportanceTable {
        let entries = cells
            .iter()
            .flat_map(|&(measure, transform, values)| {
                Term::ALL
                    .into_iter()
                    .zip(values)
                    .map(move |(term, v)| ImportanceEntry {
                        measure,
                        transform,
                        term,
                        beta: v.sqrt(),
                        beta_std: v.sqrt(),
                        importance: v,
                        importance_sqrt: v.sqrt(),
                    })
            })
            .collect();
        ImportanceTable::new(entries, Vec::new())
    }

    #[test]
    fn profiles_normalize_squared_weights() {
        let mut dominated = [0.5; 11];
        dominated[1..].fill(0.1 / 9.0);
        dominated[Term::Q.index()] = 0.9;
        let table = table_with(&[
            (MeasureKind::Rand, TransformKind::Sc, [0.2; 11]),
            (MeasureKind::Rand, TransformKind::Oc, dominated),
        ]);
        let p = importance_profiles(&table).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p[0].proportions.iter().all(|&v| (v - 0.1).abs() < 1e-15));
        let q = PROFILE_TERMS.iter().position(|&t| t == Term::Q).unwrap();
        assert!((p[1].proportions[q] - 0.9).abs() < 1e-12);
        assert!((p[1].proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut zero = [0.0; 11];
        zero[Term::Intercept.index()] = 0.7;
        let zero = table_with(&[(MeasureKind::Jaccard, TransformKind::Knc, zero)]);
        assert_eq!(
            importance_profiles(&zero).unwrap_err(),
            TypologyError::ZeroCell {
                measure: MeasureKind::Jaccard,
                transform: TransformKind::Knc
            }
        );
    }

    #[test]
    fn csv_round_trip() {
        let profiles: Vec<ImportanceProfile> = TransformKind::ALL
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                profile(
                    MeasureKind::FMeasure,
                    t,
                    vec![i as f64 / 4.0, 1.0 - i as f64 / 4.0],
                )
            })
            .collect();
        let result = select_typology(&profiles, Selection::MaxSilhouette).unwrap();
        let rows = result.rows(result.chosen_k).unwrap();
        let mut buf = Vec::new();
        write_typology(&rows, &mut buf).unwrap();
        assert!(buf.starts_with(b"measure,transform,cluster_id,is_medoid\nF,knc,"));
        assert_eq!(read_typology(buf.as_slice()).unwrap(), rows);
        let mut curve = Vec::new();
        write_silhouettes(&result, &mut curve).unwrap();
        let back = read_silhouettes(curve.as_slice()).unwrap();
        assert_eq!(back.iter().map(|c| c.0).collect::<Vec<_>>(), vec![2, 3, 4]);
        assert!(matches!(
            read_silhouettes(&b"k,silhouette\n2,1.5\n"[..]),
            Err(CsvError::Field { .. })
        ));
    }

    fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, len).prop_map(|v| {
            let s: f64 = v.iter().sum::<f64>() + 1e-9;
            v.iter().map(|x| (x + 1e-9 / v.len() as f64) / s).collect()
        })
    }

    proptest! {
        #[test]
        fn hellinger_is_a_metric(a in simplex(6), b in simplex(6), c in simplex(6)) {
            let ab = hellinger(&a, &b).unwrap();
            prop_assert!((ab - hellinger(&b, &a).unwrap()).abs() <= 1e-12);
            prop_assert!(hellinger(&a, &a).unwrap() <= 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            prop_assert!(ab <= hellinger(&a, &c).unwrap() + hellinger(&c, &b).unwrap() + 1e-12);
        }

        #[test]
        fn pam_is_locally_optimal_and_monotone(
            pts in proptest::collection::vec((0.0f64..10.0, 0.0f64..10.0), 4..12),
            k in 2usize..5,
        ) {
            prop_assume!(k < pts.len());
            let d = euclid(&pts);
            let c = k_medoids(&d, k).unwrap();
            prop_assert!(c.cost_trace.windows(2).all(|w| w[1] <= w[0]));
            for slot in 0..k {
                for o in (0..pts.len()).filter(|o| !c.medoids.contains(o)) {
                    let mut m = c.medoids.clone();
                    m[slot] = o;
                    prop_assert!(total_cost(&d, &m) >= c.cost - 1e-9);
                }
            }
            prop_assert!(c.cost >= brute_force_cost(&d, k) - 1e-12);
            let s = silhouette(&d, &c.assignment).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }
}
