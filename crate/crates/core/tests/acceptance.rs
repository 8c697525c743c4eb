//! Acceptance run over the default grid. Prints one PASS/FAIL line per
//! criterion and exits nonzero when a criterion fails unexpectedly.
//!
//! A failure listed in [`KNOWN_FAILURES`] is still printed as FAIL but does
//! not fail the process, provided it fails in exactly the known way.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use measure_bench_core::partition::{build_reference_partition, cluster_sizes};
use measure_bench_core::regression::{
    build_design_matrix, fit_design, monotonicity_scan, read_importance, relative_importance,
    significance_table, trend_table, write_importance, write_significance, write_trends,
    ImportanceTable, Parameter, RegressionModel, Term, Trend,
};
use measure_bench_core::report::{
    render_importance_bars, render_score_lines, render_significance, render_typology_table,
    ScoreLinesRequest,
};
use measure_bench_core::sweep::{
    default_grid, evaluate_point, read_records, run_sweep, write_records,
};
use measure_bench_core::transforms::apply_transform_admitting_full;
use measure_bench_core::typology::{
    importance_profiles, select_typology, write_silhouettes, write_typology, Selection,
    TypologyResult, TypologyRow,
};
use measure_bench_core::{MeasureKind, Partition, ScoreRecord, TransformKind, TransformSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::{enumerate_pairs, oracle_similarities, random_labels};

/// Cells whose q-trend is known not to be increasing: with the one new
/// cluster growing past half of each cluster at high q, the pair-based
/// scores turn back down.
const KNOWN_Q_FAILURES: [(MeasureKind, TransformKind); 4] = [
    (MeasureKind::Rand, TransformKind::Onc),
    (MeasureKind::Jaccard, TransformKind::Onc),
    (MeasureKind::FowlkesMallows, TransformKind::Onc),
    (MeasureKind::FMeasure, TransformKind::Onc),
];
const KNOWN_FAILURES: [u8; 1] = [4];

struct Verdict {
    id: u8,
    title: &'static str,
    pass: bool,
    /// For known failures: whether the failure matches the documented one.
    as_documented: bool,
    detail: String,
}

fn verdict(id: u8, title: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict {
        id,
        title,
        pass,
        as_documented: false,
        detail,
    }
}

struct Run {
    records: Vec<ScoreRecord>,
    failures: usize,
    sweep_time: Duration,
    model: RegressionModel,
    table: ImportanceTable,
    typology: TypologyResult,
    artifacts: Vec<(&'static str, Vec<u8>)>,
}

/// Sweep, regression, typology and charts, passing through the CSV
/// exports the way the command-line pipeline does.
fn pipeline(workers: usize) -> Run {
    let started = Instant::now();
    let outcome = run_sweep(&default_grid(), workers).expect("sweep");
    let sweep_time = started.elapsed();
    let mut artifacts = Vec::new();

    let mut scores = Vec::new();
    write_records(&outcome.records, &mut scores).unwrap();
    let records = read_records(scores.as_slice()).unwrap();
    artifacts.push(("scores.csv", scores));

    let model = fit_design(&build_design_matrix(&records).unwrap()).unwrap();
    let table = relative_importance(&model).unwrap();
    let table = ImportanceTable::new(table.entries, trend_table(&records).unwrap());
    let significance = significance_table(&model, 0.05).unwrap();
    let mut buf = Vec::new();
    write_importance(&table, &mut buf).unwrap();
    let reread = read_importance(buf.as_slice()).unwrap();
    artifacts.push(("importance.csv", buf));
    let mut buf = Vec::new();
    write_trends(&table, &mut buf).unwrap();
    artifacts.push(("trends.csv", buf));
    let mut buf = Vec::new();
    write_significance(&significance, &mut buf).unwrap();
    artifacts.push(("significance.csv", buf));

    let typology = select_typology(
        &importance_profiles(&reread).unwrap(),
        Selection::MaxSilhouette,
    )
    .unwrap();
    let rows = typology.rows(typology.chosen_k).unwrap();
    let mut buf = Vec::new();
    write_typology(&rows, &mut buf).unwrap();
    artifacts.push(("typology.csv", buf));
    let mut buf = Vec::new();
    write_silhouettes(&typology, &mut buf).unwrap();
    artifacts.push(("silhouettes.csv", buf));

    let lines = ScoreLinesRequest {
        measures: vec![MeasureKind::Rand],
        transform: TransformKind::Onc,
        x: Parameter::K,
        series: Some(Parameter::Q),
        fixed: vec![(Parameter::N, 3240.0), (Parameter::H, 0.0)],
    };
    artifacts.push((
        "importance_bars.svg",
        render_importance_bars(&table).unwrap().into_bytes(),
    ));
    artifacts.push((
        "significance.svg",
        render_significance(&significance).unwrap().into_bytes(),
    ));
    artifacts.push((
        "typology.svg",
        render_typology_table(&rows).unwrap().into_bytes(),
    ));
    artifacts.push((
        "score_lines.svg",
        render_score_lines(&records, &lines).unwrap().into_bytes(),
    ));

    Run {
        records,
        failures: outcome.failures.len(),
        sweep_time,
        model,
        table,
        typology,
        artifacts,
    }
}

fn criterion_1(run: &Run) -> Verdict {
    let grid = default_grid();
    let pairs = run.records.len() / grid.measures.len() + run.failures;
    let pass = grid.pair_count() == 50_000
        && pairs == 50_000
        && run.failures == 0
        && run.records.len() == 300_000
        && run.sweep_time < Duration::from_secs(600);
    verdict(
        1,
        "grid cardinality",
        pass,
        format!(
            "{pairs} pairs, {} rows, {} failed points, sweep {:.1}s",
            run.records.len(),
            run.failures,
            run.sweep_time.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut nonzero_self) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let n = rng.random_range(2..=64);
        let (ka, kb) = (
            rng.random_range(1..=n.min(10)),
            rng.random_range(1..=n.min(10)),
        );
        let a = random_labels(&mut rng, n, ka);
        let b = random_labels(&mut rng, n, kb);
        let (pa, pb) = (
            Partition::from_raw_labels(&a).unwrap(),
            Partition::from_raw_labels(&b).unwrap(),
        );
        let expected = oracle_similarities(&a, &b);
        for (kind, e) in MeasureKind::ALL.into_iter().zip(expected) {
            let got = measure_bench_core::measures::dissimilarity(kind, &pa, &pb).unwrap();
            worst = worst.max((got.similarity - e).abs());
            for p in [&pa, &pb] {
                if measure_bench_core::measures::dissimilarity(kind, p, p)
                    .unwrap()
                    .dissimilarity
                    != 0.0
                {
                    nonzero_self += 1;
                }
            }
        }
    }
    verdict(
        2,
        "brute-force oracles and identity",
        worst <= 1e-12 && nonzero_self == 0,
        format!("max |measure - oracle| = {worst:.2e} over 1000 pairs; {nonzero_self} nonzero self-dissimilarities"),
    )
}

fn criterion_3() -> Verdict {
    let grid = default_grid();
    let bad: Vec<String> = grid
        .points()
        .par_iter()
        .filter_map(|&point| {
            let e = evaluate_point(point, &[]).ok()?;
            let n = point.n as u64;
            let pc = e.pair_counts;
            (pc.n11 + pc.n10 + pc.n01 + pc.n00 != n * (n - 1) / 2).then(|| format!("{point:?}"))
        })
        .collect();
    verdict(
        3,
        "pair-count conservation",
        bad.is_empty(),
        format!(
            "{} of {} pairs violate n11+n10+n01+n00 = n(n-1)/2",
            bad.len(),
            grid.pair_count()
        ),
    )
}

fn criterion_4(run: &Run) -> Verdict {
    let mut failing = Vec::new();
    for m in MeasureKind::ALL {
        for t in TransformKind::ALL {
            let trend = monotonicity_scan(&run.records, m, t, Parameter::Q).unwrap();
            if trend != Trend::Increasing {
                failing.push((m, t, trend));
            }
        }
    }
    let listed: Vec<String> = failing
        .iter()
        .map(|(m, t, tr)| format!("{m}/{t}={tr}"))
        .collect();
    let cells: BTreeSet<_> = failing.iter().map(|&(m, t, _)| (m, t)).collect();
    let mut v = verdict(
        4,
        "monotonicity in q",
        failing.is_empty(),
        format!(
            "{}/30 cells increasing; not increasing: [{}]",
            30 - failing.len(),
            listed.join(", ")
        ),
    );
    v.as_documented = cells == KNOWN_Q_FAILURES.into_iter().collect();
    v
}

fn criterion_5(run: &Run) -> Verdict {
    let mut detail = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    for (q, want_up) in [(0.3, false), (0.9, true)] {
        let mut series = Vec::new();
        for k in 2..=11 {
            let reference =
                build_reference_partition(&cluster_sizes(3240, k, 0.0).unwrap()).unwrap();
            let spec = TransformSpec::new(TransformKind::Onc, q).unwrap();
            let transformed = apply_transform_admitting_full(&reference, &spec).unwrap();
            let pairs = enumerate_pairs(reference.labels(), transformed.labels());
            let total = (pairs.n11 + pairs.n10 + pairs.n01 + pairs.n00) as f64;
            let direct = (pairs.n10 + pairs.n01) as f64 / total;
            let recorded = run
                .records
                .iter()
                .find(|r| {
                    r.n == 3240
                        && r.k == k
                        && r.h == 0.0
                        && r.q == q
                        && r.transform == TransformKind::Onc
                        && r.measure == MeasureKind::Rand
                })
                .map(|r| r.y)
                .unwrap_or(f64::NAN);
            worst = worst.max((recorded - direct).abs());
            series.push(direct);
        }
        let ok = series.windows(2).all(|w| {
            if want_up {
                w[1] - w[0] >= -1e-9
            } else {
                w[1] - w[0] <= 1e-9
            }
        });
        pass &= ok;
        let shown: Vec<String> = series.iter().map(|y| format!("{y:.4}")).collect();
        detail.push(format!(
            "q={q}: {} {}",
            if want_up {
                "nondecreasing"
            } else {
                "nonincreasing"
            },
            if ok { "holds" } else { "violated" }
        ));
        detail.push(format!("[{}]", shown.join(" ")));
    }
    pass &= worst <= 1e-11;
    detail.push(format!("max |sweep - direct| = {worst:.1e}"));
    verdict(
        5,
        "RI / one-new-cluster interaction in k",
        pass,
        detail.join("; "),
    )
}

fn criterion_6(run: &Run) -> Verdict {
    let total: f64 = run.table.entries.iter().map(|e| e.importance).sum();
    let r2 = run.model.r_squared;
    let gap = (total - r2).abs();
    verdict(
        6,
        "R² decomposition",
        gap <= 1e-6 * r2,
        format!(
            "R² = {r2:.6}, sum of squared beta_std = {total:.6}, relative gap {:.1e}",
            gap / r2
        ),
    )
}

fn criterion_7(run: &Run) -> Verdict {
    let t = &run.table;
    let imp = |m, tr, term| t.get(m, tr, term).unwrap().importance;
    let exempt = [
        (MeasureKind::Nmi, TransformKind::Oc),
        (MeasureKind::Nmi, TransformKind::Sc),
    ];
    let a_bad: Vec<String> = t
        .cells()
        .into_iter()
        .filter(|c| !exempt.contains(c))
        .filter(|&(m, tr)| imp(m, tr, Term::N) >= imp(m, tr, Term::Q))
        .map(|(m, tr)| format!("{m}/{tr}"))
        .collect();

    let height = |tr| {
        Term::EFFECTS
            .iter()
            .map(|&term| t.get(MeasureKind::Rand, tr, term).unwrap().importance_sqrt)
            .sum::<f64>()
    };
    let onc = height(TransformKind::Onc);
    let runner_up = TransformKind::ALL
        .into_iter()
        .filter(|&x| x != TransformKind::Onc)
        .map(height)
        .fold(0.0, f64::max);
    let b_ok = onc > 1.5 * runner_up;

    let c_ok = [TransformKind::Sc, TransformKind::Oc]
        .into_iter()
        .all(|tr| {
            imp(MeasureKind::AdjustedRand, tr, Term::K) < imp(MeasureKind::Rand, tr, Term::K)
        });
    let c_detail: Vec<String> = [TransformKind::Sc, TransformKind::Oc]
        .into_iter()
        .map(|tr| {
            format!(
                "{tr} ARI {:.5} vs RI {:.5}",
                imp(MeasureKind::AdjustedRand, tr, Term::K),
                imp(MeasureKind::Rand, tr, Term::K)
            )
        })
        .collect();
    verdict(
        7,
        "importance patterns",
        a_bad.is_empty() && b_ok && c_ok,
        format!(
            "(a) n < q except NMI/oc,sc: {} violations{}; (b) RI bar onc {onc:.4} vs next {runner_up:.4} ({:.2}x); (c) k: {}",
            a_bad.len(),
            if a_bad.is_empty() { String::new() } else { format!(" [{}]", a_bad.join(", ")) },
            onc / runner_up,
            c_detail.join(", ")
        ),
    )
}

fn agree(rows: &[TypologyRow], a: MeasureKind, b: MeasureKind) -> usize {
    let id = |m: MeasureKind, t| {
        rows.iter()
            .find(|r| r.measure == m && r.transform == t)
            .unwrap()
            .cluster_id
    };
    TransformKind::ALL
        .into_iter()
        .filter(|&t| id(a, t) == id(b, t))
        .count()
}

/// Lowest k-medoids cost over every choice of `k` medoids.
fn exhaustive_cost(d: &[Vec<f64>], k: usize) -> f64 {
    fn walk(d: &[Vec<f64>], k: usize, start: usize, chosen: &mut Vec<usize>, best: &mut f64) {
        if chosen.len() == k {
            let cost: f64 = d
                .iter()
                .map(|row| chosen.iter().map(|&m| row[m]).fold(f64::INFINITY, f64::min))
                .sum();
            *best = best.min(cost);
            return;
        }
        for m in start..d.len() {
            chosen.push(m);
            walk(d, k, m + 1, chosen, best);
            chosen.pop();
        }
    }
    let mut best = f64::INFINITY;
    walk(d, k, 0, &mut Vec::new(), &mut best);
    best
}

fn criterion_8(run: &Run) -> (Verdict, String) {
    let typ = &run.typology;
    let Some(c5) = typ.candidate(5) else {
        return (
            verdict(8, "typology", false, "no k = 5 candidate".into()),
            String::new(),
        );
    };
    let rows = typ.rows(5).unwrap();
    let fmi_ji = agree(&rows, MeasureKind::FowlkesMallows, MeasureKind::Jaccard);
    let ri_nmi = agree(&rows, MeasureKind::Rand, MeasureKind::Nmi);
    let pass = (c5.silhouette - 0.55).abs() <= 0.05 && fmi_ji >= 4 && ri_nmi >= 3;
    let curve: Vec<String> = typ
        .candidates
        .iter()
        .map(|c| format!("{}:{:.3}", c.k, c.silhouette))
        .collect();

    let pam: Vec<String> = (2..=5)
        .map(|k| {
            let got = typ.candidate(k).unwrap().clustering.cost;
            let best = exhaustive_cost(&typ.distance, k);
            format!(
                "k={k} {}",
                if got <= best + 1e-12 {
                    "optimal"
                } else {
                    "suboptimal"
                }
            )
        })
        .collect();
    (
        verdict(
            8,
            "typology",
            pass,
            format!(
                "k=5 silhouette {:.3}; FMI/JI agree {fmi_ji}/5, RI/NMI agree {ri_nmi}/5; curve {}",
                c5.silhouette,
                curve.join(" ")
            ),
        ),
        format!("PAM vs exhaustive search: {}", pam.join(", ")),
    )
}

fn criterion_9() -> Verdict {
    let spot = [
        ((72, 3, 0.0), vec![24, 24, 24]),
        ((72, 3, 0.5), vec![18, 24, 30]),
        ((72, 3, 1.0), vec![12, 24, 36]),
        ((3240, 2, 0.1), vec![1566, 1674]),
    ];
    let spot_bad: Vec<String> = spot
        .iter()
        .filter(|((n, k, h), want)| cluster_sizes(*n, *k, *h).map(|s| s.sizes) != Ok(want.clone()))
        .map(|((n, k, h), _)| format!("({n},{k},{h})"))
        .collect();
    let grid = default_grid();
    let mut combos = 0;
    let mut grid_bad = 0;
    for &n in &grid.n_values {
        for &k in &grid.k_values {
            for &h in &grid.h_values {
                combos += 1;
                match cluster_sizes(n, k, h) {
                    Ok(s)
                        if s.sizes.iter().sum::<usize>() == n
                            && s.sizes.windows(2).all(|w| w[0] <= w[1]) => {}
                    _ => grid_bad += 1,
                }
            }
        }
    }
    verdict(
        9,
        "cluster size spot checks",
        spot_bad.is_empty() && grid_bad == 0 && combos == 1000,
        format!("{} of 4 hand-derived tuples match; {grid_bad} of {combos} grid combinations violate sum/monotonicity", 4 - spot_bad.len()),
    )
}

fn criterion_10(a: &Run, b: &Run) -> Verdict {
    let differing: Vec<&str> = a
        .artifacts
        .iter()
        .zip(&b.artifacts)
        .filter(|(x, y)| x.0 != y.0 || x.1 != y.1)
        .map(|(x, _)| x.0)
        .collect();
    verdict(
        10,
        "determinism across worker counts",
        differing.is_empty() && a.artifacts.len() == b.artifacts.len(),
        format!(
            "{} artifacts compared (1 vs 4 workers); differing: [{}]",
            a.artifacts.len(),
            differing.join(", ")
        ),
    )
}

fn main() {
    let started = Instant::now();
    let first = pipeline(1);
    let second = pipeline(4);

    let (v8, pam_info) = criterion_8(&first);
    let verdicts = vec![
        criterion_1(&first),
        criterion_2(),
        criterion_3(),
        criterion_4(&first),
        criterion_5(&first),
        criterion_6(&first),
        criterion_7(&first),
        v8,
        criterion_9(),
        criterion_10(&first, &second),
    ];

    let mut unexpected = 0;
    for v in &verdicts {
        let known = KNOWN_FAILURES.contains(&v.id);
        let note = match (v.pass, known) {
            (false, true) if v.as_documented => " [known failure, as documented]",
            (false, true) => " [known criterion, but failing differently than documented]",
            _ => "",
        };
        if !v.pass && !(known && v.as_documented) {
            unexpected += 1;
        }
        println!(
            "{} criterion {:>2} ({}): {}{note}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.detail
        );
    }
    println!("INFO {pam_info}");
    println!(
        "INFO chosen k by maximum silhouette: {}",
        first.typology.chosen_k
    );
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!(
        "{passed}/{} criteria pass; {unexpected} unexpected failures; {:.1}s",
        verdicts.len(),
        started.elapsed().as_secs_f64()
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
