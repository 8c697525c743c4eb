use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use measure_bench_core::measures::score_confusion;
use measure_bench_core::partition::{
    build_reference_partition, cluster_sizes, confusion_matrix, pair_counts,
};
use measure_bench_core::regression::{
    build_design_matrix, fit_design, read_significance, relative_importance, significance_table,
    trend_table, write_importance, write_significance, write_trends, ImportanceTable,
};
use measure_bench_core::report::{
    render_importance_bars, render_score_lines, render_significance, render_typology_table,
    ScoreLinesRequest,
};
use measure_bench_core::sweep::{
    default_grid, read_csv, run_sweep, write_records, ConfigFile, GridConfig,
};
use measure_bench_core::transforms::apply_transform;
use measure_bench_core::typology::{
    importance_profiles, read_typology, select_typology, write_silhouettes, write_typology,
    Selection,
};
use measure_bench_core::{format_sig12, MeasureKind, Partition, TransformKind, TransformSpec};
use serde_json::json;

use crate::error::CliError;
use crate::manifest::{digest_input, sha256_hex, OutputDir, RunManifest};
use crate::{AnalyzeArgs, PointArgs, ReportArgs, SweepArgs, TypologyArgs};

const DEFAULT_ALPHA: f64 = 0.05;

fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(ConfigFile::parse(&text)?)
        }
    }
}

/// A flag value, or the file's list when it holds exactly one entry.
fn single<T: Clone>(flag: Option<T>, file: Option<&Vec<T>>, name: &str) -> Result<T, CliError> {
    match (flag, file) {
        (Some(v), _) => Ok(v),
        (None, Some(list)) if list.len() == 1 => Ok(list[0].clone()),
        _ => Err(CliError::Usage(format!("missing --{name}"))),
    }
}

fn manifest(command: &'static str, config: serde_json::Value, started: Instant) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        grid_hash: None,
        inputs: Vec::new(),
        outputs: Vec::new(),
        notes: Vec::new(),
        elapsed_ms: started.elapsed().as_millis(),
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

struct Point {
    reference: Partition,
    transformed: Option<(TransformSpec, Partition)>,
}

fn build_point(a: &PointArgs, with_transform: bool) -> Result<Point, CliError> {
    let file = load_config(a.config.as_deref())?;
    let n = single(a.n, file.n_values.as_ref(), "n")?;
    let k = single(a.k, file.k_values.as_ref(), "k")?;
    let h = single(a.h, file.h_values.as_ref(), "h").unwrap_or(0.0);
    if with_transform && k < 2 {
        return Err(CliError::Invalid("k must be ≥ 2".into()));
    }
    let reference = build_reference_partition(&cluster_sizes(n, k, h)?)?;
    let transformed = if with_transform {
        let t = single(a.t, file.transforms.as_ref(), "t")?;
        let q = single(a.q, file.q_values.as_ref(), "q")?;
        let spec = TransformSpec::new(t, q)?;
        let out = apply_transform(&reference, &spec)?;
        Some((spec, out))
    } else {
        None
    };
    Ok(Point {
        reference,
        transformed,
    })
}

fn describe(label: &str, p: &Partition, out: &mut String) {
    let _ = writeln!(out, "{label}_clusters={}", p.cluster_count());
    let _ = writeln!(out, "{label}_sizes={}", join(p.cluster_sizes()));
    let _ = writeln!(out, "{label}_labels={}", join(p.labels().iter()));
}

pub fn generate(a: &PointArgs) -> Result<(), CliError> {
    let point = build_point(a, false)?;
    let mut out = String::new();
    describe("reference", &point.reference, &mut out);
    print!("{out}");
    Ok(())
}

pub fn transform(a: &PointArgs) -> Result<(), CliError> {
    let point = build_point(a, true)?;
    let (spec, transformed) = point.transformed.expect("transform requested");
    let mut out = String::new();
    let _ = writeln!(out, "transform={} q={}", spec.kind, format_sig12(spec.q));
    describe("reference", &point.reference, &mut out);
    describe("transformed", &transformed, &mut out);
    print!("{out}");
    Ok(())
}

pub fn score(a: &PointArgs) -> Result<(), CliError> {
    let point = build_point(a, true)?;
    let (spec, transformed) = point.transformed.expect("transform requested");
    let measures = if a.measures.is_empty() {
        MeasureKind::ALL.to_vec()
    } else {
        a.measures.clone()
    };
    let cm = confusion_matrix(&point.reference, &transformed)?;
    let pc = pair_counts(&cm);
    let scores = score_confusion(&cm, &measures)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "n={} k={} transform={} q={}",
        point.reference.len(),
        point.reference.cluster_count(),
        spec.kind,
        format_sig12(spec.q)
    );
    let _ = writeln!(out, "k'={}", transformed.cluster_count());
    let _ = writeln!(
        out,
        "pairs n11={} n10={} n01={} n00={}",
        pc.n11, pc.n10, pc.n01, pc.n00
    );
    let _ = writeln!(out, "measure,similarity,dissimilarity,out_of_range");
    for s in scores {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.kind,
            format_sig12(s.similarity),
            format_sig12(s.dissimilarity),
            s.out_of_range
        );
    }
    print!("{out}");
    Ok(())
}

fn grid_json(grid: &GridConfig) -> serde_json::Value {
    json!({
        "n_values": grid.n_values,
        "k_values": grid.k_values,
        "h_values": grid.h_values,
        "q_values": grid.q_values,
        "transforms": grid.transforms.iter().map(|t| t.as_str()).collect::<Vec<_>>(),
        "measures": grid.measures.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
    })
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let file = if a.default {
        ConfigFile::default()
    } else {
        load_config(a.config.as_deref())?
    };
    let mut grid = file.grid_over(default_grid())?;
    macro_rules! override_list {
        ($flag:expr, $field:ident) => {
            if !$flag.is_empty() {
                grid.$field = $flag.clone();
            }
        };
    }
    override_list!(a.n, n_values);
    override_list!(a.k, k_values);
    override_list!(a.h, h_values);
    override_list!(a.q, q_values);
    override_list!(a.t, transforms);
    override_list!(a.measures, measures);
    let workers = a.workers.or(file.workers).unwrap_or(0);

    let outcome = run_sweep(&grid, workers)?;
    let mut dir = OutputDir::create(&a.out)?;
    let mut scores = Vec::new();
    write_records(&outcome.records, &mut scores)?;
    dir.put("scores.csv", &scores)?;

    let mut errors = csv::Writer::from_writer(Vec::new());
    let header = ["n", "k", "h", "q", "transform", "message"];
    let bad = |e: csv::Error| CliError::Io {
        path: "errors.csv".into(),
        message: e.to_string(),
    };
    errors.write_record(header).map_err(bad)?;
    for f in &outcome.failures {
        let p = f.point;
        errors
            .write_record([
                p.n.to_string(),
                p.k.to_string(),
                format_sig12(p.h),
                format_sig12(p.q),
                p.transform.to_string(),
                f.message.clone(),
            ])
            .map_err(bad)?;
    }
    let errors = errors.into_inner().map_err(|e| CliError::Io {
        path: "errors.csv".into(),
        message: e.to_string(),
    })?;
    dir.put("errors.csv", &errors)?;

    let config = grid_json(&grid);
    let mut m = manifest(
        "sweep",
        json!({ "grid": config, "workers": workers }),
        started,
    );
    m.grid_hash = Some(sha256_hex(config.to_string().as_bytes()));
    if grid.transforms.contains(&TransformKind::Onc) && grid.q_values.contains(&1.0) {
        m.notes
            .push("onc admitted at q=1: every element merged into one cluster".into());
    }
    m.notes
        .push(format!("{} grid points failed", outcome.failures.len()));
    dir.finish(m)?;
    println!(
        "pairs={} records={} failures={}",
        grid.pair_count(),
        outcome.records.len(),
        outcome.failures.len()
    );
    Ok(())
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let file = load_config(a.config.as_deref())?;
    let alpha = a.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let records = read_csv(&a.input)?;
    let design = build_design_matrix(&records)?;
    let model = fit_design(&design)?;
    let table = relative_importance(&model)?;
    let table = ImportanceTable::new(table.entries, trend_table(&records)?);
    let significance = significance_table(&model, alpha)?;

    let mut dir = OutputDir::create(&a.out)?;
    let mut buf = Vec::new();
    write_importance(&table, &mut buf)?;
    dir.put("importance.csv", &buf)?;
    buf.clear();
    write_trends(&table, &mut buf)?;
    dir.put("trends.csv", &buf)?;
    buf.clear();
    write_significance(&significance, &mut buf)?;
    dir.put("significance.csv", &buf)?;
    let explained: f64 = table.entries.iter().map(|e| e.importance).sum();
    let summary = format!(
        "key,value\nn_obs,{}\ncoefficients,{}\ndf_residual,{}\nsigma2,{}\nr_squared,{}\nsum_importance,{}\n",
        model.n_obs,
        model.column_count(),
        model.df_residual,
        format_sig12(model.sigma2),
        format_sig12(model.r_squared),
        format_sig12(explained)
    );
    dir.put("model.csv", summary.as_bytes())?;

    let mut m = manifest("analyze", json!({ "alpha": alpha }), started);
    m.inputs.push(digest_input(&a.input)?);
    dir.finish(m)?;
    println!(
        "observations={} coefficients={} r_squared={} importance_rows={}",
        model.n_obs,
        model.column_count(),
        format_sig12(model.r_squared),
        table.entries.len()
    );
    Ok(())
}

pub fn typology(a: &TypologyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let file = load_config(a.config.as_deref())?;
    let margin = a.parsimony_margin.or(if file.parsimony == Some(true) {
        file.parsimony_margin
    } else {
        None
    });
    let selection = match margin {
        Some(m) if m >= 0.0 => Selection::Parsimony { margin: m },
        Some(m) => {
            return Err(CliError::Invalid(format!(
                "parsimony margin must be >= 0, got {m}"
            )))
        }
        None => Selection::MaxSilhouette,
    };
    let table = ImportanceTable::read_files(&a.input, None)?;
    let profiles = importance_profiles(&table)?;
    let result = select_typology(&profiles, selection)?;
    let k = a.k.unwrap_or(result.chosen_k);
    let rows = result.rows(k).ok_or_else(|| {
        CliError::Invalid(format!(
            "k = {k} is not a candidate (2..={})",
            result.candidates.last().map_or(2, |c| c.k)
        ))
    })?;

    let mut dir = OutputDir::create(&a.out)?;
    let mut buf = Vec::new();
    write_typology(&rows, &mut buf)?;
    dir.put("typology.csv", &buf)?;
    buf.clear();
    write_silhouettes(&result, &mut buf)?;
    dir.put("silhouettes.csv", &buf)?;
    let selection_json = match selection {
        Selection::MaxSilhouette => json!("max_silhouette"),
        Selection::Parsimony { margin } => json!({ "parsimony_margin": margin }),
    };
    let mut m = manifest(
        "typology",
        json!({ "selection": selection_json, "exported_k": k }),
        started,
    );
    m.inputs.push(digest_input(&a.input)?);
    dir.finish(m)?;
    for c in &result.candidates {
        println!("k={} silhouette={}", c.k, format_sig12(c.silhouette));
    }
    println!("chosen_k={} exported_k={k}", result.chosen_k);
    Ok(())
}

fn open_if_exists(path: &Path) -> Result<Option<BufReader<File>>, CliError> {
    match File::open(path) {
        Ok(f) => Ok(Some(BufReader::new(f))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(path, e)),
    }
}

/// Renders every chart whose input table is present in the input
/// directory; the score line plot needs `--t`.
pub fn report(a: &ReportArgs) -> Result<(), CliError> {
    let started = Instant::now();
    load_config(a.config.as_deref())?;
    let input = &a.input;
    if !input.is_dir() {
        return Err(CliError::Io {
            path: input.display().to_string(),
            message: "not a directory".into(),
        });
    }
    let mut charts: Vec<(&str, String)> = Vec::new();
    let mut inputs = Vec::new();

    let importance = input.join("importance.csv");
    if importance.exists() {
        let trends = input.join("trends.csv");
        let table =
            ImportanceTable::read_files(&importance, trends.exists().then_some(trends.as_path()))?;
        charts.push(("importance_bars.svg", render_importance_bars(&table)?));
        inputs.push(digest_input(&importance)?);
        if trends.exists() {
            inputs.push(digest_input(&trends)?);
        }
    }
    let significance = input.join("significance.csv");
    if let Some(r) = open_if_exists(&significance)? {
        charts.push((
            "significance.svg",
            render_significance(&read_significance(r)?)?,
        ));
        inputs.push(digest_input(&significance)?);
    }
    let typology = input.join("typology.csv");
    if let Some(r) = open_if_exists(&typology)? {
        charts.push(("typology.svg", render_typology_table(&read_typology(r)?)?));
        inputs.push(digest_input(&typology)?);
    }
    let mut request = None;
    if let Some(t) = a.t {
        let scores = input.join("scores.csv");
        let records = read_csv(&scores)?;
        let req = ScoreLinesRequest {
            measures: if a.measures.is_empty() {
                MeasureKind::ALL.to_vec()
            } else {
                a.measures.clone()
            },
            transform: t,
            x: a.x,
            series: a.series,
            fixed: a.fixed.clone(),
        };
        charts.push(("score_lines.svg", render_score_lines(&records, &req)?));
        inputs.push(digest_input(&scores)?);
        request = Some(json!({
            "transform": t.as_str(),
            "x": a.x.as_str(),
            "series": a.series.map(|s| s.as_str()),
            "measures": req.measures.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
            "fixed": req.fixed.iter().map(|(p, v)| format!("{p}={}", format_sig12(*v))).collect::<Vec<_>>(),
        }));
    }
    if charts.is_empty() {
        return Err(CliError::Malformed(format!(
            "{} holds none of the analysis tables",
            input.display()
        )));
    }

    let mut dir = OutputDir::create(&a.out)?;
    for (name, svg) in &charts {
        dir.put(name, svg.as_bytes())?;
        println!("wrote {name}");
    }
    let mut m = manifest("report", json!({ "score_lines": request }), started);
    m.inputs = inputs;
    dir.finish(m)?;
    Ok(())
}
