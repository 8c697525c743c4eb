//! SVG renderings of the analysis outputs: stacked importance bars, score
//! line plots, significance matrices and the typology table.
//!
//! Every number shown (in element titles) is printed exactly as in the CSV
//! exports.

mod svg;

use std::collections::BTreeSet;
use std::path::Path;

use svg::Svg;

use crate::measures::MeasureKind;
use crate::numeric::format_sig12;
use crate::regression::{Family, ImportanceTable, Parameter, SignificanceRow, Term, Trend};
use crate::sweep::ScoreRecord;
use crate::transforms::TransformKind;
use crate::typology::TypologyRow;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("incomplete input: {0}")]
    Incomplete(String),
    #[error("parameter {0} is neither on an axis nor fixed")]
    Unpinned(Parameter),
    #[error("parameter {0} is both fixed and on an axis, or fixed twice")]
    Conflict(Parameter),
    #[error("no measures selected")]
    EmptyMeasures,
    #[error("missing grid points: {}", .0.join("; "))]
    MissingSlice(Vec<String>),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Segment colours, one per entry of [`Term::EFFECTS`].
const TERM_COLORS: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];
const SERIES_COLORS: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];
const CLUSTER_COLORS: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#8c564b", "#9467bd", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const SIGNIFICANT: &str = "#2ca02c";
const NOT_SIGNIFICANT: &str = "#d62728";

fn write(path: &Path, text: &str) -> Result<(), ReportError> {
    std::fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn measure_label(m: MeasureKind) -> String {
    format!("D_{m}")
}

/// One panel per measure, one stacked bar per transformation, segments
/// are `|beta_std|` of the ten non-intercept terms. Main-effect segments
/// carry a triangle when the score moves monotonically with that
/// parameter.
pub fn render_importance_bars(table: &ImportanceTable) -> Result<String, ReportError> {
    let measures = table.measures();
    let transforms = table.transforms();
    if measures.is_empty() {
        return Err(ReportError::Incomplete("importance table is empty".into()));
    }
    for &m in &measures {
        for &t in &transforms {
            for term in Term::EFFECTS {
                if table.get(m, t, term).is_none() {
                    return Err(ReportError::Incomplete(format!(
                        "no importance for {m}/{t}/{term}"
                    )));
                }
            }
        }
    }
    let bar_height = |m, t| {
        Term::EFFECTS
            .iter()
            .map(|&term| table.get(m, t, term).unwrap().importance_sqrt)
            .sum::<f64>()
    };
    let top = measures
        .iter()
        .flat_map(|&m| transforms.iter().map(move |&t| (m, t)))
        .map(|(m, t)| bar_height(m, t))
        .fold(0.0, f64::max);
    let top = if top > 0.0 { top * 1.08 } else { 1.0 };

    let (panel_w, panel_h, cols) = (340.0, 270.0, 3usize);
    let rows = measures.len().div_ceil(cols);
    let legend_h = 50.0;
    let mut svg = Svg::new(panel_w * cols as f64, panel_h * rows as f64 + legend_h);
    let (plot_h, base_off, left) = (180.0, 225.0, 55.0);
    let slot = (panel_w - left - 15.0) / transforms.len() as f64;
    let bar_w = slot * 0.6;

    for (pi, &m) in measures.iter().enumerate() {
        let px = (pi % cols) as f64 * panel_w;
        let py = (pi / cols) as f64 * panel_h;
        let base = py + base_off;
        svg.open(&[("class", "panel".into()), ("data-measure", m.to_string())]);
        svg.text(
            px + panel_w / 2.0,
            py + 25.0,
            14.0,
            "middle",
            &measure_label(m),
        );
        svg.line(px + left, base, px + panel_w - 10.0, base, "#000");
        svg.line(px + left, base, px + left, base - plot_h, "#000");
        for tick in 0..=4 {
            let v = top * tick as f64 / 4.0;
            let y = base - plot_h * tick as f64 / 4.0;
            svg.line(px + left - 4.0, y, px + left, y, "#000");
            svg.text(px + left - 6.0, y + 3.0, 9.0, "end", &format!("{v:.3}"));
        }
        for (ti, &t) in transforms.iter().enumerate() {
            let x = px + left + slot * ti as f64 + (slot - bar_w) / 2.0;
            svg.open(&[("class", "bar".into()), ("data-transform", t.to_string())]);
            let mut y = base;
            for (si, term) in Term::EFFECTS.into_iter().enumerate() {
                let e = table.get(m, t, term).unwrap();
                let h = plot_h * e.importance_sqrt / top;
                if e.importance_sqrt > 0.0 {
                    let title = format!("{m} {t} {term}: {}", format_sig12(e.importance_sqrt));
                    svg.rect(
                        x,
                        y - h,
                        bar_w,
                        h,
                        TERM_COLORS[si],
                        &[("class", "segment".into()), ("data-term", term.to_string())],
                        Some(&title),
                    );
                }
                if let Some(p) = term.main_effect() {
                    let trend = table.trend(m, t, p).unwrap_or(Trend::None);
                    let (cx, cy, r) = (x + bar_w / 2.0, y - h / 2.0, 4.0);
                    let pts = match trend {
                        Trend::Increasing => {
                            Some(vec![(cx - r, cy + r), (cx + r, cy + r), (cx, cy - r)])
                        }
                        Trend::Decreasing => {
                            Some(vec![(cx - r, cy - r), (cx + r, cy - r), (cx, cy + r)])
                        }
                        Trend::None => None,
                    };
                    if let Some(pts) = pts {
                        svg.polygon(
                            &pts,
                            "#000",
                            &[
                                ("class", "trend".into()),
                                ("data-direction", trend.to_string()),
                            ],
                            Some(&format!("{m} {t} {p}: {trend}")),
                        );
                    }
                }
                y -= h;
            }
            svg.close();
            svg.text(x + bar_w / 2.0, base + 14.0, 10.0, "middle", t.as_str());
        }
        svg.close();
    }

    let ly = panel_h * rows as f64 + 20.0;
    for (si, term) in Term::EFFECTS.into_iter().enumerate() {
        let lx = 20.0 + si as f64 * 95.0;
        svg.rect(lx, ly - 9.0, 10.0, 10.0, TERM_COLORS[si], &[], None);
        svg.text(lx + 14.0, ly, 10.0, "start", term.as_str());
    }
    Ok(svg.finish())
}

pub fn emit_importance_bars(table: &ImportanceTable, path: &Path) -> Result<(), ReportError> {
    write(path, &render_importance_bars(table)?)
}

/// Selects a slice of the sweep for a line plot: `x` on the horizontal
/// axis, one line per measure (and per value of `series` when given), all
/// other parameters pinned by `fixed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLinesRequest {
    pub measures: Vec<MeasureKind>,
    pub transform: TransformKind,
    pub x: Parameter,
    pub series: Option<Parameter>,
    pub fixed: Vec<(Parameter, f64)>,
}

/// Measure, series value and (x, y) points of one plotted line.
type Line = (MeasureKind, Option<f64>, Vec<(f64, f64)>);

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| same(*a, *b));
    v
}

pub fn render_score_lines(
    records: &[ScoreRecord],
    req: &ScoreLinesRequest,
) -> Result<String, ReportError> {
    if req.measures.is_empty() {
        return Err(ReportError::EmptyMeasures);
    }
    let mut axes = vec![req.x];
    if let Some(s) = req.series {
        if s == req.x {
            return Err(ReportError::Conflict(s));
        }
        axes.push(s);
    }
    let mut pinned = BTreeSet::new();
    for &(p, _) in &req.fixed {
        if axes.contains(&p) || !pinned.insert(p) {
            return Err(ReportError::Conflict(p));
        }
    }
    if let Some(&p) = Parameter::ALL
        .iter()
        .find(|p| !axes.contains(p) && !pinned.contains(p))
    {
        return Err(ReportError::Unpinned(p));
    }

    let slice: Vec<&ScoreRecord> = records
        .iter()
        .filter(|r| r.transform == req.transform && req.measures.contains(&r.measure))
        .filter(|r| req.fixed.iter().all(|&(p, v)| same(p.of(r), v)))
        .collect();
    let xs = distinct(
        records
            .iter()
            .filter(|r| r.transform == req.transform)
            .map(|r| req.x.of(r)),
    );
    let series_values: Vec<Option<f64>> = match req.series {
        Some(s) => distinct(
            records
                .iter()
                .filter(|r| r.transform == req.transform)
                .map(|r| s.of(r)),
        )
        .into_iter()
        .map(Some)
        .collect(),
        None => vec![None],
    };
    let describe = |m: MeasureKind, x: f64, s: Option<f64>| {
        let mut parts: Vec<String> = req
            .fixed
            .iter()
            .map(|(p, v)| format!("{p}={}", format_sig12(*v)))
            .collect();
        parts.push(format!("{}={}", req.x, format_sig12(x)));
        if let (Some(p), Some(v)) = (req.series, s) {
            parts.push(format!("{p}={}", format_sig12(v)));
        }
        format!("{} {m} {}", req.transform, parts.join(","))
    };
    if xs.is_empty() {
        return Err(ReportError::MissingSlice(vec![format!(
            "no records for transform {}",
            req.transform
        )]));
    }

    let mut lines: Vec<Line> = Vec::new();
    let mut missing = Vec::new();
    for &m in &req.measures {
        for &s in &series_values {
            let mut pts = Vec::with_capacity(xs.len());
            for &x in &xs {
                let hit = slice.iter().find(|r| {
                    r.measure == m
                        && same(req.x.of(r), x)
                        && req.series.is_none_or(|p| same(p.of(r), s.unwrap()))
                });
                match hit {
                    Some(r) => pts.push((x, r.y)),
                    None => missing.push(describe(m, x, s)),
                }
            }
            lines.push((m, s, pts));
        }
    }
    if !missing.is_empty() {
        return Err(ReportError::MissingSlice(missing));
    }

    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let ys = lines.iter().flat_map(|l| l.2.iter().map(|p| p.1));
    let (mut y_lo, mut y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
        (a.min(y), b.max(y))
    });
    if y_hi - y_lo < 1e-12 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let (w, h, left, right, top, bottom) = (680.0, 420.0, 60.0, 170.0, 30.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let sx = |x: f64| {
        if x_hi > x_lo {
            left + plot_w * (x - x_lo) / (x_hi - x_lo)
        } else {
            left + plot_w / 2.0
        }
    };
    let sy = |y: f64| top + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo));

    let mut svg = Svg::new(w, h);
    let fixed: Vec<String> = req
        .fixed
        .iter()
        .map(|(p, v)| format!("{p}={}", format_sig12(*v)))
        .collect();
    svg.text(
        w / 2.0,
        18.0,
        13.0,
        "middle",
        &format!("{} ({})", req.transform.long_name(), fixed.join(", ")),
    );
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#000");
    svg.line(left, top, left, top + plot_h, "#000");
    for &x in &xs {
        svg.line(sx(x), top + plot_h, sx(x), top + plot_h + 4.0, "#000");
        svg.text(sx(x), top + plot_h + 16.0, 9.0, "middle", &format_sig12(x));
    }
    for tick in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * tick as f64 / 4.0;
        svg.line(left - 4.0, sy(v), left, sy(v), "#000");
        svg.text(left - 6.0, sy(v) + 3.0, 9.0, "end", &format!("{v:.3}"));
    }
    svg.text(
        left + plot_w / 2.0,
        h - 12.0,
        12.0,
        "middle",
        req.x.as_str(),
    );
    svg.text(16.0, top + plot_h / 2.0, 12.0, "middle", "score");

    for (li, (m, s, pts)) in lines.iter().enumerate() {
        let color = SERIES_COLORS[li % SERIES_COLORS.len()];
        let label = match (req.series, s) {
            (Some(p), Some(v)) => format!("{} {p}={}", measure_label(*m), format_sig12(*v)),
            _ => measure_label(*m),
        };
        svg.open(&[("class", "series".into()), ("data-label", label.clone())]);
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (sx(x), sy(y))).collect();
        svg.polyline(&scaled, color, &[("stroke-width", "1.5".into())]);
        for (&(x, y), &(cx, cy)) in pts.iter().zip(&scaled) {
            svg.circle(
                cx,
                cy,
                2.5,
                color,
                Some(&format!(
                    "{label} {}={}: {}",
                    req.x,
                    format_sig12(x),
                    format_sig12(y)
                )),
            );
        }
        svg.close();
        let ly = top + 14.0 * li as f64;
        svg.line(w - right + 10.0, ly, w - right + 30.0, ly, color);
        svg.text(w - right + 34.0, ly + 3.0, 10.0, "start", &label);
    }
    Ok(svg.finish())
}

pub fn emit_score_lines(
    records: &[ScoreRecord],
    req: &ScoreLinesRequest,
    path: &Path,
) -> Result<(), ReportError> {
    write(path, &render_score_lines(records, req)?)
}

type BlockKey = (Family, String, Term);

/// One square matrix per (family, fixed key, term); green cells are
/// significant differences, red ones are not.
pub fn render_significance(rows: &[SignificanceRow]) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Incomplete("no significance rows".into()));
    }
    // Blocks in order of first appearance.
    let mut blocks: Vec<(BlockKey, Vec<&SignificanceRow>)> = Vec::new();
    for r in rows {
        let key = (r.family, r.fixed_key.clone(), r.param_set);
        match blocks.iter_mut().find(|b| b.0 == key) {
            Some(b) => b.1.push(r),
            None => blocks.push((key, vec![r])),
        }
    }
    blocks.sort_by_key(|b| b.0 .0);
    let cell = 12.0;
    let mut layout = Vec::new();
    for ((family, fixed, term), members) in &blocks {
        let mut items: Vec<&str> = Vec::new();
        for r in members {
            for it in [r.item_a.as_str(), r.item_b.as_str()] {
                if !items.contains(&it) {
                    items.push(it);
                }
            }
        }
        if members.len() != items.len() * items.len() {
            return Err(ReportError::Incomplete(format!(
                "{family} {fixed} {term}: matrix is not complete"
            )));
        }
        layout.push((*family, fixed.clone(), *term, items, members));
    }
    let size = layout.iter().map(|l| l.3.len()).max().unwrap_or(1) as f64 * cell;
    let block_w = size + 60.0;
    let block_h = size + 40.0;
    let terms: Vec<Term> = Term::EFFECTS.to_vec();
    let mut keys: Vec<(Family, String)> = Vec::new();
    for l in &layout {
        if !keys.contains(&(l.0, l.1.clone())) {
            keys.push((l.0, l.1.clone()));
        }
    }
    let width = 80.0 + block_w * terms.len() as f64;
    let height = 40.0 + block_h * keys.len() as f64;
    let mut svg = Svg::new(width, height);
    for (ri, (family, fixed)) in keys.iter().enumerate() {
        let y0 = 30.0 + block_h * ri as f64;
        svg.text(
            10.0,
            y0 + size / 2.0,
            11.0,
            "start",
            &format!("{family}={fixed}"),
        );
        for (ci, term) in terms.iter().enumerate() {
            let Some((_, _, _, items, members)) = layout
                .iter()
                .find(|l| l.0 == *family && l.1 == *fixed && l.2 == *term)
            else {
                continue;
            };
            let x0 = 80.0 + block_w * ci as f64;
            if ri == 0 || keys[ri - 1].0 != *family {
                svg.text(x0 + size / 2.0, y0 - 8.0, 11.0, "middle", term.as_str());
            }
            svg.open(&[
                ("class", "matrix".into()),
                ("data-family", family.to_string()),
                ("data-key", fixed.clone()),
                ("data-term", term.to_string()),
            ]);
            for r in members.iter() {
                let i = items.iter().position(|&it| it == r.item_a).unwrap();
                let j = items.iter().position(|&it| it == r.item_b).unwrap();
                let fill = if r.significant {
                    SIGNIFICANT
                } else {
                    NOT_SIGNIFICANT
                };
                let title = format!(
                    "{} {}: {} vs {} p={}",
                    r.fixed_key,
                    r.param_set,
                    r.item_a,
                    r.item_b,
                    format_sig12(r.p_value)
                );
                svg.rect(
                    x0 + j as f64 * cell,
                    y0 + i as f64 * cell,
                    cell - 1.0,
                    cell - 1.0,
                    fill,
                    &[
                        ("class", "cell".into()),
                        ("data-significant", r.significant.to_string()),
                    ],
                    Some(&title),
                );
            }
            svg.close();
        }
    }
    Ok(svg.finish())
}

pub fn emit_significance_matrices(
    rows: &[SignificanceRow],
    path: &Path,
) -> Result<(), ReportError> {
    write(path, &render_significance(rows)?)
}

/// Measures as rows, transformations as columns, each cell coloured by
/// its cluster; medoids are outlined.
pub fn render_typology_table(rows: &[TypologyRow]) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Incomplete("no typology rows".into()));
    }
    let measures: Vec<MeasureKind> = rows
        .iter()
        .map(|r| r.measure)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let transforms: Vec<TransformKind> = rows
        .iter()
        .map(|r| r.transform)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (cw, ch, left, top) = (70.0, 28.0, 60.0, 30.0);
    let mut svg = Svg::new(
        left + cw * transforms.len() as f64 + 10.0,
        top + ch * measures.len() as f64 + 10.0,
    );
    for (j, t) in transforms.iter().enumerate() {
        svg.text(
            left + cw * (j as f64 + 0.5),
            top - 10.0,
            11.0,
            "middle",
            t.as_str(),
        );
    }
    for (i, &m) in measures.iter().enumerate() {
        let y = top + ch * i as f64;
        svg.text(
            left - 8.0,
            y + ch / 2.0 + 4.0,
            11.0,
            "end",
            &measure_label(m),
        );
        for (j, &t) in transforms.iter().enumerate() {
            let x = left + cw * j as f64;
            let hits: Vec<&TypologyRow> = rows
                .iter()
                .filter(|r| r.measure == m && r.transform == t)
                .collect();
            match hits.as_slice() {
                [] => svg.rect(
                    x,
                    y,
                    cw - 2.0,
                    ch - 2.0,
                    "#eeeeee",
                    &[("class", "empty".into())],
                    None,
                ),
                [r] => {
                    let mut extra = vec![
                        ("class", "cell".into()),
                        ("data-cluster", r.cluster_id.to_string()),
                    ];
                    if r.is_medoid {
                        extra.push(("stroke", "#000".into()));
                        extra.push(("stroke-width", "2".into()));
                    }
                    let title = format!(
                        "{m} {t}: cluster {}{}",
                        r.cluster_id,
                        if r.is_medoid { " (medoid)" } else { "" }
                    );
                    svg.rect(
                        x,
                        y,
                        cw - 2.0,
                        ch - 2.0,
                        CLUSTER_COLORS[r.cluster_id % CLUSTER_COLORS.len()],
                        &extra,
                        Some(&title),
                    );
                }
                _ => {
                    return Err(ReportError::Incomplete(format!(
                        "{m}/{t} appears more than once"
                    )))
                }
            }
        }
    }
    Ok(svg.finish())
}

pub fn emit_typology_table(rows: &[TypologyRow], path: &Path) -> Result<(), ReportError> {
    write(path, &render_typology_table(rows)?)
}
