//! Chart data generation, rendering, and the `<chart>` ground-truth
//! annotation.
//!
//! Annotation grammar (public, consumed alongside the table grammar):
//!
//! ```text
//! <chart type="bar|pie|line|scatter"><table>...</table></chart>
//! ```
//!
//! Bar and pie tables hold one `(label, value)` row per datum. Line tables
//! open with a header row of x labels followed by one row per series, the
//! series name first. Scatter tables hold `(label, x, y)` rows. Numbers are
//! printed with at most two decimals, trailing zeros stripped, and no
//! thousands separators. Both bar orientations share `type="bar"`: the
//! orientation changes pixels, never the data schema.

use crate::config::GenerationConfig;
use crate::corpus::{join_units, sample_text_span, tokenize, TextCorpus};
use crate::error::{ParseError, RenderError};
use crate::font::FontRegistry;
use crate::layout::PageSpec;
use crate::raster::{Bbox, Canvas, Rgb};
use crate::table::{escape_html, PlacedText, Scanner};
use crate::text::{resolve_unit, space_advance};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChartKind {
    BarVertical,
    BarHorizontal,
    Pie,
    Line,
    Scatter,
}

impl ChartKind {
    /// The `type` attribute value in annotations. Orientation is purely
    /// visual, so both bars map to "bar".
    pub fn type_attr(&self) -> &'static str {
        match self {
            ChartKind::BarVertical | ChartKind::BarHorizontal => "bar",
            ChartKind::Pie => "pie",
            ChartKind::Line => "line",
            ChartKind::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieMode {
    /// Values sum to exactly 100.
    Percent,
    /// Values sum to exactly 1.
    Decimal,
}

/// The data a chart visualizes; shape depends on the kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartData {
    /// Bar and pie charts: one value per category label.
    Categorical {
        categories: Vec<String>,
        values: Vec<f64>,
    },
    /// Line charts: shared x labels, one named series of y values each.
    Lines {
        x_labels: Vec<String>,
        series: Vec<(String, Vec<f64>)>,
    },
    /// Scatter charts: labeled (x, y) points.
    Scatter { points: Vec<(String, f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartStyle {
    /// Rotation of vertical-bar x labels, degrees counterclockwise.
    pub label_rotation_deg: u32,
    /// Offset into the shared color palette.
    pub color_offset: usize,
    /// Scatter only: render the x axis without tick labels. Ground truth
    /// still carries full (x, y) pairs.
    pub omit_x_tick_labels: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub data: ChartData,
    pub style: ChartStyle,
    /// Set for pie charts; records which normalization the values carry.
    pub pie_mode: Option<PieMode>,
}

/// Formats a value with at most two decimals, trailing zeros stripped.
pub fn format_number(v: f64) -> String {
    let mut s = format!("{v:.2}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Quantizes to the 2-decimal grid the annotation prints.
fn quantize(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Largest-remainder apportionment of `total_units` quanta over positive
/// weights; every share is at least one unit and the shares sum exactly.
fn largest_remainder_shares(weights: &[f64], total_units: u64) -> Vec<u64> {
    let n = weights.len() as u64;
    assert!(n >= 1 && total_units >= n);
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights
        .iter()
        .map(|w| w / sum * total_units as f64)
        .collect();
    let mut shares: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let assigned: u64 = shares.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..(total_units - assigned) as usize {
        shares[order[i % order.len()]] += 1;
    }
    // No slice may print as zero.
    for i in 0..shares.len() {
        while shares[i] == 0 {
            let donor = (0..shares.len()).max_by_key(|&j| shares[j]).unwrap();
            shares[donor] -= 1;
            shares[i] += 1;
        }
    }
    debug_assert_eq!(shares.iter().sum::<u64>(), total_units);
    shares
}

fn sample_label<R: Rng>(corpus: &TextCorpus, max_units: usize, rng: &mut R) -> String {
    let span = sample_text_span(corpus, rng.random_range(1..=max_units), rng);
    join_units(&span)
}

fn sample_unique_labels<R: Rng>(
    corpus: &TextCorpus,
    count: usize,
    max_units: usize,
    rng: &mut R,
) -> Vec<String> {
    let mut labels: Vec<String> = Vec::with_capacity(count);
    for i in 0..count {
        let mut label = sample_label(corpus, max_units, rng);
        let mut attempts = 0;
        while labels.contains(&label) && attempts < 32 {
            label = sample_label(corpus, max_units, rng);
            attempts += 1;
        }
        if labels.contains(&label) {
            label = format!("{label}-{i}");
        }
        labels.push(label);
    }
    labels
}

/// Generates chart data and style for one chart of the given kind.
pub fn generate_chart_spec<R: Rng>(
    kind: ChartKind,
    corpus: &TextCorpus,
    cfg: &GenerationConfig,
    rng: &mut R,
) -> ChartSpec {
    let c = &cfg.chart;
    let title = sample_label(corpus, 4, rng);
    let value = |rng: &mut R| quantize(rng.random_range(c.value_range.0..=c.value_range.1));
    let mut pie_mode = None;

    let data = match kind {
        ChartKind::BarVertical | ChartKind::BarHorizontal => {
            let n = rng.random_range(c.bar_categories.0..=c.bar_categories.1) as usize;
            let categories = sample_unique_labels(corpus, n, 2, rng);
            let values = (0..n).map(|_| value(rng)).collect();
            ChartData::Categorical { categories, values }
        }
        ChartKind::Pie => {
            let n = rng.random_range(c.pie_slices.0..=c.pie_slices.1) as usize;
            let categories = sample_unique_labels(corpus, n, 2, rng);
            let mode = if rng.random_bool(c.percent_pie_probability) {
                PieMode::Percent
            } else {
                PieMode::Decimal
            };
            pie_mode = Some(mode);
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let values = match mode {
                // Integer percents summing to 100.
                PieMode::Percent => largest_remainder_shares(&weights, 100)
                    .into_iter()
                    .map(|u| u as f64)
                    .collect(),
                // Hundredths summing to 1.
                PieMode::Decimal => largest_remainder_shares(&weights, 100)
                    .into_iter()
                    .map(|u| u as f64 / 100.0)
                    .collect(),
            };
            ChartData::Categorical { categories, values }
        }
        ChartKind::Line => {
            let series_n = rng.random_range(c.line_series.0..=c.line_series.1) as usize;
            let points_n = rng.random_range(c.line_points.0..=c.line_points.1) as usize;
            let x_labels = if rng.random_bool(0.5) {
                (1..=points_n).map(|i| i.to_string()).collect()
            } else {
                sample_unique_labels(corpus, points_n, 1, rng)
            };
            let names = sample_unique_labels(corpus, series_n, 2, rng);
            let series = names
                .into_iter()
                .map(|name| (name, (0..points_n).map(|_| value(rng)).collect()))
                .collect();
            ChartData::Lines { x_labels, series }
        }
        ChartKind::Scatter => {
            let n = rng.random_range(c.scatter_points.0..=c.scatter_points.1) as usize;
            let points = (0..n)
                .map(|_| {
                    let label = sample_label(corpus, 1, rng);
                    (label, value(rng), value(rng))
                })
                .collect();
            ChartData::Scatter { points }
        }
    };

    let style = ChartStyle {
        label_rotation_deg: match kind {
            ChartKind::BarVertical => {
                c.rotation_degrees[rng.random_range(0..c.rotation_degrees.len())]
            }
            _ => 0,
        },
        color_offset: rng.random_range(0..CHART_PALETTE.len()),
        omit_x_tick_labels: kind == ChartKind::Scatter
            && rng.random_bool(c.omit_scatter_x_ticks_probability),
    };

    let spec = ChartSpec {
        kind,
        title,
        data,
        style,
        pie_mode,
    };
    debug_assert!(check_invariants(&spec).is_ok());
    spec
}

/// Kind-specific structural invariants; used by tests and verification.
pub fn check_invariants(spec: &ChartSpec) -> Result<(), String> {
    match (&spec.kind, &spec.data) {
        (ChartKind::Pie, ChartData::Categorical { values, .. }) => {
            if values.iter().any(|v| *v <= 0.0) {
                return Err("pie values must be positive".into());
            }
            let sum: f64 = values.iter().sum();
            let target = match spec.pie_mode {
                Some(PieMode::Percent) => 100.0,
                Some(PieMode::Decimal) => 1.0,
                None => return Err("pie chart lacks a mode".into()),
            };
            if (sum - target).abs() > 1e-9 {
                return Err(format!("pie values sum to {sum}, want {target}"));
            }
        }
        (ChartKind::BarVertical | ChartKind::BarHorizontal, ChartData::Categorical { categories, .. }) => {
            let mut seen = std::collections::HashSet::new();
            for label in categories {
                if !seen.insert(label) {
                    return Err(format!("duplicate bar category {label:?}"));
                }
            }
        }
        (ChartKind::Line, ChartData::Lines { x_labels, series }) => {
            if series.is_empty() || series.len() > 4 {
                return Err("line charts carry 1 to 4 series".into());
            }
            for (name, ys) in series {
                if ys.len() != x_labels.len() {
                    return Err(format!("series {name:?} length mismatch"));
                }
            }
        }
        (ChartKind::Scatter, ChartData::Scatter { points }) => {
            if points.len() < 5 || points.len() > 20 {
                return Err(format!("scatter point count {} outside [5, 20]", points.len()));
            }
        }
        _ => return Err("chart kind does not match its data shape".into()),
    }
    Ok(())
}

/// Rows of the annotation table, as printed strings.
pub fn annotation_rows(spec: &ChartSpec) -> Vec<Vec<String>> {
    match &spec.data {
        ChartData::Categorical { categories, values } => categories
            .iter()
            .zip(values)
            .map(|(label, v)| vec![label.clone(), format_number(*v)])
            .collect(),
        ChartData::Lines { x_labels, series } => {
            let mut rows = vec![x_labels.clone()];
            for (name, ys) in series {
                let mut row = vec![name.clone()];
                row.extend(ys.iter().map(|y| format_number(*y)));
                rows.push(row);
            }
            rows
        }
        ChartData::Scatter { points } => points
            .iter()
            .map(|(label, x, y)| vec![label.clone(), format_number(*x), format_number(*y)])
            .collect(),
    }
}

/// Emits the canonical `<chart>` annotation fragment.
pub fn chart_to_annotation(spec: &ChartSpec) -> String {
    let mut out = format!("<chart type=\"{}\"><table>", spec.kind.type_attr());
    for row in annotation_rows(spec) {
        out.push_str("<tr>");
        for cell in row {
            out.push_str("<td>");
            out.push_str(&escape_html(&cell));
            out.push_str("</td>");
        }
        out.push_str("</tr>");
    }
    out.push_str("</table></chart>");
    out
}

/// A chart annotation reconstructed from its fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedChart {
    pub type_attr: String,
    pub rows: Vec<Vec<String>>,
}

/// Strict parser for the `<chart>` grammar. Chart tables carry no spans and
/// may be ragged (the line-chart header row is one cell shorter), so this
/// uses its own row reader rather than the table-grid expansion.
pub fn parse_chart_annotation(input: &str) -> Result<ParsedChart, ParseError> {
    let mut s = Scanner::new(input);
    s.expect("<chart type=\"")?;
    let type_attr = s.take_until('"').to_string();
    s.expect("\">")?;
    if !matches!(type_attr.as_str(), "bar" | "pie" | "line" | "scatter") {
        return Err(ParseError::new(s.pos, format!("unknown chart type {type_attr:?}")));
    }

    let mut rows = Vec::new();
    let s = &mut s;
    s.expect("<table>")?;
    loop {
        if s.eat("</table>") {
            break;
        }
        s.expect("<tr>")?;
        let mut row = Vec::new();
        loop {
            if s.eat("</tr>") {
                break;
            }
            s.expect("<td>")?;
            let text = s.text_until_tag().to_string();
            s.expect("</td>")?;
            row.push(
                text.replace("&lt;", "<")
                    .replace("&gt;", ">")
                    .replace("&amp;", "&"),
            );
        }
        if row.is_empty() {
            return Err(ParseError::new(s.pos, "empty row"));
        }
        rows.push(row);
    }
    s.expect("</chart>")?;
    if !s.at_end() {
        return Err(ParseError::new(s.pos, "trailing input after </chart>"));
    }
    if rows.is_empty() {
        return Err(ParseError::new(s.pos, "chart without data rows"));
    }

    // Schema check per type.
    match type_attr.as_str() {
        "bar" | "pie" => {
            if rows.iter().any(|r| r.len() != 2) {
                return Err(ParseError::new(s.pos, "bar/pie rows must have 2 cells"));
            }
        }
        "line" => {
            if rows.len() < 2 {
                return Err(ParseError::new(s.pos, "line chart needs header and a series"));
            }
            let k = rows[0].len();
            if rows[1..].iter().any(|r| r.len() != k + 1) {
                return Err(ParseError::new(s.pos, "series row length mismatch"));
            }
        }
        "scatter" => {
            if rows.iter().any(|r| r.len() != 3) {
                return Err(ParseError::new(s.pos, "scatter rows must have 3 cells"));
            }
        }
        _ => unreachable!(),
    }
    Ok(ParsedChart { type_attr, rows })
}

/// Shared chart color palette; indexed modulo its length.
pub const CHART_PALETTE: [Rgb; 8] = [
    [66, 103, 178],
    [221, 94, 86],
    [88, 166, 92],
    [237, 162, 71],
    [123, 104, 190],
    [70, 172, 190],
    [188, 120, 166],
    [146, 146, 60],
];

/// One drawable chart shape. `palette` of `None` draws in the page text
/// color (axes, frames); `Some(i)` cycles the shared palette.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Segment {
        x0: i32,
        y0: i32,
        x1: i32,
        y1: i32,
        thickness: u32,
        palette: Option<usize>,
    },
    Rect {
        bbox: Bbox,
        palette: Option<usize>,
    },
    Disc {
        cx: i32,
        cy: i32,
        r: i32,
        palette: Option<usize>,
    },
    Slice {
        cx: i32,
        cy: i32,
        r: i32,
        start_deg: f64,
        sweep_deg: f64,
        palette: usize,
    },
}

/// A text run in a chart plan; rotation in degrees counterclockwise about
/// the run's baseline start.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartText {
    pub text: String,
    pub x: i32,
    pub baseline_y: i32,
    pub size_px: u32,
    pub rotation_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendPlan {
    /// (series name, palette index) per entry.
    pub entries: Vec<(String, usize)>,
    pub bbox: Bbox,
}

/// Vector draw list for one chart patch, patch-local coordinates.
#[derive(Debug, Clone)]
pub struct ChartPlan {
    pub shapes: Vec<Shape>,
    pub texts: Vec<ChartText>,
    pub legend: Option<LegendPlan>,
}

struct Frame {
    plot: Bbox,
    label_size: u32,
}

fn measure_text(registry: &FontRegistry, page: &PageSpec, text: &str, size: u32) -> u32 {
    let units = tokenize(text);
    let space = space_advance(registry, &page.font_id, size);
    let mut w = 0;
    for (i, unit) in units.iter().enumerate() {
        if i > 0 && crate::corpus::needs_space(units[i - 1].script, unit.script) {
            w += space;
        }
        w += resolve_unit(registry, unit, &page.font_id, size)
            .map(|r| r.advance_px)
            .unwrap_or(size);
    }
    w
}

/// Round the axis maximum up to a 1/2/5 x 10^k nice number.
fn nice_ceiling(max: f64) -> f64 {
    if max <= 0.0 {
        return 1.0;
    }
    let exp = max.log10().floor();
    let base = 10f64.powf(exp);
    for mult in [1.0, 2.0, 5.0, 10.0] {
        if mult * base >= max - 1e-9 {
            return mult * base;
        }
    }
    10.0 * base
}

const Y_TICKS: usize = 4;

fn data_max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0f64, f64::max)
}

/// Plans a chart inside a `w x h` patch.
pub fn plan_chart(
    spec: &ChartSpec,
    w: u32,
    h: u32,
    page: &PageSpec,
    registry: &FontRegistry,
) -> Result<ChartPlan, RenderError> {
    let label_size = ((page.base_font_size_px as f64 * 0.7).round() as u32).clamp(9, 22);
    let title_size = ((page.base_font_size_px as f64 * 0.9).round() as u32).clamp(11, 30);
    let left = (label_size * 4) as i32;
    let top = (title_size + 14) as i32;
    let bottom_pad = (label_size * 3) as i32;
    let right_pad = 14i32;
    let plot = Bbox::new(
        left,
        top,
        (w as i32 - left - right_pad).max(0) as u32,
        (h as i32 - top - bottom_pad).max(0) as u32,
    );
    if plot.w < 60 || plot.h < 50 {
        return Err(RenderError::InfeasibleCellSize {
            rows: 0,
            cols: 0,
            w,
            h,
        });
    }
    let frame = Frame { plot, label_size };

    let mut plan = ChartPlan {
        shapes: Vec::new(),
        texts: Vec::new(),
        legend: None,
    };

    // Title, centered.
    let title_w = measure_text(registry, page, &spec.title, title_size);
    plan.texts.push(ChartText {
        text: spec.title.clone(),
        x: (w as i32 - title_w as i32) / 2,
        baseline_y: title_size as i32 + 4,
        size_px: title_size,
        rotation_deg: 0.0,
    });

    match (&spec.kind, &spec.data) {
        (ChartKind::Pie, ChartData::Categorical { categories, values }) => {
            plan_pie(&mut plan, &frame, categories, values, spec.style.color_offset, registry, page);
        }
        (ChartKind::BarVertical, ChartData::Categorical { categories, values }) => {
            plan_bar_vertical(&mut plan, &frame, categories, values, spec, registry, page);
        }
        (ChartKind::BarHorizontal, ChartData::Categorical { categories, values }) => {
            plan_bar_horizontal(&mut plan, &frame, categories, values, spec, registry, page);
        }
        (ChartKind::Line, ChartData::Lines { x_labels, series }) => {
            plan_line(&mut plan, &frame, x_labels, series, spec, registry, page);
        }
        (ChartKind::Scatter, ChartData::Scatter { points }) => {
            plan_scatter(&mut plan, &frame, points, spec, registry, page);
        }
        _ => unreachable!("spec invariants guarantee matching shapes"),
    }
    Ok(plan)
}

fn axes(plan: &mut ChartPlan, plot: Bbox) {
    plan.shapes.push(Shape::Segment {
        x0: plot.x,
        y0: plot.y,
        x1: plot.x,
        y1: plot.bottom(),
        thickness: 1,
        palette: None,
    });
    plan.shapes.push(Shape::Segment {
        x0: plot.x,
        y0: plot.bottom(),
        x1: plot.right(),
        y1: plot.bottom(),
        thickness: 1,
        palette: None,
    });
}

fn y_axis_ticks(
    plan: &mut ChartPlan,
    frame: &Frame,
    max: f64,
    registry: &FontRegistry,
    page: &PageSpec,
) {
    let plot = frame.plot;
    for i in 0..=Y_TICKS {
        let v = max * i as f64 / Y_TICKS as f64;
        let y = plot.bottom() - (plot.h as f64 * i as f64 / Y_TICKS as f64) as i32;
        plan.shapes.push(Shape::Segment {
            x0: plot.x - 4,
            y0: y,
            x1: plot.x,
            y1: y,
            thickness: 1,
            palette: None,
        });
        let label = format_number(v);
        let lw = measure_text(registry, page, &label, frame.label_size);
        plan.texts.push(ChartText {
            text: label,
            x: plot.x - 6 - lw as i32,
            baseline_y: y + frame.label_size as i32 / 2 - 1,
            size_px: frame.label_size,
            rotation_deg: 0.0,
        });
    }
}

fn plan_pie(
    plan: &mut ChartPlan,
    frame: &Frame,
    categories: &[String],
    values: &[f64],
    color_offset: usize,
    registry: &FontRegistry,
    page: &PageSpec,
) {
    let plot = frame.plot;
    let cx = plot.x + plot.w as i32 / 2;
    let cy = plot.y + plot.h as i32 / 2;
    let r = (plot.w.min(plot.h) as i32 / 2 - frame.label_size as i32 - 4).max(10);
    let total: f64 = values.iter().sum();
    let mut start = 0.0f64;
    for (i, (label, v)) in categories.iter().zip(values).enumerate() {
        let sweep = v / total * 360.0;
        plan.shapes.push(Shape::Slice {
            cx,
            cy,
            r,
            start_deg: start,
            sweep_deg: sweep,
            palette: color_offset + i,
        });
        // Label just outside the slice midpoint.
        let mid = (start + sweep / 2.0).to_radians();
        let lx = cx as f64 + (r as f64 + 6.0) * mid.sin();
        let ly = cy as f64 - (r as f64 + 6.0) * mid.cos();
        let lw = measure_text(registry, page, label, frame.label_size);
        let x = if mid.sin() >= 0.0 {
            lx as i32
        } else {
            lx as i32 - lw as i32
        };
        plan.texts.push(ChartText {
            text: label.clone(),
            x,
            baseline_y: ly as i32 + frame.label_size as i32 / 2,
            size_px: frame.label_size,
            rotation_deg: 0.0,
        });
        start += sweep;
    }
}

fn plan_bar_vertical(
    plan: &mut ChartPlan,
    frame: &Frame,
    categories: &[String],
    values: &[f64],
    spec: &ChartSpec,
    registry: &FontRegistry,
    page: &PageSpec,
) {
    let plot = frame.plot;
    axes(plan, plot);
    let max = nice_ceiling(data_max(values.iter().copied()));
    y_axis_ticks(plan, frame, max, registry, page);
    let n = categories.len() as u32;
    let slot = plot.w / n;
    let bar_w = (slot * 3 / 5).max(2);
    let rotation = spec.style.label_rotation_deg as f64;
    for (i, (label, v)) in categories.iter().zip(values).enumerate() {
        let x0 = plot.x + (i as u32 * slot + (slot - bar_w) / 2) as i32;
        let bar_h = (plot.h as f64 * v / max).round() as u32;
        plan.shapes.push(Shape::Rect {
            bbox: Bbox::new(x0, plot.bottom() - bar_h as i32, bar_w, bar_h),
            palette: Some(spec.style.color_offset + i),
        });
        let tick_x = plot.x + (i as u32 * slot + slot / 2) as i32;
        let lw = measure_text(registry, page, label, frame.label_size) as f64;
        let (x, baseline_y) = if rotation == 0.0 {
            (
                tick_x - (lw / 2.0) as i32,
                plot.bottom() + frame.label_size as i32 + 4,
            )
        } else {
            // Rotated labels end near their tick, slanting down-left.
            let rad = rotation.to_radians();
            (
                tick_x - (lw * rad.cos()) as i32,
                plot.bottom() + 6 + (lw * rad.sin()) as i32,
            )
        };
        plan.texts.push(ChartText {
            text: label.clone(),
            x,
            baseline_y,
            size_px: frame.label_size,
            rotation_deg: rotation,
        });
    }
}

fn plan_bar_horizontal(
    plan: &mut ChartPlan,
    frame: &Frame,
    categories: &[String],
    values: &[f64],
    spec: &ChartSpec,
    registry: &FontRegistry,
    page: &PageSpec,
) {
    let plot = frame.plot;
    axes(plan, plot);
    let max = nice_ceiling(data_max(values.iter().copied()));
    // Value ticks along the bottom.
    for i in 0..=Y_TICKS {
        let v = max * i as f64 / Y_TICKS as f64;
        let x = plot.x + (plot.w as f64 * i as f64 / Y_TICKS as f64) as i32;
        plan.shapes.push(Shape::Segment {
            x0: x,
            y0: plot.bottom(),
            x1: x,
            y1: plot.bottom() + 4,
            thickness: 1,
            palette: None,
        });
        let label = format_number(v);
        let lw = measure_text(registry, page, &label, frame.label_size);
        plan.texts.push(ChartText {
            text: label,
            x: x - lw as i32 / 2,
            baseline_y: plot.bottom() + frame.label_size as i32 + 6,
            size_px: frame.label_size,
            rotation_deg: 0.0,
        });
    }
    let n = categories.len() as u32;
    let slot = plot.h / n;
    let bar_h = (slot * 3 / 5).max(2);
    for (i, (label, v)) in categories.iter().zip(values).enumerate() {
        let y0 = plot.y + (i as u32 * slot + (slot - bar_h) / 2) as i32;
        let bar_len = (plot.w as f64 * v / max).round() as u32;
        plan.shapes.push(Shape::Rect {
            bbox: Bbox::new(plot.x + 1, y0, bar_len, bar_h),
            palette: Some(spec.style.color_offset + i),
        });
        let lw = measure_text(registry, page, label, frame.label_size);
        plan.texts.push(ChartText {
            text: label.clone(),
            x: plot.x - 6 - lw as i32,
            baseline_y: y0 + (bar_h / 2) as i32 + frame.label_size as i32 / 2 - 1,
            size_px: frame.label_size,
            rotation_deg: 0.0,
        });
    }
}

fn plan_line(
    plan: &mut ChartPlan,
    frame: &Frame,
    x_labels: &[String],
    series: &[(String, Vec<f64>)],
    spec: &ChartSpec,
    registry: &FontRegistry,
    page: &PageSpec,
) {
    let plot = frame.plot;
    axes(plan, plot);
    let max = nice_ceiling(data_max(
        series.iter().flat_map(|(_, ys)| ys.iter().copied()),
    ));
    y_axis_ticks(plan, frame, max, registry, page);
    let k = x_labels.len().max(2);
    let x_at = |i: usize| plot.x + (plot.w as u64 * i as u64 / (k as u64 - 1)) as i32;
    let y_at = |v: f64| plot.bottom() - (plot.h as f64 * v / max).round() as i32;

    for (i, label) in x_labels.iter().enumerate() {
        let x = x_at(i);
        plan.shapes.push(Shape::Segment {
            x0: x,
            y0: plot.bottom(),
            x1: x,
            y1: plot.bottom() + 4,
            thickness: 1,
            palette: None,
        });
        let lw = measure_text(registry, page, label, frame.label_size);
        plan.texts.push(ChartText {
            text: label.clone(),
            x: x - lw as i32 / 2,
            baseline_y: plot.bottom() + frame.label_size as i32 + 6,
            size_px: frame.label_size,
            rotation_deg: 0.0,
        });
    }

    for (si, (_, ys)) in series.iter().enumerate() {
        let palette = spec.style.color_offset + si;
        for i in 1..ys.len() {
            plan.shapes.push(Shape::Segment {
                x0: x_at(i - 1),
                y0: y_at(ys[i - 1]),
                x1: x_at(i),
                y1: y_at(ys[i]),
                thickness: 2,
                palette: Some(palette),
            });
        }
        for (i, y) in ys.iter().enumerate() {
            plan.shapes.push(Shape::Disc {
                cx: x_at(i),
                cy: y_at(*y),
                r: 3,
                palette: Some(palette),
            });
        }
    }

    if series.len() >= 2 {
        let entry_h = frame.label_size + 6;
        let widest = series
            .iter()
            .map(|(name, _)| measure_text(registry, page, name, frame.label_size))
            .max()
            .unwrap_or(0);
        let box_w = widest + 26;
        let box_h = series.len() as u32 * entry_h + 8;
        let bbox = Bbox::new(
            plot.right() - box_w as i32 - 4,
            plot.y + 4,
            box_w,
            box_h,
        );
        plan.legend = Some(LegendPlan {
            entries: series
                .iter()
                .enumerate()
                .map(|(si, (name, _))| (name.clone(), spec.style.color_offset + si))
                .collect(),
            bbox,
        });
    }
}

fn plan_scatter(
    plan: &mut ChartPlan,
    frame: &Frame,
    points: &[(String, f64, f64)],
    spec: &ChartSpec,
    registry: &FontRegistry,
    page: &PageSpec,
) {
    let plot = frame.plot;
    axes(plan, plot);
    let max_x = nice_ceiling(data_max(points.iter().map(|p| p.1)));
    let max_y = nice_ceiling(data_max(points.iter().map(|p| p.2)));
    y_axis_ticks(plan, frame, max_y, registry, page);
    for i in 0..=Y_TICKS {
        let x = plot.x + (plot.w as f64 * i as f64 / Y_TICKS as f64) as i32;
        plan.shapes.push(Shape::Segment {
            x0: x,
            y0: plot.bottom(),
            x1: x,
            y1: plot.bottom() + 4,
            thickness: 1,
            palette: None,
        });
        if !spec.style.omit_x_tick_labels {
            let label = format_number(max_x * i as f64 / Y_TICKS as f64);
            let lw = measure_text(registry, page, &label, frame.label_size);
            plan.texts.push(ChartText {
                text: label,
                x: x - lw as i32 / 2,
                baseline_y: plot.bottom() + frame.label_size as i32 + 6,
                size_px: frame.label_size,
                rotation_deg: 0.0,
            });
        }
    }
    let palette = spec.style.color_offset;
    for (label, x, y) in points {
        let px = plot.x + (plot.w as f64 * x / max_x).round() as i32;
        let py = plot.bottom() - (plot.h as f64 * y / max_y).round() as i32;
        plan.shapes.push(Shape::Disc {
            cx: px,
            cy: py,
            r: 3,
            palette: Some(palette),
        });
        plan.texts.push(ChartText {
            text: label.clone(),
            x: px + 5,
            baseline_y: py - 3,
            size_px: frame.label_size.saturating_sub(2).max(8),
            rotation_deg: 0.0,
        });
    }
}

/// Rasterizes a chart plan into a patch of exactly `w x h` pixels.
pub fn rasterize_chart(
    plan: &ChartPlan,
    w: u32,
    h: u32,
    page: &PageSpec,
    registry: &FontRegistry,
) -> Canvas {
    let mut patch = Canvas::new(w, h, page.background_color);
    let clip = Bbox::new(0, 0, w, h);
    let color_of = |palette: &Option<usize>| match palette {
        Some(i) => CHART_PALETTE[i % CHART_PALETTE.len()],
        None => page.text_color,
    };
    for shape in &plan.shapes {
        match shape {
            Shape::Segment {
                x0,
                y0,
                x1,
                y1,
                thickness,
                palette,
            } => patch.line(*x0, *y0, *x1, *y1, *thickness, color_of(palette)),
            Shape::Rect { bbox, palette } => patch.fill_rect(*bbox, color_of(palette)),
            Shape::Disc { cx, cy, r, palette } => patch.fill_disc(*cx, *cy, *r, color_of(palette)),
            Shape::Slice {
                cx,
                cy,
                r,
                start_deg,
                sweep_deg,
                palette,
            } => patch.fill_pie_slice(
                *cx,
                *cy,
                *r,
                *start_deg,
                *sweep_deg,
                CHART_PALETTE[palette % CHART_PALETTE.len()],
            ),
        }
    }
    for text in &plan.texts {
        draw_chart_text(&mut patch, text, clip, page, registry);
    }
    if let Some(legend) = &plan.legend {
        patch.fill_rect(legend.bbox, page.background_color);
        patch.stroke_rect(legend.bbox, 1, page.text_color);
        let entry_h = (legend.bbox.h - 8) / legend.entries.len() as u32;
        for (i, (name, palette)) in legend.entries.iter().enumerate() {
            let y = legend.bbox.y + 4 + i as i32 * entry_h as i32;
            let swatch = Bbox::new(legend.bbox.x + 5, y + 2, 12, entry_h.saturating_sub(6).max(4));
            patch.fill_rect(swatch, CHART_PALETTE[palette % CHART_PALETTE.len()]);
            let placed = PlacedText {
                text: name.clone(),
                x: legend.bbox.x + 22,
                baseline_y: y + entry_h as i32 - 5,
                size_px: entry_h.saturating_sub(6).max(8),
                bold: false,
                clip: legend.bbox,
            };
            crate::table::draw_text_line(&mut patch, &placed, page, registry);
        }
    }
    patch
}

fn draw_chart_text(
    patch: &mut Canvas,
    text: &ChartText,
    clip: Bbox,
    page: &PageSpec,
    registry: &FontRegistry,
) {
    if text.rotation_deg == 0.0 {
        let placed = PlacedText {
            text: text.text.clone(),
            x: text.x,
            baseline_y: text.baseline_y,
            size_px: text.size_px,
            bold: false,
            clip,
        };
        crate::table::draw_text_line(patch, &placed, page, registry);
        return;
    }
    // Rotated run: rasterize unit masks and rotate each about the run
    // origin, advancing along the rotated baseline.
    let units = tokenize(&text.text);
    let space = space_advance(registry, &page.font_id, text.size_px);
    let rad = text.rotation_deg.to_radians();
    let (sin, cos) = (rad.sin(), rad.cos());
    let mut advance_along = 0f64;
    for (i, unit) in units.iter().enumerate() {
        if i > 0 && crate::corpus::needs_space(units[i - 1].script, unit.script) {
            advance_along += space as f64;
        }
        let Ok(resolved) = resolve_unit(registry, unit, &page.font_id, text.size_px) else {
            continue;
        };
        let Ok(glyph) = crate::text::render_word(
            registry,
            &resolved.unit,
            &resolved.font_id,
            text.size_px,
            page.text_color,
        ) else {
            continue;
        };
        let ox = text.x as f64 + advance_along * cos;
        let oy = text.baseline_y as f64 - advance_along * sin;
        // Shift from baseline start to the mask's top-left, rotated.
        let ascent = glyph.ascent_px as f64;
        let top_x = ox + ascent * sin;
        let top_y = oy - ascent * cos;
        patch.blend_mask_rotated(
            &glyph.mask,
            top_x.round() as i32,
            top_y.round() as i32,
            text.rotation_deg,
            page.text_color,
            Some(clip),
        );
        advance_along += resolved.advance_px as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn corpus() -> TextCorpus {
        TextCorpus::from_passages([
            "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu",
            "red orange yellow green blue indigo violet crimson amber teal",
        ])
        .unwrap()
    }

    fn cfg() -> GenerationConfig {
        GenerationConfig::default()
    }

    #[test]
    fn number_formatting_is_canonical() {
        assert_eq!(format_number(1096.0), "1096");
        assert_eq!(format_number(435.18), "435.18");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(30.0), "30");
        assert_eq!(format_number(12.345), "12.35"); // quantized upstream anyway
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn pie_percent_values_sum_to_exactly_100() {
        let corpus = corpus();
        let mut config = cfg();
        config.chart.percent_pie_probability = 1.0;
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_chart_spec(ChartKind::Pie, &corpus, &config, &mut rng);
            let ChartData::Categorical { values, .. } = &spec.data else {
                panic!("pie data shape");
            };
            assert!(values.iter().all(|v| *v > 0.0), "seed {seed}");
            let sum: f64 = values.iter().sum();
            assert_eq!(sum, 100.0, "seed {seed}");
            // The printed strings also sum to 100 exactly.
            let printed_sum: f64 = values
                .iter()
                .map(|v| format_number(*v).parse::<f64>().unwrap())
                .sum();
            assert_eq!(printed_sum, 100.0, "seed {seed}");
        }
    }

    #[test]
    fn pie_decimal_values_sum_to_exactly_1() {
        let corpus = corpus();
        let mut config = cfg();
        config.chart.percent_pie_probability = 0.0;
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_chart_spec(ChartKind::Pie, &corpus, &config, &mut rng);
            let ChartData::Categorical { values, .. } = &spec.data else {
                panic!("pie data shape");
            };
            let sum_units: i64 = values.iter().map(|v| (v * 100.0).round() as i64).sum();
            assert_eq!(sum_units, 100, "seed {seed}");
        }
    }

    #[test]
    fn equal_weights_split_a_decimal_pie_evenly() {
        let shares = largest_remainder_shares(&[1.0, 1.0], 100);
        assert_eq!(shares, vec![50, 50]);
        let values: Vec<f64> = shares.iter().map(|u| *u as f64 / 100.0).collect();
        assert_eq!(values, vec![0.5, 0.5]);
    }

    #[test]
    fn scatter_counts_stay_in_bounds() {
        let corpus = corpus();
        let config = cfg();
        for seed in 0..500 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_chart_spec(ChartKind::Scatter, &corpus, &config, &mut rng);
            let ChartData::Scatter { points } = &spec.data else {
                panic!("scatter data shape");
            };
            assert!(points.len() >= 5 && points.len() <= 20, "seed {seed}");
        }
    }

    #[test]
    fn bar_categories_are_unique() {
        let corpus = corpus();
        let config = cfg();
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_chart_spec(ChartKind::BarVertical, &corpus, &config, &mut rng);
            check_invariants(&spec).unwrap();
        }
    }

    #[test]
    fn line_series_share_x_labels() {
        let corpus = corpus();
        let config = cfg();
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_chart_spec(ChartKind::Line, &corpus, &config, &mut rng);
            check_invariants(&spec).unwrap();
            let ChartData::Lines { x_labels, series } = &spec.data else {
                panic!("line data shape");
            };
            assert!(!series.is_empty() && series.len() <= 4);
            for (_, ys) in series {
                assert_eq!(ys.len(), x_labels.len());
            }
        }
    }

    #[test]
    fn pie_annotation_matches_canonical_form() {
        let spec = ChartSpec {
            kind: ChartKind::Pie,
            title: "t".into(),
            data: ChartData::Categorical {
                categories: vec!["a".into(), "b".into()],
                values: vec![30.0, 70.0],
            },
            style: ChartStyle {
                label_rotation_deg: 0,
                color_offset: 0,
                omit_x_tick_labels: false,
            },
            pie_mode: Some(PieMode::Percent),
        };
        assert_eq!(
            chart_to_annotation(&spec),
            "<chart type=\"pie\"><table><tr><td>a</td><td>30</td></tr>\
             <tr><td>b</td><td>70</td></tr></table></chart>"
        );
    }

    #[test]
    fn scatter_row_uses_plain_number_formatting() {
        let spec = ChartSpec {
            kind: ChartKind::Scatter,
            title: "t".into(),
            data: ChartData::Scatter {
                points: vec![
                    ("p1".into(), 1096.0, 435.18),
                    ("p2".into(), 1.0, 2.0),
                    ("p3".into(), 3.0, 4.0),
                    ("p4".into(), 5.0, 6.0),
                    ("p5".into(), 7.0, 8.0),
                ],
            },
            style: ChartStyle {
                label_rotation_deg: 0,
                color_offset: 0,
                omit_x_tick_labels: false,
            },
            pie_mode: None,
        };
        let annotation = chart_to_annotation(&spec);
        assert!(annotation.contains("<td>p1</td><td>1096</td><td>435.18</td>"));
    }

    #[test]
    fn round_trip_on_random_specs_of_every_kind() {
        let corpus = corpus();
        let config = cfg();
        let kinds = [
            ChartKind::BarVertical,
            ChartKind::BarHorizontal,
            ChartKind::Pie,
            ChartKind::Line,
            ChartKind::Scatter,
        ];
        for seed in 0..200 {
            let kind = kinds[seed as usize % kinds.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_chart_spec(kind, &corpus, &config, &mut rng);
            let annotation = chart_to_annotation(&spec);
            let parsed =
                parse_chart_annotation(&annotation).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert_eq!(parsed.type_attr, kind.type_attr(), "seed {seed}");
            assert_eq!(parsed.rows, annotation_rows(&spec), "seed {seed}");
        }
    }

    #[test]
    fn parser_rejects_corruption() {
        let ok = "<chart type=\"pie\"><table><tr><td>a</td><td>1</td></tr></table></chart>";
        parse_chart_annotation(ok).unwrap();
        assert!(parse_chart_annotation(&ok[..ok.len() - 3]).is_err());
        assert!(parse_chart_annotation(&ok.replace("pie", "donut")).is_err());
        assert!(parse_chart_annotation(&format!("{ok} ")).is_err());
        // Scatter rows must have three cells.
        let bad = "<chart type=\"scatter\"><table><tr><td>a</td><td>1</td></tr></table></chart>";
        assert!(parse_chart_annotation(bad).is_err());
        // Line rows must be header + name-prefixed series rows.
        let bad = "<chart type=\"line\"><table><tr><td>x</td></tr><tr><td>s</td><td>1</td><td>2</td></tr></table></chart>";
        assert!(parse_chart_annotation(bad).is_err());
    }

    fn registry() -> FontRegistry {
        let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/fonts");
        FontRegistry::load(&dir).unwrap()
    }

    fn page() -> PageSpec {
        PageSpec {
            width_px: 960,
            height_px: 1280,
            margin_top: 40,
            margin_bottom: 40,
            margin_left: 40,
            margin_right: 40,
            column_count: 1,
            base_font_size_px: 20,
            font_id: "dejavu-sans".into(),
            text_color: [0, 0, 0],
            background_color: [255, 255, 255],
            line_spacing_factor: 1.3,
            segment_spacing_px: 16,
            alignment: crate::layout::Alignment::Left,
        }
    }

    fn style() -> ChartStyle {
        ChartStyle {
            label_rotation_deg: 0,
            color_offset: 0,
            omit_x_tick_labels: false,
        }
    }

    #[test]
    fn degenerate_pie_is_a_full_circle() {
        let spec = ChartSpec {
            kind: ChartKind::Pie,
            title: "whole".into(),
            data: ChartData::Categorical {
                categories: vec!["all".into()],
                values: vec![100.0],
            },
            style: style(),
            pie_mode: Some(PieMode::Percent),
        };
        let plan = plan_chart(&spec, 400, 300, &page(), &registry()).unwrap();
        let slices: Vec<&Shape> = plan
            .shapes
            .iter()
            .filter(|s| matches!(s, Shape::Slice { .. }))
            .collect();
        assert_eq!(slices.len(), 1);
        let Shape::Slice { sweep_deg, .. } = slices[0] else {
            unreachable!()
        };
        assert!((sweep_deg - 360.0).abs() < 1e-9);
    }

    #[test]
    fn two_series_line_gets_two_legend_entries() {
        let spec = ChartSpec {
            kind: ChartKind::Line,
            title: "trend".into(),
            data: ChartData::Lines {
                x_labels: vec!["1".into(), "2".into(), "3".into()],
                series: vec![
                    ("north".into(), vec![1.0, 2.0, 3.0]),
                    ("south".into(), vec![3.0, 2.0, 1.0]),
                ],
            },
            style: style(),
            pie_mode: None,
        };
        let plan = plan_chart(&spec, 420, 320, &page(), &registry()).unwrap();
        let legend = plan.legend.expect("legend for multi-series");
        assert_eq!(legend.entries.len(), 2);

        let single = ChartSpec {
            data: ChartData::Lines {
                x_labels: vec!["1".into(), "2".into(), "3".into()],
                series: vec![("only".into(), vec![1.0, 2.0, 3.0])],
            },
            ..spec
        };
        assert!(plan_chart(&single, 420, 320, &page(), &registry())
            .unwrap()
            .legend
            .is_none());
    }

    #[test]
    fn zero_rotation_long_labels_are_still_emitted() {
        let spec = ChartSpec {
            kind: ChartKind::BarVertical,
            title: "bars".into(),
            data: ChartData::Categorical {
                categories: vec![
                    "a very long category label".into(),
                    "another very long category label".into(),
                ],
                values: vec![10.0, 20.0],
            },
            style: style(),
            pie_mode: None,
        };
        let plan = plan_chart(&spec, 400, 300, &page(), &registry()).unwrap();
        let emitted: Vec<&str> = plan.texts.iter().map(|t| t.text.as_str()).collect();
        assert!(emitted.contains(&"a very long category label"));
        assert!(emitted.contains(&"another very long category label"));
    }

    #[test]
    fn scatter_omission_flag_drops_x_tick_labels_only() {
        let mk = |omit: bool| ChartSpec {
            kind: ChartKind::Scatter,
            title: "pts".into(),
            data: ChartData::Scatter {
                points: (0..6)
                    .map(|i| (format!("p{i}"), i as f64 * 10.0, i as f64 * 20.0))
                    .collect(),
            },
            style: ChartStyle {
                omit_x_tick_labels: omit,
                ..style()
            },
            pie_mode: None,
        };
        let with = plan_chart(&mk(false), 400, 300, &page(), &registry()).unwrap();
        let without = plan_chart(&mk(true), 400, 300, &page(), &registry()).unwrap();
        assert!(with.texts.len() > without.texts.len());
        // Annotation is identical either way.
        assert_eq!(
            annotation_rows(&mk(false)),
            annotation_rows(&mk(true))
        );
    }

    #[test]
    fn rendering_does_not_mutate_the_spec() {
        let corpus = corpus();
        let config = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let spec = generate_chart_spec(ChartKind::BarVertical, &corpus, &config, &mut rng);
        let before = chart_to_annotation(&spec);
        let plan = plan_chart(&spec, 420, 300, &page(), &registry()).unwrap();
        let _patch = rasterize_chart(&plan, 420, 300, &page(), &registry());
        assert_eq!(chart_to_annotation(&spec), before);
    }

    #[test]
    fn rasterized_chart_has_ink_of_palette_color() {
        let corpus = corpus();
        let config = cfg();
        for (seed, kind) in [
            (1, ChartKind::BarVertical),
            (2, ChartKind::BarHorizontal),
            (3, ChartKind::Pie),
            (4, ChartKind::Line),
            (5, ChartKind::Scatter),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_chart_spec(kind, &corpus, &config, &mut rng);
            let plan = plan_chart(&spec, 480, 340, &page(), &registry()).unwrap();
            let patch = rasterize_chart(&plan, 480, 340, &page(), &registry());
            assert_eq!((patch.width(), patch.height()), (480, 340));
            let blank = Canvas::new(480, 340, [255, 255, 255]);
            assert_ne!(patch.pixel_hash(), blank.pixel_hash(), "{kind:?}");
        }
    }
}
