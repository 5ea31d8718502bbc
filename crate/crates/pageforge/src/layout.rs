//! Three-scale layout planning: page attributes, region partition, and
//! line-level text arrangement.
//!
//! The partition algorithm slices each column into horizontal bands.
//! Structured elements claim whole bands sized from configured fractions of
//! the data area; leftover bands become text blocks. Non-overlap holds by
//! construction and is re-checked by tests with a brute-force pairwise
//! oracle.

use crate::config::GenerationConfig;
use crate::corpus::{needs_space, TokenUnit};
use crate::error::LayoutError;
use crate::raster::{Bbox, Rgb};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    TextBlock,
    NaturalImage,
    Table,
    Chart,
}

impl RegionKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::TextBlock => "text",
            RegionKind::NaturalImage => "natural_image",
            RegionKind::Table => "table",
            RegionKind::Chart => "chart",
        }
    }
}

/// A typed, positioned rectangle with its reading-order index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub bbox: Bbox,
    pub kind: RegionKind,
    pub reading_order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    Left,
    Justified,
}

/// Global layout and typography attributes for one page.
#[derive(Debug, Clone, PartialEq)]
pub struct PageSpec {
    pub width_px: u32,
    pub height_px: u32,
    pub margin_top: u32,
    pub margin_bottom: u32,
    pub margin_left: u32,
    pub margin_right: u32,
    pub column_count: u8,
    pub base_font_size_px: u32,
    pub font_id: String,
    pub text_color: Rgb,
    pub background_color: Rgb,
    pub line_spacing_factor: f64,
    pub segment_spacing_px: u32,
    pub alignment: Alignment,
}

impl PageSpec {
    /// Page interior after subtracting margins. All regions live inside it.
    pub fn data_area(&self) -> Bbox {
        Bbox::new(
            self.margin_left as i32,
            self.margin_top as i32,
            self.width_px - self.margin_left - self.margin_right,
            self.height_px - self.margin_top - self.margin_bottom,
        )
    }

    /// Vertical distance between consecutive baselines.
    pub fn line_pitch(&self) -> u32 {
        ((self.base_font_size_px as f64 * self.line_spacing_factor).round() as u32).max(1)
    }
}

/// One placed unit within a line: x offset relative to the block's left
/// edge, plus the advance used for spacing checks.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSlot {
    pub unit: TokenUnit,
    pub x: u32,
    pub advance: u32,
}

/// A laid-out text line. `baseline_y` is relative to the block's top edge.
#[derive(Debug, Clone, PartialEq)]
pub struct LineLayout {
    pub baseline_y: u32,
    pub slots: Vec<UnitSlot>,
    pub alignment: Alignment,
}

/// Per-unit measurements the line breaker needs.
#[derive(Debug, Clone)]
pub struct TextMetrics {
    pub advances: Vec<u32>,
    pub space_advance: u32,
    pub ascent_px: u32,
    pub descent_px: u32,
}

/// Samples the page-level attributes from the configured ranges.
/// `font_pool` lists candidate page font ids; two-column layouts are only
/// offered when `two_column_allowed` (pages carrying structured elements
/// stay single-column).
pub fn plan_page<R: Rng>(
    cfg: &GenerationConfig,
    font_pool: &[String],
    two_column_allowed: bool,
    rng: &mut R,
) -> Result<PageSpec, LayoutError> {
    let p = &cfg.page;
    if font_pool.is_empty() {
        return Err(LayoutError::InconsistentRange {
            field: "page.font_ids",
        });
    }
    let width_px = sample_u32(p.width_px, rng);
    let height_px = sample_u32(p.height_px, rng);
    let margin_top = sample_u32(p.margin_px, rng);
    let margin_bottom = sample_u32(p.margin_px, rng);
    let margin_left = sample_u32(p.margin_px, rng);
    let margin_right = sample_u32(p.margin_px, rng);
    let column_count = if two_column_allowed && rng.random_bool(p.two_column_probability) {
        2
    } else {
        1
    };
    let base_font_size_px = sample_u32(p.base_font_size_px, rng);
    let font_id = font_pool[rng.random_range(0..font_pool.len())].clone();
    let text_color = p.text_colors[rng.random_range(0..p.text_colors.len())];
    let background_color = p.background_colors[rng.random_range(0..p.background_colors.len())];
    let line_spacing_factor = sample_f64(p.line_spacing_factor, rng);
    let segment_spacing_px = sample_u32(p.segment_spacing_px, rng);
    let alignment = if rng.random_bool(p.justify_probability) {
        Alignment::Justified
    } else {
        Alignment::Left
    };

    let spec = PageSpec {
        width_px,
        height_px,
        margin_top,
        margin_bottom,
        margin_left,
        margin_right,
        column_count,
        base_font_size_px,
        font_id,
        text_color,
        background_color,
        line_spacing_factor,
        segment_spacing_px,
        alignment,
    };
    debug_assert!(spec.data_area().w > 0 && spec.data_area().h > 0);
    debug_assert!(spec.base_font_size_px <= spec.data_area().h);
    Ok(spec)
}

fn sample_u32<R: Rng>(range: (u32, u32), rng: &mut R) -> u32 {
    rng.random_range(range.0..=range.1)
}

fn sample_f64<R: Rng>(range: (f64, f64), rng: &mut R) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.random_range(range.0..range.1)
    }
}

/// Samples how many structured elements a free-form page carries (0, 1, or
/// 2 by configured weights) and which kinds.
pub fn sample_element_plan<R: Rng>(cfg: &GenerationConfig, rng: &mut R) -> Vec<RegionKind> {
    let weights = cfg.elements.count_weights;
    let total: f64 = weights.iter().sum();
    let mut draw = rng.random_range(0.0..total);
    let mut count = 0;
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            count = i;
            break;
        }
        draw -= w;
    }
    const KINDS: [RegionKind; 3] = [RegionKind::NaturalImage, RegionKind::Table, RegionKind::Chart];
    (0..count)
        .map(|_| KINDS[rng.random_range(0..KINDS.len())])
        .collect()
}

/// Splits the data area into non-overlapping regions: every requested
/// element claims a band, leftover bands become text blocks, and reading
/// order runs top-to-bottom within columns, left column first.
pub fn partition_regions<R: Rng>(
    page: &PageSpec,
    element_plan: &[RegionKind],
    cfg: &GenerationConfig,
    rng: &mut R,
) -> Result<Vec<Region>, LayoutError> {
    let data = page.data_area();
    let mut bands: Vec<(u8, Bbox, RegionKind)> = Vec::new();

    if element_plan.is_empty() {
        let columns = page.column_count.max(1) as u32;
        let gutter = 2 * page.segment_spacing_px;
        let col_w = (data.w - gutter * (columns - 1)) / columns;
        for col in 0..columns {
            let x = data.x + (col * (col_w + gutter)) as i32;
            slice_text_column(page, Bbox::new(x, data.y, col_w, data.h), col as u8, rng, &mut bands);
        }
    } else {
        debug_assert_eq!(page.column_count, 1, "element pages are single-column");
        place_element_bands(page, element_plan, cfg, rng, data, &mut bands)?;
    }

    bands.sort_by_key(|(col, bbox, _)| (*col, bbox.y, bbox.x));
    let regions = bands
        .into_iter()
        .enumerate()
        .map(|(i, (_, bbox, kind))| Region {
            bbox,
            kind,
            reading_order: i as u32,
        })
        .collect();
    Ok(regions)
}

fn slice_text_column<R: Rng>(
    page: &PageSpec,
    column: Bbox,
    col_index: u8,
    rng: &mut R,
    out: &mut Vec<(u8, Bbox, RegionKind)>,
) {
    let seg = page.segment_spacing_px;
    let band_min = 2 * page.line_pitch() + seg;
    let max_bands = (column.h / band_min.max(1)).max(1);
    let n = rng.random_range(1..=3u32).min(max_bands);
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total_w: f64 = weights.iter().sum();
    let avail = column.h - seg * (n - 1);
    let mut y = column.y;
    for (i, w) in weights.iter().enumerate() {
        let h = if i as u32 == n - 1 {
            (column.bottom() - y).max(0) as u32
        } else {
            (avail as f64 * w / total_w).floor() as u32
        };
        if h > 0 {
            out.push((
                col_index,
                Bbox::new(column.x, y, column.w, h),
                RegionKind::TextBlock,
            ));
        }
        y += h as i32 + seg as i32;
    }
}

fn place_element_bands<R: Rng>(
    page: &PageSpec,
    element_plan: &[RegionKind],
    cfg: &GenerationConfig,
    rng: &mut R,
    data: Bbox,
    out: &mut Vec<(u8, Bbox, RegionKind)>,
) -> Result<(), LayoutError> {
    let e = &cfg.elements;
    if e.min_width_px > data.w || e.min_height_px > data.h {
        return Err(LayoutError::PlacementInfeasible {
            kind: element_plan[0].name(),
            min_w: e.min_width_px,
            min_h: e.min_height_px,
            avail_w: data.w,
            avail_h: data.h,
        });
    }

    let mut order: Vec<RegionKind> = element_plan.to_vec();
    order.shuffle(rng);

    struct Elem {
        kind: RegionKind,
        w: u32,
        h: u32,
    }
    let mut elems = Vec::with_capacity(order.len());
    for kind in &order {
        let frac_range = match kind {
            RegionKind::Table => e.table_height_frac,
            RegionKind::Chart => e.chart_height_frac,
            RegionKind::NaturalImage => e.image_height_frac,
            RegionKind::TextBlock => unreachable!("text is never in an element plan"),
        };
        let h = ((sample_f64(frac_range, rng) * data.h as f64) as u32)
            .max(e.min_height_px)
            .min(data.h);
        let w = ((sample_f64(e.width_frac, rng) * data.w as f64) as u32)
            .max(e.min_width_px)
            .min(data.w);
        elems.push(Elem {
            kind: *kind,
            w,
            h,
        });
    }

    let n = elems.len() as u32;
    let seg = page.segment_spacing_px;
    let total_elem_h: u32 = elems.iter().map(|e| e.h).sum();
    let reserve = total_elem_h as i64 + (2 * n * seg) as i64;
    let text_avail = data.h as i64 - reserve;
    if text_avail < 0 {
        return Err(LayoutError::PlacementInfeasible {
            kind: order[0].name(),
            min_w: e.min_width_px,
            min_h: total_elem_h,
            avail_w: data.w,
            avail_h: data.h,
        });
    }

    let gap_weights: Vec<f64> = (0..=n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total_gap_w: f64 = gap_weights.iter().sum();
    let min_text_band = 2 * page.line_pitch();

    let mut y = data.y;
    for (i, weight) in gap_weights.iter().enumerate() {
        let gap_h = (text_avail as f64 * weight / total_gap_w).floor() as u32;
        if gap_h >= min_text_band {
            out.push((
                0,
                Bbox::new(data.x, y, data.w, gap_h),
                RegionKind::TextBlock,
            ));
            y += gap_h as i32 + seg as i32;
        } else {
            y += gap_h as i32;
        }
        if i < n as usize {
            let elem = &elems[i];
            let x = data.x + ((data.w - elem.w) / 2) as i32;
            out.push((0, Bbox::new(x, y, elem.w, elem.h), elem.kind));
            y += elem.h as i32 + seg as i32;
        }
    }
    debug_assert!(y - seg as i32 <= data.bottom() + 1);
    Ok(())
}

/// Greedy line breaking: a unit moves to the next line when it would cross
/// the block's right edge; a unit wider than the whole block gets a line of
/// its own (rendering clips it). Returns the laid-out lines and how many
/// units were consumed.
pub fn layout_lines(
    block: &Region,
    units: &[TokenUnit],
    metrics: &TextMetrics,
    page: &PageSpec,
) -> (Vec<LineLayout>, usize) {
    assert_eq!(block.kind, RegionKind::TextBlock, "layout_lines needs a text block");
    assert_eq!(units.len(), metrics.advances.len());
    debug_assert!(metrics.advances.iter().all(|&a| a > 0));

    let pitch = page.line_pitch();
    let max_lines = (block.bbox.h / pitch) as usize;
    if max_lines == 0 || units.is_empty() {
        return (Vec::new(), 0);
    }
    let width = block.bbox.w;

    let mut lines: Vec<LineLayout> = Vec::new();
    let mut slots: Vec<UnitSlot> = Vec::new();
    let mut cursor = 0u32;
    let mut consumed = 0usize;

    for (i, unit) in units.iter().enumerate() {
        let advance = metrics.advances[i];
        let gap = match slots.last() {
            Some(last) if needs_space(last.unit.script, unit.script) => metrics.space_advance,
            Some(_) => 0,
            None => 0,
        };
        if !slots.is_empty() && cursor + gap + advance > width {
            let full = finish_line(&mut slots, lines.len() as u32, pitch, width, page, true);
            lines.push(full);
            cursor = 0;
            if lines.len() == max_lines {
                break;
            }
        }
        let x = if slots.is_empty() { 0 } else { cursor + gap };
        slots.push(UnitSlot {
            unit: unit.clone(),
            x,
            advance,
        });
        cursor = x + advance;
        consumed += 1;
    }
    if !slots.is_empty() && lines.len() < max_lines {
        let line = finish_line(&mut slots, lines.len() as u32, pitch, width, page, false);
        lines.push(line);
    }

    (lines, consumed)
}

fn finish_line(
    slots: &mut Vec<UnitSlot>,
    index: u32,
    pitch: u32,
    width: u32,
    page: &PageSpec,
    broke_on_overflow: bool,
) -> LineLayout {
    let mut taken = std::mem::take(slots);
    let mut alignment = Alignment::Left;
    if page.alignment == Alignment::Justified && broke_on_overflow && taken.len() >= 2 {
        let last = taken.last().unwrap();
        let natural = last.x + last.advance;
        let extra = width.saturating_sub(natural);
        // Stretching a sparse line looks worse than ragged-right.
        if extra > 0 && extra <= width / 3 {
            let gaps = (taken.len() - 1) as u32;
            let base = extra / gaps;
            let remainder = extra % gaps;
            let mut shift = 0u32;
            for (i, slot) in taken.iter_mut().enumerate().skip(1) {
                shift += base + if (i as u32) <= remainder { 1 } else { 0 };
                slot.x += shift;
            }
            alignment = Alignment::Justified;
        }
    }
    LineLayout {
        baseline_y: index * pitch + baseline_offset(page),
        slots: taken,
        alignment,
    }
}

/// Baseline position within a line band. The ascent is approximated from
/// the font size; compose clips ink to the block, so a tall ascender can
/// never leak into a neighboring region.
fn baseline_offset(page: &PageSpec) -> u32 {
    (page.base_font_size_px as f64 * 0.95).round() as u32
}

/// Test/verification helper: total pairwise overlap area plus any
/// out-of-bounds area. Zero means the layout is sound.
pub fn layout_violation_area(page: &PageSpec, regions: &[Region]) -> u64 {
    let data = page.data_area();
    let mut area = 0u64;
    for (i, a) in regions.iter().enumerate() {
        for b in regions.iter().skip(i + 1) {
            area += a.bbox.intersection_area(&b.bbox);
        }
        if !data.contains(&a.bbox) {
            let inside = data.intersection_area(&a.bbox);
            area += (a.bbox.w as u64 * a.bbox.h as u64) - inside;
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Script};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_page() -> PageSpec {
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
            line_spacing_factor: 1.25,
            segment_spacing_px: 16,
            alignment: Alignment::Left,
        }
    }

    #[test]
    fn default_config_yields_expected_canvas() {
        let cfg = GenerationConfig::default();
        let pool = vec!["dejavu-sans".to_string()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let page = plan_page(&cfg, &pool, true, &mut rng).unwrap();
        assert_eq!((page.width_px, page.height_px), (960, 1280));
    }

    #[test]
    fn data_area_arithmetic() {
        let page = test_page();
        let data = page.data_area();
        assert_eq!((data.w, data.h), (880, 1200));
        assert_eq!((data.x, data.y), (40, 40));
    }

    #[test]
    fn plan_page_is_deterministic() {
        let cfg = GenerationConfig::default();
        let pool = vec!["dejavu-sans".to_string(), "boxhan".to_string()];
        let a = plan_page(&cfg, &pool, true, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = plan_page(&cfg, &pool, true, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_attributes_stay_in_range() {
        let cfg = GenerationConfig::default();
        let pool = vec!["dejavu-sans".to_string()];
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let page = plan_page(&cfg, &pool, true, &mut rng).unwrap();
            let p = &cfg.page;
            assert!(page.base_font_size_px >= p.base_font_size_px.0);
            assert!(page.base_font_size_px <= p.base_font_size_px.1);
            for m in [
                page.margin_top,
                page.margin_bottom,
                page.margin_left,
                page.margin_right,
            ] {
                assert!(m >= p.margin_px.0 && m <= p.margin_px.1);
            }
            assert!(page.line_spacing_factor >= p.line_spacing_factor.0);
            assert!(page.line_spacing_factor <= p.line_spacing_factor.1);
            assert!(page.column_count == 1 || page.column_count == 2);
        }
    }

    #[test]
    fn empty_plan_tiles_text_blocks() {
        let cfg = GenerationConfig::default();
        let page = test_page();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let regions = partition_regions(&page, &[], &cfg, &mut rng).unwrap();
            assert!(!regions.is_empty());
            assert!(regions.iter().all(|r| r.kind == RegionKind::TextBlock));
            assert_eq!(layout_violation_area(&page, &regions), 0);
        }
    }

    #[test]
    fn single_table_plan_places_one_table_without_overlap() {
        let cfg = GenerationConfig::default();
        let page = test_page();
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let regions = partition_regions(&page, &[RegionKind::Table], &cfg, &mut rng).unwrap();
            let tables = regions
                .iter()
                .filter(|r| r.kind == RegionKind::Table)
                .count();
            assert_eq!(tables, 1, "seed {seed}");
            // Brute-force pairwise intersection oracle.
            for (i, a) in regions.iter().enumerate() {
                for b in regions.iter().skip(i + 1) {
                    assert_eq!(
                        a.bbox.intersection_area(&b.bbox),
                        0,
                        "seed {seed}: {a:?} vs {b:?}"
                    );
                }
            }
            assert_eq!(layout_violation_area(&page, &regions), 0, "seed {seed}");
        }
    }

    #[test]
    fn two_element_plans_fit_or_fail_cleanly() {
        let cfg = GenerationConfig::default();
        let page = test_page();
        let mut placed = 0;
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match partition_regions(
                &page,
                &[RegionKind::Chart, RegionKind::NaturalImage],
                &cfg,
                &mut rng,
            ) {
                Ok(regions) => {
                    placed += 1;
                    assert_eq!(layout_violation_area(&page, &regions), 0);
                    assert_eq!(
                        regions
                            .iter()
                            .filter(|r| r.kind != RegionKind::TextBlock)
                            .count(),
                        2
                    );
                }
                Err(LayoutError::PlacementInfeasible { .. }) => {}
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
        assert!(placed > 30, "most seeds should place two elements: {placed}");
    }

    #[test]
    fn oversized_element_is_infeasible() {
        let mut cfg = GenerationConfig::default();
        cfg.elements.min_height_px = 5000;
        let page = test_page();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = partition_regions(&page, &[RegionKind::Chart], &cfg, &mut rng).unwrap_err();
        assert!(matches!(err, LayoutError::PlacementInfeasible { .. }));
    }

    #[test]
    fn reading_order_is_column_major_permutation() {
        let cfg = GenerationConfig::default();
        let mut page = test_page();
        page.column_count = 2;
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let regions = partition_regions(&page, &[], &cfg, &mut rng).unwrap();
            let mut orders: Vec<u32> = regions.iter().map(|r| r.reading_order).collect();
            orders.sort_unstable();
            assert_eq!(orders, (0..regions.len() as u32).collect::<Vec<_>>());
            // Consistent with (x bucket, then y): regions arrive sorted.
            for pair in regions.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                assert!(
                    a.bbox.x < b.bbox.x || (a.bbox.x == b.bbox.x && a.bbox.y <= b.bbox.y),
                    "seed {seed}"
                );
            }
        }
    }

    fn metrics_for(units: &[TokenUnit], advance: u32) -> TextMetrics {
        TextMetrics {
            advances: vec![advance; units.len()],
            space_advance: 0,
            ascent_px: 16,
            descent_px: 4,
        }
    }

    #[test]
    fn greedy_break_matches_arithmetic() {
        let page = test_page();
        let block = Region {
            bbox: Bbox::new(0, 0, 250, 200),
            kind: RegionKind::TextBlock,
            reading_order: 0,
        };
        let units = tokenize("文档理"); // three CJK units, no inter-unit gap
        let metrics = metrics_for(&units, 100);
        let (lines, consumed) = layout_lines(&block, &units, &metrics, &page);
        assert_eq!(consumed, 3);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].slots.len(), 2);
        assert_eq!(lines[1].slots.len(), 1);
    }

    #[test]
    fn oversized_unit_gets_its_own_line() {
        let page = test_page();
        let block = Region {
            bbox: Bbox::new(0, 0, 80, 200),
            kind: RegionKind::TextBlock,
            reading_order: 0,
        };
        let units = vec![
            TokenUnit {
                text: "supercalifragilistic".into(),
                script: Script::Latin,
            },
            TokenUnit {
                text: "ok".into(),
                script: Script::Latin,
            },
        ];
        let metrics = TextMetrics {
            advances: vec![300, 30],
            space_advance: 8,
            ascent_px: 16,
            descent_px: 4,
        };
        let (lines, consumed) = layout_lines(&block, &units, &metrics, &page);
        assert_eq!(consumed, 2);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].slots.len(), 1, "oversized unit placed alone");
        assert_eq!(lines[0].slots[0].x, 0);
    }

    #[test]
    fn short_block_consumes_nothing() {
        let page = test_page(); // pitch = 25
        let block = Region {
            bbox: Bbox::new(0, 0, 400, 20),
            kind: RegionKind::TextBlock,
            reading_order: 0,
        };
        let units = tokenize("hello world");
        let metrics = metrics_for(&units, 50);
        let (lines, consumed) = layout_lines(&block, &units, &metrics, &page);
        assert!(lines.is_empty());
        assert_eq!(consumed, 0);
    }

    #[test]
    fn slots_never_overlap_and_fit_block() {
        let page = test_page();
        let block = Region {
            bbox: Bbox::new(0, 0, 300, 500),
            kind: RegionKind::TextBlock,
            reading_order: 0,
        };
        let units = tokenize("the quick brown fox jumps over the lazy dog again and again");
        let metrics = TextMetrics {
            advances: units.iter().map(|u| 20 * u.text.len() as u32).collect(),
            space_advance: 9,
            ascent_px: 16,
            descent_px: 4,
        };
        let (lines, consumed) = layout_lines(&block, &units, &metrics, &page);
        assert_eq!(consumed, units.len());
        for line in &lines {
            for pair in line.slots.windows(2) {
                assert!(pair[0].x + pair[0].advance <= pair[1].x, "slots overlap");
            }
            assert!(line.baseline_y < block.bbox.h);
        }
    }

    #[test]
    fn justified_lines_stretch_to_block_width() {
        let mut page = test_page();
        page.alignment = Alignment::Justified;
        let block = Region {
            bbox: Bbox::new(0, 0, 320, 500),
            kind: RegionKind::TextBlock,
            reading_order: 0,
        };
        let units = tokenize("aa bb cc dd ee ff gg hh ii jj kk ll");
        let metrics = TextMetrics {
            advances: vec![60; units.len()],
            space_advance: 10,
            ascent_px: 16,
            descent_px: 4,
        };
        let (lines, _) = layout_lines(&block, &units, &metrics, &page);
        assert!(lines.len() >= 2);
        let first = &lines[0];
        assert_eq!(first.alignment, Alignment::Justified);
        let last_slot = first.slots.last().unwrap();
        assert_eq!(last_slot.x + last_slot.advance, block.bbox.w);
        // Final line stays ragged.
        assert_eq!(lines.last().unwrap().alignment, Alignment::Left);
    }
}
