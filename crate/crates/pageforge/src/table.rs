//! Table generation, rendering, and the canonical HTML ground-truth
//! fragment.
//!
//! The HTML grammar is public: annotation consumers depend on it. Canonical
//! form is lowercase tags, double-quoted attributes, `rowspan`/`colspan`
//! only when greater than one, no `<th>`, no whitespace between tags, and
//! `&amp;` `&lt;` `&gt;` as the only entities. [`parse_table_html`] is the
//! matching strict parser, used both as the round-trip oracle in tests and
//! by dataset verification.

use crate::config::GenerationConfig;
use crate::corpus::{join_units, sample_text_span, tokenize, TextCorpus};
use crate::error::{ParseError, RenderError};
use crate::font::FontRegistry;
use crate::layout::PageSpec;
use crate::raster::{Bbox, Canvas};
use crate::text::{render_word, resolve_unit, space_advance};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableStyle {
    /// Complete borders; suits dense content with wrapped cell text.
    Gridlined,
    /// Only a top rule, a header rule, and a bottom rule.
    Gridless,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub text: String,
    pub row_span: u32,
    pub col_span: u32,
    /// True when this grid position belongs to some other anchor's span.
    pub covered: bool,
}

impl Cell {
    fn plain(text: String) -> Self {
        Cell {
            text,
            row_span: 1,
            col_span: 1,
            covered: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSpec {
    pub rows: u32,
    pub cols: u32,
    pub cells: Vec<Vec<Cell>>,
    pub style: TableStyle,
}

impl TableSpec {
    /// Anchor cells as (row, col, row_span, col_span, text), row-major.
    pub fn anchors(&self) -> Vec<(u32, u32, u32, u32, &str)> {
        let mut out = Vec::new();
        for (r, row) in self.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if !cell.covered {
                    out.push((r as u32, c as u32, cell.row_span, cell.col_span, cell.text.as_str()));
                }
            }
        }
        out
    }

    /// Owner anchor of each grid position, or `None` for the anchor itself.
    fn owner_grid(&self) -> Vec<Vec<(u32, u32)>> {
        let mut owner = vec![vec![(u32::MAX, u32::MAX); self.cols as usize]; self.rows as usize];
        for (r, c, rs, cs, _) in self.anchors() {
            for rr in r..r + rs {
                for cc in c..c + cs {
                    owner[rr as usize][cc as usize] = (r, c);
                }
            }
        }
        owner
    }
}

/// Generates table structure and content. Merges are sampled as 2-cell span
/// rectangles that must not overlap an earlier accepted span.
pub fn generate_table_spec<R: Rng>(
    corpus: &TextCorpus,
    cfg: &GenerationConfig,
    rng: &mut R,
) -> TableSpec {
    let t = &cfg.table;
    let rows = rng.random_range(t.rows.0..=t.rows.1);
    let cols = rng.random_range(t.cols.0..=t.cols.1);
    let style = if rng.random_bool(t.gridlined_weight / (t.gridlined_weight + t.gridless_weight)) {
        TableStyle::Gridlined
    } else {
        TableStyle::Gridless
    };

    let mut cells: Vec<Vec<Cell>> = (0..rows)
        .map(|_| (0..cols).map(|_| Cell::plain(String::new())).collect())
        .collect();

    // Cell merging: up to rows*cols/4 candidate 2-cell spans, each kept only
    // when it touches no cell already involved in a span.
    let mut in_span = vec![vec![false; cols as usize]; rows as usize];
    let candidates = (rows * cols / 4) as usize;
    for _ in 0..candidates {
        if !rng.random_bool(t.merge_probability) {
            continue;
        }
        let vertical = rng.random_bool(0.5);
        let (r, c) = (
            rng.random_range(0..rows) as usize,
            rng.random_range(0..cols) as usize,
        );
        let (r2, c2) = if vertical { (r + 1, c) } else { (r, c + 1) };
        if r2 >= rows as usize || c2 >= cols as usize {
            continue;
        }
        if in_span[r][c] || in_span[r2][c2] {
            continue;
        }
        in_span[r][c] = true;
        in_span[r2][c2] = true;
        if vertical {
            cells[r][c].row_span = 2;
        } else {
            cells[r][c].col_span = 2;
        }
        cells[r2][c2].covered = true;
    }

    let max_units = match style {
        TableStyle::Gridlined => t.cell_span_units.1,
        TableStyle::Gridless => t.cell_span_units.1.min(2),
    };
    for r in 0..rows as usize {
        for c in 0..cols as usize {
            if cells[r][c].covered {
                continue;
            }
            let units = rng.random_range(t.cell_span_units.0..=max_units.max(t.cell_span_units.0));
            let span = sample_text_span(corpus, units as usize, rng);
            cells[r][c].text = join_units(&span);
        }
    }

    let spec = TableSpec {
        rows,
        cols,
        cells,
        style,
    };
    debug_assert!(spec_tiles_exactly(&spec));
    spec
}

/// Checks the span-tiling invariant: every grid position is owned by
/// exactly one anchor, and covered flags agree with the spans.
pub fn spec_tiles_exactly(spec: &TableSpec) -> bool {
    let mut claimed = vec![vec![0u32; spec.cols as usize]; spec.rows as usize];
    for (r, row) in spec.cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if cell.covered {
                continue;
            }
            if cell.text.is_empty() {
                return false;
            }
            for rr in r..r + cell.row_span as usize {
                for cc in c..c + cell.col_span as usize {
                    if rr >= spec.rows as usize || cc >= spec.cols as usize {
                        return false;
                    }
                    claimed[rr][cc] += 1;
                    if (rr, cc) != (r, c) && !spec.cells[rr][cc].covered {
                        return false;
                    }
                }
            }
        }
    }
    claimed.iter().flatten().all(|&n| n == 1)
}

pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            other => out.push(other),
        }
    }
    out
}

fn unescape_html(text: &str) -> String {
    text.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&amp;", "&")
}

/// Emits the canonical HTML fragment for a table.
pub fn table_to_html(spec: &TableSpec) -> String {
    let mut out = String::from("<table>");
    for row in &spec.cells {
        out.push_str("<tr>");
        for cell in row {
            if cell.covered {
                continue;
            }
            out.push_str("<td");
            if cell.row_span > 1 {
                out.push_str(&format!(" rowspan=\"{}\"", cell.row_span));
            }
            if cell.col_span > 1 {
                out.push_str(&format!(" colspan=\"{}\"", cell.col_span));
            }
            out.push('>');
            out.push_str(&escape_html(&cell.text));
            out.push_str("</td>");
        }
        out.push_str("</tr>");
    }
    out.push_str("</table>");
    out
}

/// A table reconstructed from its HTML fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTable {
    pub rows: u32,
    pub cols: u32,
    /// (row, col, row_span, col_span, text), sorted row-major.
    pub anchors: Vec<(u32, u32, u32, u32, String)>,
}

pub(crate) struct Scanner<'a> {
    input: &'a str,
    pub pos: usize,
}

impl<'a> Scanner<'a> {
    pub fn new(input: &'a str) -> Self {
        Scanner { input, pos: 0 }
    }

    pub fn eat(&mut self, token: &str) -> bool {
        if self.input[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(ParseError::new(self.pos, format!("expected {token:?}")))
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos == self.input.len()
    }

    /// Reads raw text up to the next '<'.
    pub fn text_until_tag(&mut self) -> &'a str {
        self.take_until('<')
    }

    /// Consumes and returns everything before the next occurrence of `stop`
    /// (or the rest of the input).
    pub fn take_until(&mut self, stop: char) -> &'a str {
        let rest = &self.input[self.pos..];
        let end = rest.find(stop).unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    pub fn number(&mut self) -> Result<u32, ParseError> {
        let rest = &self.input[self.pos..];
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(ParseError::new(self.pos, "expected a number"));
        }
        self.pos += digits.len();
        digits
            .parse()
            .map_err(|_| ParseError::new(self.pos, "number out of range"))
    }
}

fn parse_td_open(s: &mut Scanner) -> Result<(u32, u32), ParseError> {
    s.expect("<td")?;
    let mut row_span = 1;
    let mut col_span = 1;
    loop {
        if s.eat(">") {
            break;
        }
        if s.eat(" rowspan=\"") {
            row_span = s.number()?;
            s.expect("\"")?;
        } else if s.eat(" colspan=\"") {
            col_span = s.number()?;
            s.expect("\"")?;
        } else {
            return Err(ParseError::new(s.pos, "expected attribute or '>'"));
        }
    }
    if row_span == 0 || col_span == 0 {
        return Err(ParseError::new(s.pos, "span of zero"));
    }
    Ok((row_span, col_span))
}

/// Strict parser for the canonical table grammar. Re-expands spans and
/// rejects fragments whose grid does not tile exactly.
pub fn parse_table_html(input: &str) -> Result<ParsedTable, ParseError> {
    let mut s = Scanner::new(input);
    let table = parse_table_body(&mut s)?;
    if !s.at_end() {
        return Err(ParseError::new(s.pos, "trailing input after </table>"));
    }
    Ok(table)
}

pub(crate) fn parse_table_body(s: &mut Scanner) -> Result<ParsedTable, ParseError> {
    s.expect("<table>")?;
    let mut anchors: Vec<(u32, u32, u32, u32, String)> = Vec::new();
    // occupancy[r][c] = taken
    let mut occupancy: Vec<Vec<bool>> = Vec::new();
    let mut row = 0usize;
    loop {
        if s.eat("</table>") {
            break;
        }
        s.expect("<tr>")?;
        if occupancy.len() <= row {
            occupancy.resize_with(row + 1, Vec::new);
        }
        let mut col = 0usize;
        loop {
            if s.eat("</tr>") {
                break;
            }
            // Skip positions covered by earlier spans.
            while occupancy[row].get(col).copied().unwrap_or(false) {
                col += 1;
            }
            let (row_span, col_span) = parse_td_open(s)?;
            let text = unescape_html(s.text_until_tag());
            s.expect("</td>")?;
            for rr in row..row + row_span as usize {
                if occupancy.len() <= rr {
                    occupancy.resize_with(rr + 1, Vec::new);
                }
                for cc in col..col + col_span as usize {
                    if occupancy[rr].len() <= cc {
                        occupancy[rr].resize(cc + 1, false);
                    }
                    if occupancy[rr][cc] {
                        return Err(ParseError::new(s.pos, "overlapping spans"));
                    }
                    occupancy[rr][cc] = true;
                }
            }
            anchors.push((row as u32, col as u32, row_span, col_span, text));
            col += col_span as usize;
        }
        row += 1;
    }

    let rows = row;
    let cols = occupancy.iter().map(Vec::len).max().unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(ParseError::new(s.pos, "empty table"));
    }
    if occupancy.len() > rows {
        return Err(ParseError::new(s.pos, "rowspan extends past the last row"));
    }
    for (r, line) in occupancy.iter().enumerate() {
        if line.len() != cols || line.iter().any(|&taken| !taken) {
            return Err(ParseError::new(
                s.pos,
                format!("row {r} does not tile the {rows}x{cols} grid"),
            ));
        }
    }
    Ok(ParsedTable {
        rows: rows as u32,
        cols: cols as u32,
        anchors,
    })
}

/// One rule (border segment) in a table render plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub vertical: bool,
    pub x: i32,
    pub y: i32,
    pub len: u32,
    pub thickness: u32,
}

/// One line of cell text, positioned and clipped to its cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedText {
    pub text: String,
    pub x: i32,
    pub baseline_y: i32,
    pub size_px: u32,
    pub bold: bool,
    pub clip: Bbox,
}

/// Vector draw list for one table patch, in patch-local coordinates.
#[derive(Debug, Clone)]
pub struct TablePlan {
    pub rules: Vec<Rule>,
    pub texts: Vec<PlacedText>,
    pub col_edges: Vec<i32>,
    pub row_edges: Vec<i32>,
}

fn table_font_size(page: &PageSpec) -> u32 {
    ((page.base_font_size_px as f64 * 0.8).round() as u32).clamp(10, page.base_font_size_px)
}

/// Lays out a table inside a `w x h` patch: equal column widths, row
/// heights stretched to fill the patch, text centered in each cell.
/// Gridlined cells wrap onto multiple lines; gridless cells stay single
/// line and clip.
pub fn plan_table(
    spec: &TableSpec,
    w: u32,
    h: u32,
    page: &PageSpec,
    registry: &FontRegistry,
) -> Result<TablePlan, RenderError> {
    let font_size = table_font_size(page);
    let pad = (font_size / 3).max(4);
    let line_h = font_size + pad / 2;
    let min_col_w = 2 * pad + font_size;
    let min_row_h = font_size + 2 * pad;
    if w / spec.cols < min_col_w || h / spec.rows < min_row_h {
        return Err(RenderError::InfeasibleCellSize {
            rows: spec.rows,
            cols: spec.cols,
            w,
            h,
        });
    }

    let cols = spec.cols as usize;
    let rows = spec.rows as usize;
    let mut col_edges = Vec::with_capacity(cols + 1);
    for c in 0..=cols {
        col_edges.push((w as u64 * c as u64 / cols as u64) as i32);
    }

    // Measure wrapped line counts to find required row heights.
    let space = space_advance(registry, &page.font_id, font_size);
    struct CellLines {
        r: usize,
        c: usize,
        rs: usize,
        cs: usize,
        lines: Vec<(String, u32)>,
    }
    let mut wrapped: Vec<CellLines> = Vec::new();
    let mut row_need = vec![min_row_h; rows];
    for (r, c, rs, cs, text) in spec.anchors() {
        let cell_w = (col_edges[(c + cs) as usize] - col_edges[c as usize]) as u32;
        let inner_w = cell_w.saturating_sub(2 * pad).max(1);
        let lines = match spec.style {
            TableStyle::Gridlined => wrap_cell_text(registry, page, text, font_size, space, inner_w),
            TableStyle::Gridless => vec![measure_line(registry, page, text, font_size, space)],
        };
        let need = (lines.len() as u32 * line_h + 2 * pad).div_ceil(rs);
        for rr in r..r + rs {
            row_need[rr as usize] = row_need[rr as usize].max(need);
        }
        wrapped.push(CellLines {
            r: r as usize,
            c: c as usize,
            rs: rs as usize,
            cs: cs as usize,
            lines,
        });
    }
    let total_need: u32 = row_need.iter().sum();
    if total_need > h {
        return Err(RenderError::InfeasibleCellSize {
            rows: spec.rows,
            cols: spec.cols,
            w,
            h,
        });
    }

    // Stretch rows so the table fills the patch exactly.
    let extra = h - total_need;
    let mut row_edges = Vec::with_capacity(rows + 1);
    row_edges.push(0i32);
    let mut acc = 0u32;
    for (i, need) in row_need.iter().enumerate() {
        let bonus = (extra as u64 * (i as u64 + 1) / rows as u64
            - extra as u64 * i as u64 / rows as u64) as u32;
        acc += need + bonus;
        row_edges.push(acc as i32);
    }

    let owner = spec.owner_grid();
    let mut rules = Vec::new();
    match spec.style {
        TableStyle::Gridlined => {
            // Horizontal boundaries: skip segments crossed by a row span,
            // merging adjacent kept segments into single rules.
            for b in 0..=rows {
                let mut run_start: Option<usize> = None;
                for c in 0..=cols {
                    let keep = c < cols
                        && (b == 0
                            || b == rows
                            || owner[b - 1][c] != owner[b][c]);
                    if keep && run_start.is_none() {
                        run_start = Some(c);
                    }
                    if (!keep || c == cols) && run_start.is_some() {
                        let start = run_start.take().unwrap();
                        rules.push(Rule {
                            vertical: false,
                            x: col_edges[start],
                            y: row_edges[b].min(h as i32 - 1),
                            len: (col_edges[c] - col_edges[start]) as u32,
                            thickness: 1,
                        });
                    }
                }
            }
            // Vertical boundaries, same treatment for column spans.
            for b in 0..=cols {
                let mut run_start: Option<usize> = None;
                for r in 0..=rows {
                    let keep = r < rows
                        && (b == 0
                            || b == cols
                            || owner[r][b - 1] != owner[r][b]);
                    if keep && run_start.is_none() {
                        run_start = Some(r);
                    }
                    if (!keep || r == rows) && run_start.is_some() {
                        let start = run_start.take().unwrap();
                        rules.push(Rule {
                            vertical: true,
                            x: col_edges[b].min(w as i32 - 1),
                            y: row_edges[start],
                            len: (row_edges[r] - row_edges[start]) as u32,
                            thickness: 1,
                        });
                    }
                }
            }
        }
        TableStyle::Gridless => {
            for (y, thickness) in [
                (row_edges[0], 2),
                (row_edges[1], 1),
                (row_edges[rows] - 2, 2),
            ] {
                rules.push(Rule {
                    vertical: false,
                    x: 0,
                    y,
                    len: w,
                    thickness,
                });
            }
        }
    }

    // Cell text: horizontally centered lines, vertically centered block.
    let mut texts = Vec::new();
    for cell_lines in &wrapped {
        let CellLines { r, c, rs, cs, lines } = cell_lines;
        let cell = Bbox::new(
            col_edges[*c],
            row_edges[*r],
            (col_edges[c + cs] - col_edges[*c]) as u32,
            (row_edges[r + rs] - row_edges[*r]) as u32,
        );
        let inner = Bbox::new(
            cell.x + pad as i32,
            cell.y + pad as i32,
            cell.w.saturating_sub(2 * pad),
            cell.h.saturating_sub(2 * pad),
        );
        let block_h = lines.len() as u32 * line_h;
        let top = cell.y + (cell.h.saturating_sub(block_h) / 2) as i32;
        let bold = spec.style == TableStyle::Gridless && *r == 0;
        for (li, (line, line_w)) in lines.iter().enumerate() {
            let x = cell.x + (cell.w.saturating_sub(*line_w) / 2) as i32;
            texts.push(PlacedText {
                text: line.clone(),
                x,
                baseline_y: top + li as i32 * line_h as i32 + font_size as i32,
                size_px: font_size,
                bold,
                clip: inner,
            });
        }
    }

    Ok(TablePlan {
        rules,
        texts,
        col_edges,
        row_edges,
    })
}

fn measure_line(
    registry: &FontRegistry,
    page: &PageSpec,
    text: &str,
    font_size: u32,
    space: u32,
) -> (String, u32) {
    let units = tokenize(text);
    let mut width = 0u32;
    for (i, unit) in units.iter().enumerate() {
        if i > 0 && crate::corpus::needs_space(units[i - 1].script, unit.script) {
            width += space;
        }
        width += resolve_unit(registry, unit, &page.font_id, font_size)
            .map(|r| r.advance_px)
            .unwrap_or(font_size);
    }
    (text.to_string(), width)
}

/// Greedy wrap of cell text into lines that fit `max_w`; returns each line
/// with its measured width.
fn wrap_cell_text(
    registry: &FontRegistry,
    page: &PageSpec,
    text: &str,
    font_size: u32,
    space: u32,
    max_w: u32,
) -> Vec<(String, u32)> {
    let units = tokenize(text);
    if units.is_empty() {
        return vec![(String::new(), 0)];
    }
    let mut lines = Vec::new();
    let mut current: Vec<crate::corpus::TokenUnit> = Vec::new();
    let mut width = 0u32;
    for unit in units {
        let advance = resolve_unit(registry, &unit, &page.font_id, font_size)
            .map(|r| r.advance_px)
            .unwrap_or(font_size);
        let gap = match current.last() {
            Some(prev) if crate::corpus::needs_space(prev.script, unit.script) => space,
            _ => 0,
        };
        if !current.is_empty() && width + gap + advance > max_w {
            lines.push((join_units(&current), width));
            current.clear();
            width = advance;
            current.push(unit);
        } else {
            width += gap + advance;
            current.push(unit);
        }
    }
    if !current.is_empty() {
        lines.push((join_units(&current), width));
    }
    lines
}

/// Rasterizes a plan into a patch of exactly `w x h` pixels.
pub fn rasterize_table(
    plan: &TablePlan,
    w: u32,
    h: u32,
    page: &PageSpec,
    registry: &FontRegistry,
) -> Canvas {
    let mut patch = Canvas::new(w, h, page.background_color);
    for rule in &plan.rules {
        if rule.vertical {
            patch.vline(rule.x, rule.y, rule.len, rule.thickness, page.text_color);
        } else {
            patch.hline(rule.x, rule.y, rule.len, rule.thickness, page.text_color);
        }
    }
    for text in &plan.texts {
        draw_text_line(&mut patch, text, page, registry);
    }
    patch
}

pub(crate) fn draw_text_line(
    patch: &mut Canvas,
    placed: &PlacedText,
    page: &PageSpec,
    registry: &FontRegistry,
) {
    let bold_font = if placed.bold {
        registry.bold_variant(&page.font_id).map(|f| f.id.clone())
    } else {
        None
    };
    let font_id = bold_font.as_deref().unwrap_or(&page.font_id);
    let synthetic_bold = placed.bold && bold_font.is_none();
    let units = tokenize(&placed.text);
    let space = space_advance(registry, font_id, placed.size_px);
    let mut x = placed.x;
    for (i, unit) in units.iter().enumerate() {
        if i > 0 && crate::corpus::needs_space(units[i - 1].script, unit.script) {
            x += space as i32;
        }
        let Ok(resolved) = resolve_unit(registry, unit, font_id, placed.size_px) else {
            continue;
        };
        let Ok(patch_glyph) = render_word(
            registry,
            &resolved.unit,
            &resolved.font_id,
            placed.size_px,
            page.text_color,
        ) else {
            continue;
        };
        let y = placed.baseline_y - patch_glyph.ascent_px as i32;
        patch.blend_mask(&patch_glyph.mask, x, y, page.text_color, Some(placed.clip));
        if synthetic_bold {
            patch.blend_mask(&patch_glyph.mask, x + 1, y, page.text_color, Some(placed.clip));
        }
        x += resolved.advance_px as i32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn corpus() -> TextCorpus {
        TextCorpus::from_passages([
            "alpha beta gamma delta epsilon zeta eta theta iota kappa",
            "one two three four five six seven eight nine ten",
        ])
        .unwrap()
    }

    fn cfg() -> GenerationConfig {
        GenerationConfig::default()
    }

    /// Independent re-tiling oracle: expands every anchor's span rectangle
    /// and asserts the grid is covered exactly once.
    fn assert_tiles(spec: &TableSpec) {
        let mut count = vec![vec![0u32; spec.cols as usize]; spec.rows as usize];
        for (r, c, rs, cs, text) in spec.anchors() {
            assert!(!text.is_empty(), "anchor text must be non-empty");
            for rr in r..r + rs {
                for cc in c..c + cs {
                    count[rr as usize][cc as usize] += 1;
                }
            }
        }
        let mut area = 0u32;
        for row in &count {
            for &n in row {
                assert_eq!(n, 1, "grid position claimed {n} times");
                area += n;
            }
        }
        assert_eq!(area, spec.rows * spec.cols);
        for row in &spec.cells {
            for cell in row {
                if cell.covered {
                    assert!(cell.text.is_empty(), "covered cells carry no text");
                }
            }
        }
    }

    #[test]
    fn zero_merge_probability_means_all_unit_spans() {
        let mut config = cfg();
        config.table.merge_probability = 0.0;
        let corpus = corpus();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = generate_table_spec(&corpus, &config, &mut rng);
        for row in &spec.cells {
            for cell in row {
                assert_eq!((cell.row_span, cell.col_span), (1, 1));
                assert!(!cell.covered);
            }
        }
    }

    #[test]
    fn random_specs_tile_exactly() {
        let config = cfg();
        let corpus = corpus();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_table_spec(&corpus, &config, &mut rng);
            assert!(spec.rows >= 3 && spec.rows <= 8);
            assert!(spec.cols >= 2 && spec.cols <= 6);
            assert_tiles(&spec);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let config = cfg();
        let corpus = corpus();
        let a = generate_table_spec(&corpus, &config, &mut ChaCha8Rng::seed_from_u64(9));
        let b = generate_table_spec(&corpus, &config, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    fn simple_spec(rows: u32, cols: u32, style: TableStyle) -> TableSpec {
        let cells = (0..rows)
            .map(|r| {
                (0..cols)
                    .map(|c| Cell::plain(format!("r{r}c{c}")))
                    .collect()
            })
            .collect();
        TableSpec {
            rows,
            cols,
            cells,
            style,
        }
    }

    #[test]
    fn html_matches_canonical_form() {
        let mut spec = simple_spec(2, 2, TableStyle::Gridlined);
        spec.cells[0][0].text = "A".into();
        spec.cells[0][1].text = "B".into();
        spec.cells[1][0].text = "C".into();
        spec.cells[1][1].text = "D".into();
        assert_eq!(
            table_to_html(&spec),
            "<table><tr><td>A</td><td>B</td></tr><tr><td>C</td><td>D</td></tr></table>"
        );
    }

    #[test]
    fn rowspan_emission_and_round_trip() {
        let mut spec = simple_spec(2, 2, TableStyle::Gridlined);
        spec.cells[0][0].row_span = 2;
        spec.cells[1][0] = Cell {
            text: String::new(),
            row_span: 1,
            col_span: 1,
            covered: true,
        };
        let html = table_to_html(&spec);
        assert!(html.starts_with("<table><tr><td rowspan=\"2\">"));
        // Second row has one fewer td.
        let second_row = html.split("<tr>").nth(2).unwrap();
        assert_eq!(second_row.matches("<td").count(), 1);

        let parsed = parse_table_html(&html).unwrap();
        assert_eq!(parsed.rows, 2);
        assert_eq!(parsed.cols, 2);
        let expected: Vec<(u32, u32, u32, u32, String)> = spec
            .anchors()
            .into_iter()
            .map(|(r, c, rs, cs, t)| (r, c, rs, cs, t.to_string()))
            .collect();
        assert_eq!(parsed.anchors, expected);
    }

    #[test]
    fn html_escaping_round_trips() {
        let mut spec = simple_spec(1, 1, TableStyle::Gridlined);
        spec.cells[0][0].text = "a<b & c>d".into();
        let html = table_to_html(&spec);
        assert!(html.contains("a&lt;b &amp; c&gt;d"));
        let parsed = parse_table_html(&html).unwrap();
        assert_eq!(parsed.anchors[0].4, "a<b & c>d");
    }

    #[test]
    fn parser_rejects_corruption() {
        let spec = simple_spec(2, 3, TableStyle::Gridlined);
        let html = table_to_html(&spec);
        assert!(parse_table_html(&html[..html.len() - 4]).is_err());
        assert!(parse_table_html(&html.replace("<td>", "<td >")).is_err());
        assert!(parse_table_html(&format!("{html}x")).is_err());
        assert!(parse_table_html("<table></table>").is_err());
        // Ragged rows do not tile.
        assert!(parse_table_html(
            "<table><tr><td>a</td><td>b</td></tr><tr><td>c</td></tr></table>"
        )
        .is_err());
    }

    #[test]
    fn round_trip_on_random_specs() {
        let config = cfg();
        let corpus = corpus();
        for seed in 0..300 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = generate_table_spec(&corpus, &config, &mut rng);
            let html = table_to_html(&spec);
            let parsed = parse_table_html(&html).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert_eq!(parsed.rows, spec.rows, "seed {seed}");
            assert_eq!(parsed.cols, spec.cols, "seed {seed}");
            let expected: Vec<(u32, u32, u32, u32, String)> = spec
                .anchors()
                .into_iter()
                .map(|(r, c, rs, cs, t)| (r, c, rs, cs, t.to_string()))
                .collect();
            assert_eq!(parsed.anchors, expected, "seed {seed}");
        }
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

    #[test]
    fn single_cell_gridlined_draws_a_rectangle() {
        let spec = simple_spec(1, 1, TableStyle::Gridlined);
        let plan = plan_table(&spec, 200, 80, &page(), &registry()).unwrap();
        let h: Vec<&Rule> = plan.rules.iter().filter(|r| !r.vertical).collect();
        let v: Vec<&Rule> = plan.rules.iter().filter(|r| r.vertical).collect();
        assert_eq!(h.len(), 2);
        assert_eq!(v.len(), 2);
        assert_eq!(h[0].len, 200);
        assert_eq!(v[0].len, 80);
    }

    #[test]
    fn gridless_has_three_horizontal_rules_and_no_vertical() {
        let spec = simple_spec(3, 2, TableStyle::Gridless);
        let plan = plan_table(&spec, 300, 160, &page(), &registry()).unwrap();
        assert_eq!(plan.rules.iter().filter(|r| !r.vertical).count(), 3);
        assert_eq!(plan.rules.iter().filter(|r| r.vertical).count(), 0);
        assert!(plan.rules.iter().all(|r| r.len == 300));
    }

    #[test]
    fn no_rule_crosses_a_merged_area() {
        let mut spec = simple_spec(3, 3, TableStyle::Gridlined);
        // (1,0) spans two columns.
        spec.cells[1][0].col_span = 2;
        spec.cells[1][1] = Cell {
            text: String::new(),
            row_span: 1,
            col_span: 1,
            covered: true,
        };
        let plan = plan_table(&spec, 300, 200, &page(), &registry()).unwrap();
        // The merged area's interior: strictly between col edge 1 and row
        // edges 1..2. No vertical rule may pass through it.
        let x_inside = plan.col_edges[1];
        let y0 = plan.row_edges[1];
        let y1 = plan.row_edges[2];
        for rule in plan.rules.iter().filter(|r| r.vertical) {
            if rule.x == x_inside {
                let overlaps = rule.y < y1 && rule.y + rule.len as i32 > y0;
                assert!(!overlaps, "rule {rule:?} crosses the merged cell");
            }
        }
    }

    #[test]
    fn too_small_patch_is_infeasible() {
        let spec = simple_spec(8, 6, TableStyle::Gridlined);
        let err = plan_table(&spec, 60, 40, &page(), &registry()).unwrap_err();
        assert!(matches!(err, RenderError::InfeasibleCellSize { .. }));
    }

    #[test]
    fn rasterized_patch_has_requested_dimensions_and_ink() {
        let corpus = corpus();
        let config = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let spec = generate_table_spec(&corpus, &config, &mut rng);
        let (page, registry) = (page(), registry());
        let plan = plan_table(&spec, 500, 320, &page, &registry).unwrap();
        let patch = rasterize_table(&plan, 500, 320, &page, &registry);
        assert_eq!((patch.width(), patch.height()), (500, 320));
        let blank = Canvas::new(500, 320, page.background_color);
        assert_ne!(patch.pixel_hash(), blank.pixel_hash());
    }
}
