//! Word-image rasterization: one alpha-mask patch per token unit, plus the
//! fallback chain for glyphs the page font does not cover.
//!
//! Rasterization settings are pinned (no hinting, ab_glyph's fixed coverage
//! rasterizer), so identical inputs produce identical bitmaps on a platform.
//! Cross-platform pixel identity is not promised; annotation bytes are.

use crate::corpus::TokenUnit;
use crate::error::{FontError, RenderError};
use crate::font::FontRegistry;
use crate::layout::LineLayout;
use crate::raster::{AlphaMask, Bbox, Canvas, Rgb};
use ab_glyph::{Font, GlyphId, PxScale, ScaleFont};

/// A rasterized word image.
#[derive(Debug, Clone)]
pub struct GlyphPatch {
    pub mask: AlphaMask,
    pub advance_px: u32,
    pub ascent_px: u32,
    pub descent_px: u32,
    pub source_unit: TokenUnit,
    pub color: Rgb,
}

/// Emitted when a unit could not be drawn from the requested font chain and
/// was replaced by U+FFFD.
#[derive(Debug, Clone)]
pub struct RenderWarning {
    pub unit_text: String,
    pub missing: char,
}

/// A unit bound to the font that will actually draw it, with its measured
/// advance. Layout and rendering both consume this, so they cannot disagree.
#[derive(Debug, Clone)]
pub struct ResolvedUnit {
    pub unit: TokenUnit,
    pub font_id: String,
    pub advance_px: u32,
    pub warning: Option<RenderWarning>,
}

fn glyph_run(
    font: &ab_glyph::FontArc,
    size_px: u32,
    text: &str,
) -> Result<(Vec<(GlyphId, f32)>, f32), char> {
    let scaled = font.as_scaled(PxScale::from(size_px as f32));
    let mut caret = 0.0f32;
    let mut prev: Option<GlyphId> = None;
    let mut run = Vec::with_capacity(text.chars().count());
    for c in text.chars() {
        let gid = font.glyph_id(c);
        if gid.0 == 0 {
            return Err(c);
        }
        if let Some(p) = prev {
            caret += scaled.kern(p, gid);
        }
        run.push((gid, caret));
        caret += scaled.h_advance(gid);
        prev = Some(gid);
    }
    Ok((run, caret))
}

/// Rasterizes one unit in one font. Deterministic: same inputs, identical
/// bitmap. Fails with `MissingGlyph` on the first uncovered code point.
pub fn render_word(
    registry: &FontRegistry,
    unit: &TokenUnit,
    font_id: &str,
    size_px: u32,
    color: Rgb,
) -> Result<GlyphPatch, RenderError> {
    let font = &registry.get(font_id)?.font;
    let scaled = font.as_scaled(PxScale::from(size_px as f32));
    let ascent_px = scaled.ascent().ceil().max(0.0) as u32;
    let descent_px = (-scaled.descent()).ceil().max(0.0) as u32;
    let height = (ascent_px + descent_px).max(1);

    let (run, metric_advance) =
        glyph_run(font, size_px, &unit.text).map_err(|ch| RenderError::MissingGlyph {
            ch,
            font_id: font_id.to_string(),
        })?;

    let mut ink_max_x = 0f32;
    let outlines: Vec<_> = run
        .iter()
        .filter_map(|&(gid, x)| {
            let glyph = gid.with_scale_and_position(
                PxScale::from(size_px as f32),
                ab_glyph::point(x, ascent_px as f32),
            );
            font.outline_glyph(glyph)
        })
        .collect();
    for outline in &outlines {
        ink_max_x = ink_max_x.max(outline.px_bounds().max.x);
    }
    let advance_px = (metric_advance.round().max(0.0) as u32).max(ink_max_x.ceil() as u32);
    let width = advance_px.max(1);

    let mut mask = AlphaMask::new(width, height);
    for outline in &outlines {
        let bounds = outline.px_bounds();
        outline.draw(|x, y, c| {
            let px = bounds.min.x as i32 + x as i32;
            let py = bounds.min.y as i32 + y as i32;
            if px >= 0 && py >= 0 && (px as u32) < width && (py as u32) < height {
                mask.add(px as u32, py as u32, (c * 255.0).round() as u8);
            }
        });
    }

    Ok(GlyphPatch {
        mask,
        advance_px,
        ascent_px,
        descent_px,
        source_unit: unit.clone(),
        color,
    })
}

/// Binds a unit to a drawable font: the page font if it covers every code
/// point, otherwise the first registry font that does, otherwise U+FFFD.
pub fn resolve_unit(
    registry: &FontRegistry,
    unit: &TokenUnit,
    font_id: &str,
    size_px: u32,
) -> Result<ResolvedUnit, FontError> {
    let page_font = registry.get(font_id)?;
    match glyph_run(&page_font.font, size_px, &unit.text) {
        Ok((_, advance)) => Ok(ResolvedUnit {
            unit: unit.clone(),
            font_id: font_id.to_string(),
            advance_px: advance.round().max(1.0) as u32,
            warning: None,
        }),
        Err(missing) => {
            if let Some(fb) = registry.fallback_for(missing, font_id) {
                if let Ok((_, advance)) = glyph_run(&fb.font, size_px, &unit.text) {
                    return Ok(ResolvedUnit {
                        unit: unit.clone(),
                        font_id: fb.id.clone(),
                        advance_px: advance.round().max(1.0) as u32,
                        warning: None,
                    });
                }
            }
            // Nothing draws the whole unit: replace it. The replacement is
            // what lands in both pixels and annotation, keeping them coherent.
            let replacement = TokenUnit {
                text: '\u{FFFD}'.to_string(),
                script: unit.script,
            };
            let holder = registry
                .fallback_for('\u{FFFD}', "")
                .ok_or(FontError::EmptyRegistry)?;
            let (_, advance) = glyph_run(&holder.font, size_px, &replacement.text)
                .expect("fallback font covers U+FFFD");
            Ok(ResolvedUnit {
                unit: replacement,
                font_id: holder.id.clone(),
                advance_px: advance.round().max(1.0) as u32,
                warning: Some(RenderWarning {
                    unit_text: unit.text.clone(),
                    missing,
                }),
            })
        }
    }
}

/// Advance of a space in the given font (with fallback), used as the
/// inter-unit gap between non-CJK neighbors.
pub fn space_advance(registry: &FontRegistry, font_id: &str, size_px: u32) -> u32 {
    let direct = registry
        .get(font_id)
        .ok()
        .and_then(|f| glyph_run(&f.font, size_px, " ").ok());
    let fallback = || {
        registry
            .fallback_for(' ', font_id)
            .and_then(|f| glyph_run(&f.font, size_px, " ").ok())
    };
    match direct.or_else(fallback) {
        Some((_, advance)) => advance.round().max(1.0) as u32,
        None => (size_px / 3).max(1),
    }
}

/// Blends line patches onto the canvas. Each patch lands at
/// `(origin.x + slot.x, origin.y + baseline - ascent)`, clipped to `clip`.
/// Returns the number of patches placed.
pub fn compose_line(
    line: &LineLayout,
    patches: &[GlyphPatch],
    canvas: &mut Canvas,
    block_origin: (i32, i32),
    clip: Option<Bbox>,
) -> usize {
    assert_eq!(
        line.slots.len(),
        patches.len(),
        "patches must correspond 1:1 with line slots"
    );
    for (slot, patch) in line.slots.iter().zip(patches) {
        let x = block_origin.0 + slot.x as i32;
        let y = block_origin.1 + line.baseline_y as i32 - patch.ascent_px as i32;
        canvas.blend_mask(&patch.mask, x, y, patch.color, clip);
    }
    patches.len()
}

/// Ascent/descent of a font at a pixel size, rounded outward.
pub fn vertical_metrics(
    registry: &FontRegistry,
    font_id: &str,
    size_px: u32,
) -> Result<(u32, u32), FontError> {
    let font = &registry.get(font_id)?.font;
    let scaled = font.as_scaled(PxScale::from(size_px as f32));
    Ok((
        scaled.ascent().ceil().max(0.0) as u32,
        (-scaled.descent()).ceil().max(0.0) as u32,
    ))
}
