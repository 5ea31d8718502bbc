//! Whole-document assembly: plan a page, partition it, fill every region
//! through the matching renderer, and emit the paired reading-order
//! annotation.
//!
//! Annotation joiner rules live here and nowhere else: token units join
//! with a space only between non-CJK neighbors, text blocks and element
//! fragments are separated by single newlines, and regions that contribute
//! no text are skipped.

use crate::chart::{
    chart_to_annotation, generate_chart_spec, plan_chart, rasterize_chart, ChartKind,
};
use crate::config::GenerationConfig;
use crate::corpus::{join_units, sample_image, sample_text_span, ImageCorpus, Language, TextCorpus, TokenUnit};
use crate::error::{ComposeError, LayoutError, RenderError};
use crate::font::FontRegistry;
use crate::layout::{layout_lines, partition_regions, plan_page, PageSpec, Region, RegionKind, TextMetrics};
use crate::raster::{Bbox, Canvas};
use crate::seed::retry_seed;
use crate::table::{generate_table_spec, plan_table, rasterize_table, table_to_html};
use crate::text::{compose_line, render_word, resolve_unit, space_advance, vertical_metrics, RenderWarning};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The benchmark's five-way document taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    PureEnglish,
    PureChinese,
    WithImage,
    WithTable,
    WithChart,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::PureEnglish,
        Category::PureChinese,
        Category::WithImage,
        Category::WithTable,
        Category::WithChart,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Category::PureEnglish => "pure_english",
            Category::PureChinese => "pure_chinese",
            Category::WithImage => "with_image",
            Category::WithTable => "with_table",
            Category::WithChart => "with_chart",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        match s {
            "pure_english" | "pure_en" | "en" => Some(Category::PureEnglish),
            "pure_chinese" | "pure_zh" | "zh" => Some(Category::PureChinese),
            "with_image" | "image" => Some(Category::WithImage),
            "with_table" | "table" => Some(Category::WithTable),
            "with_chart" | "chart" => Some(Category::WithChart),
            _ => None,
        }
    }

    fn element_plan(&self) -> Vec<RegionKind> {
        match self {
            Category::PureEnglish | Category::PureChinese => vec![],
            Category::WithImage => vec![RegionKind::NaturalImage],
            Category::WithTable => vec![RegionKind::Table],
            Category::WithChart => vec![RegionKind::Chart],
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// What one region contributed to the page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementRecord {
    pub kind: RegionKind,
    pub bbox: Bbox,
    pub annotation: String,
}

/// One synthesized document: the dataset unit.
#[derive(Debug)]
pub struct DocumentRecord {
    pub image: Canvas,
    pub annotation: String,
    pub category: Category,
    pub seed: u64,
    pub element_manifest: Vec<ElementRecord>,
    pub warnings: Vec<RenderWarning>,
}

/// Loaded corpora shared by all documents of a run.
pub struct Corpora {
    pub english: TextCorpus,
    pub chinese: TextCorpus,
    pub images: Option<ImageCorpus>,
}

impl Corpora {
    /// Loads the text corpora, plus the image corpus when `need_images`.
    pub fn load(cfg: &GenerationConfig, need_images: bool) -> Result<Self, ComposeError> {
        let format = cfg.corpus.text_format.into();
        let english = TextCorpus::load(&cfg.english_text_path(), format)?;
        let chinese = TextCorpus::load(&cfg.chinese_text_path(), format)?;
        let images = if need_images {
            Some(ImageCorpus::load_dir(&cfg.images_path())?)
        } else {
            None
        };
        Ok(Corpora {
            english,
            chinese,
            images,
        })
    }
}

/// Knobs the dataset generator threads through; everything else comes from
/// the config and seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComposeOptions {
    /// Pins the chart kind (dataset runs round-robin the four types);
    /// `None` samples it from the document's seed.
    pub chart_kind: Option<ChartKind>,
}

/// Composes one document. Deterministic in (config, category, seed,
/// options, corpora content, font files); placement retries derive fresh
/// sub-seeds so determinism survives them.
pub fn compose_document(
    cfg: &GenerationConfig,
    registry: &FontRegistry,
    corpora: &Corpora,
    category: Category,
    seed: u64,
    opts: &ComposeOptions,
) -> Result<DocumentRecord, ComposeError> {
    let attempts = cfg.max_placement_retries + 1;
    let mut last_error = String::new();
    for attempt in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(retry_seed(seed, attempt));
        match compose_once(cfg, registry, corpora, category, seed, opts, &mut rng) {
            Ok(record) => return Ok(record),
            Err(ComposeError::Layout(LayoutError::PlacementInfeasible { .. }))
            | Err(ComposeError::Render(RenderError::InfeasibleCellSize { .. })) => {
                last_error = "placement infeasible".into();
            }
            Err(fatal) => return Err(fatal),
        }
    }
    Err(ComposeError::GenerationFailed {
        category: category.tag(),
        seed,
        attempts,
        last: last_error,
    })
}

fn compose_once(
    cfg: &GenerationConfig,
    registry: &FontRegistry,
    corpora: &Corpora,
    category: Category,
    seed: u64,
    opts: &ComposeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<DocumentRecord, ComposeError> {
    let plan = category.element_plan();
    if plan.contains(&RegionKind::NaturalImage) && corpora.images.is_none() {
        return Err(ComposeError::MissingImageCorpus);
    }

    // Page language: pinned for the pure categories, a fair coin otherwise.
    let corpus = match category {
        Category::PureEnglish => &corpora.english,
        Category::PureChinese => &corpora.chinese,
        _ => {
            if rng.random_bool(0.5) {
                &corpora.english
            } else {
                &corpora.chinese
            }
        }
    };

    let font_pool = if cfg.page.font_ids.is_empty() {
        registry.text_font_ids()
    } else {
        cfg.page.font_ids.clone()
    };
    let page = plan_page(cfg, &font_pool, plan.is_empty(), rng)?;
    let regions = partition_regions(&page, &plan, cfg, rng)?;

    let mut canvas = Canvas::new(page.width_px, page.height_px, page.background_color);
    let mut manifest: Vec<ElementRecord> = Vec::with_capacity(regions.len());
    let mut warnings = Vec::new();

    for region in &regions {
        let annotation = match region.kind {
            RegionKind::TextBlock => {
                fill_text_block(registry, corpus, &page, region, &mut canvas, &mut warnings, rng)?
            }
            RegionKind::NaturalImage => {
                let images = corpora.images.as_ref().expect("checked above");
                fill_image_region(images, region, &mut canvas, rng)
            }
            RegionKind::Table => {
                fill_table_region(cfg, registry, corpus, &page, region, &mut canvas, rng)?
            }
            RegionKind::Chart => {
                fill_chart_region(cfg, registry, corpus, &page, region, &mut canvas, opts, rng)?
            }
        };
        manifest.push(ElementRecord {
            kind: region.kind,
            bbox: region.bbox,
            annotation,
        });
    }

    let mut record = DocumentRecord {
        image: canvas,
        annotation: String::new(),
        category,
        seed,
        element_manifest: manifest,
        warnings,
    };
    record.annotation = emit_annotation(&record);
    Ok(record)
}

/// Canonical serialization of a record's ground truth: non-empty element
/// annotations in reading order, joined by single newlines.
pub fn emit_annotation(record: &DocumentRecord) -> String {
    record
        .element_manifest
        .iter()
        .map(|e| e.annotation.as_str())
        .filter(|a| !a.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

#[allow(clippy::too_many_arguments)]
fn fill_text_block(
    registry: &FontRegistry,
    corpus: &TextCorpus,
    page: &PageSpec,
    region: &Region,
    canvas: &mut Canvas,
    warnings: &mut Vec<RenderWarning>,
    rng: &mut ChaCha8Rng,
) -> Result<String, ComposeError> {
    let font = page.base_font_size_px;
    let pitch = page.line_pitch();
    let lines_fit = (region.bbox.h / pitch) as usize;
    if lines_fit == 0 {
        return Ok(String::new());
    }
    let per_line = match corpus.language() {
        Language::Chinese => (region.bbox.w / font) as usize + 2,
        _ => (region.bbox.w / (3 * font)) as usize + 2,
    };
    let want = (lines_fit * per_line + 4).min(4000);

    let mut units: Vec<TokenUnit> = Vec::with_capacity(want);
    while units.len() < want {
        let got = sample_text_span(corpus, want - units.len(), rng);
        if got.is_empty() {
            break;
        }
        units.extend(got);
    }

    // Bind every unit to the font that will draw it, then lay out with the
    // same advances rendering will use.
    let mut resolved = Vec::with_capacity(units.len());
    for unit in &units {
        let r = resolve_unit(registry, unit, &page.font_id, font).map_err(RenderError::from)?;
        if let Some(w) = &r.warning {
            warnings.push(w.clone());
        }
        resolved.push(r);
    }
    let (ascent, descent) = vertical_metrics(registry, &page.font_id, font).map_err(RenderError::from)?;
    let metrics = TextMetrics {
        advances: resolved.iter().map(|r| r.advance_px).collect(),
        space_advance: space_advance(registry, &page.font_id, font),
        ascent_px: ascent,
        descent_px: descent,
    };
    let drawable: Vec<TokenUnit> = resolved.iter().map(|r| r.unit.clone()).collect();
    let (lines, consumed) = layout_lines(region, &drawable, &metrics, page);

    let origin = (region.bbox.x, region.bbox.y);
    let mut next = 0usize;
    for line in &lines {
        let slice = &resolved[next..next + line.slots.len()];
        let mut patches = Vec::with_capacity(slice.len());
        for r in slice {
            let patch = render_word(registry, &r.unit, &r.font_id, font, page.text_color)
                .map_err(ComposeError::from)?;
            patches.push(patch);
        }
        compose_line(line, &patches, canvas, origin, Some(region.bbox));
        next += line.slots.len();
    }
    debug_assert_eq!(next, consumed);

    Ok(join_units(&drawable[..consumed]))
}

fn fill_image_region(
    images: &ImageCorpus,
    region: &Region,
    canvas: &mut Canvas,
    rng: &mut ChaCha8Rng,
) -> String {
    let (entry, annotation) = sample_image(images, rng);
    let (iw, ih) = (entry.pixels.width(), entry.pixels.height());
    let bbox = region.bbox;
    let scale = (bbox.w as f64 / iw as f64).min(bbox.h as f64 / ih as f64);
    let tw = ((iw as f64 * scale) as u32).max(1);
    let th = ((ih as f64 * scale) as u32).max(1);
    let scaled = image::imageops::resize(&entry.pixels, tw, th, image::imageops::FilterType::Triangle);
    let x = bbox.x + ((bbox.w - tw) / 2) as i32;
    let y = bbox.y + ((bbox.h - th) / 2) as i32;
    canvas.blit_image(&scaled, x, y);
    annotation
}

fn fill_table_region(
    cfg: &GenerationConfig,
    registry: &FontRegistry,
    corpus: &TextCorpus,
    page: &PageSpec,
    region: &Region,
    canvas: &mut Canvas,
    rng: &mut ChaCha8Rng,
) -> Result<String, ComposeError> {
    let bbox = region.bbox;
    // Regenerate with tighter ranges when the sampled structure cannot fit
    // the region at a readable cell size.
    let mut local = cfg.clone();
    for _ in 0..6 {
        let spec = generate_table_spec(corpus, &local, rng);
        match plan_table(&spec, bbox.w, bbox.h, page, registry) {
            Ok(plan) => {
                let patch = rasterize_table(&plan, bbox.w, bbox.h, page, registry);
                canvas.blit_canvas(&patch, bbox.x, bbox.y);
                return Ok(table_to_html(&spec));
            }
            Err(RenderError::InfeasibleCellSize { .. }) => {
                let t = &mut local.table;
                t.rows.1 = (t.rows.1.saturating_sub(1)).max(t.rows.0);
                t.cols.1 = (t.cols.1.saturating_sub(1)).max(t.cols.0);
                t.cell_span_units.1 = (t.cell_span_units.1.saturating_sub(1)).max(t.cell_span_units.0);
            }
            Err(other) => return Err(other.into()),
        }
    }
    Err(RenderError::InfeasibleCellSize {
        rows: local.table.rows.0,
        cols: local.table.cols.0,
        w: bbox.w,
        h: bbox.h,
    }
    .into())
}

#[allow(clippy::too_many_arguments)]
fn fill_chart_region(
    cfg: &GenerationConfig,
    registry: &FontRegistry,
    corpus: &TextCorpus,
    page: &PageSpec,
    region: &Region,
    canvas: &mut Canvas,
    opts: &ComposeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<String, ComposeError> {
    const KINDS: [ChartKind; 5] = [
        ChartKind::BarVertical,
        ChartKind::BarHorizontal,
        ChartKind::Pie,
        ChartKind::Line,
        ChartKind::Scatter,
    ];
    let kind = match opts.chart_kind {
        Some(k) => k,
        None => KINDS[rng.random_range(0..KINDS.len())],
    };
    let bbox = region.bbox;
    let spec = generate_chart_spec(kind, corpus, cfg, rng);
    let plan = plan_chart(&spec, bbox.w, bbox.h, page, registry).map_err(ComposeError::from)?;
    let patch = rasterize_chart(&plan, bbox.w, bbox.h, page, registry);
    canvas.blit_canvas(&patch, bbox.x, bbox.y);
    Ok(chart_to_annotation(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::is_cjk;
    use std::io::Write;
    use std::path::PathBuf;

    fn fixture(rel: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
    }

    fn test_config() -> GenerationConfig {
        let mut cfg = GenerationConfig::default();
        cfg.base_dir = Some(fixture(""));
        cfg
    }

    fn registry() -> FontRegistry {
        FontRegistry::load(&fixture("fixtures/fonts")).unwrap()
    }

    fn corpora(need_images: bool) -> Corpora {
        Corpora::load(&test_config(), need_images).unwrap()
    }

    #[test]
    fn pure_english_has_no_markup_and_no_cjk() {
        let cfg = test_config();
        let reg = registry();
        let corp = corpora(false);
        for seed in 0..5 {
            let doc = compose_document(
                &cfg,
                &reg,
                &corp,
                Category::PureEnglish,
                seed,
                &ComposeOptions::default(),
            )
            .unwrap();
            assert!(!doc.annotation.contains('<'), "seed {seed}");
            assert!(!doc.annotation.chars().any(is_cjk), "seed {seed}");
            assert!(!doc.annotation.is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn pure_chinese_lines_all_carry_cjk() {
        let cfg = test_config();
        let reg = registry();
        let corp = corpora(false);
        for seed in 0..5 {
            let doc = compose_document(
                &cfg,
                &reg,
                &corp,
                Category::PureChinese,
                seed,
                &ComposeOptions::default(),
            )
            .unwrap();
            assert!(!doc.annotation.is_empty());
            for line in doc.annotation.lines() {
                assert!(line.chars().any(is_cjk), "seed {seed}: line {line:?}");
                assert!(
                    !line.chars().any(|c| c.is_ascii_alphabetic()),
                    "seed {seed}: latin in {line:?}"
                );
            }
        }
    }

    #[test]
    fn composition_is_deterministic() {
        let cfg = test_config();
        let reg = registry();
        let corp = corpora(true);
        for category in Category::ALL {
            let opts = ComposeOptions::default();
            let a = compose_document(&cfg, &reg, &corp, category, 42, &opts).unwrap();
            let b = compose_document(&cfg, &reg, &corp, category, 42, &opts).unwrap();
            assert_eq!(a.annotation, b.annotation, "{category}");
            assert_eq!(a.element_manifest, b.element_manifest, "{category}");
            assert_eq!(a.image.pixel_hash(), b.image.pixel_hash(), "{category}");
        }
    }

    #[test]
    fn category_element_shapes_hold() {
        let cfg = test_config();
        let reg = registry();
        let corp = corpora(true);
        for seed in 0..4 {
            let table_doc = compose_document(
                &cfg,
                &reg,
                &corp,
                Category::WithTable,
                seed,
                &ComposeOptions::default(),
            )
            .unwrap();
            assert_eq!(table_doc.annotation.matches("<table>").count(), 1);
            assert_eq!(table_doc.annotation.matches("<chart").count(), 0);

            let chart_doc = compose_document(
                &cfg,
                &reg,
                &corp,
                Category::WithChart,
                seed,
                &ComposeOptions::default(),
            )
            .unwrap();
            assert_eq!(chart_doc.annotation.matches("<chart type=\"").count(), 1);

            let image_doc = compose_document(
                &cfg,
                &reg,
                &corp,
                Category::WithImage,
                seed,
                &ComposeOptions::default(),
            )
            .unwrap();
            let images = image_doc
                .element_manifest
                .iter()
                .filter(|e| e.kind == RegionKind::NaturalImage)
                .count();
            assert_eq!(images, 1);
        }
    }

    #[test]
    fn labeled_image_annotation_lands_at_reading_position() {
        let dir = tempfile::tempdir().unwrap();
        let img = image::RgbImage::from_pixel(40, 30, image::Rgb([120, 160, 200]));
        img.save(dir.path().join("cat.png")).unwrap();
        let mut labels = std::fs::File::create(dir.path().join("labels.jsonl")).unwrap();
        writeln!(labels, r#"{{"file": "cat.png", "category": "cat"}}"#).unwrap();

        let mut cfg = test_config();
        cfg.corpus.images = dir.path().to_path_buf();
        let reg = registry();
        let corp = Corpora::load(&cfg, true).unwrap();
        let doc = compose_document(
            &cfg,
            &reg,
            &corp,
            Category::WithImage,
            7,
            &ComposeOptions::default(),
        )
        .unwrap();

        let image_entry = doc
            .element_manifest
            .iter()
            .find(|e| e.kind == RegionKind::NaturalImage)
            .unwrap();
        assert_eq!(image_entry.annotation, "cat");

        // The annotation line at the image's reading-order position (among
        // non-empty contributions) is exactly the label.
        let non_empty: Vec<&ElementRecord> = doc
            .element_manifest
            .iter()
            .filter(|e| !e.annotation.is_empty())
            .collect();
        let pos = non_empty
            .iter()
            .position(|e| e.kind == RegionKind::NaturalImage)
            .unwrap();
        assert_eq!(doc.annotation.lines().nth(pos).unwrap(), "cat");
    }

    #[test]
    fn unlabeled_images_use_the_placeholder() {
        let dir = tempfile::tempdir().unwrap();
        let img = image::RgbImage::from_pixel(40, 30, image::Rgb([90, 90, 90]));
        img.save(dir.path().join("thing.png")).unwrap();

        let mut cfg = test_config();
        cfg.corpus.images = dir.path().to_path_buf();
        let reg = registry();
        let corp = Corpora::load(&cfg, true).unwrap();
        let doc = compose_document(
            &cfg,
            &reg,
            &corp,
            Category::WithImage,
            3,
            &ComposeOptions::default(),
        )
        .unwrap();
        assert!(doc.annotation.contains("<nature_image>"));
    }

    #[test]
    fn emit_annotation_joins_with_newlines_and_skips_empties() {
        let record = DocumentRecord {
            image: Canvas::new(1, 1, [255, 255, 255]),
            annotation: String::new(),
            category: Category::WithTable,
            seed: 0,
            element_manifest: vec![
                ElementRecord {
                    kind: RegionKind::TextBlock,
                    bbox: Bbox::new(0, 0, 10, 10),
                    annotation: "hello world".into(),
                },
                ElementRecord {
                    kind: RegionKind::TextBlock,
                    bbox: Bbox::new(0, 20, 10, 10),
                    annotation: String::new(),
                },
                ElementRecord {
                    kind: RegionKind::Table,
                    bbox: Bbox::new(0, 40, 10, 10),
                    annotation: "<table><tr><td>A</td></tr></table>".into(),
                },
            ],
            warnings: vec![],
        };
        assert_eq!(
            emit_annotation(&record),
            "hello world\n<table><tr><td>A</td></tr></table>"
        );

        let empty = DocumentRecord {
            element_manifest: vec![],
            ..record
        };
        assert_eq!(emit_annotation(&empty), "");
    }

    #[test]
    fn cjk_units_join_without_separators() {
        let units = crate::corpus::tokenize("文档");
        assert_eq!(join_units(&units), "文档");
    }

    #[test]
    fn record_annotation_equals_emitted_manifest() {
        let cfg = test_config();
        let reg = registry();
        let corp = corpora(true);
        for category in Category::ALL {
            let doc = compose_document(&cfg, &reg, &corp, category, 11, &ComposeOptions::default())
                .unwrap();
            assert_eq!(doc.annotation, emit_annotation(&doc), "{category}");
            // Re-assert layout soundness on the composed result.
            for (i, a) in doc.element_manifest.iter().enumerate() {
                for b in doc.element_manifest.iter().skip(i + 1) {
                    assert_eq!(a.bbox.intersection_area(&b.bbox), 0, "{category}");
                }
            }
        }
    }

    #[test]
    fn missing_image_corpus_fails_fast() {
        let cfg = test_config();
        let reg = registry();
        let corp = corpora(false);
        let err = compose_document(
            &cfg,
            &reg,
            &corp,
            Category::WithImage,
            0,
            &ComposeOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ComposeError::MissingImageCorpus));
    }

    #[test]
    fn pinned_chart_kind_is_respected() {
        let cfg = test_config();
        let reg = registry();
        let corp = corpora(false);
        for (kind, attr) in [
            (ChartKind::Pie, "pie"),
            (ChartKind::Line, "line"),
            (ChartKind::Scatter, "scatter"),
            (ChartKind::BarVertical, "bar"),
        ] {
            let doc = compose_document(
                &cfg,
                &reg,
                &corp,
                Category::WithChart,
                19,
                &ComposeOptions {
                    chart_kind: Some(kind),
                },
            )
            .unwrap();
            assert!(
                doc.annotation
                    .contains(&format!("<chart type=\"{attr}\">")),
                "{kind:?}"
            );
        }
    }

    #[test]
    fn infeasible_page_reports_generation_failed() {
        let mut cfg = test_config();
        cfg.page.width_px = (300, 300);
        cfg.page.height_px = (300, 300);
        cfg.page.margin_px = (20, 30);
        cfg.elements.min_height_px = 290;
        cfg.max_placement_retries = 2;
        let reg = registry();
        let corp = corpora(false);
        let err = compose_document(
            &cfg,
            &reg,
            &corp,
            Category::WithChart,
            5,
            &ComposeOptions::default(),
        )
        .unwrap_err();
        match err {
            ComposeError::GenerationFailed { attempts, .. } => assert_eq!(attempts, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
