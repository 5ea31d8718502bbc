//! Generation configuration: every sampled range and probability in the
//! pipeline lives here, in one strict-schema TOML document.
//!
//! Unknown keys are rejected so a typo cannot silently fall back to a
//! default and quietly change what a benchmark run means. Relative corpus
//! and font paths are resolved against the directory the config file was
//! loaded from; the fingerprint is computed over the config content itself,
//! before resolution, so it is machine independent.

use crate::corpus::CorpusFormat;
use crate::error::ConfigError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub page: PageConfig,
    pub elements: ElementConfig,
    pub table: TableConfig,
    pub chart: ChartConfig,
    pub corpus: CorpusConfig,
    /// Placement retries before a document is reported as failed.
    pub max_placement_retries: u32,
    /// Directory the config was loaded from; used to resolve relative paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PageConfig {
    pub width_px: (u32, u32),
    pub height_px: (u32, u32),
    /// Range for each of the four margins, sampled independently.
    pub margin_px: (u32, u32),
    pub base_font_size_px: (u32, u32),
    pub line_spacing_factor: (f64, f64),
    pub segment_spacing_px: (u32, u32),
    /// Chance of a two-column layout on pages without structured elements.
    pub two_column_probability: f64,
    pub justify_probability: f64,
    pub text_colors: Vec<Rgb>,
    pub background_colors: Vec<Rgb>,
    pub font_dir: PathBuf,
    /// Candidate page fonts; empty means every non-bold registry font.
    pub font_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElementConfig {
    /// Weights for placing 0, 1, or 2 structured elements on free-form pages.
    pub count_weights: [f64; 3],
    /// Element heights as fractions of the data-area height.
    pub table_height_frac: (f64, f64),
    pub chart_height_frac: (f64, f64),
    pub image_height_frac: (f64, f64),
    /// Element width as a fraction of the data-area width.
    pub width_frac: (f64, f64),
    pub min_width_px: u32,
    pub min_height_px: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableConfig {
    pub rows: (u32, u32),
    pub cols: (u32, u32),
    pub merge_probability: f64,
    pub gridlined_weight: f64,
    pub gridless_weight: f64,
    /// Units of corpus text per cell.
    pub cell_span_units: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChartConfig {
    pub value_range: (f64, f64),
    pub bar_categories: (u32, u32),
    pub pie_slices: (u32, u32),
    pub line_series: (u32, u32),
    pub line_points: (u32, u32),
    /// Scatter point count bounds. Fixed at [5, 20]; see
    /// `allow_scatter_override`.
    pub scatter_points: (u32, u32),
    /// Escape hatch for experiments that need a different scatter range.
    pub allow_scatter_override: bool,
    /// Label rotation angles for vertical bar charts, degrees.
    pub rotation_degrees: Vec<u32>,
    /// Chance a pie chart uses percent mode (sums to 100) over decimal
    /// mode (sums to 1).
    pub percent_pie_probability: f64,
    /// Chance a rendered scatter chart omits its x tick labels. Ground
    /// truth always carries full (x, y) pairs regardless.
    pub omit_scatter_x_ticks_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub english_text: PathBuf,
    pub chinese_text: PathBuf,
    pub text_format: TextFormat,
    pub images: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextFormat {
    PlainLines,
    JsonLines,
}

impl From<TextFormat> for CorpusFormat {
    fn from(f: TextFormat) -> CorpusFormat {
        match f {
            TextFormat::PlainLines => CorpusFormat::PlainLines,
            TextFormat::JsonLines => CorpusFormat::JsonLines,
        }
    }
}

pub const SCATTER_POINT_BOUNDS: (u32, u32) = (5, 20);

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            page: PageConfig::default(),
            elements: ElementConfig::default(),
            table: TableConfig::default(),
            chart: ChartConfig::default(),
            corpus: CorpusConfig::default(),
            max_placement_retries: 8,
            base_dir: None,
        }
    }
}

impl Default for PageConfig {
    fn default() -> Self {
        PageConfig {
            width_px: (960, 960),
            height_px: (1280, 1280),
            margin_px: (36, 72),
            base_font_size_px: (15, 26),
            line_spacing_factor: (1.15, 1.6),
            segment_spacing_px: (10, 28),
            two_column_probability: 0.35,
            justify_probability: 0.3,
            text_colors: vec![[20, 20, 20], [0, 0, 0], [36, 34, 63], [54, 38, 24]],
            background_colors: vec![[255, 255, 255], [251, 250, 245], [246, 247, 250]],
            font_dir: PathBuf::from("fixtures/fonts"),
            font_ids: vec!["dejavu-sans".into(), "boxhan".into()],
        }
    }
}

impl Default for ElementConfig {
    fn default() -> Self {
        ElementConfig {
            count_weights: [0.35, 0.5, 0.15],
            table_height_frac: (0.25, 0.5),
            chart_height_frac: (0.25, 0.5),
            image_height_frac: (0.2, 0.4),
            width_frac: (0.55, 0.95),
            min_width_px: 220,
            min_height_px: 150,
        }
    }
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            rows: (3, 8),
            cols: (2, 6),
            merge_probability: 0.35,
            gridlined_weight: 1.0,
            gridless_weight: 1.0,
            cell_span_units: (1, 4),
        }
    }
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig {
            value_range: (0.0, 1500.0),
            bar_categories: (3, 8),
            pie_slices: (3, 6),
            line_series: (1, 4),
            line_points: (4, 10),
            scatter_points: SCATTER_POINT_BOUNDS,
            allow_scatter_override: false,
            rotation_degrees: vec![0, 30, 45, 60, 90],
            percent_pie_probability: 0.5,
            omit_scatter_x_ticks_probability: 0.25,
        }
    }
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            english_text: PathBuf::from("fixtures/corpora/english.txt"),
            chinese_text: PathBuf::from("fixtures/corpora/chinese.txt"),
            text_format: TextFormat::PlainLines,
            images: PathBuf::from("fixtures/images"),
        }
    }
}

fn check_range<T: PartialOrd + std::fmt::Debug>(
    field: &'static str,
    range: (T, T),
) -> Result<(), ConfigError> {
    if range.0 > range.1 {
        return Err(ConfigError::Invalid {
            field,
            reason: format!("min {:?} exceeds max {:?}", range.0, range.1),
        });
    }
    Ok(())
}

fn check_probability(field: &'static str, p: f64) -> Result<(), ConfigError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ConfigError::Invalid {
            field,
            reason: format!("probability {p} outside [0, 1]"),
        });
    }
    Ok(())
}

impl GenerationConfig {
    /// Loads, validates, and path-resolves a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: GenerationConfig =
            toml::from_str(&raw).map_err(|e| ConfigError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        config.validate()?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    /// Serializes the config as TOML (paths as stored, not resolved).
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.page;
        check_range("page.width_px", p.width_px)?;
        check_range("page.height_px", p.height_px)?;
        check_range("page.margin_px", p.margin_px)?;
        check_range("page.base_font_size_px", p.base_font_size_px)?;
        check_range("page.line_spacing_factor", p.line_spacing_factor)?;
        check_range("page.segment_spacing_px", p.segment_spacing_px)?;
        check_probability("page.two_column_probability", p.two_column_probability)?;
        check_probability("page.justify_probability", p.justify_probability)?;
        if p.line_spacing_factor.0 < 1.0 {
            return Err(ConfigError::Invalid {
                field: "page.line_spacing_factor",
                reason: "must be >= 1.0".into(),
            });
        }
        if p.text_colors.is_empty() || p.background_colors.is_empty() {
            return Err(ConfigError::Invalid {
                field: "page.text_colors",
                reason: "color palettes must be non-empty".into(),
            });
        }
        if p.width_px.0 <= 2 * p.margin_px.1 || p.height_px.0 <= 2 * p.margin_px.1 {
            return Err(ConfigError::Invalid {
                field: "page.margin_px",
                reason: "maximum margins leave no data area on the smallest page".into(),
            });
        }
        if p.base_font_size_px.1 > p.height_px.0 - 2 * p.margin_px.1 {
            return Err(ConfigError::Invalid {
                field: "page.base_font_size_px",
                reason: "font size can exceed the data-area height".into(),
            });
        }
        if p.base_font_size_px.0 == 0 {
            return Err(ConfigError::Invalid {
                field: "page.base_font_size_px",
                reason: "font size must be positive".into(),
            });
        }

        let e = &self.elements;
        if e.count_weights.iter().any(|w| *w < 0.0) || e.count_weights.iter().sum::<f64>() <= 0.0 {
            return Err(ConfigError::Invalid {
                field: "elements.count_weights",
                reason: "weights must be non-negative and sum to > 0".into(),
            });
        }
        check_range("elements.table_height_frac", e.table_height_frac)?;
        check_range("elements.chart_height_frac", e.chart_height_frac)?;
        check_range("elements.image_height_frac", e.image_height_frac)?;
        check_range("elements.width_frac", e.width_frac)?;
        for (field, frac) in [
            ("elements.table_height_frac", e.table_height_frac),
            ("elements.chart_height_frac", e.chart_height_frac),
            ("elements.image_height_frac", e.image_height_frac),
            ("elements.width_frac", e.width_frac),
        ] {
            if frac.0 <= 0.0 || frac.1 > 1.0 {
                return Err(ConfigError::Invalid {
                    field,
                    reason: "fractions must lie in (0, 1]".into(),
                });
            }
        }

        let t = &self.table;
        check_range("table.rows", t.rows)?;
        check_range("table.cols", t.cols)?;
        check_probability("table.merge_probability", t.merge_probability)?;
        if t.rows.0 == 0 || t.cols.0 == 0 {
            return Err(ConfigError::Invalid {
                field: "table.rows",
                reason: "tables need at least one row and column".into(),
            });
        }
        if t.gridlined_weight < 0.0
            || t.gridless_weight < 0.0
            || t.gridlined_weight + t.gridless_weight <= 0.0
        {
            return Err(ConfigError::Invalid {
                field: "table.gridlined_weight",
                reason: "style weights must be non-negative and sum to > 0".into(),
            });
        }
        check_range("table.cell_span_units", t.cell_span_units)?;
        if t.cell_span_units.0 == 0 {
            return Err(ConfigError::Invalid {
                field: "table.cell_span_units",
                reason: "cells need at least one unit of text".into(),
            });
        }

        let c = &self.chart;
        check_range("chart.value_range", c.value_range)?;
        check_range("chart.bar_categories", c.bar_categories)?;
        check_range("chart.pie_slices", c.pie_slices)?;
        check_range("chart.line_series", c.line_series)?;
        check_range("chart.line_points", c.line_points)?;
        check_range("chart.scatter_points", c.scatter_points)?;
        if c.scatter_points != SCATTER_POINT_BOUNDS && !c.allow_scatter_override {
            return Err(ConfigError::Invalid {
                field: "chart.scatter_points",
                reason: format!(
                    "fixed at {:?}; set allow_scatter_override to change it",
                    SCATTER_POINT_BOUNDS
                ),
            });
        }
        if c.bar_categories.0 == 0 || c.pie_slices.0 < 1 || c.line_series.0 == 0 {
            return Err(ConfigError::Invalid {
                field: "chart.bar_categories",
                reason: "chart cardinalities must be positive".into(),
            });
        }
        if c.line_points.0 < 2 {
            return Err(ConfigError::Invalid {
                field: "chart.line_points",
                reason: "line charts need at least two points".into(),
            });
        }
        if c.rotation_degrees.is_empty() || c.rotation_degrees.iter().any(|d| *d >= 360) {
            return Err(ConfigError::Invalid {
                field: "chart.rotation_degrees",
                reason: "need at least one angle, each below 360".into(),
            });
        }
        check_probability("chart.percent_pie_probability", c.percent_pie_probability)?;
        check_probability(
            "chart.omit_scatter_x_ticks_probability",
            c.omit_scatter_x_ticks_probability,
        )?;
        Ok(())
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            return path.to_path_buf();
        }
        match &self.base_dir {
            Some(dir) => dir.join(path),
            None => path.to_path_buf(),
        }
    }

    pub fn english_text_path(&self) -> PathBuf {
        self.resolve(&self.corpus.english_text)
    }

    pub fn chinese_text_path(&self) -> PathBuf {
        self.resolve(&self.corpus.chinese_text)
    }

    pub fn images_path(&self) -> PathBuf {
        self.resolve(&self.corpus.images)
    }

    pub fn font_dir_path(&self) -> PathBuf {
        self.resolve(&self.page.font_dir)
    }
}

/// Content hash of a config, independent of key order in the source file.
/// The config is re-serialized into canonical JSON (struct field order,
/// shortest-roundtrip floats) and the SHA-256 of those bytes is returned.
pub fn fingerprint(config: &GenerationConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
