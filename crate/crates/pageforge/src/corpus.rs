//! Text and image corpora plus the tokenizer shared by generation and
//! evaluation.
//!
//! The token unit is the atom everything else consumes: the renderer draws
//! one word image per unit, line layout places units, annotations join unit
//! texts back together, and the P/R/F1 metric counts them.

use crate::error::CorpusError;
use image::RgbImage;
use rand::Rng;
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

/// Language tag of a text corpus, derived from the script-ratio heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    English,
    Chinese,
    Mixed,
}

/// Script class of one token unit. CJK-wide punctuation and fullwidth forms
/// count as `Cjk`: they form their own units and join without spaces, which
/// is what the class actually controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Script {
    Latin,
    Cjk,
    Digit,
    Punct,
}

/// One renderable unit: a whitespace-free Latin-ish run or a single
/// CJK-wide code point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenUnit {
    pub text: String,
    pub script: Script,
}

impl fmt::Display for TokenUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// CJK-wide code points: each one is its own token unit and joins its
/// neighbors without a space. U+3000 (ideographic space) is excluded; it is
/// whitespace to the tokenizer.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3001..=0x303F      // CJK symbols and punctuation
        | 0x3041..=0x30FF    // hiragana, katakana
        | 0x3400..=0x4DBF    // CJK unified ideographs extension A
        | 0x4E00..=0x9FFF    // CJK unified ideographs
        | 0xF900..=0xFAFF    // CJK compatibility ideographs
        | 0xFF01..=0xFF60    // fullwidth forms
        | 0x20000..=0x2A6DF  // CJK unified ideographs extension B
    )
}

fn classify_run(run: &str) -> Script {
    if run.chars().any(|c| c.is_alphabetic()) {
        Script::Latin
    } else if run.chars().any(|c| c.is_numeric()) {
        Script::Digit
    } else {
        Script::Punct
    }
}

/// Splits a passage into token units: Latin-ish runs split on whitespace,
/// every CJK-wide code point its own unit. Whitespace runs (including
/// newlines and U+3000) collapse into unit boundaries and are not preserved.
pub fn tokenize(passage: &str) -> Vec<TokenUnit> {
    let mut units = Vec::new();
    let mut run = String::new();
    let flush = |run: &mut String, units: &mut Vec<TokenUnit>| {
        if !run.is_empty() {
            units.push(TokenUnit {
                script: classify_run(run),
                text: std::mem::take(run),
            });
        }
    };
    for c in passage.chars() {
        if c.is_whitespace() {
            flush(&mut run, &mut units);
        } else if is_cjk(c) {
            flush(&mut run, &mut units);
            units.push(TokenUnit {
                text: c.to_string(),
                script: Script::Cjk,
            });
        } else {
            run.push(c);
        }
    }
    flush(&mut run, &mut units);
    units
}

/// Whether the canonical joiner between two adjacent units is a space.
/// A space appears only between two non-CJK units; any CJK neighbor joins
/// directly, which reconstructs natural text in both scripts.
pub fn needs_space(prev: Script, next: Script) -> bool {
    prev != Script::Cjk && next != Script::Cjk
}

/// Joins units back into canonical annotation text using [`needs_space`].
pub fn join_units(units: &[TokenUnit]) -> String {
    let mut out = String::new();
    for (i, unit) in units.iter().enumerate() {
        if i > 0 && needs_space(units[i - 1].script, unit.script) {
            out.push(' ');
        }
        out.push_str(&unit.text);
    }
    out
}

/// Input format for [`TextCorpus::load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One passage per line, UTF-8.
    PlainLines,
    /// One JSON object per line with a `"text"` field; other fields ignored.
    JsonLines,
}

/// An immutable collection of text passages with a language tag.
#[derive(Debug, Clone)]
pub struct TextCorpus {
    documents: Vec<String>,
    language: Language,
}

impl TextCorpus {
    /// Builds a corpus from in-memory passages. Whitespace-only passages are
    /// dropped; an empty result is an error.
    pub fn from_passages<I, S>(passages: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let documents: Vec<String> = passages
            .into_iter()
            .map(Into::into)
            .filter(|p| !p.trim().is_empty())
            .collect();
        if documents.is_empty() {
            return Err(CorpusError::ZeroUsablePassages {
                path: PathBuf::from("<memory>"),
            });
        }
        let language = tag_language(&documents);
        Ok(TextCorpus {
            documents,
            language,
        })
    }

    pub fn load(path: &Path, format: CorpusFormat) -> Result<Self, CorpusError> {
        let raw = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut documents = Vec::new();
        for (idx, line) in raw.lines().enumerate() {
            match format {
                CorpusFormat::PlainLines => {
                    if !line.trim().is_empty() {
                        documents.push(line.to_string());
                    }
                }
                CorpusFormat::JsonLines => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| {
                        CorpusError::MalformedRecord {
                            path: path.to_path_buf(),
                            line: idx + 1,
                            reason: e.to_string(),
                        }
                    })?;
                    let text = value.get("text").and_then(|v| v.as_str()).ok_or_else(|| {
                        CorpusError::MalformedRecord {
                            path: path.to_path_buf(),
                            line: idx + 1,
                            reason: "missing string field \"text\"".into(),
                        }
                    })?;
                    if !text.trim().is_empty() {
                        documents.push(text.to_string());
                    }
                }
            }
        }
        if documents.is_empty() {
            return Err(CorpusError::ZeroUsablePassages {
                path: path.to_path_buf(),
            });
        }
        let language = tag_language(&documents);
        Ok(TextCorpus {
            documents,
            language,
        })
    }

    pub fn documents(&self) -> &[String] {
        &self.documents
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Script-ratio heuristic over non-whitespace code points:
/// >= 50% CJK is Chinese, <= 10% is English, anything between is Mixed.
fn tag_language(documents: &[String]) -> Language {
    let mut cjk = 0u64;
    let mut total = 0u64;
    for doc in documents {
        for c in doc.chars().filter(|c| !c.is_whitespace()) {
            total += 1;
            if is_cjk(c) {
                cjk += 1;
            }
        }
    }
    if total == 0 {
        return Language::English;
    }
    let ratio = cjk as f64 / total as f64;
    if ratio >= 0.5 {
        Language::Chinese
    } else if ratio <= 0.1 {
        Language::English
    } else {
        Language::Mixed
    }
}

/// Draws a contiguous span of up to `unit_count` units from one uniformly
/// chosen passage. If the passage runs out the span ends early; spans never
/// stitch across passages.
pub fn sample_text_span<R: Rng>(
    corpus: &TextCorpus,
    unit_count: usize,
    rng: &mut R,
) -> Vec<TokenUnit> {
    assert!(unit_count >= 1, "unit_count must be positive");
    let doc = &corpus.documents[rng.random_range(0..corpus.documents.len())];
    let units = tokenize(doc);
    if units.is_empty() {
        return Vec::new();
    }
    let max_start = units.len().saturating_sub(unit_count);
    let start = if max_start == 0 {
        0
    } else {
        rng.random_range(0..=max_start)
    };
    let end = (start + unit_count).min(units.len());
    units[start..end].to_vec()
}

/// The annotation text used for unlabeled natural images.
pub const NATURE_PLACEHOLDER: &str = "<nature_image>";

/// One decodable image with an optional category label.
pub struct ImageEntry {
    pub path: PathBuf,
    pub label: Option<String>,
    pub pixels: RgbImage,
}

/// A directory of natural images, decoded at load time, with labels from an
/// optional `labels.jsonl` sidecar (`{"file": ..., "category": ...}`).
pub struct ImageCorpus {
    entries: Vec<ImageEntry>,
}

#[derive(Deserialize)]
struct LabelRecord {
    file: String,
    category: String,
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

impl ImageCorpus {
    pub fn load_dir(dir: &Path) -> Result<Self, CorpusError> {
        let read = std::fs::read_dir(dir).map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut files: Vec<PathBuf> = read
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                    .unwrap_or(false)
            })
            .collect();
        files.sort();

        let mut labels = std::collections::HashMap::new();
        let label_path = dir.join("labels.jsonl");
        if label_path.exists() {
            let raw = std::fs::read_to_string(&label_path).map_err(|source| CorpusError::Io {
                path: label_path.clone(),
                source,
            })?;
            for (idx, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: LabelRecord =
                    serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
                        path: label_path.clone(),
                        line: idx + 1,
                        reason: e.to_string(),
                    })?;
                if record.category.trim().is_empty() {
                    return Err(CorpusError::EmptyLabel {
                        path: label_path.clone(),
                        file: record.file,
                    });
                }
                labels.insert(record.file, record.category);
            }
        }

        let mut entries = Vec::with_capacity(files.len());
        for path in files {
            let img = image::open(&path).map_err(|e| CorpusError::UndecodableImage {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            entries.push(ImageEntry {
                label: labels.remove(&name),
                pixels: img.to_rgb8(),
                path,
            });
        }
        if entries.is_empty() {
            return Err(CorpusError::EmptyImageCorpus {
                path: dir.to_path_buf(),
            });
        }
        if let Some(file) = labels.into_keys().next() {
            return Err(CorpusError::UnknownLabelTarget {
                path: label_path,
                file,
            });
        }
        Ok(ImageCorpus { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Uniformly samples one image. The annotation text is the category label
/// when present and the generic placeholder otherwise.
pub fn sample_image<'a, R: Rng>(corpus: &'a ImageCorpus, rng: &mut R) -> (&'a ImageEntry, String) {
    let entry = &corpus.entries[rng.random_range(0..corpus.entries.len())];
    let annotation = entry
        .label
        .clone()
        .unwrap_or_else(|| NATURE_PLACEHOLDER.to_string());
    (entry, annotation)
}
