//! Error types for the synthesis pipeline.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}: zero usable passages")]
    ZeroUsablePassages { path: PathBuf },
    #[error("{path}: not a decodable image: {reason}")]
    UndecodableImage { path: PathBuf, reason: String },
    #[error("{path}: label references unknown file {file:?}")]
    UnknownLabelTarget { path: PathBuf, file: String },
    #[error("{path}: empty category label for {file:?}")]
    EmptyLabel { path: PathBuf, file: String },
    #[error("{path}: no images found")]
    EmptyImageCorpus { path: PathBuf },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Error)]
pub enum FontError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: bad registry manifest: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{path}: font does not parse")]
    Parse { path: PathBuf },
    #[error("unknown font id {id:?}")]
    UnknownFont { id: String },
    #[error("font registry is empty")]
    EmptyRegistry,
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("inconsistent config range for {field}")]
    InconsistentRange { field: &'static str },
    #[error("cannot place {kind} of minimum {min_w}x{min_h} in data area {avail_w}x{avail_h}")]
    PlacementInfeasible {
        kind: &'static str,
        min_w: u32,
        min_h: u32,
        avail_w: u32,
        avail_h: u32,
    },
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("glyph for {ch:?} missing from font {font_id:?}")]
    MissingGlyph { ch: char, font_id: String },
    #[error("cell size infeasible: {rows}x{cols} content does not fit {w}x{h}")]
    InfeasibleCellSize { rows: u32, cols: u32, w: u32, h: u32 },
    #[error(transparent)]
    Font(#[from] FontError),
}

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("generation failed for {category} seed {seed} after {attempts} attempts: {last}")]
    GenerationFailed {
        category: &'static str,
        seed: u64,
        attempts: u32,
        last: String,
    },
    #[error("category requires a natural-image corpus but none is configured")]
    MissingImageCorpus,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Font(#[from] FontError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("document {index} ({category}): {source}")]
    Generation {
        index: u64,
        category: &'static str,
        source: ComposeError,
    },
    #[error("{path}:{line}: bad manifest record: {reason}")]
    BadManifestRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Font(#[from] FontError),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: bad record: {reason}")]
    BadRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("no overlapping image keys between ground truth and predictions")]
    NoOverlap,
}

/// Error type for the canonical-grammar parsers.
#[derive(Debug, Error)]
#[error("annotation parse error at byte {at}: {message}")]
pub struct ParseError {
    pub at: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(at: usize, message: impl Into<String>) -> Self {
        ParseError {
            at,
            message: message.into(),
        }
    }
}
