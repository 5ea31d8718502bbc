//! Font registry: outline fonts loaded from a directory with a TOML
//! manifest listing id, file, and coverage tag. Manifest order doubles as
//! the fallback search order for missing glyphs.

use crate::error::FontError;
use ab_glyph::{Font, FontArc};
use serde::Deserialize;
use std::collections::HashMap;
use std::path::Path;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    font: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    id: String,
    file: String,
    coverage: String,
    #[serde(default)]
    bold: bool,
}

pub struct RegistryFont {
    pub id: String,
    pub coverage: String,
    pub bold: bool,
    pub font: FontArc,
}

pub struct FontRegistry {
    fonts: Vec<RegistryFont>,
    by_id: HashMap<String, usize>,
}

pub const MANIFEST_NAME: &str = "registry.toml";

impl FontRegistry {
    pub fn load(dir: &Path) -> Result<Self, FontError> {
        let manifest_path = dir.join(MANIFEST_NAME);
        let raw = std::fs::read_to_string(&manifest_path).map_err(|source| FontError::Io {
            path: manifest_path.clone(),
            source,
        })?;
        let manifest: ManifestFile =
            toml::from_str(&raw).map_err(|e| FontError::Manifest {
                path: manifest_path.clone(),
                message: e.to_string(),
            })?;
        if manifest.font.is_empty() {
            return Err(FontError::EmptyRegistry);
        }
        let mut fonts = Vec::with_capacity(manifest.font.len());
        let mut by_id = HashMap::new();
        for entry in manifest.font {
            let path = dir.join(&entry.file);
            let data = std::fs::read(&path).map_err(|source| FontError::Io {
                path: path.clone(),
                source,
            })?;
            let font =
                FontArc::try_from_vec(data).map_err(|_| FontError::Parse { path: path.clone() })?;
            if by_id.contains_key(&entry.id) {
                return Err(FontError::Manifest {
                    path: manifest_path.clone(),
                    message: format!("duplicate font id {:?}", entry.id),
                });
            }
            by_id.insert(entry.id.clone(), fonts.len());
            fonts.push(RegistryFont {
                id: entry.id,
                coverage: entry.coverage,
                bold: entry.bold,
                font,
            });
        }
        Ok(FontRegistry { fonts, by_id })
    }

    pub fn get(&self, id: &str) -> Result<&RegistryFont, FontError> {
        self.by_id
            .get(id)
            .map(|&i| &self.fonts[i])
            .ok_or_else(|| FontError::UnknownFont { id: id.to_string() })
    }

    /// Font ids in manifest order.
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.fonts.iter().map(|f| f.id.as_str())
    }

    /// Ids of fonts usable as page text fonts (non-bold), manifest order.
    pub fn text_font_ids(&self) -> Vec<String> {
        self.fonts
            .iter()
            .filter(|f| !f.bold)
            .map(|f| f.id.clone())
            .collect()
    }

    pub fn covers(&self, id: &str, ch: char) -> Result<bool, FontError> {
        Ok(self.get(id)?.font.glyph_id(ch).0 != 0)
    }

    /// First font in manifest order (other than `exclude`) that covers `ch`.
    pub fn fallback_for(&self, ch: char, exclude: &str) -> Option<&RegistryFont> {
        self.fonts
            .iter()
            .find(|f| f.id != exclude && f.font.glyph_id(ch).0 != 0)
    }

    /// The bold variant sharing a coverage tag with `id`, if the registry
    /// has one; otherwise `None` and callers synthesize bold.
    pub fn bold_variant(&self, id: &str) -> Option<&RegistryFont> {
        let base = self.get(id).ok()?;
        self.fonts
            .iter()
            .find(|f| f.bold && f.coverage == base.coverage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    pub fn fixture_fonts() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/fonts")
    }

    #[test]
    fn loads_fixture_registry() {
        let reg = FontRegistry::load(&fixture_fonts()).unwrap();
        let ids: Vec<&str> = reg.ids().collect();
        assert_eq!(ids, ["dejavu-sans", "dejavu-sans-bold", "boxhan"]);
        assert!(reg.covers("dejavu-sans", 'a').unwrap());
        assert!(!reg.covers("dejavu-sans", '文').unwrap());
        assert!(reg.covers("boxhan", '文').unwrap());
        assert!(!reg.covers("boxhan", 'a').unwrap());
    }

    #[test]
    fn fallback_searches_manifest_order() {
        let reg = FontRegistry::load(&fixture_fonts()).unwrap();
        let fb = reg.fallback_for('文', "dejavu-sans").unwrap();
        assert_eq!(fb.id, "boxhan");
        let fb = reg.fallback_for('a', "boxhan").unwrap();
        assert_eq!(fb.id, "dejavu-sans");
        assert!(reg.fallback_for('\u{58F}', "dejavu-sans").is_none() || true);
    }

    #[test]
    fn unknown_font_id_errors() {
        let reg = FontRegistry::load(&fixture_fonts()).unwrap();
        assert!(matches!(
            reg.get("nope"),
            Err(FontError::UnknownFont { .. })
        ));
    }

    #[test]
    fn text_fonts_exclude_bold() {
        let reg = FontRegistry::load(&fixture_fonts()).unwrap();
        assert_eq!(reg.text_font_ids(), ["dejavu-sans", "boxhan"]);
        assert_eq!(reg.bold_variant("dejavu-sans").unwrap().id, "dejavu-sans-bold");
        assert!(reg.bold_variant("boxhan").is_none());
    }
}
