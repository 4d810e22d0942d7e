//! Font registry and outline extraction.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use ttf_parser::{Face, OutlineBuilder};

use super::{GlyphChar, GlyphDocument, GlyphError, GlyphPath};
use crate::domain::StyleKind;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FontEntry {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub traditional: bool,
}

#[derive(Debug, Deserialize)]
struct Index {
    #[serde(default)]
    font: Vec<FontEntry>,
}

#[derive(Debug, Clone)]
pub struct FontRegistry {
    entries: Vec<FontEntry>,
}

impl FontRegistry {
    /// Reads an index file; relative font paths resolve against its directory.
    pub fn load(index: &Path) -> Result<Self, GlyphError> {
        let text = fs::read_to_string(index).map_err(|e| GlyphError::FontIo(format!("{}: {e}", index.display())))?;
        let parsed: Index = toml::from_str(&text).map_err(|e| GlyphError::FontIo(e.to_string()))?;
        let base = index.parent().unwrap_or(Path::new("."));
        let entries = parsed
            .font
            .into_iter()
            .map(|mut e| {
                if e.path.is_relative() {
                    e.path = base.join(&e.path);
                }
                e
            })
            .collect();
        Ok(FontRegistry { entries })
    }

    pub fn bundled() -> Result<Self, GlyphError> {
        Self::load(&crate::bundled_dir().join("fonts/fonts.toml"))
    }

    pub fn entries(&self) -> &[FontEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&FontEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Font used for `style`: the requested one, except that traditional
    /// style swaps a non-traditional font for the first traditional entry.
    pub fn resolve(&self, id: &str, style: StyleKind) -> Result<&FontEntry, GlyphError> {
        let entry = self.get(id).ok_or_else(|| GlyphError::UnknownFont(id.to_string()))?;
        if style == StyleKind::Traditional && !entry.traditional {
            if let Some(t) = self.entries.iter().find(|e| e.traditional) {
                return Ok(t);
            }
        }
        Ok(entry)
    }
}

type P = [f64; 2];

#[derive(Default)]
struct Collector {
    paths: Vec<GlyphPath>,
    segs: Vec<[P; 4]>,
    start: P,
    pen: P,
}

impl Collector {
    fn push(&mut self, seg: [P; 4]) {
        self.segs.push(seg);
        self.pen = seg[3];
    }

    fn line(&mut self, to: P) {
        let a = self.pen;
        let h1 = [a[0] + (to[0] - a[0]) / 3.0, a[1] + (to[1] - a[1]) / 3.0];
        let h2 = [a[0] + 2.0 * (to[0] - a[0]) / 3.0, a[1] + 2.0 * (to[1] - a[1]) / 3.0];
        self.push([a, h1, h2, to]);
    }

    fn finish(&mut self) {
        if self.segs.is_empty() {
            return;
        }
        if self.pen != self.start {
            self.line(self.start);
        }
        let points = self.segs.drain(..).flat_map(|s| [s[0], s[1], s[2]]).collect();
        self.paths.push(GlyphPath { points });
    }
}

impl OutlineBuilder for Collector {
    fn move_to(&mut self, x: f32, y: f32) {
        self.finish();
        self.start = [x as f64, y as f64];
        self.pen = self.start;
    }

    fn line_to(&mut self, x: f32, y: f32) {
        self.line([x as f64, y as f64]);
    }

    fn quad_to(&mut self, x1: f32, y1: f32, x: f32, y: f32) {
        let (p0, q, p3) = (self.pen, [x1 as f64, y1 as f64], [x as f64, y as f64]);
        let c1 = [p0[0] + 2.0 / 3.0 * (q[0] - p0[0]), p0[1] + 2.0 / 3.0 * (q[1] - p0[1])];
        let c2 = [p3[0] + 2.0 / 3.0 * (q[0] - p3[0]), p3[1] + 2.0 / 3.0 * (q[1] - p3[1])];
        self.push([p0, c1, c2, p3]);
    }

    fn curve_to(&mut self, x1: f32, y1: f32, x2: f32, y2: f32, x: f32, y: f32) {
        let p0 = self.pen;
        self.push([p0, [x1 as f64, y1 as f64], [x2 as f64, y2 as f64], [x as f64, y as f64]]);
    }

    fn close(&mut self) {
        self.finish();
    }
}

/// Extracts the outlines of `text` from a registered font.
pub fn render_glyphs(
    registry: &FontRegistry,
    text: &str,
    font_id: &str,
    style: StyleKind,
) -> Result<GlyphDocument, GlyphError> {
    if text.is_empty() {
        return Err(GlyphError::EmptyText);
    }
    let entry = registry.resolve(font_id, style)?;
    let data = fs::read(&entry.path).map_err(|e| GlyphError::FontIo(format!("{}: {e}", entry.path.display())))?;
    let face = Face::parse(&data, 0).map_err(|e| GlyphError::FontIo(format!("{}: {e}", entry.id)))?;
    let upm = face.units_per_em() as u32;
    let mut characters = Vec::new();
    for ch in text.chars() {
        let Some(gid) = face.glyph_index(ch) else {
            if ch.is_whitespace() {
                characters.push(GlyphChar { codepoint: ch as u32, outline: Vec::new(), advance: upm as f64 / 3.0 });
                continue;
            }
            return Err(GlyphError::MissingGlyph(ch as u32));
        };
        let mut collector = Collector::default();
        face.outline_glyph(gid, &mut collector);
        collector.finish();
        let advance = face.glyph_hor_advance(gid).map(f64::from).unwrap_or(upm as f64);
        characters.push(GlyphChar { codepoint: ch as u32, outline: collector.paths, advance });
    }
    let doc = GlyphDocument {
        characters,
        units_per_em: upm,
        ascender: face.ascender() as f64,
        descender: face.descender() as f64,
        source_font: entry.id.clone(),
    };
    doc.validate()?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> FontRegistry {
        FontRegistry::bundled().unwrap()
    }

    #[test]
    fn latin_a_fits_em_square() {
        let doc = render_glyphs(&reg(), "A", "dejavu-sans", StyleKind::Normal).unwrap();
        let u = doc.units_per_em as f64;
        assert_eq!(doc.characters.len(), 1);
        assert!(!doc.characters[0].outline.is_empty());
        for c in doc.coords().chunks(2) {
            assert!((0.0..=u).contains(&c[0]) && (-u..=u).contains(&c[1]), "{c:?}");
        }
        let (lo, hi) = doc.coords().chunks(2).fold((f64::MAX, f64::MIN), |(lo, hi), c| (lo.min(c[1]), hi.max(c[1])));
        assert!(hi - lo <= u);
    }

    #[test]
    fn traditional_cjk_glyph() {
        let doc = render_glyphs(&reg(), "和", "zcool-xiaowei", StyleKind::Traditional).unwrap();
        assert_eq!(doc.characters.len(), 1);
        assert!(!doc.characters[0].outline.is_empty());
        assert!(doc.characters[0].outline.iter().all(|p| p.points.len() % 3 == 0));
    }

    #[test]
    fn traditional_style_swaps_font() {
        let doc = render_glyphs(&reg(), "龙", "dejavu-sans", StyleKind::Traditional).unwrap();
        assert_eq!(doc.source_font, "zcool-xiaowei");
    }

    #[test]
    fn missing_glyph_and_unknown_font() {
        assert_eq!(
            render_glyphs(&reg(), "和", "dejavu-sans", StyleKind::Normal),
            Err(GlyphError::MissingGlyph('和' as u32))
        );
        assert_eq!(
            render_glyphs(&reg(), "A", "comic-sans", StyleKind::Normal),
            Err(GlyphError::UnknownFont("comic-sans".into()))
        );
    }

    #[test]
    fn spaces_have_advance_but_no_outline() {
        let doc = render_glyphs(&reg(), "A B", "dejavu-sans", StyleKind::Normal).unwrap();
        assert!(doc.characters[1].outline.is_empty());
        assert!(doc.characters[1].advance > 0.0);
        let cjk = render_glyphs(&reg(), "和 平", "zcool-xiaowei", StyleKind::Normal).unwrap();
        assert_eq!(cjk.characters[1].advance, cjk.units_per_em as f64 / 3.0);
    }

    #[test]
    fn quadratic_outlines_become_closed_cubics() {
        let doc = render_glyphs(&reg(), "O", "dejavu-sans", StyleKind::Normal).unwrap();
        assert_eq!(doc.characters[0].outline.len(), 2);
        for p in &doc.characters[0].outline {
            let n = p.segments();
            for i in 0..n {
                assert_eq!(p.segment(i)[3], p.segment((i + 1) % n)[0]);
            }
        }
    }
}
