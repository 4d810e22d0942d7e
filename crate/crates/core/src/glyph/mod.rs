//! Glyph agent.
//!
//! Glyph outlines come from TrueType fonts and are kept as closed cubic
//! Bezier paths. Semantic deformation moves control points so the
//! rasterized text approaches a target silhouette; the loss is a
//! deterministic occupancy mismatch plus a displacement regularizer, and the
//! optimizer uses finite differences over the scanline rasterizer.

pub mod deform;
pub mod font;
pub mod legibility;
pub mod loss;
pub mod raster;
pub mod silhouette;
pub mod style;
pub mod svg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use deform::{deform, semantic_transform, DeformConfig, DeformOutcome};
pub use font::{render_glyphs, FontRegistry};
pub use legibility::legibility_score;
pub use loss::{shape_loss, SilhouetteTarget};
pub use raster::{rasterize, Raster};
pub use silhouette::silhouette_for;
pub use style::select_style;

pub const RESOLUTIONS: [usize; 3] = [32, 64, 128];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GlyphError {
    #[error("unknown font `{0}`")]
    UnknownFont(String),
    #[error("font has no glyph for U+{0:04X}")]
    MissingGlyph(u32),
    #[error("font file: {0}")]
    FontIo(String),
    #[error("text is empty")]
    EmptyText,
    #[error("resolution {0} is not one of 32, 64, 128")]
    InvalidResolution(usize),
    #[error("target is {target}x{target} but the config asks for {config}")]
    ResolutionMismatch { target: usize, config: usize },
    #[error("documents have different control-point structure")]
    StructureMismatch,
    #[error("documents have {0} and {1} characters")]
    CharacterCountMismatch(usize, usize),
    #[error("invalid silhouette target: {0}")]
    InvalidTarget(String),
    #[error("invalid glyph document: {0}")]
    InvalidDocument(String),
    #[error("svg: {0}")]
    Svg(String),
}

pub fn check_resolution(res: usize) -> Result<(), GlyphError> {
    if RESOLUTIONS.contains(&res) {
        Ok(())
    } else {
        Err(GlyphError::InvalidResolution(res))
    }
}

/// A closed cubic path stored as `[anchor, handle_out, handle_in]` triples.
/// Segment `i` runs from anchor `i` through the two handles to anchor
/// `i + 1`, wrapping to anchor 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphPath {
    pub points: Vec<[f64; 2]>,
}

impl GlyphPath {
    pub fn segments(&self) -> usize {
        self.points.len() / 3
    }

    /// Control points `(p0, p1, p2, p3)` of segment `i`.
    pub fn segment(&self, i: usize) -> [[f64; 2]; 4] {
        let n = self.points.len();
        [self.points[3 * i], self.points[3 * i + 1], self.points[3 * i + 2], self.points[(3 * i + 3) % n]]
    }

    /// Closed polygon path through `corners`, each edge a straight cubic.
    pub fn polygon(corners: &[[f64; 2]]) -> Self {
        let n = corners.len();
        let mut points = Vec::with_capacity(3 * n);
        for i in 0..n {
            let a = corners[i];
            let b = corners[(i + 1) % n];
            points.push(a);
            points.push([a[0] + (b[0] - a[0]) / 3.0, a[1] + (b[1] - a[1]) / 3.0]);
            points.push([a[0] + 2.0 * (b[0] - a[0]) / 3.0, a[1] + 2.0 * (b[1] - a[1]) / 3.0]);
        }
        GlyphPath { points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphChar {
    pub codepoint: u32,
    /// Paths in the character's own frame; the pen origin is at x = 0.
    pub outline: Vec<GlyphPath>,
    pub advance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphDocument {
    pub characters: Vec<GlyphChar>,
    pub units_per_em: u32,
    /// Vertical extent of the layout frame, in font units.
    pub ascender: f64,
    pub descender: f64,
    pub source_font: String,
}

impl GlyphDocument {
    pub fn validate(&self) -> Result<(), GlyphError> {
        let bad = |m: &str| Err(GlyphError::InvalidDocument(m.to_string()));
        if self.characters.is_empty() {
            return bad("no characters");
        }
        if self.units_per_em == 0 {
            return bad("units_per_em is zero");
        }
        if !(self.ascender.is_finite() && self.descender.is_finite()) || self.ascender <= self.descender {
            return bad("ascender must exceed descender");
        }
        for c in &self.characters {
            if !c.advance.is_finite() || c.advance < 0.0 {
                return bad("negative advance");
            }
            for p in &c.outline {
                if p.points.len() < 3 || p.points.len() % 3 != 0 {
                    return bad("path is not a closed cubic sequence");
                }
                if p.points.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("non-finite control point");
                }
            }
        }
        Ok(())
    }

    pub fn text(&self) -> String {
        self.characters.iter().filter_map(|c| char::from_u32(c.codepoint)).collect()
    }

    pub fn total_advance(&self) -> f64 {
        self.characters.iter().map(|c| c.advance).sum()
    }

    pub fn point_count(&self) -> usize {
        self.characters.iter().flat_map(|c| &c.outline).map(|p| p.points.len()).sum()
    }

    /// All control-point coordinates, flattened `x0, y0, x1, y1, ...`.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.point_count() * 2);
        for p in self.characters.iter().flat_map(|c| &c.outline) {
            for pt in &p.points {
                v.extend_from_slice(pt);
            }
        }
        v
    }

    /// Copy with coordinates replaced from a [`coords`](Self::coords)-shaped slice.
    pub fn with_coords(&self, coords: &[f64]) -> GlyphDocument {
        let mut doc = self.clone();
        let mut it = coords.chunks_exact(2);
        for p in doc.characters.iter_mut().flat_map(|c| c.outline.iter_mut()) {
            for pt in p.points.iter_mut() {
                let c = it.next().expect("coordinate count matches structure");
                *pt = [c[0], c[1]];
            }
        }
        doc
    }

    pub fn same_structure(&self, other: &GlyphDocument) -> bool {
        self.characters.len() == other.characters.len()
            && self.characters.iter().zip(&other.characters).all(|(a, b)| {
                a.outline.len() == b.outline.len()
                    && a.outline.iter().zip(&b.outline).all(|(p, q)| p.points.len() == q.points.len())
            })
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn coords_round_trip() {
        let d = square_ring(1000);
        assert_eq!(d.with_coords(&d.coords()), d);
        assert_eq!(d.coords().len(), 2 * d.point_count());
        assert!(d.validate().is_ok());
    }

    #[test]
    fn polygon_segments_close() {
        let p = GlyphPath::polygon(&[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]]);
        assert_eq!(p.segments(), 3);
        assert_eq!(p.segment(2)[3], [0.0, 0.0]);
        assert_eq!(p.segment(0)[1], [1.0, 0.0]);
    }

    #[test]
    fn invalid_documents() {
        let mut d = em_square(1000);
        d.characters[0].outline[0].points.pop();
        assert!(d.validate().is_err());
        let mut d = em_square(1000);
        d.characters.clear();
        assert!(d.validate().is_err());
    }
}
