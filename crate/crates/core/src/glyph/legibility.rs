use super::raster::{rasterize, Raster};
use super::{GlyphDocument, GlyphError};

pub const LEGIBILITY_RESOLUTION: usize = 64;

pub fn iou(a: &Raster, b: &Raster) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.cells.iter().zip(&b.cells) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Intersection over union of the two documents rasterized at 64x64.
pub fn legibility_score(deformed: &GlyphDocument, original: &GlyphDocument) -> Result<f64, GlyphError> {
    if deformed.characters.len() != original.characters.len() {
        return Err(GlyphError::CharacterCountMismatch(deformed.characters.len(), original.characters.len()));
    }
    Ok(iou(
        &rasterize(deformed, LEGIBILITY_RESOLUTION),
        &rasterize(original, LEGIBILITY_RESOLUTION),
    ))
}
