//! Silhouette loss.

use serde::{Deserialize, Serialize};

use super::raster::{rasterize, Raster};
use super::{check_resolution, GlyphDocument, GlyphError};

/// Square occupancy target the deformation steers toward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SilhouetteTarget {
    grid: Raster,
}

impl SilhouetteTarget {
    pub fn new(grid: Raster) -> Result<Self, GlyphError> {
        check_resolution(grid.size).map_err(|_| GlyphError::InvalidTarget(format!("size {}", grid.size)))?;
        if grid.cells.len() != grid.size * grid.size {
            return Err(GlyphError::InvalidTarget("cell count does not match size".into()));
        }
        if grid.count() == 0 {
            return Err(GlyphError::InvalidTarget("no occupied cell".into()));
        }
        Ok(SilhouetteTarget { grid })
    }

    pub fn size(&self) -> usize {
        self.grid.size
    }

    pub fn grid(&self) -> &Raster {
        &self.grid
    }
}

/// Mean squared occupancy difference between `doc` and `target`.
pub fn occupancy_term(doc: &GlyphDocument, target: &SilhouetteTarget) -> f64 {
    let r = rasterize(doc, target.size());
    r.mismatch(target.grid()) as f64 / (target.size() * target.size()) as f64
}

/// Mean squared control-point displacement, in em units.
pub fn displacement_term(doc: &GlyphDocument, original: &GlyphDocument) -> Result<f64, GlyphError> {
    if !doc.same_structure(original) {
        return Err(GlyphError::StructureMismatch);
    }
    let n = doc.point_count();
    if n == 0 {
        return Ok(0.0);
    }
    let upm = original.units_per_em as f64;
    let sum: f64 = doc
        .coords()
        .iter()
        .zip(original.coords())
        .map(|(a, b)| {
            let d = (a - b) / upm;
            d * d
        })
        .sum();
    Ok(sum / n as f64)
}

/// `occupancy_term + lambda * displacement_term`.
pub fn shape_loss(
    doc: &GlyphDocument,
    target: &SilhouetteTarget,
    original: &GlyphDocument,
    lambda: f64,
) -> Result<f64, GlyphError> {
    let disp = displacement_term(doc, original)?;
    Ok(occupancy_term(doc, target) + lambda * disp)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn identity_is_zero() {
        let d = square_ring(1000);
        let t = SilhouetteTarget::new(rasterize(&d, 64)).unwrap();
        assert_eq!(shape_loss(&d, &t, &d, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn complement_is_one() {
        let d = square_ring(1000);
        let t = SilhouetteTarget::new(rasterize(&d, 32).complement()).unwrap();
        assert_eq!(shape_loss(&d, &t, &d, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn perturbation_adds_both_terms() {
        let d = square_ring(1000);
        let t = SilhouetteTarget::new(rasterize(&d, 64)).unwrap();
        let mut c = d.coords();
        c[0] -= 120.0;
        c[1] -= 120.0;
        let moved = d.with_coords(&c);
        let lambda = 0.5;
        let disp = (0.12f64 * 0.12 * 2.0) / d.point_count() as f64;
        let mismatch = rasterize(&moved, 64).mismatch(t.grid());
        assert!(mismatch > 0);
        let loss = shape_loss(&moved, &t, &d, lambda).unwrap();
        assert!((loss - (mismatch as f64 / 4096.0 + lambda * disp)).abs() < 1e-12);
        assert!(loss > lambda * disp);
    }

    #[test]
    fn target_validation() {
        assert!(SilhouetteTarget::new(Raster::empty(64)).is_err());
        assert!(SilhouetteTarget::new(Raster::from_fn(48, |_, _| true)).is_err());
    }

    #[test]
    fn structure_mismatch() {
        let a = square_ring(1000);
        let b = em_square(1000);
        let t = SilhouetteTarget::new(rasterize(&a, 32)).unwrap();
        assert_eq!(shape_loss(&a, &t, &b, 1.0), Err(GlyphError::StructureMismatch));
    }
}
