//! Procedural silhouette targets looked up by concept keyword.

use super::loss::SilhouetteTarget;
use super::raster::Raster;
use super::GlyphError;
use crate::pipeline::extend::words;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Disk,
    Ring,
    Star,
    Heart,
    Triangle,
    Diamond,
}

const KEYWORDS: &[(Shape, &[&str])] = &[
    (Shape::Ring, &["ring", "donut", "doughnut", "wreath", "halo", "wheel", "tire"]),
    (Shape::Star, &["star", "stars", "sparkle", "starfish", "snowflake"]),
    (Shape::Heart, &["heart", "love", "valentine", "romance"]),
    (Shape::Triangle, &["mountain", "pyramid", "tree", "triangle", "arrow", "tent", "volcano", "rocket"]),
    (Shape::Diamond, &["diamond", "gem", "crystal", "kite", "jewel"]),
    (Shape::Disk, &["sun", "moon", "ball", "coin", "circle", "disk", "orb", "planet", "apple", "egg", "bubble"]),
];

pub fn shape_for(concept: &str) -> Shape {
    let ws = words(concept);
    KEYWORDS
        .iter()
        .find(|(_, keys)| ws.iter().any(|w| keys.contains(&w.as_str())))
        .map_or(Shape::Disk, |(s, _)| *s)
}

/// Inside test in the unit frame `[-1, 1]^2`, y up.
fn inside(shape: Shape, x: f64, y: f64) -> bool {
    let r = (x * x + y * y).sqrt();
    match shape {
        Shape::Disk => r <= 0.8,
        Shape::Ring => (0.45..=0.85).contains(&r),
        Shape::Star => {
            let theta = y.atan2(x) - std::f64::consts::FRAC_PI_2;
            let k = (theta * 5.0 / (2.0 * std::f64::consts::PI)).rem_euclid(1.0);
            let edge = 0.35 + 0.5 * (2.0 * (k - 0.5).abs());
            r <= edge
        }
        Shape::Heart => {
            let (x, y) = (x * 1.25, y * 1.25 + 0.15);
            let a = x * x + y * y - 1.0;
            a * a * a - x * x * y * y * y <= 0.0
        }
        Shape::Triangle => (-0.75..=0.85).contains(&y) && x.abs() <= (0.85 - y) * 0.55,
        Shape::Diamond => x.abs() / 0.6 + y.abs() / 0.85 <= 1.0,
    }
}

pub fn shape_target(shape: Shape, size: usize) -> Result<SilhouetteTarget, GlyphError> {
    let s = size as f64;
    SilhouetteTarget::new(Raster::from_fn(size, |cx, cy| {
        let x = (cx as f64 + 0.5) / s * 2.0 - 1.0;
        let y = 1.0 - (cy as f64 + 0.5) / s * 2.0;
        inside(shape, x, y)
    }))
}

/// Silhouette for a concept phrase; unrecognized concepts fall back to a disk.
pub fn silhouette_for(concept: &str, size: usize) -> Result<SilhouetteTarget, GlyphError> {
    shape_target(shape_for(concept), size)
}

/// Centered disk of radius 0.4 of the raster width.
pub fn disk(size: usize) -> SilhouetteTarget {
    shape_target(Shape::Disk, size).expect("disk is a valid target at every supported size")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(shape_for("a red heart"), Shape::Heart);
        assert_eq!(shape_for("snowy mountain"), Shape::Triangle);
        assert_eq!(shape_for("peace dove"), Shape::Disk);
    }

    #[test]
    fn every_shape_is_valid_at_every_size() {
        for shape in [Shape::Disk, Shape::Ring, Shape::Star, Shape::Heart, Shape::Triangle, Shape::Diamond] {
            for size in super::super::RESOLUTIONS {
                let t = shape_target(shape, size).unwrap();
                assert!(t.grid().count() > size, "{shape:?} at {size}");
                assert!(t.grid().count() < size * size);
            }
        }
    }

    #[test]
    fn disk_area() {
        let t = disk(128);
        let expected = std::f64::consts::PI * (0.4 * 128.0f64).powi(2);
        assert!((t.grid().count() as f64 - expected).abs() / expected < 0.02);
        assert!(shape_target(Shape::Disk, 48).is_err());
    }
}
