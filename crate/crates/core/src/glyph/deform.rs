//! Control-point optimizer for semantic deformation.
//!
//! Block-coordinate descent: each iteration shuffles the coordinates with
//! the configured seed, splits them into batches, estimates the batch
//! gradient by central differences and line-searches along the
//! max-normalized negative gradient with step halving. A step is accepted
//! only on strict loss decrease.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{occupancy_term, shape_loss, SilhouetteTarget};
use super::raster::Frame;
use super::{check_resolution, GlyphDocument, GlyphError};
use crate::domain::GlyphParams;

/// Largest step, in em, at `deform_strength = 1`.
pub const BASE_STEP_EM: f64 = 0.04;
pub const BATCH: usize = 16;
pub const MAX_HALVINGS: u32 = 10;
const WINDOW: usize = 10;
const MIN_REL_IMPROVEMENT: f64 = 1e-4;
const STALL_PASSES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformConfig {
    /// Initial line-search step, in em.
    pub step_size: f64,
    pub max_iterations: u32,
    pub legibility_weight: f64,
    pub raster_resolution: usize,
    pub seed: u64,
}

impl Default for DeformConfig {
    fn default() -> Self {
        DeformConfig {
            step_size: BASE_STEP_EM,
            max_iterations: 200,
            legibility_weight: 0.5,
            raster_resolution: 64,
            seed: 0,
        }
    }
}

impl DeformConfig {
    pub fn from_params(g: &GlyphParams, raster_resolution: usize, seed: u64) -> Self {
        DeformConfig {
            step_size: BASE_STEP_EM * g.deform_strength,
            max_iterations: g.max_iterations,
            legibility_weight: g.legibility_weight,
            raster_resolution,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GlyphError> {
        check_resolution(self.raster_resolution)?;
        let bad = |m: &str| Err(GlyphError::InvalidDocument(format!("deform config: {m}")));
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad("step_size must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.legibility_weight.is_finite() && self.legibility_weight >= 0.0) {
            return bad("legibility_weight must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformOutcome {
    pub document: GlyphDocument,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub initial_occupancy: f64,
    pub final_occupancy: f64,
    /// Initial loss followed by the loss after every accepted step.
    pub accepted_losses: Vec<f64>,
    pub iterations: u32,
}

/// Central-difference derivative of `f` along coordinate `k`.
pub fn central_difference(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    let mut probe = x.to_vec();
    probe[k] = x[k] + h;
    let up = f(&probe);
    probe[k] = x[k] - h;
    let down = f(&probe);
    (up - down) / (2.0 * h)
}

/// Runs the optimizer and reports the whole trajectory.
pub fn deform(doc: &GlyphDocument, target: &SilhouetteTarget, cfg: &DeformConfig) -> Result<DeformOutcome, GlyphError> {
    doc.validate()?;
    cfg.validate()?;
    if target.size() != cfg.raster_resolution {
        return Err(GlyphError::ResolutionMismatch { target: target.size(), config: cfg.raster_resolution });
    }
    let upm = doc.units_per_em as f64;
    let lambda = cfg.legibility_weight;
    let mut eval = |em: &[f64]| -> f64 {
        let units: Vec<f64> = em.iter().map(|v| v * upm).collect();
        shape_loss(&doc.with_coords(&units), target, doc, lambda).expect("structure preserved")
    };

    let mut x: Vec<f64> = doc.coords().iter().map(|v| v / upm).collect();
    let h = 0.5 * Frame::for_doc(doc, cfg.raster_resolution).cell() / upm;
    let initial_loss = eval(&x);
    let mut loss = initial_loss;
    let mut accepted = vec![loss];
    let mut per_iteration = vec![loss];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut iterations = 0;
    let mut stalled = 0;

    while iterations < cfg.max_iterations && loss > 0.0 && !x.is_empty() {
        iterations += 1;
        order.shuffle(&mut rng);
        let mut moved = false;
        for batch in order.chunks(BATCH) {
            let grad: Vec<f64> = batch.iter().map(|&k| central_difference(&mut eval, &x, k, h)).collect();
            let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            if gmax == 0.0 {
                continue;
            }
            let mut step = cfg.step_size;
            for _ in 0..=MAX_HALVINGS {
                let mut trial = x.clone();
                for (&k, g) in batch.iter().zip(&grad) {
                    trial[k] -= step * g / gmax;
                }
                let l = eval(&trial);
                if l < loss {
                    x = trial;
                    loss = l;
                    accepted.push(l);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
        }
        per_iteration.push(loss);
        stalled = if moved { 0 } else { stalled + 1 };
        if stalled >= STALL_PASSES {
            break;
        }
        let n = per_iteration.len();
        if n > WINDOW {
            let old = per_iteration[n - 1 - WINDOW];
            if old - loss < MIN_REL_IMPROVEMENT * old {
                break;
            }
        }
    }

    let units: Vec<f64> = x.iter().map(|v| v * upm).collect();
    let document = doc.with_coords(&units);
    Ok(DeformOutcome {
        initial_occupancy: occupancy_term(doc, target),
        final_occupancy: occupancy_term(&document, target),
        document,
        initial_loss,
        final_loss: loss,
        accepted_losses: accepted,
        iterations,
    })
}

/// Deformed document; the best iterate is always returned.
pub fn semantic_transform(
    doc: &GlyphDocument,
    target: &SilhouetteTarget,
    cfg: &DeformConfig,
) -> Result<GlyphDocument, GlyphError> {
    deform(doc, target, cfg).map(|o| o.document)
}

#[cfg(test)]
mod tests {
    use super::super::loss::displacement_term;
    use super::super::raster::rasterize;
    use super::super::testutil::*;
    use super::super::GlyphPath;
    use super::*;
    use rand::Rng;

    fn max_shift(a: &GlyphDocument, b: &GlyphDocument) -> f64 {
        let upm = a.units_per_em as f64;
        a.coords().iter().zip(b.coords()).map(|(p, q)| ((p - q) / upm).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_target_is_fixed_point() {
        let d = square_ring(1000);
        let t = SilhouetteTarget::new(rasterize(&d, 64)).unwrap();
        let out = deform(&d, &t, &DeformConfig::default()).unwrap();
        assert!(max_shift(&d, &out.document) <= 1e-6);
        assert!(out.final_loss < 1e-9);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn huge_lambda_freezes() {
        let d = square_ring(1000);
        let disk = super::super::silhouette::disk(64);
        let cfg = DeformConfig { legibility_weight: 1e9, max_iterations: 20, ..DeformConfig::default() };
        let out = deform(&d, &disk, &cfg).unwrap();
        assert!(max_shift(&d, &out.document) <= 1e-6);
    }

    #[test]
    fn losses_never_increase_and_are_deterministic() {
        let d = square_ring(1000);
        let disk = super::super::silhouette::disk(32);
        let cfg = DeformConfig { raster_resolution: 32, max_iterations: 15, legibility_weight: 0.01, ..Default::default() };
        let a = deform(&d, &disk, &cfg).unwrap();
        assert!(a.accepted_losses.windows(2).all(|w| w[1] <= w[0]));
        assert!(a.final_loss <= a.initial_loss);
        assert_eq!(a, deform(&d, &disk, &cfg).unwrap());
    }

    #[test]
    fn resolution_mismatch() {
        let d = square_ring(1000);
        let t = SilhouetteTarget::new(rasterize(&d, 32)).unwrap();
        assert_eq!(
            deform(&d, &t, &DeformConfig::default()).unwrap_err(),
            GlyphError::ResolutionMismatch { target: 32, config: 64 }
        );
    }

    #[test]
    fn finite_difference_matches_closed_form_displacement_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let corners: Vec<[f64; 2]> = (0..3).map(|_| [rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)]).collect();
            let mut original = em_square(1000);
            original.characters[0].outline = vec![GlyphPath::polygon(&corners)];
            let x0: Vec<f64> = original.coords().iter().map(|v| v / 1000.0).collect();
            let x: Vec<f64> = x0.iter().map(|v| v + rng.gen_range(-0.05..0.05)).collect();
            let lambda = 2.5;
            let n = original.point_count() as f64;
            let mut f = |em: &[f64]| {
                let units: Vec<f64> = em.iter().map(|v| v * 1000.0).collect();
                lambda * displacement_term(&original.with_coords(&units), &original).unwrap()
            };
            for k in 0..x.len() {
                let fd = central_difference(&mut f, &x, k, 1e-3);
                let exact = 2.0 * lambda * (x[k] - x0[k]) / n;
                assert!((fd - exact).abs() <= 1e-4 * exact.abs().max(1e-12), "{fd} vs {exact}");
            }
        }
    }
}
