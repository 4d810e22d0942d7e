//! Controllable render requests.
//!
//! Control maps are derived from the glyph raster and shipped as base64
//! grayscale PNGs: `Edge` marks boundary cells, `Depth` is a normalized
//! 4-neighbour distance transform and `Scribble` is the raster itself.

use std::collections::{BTreeMap, VecDeque};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::fusion::FusionSpec;
use super::TextureError;
use crate::domain::{ControlKind, HyperParams};
use crate::glyph::raster::Raster;
use crate::hash::stable_hash_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlEntry {
    /// Stable hash of the encoded map.
    pub map_ref: String,
    pub weight: f64,
    /// Base64 PNG, 8-bit grayscale.
    pub map: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderRequest {
    pub glyph_image_ref: String,
    /// Base64 PNG of the glyph raster.
    pub glyph_mask: String,
    pub prompt: String,
    pub negative_prompt: String,
    pub control: BTreeMap<ControlKind, ControlEntry>,
    /// `(model id, alpha)` in fusion order.
    pub fusion: Vec<(String, f64)>,
    pub guidance: f64,
    pub seed: u64,
    pub request_id: String,
}

impl RenderRequest {
    /// Hash of the canonical JSON form with `request_id` blanked.
    pub fn compute_id(&self) -> String {
        let mut copy = self.clone();
        copy.request_id.clear();
        stable_hash_hex(&serde_json::to_vec(&copy).expect("request serializes"))
    }

    pub fn validate(&self) -> Result<(), TextureError> {
        let bad = |m: String| Err(TextureError::InvalidRequest(m));
        if self.control.is_empty() {
            return bad("no control conditions".into());
        }
        for (kind, c) in &self.control {
            if !(0.0..=1.0).contains(&c.weight) {
                return bad(format!("{} weight {} outside [0, 1]", kind.name(), c.weight));
            }
        }
        let sum: f64 = self.fusion.iter().map(|(_, a)| a).sum();
        if self.fusion.is_empty() || (sum - 1.0).abs() > 1e-9 {
            return bad(format!("fusion weights sum to {sum}"));
        }
        if !(self.guidance.is_finite() && self.guidance > 0.0) {
            return bad(format!("guidance {}", self.guidance));
        }
        if self.request_id != self.compute_id() {
            return bad("request_id does not match contents".into());
        }
        Ok(())
    }

    pub fn mask(&self) -> Result<Raster, TextureError> {
        let (size, px) = decode_gray_png(&self.glyph_mask)?;
        Ok(Raster { size, cells: px.iter().map(|&v| v >= 128).collect() })
    }
}

pub(crate) fn encode_png(size: usize, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, size as u32, size as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().expect("in-memory PNG header");
    w.write_image_data(data).expect("in-memory PNG data");
    w.finish().expect("in-memory PNG finish");
    out
}

fn decode_gray_png(b64: &str) -> Result<(usize, Vec<u8>), TextureError> {
    let bytes = B64.decode(b64).map_err(|e| TextureError::InvalidRequest(format!("glyph mask: {e}")))?;
    let dec = png::Decoder::new(bytes.as_slice());
    let mut reader = dec.read_info().map_err(|e| TextureError::InvalidRequest(format!("glyph mask: {e}")))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| TextureError::InvalidRequest(format!("glyph mask: {e}")))?;
    if info.color_type != png::ColorType::Grayscale || info.width != info.height {
        return Err(TextureError::InvalidRequest("glyph mask must be square grayscale".into()));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width as usize, buf))
}

fn boundary(r: &Raster, x: usize, y: usize) -> bool {
    let n = r.size;
    x == 0 || y == 0 || x + 1 == n || y + 1 == n || !r.get(x - 1, y) || !r.get(x + 1, y) || !r.get(x, y - 1) || !r.get(x, y + 1)
}

/// Grid distance of every occupied cell to the nearest empty cell or the
/// raster border; empty cells are zero.
pub fn distance_transform(r: &Raster) -> Vec<u32> {
    let n = r.size;
    let mut dist = vec![u32::MAX; n * n];
    let mut queue = VecDeque::new();
    for y in 0..n {
        for x in 0..n {
            if !r.get(x, y) {
                dist[y * n + x] = 0;
            } else if boundary(r, x, y) {
                dist[y * n + x] = 1;
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[y * n + x] + 1;
        let mut visit = |nx: usize, ny: usize| {
            let i = ny * n + nx;
            if dist[i] > d {
                dist[i] = d;
                queue.push_back((nx, ny));
            }
        };
        if x > 0 {
            visit(x - 1, y);
        }
        if x + 1 < n {
            visit(x + 1, y);
        }
        if y > 0 {
            visit(x, y - 1);
        }
        if y + 1 < n {
            visit(x, y + 1);
        }
    }
    dist
}

/// Gray levels of a control map, row-major.
pub fn control_map(kind: ControlKind, r: &Raster) -> Vec<u8> {
    let n = r.size;
    match kind {
        ControlKind::Scribble => r.cells.iter().map(|&c| if c { 255 } else { 0 }).collect(),
        ControlKind::Edge => (0..n * n)
            .map(|i| {
                let (x, y) = (i % n, i / n);
                if r.get(x, y) && boundary(r, x, y) {
                    255
                } else {
                    0
                }
            })
            .collect(),
        ControlKind::Depth => {
            let d = distance_transform(r);
            let max = d.iter().copied().max().unwrap_or(0).max(1) as f64;
            d.iter().map(|&v| (v as f64 / max * 255.0).round() as u8).collect()
        }
    }
}

fn gray_b64(r: &Raster, px: &[u8]) -> String {
    B64.encode(encode_png(r.size, png::ColorType::Grayscale, px))
}

/// Texture prompt, then the fused models' trigger words, then each augment
/// keyword repeated by its count, joined with `", "`.
pub fn compose_prompt(texture_prompt: &str, fusion: &FusionSpec, params: &HyperParams) -> String {
    let mut parts: Vec<&str> = vec![texture_prompt.trim()];
    parts.extend(fusion.trigger_words());
    for kw in &params.pipeline.augment_keywords {
        for _ in 0..kw.count {
            parts.push(kw.keyword.as_str());
        }
    }
    parts.join(", ")
}

pub fn build_render_request(
    glyph: &Raster,
    texture_prompt: &str,
    fusion: &FusionSpec,
    params: &HyperParams,
) -> Result<RenderRequest, TextureError> {
    let t = &params.texture;
    if t.control_weights.is_empty() {
        return Err(TextureError::InvalidRequest("no control conditions".into()));
    }
    if fusion.entries.is_empty() {
        return Err(TextureError::InvalidRequest("empty fusion spec".into()));
    }
    let scribble = control_map(ControlKind::Scribble, glyph);
    let glyph_mask = gray_b64(glyph, &scribble);
    let control = t
        .control_weights
        .iter()
        .map(|(&kind, &weight)| {
            let map = gray_b64(glyph, &control_map(kind, glyph));
            (kind, ControlEntry { map_ref: stable_hash_hex(map.as_bytes()), weight, map })
        })
        .collect();
    let mut req = RenderRequest {
        glyph_image_ref: stable_hash_hex(glyph_mask.as_bytes()),
        glyph_mask,
        prompt: compose_prompt(texture_prompt, fusion, params),
        negative_prompt: t.negative_prompt.clone(),
        control,
        fusion: fusion.entries.iter().map(|e| (e.model_id.clone(), e.alpha)).collect(),
        guidance: t.guidance,
        seed: t.seed,
        request_id: String::new(),
    };
    req.request_id = req.compute_id();
    req.validate()?;
    Ok(req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AugmentKeyword;
    use crate::texture::{fuse_weights, ModelTree};

    fn square(n: usize, lo: usize, hi: usize) -> Raster {
        Raster::from_fn(n, |x, y| (lo..hi).contains(&x) && (lo..hi).contains(&y))
    }

    fn spec() -> FusionSpec {
        let tree = ModelTree::bundled().unwrap();
        fuse_weights(&[tree.find("sci-fi/cyber").unwrap().clone()], &[1.0]).unwrap()
    }

    #[test]
    fn deterministic_id() {
        let p = HyperParams::default();
        let a = build_render_request(&square(32, 8, 24), "neon city", &spec(), &p).unwrap();
        let b = build_render_request(&square(32, 8, 24), "neon city", &spec(), &p).unwrap();
        assert_eq!(a.request_id, b.request_id);
        let c = build_render_request(&square(32, 8, 25), "neon city", &spec(), &p).unwrap();
        assert_ne!(a.request_id, c.request_id);
        assert_eq!(a.mask().unwrap(), square(32, 8, 24));
    }

    #[test]
    fn augment_repetitions() {
        let base = HyperParams::default();
        let mut aug = base.clone();
        aug.pipeline.augment_keywords.push(AugmentKeyword { keyword: "dove".into(), count: 2 });
        let count = |p: &HyperParams| {
            build_render_request(&square(32, 8, 24), "peace dove over a city", &spec(), p).unwrap().prompt.matches("dove").count()
        };
        assert_eq!(count(&aug), count(&base) + 2);
    }

    #[test]
    fn edge_map_is_one_cell_boundary() {
        let r = square(32, 5, 20);
        let edge = control_map(ControlKind::Edge, &r);
        for y in 0..32 {
            for x in 0..32 {
                let inside = (5..20).contains(&x) && (5..20).contains(&y);
                let on_ring = inside && (x == 5 || x == 19 || y == 5 || y == 19);
                assert_eq!(edge[y * 32 + x] == 255, on_ring, "({x},{y})");
            }
        }
    }

    #[test]
    fn depth_peaks_in_the_middle() {
        let r = square(32, 4, 13);
        let d = distance_transform(&r);
        assert_eq!(d[4 * 32 + 4], 1);
        assert_eq!(d[8 * 32 + 8], 5);
        assert_eq!(d[0], 0);
        assert_eq!(control_map(ControlKind::Depth, &r)[8 * 32 + 8], 255);
    }

    #[test]
    fn needs_a_control_condition() {
        let mut p = HyperParams::default();
        p.texture.control_weights.clear();
        assert!(matches!(
            build_render_request(&square(32, 8, 24), "x", &spec(), &p),
            Err(TextureError::InvalidRequest(_))
        ));
    }

    #[test]
    fn tampered_request_fails_validation() {
        let mut r = build_render_request(&square(32, 8, 24), "x", &spec(), &HyperParams::default()).unwrap();
        r.prompt.push('!');
        assert!(r.validate().is_err());
    }
}
