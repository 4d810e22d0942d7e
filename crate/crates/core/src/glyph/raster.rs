//! Scanline rasterizer for glyph documents.

use serde::{Deserialize, Serialize};

use super::GlyphDocument;

/// Square binary occupancy grid, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Raster {
    pub size: usize,
    pub cells: Vec<bool>,
}

impl Raster {
    pub fn empty(size: usize) -> Self {
        Raster { size, cells: vec![false; size * size] }
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut r = Raster::empty(size);
        for y in 0..size {
            for x in 0..size {
                r.cells[y * size + x] = f(x, y);
            }
        }
        r
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.size + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.cells[y * self.size + x] = v;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn complement(&self) -> Raster {
        Raster { size: self.size, cells: self.cells.iter().map(|c| !c).collect() }
    }

    pub fn mismatch(&self, other: &Raster) -> usize {
        self.cells.iter().zip(&other.cells).filter(|(a, b)| a != b).count()
    }
}

/// Maps font units to pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub scale: f64,
    pub ox: f64,
    pub oy: f64,
    pub ascender: f64,
}

impl Frame {
    /// The layout box `[0, total advance] x [descender, ascender]` scaled
    /// uniformly to span 90% of the larger raster dimension, centered.
    pub fn for_doc(doc: &GlyphDocument, res: usize) -> Frame {
        let w = doc.total_advance().max(1e-9);
        let h = (doc.ascender - doc.descender).max(1e-9);
        let scale = 0.9 * res as f64 / w.max(h);
        Frame {
            scale,
            ox: (res as f64 - scale * w) / 2.0,
            oy: (res as f64 - scale * h) / 2.0,
            ascender: doc.ascender,
        }
    }

    pub fn to_px(&self, p: [f64; 2], pen_x: f64) -> [f64; 2] {
        [self.ox + self.scale * (p[0] + pen_x), self.oy + self.scale * (self.ascender - p[1])]
    }

    /// Raster cell width in font units.
    pub fn cell(&self) -> f64 {
        1.0 / self.scale
    }
}

const FLATTEN_STEPS: usize = 16;

fn cubic(p: &[[f64; 2]; 4], t: f64) -> [f64; 2] {
    let u = 1.0 - t;
    let (a, b, c, d) = (u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t);
    [
        a * p[0][0] + b * p[1][0] + c * p[2][0] + d * p[3][0],
        a * p[0][1] + b * p[1][1] + c * p[2][1] + d * p[3][1],
    ]
}

/// Line segments in pixel space approximating every path of `doc`.
pub fn edges(doc: &GlyphDocument, frame: &Frame) -> Vec<([f64; 2], [f64; 2])> {
    let mut out = Vec::new();
    let mut pen = 0.0;
    for ch in &doc.characters {
        for path in &ch.outline {
            for i in 0..path.segments() {
                let seg = path.segment(i).map(|p| frame.to_px(p, pen));
                let mut prev = seg[0];
                for k in 1..=FLATTEN_STEPS {
                    let next = if k == FLATTEN_STEPS { seg[3] } else { cubic(&seg, k as f64 / FLATTEN_STEPS as f64) };
                    out.push((prev, next));
                    prev = next;
                }
            }
        }
        pen += ch.advance;
    }
    out
}

/// Non-zero winding fill sampled at pixel centers.
pub fn fill_edges(edges: &[([f64; 2], [f64; 2])], res: usize) -> Raster {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); res];
    for (i, (a, b)) in edges.iter().enumerate() {
        if a[1] == b[1] {
            continue;
        }
        let (lo, hi) = if a[1] < b[1] { (a[1], b[1]) } else { (b[1], a[1]) };
        // rows whose center c satisfies lo <= c < hi
        let first = (lo - 0.5).ceil().max(0.0);
        let last = (hi - 0.5).ceil() - 1.0;
        if last < 0.0 || first >= res as f64 {
            continue;
        }
        for bucket in &mut rows[first as usize..=(last.min(res as f64 - 1.0)) as usize] {
            bucket.push(i);
        }
    }
    let mut raster = Raster::empty(res);
    let mut crossings: Vec<(f64, i32)> = Vec::new();
    for (row, bucket) in rows.iter().enumerate() {
        if bucket.is_empty() {
            continue;
        }
        let yc = row as f64 + 0.5;
        crossings.clear();
        for &i in bucket {
            let (a, b) = edges[i];
            let t = (yc - a[1]) / (b[1] - a[1]);
            let x = a[0] + t * (b[0] - a[0]);
            crossings.push((x, if b[1] > a[1] { 1 } else { -1 }));
        }
        crossings.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
        let mut winding = 0;
        let mut span_start = 0.0;
        for &(x, dir) in &crossings {
            let was = winding;
            winding += dir;
            if was == 0 && winding != 0 {
                span_start = x;
            } else if was != 0 && winding == 0 {
                let from = (span_start - 0.5).ceil().max(0.0);
                let to = ((x - 0.5).ceil() - 1.0).min(res as f64 - 1.0);
                if to >= from {
                    for col in from as usize..=to as usize {
                        raster.set(col, row, true);
                    }
                }
            }
        }
    }
    raster
}

/// Occupancy raster of `doc` at `res x res`.
pub fn rasterize(doc: &GlyphDocument, res: usize) -> Raster {
    let frame = Frame::for_doc(doc, res);
    fill_edges(&edges(doc, &frame), res)
}
