//! SVG import and export of glyph documents.
//!
//! One `<g>` per character carries the codepoint and advance; each closed
//! path is written with `M`, `C` and `Z` commands only, in font units.

use std::fmt::Write as _;

use super::{GlyphChar, GlyphDocument, GlyphError, GlyphPath};

const NS: &str = "http://www.w3.org/2000/svg";

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn to_svg(doc: &GlyphDocument) -> String {
    let mut s = String::new();
    let width = doc.total_advance();
    let height = doc.ascender - doc.descender;
    let _ = writeln!(
        s,
        "<svg xmlns=\"{NS}\" viewBox=\"0 {} {} {}\" data-units-per-em=\"{}\" data-ascender=\"{}\" data-descender=\"{}\" data-source-font=\"{}\">",
        num(-doc.ascender),
        num(width),
        num(height),
        doc.units_per_em,
        num(doc.ascender),
        num(doc.descender),
        escape(&doc.source_font)
    );
    let mut pen = 0.0;
    for c in &doc.characters {
        let _ = writeln!(
            s,
            "  <g data-codepoint=\"{}\" data-advance=\"{}\" transform=\"translate({} 0) scale(1 -1)\">",
            c.codepoint,
            num(c.advance),
            num(pen)
        );
        for p in &c.outline {
            let mut d = String::new();
            let start = p.points[0];
            let _ = write!(d, "M {} {}", num(start[0]), num(start[1]));
            for i in 0..p.segments() {
                let [_, h1, h2, end] = p.segment(i);
                let _ = write!(
                    d,
                    " C {} {} {} {} {} {}",
                    num(h1[0]),
                    num(h1[1]),
                    num(h2[0]),
                    num(h2[1]),
                    num(end[0]),
                    num(end[1])
                );
            }
            d.push_str(" Z");
            let _ = writeln!(s, "    <path d=\"{d}\"/>");
        }
        s.push_str("  </g>\n");
        pen += c.advance;
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;")
}

fn err(m: impl Into<String>) -> GlyphError {
    GlyphError::Svg(m.into())
}

fn attr<T: std::str::FromStr>(node: roxmltree::Node, name: &str) -> Result<T, GlyphError> {
    node.attribute(name)
        .ok_or_else(|| err(format!("missing {name}")))?
        .parse()
        .map_err(|_| err(format!("bad {name}")))
}

fn parse_path(d: &str) -> Result<GlyphPath, GlyphError> {
    let mut tokens = d.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).peekable();
    let nums = |n: usize, tokens: &mut std::iter::Peekable<_>| -> Result<Vec<f64>, GlyphError> {
        (0..n)
            .map(|_| {
                let t: Option<&str> = tokens.next();
                t.and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| err("expected number"))
            })
            .collect()
    };
    if tokens.next() != Some("M") {
        return Err(err("path must start with M"));
    }
    let m = nums(2, &mut tokens)?;
    let start = [m[0], m[1]];
    let mut points = vec![start];
    let mut closed = false;
    while let Some(cmd) = tokens.next() {
        match cmd {
            "C" => {
                let v = nums(6, &mut tokens)?;
                points.push([v[0], v[1]]);
                points.push([v[2], v[3]]);
                points.push([v[4], v[5]]);
            }
            "Z" | "z" => {
                closed = true;
                break;
            }
            other => return Err(err(format!("unsupported command {other}"))),
        }
    }
    if !closed || tokens.next().is_some() {
        return Err(err("path must end with a single Z"));
    }
    if points.len() < 4 || points.last() != Some(&start) {
        return Err(err("path does not return to its start point"));
    }
    points.pop();
    Ok(GlyphPath { points })
}

pub fn from_svg(text: &str) -> Result<GlyphDocument, GlyphError> {
    let xml = roxmltree::Document::parse(text).map_err(|e| err(e.to_string()))?;
    let root = xml.root_element();
    if root.tag_name().name() != "svg" {
        return Err(err("root element is not <svg>"));
    }
    let mut characters = Vec::new();
    for g in root.children().filter(|n| n.has_tag_name("g")) {
        let mut outline = Vec::new();
        for p in g.children().filter(|n| n.has_tag_name("path")) {
            outline.push(parse_path(p.attribute("d").ok_or_else(|| err("path without d"))?)?);
        }
        characters.push(GlyphChar { codepoint: attr(g, "data-codepoint")?, outline, advance: attr(g, "data-advance")? });
    }
    let doc = GlyphDocument {
        characters,
        units_per_em: attr(root, "data-units-per-em")?,
        ascender: attr(root, "data-ascender")?,
        descender: attr(root, "data-descender")?,
        source_font: root.attribute("data-source-font").unwrap_or("").to_string(),
    };
    doc.validate()?;
    Ok(doc)
}
