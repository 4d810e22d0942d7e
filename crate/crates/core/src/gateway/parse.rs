//! Response parsers for the template outputs.

use super::GatewayError;
use crate::domain::normalize_judge_score;

fn find_marker(text: &str, marker: &str) -> Option<usize> {
    text.to_ascii_lowercase().find(&marker.to_ascii_lowercase()).map(|i| i + marker.len())
}

fn strip_brackets(s: &str) -> &str {
    let s = s.trim();
    match s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(inner) => inner.trim(),
        None => s,
    }
}

/// Text after the first case-insensitive `Selected:` marker. When the marker
/// ends its line, the next non-empty line is taken.
pub fn parse_selected(response: &str) -> Result<String, GatewayError> {
    let start = find_marker(response, "selected:").ok_or(GatewayError::MarkerNotFound)?;
    let rest = &response[start..];
    let mut lines = rest.lines();
    let first = lines.next().unwrap_or("").trim();
    let value = if first.is_empty() {
        lines.map(str::trim).find(|l| !l.is_empty()).unwrap_or("")
    } else {
        first
    };
    let value = strip_brackets(value);
    if value.is_empty() {
        return Err(GatewayError::MarkerNotFound);
    }
    Ok(value.to_string())
}

fn numbers(text: &str) -> Vec<f64> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let neg = bytes[i] == b'-'
            && i + 1 < bytes.len()
            && bytes[i + 1].is_ascii_digit()
            && (i == 0 || !bytes[i - 1].is_ascii_alphanumeric());
        if bytes[i].is_ascii_digit() || neg {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // "(1)" style enumerators are labels, not scores.
            let enumerator = start > 0 && bytes[start - 1] == b'(' && i < bytes.len() && bytes[i] == b')';
            if !enumerator {
                if let Ok(v) = text[start..i].parse() {
                    out.push(v);
                }
            }
        } else {
            i += 1;
        }
    }
    out
}

/// First three numbers of a judge response, each normalized from 1..10.
pub fn parse_judge_triplet(response: &str) -> Result<(f64, f64, f64), GatewayError> {
    let nums = numbers(response);
    if nums.len() < 3 {
        return Err(GatewayError::MalformedScores(format!("found {} numbers", nums.len())));
    }
    let norm = |v: f64| normalize_judge_score(v).map_err(|_| GatewayError::MalformedScores(format!("{v} outside 1-10")));
    Ok((norm(nums[0])?, norm(nums[1])?, norm(nums[2])?))
}

/// Items of the first `Targets:` line, braces stripped. `None` without a marker.
pub fn parse_targets(response: &str) -> Option<Vec<String>> {
    let start = find_marker(response, "targets:")?;
    let line = response[start..].lines().next().unwrap_or("");
    let line = line.trim().trim_start_matches('{').trim_end_matches('}');
    Some(line.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
}

/// First standalone yes/no word, case-insensitive.
pub fn parse_verdict(response: &str) -> Option<bool> {
    response
        .split(|c: char| !c.is_alphanumeric())
        .find_map(|w| match w.to_ascii_lowercase().as_str() {
            "yes" => Some(true),
            "no" => Some(false),
            _ => None,
        })
}

/// `Glyph:` / `Texture:` / `Semantic:` lines of a prompt-extension answer.
pub fn parse_extension(response: &str) -> Option<(String, String, Option<String>)> {
    let field = |name: &str| -> Option<String> {
        response.lines().find_map(|l| {
            let l = l.trim();
            let head = l.get(..name.len())?;
            if head.eq_ignore_ascii_case(name) {
                Some(strip_brackets(&l[name.len()..]).to_string())
            } else {
                None
            }
        })
    };
    let glyph = field("glyph:").filter(|s| !s.is_empty())?;
    let texture = field("texture:").filter(|s| !s.is_empty())?;
    let semantic = field("semantic:").filter(|s| !s.is_empty() && !s.eq_ignore_ascii_case("none"));
    Some((glyph, texture, semantic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn selected_examples() {
        assert_eq!(parse_selected("Selected: Oil Painting").unwrap(), "Oil Painting");
        assert_eq!(parse_selected("selected: [cyber]").unwrap(), "cyber");
        assert_eq!(parse_selected("no marker here"), Err(GatewayError::MarkerNotFound));
    }

    #[test]
    fn selected_takes_first_marker_and_next_line() {
        let r = "Summary: fits.\nSelected:\n  Traditional Art\nSelected: General";
        assert_eq!(parse_selected(r).unwrap(), "Traditional Art");
    }

    #[test]
    fn judge_examples() {
        let (a, b, c) = parse_judge_triplet("8 7 9").unwrap();
        assert_eq!((a, b, c), (7.0 / 9.0, 6.0 / 9.0, 8.0 / 9.0));
        assert_eq!(parse_judge_triplet("10 10 10").unwrap(), (1.0, 1.0, 1.0));
        assert!(matches!(parse_judge_triplet("great image!"), Err(GatewayError::MalformedScores(_))));
        assert!(matches!(parse_judge_triplet("8 11 9"), Err(GatewayError::MalformedScores(_))));
        assert!(matches!(parse_judge_triplet("8 -2 9"), Err(GatewayError::MalformedScores(_))));
    }

    #[test]
    fn judge_skips_enumerators() {
        let r = "(1) Prompt Relevance: 8\n(2) Image Quality: 7.5\n(3) Style-Prompt Match: 9";
        let (a, b, c) = parse_judge_triplet(r).unwrap();
        assert_eq!(a, 7.0 / 9.0);
        assert_eq!(b, 6.5 / 9.0);
        assert_eq!(c, 8.0 / 9.0);
    }

    #[test]
    fn targets_and_verdicts() {
        assert_eq!(
            parse_targets("Targets:{old man, cake, candles, little girl}").unwrap(),
            vec!["old man", "cake", "candles", "little girl"]
        );
        assert_eq!(parse_targets("Targets: {}").unwrap(), Vec::<String>::new());
        assert!(parse_targets("nothing").is_none());
        assert_eq!(parse_verdict("Yes."), Some(true));
        assert_eq!(parse_verdict("NO, it is not"), Some(false));
        assert_eq!(parse_verdict("Nobody knows"), None);
    }

    #[test]
    fn extension_lines() {
        let r = "Thinking...\nGlyph: World Peace\nTexture: Sun, Peace Dove, leaves, cloud\nSemantic: none\n";
        let (g, t, s) = parse_extension(r).unwrap();
        assert_eq!(g, "World Peace");
        assert_eq!(t, "Sun, Peace Dove, leaves, cloud");
        assert_eq!(s, None);
        assert!(parse_extension("Glyph: x").is_none());
    }

    proptest! {
        #[test]
        fn selected_round_trip(x in "[^\\s\\[\\]\\r\\n\u{85}\u{2028}\u{2029}]([^\\r\\n\u{85}\u{2028}\u{2029}]{0,30}[^\\s\\[\\]])?") {
            prop_assume!(x.trim() == x);
            prop_assert_eq!(parse_selected(&format!("Selected: {x}")).unwrap(), x);
        }
    }
}
