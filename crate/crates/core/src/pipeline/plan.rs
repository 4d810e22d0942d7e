//! Canonical five-block plan.

use crate::domain::{ExtendedPrompt, HyperParams, StyleKind};

use super::program::{ArgValue, Block, VisualProgram};

/// `ExtendPrompt -> GlyphGen|SemanticDeform -> ToTSelect -> TexRender -> Evaluate`.
///
/// The glyph block is `SemanticDeform` iff the style in `params` is
/// `Semantic`; an unset style plans as `Normal`.
pub fn plan(ext: &ExtendedPrompt, params: &HyperParams) -> VisualProgram {
    let mut extend = Block::new("ext", "ExtendPrompt")
        .arg("glyph", ArgValue::str(&ext.glyph_prompt))
        .arg("texture", ArgValue::str(&ext.texture_prompt));
    if let Some(sem) = &ext.semantic_concept {
        extend = extend.arg("semantic", ArgValue::str(sem));
    }
    let style = params.glyph.style_kind.unwrap_or(StyleKind::Normal);
    let glyph = match style {
        StyleKind::Semantic => Block::new("gly", "SemanticDeform")
            .arg("text", ArgValue::var("ext"))
            .arg("concept", ArgValue::str(ext.semantic_concept.as_deref().unwrap_or(&ext.texture_prompt)))
            .arg("font", ArgValue::str(&params.glyph.font_id)),
        _ => Block::new("gly", "GlyphGen")
            .arg("text", ArgValue::var("ext"))
            .arg("font", ArgValue::str(&params.glyph.font_id))
            .arg("style", ArgValue::str(style.to_string())),
    };
    VisualProgram::new(vec![
        extend,
        glyph,
        Block::new("model", "ToTSelect").arg("prompt", ArgValue::var("ext")),
        Block::new("img", "TexRender")
            .arg("glyph", ArgValue::var("gly"))
            .arg("prompt", ArgValue::var("ext"))
            .arg("model", ArgValue::var("model")),
        Block::new("eval", "Evaluate").arg("image", ArgValue::var("img")).arg("prompt", ArgValue::var("ext")),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{parse_program, print_program, validate_program};
    use proptest::prelude::*;

    fn ext(sem: Option<&str>) -> ExtendedPrompt {
        ExtendedPrompt::new("World Peace", "Sun, Peace Dove, leaves, cloud", sem.map(str::to_string)).unwrap()
    }

    #[test]
    fn style_selects_glyph_block() {
        let mut params = HyperParams::default();
        params.glyph.style_kind = Some(StyleKind::Normal);
        assert_eq!(plan(&ext(None), &params).blocks[1].module, "GlyphGen");
        params.glyph.style_kind = Some(StyleKind::Semantic);
        let p = plan(&ext(Some("dove")), &params);
        assert_eq!(p.blocks[1].module, "SemanticDeform");
        assert_eq!(p.blocks[1].get("concept"), Some(&ArgValue::str("dove")));
    }

    #[test]
    fn straight_line_dataflow() {
        let p = plan(&ext(None), &HyperParams::default());
        for (i, b) in p.blocks.iter().enumerate() {
            for r in b.refs() {
                assert!(p.blocks[..i].iter().any(|e| e.output == r));
            }
        }
    }

    proptest! {
        #[test]
        fn plans_always_validate(
            style in prop::option::of(prop_oneof![Just(StyleKind::Normal), Just(StyleKind::Traditional), Just(StyleKind::Semantic)]),
            glyph in "[^\\n\\r]{0,10}[a-z]",
            texture in "[a-z][^\\n\\r]{0,20}",
            sem in prop::option::of("[a-z]{1,8}"),
            font in "[a-z-]{1,10}",
        ) {
            let mut params = HyperParams::default();
            params.glyph.style_kind = style;
            params.glyph.font_id = font;
            let e = ExtendedPrompt::new(glyph, texture, sem).unwrap();
            let p = plan(&e, &params);
            prop_assert!(validate_program(&p).is_empty());
            prop_assert_eq!(p.blocks.len(), 5);
            prop_assert_eq!(parse_program(&print_program(&p)).unwrap(), p);
        }
    }
}
