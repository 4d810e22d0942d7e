//! Executes validated visual programs block by block.

use std::collections::BTreeMap;

use serde::Serialize;

use forge_core::domain::{ArtifactRef, ExtendedPrompt, FeedbackBundle, HyperParams, StyleKind, UserPrompt};
use forge_core::glyph::{
    deform, legibility_score, rasterize, render_glyphs, silhouette_for, DeformConfig, GlyphDocument, Raster,
};
use forge_core::pipeline::{extend_prompt, ArgValue, Block, VisualProgram};
use forge_core::qa::{assess_consistency, assess_quality, extract_targets, merge, update_params_with};
use forge_core::texture::{
    build_render_request, decompose_forced, fuse_weights, render, select_model, PathwayTrace, Selection,
};

use crate::runtime::Runtime;

#[derive(Debug, Clone)]
pub enum Value {
    Ext { ext: ExtendedPrompt, source: String },
    Glyph { document: GlyphDocument, raster: Raster, legibility: f64 },
    Model { trace: PathwayTrace, selection: Selection },
    Image { artifact_ref: ArtifactRef, legibility: f64 },
    Eval { feedback: FeedbackBundle },
    Params { params: HyperParams },
}

impl Value {
    fn summary(&self) -> String {
        match self {
            Value::Ext { ext, .. } => format!("glyph={:?} texture={:?}", ext.glyph_prompt, ext.texture_prompt),
            Value::Glyph { document, legibility, .. } => {
                format!("{} chars, legibility {legibility:.3}", document.characters.len())
            }
            Value::Model { selection, .. } => format!("{} ({:.3})", selection.model.id, selection.score),
            Value::Image { artifact_ref, .. } => artifact_ref.0.clone(),
            Value::Eval { feedback } => format!("cos {:.3} qua {:.3}", feedback.g_cos, feedback.g_qua),
            Value::Params { params } => format!("guidance {:.3}", params.texture.guidance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub output: String,
    pub module: String,
    pub summary: String,
}

#[derive(Debug, Default)]
pub struct Execution {
    pub env: BTreeMap<String, Value>,
    pub trace: Vec<TraceStep>,
}

impl Execution {
    pub fn artifact(&self) -> Option<&ArtifactRef> {
        self.env.values().find_map(|v| match v {
            Value::Image { artifact_ref, .. } => Some(artifact_ref),
            _ => None,
        })
    }

    pub fn feedback(&self) -> Option<&FeedbackBundle> {
        self.env.values().find_map(|v| match v {
            Value::Eval { feedback } => Some(feedback),
            _ => None,
        })
    }

    pub fn extended(&self) -> Option<&ExtendedPrompt> {
        self.env.values().find_map(|v| match v {
            Value::Ext { ext, .. } => Some(ext),
            _ => None,
        })
    }
}

pub struct Interpreter<'a> {
    rt: &'a Runtime,
    user: &'a UserPrompt,
    params: &'a mut HyperParams,
}

type R<T> = Result<T, String>;

impl<'a> Interpreter<'a> {
    /// `params` receives the model ranking computed by `ToTSelect`.
    pub fn new(rt: &'a Runtime, user: &'a UserPrompt, params: &'a mut HyperParams) -> Self {
        Interpreter { rt, user, params }
    }

    /// Runs every block in order. The partial execution is returned with
    /// the error so callers can keep what finished.
    pub fn execute(&mut self, program: &VisualProgram) -> Result<Execution, (Execution, String)> {
        let mut ex = Execution::default();
        for block in &program.blocks {
            match self.step(block, &ex.env) {
                Ok(v) => {
                    ex.trace.push(TraceStep {
                        output: block.output.clone(),
                        module: block.module.clone(),
                        summary: v.summary(),
                    });
                    ex.env.insert(block.output.clone(), v);
                }
                Err(e) => return Err((ex, format!("{} ({}): {e}", block.output, block.module))),
            }
        }
        Ok(ex)
    }

    fn step(&mut self, b: &Block, env: &BTreeMap<String, Value>) -> R<Value> {
        match b.module.as_str() {
            "ExtendPrompt" => self.extend(b),
            "GlyphGen" => self.glyph_gen(b, env),
            "SemanticDeform" => self.semantic_deform(b, env),
            "ToTSelect" => self.tot_select(b, env),
            "TexRender" => self.tex_render(b, env),
            "Evaluate" => self.evaluate(b, env),
            "UpdateParams" => self.update(b, env),
            other => Err(format!("unknown module {other}")),
        }
    }

    fn extend(&self, b: &Block) -> R<Value> {
        let source = self.user.text.clone();
        if let (Some(ArgValue::Str(g)), Some(ArgValue::Str(t))) = (b.get("glyph"), b.get("texture")) {
            let sem = match b.get("semantic") {
                Some(ArgValue::Str(s)) => Some(s.clone()),
                _ => None,
            };
            let ext = ExtendedPrompt::new(g.clone(), t.clone(), sem).map_err(|e| e.to_string())?;
            return Ok(Value::Ext { ext, source });
        }
        let user = match b.get("prompt") {
            Some(ArgValue::Str(p)) => UserPrompt::new(p.clone(), self.user.language).map_err(|e| e.to_string())?,
            None => self.user.clone(),
            Some(other) => return Err(format!("prompt must be a string, got {other:?}")),
        };
        let ext = extend_prompt(&user, self.params, &self.rt.gateway).map_err(|e| e.to_string())?;
        Ok(Value::Ext { ext, source: user.text })
    }

    fn ext<'e>(&self, b: &Block, name: &str, env: &'e BTreeMap<String, Value>) -> R<(&'e ExtendedPrompt, &'e str)> {
        match lookup(b, name, env)? {
            Value::Ext { ext, source } => Ok((ext, source)),
            _ => Err(format!("`{name}` must be an extended prompt")),
        }
    }

    fn text(&self, b: &Block, env: &BTreeMap<String, Value>) -> R<String> {
        match b.get("text") {
            Some(ArgValue::Str(s)) => Ok(s.clone()),
            Some(ArgValue::Ref(_)) => Ok(self.ext(b, "text", env)?.0.glyph_prompt.clone()),
            _ => Err("missing `text`".into()),
        }
    }

    fn font(&self, b: &Block) -> String {
        match b.get("font") {
            Some(ArgValue::Str(s)) => s.clone(),
            _ => self.params.glyph.font_id.clone(),
        }
    }

    fn glyph_gen(&self, b: &Block, env: &BTreeMap<String, Value>) -> R<Value> {
        let text = self.text(b, env)?;
        let style = match b.get("style") {
            Some(ArgValue::Str(s)) => s.parse::<StyleKind>().map_err(|e| e.to_string())?,
            _ => self.params.glyph.style_kind.unwrap_or(StyleKind::Normal),
        };
        let document = render_glyphs(&self.rt.fonts, &text, &self.font(b), style).map_err(|e| e.to_string())?;
        let raster = rasterize(&document, self.rt.config.raster_resolution);
        Ok(Value::Glyph { document, raster, legibility: 1.0 })
    }

    fn semantic_deform(&self, b: &Block, env: &BTreeMap<String, Value>) -> R<Value> {
        let text = self.text(b, env)?;
        let concept = match b.get("concept") {
            Some(ArgValue::Str(s)) => s.clone(),
            Some(ArgValue::Ref(_)) => {
                let (ext, _) = self.ext(b, "concept", env)?;
                ext.semantic_concept.clone().unwrap_or_else(|| ext.texture_prompt.clone())
            }
            _ => return Err("missing `concept`".into()),
        };
        let res = self.rt.config.raster_resolution;
        let original =
            render_glyphs(&self.rt.fonts, &text, &self.font(b), StyleKind::Semantic).map_err(|e| e.to_string())?;
        let target = silhouette_for(&concept, res).map_err(|e| e.to_string())?;
        let cfg = DeformConfig::from_params(&self.params.glyph, res, self.params.texture.seed);
        let out = deform(&original, &target, &cfg).map_err(|e| e.to_string())?;
        let legibility = legibility_score(&out.document, &original).map_err(|e| e.to_string())?;
        let raster = rasterize(&out.document, res);
        Ok(Value::Glyph { document: out.document, raster, legibility })
    }

    fn tot_select(&mut self, b: &Block, env: &BTreeMap<String, Value>) -> R<Value> {
        let prompt = match b.get("prompt") {
            Some(ArgValue::Str(s)) => s.clone(),
            _ => self.ext(b, "prompt", env)?.0.texture_prompt.clone(),
        };
        let rt = self.rt;
        let trace = decompose_forced(&prompt, &rt.tree, &rt.gateway, self.params.texture.forced_path.as_deref())
            .map_err(|e| e.to_string())?;
        let selection = select_model(&trace, &rt.tree, &rt.gateway, rt.config.search_mode, &self.params.qa.metric_weights)
            .map_err(|e| e.to_string())?;
        self.params.texture.ranking = selection.ranking.iter().map(|(id, _)| id.clone()).collect();
        Ok(Value::Model { trace, selection })
    }

    fn tex_render(&self, b: &Block, env: &BTreeMap<String, Value>) -> R<Value> {
        let (raster, legibility) = match lookup(b, "glyph", env)? {
            Value::Glyph { raster, legibility, .. } => (raster, *legibility),
            _ => return Err("`glyph` must be a glyph".into()),
        };
        let prompt = match b.get("prompt") {
            Some(ArgValue::Str(s)) => s.clone(),
            _ => self.ext(b, "prompt", env)?.0.texture_prompt.clone(),
        };
        let selection = match lookup(b, "model", env)? {
            Value::Model { selection, .. } => selection,
            _ => return Err("`model` must be a model selection".into()),
        };
        let t = &self.params.texture;
        let ranking: Vec<&str> = if t.ranking.is_empty() {
            selection.ranking.iter().map(|(id, _)| id.as_str()).collect()
        } else {
            t.ranking.iter().map(String::as_str).collect()
        };
        let k = t.fusion_alphas.len().max(1);
        let start = t.rank_offset.min(ranking.len().saturating_sub(1));
        let mut models = Vec::new();
        for id in ranking.iter().skip(start).take(k) {
            models.push(self.rt.tree.find(id).cloned().ok_or_else(|| format!("unknown model {id}"))?);
        }
        if models.is_empty() {
            models.push(selection.model.clone());
        }
        let alphas: Vec<f64> = if t.fusion_alphas.len() == models.len() {
            t.fusion_alphas.clone()
        } else {
            models.iter().map(|m| m.default_alpha).collect()
        };
        let fusion = fuse_weights(&models, &alphas).map_err(|e| e.to_string())?;
        let req = build_render_request(raster, &prompt, &fusion, self.params).map_err(|e| e.to_string())?;
        let artifact_ref = render(&req, &self.rt.config.render, &self.rt.artifacts).map_err(|e| e.to_string())?;
        Ok(Value::Image { artifact_ref, legibility })
    }

    fn evaluate(&self, b: &Block, env: &BTreeMap<String, Value>) -> R<Value> {
        let (artifact_ref, legibility) = match lookup(b, "image", env)? {
            Value::Image { artifact_ref, legibility } => (artifact_ref, *legibility),
            _ => return Err("`image` must be a rendered image".into()),
        };
        let source = match b.get("prompt") {
            Some(ArgValue::Str(s)) => s.clone(),
            _ => self.ext(b, "prompt", env)?.1.to_string(),
        };
        let gw = &self.rt.gateway;
        let targets =
            extract_targets(&source, gw, self.params.pipeline.fallback_enabled).map_err(|e| e.to_string())?;
        let (g_cos, missing) = assess_consistency(artifact_ref, &targets, gw).map_err(|e| e.to_string())?;
        let g_qua = assess_quality(artifact_ref, &source, gw).map_err(|e| e.to_string())?;
        let feedback = FeedbackBundle::model(g_cos, g_qua, Some(legibility), missing).map_err(|e| e.to_string())?;
        Ok(Value::Eval { feedback })
    }
}

impl Interpreter<'_> {
    /// Proposed parameters for the next pass; the running pass is unchanged.
    fn update(&self, b: &Block, env: &BTreeMap<String, Value>) -> R<Value> {
        let feedback = match lookup(b, "feedback", env)? {
            Value::Eval { feedback } => feedback,
            _ => return Err("`feedback` must be an evaluation".into()),
        };
        let directive = match b.get("directive") {
            Some(ArgValue::Str(d)) => d.clone(),
            _ => self.rt.config.directive.clone(),
        };
        let params =
            update_params_with(&merge(feedback, None), self.params, &directive, &self.rt.config.rules, &self.rt.categories())
                .map_err(|e| e.to_string())?;
        Ok(Value::Params { params })
    }
}

fn lookup<'e>(b: &Block, name: &str, env: &'e BTreeMap<String, Value>) -> R<&'e Value> {
    match b.get(name) {
        Some(ArgValue::Ref(v)) => env.get(v).ok_or_else(|| format!("`{v}` is undefined")),
        Some(_) => Err(format!("`{name}` must be a variable")),
        None => Err(format!("missing `{name}`")),
    }
}
