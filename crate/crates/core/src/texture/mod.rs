//! Texture agent: model tree, tree-of-thought model selection, LoRA fusion
//! specs, controllable render requests and render backends.

pub mod fusion;
pub mod render;
pub mod request;
pub mod tot;
pub mod tree;

use thiserror::Error;

use crate::gateway::GatewayError;

pub use fusion::{fuse_weights, FusionEntry, FusionSpec};
pub use render::{render, RenderBackendConfig};
pub use request::{build_render_request, control_map, ControlEntry, RenderRequest};
pub use tot::{
    decompose, decompose_forced, judge_request, score_pathway, select_model, select_model_with, selection_request,
    JudgeScorer, PathwayScorer,
    PathwayStep, PathwayTrace, SearchMode, Selection,
};
pub use tree::{load_tree, parse_tree, CategoryNode, LoraModel, ModelTree, MAX_DEPTH};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextureError {
    #[error("model tree line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("model tree line {line}: duplicate leaf id `{id}`")]
    DuplicateLeafId { line: usize, id: String },
    #[error("model tree has no leaves")]
    EmptyTree,
    #[error("model tree file: {0}")]
    Io(String),
    #[error("selection `{selected}` is not one of [{}]", candidates.join(", "))]
    SelectionNotInCandidates { selected: String, candidates: Vec<String> },
    #[error("no candidate models to choose from")]
    EmptyCandidatePool,
    #[error("{models} models but {alphas} fusion weights")]
    LengthMismatch { models: usize, alphas: usize },
    #[error("fusion weights are all zero")]
    AllZeroAlphas,
    #[error("invalid fusion weight {0}")]
    InvalidAlpha(f64),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid render request: {0}")]
    InvalidRequest(String),
    #[error("render backend unavailable: {0}")]
    RenderBackendUnavailable(String),
    #[error("invalid render response: {0}")]
    InvalidResponse(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}
