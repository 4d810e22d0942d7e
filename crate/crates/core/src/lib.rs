//! Core agents for feedback-driven WordArt design.
//!
//! The crate is split along the agent boundaries of the design loop:
//!
//! - [`domain`]: value types shared by every agent (prompts, hyperparameters,
//!   feedback bundles, iteration records).
//! - [`gateway`]: chat-completion access with prompt templates, a live
//!   OpenAI-compatible client, a replay backend and a rule-based mock.
//! - [`pipeline`]: prompt extension, the visual-program DSL, planning and
//!   pipeline-scoped feedback integration.
//! - [`glyph`]: font outline extraction, rasterization, silhouette loss and
//!   the control-point optimizer used for semantic deformation.
//! - [`texture`]: the model tree, tree-of-thought selection, LoRA fusion
//!   specs and render requests.
//! - [`qa`]: consistency/quality assessment, feedback merge, loss, the
//!   hyperparameter update rules and the iterative tuning loop.

pub mod artifact;
pub mod domain;
pub mod gateway;
pub mod glyph;
pub mod hash;
pub mod pipeline;
pub mod qa;
pub mod texture;

pub use domain::{
    ExtendedPrompt, FeedbackBundle, HyperParams, IterationRecord, Language, UserPrompt,
};

/// Directory holding the bundled fonts, model tree and replay fixtures.
pub fn bundled_dir() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}
