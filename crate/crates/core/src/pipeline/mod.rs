//! Pipeline agent: prompt extension, the visual-program DSL and
//! pipeline-scoped feedback integration.
//!
//! A visual program is a straight-line list of blocks:
//!
//! ```text
//! ext = ExtendPrompt(glyph="World Peace", texture="Sun, Peace Dove")
//! gly = GlyphGen(text=$ext, font="dejavu-sans", style="Normal")
//! ```
//!
//! [`parse_program`] and [`print_program`] are exact inverses on valid
//! programs. String literals cannot span lines.

pub mod extend;
pub mod feedback;
pub mod plan;
pub mod program;
pub mod validate;

mod parser;

use thiserror::Error;

use crate::domain::DomainError;

pub use extend::{extend_prompt, extend_request, fallback_split};
pub use feedback::{integrate_feedback, Directive};
pub use parser::parse_program;
pub use plan::plan;
pub use program::{print_program, ArgValue, Block, VisualProgram};
pub use validate::{validate_program, Violation, MODULES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("syntax error at {line}:{column} near `{token}`: {message}")]
    SyntaxError { line: usize, column: usize, token: String, message: String },
    #[error("chat backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("feedback bundle must be merged before integration")]
    NotMerged,
    #[error(transparent)]
    Domain(#[from] DomainError),
}
