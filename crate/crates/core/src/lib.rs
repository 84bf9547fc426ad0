//! Cloze question generation from articles.

pub mod backends;
pub mod distractor;
pub mod error;
pub mod evaluation;
pub mod idc;
pub mod pipeline;
pub mod stem;
pub mod text;
pub mod wordnet;
