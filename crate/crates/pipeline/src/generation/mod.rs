//! Prompt assembly, sampling and candidate extraction.

pub mod client;
pub mod extract;
pub mod prompt;

pub use client::{request_candidates, GenerationConfig, GenerationError, HttpClient, LlmClient, MockClient, RawResponse};
pub use extract::{extract_pool, Extracted, PoolOutcome, RejectReport};
pub use prompt::{build_endtoend_prompt, build_heuristic_prompt, PromptError, PromptSpec, Toggles};
