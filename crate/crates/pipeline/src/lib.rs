//! Generate, evaluate and select heuristics for a planning domain.

pub mod generation;
pub mod harness;
