//! Classical planning engine: PDDL parsing, grounding, greedy best-first
//! search, built-in and external heuristics, and plan validation.

pub mod external;
pub mod grounding;
pub mod heuristics;
pub mod pddl;
pub mod search;
pub mod validator;

pub use grounding::{ground, GroundTask, State};
pub use heuristics::Heuristic;
