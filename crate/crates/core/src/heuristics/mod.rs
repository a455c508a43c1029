//! Heuristic interface and the name registry used by the CLI and harness.

pub mod baseline;
pub mod domain;
pub mod relaxed;

use std::time::Instant;

use thiserror::Error;

use crate::external::{ExternalError, ExternalHeuristic, ProcessLimits};
use crate::grounding::{GroundTask, State};

pub use domain::BindingError;

/// Heuristic value for unreachable goals.
pub const INFINITY: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeuristicError {
    #[error("heuristic timed out")]
    Timeout,
    #[error("heuristic failed: {0}")]
    Failed(String),
}

/// Maps states to non-negative values or infinity.
///
/// Implementations must be a pure function of `(task, state)`; `&mut self`
/// only grants access to scratch buffers or a subprocess channel.
pub trait Heuristic {
    fn name(&self) -> &str;

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError>;

    /// Wall-clock deadline of the enclosing search.
    fn set_deadline(&mut self, _deadline: Instant) {}
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("unknown heuristic {0}")]
    Unknown(String),
    #[error(transparent)]
    Binding(#[from] BindingError),
    #[error(transparent)]
    External(#[from] ExternalError),
}

/// Names accepted by [`by_name`] besides `ext:CMD`.
pub const BUILTIN_NAMES: &[&str] = &[
    "blind",
    "goal-count",
    "add",
    "ff",
    "bw-r1",
    "spanner-r1",
    "miconic-r1",
    "sokoban-r1",
    "transport-r1",
    "childsnack-r1",
    "floortile-r1",
    "rovers-r1",
];

/// Builds a heuristic from its CLI name. `ext:CMD` spawns an external
/// heuristic process; `limits` applies to that process only.
pub fn by_name<'t>(
    name: &str,
    task: &'t GroundTask,
    limits: &ProcessLimits,
) -> Result<Box<dyn Heuristic + 't>, BuildError> {
    if let Some(cmd) = name.strip_prefix("ext:") {
        let argv = shlex::split(cmd)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| BuildError::Unknown(name.to_string()))?;
        return Ok(Box::new(ExternalHeuristic::spawn(&argv, task, limits)?));
    }
    Ok(match name {
        "blind" => Box::new(baseline::Blind::new(task)),
        "goal-count" => Box::new(baseline::GoalCount::new(task)),
        "add" => Box::new(relaxed::HAdd::new(task)),
        "ff" => Box::new(relaxed::HFf::new(task)),
        _ => domain::by_name(name, task)?.ok_or_else(|| BuildError::Unknown(name.to_string()))?,
    })
}
