//! Plan validation by simulation from the initial state.

use serde::Serialize;
use thiserror::Error;

use crate::grounding::GroundTask;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    /// The step names no action of the grounded task. Actions pruned by
    /// reachability analysis are never applicable, so this also covers
    /// well-formed names of unreachable actions.
    #[error("step {step}: unknown action {action}")]
    UnknownAction { step: usize, action: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Failure {
    MissingPrecondition { step: usize, action: String, atom: String },
    UnmetGoal { atoms: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub length: usize,
    pub failure: Option<Failure>,
}

/// Canonical form of one plan step: lowercase, single spaces, optional
/// surrounding parentheses restored.
pub fn normalize_step(step: &str) -> String {
    let inner = step.trim();
    let inner = inner
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(inner);
    let words: Vec<String> = inner.split_whitespace().map(str::to_lowercase).collect();
    format!("({})", words.join(" "))
}

/// Plan steps from text. Blank lines and `;` comment lines are skipped.
pub fn parse_plan(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split(';').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(normalize_step)
        .collect()
}

/// Replays `plan` (canonical or loosely formatted step names) on `task`.
pub fn validate_plan<S: AsRef<str>>(task: &GroundTask, plan: &[S]) -> Result<ValidationReport, ValidationError> {
    let mut state = task.init.clone();
    for (step, raw) in plan.iter().enumerate() {
        let name = normalize_step(raw.as_ref());
        let action = task.action_by_name(&name).ok_or(ValidationError::UnknownAction {
            step,
            action: name.clone(),
        })?;
        match action.apply(&state, task) {
            Ok(next) => state = next,
            Err(e) => {
                return Ok(ValidationReport {
                    valid: false,
                    length: plan.len(),
                    failure: Some(Failure::MissingPrecondition {
                        step,
                        action: name,
                        atom: e.missing,
                    }),
                })
            }
        }
    }
    let unmet: Vec<String> = task
        .goal
        .iter()
        .filter(|&&g| !state.contains(g))
        .map(|&g| task.atoms[g].text.clone())
        .collect();
    Ok(ValidationReport {
        valid: unmet.is_empty(),
        length: plan.len(),
        failure: (!unmet.is_empty()).then_some(Failure::UnmetGoal { atoms: unmet }),
    })
}
