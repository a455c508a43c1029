use super::{Heuristic, HeuristicError};
use crate::grounding::{GroundTask, State};

/// 0 on goal states, 1 elsewhere.
pub struct Blind<'t> {
    task: &'t GroundTask,
}

impl<'t> Blind<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        Self { task }
    }
}

impl Heuristic for Blind<'_> {
    fn name(&self) -> &str {
        "blind"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        Ok(if self.task.is_goal(state) { 0.0 } else { 1.0 })
    }
}

/// Number of goal atoms not yet true.
pub struct GoalCount<'t> {
    task: &'t GroundTask,
}

impl<'t> GoalCount<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        Self { task }
    }
}

pub fn goal_count(task: &GroundTask, state: &State) -> usize {
    task.goal.iter().filter(|&&g| !state.contains(g)).count()
}

impl Heuristic for GoalCount<'_> {
    fn name(&self) -> &str {
        "goal-count"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        Ok(goal_count(self.task, state) as f64)
    }
}
