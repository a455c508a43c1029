//! Delete-relaxation heuristics: additive (h^add) and FF (h^FF).
//!
//! Both share one Dijkstra-style exploration over atoms. Each atom records
//! its cheapest achiever; among equally cheap achievers the lowest action
//! index is kept, so extracted relaxed plans are deterministic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Heuristic, HeuristicError};
use crate::grounding::{GroundTask, State};

const UNREACHED: u64 = u64::MAX;
const NO_SUPPORTER: u32 = u32::MAX;

/// Per-evaluation scratch space of the relaxed exploration.
#[derive(Debug, Clone, Default)]
pub struct RelaxedScratch {
    pub cost: Vec<u64>,
    pub supporter: Vec<u32>,
    unsatisfied: Vec<u32>,
    pre_sum: Vec<u64>,
    done: Vec<bool>,
    queue: BinaryHeap<Reverse<(u64, u32)>>,
}

pub struct RelaxedExploration<'t> {
    task: &'t GroundTask,
    pre_of: Vec<Vec<u32>>,
    no_pre: Vec<u32>,
    is_goal_atom: Vec<bool>,
    scratch: RelaxedScratch,
}

impl<'t> RelaxedExploration<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        let mut pre_of = vec![Vec::new(); task.num_atoms()];
        let mut no_pre = Vec::new();
        for a in &task.actions {
            if a.pre.is_empty() {
                no_pre.push(a.index as u32);
            }
            for &p in &a.pre {
                pre_of[p].push(a.index as u32);
            }
        }
        let mut is_goal_atom = vec![false; task.num_atoms()];
        for &g in &task.goal {
            is_goal_atom[g] = true;
        }
        Self {
            task,
            pre_of,
            no_pre,
            is_goal_atom,
            scratch: RelaxedScratch::default(),
        }
    }

    pub fn scratch(&self) -> &RelaxedScratch {
        &self.scratch
    }

    /// Runs the exploration from `state`; true iff every goal atom is reachable.
    pub fn explore(&mut self, state: &State) -> bool {
        let task = self.task;
        let n = task.num_atoms();
        let sc = &mut self.scratch;
        sc.cost.clear();
        sc.cost.resize(n, UNREACHED);
        sc.supporter.clear();
        sc.supporter.resize(n, NO_SUPPORTER);
        sc.done.clear();
        sc.done.resize(n, false);
        sc.unsatisfied.clear();
        sc.unsatisfied.extend(task.actions.iter().map(|a| a.pre.len() as u32));
        sc.pre_sum.clear();
        sc.pre_sum.resize(task.actions.len(), 0);
        sc.queue.clear();

        for p in state.atoms() {
            sc.cost[p] = 0;
            sc.queue.push(Reverse((0, p as u32)));
        }
        let mut goals_left = task.goal.len();
        for &a in &self.no_pre {
            fire(task, sc, a as usize, 1);
        }
        while let Some(Reverse((c, p))) = sc.queue.pop() {
            let p = p as usize;
            if sc.done[p] || c > sc.cost[p] {
                continue;
            }
            sc.done[p] = true;
            if self.is_goal_atom[p] {
                goals_left -= 1;
                if goals_left == 0 {
                    break;
                }
            }
            for &a in &self.pre_of[p] {
                let a = a as usize;
                sc.unsatisfied[a] -= 1;
                sc.pre_sum[a] += c;
                if sc.unsatisfied[a] == 0 {
                    let ac = 1 + sc.pre_sum[a];
                    fire(task, sc, a, ac);
                }
            }
        }
        task.goal.iter().all(|&g| sc.cost[g] != UNREACHED)
    }

    /// Sum of goal-atom costs of the last exploration (infinite if unreachable).
    fn additive_value(&self) -> f64 {
        let mut total = 0u64;
        for &g in &self.task.goal {
            let c = self.scratch.cost[g];
            if c == UNREACHED {
                return f64::INFINITY;
            }
            total += c;
        }
        total as f64
    }

    /// Relaxed plan from the best supporters of the last exploration,
    /// each action once, in ascending action index.
    fn extract_plan(&self) -> Vec<usize> {
        let sc = &self.scratch;
        let mut in_plan = vec![false; self.task.actions.len()];
        let mut seen = vec![false; self.task.num_atoms()];
        let mut stack: Vec<usize> = self.task.goal.clone();
        let mut plan = Vec::new();
        while let Some(p) = stack.pop() {
            if seen[p] {
                continue;
            }
            seen[p] = true;
            if sc.cost[p] == 0 {
                continue;
            }
            let a = sc.supporter[p] as usize;
            if !in_plan[a] {
                in_plan[a] = true;
                plan.push(a);
                stack.extend(self.task.actions[a].pre.iter().copied());
            }
        }
        plan.sort_unstable();
        plan
    }

    pub fn h_add(&mut self, state: &State) -> f64 {
        if self.explore(state) {
            self.additive_value()
        } else {
            f64::INFINITY
        }
    }

    /// Relaxed plan for `state`, or `None` if the goal is relaxed-unreachable.
    pub fn relaxed_plan(&mut self, state: &State) -> Option<Vec<usize>> {
        self.explore(state).then(|| self.extract_plan())
    }
}

fn fire(task: &GroundTask, sc: &mut RelaxedScratch, action: usize, cost: u64) {
    for &q in &task.actions[action].add {
        let cur = sc.cost[q];
        if cost < cur {
            sc.cost[q] = cost;
            sc.supporter[q] = action as u32;
            sc.queue.push(Reverse((cost, q as u32)));
        } else if cost == cur && (action as u32) < sc.supporter[q] {
            sc.supporter[q] = action as u32;
        }
    }
}

pub struct HAdd<'t> {
    explorer: RelaxedExploration<'t>,
}

impl<'t> HAdd<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        Self {
            explorer: RelaxedExploration::new(task),
        }
    }
}

impl Heuristic for HAdd<'_> {
    fn name(&self) -> &str {
        "add"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        Ok(self.explorer.h_add(state))
    }
}

pub struct HFf<'t> {
    explorer: RelaxedExploration<'t>,
}

impl<'t> HFf<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        Self {
            explorer: RelaxedExploration::new(task),
        }
    }

    pub fn relaxed_plan(&mut self, state: &State) -> Option<Vec<usize>> {
        self.explorer.relaxed_plan(state)
    }
}

impl Heuristic for HFf<'_> {
    fn name(&self) -> &str {
        "ff"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        Ok(match self.explorer.relaxed_plan(state) {
            Some(plan) => plan.len() as f64,
            None => f64::INFINITY,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::StripsAction;

    fn chain() -> GroundTask {
        // a1: {} -> p, a2: {p} -> q; goal q
        GroundTask::from_strips(
            "chain",
            vec!["(p)".into(), "(q)".into()],
            vec![
                StripsAction::new("(a1)", vec![], vec![0], vec![]),
                StripsAction::new("(a2)", vec![0], vec![1], vec![]),
            ],
            vec![],
            vec![1],
        )
        .unwrap()
    }

    #[test]
    fn chain_values() {
        let t = chain();
        assert_eq!(HAdd::new(&t).evaluate(&t.init).unwrap(), 2.0);
        let mut ff = HFf::new(&t);
        assert_eq!(ff.evaluate(&t.init).unwrap(), 2.0);
        assert_eq!(ff.relaxed_plan(&t.init).unwrap(), vec![0, 1]);
    }

    #[test]
    fn goal_state_is_zero() {
        let t = chain();
        let s = State::from_atoms(2, [1]);
        assert_eq!(HAdd::new(&t).evaluate(&s).unwrap(), 0.0);
        assert_eq!(HFf::new(&t).evaluate(&s).unwrap(), 0.0);
    }

    #[test]
    fn shared_achiever_counted_once() {
        let t = GroundTask::from_strips(
            "share",
            vec!["(p)".into(), "(q)".into()],
            vec![StripsAction::new("(a)", vec![], vec![0, 1], vec![])],
            vec![],
            vec![0, 1],
        )
        .unwrap();
        assert_eq!(HFf::new(&t).evaluate(&t.init).unwrap(), 1.0);
        assert_eq!(HAdd::new(&t).evaluate(&t.init).unwrap(), 2.0);
    }

    #[test]
    fn unreachable_goal_is_infinite() {
        let t = GroundTask::from_strips("u", vec!["(p)".into(), "(q)".into()], vec![], vec![0], vec![1]).unwrap();
        assert!(HAdd::new(&t).evaluate(&t.init).unwrap().is_infinite());
        assert!(HFf::new(&t).evaluate(&t.init).unwrap().is_infinite());
    }

    #[test]
    fn lowest_index_supporter_wins_ties() {
        let t = GroundTask::from_strips(
            "tie",
            vec!["(g)".into()],
            vec![
                StripsAction::new("(x)", vec![], vec![0], vec![]),
                StripsAction::new("(y)", vec![], vec![0], vec![]),
            ],
            vec![],
            vec![0],
        )
        .unwrap();
        let mut ex = RelaxedExploration::new(&t);
        assert_eq!(ex.relaxed_plan(&t.init).unwrap(), vec![0]);
    }
}
