//! Pure greedy best-first search and a breadth-first oracle.
//!
//! Both searches detect duplicates at generation time, test for the goal
//! when a state is removed from the open list, and count an expansion for
//! every non-goal state whose successors are generated.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::time::{Duration, Instant};

use indexmap::IndexSet;
use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// Expansions between two clock reads.
pub const DEADLINE_CHECK_INTERVAL: u64 = 1000;

/// Rough per-node bookkeeping cost on top of the state bits.
const NODE_OVERHEAD_BYTES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SearchStatus {
    Solved,
    Unsolvable,
    TimeLimit,
    MemoryLimit,
    /// The heuristic itself failed (crashed, returned garbage).
    HeuristicFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub plan: Vec<String>,
    pub expansions: u64,
    pub evaluations: u64,
    /// Search wall-clock seconds, excluding heuristic construction.
    pub wall_time: f64,
    /// Set when `status` is `HeuristicFailure`.
    pub failure: Option<String>,
}

impl SearchResult {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub deadline: Instant,
    pub mem_cap: Option<usize>,
}

impl SearchLimits {
    pub fn time(limit: Duration) -> Self {
        Self {
            deadline: Instant::now() + limit,
            mem_cap: None,
        }
    }

    pub fn with_memory(mut self, bytes: usize) -> Self {
        self.mem_cap = Some(bytes);
        self
    }
}

/// Applicable-action enumeration via per-atom precondition lists.
pub struct SuccessorGenerator {
    by_pre: Vec<Vec<u32>>,
    pre_len: Vec<u32>,
    no_pre: Vec<u32>,
    counts: Vec<u32>,
}

impl SuccessorGenerator {
    pub fn new(task: &GroundTask) -> Self {
        let mut by_pre = vec![Vec::new(); task.num_atoms()];
        let mut no_pre = Vec::new();
        for a in &task.actions {
            if a.pre.is_empty() {
                no_pre.push(a.index as u32);
            }
            for &p in &a.pre {
                by_pre[p].push(a.index as u32);
            }
        }
        Self {
            by_pre,
            pre_len: task.actions.iter().map(|a| a.pre.len() as u32).collect(),
            no_pre,
            counts: vec![0; task.actions.len()],
        }
    }

    /// Indices of actions applicable in `state`, ascending.
    pub fn applicable(&mut self, state: &State, out: &mut Vec<usize>) {
        out.clear();
        out.extend(self.no_pre.iter().map(|&a| a as usize));
        let mut touched = Vec::new();
        for atom in state.atoms() {
            for &a in &self.by_pre[atom] {
                let c = &mut self.counts[a as usize];
                if *c == 0 {
                    touched.push(a);
                }
                *c += 1;
                if *c == self.pre_len[a as usize] {
                    out.push(a as usize);
                }
            }
        }
        for a in touched {
            self.counts[a as usize] = 0;
        }
        out.sort_unstable();
    }
}

struct SearchSpace {
    states: IndexSet<State>,
    parents: Vec<Option<(u32, u32)>>,
    state_bytes: usize,
}

impl SearchSpace {
    fn new(init: State) -> Self {
        let state_bytes = init.heap_bytes() + NODE_OVERHEAD_BYTES;
        let mut states = IndexSet::new();
        states.insert(init);
        Self {
            states,
            parents: vec![None],
            state_bytes,
        }
    }

    /// Inserts a new state; returns its id, or `None` if already seen.
    fn insert(&mut self, state: State, parent: usize, action: usize) -> Option<usize> {
        let (id, fresh) = self.states.insert_full(state);
        if fresh {
            self.parents.push(Some((parent as u32, action as u32)));
            Some(id)
        } else {
            None
        }
    }

    fn bytes(&self, open_len: usize) -> usize {
        self.states.len() * self.state_bytes + open_len * 32
    }

    fn plan(&self, task: &GroundTask, mut node: usize) -> Vec<String> {
        let mut rev = Vec::new();
        while let Some((parent, action)) = self.parents[node] {
            rev.push(task.actions[action as usize].name.clone());
            node = parent as usize;
        }
        rev.reverse();
        rev
    }
}

fn finish(
    status: SearchStatus,
    plan: Vec<String>,
    expansions: u64,
    evaluations: u64,
    start: Instant,
) -> SearchResult {
    SearchResult {
        status,
        plan,
        expansions,
        evaluations,
        wall_time: start.elapsed().as_secs_f64(),
        failure: None,
    }
}

fn heuristic_failure(err: HeuristicError, expansions: u64, evaluations: u64, start: Instant) -> SearchResult {
    let mut r = finish(SearchStatus::HeuristicFailure, Vec::new(), expansions, evaluations, start);
    match err {
        HeuristicError::Timeout => r.status = SearchStatus::TimeLimit,
        HeuristicError::Failed(msg) => r.failure = Some(msg),
    }
    r
}

/// Greedy best-first search ordered by heuristic value only, FIFO among ties.
pub fn gbfs(task: &GroundTask, h: &mut dyn Heuristic, limits: SearchLimits) -> SearchResult {
    gbfs_observed(task, h, limits, &mut |_| {})
}

/// As [`gbfs`], calling `on_expand` with each state just before it is expanded.
pub fn gbfs_observed(
    task: &GroundTask,
    h: &mut dyn Heuristic,
    limits: SearchLimits,
    on_expand: &mut dyn FnMut(&State),
) -> SearchResult {
    let start = Instant::now();
    h.set_deadline(limits.deadline);
    let mut expansions = 0u64;
    let mut evaluations = 1u64;
    let h0 = match h.evaluate(&task.init) {
        Ok(v) => v,
        Err(e) => return heuristic_failure(e, 0, evaluations, start),
    };
    let mut space = SearchSpace::new(task.init.clone());
    let mut open: BinaryHeap<Reverse<(OrderedFloat<f64>, u64, u32)>> = BinaryHeap::new();
    let mut seq = 0u64;
    if h0.is_finite() {
        open.push(Reverse((OrderedFloat(h0), seq, 0)));
        seq += 1;
    }
    let mut succ = SuccessorGenerator::new(task);
    let mut applicable = Vec::new();

    while let Some(Reverse((_, _, node))) = open.pop() {
        let node = node as usize;
        let state = space.states[node].clone();
        if task.is_goal(&state) {
            return finish(SearchStatus::Solved, space.plan(task, node), expansions, evaluations, start);
        }
        if expansions.is_multiple_of(DEADLINE_CHECK_INTERVAL) && Instant::now() >= limits.deadline {
            return finish(SearchStatus::TimeLimit, Vec::new(), expansions, evaluations, start);
        }
        on_expand(&state);
        expansions += 1;
        succ.applicable(&state, &mut applicable);
        let mut evaluated_batch = false;
        for &a in &applicable {
            let child = task.actions[a].apply_unchecked(&state);
            let Some(id) = space.insert(child, node, a) else {
                continue;
            };
            evaluations += 1;
            evaluated_batch = true;
            match h.evaluate(&space.states[id]) {
                Ok(v) if v.is_finite() => {
                    open.push(Reverse((OrderedFloat(v), seq, id as u32)));
                    seq += 1;
                }
                Ok(_) => {}
                Err(e) => return heuristic_failure(e, expansions, evaluations, start),
            }
        }
        if evaluated_batch && Instant::now() >= limits.deadline {
            return finish(SearchStatus::TimeLimit, Vec::new(), expansions, evaluations, start);
        }
        if let Some(cap) = limits.mem_cap {
            if space.bytes(open.len()) > cap {
                return finish(SearchStatus::MemoryLimit, Vec::new(), expansions, evaluations, start);
            }
        }
    }
    finish(SearchStatus::Unsolvable, Vec::new(), expansions, evaluations, start)
}

/// Breadth-first search; plans are optimal under unit costs.
pub fn bfs_oracle(task: &GroundTask, limits: SearchLimits) -> SearchResult {
    bfs_observed(task, limits, &mut |_| {})
}

pub fn bfs_observed(
    task: &GroundTask,
    limits: SearchLimits,
    on_expand: &mut dyn FnMut(&State),
) -> SearchResult {
    let start = Instant::now();
    let mut space = SearchSpace::new(task.init.clone());
    let mut queue = VecDeque::from([0usize]);
    let mut succ = SuccessorGenerator::new(task);
    let mut applicable = Vec::new();
    let mut expansions = 0u64;
    let mut generated = 1u64;
    while let Some(node) = queue.pop_front() {
        let state = space.states[node].clone();
        if task.is_goal(&state) {
            return finish(SearchStatus::Solved, space.plan(task, node), expansions, generated, start);
        }
        if expansions.is_multiple_of(DEADLINE_CHECK_INTERVAL) && Instant::now() >= limits.deadline {
            return finish(SearchStatus::TimeLimit, Vec::new(), expansions, generated, start);
        }
        on_expand(&state);
        expansions += 1;
        succ.applicable(&state, &mut applicable);
        for &a in &applicable {
            let child = task.actions[a].apply_unchecked(&state);
            if let Some(id) = space.insert(child, node, a) {
                generated += 1;
                queue.push_back(id);
            }
        }
        if let Some(cap) = limits.mem_cap {
            if space.bytes(queue.len()) > cap {
                return finish(SearchStatus::MemoryLimit, Vec::new(), expansions, generated, start);
            }
        }
    }
    finish(SearchStatus::Unsolvable, Vec::new(), expansions, generated, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::StripsAction;
    use crate::heuristics::baseline::{Blind, GoalCount};

    fn limits() -> SearchLimits {
        SearchLimits::time(Duration::from_secs(10))
    }

    /// Line of `n` cells; move right only, goal at the far end.
    fn line(n: usize) -> GroundTask {
        let atoms = (0..n).map(|i| format!("(at c{i})")).collect();
        let actions = (0..n - 1)
            .map(|i| StripsAction::new(format!("(move c{i} c{})", i + 1), vec![i], vec![i + 1], vec![i]))
            .collect();
        GroundTask::from_strips("line", atoms, actions, vec![0], vec![n - 1]).unwrap()
    }

    #[test]
    fn goal_in_init() {
        let t = line(1);
        let r = gbfs(&t, &mut Blind::new(&t), limits());
        assert_eq!(r.status, SearchStatus::Solved);
        assert!(r.plan.is_empty());
        assert_eq!(r.expansions, 0);
        assert_eq!(bfs_oracle(&t, limits()).plan.len(), 0);
    }

    #[test]
    fn line_plans() {
        let t = line(5);
        let r = gbfs(&t, &mut GoalCount::new(&t), limits());
        assert_eq!(r.plan.len(), 4);
        assert_eq!(r.plan[0], "(move c0 c1)");
        assert!(r.expansions <= r.evaluations);
        assert_eq!(bfs_oracle(&t, limits()).plan.len(), 4);
    }

    #[test]
    fn unreachable_goal_is_unsolvable() {
        let t = GroundTask::from_strips("u", vec!["(p)".into(), "(q)".into()], vec![], vec![0], vec![1]).unwrap();
        assert_eq!(gbfs(&t, &mut Blind::new(&t), limits()).status, SearchStatus::Unsolvable);
        assert_eq!(bfs_oracle(&t, limits()).status, SearchStatus::Unsolvable);
    }

    #[test]
    fn expired_deadline_reports_time_limit() {
        let t = line(5);
        let past = SearchLimits {
            deadline: Instant::now(),
            mem_cap: None,
        };
        assert_eq!(gbfs(&t, &mut Blind::new(&t), past).status, SearchStatus::TimeLimit);
        assert_eq!(bfs_oracle(&t, past).status, SearchStatus::TimeLimit);
    }

    #[test]
    fn memory_cap_reports_memory_limit() {
        let t = line(50);
        let tight = limits().with_memory(1);
        assert_eq!(gbfs(&t, &mut Blind::new(&t), tight).status, SearchStatus::MemoryLimit);
        assert_eq!(bfs_oracle(&t, tight).status, SearchStatus::MemoryLimit);
    }

    struct Failing;
    impl Heuristic for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn evaluate(&mut self, _: &State) -> Result<f64, HeuristicError> {
            Err(HeuristicError::Failed("boom".into()))
        }
    }

    #[test]
    fn failing_heuristic_is_reported() {
        let t = line(3);
        let r = gbfs(&t, &mut Failing, limits());
        assert_eq!(r.status, SearchStatus::HeuristicFailure);
        assert_eq!(r.failure.as_deref(), Some("boom"));
    }

    #[test]
    fn successor_generator_matches_naive_scan() {
        let t = line(6);
        let mut g = SuccessorGenerator::new(&t);
        let mut out = Vec::new();
        for i in 0..6 {
            let s = State::from_atoms(6, [i]);
            g.applicable(&s, &mut out);
            let naive: Vec<_> = t.actions.iter().filter(|a| a.is_applicable(&s)).map(|a| a.index).collect();
            assert_eq!(out, naive);
        }
    }
}
