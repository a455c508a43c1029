use super::{goal_args, holding, Binder, BindingError};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// For every block whose goal `on`/`on-table` atom is false: 1, plus 2 per
/// block currently stacked above it.
pub struct BlocksR1<'t> {
    task: &'t GroundTask,
    on: usize,
    /// `(goal atom, block)` pairs, one per block with a placement goal.
    targets: Vec<(usize, usize)>,
    above: Vec<Option<usize>>,
}

impl<'t> BlocksR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let on = b.pred("on", 2)?;
        let on_table = b.pred("on-table", 1)?;
        b.pred("clear", 1)?;
        let mut targets: Vec<(usize, usize)> = goal_args(task, on)
            .into_iter()
            .chain(goal_args(task, on_table))
            .map(|(atom, args)| (atom, args[0]))
            .collect();
        targets.sort_unstable();
        Ok(Self {
            task,
            on,
            targets,
            above: vec![None; task.objects.len()],
        })
    }
}

impl Heuristic for BlocksR1<'_> {
    fn name(&self) -> &str {
        "bw-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        self.above.fill(None);
        for args in holding(self.task, state, self.on) {
            self.above[args[1]] = Some(args[0]);
        }
        let limit = self.above.len();
        let mut h = 0u64;
        for &(goal, block) in &self.targets {
            if state.contains(goal) {
                continue;
            }
            let mut count = 0u64;
            let mut cur = self.above[block];
            while let Some(x) = cur {
                count += 1;
                if count as usize > limit {
                    break;
                }
                cur = self.above[x];
            }
            h += 1 + 2 * count;
        }
        Ok(h as f64)
    }
}
