use super::{goal_args, holding, Binder, BindingError, DistanceTable};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// Sum of box-to-goal distances plus the agent's distance to the nearest
/// misplaced box. Distances ignore walls made of boxes.
pub struct SokobanR1<'t> {
    task: &'t GroundTask,
    at_robot: usize,
    at: usize,
    /// `(goal atom, box, goal cell)`.
    boxes: Vec<(usize, usize, usize)>,
    dist: DistanceTable,
    loc: Vec<Option<usize>>,
}

impl<'t> SokobanR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let at_robot = b.pred("at-robot", 1)?;
        let at = b.pred("at", 2)?;
        let adjacent = b.pred("adjacent", 3)?;
        Ok(Self {
            task,
            at_robot,
            at,
            boxes: goal_args(task, at).into_iter().map(|(g, a)| (g, a[0], a[1])).collect(),
            dist: DistanceTable::from_links(task, adjacent, false),
            loc: vec![None; task.objects.len()],
        })
    }
}

impl Heuristic for SokobanR1<'_> {
    fn name(&self) -> &str {
        "sokoban-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        let task = self.task;
        self.loc.fill(None);
        for a in holding(task, state, self.at) {
            self.loc[a[0]] = Some(a[1]);
        }
        let agent = holding(task, state, self.at_robot).map(|a| a[0]).next();
        let mut total = 0.0;
        let mut nearest = f64::INFINITY;
        let mut misplaced = false;
        for &(goal, bx, cell) in &self.boxes {
            if state.contains(goal) {
                continue;
            }
            misplaced = true;
            let Some(pos) = self.loc[bx] else {
                return Ok(f64::INFINITY);
            };
            total += self.dist.get(pos, cell);
            if let Some(agent) = agent {
                nearest = nearest.min(self.dist.get(agent, pos));
            }
        }
        if !misplaced {
            return Ok(0.0);
        }
        Ok(total + nearest)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::task;
    use super::super::by_name;

    const DOMAIN: &str = include_str!("../../../benchmarks/sokoban/domain.pddl");

    #[test]
    fn corridor() {
        let t = task(DOMAIN, include_str!("../../../benchmarks/sokoban/p01.pddl"));
        let mut h = by_name("sokoban-r1", &t).unwrap().unwrap();
        assert_eq!(h.evaluate(&t.init).unwrap(), 3.0);
    }

    #[test]
    fn unreachable_goal_cell() {
        let p = "(define (problem s) (:domain sokoban)
            (:objects right left - dir c1 c2 c3 island - loc box1 - box)
            (:init (at-robot c1) (at box1 c2) (clear c1) (clear c3) (clear island)
                   (adjacent c1 c2 right) (adjacent c2 c3 right)
                   (adjacent c2 c1 left) (adjacent c3 c2 left)
                   (adjacent_2 c1 c3 right) (adjacent_2 c3 c1 left))
            (:goal (and (at box1 island))))";
        let t = task(DOMAIN, p);
        let mut h = by_name("sokoban-r1", &t).unwrap().unwrap();
        assert!(h.evaluate(&t.init).unwrap().is_infinite());
    }
}
