use super::{goal_args, holding, init_args, Binder, BindingError};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// Counts sandwiches still to be made (2 actions each: make, put on
/// tray), one tray move per waiting place without a tray, and one serve
/// per unserved child.
pub struct ChildsnackR1<'t> {
    task: &'t GroundTask,
    tray_at: usize,
    ontray: usize,
    at_kitchen: usize,
    gluten_free: usize,
    /// `(goal atom, child, allergic, place)`.
    children: Vec<(usize, usize, bool, Option<usize>)>,
}

impl<'t> ChildsnackR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let served = b.pred("served", 1)?;
        let allergic = b.pred("allergic", 1)?;
        let waiting = b.pred("waiting", 2)?;
        let mut is_allergic = vec![false; task.objects.len()];
        for a in init_args(task, allergic) {
            is_allergic[a[0]] = true;
        }
        let mut place = vec![None; task.objects.len()];
        for a in init_args(task, waiting) {
            place[a[0]] = Some(a[1]);
        }
        let children = goal_args(task, served)
            .into_iter()
            .map(|(g, a)| (g, a[0], is_allergic[a[0]], place[a[0]]))
            .collect();
        Ok(Self {
            task,
            tray_at: b.pred("tray-at", 2)?,
            ontray: b.pred("ontray", 2)?,
            at_kitchen: b.pred("at-kitchen-sandwich", 1)?,
            gluten_free: b.pred("gluten-free-sandwich", 1)?,
            children,
        })
    }
}

impl Heuristic for ChildsnackR1<'_> {
    fn name(&self) -> &str {
        "childsnack-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        let task = self.task;
        let n = task.objects.len();
        let mut available = vec![false; n];
        for a in holding(task, state, self.at_kitchen) {
            available[a[0]] = true;
        }
        for a in holding(task, state, self.ontray) {
            available[a[0]] = true;
        }
        let mut gf = vec![false; n];
        for a in holding(task, state, self.gluten_free) {
            gf[a[0]] = true;
        }
        let (a_g, a_r) = (0..n)
            .filter(|&s| available[s])
            .fold((0u64, 0u64), |(g, r), s| if gf[s] { (g + 1, r) } else { (g, r + 1) });
        let mut has_tray = vec![false; n];
        for a in holding(task, state, self.tray_at) {
            has_tray[a[1]] = true;
        }

        let (mut u_g, mut u_r) = (0u64, 0u64);
        let mut needs_tray = vec![false; n];
        for &(goal, _, allergic, place) in &self.children {
            if state.contains(goal) {
                continue;
            }
            if allergic {
                u_g += 1;
            } else {
                u_r += 1;
            }
            if let Some(p) = place {
                if !has_tray[p] {
                    needs_tray[p] = true;
                }
            }
        }
        let missing_g = u_g.saturating_sub(a_g);
        let missing_r = u_r.saturating_sub(a_r);
        let moves = needs_tray.iter().filter(|&&b| b).count() as u64;
        Ok((2 * (missing_g + missing_r) + moves + u_g + u_r) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{state, task};
    use super::super::by_name;

    const DOMAIN: &str = include_str!("../../../benchmarks/childsnack/domain.pddl");

    #[test]
    fn allergic_child_without_sandwich_or_tray() {
        let t = task(DOMAIN, include_str!("../../../benchmarks/childsnack/p01.pddl"));
        let mut h = by_name("childsnack-r1", &t).unwrap().unwrap();
        assert_eq!(h.evaluate(&t.init).unwrap(), 4.0);
    }

    #[test]
    fn sandwiches_already_on_tray_at_table() {
        let p = "(define (problem c) (:domain childsnack)
            (:objects child1 child2 - child tray1 - tray table1 - place sandw1 sandw2 - sandwich)
            (:init (at tray1 table1) (ontray sandw1 tray1) (ontray sandw2 tray1)
                   (not_allergic_gluten child1) (not_allergic_gluten child2)
                   (waiting child1 table1) (waiting child2 table1))
            (:goal (and (served child1) (served child2))))";
        let t = task(DOMAIN, p);
        let mut h = by_name("childsnack-r1", &t).unwrap().unwrap();
        assert_eq!(h.evaluate(&t.init).unwrap(), 2.0);
        let done = state(
            &t,
            &[
                "(at tray1 table1)",
                "(served child1)",
                "(served child2)",
                "(not_allergic_gluten child1)",
                "(not_allergic_gluten child2)",
                "(waiting child1 table1)",
                "(waiting child2 table1)",
            ],
        );
        assert_eq!(h.evaluate(&done).unwrap(), 0.0);
    }
}
