use super::{goal_args, holding, Binder, BindingError, DistanceTable, PENALTY};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// Greedy nut-to-spanner assignment. Nuts are taken in index order and each
/// one gets the cheapest usable spanner not yet assigned.
pub struct SpannerR1<'t> {
    task: &'t GroundTask,
    at: usize,
    carrying: usize,
    usable: usize,
    is_man: Vec<bool>,
    is_spanner: Vec<bool>,
    /// `(goal atom, nut)`.
    nuts: Vec<(usize, usize)>,
    dist: DistanceTable,
    loc: Vec<Option<usize>>,
}

impl<'t> SpannerR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let at = b.pred("at", 2)?;
        let carrying = b.pred("carrying", 2)?;
        let usable = b.pred("usable", 1)?;
        let link = b.pred("link", 2)?;
        let tightened = b.pred("tightened", 1)?;
        let mut is_man = vec![false; task.objects.len()];
        for o in b.objects("man")? {
            is_man[o] = true;
        }
        let mut is_spanner = vec![false; task.objects.len()];
        for o in b.objects("spanner")? {
            is_spanner[o] = true;
        }
        let mut nuts: Vec<(usize, usize)> = goal_args(task, tightened)
            .into_iter()
            .map(|(g, args)| (g, args[0]))
            .collect();
        nuts.sort_unstable_by_key(|&(_, n)| n);
        Ok(Self {
            task,
            at,
            carrying,
            usable,
            is_man,
            is_spanner,
            nuts,
            dist: DistanceTable::from_links(task, link, true),
            loc: vec![None; task.objects.len()],
        })
    }
}

impl Heuristic for SpannerR1<'_> {
    fn name(&self) -> &str {
        "spanner-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        let task = self.task;
        self.loc.fill(None);
        let mut agent = None;
        for args in holding(task, state, self.at) {
            self.loc[args[0]] = Some(args[1]);
            if self.is_man[args[0]] && agent.is_none() {
                agent = Some(args[1]);
            }
        }
        let mut carried = vec![false; task.objects.len()];
        for args in holding(task, state, self.carrying) {
            carried[args[1]] = true;
        }
        // (spanner, carried, location if lying somewhere)
        let mut available: Vec<(usize, bool, Option<usize>)> = holding(task, state, self.usable)
            .map(|args| args[0])
            .filter(|&s| self.is_spanner[s] && (carried[s] || self.loc[s].is_some()))
            .map(|s| (s, carried[s], self.loc[s]))
            .collect();
        available.sort_unstable();
        let mut used = vec![false; available.len()];

        let mut h = 0.0;
        for &(goal, nut) in &self.nuts {
            if state.contains(goal) {
                continue;
            }
            let (Some(agent), Some(nut_loc)) = (agent, self.loc[nut]) else {
                h += PENALTY;
                continue;
            };
            let mut best: Option<(f64, usize)> = None;
            for (i, &(_, is_carried, sloc)) in available.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let cost = if is_carried {
                    self.dist.get(agent, nut_loc) + 1.0
                } else {
                    let sloc = sloc.expect("uncarried spanner has a location");
                    self.dist.get(agent, sloc) + self.dist.get(sloc, nut_loc) + 2.0
                };
                if cost.is_finite() && best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, i));
                }
            }
            match best {
                Some((cost, i)) => {
                    used[i] = true;
                    h += cost;
                }
                None => h += PENALTY,
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{state, task};
    use super::super::{by_name, PENALTY};

    const DOMAIN: &str = include_str!("../../../benchmarks/spanner/domain.pddl");

    fn problem(nuts: &[&str]) -> String {
        let goal: String = nuts.iter().map(|n| format!("(tightened {n})")).collect();
        let loose: String = nuts.iter().map(|n| format!("(loose {n}) (at {n} gate)")).collect();
        format!(
            "(define (problem s) (:domain spanner)
              (:objects bob - man spanner1 - spanner {} - nut shed location1 gate - location)
              (:init (at bob shed) (at spanner1 location1) (useable spanner1) {loose}
                     (link shed location1) (link location1 gate))
              (:goal (and {goal})))",
            nuts.join(" ")
        )
    }

    #[test]
    fn corridor_walk_pick_and_tighten() {
        let t = task(DOMAIN, &problem(&["nut1"]));
        let mut h = by_name("spanner-r1", &t).unwrap().unwrap();
        assert_eq!(h.evaluate(&t.init).unwrap(), 4.0);
    }

    #[test]
    fn carried_spanner_and_penalty() {
        let t = task(DOMAIN, &problem(&["nut1"]));
        let mut h = by_name("spanner-r1", &t).unwrap().unwrap();
        let carrying = state(
            &t,
            &["(at bob location1)", "(carrying bob spanner1)", "(useable spanner1)", "(loose nut1)", "(at nut1 gate)"],
        );
        assert_eq!(h.evaluate(&carrying).unwrap(), 2.0);

        let t2 = task(DOMAIN, &problem(&["nut1", "nut2"]));
        let mut h2 = by_name("spanner-r1", &t2).unwrap().unwrap();
        let s = state(
            &t2,
            &[
                "(at bob location1)",
                "(carrying bob spanner1)",
                "(useable spanner1)",
                "(loose nut1)",
                "(at nut1 gate)",
                "(loose nut2)",
                "(at nut2 gate)",
            ],
        );
        assert_eq!(h2.evaluate(&s).unwrap(), 2.0 + PENALTY);
    }

    #[test]
    fn all_tightened_is_zero() {
        let t = task(DOMAIN, &problem(&["nut1"]));
        let mut h = by_name("spanner-r1", &t).unwrap().unwrap();
        let s = state(&t, &["(at bob gate)", "(carrying bob spanner1)", "(tightened nut1)", "(at nut1 gate)"]);
        assert_eq!(h.evaluate(&s).unwrap(), 0.0);
    }
}
