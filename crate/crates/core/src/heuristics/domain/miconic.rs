use super::{goal_args, holding, Binder, BindingError, DistanceTable, PENALTY};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// Per unserved passenger: ride to the destination and depart, or fetch,
/// board, ride and depart. Floors form an undirected graph over `above`.
pub struct MiconicR1<'t> {
    task: &'t GroundTask,
    lift_at: usize,
    origin: usize,
    destin: usize,
    boarded: usize,
    /// `(goal atom, passenger)`.
    passengers: Vec<(usize, usize)>,
    dist: DistanceTable,
    origin_of: Vec<Option<usize>>,
    destin_of: Vec<Option<usize>>,
    is_boarded: Vec<bool>,
}

impl<'t> MiconicR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let lift_at = b.pred("lift-at", 1)?;
        let origin = b.pred("origin", 2)?;
        let destin = b.pred("destin", 2)?;
        let boarded = b.pred("boarded", 1)?;
        let served = b.pred("served", 1)?;
        let above = b.pred("above", 2)?;
        let n = task.objects.len();
        Ok(Self {
            task,
            lift_at,
            origin,
            destin,
            boarded,
            passengers: goal_args(task, served).into_iter().map(|(g, a)| (g, a[0])).collect(),
            dist: DistanceTable::from_links(task, above, false),
            origin_of: vec![None; n],
            destin_of: vec![None; n],
            is_boarded: vec![false; n],
        })
    }
}

impl Heuristic for MiconicR1<'_> {
    fn name(&self) -> &str {
        "miconic-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        let task = self.task;
        self.origin_of.fill(None);
        self.destin_of.fill(None);
        self.is_boarded.fill(false);
        let lift = holding(task, state, self.lift_at).map(|a| a[0]).next();
        for a in holding(task, state, self.origin) {
            self.origin_of[a[0]] = Some(a[1]);
        }
        for a in holding(task, state, self.destin) {
            self.destin_of[a[0]] = Some(a[1]);
        }
        for a in holding(task, state, self.boarded) {
            self.is_boarded[a[0]] = true;
        }
        let mut h = 0.0;
        for &(goal, p) in &self.passengers {
            if state.contains(goal) {
                continue;
            }
            let (Some(lift), Some(dest)) = (lift, self.destin_of[p]) else {
                h += PENALTY;
                continue;
            };
            if self.is_boarded[p] {
                h += self.dist.get(lift, dest) + 1.0;
            } else if let Some(orig) = self.origin_of[p] {
                h += self.dist.get(lift, orig) + self.dist.get(orig, dest) + 2.0;
            } else {
                h += PENALTY;
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{state, task};
    use super::super::by_name;

    const DOMAIN: &str = include_str!("../../../benchmarks/miconic/domain.pddl");
    const FIVE: &str = "(define (problem m) (:domain miconic)
        (:objects p1 - passenger f1 f2 f3 f4 f5 - floor)
        (:init (above f1 f2) (above f2 f3) (above f3 f4) (above f4 f5)
               (origin p1 f1) (destin p1 f5) (lift-at f2))
        (:goal (and (served p1))))";
    const STATICS: &[&str] = &["(above f1 f2)", "(above f2 f3)", "(above f3 f4)", "(above f4 f5)"];

    fn with_statics(extra: &[&'static str]) -> Vec<&'static str> {
        STATICS.iter().copied().chain(extra.iter().copied()).collect()
    }

    #[test]
    fn boarded_passenger() {
        let t = task(DOMAIN, FIVE);
        let mut h = by_name("miconic-r1", &t).unwrap().unwrap();
        let s = state(&t, &with_statics(&["(lift-at f2)", "(boarded p1)", "(destin p1 f5)", "(origin p1 f1)"]));
        assert_eq!(h.evaluate(&s).unwrap(), 4.0);
    }

    #[test]
    fn waiting_passenger() {
        let t = task(
            DOMAIN,
            &FIVE.replace("(destin p1 f5)", "(destin p1 f3)"),
        );
        let mut h = by_name("miconic-r1", &t).unwrap().unwrap();
        assert_eq!(h.evaluate(&t.init).unwrap(), 5.0);
    }

    #[test]
    fn all_served_is_zero() {
        let t = task(DOMAIN, FIVE);
        let mut h = by_name("miconic-r1", &t).unwrap().unwrap();
        let s = state(&t, &with_statics(&["(lift-at f5)", "(served p1)", "(destin p1 f5)", "(origin p1 f1)"]));
        assert_eq!(h.evaluate(&s).unwrap(), 0.0);
    }
}
