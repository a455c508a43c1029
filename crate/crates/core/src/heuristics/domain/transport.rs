use super::{goal_args, holding, Binder, BindingError, DistanceTable};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// Per undelivered package: drive the carrying vehicle to the goal and
/// drop, or bring the cheapest vehicle to the package first.
pub struct TransportR1<'t> {
    task: &'t GroundTask,
    at: usize,
    inside: usize,
    vehicles: Vec<usize>,
    /// `(goal atom, package, goal location)`.
    packages: Vec<(usize, usize, usize)>,
    dist: DistanceTable,
    loc: Vec<Option<usize>>,
    carrier: Vec<Option<usize>>,
}

impl<'t> TransportR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let at = b.pred("at", 2)?;
        let inside = b.pred("in", 2)?;
        let road = b.pred("road", 2)?;
        let vehicles = b.objects("vehicle")?;
        let n = task.objects.len();
        Ok(Self {
            task,
            at,
            inside,
            vehicles,
            packages: goal_args(task, at).into_iter().map(|(g, a)| (g, a[0], a[1])).collect(),
            dist: DistanceTable::from_links(task, road, true),
            loc: vec![None; n],
            carrier: vec![None; n],
        })
    }
}

impl Heuristic for TransportR1<'_> {
    fn name(&self) -> &str {
        "transport-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        let task = self.task;
        self.loc.fill(None);
        self.carrier.fill(None);
        for a in holding(task, state, self.at) {
            self.loc[a[0]] = Some(a[1]);
        }
        for a in holding(task, state, self.inside) {
            self.carrier[a[0]] = Some(a[1]);
        }
        let mut h = 0.0;
        for &(goal, pkg, dest) in &self.packages {
            if state.contains(goal) {
                continue;
            }
            let cost = if let Some(v) = self.carrier[pkg] {
                self.loc[v].map_or(f64::INFINITY, |vl| self.dist.get(vl, dest) + 1.0)
            } else if let Some(pl) = self.loc[pkg] {
                let to_goal = self.dist.get(pl, dest);
                self.vehicles
                    .iter()
                    .filter_map(|&v| self.loc[v])
                    .map(|vl| self.dist.get(vl, pl) + to_goal + 2.0)
                    .fold(f64::INFINITY, f64::min)
            } else {
                f64::INFINITY
            };
            h += cost;
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{state, task};
    use super::super::by_name;

    const DOMAIN: &str = include_str!("../../../benchmarks/transport/domain.pddl");
    const P01: &str = include_str!("../../../benchmarks/transport/p01.pddl");
    const ROADS: &[&str] = &["(road l1 l2)", "(road l2 l1)", "(road l2 l3)", "(road l3 l2)", "(capacity-predecessor c0 c1)"];

    fn with_roads(extra: &[&'static str]) -> Vec<&'static str> {
        ROADS.iter().copied().chain(extra.iter().copied()).collect()
    }

    #[test]
    fn fetch_and_deliver() {
        let t = task(DOMAIN, P01);
        let mut h = by_name("transport-r1", &t).unwrap().unwrap();
        assert_eq!(h.evaluate(&t.init).unwrap(), 4.0);
    }

    #[test]
    fn loaded_package() {
        let t = task(DOMAIN, P01);
        let mut h = by_name("transport-r1", &t).unwrap().unwrap();
        let s = state(&t, &with_roads(&["(at truck1 l2)", "(in pkg1 truck1)", "(capacity truck1 c0)"]));
        assert_eq!(h.evaluate(&s).unwrap(), 2.0);
    }

    #[test]
    fn delivered_is_zero() {
        let t = task(DOMAIN, P01);
        let mut h = by_name("transport-r1", &t).unwrap().unwrap();
        let s = state(&t, &with_roads(&["(at truck1 l3)", "(at pkg1 l3)", "(capacity truck1 c1)"]));
        assert_eq!(h.evaluate(&s).unwrap(), 0.0);
    }
}
