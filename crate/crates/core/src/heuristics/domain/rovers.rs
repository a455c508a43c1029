use std::collections::{HashMap, VecDeque};

use super::{goal_args, holding, init_args, Binder, BindingError, PENALTY};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Data {
    Soil(usize),
    Rock(usize),
    Image(usize, usize),
}

/// Per uncommunicated datum: travel to the acquisition waypoint, acquire
/// (plus calibration for images), travel to a waypoint visible from the
/// lander, communicate. Data already held skips the first half.
pub struct RoversR1<'t> {
    task: &'t GroundTask,
    at: usize,
    have_soil: usize,
    have_rock: usize,
    have_image: usize,
    calibrated: usize,
    rovers: Vec<usize>,
    goals: Vec<(usize, Data)>,
    /// Per rover: adjacency lists over waypoints.
    graph: HashMap<usize, HashMap<usize, Vec<usize>>>,
    comm: Vec<usize>,
    soil_rovers: Vec<usize>,
    rock_rovers: Vec<usize>,
    /// `(rover, camera, mode)` for imaging-equipped rovers.
    cameras: Vec<(usize, usize, usize)>,
    visible_from: HashMap<usize, Vec<usize>>,
    /// Memoized BFS rows keyed by `(rover, source)`. The traversal graph is
    /// static, so entries stay valid for the task's lifetime.
    rows: HashMap<(usize, usize), HashMap<usize, u32>>,
}

impl<'t> RoversR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let at = b.pred("at", 2)?;
        let at_lander = b.pred("at-lander", 2)?;
        let can_traverse = b.pred("can-traverse", 3)?;
        let visible = b.pred("visible", 2)?;
        let eq_soil = b.pred("equipped-soil", 1)?;
        let eq_rock = b.pred("equipped-rock", 1)?;
        let eq_img = b.pred("equipped-imaging", 1)?;
        let comm_soil = b.pred("communicated-soil", 1)?;
        let comm_rock = b.pred("communicated-rock", 1)?;
        let comm_img = b.pred("communicated-image", 2)?;
        let vis_from = b.pred("visible-from", 2)?;
        let on_board = b.pred("on-board", 2)?;
        let supports = b.pred("supports", 2)?;
        let rovers = b.objects("rover")?;

        let vis: std::collections::HashSet<(usize, usize)> =
            init_args(task, visible).into_iter().map(|a| (a[0], a[1])).collect();
        let mut graph: HashMap<usize, HashMap<usize, Vec<usize>>> = HashMap::new();
        for a in init_args(task, can_traverse) {
            if vis.contains(&(a[1], a[2])) {
                graph.entry(a[0]).or_default().entry(a[1]).or_default().push(a[2]);
            }
        }
        for adj in graph.values_mut().flat_map(|g| g.values_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }
        let landers: Vec<usize> = init_args(task, at_lander).into_iter().map(|a| a[1]).collect();
        let mut comm: Vec<usize> = vis
            .iter()
            .filter(|(_, y)| landers.contains(y))
            .map(|&(x, _)| x)
            .collect();
        comm.sort_unstable();
        comm.dedup();

        let flag = |pred| -> Vec<usize> {
            let mut v: Vec<usize> = init_args(task, pred).into_iter().map(|a| a[0]).collect();
            v.sort_unstable();
            v
        };
        let imaging = flag(eq_img);
        let sup: Vec<(usize, usize)> = init_args(task, supports).into_iter().map(|a| (a[0], a[1])).collect();
        let mut cameras = Vec::new();
        for a in init_args(task, on_board) {
            let (cam, rover) = (a[0], a[1]);
            if imaging.binary_search(&rover).is_ok() {
                for &(c, m) in &sup {
                    if c == cam {
                        cameras.push((rover, cam, m));
                    }
                }
            }
        }
        cameras.sort_unstable();
        let mut visible_from: HashMap<usize, Vec<usize>> = HashMap::new();
        for a in init_args(task, vis_from) {
            visible_from.entry(a[0]).or_default().push(a[1]);
        }

        let mut goals: Vec<(usize, Data)> = Vec::new();
        goals.extend(goal_args(task, comm_soil).into_iter().map(|(g, a)| (g, Data::Soil(a[0]))));
        goals.extend(goal_args(task, comm_rock).into_iter().map(|(g, a)| (g, Data::Rock(a[0]))));
        goals.extend(goal_args(task, comm_img).into_iter().map(|(g, a)| (g, Data::Image(a[0], a[1]))));
        goals.sort_unstable_by_key(|&(g, _)| g);

        Ok(Self {
            task,
            at,
            have_soil: b.pred("have-soil", 2)?,
            have_rock: b.pred("have-rock", 2)?,
            have_image: b.pred("have-image", 3)?,
            calibrated: b.pred("calibrated", 2)?,
            rovers,
            goals,
            graph,
            comm,
            soil_rovers: flag(eq_soil),
            rock_rovers: flag(eq_rock),
            cameras,
            visible_from,
            rows: HashMap::new(),
        })
    }

    fn dist(&mut self, rover: usize, from: usize, to: usize) -> f64 {
        if from == to {
            return 0.0;
        }
        let graph = &self.graph;
        let row = self.rows.entry((rover, from)).or_insert_with(|| {
            let mut row = HashMap::from([(from, 0u32)]);
            let mut queue = VecDeque::from([from]);
            let empty = HashMap::new();
            let adj = graph.get(&rover).unwrap_or(&empty);
            while let Some(u) = queue.pop_front() {
                let d = row[&u];
                for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                    if let std::collections::hash_map::Entry::Vacant(e) = row.entry(v) {
                        e.insert(d + 1);
                        queue.push_back(v);
                    }
                }
            }
            row
        });
        row.get(&to).map_or(f64::INFINITY, |&d| f64::from(d))
    }

    fn to_comm(&mut self, rover: usize, from: usize) -> f64 {
        let comm = self.comm.clone();
        comm.into_iter()
            .map(|w| self.dist(rover, from, w))
            .fold(f64::INFINITY, f64::min)
    }
}

impl Heuristic for RoversR1<'_> {
    fn name(&self) -> &str {
        "rovers-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        let task = self.task;
        let mut pos: HashMap<usize, usize> = HashMap::new();
        for a in holding(task, state, self.at) {
            if self.rovers.contains(&a[0]) {
                pos.insert(a[0], a[1]);
            }
        }
        let soil: Vec<(usize, usize)> = holding(task, state, self.have_soil).map(|a| (a[0], a[1])).collect();
        let rock: Vec<(usize, usize)> = holding(task, state, self.have_rock).map(|a| (a[0], a[1])).collect();
        let images: Vec<(usize, usize, usize)> =
            holding(task, state, self.have_image).map(|a| (a[0], a[1], a[2])).collect();
        let calibrated: Vec<(usize, usize)> =
            holding(task, state, self.calibrated).map(|a| (a[0], a[1])).collect();

        let goals = self.goals.clone();
        let mut h = 0.0;
        for (goal, data) in goals {
            if state.contains(goal) {
                continue;
            }
            let holders: Vec<usize> = match data {
                Data::Soil(w) => soil.iter().filter(|s| s.1 == w).map(|s| s.0).collect(),
                Data::Rock(w) => rock.iter().filter(|s| s.1 == w).map(|s| s.0).collect(),
                Data::Image(o, m) => images.iter().filter(|i| i.1 == o && i.2 == m).map(|i| i.0).collect(),
            };
            let mut best = f64::INFINITY;
            if !holders.is_empty() {
                for r in holders {
                    if let Some(&p) = pos.get(&r) {
                        best = best.min(self.to_comm(r, p) + 1.0);
                    }
                }
            } else {
                // (rover, acquisition waypoints, calibration cost)
                let options: Vec<(usize, Vec<usize>, f64)> = match data {
                    Data::Soil(w) => self.soil_rovers.iter().map(|&r| (r, vec![w], 0.0)).collect(),
                    Data::Rock(w) => self.rock_rovers.iter().map(|&r| (r, vec![w], 0.0)).collect(),
                    Data::Image(o, m) => {
                        let wps = self.visible_from.get(&o).cloned().unwrap_or_default();
                        let mut rovers: Vec<usize> = self
                            .cameras
                            .iter()
                            .filter(|c| c.2 == m)
                            .map(|c| c.0)
                            .collect();
                        rovers.dedup();
                        rovers
                            .into_iter()
                            .map(|r| {
                                let ready = self
                                    .cameras
                                    .iter()
                                    .filter(|c| c.0 == r && c.2 == m)
                                    .any(|c| calibrated.contains(&(c.1, r)));
                                (r, wps.clone(), if ready { 0.0 } else { 1.0 })
                            })
                            .collect()
                    }
                };
                for (r, wps, calib) in options {
                    let Some(&p) = pos.get(&r) else { continue };
                    for w in wps {
                        let c = self.dist(r, p, w) + 1.0 + calib + self.to_comm(r, w) + 1.0;
                        best = best.min(c);
                    }
                }
            }
            h += if best.is_finite() { best } else { PENALTY };
        }
        Ok(h)
    }
}
