use std::collections::{HashMap, VecDeque};

use super::{goal_args, holding, init_args, Binder, BindingError, PENALTY};
use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

/// Per unpainted goal tile: Manhattan distance to the closest robots, a
/// color change unless one of them already holds the color, and the paint
/// action itself.
pub struct FloortileR1<'t> {
    task: &'t GroundTask,
    robot_at: usize,
    robot_has: usize,
    robots: Vec<usize>,
    /// `(goal atom, tile, color)`.
    targets: Vec<(usize, usize, usize)>,
    coords: HashMap<usize, (i64, i64)>,
}

impl<'t> FloortileR1<'t> {
    pub(crate) fn new(task: &'t GroundTask, b: &Binder<'_>) -> Result<Self, BindingError> {
        let robot_at = b.pred("robot-at", 2)?;
        let robot_has = b.pred("robot-has", 2)?;
        let painted = b.pred("painted", 2)?;
        // (pred, row offset, column offset) of the first argument relative
        // to the second.
        let offsets = [
            (b.pred("up", 2)?, 1, 0),
            (b.pred("down", 2)?, -1, 0),
            (b.pred("right", 2)?, 0, 1),
            (b.pred("left", 2)?, 0, -1),
        ];
        let mut edges: HashMap<usize, Vec<(usize, i64, i64)>> = HashMap::new();
        for &(pred, dr, dc) in &offsets {
            for a in init_args(task, pred) {
                edges.entry(a[1]).or_default().push((a[0], dr, dc));
                edges.entry(a[0]).or_default().push((a[1], -dr, -dc));
            }
        }
        Ok(Self {
            task,
            robot_at,
            robot_has,
            robots: b.objects("robot")?,
            targets: goal_args(task, painted).into_iter().map(|(g, a)| (g, a[0], a[1])).collect(),
            coords: embed(edges),
        })
    }
}

/// Assigns grid coordinates by BFS from the lowest-index tile of each
/// connected component.
fn embed(mut edges: HashMap<usize, Vec<(usize, i64, i64)>>) -> HashMap<usize, (i64, i64)> {
    let mut tiles: Vec<usize> = edges.keys().copied().collect();
    tiles.sort_unstable();
    for list in edges.values_mut() {
        list.sort_unstable();
    }
    let mut coords = HashMap::new();
    let mut queue = VecDeque::new();
    for start in tiles {
        if coords.contains_key(&start) {
            continue;
        }
        coords.insert(start, (0, 0));
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let (r, c) = coords[&u];
            for &(v, dr, dc) in &edges[&u] {
                coords.entry(v).or_insert_with(|| {
                    queue.push_back(v);
                    (r + dr, c + dc)
                });
            }
        }
    }
    coords
}

impl Heuristic for FloortileR1<'_> {
    fn name(&self) -> &str {
        "floortile-r1"
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        let task = self.task;
        let mut pos: Vec<(usize, (i64, i64))> = Vec::new();
        for a in holding(task, state, self.robot_at) {
            if let Some(&xy) = self.coords.get(&a[1]) {
                pos.push((a[0], xy));
            }
        }
        pos.retain(|(r, _)| self.robots.contains(r));
        let mut colors: Vec<(usize, usize)> = holding(task, state, self.robot_has).map(|a| (a[0], a[1])).collect();
        colors.sort_unstable();

        let mut h = 0.0;
        for &(goal, tile, color) in &self.targets {
            if state.contains(goal) {
                continue;
            }
            let Some(&(tr, tc)) = self.coords.get(&tile) else {
                h += PENALTY;
                continue;
            };
            let manhattan = |&(r, c): &(i64, i64)| (r - tr).abs() + (c - tc).abs();
            let Some(d_min) = pos.iter().map(|(_, xy)| manhattan(xy)).min() else {
                h += PENALTY;
                continue;
            };
            let has_color = pos
                .iter()
                .filter(|(_, xy)| manhattan(xy) == d_min)
                .any(|(r, _)| colors.binary_search(&(*r, color)).is_ok());
            h += (d_min + if has_color { 0 } else { 1 } + 1) as f64;
        }
        Ok(h)
    }
}
