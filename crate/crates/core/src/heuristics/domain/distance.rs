//! All-pairs shortest path lengths over unit-cost graphs of objects.

use std::collections::{HashMap, VecDeque};

use crate::grounding::GroundTask;

const UNREACHABLE: u32 = u32::MAX;

/// Hop distances between nodes (object indices), computed by one BFS per
/// source. Lookups on nodes outside the table are infinite unless the two
/// nodes coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    nodes: Vec<usize>,
    index: HashMap<usize, usize>,
    dist: Vec<u32>,
}

impl DistanceTable {
    /// Builds the table from explicit edges. Nodes named only by edges are
    /// added automatically. If `directed` is false every edge is symmetric.
    pub fn from_edges(
        nodes: impl IntoIterator<Item = usize>,
        edges: &[(usize, usize)],
        directed: bool,
    ) -> Self {
        let mut order: Vec<usize> = nodes.into_iter().collect();
        order.extend(edges.iter().flat_map(|&(a, b)| [a, b]));
        order.sort_unstable();
        order.dedup();
        let index: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let n = order.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            let (ia, ib) = (index[&a], index[&b]);
            adj[ia].push(ib);
            if !directed {
                adj[ib].push(ia);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if row[v] == UNREACHABLE {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        Self {
            nodes: order,
            index,
            dist,
        }
    }

    /// Edges from the binary atoms of `pred` true in the initial state,
    /// first argument to second.
    pub fn from_links(task: &GroundTask, pred: usize, directed: bool) -> Self {
        let edges: Vec<(usize, usize)> = task
            .init
            .atoms()
            .map(|a| &task.atoms[a])
            .filter(|a| a.predicate == pred && a.args.len() >= 2)
            .map(|a| (a.args[0], a.args[1]))
            .collect();
        Self::from_edges([], &edges, directed)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Hop count, or `None` if `to` is unreachable from `from`.
    pub fn hops(&self, from: usize, to: usize) -> Option<u32> {
        if from == to {
            return Some(0);
        }
        let (&i, &j) = (self.index.get(&from)?, self.index.get(&to)?);
        match self.dist[i * self.nodes.len() + j] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// Hop count as a heuristic value, infinite if unreachable.
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.hops(from, to).map_or(f64::INFINITY, f64::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let t = DistanceTable::from_edges([], &[(0, 1), (1, 2)], false);
        assert_eq!(t.hops(0, 2), Some(2));
        assert_eq!(t.hops(2, 0), Some(2));
        assert_eq!(t.hops(1, 1), Some(0));
    }

    #[test]
    fn single_node() {
        let t = DistanceTable::from_edges([7], &[], false);
        assert_eq!(t.nodes(), &[7]);
        assert_eq!(t.hops(7, 7), Some(0));
    }

    #[test]
    fn disconnected_components() {
        let t = DistanceTable::from_edges([], &[(0, 1), (2, 3)], false);
        assert_eq!(t.hops(0, 3), None);
        assert!(t.get(1, 2).is_infinite());
        assert_eq!(t.get(2, 3), 1.0);
    }

    #[test]
    fn directed_edges_are_one_way() {
        let t = DistanceTable::from_edges([], &[(0, 1), (1, 2)], true);
        assert_eq!(t.hops(0, 2), Some(2));
        assert_eq!(t.hops(2, 0), None);
    }

    #[test]
    fn unknown_nodes() {
        let t = DistanceTable::from_edges([], &[(0, 1)], false);
        assert_eq!(t.hops(5, 5), Some(0));
        assert_eq!(t.hops(5, 0), None);
    }
}
