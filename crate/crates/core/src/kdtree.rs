//! Static kd-tree answering closed-ball range queries and nearest-point
//! lookups.
//!
//! Splits are at the median of the axis with the largest coordinate spread,
//! with ties ordered by original index, so a build is a pure function of the
//! input order. Leaves hold at most [`BUCKET_SIZE`] points and are scanned
//! linearly.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{squared_distance, PointSet};

pub const BUCKET_SIZE: usize = 16;

// Pruning bounds are accumulated incrementally, so allow a few ulps before
// discarding a cell. Membership itself is decided by the exact per-point test.
const PRUNE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Counters collected during a single query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub nodes_visited: usize,
}

#[derive(Clone, Debug)]
pub struct KdTree {
    points: PointSet,
    indices: Vec<usize>,
    nodes: Vec<Node>,
    root: usize,
}

impl KdTree {
    pub fn build(points: PointSet) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("kd-tree needs at least one point"));
        }
        let mut tree = Self {
            indices: (0..points.len()).collect(),
            nodes: Vec::with_capacity(2 * points.len() / BUCKET_SIZE + 1),
            points,
            root: 0,
        };
        tree.root = tree.build_range(0, tree.points.len());
        Ok(tree)
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        let count = end - start;
        if count <= BUCKET_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }

        let dim = self.points.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.indices[start..end] {
            for (k, &c) in self.points.get(i).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let mut axis = 0;
        for k in 1..dim {
            if hi[k] - lo[k] > hi[axis] - lo[axis] {
                axis = k;
            }
        }

        let points = &self.points;
        let mid = count / 2;
        self.indices[start..end].select_nth_unstable_by(mid, |&a, &b| {
            points.get(a)[axis]
                .total_cmp(&points.get(b)[axis])
                .then(a.cmp(&b))
        });
        let value = self.points.get(self.indices[start + mid])[axis];

        let left = self.build_range(start, start + mid);
        let right = self.build_range(start + mid, end);
        self.nodes.push(Node::Split {
            axis,
            value,
            left,
            right,
        });
        self.nodes.len() - 1
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Length of the longest root-to-leaf path, counting nodes.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, self.root)
    }

    /// Point indices in left-to-right leaf order.
    pub fn leaf_order(&self) -> &[usize] {
        &self.indices
    }

    fn check_query(&self, center: &[f64], radius: f64) -> Result<()> {
        if center.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: center.len(),
            });
        }
        if !(radius >= 0.0) {
            return Err(Error::NegativeRadius(radius));
        }
        Ok(())
    }

    /// Indices of all points with `‖p − center‖ ≤ radius`, ascending.
    pub fn range_query(&self, center: &[f64], radius: f64) -> Result<Vec<usize>> {
        self.range_query_with_stats(center, radius).map(|(found, _)| found)
    }

    pub fn range_query_with_stats(&self, center: &[f64], radius: f64) -> Result<(Vec<usize>, QueryStats)> {
        self.check_query(center, radius)?;
        let mut found = Vec::new();
        let mut stats = QueryStats::default();
        let mut offsets = vec![0.0; self.dim()];
        self.search(self.root, center, radius * radius, 0.0, &mut offsets, &mut found, &mut stats);
        found.sort_unstable();
        Ok((found, stats))
    }

    /// `cell_dist2` is a lower bound on the squared distance from `center` to
    /// the cell of `node`; `offsets[k]` is the per-axis gap that contributes
    /// to it.
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        node: usize,
        center: &[f64],
        r2: f64,
        cell_dist2: f64,
        offsets: &mut [f64],
        found: &mut Vec<usize>,
        stats: &mut QueryStats,
    ) {
        stats.nodes_visited += 1;
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                found.extend(
                    self.indices[start..end]
                        .iter()
                        .copied()
                        .filter(|&i| squared_distance(self.points.get(i), center) <= r2),
                );
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = center[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, center, r2, cell_dist2, offsets, found, stats);

                let old = offsets[axis];
                let far_dist2 = cell_dist2 - old * old + diff * diff;
                if far_dist2 <= r2 * (1.0 + PRUNE_SLACK) {
                    offsets[axis] = diff;
                    self.search(far, center, r2, far_dist2, offsets, found, stats);
                    offsets[axis] = old;
                }
            }
        }
    }

    /// Closest point to `query` as `(index, distance)`; ties go to the lower
    /// index.
    pub fn nearest(&self, query: &[f64]) -> Result<(usize, f64)> {
        if query.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: query.len(),
            });
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_in(self.root, query, &mut best);
        Ok((best.0, best.1.sqrt()))
    }

    fn nearest_in(&self, node: usize, query: &[f64], best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.indices[start..end] {
                    let d2 = squared_distance(self.points.get(i), query);
                    match d2.total_cmp(&best.1) {
                        Ordering::Less => *best = (i, d2),
                        Ordering::Equal if i < best.0 => *best = (i, d2),
                        _ => {}
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_in(near, query, best);
                if diff * diff <= best.1 {
                    self.nearest_in(far, query, best);
                }
            }
        }
    }
}
