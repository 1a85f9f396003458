//! Static k-d tree with exact k-nearest-neighbour queries.

use nalgebra::Vector3;

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Neighbour returned by a query: index into the indexed slice plus squared distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl Neighbor {
    /// Total order: distance first, then index (insertion order).
    fn key(&self) -> (f64, usize) {
        (self.dist2, self.index)
    }

    fn before(&self, other: &Neighbor) -> bool {
        self.key() < other.key()
    }
}

#[derive(Clone, Debug, Default)]
pub struct KdTree {
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[Vector3<f64>]) -> Self {
        let mut tree = KdTree {
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build_node(points, 0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn build_node(&mut self, points: &[Vector3<f64>], start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &self.order[start..end];
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for &i in slice {
            lo = lo.inf(&points[i]);
            hi = hi.sup(&points[i]);
        }
        let axis = (hi - lo).imax();
        let mid = (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            points[a][axis]
                .total_cmp(&points[b][axis])
                .then(a.cmp(&b))
        });
        let value = points[self.order[start + mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(points, start, start + mid);
        let right = self.build_node(points, start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest points sorted by `(distance, index)`.
    ///
    /// `points` must be the slice the tree was built from.
    pub fn knn(&self, points: &[Vector3<f64>], query: &Vector3<f64>, k: usize) -> Vec<Neighbor> {
        let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
        if k == 0 || self.nodes.is_empty() {
            return best;
        }
        self.search(0, points, query, k, &mut best);
        best
    }

    fn search(
        &self,
        node: usize,
        points: &[Vector3<f64>],
        query: &Vector3<f64>,
        k: usize,
        best: &mut Vec<Neighbor>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor {
                        index: i,
                        dist2: (points[i] - query).norm_squared(),
                    };
                    offer(best, cand, k);
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, points, query, k, best);
                // Points equal to the split value can sit on either side, so
                // ties with the current worst distance are still explored.
                if best.len() < k || diff * diff <= best[best.len() - 1].dist2 {
                    self.search(far, points, query, k, best);
                }
            }
        }
    }
}

/// Inserts `cand` into the sorted candidate list, keeping at most `k` entries.
pub(crate) fn offer(best: &mut Vec<Neighbor>, cand: Neighbor, k: usize) {
    if best.len() == k && !cand.before(&best[k - 1]) {
        return;
    }
    let pos = best.partition_point(|n| n.before(&cand));
    best.insert(pos, cand);
    best.truncate(k);
}
