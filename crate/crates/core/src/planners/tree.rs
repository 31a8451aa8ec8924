use nalgebra::DVector;

/// Rooted tree of configurations; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<DVector<f64>>,
    parent: Vec<Option<usize>>,
    /// End-effector positions, filled only by the task-space planners.
    end_effector: Vec<Option<DVector<f64>>>,
}

impl Tree {
    pub fn new(root: DVector<f64>) -> Self {
        Tree {
            nodes: vec![root],
            parent: vec![None],
            end_effector: vec![None],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &DVector<f64> {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[DVector<f64>] {
        &self.nodes
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn end_effector(&self, i: usize) -> Option<&DVector<f64>> {
        self.end_effector[i].as_ref()
    }

    pub fn add(&mut self, q: DVector<f64>, parent: usize) -> usize {
        self.nodes.push(q);
        self.parent.push(Some(parent));
        self.end_effector.push(None);
        self.nodes.len() - 1
    }

    pub(crate) fn set_end_effector(&mut self, i: usize, x: DVector<f64>) {
        self.end_effector[i] = Some(x);
    }

    /// Edges as `(parent, child)` pairs in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(c, p)| p.map(|p| (p, c)))
    }

    /// Configurations from the root down to `i`.
    pub fn path_from_root(&self, i: usize) -> Vec<DVector<f64>> {
        let mut path = vec![self.nodes[i].clone()];
        let mut cur = i;
        while let Some(p) = self.parent[cur] {
            path.push(self.nodes[p].clone());
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn nearest(&self, q: &DVector<f64>) -> usize {
        nearest_neighbor(self, q)
    }
}

/// Index of the node closest to `q` in Euclidean distance; ties go to the
/// lowest index.
pub fn nearest_neighbor(tree: &Tree, q: &DVector<f64>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, n) in tree.nodes.iter().enumerate() {
        let d: f64 = n.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Moves from `q_near` toward `q_target` by at most `delta`.
pub fn straight_line_steer(q_near: &DVector<f64>, q_target: &DVector<f64>, delta: f64) -> DVector<f64> {
    let diff = q_target - q_near;
    let dist = diff.norm();
    if dist <= delta {
        q_target.clone()
    } else {
        q_near + diff * (delta / dist)
    }
}
