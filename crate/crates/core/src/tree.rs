//! Finite vertex-labeled trees and the combinatorial operations on them.

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::BigRational;

use crate::label::Label;
use crate::vertex::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("tree has no vertices")]
    Empty,
    #[error("edge {{{0}, {1}}} closes a cycle")]
    CycleDetected(VertexId, VertexId),
    #[error("vertex {0} is not connected to {1}")]
    Disconnected(VertexId, VertexId),
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("edge {{{0}, {1}}} listed twice")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {0} has no label")]
    MissingLabel(VertexId),
    #[error("vertex {0} labeled more than once")]
    DuplicateLabel(VertexId),
    #[error("vertex {0} has negative label {1}")]
    NegativeLabel(VertexId, String),
    #[error("frontier vertex {0} is not in the tree")]
    UnknownFrontier(VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("path endpoints coincide at {0}")]
    SameVertex(VertexId),
    #[error("vertex set is empty")]
    EmptySet,
    #[error("operation needs at least two vertices")]
    SingletonTree,
}

/// An edge `{u, v}` reported with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Edge(pub VertexId, pub VertexId);

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}, {}}}", self.0, self.1)
    }
}

/// A validated finite tree with an exact label on every vertex.
///
/// Vertices are stored sorted by id, so position 0 is the minimal vertex.
/// The tree is immutable once built.
#[derive(Debug, Clone)]
pub struct LabeledTree {
    ids: Vec<VertexId>,
    position: HashMap<VertexId, usize>,
    adj: Vec<Vec<usize>>,
    labels: Vec<Label>,
    frontier: Vec<bool>,
}

/// The unique path between two distinct vertices, endpoints included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub vertices: Vec<VertexId>,
}

impl Path {
    pub fn reversed(&self) -> Path {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Path { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Components of `T - v`, ordered by their minimal vertex.
#[derive(Debug, Clone)]
pub struct Forest {
    pub components: Vec<LabeledTree>,
}

impl Forest {
    pub fn vertex_count(&self) -> usize {
        self.components.iter().map(LabeledTree::len).sum()
    }

    /// Index of the component holding `v`.
    pub fn component_of(&self, v: &VertexId) -> Option<usize> {
        self.components.iter().position(|c| c.contains(v))
    }
}

/// Degree in the materialized tree. `frontier` means the generating tree may
/// have more neighbors than were materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degree {
    pub count: usize,
    pub frontier: bool,
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

impl LabeledTree {
    /// Validates and builds a tree. The vertex set is the set of labeled
    /// vertices together with all edge endpoints.
    pub fn build<E, L>(edges: E, labels: L) -> Result<Self, TreeError>
    where
        E: IntoIterator<Item = (VertexId, VertexId)>,
        L: IntoIterator<Item = (VertexId, BigRational)>,
    {
        Self::build_with_frontier(edges, labels, std::iter::empty())
    }

    pub fn build_with_frontier<E, L, F>(edges: E, labels: L, frontier: F) -> Result<Self, TreeError>
    where
        E: IntoIterator<Item = (VertexId, VertexId)>,
        L: IntoIterator<Item = (VertexId, BigRational)>,
        F: IntoIterator<Item = VertexId>,
    {
        let mut label_map: HashMap<VertexId, Label> = HashMap::new();
        for (v, value) in labels {
            let label =
                Label::new(value.clone()).map_err(|_| TreeError::NegativeLabel(v.clone(), value.to_string()))?;
            if label_map.insert(v.clone(), label).is_some() {
                return Err(TreeError::DuplicateLabel(v));
            }
        }
        let edges: Vec<(VertexId, VertexId)> = edges.into_iter().collect();
        let mut seen = HashSet::new();
        for (a, b) in &edges {
            if a == b {
                return Err(TreeError::SelfLoop(a.clone()));
            }
            let e = Edge::new(a.clone(), b.clone());
            if !seen.insert(e.clone()) {
                return Err(TreeError::DuplicateEdge(e.0, e.1));
            }
        }

        let mut ids: Vec<VertexId> = label_map.keys().cloned().collect();
        for (a, b) in &edges {
            for v in [a, b] {
                if !label_map.contains_key(v) {
                    return Err(TreeError::MissingLabel(v.clone()));
                }
            }
        }
        if ids.is_empty() {
            return Err(TreeError::Empty);
        }
        ids.sort_unstable();
        let position: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();

        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        let mut sets = DisjointSets::new(n);
        for (a, b) in &edges {
            let (i, j) = (position[a], position[b]);
            if !sets.union(i, j) {
                let e = Edge::new(a.clone(), b.clone());
                return Err(TreeError::CycleDetected(e.0, e.1));
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        let root = sets.find(0);
        for i in 1..n {
            if sets.find(i) != root {
                return Err(TreeError::Disconnected(ids[i].clone(), ids[0].clone()));
            }
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }

        let mut frontier_flags = vec![false; n];
        for v in frontier {
            let i = *position.get(&v).ok_or(TreeError::UnknownFrontier(v))?;
            frontier_flags[i] = true;
        }
        let labels = ids.iter().map(|v| label_map.remove(v).expect("labeled")).collect();
        Ok(LabeledTree {
            ids,
            position,
            adj,
            labels,
            frontier: frontier_flags,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Always false: a tree has at least one vertex.
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Vertex ids in ascending order.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.position.contains_key(v)
    }

    pub fn position(&self, v: &VertexId) -> Option<usize> {
        self.position.get(v).copied()
    }

    pub(crate) fn require(&self, v: &VertexId) -> Result<usize, TreeError> {
        self.position(v).ok_or_else(|| TreeError::UnknownVertex(v.clone()))
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.ids[i]
    }

    pub fn label(&self, v: &VertexId) -> Option<&Label> {
        self.position(v).map(|i| &self.labels[i])
    }

    pub fn label_at(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn neighbors_at(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn is_frontier(&self, v: &VertexId) -> bool {
        self.position(v).is_some_and(|i| self.frontier[i])
    }

    pub fn frontier_at(&self, i: usize) -> bool {
        self.frontier[i]
    }

    pub fn frontier(&self) -> impl Iterator<Item = &VertexId> {
        self.ids.iter().zip(&self.frontier).filter(|(_, f)| **f).map(|(v, _)| v)
    }

    /// Edges with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.len()).flat_map(move |i| {
            self.adj[i]
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| Edge(self.ids[i].clone(), self.ids[j].clone()))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// `Err` carries the smallest edge whose endpoints are both labeled 0.
    pub fn check_nondegenerate(&self) -> Result<(), Edge> {
        for i in 0..self.len() {
            if !self.labels[i].is_zero() {
                continue;
            }
            if let Some(&j) = self.adj[i].iter().find(|&&j| j > i && self.labels[j].is_zero()) {
                return Err(Edge(self.ids[i].clone(), self.ids[j].clone()));
            }
        }
        Ok(())
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.check_nondegenerate().is_ok()
    }

    /// Parent pointers of a breadth-first search from `root`.
    pub(crate) fn bfs_parents(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    queue.push_back(y);
                }
            }
        }
        parent
    }

    fn path_positions(&self, u: usize, v: usize) -> Vec<usize> {
        let parent = self.bfs_parents(v);
        let mut out = vec![u];
        let mut x = u;
        while let Some(p) = parent[x] {
            out.push(p);
            x = p;
        }
        out
    }

    pub fn path_between(&self, u: &VertexId, v: &VertexId) -> Result<Path, TreeError> {
        let (i, j) = (self.require(u)?, self.require(v)?);
        if i == j {
            return Err(TreeError::SameVertex(u.clone()));
        }
        let vertices = self
            .path_positions(i, j)
            .into_iter()
            .map(|k| self.ids[k].clone())
            .collect();
        Ok(Path { vertices })
    }

    /// The defining formula of the tree distance, applied directly: `0` when
    /// `u = v`, otherwise the maximum label on the path. No non-degeneracy is
    /// assumed, so this can return `0` for distinct vertices.
    pub fn raw_path_max(&self, u: &VertexId, v: &VertexId) -> Result<Label, TreeError> {
        let (i, j) = (self.require(u)?, self.require(v)?);
        if i == j {
            return Ok(Label::zero());
        }
        Ok(self
            .path_positions(i, j)
            .into_iter()
            .map(|k| &self.labels[k])
            .max()
            .expect("path is nonempty")
            .clone())
    }

    /// Minimal subtree containing `set`, built from the anchor `min(set)`.
    pub fn convex_hull<'a, I>(&self, set: I) -> Result<LabeledTree, TreeError>
    where
        I: IntoIterator<Item = &'a VertexId>,
    {
        let members = self.resolve_set(set)?;
        let anchor = *members.iter().min().expect("nonempty");
        Ok(self.induced(&self.hull_positions(&members, anchor)))
    }

    /// Union of the paths `P[anchor, v]` for `v` in `set`.
    pub fn convex_hull_from<'a, I>(&self, set: I, anchor: &VertexId) -> Result<LabeledTree, TreeError>
    where
        I: IntoIterator<Item = &'a VertexId>,
    {
        let members = self.resolve_set(set)?;
        let a = self.require(anchor)?;
        if !members.contains(&a) {
            return Err(TreeError::UnknownVertex(anchor.clone()));
        }
        Ok(self.induced(&self.hull_positions(&members, a)))
    }

    fn resolve_set<'a, I>(&self, set: I) -> Result<Vec<usize>, TreeError>
    where
        I: IntoIterator<Item = &'a VertexId>,
    {
        let mut members = Vec::new();
        for v in set {
            members.push(self.require(v)?);
        }
        if members.is_empty() {
            return Err(TreeError::EmptySet);
        }
        members.sort_unstable();
        members.dedup();
        Ok(members)
    }

    pub(crate) fn hull_positions(&self, members: &[usize], anchor: usize) -> Vec<bool> {
        let parent = self.bfs_parents(anchor);
        let mut keep = vec![false; self.len()];
        keep[anchor] = true;
        for &m in members {
            let mut x = m;
            while !keep[x] {
                keep[x] = true;
                x = parent[x].expect("connected");
            }
        }
        keep
    }

    /// Subtree induced by a connected set of positions.
    pub(crate) fn induced(&self, keep: &[bool]) -> LabeledTree {
        let ids: Vec<VertexId> = (0..self.len())
            .filter(|&i| keep[i])
            .map(|i| self.ids[i].clone())
            .collect();
        let position: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
        let old: Vec<usize> = (0..self.len()).filter(|&i| keep[i]).collect();
        let adj = old
            .iter()
            .map(|&i| {
                self.adj[i]
                    .iter()
                    .filter(|&&j| keep[j])
                    .map(|&j| position[&self.ids[j]])
                    .collect()
            })
            .collect();
        LabeledTree {
            labels: old.iter().map(|&i| self.labels[i].clone()).collect(),
            frontier: old.iter().map(|&i| self.frontier[i]).collect(),
            ids,
            position,
            adj,
        }
    }

    pub fn remove_vertex(&self, v: &VertexId) -> Result<Forest, TreeError> {
        let x = self.require(v)?;
        if self.len() < 2 {
            return Err(TreeError::SingletonTree);
        }
        let mut comp = vec![usize::MAX; self.len()];
        let mut components = Vec::new();
        // neighbors are sorted, but the minimal vertex of a component need
        // not be the neighbor itself, so sort afterwards
        for (c, &start) in self.adj[x].iter().enumerate() {
            let mut keep = vec![false; self.len()];
            let mut stack = vec![start];
            comp[start] = c;
            while let Some(y) = stack.pop() {
                keep[y] = true;
                for &z in &self.adj[y] {
                    if z != x && comp[z] == usize::MAX {
                        comp[z] = c;
                        stack.push(z);
                    }
                }
            }
            components.push(self.induced(&keep));
        }
        components.sort_by(|a, b| a.ids[0].cmp(&b.ids[0]));
        Ok(Forest { components })
    }

    pub fn degree(&self, v: &VertexId) -> Result<Degree, TreeError> {
        let i = self.require(v)?;
        Ok(Degree {
            count: self.adj[i].len(),
            frontier: self.frontier[i],
        })
    }

    pub fn max_label(&self) -> &Label {
        self.labels.iter().max().expect("nonempty")
    }

    /// Vertices whose label equals `value` exactly.
    pub fn level_set(&self, value: &Label) -> Vec<VertexId> {
        self.ids
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| *l == value)
            .map(|(v, _)| v.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn v(n: u64) -> VertexId {
        VertexId::Int(n)
    }

    fn tree(edges: &[(u64, u64)], labels: &[(u64, i64)]) -> Result<LabeledTree, TreeError> {
        LabeledTree::build(
            edges.iter().map(|&(a, b)| (v(a), v(b))),
            labels.iter().map(|&(a, l)| (v(a), q(l))),
        )
    }

    fn path_graph(n: u64) -> LabeledTree {
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        let labels: Vec<_> = (1..=n).map(|i| (i, 1)).collect();
        tree(&edges, &labels).unwrap()
    }

    #[test]
    fn build_accepts_a_three_path() {
        let t = tree(&[(1, 2), (2, 3)], &[(1, 1), (2, 0), (3, 1)]).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.edge_count(), 2);
    }

    #[test]
    fn build_rejects_malformed_inputs() {
        let l3 = [(1, 1), (2, 1), (3, 1)];
        assert_eq!(
            tree(&[(1, 2), (2, 3), (3, 1)], &l3).unwrap_err(),
            TreeError::CycleDetected(v(1), v(3))
        );
        let l4 = [(1, 1), (2, 1), (3, 1), (4, 1)];
        assert!(matches!(
            tree(&[(1, 2), (3, 4)], &l4),
            Err(TreeError::Disconnected(_, _))
        ));
        assert_eq!(tree(&[(1, 1)], &l3).unwrap_err(), TreeError::SelfLoop(v(1)));
        assert_eq!(
            tree(&[(1, 2), (2, 1)], &l3).unwrap_err(),
            TreeError::DuplicateEdge(v(1), v(2))
        );
        assert_eq!(tree(&[(1, 2), (2, 5)], &l3).unwrap_err(), TreeError::MissingLabel(v(5)));
        assert!(matches!(
            tree(&[(1, 2)], &[(1, 1), (2, -1)]),
            Err(TreeError::NegativeLabel(x, _)) if x == v(2)
        ));
        assert_eq!(tree(&[], &[]).unwrap_err(), TreeError::Empty);
    }

    #[test]
    fn nondegeneracy_verdicts() {
        let ok = tree(&[(1, 2), (2, 3)], &[(1, 1), (2, 0), (3, 1)]).unwrap();
        assert!(ok.check_nondegenerate().is_ok());
        let bad = tree(&[(1, 2), (2, 3)], &[(1, 0), (2, 0), (3, 1)]).unwrap();
        assert_eq!(bad.check_nondegenerate().unwrap_err(), Edge(v(1), v(2)));
        let single = tree(&[], &[(1, 0)]).unwrap();
        assert!(single.check_nondegenerate().is_ok());
    }

    #[test]
    fn paths_in_path_and_star() {
        let p = path_graph(4);
        assert_eq!(
            p.path_between(&v(1), &v(4)).unwrap().vertices,
            vec![v(1), v(2), v(3), v(4)]
        );
        let star = LabeledTree::build(
            [("c".into(), "a".into()), ("c".into(), "b".into())],
            ["a", "b", "c"].map(|s| (VertexId::from(s), q(1))),
        )
        .unwrap();
        let path = star.path_between(&"a".into(), &"b".into()).unwrap();
        assert_eq!(path.vertices, vec!["a".into(), "c".into(), "b".into()]);
        assert_eq!(p.path_between(&v(2), &v(2)).unwrap_err(), TreeError::SameVertex(v(2)));
        assert_eq!(
            p.path_between(&v(2), &v(9)).unwrap_err(),
            TreeError::UnknownVertex(v(9))
        );
    }

    #[test]
    fn hulls_on_a_path() {
        let p = path_graph(5);
        assert_eq!(p.convex_hull(&[v(1), v(5)]).unwrap().len(), 5);
        let inner = p.convex_hull(&[v(2), v(4)]).unwrap();
        assert_eq!(inner.ids(), &[v(2), v(3), v(4)]);
        assert_eq!(inner.edge_count(), 2);
        assert_eq!(p.convex_hull(&[v(3)]).unwrap().ids(), &[v(3)]);
        assert_eq!(p.convex_hull(std::iter::empty()).unwrap_err(), TreeError::EmptySet);
        assert_eq!(p.convex_hull(&[v(7)]).unwrap_err(), TreeError::UnknownVertex(v(7)));
    }

    #[test]
    fn removing_vertices_splits_by_degree() {
        let p = path_graph(3);
        let f = p.remove_vertex(&v(2)).unwrap();
        assert_eq!(f.components.len(), 2);
        assert!(f.components.iter().all(|c| c.len() == 1));
        let star = tree(
            &[(0, 1), (0, 2), (0, 3), (0, 4)],
            &[(0, 0), (1, 1), (2, 1), (3, 1), (4, 1)],
        )
        .unwrap();
        let f = star.remove_vertex(&v(0)).unwrap();
        assert_eq!(f.components.len(), 4);
        assert_eq!(f.vertex_count(), 4);
        let single = tree(&[], &[(1, 1)]).unwrap();
        assert_eq!(single.remove_vertex(&v(1)).unwrap_err(), TreeError::SingletonTree);
    }

    #[test]
    fn degrees() {
        let p = path_graph(3);
        assert_eq!(
            p.degree(&v(2)).unwrap(),
            Degree {
                count: 2,
                frontier: false
            }
        );
        assert_eq!(p.degree(&v(1)).unwrap().count, 1);
        assert!(p.degree(&v(8)).is_err());
    }

    #[test]
    fn raw_formula_exposes_degenerate_pairs() {
        let bad = tree(&[(1, 2), (2, 3)], &[(1, 0), (2, 0), (3, 1)]).unwrap();
        assert!(bad.raw_path_max(&v(1), &v(2)).unwrap().is_zero());
        assert_eq!(bad.raw_path_max(&v(1), &v(3)).unwrap(), Label::one());
    }
}
