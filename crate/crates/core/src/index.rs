//! Ultrametric distance queries over a labeled tree.
//!
//! The distance between distinct vertices is the largest label on the path
//! joining them. [`UltrametricIndex`] answers it with binary lifting: every
//! vertex stores its `2^k`-th ancestor together with the largest label rank
//! on the way there, so a query costs `O(log n)` after `O(n log n)` setup.
//! Labels are replaced by their rank among the distinct label values during
//! the lifting; ranks are order-isomorphic to labels, so nothing is rounded.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::label::{Label, Radius};
use crate::tree::{Edge, LabeledTree, TreeError};
use crate::vertex::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("labeling is degenerate on edge {0}: both endpoints are labeled 0")]
    DegenerateLabeling(Edge),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("operation needs at least two vertices")]
    SingletonTree,
    #[error("cluster mass must be at least 2, got {0}")]
    InvalidMass(usize),
}

impl From<TreeError> for IndexError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::UnknownVertex(v) => IndexError::UnknownVertex(v),
            TreeError::SingletonTree => IndexError::SingletonTree,
            other => unreachable!("index operations do not raise {other}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UltrametricIndex {
    tree: LabeledTree,
    /// distinct label values in ascending order, always containing zero
    values: Vec<Label>,
    rank: Vec<u32>,
    depth: Vec<u32>,
    up: Vec<Vec<u32>>,
    up_max: Vec<Vec<u32>>,
    zero_rank: u32,
}

/// Open ball `{x : d(center, x) < radius}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ball {
    pub center: VertexId,
    pub radius: Radius,
    pub members: Vec<VertexId>,
}

/// Partition of the vertex set into open balls of one radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub radius: Radius,
    pub blocks: Vec<Ball>,
}

impl Cover {
    pub fn covering_number(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, v: &VertexId) -> Option<usize> {
        self.blocks.iter().position(|b| b.members.binary_search(v).is_ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub block: Ball,
    pub diameter: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterReport {
    pub epsilon: Radius,
    pub mass: usize,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxiomKind {
    Identity,
    Symmetry,
    StrongTriangle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub kind: AxiomKind,
    pub vertices: Vec<VertexId>,
    pub distances: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriangleReport {
    pub exhaustive: bool,
    pub triples_checked: u64,
    pub violations: Vec<AxiomViolation>,
}

/// Trees up to this size are checked on every triple.
pub const EXHAUSTIVE_TRIPLE_LIMIT: usize = 60;

impl UltrametricIndex {
    /// Refuses degenerate labelings: with an edge labeled `0`–`0` the
    /// path-maximum formula is not a metric.
    pub fn build(tree: LabeledTree) -> Result<Self, IndexError> {
        tree.check_nondegenerate().map_err(IndexError::DegenerateLabeling)?;
        let n = tree.len();

        let mut values: Vec<Label> = tree.labels().to_vec();
        values.push(Label::zero());
        values.sort_unstable();
        values.dedup();
        let rank: Vec<u32> = tree
            .labels()
            .iter()
            .map(|l| values.binary_search(l).expect("present") as u32)
            .collect();
        let zero_rank = 0;

        // root is position 0, the minimal vertex id
        let mut parent = vec![0u32; n];
        let mut depth = vec![0u32; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &y in tree.neighbors_at(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x as u32;
                    depth[y] = depth[x] + 1;
                    queue.push_back(y);
                }
            }
        }

        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut up = vec![parent];
        let mut up_max = vec![rank.clone()];
        for k in 1..levels {
            let (prev, prev_max) = (&up[k - 1], &up_max[k - 1]);
            let next: Vec<u32> = (0..n).map(|v| prev[prev[v] as usize]).collect();
            let next_max: Vec<u32> = (0..n).map(|v| prev_max[v].max(prev_max[prev[v] as usize])).collect();
            up.push(next);
            up_max.push(next_max);
        }

        Ok(UltrametricIndex {
            tree,
            values,
            rank,
            depth,
            up,
            up_max,
            zero_rank,
        })
    }

    pub fn tree(&self) -> &LabeledTree {
        &self.tree
    }

    pub fn root(&self) -> &VertexId {
        self.tree.id(0)
    }

    pub fn depth(&self, v: &VertexId) -> Result<u32, IndexError> {
        Ok(self.depth[self.tree.require(v)?])
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Rank of `d(i, j)` among the distinct label values.
    pub(crate) fn distance_rank(&self, i: usize, j: usize) -> u32 {
        if i == j {
            return self.zero_rank;
        }
        let (mut a, mut b) = (i, j);
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut best = 0u32;
        let mut diff = self.depth[a] - self.depth[b];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                best = best.max(self.up_max[k][a]);
                a = self.up[k][a] as usize;
            }
            diff >>= 1;
            k += 1;
        }
        if a == b {
            return best.max(self.rank[a]);
        }
        for k in (0..self.up.len()).rev() {
            let (pa, pb) = (self.up[k][a], self.up[k][b]);
            if pa != pb {
                best = best.max(self.up_max[k][a]).max(self.up_max[k][b]);
                a = pa as usize;
                b = pb as usize;
            }
        }
        let lca = self.up[0][a] as usize;
        best.max(self.rank[a]).max(self.rank[b]).max(self.rank[lca])
    }

    pub fn distance_at(&self, i: usize, j: usize) -> &Label {
        &self.values[self.distance_rank(i, j) as usize]
    }

    pub fn distance(&self, u: &VertexId, v: &VertexId) -> Result<&Label, IndexError> {
        let (i, j) = (self.tree.require(u)?, self.tree.require(v)?);
        Ok(self.distance_at(i, j))
    }

    /// Checks identity, symmetry and the strong triangle inequality. Trees
    /// with at most [`EXHAUSTIVE_TRIPLE_LIMIT`] vertices are checked on all
    /// ordered triples; larger ones on `samples` seeded random triples.
    pub fn verify_strong_triangle(&self, samples: u64, seed: u64) -> TriangleReport {
        let n = self.len();
        let mut violations = Vec::new();
        let check = |x: usize, y: usize, z: usize, violations: &mut Vec<AxiomViolation>| {
            let dxy = self.distance_rank(x, y);
            let dyx = self.distance_rank(y, x);
            let dxz = self.distance_rank(x, z);
            let dzy = self.distance_rank(z, y);
            let ids = || {
                vec![
                    self.tree.id(x).clone(),
                    self.tree.id(y).clone(),
                    self.tree.id(z).clone(),
                ]
            };
            let vals = |r: &[u32]| r.iter().map(|&k| self.values[k as usize].clone()).collect();
            if (dxy == self.zero_rank) != (x == y) {
                violations.push(AxiomViolation {
                    kind: AxiomKind::Identity,
                    vertices: ids(),
                    distances: vals(&[dxy]),
                });
            }
            if dxy != dyx {
                violations.push(AxiomViolation {
                    kind: AxiomKind::Symmetry,
                    vertices: ids(),
                    distances: vals(&[dxy, dyx]),
                });
            }
            if dxy > dxz.max(dzy) {
                violations.push(AxiomViolation {
                    kind: AxiomKind::StrongTriangle,
                    vertices: ids(),
                    distances: vals(&[dxy, dxz, dzy]),
                });
            }
        };
        if n <= EXHAUSTIVE_TRIPLE_LIMIT {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        check(x, y, z, &mut violations);
                    }
                }
            }
            TriangleReport {
                exhaustive: true,
                triples_checked: (n as u64).pow(3),
                violations,
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let (x, y, z) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                check(x, y, z, &mut violations);
            }
            TriangleReport {
                exhaustive: false,
                triples_checked: samples,
                violations,
            }
        }
    }

    /// Positions reachable from `start` through vertices labeled below `r`.
    fn low_component(&self, start: usize, r: &Label, mark: &mut [bool]) -> Vec<usize> {
        let mut out = vec![start];
        mark[start] = true;
        if self.tree.label_at(start) >= r {
            return out;
        }
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in self.tree.neighbors_at(x) {
                if !mark[y] && self.tree.label_at(y) < r {
                    mark[y] = true;
                    out.push(y);
                    stack.push(y);
                }
            }
        }
        out
    }

    fn ball_from(&self, members: Vec<usize>, radius: &Radius) -> Ball {
        let mut members: Vec<VertexId> = members.into_iter().map(|i| self.tree.id(i).clone()).collect();
        members.sort_unstable();
        Ball {
            center: members[0].clone(),
            radius: radius.clone(),
            members,
        }
    }

    /// `B_r(c)`. A vertex `x != c` is inside iff every label on the path
    /// from `c` to `x` is below `r`, so the ball is grown by search.
    pub fn ball(&self, center: &VertexId, radius: &Radius) -> Result<Ball, IndexError> {
        let c = self.tree.require(center)?;
        let mut mark = vec![false; self.len()];
        let members = self.low_component(c, radius.label(), &mut mark);
        let mut ball = self.ball_from(members, radius);
        ball.center = center.clone();
        Ok(ball)
    }

    /// Classes of the equivalence `d(u, v) < r`, each reported as a ball
    /// centered at its minimal vertex, in ascending order of centers. In an
    /// ultrametric the class count is the covering number `N(r)`.
    pub fn partition_at_scale(&self, radius: &Radius) -> Cover {
        let mut mark = vec![false; self.len()];
        let mut blocks = Vec::new();
        for i in 0..self.len() {
            if !mark[i] {
                let members = self.low_component(i, radius.label(), &mut mark);
                blocks.push(self.ball_from(members, radius));
            }
        }
        blocks.sort_by(|a, b| a.center.cmp(&b.center));
        Cover {
            radius: radius.clone(),
            blocks,
        }
    }

    /// Block number of every vertex position under `partition_at_scale`;
    /// block `b` is the `b`-th block of that cover.
    pub fn block_ids(&self, radius: &Radius) -> Vec<usize> {
        let mut mark = vec![false; self.len()];
        let mut ids = vec![usize::MAX; self.len()];
        let mut next = 0;
        for i in 0..self.len() {
            if !mark[i] {
                for j in self.low_component(i, radius.label(), &mut mark) {
                    ids[j] = next;
                }
                next += 1;
            }
        }
        ids
    }

    pub fn covering_number(&self, radius: &Radius) -> usize {
        let mut mark = vec![false; self.len()];
        (0..self.len())
            .filter(|&i| {
                let fresh = !mark[i];
                if fresh {
                    self.low_component(i, radius.label(), &mut mark);
                }
                fresh
            })
            .count()
    }

    /// `min_{x != v} d(v, x)`. The nearest vertex is always a neighbor, since
    /// every other path from `v` passes through one.
    pub fn isolation_radius(&self, v: &VertexId) -> Result<Label, IndexError> {
        let i = self.tree.require(v)?;
        if self.len() < 2 {
            return Err(IndexError::SingletonTree);
        }
        Ok(self
            .tree
            .neighbors_at(i)
            .iter()
            .map(|&j| self.distance_at(i, j))
            .min()
            .expect("connected tree with two vertices")
            .clone())
    }

    /// Blocks of `partition_at_scale(epsilon)` with at least `mass` members,
    /// with their diameters.
    pub fn epsilon_clusters(&self, epsilon: &Radius, mass: usize) -> Result<ClusterReport, IndexError> {
        if mass < 2 {
            return Err(IndexError::InvalidMass(mass));
        }
        let clusters = self
            .partition_at_scale(epsilon)
            .blocks
            .into_iter()
            .filter(|b| b.members.len() >= mass)
            .map(|block| {
                // a block with two or more members is a subtree, and its
                // largest label lies on a path to any other member
                let diameter = block
                    .members
                    .iter()
                    .map(|v| self.tree.label(v).expect("member"))
                    .max()
                    .expect("nonempty")
                    .clone();
                Cluster { block, diameter }
            })
            .collect();
        Ok(ClusterReport {
            epsilon: epsilon.clone(),
            mass,
            clusters,
        })
    }
}

/// Cover rows as CSV with columns `radius,block_id,center,size`.
pub fn covers_to_csv<'a, I>(covers: I) -> String
where
    I: IntoIterator<Item = &'a Cover>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["radius", "block_id", "center", "size"])
        .expect("in-memory write");
    for cover in covers {
        for (k, b) in cover.blocks.iter().enumerate() {
            w.write_record([
                cover.radius.to_string(),
                k.to_string(),
                b.center.to_string(),
                b.members.len().to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn harmonic_path(n: u64) -> LabeledTree {
        LabeledTree::build(
            (1..n).map(|i| (VertexId::Int(i), VertexId::Int(i + 1))),
            (1..=n).map(|i| (VertexId::Int(i), BigRational::new(BigInt::from(1), BigInt::from(i)))),
        )
        .unwrap()
    }

    fn uniform_path(n: u64) -> LabeledTree {
        LabeledTree::build(
            (1..n).map(|i| (VertexId::Int(i), VertexId::Int(i + 1))),
            (1..=n).map(|i| (VertexId::Int(i), BigRational::from_integer(BigInt::from(1)))),
        )
        .unwrap()
    }

    fn v(i: u64) -> VertexId {
        VertexId::Int(i)
    }

    #[test]
    fn refuses_degenerate_trees() {
        let t = LabeledTree::build(
            [(v(1), v(2)), (v(2), v(3))],
            [(v(1), 0), (v(2), 0), (v(3), 1)].map(|(a, l)| (a, BigRational::from_integer(BigInt::from(l)))),
        )
        .unwrap();
        assert_eq!(
            UltrametricIndex::build(t).unwrap_err(),
            IndexError::DegenerateLabeling(Edge(v(1), v(2)))
        );
    }

    #[test]
    fn single_vertex_index() {
        let t = LabeledTree::build([], [(v(1), BigRational::from_integer(BigInt::from(0)))]).unwrap();
        let ix = UltrametricIndex::build(t).unwrap();
        assert!(ix.distance(&v(1), &v(1)).unwrap().is_zero());
        assert_eq!(ix.isolation_radius(&v(1)).unwrap_err(), IndexError::SingletonTree);
        assert_eq!(ix.partition_at_scale(&Radius::reciprocal(2)).covering_number(), 1);
    }

    #[test]
    fn harmonic_distances() {
        let ix = UltrametricIndex::build(harmonic_path(100)).unwrap();
        assert_eq!(*ix.distance(&v(3), &v(7)).unwrap(), Label::reciprocal(3));
        for n in 2..=100 {
            assert_eq!(*ix.distance(&v(1), &v(n)).unwrap(), Label::one());
        }
        assert!(ix.distance(&v(5), &v(5)).unwrap().is_zero());
        assert_eq!(
            ix.distance(&v(5), &v(500)).unwrap_err(),
            IndexError::UnknownVertex(v(500))
        );
    }

    #[test]
    fn balls_on_the_harmonic_path() {
        let ix = UltrametricIndex::build(harmonic_path(100)).unwrap();
        let b = ix.ball(&v(10), &Radius::reciprocal(5)).unwrap();
        assert_eq!(b.members, (6..=100).map(v).collect::<Vec<_>>());
        assert_eq!(b.center, v(10));
        assert_eq!(ix.ball(&v(1), &Radius::reciprocal(2)).unwrap().members, vec![v(1)]);
        assert_eq!(ix.ball(&v(40), &Radius::ratio(3, 2)).unwrap().members.len(), 100);
    }

    #[test]
    fn partitions_and_isolation() {
        let ix = UltrametricIndex::build(harmonic_path(100)).unwrap();
        let cover = ix.partition_at_scale(&Radius::reciprocal(5));
        assert_eq!(cover.covering_number(), 6);
        assert_eq!(cover.blocks[5].members.len(), 95);
        assert_eq!(ix.covering_number(&Radius::reciprocal(5)), 6);
        assert_eq!(ix.partition_at_scale(&Radius::ratio(2, 1)).covering_number(), 1);
        assert_eq!(ix.isolation_radius(&v(1)).unwrap(), Label::one());
        assert_eq!(ix.isolation_radius(&v(100)).unwrap(), Label::reciprocal(99));

        let flat = UltrametricIndex::build(uniform_path(50)).unwrap();
        assert_eq!(flat.partition_at_scale(&Radius::reciprocal(2)).covering_number(), 50);
        assert_eq!(flat.isolation_radius(&v(17)).unwrap(), Label::one());
    }

    #[test]
    fn clusters() {
        let ix = UltrametricIndex::build(harmonic_path(1000)).unwrap();
        let rep = ix.epsilon_clusters(&Radius::reciprocal(10), 10).unwrap();
        assert_eq!(rep.clusters.len(), 1);
        let c = &rep.clusters[0];
        // d(v_n, v_m) = 1/min(n, m) < 1/10 iff min(n, m) >= 11
        assert_eq!(c.block.members.len(), 990);
        assert_eq!(c.block.center, v(11));
        assert_eq!(c.diameter, Label::reciprocal(11));
        let flat = UltrametricIndex::build(uniform_path(30)).unwrap();
        assert!(flat
            .epsilon_clusters(&Radius::reciprocal(2), 2)
            .unwrap()
            .clusters
            .is_empty());
        assert_eq!(
            flat.epsilon_clusters(&Radius::reciprocal(2), 1).unwrap_err(),
            IndexError::InvalidMass(1)
        );
    }

    #[test]
    fn small_trees_are_checked_exhaustively() {
        let ix = UltrametricIndex::build(harmonic_path(20)).unwrap();
        let rep = ix.verify_strong_triangle(0, 0);
        assert!(rep.exhaustive);
        assert_eq!(rep.triples_checked, 8000);
        assert!(rep.violations.is_empty());
        let big = UltrametricIndex::build(harmonic_path(100)).unwrap();
        let rep = big.verify_strong_triangle(100_000, 1);
        assert!(!rep.exhaustive);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn cover_csv_rows() {
        let ix = UltrametricIndex::build(harmonic_path(100)).unwrap();
        let csv = covers_to_csv([&ix.partition_at_scale(&Radius::reciprocal(5))]);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "radius,block_id,center,size");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[6], "1/5,5,6,95");
    }
}
