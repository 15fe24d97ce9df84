//! Lazily described infinite trees.
//!
//! A [`TreeGenerator`] names every vertex by its root path ([`Address`]) and
//! enumerates children deterministically, so any finite part of the tree can
//! be materialized on demand. Truncation is breadth-first with a fairness
//! rule for vertices of infinite degree: such a vertex releases one child per
//! visit and goes back to the end of the queue, so arms grow in depth while
//! new arms keep appearing.

mod construct;
mod scale;
mod scheme;
mod sequence;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::label::Label;
use crate::tree::{Edge, LabeledTree, TreeError};
use crate::vertex::{Address, VertexId};

pub use construct::{
    construct_branch_labeling, construct_hub_labeling, construct_ray_labeling, CaseTag, CaseWitness, SideSet,
    WitnessSet,
};
pub(crate) use scale::{build_views, detect_on_views};
pub use scale::{detect_case, doubling_ladder, validate_ladder, CaseDetection, Growth, ScaleView, Trend};
pub use scheme::{ComponentKey, LabelingScheme, OffRay, RaySpec};
pub use sequence::{SequenceSpec, VertexSequence};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("address {0} is not a vertex of the generator")]
    UnknownAddress(Address),
    #[error("cannot graft onto {0}: it has infinitely many children")]
    GraftOnUnboundedVertex(Address),
    #[error("labeling is degenerate on the materialized edge {0}")]
    DegenerateOnTruncation(Edge),
    #[error("sequence term {index} repeats vertex {vertex}")]
    RepeatedTerm { index: usize, vertex: VertexId },
    #[error("sequence {0} is not defined on this generator")]
    SequenceUndefined(String),
    #[error("budget ladder must be nonempty and strictly increasing, got {0:?}")]
    InvalidLadder(Vec<usize>),
    #[error("no vertex of infinite degree")]
    NoInfiniteDegreeVertex,
    #[error("the sequence does not hit a growing number of components around any infinite-degree vertex")]
    SequenceMissesComponents,
    #[error("the sets of sequence terms on and off the ray do not both grow across the ladder")]
    WitnessSetsNotGrowing,
    #[error("no ray of the hull is eventually disjoint from the sequence")]
    RayNotDisjoint,
    #[error("no branch vertices of degree at least 3 on the ray")]
    NoBranchVertices,
    #[error("the hull of the sequence contains no ray or infinite-degree vertex at this scale")]
    HullInconclusive,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Tooth lengths of a comb; tooth `n` hangs off spine vertex `v_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TeethSchedule {
    /// a tooth of `length` vertices at every spine vertex `v_n` with `n >= from`
    Every { from: u64, length: u64 },
    /// tooth `n` has `lengths[n - 1]` vertices; no teeth beyond the list
    Listed { lengths: Vec<u64> },
}

impl TeethSchedule {
    pub fn length(&self, n: u64) -> u64 {
        match self {
            TeethSchedule::Every { from, length } => {
                if n >= *from {
                    *length
                } else {
                    0
                }
            }
            TeethSchedule::Listed { lengths } => usize::try_from(n - 1)
                .ok()
                .and_then(|i| lengths.get(i))
                .copied()
                .unwrap_or(0),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            TeethSchedule::Every { length, .. } => *length == 0,
            TeethSchedule::Listed { .. } => true,
        }
    }
}

/// Arm lengths of a star with infinitely many arms; arm `k` is child `k - 1`
/// of the center.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmSchedule {
    Uniform {
        length: u64,
    },
    /// arm `k` has `k` vertices
    Linear,
}

impl ArmSchedule {
    pub fn length(&self, k: u64) -> u64 {
        match self {
            ArmSchedule::Uniform { length } => *length,
            ArmSchedule::Linear => k,
        }
    }
}

/// A tree described by its child enumeration.
///
/// JSON form: `{"shape": "Comb", "params": {"teeth": {"kind": "every", "from": 1, "length": 1}}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", content = "params")]
pub enum TreeGenerator {
    /// `v_1, v_2, ...` with `v_{n+1}` the only child of `v_n`
    Ray,
    /// a ray (child 0) with finite teeth (child 1)
    Comb {
        teeth: TeethSchedule,
    },
    /// a center with infinitely many finite arms
    StarUnbounded {
        arms: ArmSchedule,
    },
    FullBinary,
    /// vertex `i >= 1` has parent `parents[i - 1] < i`; vertex 0 is the root
    Finite {
        parents: Vec<usize>,
    },
    /// `attached` hangs off `at` as its new last child
    Graft {
        base: Box<TreeGenerator>,
        at: Address,
        attached: Box<TreeGenerator>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Finite(u32),
    Unbounded,
}

#[derive(Debug, Clone)]
enum Cursor {
    Ray,
    Spine(u64),
    Tooth { spine: u64, depth: u64 },
    Hub,
    Arm { arm: u64, depth: u64 },
    Binary,
    Finite(usize),
    Base(Box<Cursor>),
    Attached(Box<Cursor>),
}

/// Structural facts about a generator, derived from its description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    /// all vertices, when the tree is finite
    pub vertices: Option<Vec<Address>>,
    /// vertices with infinitely many children
    pub hubs: Vec<Address>,
    /// pairwise disjoint rays
    pub rays: Vec<RaySpec>,
    /// vertices off the only ray, when there is exactly one ray and finitely
    /// many vertices off it
    pub off_ray: Option<Vec<Address>>,
}

impl Profile {
    fn shifted(self, prefix: &Address) -> Profile {
        let shift = |v: Vec<Address>| v.iter().map(|a| prefix.concat(a)).collect::<Vec<_>>();
        Profile {
            vertices: self.vertices.map(shift),
            hubs: shift(self.hubs),
            rays: self
                .rays
                .into_iter()
                .map(|r| RaySpec {
                    start: prefix.concat(&r.start),
                    direction: r.direction,
                })
                .collect(),
            off_ray: self.off_ray.map(shift),
        }
    }

    pub fn is_locally_finite(&self) -> bool {
        self.hubs.is_empty()
    }

    pub fn is_rayless(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.vertices.is_some()
    }
}

/// `T = T_0 ∪ R` with `T_0` finite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlmostRayCertificate {
    pub ray: RaySpec,
    /// vertices of the finite tree `T_0`, in address order
    pub finite_part: Vec<Address>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason")]
pub enum NotAlmostRayReason {
    FiniteTree { vertices: usize },
    InfiniteDegreeVertex { vertex: Address },
    TwoDisjointRays { first: RaySpec, second: RaySpec },
    InfinitelyManyVerticesOffEveryRay { ray: RaySpec },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Classification {
    AlmostRay(AlmostRayCertificate),
    NotAlmostRay(NotAlmostRayReason),
}

impl TreeGenerator {
    pub fn ray() -> Self {
        TreeGenerator::Ray
    }

    /// Teeth of `length` vertices at every spine vertex.
    pub fn comb(length: u64) -> Self {
        TreeGenerator::Comb {
            teeth: TeethSchedule::Every { from: 1, length },
        }
    }

    pub fn star(arm_length: u64) -> Self {
        TreeGenerator::StarUnbounded {
            arms: ArmSchedule::Uniform { length: arm_length },
        }
    }

    /// A path with `n` vertices, rooted at one end.
    pub fn path(n: usize) -> Self {
        TreeGenerator::Finite {
            parents: (0..n.saturating_sub(1)).collect(),
        }
    }

    pub fn graft(base: TreeGenerator, at: Address, attached: TreeGenerator) -> Self {
        TreeGenerator::Graft {
            base: Box::new(base),
            at,
            attached: Box::new(attached),
        }
    }

    fn root_cursor(&self) -> Cursor {
        match self {
            TreeGenerator::Ray => Cursor::Ray,
            TreeGenerator::Comb { .. } => Cursor::Spine(1),
            TreeGenerator::StarUnbounded { .. } => Cursor::Hub,
            TreeGenerator::FullBinary => Cursor::Binary,
            TreeGenerator::Finite { .. } => Cursor::Finite(0),
            TreeGenerator::Graft { base, .. } => Cursor::Base(Box::new(base.root_cursor())),
        }
    }

    fn finite_children(parents: &[usize], p: usize) -> impl Iterator<Item = usize> + '_ {
        parents
            .iter()
            .enumerate()
            .filter(move |(_, &q)| q == p)
            .map(|(i, _)| i + 1)
    }

    fn arity(&self, addr: &Address, cur: &Cursor) -> Arity {
        match (self, cur) {
            (TreeGenerator::Ray, _) => Arity::Finite(1),
            (TreeGenerator::Comb { teeth }, Cursor::Spine(n)) => {
                Arity::Finite(if teeth.length(*n) > 0 { 2 } else { 1 })
            }
            (TreeGenerator::Comb { teeth }, Cursor::Tooth { spine, depth }) => {
                Arity::Finite(u32::from(*depth < teeth.length(*spine)))
            }
            (TreeGenerator::StarUnbounded { .. }, Cursor::Hub) => Arity::Unbounded,
            (TreeGenerator::StarUnbounded { arms }, Cursor::Arm { arm, depth }) => {
                Arity::Finite(u32::from(*depth < arms.length(*arm)))
            }
            (TreeGenerator::FullBinary, _) => Arity::Finite(2),
            (TreeGenerator::Finite { parents }, Cursor::Finite(p)) => {
                Arity::Finite(Self::finite_children(parents, *p).count() as u32)
            }
            (TreeGenerator::Graft { base, at, .. }, Cursor::Base(c)) => match base.arity(addr, c) {
                Arity::Finite(k) if addr == at => Arity::Finite(k + 1),
                a => a,
            },
            (TreeGenerator::Graft { at, attached, .. }, Cursor::Attached(c)) => {
                attached.arity(&suffix(addr, at.depth() + 1), c)
            }
            _ => unreachable!("cursor does not belong to this generator"),
        }
    }

    fn child(&self, addr: &Address, cur: &Cursor, i: u32) -> Cursor {
        match (self, cur) {
            (TreeGenerator::Ray, _) => Cursor::Ray,
            (TreeGenerator::Comb { .. }, Cursor::Spine(n)) => {
                if i == 0 {
                    Cursor::Spine(n + 1)
                } else {
                    Cursor::Tooth { spine: *n, depth: 1 }
                }
            }
            (TreeGenerator::Comb { .. }, Cursor::Tooth { spine, depth }) => Cursor::Tooth {
                spine: *spine,
                depth: depth + 1,
            },
            (TreeGenerator::StarUnbounded { .. }, Cursor::Hub) => Cursor::Arm {
                arm: u64::from(i) + 1,
                depth: 1,
            },
            (TreeGenerator::StarUnbounded { .. }, Cursor::Arm { arm, depth }) => Cursor::Arm {
                arm: *arm,
                depth: depth + 1,
            },
            (TreeGenerator::FullBinary, _) => Cursor::Binary,
            (TreeGenerator::Finite { parents }, Cursor::Finite(p)) => Cursor::Finite(
                Self::finite_children(parents, *p)
                    .nth(i as usize)
                    .expect("child in range"),
            ),
            (TreeGenerator::Graft { base, at, attached }, Cursor::Base(c)) => {
                if addr == at {
                    if let Arity::Finite(k) = base.arity(addr, c) {
                        if i == k {
                            return Cursor::Attached(Box::new(attached.root_cursor()));
                        }
                    }
                }
                Cursor::Base(Box::new(base.child(addr, c, i)))
            }
            (TreeGenerator::Graft { at, attached, .. }, Cursor::Attached(c)) => {
                Cursor::Attached(Box::new(attached.child(&suffix(addr, at.depth() + 1), c, i)))
            }
            _ => unreachable!("cursor does not belong to this generator"),
        }
    }

    fn resolve(&self, addr: &Address) -> Option<Cursor> {
        let mut cur = self.root_cursor();
        let mut here = Address::root();
        for &(c, n) in addr.runs() {
            for _ in 0..n {
                match self.arity(&here, &cur) {
                    Arity::Finite(k) if c >= k => return None,
                    _ => {}
                }
                cur = self.child(&here, &cur, c);
                here.push(c, 1);
            }
        }
        Some(cur)
    }

    pub fn contains(&self, addr: &Address) -> bool {
        self.resolve(addr).is_some()
    }

    /// Number of children of the vertex at `addr`.
    pub fn arity_at(&self, addr: &Address) -> Result<Arity, GenError> {
        let cur = self
            .resolve(addr)
            .ok_or_else(|| GenError::UnknownAddress(addr.clone()))?;
        Ok(self.arity(addr, &cur))
    }

    pub fn validate(&self) -> Result<(), GenError> {
        match self {
            TreeGenerator::StarUnbounded {
                arms: ArmSchedule::Uniform { length: 0 },
            } => Err(GenError::InvalidGenerator("star arms need at least one vertex".into())),
            TreeGenerator::Finite { parents } => match parents.iter().enumerate().find(|(i, &p)| p > *i) {
                Some((i, &p)) => Err(GenError::InvalidGenerator(format!(
                    "vertex {} has parent {p}, which does not precede it",
                    i + 1
                ))),
                None => Ok(()),
            },
            TreeGenerator::Graft { base, at, attached } => {
                base.validate()?;
                attached.validate()?;
                match base.arity_at(at)? {
                    Arity::Unbounded => Err(GenError::GraftOnUnboundedVertex(at.clone())),
                    Arity::Finite(_) => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Materializes the first `budget` vertices.
    pub fn materialize(&self, budget: usize) -> Result<Materialized, GenError> {
        if budget == 0 {
            return Err(GenError::ZeroBudget);
        }
        self.validate()?;
        let mut order = vec![Address::root()];
        let mut parent = vec![None];
        let mut queue: VecDeque<(usize, Cursor, u32)> = VecDeque::new();
        queue.push_back((0, self.root_cursor(), 0));
        let mut open = vec![false; 1];

        while order.len() < budget {
            let Some((idx, cur, next)) = queue.pop_front() else {
                break;
            };
            let addr = order[idx].clone();
            let mut add = |i: u32, order: &mut Vec<Address>, queue: &mut VecDeque<_>| {
                let child = self.child(&addr, &cur, i);
                order.push(addr.child(i));
                parent.push(Some(idx));
                queue.push_back((order.len() - 1, child, 0));
            };
            match self.arity(&addr, &cur) {
                Arity::Finite(k) => {
                    for i in next..k {
                        if order.len() == budget {
                            queue.push_front((idx, cur.clone(), i));
                            break;
                        }
                        add(i, &mut order, &mut queue);
                    }
                }
                Arity::Unbounded => {
                    add(next, &mut order, &mut queue);
                    queue.push_back((idx, cur.clone(), next + 1));
                }
            }
        }

        open.resize(order.len(), false);
        for (idx, cur, next) in &queue {
            open[*idx] = match self.arity(&order[*idx], cur) {
                Arity::Finite(k) => *next < k,
                Arity::Unbounded => true,
            };
        }
        let index = order.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Ok(Materialized {
            order,
            parent,
            frontier: open,
            index,
        })
    }

    /// Structural profile of the described tree.
    pub fn profile(&self) -> Profile {
        match self {
            TreeGenerator::Ray => Profile {
                vertices: None,
                hubs: vec![],
                rays: vec![RaySpec::new(Address::root(), 0)],
                off_ray: Some(vec![]),
            },
            TreeGenerator::Comb { teeth } => Profile {
                vertices: None,
                hubs: vec![],
                rays: vec![RaySpec::new(Address::root(), 0)],
                off_ray: teeth.is_finite().then(|| match teeth {
                    TeethSchedule::Listed { lengths } => lengths
                        .iter()
                        .enumerate()
                        .flat_map(|(n, &len)| {
                            let base = Address::root().repeated(0, n as u64).child(1);
                            (0..len).map(move |d| base.repeated(0, d))
                        })
                        .collect(),
                    TeethSchedule::Every { .. } => vec![],
                }),
            },
            TreeGenerator::StarUnbounded { .. } => Profile {
                vertices: None,
                hubs: vec![Address::root()],
                rays: vec![],
                off_ray: None,
            },
            TreeGenerator::FullBinary => Profile {
                vertices: None,
                hubs: vec![],
                rays: vec![
                    RaySpec::new(Address::root(), 0),
                    RaySpec::new(Address::from_steps(&[1]), 1),
                ],
                off_ray: None,
            },
            TreeGenerator::Finite { parents } => {
                let mut addrs = vec![Address::root()];
                let mut seen = vec![0u32; parents.len() + 1];
                for &p in parents {
                    let a = addrs[p].child(seen[p]);
                    seen[p] += 1;
                    addrs.push(a);
                }
                addrs.sort();
                Profile {
                    vertices: Some(addrs),
                    hubs: vec![],
                    rays: vec![],
                    off_ray: None,
                }
            }
            TreeGenerator::Graft { base, at, attached } => {
                let k = match base.arity_at(at) {
                    Ok(Arity::Finite(k)) => k,
                    _ => 0,
                };
                let pb = base.profile();
                let pa = attached.profile().shifted(&at.child(k));
                let union = |a: Option<Vec<Address>>, b: Option<Vec<Address>>| match (a, b) {
                    (Some(mut a), Some(b)) => {
                        a.extend(b);
                        a.sort();
                        Some(a)
                    }
                    _ => None,
                };
                let off_ray = match (pb.rays.len(), pa.rays.len()) {
                    (1, 0) => union(pb.off_ray.clone(), pa.vertices.clone()),
                    (0, 1) => union(pa.off_ray.clone(), pb.vertices.clone()),
                    _ => None,
                };
                Profile {
                    vertices: union(pb.vertices, pa.vertices),
                    hubs: pb.hubs.into_iter().chain(pa.hubs).collect(),
                    rays: pb.rays.into_iter().chain(pa.rays).collect(),
                    off_ray,
                }
            }
        }
    }

    /// Decides from the description whether the tree is a finite tree plus
    /// a ray.
    pub fn classify_almost_ray(&self) -> Classification {
        let p = self.profile();
        if let Some(v) = &p.vertices {
            return Classification::NotAlmostRay(NotAlmostRayReason::FiniteTree { vertices: v.len() });
        }
        if let Some(h) = p.hubs.first() {
            return Classification::NotAlmostRay(NotAlmostRayReason::InfiniteDegreeVertex { vertex: h.clone() });
        }
        match p.rays.as_slice() {
            [first, second, ..] => Classification::NotAlmostRay(NotAlmostRayReason::TwoDisjointRays {
                first: first.clone(),
                second: second.clone(),
            }),
            [ray] => match p.off_ray {
                Some(off) => Classification::AlmostRay(AlmostRayCertificate {
                    ray: ray.clone(),
                    finite_part: finite_part(ray, off),
                }),
                None => Classification::NotAlmostRay(NotAlmostRayReason::InfinitelyManyVerticesOffEveryRay {
                    ray: ray.clone(),
                }),
            },
            [] => unreachable!("an infinite locally finite generator has a ray"),
        }
    }

    /// Tip of arm `n` (1-based) of the star at the root of the base tree.
    pub fn arm_tip(&self, n: u64) -> Option<Address> {
        match self {
            TreeGenerator::StarUnbounded { arms } if n >= 1 => {
                let child = u32::try_from(n - 1).ok()?;
                Some(Address::root().child(child).repeated(0, arms.length(n) - 1))
            }
            TreeGenerator::Graft { base, .. } => base.arm_tip(n),
            _ => None,
        }
    }

    /// Last vertex of the `n`-th tooth of the comb at the root, counting
    /// teeth along the spine.
    pub fn tooth_tip(&self, n: u64) -> Option<Address> {
        match self {
            TreeGenerator::Comb { teeth } if n >= 1 => {
                let (m, len) = match teeth {
                    TeethSchedule::Every { length: 0, .. } => return None,
                    TeethSchedule::Every { from, length } => (from.max(&1) + n - 1, *length),
                    TeethSchedule::Listed { lengths } => lengths
                        .iter()
                        .enumerate()
                        .filter(|(_, &l)| l > 0)
                        .nth(usize::try_from(n - 1).ok()?)
                        .map(|(i, &l)| (i as u64 + 1, l))?,
                };
                Some(Address::root().repeated(0, m - 1).child(1).repeated(0, len - 1))
            }
            TreeGenerator::Graft { base, .. } => base.tooth_tip(n),
            _ => None,
        }
    }
}

fn suffix(addr: &Address, depth: u64) -> Address {
    let mut rest = Address::root();
    let mut skip = depth;
    for &(c, n) in addr.runs() {
        let drop = skip.min(n);
        skip -= drop;
        rest.push(c, n - drop);
    }
    rest
}

/// `T_0`: the off-ray vertices together with the ray segment spanning their
/// attachment points.
fn finite_part(ray: &RaySpec, off: Vec<Address>) -> Vec<Address> {
    if off.is_empty() {
        return off;
    }
    let attach: Vec<u64> = off.iter().map(|a| ray.attachment(a)).collect();
    let lo = *attach.iter().min().expect("nonempty");
    let hi = *attach.iter().max().expect("nonempty");
    let mut part = off;
    part.extend((lo..=hi).map(|n| ray.vertex(n)));
    part.sort();
    part.dedup();
    part
}

/// The first `budget` vertices of a generated tree, in materialization
/// order. Parents always precede their children.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub order: Vec<Address>,
    pub parent: Vec<Option<usize>>,
    /// vertices with children not yet materialized
    pub frontier: Vec<bool>,
    index: HashMap<Address, usize>,
}

impl Materialized {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn position(&self, addr: &Address) -> Option<usize> {
        self.index.get(addr).copied()
    }

    pub fn contains(&self, addr: &Address) -> bool {
        self.index.contains_key(addr)
    }

    /// Labels every vertex by `scheme`, refusing degenerate edges.
    pub fn label(&self, scheme: &LabelingScheme) -> Result<LabeledTree, GenError> {
        let labels: Vec<Label> = self.order.iter().map(|a| scheme.evaluate(a)).collect();
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                if labels[i].is_zero() && labels[p].is_zero() {
                    return Err(GenError::DegenerateOnTruncation(Edge::new(
                        VertexId::Addr(self.order[p].clone()),
                        VertexId::Addr(self.order[i].clone()),
                    )));
                }
            }
        }
        let ids = |i: usize| VertexId::Addr(self.order[i].clone());
        Ok(LabeledTree::build_with_frontier(
            self.parent
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.map(|p| (ids(p), ids(i)))),
            labels.into_iter().enumerate().map(|(i, l)| (ids(i), l.into_rational())),
            (0..self.len()).filter(|&i| self.frontier[i]).map(ids),
        )?)
    }
}

/// `truncate(gen, scheme, budget)`: the first `budget` vertices, labeled.
pub fn truncate(gen: &TreeGenerator, scheme: &LabelingScheme, budget: usize) -> Result<LabeledTree, GenError> {
    gen.materialize(budget)?.label(scheme)
}
