//! Labelings under which a sequence whose hull is not almost a ray has a
//! Cauchy subsequence without being Cauchy.
//!
//! Each constructor reads the hull of the sequence along a budget ladder,
//! builds a scheme at the largest budget and reports the sets that certify
//! the construction, with their growth across the ladder.

use serde::{Deserialize, Serialize};

use super::scale::{build_views, hub_growth, ray_split, RaySplit};
use super::{GenError, Growth, LabelingScheme, OffRay, RaySpec, ScaleView, SequenceSpec, TreeGenerator};
use crate::analysis::cauchy::greedy_indices;
use crate::index::UltrametricIndex;
use crate::label::Label;
use crate::tree::LabeledTree;
use crate::vertex::{Address, VertexId};

/// Branch of the case analysis on the hull `H` of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    /// `H` has a vertex whose removal leaves infinitely many hit components
    InfiniteDegree,
    /// `H` contains a ray and only finitely many terms lie off it
    AlmostRay,
    /// infinitely many terms lie on the ray and infinitely many off it
    RayMeetsSequence,
    /// infinitely many terms lie off the ray and finitely many on it
    RayAvoidsSequence,
}

/// Members found at the largest budget, with their count on every rung.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSet {
    pub members: Vec<Address>,
    pub growth: Growth,
}

/// `V_{n_k}`: the part of the hull hanging off the ray at branch vertex
/// `v*_{n_k}`, and the sequence terms inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SideSet {
    pub k: usize,
    pub branch: u64,
    pub vertex: Address,
    pub size: usize,
    /// 1-based sequence indices of the terms in `V_{n_k}`
    pub witnesses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseWitness {
    pub case: CaseTag,
    pub budgets: Vec<usize>,
    pub hub: Option<Address>,
    pub components_hit: Option<Growth>,
    pub ray: Option<RaySpec>,
    /// terms off the ray
    pub off_ray: Option<WitnessSet>,
    /// terms on the ray
    pub on_ray: Option<WitnessSet>,
    pub branches: Option<Growth>,
    pub side_sets: Vec<SideSet>,
    /// vertices labeled 1 in each truncation
    pub level_one: Growth,
    /// sequence terms labeled 1 in each truncation
    pub label_one_terms: Growth,
    /// 1-based indices of a Cauchy subsequence at the largest budget
    pub subsequence: Vec<usize>,
    /// distances between consecutive subsequence terms
    pub gaps: Vec<Label>,
}

struct Evidence {
    tree: LabeledTree,
    level_one: Growth,
    label_one_terms: Growth,
}

fn evidence(scheme: &LabelingScheme, views: &[ScaleView]) -> Result<Evidence, GenError> {
    let budgets: Vec<usize> = views.iter().map(|v| v.budget).collect();
    let one = Label::one();
    let mut level = Vec::new();
    let mut terms = Vec::new();
    let mut tree = None;
    for v in views {
        let t = v.mat.label(scheme)?;
        level.push(t.labels().iter().filter(|l| **l == one).count());
        terms.push(v.terms.iter().filter(|a| scheme.evaluate(a) == one).count());
        tree = Some(t);
    }
    Ok(Evidence {
        tree: tree.expect("nonempty ladder"),
        level_one: Growth::new(budgets.clone(), level),
        label_one_terms: Growth::new(budgets, terms),
    })
}

fn gaps(tree: LabeledTree, terms: &[Address], subsequence: &[usize]) -> Result<Vec<Label>, GenError> {
    if subsequence.len() < 2 {
        return Ok(vec![]);
    }
    let index = UltrametricIndex::build(tree).map_err(|e| match e {
        crate::index::IndexError::DegenerateLabeling(edge) => GenError::DegenerateOnTruncation(edge),
        other => GenError::InvalidGenerator(other.to_string()),
    })?;
    let id = |n: usize| VertexId::Addr(terms[n - 1].clone());
    Ok(subsequence
        .windows(2)
        .map(|w| index.distance(&id(w[0]), &id(w[1])).expect("materialized").clone())
        .collect())
}

fn greedy(scheme: &LabelingScheme, terms: &[Address]) -> Vec<usize> {
    let labels: Vec<Label> = terms.iter().map(|a| scheme.evaluate(a)).collect();
    greedy_indices(&labels).0
}

fn budgets(views: &[ScaleView]) -> Vec<usize> {
    views.iter().map(|v| v.budget).collect()
}

fn witness_set(terms: &[Address], indices: &[usize], growth: Growth) -> WitnessSet {
    WitnessSet {
        members: indices.iter().map(|&n| terms[n - 1].clone()).collect(),
        growth,
    }
}

/// Labels an infinite-degree vertex `u` with `0` and the `2n`-th component
/// of `H - u` (in order of minimal addresses) with `1/n`; everything else
/// gets `1`.
pub fn construct_hub_labeling(
    gen: &TreeGenerator,
    seq: &SequenceSpec,
    ladder: &[usize],
) -> Result<(LabelingScheme, CaseWitness), GenError> {
    if gen.profile().hubs.is_empty() {
        return Err(GenError::NoInfiniteDegreeVertex);
    }
    let views = build_views(gen, seq, ladder)?;
    let (hub, hit) = hub_growth(gen, &views).ok_or(GenError::SequenceMissesComponents)?;
    let last = views.last().expect("nonempty ladder");
    let scheme = LabelingScheme::HubAlternating {
        hub: hub.clone(),
        components: last.hull_components(&hub),
    };
    let ev = evidence(&scheme, &views)?;
    let subsequence = greedy(&scheme, &last.terms);
    let gaps = gaps(ev.tree, &last.terms, &subsequence)?;
    Ok((
        scheme,
        CaseWitness {
            case: CaseTag::InfiniteDegree,
            budgets: budgets(&views),
            hub: Some(hub),
            components_hit: Some(hit),
            ray: None,
            off_ray: None,
            on_ray: None,
            branches: None,
            side_sets: vec![],
            level_one: ev.level_one,
            label_one_terms: ev.label_one_terms,
            subsequence,
            gaps,
        },
    ))
}

fn split_or(gen: &TreeGenerator, views: &[ScaleView]) -> Result<RaySplit, GenError> {
    ray_split(gen, views).ok_or(GenError::WitnessSetsNotGrowing)
}

/// Labels the `n`-th vertex of a ray of the hull with `1/n` and every other
/// vertex with `1`, for sequences with infinitely many terms both on and
/// off the ray.
pub fn construct_ray_labeling(
    gen: &TreeGenerator,
    seq: &SequenceSpec,
    ladder: &[usize],
) -> Result<(LabelingScheme, CaseWitness), GenError> {
    let views = build_views(gen, seq, ladder)?;
    let split = split_or(gen, &views)?;
    if !(split.on_growth.is_growing() && split.off_growth.is_growing()) {
        return Err(GenError::WitnessSetsNotGrowing);
    }
    let last = views.last().expect("nonempty ladder");
    let scheme = LabelingScheme::HarmonicOnRay {
        rays: vec![split.ray.clone()],
        off_ray: OffRay::One,
    };
    let ev = evidence(&scheme, &views)?;
    let subsequence = greedy(&scheme, &last.terms);
    let gaps = gaps(ev.tree, &last.terms, &subsequence)?;
    Ok((
        scheme,
        CaseWitness {
            case: CaseTag::RayMeetsSequence,
            budgets: budgets(&views),
            hub: None,
            components_hit: None,
            ray: Some(split.ray),
            off_ray: Some(witness_set(&last.terms, &split.off, split.off_growth)),
            on_ray: Some(witness_set(&last.terms, &split.on, split.on_growth)),
            branches: None,
            side_sets: vec![],
            level_one: ev.level_one,
            label_one_terms: ev.label_one_terms,
            subsequence,
            gaps,
        },
    ))
}

/// Branch vertices `v*_n`, `n >= 2`, of hull degree at least 3 on `ray`.
fn branch_indices(view: &ScaleView, ray: &RaySpec) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = 1;
    loop {
        let v = ray.vertex(n);
        if !view.in_hull(&v) {
            return out;
        }
        if n >= 2 && view.hull_degree(&v) >= 3 {
            out.push(n);
        }
        n += 1;
    }
}

/// For a ray `R*` of the hull avoiding the sequence: `1/n` on `v*_n`,
/// `1/n_k` on the side sets `V_{n_k}` of even `k`, `1` elsewhere. Side sets
/// of odd `k` keep label `1`, so the terms in them stay `1` apart.
pub fn construct_branch_labeling(
    gen: &TreeGenerator,
    seq: &SequenceSpec,
    ladder: &[usize],
) -> Result<(LabelingScheme, CaseWitness), GenError> {
    let views = build_views(gen, seq, ladder)?;
    let split = split_or(gen, &views)?;
    if split.on_growth.is_growing() {
        return Err(GenError::RayNotDisjoint);
    }
    if !split.off_growth.is_growing() {
        return Err(GenError::WitnessSetsNotGrowing);
    }
    let last = views.last().expect("nonempty ladder");
    let n0 = split
        .on
        .iter()
        .filter_map(|&n| split.ray.index_of(&last.terms[n - 1]))
        .max()
        .unwrap_or(0);
    let ray = split.ray.tail(n0);
    let branch_growth = Growth::new(
        budgets(&views),
        views.iter().map(|v| branch_indices(v, &ray).len()).collect(),
    );
    let branches = branch_indices(last, &ray);
    if branches.is_empty() || !branch_growth.is_growing() {
        return Err(GenError::NoBranchVertices);
    }

    let mut side_sets: Vec<SideSet> = branches
        .iter()
        .enumerate()
        .map(|(i, &n)| SideSet {
            k: i + 1,
            branch: n,
            vertex: ray.vertex(n),
            size: 0,
            witnesses: vec![],
        })
        .collect();
    let side_of = |a: &Address| -> Option<usize> {
        if ray.index_of(a).is_some() || !a.starts_with(&ray.start) {
            return None;
        }
        branches.binary_search(&ray.attachment(a)).ok()
    };
    for i in 0..last.mat.len() {
        if last.hull[i] {
            if let Some(k) = side_of(&last.mat.order[i]) {
                side_sets[k].size += 1;
            }
        }
    }
    for (n, t) in last.terms.iter().enumerate() {
        if let Some(k) = side_of(t) {
            side_sets[k].witnesses.push(n + 1);
        }
    }

    // one term from each even block, with increasing sequence indices
    let mut subsequence: Vec<usize> = Vec::new();
    for s in side_sets.iter().filter(|s| s.k % 2 == 0) {
        let floor = subsequence.last().copied().unwrap_or(0);
        match s.witnesses.iter().find(|&&n| n > floor) {
            Some(&n) => subsequence.push(n),
            None => break,
        }
    }

    let scheme = LabelingScheme::BranchAlternating {
        ray: ray.clone(),
        branches: branches.clone(),
    };
    let ev = evidence(&scheme, &views)?;
    let gaps = gaps(ev.tree, &last.terms, &subsequence)?;
    Ok((
        scheme,
        CaseWitness {
            case: CaseTag::RayAvoidsSequence,
            budgets: budgets(&views),
            hub: None,
            components_hit: None,
            ray: Some(ray),
            off_ray: Some(witness_set(&last.terms, &split.off, split.off_growth)),
            on_ray: Some(witness_set(&last.terms, &split.on, split.on_growth)),
            branches: Some(branch_growth),
            side_sets,
            level_one: ev.level_one,
            label_one_terms: ev.label_one_terms,
            subsequence,
            gaps,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::doubling_ladder;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn hub_labeling_on_star() {
        let (scheme, w) =
            construct_hub_labeling(&TreeGenerator::star(1), &SequenceSpec::ArmTips, &doubling_ladder(32, 3)).unwrap();
        assert_eq!(scheme.evaluate(&Address::root()), Label::zero());
        assert_eq!(scheme.evaluate(&a("r.3")), Label::reciprocal(2));
        assert_eq!(scheme.evaluate(&a("r.2")), Label::one());
        assert_eq!(scheme.evaluate(&a("r.1")), Label::one());
        assert_eq!(w.case, CaseTag::InfiniteDegree);
        // n_k picks the tip of arm 2k (k >= 2)
        assert_eq!(&w.subsequence[..4], &[1, 4, 6, 8]);
        for (k, g) in w.gaps.iter().enumerate() {
            assert!(*g <= Label::reciprocal(k as u64 + 1));
        }
        assert!(w.label_one_terms.is_growing());
        // budget 128: 127 tips, 64 on odd components plus component 2, labeled 1/1
        assert_eq!(w.label_one_terms.counts, [17, 33, 65]);
    }

    #[test]
    fn hub_errors() {
        let ladder = doubling_ladder(32, 3);
        assert_eq!(
            construct_hub_labeling(&TreeGenerator::Ray, &SequenceSpec::TruncationOrder, &ladder).unwrap_err(),
            GenError::NoInfiniteDegreeVertex
        );
        let one_arm = SequenceSpec::Explicit {
            terms: vec![a("r.0"), a("r.0^2"), a("r.0^3")],
        };
        assert_eq!(
            construct_hub_labeling(&TreeGenerator::star(5), &one_arm, &ladder).unwrap_err(),
            GenError::SequenceMissesComponents
        );
    }

    #[test]
    fn ray_labeling_on_comb() {
        let (scheme, w) = construct_ray_labeling(
            &TreeGenerator::comb(1),
            &SequenceSpec::teeth_and_spine(),
            &doubling_ladder(32, 3),
        )
        .unwrap();
        assert_eq!(scheme, LabelingScheme::harmonic_ray());
        assert_eq!(w.ray, Some(RaySpec::new(Address::root(), 0)));
        assert!(w.label_one_terms.is_growing());
        assert_eq!(&w.subsequence[..4], &[1, 2, 4, 6]);
        let err = construct_ray_labeling(
            &TreeGenerator::comb(1),
            &SequenceSpec::ToothTips,
            &doubling_ladder(32, 3),
        );
        assert_eq!(err.unwrap_err(), GenError::WitnessSetsNotGrowing);
    }

    #[test]
    fn branch_labeling_on_comb() {
        let (scheme, w) = construct_branch_labeling(
            &TreeGenerator::comb(1),
            &SequenceSpec::ToothTips,
            &doubling_ladder(32, 3),
        )
        .unwrap();
        let LabelingScheme::BranchAlternating { ray, branches } = &scheme else {
            panic!()
        };
        assert_eq!(ray, &RaySpec::new(Address::root(), 0));
        assert_eq!(&branches[..3], &[2, 3, 4]);
        assert!(w.side_sets.iter().all(|s| !s.witnesses.is_empty() && s.size == 1));
        assert_eq!(w.side_sets[1].witnesses, [3]);
        assert_eq!(&w.subsequence[..3], &[3, 5, 7]);
        assert_eq!(w.gaps[0], Label::reciprocal(3));
        let err = construct_branch_labeling(
            &TreeGenerator::comb(1),
            &SequenceSpec::teeth_and_spine(),
            &doubling_ladder(32, 3),
        );
        assert_eq!(err.unwrap_err(), GenError::RayNotDisjoint);
    }
}
