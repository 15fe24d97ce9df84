//! Reading "infinitely many" as strict growth along a budget ladder.

use serde::{Deserialize, Serialize};

use super::{CaseTag, ComponentKey, GenError, Materialized, RaySpec, SequenceSpec, TreeGenerator};
use crate::parallel;
use crate::vertex::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    /// strictly increasing at every rung
    Growing,
    /// equal on the last two rungs
    Stable,
    Mixed,
}

impl Trend {
    pub fn of(counts: &[usize]) -> Trend {
        if counts.len() < 2 {
            return Trend::Mixed;
        }
        if counts.windows(2).all(|w| w[0] < w[1]) {
            Trend::Growing
        } else if counts[counts.len() - 2] == counts[counts.len() - 1] {
            Trend::Stable
        } else {
            Trend::Mixed
        }
    }
}

/// A count observed at each rung of a budget ladder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Growth {
    pub budgets: Vec<usize>,
    pub counts: Vec<usize>,
    pub trend: Trend,
}

impl Growth {
    pub fn new(budgets: Vec<usize>, counts: Vec<usize>) -> Self {
        let trend = Trend::of(&counts);
        Growth { budgets, counts, trend }
    }

    pub fn is_growing(&self) -> bool {
        self.trend == Trend::Growing
    }
}

/// `start, 2 start, 4 start, ...` with `rungs` entries.
pub fn doubling_ladder(start: usize, rungs: usize) -> Vec<usize> {
    (0..rungs).map(|i| start << i).collect()
}

pub fn validate_ladder(ladder: &[usize]) -> Result<(), GenError> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GenError::InvalidLadder(ladder.to_vec()));
    }
    Ok(())
}

/// One truncation together with the materialized prefix of a sequence and
/// the convex hull of its range.
#[derive(Debug, Clone)]
pub struct ScaleView {
    pub budget: usize,
    pub mat: Materialized,
    pub terms: Vec<Address>,
    /// hull membership by materialization index
    pub hull: Vec<bool>,
    hull_children: Vec<u32>,
}

impl ScaleView {
    pub fn new(gen: &TreeGenerator, seq: &SequenceSpec, budget: usize) -> Result<Self, GenError> {
        let mat = gen.materialize(budget)?;
        let terms = seq.materialized_terms(gen, &mat)?;
        let n = mat.len();
        let mut count = vec![0usize; n];
        for t in &terms {
            count[mat.position(t).expect("materialized term")] += 1;
        }
        // parents precede children, so one reverse sweep accumulates
        // subtree counts
        for i in (1..n).rev() {
            let p = mat.parent[i].expect("non-root");
            count[p] += count[i];
        }
        let total = terms.len();
        let mut hull = vec![false; n];
        if total > 0 {
            let top = (0..n)
                .rev()
                .find(|&i| count[i] == total)
                .expect("root holds every term");
            for i in 0..n {
                hull[i] = i == top || (count[i] >= 1 && count[i] < total);
            }
        }
        let mut hull_children = vec![0u32; n];
        for i in 1..n {
            let p = mat.parent[i].expect("non-root");
            if hull[i] && hull[p] {
                hull_children[p] += 1;
            }
        }
        Ok(ScaleView {
            budget,
            mat,
            terms,
            hull,
            hull_children,
        })
    }

    pub fn hull_size(&self) -> usize {
        self.hull.iter().filter(|&&h| h).count()
    }

    pub fn in_hull(&self, addr: &Address) -> bool {
        self.mat.position(addr).is_some_and(|i| self.hull[i])
    }

    /// Degree in the hull; zero for vertices outside it.
    pub fn hull_degree(&self, addr: &Address) -> usize {
        match self.mat.position(addr) {
            Some(i) if self.hull[i] => {
                let up = self.mat.parent[i].is_some_and(|p| self.hull[p]);
                self.hull_children[i] as usize + usize::from(up)
            }
            _ => 0,
        }
    }

    /// Components of `H - hub` that contain a sequence term.
    pub fn components_hit(&self, hub: &Address) -> Vec<ComponentKey> {
        let mut keys: Vec<ComponentKey> = self.terms.iter().filter_map(|t| ComponentKey::of(hub, t)).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    /// All components of `H - hub`, in order of their minimal addresses.
    pub fn hull_components(&self, hub: &Address) -> Vec<ComponentKey> {
        let Some(h) = self.mat.position(hub).filter(|&h| self.hull[h]) else {
            return vec![];
        };
        let mut keys = Vec::new();
        if self.mat.parent[h].is_some_and(|p| self.hull[p]) {
            keys.push(ComponentKey::Parent);
        }
        for i in 0..self.mat.len() {
            if self.hull[i] && self.mat.parent[i] == Some(h) {
                keys.push(ComponentKey::Child(self.mat.order[i].last_step().expect("child")));
            }
        }
        keys.sort();
        keys
    }

    /// Hull vertices on `ray`, as ray indices in ascending order.
    pub fn ray_in_hull(&self, ray: &RaySpec) -> Vec<u64> {
        let mut idx: Vec<u64> = (0..self.mat.len())
            .filter(|&i| self.hull[i])
            .filter_map(|i| ray.index_of(&self.mat.order[i]))
            .collect();
        idx.sort_unstable();
        idx
    }
}

pub(crate) fn build_views(
    gen: &TreeGenerator,
    seq: &SequenceSpec,
    ladder: &[usize],
) -> Result<Vec<ScaleView>, GenError> {
    validate_ladder(ladder)?;
    gen.validate()?;
    parallel::map(ladder, |&b| ScaleView::new(gen, seq, b))
        .into_iter()
        .collect()
}

/// How the sequence splits against a ray of its hull.
#[derive(Debug, Clone)]
pub(crate) struct RaySplit {
    /// the generator ray cut to start at its first hull vertex
    pub ray: RaySpec,
    pub ray_in_hull: Growth,
    /// terms on the ray, 1-based sequence indices at the largest budget
    pub on: Vec<usize>,
    pub off: Vec<usize>,
    pub on_growth: Growth,
    pub off_growth: Growth,
}

pub(crate) fn ray_split(gen: &TreeGenerator, views: &[ScaleView]) -> Option<RaySplit> {
    let budgets: Vec<usize> = views.iter().map(|v| v.budget).collect();
    let last = views.last()?;
    gen.profile().rays.into_iter().find_map(|ray| {
        let sizes: Vec<usize> = views.iter().map(|v| v.ray_in_hull(&ray).len()).collect();
        let ray_in_hull = Growth::new(budgets.clone(), sizes);
        if !ray_in_hull.is_growing() {
            return None;
        }
        let first = *last.ray_in_hull(&ray).first()?;
        let count_on = |v: &ScaleView| v.terms.iter().filter(|t| ray.index_of(t).is_some()).count();
        let on_counts: Vec<usize> = views.iter().map(count_on).collect();
        let off_counts: Vec<usize> = views.iter().map(|v| v.terms.len() - count_on(v)).collect();
        let (on, off): (Vec<usize>, Vec<usize>) =
            (1..=last.terms.len()).partition(|&n| ray.index_of(&last.terms[n - 1]).is_some());
        Some(RaySplit {
            ray: ray.tail(first - 1),
            ray_in_hull,
            on,
            off,
            on_growth: Growth::new(budgets.clone(), on_counts),
            off_growth: Growth::new(budgets.clone(), off_counts),
        })
    })
}

/// Which branch of the case analysis the hull of a sequence falls into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseDetection {
    pub case: CaseTag,
    pub budgets: Vec<usize>,
    pub hub: Option<Address>,
    pub components_hit: Option<Growth>,
    pub ray: Option<RaySpec>,
    pub ray_in_hull: Option<Growth>,
    pub on_ray: Option<Growth>,
    pub off_ray: Option<Growth>,
}

pub(crate) fn hub_growth(gen: &TreeGenerator, views: &[ScaleView]) -> Option<(Address, Growth)> {
    let budgets: Vec<usize> = views.iter().map(|v| v.budget).collect();
    gen.profile().hubs.into_iter().find_map(|hub| {
        let counts = views.iter().map(|v| v.components_hit(&hub).len()).collect();
        let g = Growth::new(budgets.clone(), counts);
        g.is_growing().then_some((hub, g))
    })
}

/// Classifies the hull of the sequence at the scale of the ladder: an
/// infinite-degree vertex whose components keep being hit, or a ray of the
/// hull together with how many terms lie on and off it.
pub fn detect_case(gen: &TreeGenerator, seq: &SequenceSpec, ladder: &[usize]) -> Result<CaseDetection, GenError> {
    let views = build_views(gen, seq, ladder)?;
    detect_on_views(gen, &views)
}

pub(crate) fn detect_on_views(gen: &TreeGenerator, views: &[ScaleView]) -> Result<CaseDetection, GenError> {
    let budgets: Vec<usize> = views.iter().map(|v| v.budget).collect();
    if let Some((hub, g)) = hub_growth(gen, views) {
        return Ok(CaseDetection {
            case: CaseTag::InfiniteDegree,
            budgets,
            hub: Some(hub),
            components_hit: Some(g),
            ray: None,
            ray_in_hull: None,
            on_ray: None,
            off_ray: None,
        });
    }
    let split = ray_split(gen, views).ok_or(GenError::HullInconclusive)?;
    let case = match (split.off_growth.trend, split.on_growth.trend) {
        (super::Trend::Stable, _) => CaseTag::AlmostRay,
        (super::Trend::Growing, super::Trend::Growing) => CaseTag::RayMeetsSequence,
        (super::Trend::Growing, super::Trend::Stable) => CaseTag::RayAvoidsSequence,
        _ => return Err(GenError::HullInconclusive),
    };
    Ok(CaseDetection {
        case,
        budgets,
        hub: None,
        components_hit: None,
        ray: Some(split.ray),
        ray_in_hull: Some(split.ray_in_hull),
        on_ray: Some(split.on_growth),
        off_ray: Some(split.off_growth),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trends() {
        assert_eq!(Trend::of(&[1, 2, 4]), Trend::Growing);
        assert_eq!(Trend::of(&[1, 3, 3]), Trend::Stable);
        assert_eq!(Trend::of(&[1, 1, 2]), Trend::Mixed);
        assert_eq!(Trend::of(&[5]), Trend::Mixed);
        assert_eq!(doubling_ladder(100, 4), [100, 200, 400, 800]);
        assert!(validate_ladder(&[100, 100]).is_err());
        assert!(validate_ladder(&[]).is_err());
    }

    #[test]
    fn hull_of_tooth_tips() {
        let gen = TreeGenerator::comb(1);
        let v = ScaleView::new(&gen, &SequenceSpec::ToothTips, 9).unwrap();
        // tips r.1, r.0.1, r.0^2.1, r.0^3.1 and the spine r..r.0^3
        assert_eq!(v.hull_size(), 8);
        assert!(!v.in_hull(&"r.0^4".parse().unwrap()));
        assert_eq!(v.hull_degree(&"r".parse().unwrap()), 2);
        assert_eq!(v.hull_degree(&"r.0".parse().unwrap()), 3);
        assert_eq!(v.hull_degree(&"r.0^3".parse().unwrap()), 2);
    }

    #[test]
    fn hull_without_root() {
        let gen = TreeGenerator::comb(2);
        let seq = SequenceSpec::Explicit {
            terms: vec!["r.0^3.1.0".parse().unwrap(), "r.0^5".parse().unwrap()],
        };
        let v = ScaleView::new(&gen, &seq, 40).unwrap();
        let mut hull: Vec<String> = (0..v.mat.len())
            .filter(|&i| v.hull[i])
            .map(|i| v.mat.order[i].to_string())
            .collect();
        hull.sort();
        assert_eq!(hull, ["r.0^3", "r.0^3.1", "r.0^3.1.0", "r.0^4", "r.0^5"]);
    }

    #[test]
    fn detects_each_case() {
        let ladder = doubling_ladder(64, 4);
        let case = |g: &TreeGenerator, s: &SequenceSpec| detect_case(g, s, &ladder).unwrap().case;
        assert_eq!(
            case(&TreeGenerator::star(1), &SequenceSpec::ArmTips),
            CaseTag::InfiniteDegree
        );
        assert_eq!(
            case(&TreeGenerator::comb(1), &SequenceSpec::teeth_and_spine()),
            CaseTag::RayMeetsSequence
        );
        assert_eq!(
            case(&TreeGenerator::comb(1), &SequenceSpec::ToothTips),
            CaseTag::RayAvoidsSequence
        );
        let ray_seq = SequenceSpec::RayVertices {
            ray: RaySpec::new(Address::root(), 0),
            from: 1,
        };
        assert_eq!(case(&TreeGenerator::comb(1), &ray_seq), CaseTag::AlmostRay);
        assert_eq!(
            case(&TreeGenerator::Ray, &SequenceSpec::TruncationOrder),
            CaseTag::AlmostRay
        );
    }
}
