//! Covering numbers across a budget ladder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::generators::{Growth, LabelingScheme, Materialized, RaySpec, SequenceSpec, TreeGenerator, Trend};
use crate::index::UltrametricIndex;
use crate::label::{Label, Radius};
use crate::parallel;
use crate::vertex::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundedness {
    /// equal on the last two rungs
    Bounded,
    /// strictly increasing along the ladder
    Growing,
    Inconclusive,
}

impl From<Trend> for Boundedness {
    fn from(t: Trend) -> Self {
        match t {
            Trend::Stable => Boundedness::Bounded,
            Trend::Growing => Boundedness::Growing,
            Trend::Mixed => Boundedness::Inconclusive,
        }
    }
}

/// `N(r)` on every rung of a ladder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundednessProfile {
    pub radius: Radius,
    pub budgets: Vec<usize>,
    pub counts: Vec<usize>,
    pub verdict: Boundedness,
}

impl BoundednessProfile {
    fn new(radius: Radius, budgets: Vec<usize>, counts: Vec<usize>) -> Self {
        let verdict = Trend::of(&counts).into();
        BoundednessProfile {
            radius,
            budgets,
            counts,
            verdict,
        }
    }
}

/// One labeled truncation with its index.
pub struct Rung {
    pub budget: usize,
    pub mat: Materialized,
    pub index: UltrametricIndex,
}

impl Rung {
    /// Tree position of the `i`-th materialized vertex.
    fn tree_positions(&self) -> Vec<usize> {
        let tree = self.index.tree();
        self.mat
            .order
            .iter()
            .map(|a| tree.position(&VertexId::Addr(a.clone())).expect("materialized"))
            .collect()
    }
}

pub fn build_rungs(gen: &TreeGenerator, scheme: &LabelingScheme, ladder: &[usize]) -> Result<Vec<Rung>, AnalysisError> {
    crate::generators::validate_ladder(ladder)?;
    gen.validate()?;
    parallel::map(ladder, |&budget| -> Result<Rung, AnalysisError> {
        let mat = gen.materialize(budget)?;
        let tree = mat.label(scheme)?;
        Ok(Rung {
            budget,
            mat,
            index: UltrametricIndex::build(tree)?,
        })
    })
    .into_iter()
    .collect()
}

pub fn profiles_on(rungs: &[Rung], radii: &[Radius]) -> Vec<BoundednessProfile> {
    let budgets: Vec<usize> = rungs.iter().map(|r| r.budget).collect();
    radii
        .iter()
        .map(|r| {
            let counts = parallel::map(rungs, |rung| rung.index.covering_number(r));
            BoundednessProfile::new(r.clone(), budgets.clone(), counts)
        })
        .collect()
}

/// Covering numbers `N(r, b)` of the truncations along the ladder.
pub fn totally_bounded_profile(
    gen: &TreeGenerator,
    scheme: &LabelingScheme,
    radius: &Radius,
    ladder: &[usize],
) -> Result<BoundednessProfile, AnalysisError> {
    let rungs = build_rungs(gen, scheme, ladder)?;
    Ok(profiles_on(&rungs, std::slice::from_ref(radius)).remove(0))
}

/// A rule selecting a vertex subset from every truncation, nested across
/// budgets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum SubsetRule {
    RayTail {
        ray: RaySpec,
        from: u64,
    },
    LevelSet {
        value: Label,
    },
    /// each vertex kept with probability 1/2; draws follow materialization
    /// order, so smaller truncations see a prefix of the same choices
    Random {
        seed: u64,
    },
    SequenceRange {
        sequence: SequenceSpec,
    },
}

impl SubsetRule {
    /// Tree positions of the selected vertices.
    pub fn select(&self, gen: &TreeGenerator, rung: &Rung) -> Result<Vec<usize>, AnalysisError> {
        let pos = rung.tree_positions();
        let tree = rung.index.tree();
        Ok(match self {
            SubsetRule::RayTail { ray, from } => (0..rung.mat.len())
                .filter(|&i| ray.index_of(&rung.mat.order[i]).is_some_and(|n| n >= *from))
                .map(|i| pos[i])
                .collect(),
            SubsetRule::LevelSet { value } => (0..tree.len()).filter(|&i| tree.label_at(i) == value).collect(),
            SubsetRule::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..rung.mat.len())
                    .filter(|_| rng.random::<bool>())
                    .map(|i| pos[i])
                    .collect()
            }
            SubsetRule::SequenceRange { sequence } => sequence
                .materialize(gen, &rung.mat)?
                .terms()
                .iter()
                .map(|v| tree.position(v).expect("materialized"))
                .collect(),
        })
    }
}

/// Size of a subset and the number of `r`-blocks it meets, per rung.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetProfile {
    pub rule: SubsetRule,
    pub sizes: Growth,
    pub profiles: Vec<BoundednessProfile>,
    /// size grows along the ladder
    pub infinite: bool,
    /// bounded at every radius
    pub bounded: bool,
}

pub fn subset_profile(
    gen: &TreeGenerator,
    rungs: &[Rung],
    rule: &SubsetRule,
    radii: &[Radius],
) -> Result<SubsetProfile, AnalysisError> {
    let budgets: Vec<usize> = rungs.iter().map(|r| r.budget).collect();
    let selected: Vec<Vec<usize>> = rungs.iter().map(|r| rule.select(gen, r)).collect::<Result<_, _>>()?;
    let sizes = Growth::new(budgets.clone(), selected.iter().map(Vec::len).collect());
    let profiles: Vec<BoundednessProfile> = radii
        .iter()
        .map(|r| {
            let counts = rungs
                .iter()
                .zip(&selected)
                .map(|(rung, sel)| {
                    let ids = rung.index.block_ids(r);
                    let mut met: Vec<usize> = sel.iter().map(|&i| ids[i]).collect();
                    met.sort_unstable();
                    met.dedup();
                    met.len()
                })
                .collect();
            BoundednessProfile::new(r.clone(), budgets.clone(), counts)
        })
        .collect();
    Ok(SubsetProfile {
        rule: rule.clone(),
        infinite: sizes.is_growing(),
        bounded: profiles.iter().all(|p| p.verdict == Boundedness::Bounded),
        sizes,
        profiles,
    })
}

/// Ray tails of every ray of the generator, the level set of `1`, and two
/// seeded random subsets.
pub fn default_registry(gen: &TreeGenerator, seed: u64) -> Vec<SubsetRule> {
    let mut rules: Vec<SubsetRule> = gen
        .profile()
        .rays
        .into_iter()
        .map(|ray| SubsetRule::RayTail { ray, from: 1 })
        .collect();
    rules.push(SubsetRule::LevelSet { value: Label::one() });
    rules.push(SubsetRule::Random { seed });
    rules.push(SubsetRule::Random {
        seed: seed.wrapping_add(1),
    });
    rules
}
