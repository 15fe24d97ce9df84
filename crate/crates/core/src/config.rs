//! Reproducible experiment runs.
//!
//! A [`RunConfig`] lists named experiments plus the shared ladder, grids and
//! seed. Running it yields one JSON report per experiment and a single CSV
//! with columns `instance,budget,scale,value,verdict`; the same config
//! always produces byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_bounded_subset_criterion, check_subsequence_criterion, conjecture_experiment, profile::profiles_on,
    AnalysisError, CheckRow, ConjectureKind, SubsetRule,
};
use crate::generators::{
    construct_branch_labeling, construct_hub_labeling, construct_ray_labeling, doubling_ladder, LabelingScheme, OffRay,
    RaySpec, SequenceSpec, TreeGenerator,
};
use crate::label::{Label, Radius};
use crate::vertex::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructCase {
    Hub,
    Ray,
    Branch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    Classify {
        name: String,
        generator: TreeGenerator,
    },
    Construct {
        name: String,
        case: ConstructCase,
        generator: TreeGenerator,
        sequence: SequenceSpec,
    },
    Profile {
        name: String,
        generator: TreeGenerator,
        scheme: LabelingScheme,
    },
    CheckSubsequence {
        name: String,
        generator: TreeGenerator,
        scheme: LabelingScheme,
        sequence: SequenceSpec,
    },
    CheckBounded {
        name: String,
        generator: TreeGenerator,
        scheme: LabelingScheme,
        #[serde(default)]
        subsets: Vec<SubsetRule>,
    },
    Conjecture {
        name: String,
        kind: ConjectureKind,
        generator: TreeGenerator,
        scheme: LabelingScheme,
    },
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::Classify { name, .. }
            | Experiment::Construct { name, .. }
            | Experiment::Profile { name, .. }
            | Experiment::CheckSubsequence { name, .. }
            | Experiment::CheckBounded { name, .. }
            | Experiment::Conjecture { name, .. } => name,
        }
    }
}

fn default_ladder() -> Vec<usize> {
    doubling_ladder(200, 4)
}

fn default_grid() -> Vec<Radius> {
    (1..=6).map(|k| Radius::reciprocal(1 << k)).collect()
}

fn default_mass() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ladder")]
    pub budget_ladder: Vec<usize>,
    #[serde(default = "default_grid")]
    pub radius_grid: Vec<Radius>,
    #[serde(default = "default_grid")]
    pub epsilon_grid: Vec<Radius>,
    #[serde(default = "default_mass")]
    pub mass: usize,
    pub experiments: Vec<Experiment>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("duplicate experiment name {0}")]
    DuplicateName(String),
    #[error("experiment {name}: {source}")]
    Experiment {
        name: String,
        #[source]
        source: AnalysisError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reports keyed by experiment name, and the merged CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub reports: BTreeMap<String, serde_json::Value>,
    pub csv: String,
}

impl RunOutput {
    /// Writes `<name>.json` per experiment and `results.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), std::io::Error> {
        std::fs::create_dir_all(dir)?;
        for (name, report) in &self.reports {
            let text = serde_json::to_string_pretty(report).expect("serializable");
            std::fs::write(dir.join(format!("{name}.json")), text + "\n")?;
        }
        std::fs::write(dir.join("results.csv"), &self.csv)
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

impl RunConfig {
    pub fn run(&self) -> Result<RunOutput, RunError> {
        let mut reports = BTreeMap::new();
        let mut csv = csv::Writer::from_writer(Vec::new());
        csv.write_record(["instance", "budget", "scale", "value", "verdict"])
            .expect("in-memory write");
        for exp in &self.experiments {
            let name = exp.name().to_string();
            let (report, rows) = self.run_one(exp).map_err(|source| RunError::Experiment {
                name: name.clone(),
                source,
            })?;
            for r in rows {
                csv.write_record([
                    name.clone(),
                    r.budget.to_string(),
                    r.scale.to_string(),
                    r.value,
                    r.verdict,
                ])
                .expect("in-memory write");
            }
            if reports.insert(name.clone(), report).is_some() {
                return Err(RunError::DuplicateName(name));
            }
        }
        Ok(RunOutput {
            reports,
            csv: String::from_utf8(csv.into_inner().expect("flush")).expect("utf8"),
        })
    }

    fn run_one(&self, exp: &Experiment) -> Result<(serde_json::Value, Vec<CheckRow>), AnalysisError> {
        let ladder = &self.budget_ladder;
        Ok(match exp {
            Experiment::Classify { generator, .. } => (to_value(&generator.classify_almost_ray()), vec![]),
            Experiment::Construct {
                case,
                generator,
                sequence,
                ..
            } => {
                let (scheme, witness) = match case {
                    ConstructCase::Hub => construct_hub_labeling(generator, sequence, ladder)?,
                    ConstructCase::Ray => construct_ray_labeling(generator, sequence, ladder)?,
                    ConstructCase::Branch => construct_branch_labeling(generator, sequence, ladder)?,
                };
                (serde_json::json!({ "scheme": scheme, "witness": witness }), vec![])
            }
            Experiment::Profile { generator, scheme, .. } => {
                let rungs = crate::analysis::build_rungs(generator, scheme, ladder)?;
                let profiles = profiles_on(&rungs, &self.radius_grid);
                let rows = profiles
                    .iter()
                    .flat_map(|p| {
                        p.budgets.iter().zip(&p.counts).map(|(b, n)| CheckRow {
                            budget: *b,
                            scale: p.radius.clone(),
                            value: n.to_string(),
                            verdict: to_value(&p.verdict).as_str().expect("unit variant").to_string(),
                        })
                    })
                    .collect();
                (to_value(&profiles), rows)
            }
            Experiment::CheckSubsequence {
                generator,
                scheme,
                sequence,
                ..
            } => {
                let mut r = check_subsequence_criterion(generator, scheme, sequence, ladder, &self.epsilon_grid)?;
                let rows = std::mem::take(&mut r.rows);
                (to_value(&r), rows)
            }
            Experiment::CheckBounded {
                generator,
                scheme,
                subsets,
                ..
            } => {
                let mut r =
                    check_bounded_subset_criterion(generator, scheme, ladder, &self.radius_grid, self.seed, subsets)?;
                let rows = std::mem::take(&mut r.rows);
                (to_value(&r), rows)
            }
            Experiment::Conjecture {
                kind,
                generator,
                scheme,
                ..
            } => {
                let mut r = conjecture_experiment(*kind, generator, scheme, &self.epsilon_grid, self.mass, ladder)?;
                let rows = std::mem::take(&mut r.rows);
                (to_value(&r), rows)
            }
        })
    }
}

/// A ray with a three-vertex cherry hanging off `v_2`.
fn ray_with_finite_tree() -> TreeGenerator {
    TreeGenerator::graft(
        TreeGenerator::Ray,
        Address::root().child(0),
        TreeGenerator::Finite { parents: vec![0, 0] },
    )
}

fn two_rays() -> TreeGenerator {
    TreeGenerator::graft(TreeGenerator::Ray, Address::root(), TreeGenerator::Ray)
}

/// Every canonical instance: classification, the three constructions, both
/// criteria on almost rays and on their counterexamples, and the three
/// cluster-count experiments.
pub fn default_suite(seed: u64) -> RunConfig {
    let spine = RaySpec::new(Address::root(), 0);
    let harmonic = LabelingScheme::harmonic_ray();
    let attach = |rays: Vec<RaySpec>| LabelingScheme::HarmonicOnRay {
        rays,
        off_ray: OffRay::Attachment,
    };
    let comb = TreeGenerator::comb(1);
    let star = TreeGenerator::star(1);
    let on_spine = SequenceSpec::RayVertices {
        ray: spine.clone(),
        from: 1,
    };
    let name = String::from;
    let experiments = vec![
        Experiment::Classify {
            name: name("classify-ray-graft"),
            generator: ray_with_finite_tree(),
        },
        Experiment::Classify {
            name: name("classify-comb"),
            generator: comb.clone(),
        },
        Experiment::Construct {
            name: name("construct-hub-star"),
            case: ConstructCase::Hub,
            generator: star.clone(),
            sequence: SequenceSpec::ArmTips,
        },
        Experiment::Construct {
            name: name("construct-ray-comb"),
            case: ConstructCase::Ray,
            generator: comb.clone(),
            sequence: SequenceSpec::teeth_and_spine(),
        },
        Experiment::Construct {
            name: name("construct-branch-comb"),
            case: ConstructCase::Branch,
            generator: comb.clone(),
            sequence: SequenceSpec::ToothTips,
        },
        Experiment::CheckSubsequence {
            name: name("subsequence-ray"),
            generator: TreeGenerator::Ray,
            scheme: harmonic.clone(),
            sequence: on_spine.clone(),
        },
        Experiment::CheckSubsequence {
            name: name("subsequence-star"),
            generator: star.clone(),
            scheme: LabelingScheme::constant(Label::one()),
            sequence: SequenceSpec::ArmTips,
        },
        Experiment::CheckSubsequence {
            name: name("subsequence-comb-teeth-and-spine"),
            generator: comb.clone(),
            scheme: harmonic.clone(),
            sequence: SequenceSpec::teeth_and_spine(),
        },
        Experiment::CheckSubsequence {
            name: name("subsequence-comb-teeth"),
            generator: comb.clone(),
            scheme: harmonic.clone(),
            sequence: SequenceSpec::ToothTips,
        },
        Experiment::Profile {
            name: name("profile-ray"),
            generator: TreeGenerator::Ray,
            scheme: harmonic.clone(),
        },
        Experiment::CheckBounded {
            name: name("bounded-ray-graft"),
            generator: ray_with_finite_tree(),
            scheme: harmonic.clone(),
            subsets: vec![],
        },
        Experiment::CheckBounded {
            name: name("bounded-binary"),
            generator: TreeGenerator::FullBinary,
            scheme: LabelingScheme::constant(Label::one()),
            subsets: vec![],
        },
        Experiment::CheckBounded {
            name: name("bounded-comb"),
            generator: comb.clone(),
            scheme: harmonic.clone(),
            subsets: vec![SubsetRule::SequenceRange { sequence: on_spine }],
        },
        Experiment::Conjecture {
            name: name("conjecture-comb"),
            kind: ConjectureKind::OneRay,
            generator: TreeGenerator::comb(2),
            scheme: attach(vec![spine.clone()]),
        },
        Experiment::Conjecture {
            name: name("conjecture-two-rays"),
            kind: ConjectureKind::OneRay,
            generator: two_rays(),
            scheme: attach(vec![spine, RaySpec::new(Address::root().child(1), 0)]),
        },
        Experiment::Conjecture {
            name: name("conjecture-star"),
            kind: ConjectureKind::Rayless,
            generator: TreeGenerator::star(2),
            scheme: LabelingScheme::ArmHarmonic { hub: Address::root() },
        },
    ];
    RunConfig {
        seed,
        budget_ladder: default_ladder(),
        radius_grid: default_grid(),
        epsilon_grid: default_grid(),
        mass: default_mass(),
        experiments,
    }
}
