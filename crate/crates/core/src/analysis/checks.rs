//! Budget-ladder checks of the characterization of almost rays.
//!
//! Nothing here proves anything about infinite trees. Every claim is
//! evaluated on the truncations of a ladder and a finite grid of scales, and
//! each failure carries vertices and exact distances that can be replayed
//! through [`UltrametricIndex::distance`].

use serde::Serialize;

use super::cauchy::{extract_cauchy_subsequence, CauchyDiagnostic, Verdict};
use super::profile::{
    build_rungs, default_registry, profiles_on, subset_profile, Boundedness, BoundednessProfile, SubsetProfile,
    SubsetRule,
};
use super::AnalysisError;
use crate::generators::{
    construct_branch_labeling, construct_hub_labeling, construct_ray_labeling, CaseTag, CaseWitness, Classification,
    GenError, LabelingScheme, SequenceSpec, TreeGenerator,
};
use crate::index::UltrametricIndex;
use crate::label::{Label, Radius};
use crate::vertex::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    ConsistentAtScale,
    Violated,
    Inconclusive,
}

/// Vertices and their exact pairwise distances `d(vertices[i], vertices[i + 1])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub budget: usize,
    pub vertices: Vec<VertexId>,
    pub distances: Vec<Label>,
}

impl Witness {
    fn chain(index: &UltrametricIndex, budget: usize, vertices: Vec<VertexId>) -> Self {
        let distances = vertices
            .windows(2)
            .map(|w| index.distance(&w[0], &w[1]).expect("materialized").clone())
            .collect();
        Witness {
            budget,
            vertices,
            distances,
        }
    }

    /// Recomputes the distances and compares them exactly.
    pub fn replays(&self, index: &UltrametricIndex) -> bool {
        self.vertices.len() == self.distances.len() + 1
            && self
                .vertices
                .windows(2)
                .zip(&self.distances)
                .all(|(w, d)| index.distance(&w[0], &w[1]).is_ok_and(|x| x == d))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub witness: Option<Witness>,
}

impl Claim {
    fn new(name: &str, status: Status, detail: impl Into<String>, witness: Option<Witness>) -> Self {
        Claim {
            name: name.to_string(),
            status,
            detail: detail.into(),
            witness,
        }
    }
}

/// One (scale, budget) row of a check, for CSV export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRow {
    pub budget: usize,
    pub scale: Radius,
    pub value: String,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub instance: String,
    pub budgets: Vec<usize>,
    pub classification: Classification,
    pub case: Option<CaseTag>,
    pub claims: Vec<Claim>,
    pub status: Status,
    pub scheme: Option<LabelingScheme>,
    pub witness: Option<CaseWitness>,
    pub profiles: Vec<BoundednessProfile>,
    pub subsets: Vec<SubsetProfile>,
    pub rows: Vec<CheckRow>,
}

fn overall(claims: &[Claim]) -> Status {
    if claims.iter().any(|c| c.status == Status::Violated) {
        Status::Violated
    } else if claims.is_empty() || claims.iter().any(|c| c.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::ConsistentAtScale
    }
}

fn ids(terms: &[crate::vertex::Address]) -> Vec<VertexId> {
    terms.iter().cloned().map(VertexId::Addr).collect()
}

/// The sequence criterion: when the hull of the sequence is almost a ray, a
/// Cauchy subsequence forces the whole sequence to be Cauchy; when it is
/// not, one of three labelings produces a Cauchy subsequence while
/// infinitely many terms stay at distance `1` from each other.
///
/// On an almost-ray hull every budget and every `epsilon` of the grid is
/// checked: if the greedy subsequence passes the tail test at `epsilon`,
/// the full sequence must pass it too. Otherwise the matching constructor
/// runs and its witness is verified.
pub fn check_subsequence_criterion(
    gen: &TreeGenerator,
    scheme: &LabelingScheme,
    seq: &SequenceSpec,
    ladder: &[usize],
    epsilons: &[Radius],
) -> Result<TheoremReport, AnalysisError> {
    let views = crate::generators::build_views(gen, seq, ladder)?;
    let classification = gen.classify_almost_ray();
    let mut report = TheoremReport {
        instance: format!(
            "{}; sequence {}",
            describe(gen),
            serde_json::to_string(seq).expect("serializable")
        ),
        budgets: ladder.to_vec(),
        classification,
        case: None,
        claims: vec![],
        status: Status::Inconclusive,
        scheme: None,
        witness: None,
        profiles: vec![],
        subsets: vec![],
        rows: vec![],
    };
    let detection = match crate::generators::detect_on_views(gen, &views) {
        Ok(d) => d,
        Err(GenError::HullInconclusive) => {
            report.claims.push(Claim::new(
                "hull-case",
                Status::Inconclusive,
                "growth evidence along the ladder does not settle the shape of the hull",
                None,
            ));
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    report.case = Some(detection.case);
    match detection.case {
        CaseTag::AlmostRay => almost_ray_claims(&mut report, gen, scheme, &views, epsilons)?,
        case => {
            let (scheme, witness) = match case {
                CaseTag::InfiniteDegree => construct_hub_labeling(gen, seq, ladder)?,
                CaseTag::RayMeetsSequence => construct_ray_labeling(gen, seq, ladder)?,
                _ => construct_branch_labeling(gen, seq, ladder)?,
            };
            witness_claims(&mut report, gen, &scheme, &witness, &views)?;
            report.scheme = Some(scheme);
            report.witness = Some(witness);
        }
    }
    report.status = overall(&report.claims);
    Ok(report)
}

fn almost_ray_claims(
    report: &mut TheoremReport,
    gen: &TreeGenerator,
    scheme: &LabelingScheme,
    views: &[crate::generators::ScaleView],
    epsilons: &[Radius],
) -> Result<(), AnalysisError> {
    let ladder: Vec<usize> = views.iter().map(|v| v.budget).collect();
    let rungs = build_rungs(gen, scheme, &ladder)?;
    let mut violation = None;
    let mut checked = 0;
    for (rung, view) in rungs.iter().zip(views) {
        let seq = ids(&view.terms);
        let tree = rung.index.tree();
        let Ok(sub) = extract_cauchy_subsequence(tree, &seq) else {
            continue;
        };
        let gaps = |terms: &[VertexId]| {
            CauchyDiagnostic::from_gaps(
                terms
                    .windows(2)
                    .map(|w| rung.index.distance(&w[0], &w[1]).expect("materialized").clone())
                    .collect(),
            )
        };
        let full = gaps(&seq);
        let subterms: Vec<VertexId> = sub.indices.iter().map(|&n| seq[n - 1].clone()).collect();
        let part = gaps(&subterms);
        for eps in epsilons {
            let (vs, vf) = (part.tail_verdict(eps), full.tail_verdict(eps));
            checked += 1;
            report.rows.push(CheckRow {
                budget: rung.budget,
                scale: eps.clone(),
                value: full
                    .tail_sup
                    .get(full.horizon / 2)
                    .map_or_else(|| "0/1".into(), |l| l.to_string()),
                verdict: format!("subsequence:{};sequence:{}", verdict_word(&vs), verdict_word(&vf)),
            });
            if let (true, Verdict::FailsWithWitness { index, .. }) = (vs.holds(), &vf) {
                if violation.is_none() {
                    violation = Some(Witness::chain(
                        &rung.index,
                        rung.budget,
                        vec![seq[index - 1].clone(), seq[*index].clone()],
                    ));
                }
            }
        }
    }
    report.claims.push(match violation {
        Some(w) => Claim::new(
            "subsequence-cauchy-implies-cauchy",
            Status::Violated,
            "a Cauchy-at-scale subsequence coexists with a failing tail of the full sequence",
            Some(w),
        ),
        None if checked == 0 => Claim::new(
            "subsequence-cauchy-implies-cauchy",
            Status::Inconclusive,
            "no greedy subsequence could be extracted on any rung",
            None,
        ),
        None => Claim::new(
            "subsequence-cauchy-implies-cauchy",
            Status::ConsistentAtScale,
            format!("{checked} (budget, scale) pairs checked"),
            None,
        ),
    });
    Ok(())
}

fn verdict_word(v: &Verdict) -> &'static str {
    if v.holds() {
        "holds"
    } else {
        "fails"
    }
}

/// Pairs of subsequence terms whose distances are checked in full.
const PAIR_CHECK_LIMIT: usize = 200;

fn witness_claims(
    report: &mut TheoremReport,
    gen: &TreeGenerator,
    scheme: &LabelingScheme,
    w: &CaseWitness,
    views: &[crate::generators::ScaleView],
) -> Result<(), AnalysisError> {
    let last = views.last().expect("nonempty ladder");
    let budget = last.budget;
    let index = UltrametricIndex::build(last.mat.label(scheme)?)?;
    let seq = ids(&last.terms);

    let bad_gap = w
        .gaps
        .iter()
        .enumerate()
        .find(|(k, g)| **g > Label::reciprocal(*k as u64 + 1));
    report.claims.push(match bad_gap {
        None if w.gaps.is_empty() => Claim::new(
            "subsequence-gaps",
            Status::Inconclusive,
            "subsequence has fewer than two terms",
            None,
        ),
        None => Claim::new(
            "subsequence-gaps",
            Status::ConsistentAtScale,
            format!("{} gaps, gap k at most 1/k", w.gaps.len()),
            None,
        ),
        Some((k, _)) => Claim::new(
            "subsequence-gaps",
            Status::Violated,
            format!("gap {} exceeds 1/{}", k + 1, k + 1),
            Some(Witness::chain(
                &index,
                budget,
                vec![seq[w.subsequence[k] - 1].clone(), seq[w.subsequence[k + 1] - 1].clone()],
            )),
        ),
    });

    let ones: Vec<usize> = (0..seq.len())
        .filter(|&i| index.tree().label(&seq[i]).is_some_and(|l| *l == Label::one()))
        .collect();
    report
        .claims
        .push(if w.label_one_terms.is_growing() && ones.len() >= 2 {
            let pair = vec![seq[ones[ones.len() - 2]].clone(), seq[ones[ones.len() - 1]].clone()];
            let wit = Witness::chain(&index, budget, pair);
            let status = if wit.distances[0] >= Label::one() {
                Status::ConsistentAtScale
            } else {
                Status::Violated
            };
            Claim::new(
                "label-one-terms-unbounded",
                status,
                format!("label-1 terms per rung: {:?}", w.label_one_terms.counts),
                Some(wit),
            )
        } else {
            Claim::new(
                "label-one-terms-unbounded",
                Status::Violated,
                format!("label-1 terms per rung do not grow: {:?}", w.label_one_terms.counts),
                None,
            )
        });

    if w.case == CaseTag::RayAvoidsSequence {
        let empty = w.side_sets.iter().find(|s| s.witnesses.is_empty());
        report.claims.push(match empty {
            None => Claim::new(
                "side-sets-hit",
                Status::ConsistentAtScale,
                format!("{} side sets, each holding a term", w.side_sets.len()),
                None,
            ),
            Some(s) => Claim::new(
                "side-sets-hit",
                Status::Violated,
                format!("side set k={} holds no term", s.k),
                None,
            ),
        });

        let reps: Vec<(u64, VertexId)> = w
            .subsequence
            .iter()
            .take(PAIR_CHECK_LIMIT)
            .map(|&n| {
                let s = w
                    .side_sets
                    .iter()
                    .find(|s| s.witnesses.contains(&n))
                    .expect("term of a side set");
                (s.branch, seq[n - 1].clone())
            })
            .collect();
        let mut bad = None;
        let mut pairs = 0;
        'outer: for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                pairs += 1;
                let want = Label::reciprocal(reps[i].0.min(reps[j].0));
                if *index.distance(&reps[i].1, &reps[j].1)? != want {
                    bad = Some(Witness::chain(
                        &index,
                        budget,
                        vec![reps[i].1.clone(), reps[j].1.clone()],
                    ));
                    break 'outer;
                }
            }
        }
        report.claims.push(match bad {
            None => Claim::new(
                "even-block-distances",
                Status::ConsistentAtScale,
                format!("{pairs} pairs at distance max(1/n_k1, 1/n_k2)"),
                None,
            ),
            Some(wit) => Claim::new(
                "even-block-distances",
                Status::Violated,
                "pair distance differs",
                Some(wit),
            ),
        });
    }
    let _ = gen;
    Ok(())
}

/// Total boundedness against bounded infinite subsets. For an almost ray,
/// a subset that is infinite and bounded at every radius forces the whole
/// space to be bounded. For other trees the report records whether this
/// labeling separates the two properties.
pub fn check_bounded_subset_criterion(
    gen: &TreeGenerator,
    scheme: &LabelingScheme,
    ladder: &[usize],
    radii: &[Radius],
    seed: u64,
    extra: &[SubsetRule],
) -> Result<TheoremReport, AnalysisError> {
    let rungs = build_rungs(gen, scheme, ladder)?;
    let profiles = profiles_on(&rungs, radii);
    let mut rules = default_registry(gen, seed);
    rules.extend(extra.iter().cloned());
    let subsets: Vec<SubsetProfile> = rules
        .iter()
        .map(|r| subset_profile(gen, &rungs, r, radii))
        .collect::<Result<_, _>>()?;
    let classification = gen.classify_almost_ray();

    let full_bounded = profiles.iter().all(|p| p.verdict == Boundedness::Bounded);
    let growing = profiles.iter().find(|p| p.verdict == Boundedness::Growing);
    let mixed = profiles.iter().any(|p| p.verdict == Boundedness::Inconclusive);
    let witness_subset = subsets.iter().find(|s| s.infinite && s.bounded);

    let last = rungs.last().expect("nonempty ladder");
    let separation = |p: &BoundednessProfile| {
        // block centers of the largest truncation, pairwise at least r apart
        let cover = last.index.partition_at_scale(&p.radius);
        let centers: Vec<VertexId> = cover.blocks.iter().take(8).map(|b| b.center.clone()).collect();
        Witness::chain(&last.index, last.budget, centers)
    };

    let mut rows = Vec::new();
    for p in &profiles {
        for (b, n) in p.budgets.iter().zip(&p.counts) {
            rows.push(CheckRow {
                budget: *b,
                scale: p.radius.clone(),
                value: n.to_string(),
                verdict: format!("{:?}", p.verdict).to_lowercase(),
            });
        }
    }

    let claim = match (&classification, witness_subset, growing) {
        (Classification::AlmostRay(_), Some(s), Some(p)) => Claim::new(
            "bounded-subset-implies-bounded",
            Status::Violated,
            format!(
                "subset {} is infinite and bounded but N({}) grows: {:?}",
                rule_name(&s.rule),
                p.radius,
                p.counts
            ),
            Some(separation(p)),
        ),
        (Classification::AlmostRay(_), Some(s), None) if full_bounded => Claim::new(
            "bounded-subset-implies-bounded",
            Status::ConsistentAtScale,
            format!(
                "subset {} is infinite and bounded, and so is the space",
                rule_name(&s.rule)
            ),
            None,
        ),
        (Classification::AlmostRay(_), None, _) if !mixed => Claim::new(
            "bounded-subset-implies-bounded",
            Status::ConsistentAtScale,
            if full_bounded {
                "the space is bounded at every radius".to_string()
            } else {
                "no infinite bounded subset and the space is not bounded".to_string()
            },
            None,
        ),
        (Classification::AlmostRay(_), _, _) => Claim::new(
            "bounded-subset-implies-bounded",
            Status::Inconclusive,
            "covering numbers neither stabilize nor grow on some radius",
            None,
        ),
        (Classification::NotAlmostRay(_), Some(s), Some(p)) => Claim::new(
            "labeling-separates",
            Status::ConsistentAtScale,
            format!(
                "subset {} is infinite and bounded while N({}) grows: {:?}",
                rule_name(&s.rule),
                p.radius,
                p.counts
            ),
            Some(separation(p)),
        ),
        (Classification::NotAlmostRay(_), _, _) => Claim::new(
            "labeling-separates",
            Status::ConsistentAtScale,
            if witness_subset.is_none() {
                "no infinite bounded subset found; this labeling does not separate".to_string()
            } else {
                "the space is bounded; this labeling does not separate".to_string()
            },
            None,
        ),
    };
    let claims = vec![claim];
    Ok(TheoremReport {
        instance: format!(
            "{}; scheme {}",
            describe(gen),
            serde_json::to_string(scheme).expect("serializable")
        ),
        budgets: ladder.to_vec(),
        classification,
        case: None,
        status: overall(&claims),
        claims,
        scheme: Some(scheme.clone()),
        witness: None,
        profiles,
        subsets,
        rows,
    })
}

fn rule_name(rule: &SubsetRule) -> String {
    serde_json::to_string(rule).expect("serializable")
}

pub(crate) fn describe(gen: &TreeGenerator) -> String {
    serde_json::to_string(gen).expect("serializable")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgreementRow {
    pub budget: usize,
    pub epsilon: Radius,
    pub sequence: Verdict,
    pub ray: Verdict,
    pub agree: bool,
}

/// Tail verdicts of a sequence against those of the ray `(v_m)` itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RayAgreement {
    pub rows: Vec<AgreementRow>,
    /// least ladder budget from which every later budget agrees at every
    /// scale of the grid
    pub threshold: Option<usize>,
}

/// On a ray, a sequence of distinct vertices is Cauchy exactly when the ray
/// is. Compares both tail verdicts per budget and scale.
pub fn ray_agreement(
    gen: &TreeGenerator,
    scheme: &LabelingScheme,
    seq: &SequenceSpec,
    ladder: &[usize],
    epsilons: &[Radius],
) -> Result<RayAgreement, AnalysisError> {
    let ray = match gen.classify_almost_ray() {
        Classification::AlmostRay(cert) => cert.ray,
        Classification::NotAlmostRay(_) => {
            return Err(AnalysisError::PreconditionMismatch(
                "generator is not an almost ray".into(),
            ));
        }
    };
    let rungs = build_rungs(gen, scheme, ladder)?;
    let mut rows = Vec::new();
    for rung in &rungs {
        let terms = seq.materialize(gen, &rung.mat)?;
        let mut ray_terms = Vec::new();
        for n in 1.. {
            let v = ray.vertex(n);
            if !rung.mat.contains(&v) {
                break;
            }
            ray_terms.push(VertexId::Addr(v));
        }
        let diag = |t: &[VertexId]| {
            CauchyDiagnostic::from_gaps(
                t.windows(2)
                    .map(|w| rung.index.distance(&w[0], &w[1]).expect("materialized").clone())
                    .collect(),
            )
        };
        let (ds, dr) = (diag(terms.terms()), diag(&ray_terms));
        for eps in epsilons {
            let (s, r) = (ds.tail_verdict(eps), dr.tail_verdict(eps));
            rows.push(AgreementRow {
                budget: rung.budget,
                epsilon: eps.clone(),
                agree: s.holds() == r.holds(),
                sequence: s,
                ray: r,
            });
        }
    }
    let mut threshold = None;
    for &b in ladder.iter().rev() {
        if rows.iter().filter(|r| r.budget == b).all(|r| r.agree) {
            threshold = Some(b);
        } else {
            break;
        }
    }
    Ok(RayAgreement { rows, threshold })
}
