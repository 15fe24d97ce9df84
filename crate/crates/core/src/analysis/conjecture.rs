//! Exploratory cluster-count experiments.
//!
//! Two open questions about which trees admit a labeling whose space has a
//! single accumulation point are probed by counting massive `epsilon`
//! clusters across a ladder. The output can support or challenge a guess;
//! it never settles one.

use serde::{Deserialize, Serialize};

use super::checks::{describe, CheckRow};
use super::profile::build_rungs;
use super::AnalysisError;
use crate::generators::{LabelingScheme, TreeGenerator, Trend};
use crate::label::Radius;
use crate::parallel;

pub const EXPLORATORY: &str = "EXPLORATORY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConjectureKind {
    /// a locally finite infinite tree has a labeling with exactly one
    /// accumulation point iff it has exactly one end
    OneRay,
    /// a rayless tree has such a labeling iff it has exactly one vertex of
    /// infinite degree
    Rayless,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "trend", rename_all = "kebab-case")]
pub enum ClusterTrend {
    StableAt { count: usize },
    Grows,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterSeries {
    pub epsilon: Radius,
    pub budgets: Vec<usize>,
    pub counts: Vec<usize>,
    pub trend: ClusterTrend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub label: &'static str,
    pub kind: ConjectureKind,
    pub instance: String,
    pub mass: usize,
    pub series: Vec<ClusterSeries>,
    /// common count of the longest run of smallest scales that are all
    /// stable at the same value
    pub stable_count: Option<usize>,
    /// the largest scale of that run
    pub stable_below: Option<Radius>,
    pub summary: String,
    pub rows: Vec<CheckRow>,
}

pub fn conjecture_experiment(
    kind: ConjectureKind,
    gen: &TreeGenerator,
    scheme: &LabelingScheme,
    epsilons: &[Radius],
    mass: usize,
    ladder: &[usize],
) -> Result<ConjectureReport, AnalysisError> {
    let profile = gen.profile();
    match kind {
        ConjectureKind::OneRay if !profile.is_locally_finite() => {
            return Err(AnalysisError::PreconditionMismatch(
                "generator is not locally finite".into(),
            ));
        }
        ConjectureKind::Rayless if !profile.is_rayless() => {
            return Err(AnalysisError::PreconditionMismatch("generator contains a ray".into()));
        }
        _ if profile.is_finite() => {
            return Err(AnalysisError::PreconditionMismatch("generator is finite".into()));
        }
        _ => {}
    }
    let rungs = build_rungs(gen, scheme, ladder)?;
    let mut eps: Vec<Radius> = epsilons.to_vec();
    eps.sort_unstable_by(|a, b| b.cmp(a));
    eps.dedup();

    let mut series = Vec::new();
    let mut rows = Vec::new();
    for e in &eps {
        let counts = parallel::map(&rungs, |r| r.index.epsilon_clusters(e, mass).map(|c| c.clusters.len()))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let trend = match Trend::of(&counts) {
            Trend::Stable => ClusterTrend::StableAt {
                count: *counts.last().expect("nonempty ladder"),
            },
            Trend::Growing => ClusterTrend::Grows,
            Trend::Mixed => ClusterTrend::Mixed,
        };
        let word = match &trend {
            ClusterTrend::StableAt { count } => format!("stable-at-{count}"),
            ClusterTrend::Grows => "grows".into(),
            ClusterTrend::Mixed => "mixed".into(),
        };
        for (b, c) in ladder.iter().zip(&counts) {
            rows.push(CheckRow {
                budget: *b,
                scale: e.clone(),
                value: c.to_string(),
                verdict: word.clone(),
            });
        }
        series.push(ClusterSeries {
            epsilon: e.clone(),
            budgets: ladder.to_vec(),
            counts,
            trend,
        });
    }

    let mut stable_count = None;
    let mut stable_below = None;
    for s in series.iter().rev() {
        match (&s.trend, stable_count) {
            (ClusterTrend::StableAt { count }, None) => {
                stable_count = Some(*count);
                stable_below = Some(s.epsilon.clone());
            }
            (ClusterTrend::StableAt { count }, Some(c)) if *count == c => stable_below = Some(s.epsilon.clone()),
            _ => break,
        }
    }
    let summary = match (stable_count, &stable_below) {
        (Some(c), Some(e)) => format!("{EXPLORATORY}: massive cluster count stable at {c} for epsilon <= {e}"),
        _ => format!("{EXPLORATORY}: massive cluster count does not stabilize at the smallest epsilon"),
    };
    Ok(ConjectureReport {
        label: EXPLORATORY,
        kind,
        instance: format!(
            "{}; scheme {}",
            describe(gen),
            serde_json::to_string(scheme).expect("serializable")
        ),
        mass,
        series,
        stable_count,
        stable_below,
        summary,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{doubling_ladder, OffRay, RaySpec};
    use crate::vertex::Address;

    fn grid() -> Vec<Radius> {
        (1..=6).map(|k| Radius::reciprocal(1 << k)).collect()
    }

    #[test]
    fn one_ray_with_teeth() {
        let scheme = LabelingScheme::HarmonicOnRay {
            rays: vec![RaySpec::new(Address::root(), 0)],
            off_ray: OffRay::Attachment,
        };
        let r = conjecture_experiment(
            ConjectureKind::OneRay,
            &TreeGenerator::comb(2),
            &scheme,
            &grid(),
            8,
            &doubling_ladder(200, 3),
        )
        .unwrap();
        assert_eq!(r.label, EXPLORATORY);
        assert_eq!(r.stable_count, Some(1));
    }

    #[test]
    fn preconditions() {
        let err = conjecture_experiment(
            ConjectureKind::Rayless,
            &TreeGenerator::Ray,
            &LabelingScheme::harmonic_ray(),
            &grid(),
            8,
            &[100, 200],
        );
        assert!(matches!(err, Err(AnalysisError::PreconditionMismatch(_))));
        let err = conjecture_experiment(
            ConjectureKind::OneRay,
            &TreeGenerator::path(5),
            &LabelingScheme::harmonic_ray(),
            &grid(),
            8,
            &[100, 200],
        );
        assert!(matches!(err, Err(AnalysisError::PreconditionMismatch(_))));
    }
}
