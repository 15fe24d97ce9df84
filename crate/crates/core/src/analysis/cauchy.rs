//! Cauchy diagnostics on finite prefixes.

use std::collections::HashMap;

use serde::Serialize;

use super::AnalysisError;
use crate::generators::{Growth, Materialized, SequenceSpec, TreeGenerator};
use crate::index::UltrametricIndex;
use crate::label::{Label, Radius};
use crate::tree::LabeledTree;
use crate::vertex::VertexId;

/// Consecutive gaps `d(x_n, x_{n+1})` for `n = 1..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CauchyDiagnostic {
    pub horizon: usize,
    /// `gaps[n - 1] = d(x_n, x_{n+1})`
    pub gaps: Vec<Label>,
    /// `tail_sup[n - 1] = max_{m >= n} gaps[m - 1]`
    pub tail_sup: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    HoldsUpTo { horizon: usize },
    FailsWithWitness { index: usize, gap: Label },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsUpTo { .. })
    }
}

impl CauchyDiagnostic {
    pub fn from_gaps(gaps: Vec<Label>) -> Self {
        let mut tail_sup = gaps.clone();
        for i in (0..tail_sup.len().saturating_sub(1)).rev() {
            if tail_sup[i + 1] > tail_sup[i] {
                tail_sup[i] = tail_sup[i + 1].clone();
            }
        }
        CauchyDiagnostic {
            horizon: gaps.len(),
            gaps,
            tail_sup,
        }
    }

    /// Holds iff every gap `d(x_n, x_{n+1})` with `start <= n <= horizon`
    /// is below `epsilon`; otherwise names the first offending `n`.
    pub fn verdict(&self, epsilon: &Radius, start: usize) -> Verdict {
        let s = start.max(1);
        if s > self.horizon || self.tail_sup[s - 1] < *epsilon.label() {
            return Verdict::HoldsUpTo { horizon: self.horizon };
        }
        let n = (s..=self.horizon)
            .find(|&n| self.gaps[n - 1] >= *epsilon.label())
            .expect("tail supremum is attained");
        Verdict::FailsWithWitness {
            index: n,
            gap: self.gaps[n - 1].clone(),
        }
    }

    /// Verdict over the second half of the horizon.
    pub fn tail_verdict(&self, epsilon: &Radius) -> Verdict {
        self.verdict(epsilon, self.horizon / 2)
    }
}

/// Gap profile of the first `horizon + 1` terms of `seq`.
pub fn gap_profile(
    index: &UltrametricIndex,
    seq: &[VertexId],
    horizon: usize,
) -> Result<CauchyDiagnostic, AnalysisError> {
    let usable = seq.iter().take_while(|v| index.tree().contains(v)).count();
    if usable < horizon + 1 {
        return Err(AnalysisError::SequenceLeavesTruncation {
            usable: usable.saturating_sub(1),
        });
    }
    let gaps = seq[..=horizon]
        .windows(2)
        .map(|w| index.distance(&w[0], &w[1]).expect("checked").clone())
        .collect();
    Ok(CauchyDiagnostic::from_gaps(gaps))
}

/// Greedy `n_1 = 1`, `n_k = min{i > n_{k-1} : labels[i - 1] <= 1/k}`.
/// Returns the indices and the level at which no term qualified.
pub(crate) fn greedy_indices(labels: &[Label]) -> (Vec<usize>, usize) {
    if labels.is_empty() {
        return (vec![], 1);
    }
    let mut out = vec![1];
    let mut k = 2u64;
    let mut i = 1;
    loop {
        let bound = Label::reciprocal(k);
        match (i..labels.len()).find(|&j| labels[j] <= bound) {
            Some(j) => {
                out.push(j + 1);
                i = j + 1;
                k += 1;
            }
            None => return (out, k as usize),
        }
    }
}

/// Indices `n_k` of the greedy subsequence and the level where it stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedySubsequence {
    pub indices: Vec<usize>,
    pub stalled_at: usize,
}

/// Picks `n_k = min{i > n_{k-1} : l(u_i) <= 1/k}` until no term within the
/// truncation qualifies. Fails only if level 2 already stalls, since then
/// not a single step of the schedule can be taken.
pub fn extract_cauchy_subsequence(tree: &LabeledTree, seq: &[VertexId]) -> Result<GreedySubsequence, AnalysisError> {
    let mut labels = Vec::with_capacity(seq.len());
    for (i, v) in seq.iter().enumerate() {
        match tree.label(v) {
            Some(l) => labels.push(l.clone()),
            None => return Err(AnalysisError::SequenceLeavesTruncation { usable: i }),
        }
    }
    let (indices, stalled_at) = greedy_indices(&labels);
    if indices.len() < 2 {
        return Err(AnalysisError::ScheduleStalls(stalled_at));
    }
    Ok(GreedySubsequence { indices, stalled_at })
}

/// Pairs `(n_k, m_k)` with `a[n_k] = b[m_k]`, both strictly increasing:
/// `n_{k+1}` is the least index after `n_k` whose term occurs in `b`
/// after position `m_k`.
pub fn common_subsequence(a: &[VertexId], b: &[VertexId]) -> Result<Vec<(usize, usize)>, AnalysisError> {
    let pos: HashMap<&VertexId, usize> = b.iter().enumerate().map(|(m, v)| (v, m + 1)).collect();
    let mut pairs = Vec::new();
    let mut last_m = 0;
    for (n, v) in a.iter().enumerate() {
        if let Some(&m) = pos.get(v) {
            if m > last_m {
                pairs.push((n + 1, m));
                last_m = m;
            }
        }
    }
    if pairs.is_empty() {
        return Err(AnalysisError::FiniteIntersectionAtScale);
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonSubsequence {
    pub pairs: Vec<(usize, usize)>,
    pub growth: Growth,
}

/// [`common_subsequence`] on every rung of a ladder; the pairing must grow
/// strictly for the intersection to count as infinite.
pub fn common_subsequence_at_scale(
    gen: &TreeGenerator,
    a: &SequenceSpec,
    b: &SequenceSpec,
    ladder: &[usize],
) -> Result<CommonSubsequence, AnalysisError> {
    crate::generators::validate_ladder(ladder)?;
    let mut counts = Vec::new();
    let mut pairs = Vec::new();
    for &budget in ladder {
        let mat: Materialized = gen.materialize(budget)?;
        let sa = a.materialize(gen, &mat)?;
        let sb = b.materialize(gen, &mat)?;
        pairs = common_subsequence(sa.terms(), sb.terms()).unwrap_or_default();
        counts.push(pairs.len());
    }
    let growth = Growth::new(ladder.to_vec(), counts);
    if !growth.is_growing() {
        return Err(AnalysisError::FiniteIntersectionAtScale);
    }
    Ok(CommonSubsequence { pairs, growth })
}
