//! Finite-budget diagnostics for statements about infinite trees.
//!
//! "Cauchy", "infinite" and "bounded" are never asserted outright. Verdicts
//! are indexed by a scale `epsilon` and a horizon, and growth is read off a
//! ladder of truncation budgets: strictly increasing counts mean growing,
//! equal counts on the last two rungs mean stable, anything else is
//! inconclusive.

pub mod cauchy;
pub mod checks;
pub mod conjecture;
pub mod profile;

use crate::generators::GenError;
use crate::index::IndexError;

pub use cauchy::{
    common_subsequence, common_subsequence_at_scale, extract_cauchy_subsequence, gap_profile, CauchyDiagnostic,
    CommonSubsequence, GreedySubsequence, Verdict,
};
pub use checks::{
    check_bounded_subset_criterion, check_subsequence_criterion, ray_agreement, AgreementRow, CheckRow, Claim,
    RayAgreement, Status, TheoremReport, Witness,
};
pub use conjecture::{
    conjecture_experiment, ClusterSeries, ClusterTrend, ConjectureKind, ConjectureReport, EXPLORATORY,
};
pub use profile::{
    build_rungs, default_registry, subset_profile, totally_bounded_profile, Boundedness, BoundednessProfile, Rung,
    SubsetProfile, SubsetRule,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("sequence leaves the truncation; usable horizon {usable}")]
    SequenceLeavesTruncation { usable: usize },
    #[error("no term qualifies at level {0} of the schedule")]
    ScheduleStalls(usize),
    #[error("the sequences share only finitely many terms at this scale")]
    FiniteIntersectionAtScale,
    #[error("precondition not met: {0}")]
    PreconditionMismatch(String),
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error(transparent)]
    Index(#[from] IndexError),
}
