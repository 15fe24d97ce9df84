//! Acceptance suite: one PASS/FAIL line per criterion.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use ultratree::analysis::{
    check_bounded_subset_criterion, check_subsequence_criterion, common_subsequence, conjecture_experiment,
    ray_agreement, totally_bounded_profile, Boundedness, ClusterTrend, ConjectureKind, Status, SubsetRule, EXPLORATORY,
};
use ultratree::generators::{
    construct_branch_labeling, construct_hub_labeling, construct_ray_labeling, truncate, CaseTag, LabelingScheme,
    OffRay, RaySpec, SequenceSpec, TreeGenerator,
};
use ultratree::index::IndexError;
use ultratree::{Address, Label, Radius, UltrametricIndex, VertexId};

use common::{id_set, oracle_distances, pruned_hull, radius_grid, random_tree, rng};

const SEED: u64 = 0x5eed;
const RANDOM_TREES: usize = 1000;
const MAX_VERTICES: usize = 200;
const TRIPLE_TREES: usize = 200;
const MAX_TRIPLE_VERTICES: usize = 60;
const PARTITION_TREES: usize = 300;
const RAY_LADDER: [usize; 5] = [100, 200, 400, 800, 1600];
const ADVERSARIAL_LADDER: [usize; 4] = [1250, 2500, 5000, 10_000];
const EVEN_PAIR_TERMS: usize = 200;
const ISOLATION_BUDGET: usize = 2000;
const CLUSTER_LADDER: [usize; 4] = [200, 400, 800, 1600];
const CLUSTER_MASS: usize = 8;
/// Cluster counts must be stable at every epsilon at most this one.
const CLUSTER_EPS_MAX: u64 = 16;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn halves() -> Vec<Radius> {
    (1..=6).map(|k| Radius::reciprocal(1 << k)).collect()
}

fn ray_vertex(n: u64) -> VertexId {
    VertexId::Addr(Address::root().repeated(0, n - 1))
}

fn distance_oracle() -> Outcome {
    let mut r = rng(SEED);
    let mut pairs = 0u64;
    for t in 0..RANDOM_TREES {
        let n = r.random_range(1..=MAX_VERTICES);
        let tree = random_tree(&mut r, n, 0.3, true);
        let d = oracle_distances(&tree);
        let ix = UltrametricIndex::build(tree).map_err(|e| e.to_string())?;
        for u in 0..n {
            for v in 0..n {
                ensure!(
                    ix.distance_at(u, v) == &d[u][v],
                    "tree {t}: d({u}, {v}) differs from the path maximum"
                );
            }
        }
        pairs += (n * n) as u64;
    }
    Ok(format!("{RANDOM_TREES} trees, {pairs} ordered pairs, exact"))
}

fn ultrametric_iff_nondegenerate() -> Outcome {
    let mut r = rng(SEED + 1);
    let mut triples = 0u64;
    for t in 0..TRIPLE_TREES {
        let n = r.random_range(1..=MAX_TRIPLE_VERTICES);
        let tree = random_tree(&mut r, n, 0.4, true);
        let d = oracle_distances(&tree);
        for x in 0..n {
            for y in 0..n {
                ensure!(d[x][y].is_zero() == (x == y), "tree {t}: identity fails at ({x}, {y})");
                ensure!(d[x][y] == d[y][x], "tree {t}: symmetry fails at ({x}, {y})");
                for z in 0..n {
                    ensure!(
                        d[x][y] <= d[x][z].clone().max(d[z][y].clone()),
                        "tree {t}: strong triangle fails"
                    );
                }
            }
        }
        triples += (n * n * n) as u64;
        let report = UltrametricIndex::build(tree)
            .map_err(|e| e.to_string())?
            .verify_strong_triangle(0, 0);
        ensure!(
            report.exhaustive && report.violations.is_empty(),
            "tree {t}: index reports violations"
        );
    }

    let mut refused = 0;
    while refused < TRIPLE_TREES {
        let n = r.random_range(2..=MAX_TRIPLE_VERTICES);
        let tree = random_tree(&mut r, n, 0.6, false);
        let degenerate = tree.check_nondegenerate().is_err();
        match UltrametricIndex::build(tree.clone()) {
            Err(IndexError::DegenerateLabeling(e)) => {
                ensure!(degenerate, "refused a non-degenerate tree");
                ensure!(e.0 != e.1, "refusal names a single vertex");
                let raw = tree.raw_path_max(&e.0, &e.1).map_err(|e| e.to_string())?;
                ensure!(
                    raw.is_zero(),
                    "refusal witness {{{}, {}}} has raw value {raw}",
                    e.0,
                    e.1
                );
                refused += 1;
            }
            Ok(_) => ensure!(!degenerate, "built an index over a degenerate labeling"),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!(
        "{triples} triples on {TRIPLE_TREES} trees; {refused} degenerate trees refused with zero-distance witnesses"
    ))
}

fn hull_oracle() -> Outcome {
    let mut r = rng(SEED + 2);
    for t in 0..RANDOM_TREES {
        let n = r.random_range(1..=MAX_VERTICES);
        let tree = random_tree(&mut r, n, 0.2, false);
        let k = r.random_range(1..=n.min(8));
        let set: BTreeSet<VertexId> = (0..k).map(|_| VertexId::Int(r.random_range(0..n) as u64)).collect();
        let want = pruned_hull(&tree, &set);
        let hull = tree.convex_hull(&set).map_err(|e| e.to_string())?;
        ensure!(id_set(&hull) == want, "instance {t}: hull differs from leaf pruning");
        for anchor in &set {
            let h = tree.convex_hull_from(&set, anchor).map_err(|e| e.to_string())?;
            ensure!(id_set(&h) == want, "instance {t}: hull depends on anchor {anchor}");
        }
    }
    Ok(format!("{RANDOM_TREES} (tree, S) instances, every anchor of S"))
}

fn check_partition(ix: &UltrametricIndex, d: Option<&[Vec<Label>]>) -> Result<(), String> {
    let n = ix.len();
    let mut last = usize::MAX;
    for r in radius_grid() {
        let cover = ix.partition_at_scale(&r);
        let mut block = vec![usize::MAX; n];
        for (b, ball) in cover.blocks.iter().enumerate() {
            for m in &ball.members {
                let i = ix.tree().position(m).ok_or("unknown member")?;
                ensure!(block[i] == usize::MAX, "blocks overlap at {m}");
                block[i] = b;
            }
        }
        ensure!(block.iter().all(|&b| b != usize::MAX), "blocks do not cover");
        match d {
            Some(d) => {
                for u in 0..n {
                    for v in 0..n {
                        ensure!(
                            (block[u] == block[v]) == (d[u][v] < *r.label()),
                            "block structure wrong at r = {r}"
                        );
                    }
                }
            }
            None => {
                // centers of distinct blocks are at least r apart, members of one block closer
                for (b, ball) in cover.blocks.iter().enumerate() {
                    for m in &ball.members {
                        ensure!(ix.distance(&ball.center, m).unwrap() < r.label(), "block {b} too wide");
                    }
                    for other in &cover.blocks[b + 1..] {
                        ensure!(
                            ix.distance(&ball.center, &other.center).unwrap() >= r.label(),
                            "blocks closer than r"
                        );
                    }
                }
            }
        }
        ensure!(cover.blocks.len() <= last, "N(r) increases with r");
        last = cover.blocks.len();
    }
    Ok(())
}

fn partitions() -> Outcome {
    let mut r = rng(SEED + 3);
    for t in 0..PARTITION_TREES {
        let n = r.random_range(1..=120);
        let tree = random_tree(&mut r, n, 0.3, true);
        let d = oracle_distances(&tree);
        let ix = UltrametricIndex::build(tree).map_err(|e| e.to_string())?;
        check_partition(&ix, Some(&d)).map_err(|e| format!("tree {t}: {e}"))?;
    }
    let truncations = [
        (TreeGenerator::Ray, LabelingScheme::harmonic_ray()),
        (TreeGenerator::comb(2), LabelingScheme::harmonic_ray()),
        (TreeGenerator::FullBinary, LabelingScheme::constant(Label::one())),
    ];
    for (gen, scheme) in &truncations {
        let ix = UltrametricIndex::build(truncate(gen, scheme, 500).map_err(|e| e.to_string())?).unwrap();
        check_partition(&ix, None)?;
    }
    Ok(format!(
        "{PARTITION_TREES} random trees and 3 truncations on a 6-point radius grid"
    ))
}

fn ray_sequences() -> Outcome {
    let spine = SequenceSpec::RayVertices {
        ray: RaySpec::new(Address::root(), 0),
        from: 1,
    };
    let stride = |step, offset| SequenceSpec::Stride {
        inner: Box::new(spine.clone()),
        step,
        offset,
    };
    let sequences = [
        ("evens", stride(2, 1)),
        ("thirds", stride(3, 2)),
        (
            "tail",
            SequenceSpec::RayVertices {
                ray: RaySpec::new(Address::root(), 0),
                from: 7,
            },
        ),
        (
            "swapped pairs",
            SequenceSpec::Interleave {
                parts: vec![stride(2, 1), stride(2, 0)],
            },
        ),
    ];
    let schemes = [
        ("harmonic", LabelingScheme::harmonic_ray()),
        ("constant", LabelingScheme::constant(Label::one())),
    ];
    let mut thresholds = Vec::new();
    for (sname, scheme) in &schemes {
        for (qname, seq) in &sequences {
            let a =
                ray_agreement(&TreeGenerator::Ray, scheme, seq, &RAY_LADDER, &halves()).map_err(|e| e.to_string())?;
            let t = a
                .threshold
                .ok_or(format!("{qname} under {sname}: verdicts still disagree at budget 1600"))?;
            thresholds.push(format!("{qname}/{sname}: {t}"));
        }
    }

    let a: Vec<VertexId> = (1..=800).map(|k| ray_vertex(2 * k)).collect();
    let b: Vec<VertexId> = (1..=1600).map(ray_vertex).collect();
    let pairs = common_subsequence(&a, &b).map_err(|e| e.to_string())?;
    ensure!(pairs.len() == 800, "pairing has {} terms", pairs.len());
    for w in pairs.windows(2) {
        ensure!(w[0].0 < w[1].0 && w[0].1 < w[1].1, "indices not strictly increasing");
    }
    for (n, m) in &pairs {
        ensure!(a[n - 1] == b[m - 1], "u_{n} != v_{m}");
    }
    ensure!(
        pairs[..3] == [(1, 2), (2, 4), (3, 6)],
        "pairing starts {:?}",
        &pairs[..3]
    );
    Ok(format!(
        "threshold budgets {}; common subsequence m_k = 2k",
        thresholds.join(", ")
    ))
}

fn adversarial() -> Outcome {
    let comb = TreeGenerator::comb(1);
    let instances = [
        (
            "star",
            TreeGenerator::star(1),
            SequenceSpec::ArmTips,
            CaseTag::InfiniteDegree,
        ),
        (
            "comb teeth and spine",
            comb.clone(),
            SequenceSpec::teeth_and_spine(),
            CaseTag::RayMeetsSequence,
        ),
        ("comb teeth", comb, SequenceSpec::ToothTips, CaseTag::RayAvoidsSequence),
    ];
    let mut notes = Vec::new();
    for (name, gen, seq, case) in &instances {
        let report = check_subsequence_criterion(
            gen,
            &LabelingScheme::harmonic_ray(),
            seq,
            &ADVERSARIAL_LADDER,
            &halves(),
        )
        .map_err(|e| format!("{name}: {e}"))?;
        ensure!(report.case == Some(*case), "{name}: reached {:?}", report.case);
        for c in &report.claims {
            ensure!(
                c.status == Status::ConsistentAtScale,
                "{name}: claim {} is {:?}: {}",
                c.name,
                c.status,
                c.detail
            );
        }
        let (scheme, witness) = match case {
            CaseTag::InfiniteDegree => construct_hub_labeling(gen, seq, &ADVERSARIAL_LADDER),
            CaseTag::RayMeetsSequence => construct_ray_labeling(gen, seq, &ADVERSARIAL_LADDER),
            _ => construct_branch_labeling(gen, seq, &ADVERSARIAL_LADDER),
        }
        .map_err(|e| e.to_string())?;

        // recount label-1 terms on every rung from scratch
        let mut ones = Vec::new();
        let mut last = None;
        for &b in &ADVERSARIAL_LADDER {
            let mat = gen.materialize(b).map_err(|e| e.to_string())?;
            let terms = seq.materialize(gen, &mat).map_err(|e| e.to_string())?;
            let tree = mat.label(&scheme).map_err(|e| e.to_string())?;
            ones.push(
                terms
                    .terms()
                    .iter()
                    .filter(|v| *tree.label(v).unwrap() == Label::one())
                    .count(),
            );
            last = Some((tree, terms));
        }
        ensure!(
            ones.windows(2).all(|w| w[0] < w[1]),
            "{name}: label-1 terms {ones:?} not strictly increasing"
        );

        let (tree, terms) = last.unwrap();
        let sub = &witness.subsequence;
        for (k, w) in sub.windows(2).enumerate() {
            let gap = tree
                .raw_path_max(terms.term(w[0]), terms.term(w[1]))
                .map_err(|e| e.to_string())?;
            ensure!(gap <= Label::reciprocal(k as u64 + 1), "{name}: gap {} is {gap}", k + 1);
        }

        if *case == CaseTag::RayAvoidsSequence {
            let ix = UltrametricIndex::build(tree).map_err(|e| e.to_string())?;
            let reps: Vec<(u64, &VertexId)> = sub
                .iter()
                .take(EVEN_PAIR_TERMS)
                .map(|&n| {
                    let s = witness
                        .side_sets
                        .iter()
                        .find(|s| s.witnesses.contains(&n))
                        .expect("term of a side set");
                    (s.branch, terms.term(n))
                })
                .collect();
            for i in 0..reps.len() {
                for j in i + 1..reps.len() {
                    let want = Label::reciprocal(reps[i].0.min(reps[j].0));
                    ensure!(
                        ix.distance(reps[i].1, reps[j].1).unwrap() == &want,
                        "{name}: even-block pair ({i}, {j})"
                    );
                }
            }
        }
        notes.push(format!(
            "{name}: {} gaps, label-1 terms {ones:?}",
            sub.len().saturating_sub(1)
        ));
    }
    Ok(notes.join("; "))
}

fn total_boundedness() -> Outcome {
    for r in halves().into_iter().chain([Radius::reciprocal(5)]) {
        let p = totally_bounded_profile(&TreeGenerator::Ray, &LabelingScheme::harmonic_ray(), &r, &RAY_LADDER)
            .map_err(|e| e.to_string())?;
        ensure!(p.counts.windows(2).all(|w| w[0] == w[1]), "ray N({r}) = {:?}", p.counts);
        if r == Radius::reciprocal(5) {
            ensure!(p.counts.iter().all(|&c| c == 6), "ray N(1/5) = {:?}", p.counts);
        }
    }

    let binary = totally_bounded_profile(
        &TreeGenerator::FullBinary,
        &LabelingScheme::constant(Label::one()),
        &Radius::reciprocal(2),
        &RAY_LADDER,
    )
    .map_err(|e| e.to_string())?;
    ensure!(binary.counts == RAY_LADDER, "binary N(1/2) = {:?}", binary.counts);
    ensure!(
        binary.verdict == Boundedness::Growing,
        "binary verdict {:?}",
        binary.verdict
    );

    let comb = TreeGenerator::comb(1);
    let spine = SubsetRule::RayTail {
        ray: RaySpec::new(Address::root(), 0),
        from: 1,
    };
    let report = check_bounded_subset_criterion(
        &comb,
        &LabelingScheme::harmonic_ray(),
        &RAY_LADDER,
        &[Radius::reciprocal(2)],
        SEED,
        &[],
    )
    .map_err(|e| e.to_string())?;
    let s = report
        .subsets
        .iter()
        .find(|s| s.rule == spine)
        .ok_or("spine subset missing")?;
    ensure!(
        s.infinite && s.bounded,
        "spine subset: infinite {}, bounded {}",
        s.infinite,
        s.bounded
    );
    let full = &report.profiles[0];
    ensure!(full.verdict == Boundedness::Growing, "comb N(1/2) = {:?}", full.counts);
    let w = report.claims[0].witness.as_ref().ok_or("no separation witness")?;
    let ix = UltrametricIndex::build(truncate(&comb, &LabelingScheme::harmonic_ray(), w.budget).unwrap()).unwrap();
    ensure!(w.replays(&ix), "separation witness does not replay");
    Ok(format!(
        "ray N(1/5) = 6 on 100..1600; binary N(1/2) = budget; comb spine bounded at {:?}, full N(1/2) = {:?}",
        s.profiles[0].counts, full.counts
    ))
}

fn isolation() -> Outcome {
    let instances = [
        ("harmonic ray", TreeGenerator::Ray, LabelingScheme::harmonic_ray()),
        ("comb", TreeGenerator::comb(2), LabelingScheme::harmonic_ray()),
        (
            "binary",
            TreeGenerator::FullBinary,
            LabelingScheme::constant(Label::one()),
        ),
        (
            "two rays",
            TreeGenerator::graft(TreeGenerator::Ray, Address::root(), TreeGenerator::Ray),
            LabelingScheme::HarmonicOnRay {
                rays: vec![
                    RaySpec::new(Address::root(), 0),
                    RaySpec::new(Address::root().child(1), 0),
                ],
                off_ray: OffRay::Attachment,
            },
        ),
    ];
    let mut checked = 0;
    for (name, gen, scheme) in &instances {
        ensure!(gen.profile().is_locally_finite(), "{name} is not locally finite");
        for budget in [2, 10, 100, 1000, ISOLATION_BUDGET] {
            let ix = UltrametricIndex::build(truncate(gen, scheme, budget).map_err(|e| e.to_string())?).unwrap();
            for v in ix.tree().ids() {
                let r = ix.isolation_radius(v).map_err(|e| e.to_string())?;
                ensure!(r.is_positive(), "{name}, budget {budget}: isolation radius of {v} is 0");
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} vertices on 4 generators, budgets up to {ISOLATION_BUDGET}"
    ))
}

fn conjectures() -> Outcome {
    let spine = RaySpec::new(Address::root(), 0);
    let instances = [
        (
            "one ray with teeth",
            ConjectureKind::OneRay,
            TreeGenerator::comb(2),
            LabelingScheme::HarmonicOnRay {
                rays: vec![spine.clone()],
                off_ray: OffRay::Attachment,
            },
            1,
        ),
        (
            "two grafted rays",
            ConjectureKind::OneRay,
            TreeGenerator::graft(TreeGenerator::Ray, Address::root(), TreeGenerator::Ray),
            LabelingScheme::HarmonicOnRay {
                rays: vec![spine, RaySpec::new(Address::root().child(1), 0)],
                off_ray: OffRay::Attachment,
            },
            2,
        ),
        (
            "star",
            ConjectureKind::Rayless,
            TreeGenerator::star(2),
            LabelingScheme::ArmHarmonic { hub: Address::root() },
            1,
        ),
    ];
    let mut notes = Vec::new();
    for (name, kind, gen, scheme, want) in &instances {
        let r = conjecture_experiment(*kind, gen, scheme, &halves(), CLUSTER_MASS, &CLUSTER_LADDER)
            .map_err(|e| format!("{name}: {e}"))?;
        ensure!(
            r.label == EXPLORATORY && r.summary.starts_with(EXPLORATORY),
            "{name}: report not labeled"
        );
        for s in &r.series {
            if *s.epsilon.label() <= Label::reciprocal(CLUSTER_EPS_MAX) {
                ensure!(
                    s.trend == ClusterTrend::StableAt { count: *want },
                    "{name}: at epsilon {} counts {:?}",
                    s.epsilon,
                    s.counts
                );
            }
        }
        notes.push(format!("{name}: stable at {want}"));
    }
    Ok(format!("{EXPLORATORY}; {}", notes.join(", ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_ultratree"))
            .args(["suite", "--seed", "11", "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure!(status.success(), "suite run {run} failed");
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .map_err(|e| e.to_string())?
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    ensure!(outputs[0] == outputs[1], "suite outputs differ between runs");
    let csv = outputs[0].iter().filter(|(n, _)| n.ends_with(".csv")).count();
    let json = outputs[0].iter().filter(|(n, _)| n.ends_with(".json")).count();
    Ok(format!(
        "{csv} CSV and {json} JSON files byte-identical across two runs"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("distance oracle equivalence", distance_oracle),
        ("ultrametric iff non-degenerate", ultrametric_iff_nondegenerate),
        ("convex hull equals leaf pruning", hull_oracle),
        ("ultrametric partition", partitions),
        ("ray sequences agree with the ray", ray_sequences),
        ("adversarial labelings", adversarial),
        ("total boundedness at scale", total_boundedness),
        ("positive isolation radius", isolation),
        ("cluster-count experiments", conjectures),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
