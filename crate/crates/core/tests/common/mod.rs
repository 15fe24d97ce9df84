//! Random trees and brute-force oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultratree::{Label, LabeledTree, VertexId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fraction(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Labels drawn from a small pool so that ties are frequent.
fn draw_label(rng: &mut ChaCha8Rng, zero_weight: f64) -> BigRational {
    if rng.random_bool(zero_weight) {
        return fraction(0, 1);
    }
    const POOL: [(i64, i64); 8] = [(1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 2), (1, 7), (5, 1)];
    let (p, q) = POOL[rng.random_range(0..POOL.len())];
    fraction(p, q)
}

/// Random tree on `0..n` with `parent(i) < i`. With `nondegenerate`, a
/// vertex whose parent is labeled 0 never gets 0 itself.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize, zero_weight: f64, nondegenerate: bool) -> LabeledTree {
    let mut labels: Vec<BigRational> = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for i in 0..n {
        let mut l = draw_label(rng, zero_weight);
        if i > 0 {
            let p = rng.random_range(0..i);
            edges.push((VertexId::Int(p as u64), VertexId::Int(i as u64)));
            if nondegenerate && labels[p] == fraction(0, 1) && l == fraction(0, 1) {
                l = fraction(1, 2);
            }
        }
        labels.push(l);
    }
    LabeledTree::build(
        edges,
        labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| (VertexId::Int(i as u64), l)),
    )
    .expect("valid tree")
}

/// Adjacency lists by tree position, rebuilt from the edge list.
pub fn adjacency(tree: &LabeledTree) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); tree.len()];
    for e in tree.edges() {
        let (a, b) = (tree.position(&e.0).unwrap(), tree.position(&e.1).unwrap());
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// `d[u][v]` = largest label on the path from `u` to `v`, by walking every
/// path out of every source; `d[u][u] = 0`.
pub fn oracle_distances(tree: &LabeledTree) -> Vec<Vec<Label>> {
    let adj = adjacency(tree);
    let n = tree.len();
    let mut d = vec![vec![Label::zero(); n]; n];
    for s in 0..n {
        let mut stack = vec![(s, usize::MAX, tree.label_at(s).clone())];
        while let Some((x, from, m)) = stack.pop() {
            if x != s {
                d[s][x] = m.clone();
            }
            for &y in &adj[x] {
                if y != from {
                    let l = tree.label_at(y);
                    stack.push((y, x, if *l > m { l.clone() } else { m.clone() }));
                }
            }
        }
    }
    d
}

/// Hull of `set` by repeatedly deleting leaves outside it.
pub fn pruned_hull(tree: &LabeledTree, set: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
    let adj = adjacency(tree);
    let n = tree.len();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let keep: Vec<bool> = (0..n).map(|i| set.contains(tree.id(i))).collect();
    let mut leaves: Vec<usize> = (0..n).filter(|&i| degree[i] <= 1 && !keep[i]).collect();
    let mut left = n;
    while let Some(x) = leaves.pop() {
        if !alive[x] || left == 1 {
            continue;
        }
        alive[x] = false;
        left -= 1;
        for &y in &adj[x] {
            if alive[y] {
                degree[y] -= 1;
                if degree[y] <= 1 && !keep[y] {
                    leaves.push(y);
                }
            }
        }
    }
    (0..n).filter(|&i| alive[i]).map(|i| tree.id(i).clone()).collect()
}

pub fn id_set(tree: &LabeledTree) -> BTreeSet<VertexId> {
    tree.ids().iter().cloned().collect()
}

/// Six radii in ascending order.
pub fn radius_grid() -> Vec<ultratree::Radius> {
    vec![
        ultratree::Radius::reciprocal(5),
        ultratree::Radius::reciprocal(4),
        ultratree::Radius::reciprocal(3),
        ultratree::Radius::reciprocal(2),
        ultratree::Radius::ratio(1, 1),
        ultratree::Radius::ratio(2, 1),
    ]
}
