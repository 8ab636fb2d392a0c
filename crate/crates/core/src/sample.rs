//! Seeded random instances for tests, benchmarks, and oracle sanity checks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{rat, Rational};
use crate::tree::{NodeId, Tree};
use crate::vector::{JtFunctional, JtVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random forest on `n` nodes; node `i > 0` becomes a root with probability
/// `root_prob`, otherwise its parent is uniform in `0..i`.
pub fn random_forest<R: Rng>(rng: &mut R, n: usize, root_prob: f64) -> Tree {
    let parents: Vec<Option<usize>> = (0..n)
        .map(|i| {
            if i == 0 || rng.gen_bool(root_prob) {
                None
            } else {
                Some(rng.gen_range(0..i))
            }
        })
        .collect();
    shuffle_labels(rng, &parents)
}

/// Random rooted tree whose parent choices favour recent nodes, giving
/// deeper shapes than uniform attachment.
pub fn random_deep_tree<R: Rng>(rng: &mut R, n: usize) -> Tree {
    let parents: Vec<Option<usize>> = (0..n)
        .map(|i| {
            if i == 0 {
                None
            } else {
                let back = rng.gen_range(1..=i.min(3));
                Some(i - back)
            }
        })
        .collect();
    shuffle_labels(rng, &parents)
}

fn shuffle_labels<R: Rng>(rng: &mut R, parents: &[Option<usize>]) -> Tree {
    let n = parents.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut relabelled = vec![None; n];
    for (i, p) in parents.iter().enumerate() {
        relabelled[perm[i]] = p.map(|p| perm[p]);
    }
    Tree::from_parents(&relabelled).expect("relabelled forest")
}

pub fn random_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    rat(
        rng.gen_range(-max_num..=max_num),
        rng.gen_range(1..=max_den),
    )
}

/// Each node is in the support with probability `density`.
pub fn random_vector<R: Rng>(
    rng: &mut R,
    tree: &Tree,
    density: f64,
    max_num: i64,
    max_den: i64,
) -> JtVector<Rational> {
    let mut pairs = Vec::new();
    for t in tree.nodes() {
        if rng.gen_bool(density) {
            pairs.push((t, random_rational(rng, max_num, max_den)));
        }
    }
    JtVector::from_pairs(pairs)
}

pub fn random_functional<R: Rng>(
    rng: &mut R,
    tree: &Tree,
    density: f64,
    max_num: i64,
    max_den: i64,
) -> JtFunctional<Rational> {
    random_vector(rng, tree, density, max_num, max_den).as_functional()
}

/// A random antichain (possibly empty).
pub fn random_antichain<R: Rng>(rng: &mut R, tree: &Tree) -> BTreeSet<NodeId> {
    let mut nodes: Vec<NodeId> = tree.nodes().collect();
    nodes.shuffle(rng);
    let mut out: BTreeSet<NodeId> = BTreeSet::new();
    for t in nodes {
        if rng.gen_bool(0.5) && out.iter().all(|&s| !tree.comparable(s, t)) {
            out.insert(t);
        }
    }
    out
}

/// Vector supported on `[t, ∞)`.
pub fn random_vector_above<R: Rng>(
    rng: &mut R,
    tree: &Tree,
    t: NodeId,
    max_num: i64,
    max_den: i64,
) -> JtVector<Rational> {
    let mut pairs = Vec::new();
    for u in tree.nodes() {
        if tree.precedes(t, u) && rng.gen_bool(0.7) {
            pairs.push((u, random_rational(rng, max_num, max_den)));
        }
    }
    JtVector::from_pairs(pairs)
}

/// One representative of every unlabeled rooted tree on `n ≥ 1` nodes, grown
/// by attaching a leaf anywhere and deduplicating by canonical encoding.
pub fn rooted_tree_shapes(n: usize) -> Vec<Tree> {
    if n == 0 {
        return Vec::new();
    }
    let mut level: Vec<Vec<Option<usize>>> = vec![vec![None]];
    for size in 2..=n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for parents in &level {
            for p in 0..size - 1 {
                let mut grown = parents.clone();
                grown.push(Some(p));
                if seen.insert(shape_code(&grown)) {
                    next.push(grown);
                }
            }
        }
        level = next;
    }
    level
        .iter()
        .map(|p| Tree::from_parents(p).expect("grown tree"))
        .collect()
}

fn shape_code(parents: &[Option<usize>]) -> String {
    let mut children = vec![Vec::new(); parents.len()];
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(i);
        }
    }
    fn code(t: usize, children: &[Vec<usize>]) -> String {
        let mut parts: Vec<String> = children[t].iter().map(|&c| code(c, children)).collect();
        parts.sort();
        format!("({})", parts.concat())
    }
    code(0, &children)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_counts() {
        let counts: Vec<usize> = (1..=8).map(|n| rooted_tree_shapes(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20, 48, 115]);
    }
}
