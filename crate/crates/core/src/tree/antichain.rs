use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{NodeId, Tree};
use crate::error::{Error, Result};

/// A partition of the nodes into antichains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntichainCover {
    pub classes: Vec<BTreeSet<NodeId>>,
}

impl AntichainCover {
    /// Checks that the classes partition the nodes and are antichains.
    pub fn verify(&self, tree: &Tree) -> Result<()> {
        let mut seen = vec![false; tree.len()];
        for class in &self.classes {
            tree.check_antichain(class)?;
            for t in class {
                if seen[t.0] {
                    return Err(Error::InvalidArgument(format!(
                        "node {t} appears in two antichain classes"
                    )));
                }
                seen[t.0] = true;
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(Error::Uncovered(NodeId(i))),
            None => Ok(()),
        }
    }

    pub fn class_of(&self, t: NodeId) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&t))
    }
}

/// Level decomposition: class `d` holds the nodes of depth `d`. The number of
/// classes equals the height, which is minimal since a chain meets every
/// antichain at most once.
pub fn mirsky_cover(tree: &Tree) -> AntichainCover {
    let mut classes = vec![BTreeSet::new(); tree.height()];
    for t in tree.nodes() {
        classes[tree.depth(t)].insert(t);
    }
    AntichainCover { classes }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnAReport {
    /// `n ↦ S_{n,A}`.
    pub sets: BTreeMap<usize, BTreeSet<NodeId>>,
    /// `n ↦` length of the longest chain inside `S_{n,A}`.
    pub longest_chain: BTreeMap<usize, usize>,
    pub chain_bound: usize,
    pub exceeds_bound: bool,
}

/// `S_{n,A} = {σ : σ ∈ T_n and F(σ) ⊆ ⋃_{m∈A} R_m}` for every `n` in the
/// range of `partition`.
///
/// `partition` and `successors` are partial maps; a node participates only when
/// it has an entry in both. Every `successors` entry must consist of immediate
/// successors of its key.
pub fn s_n_a(
    tree: &Tree,
    partition: &BTreeMap<NodeId, usize>,
    successors: &BTreeMap<NodeId, BTreeSet<NodeId>>,
    cover: &AntichainCover,
    classes: &BTreeSet<usize>,
    chain_bound: usize,
) -> Result<SnAReport> {
    cover.verify(tree)?;
    for (&node, succ) in successors {
        tree.check(node)?;
        for &c in succ {
            tree.check(c)?;
            if tree.parent(c) != Some(node) {
                return Err(Error::NotImmediateSuccessor { node, child: c });
            }
        }
    }
    for &t in partition.keys() {
        tree.check(t)?;
    }

    let allowed: BTreeSet<NodeId> = classes
        .iter()
        .filter_map(|&m| cover.classes.get(m))
        .flatten()
        .copied()
        .collect();

    let mut sets: BTreeMap<usize, BTreeSet<NodeId>> =
        partition.values().map(|&n| (n, BTreeSet::new())).collect();
    for (&t, &n) in partition {
        if let Some(succ) = successors.get(&t) {
            if succ.is_subset(&allowed) {
                sets.get_mut(&n).expect("seeded").insert(t);
            }
        }
    }

    let longest_chain: BTreeMap<usize, usize> = sets
        .iter()
        .map(|(&n, set)| (n, longest_chain_in(tree, set)))
        .collect();
    let exceeds_bound = longest_chain.values().any(|&l| l > chain_bound);
    Ok(SnAReport {
        sets,
        longest_chain,
        chain_bound,
        exceeds_bound,
    })
}

fn longest_chain_in(tree: &Tree, set: &BTreeSet<NodeId>) -> usize {
    let mut order: Vec<NodeId> = set.iter().copied().collect();
    order.sort_by_key(|&t| (tree.depth(t), t));
    let mut best: BTreeMap<NodeId, usize> = BTreeMap::new();
    for t in order {
        let mut len = 1;
        let mut cur = tree.parent(t);
        while let Some(a) = cur {
            if let Some(&l) = best.get(&a) {
                len = len.max(l + 1);
            }
            cur = tree.parent(a);
        }
        best.insert(t, len);
    }
    best.values().copied().max().unwrap_or(0)
}
