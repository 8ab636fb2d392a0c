//! Finite forests with an O(1) ancestor oracle.
//!
//! Nodes are dense ids `0..n`. A node with no parent is a root; any number of
//! roots is allowed, so the minimal elements of a tree need not be unique.

mod antichain;
mod format;
mod segment;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use antichain::{mirsky_cover, s_n_a, AntichainCover, SnAReport};
pub use format::{parse_tree_text, write_tree_text, TreeJson};
pub use segment::{enumerate_disjoint_families, enumerate_segments, Segment, SegmentFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    roots: Vec<NodeId>,
    // preorder entry/exit times; `t <= u` iff enter[t] <= enter[u] < exit[t]
    enter: Vec<usize>,
    exit: Vec<usize>,
}

impl Tree {
    /// Builds a forest from a parent table. Fails on out-of-range parents or cycles.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let n = parents.len();
        let mut parent = Vec::with_capacity(n);
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (i, p) in parents.iter().enumerate() {
            match *p {
                Some(p) if p >= n => return Err(Error::InvalidNode { id: p, len: n }),
                Some(p) if p == i => return Err(Error::Cycle(i)),
                Some(p) => {
                    children[p].push(NodeId(i));
                    parent.push(Some(NodeId(p)));
                }
                None => {
                    roots.push(NodeId(i));
                    parent.push(None);
                }
            }
        }

        let mut depth = vec![usize::MAX; n];
        let mut enter = vec![0; n];
        let mut exit = vec![0; n];
        let mut clock = 0;
        let mut stack: Vec<(NodeId, usize)> = Vec::new();
        for &r in &roots {
            depth[r.0] = 0;
            enter[r.0] = clock;
            clock += 1;
            stack.push((r, 0));
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&c) = children[v.0].get(*next) {
                    *next += 1;
                    depth[c.0] = depth[v.0] + 1;
                    enter[c.0] = clock;
                    clock += 1;
                    stack.push((c, 0));
                } else {
                    exit[v.0] = clock;
                    stack.pop();
                }
            }
        }
        if let Some(i) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::Cycle(i));
        }

        Ok(Tree {
            parent,
            children,
            depth,
            roots,
            enter,
            exit,
        })
    }

    pub fn empty() -> Self {
        Tree::from_parents(&[]).expect("empty forest")
    }

    /// `0 ≺ 1 ≺ … ≺ n-1`.
    pub fn chain(n: usize) -> Self {
        let parents: Vec<_> = (0..n).map(|i| i.checked_sub(1)).collect();
        Tree::from_parents(&parents).expect("chain")
    }

    /// Root `0` with leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let parents: Vec<_> = (0..=leaves)
            .map(|i| if i == 0 { None } else { Some(0) })
            .collect();
        Tree::from_parents(&parents).expect("star")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId)
    }

    pub fn check(&self, t: NodeId) -> Result<()> {
        if t.0 < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                id: t.0,
                len: self.len(),
            })
        }
    }

    pub fn parent(&self, t: NodeId) -> Option<NodeId> {
        self.parent[t.0]
    }

    pub fn children(&self, t: NodeId) -> &[NodeId] {
        &self.children[t.0]
    }

    pub fn depth(&self, t: NodeId) -> usize {
        self.depth[t.0]
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        self.parent.iter().map(|p| p.map(|p| p.0)).collect()
    }

    /// Length of the longest chain.
    pub fn height(&self) -> usize {
        self.depth.iter().max().map_or(0, |d| d + 1)
    }

    /// Reflexive order test `t ⪯ u`.
    pub fn is_ancestor(&self, t: NodeId, u: NodeId) -> Result<bool> {
        self.check(t)?;
        self.check(u)?;
        Ok(self.precedes(t, u))
    }

    /// Unchecked `t ⪯ u`; panics on invalid ids.
    pub fn precedes(&self, t: NodeId, u: NodeId) -> bool {
        self.enter[t.0] <= self.enter[u.0] && self.enter[u.0] < self.exit[t.0]
    }

    pub fn comparable(&self, t: NodeId, u: NodeId) -> bool {
        self.precedes(t, u) || self.precedes(u, t)
    }

    /// Deepest common ancestor; `None` across components.
    pub fn meet(&self, t: NodeId, u: NodeId) -> Result<Option<NodeId>> {
        self.check(t)?;
        self.check(u)?;
        let mut a = Some(t);
        while let Some(x) = a {
            if self.precedes(x, u) {
                return Ok(Some(x));
            }
            a = self.parent(x);
        }
        Ok(None)
    }

    /// Nodes from the root of `t`'s component up to `t`, root first.
    pub fn path_from_root(&self, t: NodeId) -> Vec<NodeId> {
        let mut path = vec![t];
        let mut cur = t;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn root_of(&self, t: NodeId) -> NodeId {
        self.path_from_root(t)[0]
    }

    /// `{t : ∃ s ∈ S, t ⪯ s}`.
    pub fn downward_closure<I>(&self, set: I) -> Result<BTreeSet<NodeId>>
    where
        I: IntoIterator<Item = NodeId>,
    {
        let mut out = BTreeSet::new();
        for s in set {
            self.check(s)?;
            let mut cur = Some(s);
            while let Some(x) = cur {
                if !out.insert(x) {
                    break;
                }
                cur = self.parent(x);
            }
        }
        Ok(out)
    }

    pub fn is_downward_closed(&self, set: &BTreeSet<NodeId>) -> bool {
        set.iter()
            .all(|&t| self.parent(t).is_none_or(|p| set.contains(&p)))
    }

    /// Fails with the first comparable pair, if any.
    pub fn check_antichain<'a, I>(&self, set: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let nodes: Vec<NodeId> = set.into_iter().copied().collect();
        for &t in &nodes {
            self.check(t)?;
        }
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if a != b && self.comparable(a, b) {
                    return Err(Error::NotAntichain(a, b));
                }
            }
        }
        Ok(())
    }

    /// All nodes sorted by `(depth, id)`.
    pub fn canonical_order(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.nodes().collect();
        v.sort_by_key(|&t| (self.depth(t), t));
        v
    }

    /// The subforest on a downward-closed set, relabelled densely in id order.
    /// Returns the subforest and the local-to-global id map.
    pub fn induced(&self, set: &BTreeSet<NodeId>) -> Result<(Tree, Vec<NodeId>)> {
        for &t in set {
            self.check(t)?;
        }
        if !self.is_downward_closed(set) {
            return Err(Error::InvalidArgument(
                "induced subforest needs a downward-closed node set".into(),
            ));
        }
        let globals: Vec<NodeId> = set.iter().copied().collect();
        let local = |g: NodeId| globals.binary_search(&g).expect("closed set");
        let parents: Vec<Option<usize>> =
            globals.iter().map(|&g| self.parent(g).map(local)).collect();
        Ok((Tree::from_parents(&parents)?, globals))
    }
}
