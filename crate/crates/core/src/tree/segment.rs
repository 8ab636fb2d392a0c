use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{NodeId, Tree};
use crate::error::{Error, Result};

/// The vertical path `{t : bottom ⪯ t ⪯ top}`.
/// Sort key used for canonical segment order.
pub type SegmentKey = (usize, usize, NodeId, usize, NodeId);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[NodeId; 2]", into = "[NodeId; 2]")]
pub struct Segment {
    pub bottom: NodeId,
    pub top: NodeId,
}

impl From<[NodeId; 2]> for Segment {
    fn from([bottom, top]: [NodeId; 2]) -> Self {
        Segment { bottom, top }
    }
}

impl From<Segment> for [NodeId; 2] {
    fn from(s: Segment) -> Self {
        [s.bottom, s.top]
    }
}

impl Segment {
    pub fn new(tree: &Tree, bottom: NodeId, top: NodeId) -> Result<Self> {
        if tree.is_ancestor(bottom, top)? {
            Ok(Segment { bottom, top })
        } else {
            Err(Error::InvalidSegment { bottom, top })
        }
    }

    pub fn singleton(t: NodeId) -> Self {
        Segment { bottom: t, top: t }
    }

    /// Re-validates against `tree`.
    pub fn validate(&self, tree: &Tree) -> Result<()> {
        Segment::new(tree, self.bottom, self.top).map(|_| ())
    }

    pub fn len(&self, tree: &Tree) -> usize {
        tree.depth(self.top) - tree.depth(self.bottom) + 1
    }

    pub fn contains(&self, tree: &Tree, t: NodeId) -> bool {
        tree.precedes(self.bottom, t) && tree.precedes(t, self.top)
    }

    /// Node set, bottom first.
    pub fn nodes(&self, tree: &Tree) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len(tree));
        let mut cur = self.top;
        loop {
            out.push(cur);
            if cur == self.bottom {
                break;
            }
            cur = tree.parent(cur).expect("bottom precedes top");
        }
        out.reverse();
        out
    }

    pub fn intersects(&self, tree: &Tree, other: &Segment) -> bool {
        self.contains(tree, other.bottom) || other.contains(tree, self.bottom)
    }

    /// `(length, depth(bottom), bottom, depth(top), top)`.
    pub fn canonical_key(&self, tree: &Tree) -> SegmentKey {
        (
            self.len(tree),
            tree.depth(self.bottom),
            self.bottom,
            tree.depth(self.top),
            self.top,
        )
    }
}

/// Pairwise disjoint segments, stored sorted by `(depth(bottom), bottom)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentFamily {
    segments: Vec<Segment>,
}

impl SegmentFamily {
    pub fn empty() -> Self {
        SegmentFamily::default()
    }

    pub fn new(tree: &Tree, mut segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            s.validate(tree)?;
        }
        for (i, a) in segments.iter().enumerate() {
            for b in &segments[i + 1..] {
                if a.intersects(tree, b) {
                    let at = if a.contains(tree, b.bottom) {
                        b.bottom
                    } else {
                        a.bottom
                    };
                    return Err(Error::OverlappingSegments(at));
                }
            }
        }
        segments.sort_by_key(|s| (tree.depth(s.bottom), s.bottom));
        Ok(SegmentFamily { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn validate(&self, tree: &Tree) -> Result<()> {
        SegmentFamily::new(tree, self.segments.clone()).map(|_| ())
    }

    fn order_key(&self, tree: &Tree) -> (usize, Vec<SegmentKey>) {
        (
            self.segments.len(),
            self.segments
                .iter()
                .map(|s| s.canonical_key(tree))
                .collect(),
        )
    }

    /// Canonical order on families: fewer segments first, then segment keys.
    pub fn canonical_cmp(&self, other: &Self, tree: &Tree) -> Ordering {
        self.order_key(tree).cmp(&other.order_key(tree))
    }

    /// Relabels through a local-to-global id map (see [`Tree::induced`]).
    pub fn map_nodes(&self, tree: &Tree, map: &[NodeId]) -> Result<Self> {
        let segs = self
            .segments
            .iter()
            .map(|s| Segment {
                bottom: map[s.bottom.0],
                top: map[s.top.0],
            })
            .collect();
        SegmentFamily::new(tree, segs)
    }
}

/// Every segment of `tree`, sorted by [`Segment::canonical_key`].
pub fn enumerate_segments(tree: &Tree) -> Vec<Segment> {
    let mut out = Vec::new();
    for top in tree.nodes() {
        let mut cur = Some(top);
        while let Some(b) = cur {
            out.push(Segment { bottom: b, top });
            cur = tree.parent(b);
        }
    }
    out.sort_by_key(|s| s.canonical_key(tree));
    out
}

/// All pairwise-disjoint families including the empty one, in canonical
/// order. Errors once more than `cap` families exist.
pub fn enumerate_disjoint_families(tree: &Tree, cap: usize) -> Result<Vec<SegmentFamily>> {
    let segments = enumerate_segments(tree);
    let nodes: Vec<Vec<NodeId>> = segments.iter().map(|s| s.nodes(tree)).collect();
    let mut used = vec![false; tree.len()];
    let mut chosen = Vec::new();
    let mut found: Vec<Vec<usize>> = Vec::new();

    fn walk(
        next: usize,
        nodes: &[Vec<NodeId>],
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if found.len() >= cap {
            return Err(Error::CapExceeded { cap });
        }
        found.push(chosen.clone());
        for i in next..nodes.len() {
            if nodes[i].iter().any(|t| used[t.0]) {
                continue;
            }
            for t in &nodes[i] {
                used[t.0] = true;
            }
            chosen.push(i);
            walk(i + 1, nodes, used, chosen, found, cap)?;
            chosen.pop();
            for t in &nodes[i] {
                used[t.0] = false;
            }
        }
        Ok(())
    }

    walk(0, &nodes, &mut used, &mut chosen, &mut found, cap)?;

    let mut families: Vec<SegmentFamily> = found
        .into_iter()
        .map(|idx| {
            let mut segs: Vec<Segment> = idx.into_iter().map(|i| segments[i]).collect();
            segs.sort_by_key(|s| (tree.depth(s.bottom), s.bottom));
            SegmentFamily { segments: segs }
        })
        .collect();
    families.sort_by(|a, b| a.canonical_cmp(b, tree));
    Ok(families)
}
