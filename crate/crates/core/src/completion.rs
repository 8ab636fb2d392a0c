//! The completed tree `T̄`: initial segments of `T` ordered by inclusion, and
//! the operator `F` sending a functional to the function `s ↦ e_s(x*)` on it.
//!
//! For a finite tree every nonempty initial segment is `[0,t]` for its maximum
//! `t`, so `T̄` is `T` with one new bottom node `∅`. Node `0` of the completed
//! tree is `∅` and node `i + 1` is `[0,i]`.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{parse_tree_text, write_tree_text, NodeId, Tree};
use crate::vector::JtFunctional;

/// A node of `T̄`, stored by its maximal element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialSegment {
    Empty,
    UpTo(NodeId),
}

impl InitialSegment {
    /// The maximal element, absent for `∅`.
    pub fn maximum(self) -> Option<NodeId> {
        match self {
            InitialSegment::Empty => None,
            InitialSegment::UpTo(t) => Some(t),
        }
    }

    pub fn nodes(self, base: &Tree) -> Vec<NodeId> {
        self.maximum()
            .map_or_else(Vec::new, |t| base.path_from_root(t))
    }

    /// `e_s(x*) = lim_{t∈s} x*(t)`; for finite `s` the coefficient at its
    /// maximum, and `0` for `∅`.
    pub fn e_eval<S: Scalar>(self, x: &JtFunctional<S>) -> S {
        self.maximum().map_or_else(S::zero, |t| x.get(t))
    }
}

/// Whether `set` is a downward-closed chain of `tree`.
pub fn is_initial_segment(tree: &Tree, set: &BTreeSet<NodeId>) -> bool {
    if set.iter().any(|t| t.0 >= tree.len()) {
        return false;
    }
    let mut by_depth: Vec<NodeId> = set.iter().copied().collect();
    by_depth.sort_by_key(|&t| tree.depth(t));
    match by_depth.last() {
        None => true,
        Some(&top) => tree.path_from_root(top) == by_depth,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletedTree {
    pub base: Tree,
    /// Completed node `i` is `segments[i]`.
    pub segments: Vec<InitialSegment>,
    /// The inclusion order as a rooted tree.
    pub tree: Tree,
}

pub fn complete(base: &Tree) -> CompletedTree {
    let mut segments = vec![InitialSegment::Empty];
    let mut parents = vec![None];
    for t in base.nodes() {
        segments.push(InitialSegment::UpTo(t));
        parents.push(Some(base.parent(t).map_or(0, |p| p.0 + 1)));
    }
    let tree = Tree::from_parents(&parents).expect("parent ids shift by one");
    CompletedTree {
        base: base.clone(),
        segments,
        tree,
    }
}

impl CompletedTree {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The completed node for `[0,t]`.
    pub fn embed(&self, t: NodeId) -> Result<NodeId> {
        self.base.check(t)?;
        Ok(NodeId(t.0 + 1))
    }

    pub fn segment(&self, s: NodeId) -> Result<InitialSegment> {
        self.segments.get(s.0).copied().ok_or(Error::InvalidNode {
            id: s.0,
            len: self.len(),
        })
    }

    /// `s ⊆ s'` as node sets of the base tree.
    pub fn includes(&self, s: NodeId, s2: NodeId) -> Result<bool> {
        let a: BTreeSet<NodeId> = self.segment(s)?.nodes(&self.base).into_iter().collect();
        let b: BTreeSet<NodeId> = self.segment(s2)?.nodes(&self.base).into_iter().collect();
        Ok(a.is_subset(&b))
    }

    /// `F(x*)`: the values `e_s(x*)` at every completed node.
    pub fn operator_f<S: Scalar>(&self, x: &JtFunctional<S>) -> Result<FImage<S>> {
        x.validate(&self.base)?;
        let values: Vec<S> = self.segments.iter().map(|s| s.e_eval(x)).collect();
        let sup = values
            .iter()
            .map(|v| v.abs())
            .fold(S::zero(), |m, v| if v > m { v } else { m });
        Ok(FImage { values, sup })
    }

    /// Text export: the completed tree in the usual format, preceded by marker
    /// lines naming the base size and the `∅` node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#completed base_nodes={}", self.base.len()).expect("string write");
        writeln!(out, "#empty 0").expect("string write");
        out.push_str(&write_tree_text(&self.tree));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let marker = text
            .lines()
            .find_map(|l| l.trim().strip_prefix("#completed base_nodes="))
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: "missing #completed marker".into(),
            })?;
        let n: usize = marker.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            msg: "bad base_nodes count".into(),
        })?;
        let tree = parse_tree_text(text)?;
        let ok = tree.len() == n + 1 && tree.roots() == [NodeId(0)];
        if !ok {
            return Err(Error::Parse {
                line: 1,
                msg: "completed tree must have the empty segment as its only root".into(),
            });
        }
        let base_parents: Vec<Option<usize>> = (1..=n)
            .map(|i| match tree.parent(NodeId(i)) {
                Some(NodeId(0)) => None,
                Some(p) => Some(p.0 - 1),
                None => unreachable!("single root"),
            })
            .collect();
        let completed = complete(&Tree::from_parents(&base_parents)?);
        debug_assert_eq!(completed.tree, tree);
        Ok(completed)
    }
}

/// `F(x*)` as a finite table; `values[i]` sits at completed node `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FImage<S> {
    pub values: Vec<S>,
    pub sup: S,
}

impl<S: Scalar> FImage<S> {
    /// `⟨δ_s, F(x*)⟩`.
    pub fn pair_point_mass(&self, s: NodeId) -> Result<S> {
        self.values.get(s.0).cloned().ok_or(Error::InvalidNode {
            id: s.0,
            len: self.values.len(),
        })
    }

    /// Reads `x*` back from the values at the embedded copy of the base tree.
    pub fn recover(&self, completed: &CompletedTree) -> JtFunctional<S> {
        JtFunctional::from_pairs(
            completed
                .segments
                .iter()
                .zip(&self.values)
                .filter_map(|(s, v)| s.maximum().map(|t| (t, v.clone()))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    fn f(pairs: &[(usize, i64)]) -> JtFunctional<Rational> {
        JtFunctional::from_pairs(pairs.iter().map(|&(t, v)| (NodeId(t), int(v))))
    }

    #[test]
    fn sizes_and_shapes() {
        assert_eq!(complete(&Tree::chain(1)).len(), 2);
        let c = complete(&Tree::chain(2));
        assert_eq!(c.len(), 3);
        assert_eq!(c.tree, Tree::chain(3));
        let v = complete(&Tree::star(2));
        assert_eq!(v.tree.parents(), vec![None, Some(0), Some(1), Some(1)]);
        assert_eq!(complete(&Tree::empty()).len(), 1);
        let forest = Tree::from_parents(&[None, None, Some(0)]).unwrap();
        assert_eq!(complete(&forest).tree.roots(), &[NodeId(0)]);
    }

    #[test]
    fn nodes_are_exactly_the_initial_segments() {
        let t = Tree::from_parents(&[None, Some(0), Some(0), Some(2), None, Some(4)]).unwrap();
        let c = complete(&t);
        let mut listed: Vec<BTreeSet<NodeId>> = c
            .segments
            .iter()
            .map(|s| s.nodes(&t).into_iter().collect())
            .collect();
        listed.sort();
        let mut scanned = Vec::new();
        for mask in 0u32..1 << t.len() {
            let set: BTreeSet<NodeId> = (0..t.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(NodeId)
                .collect();
            if is_initial_segment(&t, &set) {
                scanned.push(set);
            }
        }
        scanned.sort();
        assert_eq!(listed, scanned);
    }

    #[test]
    fn inclusion_matches_base_order() {
        let t = Tree::from_parents(&[None, Some(0), Some(0), Some(2)]).unwrap();
        let c = complete(&t);
        for a in t.nodes() {
            for b in t.nodes() {
                let (ea, eb) = (c.embed(a).unwrap(), c.embed(b).unwrap());
                assert_eq!(c.includes(ea, eb).unwrap(), t.is_ancestor(a, b).unwrap());
                assert_eq!(
                    c.tree.is_ancestor(ea, eb).unwrap(),
                    t.is_ancestor(a, b).unwrap()
                );
            }
        }
    }

    #[test]
    fn e_examples() {
        let a = InitialSegment::UpTo(NodeId(1));
        assert_eq!(a.e_eval(&f(&[(0, 1), (1, 1)])), int(1));
        assert_eq!(a.e_eval(&f(&[(0, 1)])), int(0));
        assert_eq!(InitialSegment::Empty.e_eval(&f(&[(0, 5), (1, -2)])), int(0));
    }

    #[test]
    fn operator_f_examples() {
        let c = complete(&Tree::chain(2));
        let img = c.operator_f(&f(&[(0, 1), (1, 1)])).unwrap();
        assert_eq!(img.values, vec![int(0), int(1), int(1)]);
        assert_eq!(img.sup, int(1));
        let img = c.operator_f(&f(&[(1, 1), (0, -1)])).unwrap();
        assert_eq!(img.values, vec![int(0), int(-1), int(1)]);
        assert_eq!(img.sup, int(1));
        let img = c.operator_f(&JtFunctional::<Rational>::zero()).unwrap();
        assert!(img.values.iter().all(|v| *v == int(0)));
        assert!(c.operator_f(&f(&[(2, 1)])).is_err());
    }

    #[test]
    fn point_mass_pairing_and_recovery() {
        let t = Tree::star(3);
        let c = complete(&t);
        let x = f(&[(0, 2), (2, -3), (3, 7)]);
        let img = c.operator_f(&x).unwrap();
        for (i, s) in c.segments.iter().enumerate() {
            assert_eq!(img.pair_point_mass(NodeId(i)).unwrap(), s.e_eval(&x));
        }
        assert_eq!(img.recover(&c), x);
    }

    #[test]
    fn idempotent_up_to_empty() {
        let t = Tree::from_parents(&[None, Some(0), Some(0), None]).unwrap();
        let once = complete(&t);
        let twice = complete(&once.tree);
        let mut expected = vec![None];
        expected.extend(
            once.tree
                .parents()
                .into_iter()
                .map(|p| Some(p.map_or(0, |p| p + 1))),
        );
        assert_eq!(twice.tree.parents(), expected);
    }

    #[test]
    fn text_round_trip() {
        let t = Tree::from_parents(&[None, Some(0), None]).unwrap();
        let c = complete(&t);
        let text = c.to_text();
        assert!(text.starts_with("#completed base_nodes=3\n#empty 0\n0 -\n"));
        assert_eq!(CompletedTree::from_text(&text).unwrap(), c);
        assert!(CompletedTree::from_text("0 -\n").is_err());
    }
}
