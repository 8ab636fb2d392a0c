//! Bottom-up dynamic program for the tree norm.
//!
//! An open state at `v` is a pair `(closed, open)`: the value already banked in
//! `v`'s subtree, and the running sum of the segment through `v` that may still
//! grow towards the root. A segment enters at most one child, so
//!
//! ```text
//! open(v)   = {(Σ_{i≠j} best(c_i) + C, f(v) + S) : (C, S) ∈ open(c_j)} ∪ {(Σ best(c_i), f(v))}
//! best(v)   = max(Σ best(c_i), max_{(C,S) ∈ open(v)} C + S²)
//! ```
//!
//! If the segment later absorbs an ancestor sum `A`, a state is worth
//! `C + (S + A)² = A² + (C + S²) + 2S·A`. Dropping the common `A²` leaves a line
//! in `A`, and `|A| ≤ Σ|f|`, so only states on the upper envelope over that
//! interval can ever be optimal.

use std::cmp::Ordering;

use super::{segment_sum, NormCertificate};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::tree::{NodeId, Segment, SegmentFamily, Tree};
use crate::vector::JtVector;

#[derive(Clone, Copy, Debug)]
enum Origin {
    Start(NodeId),
    Extend {
        node: NodeId,
        child: NodeId,
        from: usize,
    },
}

#[derive(Clone, Debug)]
struct State<S> {
    closed: S,
    open: S,
    origin: Origin,
}

impl<S: Scalar> State<S> {
    fn slope(&self) -> S {
        self.open.clone() + self.open.clone()
    }

    fn intercept(&self) -> S {
        self.closed.clone() + self.open.square()
    }
}

pub fn norm_dp<S: Scalar>(tree: &Tree, f: &JtVector<S>) -> Result<NormCertificate<S>> {
    f.validate(tree)?;
    if f.is_zero() {
        return Ok(NormCertificate::zero());
    }
    let bound = f.abs_sum();

    let n = tree.len();
    let mut arena: Vec<State<S>> = Vec::new();
    let mut open: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut best: Vec<S> = vec![S::zero(); n];
    let mut choice: Vec<Option<usize>> = vec![None; n];

    let mut order = tree.canonical_order();
    order.reverse();
    for v in order {
        let fv = f.get(v);
        let base = tree
            .children(v)
            .iter()
            .fold(S::zero(), |acc, c| acc + best[c.0].clone());

        let mut candidates = vec![State {
            closed: base.clone(),
            open: fv.clone(),
            origin: Origin::Start(v),
        }];
        for &c in tree.children(v) {
            let others = base.clone() - best[c.0].clone();
            for &idx in &open[c.0] {
                let st = &arena[idx];
                candidates.push(State {
                    closed: others.clone() + st.closed.clone(),
                    open: fv.clone() + st.open.clone(),
                    origin: Origin::Extend {
                        node: v,
                        child: c,
                        from: idx,
                    },
                });
            }
        }

        let kept = upper_envelope(candidates, &bound);
        let mut best_v = base;
        let mut choice_v = None;
        for st in kept {
            let idx = arena.len();
            let value = st.intercept();
            if value > best_v {
                best_v = value;
                choice_v = Some(idx);
            }
            arena.push(st);
            open[v.0].push(idx);
        }
        best[v.0] = best_v;
        choice[v.0] = choice_v;
        // children's states are no longer needed except through back-pointers
        for &c in tree.children(v) {
            open[c.0] = Vec::new();
        }
    }

    let norm_sq = tree
        .roots()
        .iter()
        .fold(S::zero(), |acc, r| acc + best[r.0].clone());

    let mut segments = Vec::new();
    enum Task {
        Closed(NodeId),
        Open(usize, NodeId),
    }
    let mut stack: Vec<Task> = tree.roots().iter().map(|&r| Task::Closed(r)).collect();
    while let Some(task) = stack.pop() {
        match task {
            Task::Closed(v) => match choice[v.0] {
                None => stack.extend(tree.children(v).iter().map(|&c| Task::Closed(c))),
                Some(idx) => stack.push(Task::Open(idx, v)),
            },
            // segments grow rootwards: `Start` is the top, the closing node the bottom
            Task::Open(idx, bottom) => match arena[idx].origin {
                Origin::Start(u) => {
                    segments.push(Segment { bottom, top: u });
                    stack.extend(tree.children(u).iter().map(|&c| Task::Closed(c)));
                }
                Origin::Extend { node, child, from } => {
                    stack.extend(
                        tree.children(node)
                            .iter()
                            .filter(|&&c| c != child)
                            .map(|&c| Task::Closed(c)),
                    );
                    stack.push(Task::Open(from, bottom));
                }
            },
        }
    }
    segments.retain(|s| !segment_sum(tree, f, s).is_zero());
    let family = SegmentFamily::new(tree, segments)?;

    Ok(NormCertificate { norm_sq, family })
}

/// Keeps the states whose lines `A ↦ intercept + slope·A` attain the upper
/// envelope somewhere on `[-bound, bound]`. Ties keep the earliest state.
fn upper_envelope<S: Scalar>(states: Vec<State<S>>, bound: &S) -> Vec<State<S>> {
    if states.len() <= 1 {
        return states;
    }
    let mut lines: Vec<(S, S, usize, State<S>)> = states
        .into_iter()
        .enumerate()
        .map(|(i, st)| (st.slope(), st.intercept(), i, st))
        .collect();
    lines.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
            .then(a.2.cmp(&b.2))
    });
    lines.dedup_by(|later, earlier| later.0 == earlier.0);

    // l2 is never strictly on top once l3 meets l1 no later than l2 does:
    // (b3 - b1)(m2 - m1) >= (b2 - b1)(m3 - m1) for m1 < m2 < m3.
    let useless = |l1: &(S, S, usize, State<S>),
                   l2: &(S, S, usize, State<S>),
                   l3: &(S, S, usize, State<S>)| {
        (l3.1.clone() - l1.1.clone()) * (l2.0.clone() - l1.0.clone())
            >= (l2.1.clone() - l1.1.clone()) * (l3.0.clone() - l1.0.clone())
    };
    let mut hull: Vec<(S, S, usize, State<S>)> = Vec::with_capacity(lines.len());
    for line in lines {
        while hull.len() >= 2 && useless(&hull[hull.len() - 2], &hull[hull.len() - 1], &line) {
            hull.pop();
        }
        hull.push(line);
    }

    // crossing of consecutive hull lines k and k+1
    let cross = |a: &(S, S, usize, State<S>), b: &(S, S, usize, State<S>)| {
        (a.1.clone() - b.1.clone()) / (b.0.clone() - a.0.clone())
    };
    let lo = -bound.clone();
    let k = hull.len();
    let mut keep = vec![true; k];
    for i in 0..k {
        let starts_after_hi = i > 0 && &cross(&hull[i - 1], &hull[i]) > bound;
        let ends_before_lo = i + 1 < k && cross(&hull[i], &hull[i + 1]) < lo;
        keep[i] = !(starts_after_hi || ends_before_lo);
    }
    let mut out: Vec<(usize, State<S>)> = hull
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(l, _)| (l.2, l.3))
        .collect();
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, st)| st).collect()
}
