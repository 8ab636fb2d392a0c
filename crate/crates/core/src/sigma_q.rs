//! The tree σ′Q of finite strictly increasing sequences of rationals, ordered
//! by proper prefix.
//!
//! σ′Q is infinite and infinitely branching, so norms are computed on the
//! meet closure of a finite support: support nodes plus their pairwise
//! longest common prefixes, each attached to its nearest ancestor in the set.
//! Nodes strictly between two kept nodes carry zero and never change a segment
//! sum, so the norm is unchanged. Only finite sequences are representable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::norm::{norm_dp, NormCertificate};
use crate::scalar::{format_ratio, parse_rational, rat, Rational};
use crate::tree::{NodeId, Tree};
use crate::vector::JtVector;

/// A node of σ′Q: a nonempty, strictly increasing sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalSeq(Vec<Rational>);

impl RationalSeq {
    pub fn new(entries: Vec<Rational>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("σ′Q nodes are nonempty".into()));
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "sequence {} is not strictly increasing",
                join(&entries)
            )));
        }
        Ok(RationalSeq(entries))
    }

    pub fn singleton(q: Rational) -> Self {
        RationalSeq(vec![q])
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> &Rational {
        self.0.last().expect("nonempty")
    }

    /// The first `k` entries, for `1 ≤ k ≤ len`.
    pub fn prefix(&self, k: usize) -> RationalSeq {
        assert!((1..=self.len()).contains(&k), "prefix length out of range");
        RationalSeq(self.0[..k].to_vec())
    }

    /// Appends entries, which must stay above the current maximum.
    pub fn extend(&self, tail: &[Rational]) -> Result<RationalSeq> {
        let mut v = self.0.clone();
        v.extend_from_slice(tail);
        RationalSeq::new(v)
    }
}

fn join(entries: &[Rational]) -> String {
    entries
        .iter()
        .map(format_ratio)
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for RationalSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.0))
    }
}

impl FromStr for RationalSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|e| parse_rational(e.trim()))
            .collect::<Result<Vec<_>>>()?;
        RationalSeq::new(entries)
    }
}

impl Serialize for RationalSeq {
    fn serialize<Z: Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalSeq {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(de)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `t ≺ u`: `t` is a proper initial segment of `u`.
pub fn sq_is_prefix(t: &RationalSeq, u: &RationalSeq) -> bool {
    t.len() < u.len() && u.0.starts_with(&t.0)
}

/// Longest common prefix, absent when the first entries differ.
pub fn sq_meet(t: &RationalSeq, u: &RationalSeq) -> Option<RationalSeq> {
    let k = t.0.iter().zip(&u.0).take_while(|(a, b)| a == b).count();
    (k > 0).then(|| t.prefix(k))
}

/// `max(t)`: the node lies in the antichain `S_q` for `q = max(t)`.
pub fn sq_label(t: &RationalSeq) -> Rational {
    t.last().clone()
}

pub type Support = BTreeMap<RationalSeq, Rational>;

/// Support file: one `seq value` per line, e.g. `1/2,2/3 1`. Blank lines and
/// `#` comments are skipped; a repeated node is an error.
pub fn parse_support(text: &str) -> Result<Support> {
    let mut out = Support::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let mut fields = line.split_whitespace();
        let (Some(seq), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err("expected `seq value`".into()));
        };
        let seq: RationalSeq = seq.parse().map_err(|e: Error| err(e.to_string()))?;
        let value = parse_rational(value).map_err(|e| err(e.to_string()))?;
        if out.insert(seq.clone(), value).is_some() {
            return Err(err(format!("node {seq} listed twice")));
        }
    }
    Ok(out)
}

pub fn write_support(support: &Support) -> String {
    support
        .iter()
        .map(|(s, v)| format!("{s} {}\n", format_ratio(v)))
        .collect()
}

/// A finite tree standing in for part of σ′Q.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedInstance {
    pub tree: Tree,
    /// Tree node `i` is `node_map[i]`.
    pub node_map: Vec<RationalSeq>,
    pub values: JtVector<Rational>,
}

impl ReducedInstance {
    /// Nodes are listed by length, then lexicographically; each node's parent
    /// is its longest proper prefix within the set.
    fn build(nodes: BTreeSet<RationalSeq>, support: &Support) -> Self {
        let mut node_map: Vec<RationalSeq> = nodes.into_iter().collect();
        node_map.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index: BTreeMap<&RationalSeq, usize> =
            node_map.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let parents: Vec<Option<usize>> = node_map
            .iter()
            .map(|s| {
                (1..s.len())
                    .rev()
                    .find_map(|k| index.get(&s.prefix(k)).copied())
            })
            .collect();
        let tree = Tree::from_parents(&parents).expect("prefix parents are acyclic");
        let values =
            JtVector::from_pairs(support.iter().map(|(s, v)| (NodeId(index[s]), v.clone())));
        ReducedInstance {
            tree,
            node_map,
            values,
        }
    }

    pub fn node_of(&self, seq: &RationalSeq) -> Option<NodeId> {
        self.node_map.iter().position(|s| s == seq).map(NodeId)
    }
}

/// The meet closure of the support keys.
pub fn meet_closure<'a, I>(nodes: I) -> BTreeSet<RationalSeq>
where
    I: IntoIterator<Item = &'a RationalSeq>,
{
    let base: Vec<&RationalSeq> = nodes.into_iter().collect();
    let mut out: BTreeSet<RationalSeq> = base.iter().map(|&s| s.clone()).collect();
    for (i, a) in base.iter().enumerate() {
        for b in &base[i + 1..] {
            if let Some(m) = sq_meet(a, b) {
                out.insert(m);
            }
        }
    }
    out
}

/// Every nonempty prefix of every support node: a prefix-closed truncation of
/// σ′Q containing the support's downward closure.
pub fn ambient_truncation(support: &Support) -> ReducedInstance {
    let nodes = support
        .keys()
        .flat_map(|s| (1..=s.len()).map(move |k| s.prefix(k)))
        .collect();
    ReducedInstance::build(nodes, support)
}

/// A segment of σ′Q: every prefix of `top` at least as long as `bottom`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqSegment {
    pub bottom: RationalSeq,
    pub top: RationalSeq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqNorm {
    pub certificate: NormCertificate<Rational>,
    pub segments: Vec<SqSegment>,
    pub reduced: ReducedInstance,
}

pub fn reduce_and_norm(support: &Support) -> Result<SqNorm> {
    let support: Support = support
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(s, v)| (s.clone(), v.clone()))
        .collect();
    let reduced = ReducedInstance::build(meet_closure(support.keys()), &support);
    let certificate = norm_dp(&reduced.tree, &reduced.values)?;
    let segments = certificate
        .family
        .segments()
        .iter()
        .map(|s| SqSegment {
            bottom: reduced.node_map[s.bottom.0].clone(),
            top: reduced.node_map[s.top.0].clone(),
        })
        .collect();
    Ok(SqNorm {
        certificate,
        segments,
        reduced,
    })
}

/// Random support of `size` distinct nodes whose entries come from a small
/// grid in `(0, 1)`, so that prefixes are shared often.
pub fn random_support<R: Rng>(rng: &mut R, size: usize, max_len: usize) -> Support {
    let grid: Vec<Rational> = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)]
        .iter()
        .map(|&(n, d)| rat(n, d))
        .collect();
    let mut out = Support::new();
    let mut attempts = 0;
    while out.len() < size && attempts < 100 * (size + 1) {
        attempts += 1;
        let len = rng.gen_range(1..=max_len.clamp(1, grid.len()));
        let mut picked: Vec<Rational> = grid.choose_multiple(rng, len).cloned().collect();
        picked.sort();
        let value = rat(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        if value.is_zero() {
            continue;
        }
        out.entry(RationalSeq(picked)).or_insert(value);
    }
    out
}

/// Rationals strictly inside `(lo, hi)`, generated breadth-first by inserting
/// mediants between neighbours, starting from `lo` and `hi` themselves.
/// Returns at most `count` values in generation order.
pub fn mediant_grid(lo: &Rational, hi: &Rational, count: usize) -> Vec<Rational> {
    let mut out = Vec::new();
    if lo >= hi {
        return out;
    }
    let mediant =
        |a: &Rational, b: &Rational| Rational::new(a.numer() + b.numer(), a.denom() + b.denom());
    let mut points = vec![lo.clone(), hi.clone()];
    while out.len() < count {
        let mut next = Vec::with_capacity(2 * points.len());
        for w in points.windows(2) {
            let m = mediant(&w[0], &w[1]);
            next.push(w[0].clone());
            if out.len() < count {
                out.push(m.clone());
            }
            next.push(m);
        }
        next.push(points.last().expect("nonempty").clone());
        points = next;
    }
    out
}

/// The semantics of the descent, restated in every report.
pub const DESCENT_SEMANTICS: &str = "each step minimizes the label over at most `budget` \
     sampled extensions (one or two new entries drawn from a mediant grid below the current \
     bound), not over all extensions; only finite depth is explored";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    pub chain: Vec<RationalSeq>,
    #[serde(with = "crate::scalar::ratio_list")]
    pub bounds: Vec<Rational>,
    pub labels: Vec<i64>,
    pub candidates: Vec<usize>,
    pub budget: usize,
    pub semantics: String,
}

impl DescentReport {
    /// `t₁ ≺ t₂ ≺ ⋯`, `q₁ > q₂ > ⋯`, and `max(t_i) < q_i`.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.chain.len() != self.bounds.len() || self.chain.len() != self.labels.len() {
            return fail("report lengths disagree".into());
        }
        for (i, (t, q)) in self.chain.iter().zip(&self.bounds).enumerate() {
            if t.last() >= q {
                return fail(format!("step {}: max(t) ≥ q", i + 1));
            }
            if i > 0 {
                if !sq_is_prefix(&self.chain[i - 1], t) {
                    return fail(format!("step {}: not an extension", i + 1));
                }
                if q >= &self.bounds[i - 1] {
                    return fail(format!("step {}: bound did not decrease", i + 1));
                }
                if t.last() >= &self.bounds[i - 1] {
                    return fail(format!("step {}: max(t) above previous bound", i + 1));
                }
            }
        }
        Ok(())
    }
}

/// Greedy bounded descent: `t₁` minimizes the label over singletons in
/// `(lo, hi)`, and `t_{n+1}` over sampled extensions of `t_n` with maximum
/// below `q_n`. The bound `q_n` is the mediant of `max(t_n)` and `q_{n−1}`,
/// with `q₀ = hi`. Ties go to the first candidate generated.
pub fn kurepa_descent(
    labeling: &dyn Fn(&RationalSeq) -> i64,
    depth: usize,
    window: (&Rational, &Rational),
    budget: usize,
) -> Result<DescentReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    let (lo, hi) = window;
    let mut report = DescentReport {
        chain: Vec::new(),
        bounds: Vec::new(),
        labels: Vec::new(),
        candidates: Vec::new(),
        budget,
        semantics: DESCENT_SEMANTICS.into(),
    };
    let mut bound = hi.clone();
    for step in 0..depth {
        let floor = report
            .chain
            .last()
            .map_or(lo, |t: &RationalSeq| t.last())
            .clone();
        let grid = mediant_grid(&floor, &bound, budget);
        let mut candidates: Vec<Vec<Rational>> = grid.iter().map(|r| vec![r.clone()]).collect();
        if step > 0 {
            'pairs: for (i, a) in grid.iter().enumerate() {
                for b in &grid[i + 1..] {
                    if candidates.len() >= budget {
                        break 'pairs;
                    }
                    let (a, b) = if a < b { (a, b) } else { (b, a) };
                    candidates.push(vec![a.clone(), b.clone()]);
                }
            }
        }
        let mut best: Option<(i64, RationalSeq)> = None;
        for tail in &candidates {
            let t = match report.chain.last() {
                Some(prev) => prev.extend(tail)?,
                None => RationalSeq::new(tail.clone())?,
            };
            let label = labeling(&t);
            if best.as_ref().is_none_or(|(l, _)| label < *l) {
                best = Some((label, t));
            }
        }
        let Some((label, t)) = best else {
            return Err(Error::NoExtension(format!(
                "no rational of the sample grid lies in ({}, {}) at step {}",
                format_ratio(&floor),
                format_ratio(&bound),
                step + 1
            )));
        };
        let q = Rational::new(
            t.last().numer() + bound.numer(),
            t.last().denom() + bound.denom(),
        );
        report.candidates.push(candidates.len());
        report.labels.push(label);
        report.chain.push(t);
        report.bounds.push(q.clone());
        bound = q;
    }
    Ok(report)
}

/// Built-in labelings, by name: `length`, `denominator` (of the maximum),
/// `height` (of the maximum, `|p| + q`).
pub fn named_labeling(name: &str) -> Result<fn(&RationalSeq) -> i64> {
    fn length(t: &RationalSeq) -> i64 {
        t.len() as i64
    }
    fn denominator(t: &RationalSeq) -> i64 {
        t.last().denom().try_into().unwrap_or(i64::MAX)
    }
    fn height(t: &RationalSeq) -> i64 {
        let q = t.last();
        let h = q.numer().magnitude() + q.denom().magnitude();
        h.try_into().unwrap_or(i64::MAX)
    }
    match name {
        "length" => Ok(length),
        "denominator" => Ok(denominator),
        "height" => Ok(height),
        other => Err(Error::InvalidArgument(format!("unknown labeling {other}"))),
    }
}
