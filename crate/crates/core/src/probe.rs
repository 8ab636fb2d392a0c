//! Finite-scale witness constructions against a pluggable norm on the dual.
//!
//! Finite trees give reflexive spaces that admit LUR renormings, so nothing
//! here decides renormability. The probes certify specific equality patterns
//! (flat segments on the sphere, ℓ₂ patterns at unit distance) and report
//! "pattern certified" when they hold.

use std::collections::BTreeSet;

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dual::{chi_segment, dual_norm, DualOptions};
use crate::error::{Error, Result};
use crate::sample;
use crate::scalar::{
    from_f64, int, rat, sqrt_lower, sqrt_upper, to_f64_down, to_f64_up, Rational, Scalar,
};
use crate::tree::{enumerate_segments, NodeId, Segment, Tree};
use crate::vector::JtFunctional;

pub const CERTIFIED: &str = "pattern certified";
pub const NOT_CERTIFIED: &str = "pattern not certified";

/// A closed interval of reals, rounded outward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lo - slack <= v && v <= self.hi + slack
    }
}

/// Smallest `max lo − min hi` over a set of intervals; non-positive when they
/// share a point.
fn overlap_gap(intervals: &[Interval]) -> f64 {
    let lo = intervals
        .iter()
        .map(|i| i.lo)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = intervals.iter().map(|i| i.hi).fold(f64::INFINITY, f64::min);
    lo - hi
}

/// An equivalent norm on the dual, evaluated as certified intervals.
pub trait NormOracle: Sync {
    fn eval(&self, tree: &Tree, functional: &JtFunctional<Rational>) -> Result<Interval>;
    fn description(&self) -> String;
    /// `(c₁, c₂)` with `c₁‖·‖* ≤ |||·||| ≤ c₂‖·‖*` on `tree`.
    fn equivalence_bounds(&self, tree: &Tree) -> (f64, f64);
}

/// The dual norm itself.
#[derive(Clone, Debug, Default)]
pub struct CanonicalOracle {
    pub opts: DualOptions,
}

impl NormOracle for CanonicalOracle {
    fn eval(&self, tree: &Tree, functional: &JtFunctional<Rational>) -> Result<Interval> {
        let b = dual_norm(tree, functional, &self.opts)?;
        Ok(Interval::new(b.lower, b.upper))
    }

    fn description(&self) -> String {
        "canonical".into()
    }

    fn equivalence_bounds(&self, _: &Tree) -> (f64, f64) {
        (1.0, 1.0)
    }
}

/// `|||x*||| = ‖x*‖* + ε·√(Σ x*(t)²)`, strictly convex for `ε > 0`.
#[derive(Clone, Debug)]
pub struct PerturbedOracle {
    epsilon: Rational,
    pub opts: DualOptions,
}

impl PerturbedOracle {
    pub fn new(epsilon: f64, opts: DualOptions) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad perturbation {epsilon}"
            )));
        }
        Ok(PerturbedOracle {
            epsilon: from_f64(epsilon),
            opts,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.approx_f64()
    }
}

impl NormOracle for PerturbedOracle {
    fn eval(&self, tree: &Tree, functional: &JtFunctional<Rational>) -> Result<Interval> {
        let b = dual_norm(tree, functional, &self.opts)?;
        let sq = functional.sq_sum();
        let lo = b.lower_exact + self.epsilon.clone() * sqrt_lower(&sq);
        let hi = b.upper_exact + self.epsilon.clone() * sqrt_upper(&sq);
        Ok(Interval::new(to_f64_down(&lo), to_f64_up(&hi)))
    }

    fn description(&self) -> String {
        format!("perturbed:{}", self.epsilon())
    }

    // ‖x*‖₂ ≤ √n·max|x*(t)| ≤ √n‖x*‖*
    fn equivalence_bounds(&self, tree: &Tree) -> (f64, f64) {
        (1.0, 1.0 + self.epsilon() * (tree.len() as f64).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSanity {
    pub samples: usize,
    pub homogeneity_ok: bool,
    pub triangle_ok: bool,
    pub bounds_ok: bool,
}

impl OracleSanity {
    pub fn passed(&self) -> bool {
        self.homogeneity_ok && self.triangle_ok && self.bounds_ok
    }
}

/// Samples random functionals on `tree` and checks positive homogeneity, the
/// triangle inequality, and the advertised equivalence bounds, all up to the
/// interval widths plus `slack`.
pub fn check_oracle(
    oracle: &dyn NormOracle,
    tree: &Tree,
    samples: usize,
    seed: u64,
    slack: f64,
) -> Result<OracleSanity> {
    let mut rng = sample::rng(seed);
    let canonical = CanonicalOracle::default();
    let (c1, c2) = oracle.equivalence_bounds(tree);
    let mut report = OracleSanity {
        samples,
        homogeneity_ok: true,
        triangle_ok: true,
        bounds_ok: true,
    };
    for _ in 0..samples {
        let f = sample::random_functional(&mut rng, tree, 0.6, 5, 4);
        let g = sample::random_functional(&mut rng, tree, 0.6, 5, 4);
        let k = rat(rng.gen_range(-6..=6), rng.gen_range(1..=3));
        let nf = oracle.eval(tree, &f)?;
        let ng = oracle.eval(tree, &g)?;
        let nkf = oracle.eval(tree, &f.scale(&k))?;
        let nsum = oracle.eval(tree, &(&f + &g))?;
        let kabs = k.approx_f64().abs();
        if nkf.lo > kabs * nf.hi + slack || nkf.hi < kabs * nf.lo - slack {
            report.homogeneity_ok = false;
        }
        if nsum.lo > nf.hi + ng.hi + slack {
            report.triangle_ok = false;
        }
        let base = canonical.eval(tree, &f)?;
        if nf.hi < c1 * base.lo - slack || nf.lo > c2 * base.hi + slack {
            report.bounds_ok = false;
        }
    }
    Ok(report)
}

/// `χ*_{[0,t]}`.
pub fn chi_initial(tree: &Tree, t: NodeId) -> Result<JtFunctional<Rational>> {
    tree.check(t)?;
    chi_segment(
        tree,
        &Segment {
            bottom: tree.root_of(t),
            top: t,
        },
    )
}

fn successors(tree: &Tree, t: NodeId, needed: usize) -> Result<&[NodeId]> {
    tree.check(t)?;
    let found = tree.children(t);
    if found.len() < needed {
        return Err(Error::TooFewSuccessors {
            node: t,
            found: found.len(),
            needed,
        });
    }
    Ok(&found[..needed])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlatWitness {
    pub t: NodeId,
    pub t1: NodeId,
    pub t2: NodeId,
    pub chi_t1: JtFunctional<Rational>,
    pub chi_t2: JtFunctional<Rational>,
    pub midpoint: JtFunctional<Rational>,
    pub norm_t1: Interval,
    pub norm_t2: Interval,
    pub norm_midpoint: Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FlatVerdict {
    Flat,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatReport {
    pub oracle: String,
    pub verdict: FlatVerdict,
    pub tol: f64,
    /// `max lo − min hi` over the three intervals.
    pub gap: f64,
    pub witness: FlatWitness,
}

/// Compares `|||χ*_{[0,t₁]}|||`, `|||χ*_{[0,t₂]}|||` and the norm of their
/// midpoint, for the first two successors of `t`. Equal values mean the
/// segment between the two normalized endpoints lies on the sphere.
pub fn flat_segment_witness(
    tree: &Tree,
    t: NodeId,
    oracle: &dyn NormOracle,
    tol: f64,
) -> Result<FlatReport> {
    let succ = successors(tree, t, 2)?;
    let (t1, t2) = (succ[0], succ[1]);
    let chi_t1 = chi_initial(tree, t1)?;
    let chi_t2 = chi_initial(tree, t2)?;
    let midpoint = (&chi_t1 + &chi_t2).scale(&rat(1, 2));
    let norm_t1 = oracle.eval(tree, &chi_t1)?;
    let norm_t2 = oracle.eval(tree, &chi_t2)?;
    let norm_midpoint = oracle.eval(tree, &midpoint)?;
    let gap = overlap_gap(&[norm_t1, norm_t2, norm_midpoint]);
    let verdict = if gap <= tol {
        FlatVerdict::Flat
    } else {
        FlatVerdict::Inconclusive
    };
    Ok(FlatReport {
        oracle: oracle.description(),
        verdict,
        tol,
        gap,
        witness: FlatWitness {
            t,
            t1,
            t2,
            chi_t1,
            chi_t2,
            midpoint,
            norm_t1,
            norm_t2,
            norm_midpoint,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IsometryCheck {
    #[serde(with = "crate::scalar::ratio_list")]
    pub lambda: Vec<Rational>,
    pub expected: f64,
    pub norm: Interval,
    pub error: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DistanceCheck {
    pub successor: NodeId,
    pub difference: JtFunctional<Rational>,
    pub norm: Interval,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KadecReport {
    pub t: NodeId,
    pub successors: Vec<NodeId>,
    pub tol: f64,
    pub isometry: Vec<IsometryCheck>,
    pub distances: Vec<DistanceCheck>,
    /// Largest distance from an expected value to the far end of its interval.
    pub max_error: f64,
    pub certified: bool,
    pub summary: String,
}

/// For successors `t₁..t_k` of `t`: checks `‖Σ λ_n χ*_{t_n}‖* = ‖λ‖₂` for each
/// given `λ` (these functionals span a copy of the ℓ₂ basis) and
/// `‖χ*_{[0,t_n]} − χ*_{[0,t]}‖* = 1` for each `n`.
pub fn kadec_pattern_witness(
    tree: &Tree,
    t: NodeId,
    k: usize,
    lambdas: &[Vec<Rational>],
    tol: f64,
) -> Result<KadecReport> {
    let succ = successors(tree, t, k)?.to_vec();
    let opts = DualOptions {
        tol,
        ..DualOptions::default()
    };
    let mut max_error: f64 = 0.0;

    let mut isometry = Vec::new();
    for lambda in lambdas {
        if lambda.len() > k {
            return Err(Error::InvalidArgument(format!(
                "λ has {} entries but only {k} successors are used",
                lambda.len()
            )));
        }
        let f = JtFunctional::from_pairs(succ.iter().copied().zip(lambda.iter().cloned()));
        let expected = lambda
            .iter()
            .map(|l| l.approx_f64().powi(2))
            .sum::<f64>()
            .sqrt();
        let b = dual_norm(tree, &f, &opts)?;
        let norm = Interval::new(b.lower, b.upper);
        let error = (expected - norm.lo).abs().max((norm.hi - expected).abs());
        max_error = max_error.max(error);
        isometry.push(IsometryCheck {
            lambda: lambda.clone(),
            expected,
            norm,
            error,
            ok: b.tolerance_met && norm.contains(expected, tol),
        });
    }

    let base = chi_initial(tree, t)?;
    let mut distances = Vec::new();
    for &s in &succ {
        let difference = &chi_initial(tree, s)? - &base;
        let b = dual_norm(tree, &difference, &opts)?;
        let norm = Interval::new(b.lower, b.upper);
        max_error = max_error.max((1.0 - norm.lo).abs().max((norm.hi - 1.0).abs()));
        distances.push(DistanceCheck {
            successor: s,
            difference,
            norm,
            ok: b.tolerance_met && norm.lo >= 1.0 - tol && norm.hi <= 1.0 + tol,
        });
    }

    let certified = isometry.iter().all(|c| c.ok) && distances.iter().all(|c| c.ok);
    Ok(KadecReport {
        t,
        successors: succ,
        tol,
        isometry,
        distances,
        max_error,
        certified,
        summary: if certified { CERTIFIED } else { NOT_CERTIFIED }.into(),
    })
}

/// The default `λ` samples for `k` successors: all ones, a single spike, and
/// `(1, 2, …, k)`.
pub fn default_lambdas(k: usize) -> Vec<Vec<Rational>> {
    if k == 0 {
        return Vec::new();
    }
    let mut spike = vec![Rational::zero(); k];
    spike[0] = int(1);
    vec![vec![int(1); k], spike, (1..=k as i64).map(int).collect()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    pub oracle: String,
    pub candidates: usize,
    pub argmin: Segment,
    pub value: Interval,
}

/// `ρ(s) = inf{|||χ*_σ||| : s ⊆ σ}` for an initial segment `s` (a downward
/// closed chain, possibly empty), by enumerating every segment containing it.
/// The interval is `[min lo, min hi]`.
pub fn rho(tree: &Tree, s: &BTreeSet<NodeId>, oracle: &dyn NormOracle) -> Result<RhoReport> {
    for &t in s {
        tree.check(t)?;
    }
    let top = s.iter().copied().max_by_key(|&t| tree.depth(t));
    let is_chain = top.is_none_or(|top| {
        s.len() == tree.depth(top) + 1 && s.iter().all(|&u| tree.precedes(u, top))
    });
    if !is_chain {
        let shown: Vec<String> = s.iter().map(|t| t.to_string()).collect();
        return Err(Error::NotInitialSegment(shown.join(",")));
    }

    let mut best: Option<(Segment, Interval)> = None;
    let mut lo = f64::INFINITY;
    let mut count = 0;
    for seg in enumerate_segments(tree) {
        if !s.iter().all(|&u| seg.contains(tree, u)) {
            continue;
        }
        count += 1;
        let v = oracle.eval(tree, &chi_segment(tree, &seg)?)?;
        lo = lo.min(v.lo);
        if best.as_ref().is_none_or(|(_, b)| v.hi < b.hi) {
            best = Some((seg, v));
        }
    }
    let (argmin, b) = best.ok_or_else(|| Error::InvalidArgument("tree has no segments".into()))?;
    Ok(RhoReport {
        oracle: oracle.description(),
        candidates: count,
        argmin,
        value: Interval::new(lo, b.hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> BTreeSet<NodeId> {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn flat_on_v_tree() {
        let v = Tree::star(2);
        let r = flat_segment_witness(&v, NodeId(0), &CanonicalOracle::default(), 1e-6).unwrap();
        assert_eq!(r.verdict, FlatVerdict::Flat);
        for i in [
            r.witness.norm_t1,
            r.witness.norm_t2,
            r.witness.norm_midpoint,
        ] {
            assert!(i.lo >= 1.0 - 1e-6 && i.hi <= 1.0 + 1e-6, "{i:?}");
        }
    }

    #[test]
    fn perturbed_is_inconclusive() {
        let v = Tree::star(2);
        for eps in [0.1, 0.01] {
            let o = PerturbedOracle::new(eps, DualOptions::default()).unwrap();
            let r = flat_segment_witness(&v, NodeId(0), &o, 1e-6).unwrap();
            assert_eq!(r.verdict, FlatVerdict::Inconclusive);
            assert!(r.witness.norm_midpoint.hi < r.witness.norm_t1.lo);
        }
    }

    #[test]
    fn leaf_has_no_flat_witness() {
        let v = Tree::star(2);
        let e = flat_segment_witness(&v, NodeId(1), &CanonicalOracle::default(), 1e-6);
        assert!(matches!(e, Err(Error::TooFewSuccessors { found: 0, .. })));
    }

    #[test]
    fn kadec_on_star() {
        let star = Tree::star(3);
        let r = kadec_pattern_witness(&star, NodeId(0), 3, &[vec![int(1); 3]], 1e-6).unwrap();
        assert!(r.certified, "{r:?}");
        assert_eq!(r.summary, CERTIFIED);
        assert!(r.isometry[0].norm.contains(3f64.sqrt(), 1e-6));
        let r = kadec_pattern_witness(&star, NodeId(0), 1, &[], 1e-6).unwrap();
        assert_eq!(r.distances.len(), 1);
        assert!(r.distances[0].norm.contains(1.0, 1e-6));
        let r = kadec_pattern_witness(&star, NodeId(0), 2, &[vec![int(0), int(0)]], 1e-6).unwrap();
        assert_eq!(r.isometry[0].norm, Interval::point(0.0));
        assert!(kadec_pattern_witness(&star, NodeId(0), 4, &[], 1e-6).is_err());
    }

    #[test]
    fn rho_canonical_and_perturbed() {
        let t = Tree::from_parents(&[None, Some(0), Some(1), Some(1)]).unwrap();
        let canonical = CanonicalOracle::default();
        for s in [set(&[]), set(&[0]), set(&[0, 1]), set(&[0, 1, 3])] {
            assert!(rho(&t, &s, &canonical).unwrap().value.contains(1.0, 1e-6));
        }
        let eps = 0.1;
        let o = PerturbedOracle::new(eps, DualOptions::default()).unwrap();
        let r = rho(&t, &set(&[0, 1]), &o).unwrap();
        assert!(r.value.contains(1.0 + eps * 2f64.sqrt(), 1e-6), "{r:?}");
        assert_eq!(
            r.argmin,
            Segment {
                bottom: NodeId(0),
                top: NodeId(1)
            }
        );
        assert!(matches!(
            rho(&t, &set(&[1]), &o),
            Err(Error::NotInitialSegment(_))
        ));
        assert!(rho(&t, &set(&[0, 2, 3]), &o).is_err());
        let single = Tree::chain(1);
        let r = rho(&single, &set(&[]), &o).unwrap();
        assert_eq!(r.candidates, 1);
    }

    #[test]
    fn oracles_pass_sanity() {
        let t = Tree::from_parents(&[None, Some(0), Some(0), Some(1)]).unwrap();
        let canonical = CanonicalOracle::default();
        assert!(check_oracle(&canonical, &t, 10, 7, 1e-6).unwrap().passed());
        let o = PerturbedOracle::new(0.1, DualOptions::default()).unwrap();
        assert!(check_oracle(&o, &t, 10, 7, 1e-6).unwrap().passed());
    }
}
