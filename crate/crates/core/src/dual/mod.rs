//! Certified brackets for the dual norm `‖c‖* = sup{⟨c, x⟩ : ‖x‖ ≤ 1}`.
//!
//! A bracket `[lower, upper]` is backed by two exact certificates:
//!
//! * a primal witness `x` with `‖x‖² ≤ 1` (checked by the exact norm DP) and
//!   `⟨c, x⟩ = lower`;
//! * a decomposition `c = Σ_j A_{F_j}ᵀ y_j + r` with rational bounds
//!   `u_j ≥ ‖y_j‖₂`, giving `upper = Σ_j u_j + ‖r‖₁`. Weak duality and
//!   `|x_t| ≤ ‖x‖` make this an upper bound for any disjoint families `F_j`.
//!
//! The solver is a cutting-plane loop: it solves the problem restricted to a
//! finite set of families, separates with the norm DP, and adds the violated
//! family. Floats are used only inside that loop.

mod inner;

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::norm_dp;
use crate::scalar::{
    format_ratio, parse_rational, round_to_grid, sqrt_lower, sqrt_upper, to_f64_down, to_f64_up,
    Rational, Scalar,
};
use crate::tree::{NodeId, Segment, SegmentFamily, Tree};
use crate::vector::{JtFunctional, JtVector};

pub use inner::{solve_inner, InnerSolution};

const GRID_BITS: u32 = 40;
const SEPARATION_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualOptions {
    /// Target bracket width.
    pub tol: f64,
    /// Maximum number of restricted solves.
    pub max_iter: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions {
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

/// `y_j` for one family, with a rational bound on its Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionTerm {
    pub family: SegmentFamily,
    pub weights: Vec<Rational>,
    pub weight_norm_bound: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_exact: Rational,
    pub upper_exact: Rational,
    pub witness: JtVector<Rational>,
    pub decomposition: Vec<DecompositionTerm>,
    pub residual: JtFunctional<Rational>,
    pub tolerance_met: bool,
    pub iterations: usize,
    pub families_used: usize,
}

impl DualBracket {
    pub fn zero() -> Self {
        DualBracket {
            lower: 0.0,
            upper: 0.0,
            lower_exact: Rational::zero(),
            upper_exact: Rational::zero(),
            witness: JtVector::zero(),
            decomposition: Vec::new(),
            residual: JtFunctional::zero(),
            tolerance_met: true,
            iterations: 0,
            families_used: 0,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lower - slack <= value && value <= self.upper + slack
    }

    /// Re-verifies every certificate in exact arithmetic against `functional`.
    pub fn verify(&self, tree: &Tree, functional: &JtFunctional<Rational>) -> Result<()> {
        let fail = |msg: String| Err(Error::Certificate(msg));
        functional.validate(tree)?;
        self.witness.validate(tree)?;
        self.residual.validate(tree)?;

        let w = norm_dp(tree, &self.witness)?;
        if w.norm_sq > Rational::from_integer(1.into()) {
            return fail(format!("witness has normSq {}", w.norm_sq));
        }
        let paired = pair(functional, &self.witness);
        if paired != self.lower_exact {
            return fail(format!(
                "lower {} but pairing gives {paired}",
                self.lower_exact
            ));
        }

        let mut recomposed = self.residual.clone();
        let mut upper = self.residual.abs_sum();
        for term in &self.decomposition {
            term.family.validate(tree)?;
            if term.weights.len() != term.family.len() {
                return fail("weight vector length differs from family size".into());
            }
            let sq = term
                .weights
                .iter()
                .fold(Rational::zero(), |acc, y| acc + y.square());
            if term.weight_norm_bound.is_negative() || term.weight_norm_bound.square() < sq {
                return fail("weight norm bound below the Euclidean norm".into());
            }
            for (seg, y) in term.family.segments().iter().zip(&term.weights) {
                for t in seg.nodes(tree) {
                    recomposed.add_at(t, y.clone());
                }
            }
            upper += term.weight_norm_bound.clone();
        }
        if &recomposed != functional {
            return fail("decomposition does not sum to the functional".into());
        }
        if upper != self.upper_exact {
            return fail(format!("upper {} but terms give {upper}", self.upper_exact));
        }
        if self.lower_exact > self.upper_exact {
            return fail("lower exceeds upper".into());
        }
        if crate::scalar::from_f64(self.lower) > self.lower_exact
            || crate::scalar::from_f64(self.upper) < self.upper_exact
        {
            return fail("float bounds are not outward-rounded".into());
        }
        Ok(())
    }
}

/// `χ*_σ`: coefficient 1 on every node of `σ`.
pub fn chi_segment(tree: &Tree, seg: &Segment) -> Result<JtFunctional<Rational>> {
    seg.validate(tree)?;
    Ok(JtFunctional::from_pairs(
        seg.nodes(tree)
            .into_iter()
            .map(|t| (t, Rational::from_integer(1.into()))),
    ))
}

/// `⟨h, x⟩ = Σ_t h(t) x(t)`.
pub fn pair<S: Scalar>(h: &JtFunctional<S>, x: &JtVector<S>) -> S {
    h.iter()
        .fold(S::zero(), |acc, (t, v)| acc + v.clone() * x.get(t))
}

/// Brackets `‖c‖*` to within `opts.tol`, or returns the best certified bracket
/// found within `opts.max_iter` restricted solves with `tolerance_met = false`.
pub fn dual_norm(
    tree: &Tree,
    functional: &JtFunctional<Rational>,
    opts: &DualOptions,
) -> Result<DualBracket> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    functional.validate(tree)?;
    if functional.is_zero() {
        return Ok(DualBracket::zero());
    }

    let closure = tree.downward_closure(functional.support())?;
    let (sub, map) = tree.induced(&closure)?;
    let to_local = map
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, NodeId(i)))
        .collect();
    let c = functional.relabel(&to_local);
    let c_dense: Vec<f64> = sub.nodes().map(|t| c.get(t).approx_f64()).collect();

    let mut pool = FamilyPool::default();
    for t in sub.nodes() {
        pool.add(SegmentFamily::new(&sub, vec![Segment::singleton(t)])?);
    }
    pool.add(SegmentFamily::new(
        &sub,
        sub.nodes().map(Segment::singleton).collect(),
    )?);
    pool.add(path_cover_family(&sub, &c.support())?);
    pool.add(path_cover_family(&sub, &sub.nodes().collect())?);
    pool.add(norm_dp(&sub, &c.as_vector())?.family);

    let mut best = Bounds::trivial(&sub, &c);
    let mut iterations = 0;
    let mut met = best.gap() <= opts.tol;
    while !met && iterations < opts.max_iter {
        iterations += 1;
        let sol = match solve_inner(&sub, &c_dense, pool.families()) {
            Ok(sol) => sol,
            Err(_) => break,
        };
        best.offer_witness(&sub, &c, &sol.x)?;
        best.offer_decomposition(&sub, &c, pool.families(), &sol.weights);
        met = best.gap() <= opts.tol;
        if met {
            break;
        }

        let x = JtVector::from_pairs(sub.nodes().map(|t| (t, sol.x[t.0])));
        let cut = norm_dp(&sub, &x)?;
        if cut.norm_sq <= 1.0 + SEPARATION_SLACK || !pool.add(cut.family) {
            // restricted optimum is feasible; nothing left to separate
            break;
        }
    }

    let bracket = best.into_bracket(tree, &map, met, iterations, pool.len())?;
    bracket.verify(tree, functional)?;
    Ok(bracket)
}

/// Checks the ℓ₂ law `‖Σ λ_i χ*_{σ_i}‖* = ‖λ‖₂` for segments whose bottoms are
/// pairwise incomparable. Returns the verdict and the bracket.
pub fn l2_combination_check(
    tree: &Tree,
    segments: &[Segment],
    weights: &[Rational],
    opts: &DualOptions,
) -> Result<(bool, DualBracket)> {
    if segments.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} segments but {} weights",
            segments.len(),
            weights.len()
        )));
    }
    for s in segments {
        s.validate(tree)?;
    }
    let bottoms: Vec<NodeId> = segments.iter().map(|s| s.bottom).collect();
    tree.check_antichain(&bottoms)?;
    let mut f = JtFunctional::zero();
    for (s, w) in segments.iter().zip(weights) {
        for t in s.nodes(tree) {
            f.add_at(t, w.clone());
        }
    }
    let bracket = dual_norm(tree, &f, opts)?;
    let target = weights
        .iter()
        .map(|w| w.approx_f64().powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((bracket.contains(target, opts.tol), bracket))
}

/// Disjoint vertical runs covering `support`: each run starts at its lowest
/// unassigned node and climbs through the first supported child.
fn path_cover_family(tree: &Tree, support: &BTreeSet<NodeId>) -> Result<SegmentFamily> {
    let mut assigned = BTreeSet::new();
    let mut segments = Vec::new();
    let mut order: Vec<NodeId> = support.iter().copied().collect();
    order.sort_by_key(|&t| (tree.depth(t), t));
    for start in order {
        if !assigned.insert(start) {
            continue;
        }
        let mut top = start;
        while let Some(&next) = tree
            .children(top)
            .iter()
            .find(|c| support.contains(c) && !assigned.contains(c))
        {
            assigned.insert(next);
            top = next;
        }
        segments.push(Segment { bottom: start, top });
    }
    SegmentFamily::new(tree, segments)
}

#[derive(Default)]
struct FamilyPool {
    seen: BTreeSet<SegmentFamily>,
    order: Vec<SegmentFamily>,
}

impl FamilyPool {
    fn add(&mut self, fam: SegmentFamily) -> bool {
        if fam.is_empty() || self.seen.contains(&fam) {
            return false;
        }
        self.seen.insert(fam.clone());
        self.order.push(fam);
        true
    }

    fn families(&self) -> &[SegmentFamily] {
        &self.order
    }

    fn len(&self) -> usize {
        self.order.len()
    }
}

/// Best certified bounds so far, in local ids of the restricted subtree.
struct Bounds {
    lower: Rational,
    witness: JtVector<Rational>,
    upper: Rational,
    decomposition: Vec<DecompositionTerm>,
    residual: JtFunctional<Rational>,
}

impl Bounds {
    /// `|c_t|` via a signed unit vector; `‖c‖₁` via the all-residual split.
    fn trivial(tree: &Tree, c: &JtFunctional<Rational>) -> Self {
        let (t, v) = c
            .iter()
            .fold(None::<(NodeId, &Rational)>, |best, (t, v)| match best {
                Some((_, b)) if b.abs() >= v.abs() => best,
                _ => Some((t, v)),
            })
            .expect("nonzero functional");
        let sign = if v.is_negative() { -1 } else { 1 };
        let witness = JtVector::from_pairs([(t, Rational::from_integer(sign.into()))]);
        let _ = tree;
        Bounds {
            lower: v.abs(),
            witness,
            upper: c.abs_sum(),
            decomposition: Vec::new(),
            residual: c.clone(),
        }
    }

    fn gap(&self) -> f64 {
        to_f64_up(&self.upper) - to_f64_down(&self.lower)
    }

    fn offer_witness(&mut self, tree: &Tree, c: &JtFunctional<Rational>, x: &[f64]) -> Result<()> {
        let x = JtVector::from_pairs(tree.nodes().map(|t| (t, round_to_grid(x[t.0], GRID_BITS))));
        let norm_sq = norm_dp(tree, &x)?.norm_sq;
        if norm_sq.is_zero() {
            return Ok(());
        }
        let scale = sqrt_lower(&(Rational::from_integer(1.into()) / norm_sq));
        let witness = x.scale(&scale);
        let value = pair(c, &witness);
        if value > self.lower {
            self.lower = value;
            self.witness = witness;
        }
        Ok(())
    }

    fn offer_decomposition(
        &mut self,
        tree: &Tree,
        c: &JtFunctional<Rational>,
        families: &[SegmentFamily],
        weights: &[Vec<f64>],
    ) {
        let mut residual = c.clone();
        let mut upper = Rational::zero();
        let mut terms = Vec::new();
        for (fam, ys) in families.iter().zip(weights) {
            let ys: Vec<Rational> = ys.iter().map(|&y| round_to_grid(y, GRID_BITS)).collect();
            if ys.iter().all(|y| y.is_zero()) {
                continue;
            }
            for (seg, y) in fam.segments().iter().zip(&ys) {
                for t in seg.nodes(tree) {
                    residual.add_at(t, -y.clone());
                }
            }
            let sq = ys.iter().fold(Rational::zero(), |acc, y| acc + y.square());
            let bound = sqrt_upper(&sq);
            upper += bound.clone();
            terms.push(DecompositionTerm {
                family: fam.clone(),
                weights: ys,
                weight_norm_bound: bound,
            });
        }
        upper += residual.abs_sum();
        if upper < self.upper {
            self.upper = upper;
            self.decomposition = terms;
            self.residual = residual;
        }
    }

    fn into_bracket(
        self,
        tree: &Tree,
        map: &[NodeId],
        met: bool,
        iterations: usize,
        families_used: usize,
    ) -> Result<DualBracket> {
        let to_global = map
            .iter()
            .enumerate()
            .map(|(i, &g)| (NodeId(i), g))
            .collect();
        let decomposition = self
            .decomposition
            .into_iter()
            .map(|term| {
                Ok(DecompositionTerm {
                    family: term.family.map_nodes(tree, map)?,
                    ..term
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DualBracket {
            lower: to_f64_down(&self.lower),
            upper: to_f64_up(&self.upper),
            lower_exact: self.lower,
            upper_exact: self.upper,
            witness: self.witness.relabel(&to_global),
            decomposition,
            residual: self.residual.relabel(&to_global),
            tolerance_met: met,
            iterations,
            families_used,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TermJson {
    family: SegmentFamily,
    weights: Vec<String>,
    weight_norm_bound: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct BracketJson {
    lower: f64,
    upper: f64,
    lower_exact: String,
    upper_exact: String,
    tolerance_met: bool,
    iterations: usize,
    families_used: usize,
    witness: JtVector<Rational>,
    decomposition: Vec<TermJson>,
    residual: JtFunctional<Rational>,
}

impl Serialize for DualBracket {
    fn serialize<Z: serde::Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        BracketJson {
            lower: self.lower,
            upper: self.upper,
            lower_exact: format_ratio(&self.lower_exact),
            upper_exact: format_ratio(&self.upper_exact),
            tolerance_met: self.tolerance_met,
            iterations: self.iterations,
            families_used: self.families_used,
            witness: self.witness.clone(),
            decomposition: self
                .decomposition
                .iter()
                .map(|t| TermJson {
                    family: t.family.clone(),
                    weights: t.weights.iter().map(format_ratio).collect(),
                    weight_norm_bound: format_ratio(&t.weight_norm_bound),
                })
                .collect(),
            residual: self.residual.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DualBracket {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = BracketJson::deserialize(de)?;
        let r = |s: &str| parse_rational(s).map_err(D::Error::custom);
        let decomposition = j
            .decomposition
            .into_iter()
            .map(|t| {
                Ok(DecompositionTerm {
                    family: t.family,
                    weights: t
                        .weights
                        .iter()
                        .map(|w| r(w))
                        .collect::<std::result::Result<_, _>>()?,
                    weight_norm_bound: r(&t.weight_norm_bound)?,
                })
            })
            .collect::<std::result::Result<_, D::Error>>()?;
        Ok(DualBracket {
            lower: j.lower,
            upper: j.upper,
            lower_exact: r(&j.lower_exact)?,
            upper_exact: r(&j.upper_exact)?,
            witness: j.witness,
            decomposition,
            residual: j.residual,
            tolerance_met: j.tolerance_met,
            iterations: j.iterations,
            families_used: j.families_used,
        })
    }
}
