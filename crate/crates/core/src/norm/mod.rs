//! The James tree norm `‖f‖² = max_F Σ_{σ∈F} (Σ_{t∈σ} f(t))²` over disjoint
//! segment families `F`, computed exactly.
//!
//! Two independent routes are provided: [`norm_bruteforce`] enumerates every
//! family, [`norm_dp`] runs a dynamic program over the tree. Both return the
//! squared norm together with a maximizing family.

mod dp;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::{format_ratio, parse_rational, Rational, Scalar};
use crate::tree::{enumerate_disjoint_families, NodeId, Segment, SegmentFamily, Tree};
use crate::vector::JtVector;

pub use dp::norm_dp;

/// Enumeration budget used by [`norm_bruteforce`].
pub const DEFAULT_FAMILY_CAP: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct NormCertificate<S> {
    pub norm_sq: S,
    pub family: SegmentFamily,
}

impl<S: Scalar> NormCertificate<S> {
    pub fn zero() -> Self {
        NormCertificate {
            norm_sq: S::zero(),
            family: SegmentFamily::empty(),
        }
    }

    /// `√normSq` as a float, for display only.
    pub fn norm(&self) -> f64 {
        self.norm_sq.approx_f64().max(0.0).sqrt()
    }

    /// Recomputes the family value and compares it with `norm_sq`.
    pub fn self_check(&self, tree: &Tree, f: &JtVector<S>) -> Result<bool> {
        Ok(family_value(tree, f, &self.family)? == self.norm_sq)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    #[serde(rename = "normSq")]
    norm_sq: String,
    family: SegmentFamily,
    #[serde(default)]
    norm: Option<f64>,
}

impl Serialize for NormCertificate<Rational> {
    fn serialize<Z: serde::Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
        CertificateJson {
            norm_sq: format_ratio(&self.norm_sq),
            family: self.family.clone(),
            norm: Some(self.norm()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for NormCertificate<Rational> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let json = CertificateJson::deserialize(de)?;
        Ok(NormCertificate {
            norm_sq: parse_rational(&json.norm_sq).map_err(serde::de::Error::custom)?,
            family: json.family,
        })
    }
}

pub fn segment_sum<S: Scalar>(tree: &Tree, f: &JtVector<S>, seg: &Segment) -> S {
    seg.nodes(tree)
        .into_iter()
        .fold(S::zero(), |acc, t| acc + f.get(t))
}

/// `Σ_{σ∈F} (Σ_{t∈σ} f(t))²`.
pub fn family_value<S: Scalar>(tree: &Tree, f: &JtVector<S>, family: &SegmentFamily) -> Result<S> {
    f.validate(tree)?;
    family.validate(tree)?;
    Ok(family
        .segments()
        .iter()
        .fold(S::zero(), |acc, s| acc + segment_sum(tree, f, s).square()))
}

/// Exhaustive maximization over all disjoint families. Among maximizers the
/// first in canonical family order wins, so zero-sum segments never appear.
pub fn norm_bruteforce<S: Scalar>(tree: &Tree, f: &JtVector<S>) -> Result<NormCertificate<S>> {
    norm_bruteforce_capped(tree, f, DEFAULT_FAMILY_CAP)
}

pub fn norm_bruteforce_capped<S: Scalar>(
    tree: &Tree,
    f: &JtVector<S>,
    cap: usize,
) -> Result<NormCertificate<S>> {
    f.validate(tree)?;
    let mut best = NormCertificate::zero();
    for family in enumerate_disjoint_families(tree, cap)? {
        let value = family
            .segments()
            .iter()
            .fold(S::zero(), |acc, s| acc + segment_sum(tree, f, s).square());
        if value > best.norm_sq {
            best = NormCertificate {
                norm_sq: value,
                family,
            };
        }
    }
    Ok(best)
}

/// The norm-one projection onto vectors supported above the antichain `set`:
/// keeps `f(t)` when `t ⪰ s` for some `s ∈ set`, zero elsewhere.
pub fn projection_pi_s<S: Scalar>(
    tree: &Tree,
    f: &JtVector<S>,
    set: &BTreeSet<NodeId>,
) -> Result<JtVector<S>> {
    f.validate(tree)?;
    tree.check_antichain(set)?;
    Ok(f.filter(|t| set.iter().any(|&s| tree.precedes(s, t))))
}
