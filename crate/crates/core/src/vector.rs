//! Finitely supported coefficient maps on tree nodes.
//!
//! [`JtVector`] is an element of `c₀₀(T)`; [`JtFunctional`] is a coefficient map
//! acting by `⟨h, x⟩ = Σ_t h(t) x(t)`. Zero coefficients are never stored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{format_ratio, parse_rational, Rational, Scalar};
use crate::tree::{NodeId, Tree};

macro_rules! coefficient_map {
    ($name:ident) => {
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name<S> {
            coeffs: BTreeMap<NodeId, S>,
        }

        impl<S: Scalar> Default for $name<S> {
            fn default() -> Self {
                Self::zero()
            }
        }

        impl<S: Scalar> $name<S> {
            pub fn zero() -> Self {
                Self {
                    coeffs: BTreeMap::new(),
                }
            }

            /// Later entries for the same node are added to earlier ones.
            pub fn from_pairs<I>(pairs: I) -> Self
            where
                I: IntoIterator<Item = (NodeId, S)>,
            {
                let mut out = Self::zero();
                for (t, v) in pairs {
                    out.add_at(t, v);
                }
                out
            }

            pub fn unit(t: NodeId) -> Self {
                Self::from_pairs([(t, S::one())])
            }

            pub fn add_at(&mut self, t: NodeId, v: S) {
                let sum = match self.coeffs.remove(&t) {
                    Some(old) => old + v,
                    None => v,
                };
                if !sum.is_zero() {
                    self.coeffs.insert(t, sum);
                }
            }

            pub fn set(&mut self, t: NodeId, v: S) {
                if v.is_zero() {
                    self.coeffs.remove(&t);
                } else {
                    self.coeffs.insert(t, v);
                }
            }

            pub fn get(&self, t: NodeId) -> S {
                self.coeffs.get(&t).cloned().unwrap_or_else(S::zero)
            }

            pub fn iter(&self) -> impl Iterator<Item = (NodeId, &S)> + '_ {
                self.coeffs.iter().map(|(&t, v)| (t, v))
            }

            pub fn support(&self) -> BTreeSet<NodeId> {
                self.coeffs.keys().copied().collect()
            }

            pub fn is_zero(&self) -> bool {
                self.coeffs.is_empty()
            }

            pub fn nnz(&self) -> usize {
                self.coeffs.len()
            }

            /// Support must lie inside `tree`.
            pub fn validate(&self, tree: &Tree) -> Result<()> {
                self.coeffs.keys().try_for_each(|&t| tree.check(t))
            }

            pub fn scale(&self, k: &S) -> Self {
                Self::from_pairs(self.iter().map(|(t, v)| (t, v.clone() * k.clone())))
            }

            pub fn abs_sum(&self) -> S {
                self.coeffs.values().fold(S::zero(), |acc, v| acc + v.abs())
            }

            pub fn sq_sum(&self) -> S {
                self.coeffs
                    .values()
                    .fold(S::zero(), |acc, v| acc + v.square())
            }

            pub fn max_abs(&self) -> S {
                self.coeffs
                    .values()
                    .map(|v| v.abs())
                    .fold(S::zero(), |a, b| if b > a { b } else { a })
            }

            /// Keeps the coefficients at nodes accepted by `keep`.
            pub fn filter<F: Fn(NodeId) -> bool>(&self, keep: F) -> Self {
                Self {
                    coeffs: self
                        .coeffs
                        .iter()
                        .filter(|(&t, _)| keep(t))
                        .map(|(&t, v)| (t, v.clone()))
                        .collect(),
                }
            }

            pub fn map_scalar<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> $name<T> {
                $name::from_pairs(self.iter().map(|(t, v)| (t, f(v))))
            }

            /// Relabels through a map; nodes missing from it are dropped.
            pub fn relabel(&self, map: &BTreeMap<NodeId, NodeId>) -> Self {
                Self::from_pairs(
                    self.iter()
                        .filter_map(|(t, v)| map.get(&t).map(|&u| (u, v.clone()))),
                )
            }
        }

        impl<S: Scalar> Add for &$name<S> {
            type Output = $name<S>;
            fn add(self, rhs: Self) -> $name<S> {
                let mut out = self.clone();
                for (t, v) in rhs.iter() {
                    out.add_at(t, v.clone());
                }
                out
            }
        }

        impl<S: Scalar> Sub for &$name<S> {
            type Output = $name<S>;
            fn sub(self, rhs: Self) -> $name<S> {
                let mut out = self.clone();
                for (t, v) in rhs.iter() {
                    out.add_at(t, -v.clone());
                }
                out
            }
        }

        impl<S: Scalar> Neg for &$name<S> {
            type Output = $name<S>;
            fn neg(self) -> $name<S> {
                self.map_scalar(|v| -v.clone())
            }
        }

        impl $name<Rational> {
            /// Lines `nodeId p/q`; `#` comments and blank lines are skipped.
            /// Repeated nodes accumulate.
            pub fn parse_text(text: &str) -> Result<Self> {
                let mut out = Self::zero();
                for (i, raw) in text.lines().enumerate() {
                    let line = raw.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let err = |msg: String| Error::Parse { line: i + 1, msg };
                    let mut fields = line.split_whitespace();
                    let id = fields
                        .next()
                        .and_then(|f| f.parse::<usize>().ok())
                        .ok_or_else(|| err("expected a node id".into()))?;
                    let value = fields
                        .next()
                        .ok_or_else(|| err("missing value".into()))
                        .and_then(|f| parse_rational(f).map_err(|e| err(e.to_string())))?;
                    if fields.next().is_some() {
                        return Err(err("trailing fields".into()));
                    }
                    out.add_at(NodeId(id), value);
                }
                Ok(out)
            }

            pub fn to_text(&self) -> String {
                let mut s = String::new();
                for (t, v) in self.iter() {
                    writeln!(s, "{t} {}", format_ratio(v)).expect("string write");
                }
                s
            }
        }

        impl Serialize for $name<Rational> {
            fn serialize<Z: Serializer>(&self, ser: Z) -> std::result::Result<Z::Ok, Z::Error> {
                let m: BTreeMap<usize, String> =
                    self.iter().map(|(t, v)| (t.0, format_ratio(v))).collect();
                m.serialize(ser)
            }
        }

        impl<'de> Deserialize<'de> for $name<Rational> {
            fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
                let m = BTreeMap::<usize, String>::deserialize(de)?;
                let mut out = Self::zero();
                for (t, v) in m {
                    let v = parse_rational(&v).map_err(serde::de::Error::custom)?;
                    out.add_at(NodeId(t), v);
                }
                Ok(out)
            }
        }
    };
}

coefficient_map!(JtVector);
coefficient_map!(JtFunctional);

impl<S: Scalar> JtVector<S> {
    /// The same coefficients read as a functional.
    pub fn as_functional(&self) -> JtFunctional<S> {
        JtFunctional {
            coeffs: self.coeffs.clone(),
        }
    }
}

impl<S: Scalar> JtFunctional<S> {
    pub fn as_vector(&self) -> JtVector<S> {
        JtVector {
            coeffs: self.coeffs.clone(),
        }
    }
}
