//! Verified decompositions `4/P = 1/A + 1/B + 1/C` and their JSON records.
//!
//! A [`Decomposition`] can only be obtained through [`verify`], so holding
//! one means the identity, the window bound and the multiplicity profile
//! were all checked.

use crate::arith::{check_unit_fraction_identity, divides, is_prime, nat, Nat};
use crate::error::Error;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ed1,
    Ed2,
    Direct,
    Back,
    Explicit3Mod4,
    Transform,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ed1 => "ED1",
            Method::Ed2 => "ED2",
            Method::Direct => "DIRECT",
            Method::Back => "BACK",
            Method::Explicit3Mod4 => "EXPLICIT_3MOD4",
            Method::Transform => "TRANSFORM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "ED1" => Method::Ed1,
            "ED2" => Method::Ed2,
            "DIRECT" => Method::Direct,
            "BACK" => Method::Back,
            "EXPLICIT_3MOD4" => Method::Explicit3Mod4,
            "TRANSFORM" => Method::Transform,
            other => return Err(Error::domain(format!("unknown method {other:?}"))),
        })
    }
}

/// Opaque provenance payload, all values decimal strings or tags.
pub type Params = BTreeMap<String, String>;

pub fn params<K: ToString, V: ToString>(items: impl IntoIterator<Item = (K, V)>) -> Params {
    items.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MultiplicityClass {
    /// Only `C` is a multiple of `P`.
    SingleC,
    /// `B` and `C` are multiples of `P`, `A` is not.
    DoubleBc,
    Invalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiplicityProfile {
    /// `P | A`, `P | B`, `P | C`.
    pub flags: [bool; 3],
    pub class: MultiplicityClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    NotPrime,
    Identity,
    Bounds,
    Multiplicity,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind:?} check failed: {detail}")]
pub struct Rejection {
    pub kind: CheckKind,
    pub detail: String,
}

impl Rejection {
    fn new(kind: CheckKind, detail: impl Into<String>) -> Self {
        Rejection { kind, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    p: Nat,
    a: Nat,
    b: Nat,
    c: Nat,
    method: Method,
    params: Params,
    profile: MultiplicityProfile,
}

impl Decomposition {
    pub fn p(&self) -> &Nat {
        &self.p
    }
    pub fn a(&self) -> &Nat {
        &self.a
    }
    pub fn b(&self) -> &Nat {
        &self.b
    }
    pub fn c(&self) -> &Nat {
        &self.c
    }
    pub fn method(&self) -> Method {
        self.method
    }
    pub fn params(&self) -> &Params {
        &self.params
    }
    pub fn profile(&self) -> MultiplicityProfile {
        self.profile
    }

    /// `(P, A, B, C)`, for set comparisons that ignore provenance.
    pub fn key(&self) -> (Nat, Nat, Nat, Nat) {
        (self.p.clone(), self.a.clone(), self.b.clone(), self.c.clone())
    }

    /// Same numbers, different provenance.
    pub fn relabel(mut self, method: Method, params: Params) -> Self {
        self.method = method;
        self.params = params;
        self
    }

    pub fn to_record(&self) -> DecompositionRecord {
        DecompositionRecord {
            p: self.p.to_string(),
            a: self.a.to_string(),
            b: self.b.to_string(),
            c: self.c.to_string(),
            method: self.method.as_str().to_string(),
            params: self.params.clone(),
        }
    }
}

/// Wire form: every integer a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub p: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub method: String,
    #[serde(default)]
    pub params: Params,
}

impl DecompositionRecord {
    /// Parses and re-verifies the record.
    pub fn verify(&self) -> Result<Decomposition, Error> {
        let num = |field: &str, s: &str| {
            Nat::from_str(s).map_err(|_| Error::domain(format!("field {field}: not a decimal integer: {s:?}")))
        };
        let method: Method = self.method.parse()?;
        Ok(verify(
            &num("p", &self.p)?,
            &num("a", &self.a)?,
            &num("b", &self.b)?,
            &num("c", &self.c)?,
            method,
            self.params.clone(),
        )?)
    }
}

/// `P < 4A < 3P`.
pub fn bounds_check(p: &Nat, a: &Nat) -> bool {
    let four_a = a * 4u32;
    *p < four_a && four_a < p * 3u32
}

fn profile_of(p: &Nat, a: &Nat, b: &Nat, c: &Nat) -> MultiplicityProfile {
    let flags = [divides(p, a), divides(p, b), divides(p, c)];
    let class = match flags {
        [false, false, true] => MultiplicityClass::SingleC,
        [false, true, true] => MultiplicityClass::DoubleBc,
        _ => MultiplicityClass::Invalid,
    };
    MultiplicityProfile { flags, class }
}

/// Checks, in order: primality of `P`, the identity, the window bound on the
/// smallest denominator (skipped for `P <= 3`), and the multiplicity
/// profile. The denominators are sorted first.
pub fn verify(
    p: &Nat,
    a: &Nat,
    b: &Nat,
    c: &Nat,
    method: Method,
    params: Params,
) -> Result<Decomposition, Rejection> {
    if !is_prime(p) {
        return Err(Rejection::new(CheckKind::NotPrime, format!("{p} is not prime")));
    }
    let mut ds = [a.clone(), b.clone(), c.clone()];
    ds.sort();
    let [a, b, c] = ds;
    if !check_unit_fraction_identity(p, &a, &b, &c) {
        return Err(Rejection::new(
            CheckKind::Identity,
            format!("4/{p} != 1/{a} + 1/{b} + 1/{c}"),
        ));
    }
    if *p > nat(3) && !bounds_check(p, &a) {
        return Err(Rejection::new(
            CheckKind::Bounds,
            format!("smallest denominator {a} outside ({p}/4, 3*{p}/4)"),
        ));
    }
    let profile = profile_of(p, &a, &b, &c);
    if profile.class == MultiplicityClass::Invalid {
        return Err(Rejection::new(
            CheckKind::Multiplicity,
            format!("divisibility by {p} of (A,B,C) = {:?} is impossible", profile.flags),
        ));
    }
    Ok(Decomposition { p: p.clone(), a, b, c, method, params, profile })
}

/// Recomputes the multiplicity profile from the denominators.
pub fn classify_multiplicity(d: &Decomposition) -> Result<MultiplicityProfile, Rejection> {
    let profile = profile_of(&d.p, &d.a, &d.b, &d.c);
    if profile.class == MultiplicityClass::Invalid {
        return Err(Rejection::new(
            CheckKind::Multiplicity,
            format!("profile {:?} contradicts the multiplicity lemmas", profile.flags),
        ));
    }
    Ok(profile)
}

/// The two closed forms for `P = 4P' + 3`.
pub fn explicit_3mod4(p: &Nat) -> Result<[Decomposition; 2], Error> {
    if !is_prime(p) || (p % 4u32) != nat(3) {
        return Err(Error::domain(format!("{p} is not a prime congruent to 3 mod 4")));
    }
    let q: Nat = p / 4u32;
    let q1 = &q + 1u32;
    let first = (q1.clone(), &q1 * p * 2u32, &q1 * p * 2u32);
    let second = (q1.clone(), (&q + 2u32) * p, &q1 * (&q + 2u32) * p);
    let pars = params([("pprime", q.to_string())]);
    let make = |(a, b, c): (Nat, Nat, Nat)| verify(p, &a, &b, &c, Method::Explicit3Mod4, pars.clone());
    Ok([make(first)?, make(second)?])
}

/// `B` cannot be a multiple of `P` in the first parameterization once
/// `3γP > 5`.
pub fn check_b_multiple_impossible(p: &Nat, gamma: &Nat) -> bool {
    p * gamma * 3u32 > nat(5)
}
