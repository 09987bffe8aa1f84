//! Moving between the two parameterizations.
//!
//! Convolution takes an ED2 triple, picks `y | 4c - 1` with `y ≡ 3 (mod 4)`
//! and tries to read `(y, c, yA - c, c²/(yA - c))` as a first-form quad for
//! `P'' = (4c - 1)/y`. Anticonvolution goes back from a quad to the residue
//! of `A` modulo `m·o` and, when the divisibilities allow it, to a triple.
//!
//! For a genuine ED2 triple `(4b-1)(4c-1) ≡ 1 (mod P)`, so `P ∤ 4c - 1`:
//! the canonical choice `y = (4c-1)/P` is never available, and an ED1 quad
//! never has `B` divisible by `P`. Both paths are implemented and report
//! this as data.

use crate::arith::{divides, divisors, factorize, gcd, is_prime, mod_inverse, FactorConfig, Nat};
use crate::decomp::{Decomposition, Method};
use crate::ed1::{Ed1Quad, QuadViolation};
use crate::ed2::Ed2Triple;
use crate::error::Error;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum YPolicy {
    /// Smallest divisor `y ≡ 3 (mod 4)` of `4c - 1`.
    Minimal,
    /// `y = (4c - 1)/P`; rejected when `P ∤ 4c - 1`.
    Canonical,
    Explicit(Nat),
}

impl fmt::Display for YPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YPolicy::Minimal => f.write_str("minimal"),
            YPolicy::Canonical => f.write_str("canonical"),
            YPolicy::Explicit(y) => write!(f, "explicit:{y}"),
        }
    }
}

/// Checked in this order: selection, `P''` prime, `gcd(y, c)`, `u | c²`,
/// congruences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConvolutionRejection {
    PSecondNotPrime,
    GcdFailure,
    UNotDivisor,
    CongruenceFailure,
}

impl ConvolutionRejection {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvolutionRejection::PSecondNotPrime => "P''_not_prime",
            ConvolutionRejection::GcdFailure => "gcd_failure",
            ConvolutionRejection::UNotDivisor => "u_not_divisor",
            ConvolutionRejection::CongruenceFailure => "congruence_failure",
        }
    }
}

impl fmt::Display for ConvolutionRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvolutionResult {
    pub source: Ed2Triple,
    pub policy: YPolicy,
    /// `4c - 1`.
    pub s: Nat,
    pub y: Option<Nat>,
    pub p_second: Option<Nat>,
    pub quad: Option<Ed1Quad>,
    pub decomposition: Option<Decomposition>,
    pub rejection: Option<ConvolutionRejection>,
}

fn select_y(t: &Ed2Triple, s: &Nat, policy: &YPolicy, cfg: &FactorConfig) -> Result<Option<Nat>, Error> {
    Ok(match policy {
        YPolicy::Minimal => divisors(&factorize(s, cfg)?).into_iter().find(|y| y % 4u32 == Nat::from(3u32)),
        YPolicy::Canonical => divides(&t.p, s).then(|| s / &t.p),
        YPolicy::Explicit(y) => (!y.is_zero() && divides(y, s)).then(|| y.clone()),
    })
}

pub fn convolve(t: &Ed2Triple, policy: YPolicy, cfg: &FactorConfig) -> Result<ConvolutionResult, Error> {
    let s = &t.c * 4u32 - 1u32;
    let mut res = ConvolutionResult {
        source: t.clone(),
        policy: policy.clone(),
        s: s.clone(),
        y: None,
        p_second: None,
        quad: None,
        decomposition: None,
        rejection: None,
    };
    let reject = |mut r: ConvolutionResult, why| {
        r.rejection = Some(why);
        Ok(r)
    };
    let Some(y) = select_y(t, &s, &policy, cfg)? else {
        return reject(res, ConvolutionRejection::CongruenceFailure);
    };
    let p2 = &s / &y;
    res.y = Some(y.clone());
    res.p_second = Some(p2.clone());
    if !is_prime(&p2) {
        return reject(res, ConvolutionRejection::PSecondNotPrime);
    }
    let c = &t.c;
    if !gcd(&y, c).is_one() {
        return reject(res, ConvolutionRejection::GcdFailure);
    }
    let ya = &y * &t.a;
    let c2 = c * c;
    if ya <= *c || !divides(&(&ya - c), &c2) {
        return reject(res, ConvolutionRejection::UNotDivisor);
    }
    let u0 = ya - c;
    let v0 = &c2 / &u0;
    let (u, v) = if u0 <= v0 { (u0, v0) } else { (v0, u0) };
    if &y % 4u32 != Nat::from(3u32) {
        return reject(res, ConvolutionRejection::CongruenceFailure);
    }
    match Ed1Quad::admissible(&p2, &y, c, &u, &v) {
        Ok(q) => {
            let d = q.decomposition()?.relabel(Method::Transform, q_params(&q, &policy));
            res.quad = Some(q);
            res.decomposition = Some(d);
            Ok(res)
        }
        Err(QuadViolation::NotCoprime) => reject(res, ConvolutionRejection::GcdFailure),
        Err(QuadViolation::Product) | Err(QuadViolation::ZeroU) => reject(res, ConvolutionRejection::UNotDivisor),
        Err(_) => reject(res, ConvolutionRejection::CongruenceFailure),
    }
}

fn q_params(q: &Ed1Quad, policy: &YPolicy) -> crate::decomp::Params {
    crate::decomp::params([
        ("gamma", q.gamma.to_string()),
        ("c", q.c.to_string()),
        ("u", q.u.to_string()),
        ("v", q.v.to_string()),
        ("policy", policy.to_string()),
    ])
}

/// Reads a decomposition with `C = cP` and `P | 4c - 1` as a quad with
/// `γ = (4c - 1)/P`, `u = γA - c`, `v = γB - c`, checking every conclusion:
/// `uv = c²`, `u ≡ v ≡ -c (mod γ)`, `gcd(γ, c) = 1`, `γ ≡ 3P (mod 4)`.
pub fn convolve_from_ed1_origin(d: &Decomposition) -> Result<Ed1Quad, ConvolutionRejection> {
    let p = d.p();
    if !divides(p, d.c()) {
        return Err(ConvolutionRejection::CongruenceFailure);
    }
    let c = d.c() / p;
    let s = &c * 4u32 - 1u32;
    if !divides(p, &s) {
        return Err(ConvolutionRejection::CongruenceFailure);
    }
    let gamma = s / p;
    let ga = &gamma * d.a();
    let gb = &gamma * d.b();
    if ga <= c || gb <= c {
        return Err(ConvolutionRejection::UNotDivisor);
    }
    origin_quad(p, &gamma, &c, &(ga - &c), &(gb - &c))
}

/// The conclusion checks of [`convolve_from_ed1_origin`] on explicit values.
pub fn origin_quad(p: &Nat, gamma: &Nat, c: &Nat, u: &Nat, v: &Nat) -> Result<Ed1Quad, ConvolutionRejection> {
    match Ed1Quad::admissible(p, gamma, c, u, v) {
        Ok(q) => {
            assert!(q.identity_holds());
            Ok(q)
        }
        Err(QuadViolation::NotCoprime) => Err(ConvolutionRejection::GcdFailure),
        Err(QuadViolation::Product) | Err(QuadViolation::ZeroU) => Err(ConvolutionRejection::UNotDivisor),
        Err(_) => Err(ConvolutionRejection::CongruenceFailure),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonContext {
    pub m: Nat,
    pub o: Nat,
    pub y: Nat,
    /// `y⁻¹ mod m·o`.
    pub d: Nat,
}

impl CanonContext {
    pub fn new(m: &Nat, o: &Nat, y: &Nat) -> Result<Self, Error> {
        if m.is_zero() || o.is_zero() {
            return Err(Error::domain("moduli m, o must be positive"));
        }
        if !gcd(m, o).is_one() {
            return Err(Error::domain(format!("gcd(m = {m}, o = {o}) != 1")));
        }
        let mo = m * o;
        let Some(d) = mod_inverse(y, &mo) else {
            return Err(Error::domain(format!("gcd(y = {y}, m*o = {mo}) != 1")));
        };
        Ok(CanonContext { m: m.clone(), o: o.clone(), y: y.clone(), d })
    }

    pub fn modulus(&self) -> Nat {
        &self.m * &self.o
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anticonvolution {
    /// `d(u + c) mod m·o`.
    pub a_residue: Nat,
    pub modulus: Nat,
    pub triple: Option<Ed2Triple>,
    pub diagnostic: Option<String>,
}

/// `A ≡ y⁻¹(u + c) (mod m·o)`; needs only `gcd(m, o) = 1` and
/// `gcd(y, m·o) = 1`.
pub fn anticonvolution_residue(q: &Ed1Quad, m: &Nat, o: &Nat) -> Result<(Nat, Nat), Error> {
    let ctx = CanonContext::new(m, o, &q.gamma)?;
    let mo = ctx.modulus();
    let r = (&ctx.d * (&q.u + &q.c)) % &mo;
    assert_eq!(r, &q.a % &mo, "A must match d(u+c) mod m*o");
    Ok((r, mo))
}

/// Anticonvolution on the canonical subclass: `gcd(y, c) = 1`,
/// `gcd(u, v) = 1`, `u < v`, `uv = c²`, `u ≡ -c (mod y)`,
/// `0 < c < min(m, o)`. Also tries `b = (v + c)/(γP)`, `δ = bc/A`.
pub fn anticonvolve(q: &Ed1Quad, ctx: &CanonContext) -> Result<Anticonvolution, Error> {
    if ctx.y != q.gamma {
        return Err(Error::domain(format!("context y = {} differs from quad gamma = {}", ctx.y, q.gamma)));
    }
    let c = &q.c;
    let checks: [(&str, bool); 6] = [
        ("gcd(y, c) = 1", gcd(&q.gamma, c).is_one()),
        ("gcd(u, v) = 1", gcd(&q.u, &q.v).is_one()),
        ("u < v", q.u < q.v),
        ("uv = c^2", &q.u * &q.v == c * c),
        ("u = -c (mod y)", divides(&q.gamma, &(&q.u + c))),
        ("0 < c < min(m, o)", !c.is_zero() && c < &ctx.m && c < &ctx.o),
    ];
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(Error::domain(format!("canonical condition fails: {name}")));
    }
    let (a_residue, modulus) = anticonvolution_residue(q, &ctx.m, &ctx.o)?;
    let gp = &q.gamma * &q.p;
    let vc = &q.v + c;
    let (triple, diagnostic) = if !divides(&gp, &vc) {
        (None, Some(format!("gamma*P = {gp} does not divide v + c = {vc}")))
    } else {
        let b = vc / &gp;
        let bc = &b * c;
        if !divides(&q.a, &bc) {
            (None, Some(format!("A = {} does not divide bc = {bc}", q.a)))
        } else {
            match Ed2Triple::new(&q.p, &(&bc / &q.a), &b, c, &FactorConfig::default()) {
                Ok(t) => (Some(t), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
    };
    Ok(Anticonvolution { a_residue, modulus, triple, diagnostic })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundtripRow {
    pub p: Nat,
    pub a: Nat,
    pub b: Nat,
    pub c: Nat,
    pub policy: YPolicy,
    pub y: Option<Nat>,
    /// The triple's `c`.
    pub c_small: Nat,
    pub p_second: Option<Nat>,
    pub image: Option<(Nat, Nat, Nat)>,
    /// Which quantities the image preserves, e.g. `A'=A;c'=c`.
    pub invariants: String,
    pub success: bool,
    pub rejection: Option<ConvolutionRejection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Balance {
    Compression,
    Balanced,
    Expansion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundtripReport {
    pub rows: Vec<RoundtripRow>,
    pub sources: usize,
    pub images: usize,
    pub balance: Balance,
}

/// Tries the minimal and canonical policies on every triple.
pub fn roundtrip_report(triples: &[Ed2Triple], cfg: &FactorConfig) -> Result<RoundtripReport, Error> {
    let mut rows = Vec::new();
    let mut images = std::collections::BTreeSet::new();
    for t in triples {
        let src = t.decomposition()?;
        for policy in [YPolicy::Minimal, YPolicy::Canonical] {
            let r = convolve(t, policy.clone(), cfg)?;
            let image = r.decomposition.as_ref().map(|d| (d.a().clone(), d.b().clone(), d.c().clone()));
            let invariants = match &r.quad {
                Some(q) => {
                    let mut inv = Vec::new();
                    if q.a == t.a {
                        inv.push("A'=A");
                    }
                    if q.c == t.c {
                        inv.push("c'=c");
                    }
                    inv.join(";")
                }
                None => String::new(),
            };
            if let Some(d) = &r.decomposition {
                images.insert(d.key());
            }
            rows.push(RoundtripRow {
                p: t.p.clone(),
                a: src.a().clone(),
                b: src.b().clone(),
                c: src.c().clone(),
                policy,
                y: r.y.clone(),
                c_small: t.c.clone(),
                p_second: r.p_second.clone(),
                success: image.is_some(),
                image,
                invariants,
                rejection: r.rejection,
            });
        }
    }
    let sources = triples.len();
    let balance = match images.len().cmp(&sources) {
        std::cmp::Ordering::Less => Balance::Compression,
        std::cmp::Ordering::Equal => Balance::Balanced,
        std::cmp::Ordering::Greater => Balance::Expansion,
    };
    Ok(RoundtripReport { rows, sources, images: images.len(), balance })
}
