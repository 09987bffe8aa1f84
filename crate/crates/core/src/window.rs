//! Factorization-free searches over the window `P/4 + 3/4 <= A <= 3P/4 - 3/4`.
//!
//! With `A = αb'c'` and `m = 4A - P`, the second parameterization is
//! equivalent to `b'c' = A/α` and `b' + c' = m·d'`. Two searches use this:
//!
//! * direct: fix `(r, s) = (d', b')`; the pair exists iff
//!   `P ≡ -4αs² (mod 4αsr - 1)`, and then `m = (4αs² + P)/(4αsr - 1)`,
//!   `c' = mr - s`, `A = αs(mr - s) = λP + μ` with exact rationals `λ, μ`.
//! * back: fix `A`; points `(u, v) = (b'+c', b'-c')` satisfy
//!   `u² - v² = 4A/α`, `m | u`, `u ≡ v (mod 2)`.
//!
//! Both rebuild `(B, C)` through [`Ed2Triple::from_scaled`], so nothing here
//! calls the factorizer except [`divisor_constructor`].

use crate::arith::{divides, divisors, factorize, nat, sqrt_exact, FactorConfig, Nat};
use crate::decomp::{params, Decomposition, Method};
use crate::ed2::Ed2Triple;
use crate::error::Error;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// Integer window `[⌈(P+3)/4⌉, ⌊(3P-3)/4⌋]`; empty when the first exceeds
/// the second.
pub fn window(p: &Nat) -> (Nat, Nat) {
    let lo = (p + 3u32 + 3u32) / 4u32;
    let hi = if *p >= nat(1) { (p * 3u32 - 3u32) / 4u32 } else { Nat::zero() };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowWidth {
    /// `U_int - L_int + 1`.
    pub enumerated: Nat,
    /// `⌊P/2⌋`.
    pub stated: Nat,
    pub matches: bool,
}

pub fn window_width(p: &Nat) -> WindowWidth {
    let (lo, hi) = window(p);
    let enumerated = if hi >= lo { hi - lo + 1u32 } else { Nat::zero() };
    let stated = p / 2u32;
    let matches = enumerated == stated;
    WindowWidth { enumerated, stated, matches }
}

pub fn in_window(p: &Nat, a: &Nat) -> bool {
    let (lo, hi) = window(p);
    &lo <= a && a <= &hi
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowParams {
    pub p: Nat,
    pub a: Nat,
    pub alpha: Nat,
    /// `4A - P`.
    pub m: Nat,
    /// `A/α`.
    pub big_m: Nat,
    pub lower: BigRational,
    pub upper: BigRational,
    pub l_int: Nat,
    pub u_int: Nat,
}

impl WindowParams {
    pub fn new(p: &Nat, a: &Nat, alpha: &Nat) -> Result<Self, Error> {
        let (l_int, u_int) = window(p);
        if a < &l_int || a > &u_int {
            return Err(Error::domain(format!("A = {a} outside the window [{l_int}, {u_int}]")));
        }
        if alpha.is_zero() || !divides(alpha, a) {
            return Err(Error::domain(format!("alpha = {alpha} does not divide A = {a}")));
        }
        let pi = BigInt::from(p.clone());
        let four = BigInt::from(4);
        Ok(WindowParams {
            p: p.clone(),
            a: a.clone(),
            alpha: alpha.clone(),
            m: a * 4u32 - p,
            big_m: a / alpha,
            lower: BigRational::new(&pi + 3, four.clone()),
            upper: BigRational::new(pi * 3 - 3, four),
            l_int,
            u_int,
        })
    }

    /// `⌊√(2A)⌋`, plus one when `2A` is a perfect square.
    pub fn t_bound(&self) -> Nat {
        t_bound(&self.a)
    }
}

pub fn t_bound(a: &Nat) -> Nat {
    let (t, exact) = sqrt_exact(&(a * 2u32));
    if exact {
        t + 1u32
    } else {
        t
    }
}

/// Evaluates `(4αd'b' - 1)(4αd'c' - 1) = 4αPd'² + 1` and, independently,
/// `b'c' = A/α` with `b' + c' = m·d'` where `A = αb'c'`, `m = 4A - P`.
/// The two must agree; disagreement is a bug and panics.
pub fn prod_sum_equiv(alpha: &Nat, dprime: &Nat, bprime: &Nat, cprime: &Nat, p: &Nat) -> bool {
    let k = alpha * dprime * 4u32;
    let lhs = (&k * bprime - 1u32) * (&k * cprime - 1u32);
    let rhs = alpha * p * dprime * dprime * 4u32 + 1u32;
    let product_form = lhs == rhs;

    let a = alpha * bprime * cprime;
    let four_a = &a * 4u32;
    let sum_form = four_a > *p && bprime + cprime == (four_a - p) * dprime;

    assert_eq!(product_form, sum_form, "product and sum forms disagree");
    product_form
}

/// Integer roots of `x² - Sx + M = 0`, larger first.
pub fn quadratic_roots(s: &Nat, m: &Nat) -> Option<(Nat, Nat)> {
    let s2 = s * s;
    let four_m = m * 4u32;
    if s2 < four_m {
        return None;
    }
    let (r, exact) = sqrt_exact(&(s2 - four_m));
    if !exact || (s + &r).is_odd() {
        return None;
    }
    Some(((s + &r) / 2u32, (s - &r) / 2u32))
}

/// Smallest `d' >= 1` with `(4A - P)·d' >= 2√(A/α)`, compared squared.
pub fn disc_lower_bound(a: &Nat, alpha: &Nat, p: &Nat) -> Result<Nat, Error> {
    let four_a = a * 4u32;
    if four_a <= *p {
        return Err(Error::domain("need 4A > P"));
    }
    if alpha.is_zero() || !divides(alpha, a) {
        return Err(Error::domain("alpha must divide A"));
    }
    let m = four_a - p;
    let target = (a / alpha) * 4u32;
    let ok = |d: &Nat| (&m * d) * (&m * d) >= target;
    let mut d = (target.sqrt() / &m).max(Nat::one());
    while !ok(&d) {
        d += 1u32;
    }
    while d > Nat::one() && ok(&(&d - 1u32)) {
        d -= 1u32;
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftParam {
    pub alpha: u64,
    pub r: u64,
    pub s: u64,
    /// `4αsr - 1`.
    pub m_rs: Nat,
    pub lambda: BigRational,
    pub mu: BigRational,
}

impl LeftParam {
    pub fn new(alpha: u64, r: u64, s: u64) -> Self {
        let (lambda, mu) = affine_coeffs(alpha, r, s);
        LeftParam { alpha, r, s, m_rs: nat(4 * alpha * s * r - 1), lambda, mu }
    }

    /// `λP + μ`.
    pub fn a_at(&self, p: &Nat) -> BigRational {
        &self.lambda * BigRational::from_integer(BigInt::from(p.clone())) + &self.mu
    }

    /// `P ≡ -4αs² (mod 4αsr - 1)`.
    pub fn congruence_holds(&self, p: &Nat) -> bool {
        divides(&self.m_rs, &(nat(4 * self.alpha * self.s * self.s) + p))
    }
}

/// `λ = αsr/(4αsr - 1)` and `μ = αs(4αrs²/(4αsr - 1) - s)`.
pub fn affine_coeffs(alpha: u64, r: u64, s: u64) -> (BigRational, BigRational) {
    assert!(alpha >= 1 && r >= 1 && s >= 1, "alpha, r, s must be positive");
    let q = |v: u64| BigInt::from(v);
    let asr = q(alpha) * q(s) * q(r);
    let den: BigInt = &asr * 4 - 1;
    let lambda = BigRational::new(asr, den.clone());
    let inner = BigRational::new(q(4) * q(alpha) * q(r) * q(s) * q(s), den) - BigRational::from_integer(q(s));
    let mu = inner * BigRational::from_integer(q(alpha) * q(s));
    let quarter = BigRational::new(q(1), q(4));
    let third = BigRational::new(q(1), q(3));
    assert!(lambda > quarter && lambda <= third, "slope out of (1/4, 1/3]");
    (lambda, mu)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UvPoint {
    pub u: Nat,
    pub v: Nat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HitOrigin {
    Direct(LeftParam),
    Back(UvPoint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowHit {
    pub alpha: u64,
    pub dprime: Nat,
    pub bprime: Nat,
    pub cprime: Nat,
    pub m: Nat,
    pub a: Nat,
    pub origin: HitOrigin,
    pub decomposition: Decomposition,
}

fn reconstruct(
    p: &Nat,
    alpha: u64,
    dprime: Nat,
    bprime: Nat,
    cprime: Nat,
    m: Nat,
    origin: HitOrigin,
) -> Result<WindowHit, Error> {
    let triple = Ed2Triple::from_scaled(p, alpha, &dprime, &bprime, &cprime)?;
    let a = nat(alpha) * &bprime * &cprime;
    let (method, path) = match origin {
        HitOrigin::Direct(_) => (Method::Direct, "direct"),
        HitOrigin::Back(_) => (Method::Back, "back"),
    };
    let pars = params([
        ("alpha", alpha.to_string()),
        ("dprime", dprime.to_string()),
        ("bprime", bprime.to_string()),
        ("cprime", cprime.to_string()),
        ("m", m.to_string()),
        ("A", a.to_string()),
        ("path", path.to_string()),
    ]);
    let decomposition = triple.decomposition()?.relabel(method, pars);
    Ok(WindowHit { alpha, dprime, bprime, cprime, m, a, origin, decomposition })
}

/// Tries one grid cell; `None` when the early cut or the congruence fails.
fn direct_cell(p: &Nat, alpha: u64, r: u64, s: u64, lo: &Nat, hi: &Nat) -> Result<Option<WindowHit>, Error> {
    let left = LeftParam::new(alpha, r, s);
    let a_rat = left.a_at(p);
    let lo_r = BigRational::from_integer(BigInt::from(lo.clone()));
    let hi_r = BigRational::from_integer(BigInt::from(hi.clone()));
    if a_rat < lo_r || a_rat > hi_r {
        return Ok(None);
    }
    if !left.congruence_holds(p) {
        return Ok(None);
    }
    let m = (nat(4 * alpha * s * s) + p) / &left.m_rs;
    let mr = &m * r;
    let s_n = nat(s);
    if mr <= s_n {
        return Ok(None);
    }
    let cprime = mr - &s_n;
    let a = nat(alpha * s) * &cprime;
    assert_eq!(BigRational::from_integer(BigInt::from(a.clone())), a_rat, "affine form disagrees");
    assert!(prod_sum_equiv(&nat(alpha), &nat(r), &s_n, &cprime, p));
    reconstruct(p, alpha, nat(r), s_n, cprime, m, HitOrigin::Direct(left)).map(Some)
}

/// Scans `1 <= r <= r_max`, `1 <= s <= s_max` in ascending `(r, s)`.
pub fn direct_search(p: &Nat, alpha: u64, r_max: u64, s_max: u64) -> Result<Vec<WindowHit>, Error> {
    let (lo, hi) = window(p);
    let mut out = Vec::new();
    for r in 1..=r_max {
        for s in 1..=s_max {
            if let Some(hit) = direct_cell(p, alpha, r, s, &lo, &hi)? {
                out.push(hit);
            }
        }
    }
    Ok(out)
}

/// Grid bounds that make [`direct_search`] complete for this `(P, α)`:
/// `d' <= U/α + 1` and `min(b', c') <= √(U/α)`.
pub fn complete_grid(p: &Nat, alpha: u64) -> (u64, u64) {
    let (_, hi) = window(p);
    let q = (hi / alpha).to_u64().expect("window fits in u64");
    (q + 1, (q as f64).sqrt() as u64 + 1)
}

/// All `(r, s)` in `[1, bound]²` whose affine value lies in the window and
/// whose congruence holds, ascending.
pub fn candidate_set(p: &Nat, alpha: u64, bound: u64) -> Vec<(u64, u64)> {
    let (lo, hi) = window(p);
    let lo_r = BigRational::from_integer(BigInt::from(lo));
    let hi_r = BigRational::from_integer(BigInt::from(hi));
    let mut out = Vec::new();
    for r in 1..=bound {
        for s in 1..=bound {
            let left = LeftParam::new(alpha, r, s);
            let a = left.a_at(p);
            if a >= lo_r && a <= hi_r && left.congruence_holds(p) {
                out.push((r, s));
            }
        }
    }
    out
}

/// Points with `u` a multiple of `m` up to `u_limit`, `0 <= v < u`.
fn back_core(p: &Nat, alpha: u64, a: &Nat, u_limit: &Nat) -> Result<Vec<WindowHit>, Error> {
    let wp = WindowParams::new(p, a, &nat(alpha))?;
    let four_big_m = &wp.big_m * 4u32;
    let mut out = Vec::new();
    let mut u = wp.m.clone();
    while &u <= u_limit {
        let u2 = &u * &u;
        if u2 > four_big_m {
            let (v, exact) = sqrt_exact(&(&u2 - &four_big_m));
            if exact && (&u - &v).is_even() {
                let bprime = (&u + &v) / 2u32;
                let cprime = (&u - &v) / 2u32;
                let dprime = &u / &wp.m;
                let point = UvPoint { u: u.clone(), v };
                out.push(reconstruct(p, alpha, dprime, bprime, cprime, wp.m.clone(), HitOrigin::Back(point))?);
            }
        }
        u += &wp.m;
    }
    Ok(out)
}

/// Every decomposition with smallest denominator `A` and `α | A`.
/// `u = b' + c'` is bounded by `A/α + 1` since `c' >= 1`; `v` is an exact
/// square root, so no factorization happens.
pub fn back_search(p: &Nat, alpha: u64, a: &Nat) -> Result<Vec<WindowHit>, Error> {
    if alpha == 0 {
        return Err(Error::domain("alpha must be positive"));
    }
    let limit = a / alpha + 1u32;
    back_core(p, alpha, a, &limit)
}

/// [`back_search`] restricted to `u <= T(A)`.
pub fn back_search_within_t(p: &Nat, alpha: u64, a: &Nat) -> Result<Vec<WindowHit>, Error> {
    back_core(p, alpha, a, &t_bound(a))
}

/// Factors `m_s = 4αs² + P` and turns every divisor `d ≡ -1 (mod 4αs)` into
/// a grid cell `r = (d+1)/(4αs)`.
pub fn divisor_constructor(p: &Nat, alpha: u64, s: u64, cfg: &FactorConfig) -> Result<Vec<WindowHit>, Error> {
    if alpha == 0 || s == 0 {
        return Err(Error::domain("alpha and s must be positive"));
    }
    let (lo, hi) = window(p);
    let m_s = nat(4 * alpha * s * s) + p;
    let step = nat(4 * alpha * s);
    let mut out = Vec::new();
    for d in divisors(&factorize(&m_s, cfg)?) {
        let d1 = &d + 1u32;
        if !divides(&step, &d1) {
            continue;
        }
        let Some(r) = (d1 / &step).to_u64() else { continue };
        if let Some(hit) = direct_cell(p, alpha, r, s, &lo, &hi)? {
            out.push(hit);
        }
    }
    Ok(out)
}

/// Nodes `(A, u, v)` with `0 < u <= T(A)`, `0 <= v < u`, `u ≡ v (mod 2)`.
pub fn target_nodes(a_lo: &Nat, a_hi: &Nat) -> BTreeSet<(Nat, Nat, Nat)> {
    let mut out = BTreeSet::new();
    let mut a = a_lo.clone();
    while &a <= a_hi {
        let t = t_bound(&a);
        let mut u = Nat::one();
        while u <= t {
            let mut v = if u.is_even() { Nat::zero() } else { Nat::one() };
            while v < u {
                out.insert((a.clone(), u.clone(), v.clone()));
                v += 2u32;
            }
            u += 1u32;
        }
        a += 1u32;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageVerdict {
    pub covered: bool,
    pub target: usize,
    pub hit: usize,
    pub uncovered: Vec<(Nat, Nat, Nat)>,
}

/// Compares the hit nodes against the target nodes of `A ∈ [a_lo, a_hi]`
/// (clipped to the window). Hits outside the target set are ignored.
pub fn counting_criterion(p: &Nat, a_lo: &Nat, a_hi: &Nat, hits: &BTreeSet<(Nat, Nat, Nat)>) -> CoverageVerdict {
    let (lo, hi) = window(p);
    let lo = lo.max(a_lo.clone());
    let hi = hi.min(a_hi.clone());
    let target = target_nodes(&lo, &hi);
    let inside: BTreeSet<_> = hits.intersection(&target).cloned().collect();
    let uncovered: Vec<_> = target.difference(&inside).cloned().collect();
    CoverageVerdict { covered: inside.len() >= target.len(), target: target.len(), hit: inside.len(), uncovered }
}

/// `(A, u, v)` nodes of back-search hits.
pub fn back_nodes(hits: &[WindowHit]) -> BTreeSet<(Nat, Nat, Nat)> {
    hits.iter()
        .filter_map(|h| match &h.origin {
            HitOrigin::Back(pt) => Some((h.a.clone(), pt.u.clone(), pt.v.clone())),
            HitOrigin::Direct(_) => None,
        })
        .collect()
}
