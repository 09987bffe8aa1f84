//! Second parameterization: `A = bc/δ`, `B = bP`, `C = cP` with
//! `4bc - b - c = Pδ`, equivalently `(4b-1)(4c-1) = 4Pδ + 1`.
//!
//! Writing `δ = α·d'²` with `α` squarefree and `g = α·d'`, the scaled pair
//! `b = g·b'`, `c = g·c'` turns the identity into a factorization
//! `X·Y = N` with `X = 4αd'b' - 1`, `Y = 4αd'c' - 1`, `N = 4αPd'² + 1`.
//! Enumeration walks δ upward, factors `N` and keeps factor pairs in the
//! right residue class. `b'` and `c'` need not be coprime.

use crate::arith::{divides, divisors, factorize, gcd, is_prime, nat, primes_in_progression, FactorConfig, Nat};
use crate::decomp::{params, verify, Decomposition, Method};
use crate::error::{BudgetExceeded, Error};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TripleViolation {
    #[error("delta, b and c must be positive")]
    NonPositive,
    #[error("t = 4bc - b - c = {t}, expected P*delta = {expected}")]
    TMismatch { t: Nat, expected: Nat },
    #[error("delta does not divide bc")]
    DeltaNotDividingBc,
    #[error("b > c")]
    Order,
    #[error("A = bc/delta exceeds bP")]
    AExceedsBp,
    #[error("g = alpha*d' = {g} does not divide both b and c")]
    ScaleNotDividing { g: Nat },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ed2Triple {
    pub p: Nat,
    pub delta: Nat,
    pub b: Nat,
    pub c: Nat,
    /// Squarefree part of δ.
    pub alpha: Nat,
    pub dprime: Nat,
    /// `α·d'`.
    pub g: Nat,
    pub bprime: Nat,
    pub cprime: Nat,
    pub x: Nat,
    pub y: Nat,
    pub n: Nat,
    /// `bc/δ`.
    pub a: Nat,
    /// `4bc - b - c`.
    pub t: Nat,
}

impl Ed2Triple {
    pub fn new(p: &Nat, delta: &Nat, b: &Nat, c: &Nat, cfg: &FactorConfig) -> Result<Self, Error> {
        if delta.is_zero() || b.is_zero() || c.is_zero() {
            return Err(TripleViolation::NonPositive.into());
        }
        let t = b * c * 4u32 - b - c;
        let expected = p * delta;
        if t != expected {
            return Err(TripleViolation::TMismatch { t, expected }.into());
        }
        let bc = b * c;
        if !divides(delta, &bc) {
            return Err(TripleViolation::DeltaNotDividingBc.into());
        }
        if b > c {
            return Err(TripleViolation::Order.into());
        }
        let a = &bc / delta;
        if a > b * p {
            return Err(TripleViolation::AExceedsBp.into());
        }
        let (alpha, dprime) = split_delta(delta, cfg)?;
        Self::assemble(p, delta, b, c, a, t, alpha, dprime)
    }

    /// Builds the triple from `(α, d', b', c')` with `b = αd'b'`,
    /// `c = αd'c'`, `δ = αd'²` without factoring anything. `α` need not be
    /// squarefree; square factors are moved into `d'` by trial division.
    pub fn from_scaled(p: &Nat, alpha: u64, dprime: &Nat, bprime: &Nat, cprime: &Nat) -> Result<Self, Error> {
        if alpha == 0 || dprime.is_zero() || bprime.is_zero() || cprime.is_zero() {
            return Err(TripleViolation::NonPositive.into());
        }
        let g = nat(alpha) * dprime;
        let delta = &g * dprime;
        let (lo, hi) = if bprime <= cprime { (bprime, cprime) } else { (cprime, bprime) };
        let b = &g * lo;
        let c = &g * hi;
        let t = &b * &c * 4u32 - &b - &c;
        let expected = p * &delta;
        if t != expected {
            return Err(TripleViolation::TMismatch { t, expected }.into());
        }
        let bc = &b * &c;
        if !divides(&delta, &bc) {
            return Err(TripleViolation::DeltaNotDividingBc.into());
        }
        let a = &bc / &delta;
        if a > &b * p {
            return Err(TripleViolation::AExceedsBp.into());
        }
        let (sf, k) = squarefree_split_small(alpha);
        Self::assemble(p, &delta, &b, &c, a, t, nat(sf), dprime * k)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(p: &Nat, delta: &Nat, b: &Nat, c: &Nat, a: Nat, t: Nat, alpha: Nat, dprime: Nat) -> Result<Self, Error> {
        let g = &alpha * &dprime;
        if !divides(&g, b) || !divides(&g, c) {
            return Err(TripleViolation::ScaleNotDividing { g }.into());
        }
        let bprime = b / &g;
        let cprime = c / &g;
        let k = &g * 4u32;
        let x = &k * &bprime - 1u32;
        let y = &k * &cprime - 1u32;
        let n = &alpha * p * &dprime * &dprime * 4u32 + 1u32;
        assert_eq!(&x * &y, n, "X*Y = N must follow from t = P*delta");
        Ok(Ed2Triple {
            p: p.clone(),
            delta: delta.clone(),
            b: b.clone(),
            c: c.clone(),
            alpha,
            dprime,
            g,
            bprime,
            cprime,
            x,
            y,
            n,
            a,
            t,
        })
    }

    pub fn decomposition(&self) -> Result<Decomposition, Error> {
        let pars = params([
            ("delta", &self.delta),
            ("b", &self.b),
            ("c", &self.c),
            ("alpha", &self.alpha),
            ("dprime", &self.dprime),
            ("x", &self.x),
            ("y", &self.y),
            ("n", &self.n),
        ]);
        Ok(verify(&self.p, &self.a, &(&self.b * &self.p), &(&self.c * &self.p), Method::Ed2, pars)?)
    }

    /// `(4b-1)(4c-1) = 4Pδ + 1`.
    pub fn identity_holds(&self) -> bool {
        (&self.b * 4u32 - 1u32) * (&self.c * 4u32 - 1u32) == &self.p * &self.delta * 4u32 + 1u32
    }
}

/// `(α_sf, k)` with `α = α_sf·k²`, by trial division over squares.
fn squarefree_split_small(mut alpha: u64) -> (u64, u64) {
    let mut k = 1;
    let mut q = 2u64;
    while q * q <= alpha {
        while alpha % (q * q) == 0 {
            alpha /= q * q;
            k *= q;
        }
        q += 1;
    }
    (alpha, k)
}

/// `δ = α·d'²` with `α` squarefree.
pub fn split_delta(delta: &Nat, cfg: &FactorConfig) -> Result<(Nat, Nat), Error> {
    if delta.is_zero() {
        return Err(Error::domain("delta must be positive"));
    }
    let f = factorize(delta, cfg)?;
    let mut alpha = Nat::one();
    let mut dprime = Nat::one();
    for (q, e) in f.factors() {
        if e % 2 == 1 {
            alpha *= q;
        }
        dprime *= q.pow(e / 2);
    }
    Ok((alpha, dprime))
}

pub fn build_from_triple(delta: &Nat, b: &Nat, c: &Nat, p: &Nat) -> Result<Decomposition, Error> {
    Ed2Triple::new(p, delta, b, c, &FactorConfig::default())?.decomposition()
}

/// `max(64, ⌈(log₂P)³⌉)`.
pub fn default_delta_max(p: &Nat) -> u64 {
    let l = match p.to_f64() {
        Some(f) if f.is_finite() && f > 0.0 => f.log2(),
        _ => p.bits() as f64,
    };
    (l * l * l).ceil().max(64.0) as u64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeltaStatus {
    Hit(usize),
    NoFactorPair,
    BudgetExceeded(BudgetExceeded),
}

/// Primes `a <= X²` with `a ≡ -1 (mod δ)` (`s`), and how many of them
/// divide `P + δ` (`u`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProgressionCounters {
    pub x: u64,
    pub s: u64,
    pub u: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaDiagnostic {
    pub delta: u64,
    pub status: DeltaStatus,
    pub counters: Option<ProgressionCounters>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub triples: Vec<Ed2Triple>,
    pub diagnostics: Vec<DeltaDiagnostic>,
    pub stopped_early: bool,
}

pub fn progression_counters(p: &Nat, delta: u64, x: u64, cfg: &FactorConfig) -> Result<ProgressionCounters, Error> {
    let residue = (delta - 1) % delta;
    let bound = x.saturating_mul(x);
    let listed = primes_in_progression(bound, delta, residue, true)?;
    let target = p + delta;
    let f = factorize(&target, cfg)?;
    let u = f
        .primes()
        .filter(|q| q.to_u64().is_some_and(|q| q <= bound && q % delta == residue))
        .count() as u64;
    Ok(ProgressionCounters { x, s: listed.count, u })
}

fn triples_for_delta(p: &Nat, delta: u64, cfg: &FactorConfig) -> Result<Vec<Ed2Triple>, Error> {
    let dn = nat(delta);
    let (alpha, dprime) = split_delta(&dn, cfg)?;
    let k: Nat = &alpha * &dprime * 4u32;
    let n = &alpha * p * &dprime * &dprime * 4u32 + 1u32;
    let f = factorize(&n, cfg)?;
    let p_mod4 = p % 4u32;
    let mut out = Vec::new();
    for x in divisors(&f) {
        if &x * &x > n {
            break;
        }
        let y = &n / &x;
        if !divides(&k, &(&x + 1u32)) || !divides(&k, &(&y + 1u32)) {
            continue;
        }
        let bprime = (&x + 1u32) / &k;
        let cprime = (&y + 1u32) / &k;
        let sum = &bprime + &cprime;
        if !divides(&dprime, &sum) || ((&sum / &dprime) + &p_mod4) % 4u32 != Nat::zero() {
            continue;
        }
        let g = &alpha * &dprime;
        let b = &g * &bprime;
        let c = &g * &cprime;
        if !divides(&dn, &(&b * &c)) {
            continue;
        }
        match Ed2Triple::new(p, &dn, &b, &c, cfg) {
            Ok(t) => out.push(t),
            Err(Error::Triple(TripleViolation::AExceedsBp)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

const CHUNK: u64 = 32;

/// Walks δ = 1..=δ_max in fixed chunks processed in parallel, merging in
/// ascending (δ, X). When `stop_after` is set the sweep stops at the end of
/// the first chunk that reaches the target and the result is truncated to
/// exactly that many triples; diagnostics past the last kept δ are dropped.
/// Output never depends on the number of worker threads.
pub fn sweep_delta(
    p: &Nat,
    delta_max: u64,
    stop_after: Option<usize>,
    counters_x: Option<u64>,
    cfg: &FactorConfig,
) -> Result<SweepOutcome, Error> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let mut out = SweepOutcome::default();
    let mut start = 1u64;
    while start <= delta_max {
        let end = (start + CHUNK - 1).min(delta_max);
        let chunk: Vec<(u64, Result<Vec<Ed2Triple>, Error>, Option<ProgressionCounters>)> = (start..=end)
            .into_par_iter()
            .map(|d| {
                let res = triples_for_delta(p, d, cfg);
                let ctr = counters_x.and_then(|x| progression_counters(p, d, x, cfg).ok());
                (d, res, ctr)
            })
            .collect();
        for (delta, res, counters) in chunk {
            let status = match res {
                Ok(ts) if ts.is_empty() => DeltaStatus::NoFactorPair,
                Ok(ts) => {
                    let n = ts.len();
                    out.triples.extend(ts);
                    DeltaStatus::Hit(n)
                }
                Err(Error::Budget(b)) => DeltaStatus::BudgetExceeded(b),
                Err(e) => return Err(e),
            };
            out.diagnostics.push(DeltaDiagnostic { delta, status, counters });
            if let Some(limit) = stop_after {
                if out.triples.len() >= limit {
                    out.triples.truncate(limit);
                    out.stopped_early = delta < delta_max;
                    return Ok(out);
                }
            }
        }
        start = end + 1;
    }
    Ok(out)
}

/// Full enumeration up to δ_max; budget failures are skipped and reported
/// in the diagnostics.
pub fn enumerate_ed2(p: &Nat, delta_max: u64, cfg: &FactorConfig) -> Result<SweepOutcome, Error> {
    sweep_delta(p, delta_max, None, None, cfg)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TkPair {
    pub t: Nat,
    pub k: Nat,
    /// `tk - 1`.
    pub d: Nat,
    pub delta: Nat,
    pub a: Nat,
}

/// `δ = (P+t)/(tk-1)`, `a = (kP+1)/(tk-1)` when both divisions are exact.
pub fn tk_parameterize(p: &Nat, t: &Nat, k: &Nat) -> Option<TkPair> {
    let tk = t * k;
    if t.is_zero() || k.is_zero() || tk <= Nat::one() {
        return None;
    }
    let d = tk - 1u32;
    let num_delta = p + t;
    let num_a = k * p + 1u32;
    if !divides(&d, &num_delta) || !divides(&d, &num_a) {
        return None;
    }
    let delta = num_delta / &d;
    let a = num_a / &d;
    assert_eq!(p + &delta, t * &a);
    assert_eq!(&a + 1u32, k * &delta);
    Some(TkPair { t: t.clone(), k: k.clone(), d, delta, a })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedPair {
    pub d: Nat,
    pub dprime: Nat,
    pub bprime: Nat,
    pub cprime: Nat,
    /// `gcd(b', c') = 1`.
    pub coprime: bool,
}

/// `d = gcd(b, c)`, `d' = d/a`, `b' = b/d'`, `c' = c/d'`.
pub fn normalize_pair(b_raw: &Nat, c_raw: &Nat, a: &Nat) -> Result<NormalizedPair, Error> {
    let d = gcd(b_raw, c_raw);
    if a.is_zero() || !divides(a, &d) || d.is_zero() {
        return Err(Error::domain(format!("{a} does not divide gcd({b_raw}, {c_raw}) = {d}")));
    }
    let dprime = &d / a;
    let bprime = b_raw / &dprime;
    let cprime = c_raw / &dprime;
    let coprime = gcd(&bprime, &cprime).is_one();
    Ok(NormalizedPair { d, dprime, bprime, cprime, coprime })
}
