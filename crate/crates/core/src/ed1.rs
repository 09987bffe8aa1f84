//! First parameterization: `4c - 1 = γP`, `uv = c²` with
//! `u ≡ v ≡ -c (mod γ)`, giving `A = (u+c)/γ`, `B = (v+c)/γ`, `C = cP`.

use crate::arith::{congruent_neg, divides, divisors, factorize, gcd, mod_inverse, nat, FactorConfig, Nat};
use crate::decomp::{params, verify, Decomposition, Method};
use crate::error::Error;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QuadViolation {
    #[error("4c - 1 != gamma*P")]
    CDefinition,
    #[error("gcd(gamma, c) != 1")]
    NotCoprime,
    #[error("u must be positive")]
    ZeroU,
    #[error("u*v != c^2")]
    Product,
    #[error("u > v")]
    Order,
    #[error("u is not congruent to -c mod gamma")]
    CongruenceU,
    #[error("v is not congruent to -c mod gamma")]
    CongruenceV,
    #[error("u is congruent to -c mod P (B would be a multiple of P)")]
    BMultipleOfP,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ed1Quad {
    pub p: Nat,
    pub gamma: Nat,
    pub c: Nat,
    pub u: Nat,
    pub v: Nat,
    pub a: Nat,
    pub b: Nat,
    pub big_c: Nat,
}

impl Ed1Quad {
    /// Checks the definition-level conditions: `4c - 1 = γP`,
    /// `gcd(γ, c) = 1`, `uv = c²`, `u <= v`, `u ≡ v ≡ -c (mod γ)`.
    pub fn admissible(p: &Nat, gamma: &Nat, c: &Nat, u: &Nat, v: &Nat) -> Result<Self, QuadViolation> {
        if gamma.is_zero() || c.is_zero() || c * 4u32 != gamma * p + 1u32 {
            return Err(QuadViolation::CDefinition);
        }
        if !gcd(gamma, c).is_one() {
            return Err(QuadViolation::NotCoprime);
        }
        if u.is_zero() {
            return Err(QuadViolation::ZeroU);
        }
        if u * v != c * c {
            return Err(QuadViolation::Product);
        }
        if u > v {
            return Err(QuadViolation::Order);
        }
        if !congruent_neg(u, c, gamma) {
            return Err(QuadViolation::CongruenceU);
        }
        if !congruent_neg(v, c, gamma) {
            return Err(QuadViolation::CongruenceV);
        }
        Ok(Ed1Quad {
            p: p.clone(),
            gamma: gamma.clone(),
            c: c.clone(),
            u: u.clone(),
            v: v.clone(),
            a: (u + c) / gamma,
            b: (v + c) / gamma,
            big_c: c * p,
        })
    }

    /// [`Ed1Quad::admissible`] plus `u ≢ -c (mod P)`.
    pub fn new(p: &Nat, gamma: &Nat, c: &Nat, u: &Nat, v: &Nat) -> Result<Self, QuadViolation> {
        let q = Self::admissible(p, gamma, c, u, v)?;
        if congruent_neg(u, c, p) {
            return Err(QuadViolation::BMultipleOfP);
        }
        Ok(q)
    }

    /// `(γA - c)(γB - c) = c²`.
    pub fn identity_holds(&self) -> bool {
        let ga = &self.gamma * &self.a;
        let gb = &self.gamma * &self.b;
        ga > self.c && gb > self.c && (ga - &self.c) * (gb - &self.c) == &self.c * &self.c
    }

    pub fn decomposition(&self) -> Result<Decomposition, Error> {
        let pars = params([
            ("gamma", self.gamma.to_string()),
            ("c", self.c.to_string()),
            ("u", self.u.to_string()),
            ("v", self.v.to_string()),
        ]);
        Ok(verify(&self.p, &self.a, &self.b, &self.big_c, Method::Ed1, pars)?)
    }
}

/// Smallest `γ >= 3` with `γP ≡ 3 (mod 4)`. Panics for even `P`.
pub fn gamma_min(p: &Nat) -> Nat {
    (3..7u64)
        .map(nat)
        .find(|g| (g * p) % 4u32 == nat(3))
        .expect("gamma_min needs an odd P")
}

pub fn c_of(gamma: &Nat, p: &Nat) -> Result<Nat, Error> {
    let t = gamma * p + 1u32;
    if !divides(&nat(4), &t) {
        return Err(Error::domain(format!("4 does not divide {gamma}*{p} + 1")));
    }
    Ok(t / 4u32)
}

/// `4⌈log₂P⌉ - 1`, raised to the next admissible γ.
pub fn default_gamma_max(p: &Nat) -> Nat {
    // ⌈log₂P⌉ = bit length of P - 1
    let bits = if p.is_zero() { 0 } else { (p - 1u32).bits() };
    let g0 = gamma_min(p);
    let mut g = nat((4 * bits).max(4) - 1).max(g0);
    while (&g * p) % 4u32 != nat(3) {
        g += 1u32;
    }
    g
}

fn gammas(p: &Nat, gamma_max: &Nat) -> Vec<Nat> {
    let mut out = Vec::new();
    let mut g = gamma_min(p);
    while &g <= gamma_max {
        out.push(g.clone());
        g += 4u32;
    }
    out
}

fn quads_for_gamma(
    p: &Nat,
    gamma: &Nat,
    require_distinct: bool,
    cfg: &FactorConfig,
) -> Result<Vec<Ed1Quad>, Error> {
    let c = c_of(gamma, p)?;
    if !gcd(gamma, &c).is_one() {
        return Ok(Vec::new());
    }
    let cutoff = (gamma * 3u32 - 1u32) * p;
    let f = factorize(&c, cfg)?.squared();
    let c2 = &c * &c;
    let mut out = Vec::new();
    for u in divisors(&f) {
        if u > c {
            break;
        }
        if require_distinct && u == c {
            continue;
        }
        // u < ((3γ-1)P - 1)/4
        if &u * 4u32 + 1u32 >= cutoff {
            continue;
        }
        if !congruent_neg(&u, &c, gamma) {
            continue;
        }
        let v = &c2 / &u;
        match Ed1Quad::new(p, gamma, &c, &u, &v) {
            Ok(q) => out.push(q),
            Err(QuadViolation::BMultipleOfP) | Err(QuadViolation::CongruenceV) => {}
            Err(e) => unreachable!("enumeration produced {e}"),
        }
    }
    Ok(out)
}

/// All admissible quads with `γ <= gamma_max`, ascending `(γ, u)`.
/// Work fans out over γ; the first budget failure in γ order is returned.
pub fn enumerate_ed1(
    p: &Nat,
    gamma_max: &Nat,
    require_distinct: bool,
    cfg: &FactorConfig,
) -> Result<Vec<Ed1Quad>, Error> {
    if !crate::arith::is_prime(p) || p == &nat(2) {
        return Err(Error::domain(format!("{p} is not an odd prime")));
    }
    let per_gamma: Vec<Result<Vec<Ed1Quad>, Error>> = gammas(p, gamma_max)
        .par_iter()
        .map(|g| quads_for_gamma(p, g, require_distinct, cfg))
        .collect();
    let mut out = Vec::new();
    for r in per_gamma {
        out.extend(r?);
    }
    Ok(out)
}

pub fn build_from_quad(gamma: &Nat, c: &Nat, u: &Nat, v: &Nat, p: &Nat) -> Result<Decomposition, Error> {
    Ed1Quad::new(p, gamma, c, u, v)?.decomposition()
}

/// Number of `u | c²` with `u ≡ a (mod m)` and `u ≡ b⁻¹c² (mod n)`; zero
/// when `b` is not invertible mod `n`.
pub fn count_admissible_pairs(
    c: &Nat,
    m: &Nat,
    a: &Nat,
    n: &Nat,
    b: &Nat,
    cfg: &FactorConfig,
) -> Result<u64, Error> {
    if m.is_zero() || n.is_zero() {
        return Err(Error::domain("moduli must be positive"));
    }
    let Some(b_inv) = mod_inverse(b, n) else {
        return Ok(0);
    };
    let c2 = c * c;
    let target = (&b_inv * &c2) % n;
    let a = a % m;
    let f = factorize(c, cfg)?.squared();
    Ok(divisors(&f).iter().filter(|u| (*u % m) == a && (*u % n) == target).count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Nat {
        nat(v)
    }

    #[test]
    fn gamma_min_examples() {
        assert_eq!(gamma_min(&n(13)), n(3));
        assert_eq!(gamma_min(&n(2521)), n(3));
        assert_eq!(gamma_min(&n(7)), n(5));
    }

    #[test]
    fn c_of_examples() {
        assert_eq!(c_of(&n(3), &n(13)).unwrap(), n(10));
        assert_eq!(c_of(&n(15), &n(2521)).unwrap(), n(9454));
        assert_eq!(c_of(&n(83), &n(2521)).unwrap(), n(52311));
        assert!(c_of(&n(5), &n(13)).is_err());
    }

    #[test]
    fn default_gamma_bound() {
        assert_eq!(default_gamma_max(&n(2521)), n(47));
        assert_eq!(default_gamma_max(&n(13)), n(15));
        // P = 7: 4*3 - 1 = 11, raised to 13 (class 1 mod 4)
        assert_eq!(default_gamma_max(&n(7)), n(13));
    }

    #[test]
    fn build_examples() {
        let d = build_from_quad(&n(15), &n(9454), &n(326), &n(274166), &n(2521)).unwrap();
        assert_eq!(d.key(), (n(2521), n(652), n(18908), n(23833534)));
        assert_eq!(d.method(), Method::Ed1);
        let d = build_from_quad(&n(83), &n(52311), &n(477), &n(5736773), &n(2521)).unwrap();
        assert_eq!(d.key(), (n(2521), n(636), n(69748), n(131876031)));
        let e = build_from_quad(&n(3), &n(10), &n(4), &n(25), &n(13)).unwrap_err();
        assert_eq!(e, Error::Quad(QuadViolation::CongruenceU));
    }

    #[test]
    fn small_enumeration() {
        let qs = enumerate_ed1(&n(13), &n(3), true, &FactorConfig::default()).unwrap();
        let keys: Vec<_> = qs.iter().map(|q| (q.u.clone(), q.a.clone(), q.b.clone(), q.big_c.clone())).collect();
        assert_eq!(keys, vec![(n(2), n(4), n(20), n(130)), (n(5), n(5), n(10), n(130))]);
        let all = enumerate_ed1(&n(13), &n(3), false, &FactorConfig::default()).unwrap();
        assert_eq!(all, qs);
    }

    #[test]
    fn admissible_pair_counts() {
        let cfg = FactorConfig::default();
        assert_eq!(count_admissible_pairs(&n(10), &n(3), &n(2), &n(1), &n(0), &cfg).unwrap(), 4);
        assert_eq!(count_admissible_pairs(&n(1), &n(3), &n(1), &n(1), &n(0), &cfg).unwrap(), 1);
        assert_eq!(count_admissible_pairs(&n(1), &n(3), &n(2), &n(1), &n(0), &cfg).unwrap(), 0);
        assert_eq!(count_admissible_pairs(&n(10), &n(3), &n(2), &n(4), &n(2), &cfg).unwrap(), 0);
    }
}
