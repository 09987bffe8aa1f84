//! Exact integer arithmetic: gcd, primality, factorization, divisors,
//! Jacobi symbols, primes in progressions and the unit-fraction identity.

mod factor;
mod prime;
mod progression;
mod symbol;

pub use factor::{divisors, factorize, factorize_calls, FactorConfig, Factorization};
pub use prime::{is_prime, is_prime_u64};
pub use progression::{primes_in_progression, ProgressionCount};
pub(crate) use progression::sieve;
pub use symbol::{jacobi, QuadSymbol};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Arbitrary precision natural number used for every quantity that may
/// outgrow a machine word.
pub type Nat = BigUint;

pub fn nat(v: u64) -> Nat {
    Nat::from(v)
}

pub fn gcd(a: &Nat, b: &Nat) -> Nat {
    a.gcd(b)
}

/// `true` when `m` divides `n`. A zero modulus divides only zero.
pub fn divides(m: &Nat, n: &Nat) -> bool {
    if m.is_zero() {
        return n.is_zero();
    }
    (n % m).is_zero()
}

/// `x ≡ -y (mod m)`, i.e. `m | x + y`.
pub fn congruent_neg(x: &Nat, y: &Nat, m: &Nat) -> bool {
    divides(m, &(x + y))
}

/// Floor square root and whether it is exact.
pub fn sqrt_exact(n: &Nat) -> (Nat, bool) {
    let r = n.sqrt();
    let exact = &r * &r == *n;
    (r, exact)
}

/// Exact check of `4/P = 1/A + 1/B + 1/C` as `4ABC = P(AB + AC + BC)`.
/// Zero denominators never satisfy the identity.
pub fn check_unit_fraction_identity(p: &Nat, a: &Nat, b: &Nat, c: &Nat) -> bool {
    if p.is_zero() || a.is_zero() || b.is_zero() || c.is_zero() {
        return false;
    }
    let lhs = Nat::from(4u32) * a * b * c;
    let rhs = p * (a * b + a * c + b * c);
    lhs == rhs
}

/// Inverse of `a` modulo `m >= 1`, if it exists.
pub fn mod_inverse(a: &Nat, m: &Nat) -> Option<Nat> {
    use num_bigint::BigInt;
    if m.is_zero() {
        return None;
    }
    let am = BigInt::from(a % m);
    let mm = BigInt::from(m.clone());
    let e = am.extended_gcd(&mm);
    if e.gcd != BigInt::from(1) && !m.is_one() {
        return None;
    }
    e.x.mod_floor(&mm).to_biguint()
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_examples() {
        assert!(check_unit_fraction_identity(&nat(2521), &nat(644), &nat(30252), &nat(1217643)));
        assert!(check_unit_fraction_identity(&nat(29), &nat(8), &nat(116), &nat(232)));
        assert!(!check_unit_fraction_identity(&nat(29), &nat(8), &nat(116), &nat(233)));
        assert!(!check_unit_fraction_identity(&nat(29), &nat(0), &nat(116), &nat(232)));
    }

    #[test]
    fn gcd_and_divides() {
        assert_eq!(gcd(&nat(12), &nat(18)), nat(6));
        assert!(divides(&nat(7), &nat(21)));
        assert!(!divides(&nat(0), &nat(21)));
        assert!(congruent_neg(&nat(2), &nat(10), &nat(3)));
        assert_eq!(sqrt_exact(&nat(49)), (nat(7), true));
        assert_eq!(sqrt_exact(&nat(50)), (nat(7), false));
        assert_eq!(mod_inverse(&nat(3), &nat(35)), Some(nat(12)));
        assert_eq!(mod_inverse(&nat(5), &nat(35)), None);
        assert_eq!(mod_inverse(&nat(0), &nat(1)), Some(nat(0)));
    }
}
