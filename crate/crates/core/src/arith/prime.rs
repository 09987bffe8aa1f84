//! Primality testing.
//!
//! Below 2^64 the answer is exact: Miller-Rabin with the first twelve prime
//! bases has no pseudoprimes in that range. Above 2^64 we run Miller-Rabin
//! with the thirteen prime bases up to 41 (exact below 3.3 * 10^24) followed
//! by a strong Lucas test with Selfridge parameters, which together form a
//! Baillie-PSW test. No BPSW pseudoprime is known; beyond 3.3 * 10^24 the
//! result is "BPSW probable prime".

use super::symbol::jacobi_i64;
use super::Nat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

const BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

pub fn is_prime(n: &Nat) -> bool {
    match n.to_u64() {
        Some(v) => is_prime_u64(v),
        None => is_prime_big(n),
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    BASES[..12].iter().all(|&a| sprp_u64(n, a, d, s))
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

fn sprp_u64(n: u64, a: u64, d: u64, s: u32) -> bool {
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn is_prime_big(n: &Nat) -> bool {
    for &p in &BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = Nat::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    for &a in &BASES {
        let mut x = Nat::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        let mut witness = true;
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                witness = false;
                break;
            }
        }
        if witness {
            return false;
        }
    }
    strong_lucas(n)
}

fn modn(x: BigInt, n: &BigInt) -> BigInt {
    let r = x % n;
    if r.is_negative() {
        r + n
    } else {
        r
    }
}

fn half_mod(x: BigInt, n: &BigInt) -> BigInt {
    let x = if x.is_odd() { x + n } else { x };
    x >> 1
}

/// Strong Lucas probable prime test, Selfridge method A (P = 1).
fn strong_lucas(n: &Nat) -> bool {
    let (_, square) = super::sqrt_exact(n);
    if square {
        return false;
    }
    let nn = BigInt::from(n.clone());
    let mut d: i64 = 5;
    loop {
        match jacobi_i64(d, n) {
            -1 => break,
            0 => {
                if BigInt::from(d.abs()) != nn {
                    return false;
                }
            }
            _ => {}
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
    }
    let dd = BigInt::from(d);
    let q = BigInt::from((1 - d) / 4);
    let k: Nat = n + 1u32;
    let s = k.trailing_zeros().unwrap_or(0);
    let odd = &k >> s;

    let mut u = BigInt::one();
    let mut v = BigInt::one();
    let mut qk = modn(q.clone(), &nn);
    let bits = odd.bits();
    for i in (0..bits - 1).rev() {
        u = modn(&u * &v, &nn);
        v = modn(&v * &v - (&qk << 1), &nn);
        qk = modn(&qk * &qk, &nn);
        if odd.bit(i) {
            let nu = half_mod(&u + &v, &nn);
            let nv = half_mod(&dd * &u + &v, &nn);
            u = modn(nu, &nn);
            v = modn(nv, &nn);
            qk = modn(&qk * &q, &nn);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = modn(&v * &v - (&qk << 1), &nn);
        if v.is_zero() {
            return true;
        }
        qk = modn(&qk * &qk, &nn);
    }
    false
}
