//! Brute-force oracles that share no code with the searches they check.
#![allow(dead_code)]

use esd_core::arith::{nat, FactorConfig, Nat};
use esd_core::ed1::enumerate_ed1;
use esd_core::ed2::enumerate_ed2;
use esd_core::window::quadratic_roots;
use rayon::prelude::*;
use std::collections::BTreeSet;

pub fn small_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
}

pub fn u(n: &Nat) -> u64 {
    n.try_into().unwrap()
}

/// `(γ, A, B)` from scanning `A` and solving `1/B = 4/P - 1/A - 1/(cP)`.
pub fn ed1_oracle(p: u64, gamma_max: u64) -> BTreeSet<(u64, u64, u64)> {
    let mut out = BTreeSet::new();
    for g in 3..=gamma_max {
        if (g * p) % 4 != 3 {
            continue;
        }
        let c = (g * p + 1) / 4;
        for a in p / 4 + 1..=2 * c / g {
            let num = a * c * p;
            let den = (4 * a * c) as i128 - (c * p) as i128 - a as i128;
            if den <= 0 || num % den as u64 != 0 {
                continue;
            }
            let b = num / den as u64;
            if a < b {
                out.insert((g, a, b));
            }
        }
    }
    out
}

/// `(δ, b, c)` with `b <= c`, `4bc - b - c = Pδ`, `δ | bc`, `bc/δ <= bP`.
pub fn ed2_oracle(p: u64, delta_max: u64) -> BTreeSet<(u64, u64, u64)> {
    let mut out = BTreeSet::new();
    for d in 1..=delta_max {
        let rhs = p * d;
        let mut b = 1;
        while 4 * b * b - 2 * b <= rhs {
            let num = rhs + b;
            if num % (4 * b - 1) == 0 {
                let c = num / (4 * b - 1);
                if c >= b && (b * c) % d == 0 && (b * c) / d <= b * p {
                    out.insert((d, b, c));
                }
            }
            b += 1;
        }
    }
    out
}

/// Odd primes up to `p_max` whose enumeration differs from the oracle.
pub fn ed1_mismatches(p_max: u64, gamma_max: u64) -> Vec<u64> {
    small_primes(3, p_max)
        .into_par_iter()
        .filter(|&p| {
            let found: BTreeSet<_> = enumerate_ed1(&nat(p), &nat(gamma_max), true, &FactorConfig::default())
                .unwrap()
                .iter()
                .map(|q| (u(&q.gamma), u(&q.a), u(&q.b)))
                .collect();
            found != ed1_oracle(p, gamma_max)
        })
        .collect()
}

pub fn ed2_mismatches(p_max: u64, delta_max: u64) -> Vec<u64> {
    small_primes(2, p_max)
        .into_par_iter()
        .filter(|&p| {
            let found: BTreeSet<_> = enumerate_ed2(&nat(p), delta_max, &FactorConfig::default())
                .unwrap()
                .triples
                .iter()
                .map(|t| (u(&t.delta), u(&t.b), u(&t.c)))
                .collect();
            found != ed2_oracle(p, delta_max)
        })
        .collect()
}

/// `M` values where the roots over every `S <= M + 1` differ from the
/// factor pairs of `M`.
pub fn quadratic_mismatches(m_max: u64) -> Vec<u64> {
    (1..=m_max)
        .into_par_iter()
        .filter(|&m| {
            let mut pairs = BTreeSet::new();
            for y in 1..=m {
                if y * y > m {
                    break;
                }
                if m % y == 0 {
                    pairs.insert((m / y + y, m / y, y));
                }
            }
            let mn = nat(m);
            let solved: BTreeSet<_> = (1..=m + 1)
                .filter_map(|s| quadratic_roots(&nat(s), &mn).map(|(x, y)| (s, u(&x), u(&y))))
                .collect();
            solved != pairs
        })
        .collect()
}
