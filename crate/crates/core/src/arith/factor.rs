//! Factorization by trial division followed by Brent's variant of Pollard
//! rho. Composites that fit in a machine word take a `u64` path with 128-bit
//! products; larger ones run the same loop on `BigUint`.
//!
//! Rho parameters come from a ChaCha stream seeded by the input value and
//! `FactorConfig::seed`, so a given input always factors the same way. The
//! total number of rho iterations is capped by `FactorConfig::budget`; on
//! exhaustion the error carries every prime found so far and the cofactors
//! that could not be split.

use super::prime::{is_prime_u64, mul_mod};
use super::{is_prime, Nat};
use crate::error::{BudgetExceeded, Error};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cell::Cell;
use std::collections::BTreeMap;
use std::sync::OnceLock;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorConfig {
    /// Trial division runs over primes up to this bound.
    pub trial_bound: u64,
    /// Maximum total rho iterations per call.
    pub budget: u64,
    /// Mixed into the per-input rho seed.
    pub seed: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { trial_bound: 1 << 12, budget: 1 << 24, seed: 0 }
    }
}

/// Prime factorization of `base`, factors ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    base: Nat,
    factors: Vec<(Nat, u32)>,
}

impl Factorization {
    pub fn base(&self) -> &Nat {
        &self.base
    }

    pub fn factors(&self) -> &[(Nat, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &Nat> {
        self.factors.iter().map(|(p, _)| p)
    }

    /// Factorization of `base^2`, for free.
    pub fn squared(&self) -> Factorization {
        Factorization {
            base: &self.base * &self.base,
            factors: self.factors.iter().map(|(p, e)| (p.clone(), 2 * e)).collect(),
        }
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|(_, e)| *e as u64 + 1).product()
    }
}

thread_local! {
    static CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of `factorize` calls made on the current thread.
pub fn factorize_calls() -> u64 {
    CALLS.with(|c| c.get())
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| super::progression::sieve(1 << 16))
}

pub fn factorize(n: &Nat, cfg: &FactorConfig) -> Result<Factorization, Error> {
    CALLS.with(|c| c.set(c.get() + 1));
    if n.is_zero() {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut found: BTreeMap<Nat, u32> = BTreeMap::new();
    let mut rest = n.clone();

    let trial = cfg.trial_bound.max(2);
    let table = small_primes();
    for &p in table.iter().take_while(|&&p| p <= trial) {
        if rest.is_one() {
            break;
        }
        let pn = Nat::from(p);
        if &pn * &pn > rest {
            break;
        }
        while (&rest % p).is_zero() {
            rest /= p;
            *found.entry(pn.clone()).or_insert(0) += 1;
        }
    }
    if trial > *table.last().unwrap() {
        let mut d = table.last().unwrap() + 2;
        while d <= trial {
            let dn = Nat::from(d);
            if &dn * &dn > rest {
                break;
            }
            while (&rest % d).is_zero() {
                rest /= d;
                *found.entry(dn.clone()).or_insert(0) += 1;
            }
            d += 2;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(n, cfg.seed));
    let mut spent = 0u64;
    let mut stack = vec![rest];
    let mut stuck = Vec::new();
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            *found.entry(m).or_insert(0) += 1;
            continue;
        }
        let (root, exact) = super::sqrt_exact(&m);
        if exact {
            stack.push(root.clone());
            stack.push(root);
            continue;
        }
        match split(&m, &mut rng, cfg.budget.saturating_sub(spent)) {
            (Some(d), steps) => {
                spent += steps;
                let other = &m / &d;
                stack.push(d);
                stack.push(other);
            }
            (None, _) => {
                stuck.push(m);
                stuck.extend(stack.drain(..).filter(|x| !x.is_one()));
                break;
            }
        }
    }

    if !stuck.is_empty() {
        return Err(BudgetExceeded {
            n: n.clone(),
            budget: cfg.budget,
            partial: found.into_iter().collect(),
            unfactored: stuck,
        }
        .into());
    }
    Ok(Factorization { base: n.clone(), factors: found.into_iter().collect() })
}

fn seed_for(n: &Nat, seed: u64) -> u64 {
    n.iter_u64_digits().fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, d| {
        (h.rotate_left(23) ^ d).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Finds a nontrivial divisor of the odd composite `m`, spending at most
/// `budget` iterations.
fn split(m: &Nat, rng: &mut ChaCha8Rng, budget: u64) -> (Option<Nat>, u64) {
    if m.is_even() {
        return (Some(Nat::from(2u32)), 0);
    }
    let mut spent = 0;
    while spent < budget {
        let left = budget - spent;
        let (hit, steps) = match m.to_u64() {
            Some(v) => {
                debug_assert!(!is_prime_u64(v));
                let x0 = rng.gen_range(0..v);
                let c = rng.gen_range(1..v - 1);
                let (d, s) = brent_u64(v, x0, c, left);
                (d.map(Nat::from), s)
            }
            None => {
                let x0 = rng.gen::<u64>();
                let c = rng.gen_range(1..u64::MAX);
                brent_big(m, Nat::from(x0) % m, Nat::from(c), left)
            }
        };
        spent += steps.max(1);
        if hit.is_some() {
            return (hit, spent);
        }
    }
    (None, spent)
}

const BATCH: u64 = 128;

fn brent_u64(n: u64, x0: u64, c: u64, max_steps: u64) -> (Option<u64>, u64) {
    let f = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
    let mut y = x0;
    let mut x = y;
    let mut ys = y;
    let (mut r, mut q, mut g) = (1u64, 1u64, 1u64);
    let mut steps = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        steps += r;
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let lim = BATCH.min(r - k);
            for _ in 0..lim {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            steps += lim;
            g = q.gcd(&n);
            k += lim;
        }
        r *= 2;
        if g == 1 && steps >= max_steps {
            return (None, steps);
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            steps += 1;
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    if g == n {
        (None, steps)
    } else {
        (Some(g), steps)
    }
}

fn brent_big(n: &Nat, x0: Nat, c: Nat, max_steps: u64) -> (Option<Nat>, u64) {
    let f = |x: &Nat| (x * x + &c) % n;
    let diff = |a: &Nat, b: &Nat| if a > b { a - b } else { b - a };
    let mut y = x0;
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut r = 1u64;
    let mut q = Nat::one();
    let mut g = Nat::one();
    let mut steps = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        steps += r;
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let lim = BATCH.min(r - k);
            for _ in 0..lim {
                y = f(&y);
                q = (&q * diff(&x, &y)) % n;
            }
            steps += lim;
            g = q.gcd(n);
            k += lim;
        }
        r *= 2;
        if g.is_one() && steps >= max_steps {
            return (None, steps);
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            steps += 1;
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        (None, steps)
    } else {
        (Some(g), steps)
    }
}

/// All positive divisors of the factored number, ascending.
pub fn divisors(f: &Factorization) -> Vec<Nat> {
    let mut out = vec![Nat::one()];
    for (p, e) in f.factors() {
        let len = out.len();
        let mut pk = Nat::one();
        for _ in 0..*e {
            pk *= p;
            for i in 0..len {
                let d = &out[i] * &pk;
                out.push(d);
            }
        }
    }
    out.sort();
    out
}
