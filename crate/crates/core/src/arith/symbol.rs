use super::Nat;
use crate::error::Error;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadSymbol {
    MinusOne,
    Zero,
    One,
}

impl QuadSymbol {
    pub fn value(self) -> i8 {
        match self {
            QuadSymbol::MinusOne => -1,
            QuadSymbol::Zero => 0,
            QuadSymbol::One => 1,
        }
    }
}

/// Jacobi symbol `(a/n)` for odd `n >= 1`.
pub fn jacobi(a: &BigInt, n: &Nat) -> Result<QuadSymbol, Error> {
    if n.is_zero() || n.is_even() {
        return Err(Error::Domain(format!("Jacobi symbol needs odd n >= 1, got {n}")));
    }
    let nn = BigInt::from_biguint(Sign::Plus, n.clone());
    let reduced = a.mod_floor(&nn).to_biguint().expect("non-negative residue");
    Ok(match jacobi_nat(reduced, n.clone()) {
        -1 => QuadSymbol::MinusOne,
        0 => QuadSymbol::Zero,
        _ => QuadSymbol::One,
    })
}

pub(crate) fn jacobi_i64(a: i64, n: &Nat) -> i8 {
    let nn = BigInt::from(n.clone());
    let reduced = BigInt::from(a).mod_floor(&nn).to_biguint().expect("non-negative residue");
    jacobi_nat(reduced, n.clone())
}

fn jacobi_nat(mut a: Nat, mut n: Nat) -> i8 {
    let mut t = 1i8;
    while !a.is_zero() {
        let z = a.trailing_zeros().unwrap_or(0);
        a >>= z;
        let n8 = (&n % 8u32).to_u32_digits().first().copied().unwrap_or(0);
        if z % 2 == 1 && (n8 == 3 || n8 == 5) {
            t = -t;
        }
        let a4 = (&a % 4u32).to_u32_digits().first().copied().unwrap_or(0);
        if a4 == 3 && n8 % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}
