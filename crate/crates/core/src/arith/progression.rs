use crate::error::Error;

/// Primes `<= limit` by the sieve of Eratosthenes.
pub(crate) fn sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionCount {
    pub count: u64,
    pub primes: Option<Vec<u64>>,
}

/// Primes `a <= x_max` with `a ≡ residue (mod modulus)`.
pub fn primes_in_progression(
    x_max: u64,
    modulus: u64,
    residue: u64,
    list: bool,
) -> Result<ProgressionCount, Error> {
    if modulus == 0 || residue >= modulus {
        return Err(Error::Domain(format!(
            "need modulus >= 1 and 0 <= residue < modulus, got {residue} mod {modulus}"
        )));
    }
    let hits: Vec<u64> = sieve(x_max).into_iter().filter(|p| p % modulus == residue).collect();
    Ok(ProgressionCount { count: hits.len() as u64, primes: list.then_some(hits) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = primes_in_progression(100, 4, 1, true).unwrap();
        assert_eq!(r.count, 11);
        assert_eq!(r.primes.unwrap()[..3], [5, 13, 17]);
        assert_eq!(primes_in_progression(100, 4, 3, false).unwrap().count, 13);
        assert_eq!(primes_in_progression(100, 1, 0, false).unwrap().count, 25);
        assert!(primes_in_progression(100, 4, 4, false).is_err());
        assert!(primes_in_progression(100, 0, 0, false).is_err());
    }
}
