//! Axis-aligned affine lattices, point counts in boxes, the congruence
//! lattice around ED2 triples and the two-dimensional kernel lattice
//! `{(u, v) : ub' + vc' ≡ 0 (mod g)}` with its diagonal period.

use crate::arith::Nat;
use crate::ed2::Ed2Triple;
use crate::error::Error;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineLattice {
    moduli: Vec<u64>,
    residues: Vec<u64>,
}

impl AffineLattice {
    pub fn new(moduli: Vec<u64>, residues: Vec<u64>) -> Result<Self, Error> {
        if moduli.len() != residues.len() || moduli.is_empty() {
            return Err(Error::domain("moduli and residues must have the same positive length"));
        }
        if moduli.iter().zip(&residues).any(|(m, r)| *m == 0 || r >= m) {
            return Err(Error::domain("need 0 <= residue < modulus on every axis"));
        }
        Ok(AffineLattice { moduli, residues })
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn index(&self) -> u128 {
        self.moduli.iter().map(|&m| m as u128).product()
    }

    pub fn contains(&self, point: &[i128]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.moduli.iter().zip(&self.residues))
                .all(|(x, (m, r))| x.rem_euclid(*m as i128) == *r as i128)
    }

    pub fn contains_nat(&self, point: &[&Nat]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.moduli.iter().zip(&self.residues))
                .all(|(x, (m, r))| (*x % *m) == Nat::from(*r))
    }
}

/// Half-open box `lower_i <= x_i < lower_i + extent_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSpec {
    pub lower: Vec<i64>,
    pub extent: Vec<u64>,
}

impl BoxSpec {
    /// `1 <= x_i <= t` on each of `k` axes.
    pub fn cube(k: usize, t: u64) -> Self {
        BoxSpec { lower: vec![1; k], extent: vec![t; k] }
    }
}

fn axis_count(lo: i64, extent: u64, m: u64, r: u64) -> u128 {
    if extent == 0 {
        return 0;
    }
    let (lo, hi, m, r) = (lo as i128, lo as i128 + extent as i128 - 1, m as i128, r as i128);
    ((hi - r).div_euclid(m) - (lo - 1 - r).div_euclid(m)) as u128
}

/// Exact number of lattice points in the box.
pub fn count_points(lat: &AffineLattice, bx: &BoxSpec) -> Result<u128, Error> {
    if bx.lower.len() != lat.dim() || bx.extent.len() != lat.dim() {
        return Err(Error::domain("box and lattice dimensions differ"));
    }
    Ok((0..lat.dim())
        .map(|i| axis_count(bx.lower[i], bx.extent[i], lat.moduli[i], lat.residues[i]))
        .product())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityRow {
    pub t: u64,
    pub exact: u128,
    /// `T^k / index`.
    pub predicted: BigRational,
    pub abs_error: BigRational,
    /// `3·max_modulus·T^(k-1)`.
    pub bound: BigRational,
}

impl DensityRow {
    pub fn within_bound(&self) -> bool {
        self.abs_error <= self.bound
    }
}

/// Counts the cube `[1, T]^k` for each `T` and compares with `T^k/index`.
pub fn density_experiment(lat: &AffineLattice, ts: &[u64]) -> Vec<DensityRow> {
    let k = lat.dim() as u32;
    let index = BigInt::from(lat.index());
    let c = BigInt::from(3 * lat.moduli.iter().copied().max().unwrap_or(1));
    ts.iter()
        .map(|&t| {
            let exact = count_points(lat, &BoxSpec::cube(lat.dim(), t)).expect("cube matches dimension");
            let tk = BigInt::from(t).pow(k);
            let predicted = BigRational::new(tk, index.clone());
            let abs_error = (BigRational::from_integer(BigInt::from(exact)) - &predicted).abs();
            let bound = BigRational::from_integer(&c * BigInt::from(t).pow(k - 1));
            DensityRow { t, exact, predicted, abs_error, bound }
        })
        .collect()
}

/// Moduli `(m₃, g, g)`, residues `(δ mod m₃, 0, 0)`.
pub fn ed2_lattice(p: &Nat, g: u64, m3: u64, delta: &Nat) -> Result<AffineLattice, Error> {
    if m3 == 0 || m3 % 2 == 0 {
        return Err(Error::domain(format!("m3 = {m3} must be odd")));
    }
    if g == 0 || g % m3 != 0 {
        return Err(Error::domain(format!("m3 = {m3} does not divide g = {g}")));
    }
    if (p % m3).to_u64().unwrap_or(0).gcd(&m3) != 1 {
        return Err(Error::domain(format!("gcd(m3 = {m3}, P) != 1")));
    }
    let r = (delta % m3).to_u64().expect("residue below m3");
    AffineLattice::new(vec![m3, g, g], vec![r, 0, 0])
}

/// `(δ, b, c)` of a triple as a lattice point.
pub fn triple_point(t: &Ed2Triple) -> [&Nat; 3] {
    [&t.delta, &t.b, &t.c]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalLattice {
    pub g: u64,
    pub bprime: u64,
    pub cprime: u64,
    /// `gcd(g, b' + c')`; unrelated to the squarefree part of δ.
    pub alpha_diag: u64,
    /// `g / alpha_diag`.
    pub dprime: u64,
    pub v1: (i64, i64),
    pub v2: (i64, i64),
}

impl DiagonalLattice {
    pub fn new(g: u64, bprime: u64, cprime: u64) -> Result<Self, Error> {
        if g == 0 || bprime == 0 || cprime == 0 {
            return Err(Error::domain("g, b', c' must be positive"));
        }
        if bprime.gcd(&g) != 1 || cprime.gcd(&g) != 1 {
            return Err(Error::domain(format!("b' = {bprime} and c' = {cprime} must be coprime to g = {g}")));
        }
        let alpha_diag = g.gcd(&(bprime + cprime));
        let dprime = g / alpha_diag;
        let dl = DiagonalLattice {
            g,
            bprime,
            cprime,
            alpha_diag,
            dprime,
            v1: (cprime as i64, -(bprime as i64)),
            v2: (dprime as i64, dprime as i64),
        };
        assert!(dl.contains(dl.v1) && dl.contains(dl.v2), "generators must lie in the kernel");
        Ok(dl)
    }

    pub fn contains(&self, (u, v): (i64, i64)) -> bool {
        let s = u as i128 * self.bprime as i128 + v as i128 * self.cprime as i128;
        s.rem_euclid(self.g as i128) == 0
    }
}

/// The unique `u ∈ [x0, x0 + h)` with `u ≡ residue (mod modulus)`.
pub fn unique_representative(x0: i64, h: u64, modulus: u64, residue: i64) -> Result<i64, Error> {
    if modulus == 0 || h < modulus {
        return Err(Error::domain(format!("need h >= modulus >= 1, got h = {h}, modulus = {modulus}")));
    }
    let m = modulus as i64;
    Ok(x0 + (residue - x0).rem_euclid(m))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HitBoxError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// The first coordinate was aligned but the diagonal step left the
    /// second coordinate outside `[y0, y0 + w)`.
    #[error("constructed point {point:?} misses the box in v (wanted v = {v_target}); box contains an L-point: {box_has_point}")]
    SecondCoordinateMiss { point: (i64, i64), v_target: i64, box_has_point: bool },
}

/// The construction: start at `v1 = (c', -b')`, pick the unique `u` in
/// `[x0, x0 + h)` congruent to `c'` mod `d'`, move along `v2 = (d', d')` to
/// reach it, then check that the second coordinate is in `[y0, y0 + w)`.
pub fn hit_box(dl: &DiagonalLattice, x0: i64, h: u64, y0: i64, w: u64) -> Result<(i64, i64), HitBoxError> {
    if h < dl.dprime || w < dl.dprime {
        return Err(HitBoxError::Precondition(format!(
            "box {h}x{w} smaller than the diagonal period {}",
            dl.dprime
        )));
    }
    let (u0, v0) = dl.v1;
    let d = dl.dprime as i64;
    let u = unique_representative(x0, h, dl.dprime, u0).map_err(|e| HitBoxError::Precondition(e.to_string()))?;
    let v_target = unique_representative(y0, w, dl.dprime, v0).map_err(|e| HitBoxError::Precondition(e.to_string()))?;
    let k = (u - u0) / d;
    let point = (u, v0 + k * d);
    assert!(dl.contains(point), "diagonal translate of v1 left the lattice");
    assert_eq!((point.0 - u0) % d, 0);
    assert_eq!(point.0 - u0, point.1 - v0, "displacement must be a multiple of (d', d')");
    if point.1 < y0 || point.1 >= y0 + w as i64 {
        let box_has_point =
            (x0..x0 + h as i64).any(|a| (y0..y0 + w as i64).any(|b| dl.contains((a, b))));
        return Err(HitBoxError::SecondCoordinateMiss { point, v_target, box_has_point });
    }
    Ok(point)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HitBoxTrial {
    pub g: u64,
    pub bprime: u64,
    pub cprime: u64,
    pub dprime: u64,
    pub x0: i64,
    pub y0: i64,
    pub outcome: Result<(i64, i64), HitBoxError>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HitBoxReport {
    pub trials: Vec<HitBoxTrial>,
}

impl HitBoxReport {
    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| t.outcome.is_err()).count()
    }

    /// Failures where the box has no lattice point at all.
    pub fn empty_boxes(&self) -> usize {
        self.trials
            .iter()
            .filter(|t| matches!(t.outcome, Err(HitBoxError::SecondCoordinateMiss { box_has_point: false, .. })))
            .count()
    }
}

/// Random `g <= g_max`, `b', c' <= 100` coprime to `g`, boxes of side `d'`
/// anchored in `[-1000, 1000]²`.
pub fn hit_box_trials(trials: usize, g_max: u64, seed: u64) -> HitBoxReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    while out.len() < trials {
        let g = rng.gen_range(1..=g_max.max(1));
        let bprime = rng.gen_range(1..=100u64);
        let cprime = rng.gen_range(1..=100u64);
        let Ok(dl) = DiagonalLattice::new(g, bprime, cprime) else { continue };
        let x0 = rng.gen_range(-1000..=1000i64);
        let y0 = rng.gen_range(-1000..=1000i64);
        let outcome = hit_box(&dl, x0, dl.dprime, y0, dl.dprime);
        out.push(HitBoxTrial { g, bprime, cprime, dprime: dl.dprime, x0, y0, outcome });
    }
    HitBoxReport { trials: out }
}
