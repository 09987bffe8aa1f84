//! Strategy chain for single primes and prime ranges.

use crate::arith::{is_prime, nat, FactorConfig, Nat};
use crate::decomp::{explicit_3mod4, Decomposition, DecompositionRecord};
use crate::ed1::{default_gamma_max, enumerate_ed1};
use crate::ed2::{default_delta_max, sweep_delta, DeltaStatus};
use crate::error::Error;
use crate::window::{back_search, direct_search, window};
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[serde(rename = "explicit_3mod4")]
    Explicit3Mod4,
    Ed2,
    Direct,
    Back,
    Ed1,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Explicit3Mod4 => "explicit_3mod4",
            Strategy::Ed2 => "ed2",
            Strategy::Direct => "direct",
            Strategy::Back => "back",
            Strategy::Ed1 => "ed1",
        }
    }

    /// Explicit formula first when it applies, ED1 last.
    pub fn default_chain(p: &Nat) -> Vec<Strategy> {
        let mut out = Vec::new();
        if p % 4u32 == nat(3) {
            out.push(Strategy::Explicit3Mod4);
        }
        out.extend([Strategy::Ed2, Strategy::Direct, Strategy::Back]);
        if p.is_odd() {
            out.push(Strategy::Ed1);
        }
        out
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        [Strategy::Explicit3Mod4, Strategy::Ed2, Strategy::Direct, Strategy::Back, Strategy::Ed1]
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown strategy {s:?}")))
    }
}

/// Unset bounds fall back to the per-prime defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    pub delta_max: Option<u64>,
    pub gamma_max: Option<Nat>,
    pub r_max: u64,
    pub s_max: u64,
    pub alphas: Vec<u64>,
    /// The back strategy is skipped when the window holds more values.
    pub back_window_max: u64,
    pub stop_after: usize,
    pub strategies: Option<Vec<Strategy>>,
    pub factor: FactorConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            delta_max: None,
            gamma_max: None,
            r_max: 8,
            s_max: 8,
            alphas: vec![1, 2, 3],
            back_window_max: 1 << 20,
            stop_after: 2,
            strategies: None,
            factor: FactorConfig::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.delta_max == Some(0) || self.r_max == 0 || self.s_max == 0 || self.stop_after == 0 {
            return Err(Error::domain("bounds must be positive"));
        }
        if self.alphas.is_empty() || self.alphas.contains(&0) {
            return Err(Error::domain("alpha list must be non-empty and positive"));
        }
        if self.strategies.as_ref().is_some_and(|s| s.is_empty()) {
            return Err(Error::domain("strategy list must be non-empty"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Solved(usize),
    Exhausted,
    Budget,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Solved(n) => write!(f, "SOLVED({n})"),
            SolveStatus::Exhausted => f.write_str("EXHAUSTED"),
            SolveStatus::Budget => f.write_str("BUDGET"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    #[serde(flatten)]
    pub record: DecompositionRecord,
    pub strategy: Strategy,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Found {
    pub decomposition: Decomposition,
    pub strategy: Strategy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub p: Nat,
    pub status: SolveStatus,
    pub found: Vec<Found>,
    /// One line per strategy that ran.
    pub diagnostics: Vec<String>,
}

impl SolveOutcome {
    pub fn records(&self) -> Vec<ResultRecord> {
        self.found
            .iter()
            .map(|f| ResultRecord {
                record: f.decomposition.to_record(),
                strategy: f.strategy,
                diagnostics: self.diagnostics.clone(),
            })
            .collect()
    }
}

struct Collector {
    keys: BTreeSet<(Nat, Nat, Nat, Nat)>,
    found: Vec<Found>,
    limit: usize,
}

impl Collector {
    fn push(&mut self, d: Decomposition, strategy: Strategy) -> usize {
        if self.done() || !self.keys.insert(d.key()) {
            return 0;
        }
        self.found.push(Found { decomposition: d, strategy });
        1
    }

    fn done(&self) -> bool {
        self.found.len() >= self.limit
    }
}

/// Runs the strategy chain until `stop_after` distinct decompositions are
/// found. Non-prime input is a domain error.
pub fn solve(p: &Nat, cfg: &SolveConfig) -> Result<SolveOutcome, Error> {
    cfg.validate()?;
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let chain = cfg.strategies.clone().unwrap_or_else(|| Strategy::default_chain(p));
    let mut col = Collector { keys: BTreeSet::new(), found: Vec::new(), limit: cfg.stop_after };
    let mut diagnostics = Vec::new();
    let mut budget_hit = false;
    for strategy in chain {
        if col.done() {
            break;
        }
        let note = match strategy {
            Strategy::Explicit3Mod4 => {
                if p % 4u32 != nat(3) {
                    "not applicable".to_string()
                } else {
                    let added: usize = explicit_3mod4(p)?.into_iter().map(|d| col.push(d, strategy)).sum();
                    format!("{added} new")
                }
            }
            Strategy::Ed2 => {
                let delta_max = cfg.delta_max.unwrap_or_else(|| default_delta_max(p));
                let want = cfg.stop_after - col.found.len();
                let out = sweep_delta(p, delta_max, Some(want), None, &cfg.factor)?;
                let skipped = out
                    .diagnostics
                    .iter()
                    .filter(|d| matches!(d.status, DeltaStatus::BudgetExceeded(_)))
                    .count();
                budget_hit |= skipped > 0;
                let last = out.diagnostics.last().map_or(0, |d| d.delta);
                let mut added = 0;
                for t in &out.triples {
                    added += col.push(t.decomposition()?, strategy);
                }
                format!("{added} new, delta<={last} of {delta_max}, budget_skips={skipped}")
            }
            Strategy::Direct => {
                let mut added = 0;
                for &alpha in &cfg.alphas {
                    for hit in direct_search(p, alpha, cfg.r_max, cfg.s_max)? {
                        added += col.push(hit.decomposition, strategy);
                    }
                }
                format!("{added} new, r<={}, s<={}", cfg.r_max, cfg.s_max)
            }
            Strategy::Back => {
                let (lo, hi) = window(p);
                if hi >= lo && &hi - &lo >= nat(cfg.back_window_max) {
                    diagnostics.push(format!("{strategy}: skipped, window wider than {}", cfg.back_window_max));
                    continue;
                }
                let mut added = 0;
                'outer: for &alpha in &cfg.alphas {
                    let mut a = lo.clone();
                    while a <= hi {
                        if (&a % alpha) == Nat::from(0u32) {
                            for hit in back_search(p, alpha, &a)? {
                                added += col.push(hit.decomposition, strategy);
                            }
                            if col.done() {
                                break 'outer;
                            }
                        }
                        a += 1u32;
                    }
                }
                format!("{added} new")
            }
            Strategy::Ed1 => {
                let gamma_max = cfg.gamma_max.clone().unwrap_or_else(|| default_gamma_max(p));
                match enumerate_ed1(p, &gamma_max, true, &cfg.factor) {
                    Ok(qs) => {
                        let mut added = 0;
                        for q in qs {
                            added += col.push(q.decomposition()?, strategy);
                        }
                        format!("{added} new, gamma<={gamma_max}")
                    }
                    Err(Error::Budget(b)) => {
                        budget_hit = true;
                        format!("budget exceeded factoring {}", b.n)
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        diagnostics.push(format!("{strategy}: {note}"));
    }
    let status = match col.found.len() {
        0 if budget_hit => SolveStatus::Budget,
        0 => SolveStatus::Exhausted,
        n => SolveStatus::Solved(n),
    };
    Ok(SolveOutcome { p: p.clone(), status, found: col.found, diagnostics })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub outcomes: Vec<SolveOutcome>,
}

impl SweepSummary {
    pub fn solved(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o.status, SolveStatus::Solved(_))).count()
    }

    pub fn exhausted(&self) -> Vec<&Nat> {
        self.outcomes.iter().filter(|o| o.status == SolveStatus::Exhausted).map(|o| &o.p).collect()
    }

    pub fn budget(&self) -> Vec<&Nat> {
        self.outcomes.iter().filter(|o| o.status == SolveStatus::Budget).map(|o| &o.p).collect()
    }
}

/// Primes in `[lo, hi]`, optionally restricted to `P ≡ residue (mod modulus)`.
pub fn primes_between(lo: u64, hi: u64, class: Option<(u64, u64)>) -> Vec<u64> {
    if hi < lo.max(2) {
        return Vec::new();
    }
    crate::arith::sieve(hi)
        .into_iter()
        .filter(|&q| q >= lo && class.is_none_or(|(m, r)| q % m == r))
        .collect()
}

/// Solves every prime in the range on a pool of `workers` threads
/// (0 = rayon default); outcomes are in ascending `P`.
pub fn sweep(
    lo: u64,
    hi: u64,
    class: Option<(u64, u64)>,
    cfg: &SolveConfig,
    workers: usize,
) -> Result<SweepSummary, Error> {
    cfg.validate()?;
    let primes = primes_between(lo, hi, class);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    let outcomes: Result<Vec<SolveOutcome>, Error> =
        pool.install(|| primes.par_iter().map(|&q| solve(&nat(q), cfg)).collect());
    Ok(SweepSummary { outcomes: outcomes? })
}

/// Smallest δ giving an ED2 hit, per prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationRow {
    pub p: u64,
    pub first_hit: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationBand {
    pub lo: u64,
    pub hi: u64,
    pub primes: usize,
    pub mean_first_hit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    pub rows: Vec<IterationRow>,
    pub bands: Vec<IterationBand>,
    /// Whether band means never decrease; logged, not asserted.
    pub monotone: bool,
}

/// Empirical count of δ values tried before the first ED2 hit, grouped in
/// bands `[2^k, 2^(k+1))`.
pub fn iteration_report(primes: &[u64], delta_max: u64, cfg: &FactorConfig) -> Result<IterationReport, Error> {
    let rows: Result<Vec<IterationRow>, Error> = primes
        .par_iter()
        .map(|&q| {
            let out = sweep_delta(&nat(q), delta_max, Some(1), None, cfg)?;
            let first_hit = out.triples.first().map(|_| out.diagnostics.last().map_or(0, |d| d.delta));
            Ok(IterationRow { p: q, first_hit })
        })
        .collect();
    let rows = rows?;
    let mut bands: Vec<IterationBand> = Vec::new();
    for row in &rows {
        let Some(h) = row.first_hit else { continue };
        let k = 63 - row.p.leading_zeros();
        let (lo, hi) = (1u64 << k, (1u64 << k).saturating_mul(2));
        match bands.iter_mut().find(|b| b.lo == lo) {
            Some(b) => {
                b.mean_first_hit = (b.mean_first_hit * b.primes as f64 + h as f64) / (b.primes + 1) as f64;
                b.primes += 1;
            }
            None => bands.push(IterationBand { lo, hi, primes: 1, mean_first_hit: h as f64 }),
        }
    }
    bands.sort_by_key(|b| b.lo);
    let monotone = bands.windows(2).all(|w| w[0].mean_first_hit <= w[1].mean_first_hit);
    Ok(IterationReport { rows, bands, monotone })
}
