use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use esd_core::arith::{is_prime, FactorConfig, Nat};
use esd_core::decomp::DecompositionRecord;
use esd_core::ed1::{default_gamma_max, enumerate_ed1, Ed1Quad};
use esd_core::ed2::{default_delta_max, enumerate_ed2, Ed2Triple};
use esd_core::error::Error;
use esd_core::lattice::{density_experiment, hit_box_trials, AffineLattice, HitBoxError};
use esd_core::report::{self, DENSITY_HEADER, ROUNDTRIP_HEADER, TABLE1_HEADER, TABLE2_HEADER};
use esd_core::solver::{self, ResultRecord, SolveConfig, SolveStatus, Strategy};
use esd_core::transform::{anticonvolve, convolve, roundtrip_report, CanonContext, YPolicy};
use esd_core::window::{back_search, direct_search, WindowHit};
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use num_traits::Zero;

#[derive(Parser)]
#[command(name = "esd", version, about = "Search and verify decompositions 4/P = 1/A + 1/B + 1/C")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Global {
    /// Largest delta for the second-form sweep
    #[arg(long, global = true)]
    delta_max: Option<u64>,
    /// Largest gamma for the first-form enumeration
    #[arg(long, global = true, value_parser = parse_nat)]
    gamma_max: Option<Nat>,
    /// Scale factors for the window searches, comma separated
    #[arg(long, global = true, value_delimiter = ',', default_value = "1,2,3")]
    alpha: Vec<u64>,
    #[arg(long, global = true, default_value_t = 2)]
    stop_after: usize,
    /// Strategy chain for solve and sweep, comma separated:
    /// explicit_3mod4, ed2, direct, back, ed1
    #[arg(long, global = true, value_delimiter = ',')]
    strategy: Vec<String>,
    /// Pollard rho step budget per factorization; ESD_BUDGET overrides it
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run the strategy chain on one prime
    Solve {
        #[arg(value_parser = parse_nat)]
        p: Nat,
    },
    /// Solve every prime in [LO, HI]
    Sweep {
        lo: u64,
        hi: u64,
        /// Keep only primes with this residue mod 4
        #[arg(long)]
        mod4: Option<u64>,
    },
    /// Reproduce table 1 (first form) or table 2 (second form) as CSV
    Table {
        which: u8,
        #[arg(value_parser = parse_nat)]
        p: Nat,
    },
    /// Re-verify a JSONL file of decompositions ("-" for stdin)
    Verify { file: PathBuf },
    /// Exact lattice point counts against T^k/index
    Density {
        #[arg(long, value_delimiter = ',', required = true)]
        moduli: Vec<u64>,
        /// Defaults to all zeros
        #[arg(long, value_delimiter = ',')]
        residues: Option<Vec<u64>>,
        #[arg(long = "t", value_delimiter = ',', required = true)]
        ts: Vec<u64>,
    },
    /// Randomized trials of the diagonal hit-box construction
    Hitbox {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 60)]
        g_max: u64,
    },
    /// Convolve one triple, or report on every table-2 triple of P
    Convolve {
        #[arg(value_parser = parse_nat)]
        p: Nat,
        #[arg(requires_all = ["b", "c"], value_parser = parse_nat)]
        delta: Option<Nat>,
        #[arg(value_parser = parse_nat)]
        b: Option<Nat>,
        #[arg(value_parser = parse_nat)]
        c: Option<Nat>,
        /// minimal, canonical, or an explicit y
        #[arg(long, default_value = "minimal")]
        policy: String,
    },
    /// Residue of A mod m*o from a first-form quad
    Anticonvolve {
        #[arg(value_parser = parse_nat)]
        p: Nat,
        #[arg(value_parser = parse_nat)]
        gamma: Nat,
        #[arg(value_parser = parse_nat)]
        c: Nat,
        #[arg(value_parser = parse_nat)]
        u: Nat,
        #[arg(value_parser = parse_nat)]
        v: Nat,
        #[arg(long, value_parser = parse_nat)]
        m: Nat,
        #[arg(long, value_parser = parse_nat)]
        o: Nat,
    },
    /// Window search over the (r, s) grid
    Direct {
        #[arg(value_parser = parse_nat)]
        p: Nat,
        #[arg(long, default_value_t = 8)]
        r_max: u64,
        #[arg(long, default_value_t = 8)]
        s_max: u64,
    },
    /// Every decomposition with smallest denominator A, per alpha
    Back {
        #[arg(value_parser = parse_nat)]
        p: Nat,
        #[arg(value_parser = parse_nat)]
        a: Nat,
    },
    /// Enumerate first-form quads
    Ed1 {
        #[arg(value_parser = parse_nat)]
        p: Nat,
    },
    /// Enumerate second-form triples
    Ed2 {
        #[arg(value_parser = parse_nat)]
        p: Nat,
    },
}

fn parse_nat(s: &str) -> Result<Nat, String> {
    Nat::from_str(s).map_err(|_| format!("not a non-negative decimal integer: {s:?}"))
}

enum Failure {
    Usage(String),
    Verify(String),
    Exhausted(String),
    Budget(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Verify(_) => 2,
            Failure::Exhausted(_) => 3,
            Failure::Budget(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Verify(m) | Failure::Exhausted(m) | Failure::Budget(m) => m.clone(),
            Failure::Io(e) => format!("{e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => Failure::Usage(e.to_string()),
            Error::Budget(_) => Failure::Budget(e.to_string()),
            _ => Failure::Verify(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

type Out = Box<dyn Write>;

struct Ctx {
    cfg: SolveConfig,
    workers: usize,
    format: Option<Format>,
    out: Out,
}

impl Ctx {
    fn new(g: &Global) -> Result<Self, Failure> {
        let env_budget = match std::env::var("ESD_BUDGET") {
            Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| Failure::Usage(format!("ESD_BUDGET: not an integer: {v:?}")))?),
            Err(_) => None,
        };
        let mut factor = FactorConfig { seed: g.seed, ..Default::default() };
        if let Some(b) = env_budget.or(g.budget) {
            factor.budget = b;
        }
        let strategies = match g.strategy.is_empty() {
            true => None,
            false => Some(g.strategy.iter().map(|s| s.parse::<Strategy>()).collect::<Result<Vec<_>, _>>()?),
        };
        let cfg = SolveConfig {
            strategies,
            delta_max: g.delta_max,
            gamma_max: g.gamma_max.clone(),
            alphas: g.alpha.clone(),
            stop_after: g.stop_after,
            factor,
            ..Default::default()
        };
        cfg.validate()?;
        let out: Out = match &g.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Ctx { cfg, workers: g.workers, format: g.format, out })
    }

    fn csv(&self) -> bool {
        self.format == Some(Format::Csv)
    }

    fn jsonl<T: Serialize>(&mut self, items: &[T]) -> Result<(), Failure> {
        report::write_jsonl(&mut self.out, items)?;
        Ok(())
    }

    fn table(&mut self, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        report::write_csv(&mut self.out, header, rows)?;
        Ok(())
    }
}

fn require_prime(p: &Nat) -> Result<(), Failure> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{p} is not prime")))
    }
}

const RECORD_HEADER: [&str; 6] = ["P", "A", "B", "C", "method", "strategy"];

fn record_rows(records: &[ResultRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            let d = &r.record;
            vec![d.p.clone(), d.a.clone(), d.b.clone(), d.c.clone(), d.method.clone(), r.strategy.to_string()]
        })
        .collect()
}

fn emit_decompositions(ctx: &mut Ctx, recs: Vec<DecompositionRecord>) -> Result<(), Failure> {
    if ctx.csv() {
        let rows: Vec<Vec<String>> =
            recs.iter().map(|d| vec![d.p.clone(), d.a.clone(), d.b.clone(), d.c.clone(), d.method.clone()]).collect();
        ctx.table(&RECORD_HEADER[..5], &rows)
    } else {
        ctx.jsonl(&recs)
    }
}

fn hits_to_records(hits: &[WindowHit]) -> Vec<DecompositionRecord> {
    hits.iter().map(|h| h.decomposition.to_record()).collect()
}

#[derive(Serialize)]
struct ConvolveLine {
    p: String,
    delta: String,
    b: String,
    c: String,
    policy: String,
    y: Option<String>,
    p_second: Option<String>,
    rejection: Option<String>,
    decomposition: Option<DecompositionRecord>,
}

#[derive(Serialize)]
struct AnticonvolveLine {
    a_residue: String,
    modulus: String,
    triple: Option<DecompositionRecord>,
    diagnostic: Option<String>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut ctx = Ctx::new(&cli.global)?;
    let fc = ctx.cfg.factor.clone();
    match cli.command {
        Command::Solve { p } => {
            require_prime(&p)?;
            let o = solver::solve(&p, &ctx.cfg)?;
            let recs = o.records();
            if ctx.csv() {
                ctx.table(&RECORD_HEADER, &record_rows(&recs))?;
            } else {
                ctx.jsonl(&recs)?;
            }
            ctx.out.flush()?;
            eprintln!("P={p} {} [{}]", o.status, o.diagnostics.join("; "));
            match o.status {
                SolveStatus::Solved(_) => {}
                SolveStatus::Exhausted => return Err(Failure::Exhausted(format!("P={p}: EXHAUSTED"))),
                SolveStatus::Budget => return Err(Failure::Budget(format!("P={p}: BUDGET"))),
            }
        }
        Command::Sweep { lo, hi, mod4 } => {
            let class = mod4.map(|r| (4, r % 4));
            let s = solver::sweep(lo, hi, class, &ctx.cfg, ctx.workers)?;
            let recs: Vec<ResultRecord> = s.outcomes.iter().flat_map(|o| o.records()).collect();
            if ctx.csv() {
                ctx.table(&RECORD_HEADER, &record_rows(&recs))?;
            } else {
                ctx.jsonl(&recs)?;
            }
            ctx.out.flush()?;
            let exhausted: Vec<String> = s.exhausted().iter().map(|p| p.to_string()).collect();
            let budget: Vec<String> = s.budget().iter().map(|p| p.to_string()).collect();
            eprintln!(
                "primes={} solved={} exhausted=[{}] budget=[{}]",
                s.outcomes.len(),
                s.solved(),
                exhausted.join(","),
                budget.join(",")
            );
            if !exhausted.is_empty() {
                return Err(Failure::Exhausted(format!("{} primes exhausted", exhausted.len())));
            }
            if !budget.is_empty() {
                return Err(Failure::Budget(format!("{} primes over budget", budget.len())));
            }
        }
        Command::Table { which, p } => {
            require_prime(&p)?;
            match which {
                1 => {
                    let quads = report::table1_quads(&p, ctx.cfg.gamma_max.as_ref(), &fc)?;
                    ctx.table(&TABLE1_HEADER, &report::table1_rows(&quads))?;
                }
                2 => {
                    let ts = report::table2_triples(&p, ctx.cfg.delta_max, &fc)?;
                    ctx.table(&TABLE2_HEADER, &report::table2_rows(&ts))?;
                }
                _ => return Err(Failure::Usage(format!("unknown table {which}; expected 1 or 2"))),
            }
        }
        Command::Verify { file } => {
            let rep = if file.as_os_str() == "-" {
                report::verify_jsonl(io::stdin().lock())?
            } else {
                let f = File::open(&file).with_context(|| format!("opening {}", file.display()))?;
                report::verify_jsonl(BufReader::new(f))?
            };
            for (line, why) in &rep.failures {
                writeln!(ctx.out, "line {line}: {why}")?;
            }
            writeln!(ctx.out, "records={} passed={} failed={}", rep.total, rep.passed, rep.failures.len())?;
            if !rep.ok() {
                ctx.out.flush()?;
                return Err(Failure::Verify(format!("{} records failed verification", rep.failures.len())));
            }
        }
        Command::Density { moduli, residues, ts } => {
            let residues = residues.unwrap_or_else(|| vec![0; moduli.len()]);
            let lat = AffineLattice::new(moduli, residues)?;
            let rows = density_experiment(&lat, &ts);
            ctx.table(&DENSITY_HEADER, &report::density_rows(&rows))?;
        }
        Command::Hitbox { trials, g_max } => {
            let rep = hit_box_trials(trials, g_max, ctx.cfg.factor.seed);
            let rows: Vec<Vec<String>> = rep
                .trials
                .iter()
                .map(|t| {
                    let (u, v, status) = match &t.outcome {
                        Ok((u, v)) => (u.to_string(), v.to_string(), "hit".to_string()),
                        Err(HitBoxError::SecondCoordinateMiss { point, box_has_point, .. }) => (
                            point.0.to_string(),
                            point.1.to_string(),
                            if *box_has_point { "miss" } else { "miss_empty_box" }.to_string(),
                        ),
                        Err(HitBoxError::Precondition(m)) => (String::new(), String::new(), format!("precondition: {m}")),
                    };
                    vec![
                        t.g.to_string(),
                        t.bprime.to_string(),
                        t.cprime.to_string(),
                        t.dprime.to_string(),
                        t.x0.to_string(),
                        t.y0.to_string(),
                        u,
                        v,
                        status,
                    ]
                })
                .collect();
            ctx.table(&["g", "b'", "c'", "d'", "x0", "y0", "u", "v", "status"], &rows)?;
            ctx.out.flush()?;
            eprintln!("trials={} failures={} empty_boxes={}", rep.trials.len(), rep.failures(), rep.empty_boxes());
            if rep.failures() > 0 {
                return Err(Failure::Verify(format!("{} hit-box failures", rep.failures())));
            }
        }
        Command::Convolve { p, delta, b, c, policy } => {
            require_prime(&p)?;
            let policy = match policy.as_str() {
                "minimal" => YPolicy::Minimal,
                "canonical" => YPolicy::Canonical,
                y => YPolicy::Explicit(parse_nat(y).map_err(Failure::Usage)?),
            };
            match (delta, b, c) {
                (Some(delta), Some(b), Some(c)) => {
                    let t = Ed2Triple::new(&p, &delta, &b, &c, &fc)?;
                    let r = convolve(&t, policy, &fc)?;
                    let line = ConvolveLine {
                        p: p.to_string(),
                        delta: delta.to_string(),
                        b: b.to_string(),
                        c: c.to_string(),
                        policy: r.policy.to_string(),
                        y: r.y.map(|y| y.to_string()),
                        p_second: r.p_second.map(|x| x.to_string()),
                        rejection: r.rejection.map(|x| x.to_string()),
                        decomposition: r.decomposition.map(|d| d.to_record()),
                    };
                    ctx.jsonl(&[line])?;
                }
                _ => {
                    let ts = report::table2_triples(&p, ctx.cfg.delta_max, &fc)?;
                    let rep = roundtrip_report(&ts, &fc)?;
                    ctx.table(&ROUNDTRIP_HEADER, &report::roundtrip_rows(&rep.rows))?;
                    ctx.out.flush()?;
                    eprintln!("sources={} images={} balance={:?}", rep.sources, rep.images, rep.balance);
                }
            }
        }
        Command::Anticonvolve { p, gamma, c, u, v, m, o } => {
            require_prime(&p)?;
            let q = Ed1Quad::admissible(&p, &gamma, &c, &u, &v).map_err(|e| Failure::Verify(e.to_string()))?;
            let ctxc = CanonContext::new(&m, &o, &gamma)?;
            let r = anticonvolve(&q, &ctxc)?;
            let triple = match &r.triple {
                Some(t) => Some(t.decomposition()?.to_record()),
                None => None,
            };
            let line = AnticonvolveLine {
                a_residue: r.a_residue.to_string(),
                modulus: r.modulus.to_string(),
                triple,
                diagnostic: r.diagnostic,
            };
            ctx.jsonl(&[line])?;
        }
        Command::Direct { p, r_max, s_max } => {
            require_prime(&p)?;
            let mut hits = Vec::new();
            for &alpha in &ctx.cfg.alphas {
                hits.extend(direct_search(&p, alpha, r_max, s_max)?);
            }
            emit_decompositions(&mut ctx, hits_to_records(&hits))?;
        }
        Command::Back { p, a } => {
            require_prime(&p)?;
            let alphas: Vec<u64> = ctx.cfg.alphas.iter().copied().filter(|&al| (&a % al).is_zero()).collect();
            if alphas.is_empty() {
                return Err(Failure::Usage(format!("no alpha in {:?} divides A = {a}", ctx.cfg.alphas)));
            }
            let mut hits = Vec::new();
            for alpha in alphas {
                hits.extend(back_search(&p, alpha, &a)?);
            }
            emit_decompositions(&mut ctx, hits_to_records(&hits))?;
        }
        Command::Ed1 { p } => {
            require_prime(&p)?;
            let gamma_max = ctx.cfg.gamma_max.clone().unwrap_or_else(|| default_gamma_max(&p));
            let quads = enumerate_ed1(&p, &gamma_max, true, &fc)?;
            if ctx.csv() {
                ctx.table(&TABLE1_HEADER, &report::table1_rows(&quads))?;
            } else {
                let recs = quads.iter().map(|q| q.decomposition().map(|d| d.to_record())).collect::<Result<Vec<_>, _>>()?;
                ctx.jsonl(&recs)?;
            }
        }
        Command::Ed2 { p } => {
            require_prime(&p)?;
            let delta_max = ctx.cfg.delta_max.unwrap_or_else(|| default_delta_max(&p));
            let out = enumerate_ed2(&p, delta_max, &fc)?;
            if ctx.csv() {
                ctx.table(&TABLE2_HEADER, &report::table2_rows(&out.triples))?;
            } else {
                let recs =
                    out.triples.iter().map(|t| t.decomposition().map(|d| d.to_record())).collect::<Result<Vec<_>, _>>()?;
                ctx.jsonl(&recs)?;
            }
        }
    }
    ctx.out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("esd: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
