//! CSV tables and JSONL streams.

use crate::arith::{nat, FactorConfig, Nat};
use crate::decomp::DecompositionRecord;
use crate::ed1::{default_gamma_max, enumerate_ed1, Ed1Quad};
use crate::ed2::{default_delta_max, enumerate_ed2, Ed2Triple};
use crate::error::Error;
use crate::lattice::DensityRow;
use crate::transform::RoundtripRow;
use num_rational::BigRational;
use serde::Serialize;
use std::io::{self, BufRead, Write};

pub const TABLE1_HEADER: [&str; 10] = ["No", "gamma", "A", "B", "C", "c", "u", "v", "uv=c^2", "Congr."];
pub const TABLE2_HEADER: [&str; 16] =
    ["#", "alpha", "b'", "c'", "g", "b", "c", "delta", "X", "Y", "N", "A", "B", "C", "d'", "OK"];
pub const DENSITY_HEADER: [&str; 4] = ["T", "exact", "predicted", "abs_error"];
pub const ROUNDTRIP_HEADER: [&str; 12] = ["P", "A", "B", "C", "y", "c", "P'", "A'", "B'", "C'", "invariants", "success"];

fn flag(ok: bool) -> &'static str {
    if ok {
        "OK"
    } else {
        "FAIL"
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::domain(format!("csv: {e}"))
}

/// Bounds that reproduce the published tables: `γ <= 83` for the first,
/// `δ <= 300` / `δ <= 650` for the second.
pub fn golden_bound(table: u8, p: &Nat) -> Option<u64> {
    match (table, p.to_string().as_str()) {
        (1, "2521") => Some(83),
        (2, "2521") => Some(300),
        (2, "3529") => Some(650),
        _ => None,
    }
}

pub fn table1_quads(p: &Nat, gamma_max: Option<&Nat>, cfg: &FactorConfig) -> Result<Vec<Ed1Quad>, Error> {
    let gamma_max = match gamma_max {
        Some(g) => g.clone(),
        None => golden_bound(1, p).map(nat).unwrap_or_else(|| default_gamma_max(p)),
    };
    enumerate_ed1(p, &gamma_max, true, cfg)
}

pub fn table1_rows(quads: &[Ed1Quad]) -> Vec<Vec<String>> {
    quads
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let product = &q.u * &q.v == &q.c * &q.c;
            let congr = crate::arith::congruent_neg(&q.u, &q.c, &q.gamma)
                && crate::arith::congruent_neg(&q.v, &q.c, &q.gamma);
            vec![
                (i + 1).to_string(),
                q.gamma.to_string(),
                q.a.to_string(),
                q.b.to_string(),
                q.big_c.to_string(),
                q.c.to_string(),
                q.u.to_string(),
                q.v.to_string(),
                flag(product).to_string(),
                flag(congr).to_string(),
            ]
        })
        .collect()
}

/// Triples sorted by `(α, d', X)`, the order of the published table.
pub fn table2_triples(p: &Nat, delta_max: Option<u64>, cfg: &FactorConfig) -> Result<Vec<Ed2Triple>, Error> {
    let delta_max = delta_max.or_else(|| golden_bound(2, p)).unwrap_or_else(|| default_delta_max(p));
    let mut ts = enumerate_ed2(p, delta_max, cfg)?.triples;
    ts.sort_by(|a, b| (&a.alpha, &a.dprime, &a.x).cmp(&(&b.alpha, &b.dprime, &b.x)));
    Ok(ts)
}

pub fn table2_rows(triples: &[Ed2Triple]) -> Vec<Vec<String>> {
    triples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let ok = &t.x * &t.y == t.n && t.decomposition().is_ok();
            let d = t.decomposition().ok();
            let big = |f: fn(&crate::decomp::Decomposition) -> &Nat| d.as_ref().map_or(String::new(), |d| f(d).to_string());
            vec![
                (i + 1).to_string(),
                t.alpha.to_string(),
                t.bprime.to_string(),
                t.cprime.to_string(),
                t.g.to_string(),
                t.b.to_string(),
                t.c.to_string(),
                t.delta.to_string(),
                t.x.to_string(),
                t.y.to_string(),
                t.n.to_string(),
                big(|d| d.a()),
                big(|d| d.b()),
                big(|d| d.c()),
                t.dprime.to_string(),
                flag(ok).to_string(),
            ]
        })
        .collect()
}

fn rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn density_rows(rows: &[DensityRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| vec![r.t.to_string(), r.exact.to_string(), rational(&r.predicted), rational(&r.abs_error)])
        .collect()
}

pub fn roundtrip_rows(rows: &[RoundtripRow]) -> Vec<Vec<String>> {
    let opt = |x: &Option<Nat>| x.as_ref().map_or(String::new(), Nat::to_string);
    rows.iter()
        .map(|r| {
            let (a2, b2, c2) = match &r.image {
                Some((a, b, c)) => (a.to_string(), b.to_string(), c.to_string()),
                None => Default::default(),
            };
            let success = match r.rejection {
                None => "OK".to_string(),
                Some(why) => why.to_string(),
            };
            vec![
                r.p.to_string(),
                r.a.to_string(),
                r.b.to_string(),
                r.c.to_string(),
                opt(&r.y),
                r.c_small.to_string(),
                opt(&r.p_second),
                a2,
                b2,
                c2,
                r.invariants.clone(),
                success,
            ]
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::domain(format!("write: {e}")))
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: &[T]) -> io::Result<()> {
    for it in items {
        serde_json::to_writer(&mut out, it)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub total: usize,
    pub passed: usize,
    /// 1-based line number and reason.
    pub failures: Vec<(usize, String)>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-verifies every non-blank line; parse and check failures are both
/// reported per line.
pub fn verify_jsonl<R: BufRead>(input: R) -> io::Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rep.total += 1;
        let res = serde_json::from_str::<DecompositionRecord>(&line)
            .map_err(|e| format!("parse: {e}"))
            .and_then(|r| r.verify().map_err(|e| e.to_string()));
        match res {
            Ok(_) => rep.passed += 1,
            Err(why) => rep.failures.push((i + 1, why)),
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table2_small_prime() {
        let ts = table2_triples(&nat(29), None, &FactorConfig::default()).unwrap();
        assert!(ts.iter().any(|t| t.alpha == nat(1) && t.dprime == nat(2) && t.b == nat(4) && t.c == nat(8)));
        let csv = csv_string(&TABLE2_HEADER, &table2_rows(&ts));
        assert!(csv.starts_with("#,alpha,b',c',g,b,c,delta,X,Y,N,A,B,C,d',OK\n"));
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",OK")));
    }

    #[test]
    fn density_formatting() {
        let lat = crate::lattice::AffineLattice::new(vec![3, 3, 3], vec![0, 0, 0]).unwrap();
        let rows = crate::lattice::density_experiment(&lat, &[30]);
        assert_eq!(density_rows(&rows), vec![vec!["30", "1000", "1000", "0"]]);
        let lat = crate::lattice::AffineLattice::new(vec![2, 1, 1], vec![0, 0, 0]).unwrap();
        let rows = crate::lattice::density_experiment(&lat, &[3]);
        assert_eq!(density_rows(&rows), vec![vec!["3", "9", "27/2", "9/2"]]);
    }

    #[test]
    fn verify_lines() {
        let good = r#"{"p":"29","a":"8","b":"116","c":"232","method":"ED2","params":{}}"#;
        let bad = r#"{"p":"29","a":"8","b":"116","c":"233","method":"ED2","params":{}}"#;
        let input = format!("{good}\n\n{bad}\nnot json\n");
        let rep = verify_jsonl(input.as_bytes()).unwrap();
        assert_eq!((rep.total, rep.passed), (3, 1));
        assert_eq!(rep.failures.iter().map(|f| f.0).collect::<Vec<_>>(), vec![3, 4]);
        assert!(verify_jsonl("".as_bytes()).unwrap().ok());
    }
}
