//! QDIMACS reading and writing. Only `∀Y ∃X` prefixes are accepted.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::Serialize;

use super::{Clause, ClauseSet};
use crate::error::{Error, Result};
use crate::nnf::{Literal, Signature};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FreeVarPolicy {
    /// Unquantified variables become inputs.
    #[default]
    Universal,
    Reject,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ParseReport {
    /// Line numbers of clauses dropped as tautologies.
    pub tautologies: Vec<usize>,
    pub duplicates_merged: usize,
    /// Unquantified variables, treated as inputs.
    pub free_vars: Vec<u32>,
    pub warnings: Vec<String>,
}

#[derive(PartialEq)]
enum Block {
    None,
    Forall,
    Exists,
}

pub fn parse_qdimacs(text: &str, policy: FreeVarPolicy) -> Result<(ClauseSet, ParseReport)> {
    let mut report = ParseReport::default();
    let mut header: Option<(u32, usize)> = None;
    let mut universals: Vec<u32> = Vec::new();
    let mut existentials: Vec<u32> = Vec::new();
    let mut quantified: BTreeSet<u32> = BTreeSet::new();
    let mut last_block = Block::None;
    let mut raw_clauses: Vec<(usize, Vec<i64>)> = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_line = 0;

    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let first = toks.next().unwrap();
        if first == "p" {
            if header.is_some() {
                return Err(Error::parse(line_no, "duplicate problem line"));
            }
            let fmt = toks.next();
            let v = toks.next().and_then(|t| t.parse::<u32>().ok());
            let c = toks.next().and_then(|t| t.parse::<usize>().ok());
            match (fmt, v, c, toks.next()) {
                (Some("cnf"), Some(v), Some(c), None) => header = Some((v, c)),
                _ => {
                    return Err(Error::parse(
                        line_no,
                        "malformed header, expected `p cnf <vars> <clauses>`",
                    ))
                }
            }
            continue;
        }
        let (nvars, _) =
            header.ok_or_else(|| Error::parse(line_no, "content before `p cnf` header"))?;
        if first == "a" || first == "e" {
            if !raw_clauses.is_empty() || !pending.is_empty() {
                return Err(Error::parse(line_no, "quantifier block after clauses"));
            }
            let block = if first == "a" {
                Block::Forall
            } else {
                Block::Exists
            };
            if block == Block::Forall && last_block == Block::Exists {
                return Err(Error::parse(
                    line_no,
                    "only a single forall-exists alternation is supported",
                ));
            }
            let mut terminated = false;
            for t in toks {
                let v: i64 = t
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad token `{t}`")))?;
                if v == 0 {
                    terminated = true;
                    break;
                }
                if v < 0 || v as u32 > nvars {
                    return Err(Error::parse(line_no, format!("variable {v} out of range")));
                }
                if !quantified.insert(v as u32) {
                    return Err(Error::parse(
                        line_no,
                        format!("variable {v} quantified twice"),
                    ));
                }
                if block == Block::Forall {
                    universals.push(v as u32);
                } else {
                    existentials.push(v as u32);
                }
            }
            if !terminated {
                return Err(Error::parse(line_no, "quantifier block not 0-terminated"));
            }
            last_block = block;
            continue;
        }
        for t in std::iter::once(first).chain(toks) {
            let l: i64 = t
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad token `{t}`")))?;
            if l.unsigned_abs() > nvars as u64 {
                return Err(Error::parse(line_no, format!("literal {l} out of range")));
            }
            if pending.is_empty() {
                pending_line = line_no;
            }
            if l == 0 {
                raw_clauses.push((pending_line, std::mem::take(&mut pending)));
            } else {
                pending.push(l);
            }
        }
    }
    let (_, declared) = header.ok_or_else(|| Error::parse(0, "missing `p cnf` header"))?;
    if !pending.is_empty() {
        return Err(Error::parse(pending_line, "clause not 0-terminated"));
    }
    if raw_clauses.len() != declared {
        report.warnings.push(format!(
            "header declares {declared} clauses, found {}",
            raw_clauses.len()
        ));
    }

    let mut free: BTreeSet<u32> = BTreeSet::new();
    for (_, c) in &raw_clauses {
        for l in c {
            let v = l.unsigned_abs() as u32;
            if !quantified.contains(&v) {
                free.insert(v);
            }
        }
    }
    if !free.is_empty() {
        if policy == FreeVarPolicy::Reject {
            return Err(Error::parse(0, format!("unquantified variables {free:?}")));
        }
        log::warn!("treating unquantified variables {free:?} as inputs");
        report
            .warnings
            .push(format!("unquantified variables {free:?} treated as inputs"));
        report.free_vars = free.iter().copied().collect();
        universals.extend(free.iter().copied());
    }

    let sig = Signature::new(existentials, universals);
    let mut clauses = Vec::new();
    let mut seen = BTreeSet::new();
    for (line_no, c) in raw_clauses {
        let lits = c.iter().map(|&l| {
            let var = sig.lookup(l.unsigned_abs() as u32).expect("declared");
            Literal {
                var,
                positive: l > 0,
            }
        });
        match Clause::new(lits) {
            None => report.tautologies.push(line_no),
            Some(cl) => {
                if seen.insert(cl.clone()) {
                    clauses.push(cl);
                } else {
                    report.duplicates_merged += 1;
                }
            }
        }
    }
    Ok((ClauseSet::new(sig, clauses), report))
}

pub fn write_qdimacs(s: &ClauseSet) -> String {
    let sig = s.signature();
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", sig.max_orig(), s.len());
    if sig.num_inputs() > 0 {
        let vs: Vec<String> = sig.input_origs().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "a {} 0", vs.join(" "));
    }
    if sig.num_outputs() > 0 {
        let vs: Vec<String> = sig.output_origs().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "e {} 0", vs.join(" "));
    }
    for (_, c) in s.iter() {
        for l in c.lits() {
            let v = sig.orig(l.var) as i64;
            let _ = write!(out, "{} ", if l.positive { v } else { -v });
        }
        out.push_str("0\n");
    }
    out
}
