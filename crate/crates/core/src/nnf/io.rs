//! c2d-style `.nnf` text format.
//!
//! ```text
//! nnf v e n
//! c var <id> input|output <orig-index>
//! c root <name> <node>
//! L <signed var id>
//! A c i1 .. ic
//! O j c i1 .. ic
//! ```
//!
//! Node ids are 0-based line order. `A 0` is true and `O 0 0` is false. The
//! `c var` lines fix the input/output partition and, through their order,
//! the output sequence. Files without `c var` lines are read with the
//! signature supplied by the caller, or with every variable as an output.

use std::collections::HashMap;
use std::fmt::Write;

use super::{Literal, NnfDag, Node, NodeId, Signature, VarKind};
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct NnfFile {
    pub dag: NnfDag,
    pub roots: Vec<(String, NodeId)>,
}

impl NnfFile {
    /// The root named `name`, or the only/last root.
    pub fn root(&self, name: &str) -> Option<NodeId> {
        self.roots
            .iter()
            .find(|(n, _)| n == name)
            .or_else(|| self.roots.last())
            .map(|(_, id)| *id)
    }
}

pub fn write_nnf(dag: &NnfDag, roots: &[(String, NodeId)]) -> String {
    let ids: Vec<NodeId> = roots.iter().map(|(_, r)| *r).collect();
    let order = dag.reachable(&ids);
    let pos: HashMap<NodeId, usize> = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let sig = dag.signature();
    let edges: usize = order.iter().map(|&id| dag.node(id).children().len()).sum();

    let mut out = String::new();
    let _ = writeln!(out, "nnf {} {} {}", order.len(), edges, sig.max_orig());
    for v in sig.outputs() {
        let o = sig.orig(v);
        let _ = writeln!(out, "c var {o} output {o}");
    }
    for v in sig.inputs() {
        let o = sig.orig(v);
        let _ = writeln!(out, "c var {o} input {o}");
    }
    for (name, r) in roots {
        let _ = writeln!(out, "c root {} {}", name, pos[r]);
    }
    for &id in &order {
        match dag.node(id) {
            Node::True => out.push_str("A 0\n"),
            Node::False => out.push_str("O 0 0\n"),
            Node::Lit(l) => {
                assert!(
                    l.var.kind() != VarKind::BarOutput,
                    "positive-form literals are not serialisable"
                );
                let v = sig.orig(l.var) as i64;
                let _ = writeln!(out, "L {}", if l.positive { v } else { -v });
            }
            Node::And(c) | Node::Or(c) => {
                let tag = if matches!(dag.node(id), Node::And(_)) {
                    "A"
                } else {
                    "O 0"
                };
                let _ = write!(out, "{} {}", tag, c.len());
                for k in c.iter() {
                    let _ = write!(out, " {}", pos[k]);
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn read_nnf(text: &str, hint: Option<&Signature>) -> Result<NnfFile> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut var_decls: Vec<(u32, bool, u32)> = Vec::new();
    let mut root_decls: Vec<(String, usize, usize)> = Vec::new();
    let mut node_lines: Vec<(usize, Vec<&str>)> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some(&first) = toks.first() else { continue };
        match first {
            "nnf" => {
                if header.is_some() {
                    return Err(Error::parse(line_no, "duplicate header"));
                }
                if toks.len() != 4 {
                    return Err(Error::parse(line_no, "header must be `nnf v e n`"));
                }
                let nums: Vec<usize> = toks[1..]
                    .iter()
                    .map(|t| {
                        t.parse()
                            .map_err(|_| Error::parse(line_no, "bad header number"))
                    })
                    .collect::<Result<_>>()?;
                header = Some((nums[0], nums[1], nums[2]));
            }
            "c" => match toks.get(1).copied() {
                Some("var") if toks.len() == 5 => {
                    let id: u32 = toks[2]
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad var id"))?;
                    let is_output = match toks[3] {
                        "output" => true,
                        "input" => false,
                        other => {
                            return Err(Error::parse(
                                line_no,
                                format!("unknown var kind `{other}`"),
                            ))
                        }
                    };
                    let orig: u32 = toks[4]
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad orig index"))?;
                    var_decls.push((id, is_output, orig));
                }
                Some("root") if toks.len() == 4 => {
                    let id: usize = toks[3]
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad root id"))?;
                    root_decls.push((toks[2].to_string(), id, line_no));
                }
                _ => {}
            },
            "L" | "A" | "O" => {
                if header.is_none() {
                    return Err(Error::parse(line_no, "node before header"));
                }
                node_lines.push((line_no, toks));
            }
            other => return Err(Error::parse(line_no, format!("unexpected token `{other}`"))),
        }
    }
    let (v, e, n) = header.ok_or_else(|| Error::parse(0, "missing `nnf` header"))?;
    if node_lines.len() != v {
        return Err(Error::parse(
            0,
            format!("header declares {v} nodes, found {}", node_lines.len()),
        ));
    }

    // file variable id -> original index, and the signature
    let (sig, id_to_orig): (Signature, HashMap<u32, u32>) = if !var_decls.is_empty() {
        let outputs = var_decls.iter().filter(|d| d.1).map(|d| d.2).collect();
        let inputs = var_decls.iter().filter(|d| !d.1).map(|d| d.2).collect();
        (
            Signature::new(outputs, inputs),
            var_decls.iter().map(|d| (d.0, d.2)).collect(),
        )
    } else if let Some(h) = hint {
        let ids = h
            .output_origs()
            .iter()
            .chain(h.input_origs())
            .map(|&o| (o, o))
            .collect();
        (h.clone(), ids)
    } else {
        (
            Signature::new((1..=n as u32).collect(), vec![]),
            (1..=n as u32).map(|o| (o, o)).collect(),
        )
    };

    let mut dag = NnfDag::new(sig);
    let mut ids: Vec<NodeId> = Vec::with_capacity(v);
    let mut edge_total = 0usize;
    for (line_no, toks) in &node_lines {
        let line_no = *line_no;
        let num = |t: &str| -> Result<i64> {
            t.parse::<i64>()
                .map_err(|_| Error::parse(line_no, "bad number"))
        };
        let id = match toks[0] {
            "L" => {
                if toks.len() != 2 {
                    return Err(Error::parse(line_no, "literal line must be `L l`"));
                }
                let l = num(toks[1])?;
                if l == 0 {
                    return Err(Error::parse(line_no, "literal 0"));
                }
                let orig = id_to_orig
                    .get(&(l.unsigned_abs() as u32))
                    .copied()
                    .ok_or_else(|| {
                        Error::parse(line_no, format!("undeclared variable {}", l.abs()))
                    })?;
                let var = dag.signature().lookup(orig).ok_or_else(|| {
                    Error::parse(line_no, format!("variable {orig} not in signature"))
                })?;
                dag.literal(Literal {
                    var,
                    positive: l > 0,
                })
            }
            tag @ ("A" | "O") => {
                let skip = if tag == "O" { 2 } else { 1 };
                if toks.len() < skip + 1 {
                    return Err(Error::parse(line_no, "truncated gate line"));
                }
                let c = num(toks[skip])? as usize;
                if toks.len() != skip + 1 + c {
                    return Err(Error::parse(line_no, "child count mismatch"));
                }
                let mut kids = Vec::with_capacity(c);
                for t in &toks[skip + 1..] {
                    let k = num(t)? as usize;
                    if k >= ids.len() {
                        return Err(Error::parse(
                            line_no,
                            format!("child {k} is not an earlier node"),
                        ));
                    }
                    kids.push(ids[k]);
                }
                edge_total += c;
                if tag == "A" {
                    dag.conjoin(kids)
                } else {
                    dag.disjoin(kids)
                }
            }
            _ => unreachable!(),
        };
        ids.push(id);
    }
    if edge_total != e {
        log::warn!("header declares {e} edges, found {edge_total}");
    }

    let mut roots = Vec::new();
    for (name, id, line_no) in root_decls {
        let node = *ids
            .get(id)
            .ok_or_else(|| Error::parse(line_no, format!("root {id} out of range")))?;
        roots.push((name, node));
    }
    if roots.is_empty() {
        let last = *ids.last().ok_or_else(|| Error::parse(0, "empty DAG"))?;
        roots.push(("root".to_string(), last));
    }
    for (name, id) in &roots {
        dag.set_root(name.clone(), *id);
    }
    Ok(NnfFile { dag, roots })
}
