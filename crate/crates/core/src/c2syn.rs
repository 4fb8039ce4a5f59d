//! The recursive CNF to SynNNF compiler.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cnf::{clause_graph_mccs, ClauseSet};
use crate::error::Result;
use crate::nnf::{Binding, NnfDag, NodeId, Replacement, VarId};
use crate::refine::{def_rails, fd_refine, get_def_ckt, FDefSystem};
use crate::sat::{is_sat, is_tautology, semantically_independent, Backend, SatVerdict};
use crate::skolem::{error_formula_check, gacks_skolem_over, skolem_to_synnnf};

#[derive(Clone, Debug)]
pub struct CompileOptions {
    /// Above this many outputs the Skolem attempt is skipped below the top
    /// level.
    pub gacks_cap: usize,
    pub always_try_gacks: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            gacks_cap: 64,
            always_try_gacks: false,
        }
    }
}

/// How the sub-result rooted at a node was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Degenerate,
    DefCkt,
    GacksExact,
    Branch,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CompileStats {
    pub calls: u64,
    pub max_level: usize,
    pub branches: u64,
    pub degenerate_exits: u64,
    pub def_ckt_exits: u64,
    pub gacks_attempts: u64,
    pub gacks_exits: u64,
    pub fd_defs_found: u64,
    pub pivots: u64,
}

#[derive(Clone, Debug)]
pub struct CompileResult {
    pub dag: NnfDag,
    pub root: NodeId,
    pub provenance: BTreeMap<NodeId, Provenance>,
    pub stats: CompileStats,
}

/// Compiler state; keeps its statistics readable after a failed run.
pub struct Compiler<'a> {
    dag: NnfDag,
    backend: &'a Backend,
    opts: CompileOptions,
    num_outputs: usize,
    pub stats: CompileStats,
    pub provenance: BTreeMap<NodeId, Provenance>,
}

impl<'a> Compiler<'a> {
    pub fn new(s: &ClauseSet, backend: &'a Backend, opts: CompileOptions) -> Self {
        Compiler {
            dag: NnfDag::new(s.signature().clone()),
            backend,
            opts,
            num_outputs: s.signature().num_outputs(),
            stats: CompileStats::default(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn dag(&self) -> &NnfDag {
        &self.dag
    }

    pub fn run(
        mut self,
        s: &ClauseSet,
    ) -> std::result::Result<CompileResult, (crate::Error, CompileStats)> {
        match self.c2syn(s, &FDefSystem::new(), 0) {
            Ok(root) => {
                self.dag.set_root("Ftilde", root);
                Ok(CompileResult {
                    dag: self.dag,
                    root,
                    provenance: self.provenance,
                    stats: self.stats,
                })
            }
            Err(e) => Err((e, self.stats)),
        }
    }

    /// `F[X := Ψ(Y)]`: an input-only formula equivalent to `exists X . F`
    /// when Ψ is a Skolem vector for `F`. Conjoined to the circuit exits so
    /// that every sub-result implies its clauses, which the branch
    /// recombination relies on.
    fn realisability(
        &mut self,
        f: NodeId,
        rails: impl Iterator<Item = (VarId, (NodeId, NodeId))>,
    ) -> NodeId {
        let binding: Binding = rails
            .map(|(v, (pos, neg))| (v, Replacement::Rails { pos, neg }))
            .collect();
        self.dag.substitute(f, &binding)
    }

    fn tag(&mut self, id: NodeId, p: Provenance) -> NodeId {
        self.provenance.insert(id, p);
        id
    }

    fn c2syn(&mut self, s: &ClauseSet, fdefs: &FDefSystem, level: usize) -> Result<NodeId> {
        assert!(
            level <= self.num_outputs,
            "recursion level {level} exceeds |X| = {}",
            self.num_outputs
        );
        self.stats.calls += 1;
        self.stats.max_level = self.stats.max_level.max(level);
        let be = self.backend;
        let outs = s.output_support();
        let f = s.to_nnf(&mut self.dag);

        let model = match is_sat(&self.dag, be, &[(f, true)])? {
            SatVerdict::Unsat => {
                self.stats.degenerate_exits += 1;
                return Ok(self.tag(NodeId::FALSE, Provenance::Degenerate));
            }
            SatVerdict::Sat(m) => m,
        };
        if is_tautology(&self.dag, be, f)? {
            self.stats.degenerate_exits += 1;
            return Ok(self.tag(NodeId::TRUE, Provenance::Degenerate));
        }
        if semantically_independent(&self.dag, be, f, &s.input_support())? {
            let lits: Vec<NodeId> = outs
                .iter()
                .map(|&v| self.dag.var(v, model.get(v).unwrap_or(false)))
                .collect();
            let r = self.dag.conjoin(lits);
            self.stats.degenerate_exits += 1;
            return Ok(self.tag(r, Provenance::Degenerate));
        }
        if semantically_independent(&self.dag, be, f, &outs)? {
            // the input-only residue rather than 1, so the result implies S
            let mut rest = s.clone();
            for &v in &outs {
                rest = rest.cofactor(v, false);
            }
            let r = rest.to_nnf(&mut self.dag);
            self.stats.degenerate_exits += 1;
            return Ok(self.tag(r, Provenance::Degenerate));
        }

        let before = fdefs.len();
        let refined = fd_refine(&mut self.dag, be, s, fdefs)?;
        self.stats.pivots += refined.pivots.len() as u64;
        self.stats.fd_defs_found += (refined.fdefs.len() - before - refined.pivots.len()) as u64;
        let s1 = refined.clauses;
        let defs = refined.fdefs;
        let open: BTreeSet<VarId> = outs
            .iter()
            .copied()
            .filter(|v| !defs.contains(*v))
            .collect();
        if open.is_empty() {
            let fun = defs.project(&outs);
            let rails = def_rails(&mut self.dag, &fun)?;
            let ckt = get_def_ckt(&mut self.dag, &fun)?;
            let fp = s1.to_nnf(&mut self.dag);
            let realisable = self.realisability(fp, rails.into_iter());
            let r = self.dag.and2(ckt, realisable);
            self.stats.def_ckt_exits += 1;
            return Ok(self.tag(r, Provenance::DefCkt));
        }

        if level == 0 || outs.len() <= self.opts.gacks_cap || self.opts.always_try_gacks {
            self.stats.gacks_attempts += 1;
            let fp = s1.to_nnf(&mut self.dag);
            let order: Vec<VarId> = outs.iter().copied().collect();
            let sv = gacks_skolem_over(&mut self.dag, fp, &order);
            if error_formula_check(&self.dag, be, fp, &sv)?.is_correct() {
                let ckt = skolem_to_synnnf(&mut self.dag, &sv);
                let rails = sv
                    .outputs
                    .iter()
                    .enumerate()
                    .map(|(p, &v)| (v, (sv.pos[p], sv.neg[p])));
                let rails: Vec<_> = rails.collect();
                let realisable = self.realisability(fp, rails.into_iter());
                let r = self.dag.and2(ckt, realisable);
                self.stats.gacks_exits += 1;
                return Ok(self.tag(r, Provenance::GacksExact));
            }
        }

        let x = choose_output_var(&s1, &open);
        let (mut p1, mut p2, p3) = branch_partition(&s1, x);
        // With x pure the empty side would compile to 1 and lose the
        // clauses it shares a component with.
        if p1.is_empty() || p2.is_empty() {
            let both: BTreeSet<usize> = p1.union(&p2).copied().collect();
            p1 = both.clone();
            p2 = both;
        }
        self.stats.branches += 1;
        let bound = if self.num_outputs < 63 {
            1u64 << self.num_outputs
        } else {
            u64::MAX
        };
        assert!(self.stats.branches <= bound, "more than 2^|X| branches");

        let sub = |part: &BTreeSet<usize>, fix: Option<bool>| -> (ClauseSet, FDefSystem) {
            let base = s1.restrict_to(part);
            let defs_here = defs.project(&base.support());
            match fix {
                Some(v) => {
                    let c = base.cofactor(x, v);
                    let d = defs_here.restrict(x, v).project(&c.support());
                    (c, d)
                }
                None => (base, defs_here),
            }
        };
        let (c1, d1) = sub(&p1, Some(false));
        let (c2, d2) = sub(&p2, Some(true));
        let (c3, d3) = sub(&p3, None);
        let t1 = self.c2syn(&c1, &d1, level + 1)?;
        let t2 = self.c2syn(&c2, &d2, level + 1)?;
        let t3 = self.c2syn(&c3, &d3, level + 1)?;
        let ite = self.dag.ite_var(x, t2, t1);
        let r = self.dag.and2(t3, ite);
        Ok(self.tag(r, Provenance::Branch))
    }
}

/// Compile with fresh state.
pub fn compile(s: &ClauseSet, backend: &Backend, opts: CompileOptions) -> Result<CompileResult> {
    Compiler::new(s, backend, opts).run(s).map_err(|(e, _)| e)
}

/// Static Jeroslow-Wang score `Σ 2^-|C|` over the clauses mentioning the
/// variable; ties go to the lowest index.
pub fn choose_output_var(s: &ClauseSet, candidates: &BTreeSet<VarId>) -> VarId {
    assert!(!candidates.is_empty(), "no branching candidates");
    let mut score: BTreeMap<VarId, f64> = candidates.iter().map(|&v| (v, 0.0)).collect();
    for (_, c) in s.iter() {
        let w = (-(c.len() as f64)).exp2();
        for v in c.vars() {
            if let Some(e) = score.get_mut(&v) {
                *e += w;
            }
        }
    }
    let mut best = *candidates.iter().next().unwrap();
    for (&v, &sc) in &score {
        if sc > score[&best] {
            best = v;
        }
    }
    best
}

/// Clause index sets `(S1, S2, S3)`: clauses sharing a component with a
/// clause containing `x`, with `-x`, and the rest.
pub fn branch_partition(
    s: &ClauseSet,
    x: VarId,
) -> (BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>) {
    let mccs = clause_graph_mccs(s);
    let touching = |positive: bool| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (i, c) in s.iter() {
            if c.contains(x.lit(positive)) {
                out.extend(mccs.part_of(i).unwrap().iter().copied());
            }
        }
        out
    };
    let s1 = touching(true);
    let s2 = touching(false);
    let s3 = s
        .iter()
        .map(|(i, _)| i)
        .filter(|i| !s1.contains(i) && !s2.contains(i))
        .collect();
    (s1, s2, s3)
}
