//! Refinement for synthesis: the two-condition check, gate-pattern
//! discovery of functionally determined outputs, pivoting on outputs whose
//! θ formula is valid, and the circuit built from a definition system.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::cnf::{Clause, ClauseSet};
use crate::error::{Error, Result};
use crate::nnf::{Assignment, Literal, NnfDag, NodeId, VarId};
use crate::sat::{forall_exists_valid, Backend, CopyId, ForallExists, SatLit, Session};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateOp {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Identity,
    Const0,
    Const1,
}

impl GateOp {
    pub fn name(self) -> &'static str {
        match self {
            GateOp::And => "and",
            GateOp::Or => "or",
            GateOp::Nand => "nand",
            GateOp::Nor => "nor",
            GateOp::Xor => "xor",
            GateOp::Xnor => "xnor",
            GateOp::Not => "not",
            GateOp::Identity => "identity",
            GateOp::Const0 => "const0",
            GateOp::Const1 => "const1",
        }
    }
}

/// `op(args)`; arguments are literals, so `and(-a, b)` is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FDef {
    pub op: GateOp,
    pub args: Vec<Literal>,
}

impl fmt::Display for FDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|l| l.to_string()).collect();
        write!(f, "{}({})", self.op.name(), args.join(", "))
    }
}

impl FDef {
    pub fn constant(value: bool) -> FDef {
        FDef {
            op: if value {
                GateOp::Const1
            } else {
                GateOp::Const0
            },
            args: Vec::new(),
        }
    }

    pub fn new(op: GateOp, args: Vec<Literal>) -> Result<FDef> {
        let ok = match op {
            GateOp::And | GateOp::Or | GateOp::Nand | GateOp::Nor => !args.is_empty(),
            GateOp::Xor | GateOp::Xnor => args.len() == 2,
            GateOp::Not | GateOp::Identity => args.len() == 1,
            GateOp::Const0 | GateOp::Const1 => args.is_empty(),
        };
        if !ok {
            return Err(Error::InvalidDefs(format!(
                "{} with {} arguments",
                op.name(),
                args.len()
            )));
        }
        Ok(FDef { op, args })
    }

    pub fn output_args(&self) -> impl Iterator<Item = VarId> + '_ {
        self.args.iter().map(|l| l.var).filter(|v| v.is_output())
    }

    pub fn eval(&self, mut lit: impl FnMut(Literal) -> bool) -> bool {
        let mut vals = self.args.iter().map(|&l| lit(l));
        match self.op {
            GateOp::And => vals.all(|b| b),
            GateOp::Or => vals.any(|b| b),
            GateOp::Nand => !vals.all(|b| b),
            GateOp::Nor => !vals.any(|b| b),
            GateOp::Xor => vals.fold(false, |a, b| a ^ b),
            GateOp::Xnor => !vals.fold(false, |a, b| a ^ b),
            GateOp::Not => !vals.next().unwrap(),
            GateOp::Identity => vals.next().unwrap(),
            GateOp::Const0 => false,
            GateOp::Const1 => true,
        }
    }

    /// Both rails of `op(args)`, given both rails of every argument literal
    /// (`(node for l, node for -l)`).
    pub fn build(&self, dag: &mut NnfDag, args: &[(NodeId, NodeId)]) -> (NodeId, NodeId) {
        let pos: Vec<NodeId> = args.iter().map(|a| a.0).collect();
        let neg: Vec<NodeId> = args.iter().map(|a| a.1).collect();
        match self.op {
            GateOp::And => (dag.conjoin(pos), dag.disjoin(neg)),
            GateOp::Or => (dag.disjoin(pos), dag.conjoin(neg)),
            GateOp::Nand => (dag.disjoin(neg), dag.conjoin(pos)),
            GateOp::Nor => (dag.conjoin(neg), dag.disjoin(pos)),
            GateOp::Xor | GateOp::Xnor => {
                let (a, na, b, nb) = (pos[0], neg[0], pos[1], neg[1]);
                let l = dag.and2(a, nb);
                let r = dag.and2(na, b);
                let odd = dag.or2(l, r);
                let l = dag.and2(a, b);
                let r = dag.and2(na, nb);
                let even = dag.or2(l, r);
                if self.op == GateOp::Xor {
                    (odd, even)
                } else {
                    (even, odd)
                }
            }
            GateOp::Not => (neg[0], pos[0]),
            GateOp::Identity => (pos[0], neg[0]),
            GateOp::Const0 => (NodeId::FALSE, NodeId::TRUE),
            GateOp::Const1 => (NodeId::TRUE, NodeId::FALSE),
        }
    }

    /// The definition after fixing `v`, simplified back into one of the
    /// supported shapes.
    pub fn restrict(&self, v: VarId, value: bool) -> FDef {
        let fixed = |l: &Literal| (l.var == v).then_some(l.positive == value);
        if !self.args.iter().any(|l| l.var == v) {
            return self.clone();
        }
        match self.op {
            GateOp::And | GateOp::Or | GateOp::Nand | GateOp::Nor => {
                let conj = matches!(self.op, GateOp::And | GateOp::Nand);
                let inverted = matches!(self.op, GateOp::Nand | GateOp::Nor);
                let mut rest = Vec::new();
                for l in &self.args {
                    match fixed(l) {
                        // absorbing argument decides the gate
                        Some(c) if c != conj => return FDef::constant(c ^ inverted),
                        Some(_) => {}
                        None => rest.push(*l),
                    }
                }
                match rest.len() {
                    0 => FDef::constant(conj ^ inverted),
                    1 => FDef {
                        op: if inverted {
                            GateOp::Not
                        } else {
                            GateOp::Identity
                        },
                        args: rest,
                    },
                    _ => FDef {
                        op: self.op,
                        args: rest,
                    },
                }
            }
            GateOp::Xor | GateOp::Xnor => {
                let (c, other) = match fixed(&self.args[0]) {
                    Some(c) => (c, self.args[1]),
                    None => (fixed(&self.args[1]).unwrap(), self.args[0]),
                };
                let flip = c ^ (self.op == GateOp::Xnor);
                FDef {
                    op: if flip { GateOp::Not } else { GateOp::Identity },
                    args: vec![other],
                }
            }
            GateOp::Not => FDef::constant(!fixed(&self.args[0]).unwrap()),
            GateOp::Identity => FDef::constant(fixed(&self.args[0]).unwrap()),
            GateOp::Const0 | GateOp::Const1 => self.clone(),
        }
    }
}

/// An acyclic system of functional definitions `x ⇔ op(args)`. The set of
/// defined outputs is `T`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FDefSystem {
    defs: BTreeMap<VarId, FDef>,
}

impl FDefSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.defs.contains_key(&v)
    }

    pub fn get(&self, v: VarId) -> Option<&FDef> {
        self.defs.get(&v)
    }

    pub fn defined(&self) -> BTreeSet<VarId> {
        self.defs.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &FDef)> + '_ {
        self.defs.iter().map(|(&v, d)| (v, d))
    }

    /// Whether `v ⇔ def` would close a dependency cycle.
    pub fn would_cycle(&self, v: VarId, def: &FDef) -> bool {
        let mut stack: Vec<VarId> = def.output_args().collect();
        let mut seen = BTreeSet::new();
        while let Some(u) = stack.pop() {
            if u == v {
                return true;
            }
            if !seen.insert(u) {
                continue;
            }
            if let Some(d) = self.defs.get(&u) {
                stack.extend(d.output_args());
            }
        }
        false
    }

    pub fn insert(&mut self, v: VarId, def: FDef) -> Result<()> {
        if !v.is_output() {
            return Err(Error::InvalidDefs(format!("{v} is not an output")));
        }
        if self.defs.contains_key(&v) {
            return Err(Error::InvalidDefs(format!("{v} already defined")));
        }
        if self.would_cycle(v, &def) {
            return Err(Error::InvalidDefs(format!("{v} <-> {def} is cyclic")));
        }
        self.defs.insert(v, def);
        Ok(())
    }

    /// Defined outputs with every definition after the definitions of its
    /// output arguments.
    pub fn topo_order(&self) -> Vec<VarId> {
        let mut order = Vec::new();
        let mut done = BTreeSet::new();
        for &root in self.defs.keys() {
            let mut stack = vec![(root, false)];
            while let Some((v, expanded)) = stack.pop() {
                if done.contains(&v) {
                    continue;
                }
                if expanded {
                    done.insert(v);
                    order.push(v);
                    continue;
                }
                stack.push((v, true));
                for u in self.defs[&v].output_args() {
                    if self.defs.contains_key(&u) && !done.contains(&u) {
                        stack.push((u, false));
                    }
                }
            }
        }
        order
    }

    /// Every definition with `v` fixed to `value`.
    pub fn restrict(&self, v: VarId, value: bool) -> FDefSystem {
        FDefSystem {
            defs: self
                .defs
                .iter()
                .filter(|(&u, _)| u != v)
                .map(|(&u, d)| (u, d.restrict(v, value)))
                .collect(),
        }
    }

    /// Definitions of outputs in `support` whose output arguments also stay
    /// in `support`.
    pub fn project(&self, support: &BTreeSet<VarId>) -> FDefSystem {
        FDefSystem {
            defs: self
                .defs
                .iter()
                .filter(|(u, d)| {
                    support.contains(u) && d.output_args().all(|a| support.contains(&a))
                })
                .map(|(&u, d)| (u, d.clone()))
                .collect(),
        }
    }

    /// `Fun_T = ⋀ (x ⇔ op(args))` over the plain variables.
    pub fn fun_node(&self, dag: &mut NnfDag) -> NodeId {
        let mut parts = Vec::new();
        for (&v, d) in &self.defs {
            let args: Vec<(NodeId, NodeId)> = d
                .args
                .iter()
                .map(|&l| (dag.literal(l), dag.literal(!l)))
                .collect();
            let (p, n) = d.build(dag, &args);
            parts.push(dag.ite_var(v, p, n));
        }
        dag.conjoin(parts)
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        for (&v, d) in &self.defs {
            let mut missing = None;
            let val = d.eval(|l| match a.get(l.var) {
                Some(b) => b == l.positive,
                None => {
                    missing = Some(l.var);
                    false
                }
            });
            if let Some(m) = missing {
                return Err(Error::MissingVariable(m));
            }
            let x = a.get(v).ok_or(Error::MissingVariable(v))?;
            if x != val {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for FDefSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, d) in &self.defs {
            writeln!(f, "{v} <-> {d}")?;
        }
        Ok(())
    }
}

/// Gate definitions read off the clause patterns of `s`, sorted by
/// (output index, argument count, arguments).
pub fn fd_candidates(s: &ClauseSet, skip: &BTreeSet<VarId>) -> Vec<(VarId, FDef)> {
    let present: HashSet<&Clause> = s.iter().map(|(_, c)| c).collect();
    let has_binary =
        |a: Literal, b: Literal| Clause::new([a, b]).is_some_and(|c| present.contains(&c));
    let open = |v: VarId| v.is_output() && !skip.contains(&v);
    let mut out: BTreeSet<(usize, usize, Vec<Literal>, VarId, FDef)> = BTreeSet::new();
    let mut push = |v: VarId, def: FDef| {
        out.insert((v.index(), def.args.len(), def.args.clone(), v, def));
    };
    let mut triples: HashMap<[VarId; 3], BTreeSet<&Clause>> = HashMap::new();

    for (_, c) in s.iter() {
        let lits = c.lits();
        if lits.len() == 1 && open(lits[0].var) {
            push(lits[0].var, FDef::constant(lits[0].positive));
        }
        if lits.len() == 3 {
            triples
                .entry([lits[0].var, lits[1].var, lits[2].var])
                .or_default()
                .insert(c);
        }
        if lits.len() < 2 {
            continue;
        }
        // (l | m1 | .. | mk) & ⋀ (-l | -mj)  gives  l <-> ⋀ -mj
        for (p, &l) in lits.iter().enumerate() {
            if !open(l.var) {
                continue;
            }
            let ms: Vec<Literal> = lits
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != p)
                .map(|(_, &m)| m)
                .collect();
            if !ms.iter().all(|&m| has_binary(!l, !m)) {
                continue;
            }
            let def = if ms.len() == 1 {
                // l <-> -m
                let m = ms[0];
                let op = if m.positive == l.positive {
                    GateOp::Not
                } else {
                    GateOp::Identity
                };
                FDef {
                    op,
                    args: vec![m.var.lit(true)],
                }
            } else {
                // x <-> and(-m) when l = x, x <-> or(m) when l = -x
                let args: Vec<Literal> = if l.positive {
                    ms.iter().map(|&m| !m).collect()
                } else {
                    ms.clone()
                };
                let all_neg = args.iter().all(|a| !a.positive);
                let op = match (l.positive, all_neg) {
                    (true, false) => GateOp::And,
                    (true, true) => GateOp::Nor,
                    (false, false) => GateOp::Or,
                    (false, true) => GateOp::Nand,
                };
                let args = if all_neg {
                    args.iter().map(|&a| !a).collect()
                } else {
                    args
                };
                FDef { op, args }
            };
            push(l.var, def);
        }
    }

    for (vars, cls) in triples {
        if cls.len() != 4 {
            continue;
        }
        // each clause forbids the assignment falsifying all its literals
        let parities: BTreeSet<bool> = cls
            .iter()
            .map(|c| c.lits().iter().filter(|l| !l.positive).count() % 2 == 1)
            .collect();
        if parities.len() != 1 {
            continue;
        }
        let forbidden_odd = parities.contains(&true);
        let op = if forbidden_odd {
            GateOp::Xor
        } else {
            GateOp::Xnor
        };
        for (p, &v) in vars.iter().enumerate() {
            if !open(v) {
                continue;
            }
            let args: Vec<Literal> = vars
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != p)
                .map(|(_, &u)| u.lit(true))
                .collect();
            push(v, FDef { op, args });
        }
    }
    out.into_iter().map(|(_, _, _, v, d)| (v, d)).collect()
}

/// Add every matched definition that keeps the system acyclic; the first
/// candidate per output wins. Returns the newly defined outputs.
pub fn find_fd(s: &ClauseSet, fdefs: &mut FDefSystem) -> Vec<VarId> {
    let mut added = Vec::new();
    for (v, def) in fd_candidates(s, &fdefs.defined()) {
        if fdefs.contains(v) || fdefs.would_cycle(v, &def) {
            continue;
        }
        fdefs.insert(v, def).expect("checked acyclic");
        added.push(v);
    }
    added
}

/// Incremental decision procedure for θ over one clause set and one
/// definition system. Per output `x_j ∉ T` an activation literal switches
/// the equality `x_j ⇔ x'_j` on.
pub struct ThetaOracle<'a> {
    session: Session<'a>,
    primed: CopyId,
    act: BTreeMap<VarId, SatLit>,
}

impl<'a> ThetaOracle<'a> {
    /// `f` is `⟨S⟩`, `fun` the conjunction of the definitions of `defined`.
    pub fn new(
        dag: &'a NnfDag,
        backend: &'a Backend,
        f: NodeId,
        fun: NodeId,
        defined: &BTreeSet<VarId>,
    ) -> Self {
        let mut session = Session::new(dag, backend);
        let primed = session.add_copy(|v| v.is_output());
        session.assert_node(0, f, true);
        session.assert_node(primed, f, false);
        session.assert_node(primed, fun, true);
        let mut act = BTreeMap::new();
        for v in dag.support(f) {
            if v.is_output() && !defined.contains(&v) {
                let a = session.new_var();
                let x = session.var_lit(0, v);
                let xp = session.var_lit(primed, v);
                session.add_clause(&[!a, !x, xp]);
                session.add_clause(&[!a, x, !xp]);
                act.insert(v, a);
            }
        }
        ThetaOracle {
            session,
            primed,
            act,
        }
    }

    /// Whether `θ_{F,T,x,a}` is valid.
    pub fn is_tautology(&mut self, x: VarId, a: bool) -> Result<bool> {
        let mut assumps = vec![
            self.session.lit_of(0, x, a),
            self.session.lit_of(self.primed, x, !a),
        ];
        assumps.extend(self.act.iter().filter(|(&v, _)| v != x).map(|(_, &l)| l));
        Ok(!self.session.solve(&assumps)?)
    }
}

/// `θ_{F,T,x,a}` with `F = ⟨S⟩` and `T` the outputs defined in `fdefs`.
pub fn theta_tautology(
    dag: &mut NnfDag,
    backend: &Backend,
    s: &ClauseSet,
    fdefs: &FDefSystem,
    x: VarId,
    a: bool,
) -> Result<bool> {
    let f = s.to_nnf(dag);
    let fun = fdefs.fun_node(dag);
    ThetaOracle::new(dag, backend, f, fun, &fdefs.defined()).is_tautology(x, a)
}

#[derive(Clone, Debug)]
pub struct FdRefineResult {
    pub clauses: ClauseSet,
    pub fdefs: FDefSystem,
    /// Outputs fixed by pivoting, in order, with the value chosen.
    pub pivots: Vec<(VarId, bool)>,
    pub rounds: usize,
}

/// Alternate definition discovery and θ-pivoting until neither changes
/// anything. Each pivot is tested against the clause set produced by the
/// previous one.
pub fn fd_refine(
    dag: &mut NnfDag,
    backend: &Backend,
    s: &ClauseSet,
    fdefs: &FDefSystem,
) -> Result<FdRefineResult> {
    let outs: Vec<VarId> = s.output_support().into_iter().collect();
    let mut s = s.clone();
    let mut fdefs = fdefs.clone();
    let mut pivots = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        assert!(
            rounds <= outs.len() + 1,
            "definition rounds exceed |Out| + 1"
        );
        let mut changed = !find_fd(&s, &mut fdefs).is_empty();
        let mut next = 0;
        loop {
            let f = s.to_nnf(dag);
            let fun = fdefs.fun_node(dag);
            let defined = fdefs.defined();
            let found = {
                let mut oracle = ThetaOracle::new(dag, backend, f, fun, &defined);
                let mut found = None;
                for (p, &x) in outs.iter().enumerate().skip(next) {
                    if defined.contains(&x) {
                        continue;
                    }
                    if oracle.is_tautology(x, false)? {
                        found = Some((p, x, true));
                        break;
                    }
                    if oracle.is_tautology(x, true)? {
                        found = Some((p, x, false));
                        break;
                    }
                }
                found
            };
            let Some((p, x, value)) = found else { break };
            s = s.cofactor(x, value);
            s.push(Clause::unit(x.lit(value)));
            fdefs.insert(x, FDef::constant(value))?;
            pivots.push((x, value));
            changed = true;
            next = p + 1;
        }
        if !changed {
            break;
        }
    }
    Ok(FdRefineResult {
        clauses: s,
        fdefs,
        pivots,
        rounds,
    })
}

/// `⋀ ((xᵢ ∧ tᵢ) ∨ (¬xᵢ ∧ ¬tᵢ))` over the defined outputs, where `tᵢ` is the
/// definition with defined output arguments replaced by their circuits.
pub fn get_def_ckt(dag: &mut NnfDag, fdefs: &FDefSystem) -> Result<NodeId> {
    let rails = def_rails(dag, fdefs)?;
    let parts: Vec<NodeId> = fdefs
        .topo_order()
        .into_iter()
        .map(|v| {
            let (p, n) = rails[&v];
            dag.ite_var(v, p, n)
        })
        .collect();
    Ok(dag.conjoin(parts))
}

/// Each defined output's definition as an input-only circuit `(t, !t)`,
/// with defined arguments expanded in dependency order.
pub fn def_rails(
    dag: &mut NnfDag,
    fdefs: &FDefSystem,
) -> Result<BTreeMap<VarId, (NodeId, NodeId)>> {
    let mut rails: BTreeMap<VarId, (NodeId, NodeId)> = BTreeMap::new();
    for v in fdefs.topo_order() {
        let def = fdefs.get(v).unwrap();
        let mut args = Vec::with_capacity(def.args.len());
        for &l in &def.args {
            let (p, n) = if l.var.is_output() {
                *rails.get(&l.var).ok_or_else(|| {
                    Error::InvalidDefs(format!("{v} depends on undefined output {}", l.var))
                })?
            } else {
                (dag.var(l.var, true), dag.var(l.var, false))
            };
            args.push(if l.positive { (p, n) } else { (n, p) });
        }
        let t = def.build(dag, &args);
        rails.insert(v, t);
    }
    Ok(rails)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Holds,
    /// For (a): the input assignment. For (b): inputs plus the offending
    /// output values.
    Fails(Assignment),
    Timeout,
}

impl Condition {
    pub fn holds(&self) -> bool {
        matches!(self, Condition::Holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementReport {
    pub cond_a: Condition,
    pub cond_b: Condition,
}

impl RefinementReport {
    pub fn holds(&self) -> bool {
        self.cond_a.holds() && self.cond_b.holds()
    }

    pub fn timed_out(&self) -> bool {
        self.cond_a == Condition::Timeout || self.cond_b == Condition::Timeout
    }
}

fn timeout_as_condition(r: Result<Condition>) -> Result<Condition> {
    match r {
        Err(e) if e.is_timeout() => Ok(Condition::Timeout),
        r => r,
    }
}

/// Whether `ftilde` refines `f` for synthesis: (a) every input admitting
/// `f` admits `ftilde`, and (b) where `f` is realisable every output of
/// `ftilde` satisfies `f`.
pub fn check_refines(
    dag: &NnfDag,
    backend: &Backend,
    ftilde: NodeId,
    f: NodeId,
) -> Result<RefinementReport> {
    let cond_a = timeout_as_condition(forall_exists_valid(dag, backend, f, ftilde).map(
        |r| match r {
            ForallExists::Valid { .. } => Condition::Holds,
            ForallExists::CounterY(y) => Condition::Fails(y),
        },
    ))?;
    let cond_b = timeout_as_condition((|| {
        let mut s = Session::new(dag, backend);
        let primed = s.add_copy(|v| v.is_output());
        s.assert_node(0, f, true);
        s.assert_node(primed, ftilde, true);
        s.assert_node(primed, f, false);
        if !s.solve(&[])? {
            return Ok(Condition::Holds);
        }
        let sig = dag.signature();
        let mut w = s.model(0, sig.inputs());
        for v in sig.outputs() {
            w.set(v, s.model_value(primed, v));
        }
        Ok(Condition::Fails(w))
    })())?;
    Ok(RefinementReport { cond_a, cond_b })
}
