use std::collections::{BTreeMap, HashMap};

use super::{Backend, ClauseCollector, SatLit, SatSolver, SolveStatus};
use crate::error::{Error, Result};
use crate::nnf::{Assignment, NnfDag, Node, NodeId, VarId};

/// Index of a variable copy inside a [`Session`]. Copy 0 is the base copy.
pub type CopyId = usize;

/// Which implication directions of a node definition are required.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
    Both,
}

impl Polarity {
    fn bits(self) -> u8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => 2,
            Polarity::Both => 3,
        }
    }
}

const POS: u8 = 1;
const NEG: u8 = 2;

/// Tseitin encoding of DAG nodes into one solver instance.
///
/// Variables can be renamed per copy: a copy created with
/// [`Session::add_copy`] gets fresh solver variables for the variables
/// accepted by its predicate and shares all others with copy 0.
pub struct Session<'a> {
    dag: &'a NnfDag,
    backend: &'a Backend,
    solver: Box<dyn SatSolver + 'a>,
    fresh: Vec<Box<dyn Fn(VarId) -> bool + 'a>>,
    vars: HashMap<(CopyId, VarId), SatLit>,
    nodes: HashMap<(CopyId, NodeId), (SatLit, u8)>,
    true_lit: Option<SatLit>,
    full: bool,
}

impl<'a> Session<'a> {
    pub fn new(dag: &'a NnfDag, backend: &'a Backend) -> Self {
        Self::with_solver(dag, backend, backend.solver())
    }

    pub fn with_solver(
        dag: &'a NnfDag,
        backend: &'a Backend,
        solver: Box<dyn SatSolver + 'a>,
    ) -> Self {
        Session {
            dag,
            backend,
            solver,
            fresh: vec![Box::new(|_| false)],
            vars: HashMap::new(),
            nodes: HashMap::new(),
            true_lit: None,
            full: false,
        }
    }

    /// Emit both implication directions for every encoded node.
    pub fn full_encoding(mut self) -> Self {
        self.full = true;
        self
    }

    pub fn dag(&self) -> &'a NnfDag {
        self.dag
    }

    pub fn add_copy(&mut self, fresh: impl Fn(VarId) -> bool + 'a) -> CopyId {
        self.fresh.push(Box::new(fresh));
        self.fresh.len() - 1
    }

    pub fn new_var(&mut self) -> SatLit {
        SatLit::new(self.solver.new_var(), true)
    }

    pub fn add_clause(&mut self, lits: &[SatLit]) {
        self.solver.add_clause(lits);
    }

    pub fn add_equiv(&mut self, a: SatLit, b: SatLit) {
        self.add_clause(&[!a, b]);
        self.add_clause(&[a, !b]);
    }

    pub fn true_lit(&mut self) -> SatLit {
        if let Some(t) = self.true_lit {
            return t;
        }
        let t = self.new_var();
        self.add_clause(&[t]);
        self.true_lit = Some(t);
        t
    }

    fn owner(&self, copy: CopyId, v: VarId) -> CopyId {
        if copy != 0 && (self.fresh[copy])(v) {
            copy
        } else {
            0
        }
    }

    /// Solver literal of a specification variable in `copy`.
    pub fn var_lit(&mut self, copy: CopyId, v: VarId) -> SatLit {
        let key = (self.owner(copy, v), v);
        if let Some(&l) = self.vars.get(&key) {
            return l;
        }
        let l = self.new_var();
        self.vars.insert(key, l);
        l
    }

    pub fn lit_of(&mut self, copy: CopyId, v: VarId, positive: bool) -> SatLit {
        self.var_lit(copy, v).with_sign(positive)
    }

    /// Literal equivalent (in the required directions) to `root` in `copy`.
    pub fn encode(&mut self, copy: CopyId, root: NodeId, polarity: Polarity) -> SatLit {
        let want = if self.full { 3 } else { polarity.bits() };
        match self.dag.node(root) {
            Node::True => return self.true_lit(),
            Node::False => return !self.true_lit(),
            Node::Lit(l) => return self.lit_of(copy, l.var, l.positive),
            _ => {}
        }
        if let Some(&(l, done)) = self.nodes.get(&(copy, root)) {
            if done & want == want {
                return l;
            }
        }
        let cone = self.dag.reachable(&[root]);
        let mut need: HashMap<NodeId, u8> = HashMap::new();
        need.insert(root, want);
        for &id in cone.iter().rev() {
            let done = self.nodes.get(&(copy, id)).map_or(0, |e| e.1);
            let n = need.get(&id).copied().unwrap_or(0) & !done;
            if n == 0 {
                continue;
            }
            for &c in self.dag.node(id).children() {
                *need.entry(c).or_insert(0) |= n;
            }
        }
        for &id in &cone {
            let (is_and, kids) = match self.dag.node(id) {
                Node::And(c) => (true, c),
                Node::Or(c) => (false, c),
                _ => continue,
            };
            let done = self.nodes.get(&(copy, id)).map_or(0, |e| e.1);
            let n = need.get(&id).copied().unwrap_or(0) & !done;
            if n == 0 {
                continue;
            }
            let t = match self.nodes.get(&(copy, id)) {
                Some(&(l, _)) => l,
                None => self.new_var(),
            };
            let kid_lits: Vec<SatLit> = kids.iter().map(|&k| self.child_lit(copy, k)).collect();
            // And, positive: t -> c_k;  negative: (all c_k) -> t.
            // Or,  positive: t -> (some c_k);  negative: c_k -> t.
            if is_and {
                if n & POS != 0 {
                    for &c in &kid_lits {
                        self.add_clause(&[!t, c]);
                    }
                }
                if n & NEG != 0 {
                    let mut cl: Vec<SatLit> = kid_lits.iter().map(|&c| !c).collect();
                    cl.push(t);
                    self.add_clause(&cl);
                }
            } else {
                if n & POS != 0 {
                    let mut cl = kid_lits.clone();
                    cl.push(!t);
                    self.add_clause(&cl);
                }
                if n & NEG != 0 {
                    for &c in &kid_lits {
                        self.add_clause(&[t, !c]);
                    }
                }
            }
            self.nodes.insert((copy, id), (t, done | n));
        }
        self.nodes[&(copy, root)].0
    }

    fn child_lit(&mut self, copy: CopyId, k: NodeId) -> SatLit {
        match self.dag.node(k) {
            Node::True => self.true_lit(),
            Node::False => !self.true_lit(),
            Node::Lit(l) => self.lit_of(copy, l.var, l.positive),
            _ => self.nodes[&(copy, k)].0,
        }
    }

    /// Constrain `root` to `value` in `copy`.
    pub fn assert_node(&mut self, copy: CopyId, root: NodeId, value: bool) {
        let pol = if value {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        let l = self.encode(copy, root, pol);
        self.add_clause(&[l.with_sign(value)]);
    }

    /// `Ok(true)` for satisfiable, `Ok(false)` for unsatisfiable.
    pub fn solve(&mut self, assumptions: &[SatLit]) -> Result<bool> {
        self.backend.count_call();
        match self.solver.solve(assumptions) {
            SolveStatus::Sat => Ok(true),
            SolveStatus::Unsat => Ok(false),
            SolveStatus::Unknown => Err(Error::Timeout("SAT query interrupted".into())),
        }
    }

    /// Model value; variables never handed to the solver read as false.
    pub fn model_value(&self, copy: CopyId, v: VarId) -> bool {
        let key = (self.owner(copy, v), v);
        self.vars.get(&key).is_some_and(|&l| self.solver.value(l))
    }

    pub fn lit_value(&self, l: SatLit) -> bool {
        self.solver.value(l)
    }

    pub fn model(&self, copy: CopyId, vars: impl IntoIterator<Item = VarId>) -> Assignment {
        vars.into_iter()
            .map(|v| (v, self.model_value(copy, v)))
            .collect()
    }
}

/// Plain CNF produced by [`tseitin`].
#[derive(Clone, Debug)]
pub struct CnfEncoding {
    pub num_vars: u32,
    pub clauses: Vec<Vec<SatLit>>,
    /// Definition literal of every encoded root and gate.
    pub def_map: BTreeMap<NodeId, SatLit>,
    pub input_map: BTreeMap<VarId, u32>,
}

/// Tseitin encoding of the cones of `roots` (base copy). With
/// `polarity_aware` only the positive direction is emitted.
pub fn tseitin(dag: &NnfDag, roots: &[NodeId], polarity_aware: bool) -> CnfEncoding {
    let backend = Backend::default();
    let mut sink = ClauseCollector::default();
    let (def_map, input_map) = {
        let mut s = Session::with_solver(dag, &backend, Box::new(&mut sink));
        if !polarity_aware {
            s = s.full_encoding();
        }
        let mut defs = BTreeMap::new();
        for &r in roots {
            let l = s.encode(0, r, Polarity::Positive);
            defs.insert(r, l);
        }
        for ((copy, id), (l, _)) in s.nodes.iter() {
            if *copy == 0 {
                defs.insert(*id, *l);
            }
        }
        let inputs = s.vars.iter().map(|((_, v), l)| (*v, l.var())).collect();
        (defs, inputs)
    };
    CnfEncoding {
        num_vars: sink.num_vars,
        clauses: sink.clauses,
        def_map,
        input_map,
    }
}

impl SatSolver for &mut ClauseCollector {
    fn new_var(&mut self) -> u32 {
        (**self).new_var()
    }
    fn add_clause(&mut self, lits: &[SatLit]) {
        (**self).add_clause(lits)
    }
    fn solve(&mut self, a: &[SatLit]) -> SolveStatus {
        (**self).solve(a)
    }
    fn value(&self, l: SatLit) -> bool {
        (**self).value(l)
    }
}
