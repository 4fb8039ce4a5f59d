//! Hash-consed NNF DAGs.
//!
//! All formulas live in a single append-only arena ([`NnfDag`]). Nodes are
//! numbered topologically (children always have smaller ids than their
//! parents) and are kept in simplified form at construction time: constants
//! are absorbed, duplicate children are removed and single-child gates
//! collapse to the child. Two structurally identical nodes always share one
//! id.

mod io;

pub use io::{read_nnf, write_nnf, NnfFile};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    Output,
    Input,
    /// The fresh variable standing for a negated output in the positive form.
    BarOutput,
}

/// A variable of a specification. Indices are 1-based positions in the
/// output sequence `X` (for `Output`/`BarOutput`) or the input sequence `Y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    kind: VarKind,
    index: u32,
}

impl VarId {
    pub fn new(kind: VarKind, index: usize) -> Self {
        assert!(index >= 1, "variable indices are 1-based");
        VarId {
            kind,
            index: index as u32,
        }
    }

    pub fn output(index: usize) -> Self {
        Self::new(VarKind::Output, index)
    }

    pub fn input(index: usize) -> Self {
        Self::new(VarKind::Input, index)
    }

    pub fn bar(index: usize) -> Self {
        Self::new(VarKind::BarOutput, index)
    }

    pub fn kind(self) -> VarKind {
        self.kind
    }

    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn is_output(self) -> bool {
        self.kind == VarKind::Output
    }

    pub fn is_input(self) -> bool {
        self.kind == VarKind::Input
    }

    pub fn lit(self, positive: bool) -> Literal {
        Literal {
            var: self,
            positive,
        }
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Output => write!(f, "x{}", self.index),
            VarKind::Input => write!(f, "y{}", self.index),
            VarKind::BarOutput => write!(f, "xbar{}", self.index),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl std::ops::Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "-{}", self.var)
        }
    }
}

/// The input/output partition of a specification, with the original
/// (DIMACS) index of every variable. Position `i-1` of `outputs` holds the
/// original index of `x_i`; the order of `outputs` is the output sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    outputs: Vec<u32>,
    inputs: Vec<u32>,
}

impl Signature {
    pub fn new(outputs: Vec<u32>, inputs: Vec<u32>) -> Self {
        Signature { outputs, inputs }
    }

    /// Outputs numbered `1..=n`, inputs numbered `n+1..=n+m`.
    pub fn anonymous(n: usize, m: usize) -> Self {
        Signature {
            outputs: (1..=n as u32).collect(),
            inputs: (n as u32 + 1..=(n + m) as u32).collect(),
        }
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn outputs(&self) -> impl Iterator<Item = VarId> + '_ {
        (1..=self.outputs.len()).map(VarId::output)
    }

    pub fn inputs(&self) -> impl Iterator<Item = VarId> + '_ {
        (1..=self.inputs.len()).map(VarId::input)
    }

    pub fn output_origs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn input_origs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn orig(&self, v: VarId) -> u32 {
        match v.kind {
            VarKind::Output | VarKind::BarOutput => self.outputs[v.index() - 1],
            VarKind::Input => self.inputs[v.index() - 1],
        }
    }

    pub fn lookup(&self, orig: u32) -> Option<VarId> {
        if let Some(p) = self.outputs.iter().position(|&o| o == orig) {
            return Some(VarId::output(p + 1));
        }
        self.inputs
            .iter()
            .position(|&o| o == orig)
            .map(|p| VarId::input(p + 1))
    }

    pub fn max_orig(&self) -> u32 {
        self.outputs
            .iter()
            .chain(&self.inputs)
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn contains(&self, v: VarId) -> bool {
        match v.kind {
            VarKind::Output | VarKind::BarOutput => v.index() <= self.outputs.len(),
            VarKind::Input => v.index() <= self.inputs.len(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(u32);

impl NodeId {
    pub const FALSE: NodeId = NodeId(0);
    pub const TRUE: NodeId = NodeId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn constant(value: bool) -> NodeId {
        if value {
            NodeId::TRUE
        } else {
            NodeId::FALSE
        }
    }

    pub fn is_const(self) -> bool {
        self.0 < 2
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    False,
    True,
    Lit(Literal),
    And(Box<[NodeId]>),
    Or(Box<[NodeId]>),
}

impl Node {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::And(c) | Node::Or(c) => c,
            _ => &[],
        }
    }
}

/// What a variable is replaced by during [`NnfDag::substitute`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Replacement {
    Const(bool),
    /// Positive occurrences become the node, negative ones its negation.
    Node(NodeId),
    /// Dual rail: positive occurrences become `pos`, negative ones `neg`.
    /// The caller guarantees `neg` is the complement of `pos`.
    Rails {
        pos: NodeId,
        neg: NodeId,
    },
}

pub type Binding = BTreeMap<VarId, Replacement>;

/// A (partial) map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: BTreeMap<VarId, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: VarId, value: bool) {
        self.values.insert(v, value);
    }

    pub fn with(mut self, v: VarId, value: bool) -> Self {
        self.set(v, value);
        self
    }

    pub fn get(&self, v: VarId) -> Option<bool> {
        self.values.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restriction to the variables accepted by `keep`.
    pub fn project(&self, keep: impl Fn(VarId) -> bool) -> Assignment {
        Assignment {
            values: self
                .values
                .iter()
                .filter(|(v, _)| keep(**v))
                .map(|(&v, &b)| (v, b))
                .collect(),
        }
    }

    /// Witness map keyed by original variable index.
    pub fn to_orig_map(&self, sig: &Signature) -> BTreeMap<u32, bool> {
        self.values
            .iter()
            .filter(|(v, _)| v.kind() != VarKind::BarOutput)
            .map(|(&v, &b)| (sig.orig(v), b))
            .collect()
    }
}

impl FromIterator<(VarId, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, bool)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

/// Multi-rooted, hash-consed NNF DAG arena.
#[derive(Clone, Debug)]
pub struct NnfDag {
    sig: Signature,
    nodes: Vec<Node>,
    interned: HashMap<Node, NodeId>,
    roots: Vec<(String, NodeId)>,
    neg_cache: HashMap<NodeId, NodeId>,
    pos_form_cache: HashMap<NodeId, NodeId>,
    subst_cache: HashMap<Binding, HashMap<NodeId, NodeId>>,
    work: u64,
}

impl NnfDag {
    pub fn new(sig: Signature) -> Self {
        let mut dag = NnfDag {
            sig,
            nodes: Vec::new(),
            interned: HashMap::new(),
            roots: Vec::new(),
            neg_cache: HashMap::new(),
            pos_form_cache: HashMap::new(),
            subst_cache: HashMap::new(),
            work: 0,
        };
        dag.intern(Node::False);
        dag.intern(Node::True);
        dag.neg_cache.insert(NodeId::FALSE, NodeId::TRUE);
        dag.neg_cache.insert(NodeId::TRUE, NodeId::FALSE);
        dag
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn num_outputs(&self) -> usize {
        self.sig.num_outputs()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    /// Number of nodes in the arena, reachable or not.
    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes visited by substitution and negation so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.interned.insert(node, id);
        id
    }

    pub fn constant(&self, value: bool) -> NodeId {
        NodeId::constant(value)
    }

    pub fn literal(&mut self, lit: Literal) -> NodeId {
        assert!(self.sig.contains(lit.var), "{} not declared", lit.var);
        self.intern(Node::Lit(lit))
    }

    pub fn var(&mut self, v: VarId, positive: bool) -> NodeId {
        self.literal(v.lit(positive))
    }

    fn gate(&mut self, is_and: bool, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        let (absorbing, neutral) = if is_and {
            (NodeId::FALSE, NodeId::TRUE)
        } else {
            (NodeId::TRUE, NodeId::FALSE)
        };
        let mut kids = Vec::new();
        for c in children {
            debug_assert!(c.index() < self.nodes.len());
            if c == absorbing {
                return absorbing;
            }
            if c != neutral {
                kids.push(c);
            }
        }
        kids.sort_unstable();
        kids.dedup();
        match kids.len() {
            0 => neutral,
            1 => kids[0],
            _ => {
                let kids = kids.into_boxed_slice();
                self.intern(if is_and {
                    Node::And(kids)
                } else {
                    Node::Or(kids)
                })
            }
        }
    }

    /// Simplified conjunction. An empty child list is rejected.
    pub fn and(&mut self, children: &[NodeId]) -> Result<NodeId> {
        if children.is_empty() {
            return Err(Error::EmptyArity { op: "And" });
        }
        Ok(self.gate(true, children.iter().copied()))
    }

    /// Simplified disjunction. An empty child list is rejected.
    pub fn or(&mut self, children: &[NodeId]) -> Result<NodeId> {
        if children.is_empty() {
            return Err(Error::EmptyArity { op: "Or" });
        }
        Ok(self.gate(false, children.iter().copied()))
    }

    /// Conjunction with the empty conjunction being true.
    pub fn conjoin(&mut self, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        self.gate(true, children)
    }

    /// Disjunction with the empty disjunction being false.
    pub fn disjoin(&mut self, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        self.gate(false, children)
    }

    pub fn and2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.gate(true, [a, b])
    }

    pub fn or2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.gate(false, [a, b])
    }

    /// `(v & on) | (-v & off)`.
    pub fn ite_var(&mut self, v: VarId, on: NodeId, off: NodeId) -> NodeId {
        let pos = self.var(v, true);
        let neg = self.var(v, false);
        let a = self.and2(pos, on);
        let b = self.and2(neg, off);
        self.or2(a, b)
    }

    pub fn set_root(&mut self, name: impl Into<String>, id: NodeId) {
        let name = name.into();
        if let Some(slot) = self.roots.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = id;
        } else {
            self.roots.push((name, id));
        }
    }

    pub fn root(&self, name: &str) -> Option<NodeId> {
        self.roots
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, id)| *id)
    }

    pub fn roots(&self) -> &[(String, NodeId)] {
        &self.roots
    }

    /// Ids reachable from `roots`, ascending (hence children before parents).
    pub fn reachable(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = roots.to_vec();
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            out.push(id);
            stack.extend(self.nodes[id.index()].children().iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// Node count `|F|` of the sub-DAG under `roots`.
    pub fn size(&self, roots: &[NodeId]) -> usize {
        self.reachable(roots).len()
    }

    pub fn edge_count(&self, roots: &[NodeId]) -> usize {
        self.reachable(roots)
            .iter()
            .map(|&id| self.node(id).children().len())
            .sum()
    }

    pub fn support(&self, root: NodeId) -> BTreeSet<VarId> {
        self.support_of(&[root])
    }

    pub fn support_of(&self, roots: &[NodeId]) -> BTreeSet<VarId> {
        self.reachable(roots)
            .into_iter()
            .filter_map(|id| match self.node(id) {
                Node::Lit(l) => Some(l.var),
                _ => None,
            })
            .collect()
    }

    pub fn literals(&self, root: NodeId) -> BTreeSet<Literal> {
        self.reachable(&[root])
            .into_iter()
            .filter_map(|id| match self.node(id) {
                Node::Lit(l) => Some(*l),
                _ => None,
            })
            .collect()
    }

    pub fn evaluate(&self, root: NodeId, assignment: &Assignment) -> Result<bool> {
        self.evaluate_with(root, |v| assignment.get(v))
    }

    pub fn evaluate_with(
        &self,
        root: NodeId,
        value: impl Fn(VarId) -> Option<bool>,
    ) -> Result<bool> {
        let order = self.reachable(&[root]);
        let mut vals: HashMap<NodeId, bool> = HashMap::with_capacity(order.len());
        for id in order {
            let v = match self.node(id) {
                Node::False => false,
                Node::True => true,
                Node::Lit(l) => value(l.var).ok_or(Error::MissingVariable(l.var))? == l.positive,
                Node::And(c) => c.iter().all(|k| vals[k]),
                Node::Or(c) => c.iter().any(|k| vals[k]),
            };
            vals.insert(id, v);
        }
        Ok(vals[&root])
    }

    /// Positive form: every negative output literal `-x_i` becomes `xbar_i`.
    pub fn positive_form(&mut self, root: NodeId) -> NodeId {
        if let Some(&r) = self.pos_form_cache.get(&root) {
            return r;
        }
        for id in self.reachable(&[root]) {
            if self.pos_form_cache.contains_key(&id) {
                continue;
            }
            let new = match self.node(id).clone() {
                Node::Lit(l) if l.var.is_output() && !l.positive => {
                    self.var(VarId::bar(l.var.index()), true)
                }
                Node::And(c) => {
                    let kids: Vec<_> = c.iter().map(|k| self.pos_form_cache[k]).collect();
                    self.gate(true, kids)
                }
                Node::Or(c) => {
                    let kids: Vec<_> = c.iter().map(|k| self.pos_form_cache[k]).collect();
                    self.gate(false, kids)
                }
                _ => id,
            };
            self.pos_form_cache.insert(id, new);
        }
        self.pos_form_cache[&root]
    }

    /// NNF complement by pushing negation to the leaves. Every node is
    /// dualised at most once per arena.
    pub fn negate(&mut self, root: NodeId) -> NodeId {
        if let Some(&r) = self.neg_cache.get(&root) {
            return r;
        }
        for id in self.reachable(&[root]) {
            if self.neg_cache.contains_key(&id) {
                continue;
            }
            self.work += 1;
            let new = match self.node(id).clone() {
                Node::False => NodeId::TRUE,
                Node::True => NodeId::FALSE,
                Node::Lit(l) => self.literal(!l),
                Node::And(c) => {
                    let kids: Vec<_> = c.iter().map(|k| self.neg_cache[k]).collect();
                    self.gate(false, kids)
                }
                Node::Or(c) => {
                    let kids: Vec<_> = c.iter().map(|k| self.neg_cache[k]).collect();
                    self.gate(true, kids)
                }
            };
            self.neg_cache.insert(id, new);
            self.neg_cache.entry(new).or_insert(id);
        }
        self.neg_cache[&root]
    }

    /// Simultaneous substitution with constant propagation. Results are
    /// memoised per binding for the lifetime of the arena.
    pub fn substitute(&mut self, root: NodeId, binding: &Binding) -> NodeId {
        if binding.is_empty() {
            return root;
        }
        let mut memo = self.subst_cache.remove(binding).unwrap_or_default();
        if let Some(&r) = memo.get(&root) {
            self.subst_cache.insert(binding.clone(), memo);
            return r;
        }
        for id in self.reachable(&[root]) {
            if memo.contains_key(&id) {
                continue;
            }
            self.work += 1;
            let new = match self.node(id).clone() {
                Node::Lit(l) => match binding.get(&l.var) {
                    None => id,
                    Some(Replacement::Const(b)) => NodeId::constant(*b == l.positive),
                    Some(Replacement::Node(n)) => {
                        if l.positive {
                            *n
                        } else {
                            self.negate(*n)
                        }
                    }
                    Some(Replacement::Rails { pos, neg }) => {
                        if l.positive {
                            *pos
                        } else {
                            *neg
                        }
                    }
                },
                Node::And(c) => {
                    let kids: Vec<_> = c.iter().map(|k| memo[k]).collect();
                    self.gate(true, kids)
                }
                Node::Or(c) => {
                    let kids: Vec<_> = c.iter().map(|k| memo[k]).collect();
                    self.gate(false, kids)
                }
                _ => id,
            };
            memo.insert(id, new);
        }
        let r = memo[&root];
        self.subst_cache.insert(binding.clone(), memo);
        r
    }

    /// Substitute constants only.
    pub fn restrict(
        &mut self,
        root: NodeId,
        values: impl IntoIterator<Item = (VarId, bool)>,
    ) -> NodeId {
        let binding: Binding = values
            .into_iter()
            .map(|(v, b)| (v, Replacement::Const(b)))
            .collect();
        self.substitute(root, &binding)
    }

    /// Copy the cone of `root` from another arena over the same signature.
    pub fn import(&mut self, other: &NnfDag, root: NodeId) -> NodeId {
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        for id in other.reachable(&[root]) {
            let new = match other.node(id) {
                Node::False => NodeId::FALSE,
                Node::True => NodeId::TRUE,
                Node::Lit(l) => self.literal(*l),
                Node::And(c) => {
                    let kids: Vec<_> = c.iter().map(|k| map[k]).collect();
                    self.gate(true, kids)
                }
                Node::Or(c) => {
                    let kids: Vec<_> = c.iter().map(|k| map[k]).collect();
                    self.gate(false, kids)
                }
            };
            map.insert(id, new);
        }
        map[&root]
    }

    /// One definition per line, `nK = ...`, shared nodes printed once.
    pub fn to_flat_text(&self, roots: &[(String, NodeId)]) -> String {
        use std::fmt::Write;
        let ids: Vec<NodeId> = roots.iter().map(|(_, r)| *r).collect();
        let mut out = String::new();
        let name = |id: NodeId| -> String {
            match self.node(id) {
                Node::False => "0".into(),
                Node::True => "1".into(),
                Node::Lit(l) => {
                    let o = self.sig.orig(l.var);
                    let base = if l.var.is_input() {
                        format!("y{o}")
                    } else {
                        format!("x{o}")
                    };
                    if l.positive {
                        base
                    } else {
                        format!("!{base}")
                    }
                }
                _ => format!("n{}", id.0),
            }
        };
        for id in self.reachable(&ids) {
            let (op, kids) = match self.node(id) {
                Node::And(c) => (" & ", c),
                Node::Or(c) => (" | ", c),
                _ => continue,
            };
            let body: Vec<String> = kids.iter().map(|&k| name(k)).collect();
            let _ = writeln!(out, "n{} = ({})", id.0, body.join(op));
        }
        for (n, r) in roots {
            let _ = writeln!(out, "{n} = {}", name(*r));
        }
        out
    }
}
