//! Brute-force reference semantics and fixture generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cnf::{Clause, ClauseSet};
use crate::error::{Error, Result};
use crate::nnf::{Assignment, NnfDag, NodeId, Signature, VarId};

pub const MAX_TT_VARS: usize = 22;

/// Enumerates all assignments to `vars`, first variable most significant.
fn for_each_assignment(vars: &[VarId], mut f: impl FnMut(usize, &Assignment)) {
    let k = vars.len();
    let mut a: Assignment = vars.iter().map(|&v| (v, false)).collect();
    for idx in 0..1usize << k {
        for (p, &v) in vars.iter().enumerate() {
            a.set(v, idx >> (k - 1 - p) & 1 == 1);
        }
        f(idx, &a);
    }
}

/// A packed truth table. Bit `i` holds the value under the assignment whose
/// binary expansion, first support variable most significant, is `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    support: Vec<VarId>,
    bits: Vec<u64>,
}

impl std::fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruthTable({:?}, ", self.support)?;
        for i in 0..self.rows() {
            write!(f, "{}", self.bit(i) as u8)?;
        }
        write!(f, ")")
    }
}

impl TruthTable {
    fn zeros(support: Vec<VarId>) -> Result<Self> {
        if support.len() > MAX_TT_VARS {
            return Err(Error::Unsupported(format!(
                "truth table over {} variables",
                support.len()
            )));
        }
        let words = (1usize << support.len()).div_ceil(64);
        Ok(TruthTable {
            support,
            bits: vec![0; words],
        })
    }

    pub fn constant(value: bool) -> Self {
        let mut t = TruthTable::zeros(Vec::new()).unwrap();
        t.set_bit(0, value);
        t
    }

    pub fn from_fn(support: Vec<VarId>, mut f: impl FnMut(&Assignment) -> bool) -> Result<Self> {
        let mut t = TruthTable::zeros(support)?;
        let vars = t.support.clone();
        for_each_assignment(&vars, |i, a| {
            if f(a) {
                t.set_bit(i, true);
            }
        });
        Ok(t)
    }

    pub fn support(&self) -> &[VarId] {
        &self.support
    }

    pub fn rows(&self) -> usize {
        1 << self.support.len()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn set_bit(&mut self, i: usize, v: bool) {
        if v {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    /// Value under `a`, which must cover the support.
    pub fn get(&self, a: &Assignment) -> Result<bool> {
        let k = self.support.len();
        let mut idx = 0;
        for (p, &v) in self.support.iter().enumerate() {
            if a.get(v).ok_or(Error::MissingVariable(v))? {
                idx |= 1 << (k - 1 - p);
            }
        }
        Ok(self.bit(idx))
    }

    pub fn count_ones(&self) -> usize {
        (0..self.rows()).filter(|&i| self.bit(i)).count()
    }

    pub fn is_true(&self) -> bool {
        self.count_ones() == self.rows()
    }

    pub fn is_false(&self) -> bool {
        self.count_ones() == 0
    }

    /// Re-tabulate over `support`, which must contain the current support.
    pub fn over(&self, support: &[VarId]) -> Result<TruthTable> {
        if let Some(&v) = self.support.iter().find(|v| !support.contains(v)) {
            return Err(Error::MissingVariable(v));
        }
        TruthTable::from_fn(support.to_vec(), |a| self.get(a).unwrap())
    }

    /// Semantic equivalence over the union of both supports.
    pub fn equivalent(&self, other: &TruthTable) -> bool {
        let u = union(&[&self.support, &other.support]);
        let (a, b) = (self.over(&u).unwrap(), other.over(&u).unwrap());
        a.bits == b.bits
    }

    /// `self -> other` for every assignment.
    pub fn implies(&self, other: &TruthTable) -> bool {
        let u = union(&[&self.support, &other.support]);
        let (a, b) = (self.over(&u).unwrap(), other.over(&u).unwrap());
        a.bits.iter().zip(&b.bits).all(|(x, y)| x & !y == 0)
    }

    pub fn restrict(&self, v: VarId, value: bool) -> TruthTable {
        let rest: Vec<VarId> = self.support.iter().copied().filter(|&u| u != v).collect();
        TruthTable::from_fn(rest, |a| self.get(&a.clone().with(v, value)).unwrap()).unwrap()
    }
}

fn union(lists: &[&[VarId]]) -> Vec<VarId> {
    let s: BTreeSet<VarId> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    s.into_iter().collect()
}

/// Exhaustive evaluation over the support of `root`, in variable order.
pub fn tt_of(dag: &NnfDag, root: NodeId) -> Result<TruthTable> {
    let supp: Vec<VarId> = dag.support(root).into_iter().collect();
    tt_of_over(dag, root, &supp)
}

pub fn tt_of_over(dag: &NnfDag, root: NodeId, support: &[VarId]) -> Result<TruthTable> {
    if let Some(v) = dag.support(root).into_iter().find(|v| !support.contains(v)) {
        return Err(Error::MissingVariable(v));
    }
    TruthTable::from_fn(support.to_vec(), |a| dag.evaluate(root, a).unwrap())
}

pub fn tt_of_clauses(s: &ClauseSet) -> Result<TruthTable> {
    let supp: Vec<VarId> = s.support().into_iter().collect();
    TruthTable::from_fn(supp, |a| s.evaluate(a).unwrap())
}

/// `exists vars . tt`, over the remaining support.
pub fn tt_exists(tt: &TruthTable, vars: &BTreeSet<VarId>) -> TruthTable {
    let keep: Vec<VarId> = tt
        .support
        .iter()
        .copied()
        .filter(|v| !vars.contains(v))
        .collect();
    let quant: Vec<VarId> = tt
        .support
        .iter()
        .copied()
        .filter(|v| vars.contains(v))
        .collect();
    TruthTable::from_fn(keep, |a| {
        let mut any = false;
        for_each_assignment(&quant, |_, q| {
            if !any {
                let mut full = a.clone();
                for (v, b) in q.iter() {
                    full.set(v, b);
                }
                any = tt.get(&full).unwrap();
            }
        });
        any
    })
    .unwrap()
}

/// Both refinement conditions by enumeration: (a) wherever `f` is
/// realisable so is `ftilde`, (b) wherever `f` is realisable every model of
/// `ftilde` is a model of `f`.
pub fn tt_refinement_conditions(ftilde: &TruthTable, f: &TruthTable) -> (bool, bool) {
    let all = union(&[&ftilde.support, &f.support]);
    let xs: BTreeSet<VarId> = all.iter().copied().filter(|v| v.is_output()).collect();
    let realisable = tt_exists(f, &xs);
    let a = realisable.implies(&tt_exists(ftilde, &xs));
    let premise = TruthTable::from_fn(all, |a| {
        realisable.get(a).unwrap() && ftilde.get(a).unwrap()
    })
    .unwrap();
    let b = premise.implies(f);
    (a, b)
}

pub fn tt_refines(ftilde: &TruthTable, f: &TruthTable) -> bool {
    let (a, b) = tt_refinement_conditions(ftilde, f);
    a && b
}

/// The Skolem contract: for every input assignment where `f` is
/// realisable, substituting the tables of `psi` satisfies `f`. Every output
/// of `f` needs a table and the tables may only mention inputs.
pub fn tt_skolem_correct(f: &TruthTable, psi: &BTreeMap<VarId, TruthTable>) -> Result<bool> {
    for t in psi.values() {
        if let Some(&v) = t.support.iter().find(|v| v.is_output()) {
            return Err(Error::Unsupported(format!(
                "Skolem table mentions output {v}"
            )));
        }
    }
    let outs: Vec<VarId> = f
        .support
        .iter()
        .copied()
        .filter(|v| v.is_output())
        .collect();
    if let Some(&v) = outs.iter().find(|v| !psi.contains_key(v)) {
        return Err(Error::MissingVariable(v));
    }
    let mut lists: Vec<&[VarId]> = psi.values().map(|t| t.support.as_slice()).collect();
    lists.push(&f.support);
    let ys: Vec<VarId> = union(&lists).into_iter().filter(|v| v.is_input()).collect();
    let exists = tt_exists(f, &outs.iter().copied().collect());
    let mut ok = true;
    for_each_assignment(&ys, |_, y| {
        if !ok || !exists.get(y).unwrap() {
            return;
        }
        let mut full = y.clone();
        for &x in &outs {
            full.set(x, psi[&x].get(y).unwrap());
        }
        ok = f.get(&full).unwrap();
    });
    Ok(ok)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpPrime {
    Or,
    Xor,
}

/// The family `(x1 op'1 f1) op1 (x2 op'2 f2) op2 ... (xn op'n fn) opn f_{n+1}`,
/// folded from the left. `fs` has `n + 1` entries and `f_i` may mention only
/// `x_{i+1}..x_n` and inputs. `ops[i]` is true for And.
pub fn gen_family(
    dag: &mut NnfDag,
    primes: &[OpPrime],
    ops: &[bool],
    fs: &[NodeId],
) -> Result<NodeId> {
    let n = primes.len();
    if n == 0 || ops.len() != n || fs.len() != n + 1 {
        return Err(Error::Unsupported(
            "family needs n op', n op and n+1 sub-formulas".into(),
        ));
    }
    for (i, &f) in fs.iter().enumerate() {
        if let Some(v) = dag
            .support(f)
            .into_iter()
            .find(|v| v.is_output() && v.index() <= i + 1)
        {
            return Err(Error::Unsupported(format!("f_{} mentions {v}", i + 1)));
        }
    }
    let mut acc: Option<NodeId> = None;
    for i in 0..=n {
        let term = if i < n {
            let x = VarId::output(i + 1);
            match primes[i] {
                OpPrime::Or => {
                    let l = dag.var(x, true);
                    dag.or2(l, fs[i])
                }
                OpPrime::Xor => {
                    let nf = dag.negate(fs[i]);
                    let px = dag.var(x, true);
                    let nx = dag.var(x, false);
                    let a = dag.and2(px, nf);
                    let b = dag.and2(nx, fs[i]);
                    dag.or2(a, b)
                }
            }
        } else {
            fs[n]
        };
        acc = Some(match acc {
            None => term,
            Some(prev) if ops[i - 1] => dag.and2(prev, term),
            Some(prev) => dag.or2(prev, term),
        });
    }
    Ok(acc.unwrap())
}

/// A random instance of the family with `op'` fixed and random `op_i` and
/// sub-formulas over the permitted variables.
pub fn random_family<R: Rng>(rng: &mut R, n: usize, m: usize, prime: OpPrime) -> (NnfDag, NodeId) {
    let mut dag = NnfDag::new(Signature::anonymous(n, m));
    let mut fs = Vec::with_capacity(n + 1);
    for i in 1..=n + 1 {
        let vars: Vec<VarId> = (i + 1..=n)
            .map(VarId::output)
            .chain((1..=m).map(VarId::input))
            .collect();
        let f = if vars.is_empty() {
            dag.constant(rng.gen())
        } else {
            random_over(&mut dag, rng, &vars, 3)
        };
        fs.push(f);
    }
    let ops: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let root = gen_family(&mut dag, &vec![prime; n], &ops, &fs).unwrap();
    (dag, root)
}

fn random_over<R: Rng>(dag: &mut NnfDag, rng: &mut R, vars: &[VarId], depth: usize) -> NodeId {
    if depth == 0 || rng.gen_bool(0.3) {
        let v = *vars.choose(rng).unwrap();
        return dag.var(v, rng.gen());
    }
    let k = rng.gen_range(2..=3);
    let kids: Vec<NodeId> = (0..k)
        .map(|_| random_over(dag, rng, vars, depth - 1))
        .collect();
    if rng.gen() {
        dag.conjoin(kids)
    } else {
        dag.disjoin(kids)
    }
}

fn all_vars(n: usize, m: usize) -> Vec<VarId> {
    (1..=n)
        .map(VarId::output)
        .chain((1..=m).map(VarId::input))
        .collect()
}

/// Unconstrained random NNF DAG. Sub-formulas are shared through a pool so
/// the result is a DAG rather than a tree.
pub fn random_nnf<R: Rng>(rng: &mut R, n: usize, m: usize, gates: usize) -> (NnfDag, NodeId) {
    let mut dag = NnfDag::new(Signature::anonymous(n, m));
    let vars = all_vars(n, m);
    let mut pool: Vec<NodeId> = vars
        .iter()
        .flat_map(|&v| [v.lit(true), v.lit(false)])
        .map(|l| dag.literal(l))
        .collect();
    let mut last = pool[rng.gen_range(0..pool.len())];
    for _ in 0..gates {
        let k = rng.gen_range(2..=3);
        let kids: Vec<NodeId> = (0..k).map(|_| *pool.choose(rng).unwrap()).collect();
        last = if rng.gen() {
            dag.conjoin(kids)
        } else {
            dag.disjoin(kids)
        };
        pool.push(last);
    }
    (dag, last)
}

/// Random DNNF: And children range over disjoint variable sets.
pub fn random_dnnf<R: Rng>(rng: &mut R, n: usize, m: usize, depth: usize) -> (NnfDag, NodeId) {
    let mut dag = NnfDag::new(Signature::anonymous(n, m));
    let vars = all_vars(n, m);
    let root = dnnf_rec(&mut dag, rng, vars, depth);
    (dag, root)
}

fn dnnf_rec<R: Rng>(dag: &mut NnfDag, rng: &mut R, mut vars: Vec<VarId>, depth: usize) -> NodeId {
    if depth == 0 || vars.len() == 1 || rng.gen_bool(0.15) {
        let v = *vars.choose(rng).unwrap();
        return dag.var(v, rng.gen());
    }
    if rng.gen() {
        vars.shuffle(rng);
        let cut = rng.gen_range(1..vars.len());
        let right = vars.split_off(cut);
        let a = dnnf_rec(dag, rng, vars, depth - 1);
        let b = dnnf_rec(dag, rng, right, depth - 1);
        dag.and2(a, b)
    } else {
        let a = dnnf_rec(dag, rng, vars.clone(), depth - 1);
        let b = dnnf_rec(dag, rng, vars, depth - 1);
        dag.or2(a, b)
    }
}

/// Random wDNNF: at each And one polarity per variable is fixed for the
/// whole subtree, so no complementary pair straddles its children.
pub fn random_wdnnf<R: Rng>(rng: &mut R, n: usize, m: usize, depth: usize) -> (NnfDag, NodeId) {
    let mut dag = NnfDag::new(Signature::anonymous(n, m));
    let allowed: BTreeMap<VarId, Option<bool>> =
        all_vars(n, m).into_iter().map(|v| (v, None)).collect();
    let root = wdnnf_rec(&mut dag, rng, &allowed, depth);
    (dag, root)
}

fn wdnnf_rec<R: Rng>(
    dag: &mut NnfDag,
    rng: &mut R,
    allowed: &BTreeMap<VarId, Option<bool>>,
    depth: usize,
) -> NodeId {
    if depth == 0 || rng.gen_bool(0.15) {
        let (&v, &pol) = allowed.iter().nth(rng.gen_range(0..allowed.len())).unwrap();
        return dag.var(v, pol.unwrap_or_else(|| rng.gen()));
    }
    if rng.gen() {
        let fixed: BTreeMap<VarId, Option<bool>> = allowed
            .iter()
            .map(|(&v, &p)| (v, Some(p.unwrap_or_else(|| rng.gen()))))
            .collect();
        let a = wdnnf_rec(dag, rng, &fixed, depth - 1);
        let b = wdnnf_rec(dag, rng, &fixed, depth - 1);
        dag.and2(a, b)
    } else {
        let a = wdnnf_rec(dag, rng, allowed, depth - 1);
        let b = wdnnf_rec(dag, rng, allowed, depth - 1);
        dag.or2(a, b)
    }
}

/// Random CNF with planted gate definitions. Some outputs are defined by
/// and/or/xor gates over lower-numbered outputs and inputs; the remaining
/// clauses are random with width 1 to 3.
pub fn random_cnf<R: Rng>(rng: &mut R, n: usize, m: usize, max_clauses: usize) -> ClauseSet {
    let sig = Signature::anonymous(n, m);
    let mut clauses: Vec<Clause> = Vec::new();
    let vars = all_vars(n, m);
    for i in 2..=n {
        if clauses.len() + 4 > max_clauses || !rng.gen_bool(0.4) {
            continue;
        }
        let x = VarId::output(i);
        let srcs: Vec<VarId> = (1..i)
            .map(VarId::output)
            .chain((1..=m).map(VarId::input))
            .collect();
        let a = srcs.choose(rng).unwrap().lit(rng.gen());
        let b = srcs.choose(rng).unwrap().lit(rng.gen());
        if a.var == b.var {
            continue;
        }
        let (xp, xn) = (x.lit(true), x.lit(false));
        let gate: Vec<Vec<crate::nnf::Literal>> = match rng.gen_range(0..3) {
            0 => vec![vec![xn, a], vec![xn, b], vec![xp, !a, !b]],
            1 => vec![vec![xp, !a], vec![xp, !b], vec![xn, a, b]],
            _ => vec![
                vec![xn, a, b],
                vec![xn, !a, !b],
                vec![xp, !a, b],
                vec![xp, a, !b],
            ],
        };
        clauses.extend(gate.into_iter().filter_map(Clause::new));
    }
    let extra = rng.gen_range(0..=max_clauses.saturating_sub(clauses.len()));
    for _ in 0..extra {
        let w = rng.gen_range(1..=3);
        let lits: Vec<_> = vars
            .choose_multiple(rng, w.min(vars.len()))
            .map(|v| v.lit(rng.gen()))
            .collect();
        if let Some(c) = Clause::new(lits) {
            clauses.push(c);
        }
    }
    ClauseSet::new(sig, clauses)
}
