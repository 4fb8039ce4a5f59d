#![allow(dead_code)]

use std::collections::BTreeMap;

use synkc_core::cnf::{Clause, ClauseSet};
use synkc_core::oracle::{tt_of, TruthTable};
use synkc_core::{Assignment, NnfDag, Node, NodeId, Signature, VarId};

pub fn x(i: usize) -> VarId {
    VarId::output(i)
}

pub fn y(i: usize) -> VarId {
    VarId::input(i)
}

pub fn clause(lits: &[(VarId, bool)]) -> Clause {
    Clause::new(lits.iter().map(|&(v, p)| v.lit(p))).unwrap()
}

pub fn or_of(d: &mut NnfDag, lits: &[(VarId, bool)]) -> NodeId {
    let l: Vec<NodeId> = lits.iter().map(|&(v, p)| d.var(v, p)).collect();
    d.disjoin(l)
}

/// K = (x1 | x2) & (-x2 | y1) & (-y1 | y2)
pub fn k_clauses() -> ClauseSet {
    ClauseSet::new(
        Signature::anonymous(2, 2),
        [
            clause(&[(x(1), true), (x(2), true)]),
            clause(&[(x(2), false), (y(1), true)]),
            clause(&[(y(1), false), (y(2), true)]),
        ],
    )
}

pub fn k_dag() -> (NnfDag, NodeId) {
    let mut d = NnfDag::new(Signature::anonymous(2, 2));
    let k = k_clauses().to_nnf(&mut d);
    (d, k)
}

/// H = (x1 | x2 | y1) & (-x1 | (-x2 & y2))
pub fn h_dag() -> (NnfDag, NodeId) {
    let mut d = NnfDag::new(Signature::anonymous(2, 2));
    let c1 = or_of(&mut d, &[(x(1), true), (x(2), true), (y(1), true)]);
    let nx1 = d.var(x(1), false);
    let nx2 = d.var(x(2), false);
    let y2 = d.var(y(2), true);
    let inner = d.and2(nx2, y2);
    let c2 = d.or2(nx1, inner);
    let h = d.and2(c1, c2);
    (d, h)
}

/// G = (-x1 | x2 | y1) & (x1 | -x2) & (x1 | -y1) & (x2 | y2)
pub fn g_clauses() -> ClauseSet {
    ClauseSet::new(
        Signature::anonymous(2, 2),
        [
            clause(&[(x(1), false), (x(2), true), (y(1), true)]),
            clause(&[(x(1), true), (x(2), false)]),
            clause(&[(x(1), true), (y(1), false)]),
            clause(&[(x(2), true), (y(2), true)]),
        ],
    )
}

/// Direct evaluation of an NNF where every literal's value is supplied by
/// `lit`; used to evaluate reducts without building them.
pub fn eval_lits(d: &NnfDag, root: NodeId, lit: &dyn Fn(VarId, bool) -> bool) -> bool {
    let mut memo: BTreeMap<NodeId, bool> = BTreeMap::new();
    fn go(
        d: &NnfDag,
        n: NodeId,
        lit: &dyn Fn(VarId, bool) -> bool,
        memo: &mut BTreeMap<NodeId, bool>,
    ) -> bool {
        if let Some(&v) = memo.get(&n) {
            return v;
        }
        let v = match d.node(n) {
            Node::False => false,
            Node::True => true,
            Node::Lit(l) => lit(l.var, l.positive),
            Node::And(c) => c.iter().all(|&k| go(d, k, lit, memo)),
            Node::Or(c) => c.iter().any(|&k| go(d, k, lit, memo)),
        };
        memo.insert(n, v);
        v
    }
    go(d, root, lit, &mut memo)
}

/// Truth table of the `i`-th reduct with the remaining bars read as
/// negations, computed literal by literal from the original formula: both
/// literals of `x_j` for `j < i` evaluate to 1.
pub fn tt_unbarred_reduct(d: &NnfDag, f: NodeId, i: usize) -> TruthTable {
    let supp: Vec<VarId> = d
        .support(f)
        .into_iter()
        .filter(|v| !(v.is_output() && v.index() < i))
        .collect();
    TruthTable::from_fn(supp, |a: &Assignment| {
        eval_lits(d, f, &|v, pos| {
            if v.is_output() && v.index() < i {
                true
            } else {
                a.get(v).unwrap() == pos
            }
        })
    })
    .unwrap()
}

/// Oracle form of the reduct characterisation: for every `i`,
/// `exists x1..xi . F` equals the `(i+1)`-th unbarred reduct.
pub fn oracle_synnnf(d: &NnfDag, f: NodeId) -> bool {
    let n = d.num_outputs();
    let tf = tt_of(d, f).unwrap();
    (1..=n).all(|i| {
        let q = (1..=i).map(x).collect();
        synkc_core::oracle::tt_exists(&tf, &q).equivalent(&tt_unbarred_reduct(d, f, i + 1))
    })
}

pub fn all_assignments(vars: &[VarId]) -> Vec<Assignment> {
    let k = vars.len();
    (0..1usize << k)
        .map(|idx| {
            vars.iter()
                .enumerate()
                .map(|(p, &v)| (v, idx >> (k - 1 - p) & 1 == 1))
                .collect()
        })
        .collect()
}

/// θ by enumeration: whenever `F` holds with `x = a`, flipping `x`, keeping
/// every other undefined output and choosing the defined outputs so that
/// their definitions hold, still satisfies `F`.
pub fn oracle_theta(
    s: &ClauseSet,
    fdefs: &synkc_core::refine::FDefSystem,
    xv: VarId,
    a: bool,
) -> bool {
    let sig = s.signature();
    let defined: Vec<VarId> = fdefs.defined().into_iter().collect();
    let free: Vec<VarId> = sig
        .outputs()
        .chain(sig.inputs())
        .filter(|v| !defined.contains(v))
        .collect();
    for base in all_assignments(&free) {
        if base.get(xv) != Some(a) {
            continue;
        }
        for t in all_assignments(&defined) {
            let mut full = base.clone();
            for (v, b) in t.iter() {
                full.set(v, b);
            }
            if !s.evaluate(&full).unwrap() {
                continue;
            }
            // F(X, Y) holds with x = a; every completion of X' must work
            for t2 in all_assignments(&defined) {
                let mut primed = base.clone().with(xv, !a);
                for (v, b) in t2.iter() {
                    primed.set(v, b);
                }
                if fdefs.eval(&primed).unwrap() && !s.evaluate(&primed).unwrap() {
                    return false;
                }
            }
            break;
        }
    }
    true
}
