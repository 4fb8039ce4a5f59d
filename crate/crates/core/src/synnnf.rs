//! Reducts, ∧ᵢ-unrealizability and SynNNF membership, plus the syntactic
//! wDNNF/DNNF/dDNNF validators.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::nnf::{Assignment, Binding, Literal, NnfDag, Node, NodeId, Replacement, VarId};
use crate::sat::{is_sat, Backend, SatVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reduct {
    pub index: usize,
    pub root: NodeId,
}

fn check_index(i: usize, max: usize) -> Result<()> {
    if i == 0 || i > max {
        return Err(Error::IndexOutOfRange { index: i, max });
    }
    Ok(())
}

/// Binding that sets `x_j` and `xbar_j` to 1 for every `j < i`.
fn prefix_binding(i: usize) -> Binding {
    let mut b = Binding::new();
    for j in 1..i {
        b.insert(VarId::output(j), Replacement::Const(true));
        b.insert(VarId::bar(j), Replacement::Const(true));
    }
    b
}

/// `xbar_j -> -x_j` for every `j > i`.
fn unbar_above(dag: &mut NnfDag, i: usize, b: &mut Binding) {
    for j in i + 1..=dag.num_outputs() {
        let neg = dag.var(VarId::output(j), false);
        b.insert(VarId::bar(j), Replacement::Node(neg));
    }
}

/// The `i`-th reduct of the positive form of `f`, for `1 <= i <= n+1`.
pub fn reduct(dag: &mut NnfDag, f: NodeId, i: usize) -> Result<Reduct> {
    check_index(i, dag.num_outputs() + 1)?;
    let fhat = dag.positive_form(f);
    let root = dag.substitute(fhat, &prefix_binding(i));
    Ok(Reduct { index: i, root })
}

/// `alpha_i^{jk}`: the `i`-th reduct with `x_i := j`, `xbar_i := k` and the
/// remaining bar variables replaced by negated outputs.
pub fn alpha(dag: &mut NnfDag, f: NodeId, i: usize, j: bool, k: bool) -> Result<NodeId> {
    check_index(i, dag.num_outputs())?;
    let fhat = dag.positive_form(f);
    let mut b = prefix_binding(i);
    b.insert(VarId::output(i), Replacement::Const(j));
    b.insert(VarId::bar(i), Replacement::Const(k));
    unbar_above(dag, i, &mut b);
    Ok(dag.substitute(fhat, &b))
}

/// The `i`-th reduct with every remaining bar variable replaced by the
/// negated output. For `i = n+1` this is `F̂(1ⁿ,1ⁿ,Y)`.
pub fn unbarred_reduct(dag: &mut NnfDag, f: NodeId, i: usize) -> Result<NodeId> {
    check_index(i, dag.num_outputs() + 1)?;
    let fhat = dag.positive_form(f);
    let mut b = prefix_binding(i);
    unbar_above(dag, i - 1, &mut b);
    Ok(dag.substitute(fhat, &b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unrealizability {
    Unrealizable,
    /// An assignment over `X_{i+1..n}` and `Y` satisfying ζ.
    Realizable(Assignment),
}

impl Unrealizability {
    pub fn holds(&self) -> bool {
        matches!(self, Unrealizability::Unrealizable)
    }
}

/// The three alpha roots `(α¹¹, α¹⁰, α⁰¹)` for output `i`.
pub fn alphas(dag: &mut NnfDag, f: NodeId, i: usize) -> Result<(NodeId, NodeId, NodeId)> {
    Ok((
        alpha(dag, f, i, true, true)?,
        alpha(dag, f, i, true, false)?,
        alpha(dag, f, i, false, true)?,
    ))
}

/// Whether ζ = α¹¹ ∧ ¬α¹⁰ ∧ ¬α⁰¹ is unsatisfiable.
pub fn is_and_unrealizable(
    dag: &mut NnfDag,
    backend: &Backend,
    f: NodeId,
    i: usize,
) -> Result<Unrealizability> {
    let (a11, a10, a01) = alphas(dag, f, i)?;
    Ok(
        match is_sat(dag, backend, &[(a11, true), (a10, false), (a01, false)])? {
            SatVerdict::Unsat => Unrealizability::Unrealizable,
            SatVerdict::Sat(m) => Unrealizability::Realizable(m),
        },
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheckMethod {
    Semantic,
    Syntactic,
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexMethod {
    SyntacticPathCheck,
    SemanticZeta,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexResult {
    pub index: usize,
    pub method: IndexMethod,
    pub passed: bool,
    pub witness: Option<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    InSynNNF,
    NotInSynNNF {
        index: usize,
        witness: Assignment,
    },
    /// The syntactic condition fails at `index`; the formula may still be
    /// in SynNNF.
    SyntacticFailure {
        index: usize,
    },
    /// A solver limit was hit while checking `index`.
    Timeout {
        index: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub verdict: Membership,
    pub per_index: Vec<IndexResult>,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.verdict == Membership::InSynNNF
    }
}

/// Syntactic sufficient condition for `Δᵢ`: no And node has one child
/// reaching `x_i` and a different child reaching `xbar_i`. Returns the
/// first offending node.
pub fn syntactic_violation(dag: &NnfDag, delta: NodeId, i: usize) -> Option<NodeId> {
    const X: u8 = 1;
    const B: u8 = 2;
    let xi = VarId::output(i);
    let bi = VarId::bar(i);
    let mut flags: HashMap<NodeId, u8> = HashMap::new();
    for id in dag.reachable(&[delta]) {
        let f = match dag.node(id) {
            Node::Lit(l) if l.var == xi => X,
            Node::Lit(l) if l.var == bi => B,
            Node::And(c) => {
                let with_x: Vec<NodeId> = c.iter().copied().filter(|k| flags[k] & X != 0).collect();
                let with_b: Vec<NodeId> = c.iter().copied().filter(|k| flags[k] & B != 0).collect();
                let same_single = with_x.len() == 1 && with_b.len() == 1 && with_x[0] == with_b[0];
                if !with_x.is_empty() && !with_b.is_empty() && !same_single {
                    return Some(id);
                }
                c.iter().fold(0, |a, k| a | flags[k])
            }
            Node::Or(c) => c.iter().fold(0, |a, k| a | flags[k]),
            _ => 0,
        };
        flags.insert(id, f);
    }
    None
}

/// SynNNF membership of `f` with respect to the output order of the
/// signature.
pub fn check_membership(
    dag: &mut NnfDag,
    backend: &Backend,
    f: NodeId,
    method: CheckMethod,
) -> Result<MembershipReport> {
    let n = dag.num_outputs();
    let mut per_index = Vec::new();
    for i in 1..=n {
        if method != CheckMethod::Semantic {
            let delta = reduct(dag, f, i)?.root;
            let ok = syntactic_violation(dag, delta, i).is_none();
            per_index.push(IndexResult {
                index: i,
                method: IndexMethod::SyntacticPathCheck,
                passed: ok,
                witness: None,
            });
            if ok {
                continue;
            }
            if method == CheckMethod::Syntactic {
                return Ok(MembershipReport {
                    verdict: Membership::SyntacticFailure { index: i },
                    per_index,
                });
            }
        }
        match is_and_unrealizable(dag, backend, f, i) {
            Ok(Unrealizability::Unrealizable) => {
                per_index.push(IndexResult {
                    index: i,
                    method: IndexMethod::SemanticZeta,
                    passed: true,
                    witness: None,
                });
            }
            Ok(Unrealizability::Realizable(w)) => {
                per_index.push(IndexResult {
                    index: i,
                    method: IndexMethod::SemanticZeta,
                    passed: false,
                    witness: Some(w.clone()),
                });
                return Ok(MembershipReport {
                    verdict: Membership::NotInSynNNF {
                        index: i,
                        witness: w,
                    },
                    per_index,
                });
            }
            Err(e) if e.is_timeout() => {
                return Ok(MembershipReport {
                    verdict: Membership::Timeout { index: i },
                    per_index,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MembershipReport {
        verdict: Membership::InSynNNF,
        per_index,
    })
}

/// Literal sets per node of the cone of `root`.
fn literal_sets(dag: &NnfDag, root: NodeId) -> HashMap<NodeId, BTreeSet<Literal>> {
    let mut sets: HashMap<NodeId, BTreeSet<Literal>> = HashMap::new();
    for id in dag.reachable(&[root]) {
        let s = match dag.node(id) {
            Node::Lit(l) => BTreeSet::from([*l]),
            Node::And(c) | Node::Or(c) => c.iter().flat_map(|k| sets[k].iter().copied()).collect(),
            _ => BTreeSet::new(),
        };
        sets.insert(id, s);
    }
    sets
}

/// Every And node: no literal under one child whose complement occurs
/// under another child.
pub fn check_wdnnf(dag: &NnfDag, root: NodeId) -> bool {
    let sets = literal_sets(dag, root);
    for &id in sets.keys() {
        if let Node::And(c) = dag.node(id) {
            let mut seen: BTreeSet<Literal> = BTreeSet::new();
            for k in c.iter() {
                if sets[k].iter().any(|l| seen.contains(&!*l)) {
                    return false;
                }
                seen.extend(sets[k].iter().copied());
            }
        }
    }
    true
}

/// Every And node has children over pairwise disjoint variables.
pub fn check_dnnf(dag: &NnfDag, root: NodeId) -> bool {
    let sets = literal_sets(dag, root);
    for &id in sets.keys() {
        if let Node::And(c) = dag.node(id) {
            let mut seen: BTreeSet<VarId> = BTreeSet::new();
            for k in c.iter() {
                let vars: BTreeSet<VarId> = sets[k].iter().map(|l| l.var).collect();
                if !seen.is_disjoint(&vars) {
                    return false;
                }
                seen.extend(vars);
            }
        }
    }
    true
}

/// DNNF whose Or nodes have pairwise contradictory children.
pub fn check_ddnnf(dag: &mut NnfDag, backend: &Backend, root: NodeId) -> Result<bool> {
    if !check_dnnf(dag, root) {
        return Ok(false);
    }
    for id in dag.reachable(&[root]) {
        let Node::Or(c) = dag.node(id) else { continue };
        let kids = c.to_vec();
        for (a, &r) in kids.iter().enumerate() {
            for &s in &kids[a + 1..] {
                if is_sat(dag, backend, &[(r, true), (s, true)])?.is_sat() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
