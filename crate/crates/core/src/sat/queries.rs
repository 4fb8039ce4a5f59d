use std::collections::BTreeSet;
use std::sync::atomic::Ordering;

use super::{Backend, SatLit, Session};
use crate::error::{Error, Result};
use crate::nnf::{Assignment, NnfDag, NodeId, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    /// A model over the support of the queried nodes.
    Sat(Assignment),
    Unsat,
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat(_))
    }
}

/// Satisfiability of the conjunction of `node == value` constraints.
pub fn is_sat(
    dag: &NnfDag,
    backend: &Backend,
    constraints: &[(NodeId, bool)],
) -> Result<SatVerdict> {
    let mut s = Session::new(dag, backend);
    for &(n, v) in constraints {
        s.assert_node(0, n, v);
    }
    if !s.solve(&[])? {
        return Ok(SatVerdict::Unsat);
    }
    let ids: Vec<NodeId> = constraints.iter().map(|c| c.0).collect();
    Ok(SatVerdict::Sat(s.model(0, dag.support_of(&ids))))
}

pub fn is_tautology(dag: &NnfDag, backend: &Backend, root: NodeId) -> Result<bool> {
    if root.is_const() {
        return Ok(root == NodeId::TRUE);
    }
    Ok(!is_sat(dag, backend, &[(root, false)])?.is_sat())
}

/// Whether `root` does not depend on any variable in `vars`: the formula
/// `root(V, W) & !root(V', W)` with `V` renamed is unsatisfiable.
pub fn semantically_independent(
    dag: &NnfDag,
    backend: &Backend,
    root: NodeId,
    vars: &BTreeSet<VarId>,
) -> Result<bool> {
    let supp = dag.support(root);
    if supp.is_disjoint(vars) {
        return Ok(true);
    }
    let mut s = Session::new(dag, backend);
    let primed = s.add_copy(|v| vars.contains(&v));
    s.assert_node(0, root, true);
    s.assert_node(primed, root, false);
    Ok(!s.solve(&[])?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForallExists {
    /// `forall Y . (exists X . A) -> (exists X' . B)` holds.
    Valid { iterations: u64 },
    /// An input assignment with `A` satisfiable and `B` not.
    CounterY(Assignment),
}

/// Decide `forall Y . (exists X . A(X,Y)) -> (exists X' . B(X',Y))` by
/// counterexample-guided abstraction refinement. Each spurious candidate
/// blocks its full input assignment, so the loop runs at most `2^|Y|`
/// times.
pub fn forall_exists_valid(
    dag: &NnfDag,
    backend: &Backend,
    a: NodeId,
    b: NodeId,
) -> Result<ForallExists> {
    let ys: Vec<VarId> = dag
        .support_of(&[a, b])
        .into_iter()
        .filter(|v| v.is_input())
        .collect();
    let mut abst = Session::new(dag, backend);
    abst.assert_node(0, a, true);
    let ylits_a: Vec<SatLit> = ys.iter().map(|&y| abst.var_lit(0, y)).collect();
    let mut check = Session::new(dag, backend);
    check.assert_node(0, b, true);
    let ylits_b: Vec<SatLit> = ys.iter().map(|&y| check.var_lit(0, y)).collect();

    let bound = if ys.len() < 63 {
        1u64 << ys.len()
    } else {
        u64::MAX
    };
    let mut iterations = 0u64;
    loop {
        if !abst.solve(&[])? {
            return Ok(ForallExists::Valid { iterations });
        }
        iterations += 1;
        backend
            .stats()
            .cegar_iterations
            .fetch_add(1, Ordering::Relaxed);
        assert!(iterations <= bound, "CEGAR exceeded 2^|Y| iterations");
        if iterations > backend.cegar_cap() {
            return Err(Error::Timeout(format!(
                "CEGAR iteration cap {} reached",
                backend.cegar_cap()
            )));
        }
        let values: Vec<bool> = ylits_a.iter().map(|&l| abst.lit_value(l)).collect();
        let assumps: Vec<SatLit> = ylits_b
            .iter()
            .zip(&values)
            .map(|(&l, &v)| l.with_sign(v))
            .collect();
        if !check.solve(&assumps)? {
            return Ok(ForallExists::CounterY(
                ys.iter().copied().zip(values).collect(),
            ));
        }
        let block: Vec<SatLit> = ylits_a
            .iter()
            .zip(&values)
            .map(|(&l, &v)| l.with_sign(!v))
            .collect();
        if block.is_empty() {
            return Ok(ForallExists::Valid { iterations });
        }
        abst.add_clause(&block);
    }
}
