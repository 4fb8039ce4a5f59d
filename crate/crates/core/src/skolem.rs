//! Skolem functions read off reducts, existential elimination of output
//! prefixes and the error-formula correctness check.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::nnf::{Assignment, Binding, NnfDag, NodeId, Replacement, VarId};
use crate::sat::{Backend, Polarity, Session};
use crate::synnnf::{is_and_unrealizable, unbarred_reduct};

/// One Skolem function per listed output, with its complement kept
/// alongside. Entry `p` belongs to `outputs[p]`; the list follows the
/// output order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemVector {
    pub outputs: Vec<VarId>,
    pub pos: Vec<NodeId>,
    pub neg: Vec<NodeId>,
}

impl SkolemVector {
    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// `(ψ, ¬ψ)` for output `v`.
    pub fn get(&self, v: VarId) -> Option<(NodeId, NodeId)> {
        self.outputs
            .iter()
            .position(|&o| o == v)
            .map(|p| (self.pos[p], self.neg[p]))
    }

    pub fn roots(&self) -> Vec<NodeId> {
        self.pos.iter().chain(&self.neg).copied().collect()
    }

    /// Named roots `psi_<i>` and `npsi_<i>`, `i` being the output index.
    pub fn named_roots(&self) -> Vec<(String, NodeId)> {
        let mut out = Vec::new();
        for (p, v) in self.outputs.iter().enumerate() {
            out.push((format!("psi_{}", v.index()), self.pos[p]));
            out.push((format!("npsi_{}", v.index()), self.neg[p]));
        }
        out
    }

    /// Distinct nodes reachable from both rails.
    pub fn size(&self, dag: &NnfDag) -> usize {
        dag.size(&self.roots())
    }

    /// Values of all functions under an input assignment.
    pub fn evaluate(&self, dag: &NnfDag, y: &Assignment) -> Result<Vec<bool>> {
        self.pos.iter().map(|&p| dag.evaluate(p, y)).collect()
    }

    /// Rails for every entry after position `p`.
    fn binding_after(&self, p: usize) -> Binding {
        let mut b = Binding::new();
        for q in p + 1..self.len() {
            b.insert(
                self.outputs[q],
                Replacement::Rails {
                    pos: self.pos[q],
                    neg: self.neg[q],
                },
            );
        }
        b
    }
}

/// `α¹⁰` at position `p` of `order`, computed on the positive form.
fn alpha10_over(dag: &mut NnfDag, fhat: NodeId, order: &[VarId], p: usize) -> NodeId {
    let mut b = Binding::new();
    for (q, &v) in order.iter().enumerate() {
        let bar = VarId::bar(v.index());
        if q < p {
            b.insert(v, Replacement::Const(true));
            b.insert(bar, Replacement::Const(true));
        } else if q == p {
            b.insert(v, Replacement::Const(true));
            b.insert(bar, Replacement::Const(false));
        } else {
            let neg = dag.var(v, false);
            b.insert(bar, Replacement::Node(neg));
        }
    }
    dag.substitute(fhat, &b)
}

/// Skolem functions `ψᵢ = α_i^{10}[x_j ↦ ψ_j, j > i]`, composed from `x_n`
/// down to `x_1`. Both rails are built by substitution into the
/// uncomposed `α` and its complement, so no composed node is dualised.
pub fn gacks_skolem(dag: &mut NnfDag, f: NodeId) -> Result<SkolemVector> {
    let order: Vec<VarId> = dag.signature().outputs().collect();
    Ok(gacks_skolem_over(dag, f, &order))
}

/// As [`gacks_skolem`], for an ordered subsequence of the outputs that
/// covers the output support of `f`.
pub fn gacks_skolem_over(dag: &mut NnfDag, f: NodeId, order: &[VarId]) -> SkolemVector {
    let n = order.len();
    let fhat = dag.positive_form(f);
    let fhat_size = dag.size(&[fhat]);
    let mut sv = SkolemVector {
        outputs: order.to_vec(),
        pos: vec![NodeId::TRUE; n],
        neg: vec![NodeId::FALSE; n],
    };
    for p in (0..n).rev() {
        let open = alpha10_over(dag, fhat, order, p);
        let open_neg = dag.negate(open);
        let b = sv.binding_after(p);
        sv.pos[p] = dag.substitute(open, &b);
        sv.neg[p] = dag.substitute(open_neg, &b);
    }
    let size = sv.size(dag);
    assert!(
        size <= 2 * n * fhat_size + 8 * n,
        "Skolem vector of {size} nodes exceeds 2n|F̂| + 8n"
    );
    sv
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Elimination {
    pub root: NodeId,
    /// `false` when the result may over-approximate `∃X₁..Xᵢ F`.
    pub exact: bool,
}

/// `∃x₁..xᵢ F`, computed as the `(i+1)`-th reduct with bar variables
/// replaced by negated outputs. Exact when every reduct up to `i` is
/// ∧-unrealizable, which is checked here.
pub fn eliminate_outputs(
    dag: &mut NnfDag,
    backend: &Backend,
    f: NodeId,
    i: usize,
) -> Result<Elimination> {
    if i == 0 {
        return Ok(Elimination {
            root: f,
            exact: true,
        });
    }
    let root = unbarred_reduct(dag, f, i + 1)?;
    let mut exact = true;
    for j in 1..=i {
        if !is_and_unrealizable(dag, backend, f, j)?.holds() {
            exact = false;
            break;
        }
    }
    Ok(Elimination { root, exact })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrorFormulaResult {
    Correct,
    /// `F(x, y)` holds but `F(Ψ(y), y)` does not.
    Incorrect {
        y: Assignment,
        x: Assignment,
        psi: Vec<bool>,
    },
}

impl ErrorFormulaResult {
    pub fn is_correct(&self) -> bool {
        matches!(self, ErrorFormulaResult::Correct)
    }
}

/// Single SAT call on `F(X,Y) ∧ ¬F(X',Y) ∧ ⋀ (x'ᵢ ↔ ψᵢ(Y))`. The functions
/// must mention inputs only.
pub fn error_formula_check(
    dag: &NnfDag,
    backend: &Backend,
    f: NodeId,
    sv: &SkolemVector,
) -> Result<ErrorFormulaResult> {
    let outs: BTreeSet<VarId> = sv.outputs.iter().copied().collect();
    let mut s = Session::new(dag, backend);
    let primed = s.add_copy(|v| outs.contains(&v));
    s.assert_node(0, f, true);
    s.assert_node(primed, f, false);
    for (p, &v) in sv.outputs.iter().enumerate() {
        let xp = s.var_lit(primed, v);
        let l = s.encode(0, sv.pos[p], Polarity::Both);
        s.add_equiv(xp, l);
    }
    if !s.solve(&[])? {
        return Ok(ErrorFormulaResult::Correct);
    }
    let sig = dag.signature().clone();
    let y = s.model(0, sig.inputs());
    let x = s.model(0, sv.outputs.iter().copied());
    let psi = sv
        .outputs
        .iter()
        .map(|&v| s.model_value(primed, v))
        .collect();
    Ok(ErrorFormulaResult::Incorrect { y, x, psi })
}

/// `⋀ ((xᵢ ∧ ψᵢ) ∨ (¬xᵢ ∧ ¬ψᵢ))`: a SynNNF formula whose Skolem functions
/// are exactly the given ones.
pub fn skolem_to_synnnf(dag: &mut NnfDag, sv: &SkolemVector) -> NodeId {
    let parts: Vec<NodeId> = (0..sv.len())
        .map(|p| dag.ite_var(sv.outputs[p], sv.pos[p], sv.neg[p]))
        .collect();
    dag.conjoin(parts)
}

/// ∧ᵢ-unrealizability of `Δᵢ F` with later outputs replaced by their
/// Skolem functions, i.e. unsatisfiability of the composed ζᵢ. The vector
/// must cover all outputs.
///
/// This is only sufficient for correctness: on inputs where `F` is
/// unrealisable every vector is vacuously correct while ζᵢ may still be
/// satisfiable (e.g. `F = x & -x`). See
/// [`composed_reduct_unrealizable_where_realisable`].
pub fn composed_reduct_unrealizable(
    dag: &mut NnfDag,
    backend: &Backend,
    f: NodeId,
    sv: &SkolemVector,
    i: usize,
) -> Result<bool> {
    let zeta = composed_zeta(dag, sv, f, i);
    Ok(!crate::sat::is_sat(dag, backend, &zeta)?.is_sat())
}

/// As [`composed_reduct_unrealizable`] but only over inputs where `F` is
/// realisable: ζᵢ(Y) ∧ F(X'', Y) with `X''` free. The vector is correct iff
/// this holds for every `i`.
pub fn composed_reduct_unrealizable_where_realisable(
    dag: &mut NnfDag,
    backend: &Backend,
    f: NodeId,
    sv: &SkolemVector,
    i: usize,
) -> Result<bool> {
    let mut zeta = composed_zeta(dag, sv, f, i).to_vec();
    // ζᵢ mentions no outputs, so F's outputs act as a fresh copy
    zeta.push((f, true));
    Ok(!crate::sat::is_sat(dag, backend, &zeta)?.is_sat())
}

/// Constraints `α¹¹ ∧ ¬α¹⁰ ∧ ¬α⁰¹` of the composed `i`-th reduct.
fn composed_zeta(dag: &mut NnfDag, sv: &SkolemVector, f: NodeId, i: usize) -> [(NodeId, bool); 3] {
    assert_eq!(sv.len(), dag.num_outputs(), "vector must cover all outputs");
    let mut b = sv.binding_after(i - 1);
    for j in i + 1..=sv.len() {
        b.insert(VarId::bar(j), Replacement::Node(sv.neg[j - 1]));
    }
    let composed = {
        let fhat = dag.positive_form(f);
        let mut pre = Binding::new();
        for j in 1..i {
            pre.insert(VarId::output(j), Replacement::Const(true));
            pre.insert(VarId::bar(j), Replacement::Const(true));
        }
        let delta = dag.substitute(fhat, &pre);
        dag.substitute(delta, &b)
    };
    let xi = VarId::output(i);
    let bi = VarId::bar(i);
    let a11 = dag.restrict(composed, [(xi, true), (bi, true)]);
    let a10 = dag.restrict(composed, [(xi, true), (bi, false)]);
    let a01 = dag.restrict(composed, [(xi, false), (bi, true)]);
    [(a11, true), (a10, false), (a01, false)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnf::Signature;
    use crate::synnnf::{check_membership, CheckMethod};

    fn clause(d: &mut NnfDag, lits: &[(VarId, bool)]) -> NodeId {
        let ids: Vec<NodeId> = lits.iter().map(|&(v, p)| d.var(v, p)).collect();
        d.disjoin(ids)
    }

    fn k() -> (NnfDag, NodeId) {
        let mut d = NnfDag::new(Signature::anonymous(2, 2));
        let (x1, x2, y1, y2) = (
            VarId::output(1),
            VarId::output(2),
            VarId::input(1),
            VarId::input(2),
        );
        let c1 = clause(&mut d, &[(x1, true), (x2, true)]);
        let c2 = clause(&mut d, &[(x2, false), (y1, true)]);
        let c3 = clause(&mut d, &[(y1, false), (y2, true)]);
        let f = d.conjoin([c1, c2, c3]);
        (d, f)
    }

    fn h() -> (NnfDag, NodeId) {
        let mut d = NnfDag::new(Signature::anonymous(2, 2));
        let (x1, x2, y1, y2) = (
            VarId::output(1),
            VarId::output(2),
            VarId::input(1),
            VarId::input(2),
        );
        let c1 = clause(&mut d, &[(x1, true), (x2, true), (y1, true)]);
        let nx2 = d.var(x2, false);
        let py2 = d.var(y2, true);
        let inner = d.and2(nx2, py2);
        let nx1 = d.var(x1, false);
        let c2 = d.or2(nx1, inner);
        let f = d.and2(c1, c2);
        (d, f)
    }

    fn ys(a: bool, b: bool) -> Assignment {
        Assignment::new()
            .with(VarId::input(1), a)
            .with(VarId::input(2), b)
    }

    #[test]
    fn skolem_of_h() {
        let (mut d, f) = h();
        let sv = gacks_skolem(&mut d, f).unwrap();
        assert_eq!(sv.pos, vec![NodeId::FALSE, NodeId::TRUE]);
        assert_eq!(sv.neg, vec![NodeId::TRUE, NodeId::FALSE]);
        assert!(error_formula_check(&d, &Backend::new(), f, &sv)
            .unwrap()
            .is_correct());
        let g = skolem_to_synnnf(&mut d, &sv);
        let expect = {
            let a = d.var(VarId::output(1), false);
            let b = d.var(VarId::output(2), true);
            d.and2(a, b)
        };
        assert_eq!(g, expect);
    }

    #[test]
    fn skolem_of_k() {
        let (mut d, f) = k();
        let sv = gacks_skolem(&mut d, f).unwrap();
        for a in [false, true] {
            for b in [false, true] {
                let v = sv.evaluate(&d, &ys(a, b)).unwrap();
                assert_eq!(v, vec![!a || b, a && b], "y = {a}{b}");
                let nv: Vec<bool> = sv
                    .neg
                    .iter()
                    .map(|&n| d.evaluate(n, &ys(a, b)).unwrap())
                    .collect();
                assert_eq!(nv, vec![!v[0], !v[1]]);
            }
        }
        assert!(error_formula_check(&d, &Backend::new(), f, &sv)
            .unwrap()
            .is_correct());
    }

    #[test]
    fn single_output() {
        let mut d = NnfDag::new(Signature::anonymous(1, 0));
        let f = d.var(VarId::output(1), true);
        let sv = gacks_skolem(&mut d, f).unwrap();
        assert_eq!(sv.pos, vec![NodeId::TRUE]);
        assert_eq!(skolem_to_synnnf(&mut d, &sv), f);
        let zero = SkolemVector {
            outputs: vec![VarId::output(1)],
            pos: vec![NodeId::FALSE],
            neg: vec![NodeId::TRUE],
        };
        match error_formula_check(&d, &Backend::new(), f, &zero).unwrap() {
            ErrorFormulaResult::Incorrect { x, psi, .. } => {
                assert_eq!(x.get(VarId::output(1)), Some(true));
                assert_eq!(psi, vec![false]);
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn skolem_to_synnnf_of_input() {
        let mut d = NnfDag::new(Signature::anonymous(1, 1));
        let y = d.var(VarId::input(1), true);
        let ny = d.var(VarId::input(1), false);
        let sv = SkolemVector {
            outputs: vec![VarId::output(1)],
            pos: vec![y],
            neg: vec![ny],
        };
        let g = skolem_to_synnnf(&mut d, &sv);
        let be = Backend::new();
        let mut d2 = d.clone();
        assert!(check_membership(&mut d2, &be, g, CheckMethod::Syntactic)
            .unwrap()
            .is_member());
        let x = VarId::output(1);
        for (xv, yv) in [(false, false), (false, true), (true, false), (true, true)] {
            let a = Assignment::new().with(x, xv).with(VarId::input(1), yv);
            assert_eq!(d.evaluate(g, &a).unwrap(), xv == yv);
        }
    }

    #[test]
    fn elimination() {
        let be = Backend::new();
        let (mut d, f) = k();
        assert_eq!(
            eliminate_outputs(&mut d, &be, f, 0).unwrap(),
            Elimination {
                root: f,
                exact: true
            }
        );
        let e = eliminate_outputs(&mut d, &be, f, 2).unwrap();
        assert!(e.exact);
        for a in [false, true] {
            for b in [false, true] {
                assert_eq!(d.evaluate(e.root, &ys(a, b)).unwrap(), !a || b);
            }
        }
        let (mut d, f) = h();
        let e = eliminate_outputs(&mut d, &be, f, 2).unwrap();
        assert_eq!(e.root, NodeId::TRUE);
        assert!(!e.exact);
    }

    #[test]
    fn composed_characterisation_on_examples() {
        let be = Backend::new();
        for (mut d, f) in [k(), h()] {
            let sv = gacks_skolem(&mut d, f).unwrap();
            let correct = error_formula_check(&d, &be, f, &sv).unwrap().is_correct();
            let all =
                (1..=2).all(|i| composed_reduct_unrealizable(&mut d, &be, f, &sv, i).unwrap());
            assert_eq!(correct, all);
        }
    }

    #[test]
    fn vacuous_vector_for_unsatisfiable_spec() {
        let be = Backend::new();
        let mut d = NnfDag::new(Signature::anonymous(1, 1));
        let p = d.var(VarId::output(1), true);
        let n = d.var(VarId::output(1), false);
        let f = d.and2(p, n);
        let sv = gacks_skolem(&mut d, f).unwrap();
        assert!(error_formula_check(&d, &be, f, &sv).unwrap().is_correct());
        assert!(!composed_reduct_unrealizable(&mut d, &be, f, &sv, 1).unwrap());
        assert!(composed_reduct_unrealizable_where_realisable(&mut d, &be, f, &sv, 1).unwrap());
    }
}
