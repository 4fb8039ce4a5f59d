//! CNF specifications and the output-sharing clause graph.

mod qdimacs;

pub use qdimacs::{parse_qdimacs, write_qdimacs, FreeVarPolicy, ParseReport};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::nnf::{Assignment, Literal, NnfDag, NodeId, Signature, VarId};

/// A disjunction of literals over `X ∪ Y`, sorted and duplicate free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// `None` when the clause contains a literal and its complement.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Option<Clause> {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var == w[1].var) {
            return None;
        }
        Some(Clause { lits })
    }

    pub fn unit(lit: Literal) -> Clause {
        Clause { lits: vec![lit] }
    }

    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.lits.iter().any(|l| l.var == v)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.lits.iter().map(|l| l.var)
    }

    pub fn outputs(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars().filter(|v| v.is_output())
    }

    fn restrict(&self, var: VarId, value: bool) -> Option<Clause> {
        let mut lits = Vec::with_capacity(self.lits.len());
        for &l in &self.lits {
            if l.var == var {
                if l.positive == value {
                    return None;
                }
            } else {
                lits.push(l);
            }
        }
        Some(Clause { lits })
    }
}

/// Clauses with stable indices: removed clauses leave tombstones so index
/// sets stay meaningful across cofactoring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseSet {
    sig: Signature,
    clauses: Vec<Option<Clause>>,
}

impl ClauseSet {
    /// Duplicate clauses are merged.
    pub fn new(sig: Signature, clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut seen = BTreeSet::new();
        let clauses = clauses
            .into_iter()
            .filter(|c| seen.insert(c.clone()))
            .map(Some)
            .collect();
        ClauseSet { sig, clauses }
    }

    pub fn empty(sig: Signature) -> Self {
        ClauseSet {
            sig,
            clauses: Vec::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// Live clauses with their indices.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Clause)> + '_ {
        self.clauses
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
    }

    pub fn get(&self, index: usize) -> Option<&Clause> {
        self.clauses.get(index).and_then(|c| c.as_ref())
    }

    /// Number of live clauses.
    pub fn len(&self) -> usize {
        self.clauses.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of the index space including tombstones.
    pub fn capacity(&self) -> usize {
        self.clauses.len()
    }

    /// True when some live clause is empty.
    pub fn has_empty_clause(&self) -> bool {
        self.iter().any(|(_, c)| c.is_empty())
    }

    pub fn support(&self) -> BTreeSet<VarId> {
        self.iter().flat_map(|(_, c)| c.vars()).collect()
    }

    pub fn output_support(&self) -> BTreeSet<VarId> {
        self.iter().flat_map(|(_, c)| c.outputs()).collect()
    }

    pub fn input_support(&self) -> BTreeSet<VarId> {
        self.iter()
            .flat_map(|(_, c)| c.vars())
            .filter(|v| v.is_input())
            .collect()
    }

    /// `S|_{var=value}`: satisfied clauses are removed, falsified literals
    /// dropped. A clause that loses all literals stays as an empty clause.
    pub fn cofactor(&self, var: VarId, value: bool) -> ClauseSet {
        ClauseSet {
            sig: self.sig.clone(),
            clauses: self
                .clauses
                .iter()
                .map(|c| c.as_ref().and_then(|c| c.restrict(var, value)))
                .collect(),
        }
    }

    /// Keep only the clauses whose indices are in `keep`.
    pub fn restrict_to(&self, keep: &BTreeSet<usize>) -> ClauseSet {
        ClauseSet {
            sig: self.sig.clone(),
            clauses: self
                .clauses
                .iter()
                .enumerate()
                .map(|(i, c)| if keep.contains(&i) { c.clone() } else { None })
                .collect(),
        }
    }

    /// Append a clause, returning its index.
    pub fn push(&mut self, clause: Clause) -> usize {
        self.clauses.push(Some(clause));
        self.clauses.len() - 1
    }

    /// Live clauses as a plain list.
    pub fn clauses(&self) -> Vec<Clause> {
        self.iter().map(|(_, c)| c.clone()).collect()
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool> {
        for (_, c) in self.iter() {
            let mut sat = false;
            for l in c.lits() {
                if a.get(l.var).ok_or(Error::MissingVariable(l.var))? == l.positive {
                    sat = true;
                    break;
                }
            }
            if !sat {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `⟨S⟩` as an And of Or nodes.
    pub fn to_nnf(&self, dag: &mut NnfDag) -> NodeId {
        let mut conj = Vec::new();
        for (_, c) in self.iter() {
            let lits: Vec<NodeId> = c.lits().iter().map(|&l| dag.literal(l)).collect();
            conj.push(dag.disjoin(lits));
        }
        dag.conjoin(conj)
    }

    /// Renumber outputs to follow `order` (original indices). Every output
    /// must be listed exactly once.
    pub fn reorder_outputs(&self, order: &[u32]) -> Result<ClauseSet> {
        let old = self.sig.output_origs();
        let mut sorted_new = order.to_vec();
        sorted_new.sort_unstable();
        let mut sorted_old = old.to_vec();
        sorted_old.sort_unstable();
        if sorted_new != sorted_old {
            return Err(Error::Signature(
                "output order must be a permutation of the existential variables".into(),
            ));
        }
        let sig = Signature::new(order.to_vec(), self.sig.input_origs().to_vec());
        let remap = |l: Literal| -> Literal {
            if l.var.is_output() {
                let orig = self.sig.orig(l.var);
                Literal {
                    var: sig.lookup(orig).expect("permutation"),
                    positive: l.positive,
                }
            } else {
                l
            }
        };
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.as_ref().map(|c| {
                    Clause::new(c.lits().iter().map(|&l| remap(l))).expect("non-tautological")
                })
            })
            .collect();
        Ok(ClauseSet { sig, clauses })
    }
}

/// Connected components of the clause graph in which two clauses are
/// adjacent iff they share an output atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MccPartition {
    pub parts: Vec<BTreeSet<usize>>,
    pub clause_to_part: BTreeMap<usize, usize>,
}

impl MccPartition {
    pub fn part_of(&self, clause: usize) -> Option<&BTreeSet<usize>> {
        self.clause_to_part.get(&clause).map(|&p| &self.parts[p])
    }
}

struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

pub fn clause_graph_mccs(s: &ClauseSet) -> MccPartition {
    let mut dsu = Dsu::new(s.capacity());
    let mut first_with: BTreeMap<VarId, usize> = BTreeMap::new();
    for (i, c) in s.iter() {
        for v in c.outputs() {
            match first_with.get(&v) {
                Some(&j) => dsu.union(i, j),
                None => {
                    first_with.insert(v, i);
                }
            }
        }
    }
    let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut parts: Vec<BTreeSet<usize>> = Vec::new();
    let mut clause_to_part = BTreeMap::new();
    for (i, _) in s.iter() {
        let r = dsu.find(i);
        let p = *by_root.entry(r).or_insert_with(|| {
            parts.push(BTreeSet::new());
            parts.len() - 1
        });
        parts[p].insert(i);
        clause_to_part.insert(i, p);
    }
    MccPartition {
        parts,
        clause_to_part,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> VarId {
        VarId::output(i)
    }
    fn y(i: usize) -> VarId {
        VarId::input(i)
    }
    fn cl(lits: &[(VarId, bool)]) -> Clause {
        Clause::new(lits.iter().map(|&(v, p)| v.lit(p))).unwrap()
    }

    fn k_clauses() -> ClauseSet {
        ClauseSet::new(
            Signature::anonymous(2, 2),
            [
                cl(&[(x(1), true), (x(2), true)]),
                cl(&[(x(2), false), (y(1), true)]),
                cl(&[(y(1), false), (y(2), true)]),
            ],
        )
    }

    #[test]
    fn tautological_clause_rejected() {
        assert!(Clause::new([x(1).lit(true), x(1).lit(false)]).is_none());
    }

    #[test]
    fn mccs_without_shared_outputs_are_singletons() {
        let s = ClauseSet::new(
            Signature::anonymous(2, 2),
            [
                cl(&[(x(1), true), (y(1), true)]),
                cl(&[(x(2), true), (y(1), true)]),
                cl(&[(y(1), false), (y(2), true)]),
            ],
        );
        let p = clause_graph_mccs(&s);
        assert_eq!(p.parts.len(), 3);
    }

    #[test]
    fn mccs_of_k() {
        let p = clause_graph_mccs(&k_clauses());
        assert_eq!(p.parts, vec![BTreeSet::from([0, 1]), BTreeSet::from([2])]);
    }

    #[test]
    fn mccs_of_empty_set() {
        let p = clause_graph_mccs(&ClauseSet::empty(Signature::anonymous(1, 1)));
        assert!(p.parts.is_empty());
    }

    #[test]
    fn cofactor_k_on_x2() {
        let s = k_clauses().cofactor(x(2), true);
        assert_eq!(s.get(0), None);
        assert_eq!(s.get(1), Some(&cl(&[(y(1), true)])));
        assert_eq!(s.get(2), Some(&cl(&[(y(1), false), (y(2), true)])));
        assert_eq!(s.capacity(), 3);
    }

    #[test]
    fn cofactor_on_absent_variable_is_identity() {
        let s = k_clauses();
        let mut narrow = ClauseSet::new(Signature::anonymous(3, 2), s.clauses());
        narrow = narrow.cofactor(x(3), false);
        assert_eq!(narrow.clauses(), s.clauses());
    }

    #[test]
    fn cofactor_to_empty_clause() {
        let s = ClauseSet::new(Signature::anonymous(1, 0), [cl(&[(x(1), true)])]);
        assert!(s.cofactor(x(1), false).has_empty_clause());
    }

    #[test]
    fn duplicates_merged() {
        let c = cl(&[(x(1), true)]);
        let s = ClauseSet::new(Signature::anonymous(1, 0), [c.clone(), c]);
        assert_eq!(s.len(), 1);
    }
}
