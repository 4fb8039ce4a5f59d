//! Decision procedures over NNF DAGs.
//!
//! A [`SatSolver`] is any incremental CDCL engine that accepts clauses and
//! solves under assumptions. [`Backend`] creates solvers, enforces resource
//! limits and keeps call counters; [`Session`] Tseitin-encodes DAG nodes into
//! one solver, optionally over several renamed copies of the variables.

mod queries;
mod session;

pub use queries::{
    forall_exists_valid, is_sat, is_tautology, semantically_independent, ForallExists, SatVerdict,
};
pub use session::{tseitin, CnfEncoding, CopyId, Polarity, Session};

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use batsat::{lbool, BasicCallbacks, BasicSolver, SolverInterface, SolverOpts};

/// DIMACS-style solver literal: variable `>= 1`, negative means negated.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SatLit(i32);

impl SatLit {
    pub fn new(var: u32, positive: bool) -> SatLit {
        debug_assert!(var >= 1);
        SatLit(if positive { var as i32 } else { -(var as i32) })
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// `self` if `positive`, else its negation.
    pub fn with_sign(self, positive: bool) -> SatLit {
        if positive {
            self
        } else {
            !self
        }
    }
}

impl std::ops::Not for SatLit {
    type Output = SatLit;
    fn not(self) -> SatLit {
        SatLit(-self.0)
    }
}

impl fmt::Debug for SatLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    /// Interrupted by a resource limit.
    Unknown,
}

pub trait SatSolver {
    fn new_var(&mut self) -> u32;
    fn add_clause(&mut self, lits: &[SatLit]);
    fn solve(&mut self, assumptions: &[SatLit]) -> SolveStatus;
    /// Model value after a `Sat` answer.
    fn value(&self, lit: SatLit) -> bool;
}

pub struct BatsatSolver {
    inner: BasicSolver,
    vars: Vec<batsat::Var>,
    model: Vec<bool>,
}

impl BatsatSolver {
    pub fn new(deadline: Option<Instant>) -> Self {
        let mut cb = BasicCallbacks::new();
        if let Some(d) = deadline {
            cb.set_stop(move || Instant::now() >= d);
        }
        BatsatSolver {
            inner: BasicSolver::new(SolverOpts::default(), cb),
            vars: Vec::new(),
            model: Vec::new(),
        }
    }

    fn lit(&self, l: SatLit) -> batsat::Lit {
        batsat::Lit::new(self.vars[l.var() as usize - 1], l.is_positive())
    }
}

impl SatSolver for BatsatSolver {
    fn new_var(&mut self) -> u32 {
        let v = self.inner.new_var_default();
        self.vars.push(v);
        self.vars.len() as u32
    }

    fn add_clause(&mut self, lits: &[SatLit]) {
        let mut c: Vec<batsat::Lit> = lits.iter().map(|&l| self.lit(l)).collect();
        self.inner.add_clause_reuse(&mut c);
    }

    fn solve(&mut self, assumptions: &[SatLit]) -> SolveStatus {
        let assumps: Vec<batsat::Lit> = assumptions.iter().map(|&l| self.lit(l)).collect();
        let r = self.inner.solve_limited(&assumps);
        if r == lbool::TRUE {
            self.model = self
                .vars
                .iter()
                .map(|&v| self.inner.value_var(v) == lbool::TRUE)
                .collect();
            SolveStatus::Sat
        } else if r == lbool::FALSE {
            SolveStatus::Unsat
        } else {
            SolveStatus::Unknown
        }
    }

    fn value(&self, lit: SatLit) -> bool {
        self.model
            .get(lit.var() as usize - 1)
            .copied()
            .unwrap_or(false)
            == lit.is_positive()
    }
}

/// Records clauses without solving; used for plain CNF output.
#[derive(Default)]
pub struct ClauseCollector {
    pub num_vars: u32,
    pub clauses: Vec<Vec<SatLit>>,
}

impl SatSolver for ClauseCollector {
    fn new_var(&mut self) -> u32 {
        self.num_vars += 1;
        self.num_vars
    }

    fn add_clause(&mut self, lits: &[SatLit]) {
        self.clauses.push(lits.to_vec());
    }

    fn solve(&mut self, _: &[SatLit]) -> SolveStatus {
        SolveStatus::Unknown
    }

    fn value(&self, _: SatLit) -> bool {
        false
    }
}

/// Writes every query to `<dir>/query-<n>.cnf` before solving it.
struct DumpingSolver {
    inner: Box<dyn SatSolver>,
    log: ClauseCollector,
    dir: PathBuf,
    counter: Arc<AtomicU64>,
}

impl SatSolver for DumpingSolver {
    fn new_var(&mut self) -> u32 {
        self.log.new_var();
        self.inner.new_var()
    }

    fn add_clause(&mut self, lits: &[SatLit]) {
        self.log.add_clause(lits);
        self.inner.add_clause(lits);
    }

    fn solve(&mut self, assumptions: &[SatLit]) -> SolveStatus {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let mut text = "c assumptions:".to_string();
        for a in assumptions {
            text.push_str(&format!(" {}", a.to_dimacs()));
        }
        text.push('\n');
        text.push_str(&format!(
            "p cnf {} {}\n",
            self.log.num_vars,
            self.log.clauses.len() + assumptions.len()
        ));
        for c in self.log.clauses.iter().chain(
            assumptions
                .iter()
                .map(std::slice::from_ref)
                .map(|s| s.to_vec())
                .collect::<Vec<_>>()
                .iter(),
        ) {
            for l in c {
                text.push_str(&format!("{} ", l.to_dimacs()));
            }
            text.push_str("0\n");
        }
        if let Err(e) = fs::write(self.dir.join(format!("query-{n}.cnf")), text) {
            log::warn!("could not dump query {n}: {e}");
        }
        self.inner.solve(assumptions)
    }

    fn value(&self, lit: SatLit) -> bool {
        self.inner.value(lit)
    }
}

pub type SolverFactory = Arc<dyn Fn(Option<Instant>) -> Box<dyn SatSolver> + Send + Sync>;

#[derive(Debug, Default)]
pub struct BackendStats {
    pub sat_calls: AtomicU64,
    pub cegar_iterations: AtomicU64,
}

/// Solver factory plus limits and counters shared by all queries of a run.
#[derive(Clone)]
pub struct Backend {
    factory: SolverFactory,
    deadline: Option<Instant>,
    cegar_cap: u64,
    dump_dir: Option<PathBuf>,
    dump_counter: Arc<AtomicU64>,
    stats: Arc<BackendStats>,
}

impl Default for Backend {
    fn default() -> Self {
        Backend {
            factory: Arc::new(|deadline| Box::new(BatsatSolver::new(deadline))),
            deadline: None,
            cegar_cap: 1 << 24,
            dump_dir: None,
            dump_counter: Arc::new(AtomicU64::new(0)),
            stats: Arc::new(BackendStats::default()),
        }
    }
}

impl Backend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_factory(mut self, factory: SolverFactory) -> Self {
        self.factory = factory;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.deadline = Some(Instant::now() + timeout);
        self
    }

    pub fn with_cegar_cap(mut self, cap: u64) -> Self {
        self.cegar_cap = cap;
        self
    }

    pub fn with_dump_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dump_dir = Some(dir.into());
        self
    }

    pub fn cegar_cap(&self) -> u64 {
        self.cegar_cap
    }

    pub fn stats(&self) -> &BackendStats {
        &self.stats
    }

    pub fn sat_calls(&self) -> u64 {
        self.stats.sat_calls.load(Ordering::Relaxed)
    }

    pub fn deadline_passed(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn solver(&self) -> Box<dyn SatSolver> {
        let inner = (self.factory)(self.deadline);
        match &self.dump_dir {
            Some(dir) => Box::new(DumpingSolver {
                inner,
                log: ClauseCollector::default(),
                dir: dir.clone(),
                counter: self.dump_counter.clone(),
            }),
            None => inner,
        }
    }

    pub(crate) fn count_call(&self) {
        self.stats.sat_calls.fetch_add(1, Ordering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batsat_basic() {
        let mut s = BatsatSolver::new(None);
        let a = s.new_var();
        let b = s.new_var();
        s.add_clause(&[SatLit::new(a, true), SatLit::new(b, true)]);
        s.add_clause(&[SatLit::new(a, false)]);
        assert_eq!(s.solve(&[]), SolveStatus::Sat);
        assert!(s.value(SatLit::new(b, true)));
        assert_eq!(s.solve(&[SatLit::new(b, false)]), SolveStatus::Unsat);
        // still usable after an unsat answer under assumptions
        assert_eq!(s.solve(&[]), SolveStatus::Sat);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn expired_deadline_is_unknown_not_unsat() {
        let mut s = BatsatSolver::new(Some(Instant::now()));
        // pigeonhole 6 into 5 needs search, so the stop callback is consulted
        let holes = 5;
        let pigeons = 6;
        let v: Vec<Vec<u32>> = (0..pigeons)
            .map(|_| (0..holes).map(|_| s.new_var()).collect())
            .collect();
        for row in &v {
            let c: Vec<SatLit> = row.iter().map(|&x| SatLit::new(x, true)).collect();
            s.add_clause(&c);
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    s.add_clause(&[SatLit::new(v[p][h], false), SatLit::new(v[q][h], false)]);
                }
            }
        }
        assert_eq!(s.solve(&[]), SolveStatus::Unknown);
    }
}
