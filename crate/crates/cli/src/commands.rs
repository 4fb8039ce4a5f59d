use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use synkc_core::c2syn::{CompileOptions, CompileResult, Compiler};
use synkc_core::cnf::{parse_qdimacs, ClauseSet, FreeVarPolicy};
use synkc_core::nnf::{read_nnf, write_nnf};
use synkc_core::oracle::{random_family, OpPrime};
use synkc_core::refine::{check_refines, Condition};
use synkc_core::sat::Backend;
use synkc_core::skolem::{error_formula_check, gacks_skolem, ErrorFormulaResult};
use synkc_core::synnnf::{
    check_ddnnf, check_dnnf, check_membership, check_wdnnf, CheckMethod, Membership,
    MembershipReport,
};
use synkc_core::{Assignment, Error, NnfDag, Node, NodeId, Result, Signature};

use crate::report::{FileDigest, RunReport, Verdict, Witness};
use crate::{FreeVars, GlobalOpts};

#[derive(Args, Debug)]
pub struct CompileFlags {
    /// Output order: `prefix` or `file:<path>` listing DIMACS indices.
    #[arg(long, default_value = "prefix")]
    pub order: String,
    /// Skip the Skolem shortcut below the top level above this many outputs.
    #[arg(long, default_value_t = 64)]
    pub gacks_cap: usize,
    #[arg(long)]
    pub always_try_gacks: bool,
    /// Recorded in the report; compilation itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StatsFormat {
    Json,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    pub input: PathBuf,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
    /// Check the result for syntactic SynNNF and refinement afterwards.
    #[arg(long)]
    pub verify: bool,
    /// Also write Skolem functions for the input to this file.
    #[arg(long)]
    pub skolem: Option<PathBuf>,
    /// Print compiler statistics to stderr.
    #[arg(long, value_enum)]
    pub stats: Option<StatsFormat>,
    #[command(flatten)]
    pub flags: CompileFlags,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    pub input: PathBuf,
    /// Skolem functions, one `psi_<i>` root per output.
    #[arg(short = 'o', long)]
    pub output: PathBuf,
    /// Also write the compiled formula.
    #[arg(long)]
    pub compiled: Option<PathBuf>,
    #[command(flatten)]
    pub flags: CompileFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Synnnf,
    Wdnnf,
    Dnnf,
    Ddnnf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    Auto,
    Semantic,
    Syntactic,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Form::Synnnf)]
    pub form: Form,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    /// Specification, `.nnf` or QDIMACS.
    pub spec: PathBuf,
    /// Candidate refinement, `.nnf`.
    pub candidate: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    Appendix,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Prime {
    Or,
    Xor,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Number of inputs.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, value_enum)]
    pub opprime: Prime,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

pub struct Ctx<'a> {
    global: &'a GlobalOpts,
    pub rep: &'a mut RunReport,
    pub backend: Backend,
}

impl<'a> Ctx<'a> {
    pub fn new(global: &'a GlobalOpts, rep: &'a mut RunReport) -> Self {
        let mut backend = Backend::new().with_timeout(Duration::from_secs(global.timeout));
        if let Some(dir) = &global.dump_cnf {
            backend = backend.with_dump_dir(dir);
        }
        Ctx {
            global,
            rep,
            backend,
        }
    }

    pub fn conclude(&mut self, r: Result<Verdict>) -> Verdict {
        self.rep.sat_calls = self.backend.sat_calls();
        self.rep.cegar_iterations = self
            .backend
            .stats()
            .cegar_iterations
            .load(std::sync::atomic::Ordering::Relaxed);
        let v = match r {
            Ok(v) => v,
            Err(e) => {
                self.rep.error = Some(e.to_string());
                if e.is_timeout() {
                    Verdict::Timeout
                } else {
                    Verdict::Error
                }
            }
        };
        self.rep.finish(v);
        v
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let data = std::fs::read(path)?;
        self.rep.inputs.push(FileDigest::of(path, &data));
        String::from_utf8(data)
            .map_err(|_| Error::Unsupported(format!("{} is not UTF-8", path.display())))
    }

    fn write(&mut self, path: &Path, text: &str) -> Result<()> {
        std::fs::write(path, text)?;
        self.rep.outputs.push(FileDigest::of(path, text.as_bytes()));
        Ok(())
    }

    fn load_qdimacs(&mut self, path: &Path) -> Result<ClauseSet> {
        let text = self.read(path)?;
        let policy = match self.global.free_vars {
            FreeVars::Universal => FreeVarPolicy::Universal,
            FreeVars::Reject => FreeVarPolicy::Reject,
        };
        let (s, parse) = self.rep.phase("parse", || parse_qdimacs(&text, policy))?;
        self.rep.set("parse", &parse);
        self.rep.set(
            "instance",
            json!({
                "outputs": s.signature().num_outputs(),
                "inputs": s.signature().num_inputs(),
                "clauses": s.len(),
            }),
        );
        Ok(s)
    }

    /// A specification as an NNF root: `.nnf` files are read directly,
    /// anything else as QDIMACS.
    fn load_formula(&mut self, path: &Path) -> Result<(NnfDag, NodeId)> {
        if is_nnf(path) {
            let text = self.read(path)?;
            let file = self.rep.phase("parse", || read_nnf(&text, None))?;
            let root = root_of(&file.roots, path)?;
            Ok((file.dag, root))
        } else {
            let s = self.load_qdimacs(path)?;
            let mut dag = NnfDag::new(s.signature().clone());
            let root = s.to_nnf(&mut dag);
            Ok((dag, root))
        }
    }

    /// Read an `.nnf` file and copy it into `dag`, matching variables by
    /// their original index.
    fn load_into(&mut self, path: &Path, dag: &mut NnfDag) -> Result<NodeId> {
        let text = self.read(path)?;
        let sig = dag.signature().clone();
        let file = self.rep.phase("parse", || read_nnf(&text, Some(&sig)))?;
        let root = root_of(&file.roots, path)?;
        transplant(dag, &file.dag, root)
    }
}

fn is_nnf(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "nnf")
}

fn root_of(roots: &[(String, NodeId)], path: &Path) -> Result<NodeId> {
    ["Ftilde", "F"]
        .iter()
        .find_map(|n| roots.iter().find(|(r, _)| r == n))
        .or_else(|| roots.last())
        .map(|(_, id)| *id)
        .ok_or_else(|| Error::Unsupported(format!("{} has no root", path.display())))
}

fn transplant(dst: &mut NnfDag, src: &NnfDag, root: NodeId) -> Result<NodeId> {
    let (ss, ds) = (src.signature().clone(), dst.signature().clone());
    let mut map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for id in src.reachable(&[root]) {
        let new = match src.node(id) {
            Node::False => NodeId::FALSE,
            Node::True => NodeId::TRUE,
            Node::Lit(l) => {
                let orig = ss.orig(l.var);
                let v = ds.lookup(orig).ok_or_else(|| {
                    Error::Signature(format!("variable {orig} is not in the specification"))
                })?;
                if v.is_output() != l.var.is_output() {
                    return Err(Error::Signature(format!(
                        "variable {orig} is an input in one file and an output in the other"
                    )));
                }
                dst.var(v, l.positive)
            }
            Node::And(c) => {
                let kids: Vec<NodeId> = c.iter().map(|k| map[k]).collect();
                dst.conjoin(kids)
            }
            Node::Or(c) => {
                let kids: Vec<NodeId> = c.iter().map(|k| map[k]).collect();
                dst.disjoin(kids)
            }
        };
        map.insert(id, new);
    }
    Ok(map[&root])
}

fn witness(a: &Assignment, sig: &Signature) -> Witness {
    a.to_orig_map(sig)
}

fn condition_json(c: &Condition, sig: &Signature) -> Value {
    match c {
        Condition::Holds => json!({ "holds": true }),
        Condition::Fails(w) => json!({ "holds": false, "witness": witness(w, sig) }),
        Condition::Timeout => json!({ "holds": null, "timeout": true }),
    }
}

fn membership_json(m: &MembershipReport, sig: &Signature) -> Value {
    let verdict = match &m.verdict {
        Membership::InSynNNF => json!({ "member": true }),
        Membership::NotInSynNNF { index, witness: w } => {
            json!({ "member": false, "index": index, "witness": witness(w, sig) })
        }
        Membership::SyntacticFailure { index } => {
            json!({ "member": null, "syntactic_failure": index })
        }
        Membership::Timeout { index } => json!({ "member": null, "timeout": index }),
    };
    let per_index: Vec<Value> = m
        .per_index
        .iter()
        .map(|r| {
            json!({
                "index": r.index,
                "method": format!("{:?}", r.method),
                "passed": r.passed,
                "witness": r.witness.as_ref().map(|w| witness(w, sig)),
            })
        })
        .collect();
    json!({ "verdict": verdict, "per_index": per_index })
}

fn membership_verdict(m: &MembershipReport) -> Verdict {
    match m.verdict {
        Membership::InSynNNF => Verdict::Ok,
        Membership::NotInSynNNF { .. } | Membership::SyntacticFailure { .. } => Verdict::Violated,
        Membership::Timeout { .. } => Verdict::Timeout,
    }
}

fn apply_order(ctx: &mut Ctx, s: ClauseSet, order: &str) -> Result<ClauseSet> {
    if order == "prefix" {
        return Ok(s);
    }
    let Some(path) = order.strip_prefix("file:") else {
        return Err(Error::Unsupported(format!(
            "--order must be `prefix` or `file:<path>`, not `{order}`"
        )));
    };
    let text = ctx.read(Path::new(path))?;
    let mut idx = Vec::new();
    for tok in text.split_whitespace() {
        let v: u32 = tok
            .parse()
            .map_err(|_| Error::Unsupported(format!("bad variable `{tok}` in order file")))?;
        if v != 0 {
            idx.push(v);
        }
    }
    s.reorder_outputs(&idx)
}

fn run_compiler(ctx: &mut Ctx, s: &ClauseSet, flags: &CompileFlags) -> Result<CompileResult> {
    ctx.rep.seed = Some(flags.seed);
    let opts = CompileOptions {
        gacks_cap: flags.gacks_cap,
        always_try_gacks: flags.always_try_gacks,
    };
    let backend = &ctx.backend;
    let out = ctx
        .rep
        .phase("compile", || Compiler::new(s, backend, opts).run(s));
    match out {
        Ok(r) => {
            ctx.rep.set("stats", &r.stats);
            let mut prov: BTreeMap<String, usize> = BTreeMap::new();
            for p in r.provenance.values() {
                *prov.entry(format!("{p:?}")).or_default() += 1;
            }
            ctx.rep.set(
                "result",
                json!({
                    "size": r.dag.size(&[r.root]),
                    "edges": r.dag.edge_count(&[r.root]),
                    "provenance": prov,
                }),
            );
            Ok(r)
        }
        Err((e, stats)) => {
            ctx.rep.set("stats", &stats);
            Err(e)
        }
    }
}

/// Skolem functions of the compiled root, checked against `s`.
fn skolem_phase(
    ctx: &mut Ctx,
    dag: &mut NnfDag,
    root: NodeId,
    s: &ClauseSet,
    path: &Path,
) -> Result<Verdict> {
    let sv = ctx.rep.phase("skolem", || gacks_skolem(dag, root))?;
    let f = s.to_nnf(dag);
    let backend = &ctx.backend;
    let ef = ctx.rep.phase("error_formula", || {
        error_formula_check(dag, backend, f, &sv)
    })?;
    let sig = dag.signature().clone();
    let (verdict, detail) = match &ef {
        ErrorFormulaResult::Correct => (Verdict::Ok, json!({ "correct": true })),
        ErrorFormulaResult::Incorrect { y, x, psi } => {
            let psi: Witness = sv
                .outputs
                .iter()
                .zip(psi)
                .map(|(&v, &b)| (sig.orig(v), b))
                .collect();
            (
                Verdict::Violated,
                json!({
                    "correct": false,
                    "inputs": witness(y, &sig),
                    "outputs": witness(x, &sig),
                    "psi": psi,
                }),
            )
        }
    };
    let mut detail = detail;
    detail["size"] = json!(sv.size(dag));
    ctx.rep.set("skolem", detail);
    ctx.write(path, &write_nnf(dag, &sv.named_roots()))?;
    Ok(verdict)
}

/// Syntactic SynNNF check of `ftilde`, then both refinement conditions
/// against `f`.
fn verify_pair(ctx: &mut Ctx, dag: &mut NnfDag, ftilde: NodeId, f: NodeId) -> Result<Verdict> {
    let sig = dag.signature().clone();
    let backend = &ctx.backend;
    let m = ctx.rep.phase("syntactic_check", || {
        check_membership(dag, backend, ftilde, CheckMethod::Syntactic)
    })?;
    ctx.rep.set("synnnf", membership_json(&m, &sig));
    let v = membership_verdict(&m);
    Ok(v.and(refinement(ctx, dag, ftilde, f)?))
}

fn refinement(ctx: &mut Ctx, dag: &NnfDag, ftilde: NodeId, f: NodeId) -> Result<Verdict> {
    let backend = &ctx.backend;
    let r = ctx
        .rep
        .phase("refinement", || check_refines(dag, backend, ftilde, f))?;
    let sig = dag.signature();
    ctx.rep.set(
        "refinement",
        json!({
            "cond_a": condition_json(&r.cond_a, sig),
            "cond_b": condition_json(&r.cond_b, sig),
        }),
    );
    Ok(if r.timed_out() {
        Verdict::Timeout
    } else if r.holds() {
        Verdict::Ok
    } else {
        Verdict::Violated
    })
}

pub fn compile(ctx: &mut Ctx, a: &CompileArgs) -> Result<Verdict> {
    let s = ctx.load_qdimacs(&a.input)?;
    let s = apply_order(ctx, s, &a.flags.order)?;
    let r = run_compiler(ctx, &s, &a.flags)?;
    if a.stats.is_some() {
        eprintln!(
            "{}",
            serde_json::to_string(&r.stats).expect("stats serialise")
        );
    }
    let (mut dag, root) = (r.dag, r.root);
    ctx.write(&a.output, &write_nnf(&dag, &[("Ftilde".into(), root)]))?;
    let mut verdict = Verdict::Ok;
    if let Some(p) = &a.skolem {
        verdict = verdict.and(skolem_phase(ctx, &mut dag, root, &s, p)?);
    }
    if a.verify {
        let f = s.to_nnf(&mut dag);
        verdict = verdict.and(verify_pair(ctx, &mut dag, root, f)?);
    }
    Ok(verdict)
}

pub fn synthesize(ctx: &mut Ctx, a: &SynthesizeArgs) -> Result<Verdict> {
    let s = ctx.load_qdimacs(&a.input)?;
    let s = apply_order(ctx, s, &a.flags.order)?;
    let r = run_compiler(ctx, &s, &a.flags)?;
    let (mut dag, root) = (r.dag, r.root);
    if let Some(p) = &a.compiled {
        ctx.write(p, &write_nnf(&dag, &[("Ftilde".into(), root)]))?;
    }
    skolem_phase(ctx, &mut dag, root, &s, &a.output)
}

pub fn check(ctx: &mut Ctx, a: &CheckArgs) -> Result<Verdict> {
    let (mut dag, root) = ctx.load_formula(&a.input)?;
    let sig = dag.signature().clone();
    ctx.rep.set("form", format!("{:?}", a.form).to_lowercase());
    let verdict_of = |b: bool| if b { Verdict::Ok } else { Verdict::Violated };
    match a.form {
        Form::Synnnf => {
            let method = match a.method {
                Method::Auto => CheckMethod::Auto,
                Method::Semantic => CheckMethod::Semantic,
                Method::Syntactic => CheckMethod::Syntactic,
            };
            let backend = &ctx.backend;
            let m = ctx.rep.phase("check", || {
                check_membership(&mut dag, backend, root, method)
            })?;
            ctx.rep.set("synnnf", membership_json(&m, &sig));
            Ok(membership_verdict(&m))
        }
        Form::Wdnnf => {
            let b = ctx.rep.phase("check", || check_wdnnf(&dag, root));
            ctx.rep.set("member", b);
            Ok(verdict_of(b))
        }
        Form::Dnnf => {
            let b = ctx.rep.phase("check", || check_dnnf(&dag, root));
            ctx.rep.set("member", b);
            Ok(verdict_of(b))
        }
        Form::Ddnnf => {
            let backend = &ctx.backend;
            let b = ctx
                .rep
                .phase("check", || check_ddnnf(&mut dag, backend, root))?;
            ctx.rep.set("member", b);
            Ok(verdict_of(b))
        }
    }
}

pub fn verify(ctx: &mut Ctx, a: &PairArgs) -> Result<Verdict> {
    let (mut dag, f) = ctx.load_formula(&a.spec)?;
    let ftilde = ctx.load_into(&a.candidate, &mut dag)?;
    verify_pair(ctx, &mut dag, ftilde, f)
}

pub fn refine_check(ctx: &mut Ctx, a: &PairArgs) -> Result<Verdict> {
    let (mut dag, f) = ctx.load_formula(&a.spec)?;
    let ftilde = ctx.load_into(&a.candidate, &mut dag)?;
    refinement(ctx, &dag, ftilde, f)
}

pub fn gen(ctx: &mut Ctx, a: &GenArgs) -> Result<Verdict> {
    let Family::Appendix = a.family;
    if a.n == 0 {
        return Err(Error::Unsupported("--n must be at least 1".into()));
    }
    ctx.rep.seed = Some(a.seed);
    let prime = match a.opprime {
        Prime::Or => OpPrime::Or,
        Prime::Xor => OpPrime::Xor,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (dag, root) = ctx
        .rep
        .phase("generate", || random_family(&mut rng, a.n, a.m, prime));
    ctx.rep.set(
        "instance",
        json!({ "outputs": a.n, "inputs": a.m, "size": dag.size(&[root]) }),
    );
    ctx.write(&a.output, &write_nnf(&dag, &[("F".into(), root)]))?;
    Ok(Verdict::Ok)
}
