//! Hoare triples (semantic and via weakest liberal preconditions), unless,
//! ensures and leads-to, and temporal evaluation over state graphs, lassos
//! and finite prefixes.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, RwLock};

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use thiserror::Error;

use crate::agent_program::{Agent, Property};
use crate::capabilities::{apply_m, enabled_cap, enabled_cond, Action, ConditionalAction};
use crate::executor::{reachable, step, BudgetExceeded, StateGraph, TracePrefix};
use crate::mental_state::{eval_msf, EnabledCtx, EvalError, MentalState, MsFormula, Target};
use crate::oracle::{OracleError, Validity, ValidityOracle};
use crate::prop_logic::{self, minterm, models, Canon, Formula, ModelSet, Vocab};
use crate::universe::Universe;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("no Hoare axiom for capability `{cap}` with postcondition `{post}`")]
    MissingAxiom { cap: String, post: MsFormula },
    #[error("malformed leads-to proof: {0}")]
    Malformed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Statement {
    Action(Action),
    Conditional(ConditionalAction),
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Action(a) => write!(f, "{a}"),
            Statement::Conditional(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HoareTriple {
    pub pre: MsFormula,
    pub statement: Statement,
    pub post: MsFormula,
}

impl HoareTriple {
    pub fn basic(pre: MsFormula, a: Action, post: MsFormula) -> Self {
        HoareTriple { pre, statement: Statement::Action(a), post }
    }

    pub fn conditional(pre: MsFormula, b: ConditionalAction, post: MsFormula) -> Self {
        HoareTriple { pre, statement: Statement::Conditional(b), post }
    }
}

impl fmt::Display for HoareTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {} {{{}}}", self.pre, self.statement, self.post)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Witness {
    State(MentalState),
    Step { from: MentalState, action: String, to: MentalState, executed: bool },
    /// A fair lasso over the reachable graph, with the violating position.
    Lasso { states: Vec<MentalState>, rules: Vec<usize>, loop_start: usize, position: usize },
}

impl Witness {
    pub fn state(&self) -> &MentalState {
        match self {
            Witness::State(s) => s,
            Witness::Step { from, .. } => from,
            Witness::Lasso { states, position, loop_start, .. } => {
                let p = if *position < states.len() {
                    *position
                } else {
                    loop_start + (position - loop_start) % (states.len() - loop_start)
                };
                &states[p]
            }
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::State(s) => write!(f, "state {s}"),
            Witness::Step { from, action, to, executed } => {
                let how = if *executed { "executed" } else { "idle" };
                write!(f, "{action} ({how}) from {from} to {to}")
            }
            Witness::Lasso { states, rules, loop_start, position } => {
                write!(f, "lasso violating at position {position}:")?;
                for (i, (s, r)) in states.iter().zip(rules).enumerate() {
                    let mark = if i == *loop_start { " <loop>" } else { "" };
                    write!(f, "\n    [{i}]{mark} {s} --@{r}-->")?;
                }
                write!(f, "\n    back to [{loop_start}]")
            }
        }
    }
}

/// Outcome of one check. A failing verdict always carries a witness.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub scope: String,
}

impl Verdict {
    pub fn pass(scope: impl Into<String>) -> Self {
        Verdict { holds: true, witness: None, scope: scope.into() }
    }

    pub fn fail(scope: impl Into<String>, w: Witness) -> Self {
        Verdict { holds: false, witness: Some(w), scope: scope.into() }
    }
}

/// The states a semantic Hoare check quantifies over.
pub enum Scope<'a> {
    Universe(&'a Universe),
    States { states: &'a [MentalState], ctx: Option<&'a dyn EnabledCtx>, label: String },
}

impl Scope<'_> {
    pub fn describe(&self) -> String {
        match self {
            Scope::Universe(u) => format!(
                "universe ({} atoms, <= {} generators, {} states)",
                u.vocab().len(),
                u.max_generators(),
                u.len()
            ),
            Scope::States { label, .. } => label.clone(),
        }
    }
}

fn attempt(a: &Action, s: &MentalState) -> (MentalState, bool) {
    if enabled_cap(a, s) {
        if let Some(t) = apply_m(a, s) {
            return (t, true);
        }
    }
    (s.clone(), false)
}

/// At every state of `scope` satisfying the precondition, an attempt at the
/// action (its successor when enabled, the state itself otherwise) satisfies
/// the postcondition.
pub fn check_hoare_basic(t: &HoareTriple, scope: &Scope) -> Result<Verdict, VerifyError> {
    let a = match &t.statement {
        Statement::Action(a) => a,
        Statement::Conditional(_) => return Err(VerifyError::Unsupported("conditional action in a basic triple".into())),
    };
    let label = scope.describe();
    match scope {
        Scope::Universe(u) => {
            let pre = u.extension(&t.pre)?;
            let ok = u.post_ok(a, &t.post)?;
            Ok(match u.first_outside(&pre, &ok) {
                None => Verdict::pass(label),
                Some(i) => {
                    let from = u.states()[i].clone();
                    let (to, executed) = attempt(a, &from);
                    Verdict::fail(label, Witness::Step { from, action: a.to_string(), to, executed })
                }
            })
        }
        Scope::States { states, ctx, .. } => {
            let bad = states
                .par_iter()
                .map(|s| -> Result<Option<(MentalState, bool)>, EvalError> {
                    if !eval_msf(s, &t.pre, *ctx)? {
                        return Ok(None);
                    }
                    let (to, executed) = attempt(a, s);
                    Ok((!eval_msf(&to, &t.post, *ctx)?).then_some((to, executed)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(match bad.into_iter().enumerate().find_map(|(i, b)| b.map(|b| (i, b))) {
                None => Verdict::pass(label),
                Some((i, (to, executed))) => {
                    Verdict::fail(label, Witness::Step { from: states[i].clone(), action: a.to_string(), to, executed })
                }
            })
        }
    }
}

/// An agent with its reachable graph and memoized formula extensions.
pub struct AgentModel {
    pub agent: Agent,
    pub graph: StateGraph,
    ext: RwLock<HashMap<MsFormula, Arc<FixedBitSet>>>,
}

impl AgentModel {
    pub fn new(agent: Agent, budget: usize) -> Result<Self, BudgetExceeded> {
        let graph = reachable(&agent, budget)?;
        Ok(AgentModel { agent, graph, ext: RwLock::default() })
    }

    pub fn scope_label(&self) -> String {
        format!("reachable ({} states)", self.graph.len())
    }

    pub fn scope(&self) -> Scope<'_> {
        Scope::States { states: self.graph.nodes(), ctx: Some(&self.agent), label: self.scope_label() }
    }

    /// Reachable nodes satisfying `phi`.
    pub fn ext(&self, phi: &MsFormula) -> Result<Arc<FixedBitSet>, VerifyError> {
        if let Some(x) = self.ext.read().unwrap().get(phi) {
            return Ok(x.clone());
        }
        let vals = self
            .graph
            .nodes()
            .par_iter()
            .map(|s| eval_msf(s, phi, Some(&self.agent)))
            .collect::<Result<Vec<bool>, _>>()?;
        let mut x = FixedBitSet::with_capacity(vals.len());
        for (i, v) in vals.into_iter().enumerate() {
            x.set(i, v);
        }
        let x = Arc::new(x);
        self.ext.write().unwrap().insert(phi.clone(), x.clone());
        Ok(x)
    }

    fn step_witness(&self, i: usize, rule: usize) -> Witness {
        let e = self.graph.edges(i)[rule];
        Witness::Step {
            from: self.graph.node(i).clone(),
            action: self.agent.rule_label(rule),
            to: self.graph.node(e.to).clone(),
            executed: e.executed,
        }
    }

    /// `{pre} b {post}` for rule `rule` over the reachable states.
    pub fn check_rule_triple(&self, pre: &MsFormula, rule: usize, post: &MsFormula) -> Result<Verdict, VerifyError> {
        let (p, q) = (self.ext(pre)?, self.ext(post)?);
        let bad = p.ones().find(|&i| !q.contains(self.graph.edges(i)[rule].to));
        Ok(match bad {
            None => Verdict::pass(self.scope_label()),
            Some(i) => Verdict::fail(self.scope_label(), self.step_witness(i, rule)),
        })
    }
}

/// A triple for a conditional action, checked at every reachable state: the
/// successor when the action executes, the state itself when it idles.
pub fn check_hoare_conditional(t: &HoareTriple, model: &AgentModel) -> Result<Verdict, VerifyError> {
    let b = match &t.statement {
        Statement::Conditional(b) => b,
        Statement::Action(_) => return Err(VerifyError::Unsupported("basic action in a conditional triple".into())),
    };
    if let Some(rule) = model.agent.program.iter().position(|r| r == b) {
        return model.check_rule_triple(&t.pre, rule, &t.post);
    }
    let label = model.scope_label();
    for s in model.graph.nodes() {
        if eval_msf(s, &t.pre, Some(&model.agent))? {
            let st = step(s, b);
            if !eval_msf(&st.to, &t.post, Some(&model.agent))? {
                return Ok(Verdict::fail(
                    label,
                    Witness::Step { from: st.from, action: b.to_string(), to: st.to, executed: st.executed },
                ));
            }
        }
    }
    Ok(Verdict::pass(label))
}

/// Declared preconditions for user capabilities, keyed by (capability, postcondition).
pub type AxiomTable = HashMap<(String, MsFormula), MsFormula>;

pub struct WlpCtx<'a> {
    pub vocab: &'a Vocab,
    pub axioms: &'a AxiomTable,
    canon: Canon,
}

impl<'a> WlpCtx<'a> {
    pub fn new(vocab: &'a Vocab, axioms: &'a AxiomTable) -> Self {
        WlpCtx { vocab, axioms, canon: Canon::new(vocab) }
    }
}

fn g_subst(sigma: &MsFormula, f: &mut impl FnMut(&Formula) -> Option<MsFormula>) -> Result<MsFormula, VerifyError> {
    let mut err = None;
    let out = sigma.map_leaves(&mut |leaf| match leaf {
        MsFormula::G(chi) => f(chi).unwrap_or_else(|| leaf.clone()),
        MsFormula::Enabled(t @ (Target::Cap(_) | Target::Rule(_))) => {
            err.get_or_insert_with(|| VerifyError::Unsupported(format!("enabled({t}) in a wlp postcondition")));
            leaf.clone()
        }
        other => other.clone(),
    });
    err.map_or(Ok(out), Err)
}

fn taut(f: Formula) -> bool {
    prop_logic::tautology(&f)
}

/// Weakest liberal precondition of `statement` for `sigma`.
///
/// `ins` and `adopt`/`drop` have exact syntactic schemas. The `del` schema
/// is exact only on states whose belief base is empty or a single canonical
/// formula over `ctx.vocab`, i.e. on [`Universe`] states. Other capabilities
/// are looked up in `ctx.axioms`.
pub fn wlp(statement: &Statement, sigma: &MsFormula, ctx: &WlpCtx) -> Result<MsFormula, VerifyError> {
    match statement {
        Statement::Conditional(b) => {
            let w = wlp(&Statement::Action(b.action().clone()), sigma, ctx)?;
            let c = b.condition().clone();
            Ok(c.clone().and(w).or(c.not().and(sigma.clone())))
        }
        Statement::Action(Action::Adopt(phi)) => {
            let en = MsFormula::Enabled(Target::Adopt(phi.clone()));
            let sub = g_subst(sigma, &mut |chi| {
                taut(phi.clone().implies(chi.clone())).then(|| MsFormula::b(chi.clone()).not())
            })?;
            Ok(en.clone().and(sub).or(en.not().and(sigma.clone())))
        }
        Statement::Action(Action::Drop(phi)) => {
            g_subst(sigma, &mut |chi| taut(chi.clone().implies(phi.clone())).then_some(MsFormula::False))
        }
        Statement::Action(Action::Cap(cap)) => match cap.builtin() {
            Some(("ins", psi)) => wlp_ins(psi, sigma),
            Some((_, psi)) => wlp_del(psi, sigma, ctx),
            None => ctx
                .axioms
                .get(&(cap.name.clone(), sigma.clone()))
                .cloned()
                .ok_or_else(|| VerifyError::MissingAxiom { cap: cap.name.clone(), post: sigma.clone() }),
        },
    }
}

fn wlp_ins(psi: &Formula, sigma: &MsFormula) -> Result<MsFormula, VerifyError> {
    let rel = |chi: &Formula| MsFormula::b(psi.clone().implies(chi.clone()));
    let mut err = None;
    let sub = sigma.map_leaves(&mut |leaf| match leaf {
        MsFormula::B(chi) => rel(chi),
        MsFormula::G(chi) => leaf.clone().and(rel(chi).not()),
        MsFormula::Enabled(Target::Adopt(chi)) => leaf.clone().and(rel(chi).not()),
        MsFormula::Enabled(t @ (Target::Cap(_) | Target::Rule(_))) => {
            err.get_or_insert_with(|| VerifyError::Unsupported(format!("enabled({t}) in a wlp postcondition")));
            leaf.clone()
        }
        other => other.clone(),
    });
    if let Some(e) = err {
        return Err(e);
    }
    let blocked = MsFormula::b(psi.clone().not());
    Ok(blocked.clone().not().and(sub).or(blocked.and(sigma.clone())))
}

fn wlp_del(psi: &Formula, sigma: &MsFormula, ctx: &WlpCtx) -> Result<MsFormula, VerifyError> {
    if let Some(a) = psi.atoms().into_iter().find(|a| ctx.vocab.index_of(a).is_none()) {
        return Err(OracleError::OutsideVocab(a.to_string()).into());
    }
    let n = ctx.vocab.len();
    let m = models(psi, ctx.vocab);
    // Only the canonical formula of a theory ever sits in a universe belief base.
    if m.is_full() || ctx.canon.formula(&m) != *psi {
        return Ok(sigma.clone());
    }
    let exact = MsFormula::conj(
        std::iter::once(MsFormula::b(psi.clone()))
            .chain(m.iter().map(|v| MsFormula::b(minterm(ctx.vocab, v).not()).not())),
    );
    let consistent: Vec<(ModelSet, Formula)> = (1..=ModelSet::full(n).mask())
        .map(|k| {
            let s = ModelSet::from_mask(n, k);
            let f = ctx.canon.formula(&s);
            (s, f)
        })
        .collect();
    let mut err = None;
    let sub = sigma.map_leaves(&mut |leaf| {
        let c = |b: bool| if b { MsFormula::True } else { MsFormula::False };
        match leaf {
            MsFormula::B(chi) => c(taut(chi.clone())),
            MsFormula::Enabled(Target::Adopt(chi)) => {
                c(prop_logic::consistent(std::slice::from_ref(chi)) && !taut(chi.clone()))
            }
            MsFormula::G(chi) => {
                let cm = models(chi, ctx.vocab);
                if cm.is_empty() || cm.is_full() {
                    return MsFormula::False;
                }
                let ds: Vec<MsFormula> =
                    consistent.iter().filter(|(s, _)| s.is_subset(&cm)).map(|(_, f)| MsFormula::g(f.clone())).collect();
                MsFormula::disj(ds)
            }
            MsFormula::Enabled(t @ (Target::Cap(_) | Target::Rule(_))) => {
                err.get_or_insert_with(|| VerifyError::Unsupported(format!("enabled({t}) in a wlp postcondition")));
                leaf.clone()
            }
            other => other.clone(),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(exact.clone().and(sub).or(exact.not().and(sigma.clone())))
}

/// `pre → wlp(statement, post)` decided by the oracle; a countermodel is a
/// state from which the triple fails.
pub fn derive_hoare(t: &HoareTriple, ctx: &WlpCtx, oracle: &dyn ValidityOracle) -> Result<Verdict, VerifyError> {
    let w = wlp(&t.statement, &t.post, ctx)?;
    let scope = format!("wlp + validity oracle over {} atoms", ctx.vocab.len());
    Ok(match oracle.validity(&t.pre.clone().implies(w))? {
        Validity::ValidWithinBounds => Verdict::pass(scope),
        Validity::Countermodel(s) => Verdict::fail(scope, Witness::State(s)),
    })
}

/// Per-rule triples `{φ∧¬ψ} b {φ∨ψ}`.
#[derive(Clone, Debug)]
pub struct UnlessReport {
    pub per_rule: Vec<Verdict>,
}

impl UnlessReport {
    pub fn holds(&self) -> bool {
        self.per_rule.iter().all(|v| v.holds)
    }
}

pub fn check_unless(phi: &MsFormula, psi: &MsFormula, model: &AgentModel) -> Result<UnlessReport, VerifyError> {
    let pre = phi.clone().and(psi.clone().not());
    let post = phi.clone().or(psi.clone());
    let per_rule = (0..model.agent.program.len())
        .into_par_iter()
        .map(|r| model.check_rule_triple(&pre, r, &post))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(UnlessReport { per_rule })
}

#[derive(Clone, Debug)]
pub struct EnsuresReport {
    pub unless: UnlessReport,
    /// A rule enabled at every reachable φ∧¬ψ state whose triple establishes ψ.
    pub helpful: Option<usize>,
    /// No reachable state satisfies φ∧¬ψ.
    pub vacuous: bool,
    pub verdict: Verdict,
}

impl EnsuresReport {
    pub fn holds(&self) -> bool {
        self.verdict.holds
    }
}

pub fn check_ensures(phi: &MsFormula, psi: &MsFormula, model: &AgentModel) -> Result<EnsuresReport, VerifyError> {
    let unless = check_unless(phi, psi, model)?;
    let pre = phi.clone().and(psi.clone().not());
    let live = model.ext(&pre)?;
    let vacuous = live.count_ones(..) == 0;
    let label = model.scope_label();
    let mut helpful = None;
    let mut first_fail = None;
    for (r, b) in model.agent.program.iter().enumerate() {
        let v = model.check_rule_triple(&pre, r, psi)?;
        let blocked = live.ones().find(|&i| !enabled_cond(b, model.graph.node(i)));
        match (v.holds, blocked) {
            (true, None) => {
                helpful = Some(r);
                break;
            }
            (false, _) => {
                first_fail.get_or_insert(v.witness.unwrap());
            }
            (true, Some(i)) => {
                first_fail.get_or_insert(model.step_witness(i, r));
            }
        }
    }
    let verdict = if let Some(v) = unless.per_rule.iter().find(|v| !v.holds) {
        v.clone()
    } else if helpful.is_some() {
        Verdict::pass(label)
    } else {
        Verdict::fail(label, first_fail.expect("a nonempty program with no helpful rule fails somewhere"))
    };
    Ok(EnsuresReport { unless, helpful, vacuous, verdict })
}

/// Derivation of `φ ↦ ψ` from ensures facts by transitivity and disjunction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LeadsToProof {
    Ensures(MsFormula, MsFormula),
    /// `φ ↦ χ` and `χ ↦ ψ` give `φ ↦ ψ`; the middle formulas must be identical.
    Trans(Box<LeadsToProof>, Box<LeadsToProof>),
    /// `φ_i ↦ ψ` for all i give `φ_1 ∨ .. ∨ φ_n ↦ ψ` (left-nested).
    Disj(Vec<LeadsToProof>),
}

impl LeadsToProof {
    pub fn trans(a: LeadsToProof, b: LeadsToProof) -> Self {
        LeadsToProof::Trans(Box::new(a), Box::new(b))
    }

    pub fn conclusion(&self) -> Result<(MsFormula, MsFormula), VerifyError> {
        match self {
            LeadsToProof::Ensures(a, b) => Ok((a.clone(), b.clone())),
            LeadsToProof::Trans(p, q) => {
                let (a, m1) = p.conclusion()?;
                let (m2, b) = q.conclusion()?;
                if m1 != m2 {
                    return Err(VerifyError::Malformed(format!("transitivity middle formulas differ: `{m1}` vs `{m2}`")));
                }
                Ok((a, b))
            }
            LeadsToProof::Disj(ps) => {
                let concl = ps.iter().map(|p| p.conclusion()).collect::<Result<Vec<_>, _>>()?;
                let Some((_, psi)) = concl.first().cloned() else {
                    return Err(VerifyError::Malformed("disjunction node without premises".into()));
                };
                if let Some((_, other)) = concl.iter().find(|(_, b)| *b != psi) {
                    return Err(VerifyError::Malformed(format!("disjunction premises differ in target: `{psi}` vs `{other}`")));
                }
                Ok((MsFormula::disj(concl.into_iter().map(|(a, _)| a)), psi))
            }
        }
    }

    pub fn leaves(&self) -> Vec<(MsFormula, MsFormula)> {
        match self {
            LeadsToProof::Ensures(a, b) => vec![(a.clone(), b.clone())],
            LeadsToProof::Trans(p, q) => {
                let mut v = p.leaves();
                v.extend(q.leaves());
                v
            }
            LeadsToProof::Disj(ps) => ps.iter().flat_map(|p| p.leaves()).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LeadsToReport {
    pub conclusion: (MsFormula, MsFormula),
    pub leaves: Vec<(MsFormula, MsFormula, EnsuresReport)>,
}

impl LeadsToReport {
    pub fn holds(&self) -> bool {
        self.leaves.iter().all(|(_, _, r)| r.holds())
    }
}

pub fn check_leadsto(proof: &LeadsToProof, model: &AgentModel) -> Result<LeadsToReport, VerifyError> {
    let conclusion = proof.conclusion()?;
    let mut leaves = Vec::new();
    for (a, b) in proof.leaves() {
        let r = check_ensures(&a, &b, model)?;
        leaves.push((a, b, r));
    }
    Ok(LeadsToReport { conclusion, leaves })
}

fn left_disjuncts(f: &MsFormula) -> Vec<MsFormula> {
    match f {
        MsFormula::Or(a, b) => {
            let mut v = left_disjuncts(a);
            v.push((**b).clone());
            v
        }
        other => vec![other.clone()],
    }
}

/// Builds a proof of `φ ↦ ψ` from the given ensures facts: chains by
/// transitivity, splitting a left-nested disjunction by the disjunction rule
/// when no fact starts at it.
pub fn search_leadsto(phi: &MsFormula, psi: &MsFormula, facts: &[(MsFormula, MsFormula)]) -> Option<LeadsToProof> {
    fn go(
        phi: &MsFormula,
        psi: &MsFormula,
        facts: &[(MsFormula, MsFormula)],
        on_path: &mut HashSet<MsFormula>,
    ) -> Option<LeadsToProof> {
        if !on_path.insert(phi.clone()) {
            return None;
        }
        let mut found = None;
        for (a, b) in facts.iter().filter(|(a, _)| a == phi) {
            let leaf = LeadsToProof::Ensures(a.clone(), b.clone());
            if b == psi {
                found = Some(leaf);
                break;
            }
            if let Some(rest) = go(b, psi, facts, on_path) {
                found = Some(LeadsToProof::trans(leaf, rest));
                break;
            }
        }
        if found.is_none() {
            let ds = left_disjuncts(phi);
            if ds.len() > 1 {
                found = ds.iter().map(|d| go(d, psi, facts, on_path)).collect::<Option<Vec<_>>>().map(LeadsToProof::Disj);
            }
        }
        on_path.remove(phi);
        found
    }
    go(phi, psi, facts, &mut HashSet::new())
}

/// Linear-time formulas over mental-state formulas.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TemporalFormula {
    Init,
    State(MsFormula),
    Not(Box<TemporalFormula>),
    And(Box<TemporalFormula>, Box<TemporalFormula>),
    Or(Box<TemporalFormula>, Box<TemporalFormula>),
    Implies(Box<TemporalFormula>, Box<TemporalFormula>),
    /// Weak until.
    Until(Box<TemporalFormula>, Box<TemporalFormula>),
}

impl TemporalFormula {
    pub fn state(phi: MsFormula) -> Self {
        TemporalFormula::State(phi)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        TemporalFormula::Not(Box::new(self))
    }

    pub fn and(self, o: Self) -> Self {
        TemporalFormula::And(Box::new(self), Box::new(o))
    }

    pub fn or(self, o: Self) -> Self {
        TemporalFormula::Or(Box::new(self), Box::new(o))
    }

    pub fn implies(self, o: Self) -> Self {
        TemporalFormula::Implies(Box::new(self), Box::new(o))
    }

    pub fn until(self, o: Self) -> Self {
        TemporalFormula::Until(Box::new(self), Box::new(o))
    }

    pub fn always(phi: MsFormula) -> Self {
        Self::state(phi).until(Self::state(MsFormula::False))
    }

    pub fn eventually(phi: MsFormula) -> Self {
        Self::state(phi.not()).until(Self::state(MsFormula::False)).not()
    }

    /// `φ → (φ until ψ)`.
    pub fn unless(phi: MsFormula, psi: MsFormula) -> Self {
        Self::state(phi.clone()).implies(Self::state(phi).until(Self::state(psi)))
    }

    pub fn ensures(phi: MsFormula, psi: MsFormula) -> Self {
        Self::unless(phi.clone(), psi.clone()).and(Self::leadsto(phi, psi))
    }

    /// `φ → ◇ψ`, the trace meaning of `φ ↦ ψ`.
    pub fn leadsto(phi: MsFormula, psi: MsFormula) -> Self {
        Self::state(phi).implies(Self::eventually(psi))
    }

    /// The equivalent state formula, if this has no `init` or `until`.
    pub fn as_state(&self) -> Option<MsFormula> {
        self.local(None)
    }

    /// Like [`as_state`](Self::as_state), with `init` read as the given
    /// constant when there is one.
    fn local(&self, init: Option<bool>) -> Option<MsFormula> {
        Some(match self {
            TemporalFormula::Init => match init? {
                true => MsFormula::True,
                false => MsFormula::False,
            },
            TemporalFormula::Until(..) => return None,
            TemporalFormula::State(p) => p.clone(),
            TemporalFormula::Not(a) => a.local(init)?.not(),
            TemporalFormula::And(a, b) => a.local(init)?.and(b.local(init)?),
            TemporalFormula::Or(a, b) => a.local(init)?.or(b.local(init)?),
            TemporalFormula::Implies(a, b) => a.local(init)?.implies(b.local(init)?),
        })
    }
}

impl fmt::Display for TemporalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalFormula::Init => f.write_str("init"),
            TemporalFormula::State(p) => write!(f, "[{p}]"),
            TemporalFormula::Not(a) => write!(f, "!({a})"),
            TemporalFormula::And(a, b) => write!(f, "({a} & {b})"),
            TemporalFormula::Or(a, b) => write!(f, "({a} | {b})"),
            TemporalFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
            TemporalFormula::Until(a, b) => write!(f, "({a} until {b})"),
        }
    }
}

/// An ultimately periodic path over graph nodes: `rules[k]` leads from
/// `nodes[k]` to `nodes[k+1]`, and from the last node back to
/// `nodes[loop_start]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Lasso {
    pub nodes: Vec<usize>,
    pub rules: Vec<usize>,
    pub loop_start: usize,
}

impl Lasso {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Folds position `i` of the infinite path onto the stored nodes.
    pub fn norm(&self, i: usize) -> usize {
        if i < self.nodes.len() {
            i
        } else {
            self.loop_start + (i - self.loop_start) % (self.nodes.len() - self.loop_start)
        }
    }

    pub fn is_path_of(&self, g: &StateGraph) -> bool {
        let n = self.nodes.len();
        n > 0
            && self.loop_start < n
            && self.rules.len() == n
            && (0..n).all(|k| {
                let next = if k + 1 < n { self.nodes[k + 1] } else { self.nodes[self.loop_start] };
                g.edges(self.nodes[k]).get(self.rules[k]).is_some_and(|e| e.to == next)
            })
    }

    /// Every rule is taken on the cycle.
    pub fn is_fair(&self, num_rules: usize) -> bool {
        let mut seen = vec![false; num_rules];
        for r in &self.rules[self.loop_start..] {
            seen[*r] = true;
        }
        seen.into_iter().all(|b| b)
    }

    /// Truth of `t` at position `i`, with `state(phi, node)` deciding state formulas.
    pub fn eval<E>(&self, t: &TemporalFormula, i: usize, state: &mut impl FnMut(&MsFormula, usize) -> Result<bool, E>) -> Result<bool, E> {
        let i = self.norm(i);
        Ok(match t {
            TemporalFormula::Init => i == 0,
            TemporalFormula::State(p) => state(p, self.nodes[i])?,
            TemporalFormula::Not(a) => !self.eval(a, i, state)?,
            TemporalFormula::And(a, b) => self.eval(a, i, state)? && self.eval(b, i, state)?,
            TemporalFormula::Or(a, b) => self.eval(a, i, state)? || self.eval(b, i, state)?,
            TemporalFormula::Implies(a, b) => !self.eval(a, i, state)? || self.eval(b, i, state)?,
            TemporalFormula::Until(a, b) => {
                // Every distinct position from i on is visited within len steps.
                for j in i..i.max(self.loop_start) + self.nodes.len() {
                    if self.eval(b, j, state)? {
                        return Ok(true);
                    }
                    if !self.eval(a, j, state)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }

    pub fn to_witness(&self, g: &StateGraph, position: usize) -> Witness {
        Witness::Lasso {
            states: self.nodes.iter().map(|&i| g.node(i).clone()).collect(),
            rules: self.rules.clone(),
            loop_start: self.loop_start,
            position,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Truth {
    True,
    False,
    Undetermined,
}

impl Truth {
    fn of(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Undetermined => Truth::Undetermined,
        }
    }

    fn and(self, o: Self) -> Self {
        match (self, o) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Undetermined,
        }
    }

    fn or(self, o: Self) -> Self {
        self.not().and(o.not()).not()
    }
}

/// Truth of `t` at position `i` of a finite prefix. Anything that depends on
/// the unseen continuation is `Undetermined`.
pub fn eval_prefix(prefix: &TracePrefix, t: &TemporalFormula, i: usize, ctx: &dyn EnabledCtx) -> Result<Truth, EvalError> {
    let n = prefix.states.len();
    Ok(match t {
        TemporalFormula::Init => Truth::of(i == 0),
        TemporalFormula::State(p) => {
            if i < n {
                Truth::of(eval_msf(&prefix.states[i], p, Some(ctx))?)
            } else {
                Truth::Undetermined
            }
        }
        TemporalFormula::Not(a) => eval_prefix(prefix, a, i, ctx)?.not(),
        TemporalFormula::And(a, b) => eval_prefix(prefix, a, i, ctx)?.and(eval_prefix(prefix, b, i, ctx)?),
        TemporalFormula::Or(a, b) => eval_prefix(prefix, a, i, ctx)?.or(eval_prefix(prefix, b, i, ctx)?),
        TemporalFormula::Implies(a, b) => eval_prefix(prefix, a, i, ctx)?.not().or(eval_prefix(prefix, b, i, ctx)?),
        TemporalFormula::Until(a, b) => {
            // Q at j, or (P at j and until at j+1), unrolled; pending past the end.
            let mut acc = Truth::Undetermined;
            for j in (i..n).rev() {
                let q = eval_prefix(prefix, b, j, ctx)?;
                let p = eval_prefix(prefix, a, j, ctx)?;
                acc = q.or(p.and(acc));
            }
            acc
        }
    })
}

/// Fair-trace evaluation on the reachable graph.
impl AgentModel {
    fn num_rules(&self) -> usize {
        self.agent.program.len()
    }

    /// Nodes of `within` lying in a nontrivial strongly connected component
    /// of the subgraph induced by `within` whose internal edges carry every rule.
    fn fair_core(&self, within: &FixedBitSet) -> FixedBitSet {
        let n = self.graph.len();
        let mut g = DiGraph::<usize, usize>::new();
        let mut idx = vec![None; n];
        for i in within.ones() {
            idx[i] = Some(g.add_node(i));
        }
        for i in within.ones() {
            for e in self.graph.edges(i) {
                if let (Some(a), Some(b)) = (idx[i], idx[e.to]) {
                    g.add_edge(a, b, e.rule);
                }
            }
        }
        let mut out = FixedBitSet::with_capacity(n);
        for comp in tarjan_scc(&g) {
            let members: HashSet<usize> = comp.iter().map(|x| g[*x]).collect();
            let mut rules = vec![false; self.num_rules()];
            for &i in &members {
                for e in self.graph.edges(i) {
                    if members.contains(&e.to) {
                        rules[e.rule] = true;
                    }
                }
            }
            if rules.iter().all(|b| *b) {
                for i in members {
                    out.insert(i);
                }
            }
        }
        out
    }

    /// Nodes in `within` with a path inside `within` to a node of `target`
    /// (the target itself may lie outside `within`).
    fn reach_within(&self, within: &FixedBitSet, target: &FixedBitSet) -> FixedBitSet {
        let n = self.graph.len();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for e in self.graph.edges(i) {
                rev[e.to].push(i);
            }
        }
        let mut out = target.clone();
        let mut queue: VecDeque<usize> = target.ones().collect();
        while let Some(j) = queue.pop_front() {
            for &i in &rev[j] {
                if within.contains(i) && !out.contains(i) {
                    out.insert(i);
                    queue.push_back(i);
                }
            }
        }
        out
    }

    fn full(&self) -> FixedBitSet {
        let mut x = FixedBitSet::with_capacity(self.graph.len());
        x.insert_range(..);
        x
    }

    /// Nodes from which some fair trace gives `t` the truth value `pol` at
    /// its first position; `init` says whether that position is 0.
    fn exists(&self, t: &TemporalFormula, pol: bool, init: bool) -> Result<FixedBitSet, VerifyError> {
        if let Some(p) = t.local(Some(init)) {
            let mut x = (*self.ext(&p)?).clone();
            if !pol {
                x.toggle_range(..);
            }
            return Ok(x);
        }
        let unsupported = || VerifyError::Unsupported(format!("existential fair-path evaluation of {t}"));
        Ok(match t {
            TemporalFormula::Not(a) => self.exists(a, !pol, init)?,
            TemporalFormula::And(a, b) | TemporalFormula::Or(a, b) => {
                let conj = matches!(t, TemporalFormula::And(..));
                if conj != pol {
                    // ∧ false or ∨ true: either side suffices.
                    let mut x = self.exists(a, pol, init)?;
                    x.union_with(&self.exists(b, pol, init)?);
                    x
                } else if let Some(sa) = a.local(Some(init)) {
                    let mut x = self.exists(&TemporalFormula::State(sa), pol, init)?;
                    x.intersect_with(&self.exists(b, pol, init)?);
                    x
                } else if let Some(sb) = b.local(Some(init)) {
                    let mut x = self.exists(&TemporalFormula::State(sb), pol, init)?;
                    x.intersect_with(&self.exists(a, pol, init)?);
                    x
                } else {
                    return Err(unsupported());
                }
            }
            TemporalFormula::Implies(a, b) => self.exists(&a.clone().not().or((**b).clone()), pol, init)?,
            TemporalFormula::Until(a, b) => {
                let (Some(p), Some(q)) = (a.as_state(), b.as_state()) else {
                    return Err(unsupported());
                };
                let (p, q) = (self.ext(&p)?, self.ext(&q)?);
                if pol {
                    let mut target = (*q).clone();
                    target.union_with(&self.fair_core(&p));
                    self.reach_within(&p, &target)
                } else {
                    let mut p_not_q = (*p).clone();
                    p_not_q.difference_with(&q);
                    let mut stop = self.full();
                    stop.difference_with(&p);
                    stop.difference_with(&q);
                    self.reach_within(&p_not_q, &stop)
                }
            }
            TemporalFormula::State(_) | TemporalFormula::Init => unreachable!("local formulas are handled above"),
        })
    }

    /// Nodes occupying some position ≥ 1 of some trace.
    fn later_nodes(&self) -> FixedBitSet {
        let n = self.graph.len();
        let mut out = FixedBitSet::with_capacity(n);
        let mut queue: VecDeque<usize> = self.graph.edges(0).iter().map(|e| e.to).collect();
        while let Some(i) = queue.pop_front() {
            if out.put(i) {
                continue;
            }
            queue.extend(self.graph.edges(i).iter().map(|e| e.to));
        }
        out
    }

    /// Validity of `t` at every position of every fair trace. On failure,
    /// returns a node at which some fair trace falsifies `t`, and whether
    /// that position is the initial one.
    pub fn eval_graph(&self, t: &TemporalFormula) -> Result<Option<(usize, bool)>, VerifyError> {
        if self.exists(t, false, true)?.contains(0) {
            return Ok(Some((0, true)));
        }
        let mut bad = self.exists(t, false, false)?;
        bad.intersect_with(&self.later_nodes());
        Ok(bad.ones().next().map(|i| (i, false)))
    }

    fn bfs_path(&self, from: usize, within: &FixedBitSet, target: &FixedBitSet) -> Option<(Vec<usize>, Vec<usize>)> {
        let n = self.graph.len();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = FixedBitSet::with_capacity(n);
        seen.insert(from);
        let mut queue = VecDeque::from([from]);
        while let Some(i) = queue.pop_front() {
            if target.contains(i) {
                let (mut nodes, mut rules) = (vec![i], vec![]);
                let mut cur = i;
                while let Some((p, r)) = prev[cur] {
                    nodes.push(p);
                    rules.push(r);
                    cur = p;
                }
                nodes.reverse();
                rules.reverse();
                return Some((nodes, rules));
            }
            for e in self.graph.edges(i) {
                if (within.contains(e.to) || target.contains(e.to)) && !seen.put(e.to) {
                    prev[e.to] = Some((i, e.rule));
                    queue.push_back(e.to);
                }
            }
        }
        None
    }

    /// A closed walk from `start` inside its component of `core` (a union of
    /// fair components) taking every rule.
    fn covering_cycle(&self, start: usize, core: &FixedBitSet) -> (Vec<usize>, Vec<usize>) {
        let (mut nodes, mut rules) = (vec![start], vec![]);
        let mut cur = start;
        let reach_back = |m: &AgentModel, a: usize, b: usize| {
            let mut t = FixedBitSet::with_capacity(m.graph.len());
            t.insert(b);
            m.bfs_path(a, core, &t)
        };
        for r in 0..self.num_rules() {
            // An internal edge labelled r in start's component.
            let (u, to) = core
                .ones()
                .filter(|&u| reach_back(self, start, u).is_some() && reach_back(self, u, start).is_some())
                .find_map(|u| {
                    let e = self.graph.edges(u)[r];
                    (core.contains(e.to) && reach_back(self, e.to, start).is_some()).then_some((u, e.to))
                })
                .expect("fair component carries every rule");
            let (ns, rs) = reach_back(self, cur, u).unwrap();
            nodes.extend(&ns[1..]);
            rules.extend(rs);
            rules.push(r);
            nodes.push(to);
            cur = to;
        }
        let (ns, rs) = reach_back(self, cur, start).unwrap();
        nodes.extend(&ns[1..]);
        rules.extend(rs);
        // The walk ends back at start; drop the duplicate final node.
        nodes.pop();
        (nodes, rules)
    }

    /// `stem` (ending anywhere) extended to a fair lasso that stays inside
    /// `within` and settles in `core ∩ within`.
    fn close_lasso(&self, mut nodes: Vec<usize>, mut rules: Vec<usize>, within: &FixedBitSet) -> Option<Lasso> {
        let core = self.fair_core(within);
        let (ns, rs) = self.bfs_path(*nodes.last()?, within, &core)?;
        nodes.extend(&ns[1..]);
        rules.extend(rs);
        let loop_start = nodes.len() - 1;
        let (cn, cr) = self.covering_cycle(nodes[loop_start], &core);
        nodes.pop();
        nodes.extend(cn);
        rules.extend(cr);
        let l = Lasso { nodes, rules, loop_start };
        debug_assert!(l.is_path_of(&self.graph) && l.is_fair(self.num_rules()));
        Some(l)
    }

    /// A fair lasso from the initial node with `φ ∧ ¬(φ until ψ)` at the returned position.
    pub fn unless_counterexample(&self, phi: &MsFormula, psi: &MsFormula) -> Result<Option<(Lasso, usize)>, VerifyError> {
        let (p, q) = (self.ext(phi)?, self.ext(psi)?);
        let mut seg = (*p).clone();
        seg.difference_with(&q);
        let mut stop = self.full();
        stop.difference_with(&p);
        stop.difference_with(&q);
        let bad = self.reach_within(&seg, &stop);
        let mut starts = seg.clone();
        starts.intersect_with(&bad);
        let all = self.full();
        // Positions ≥ 1 are entered by an edge; position 0 is node 0 itself.
        let mut entry = self.later_nodes();
        entry.insert(0);
        starts.intersect_with(&entry);
        let Some((stem, stem_rules)) = self.bfs_path(0, &all, &starts) else {
            return Ok(None);
        };
        let position = stem.len() - 1;
        let (ns, rs) = self.bfs_path(stem[position], &seg, &stop).expect("start reaches a stop node");
        let mut nodes = stem;
        let mut rules = stem_rules;
        nodes.extend(&ns[1..]);
        rules.extend(rs);
        Ok(self.close_lasso(nodes, rules, &all).map(|l| (l, position)))
    }

    /// A fair lasso from the initial node with φ at the returned position and ψ never from there on.
    pub fn eventually_counterexample(&self, phi: &MsFormula, psi: &MsFormula) -> Result<Option<(Lasso, usize)>, VerifyError> {
        let (p, q) = (self.ext(phi)?, self.ext(psi)?);
        let mut avoid = self.full();
        avoid.difference_with(&q);
        let core = self.fair_core(&avoid);
        let escape = self.reach_within(&avoid, &core);
        let mut starts = (*p).clone();
        starts.intersect_with(&escape);
        let all = self.full();
        let Some((nodes, rules)) = self.bfs_path(0, &all, &starts) else {
            return Ok(None);
        };
        let position = nodes.len() - 1;
        Ok(self.close_lasso(nodes, rules, &avoid).map(|l| (l, position)))
    }

    /// Direct evaluation of `t` on a lasso of this graph.
    pub fn eval_lasso(&self, lasso: &Lasso, t: &TemporalFormula, i: usize) -> Result<bool, VerifyError> {
        lasso.eval(t, i, &mut |p, n| Ok::<bool, VerifyError>(self.ext(p)?.contains(n)))
    }
}

/// One reported check.
#[derive(Clone, Debug)]
pub struct Obligation {
    pub name: String,
    pub rule: String,
    pub verdict: Verdict,
}

fn ob(name: impl Into<String>, rule: &str, verdict: Verdict) -> Obligation {
    Obligation { name: name.into(), rule: rule.into(), verdict }
}

fn unless_obligations(name: &str, phi: &MsFormula, psi: &MsFormula, model: &AgentModel) -> Result<Vec<Obligation>, VerifyError> {
    let r = check_unless(phi, psi, model)?;
    Ok(r.per_rule
        .into_iter()
        .enumerate()
        .map(|(i, v)| ob(format!("{name}: {{φ∧¬ψ}} {} {{φ∨ψ}}", model.agent.rule_label(i)), "unless via per-rule Hoare triples", v))
        .collect())
}

fn ensures_obligation(name: &str, phi: &MsFormula, psi: &MsFormula, model: &AgentModel) -> Result<Obligation, VerifyError> {
    let r = check_ensures(phi, psi, model)?;
    let how = match (r.vacuous, r.helpful) {
        (true, _) => "vacuous".to_string(),
        (false, Some(h)) => format!("helpful {}", model.agent.rule_label(h)),
        (false, None) => "no helpful rule".to_string(),
    };
    Ok(ob(format!("{name} [{how}]"), "ensures: unless + enabled helpful rule", r.verdict))
}

fn trace_obligation(name: &str, t: &TemporalFormula, model: &AgentModel, witness: Option<(Lasso, usize)>) -> Result<Obligation, VerifyError> {
    let bad = model.eval_graph(t)?;
    let scope = format!("{}, all fair traces", model.scope_label());
    let v = match (bad, witness) {
        (None, _) => Verdict::pass(scope),
        (Some(_), Some((l, pos))) => Verdict::fail(scope, l.to_witness(&model.graph, pos)),
        (Some((i, _)), None) => Verdict::fail(scope, Witness::State(model.graph.node(i).clone())),
    };
    Ok(ob(name, "fair-trace semantics", v))
}

/// Checks one declared property, returning its obligations in a fixed order.
pub fn verify_property(p: &Property, model: &AgentModel) -> Result<Vec<Obligation>, VerifyError> {
    let label = model.scope_label();
    let mut out = Vec::new();
    match p {
        Property::Invariant(phi) => {
            let s0 = model.agent.init_state().clone();
            let v = if eval_msf(&s0, phi, Some(&model.agent))? {
                Verdict::pass("initial state")
            } else {
                Verdict::fail("initial state", Witness::State(s0))
            };
            out.push(ob(format!("invariant {phi}: init"), "initial state", v));
            out.extend(unless_obligations(&format!("invariant {phi}: stable"), phi, &MsFormula::False, model)?);
        }
        Property::Unless(phi, psi) => out.extend(unless_obligations(&format!("{phi} unless {psi}"), phi, psi, model)?),
        Property::Ensures(phi, psi) => out.push(ensures_obligation(&format!("{phi} ensures {psi}"), phi, psi, model)?),
        Property::LeadsTo(phi, psi) => {
            let name = format!("{phi} leadsto {psi}");
            let facts: Vec<(MsFormula, MsFormula)> = model
                .agent
                .properties
                .iter()
                .filter_map(|q| match q {
                    Property::Ensures(a, b) => Some((a.clone(), b.clone())),
                    _ => None,
                })
                .collect();
            match search_leadsto(phi, psi, &facts) {
                None => {
                    let w = Witness::State(model.agent.init_state().clone());
                    out.push(ob(
                        format!("{name}: no derivation from the declared ensures properties"),
                        "leads-to rules",
                        Verdict::fail(label.clone(), w),
                    ));
                }
                Some(proof) => {
                    let r = check_leadsto(&proof, model)?;
                    let failed = r.leaves.iter().find(|(_, _, e)| !e.holds()).map(|(_, _, e)| e.verdict.clone());
                    let v = failed.unwrap_or_else(|| Verdict::pass(label.clone()));
                    out.push(ob(format!("{name}: derivation from {} ensures", r.leaves.len()), "leads-to rules", v));
                }
            }
            let w = model.eventually_counterexample(phi, psi)?;
            out.push(trace_obligation(&format!("{name}: φ → ◇ψ"), &TemporalFormula::leadsto(phi.clone(), psi.clone()), model, w)?);
        }
        Property::Hoare(pre, a, post) => {
            let t = HoareTriple::basic(pre.clone(), a.clone(), post.clone());
            out.push(ob(t.to_string(), "Hoare triple for basic actions", check_hoare_basic(&t, &model.scope())?));
        }
    }
    Ok(out)
}

pub fn verify_agent(model: &AgentModel) -> Result<Vec<Obligation>, VerifyError> {
    let mut out = Vec::new();
    for p in &model.agent.properties {
        out.extend(verify_property(p, model)?);
    }
    Ok(out)
}

/// Per-capability triples behind the stability of `status(book)` and `inv`
/// for the shopping agent, each reported on its own.
pub fn shopping_obligations(model: &AgentModel) -> Result<Vec<Obligation>, VerifyError> {
    use crate::shopping::{inv, status, BOOKS};
    let b = |s: &str| MsFormula::b(Formula::atom(s));
    let g = |s: &str| MsFormula::g(Formula::atom(s));
    let scope = model.scope();
    let mut out = Vec::new();
    let mut push = |name: String, rule: &str, pre: MsFormula, a: &Action, post: MsFormula| -> Result<(), VerifyError> {
        let t = HoareTriple::basic(pre, a.clone(), post);
        out.push(ob(format!("{name}: {t}"), rule, check_hoare_basic(&t, &scope)?));
        Ok(())
    };
    let caps: Vec<Action> = model.agent.capabilities.iter().map(|c| Action::Cap(c.clone())).collect();
    for a in &caps {
        push("frame inv".into(), "frame axiom", inv(), a, inv())?;
    }
    for book in BOOKS {
        let (cart, bought) = (format!("in_cart_{book}"), format!("bought_{book}"));
        let held = b(&cart).and(g(&bought));
        for a in &caps {
            push(format!("(1) {book}"), "frame axiom", b(&bought), a, b(&bought))?;
        }
        for a in caps.iter().filter(|a| a.to_string() != "pay_cart") {
            push(format!("(2) {book}"), "frame axiom + goal persistence", held.clone(), a, held.clone())?;
        }
        if let Some(pay) = caps.iter().find(|a| a.to_string() == "pay_cart") {
            push(format!("(3) {book}"), "effect axiom", held.clone().and(b("ContentCart")), pay, b(&bought))?;
            let idle = held.clone().and(b("ContentCart").not());
            push(format!("(4) {book}"), "infeasible capability", idle.clone(), pay, idle)?;
        }
        for a in &caps {
            push(format!("status({book})"), "consequence + disjunction", status(book), a, status(book))?;
        }
    }
    for (i, rule) in model.agent.program.iter().enumerate() {
        let t = HoareTriple::conditional(inv(), rule.clone(), inv());
        out.push(ob(format!("inv under {}: {t}", model.agent.rule_label(i)), "Hoare triple for conditional actions", check_hoare_conditional(&t, model)?));
    }
    Ok(out)
}

/// The proof outline for the shopping agent, with the bridge steps between
/// (3) and (4) that make the transitivity middles syntactically equal.
pub fn shopping_proof() -> LeadsToProof {
    let steps = crate::shopping::steps();
    let leaf = |i: usize| LeadsToProof::Ensures(steps[i].pre.clone(), steps[i].post.clone());
    let chain = |from: usize| (from..from + 6).rev().map(leaf).reduce(|acc, l| LeadsToProof::trans(l, acc)).unwrap();
    let split = LeadsToProof::Disj(vec![chain(3), chain(9)]);
    let tail = LeadsToProof::trans(split, leaf(15));
    LeadsToProof::trans(leaf(0), LeadsToProof::trans(leaf(1), LeadsToProof::trans(leaf(2), tail)))
}
