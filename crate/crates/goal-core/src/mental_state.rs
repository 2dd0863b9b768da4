//! Mental states ⟨Σ, Γ⟩ and the mental-state formulas evaluated on them.
//!
//! Γ is kept as a finite list of generators. Each generator `γ` may carry
//! exclusions left behind by `drop`: it contributes every consistent,
//! non-believed `ψ` with `γ ⊨ ψ` that entails none of its exclusions.

use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prop_logic::{self, models, models_of_set, parse_prop, Formula, ModelSet, Vocab};
use crate::syntax::{Cursor, ParseError, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("belief base is inconsistent [belief consistency]")]
    InconsistentBeliefs,
    #[error("goal `{0}` is inconsistent [goal consistency]")]
    InconsistentGoal(Formula),
    #[error("goal `{0}` is already entailed by the beliefs [goal not believed]")]
    GoalBelieved(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("`{0}` needs a capability context")]
    NoContext(String),
    #[error("unknown capability `{0}`")]
    UnknownCapability(String),
    #[error("no conditional action @{0}")]
    UnknownRule(usize),
}

/// Σ: a finite set of formulas, compared syntactically.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BeliefBase(pub BTreeSet<Formula>);

impl BeliefBase {
    pub fn new(fs: impl IntoIterator<Item = Formula>) -> Self {
        BeliefBase(fs.into_iter().collect())
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.0.iter()
    }

    pub fn as_vec(&self) -> Vec<Formula> {
        self.0.iter().cloned().collect()
    }

    pub fn entails(&self, phi: &Formula) -> bool {
        prop_logic::entails(&self.as_vec(), phi)
    }

    pub fn is_consistent(&self) -> bool {
        prop_logic::consistent(&self.as_vec())
    }

    /// Members rendered and sorted as text.
    pub fn sorted_strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self.0.iter().map(|f| f.to_string()).collect();
        v.sort();
        v
    }
}

/// A goal generator and the formulas `drop` has excluded from its closure.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Generator {
    pub formula: Formula,
    pub except: BTreeSet<Formula>,
}

impl Generator {
    pub fn plain(formula: Formula) -> Self {
        Generator { formula, except: BTreeSet::new() }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)?;
        if !self.except.is_empty() {
            let ex: Vec<String> = self.except.iter().map(|d| d.to_string()).collect();
            write!(f, " minus {{{}}}", ex.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GoalBase(pub BTreeSet<Generator>);

impl GoalBase {
    pub fn new(fs: impl IntoIterator<Item = Formula>) -> Self {
        GoalBase(fs.into_iter().map(Generator::plain).collect())
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorted_strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        v.sort();
        v
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MentalState {
    beliefs: BeliefBase,
    goals: GoalBase,
}

impl MentalState {
    /// Builds a state, rejecting inconsistent beliefs, inconsistent goals and believed goals.
    pub fn new(beliefs: BeliefBase, goals: GoalBase) -> Result<Self, StateError> {
        let s = MentalState { beliefs, goals };
        s.check()?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(beliefs: BeliefBase, goals: GoalBase) -> Self {
        MentalState { beliefs, goals }
    }

    pub fn beliefs(&self) -> &BeliefBase {
        &self.beliefs
    }

    pub fn goals(&self) -> &GoalBase {
        &self.goals
    }

    /// Re-checks the well-formedness constraints.
    pub fn check(&self) -> Result<(), StateError> {
        if !self.beliefs.is_consistent() {
            return Err(StateError::InconsistentBeliefs);
        }
        for g in self.goals.generators() {
            if !prop_logic::consistent(std::slice::from_ref(&g.formula)) {
                return Err(StateError::InconsistentGoal(g.formula.clone()));
            }
            if self.beliefs.entails(&g.formula) {
                return Err(StateError::GoalBelieved(g.formula.clone()));
            }
        }
        Ok(())
    }

    /// Every atom mentioned by Σ, the generators and their exclusions.
    pub fn atoms(&self) -> BTreeSet<prop_logic::Atom> {
        let mut out = BTreeSet::new();
        for f in self.beliefs.formulas() {
            f.collect_atoms(&mut out);
        }
        for g in self.goals.generators() {
            g.formula.collect_atoms(&mut out);
            for d in &g.except {
                d.collect_atoms(&mut out);
            }
        }
        out
    }

    /// Canonical one-line rendering used for digests and dumps.
    pub fn canonical(&self) -> String {
        format!(
            "beliefs: {{{}}} | goals: {{{}}}",
            self.beliefs.sorted_strings().join(", "),
            self.goals.sorted_strings().join(", ")
        )
    }

    /// Short stable digest of [`MentalState::canonical`].
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&h[..6])
    }
}

impl fmt::Display for MentalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// `G ψ` holds in `state`.
pub fn goal_holds(state: &MentalState, psi: &Formula) -> bool {
    let vocab = state_vocab(state, [psi]);
    StateSem::new(state, &vocab).goal(&models(psi, &vocab))
}

pub(crate) fn state_vocab<'a>(state: &MentalState, extra: impl IntoIterator<Item = &'a Formula>) -> Vocab {
    let mut atoms = state.atoms();
    for f in extra {
        f.collect_atoms(&mut atoms);
    }
    let mut v = Vocab::default();
    for a in atoms {
        v.insert(a);
    }
    v
}

/// A state's model sets over a fixed vocabulary.
#[derive(Clone, Debug)]
pub struct StateSem {
    pub sigma: ModelSet,
    pub goals: Vec<(ModelSet, Vec<ModelSet>)>,
}

impl StateSem {
    pub fn new(state: &MentalState, vocab: &Vocab) -> Self {
        StateSem {
            sigma: models_of_set(state.beliefs.formulas(), vocab),
            goals: state
                .goals
                .generators()
                .map(|g| (models(&g.formula, vocab), g.except.iter().map(|d| models(d, vocab)).collect()))
                .collect(),
        }
    }

    pub fn believes(&self, m: &ModelSet) -> bool {
        self.sigma.is_subset(m)
    }

    pub fn goal(&self, m: &ModelSet) -> bool {
        !m.is_empty()
            && !self.sigma.is_subset(m)
            && self
                .goals
                .iter()
                .any(|(g, ex)| g.is_subset(m) && ex.iter().all(|d| !m.is_subset(d)))
    }
}

/// What an `enabled(..)` leaf refers to.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Target {
    Cap(String),
    Adopt(Formula),
    Drop(Formula),
    /// A conditional action, by its index in the program.
    Rule(usize),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Cap(n) => f.write_str(n),
            Target::Adopt(p) => write!(f, "adopt({p})"),
            Target::Drop(p) => write!(f, "drop({p})"),
            Target::Rule(i) => write!(f, "@{i}"),
        }
    }
}

/// Resolves `enabled(..)` leaves naming capabilities or conditional actions.
pub trait EnabledCtx: Sync {
    fn enabled(&self, target: &Target, state: &MentalState) -> Result<bool, EvalError>;
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MsFormula {
    True,
    False,
    B(Formula),
    G(Formula),
    Enabled(Target),
    Not(Box<MsFormula>),
    And(Box<MsFormula>, Box<MsFormula>),
    Or(Box<MsFormula>, Box<MsFormula>),
    Implies(Box<MsFormula>, Box<MsFormula>),
    Iff(Box<MsFormula>, Box<MsFormula>),
}

impl MsFormula {
    pub fn b(f: Formula) -> Self {
        MsFormula::B(f)
    }

    pub fn g(f: Formula) -> Self {
        MsFormula::G(f)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        MsFormula::Not(Box::new(self))
    }

    pub fn and(self, o: MsFormula) -> Self {
        MsFormula::And(Box::new(self), Box::new(o))
    }

    pub fn or(self, o: MsFormula) -> Self {
        MsFormula::Or(Box::new(self), Box::new(o))
    }

    pub fn implies(self, o: MsFormula) -> Self {
        MsFormula::Implies(Box::new(self), Box::new(o))
    }

    pub fn iff(self, o: MsFormula) -> Self {
        MsFormula::Iff(Box::new(self), Box::new(o))
    }

    pub fn conj(items: impl IntoIterator<Item = MsFormula>) -> Self {
        items.into_iter().reduce(MsFormula::and).unwrap_or(MsFormula::True)
    }

    pub fn disj(items: impl IntoIterator<Item = MsFormula>) -> Self {
        items.into_iter().reduce(MsFormula::or).unwrap_or(MsFormula::False)
    }

    /// Height, counting the propositional formula under `B`/`G`.
    pub fn depth(&self) -> usize {
        match self {
            MsFormula::True | MsFormula::False | MsFormula::Enabled(_) => 1,
            MsFormula::B(f) | MsFormula::G(f) => 1 + f.depth(),
            MsFormula::Not(a) => 1 + a.depth(),
            MsFormula::And(a, b) | MsFormula::Or(a, b) | MsFormula::Implies(a, b) | MsFormula::Iff(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Calls `f` on every leaf.
    pub fn visit_leaves(&self, f: &mut impl FnMut(&MsFormula)) {
        match self {
            MsFormula::Not(a) => a.visit_leaves(f),
            MsFormula::And(a, b) | MsFormula::Or(a, b) | MsFormula::Implies(a, b) | MsFormula::Iff(a, b) => {
                a.visit_leaves(f);
                b.visit_leaves(f);
            }
            leaf => f(leaf),
        }
    }

    /// Rebuilds the formula with every leaf replaced by `f(leaf)`.
    pub fn map_leaves(&self, f: &mut impl FnMut(&MsFormula) -> MsFormula) -> MsFormula {
        match self {
            MsFormula::Not(a) => a.map_leaves(f).not(),
            MsFormula::And(a, b) => a.map_leaves(f).and(b.map_leaves(f)),
            MsFormula::Or(a, b) => a.map_leaves(f).or(b.map_leaves(f)),
            MsFormula::Implies(a, b) => a.map_leaves(f).implies(b.map_leaves(f)),
            MsFormula::Iff(a, b) => a.map_leaves(f).iff(b.map_leaves(f)),
            leaf => f(leaf),
        }
    }

    pub fn has_enabled(&self) -> bool {
        let mut found = false;
        self.visit_leaves(&mut |l| found |= matches!(l, MsFormula::Enabled(_)));
        found
    }

    /// Propositional formulas under `B`, `G` and `enabled(adopt|drop ..)`.
    pub fn prop_formulas(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |l| match l {
            MsFormula::B(f) | MsFormula::G(f) => out.push(f.clone()),
            MsFormula::Enabled(Target::Adopt(f)) | MsFormula::Enabled(Target::Drop(f)) => out.push(f.clone()),
            _ => {}
        });
        out
    }

    fn prec(&self) -> u8 {
        match self {
            MsFormula::Iff(..) => 1,
            MsFormula::Implies(..) => 2,
            MsFormula::Or(..) => 3,
            MsFormula::And(..) => 4,
            MsFormula::Not(_) => 5,
            _ => 6,
        }
    }
}

impl fmt::Display for MsFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use prop_logic::{wrap, write_binary};
        match self {
            MsFormula::True => f.write_str("true"),
            MsFormula::False => f.write_str("false"),
            MsFormula::B(p) => write!(f, "B({p})"),
            MsFormula::G(p) => write!(f, "G({p})"),
            MsFormula::Enabled(t) => write!(f, "enabled({t})"),
            MsFormula::Not(a) => {
                f.write_str("!")?;
                wrap(f, a.as_ref(), a.prec() < 5)
            }
            MsFormula::And(a, b) => write_binary(f, "&", 4, false, (a.as_ref(), a.prec()), (b.as_ref(), b.prec())),
            MsFormula::Or(a, b) => write_binary(f, "|", 3, false, (a.as_ref(), a.prec()), (b.as_ref(), b.prec())),
            MsFormula::Implies(a, b) => {
                write_binary(f, "->", 2, true, (a.as_ref(), a.prec()), (b.as_ref(), b.prec()))
            }
            MsFormula::Iff(a, b) => write_binary(f, "<->", 1, true, (a.as_ref(), a.prec()), (b.as_ref(), b.prec())),
        }
    }
}

impl fmt::Debug for MsFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A mental-state formula with its leaf model sets precomputed over a vocabulary.
pub struct Compiled {
    root: Node,
}

enum Node {
    Const(bool),
    B(ModelSet),
    G(ModelSet),
    AdoptEnabled(ModelSet),
    Other(Target),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
}

impl Compiled {
    pub fn new(phi: &MsFormula, vocab: &Vocab) -> Self {
        Compiled { root: Self::node(phi, vocab) }
    }

    fn node(phi: &MsFormula, vocab: &Vocab) -> Node {
        let bx = |x: &MsFormula| Box::new(Self::node(x, vocab));
        match phi {
            MsFormula::True => Node::Const(true),
            MsFormula::False => Node::Const(false),
            MsFormula::B(f) => Node::B(models(f, vocab)),
            MsFormula::G(f) => Node::G(models(f, vocab)),
            MsFormula::Enabled(Target::Drop(_)) => Node::Const(true),
            MsFormula::Enabled(Target::Adopt(f)) => Node::AdoptEnabled(models(f, vocab)),
            MsFormula::Enabled(t) => Node::Other(t.clone()),
            MsFormula::Not(a) => Node::Not(bx(a)),
            MsFormula::And(a, b) => Node::And(bx(a), bx(b)),
            MsFormula::Or(a, b) => Node::Or(bx(a), bx(b)),
            MsFormula::Implies(a, b) => Node::Implies(bx(a), bx(b)),
            MsFormula::Iff(a, b) => Node::Iff(bx(a), bx(b)),
        }
    }

    /// Evaluates against a state's model sets; `state` is consulted only for
    /// capability and conditional-action enabledness.
    pub fn eval(&self, sem: &StateSem, state: &MentalState, ctx: Option<&dyn EnabledCtx>) -> Result<bool, EvalError> {
        Self::go(&self.root, sem, state, ctx)
    }

    fn go(n: &Node, sem: &StateSem, st: &MentalState, ctx: Option<&dyn EnabledCtx>) -> Result<bool, EvalError> {
        Ok(match n {
            Node::Const(b) => *b,
            Node::B(m) => sem.believes(m),
            Node::G(m) => sem.goal(m),
            Node::AdoptEnabled(m) => !m.is_empty() && !sem.believes(m),
            Node::Other(t) => match ctx {
                Some(c) => c.enabled(t, st)?,
                None => return Err(EvalError::NoContext(format!("enabled({t})"))),
            },
            Node::Not(a) => !Self::go(a, sem, st, ctx)?,
            Node::And(a, b) => Self::go(a, sem, st, ctx)? && Self::go(b, sem, st, ctx)?,
            Node::Or(a, b) => Self::go(a, sem, st, ctx)? || Self::go(b, sem, st, ctx)?,
            Node::Implies(a, b) => !Self::go(a, sem, st, ctx)? || Self::go(b, sem, st, ctx)?,
            Node::Iff(a, b) => Self::go(a, sem, st, ctx)? == Self::go(b, sem, st, ctx)?,
        })
    }
}

/// Truth of `phi` in `state`. `enabled(adopt ..)` and `enabled(drop ..)` are
/// decided from the state alone; other `enabled` leaves need `ctx`.
pub fn eval_msf(state: &MentalState, phi: &MsFormula, ctx: Option<&dyn EnabledCtx>) -> Result<bool, EvalError> {
    let props = phi.prop_formulas();
    let vocab = state_vocab(state, props.iter());
    let sem = StateSem::new(state, &vocab);
    Compiled::new(phi, &vocab).eval(&sem, state, ctx)
}

/// Names accepted by `enabled(..)` while parsing, if restricted.
#[derive(Default, Clone, Copy)]
pub struct MsParseCtx<'a> {
    pub vocab: Option<&'a Vocab>,
    pub caps: Option<&'a [String]>,
}

pub fn parse_msf(text: &str, ctx: MsParseCtx<'_>) -> Result<MsFormula, ParseError> {
    let mut c = Cursor::new(text)?;
    let f = parse_ms(&mut c, ctx)?;
    c.expect_eof()?;
    Ok(f)
}

pub(crate) fn parse_ms(c: &mut Cursor, ctx: MsParseCtx<'_>) -> Result<MsFormula, ParseError> {
    let lhs = parse_ms_imp(c, ctx)?;
    if c.eat(&Tok::DArrow) {
        Ok(lhs.iff(parse_ms(c, ctx)?))
    } else {
        Ok(lhs)
    }
}

fn parse_ms_imp(c: &mut Cursor, ctx: MsParseCtx<'_>) -> Result<MsFormula, ParseError> {
    let lhs = parse_ms_or(c, ctx)?;
    // `->` directly followed by `do` belongs to a program rule, not to the formula.
    if *c.peek() == Tok::Arrow && !matches!(c.peek2(), Tok::Ident(s) if s == "do") {
        c.bump();
        Ok(lhs.implies(parse_ms_imp(c, ctx)?))
    } else {
        Ok(lhs)
    }
}

fn parse_ms_or(c: &mut Cursor, ctx: MsParseCtx<'_>) -> Result<MsFormula, ParseError> {
    let mut lhs = parse_ms_and(c, ctx)?;
    while c.eat(&Tok::Pipe) {
        lhs = lhs.or(parse_ms_and(c, ctx)?);
    }
    Ok(lhs)
}

fn parse_ms_and(c: &mut Cursor, ctx: MsParseCtx<'_>) -> Result<MsFormula, ParseError> {
    let mut lhs = parse_ms_unary(c, ctx)?;
    while c.eat(&Tok::Amp) {
        lhs = lhs.and(parse_ms_unary(c, ctx)?);
    }
    Ok(lhs)
}

fn parse_ms_unary(c: &mut Cursor, ctx: MsParseCtx<'_>) -> Result<MsFormula, ParseError> {
    if c.eat(&Tok::Bang) {
        return Ok(parse_ms_unary(c, ctx)?.not());
    }
    match c.peek().clone() {
        Tok::LParen => {
            c.bump();
            let f = parse_ms(c, ctx)?;
            c.expect(&Tok::RParen)?;
            Ok(f)
        }
        Tok::Ident(name) => match name.as_str() {
            "true" => {
                c.bump();
                Ok(MsFormula::True)
            }
            "false" => {
                c.bump();
                Ok(MsFormula::False)
            }
            "B" | "G" => {
                c.bump();
                c.expect(&Tok::LParen)?;
                let f = parse_prop(c, ctx.vocab)?;
                c.expect(&Tok::RParen)?;
                Ok(if name == "B" { MsFormula::B(f) } else { MsFormula::G(f) })
            }
            "enabled" => {
                c.bump();
                c.expect(&Tok::LParen)?;
                let t = parse_target(c, ctx)?;
                c.expect(&Tok::RParen)?;
                Ok(MsFormula::Enabled(t))
            }
            _ => Err(c.unexpected("`B(..)`, `G(..)`, `enabled(..)`, `true` or `false`")),
        },
        _ => Err(c.unexpected("mental-state formula")),
    }
}

fn parse_target(c: &mut Cursor, ctx: MsParseCtx<'_>) -> Result<Target, ParseError> {
    if c.eat(&Tok::At) {
        return match c.bump() {
            (Tok::Number(n), _) => Ok(Target::Rule(n as usize)),
            (_, pos) => Err(ParseError::syntax(pos, "expected rule index after `@`")),
        };
    }
    let (name, pos) = c.ident()?;
    match name.as_str() {
        "adopt" | "drop" => {
            c.expect(&Tok::LParen)?;
            let f = parse_prop(c, ctx.vocab)?;
            c.expect(&Tok::RParen)?;
            Ok(if name == "adopt" { Target::Adopt(f) } else { Target::Drop(f) })
        }
        _ => match ctx.caps {
            Some(caps) if !caps.contains(&name) => Err(ParseError::UnknownCapability { name, pos }),
            _ => Ok(Target::Cap(name)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prop_logic::parse_formula_free as pf;

    fn st(beliefs: &[&str], goals: &[&str]) -> MentalState {
        MentalState::new(
            BeliefBase::new(beliefs.iter().map(|s| pf(s).unwrap())),
            GoalBase::new(goals.iter().map(|s| pf(s).unwrap())),
        )
        .unwrap()
    }

    fn ms(s: &str) -> MsFormula {
        parse_msf(s, MsParseCtx::default()).unwrap()
    }

    #[test]
    fn goal_examples() {
        let s = st(&["p"], &["p & q"]);
        assert!(!goal_holds(&s, &pf("p").unwrap()));
        assert!(goal_holds(&s, &pf("q").unwrap()));
        let s = st(&[], &["p"]);
        assert!(!goal_holds(&s, &pf("p | !p").unwrap()));
        let s = st(&[], &["p", "!p"]);
        assert!(goal_holds(&s, &pf("p").unwrap()) && goal_holds(&s, &pf("!p").unwrap()));
        let s = st(&[], &["p", "q"]);
        assert!(!goal_holds(&s, &pf("p & q").unwrap()));
    }

    #[test]
    fn construction_rejects_ill_formed_states() {
        let b = |xs: &[&str]| BeliefBase::new(xs.iter().map(|s| pf(s).unwrap()));
        let g = |xs: &[&str]| GoalBase::new(xs.iter().map(|s| pf(s).unwrap()));
        assert_eq!(MentalState::new(b(&["p", "!p"]), g(&[])), Err(StateError::InconsistentBeliefs));
        assert!(matches!(MentalState::new(b(&[]), g(&["p & !p"])), Err(StateError::InconsistentGoal(_))));
        assert!(matches!(MentalState::new(b(&["p"]), g(&["p"])), Err(StateError::GoalBelieved(_))));
        assert!(matches!(MentalState::new(b(&[]), g(&["p | !p"])), Err(StateError::GoalBelieved(_))));
    }

    #[test]
    fn msf_eval_and_context() {
        let s = st(&["p"], &[]);
        assert!(eval_msf(&s, &ms("B(p) & !G(p)"), None).unwrap());
        let s = st(&[], &["p & q"]);
        assert!(eval_msf(&s, &ms("G(p) & G(q) & G(p & q)"), None).unwrap());
        assert!(matches!(eval_msf(&s, &ms("enabled(buy)"), None), Err(EvalError::NoContext(_))));
        assert!(eval_msf(&s, &ms("enabled(drop(false)) & !enabled(adopt(p & !p))"), None).unwrap());
    }

    #[test]
    fn msf_round_trip_and_rule_arrow() {
        for s in ["B(p) -> G(q) -> B(r)", "!(B(p) | G(q)) & enabled(@2)", "(B(p) <-> G(p)) <-> true"] {
            let f = ms(s);
            assert_eq!(ms(&f.to_string()), f);
        }
        let mut c = Cursor::new("B(p) -> do(x)").unwrap();
        assert_eq!(parse_ms(&mut c, MsParseCtx::default()).unwrap(), ms("B(p)"));
        assert_eq!(*c.peek(), Tok::Arrow);
    }

    #[test]
    fn digest_is_stable() {
        let a = st(&["p", "q"], &["r"]);
        let b = st(&["q", "p"], &["r"]);
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), st(&["p"], &["r"]).digest());
    }
}
