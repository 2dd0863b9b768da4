//! Agents ⟨Π, Σ₀, Γ₀⟩, their file format, and the shopping fixture.
//!
//! File layout, sections in this order:
//!
//! ```text
//! vocab { p, q }
//! beliefs { p; }
//! goals { q; }
//! capability flip { when p add {q} del {p}; }
//! program { B(p) & G(q) -> do(flip); }
//! properties { let ok = B(p) | B(q); invariant ok; }
//! ```
//!
//! `for x in {A, B} { ... }` around capabilities or program rules repeats its
//! body once per value, replacing every `_`-separated identifier segment `x`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::capabilities::{enabled_cap, enabled_cond, Action, CapabilitySpec, ConditionalAction, EffectClause};
use crate::mental_state::{
    parse_ms, BeliefBase, EnabledCtx, EvalError, GoalBase, MentalState, MsFormula, MsParseCtx, StateError, Target,
};
use crate::prop_logic::{parse_prop, Atom, Formula, Vocab};
use crate::syntax::{Cursor, ParseError, Pos, Tok};

const RESERVED: &[&str] = &[
    "true", "false", "B", "G", "enabled", "adopt", "drop", "ins", "del", "do", "when", "add", "for", "in", "let",
];

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Property {
    /// `init → φ` together with `φ unless false`.
    Invariant(MsFormula),
    Unless(MsFormula, MsFormula),
    Ensures(MsFormula, MsFormula),
    LeadsTo(MsFormula, MsFormula),
    /// A Hoare triple for one action, checked over the reachable states.
    Hoare(MsFormula, Action, MsFormula),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Invariant(p) => write!(f, "invariant {p}"),
            Property::Unless(p, q) => write!(f, "unless {p}, {q}"),
            Property::Ensures(p, q) => write!(f, "ensures {p}, {q}"),
            Property::LeadsTo(p, q) => write!(f, "leadsto {p}, {q}"),
            Property::Hoare(p, a, q) => write!(f, "hoare {p}, {a}, {q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{}initial state rejected: {err}", at(.pos))]
    InitialState { err: StateError, pos: Option<Pos> },
    #[error("the program must contain at least one conditional action")]
    EmptyProgram,
    #[error("{}capability `{name}` is declared twice", at(.pos))]
    DuplicateCapability { name: String, pos: Option<Pos> },
    #[error("{}`{name}` is reserved", at(.pos))]
    Reserved { name: String, pos: Option<Pos> },
    #[error("{}enabled(@{index}) refers past the end of a {len}-rule program", at(.pos))]
    RuleIndex { index: usize, len: usize, pos: Option<Pos> },
}

fn at(pos: &Option<Pos>) -> String {
    pos.map(|p| format!("{p}: ")).unwrap_or_default()
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Agent {
    pub vocab: Vocab,
    pub capabilities: Vec<Arc<CapabilitySpec>>,
    pub program: Vec<ConditionalAction>,
    init: MentalState,
    pub properties: Vec<Property>,
}

impl Agent {
    pub fn new(
        vocab: Vocab,
        capabilities: Vec<Arc<CapabilitySpec>>,
        program: Vec<ConditionalAction>,
        beliefs: Vec<Formula>,
        goals: Vec<Formula>,
        properties: Vec<Property>,
    ) -> Result<Self, AgentError> {
        if program.is_empty() {
            return Err(AgentError::EmptyProgram);
        }
        for (i, c) in capabilities.iter().enumerate() {
            if capabilities[..i].iter().any(|d| d.name == c.name) {
                return Err(AgentError::DuplicateCapability { name: c.name.clone(), pos: None });
            }
        }
        for p in &properties {
            let mut bad = None;
            let mut check = |x: &MsFormula| {
                if let MsFormula::Enabled(Target::Rule(i)) = x {
                    if *i >= program.len() {
                        bad.get_or_insert(*i);
                    }
                }
            };
            match p {
                Property::Invariant(a) => a.visit_leaves(&mut check),
                Property::Unless(a, b)
                | Property::Ensures(a, b)
                | Property::LeadsTo(a, b)
                | Property::Hoare(a, _, b) => {
                    a.visit_leaves(&mut check);
                    b.visit_leaves(&mut check);
                }
            }
            if let Some(index) = bad {
                return Err(AgentError::RuleIndex { index, len: program.len(), pos: None });
            }
        }
        let init = MentalState::new(BeliefBase::new(beliefs), GoalBase::new(goals))
            .map_err(|err| AgentError::InitialState { err, pos: None })?;
        Ok(Agent { vocab, capabilities, program, init, properties })
    }

    pub fn init_state(&self) -> &MentalState {
        &self.init
    }

    pub fn capability(&self, name: &str) -> Option<&Arc<CapabilitySpec>> {
        self.capabilities.iter().find(|c| c.name == name)
    }

    /// Distinct actions used by the program, in order of first use.
    pub fn actions(&self) -> Vec<Action> {
        let mut out: Vec<Action> = Vec::new();
        for b in &self.program {
            if !out.contains(b.action()) {
                out.push(b.action().clone());
            }
        }
        out
    }

    pub fn rule_label(&self, i: usize) -> String {
        format!("@{i} {}", self.program[i].action())
    }
}

impl EnabledCtx for Agent {
    fn enabled(&self, target: &Target, state: &MentalState) -> Result<bool, EvalError> {
        match target {
            Target::Cap(name) => {
                let cap = self.capability(name).ok_or_else(|| EvalError::UnknownCapability(name.clone()))?;
                Ok(enabled_cap(&Action::Cap(cap.clone()), state))
            }
            Target::Adopt(f) => Ok(enabled_cap(&Action::Adopt(f.clone()), state)),
            Target::Drop(_) => Ok(true),
            Target::Rule(i) => {
                let b = self.program.get(*i).ok_or(EvalError::UnknownRule(*i))?;
                Ok(enabled_cond(b, state))
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[Formula]) -> fmt::Result {
    f.write_str("{")?;
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("}")
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<&str> = self.vocab.atoms().iter().map(Atom::name).collect();
        writeln!(f, "vocab {{ {} }}", atoms.join(", "))?;
        writeln!(f, "beliefs {{")?;
        for b in self.init.beliefs().formulas() {
            writeln!(f, "  {b};")?;
        }
        writeln!(f, "}}\ngoals {{")?;
        for g in self.init.goals().generators() {
            writeln!(f, "  {};", g.formula)?;
        }
        writeln!(f, "}}")?;
        for c in &self.capabilities {
            writeln!(f, "capability {} {{", c.name)?;
            for cl in &c.clauses {
                write!(f, "  when {}", cl.guard)?;
                if !cl.add.is_empty() {
                    f.write_str(" add ")?;
                    write_list(f, &cl.add)?;
                }
                if !cl.del.is_empty() {
                    f.write_str(" del ")?;
                    write_list(f, &cl.del)?;
                }
                writeln!(f, ";")?;
            }
            writeln!(f, "}}")?;
        }
        writeln!(f, "program {{")?;
        for b in &self.program {
            writeln!(f, "  {b};")?;
        }
        writeln!(f, "}}")?;
        if !self.properties.is_empty() {
            writeln!(f, "properties {{")?;
            for p in &self.properties {
                writeln!(f, "  {p};")?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

pub fn parse_agent(text: &str) -> Result<Agent, AgentError> {
    let mut c = Cursor::new(text)?;
    let vocab = parse_vocab(&mut c)?;

    let beliefs_pos = c.expect_kw("beliefs")?;
    let beliefs = formula_block(&mut c, &vocab)?;
    c.expect_kw("goals")?;
    let goals = formula_block(&mut c, &vocab)?;

    let mut caps: Vec<(Arc<CapabilitySpec>, Pos)> = Vec::new();
    items(&mut c, &|c| c.is_kw("capability"), &mut |c| parse_capability(c, &vocab), &mut caps)?;
    for (i, (cap, pos)) in caps.iter().enumerate() {
        if RESERVED.contains(&cap.name.as_str()) {
            return Err(AgentError::Reserved { name: cap.name.clone(), pos: Some(*pos) });
        }
        if caps[..i].iter().any(|(d, _)| d.name == cap.name) {
            return Err(AgentError::DuplicateCapability { name: cap.name.clone(), pos: Some(*pos) });
        }
    }
    let caps: Vec<Arc<CapabilitySpec>> = caps.into_iter().map(|(c, _)| c).collect();

    c.expect_kw("program")?;
    c.expect(&Tok::LBrace)?;
    let mut program = Vec::new();
    items(&mut c, &|c| !matches!(c.peek(), Tok::RBrace | Tok::Eof), &mut |c| parse_rule(c, &vocab, &caps), &mut program)?;
    c.expect(&Tok::RBrace)?;

    let mut properties = Vec::new();
    if c.is_kw("properties") {
        let cap_names: Vec<String> = caps.iter().map(|k| k.name.clone()).collect();
        properties = parse_properties(&mut c, &vocab, &caps, &cap_names, program.len())?;
    }
    c.expect_eof()?;

    let find = |f: &Formula, list: &[(Formula, Pos)]| list.iter().find(|(g, _)| g == f).map(|(_, p)| *p);
    Agent::new(
        vocab,
        caps,
        program,
        beliefs.iter().map(|(f, _)| f.clone()).collect(),
        goals.iter().map(|(f, _)| f.clone()).collect(),
        properties,
    )
    .map_err(|e| match e {
        AgentError::InitialState { err, .. } => {
            let pos = match &err {
                StateError::InconsistentBeliefs => Some(beliefs_pos),
                StateError::InconsistentGoal(g) | StateError::GoalBelieved(g) => find(g, &goals),
            };
            AgentError::InitialState { err, pos }
        }
        other => other,
    })
}

/// Parses property declarations, as written inside a `properties` section,
/// against an already loaded agent. `let` macros are local to `text`.
pub fn parse_properties_for(agent: &Agent, text: &str) -> Result<Vec<Property>, AgentError> {
    let mut toks = crate::syntax::lex(text)?;
    let (_, end) = toks.pop().expect("lexer appends end of input");
    let start = Pos { line: 1, col: 1 };
    toks.insert(0, (Tok::LBrace, start));
    toks.insert(0, (Tok::Ident("properties".into()), start));
    toks.push((Tok::RBrace, end));
    let mut c = Cursor::from_tokens(toks, end);
    let names: Vec<String> = agent.capabilities.iter().map(|k| k.name.clone()).collect();
    let out = parse_properties(&mut c, &agent.vocab, &agent.capabilities, &names, agent.program.len())?;
    c.expect_eof()?;
    Ok(out)
}

fn parse_vocab(c: &mut Cursor) -> Result<Vocab, AgentError> {
    c.expect_kw("vocab")?;
    c.expect(&Tok::LBrace)?;
    let mut vocab = Vocab::default();
    while *c.peek() != Tok::RBrace {
        let (name, pos) = c.ident()?;
        if name == "true" || name == "false" {
            return Err(AgentError::Reserved { name, pos: Some(pos) });
        }
        if !vocab.insert(Atom::new(&name)) {
            return Err(ParseError::syntax(pos, format!("atom `{name}` declared twice")).into());
        }
        if !c.eat(&Tok::Comma) {
            break;
        }
    }
    c.expect(&Tok::RBrace)?;
    Ok(vocab)
}

fn formula_block(c: &mut Cursor, vocab: &Vocab) -> Result<Vec<(Formula, Pos)>, ParseError> {
    c.expect(&Tok::LBrace)?;
    let mut out = Vec::new();
    while *c.peek() != Tok::RBrace {
        let pos = c.pos();
        out.push((parse_prop(c, Some(vocab))?, pos));
        c.expect(&Tok::Semi)?;
    }
    c.expect(&Tok::RBrace)?;
    Ok(out)
}

fn formula_list(c: &mut Cursor, vocab: &Vocab) -> Result<Vec<Formula>, ParseError> {
    c.expect(&Tok::LBrace)?;
    let mut out = Vec::new();
    while *c.peek() != Tok::RBrace {
        out.push(parse_prop(c, Some(vocab))?);
        if !c.eat(&Tok::Comma) {
            break;
        }
    }
    c.expect(&Tok::RBrace)?;
    Ok(out)
}

/// Parses items (and `for` templates of items) while `is_item` holds.
fn items<T>(
    c: &mut Cursor,
    is_item: &dyn Fn(&Cursor) -> bool,
    item: &mut dyn FnMut(&mut Cursor) -> Result<T, AgentError>,
    out: &mut Vec<T>,
) -> Result<(), AgentError> {
    loop {
        if c.is_kw("for") {
            c.bump();
            let (var, _) = c.ident()?;
            c.expect_kw("in")?;
            c.expect(&Tok::LBrace)?;
            let mut values = Vec::new();
            while *c.peek() != Tok::RBrace {
                values.push(c.ident()?.0);
                if !c.eat(&Tok::Comma) {
                    break;
                }
            }
            c.expect(&Tok::RBrace)?;
            c.expect(&Tok::LBrace)?;
            let mut body = Vec::new();
            let mut depth = 0usize;
            loop {
                match c.peek() {
                    Tok::Eof => return Err(c.unexpected("`}`").into()),
                    Tok::RBrace if depth == 0 => break,
                    Tok::LBrace => depth += 1,
                    Tok::RBrace => depth -= 1,
                    _ => {}
                }
                body.push(c.bump());
            }
            let end = c.expect(&Tok::RBrace)?;
            for v in &values {
                let toks = body
                    .iter()
                    .map(|(t, p)| match t {
                        Tok::Ident(s) => (Tok::Ident(substitute(s, &var, v)), *p),
                        other => (other.clone(), *p),
                    })
                    .collect();
                let mut sub = Cursor::from_tokens(toks, end);
                items(&mut sub, is_item, item, out)?;
                sub.expect_eof()?;
            }
        } else if is_item(c) {
            out.push(item(c)?);
        } else {
            return Ok(());
        }
    }
}

fn substitute(ident: &str, var: &str, value: &str) -> String {
    ident.split('_').map(|seg| if seg == var { value } else { seg }).collect::<Vec<_>>().join("_")
}

fn parse_capability(c: &mut Cursor, vocab: &Vocab) -> Result<(Arc<CapabilitySpec>, Pos), AgentError> {
    c.expect_kw("capability")?;
    let (name, pos) = c.ident()?;
    c.expect(&Tok::LBrace)?;
    let mut clauses = Vec::new();
    while c.is_kw("when") {
        c.bump();
        let guard = parse_prop(c, Some(vocab))?;
        let add = if c.is_kw("add") {
            c.bump();
            formula_list(c, vocab)?
        } else {
            Vec::new()
        };
        let del = if c.is_kw("del") {
            c.bump();
            formula_list(c, vocab)?
        } else {
            Vec::new()
        };
        c.expect(&Tok::Semi)?;
        clauses.push(EffectClause { guard, add, del });
    }
    c.expect(&Tok::RBrace)?;
    Ok((Arc::new(CapabilitySpec::new(name, clauses)), pos))
}

fn parse_action(c: &mut Cursor, vocab: &Vocab, caps: &[Arc<CapabilitySpec>]) -> Result<Action, ParseError> {
    let (name, pos) = c.ident()?;
    match name.as_str() {
        "adopt" | "drop" | "ins" | "del" => {
            c.expect(&Tok::LParen)?;
            let f = parse_prop(c, Some(vocab))?;
            c.expect(&Tok::RParen)?;
            Ok(match name.as_str() {
                "adopt" => Action::Adopt(f),
                "drop" => Action::Drop(f),
                "ins" => Action::cap(CapabilitySpec::ins(f)),
                _ => Action::cap(CapabilitySpec::del(f)),
            })
        }
        _ => caps
            .iter()
            .find(|k| k.name == name)
            .map(|k| Action::Cap(k.clone()))
            .ok_or(ParseError::UnknownCapability { name, pos }),
    }
}

fn parse_rule(c: &mut Cursor, vocab: &Vocab, caps: &[Arc<CapabilitySpec>]) -> Result<ConditionalAction, AgentError> {
    let pos = c.pos();
    let cond = parse_ms(c, MsParseCtx { vocab: Some(vocab), caps: None })?;
    c.expect(&Tok::Arrow)?;
    c.expect_kw("do")?;
    c.expect(&Tok::LParen)?;
    let action = parse_action(c, vocab, caps)?;
    c.expect(&Tok::RParen)?;
    c.expect(&Tok::Semi)?;
    ConditionalAction::new(cond, action).map_err(|e| ParseError::syntax(pos, e.to_string()).into())
}

fn parse_properties(
    c: &mut Cursor,
    vocab: &Vocab,
    caps: &[Arc<CapabilitySpec>],
    cap_names: &[String],
    rules: usize,
) -> Result<Vec<Property>, AgentError> {
    c.expect_kw("properties")?;
    c.expect(&Tok::LBrace)?;
    let ctx = MsParseCtx { vocab: Some(vocab), caps: Some(cap_names) };
    let mut macros: HashMap<String, Vec<(Tok, Pos)>> = HashMap::new();
    let mut out = Vec::new();
    while *c.peek() != Tok::RBrace {
        let (kw, pos) = c.ident()?;
        let mut name = None;
        if kw == "let" {
            let (n, npos) = c.ident()?;
            if RESERVED.contains(&n.as_str()) || vocab.contains(&n) {
                return Err(AgentError::Reserved { name: n, pos: Some(npos) });
            }
            c.expect(&Tok::Eq)?;
            name = Some(n);
        }
        let mut toks = Vec::new();
        while !matches!(c.peek(), Tok::Semi | Tok::Eof | Tok::RBrace) {
            let (t, p) = c.bump();
            match &t {
                Tok::Ident(s) if macros.contains_key(s) => {
                    toks.push((Tok::LParen, p));
                    toks.extend(macros[s].iter().cloned());
                    toks.push((Tok::RParen, p));
                }
                _ => toks.push((t, p)),
            }
        }
        let end = c.expect(&Tok::Semi)?;
        if let Some(n) = name {
            macros.insert(n, toks);
            continue;
        }
        let mut s = Cursor::from_tokens(toks, end);
        let s = &mut s;
        let pair = |s: &mut Cursor| -> Result<(MsFormula, MsFormula), ParseError> {
            let a = parse_ms(s, ctx)?;
            s.expect(&Tok::Comma)?;
            Ok((a, parse_ms(s, ctx)?))
        };
        let prop = match kw.as_str() {
            "invariant" => Property::Invariant(parse_ms(s, ctx)?),
            "unless" => {
                let (a, b) = pair(s)?;
                Property::Unless(a, b)
            }
            "ensures" => {
                let (a, b) = pair(s)?;
                Property::Ensures(a, b)
            }
            "leadsto" => {
                let (a, b) = pair(s)?;
                Property::LeadsTo(a, b)
            }
            "hoare" => {
                let a = parse_ms(s, ctx)?;
                s.expect(&Tok::Comma)?;
                let act = parse_action(s, vocab, caps)?;
                s.expect(&Tok::Comma)?;
                Property::Hoare(a, act, parse_ms(s, ctx)?)
            }
            _ => {
                return Err(ParseError::syntax(
                    pos,
                    format!("unknown property kind `{kw}` (expected let, invariant, unless, ensures, leadsto or hoare)"),
                )
                .into())
            }
        };
        s.expect_eof()?;
        let mut bad = None;
        let mut check = |x: &MsFormula| {
            if let MsFormula::Enabled(Target::Rule(i)) = x {
                if *i >= rules {
                    bad.get_or_insert(*i);
                }
            }
        };
        match &prop {
            Property::Invariant(a) => a.visit_leaves(&mut check),
            Property::Unless(a, b) | Property::Ensures(a, b) | Property::LeadsTo(a, b) | Property::Hoare(a, _, b) => {
                a.visit_leaves(&mut check);
                b.visit_leaves(&mut check);
            }
        }
        if let Some(index) = bad {
            return Err(AgentError::RuleIndex { index, len: rules, pos: Some(pos) });
        }
        out.push(prop);
    }
    c.expect(&Tok::RBrace)?;
    Ok(out)
}

/// The propositionalized shopping agent, with the goto condition restricted
/// to an empty cart.
pub fn ground_shopping_fixture() -> Agent {
    crate::shopping::fixture(false)
}
