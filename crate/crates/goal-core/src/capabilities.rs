//! Belief-update capabilities, `adopt`/`drop`, enabledness and the
//! mental-state transformer.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::mental_state::{eval_msf, BeliefBase, Generator, GoalBase, MentalState, MsFormula};
use crate::prop_logic::{self, Formula};

/// One guarded add/delete clause. Deletion is by syntactic identity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EffectClause {
    pub guard: Formula,
    pub add: Vec<Formula>,
    pub del: Vec<Formula>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CapabilitySpec {
    pub name: String,
    pub clauses: Vec<EffectClause>,
}

impl CapabilitySpec {
    pub fn new(name: impl Into<String>, clauses: Vec<EffectClause>) -> Self {
        CapabilitySpec { name: name.into(), clauses }
    }

    /// Built-in `ins(φ)`: add φ, defined while the result stays consistent.
    pub fn ins(phi: Formula) -> Self {
        CapabilitySpec {
            name: format!("ins({phi})"),
            clauses: vec![EffectClause { guard: Formula::True, add: vec![phi], del: vec![] }],
        }
    }

    /// Built-in `del(φ)`: remove the formula φ itself from Σ.
    pub fn del(phi: Formula) -> Self {
        CapabilitySpec {
            name: format!("del({phi})"),
            clauses: vec![EffectClause { guard: Formula::True, add: vec![], del: vec![phi] }],
        }
    }

    /// The built-in argument, if this is `ins(φ)` or `del(φ)`.
    pub fn builtin(&self) -> Option<(&'static str, &Formula)> {
        match self.clauses.as_slice() {
            [c] if c.guard == Formula::True => match (c.add.as_slice(), c.del.as_slice()) {
                ([f], []) if self.name == format!("ins({f})") => Some(("ins", f)),
                ([], [f]) if self.name == format!("del({f})") => Some(("del", f)),
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Action {
    Cap(Arc<CapabilitySpec>),
    Adopt(Formula),
    Drop(Formula),
}

impl Action {
    pub fn cap(spec: CapabilitySpec) -> Self {
        Action::Cap(Arc::new(spec))
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn is_drop(&self) -> bool {
        matches!(self, Action::Drop(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Cap(c) => f.write_str(&c.name),
            Action::Adopt(p) => write!(f, "adopt({p})"),
            Action::Drop(p) => write!(f, "drop({p})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("conditions of conditional actions cannot mention enabled(..): `{0}`")]
pub struct ConditionError(pub MsFormula);

/// `condition -> do(action)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ConditionalAction {
    condition: MsFormula,
    action: Action,
}

impl ConditionalAction {
    pub fn new(condition: MsFormula, action: Action) -> Result<Self, ConditionError> {
        if condition.has_enabled() {
            return Err(ConditionError(condition));
        }
        Ok(ConditionalAction { condition, action })
    }

    pub fn condition(&self) -> &MsFormula {
        &self.condition
    }

    pub fn action(&self) -> &Action {
        &self.action
    }
}

impl fmt::Display for ConditionalAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> do({})", self.condition, self.action)
    }
}

/// T(cap, Σ): the first clause whose guard Σ entails fires; undefined when
/// no clause fires or the result is inconsistent.
pub fn apply_t(cap: &CapabilitySpec, sigma: &BeliefBase) -> Option<BeliefBase> {
    let clause = cap.clauses.iter().find(|c| sigma.entails(&c.guard))?;
    let mut out: BTreeSet<Formula> = sigma.0.iter().filter(|f| !clause.del.contains(f)).cloned().collect();
    out.extend(clause.add.iter().cloned());
    let out = BeliefBase(out);
    out.is_consistent().then_some(out)
}

pub fn adopt_enabled(state: &MentalState, phi: &Formula) -> bool {
    prop_logic::consistent(std::slice::from_ref(phi)) && !state.beliefs().entails(phi)
}

pub fn enabled_cap(action: &Action, state: &MentalState) -> bool {
    match action {
        Action::Cap(c) => apply_t(c, state.beliefs()).is_some(),
        Action::Drop(_) => true,
        Action::Adopt(phi) => adopt_enabled(state, phi),
    }
}

pub fn enabled_cond(b: &ConditionalAction, state: &MentalState) -> bool {
    eval_msf(state, &b.condition, None).expect("conditions carry no enabled(..) leaves")
        && enabled_cap(&b.action, state)
}

/// M(action, state), or `None` where undefined.
pub fn apply_m(action: &Action, state: &MentalState) -> Option<MentalState> {
    let next = match action {
        Action::Cap(c) => {
            let sigma = apply_t(c, state.beliefs())?;
            let goals = state.goals().generators().filter(|g| !sigma.entails(&g.formula)).cloned().collect();
            MentalState::new_unchecked(sigma, GoalBase(goals))
        }
        Action::Adopt(phi) => {
            if !adopt_enabled(state, phi) {
                return None;
            }
            let mut goals = state.goals().clone();
            goals.0.insert(Generator::plain(phi.clone()));
            MentalState::new_unchecked(state.beliefs().clone(), goals)
        }
        Action::Drop(phi) => MentalState::new_unchecked(state.beliefs().clone(), drop_goals(state, phi)),
    };
    debug_assert!(next.check().is_ok(), "transformer produced an ill-formed state: {next}");
    Some(next)
}

/// Removes from Γ every member entailing φ: generators entailing φ get φ as
/// an exclusion and are discarded once they contribute nothing.
fn drop_goals(state: &MentalState, phi: &Formula) -> GoalBase {
    let mut out = BTreeSet::new();
    for g in state.goals().generators() {
        if !prop_logic::entails(std::slice::from_ref(&g.formula), phi) {
            out.insert(g.clone());
            continue;
        }
        let mut g = g.clone();
        g.except.insert(phi.clone());
        if contributes(&g) {
            out.insert(g);
        }
    }
    GoalBase(out)
}

/// Whether some ψ with γ ⊨ ψ, ψ consistent, Σ ⊭ ψ escapes every exclusion.
/// The language has atoms beyond those in the state, so with `r` fresh,
/// ψ = γ ∨ r does whenever no exclusion is a tautology (Σ ⊭ γ already).
fn contributes(g: &Generator) -> bool {
    !g.except.iter().any(prop_logic::tautology)
}
