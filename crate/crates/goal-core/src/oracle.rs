//! Bounded validity of mental-state formulas.
//!
//! The truth of a `G ψ` leaf only depends on which leaves some generator
//! entails, so instead of enumerating generator sets the oracle enumerates,
//! per belief theory, unions of realizable leaf profiles. Each profile is
//! witnessed by its weakest generator, which is what countermodels report.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::mental_state::{BeliefBase, GoalBase, MentalState, MsFormula, Target};
use crate::prop_logic::{models, Canon, Formula, ModelSet, Vocab};

pub const MAX_ATOMS: usize = 4;
pub const MAX_GENERATORS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("bounds exceeded: {atoms} atoms / {generators} generators (limits {MAX_ATOMS} / {MAX_GENERATORS})")]
    BoundsExceeded { atoms: usize, generators: usize },
    #[error("atom `{0}` lies outside the oracle vocabulary")]
    OutsideVocab(String),
    #[error("`{0}` needs a capability context")]
    NeedsContext(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    ValidWithinBounds,
    Countermodel(MentalState),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::ValidWithinBounds)
    }

    pub fn countermodel(&self) -> Option<&MentalState> {
        match self {
            Validity::Countermodel(s) => Some(s),
            Validity::ValidWithinBounds => None,
        }
    }
}

/// Anything that can decide validity of a mental-state formula within bounds.
pub trait ValidityOracle: Sync {
    fn validity(&self, phi: &MsFormula) -> Result<Validity, OracleError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub vocab: Vocab,
    pub max_generators: usize,
}

impl Bounds {
    pub fn new(vocab: Vocab, max_generators: usize) -> Self {
        Bounds { vocab, max_generators }
    }

    /// The formula's own atoms, which suffice: projecting a larger state onto
    /// them preserves the truth of every leaf.
    pub fn for_formula(phi: &MsFormula, max_generators: usize) -> Self {
        Bounds { vocab: Vocab::of(phi.prop_formulas().iter()), max_generators }
    }

    fn check(&self) -> Result<(), OracleError> {
        if self.vocab.len() > MAX_ATOMS || self.max_generators > MAX_GENERATORS {
            return Err(OracleError::BoundsExceeded { atoms: self.vocab.len(), generators: self.max_generators });
        }
        Ok(())
    }
}

impl ValidityOracle for Bounds {
    fn validity(&self, phi: &MsFormula) -> Result<Validity, OracleError> {
        validity_oracle(phi, self)
    }
}

/// Mental-state formula over valuation masks.
pub(crate) enum Ir {
    C(bool),
    B(u64),
    G(usize),
    Adopt(u64),
    Not(Box<Ir>),
    And(Box<Ir>, Box<Ir>),
    Or(Box<Ir>, Box<Ir>),
    Imp(Box<Ir>, Box<Ir>),
    Iff(Box<Ir>, Box<Ir>),
}

impl Ir {
    /// `g_masks` collects the distinct `G` leaf model masks.
    pub(crate) fn compile(phi: &MsFormula, vocab: &Vocab, g_masks: &mut Vec<u64>) -> Result<Ir, OracleError> {
        let mask = |f: &Formula| -> Result<u64, OracleError> {
            if let Some(a) = f.atoms().into_iter().find(|a| vocab.index_of(a).is_none()) {
                return Err(OracleError::OutsideVocab(a.to_string()));
            }
            Ok(models(f, vocab).mask())
        };
        let bx = |x: &MsFormula, g: &mut Vec<u64>| Ir::compile(x, vocab, g).map(Box::new);
        Ok(match phi {
            MsFormula::True => Ir::C(true),
            MsFormula::False => Ir::C(false),
            MsFormula::B(f) => Ir::B(mask(f)?),
            MsFormula::G(f) => {
                let m = mask(f)?;
                let j = match g_masks.iter().position(|x| *x == m) {
                    Some(j) => j,
                    None => {
                        g_masks.push(m);
                        g_masks.len() - 1
                    }
                };
                Ir::G(j)
            }
            MsFormula::Enabled(Target::Drop(_)) => Ir::C(true),
            MsFormula::Enabled(Target::Adopt(f)) => Ir::Adopt(mask(f)?),
            MsFormula::Enabled(t) => return Err(OracleError::NeedsContext(format!("enabled({t})"))),
            MsFormula::Not(a) => Ir::Not(bx(a, g_masks)?),
            MsFormula::And(a, b) => Ir::And(bx(a, g_masks)?, bx(b, g_masks)?),
            MsFormula::Or(a, b) => Ir::Or(bx(a, g_masks)?, bx(b, g_masks)?),
            MsFormula::Implies(a, b) => Ir::Imp(bx(a, g_masks)?, bx(b, g_masks)?),
            MsFormula::Iff(a, b) => Ir::Iff(bx(a, g_masks)?, bx(b, g_masks)?),
        })
    }

    /// `s`: belief models; `goal(j)`: truth of the `j`-th G leaf.
    pub(crate) fn eval(&self, s: u64, goal: &impl Fn(usize) -> bool) -> bool {
        match self {
            Ir::C(b) => *b,
            Ir::B(m) => s & !m == 0,
            Ir::G(j) => goal(*j),
            Ir::Adopt(m) => *m != 0 && s & !m != 0,
            Ir::Not(a) => !a.eval(s, goal),
            Ir::And(a, b) => a.eval(s, goal) && b.eval(s, goal),
            Ir::Or(a, b) => a.eval(s, goal) || b.eval(s, goal),
            Ir::Imp(a, b) => !a.eval(s, goal) || b.eval(s, goal),
            Ir::Iff(a, b) => a.eval(s, goal) == b.eval(s, goal),
        }
    }
}

/// Builds the concrete state for belief models `s` and generator masks.
pub(crate) fn concrete_state(canon: &Canon, s: u64, gens: &[u64]) -> MentalState {
    let n = canon.vocab().len();
    let full = full_mask(n);
    let beliefs = if s == full {
        BeliefBase::default()
    } else {
        BeliefBase::new([canon.formula(&ModelSet::from_mask(n, s))])
    };
    let goals = GoalBase::new(gens.iter().map(|g| canon.formula(&ModelSet::from_mask(n, *g))));
    let st = MentalState::new_unchecked(beliefs, goals);
    debug_assert!(st.check().is_ok());
    st
}

pub(crate) fn full_mask(n: usize) -> u64 {
    let v = 1u32 << n;
    if v >= 64 {
        !0
    } else {
        (1u64 << v) - 1
    }
}

/// Validity of `phi` over every mental state within `bounds`: belief theories
/// are all nonempty valuation sets (weakest first), generator sets have at
/// most `bounds.max_generators` members. Returns the first countermodel.
pub fn validity_oracle(phi: &MsFormula, bounds: &Bounds) -> Result<Validity, OracleError> {
    bounds.check()?;
    let vocab = &bounds.vocab;
    let n = vocab.len();
    let full = full_mask(n);
    let mut g_masks = Vec::new();
    let ir = Ir::compile(phi, vocab, &mut g_masks)?;
    if g_masks.len() > 63 {
        return Err(OracleError::BoundsExceeded { atoms: n, generators: bounds.max_generators });
    }

    // Generators grouped by profile, weakest first within a group.
    let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for g in 1..=full {
        let p = g_masks.iter().enumerate().filter(|(_, m)| g & !**m == 0).fold(0u64, |acc, (j, _)| acc | 1 << j);
        groups.entry(p).or_default().push(g);
    }
    for v in groups.values_mut() {
        v.sort_by_key(|g| (std::cmp::Reverse(g.count_ones()), *g));
    }

    let thetas: Vec<u64> = (1..=full).rev().collect();
    let found = thetas.par_iter().find_map_first(|&s| {
        let live = g_masks
            .iter()
            .enumerate()
            .filter(|(_, m)| **m != 0 && s & !**m != 0)
            .fold(0u64, |acc, (j, _)| acc | 1 << j);
        let mut realizable: Vec<(u64, u64)> = Vec::new();
        let mut seen_eff = HashSet::new();
        for (p, gs) in &groups {
            let eff = p & live;
            if eff == 0 || seen_eff.contains(&eff) {
                continue;
            }
            if let Some(g) = gs.iter().find(|g| s & !**g != 0) {
                seen_eff.insert(eff);
                realizable.push((eff, *g));
            }
        }
        let holds = |u: u64| ir.eval(s, &|j| u >> j & 1 == 1);
        let mut frontier: Vec<(u64, Vec<u64>)> = vec![(0, vec![])];
        let mut seen: HashSet<u64> = HashSet::from([0]);
        if !holds(0) {
            return Some((s, vec![]));
        }
        for _ in 0..bounds.max_generators {
            let mut next = Vec::new();
            for (u, gens) in &frontier {
                for (eff, g) in &realizable {
                    let nu = u | eff;
                    if seen.insert(nu) {
                        let mut ng = gens.clone();
                        ng.push(*g);
                        if !holds(nu) {
                            return Some((s, ng));
                        }
                        next.push((nu, ng));
                    }
                }
            }
            frontier = next;
        }
        None
    });
    Ok(match found {
        None => Validity::ValidWithinBounds,
        Some((s, gens)) => {
            let canon = Canon::new(vocab);
            let gens: BTreeSet<u64> = gens.into_iter().collect();
            Validity::Countermodel(concrete_state(&canon, s, &gens.into_iter().collect::<Vec<_>>()))
        }
    })
}
