//! A materialized bounded universe of mental states for bulk checks.
//!
//! Belief theory `S` is represented by the single canonical formula for `S`
//! (or the empty base when `S` is everything); goal bases range over sets of
//! at most `k` canonical generators. The enumeration order matches
//! [`validity_oracle`](crate::oracle::validity_oracle): weakest theory first.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use fixedbitset::FixedBitSet;

use crate::capabilities::{apply_m, Action};
use crate::mental_state::{Compiled, MentalState, MsFormula, StateSem, Target};
use crate::oracle::{concrete_state, full_mask, OracleError, Validity, ValidityOracle, MAX_ATOMS};
use crate::prop_logic::{models, Canon, Formula, ModelSet, Vocab};

type Successors = Vec<Option<(MentalState, StateSem)>>;

pub struct Universe {
    vocab: Vocab,
    canon: Canon,
    max_generators: usize,
    states: Vec<MentalState>,
    sems: Vec<StateSem>,
    theories: Vec<u64>,
    ext: RwLock<HashMap<MsFormula, Arc<FixedBitSet>>>,
    succ: RwLock<HashMap<Action, Arc<Successors>>>,
    post: RwLock<HashMap<(Action, MsFormula), Arc<FixedBitSet>>>,
}

impl Universe {
    pub fn new(vocab: Vocab, max_generators: usize) -> Result<Self, OracleError> {
        if vocab.len() > MAX_ATOMS.min(3) {
            return Err(OracleError::BoundsExceeded { atoms: vocab.len(), generators: max_generators });
        }
        let n = vocab.len();
        let full = full_mask(n);
        let canon = Canon::new(&vocab);
        let mut states = Vec::new();
        let mut theories = Vec::new();
        for s in (1..=full).rev() {
            let cands: Vec<u64> = (1..=full).filter(|g| s & !g != 0).collect();
            for k in 0..=max_generators {
                for combo in combinations(cands.len(), k) {
                    let gens: Vec<u64> = combo.iter().map(|&i| cands[i]).collect();
                    states.push(concrete_state(&canon, s, &gens));
                    theories.push(s);
                }
            }
        }
        let sems = states.iter().map(|st| StateSem::new(st, &vocab)).collect();
        Ok(Universe {
            vocab,
            canon,
            max_generators,
            states,
            sems,
            theories,
            ext: RwLock::default(),
            succ: RwLock::default(),
            post: RwLock::default(),
        })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn canon(&self) -> &Canon {
        &self.canon
    }

    pub fn max_generators(&self) -> usize {
        self.max_generators
    }

    pub fn states(&self) -> &[MentalState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Canonical representatives of all consistent formulas over the vocabulary.
    pub fn consistent_formulas(&self) -> Vec<Formula> {
        let n = self.vocab.len();
        (1..=full_mask(n)).map(|m| self.canon.formula(&ModelSet::from_mask(n, m))).collect()
    }

    fn mask(&self, f: &Formula) -> Result<ModelSet, OracleError> {
        if let Some(a) = f.atoms().into_iter().find(|a| self.vocab.index_of(a).is_none()) {
            return Err(OracleError::OutsideVocab(a.to_string()));
        }
        Ok(models(f, &self.vocab))
    }

    fn leaf(&self, phi: &MsFormula) -> Result<FixedBitSet, OracleError> {
        let mut out = FixedBitSet::with_capacity(self.len());
        match phi {
            MsFormula::B(f) => {
                let m = self.mask(f)?.mask();
                for (i, s) in self.theories.iter().enumerate() {
                    out.set(i, s & !m == 0);
                }
            }
            MsFormula::G(f) => {
                let m = self.mask(f)?;
                for (i, sem) in self.sems.iter().enumerate() {
                    out.set(i, sem.goal(&m));
                }
            }
            MsFormula::Enabled(Target::Adopt(f)) => {
                let m = self.mask(f)?.mask();
                for (i, s) in self.theories.iter().enumerate() {
                    out.set(i, m != 0 && s & !m != 0);
                }
            }
            MsFormula::Enabled(Target::Drop(_)) | MsFormula::True => out.insert_range(..),
            MsFormula::False => {}
            MsFormula::Enabled(t) => return Err(OracleError::NeedsContext(format!("enabled({t})"))),
            _ => unreachable!("not a leaf"),
        }
        Ok(out)
    }

    fn compute(&self, phi: &MsFormula) -> Result<FixedBitSet, OracleError> {
        if let Some(b) = self.ext.read().unwrap().get(phi) {
            return Ok((**b).clone());
        }
        Ok(match phi {
            MsFormula::Not(a) => {
                let mut x = self.compute(a)?;
                x.toggle_range(..);
                x
            }
            MsFormula::And(a, b) => {
                let mut x = self.compute(a)?;
                x.intersect_with(&self.compute(b)?);
                x
            }
            MsFormula::Or(a, b) => {
                let mut x = self.compute(a)?;
                x.union_with(&self.compute(b)?);
                x
            }
            MsFormula::Implies(a, b) => {
                let mut x = self.compute(a)?;
                x.toggle_range(..);
                x.union_with(&self.compute(b)?);
                x
            }
            MsFormula::Iff(a, b) => {
                let mut x = self.compute(a)?;
                x.symmetric_difference_with(&self.compute(b)?);
                x.toggle_range(..);
                x
            }
            leaf => {
                let x = self.leaf(leaf)?;
                self.ext.write().unwrap().insert(leaf.clone(), Arc::new(x.clone()));
                x
            }
        })
    }

    /// The set of universe states satisfying `phi`. Memoized per formula.
    pub fn extension(&self, phi: &MsFormula) -> Result<Arc<FixedBitSet>, OracleError> {
        if let Some(b) = self.ext.read().unwrap().get(phi) {
            return Ok(b.clone());
        }
        let x = Arc::new(self.compute(phi)?);
        self.ext.write().unwrap().insert(phi.clone(), x.clone());
        Ok(x)
    }

    /// M(action, s) for every state, with model sets precomputed.
    pub fn successors(&self, action: &Action) -> Arc<Successors> {
        if let Some(s) = self.succ.read().unwrap().get(action) {
            return s.clone();
        }
        let out: Successors = self
            .states
            .iter()
            .map(|st| {
                apply_m(action, st).map(|t| {
                    let sem = StateSem::new(&t, &self.vocab);
                    (t, sem)
                })
            })
            .collect();
        let out = Arc::new(out);
        self.succ.write().unwrap().insert(action.clone(), out.clone());
        out
    }

    /// States at which an attempt at `action` yields a state satisfying
    /// `post`: the successor when enabled, the state itself otherwise.
    pub fn post_ok(&self, action: &Action, post: &MsFormula) -> Result<Arc<FixedBitSet>, OracleError> {
        let key = (action.clone(), post.clone());
        if let Some(b) = self.post.read().unwrap().get(&key) {
            return Ok(b.clone());
        }
        let here = self.extension(post)?;
        let succ = self.successors(action);
        let compiled = Compiled::new(post, &self.vocab);
        let mut out = FixedBitSet::with_capacity(self.len());
        for (i, s) in succ.iter().enumerate() {
            let ok = match s {
                Some((t, sem)) => compiled.eval(sem, t, None).map_err(|e| OracleError::NeedsContext(e.to_string()))?,
                None => here.contains(i),
            };
            out.set(i, ok);
        }
        let out = Arc::new(out);
        self.post.write().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// Index of the first state satisfying `a` but not `b`.
    pub fn first_outside(&self, a: &FixedBitSet, b: &FixedBitSet) -> Option<usize> {
        a.difference(b).next()
    }
}

/// Validity queries do not memoize their operands: bulk callers pose many
/// one-off formulas.
impl ValidityOracle for Universe {
    fn validity(&self, phi: &MsFormula) -> Result<Validity, OracleError> {
        let bad = match phi {
            MsFormula::Implies(a, b) => {
                let (a, b) = (self.compute(a)?, self.compute(b)?);
                self.first_outside(&a, &b)
            }
            _ => {
                let x = self.compute(phi)?;
                (0..self.len()).find(|i| !x.contains(*i))
            }
        };
        Ok(match bad {
            None => Validity::ValidWithinBounds,
            Some(i) => Validity::Countermodel(self.states[i].clone()),
        })
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}
