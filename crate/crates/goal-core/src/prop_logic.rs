//! Propositional language, its parser, and classical consequence decided by
//! enumerating valuations.
//!
//! Semantic work goes through [`ModelSet`]: the set of satisfying valuations
//! of a formula over a fixed [`Vocab`], computed bitwise from the atom columns.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::syntax::{Cursor, ParseError, Pos, Tok};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Self {
        Atom(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// True if `name` matches `[a-zA-Z_][a-zA-Z0-9_]*` and is not a constant.
    pub fn valid_name(name: &str) -> bool {
        let mut cs = name.chars();
        matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
            && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
            && name != "true"
            && name != "false"
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(Atom::new(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn iff(self, rhs: Formula) -> Self {
        Formula::Iff(Box::new(self), Box::new(rhs))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Self {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Self {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(a) => a.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Height of the tree; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(_) => 5,
            _ => 6,
        }
    }
}

/// Writes `a op b` with the fewest parentheses that reparse to the same tree.
/// `&` and `|` associate left, the arrows right.
pub(crate) fn write_binary<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    op: &str,
    prec: u8,
    right_assoc: bool,
    (a, pa): (&T, u8),
    (b, pb): (&T, u8),
) -> fmt::Result {
    let lp = if right_assoc { pa <= prec } else { pa < prec };
    let rp = if right_assoc { pb < prec } else { pb <= prec };
    wrap(f, a, lp)?;
    write!(f, " {op} ")?;
    wrap(f, b, rp)
}

pub(crate) fn wrap<T: fmt::Display>(f: &mut fmt::Formatter<'_>, x: &T, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({x})")
    } else {
        write!(f, "{x}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => {
                f.write_str("!")?;
                wrap(f, a.as_ref(), a.prec() < 5)
            }
            Formula::And(a, b) => write_binary(f, "&", 4, false, (a.as_ref(), a.prec()), (b.as_ref(), b.prec())),
            Formula::Or(a, b) => write_binary(f, "|", 3, false, (a.as_ref(), a.prec()), (b.as_ref(), b.prec())),
            Formula::Implies(a, b) => {
                write_binary(f, "->", 2, true, (a.as_ref(), a.prec()), (b.as_ref(), b.prec()))
            }
            Formula::Iff(a, b) => write_binary(f, "<->", 1, true, (a.as_ref(), a.prec()), (b.as_ref(), b.prec())),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An ordered atom vocabulary. Atom `i` is bit `i` of a valuation index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
}

impl Vocab {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = Vocab::default();
        for n in names {
            v.insert(Atom::new(n.as_ref()));
        }
        v
    }

    /// Sorted vocabulary of every atom occurring in `fs`.
    pub fn of<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut set = BTreeSet::new();
        for f in fs {
            f.collect_atoms(&mut set);
        }
        let mut v = Vocab::default();
        for a in set {
            v.insert(a);
        }
        v
    }

    pub fn insert(&mut self, a: Atom) -> bool {
        if self.index.contains_key(&a) {
            return false;
        }
        self.index.insert(a.clone(), self.atoms.len());
        self.atoms.push(a);
        true
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn index_of(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(&Atom::new(name))
    }

    pub fn num_valuations(&self) -> usize {
        1usize << self.atoms.len()
    }
}

/// A total assignment over a vocabulary, stored as a bit index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Valuation(pub u64);

impl Valuation {
    pub fn get(&self, vocab: &Vocab, a: &Atom) -> Option<bool> {
        vocab.index_of(a).map(|i| self.0 >> i & 1 == 1)
    }

    /// Direct recursive evaluation. Atoms outside `vocab` are an error.
    pub fn eval(&self, vocab: &Vocab, f: &Formula) -> Option<bool> {
        Some(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => self.get(vocab, a)?,
            Formula::Not(a) => !self.eval(vocab, a)?,
            Formula::And(a, b) => self.eval(vocab, a)? & self.eval(vocab, b)?,
            Formula::Or(a, b) => self.eval(vocab, a)? | self.eval(vocab, b)?,
            Formula::Implies(a, b) => !self.eval(vocab, a)? | self.eval(vocab, b)?,
            Formula::Iff(a, b) => self.eval(vocab, a)? == self.eval(vocab, b)?,
        })
    }
}

/// A set of valuations over a vocabulary of `n` atoms, as a bitset of `2^n` bits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelSet {
    nbits: usize,
    words: Vec<u64>,
}

impl fmt::Debug for ModelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl ModelSet {
    pub fn empty(num_atoms: usize) -> Self {
        let nbits = 1usize << num_atoms;
        ModelSet { nbits, words: vec![0; nbits.div_ceil(64)] }
    }

    pub fn full(num_atoms: usize) -> Self {
        let mut s = Self::empty(num_atoms);
        s.words.iter_mut().for_each(|w| *w = !0);
        s.trim();
        s
    }

    /// Builds a set from the low `2^num_atoms` bits of `mask` (vocabularies of at most 6 atoms).
    pub fn from_mask(num_atoms: usize, mask: u64) -> Self {
        assert!(num_atoms <= 6, "from_mask supports at most 6 atoms");
        let mut s = Self::empty(num_atoms);
        s.words[0] = mask;
        s.trim();
        s
    }

    /// The low word; exact for vocabularies of at most 6 atoms.
    pub fn mask(&self) -> u64 {
        self.words[0]
    }

    pub fn atom_column(num_atoms: usize, i: usize) -> Self {
        let mut s = Self::empty(num_atoms);
        for v in 0..s.nbits {
            if v >> i & 1 == 1 {
                s.words[v / 64] |= 1 << (v % 64);
            }
        }
        s
    }

    pub fn singleton(num_atoms: usize, v: usize) -> Self {
        let mut s = Self::empty(num_atoms);
        s.words[v / 64] |= 1 << (v % 64);
        s
    }

    fn trim(&mut self) {
        if self.nbits < 64 {
            self.words[0] &= (1u64 << self.nbits) - 1;
        }
    }

    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        s.words.iter_mut().for_each(|w| *w = !*w);
        s.trim();
        s
    }

    pub fn intersect(&self, o: &Self) -> Self {
        let mut s = self.clone();
        s.words.iter_mut().zip(&o.words).for_each(|(a, b)| *a &= b);
        s
    }

    pub fn union(&self, o: &Self) -> Self {
        let mut s = self.clone();
        s.words.iter_mut().zip(&o.words).for_each(|(a, b)| *a |= b);
        s
    }

    pub fn is_subset(&self, o: &Self) -> bool {
        self.words.iter().zip(&o.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.complement().is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&v| self.contains(v))
    }

    pub fn num_valuations(&self) -> usize {
        self.nbits
    }
}

/// Models of `f` over `vocab`.
///
/// Panics if `f` mentions an atom outside `vocab`; callers build the
/// vocabulary from the formulas involved.
pub fn models(f: &Formula, vocab: &Vocab) -> ModelSet {
    let n = vocab.len();
    match f {
        Formula::True => ModelSet::full(n),
        Formula::False => ModelSet::empty(n),
        Formula::Atom(a) => {
            let i = vocab.index_of(a).unwrap_or_else(|| panic!("atom `{a}` not in vocabulary"));
            ModelSet::atom_column(n, i)
        }
        Formula::Not(a) => models(a, vocab).complement(),
        Formula::And(a, b) => models(a, vocab).intersect(&models(b, vocab)),
        Formula::Or(a, b) => models(a, vocab).union(&models(b, vocab)),
        Formula::Implies(a, b) => models(a, vocab).complement().union(&models(b, vocab)),
        Formula::Iff(a, b) => {
            let (x, y) = (models(a, vocab), models(b, vocab));
            x.intersect(&y).union(&x.complement().intersect(&y.complement()))
        }
    }
}

/// Models of a finite set read conjunctively.
pub fn models_of_set<'a>(fs: impl IntoIterator<Item = &'a Formula>, vocab: &Vocab) -> ModelSet {
    let mut m = ModelSet::full(vocab.len());
    for f in fs {
        m = m.intersect(&models(f, vocab));
    }
    m
}

/// `premises ⊨ phi`, deciding over the atoms the formulas mention.
pub fn entails(premises: &[Formula], phi: &Formula) -> bool {
    let vocab = Vocab::of(premises.iter().chain(std::iter::once(phi)));
    models_of_set(premises, &vocab).is_subset(&models(phi, &vocab))
}

pub fn consistent(set: &[Formula]) -> bool {
    let vocab = Vocab::of(set);
    !models_of_set(set, &vocab).is_empty()
}

pub fn tautology(phi: &Formula) -> bool {
    entails(&[], phi)
}

pub fn equivalent(a: &Formula, b: &Formula) -> bool {
    let vocab = Vocab::of([a, b]);
    models(a, &vocab) == models(b, &vocab)
}

/// The conjunction of literals true exactly at valuation `v`.
pub fn minterm(vocab: &Vocab, v: usize) -> Formula {
    Formula::conj(vocab.atoms().iter().enumerate().map(|(i, a)| {
        let lit = Formula::Atom(a.clone());
        if v >> i & 1 == 1 {
            lit
        } else {
            lit.not()
        }
    }))
}

/// Picks readable representatives for model sets: the smallest formula for
/// vocabularies of up to three atoms, otherwise a disjunction of minterms.
pub struct Canon {
    vocab: Vocab,
    table: HashMap<u64, Formula>,
}

impl Canon {
    pub fn new(vocab: &Vocab) -> Self {
        let mut table = HashMap::new();
        if vocab.len() <= 3 {
            let n = vocab.len();
            let target = 1usize << (1usize << n);
            let mut by_size: Vec<Vec<(u64, Formula)>> = vec![Vec::new()];
            let mut seed: Vec<Formula> = vec![Formula::True, Formula::False];
            seed.extend(vocab.atoms().iter().cloned().map(Formula::Atom));
            let mut level = Vec::new();
            for f in seed {
                let m = models(&f, vocab).mask();
                if let std::collections::hash_map::Entry::Vacant(e) = table.entry(m) {
                    e.insert(f.clone());
                    level.push((m, f));
                }
            }
            by_size.push(level);
            let mut size = 1;
            while table.len() < target && size < 40 {
                size += 1;
                let mut level = Vec::new();
                let mut cands: Vec<Formula> = by_size[size - 1].iter().map(|(_, f)| f.clone().not()).collect();
                for ls in 1..size - 1 {
                    let rs = size - 1 - ls;
                    for (_, a) in &by_size[ls] {
                        for (_, b) in &by_size[rs] {
                            cands.push(a.clone().and(b.clone()));
                            cands.push(a.clone().or(b.clone()));
                            cands.push(a.clone().implies(b.clone()));
                        }
                    }
                }
                for f in cands {
                    let m = models(&f, vocab).mask();
                    if let std::collections::hash_map::Entry::Vacant(e) = table.entry(m) {
                        e.insert(f.clone());
                        level.push((m, f));
                    }
                }
                by_size.push(level);
            }
        }
        Canon { vocab: vocab.clone(), table }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn formula(&self, m: &ModelSet) -> Formula {
        if self.vocab.len() <= 3 {
            if let Some(f) = self.table.get(&m.mask()) {
                return f.clone();
            }
        }
        if m.is_full() {
            return Formula::True;
        }
        Formula::disj(m.iter().map(|v| minterm(&self.vocab, v)))
    }
}

/// Parses a formula whose atoms must all belong to `vocab`.
pub fn parse_formula(text: &str, vocab: &Vocab) -> Result<Formula, ParseError> {
    let mut c = Cursor::new(text)?;
    let f = parse_prop(&mut c, Some(vocab))?;
    c.expect_eof()?;
    Ok(f)
}

/// Parses a formula without restricting its atoms.
pub fn parse_formula_free(text: &str) -> Result<Formula, ParseError> {
    let mut c = Cursor::new(text)?;
    let f = parse_prop(&mut c, None)?;
    c.expect_eof()?;
    Ok(f)
}

pub(crate) fn parse_prop(c: &mut Cursor, vocab: Option<&Vocab>) -> Result<Formula, ParseError> {
    let lhs = parse_imp(c, vocab)?;
    if c.eat(&Tok::DArrow) {
        Ok(lhs.iff(parse_prop(c, vocab)?))
    } else {
        Ok(lhs)
    }
}

fn parse_imp(c: &mut Cursor, vocab: Option<&Vocab>) -> Result<Formula, ParseError> {
    let lhs = parse_or(c, vocab)?;
    if c.eat(&Tok::Arrow) {
        Ok(lhs.implies(parse_imp(c, vocab)?))
    } else {
        Ok(lhs)
    }
}

fn parse_or(c: &mut Cursor, vocab: Option<&Vocab>) -> Result<Formula, ParseError> {
    let mut lhs = parse_and(c, vocab)?;
    while c.eat(&Tok::Pipe) {
        lhs = lhs.or(parse_and(c, vocab)?);
    }
    Ok(lhs)
}

fn parse_and(c: &mut Cursor, vocab: Option<&Vocab>) -> Result<Formula, ParseError> {
    let mut lhs = parse_unary(c, vocab)?;
    while c.eat(&Tok::Amp) {
        lhs = lhs.and(parse_unary(c, vocab)?);
    }
    Ok(lhs)
}

fn parse_unary(c: &mut Cursor, vocab: Option<&Vocab>) -> Result<Formula, ParseError> {
    if c.eat(&Tok::Bang) {
        return Ok(parse_unary(c, vocab)?.not());
    }
    match c.peek().clone() {
        Tok::LParen => {
            c.bump();
            let f = parse_prop(c, vocab)?;
            c.expect(&Tok::RParen)?;
            Ok(f)
        }
        Tok::Ident(name) => {
            let pos = c.bump().1;
            atom_or_const(&name, pos, vocab)
        }
        _ => Err(c.unexpected("formula")),
    }
}

fn atom_or_const(name: &str, pos: Pos, vocab: Option<&Vocab>) -> Result<Formula, ParseError> {
    match name {
        "true" => Ok(Formula::True),
        "false" => Ok(Formula::False),
        _ => match vocab {
            Some(v) if !v.contains(name) => Err(ParseError::UnknownAtom { name: name.to_string(), pos }),
            _ => Ok(Formula::atom(name)),
        },
    }
}
