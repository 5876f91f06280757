//! In-memory representation of (non-)ground programs.
//!
//! Every value here is immutable once built. Transformations such as
//! grounding or instrumentation produce new [`Program`]s and never edit an
//! existing one in place.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned-ish name of a predicate, constant or variable.
pub type Symbol = Arc<str>;

/// A ground value: a symbolic constant or an integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Int(i64),
    Sym(Symbol),
}

impl Constant {
    pub fn sym(name: &str) -> Self {
        Constant::Sym(Symbol::from(name))
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(i) => write!(f, "{i}"),
            Constant::Sym(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Constant {
    fn from(value: i64) -> Self {
        Constant::Int(value)
    }
}

impl From<&str> for Constant {
    fn from(value: &str) -> Self {
        Constant::sym(value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Constant),
    /// A variable; its name starts with an uppercase letter or `_`.
    Var(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::from(name))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Term::Const(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => c.fmt(f),
            Term::Var(v) => f.write_str(v),
        }
    }
}

impl<T: Into<Constant>> From<T> for Term {
    fn from(value: T) -> Self {
        Term::Const(value.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom { predicate: Symbol::from(predicate), args }
    }

    /// A zero-arity atom such as `a`.
    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                t.fmt(f)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    /// `true` for default negation (`not a`).
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, negated: false }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, negated: true }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        self.atom.fmt(f)
    }
}

/// Identifier of a rule inside one [`Program`]. Ids start at 1; 0 marks a
/// rule that has not been placed in a program yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RuleId(pub u32);

impl RuleId {
    pub const UNASSIGNED: RuleId = RuleId(0);
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Normal,
    Constraint,
    Choice,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Atom(Atom),
    /// Integrity constraint; no head.
    Falsum,
    /// `bound { a_1; ...; a_k }`. Requires at least `bound` of the atoms.
    Choice { bound: usize, atoms: Vec<Atom> },
}

/// A rule together with its id.
///
/// Choice rules always have an empty body. Constructors enforce this, which
/// is why the fields are private.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    id: RuleId,
    head: Head,
    body: Vec<Literal>,
}

impl Rule {
    pub fn normal(head: Atom, body: Vec<Literal>) -> Self {
        Rule { id: RuleId::UNASSIGNED, head: Head::Atom(head), body }
    }

    pub fn fact(head: Atom) -> Self {
        Rule::normal(head, Vec::new())
    }

    pub fn constraint(body: Vec<Literal>) -> Self {
        Rule { id: RuleId::UNASSIGNED, head: Head::Falsum, body }
    }

    /// Builds `bound { atoms }`. Duplicate atoms are dropped, keeping the
    /// first occurrence.
    pub fn choice(bound: usize, atoms: Vec<Atom>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        let atoms: Vec<Atom> = atoms.into_iter().filter(|a| seen.insert(a.clone())).collect();
        if bound > atoms.len() {
            return Err(ModelError::ChoiceBound { bound, atoms: atoms.len() });
        }
        Ok(Rule { id: RuleId::UNASSIGNED, head: Head::Choice { bound, atoms }, body: Vec::new() })
    }

    pub fn with_id(mut self, id: RuleId) -> Self {
        self.id = id;
        self
    }

    pub fn id(&self) -> RuleId {
        self.id
    }

    pub fn kind(&self) -> RuleKind {
        match self.head {
            Head::Atom(_) => RuleKind::Normal,
            Head::Falsum => RuleKind::Constraint,
            Head::Choice { .. } => RuleKind::Choice,
        }
    }

    pub fn head(&self) -> &Head {
        &self.head
    }

    /// The head atom of a normal rule.
    pub fn head_atom(&self) -> Option<&Atom> {
        match &self.head {
            Head::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    /// `B+(r)`.
    pub fn pos(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| !l.negated).map(|l| &l.atom)
    }

    /// `B-(r)`.
    pub fn neg(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| l.negated).map(|l| &l.atom)
    }

    pub fn is_fact(&self) -> bool {
        matches!(self.head, Head::Atom(_)) && self.body.is_empty()
    }

    /// Every atom mentioned by the rule: head, choice elements and body.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        let head: Box<dyn Iterator<Item = &Atom>> = match &self.head {
            Head::Atom(a) => Box::new(std::iter::once(a)),
            Head::Falsum => Box::new(std::iter::empty()),
            Head::Choice { atoms, .. } => Box::new(atoms.iter()),
        };
        head.chain(self.body.iter().map(|l| &l.atom))
    }

    pub fn is_ground(&self) -> bool {
        self.atoms().all(Atom::is_ground)
    }

    /// Distinct variables in order of first occurrence (head first).
    pub fn variables(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        for v in self.atoms().flat_map(Atom::variables) {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Equality up to rule ids, treating `B+`, `B-` and choice elements as
    /// sets.
    pub fn structurally_eq(&self, other: &Rule) -> bool {
        self.shape_key() == other.shape_key()
    }

    pub(crate) fn shape_key(&self) -> (ShapeHead<'_>, BTreeSet<&Atom>, BTreeSet<&Atom>) {
        let head = match &self.head {
            Head::Atom(a) => ShapeHead::Atom(a),
            Head::Falsum => ShapeHead::Falsum,
            Head::Choice { bound, atoms } => ShapeHead::Choice(*bound, atoms.iter().collect()),
        };
        (head, self.pos().collect(), self.neg().collect())
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum ShapeHead<'a> {
    Atom(&'a Atom),
    Falsum,
    Choice(usize, BTreeSet<&'a Atom>),
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Head::Atom(a) => {
                a.fmt(f)?;
                if !self.body.is_empty() {
                    f.write_str(" :- ")?;
                }
            }
            Head::Falsum => f.write_str(":-")?,
            Head::Choice { bound, atoms } => {
                write!(f, "{bound} {{")?;
                for (i, a) in atoms.iter().enumerate() {
                    f.write_str(if i == 0 { " " } else { "; " })?;
                    a.fmt(f)?;
                }
                f.write_str(" }")?;
            }
        }
        if matches!(self.head, Head::Falsum) && !self.body.is_empty() {
            f.write_str(" ")?;
        }
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            l.fmt(f)?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("atom {0} is not ground")]
    NonGround(Atom),
    #[error("predicate {predicate} used with arity {found}, but earlier with arity {expected}")]
    ArityClash { predicate: Symbol, expected: usize, found: usize },
    #[error("rule id {0} is used twice")]
    DuplicateRuleId(RuleId),
    #[error("rule id 0 is reserved for unplaced rules")]
    UnassignedRuleId,
    #[error("choice bound {bound} exceeds the number of choice atoms ({atoms})")]
    ChoiceBound { bound: usize, atoms: usize },
}

/// A finite set of rules with unique ids and a fixed arity per predicate.
#[derive(Clone, Debug, Default)]
pub struct Program {
    rules: Vec<Rule>,
    index: HashMap<RuleId, usize>,
    signature: BTreeMap<Symbol, usize>,
}

impl Program {
    /// Places `rules` in a program, numbering them 1, 2, ... in order.
    pub fn new(rules: Vec<Rule>) -> Result<Self, ModelError> {
        let rules = rules
            .into_iter()
            .zip(1u32..)
            .map(|(r, id)| r.with_id(RuleId(id)))
            .collect();
        Program::with_ids(rules)
    }

    /// Builds a program keeping the ids the rules already carry.
    pub fn with_ids(rules: Vec<Rule>) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(rules.len());
        let mut signature: BTreeMap<Symbol, usize> = BTreeMap::new();
        for (pos, rule) in rules.iter().enumerate() {
            if rule.id == RuleId::UNASSIGNED {
                return Err(ModelError::UnassignedRuleId);
            }
            if index.insert(rule.id, pos).is_some() {
                return Err(ModelError::DuplicateRuleId(rule.id));
            }
            for atom in rule.atoms() {
                check_arity(&mut signature, atom)?;
            }
        }
        Ok(Program { rules, index, signature })
    }

    pub fn empty() -> Self {
        Program::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.index.get(&id).map(|&i| &self.rules[i])
    }

    /// Predicate name to arity.
    pub fn signature(&self) -> &BTreeMap<Symbol, usize> {
        &self.signature
    }

    pub fn max_id(&self) -> RuleId {
        self.rules.iter().map(Rule::id).max().unwrap_or_default()
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(Rule::is_ground)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.rules.iter().flat_map(Rule::atoms).cloned().collect()
    }

    /// Appends `rules` with fresh ids following the current maximum.
    pub fn extend(&self, rules: impl IntoIterator<Item = Rule>) -> Result<Program, ModelError> {
        let mut next = self.max_id().0;
        let mut all = self.rules.clone();
        all.extend(rules.into_iter().map(|r| {
            next += 1;
            r.with_id(RuleId(next))
        }));
        Program::with_ids(all)
    }

    /// Union with another program; the other program's rules get fresh ids.
    pub fn union(&self, other: &Program) -> Result<Program, ModelError> {
        self.extend(other.rules.iter().cloned())
    }

    /// Rule-by-rule structural equality, ignoring ids.
    pub fn structurally_eq(&self, other: &Program) -> bool {
        self.rules.len() == other.rules.len()
            && self.rules.iter().zip(&other.rules).all(|(a, b)| a.structurally_eq(b))
    }
}

fn check_arity(signature: &mut BTreeMap<Symbol, usize>, atom: &Atom) -> Result<(), ModelError> {
    match signature.get(&atom.predicate) {
        Some(&expected) if expected != atom.arity() => Err(ModelError::ArityClash {
            predicate: atom.predicate.clone(),
            expected,
            found: atom.arity(),
        }),
        Some(_) => Ok(()),
        None => {
            signature.insert(atom.predicate.clone(), atom.arity());
            Ok(())
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

/// Renders a program in the textual input language, one rule per line.
pub fn render(p: &Program) -> String {
    p.to_string()
}

/// One fact per atom, numbered from 1.
pub fn facts_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Result<Program, ModelError> {
    let rules = atoms
        .into_iter()
        .map(|a| {
            if a.is_ground() {
                Ok(Rule::fact(a.clone()))
            } else {
                Err(ModelError::NonGround(a.clone()))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Program::new(rules)
}

/// A set of ground atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation(BTreeSet<Atom>);

impl Interpretation {
    pub fn new() -> Self {
        Interpretation::default()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.0.insert(atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn into_atoms(self) -> BTreeSet<Atom> {
        self.0
    }

    /// Keeps only atoms whose predicate satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&Atom) -> bool) -> Interpretation {
        Interpretation(self.0.iter().filter(|a| keep(a)).cloned().collect())
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

impl From<BTreeSet<Atom>> for Interpretation {
    fn from(value: BTreeSet<Atom>) -> Self {
        Interpretation(value)
    }
}

impl<'a> IntoIterator for &'a Interpretation {
    type Item = &'a Atom;
    type IntoIter = std::collections::btree_set::Iter<'a, Atom>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            a.fmt(f)?;
        }
        f.write_str("}")
    }
}
