//! Minimal corrections of inconsistent programs.
//!
//! The user names rules that may be removed (`R`) and rules that may be
//! added (`A`). Each such rule is gated by a fresh selector atom, and a
//! maximal consistent subset of the selectors tells which rules to remove
//! and which to add: a removable rule whose selector is missing from the
//! subset is removed, an addable rule whose selector is missing is added.
//!
//! ```
//! use aspcorrect::correction::{min_correct, CorrectionSpec};
//! use aspcorrect::maxcon::Algorithm;
//! use aspcorrect::parse::{parse_program, parse_rule};
//! use aspcorrect::program::RuleId;
//! use aspcorrect::solver::SolverConfig;
//!
//! let p = parse_program(":- not move(a).\nmove(a) :- stone(b), not stone(c).\nstone(c).").unwrap();
//! let spec = CorrectionSpec {
//!     removable: [RuleId(3)].into(),
//!     addable_rules: vec![parse_rule("stone(b).").unwrap()],
//!     addition_exprs: vec![],
//! };
//! let report = min_correct(&p, &spec, Algorithm::Atleast, &SolverConfig::default()).unwrap();
//! assert_eq!(report.correction.removed[0].to_string(), "stone(c).");
//! assert_eq!(report.correction.added[0].to_string(), "stone(b).");
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ground::{ground, GroundError, Grounding};
use crate::maxcon::{atleast_of, maxcon, Algorithm, MaxConError, Oracle, TargetSet};
use crate::parse::{parse_pattern_pair, parse_rule, ParseError};
use crate::program::{Atom, Constant, Head, Interpretation, Literal, ModelError, Program, Rule, RuleId, Symbol, Term};
use crate::solver::{SolveError, SolverConfig};

pub const REMOVAL_SELECTOR: &str = "sel_r";
pub const ADDITION_SELECTOR: &str = "sel_a";

#[derive(Debug, Error)]
pub enum CorrectionError {
    #[error("no correction exists within the given removable and addable rules")]
    NoCorrection,
    #[error("no addition candidates make the program consistent")]
    NoAdditionCandidates,
    #[error("selector predicate `{0}` already occurs in the program")]
    SelectorCollision(String),
    #[error("removable rule {0} is not in the program")]
    UnknownRule(RuleId),
    #[error("addable rule `{0}` is already in the program")]
    AddableInProgram(String),
    #[error("choice rule `{0}` cannot be removed or added")]
    ChoiceRule(String),
    #[error("addition expression `{0}`: head variables must occur in the domain atom")]
    UnsafeExpression(String),
    #[error("`{0}` is not of the form pred/arity")]
    BadPredicate(String),
    #[error("selector subset is not consistent")]
    Inconsistent,
    #[error("selector subset is not maximal: {0} can be added")]
    NotMaximal(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Ground(#[from] GroundError),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Solver(#[from] SolveError),
    #[error("{0}")]
    MaxCon(MaxConError),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl From<MaxConError> for CorrectionError {
    fn from(e: MaxConError) -> Self {
        match e {
            MaxConError::NoConsistentSubset => CorrectionError::NoCorrection,
            MaxConError::Solver(s) => CorrectionError::Solver(s),
            other => CorrectionError::MaxCon(other),
        }
    }
}

/// `p(A1):t(A2)`: for every derivable instance of `t(A2)`, the matching
/// instance of `p(A1)` is a candidate fact to add.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditionExpr {
    pub head: Atom,
    pub domain: Atom,
}

impl AdditionExpr {
    pub fn new(head: Atom, domain: Atom) -> Result<Self, CorrectionError> {
        let bound: BTreeSet<&Symbol> = domain.variables().collect();
        if head.variables().any(|v| !bound.contains(v)) {
            return Err(CorrectionError::UnsafeExpression(format!("{head}:{domain}")));
        }
        Ok(AdditionExpr { head, domain })
    }

    /// Candidate facts for the ground `atoms`.
    pub fn instances<'a>(&'a self, atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Atom> {
        atoms
            .into_iter()
            .filter_map(|a| {
                let binding = match_atom(&self.domain, a)?;
                Some(Atom {
                    predicate: self.head.predicate.clone(),
                    args: self
                        .head
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Var(v) => Term::Const(binding[v].clone()),
                            c => c.clone(),
                        })
                        .collect(),
                })
            })
            .collect()
    }
}

fn match_atom<'a>(pattern: &'a Atom, ground: &'a Atom) -> Option<HashMap<&'a Symbol, &'a Constant>> {
    if pattern.predicate != ground.predicate || pattern.arity() != ground.arity() {
        return None;
    }
    let mut binding = HashMap::new();
    for (p, g) in pattern.args.iter().zip(&ground.args) {
        let Term::Const(g) = g else { return None };
        match p {
            Term::Const(c) if c != g => return None,
            Term::Const(_) => {}
            Term::Var(v) => {
                if *binding.entry(v).or_insert(g) != g {
                    return None;
                }
            }
        }
    }
    Some(binding)
}

impl FromStr for AdditionExpr {
    type Err = CorrectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, domain) = parse_pattern_pair(s)?;
        AdditionExpr::new(head, domain)
    }
}

impl fmt::Display for AdditionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.head, self.domain)
    }
}

/// The removable rules `R` (by id in a ground program) and the addable
/// rules `A`, given explicitly or through addition expressions.
#[derive(Clone, Debug, Default)]
pub struct CorrectionSpec {
    pub removable: BTreeSet<RuleId>,
    pub addable_rules: Vec<Rule>,
    pub addition_exprs: Vec<AdditionExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Removable {
    /// Id of a source rule; all its ground instances become removable.
    Id(u32),
    /// `pred/arity`: every fact over that predicate becomes removable.
    Predicate(String),
}

/// The JSON form of a [`CorrectionSpec`], written against the source
/// program rather than its grounding.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default)]
    pub removable: Vec<Removable>,
    #[serde(default)]
    pub addable_rules: Vec<String>,
    #[serde(default)]
    pub addition_exprs: Vec<String>,
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self, CorrectionError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn resolve(&self, g: &Grounding) -> Result<CorrectionSpec, CorrectionError> {
        let mut removable = BTreeSet::new();
        for entry in &self.removable {
            match entry {
                Removable::Id(id) => {
                    let instances: Vec<RuleId> = g.instances_of(RuleId(*id)).collect();
                    if instances.is_empty() {
                        return Err(CorrectionError::UnknownRule(RuleId(*id)));
                    }
                    removable.extend(instances);
                }
                Removable::Predicate(sig) => {
                    let (name, arity) = parse_signature(sig)?;
                    removable.extend(
                        g.program
                            .rules()
                            .iter()
                            .filter(|r| r.is_fact())
                            .filter(|r| r.head_atom().is_some_and(|a| &*a.predicate == name && a.arity() == arity))
                            .map(Rule::id),
                    );
                }
            }
        }

        let mut addable_rules = Vec::new();
        for text in &self.addable_rules {
            let rule = parse_rule(text)?;
            if rule.is_ground() {
                addable_rules.push(rule);
                continue;
            }
            // Ground the rule over the program's constants.
            let with_rule = g.program.extend([rule])?;
            let id = with_rule.max_id();
            let grounded = ground(&with_rule)?;
            addable_rules.extend(grounded.instances_of(id).map(|i| grounded.program.rule(i).expect("instance").clone()));
        }

        let addition_exprs = self.addition_exprs.iter().map(|e| e.parse()).collect::<Result<_, _>>()?;
        Ok(CorrectionSpec { removable, addable_rules, addition_exprs })
    }
}

fn parse_signature(sig: &str) -> Result<(&str, usize), CorrectionError> {
    let bad = || CorrectionError::BadPredicate(sig.to_owned());
    let (name, arity) = sig.rsplit_once('/').ok_or_else(bad)?;
    if name.is_empty() {
        return Err(bad());
    }
    Ok((name, arity.parse().map_err(|_| bad())?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Removal,
    Addition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub polarity: Polarity,
    /// The rule as the user gave it, before gating.
    pub rule: Rule,
}

#[derive(Clone, Debug)]
pub struct InstrumentedProgram {
    pub program: Program,
    /// Removal selectors by rule id, then addition selectors by index.
    pub selectors: TargetSet,
    pub provenance: BTreeMap<Atom, Provenance>,
    pub removal_predicate: Symbol,
    pub addition_predicate: Symbol,
}

impl InstrumentedProgram {
    pub fn is_selector(&self, a: &Atom) -> bool {
        a.predicate == self.removal_predicate || a.predicate == self.addition_predicate
    }
}

fn gate(rule: &Rule, selector: Literal) -> Result<Rule, CorrectionError> {
    let body: Vec<Literal> = std::iter::once(selector).chain(rule.body().iter().cloned()).collect();
    Ok(match rule.head() {
        Head::Atom(h) => Rule::normal(h.clone(), body),
        Head::Falsum => Rule::constraint(body),
        Head::Choice { .. } => return Err(CorrectionError::ChoiceRule(rule.to_string())),
    })
}

fn fresh_name(p: &Program, base: &str, taken: &str) -> String {
    let mut name = base.to_owned();
    while p.signature().contains_key(name.as_str()) || name == taken {
        name.push('_');
    }
    name
}

/// Gates the rules `r` of `p` and the new rules `a` with fresh selector
/// atoms. Selector names are made fresh by appending underscores.
pub fn instrument(p: &Program, r: &BTreeSet<RuleId>, a: &[Rule]) -> Result<InstrumentedProgram, CorrectionError> {
    let sel_r = fresh_name(p, REMOVAL_SELECTOR, "");
    let sel_a = fresh_name(p, ADDITION_SELECTOR, &sel_r);
    instrument_with_names(p, r, a, &sel_r, &sel_a)
}

/// As [`instrument`], with the given selector names; fails if one of them
/// already occurs in `p`.
pub fn instrument_with_names(
    p: &Program,
    r: &BTreeSet<RuleId>,
    a: &[Rule],
    sel_r: &str,
    sel_a: &str,
) -> Result<InstrumentedProgram, CorrectionError> {
    for name in [sel_r, sel_a] {
        if p.signature().contains_key(name) || a.iter().flat_map(Rule::atoms).any(|x| &*x.predicate == name) {
            return Err(CorrectionError::SelectorCollision(name.to_owned()));
        }
    }
    if let Some(&missing) = r.iter().find(|id| p.rule(**id).is_none()) {
        return Err(CorrectionError::UnknownRule(missing));
    }
    if let Some(dup) = a.iter().find(|x| p.rules().iter().any(|y| y.structurally_eq(x))) {
        return Err(CorrectionError::AddableInProgram(dup.to_string()));
    }

    let mut provenance = BTreeMap::new();
    let mut selectors = Vec::with_capacity(r.len() + a.len());
    let mut rules = Vec::with_capacity(p.len() + a.len());
    for rule in p.rules() {
        if r.contains(&rule.id()) {
            let s = Atom::new(sel_r, vec![Term::from(rule.id().0 as i64)]);
            rules.push(gate(rule, Literal::pos(s.clone()))?.with_id(rule.id()));
            provenance.insert(s.clone(), Provenance { polarity: Polarity::Removal, rule: rule.clone() });
            selectors.push(s);
        } else {
            rules.push(rule.clone());
        }
    }
    let mut next = p.max_id().0;
    for (k, rule) in a.iter().enumerate() {
        let s = Atom::new(sel_a, vec![Term::from(k as i64 + 1)]);
        next += 1;
        rules.push(gate(rule, Literal::neg(s.clone()))?.with_id(RuleId(next)));
        provenance.insert(s.clone(), Provenance { polarity: Polarity::Addition, rule: rule.clone() });
        selectors.push(s);
    }
    Ok(InstrumentedProgram {
        program: Program::with_ids(rules)?,
        selectors: TargetSet::new(selectors).expect("selectors are distinct and ground"),
        provenance,
        removal_predicate: sel_r.into(),
        addition_predicate: sel_a.into(),
    })
}

/// Rules to remove and rules to add, with an answer set of the corrected
/// program.
#[derive(Clone, Debug)]
pub struct Correction {
    pub removed: Vec<Rule>,
    pub added: Vec<Rule>,
    pub witness: Interpretation,
}

impl Correction {
    pub fn size(&self) -> usize {
        self.removed.len() + self.added.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// `(P ∖ removed) ∪ added`.
    pub fn apply(&self, p: &Program) -> Program {
        apply(p, &self.removed, &self.added)
    }
}

/// `(P ∖ removed) ∪ added`, matching removed rules by id.
pub fn apply(p: &Program, removed: &[Rule], added: &[Rule]) -> Program {
    let gone: BTreeSet<RuleId> = removed.iter().map(Rule::id).collect();
    let kept = Program::with_ids(p.rules().iter().filter(|r| !gone.contains(&r.id())).cloned().collect())
        .expect("subset of a valid program");
    kept.extend(added.iter().cloned()).expect("added rules were checked during instrumentation")
}

/// Reads the correction off a selector subset: removable rules whose
/// selector is absent are removed, addable rules whose selector is absent
/// are added.
pub fn extract_correction(l: &BTreeSet<Atom>, witness: &Interpretation, ip: &InstrumentedProgram) -> Correction {
    let mut removed = Vec::new();
    let mut added = Vec::new();
    for s in ip.selectors.atoms() {
        if l.contains(s) {
            continue;
        }
        let origin = &ip.provenance[s];
        match origin.polarity {
            Polarity::Removal => removed.push(origin.rule.clone()),
            Polarity::Addition => added.push(origin.rule.clone()),
        }
    }
    Correction { removed, added, witness: witness.restrict(|a| !ip.is_selector(a)) }
}

/// As [`extract_correction`], but first confirms by exhaustive search that
/// `l` is consistent and that no strict superset within the selectors is.
pub fn extract_correction_checked(
    l: &BTreeSet<Atom>,
    ip: &InstrumentedProgram,
    cfg: &SolverConfig,
) -> Result<Correction, CorrectionError> {
    let mut oracle = Oracle::new(&ip.program, cfg);
    let facts = |set: &BTreeSet<Atom>| set.iter().cloned().map(Rule::fact).collect::<Vec<_>>();
    let witness = oracle.solve_with(&facts(l))?.ok_or(CorrectionError::Inconsistent)?;
    let rest: Vec<&Atom> = ip.selectors.atoms().iter().filter(|s| !l.contains(*s)).collect();
    assert!(rest.len() < 32, "exhaustive check over {} selectors", rest.len());
    for mask in 1u32..1 << rest.len() {
        let mut bigger = l.clone();
        bigger.extend((0..rest.len()).filter(|i| mask >> i & 1 == 1).map(|i| rest[i].clone()));
        if oracle.solve_with(&facts(&bigger))?.is_some() {
            let extra: Vec<String> = bigger.difference(l).map(Atom::to_string).collect();
            return Err(CorrectionError::NotMaximal(extra.join(", ")));
        }
    }
    Ok(extract_correction(l, &witness, ip))
}

/// Atoms that can be derived when negation is ignored and every choice
/// atom is assumed true.
fn derivable_atoms(p: &Program) -> BTreeSet<Atom> {
    let mut known: BTreeSet<Atom> = BTreeSet::new();
    for r in p.rules() {
        if let Head::Choice { atoms, .. } = r.head() {
            known.extend(atoms.iter().cloned());
        }
    }
    loop {
        let mut changed = false;
        for r in p.rules() {
            if let Head::Atom(h) = r.head() {
                if !known.contains(h) && r.pos().all(|b| known.contains(b)) {
                    known.insert(h.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            return known;
        }
    }
}

/// Turns addition expressions into concrete facts with one solver call:
/// the removable rules are gated, the candidate facts are offered through
/// one at-least-one rule together with the removal selectors, and the
/// candidates in the answer set become the addable facts.
pub fn instantiate_additions(
    p: &Program,
    r: &BTreeSet<RuleId>,
    exprs: &[AdditionExpr],
    cfg: &SolverConfig,
) -> Result<Vec<Rule>, CorrectionError> {
    let ip = instrument(p, r, &[])?;
    let derivable = derivable_atoms(p);
    let present: BTreeSet<&Atom> = p.rules().iter().filter(|r| r.is_fact()).filter_map(Rule::head_atom).collect();
    let mut candidates: Vec<Atom> = Vec::new();
    for e in exprs {
        for c in e.instances(&derivable) {
            if !present.contains(&c) && !candidates.contains(&c) {
                candidates.push(c);
            }
        }
    }
    let offered: Vec<&Atom> = ip.selectors.atoms().iter().chain(&candidates).collect();
    let rule = atleast_of(offered.iter().copied()).map_err(|_| CorrectionError::NoAdditionCandidates)?;
    let model = Oracle::new(&ip.program, cfg).solve_with(&[rule])?.ok_or(CorrectionError::NoAdditionCandidates)?;
    Ok(candidates.into_iter().filter(|c| model.contains(c)).map(Rule::fact).collect())
}

#[derive(Clone, Debug)]
pub struct CorrectionReport {
    pub correction: Correction,
    /// The addable rules used, explicit ones first.
    pub materialized_a: Vec<Rule>,
    pub oracle_calls: usize,
    /// The maximal selector subset the correction was read from.
    pub selectors_kept: BTreeSet<Atom>,
}

/// Computes a minimal correction of the ground program `p`.
///
/// Addition expressions are first turned into facts with one extra solver
/// call. If that call finds no candidates, only the explicit addable rules
/// are used. The solver budget covers the whole computation.
pub fn min_correct(
    p: &Program,
    spec: &CorrectionSpec,
    algo: Algorithm,
    cfg: &SolverConfig,
) -> Result<CorrectionReport, CorrectionError> {
    min_correct_with_order(p, spec, algo, cfg, None)
}

/// As [`min_correct`], optionally shuffling the selector order with the
/// given seed before the maximal subset is computed.
pub fn min_correct_with_order(
    p: &Program,
    spec: &CorrectionSpec,
    algo: Algorithm,
    cfg: &SolverConfig,
    shuffle: Option<u64>,
) -> Result<CorrectionReport, CorrectionError> {
    let started = Instant::now();
    let mut materialized_a = spec.addable_rules.clone();
    let mut oracle_calls = 0;
    if !spec.addition_exprs.is_empty() {
        oracle_calls += 1;
        match instantiate_additions(p, &spec.removable, &spec.addition_exprs, cfg) {
            Ok(facts) => {
                for f in facts {
                    if !materialized_a.iter().any(|x| x.structurally_eq(&f)) {
                        materialized_a.push(f);
                    }
                }
            }
            Err(CorrectionError::NoAdditionCandidates) => {}
            Err(e) => return Err(e),
        }
    }
    let mut cfg = cfg.clone();
    if let Some(budget) = cfg.budget {
        cfg.budget = Some(budget.checked_sub(started.elapsed()).ok_or(SolveError::BudgetExceeded)?);
    }
    let ip = instrument(p, &spec.removable, &materialized_a)?;
    let selectors = match shuffle {
        Some(seed) => ip.selectors.shuffled(seed),
        None => ip.selectors.clone(),
    };
    let result = maxcon(&ip.program, &selectors, algo, &cfg)?;
    oracle_calls += result.oracle_calls;
    Ok(CorrectionReport {
        correction: extract_correction(&result.subset, &result.witness, &ip),
        materialized_a,
        oracle_calls,
        selectors_kept: result.subset,
    })
}
