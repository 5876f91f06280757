//! Safety checking and naive grounding over the Herbrand universe.
//!
//! Grounding is purely syntactic: every rule is instantiated with every
//! combination of constants for its variables, and nothing is simplified
//! away. Desk-scale programs stay small enough for that.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::program::{Atom, Constant, Head, Literal, Program, Rule, RuleId, Symbol, Term};

/// Upper limit on generated ground rules.
pub const DEFAULT_INSTANCE_LIMIT: usize = 5_000_000;

pub fn herbrand_universe(p: &Program) -> BTreeSet<Constant> {
    p.rules()
        .iter()
        .flat_map(Rule::atoms)
        .flat_map(|a| a.args.iter())
        .filter_map(|t| match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(_) => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Variables that do not occur in the positive body.
    UnsafeVariables(Vec<Symbol>),
    NonGroundChoice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyViolation {
    pub rule: RuleId,
    pub violation: Violation,
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            Violation::UnsafeVariables(vars) => {
                let names: Vec<&str> = vars.iter().map(|v| &**v).collect();
                write!(f, "rule {}: unsafe variable(s) {}", self.rule, names.join(", "))
            }
            Violation::NonGroundChoice => write!(f, "rule {}: choice rules must be ground", self.rule),
        }
    }
}

/// Every rule whose variables are not all bound by its positive body, plus
/// every non-ground choice rule.
pub fn check_safety(p: &Program) -> Vec<SafetyViolation> {
    let mut out = Vec::new();
    for rule in p.rules() {
        if matches!(rule.head(), Head::Choice { .. }) {
            if !rule.is_ground() {
                out.push(SafetyViolation { rule: rule.id(), violation: Violation::NonGroundChoice });
            }
            continue;
        }
        let bound: BTreeSet<&Symbol> = rule.pos().flat_map(Atom::variables).collect();
        let unsafe_vars: Vec<Symbol> = rule.variables().into_iter().filter(|v| !bound.contains(v)).collect();
        if !unsafe_vars.is_empty() {
            out.push(SafetyViolation { rule: rule.id(), violation: Violation::UnsafeVariables(unsafe_vars) });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("program is unsafe: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Unsafe(Vec<SafetyViolation>),
    #[error("grounding would produce more than {limit} rules")]
    TooLarge { limit: usize },
}

/// A ground program plus, for every ground rule, the source rule it was
/// instantiated from.
#[derive(Clone, Debug)]
pub struct Grounding {
    pub program: Program,
    origin: BTreeMap<RuleId, RuleId>,
}

impl Grounding {
    pub fn source_of(&self, ground: RuleId) -> Option<RuleId> {
        self.origin.get(&ground).copied()
    }

    /// Ground rules instantiated from `source`, in order.
    pub fn instances_of(&self, source: RuleId) -> impl Iterator<Item = RuleId> + '_ {
        self.origin.iter().filter(move |(_, s)| **s == source).map(|(g, _)| *g)
    }
}

pub fn ground(p: &Program) -> Result<Grounding, GroundError> {
    ground_with_limit(p, DEFAULT_INSTANCE_LIMIT)
}

pub fn ground_with_limit(p: &Program, limit: usize) -> Result<Grounding, GroundError> {
    let violations = check_safety(p);
    if !violations.is_empty() {
        return Err(GroundError::Unsafe(violations));
    }
    let universe: Vec<Constant> = herbrand_universe(p).into_iter().collect();

    let mut total = 0usize;
    for rule in p.rules() {
        let count = u32::try_from(rule.variables().len())
            .ok()
            .and_then(|k| universe.len().checked_pow(k))
            .ok_or(GroundError::TooLarge { limit })?;
        total = total.saturating_add(count);
        if total > limit {
            return Err(GroundError::TooLarge { limit });
        }
    }

    let mut rules = Vec::with_capacity(total);
    let mut origin = BTreeMap::new();
    for rule in p.rules() {
        let vars = rule.variables();
        if vars.is_empty() {
            origin.insert(RuleId(rules.len() as u32 + 1), rule.id());
            rules.push(rule.clone());
            continue;
        }
        if universe.is_empty() {
            continue;
        }
        // Odometer over universe^|vars|, last variable fastest.
        let mut digits = vec![0usize; vars.len()];
        loop {
            let subst: BTreeMap<&Symbol, &Constant> =
                vars.iter().zip(&digits).map(|(v, &d)| (v, &universe[d])).collect();
            origin.insert(RuleId(rules.len() as u32 + 1), rule.id());
            rules.push(substitute(rule, &subst));

            let mut k = digits.len();
            let wrapped = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < universe.len() {
                    break false;
                }
                digits[k] = 0;
            };
            if wrapped {
                break;
            }
        }
    }
    let program = Program::new(rules).expect("grounding preserves arities");
    Ok(Grounding { program, origin })
}

fn substitute_atom(atom: &Atom, subst: &BTreeMap<&Symbol, &Constant>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Const(subst[v].clone()),
                c => c.clone(),
            })
            .collect(),
    }
}

fn substitute(rule: &Rule, subst: &BTreeMap<&Symbol, &Constant>) -> Rule {
    let body: Vec<Literal> = rule
        .body()
        .iter()
        .map(|l| Literal { atom: substitute_atom(&l.atom, subst), negated: l.negated })
        .collect();
    match rule.head() {
        Head::Atom(h) => Rule::normal(substitute_atom(h, subst), body),
        Head::Falsum => Rule::constraint(body),
        // Choice rules are ground by the safety check.
        Head::Choice { .. } => rule.clone(),
    }
}
