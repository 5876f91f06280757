//! Reduct, least model and the answer-set test, written directly over
//! [`Atom`] sets. Neither backend uses this code, so it can act as an
//! independent checker for both.

use std::collections::{HashMap, HashSet};

use crate::program::{Atom, Head, Interpretation, Literal, Program, Rule};

/// The reduct `P^I`: rules blocked by `I` disappear, default negation is
/// dropped from the rest, and each choice rule turns into facts for its
/// atoms that are in `I`. Choice bounds are not part of the reduct.
pub fn reduct(p: &Program, i: &Interpretation) -> Program {
    let mut rules = Vec::new();
    for r in p.rules() {
        match r.head() {
            Head::Choice { atoms, .. } => {
                rules.extend(atoms.iter().filter(|a| i.contains(a)).cloned().map(Rule::fact));
            }
            head => {
                if r.neg().any(|a| i.contains(a)) {
                    continue;
                }
                let body: Vec<Literal> = r.pos().cloned().map(Literal::pos).collect();
                rules.push(match head {
                    Head::Atom(h) => Rule::normal(h.clone(), body),
                    _ => Rule::constraint(body),
                });
            }
        }
    }
    Program::new(rules).expect("reduct keeps the signature")
}

/// Least model of a positive program. Constraints are ignored.
///
/// Panics if `p` contains default negation or choice rules.
pub fn least_model(p: &Program) -> Interpretation {
    let rules: Vec<(&Atom, Vec<&Atom>)> = p
        .rules()
        .iter()
        .filter_map(|r| {
            assert!(r.neg().next().is_none(), "least_model needs a positive program: {r}");
            match r.head() {
                Head::Atom(h) => Some((h, r.pos().collect())),
                Head::Falsum => None,
                Head::Choice { .. } => panic!("least_model needs a program without choice rules: {r}"),
            }
        })
        .collect();
    fixpoint(&rules, std::iter::empty()).into_iter().cloned().collect()
}

/// `true` iff `i` satisfies every constraint and choice bound of `p` and is
/// the least model of `reduct(p, i)`.
pub fn is_answer_set(p: &Program, i: &Interpretation) -> bool {
    let mut rules: Vec<(&Atom, Vec<&Atom>)> = Vec::new();
    let mut seeds: Vec<&Atom> = Vec::new();
    for r in p.rules() {
        match r.head() {
            Head::Falsum => {
                if r.pos().all(|a| i.contains(a)) && r.neg().all(|a| !i.contains(a)) {
                    return false;
                }
            }
            Head::Choice { bound, atoms } => {
                let chosen: Vec<&Atom> = atoms.iter().filter(|a| i.contains(a)).collect();
                if chosen.len() < *bound {
                    return false;
                }
                seeds.extend(chosen);
            }
            Head::Atom(h) => {
                if r.neg().all(|a| !i.contains(a)) {
                    rules.push((h, r.pos().collect()));
                }
            }
        }
    }
    let model = fixpoint(&rules, seeds.into_iter());
    model.len() == i.len() && model.iter().all(|a| i.contains(a))
}

/// Forward chaining with per-rule counters of still-missing body atoms.
fn fixpoint<'a>(rules: &[(&'a Atom, Vec<&'a Atom>)], seeds: impl Iterator<Item = &'a Atom>) -> HashSet<&'a Atom> {
    let mut watchers: HashMap<&Atom, Vec<usize>> = HashMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    let mut model: HashSet<&Atom> = HashSet::new();
    let mut queue: Vec<&Atom> = Vec::new();

    for (idx, (head, pos)) in rules.iter().enumerate() {
        let distinct: HashSet<&Atom> = pos.iter().copied().collect();
        missing.push(distinct.len());
        for a in distinct {
            watchers.entry(a).or_default().push(idx);
        }
        if pos.is_empty() && model.insert(*head) {
            queue.push(head);
        }
    }
    for a in seeds {
        if model.insert(a) {
            queue.push(a);
        }
    }
    while let Some(a) = queue.pop() {
        for &idx in watchers.get(a).map(Vec::as_slice).unwrap_or_default() {
            missing[idx] -= 1;
            if missing[idx] == 0 {
                let head = rules[idx].0;
                if model.insert(head) {
                    queue.push(head);
                }
            }
        }
    }
    model
}
