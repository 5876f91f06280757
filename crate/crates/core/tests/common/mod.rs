//! Seeded random ground programs and brute-force reference checks shared
//! by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use aspcorrect::program::{Atom, Interpretation, Literal, Program, Rule, Term};
use aspcorrect::solver::{solve, SolverConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct ground atoms, a mix of propositional and unary ones.
pub fn atom_pool(n: usize) -> Vec<Atom> {
    (0..n)
        .map(|i| if i % 3 == 2 { Atom::new("p", vec![Term::from(i as i64)]) } else { Atom::prop(&format!("a{i}")) })
        .collect()
}

fn literal(rng: &mut ChaCha8Rng, atoms: &[Atom], neg_ratio: f64) -> Literal {
    let a = atoms.choose(rng).unwrap().clone();
    if rng.gen_bool(neg_ratio) {
        Literal::neg(a)
    } else {
        Literal::pos(a)
    }
}

fn body(rng: &mut ChaCha8Rng, atoms: &[Atom], max: usize) -> Vec<Literal> {
    let len = rng.gen_range(0..=max);
    (0..len).map(|_| literal(rng, atoms, 0.4)).collect()
}

/// A random rule over `atoms`: mostly normal rules, some constraints and a
/// few choice rules.
pub fn random_rule(rng: &mut ChaCha8Rng, atoms: &[Atom], choices: bool) -> Rule {
    let roll = rng.gen_range(0..100);
    if choices && roll < 12 {
        let k = rng.gen_range(1..=atoms.len().min(4));
        let picked: Vec<Atom> = atoms.choose_multiple(rng, k).cloned().collect();
        let bound = if rng.gen_bool(0.6) { 0 } else { rng.gen_range(0..=k) };
        Rule::choice(bound, picked).unwrap()
    } else if roll < 30 {
        let mut b = body(rng, atoms, 3);
        if b.is_empty() {
            b.push(literal(rng, atoms, 0.5));
        }
        Rule::constraint(b)
    } else {
        Rule::normal(atoms.choose(rng).unwrap().clone(), body(rng, atoms, 3))
    }
}

/// A ground program with at most `max_atoms` atoms and `max_rules` rules.
pub fn random_program(seed: u64, max_atoms: usize, max_rules: usize) -> Program {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=max_atoms);
    let atoms = atom_pool(n);
    let rules = rng.gen_range(1..=max_rules);
    Program::new((0..rules).map(|_| random_rule(&mut rng, &atoms, true)).collect()).unwrap()
}

/// Every subset of the program's atoms, as interpretations.
pub fn all_interpretations(p: &Program) -> Vec<Interpretation> {
    let atoms: Vec<Atom> = p.atoms().into_iter().collect();
    assert!(atoms.len() <= 16);
    (0u32..1 << atoms.len())
        .map(|m| (0..atoms.len()).filter(|i| m >> i & 1 == 1).map(|i| atoms[i].clone()).collect())
        .collect()
}

pub fn consistent(p: &Program) -> bool {
    solve(p, &SolverConfig::brute_force()).unwrap().consistent()
}

/// Consistency of `p` plus the facts `l`, by exhaustive enumeration.
pub fn consistent_with(p: &Program, l: &BTreeSet<Atom>) -> bool {
    consistent(&p.extend(l.iter().cloned().map(Rule::fact)).unwrap())
}

/// Whether `l` is consistent and no strict superset within `s` is, by
/// trying every subset of `s`.
pub fn exhaustively_maximal(p: &Program, s: &[Atom], l: &BTreeSet<Atom>) -> bool {
    if !consistent_with(p, l) {
        return false;
    }
    let rest: Vec<&Atom> = s.iter().filter(|a| !l.contains(*a)).collect();
    (1u32..1 << rest.len()).all(|m| {
        let mut bigger = l.clone();
        bigger.extend((0..rest.len()).filter(|i| m >> i & 1 == 1).map(|i| rest[i].clone()));
        !consistent_with(p, &bigger)
    })
}

/// Some subset of `s` is consistent with `p`.
pub fn any_consistent_subset(p: &Program, s: &[Atom]) -> bool {
    (0u32..1 << s.len()).any(|m| {
        let l: BTreeSet<Atom> = (0..s.len()).filter(|i| m >> i & 1 == 1).map(|i| s[i].clone()).collect();
        consistent_with(p, &l)
    })
}

/// A random target set of `1..=max` atoms of `p`, in random order.
pub fn random_target(seed: u64, p: &Program, max: usize) -> Vec<Atom> {
    let mut rng = rng(seed ^ 0x5eed);
    let mut atoms: Vec<Atom> = p.atoms().into_iter().collect();
    atoms.shuffle(&mut rng);
    let k = rng.gen_range(1..=atoms.len().min(max));
    atoms.truncate(k);
    atoms
}
