//! Maximal consistent subsets of a target atom set.
//!
//! Given a program `P` and target atoms `S`, a subset `L ⊆ S` is consistent
//! when `P` plus the facts `L` has an answer set, and maximal when no strict
//! superset within `S` is consistent. All four algorithms here use the
//! solver as a black-box oracle and differ only in how they grow `L`.
//!
//! ```
//! use aspcorrect::maxcon::{maxcon, Algorithm, TargetSet};
//! use aspcorrect::parse::{parse_atom, parse_program};
//! use aspcorrect::solver::SolverConfig;
//!
//! let p = parse_program(":- not move(a).\nmove(a) :- stone(b), not stone(c).").unwrap();
//! let s = TargetSet::new(vec![parse_atom("stone(b)").unwrap(), parse_atom("stone(c)").unwrap()]).unwrap();
//! let r = maxcon(&p, &s, Algorithm::Unit, &SolverConfig::default()).unwrap();
//! assert_eq!(r.subset.iter().map(|a| a.to_string()).collect::<Vec<_>>(), ["stone(b)"]);
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::program::{Atom, Interpretation, Program, Rule};
use crate::solver::{solve_parts, SolveError, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// `a`: repeatedly ask for at least one more target atom.
    Atleast,
    /// `u`: try the target atoms one at a time.
    Unit,
    /// `p`: try chunks of doubling size, falling back to single atoms.
    Progression,
    /// `x`: raise a cardinality bound until it fails; maximum cardinality.
    MaxCard,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Atleast, Algorithm::Unit, Algorithm::Progression, Algorithm::MaxCard];

    pub fn letter(self) -> char {
        match self {
            Algorithm::Atleast => 'a',
            Algorithm::Unit => 'u',
            Algorithm::Progression => 'p',
            Algorithm::MaxCard => 'x',
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(Algorithm::Atleast),
            "u" => Ok(Algorithm::Unit),
            "p" => Ok(Algorithm::Progression),
            "x" => Ok(Algorithm::MaxCard),
            other => Err(format!("unknown algorithm `{other}` (expected one of a, u, p, x)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaxConError {
    #[error("no subset of the target atoms is consistent with the program")]
    NoConsistentSubset,
    #[error("invalid target set: {0}")]
    InvalidTarget(String),
    #[error("at-least-one over an empty set of atoms")]
    EmptyAtleast,
    #[error(transparent)]
    Solver(#[from] SolveError),
}

/// An ordered set of distinct ground atoms. The order decides which atom
/// is tried first whenever an algorithm picks an arbitrary element.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TargetSet {
    atoms: Vec<Atom>,
    members: HashSet<Atom>,
}

impl TargetSet {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, MaxConError> {
        let mut members = HashSet::with_capacity(atoms.len());
        for a in &atoms {
            if !a.is_ground() {
                return Err(MaxConError::InvalidTarget(format!("{a} is not ground")));
            }
            if !members.insert(a.clone()) {
                return Err(MaxConError::InvalidTarget(format!("{a} occurs twice")));
            }
        }
        Ok(TargetSet { atoms, members })
    }

    pub fn empty() -> Self {
        TargetSet::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.members.contains(a)
    }

    /// The same atoms in a seeded random order.
    pub fn shuffled(&self, seed: u64) -> TargetSet {
        let mut atoms = self.atoms.clone();
        atoms.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        TargetSet { atoms, members: self.members.clone() }
    }

    fn meet(&self, model: &Interpretation) -> BTreeSet<Atom> {
        self.atoms.iter().filter(|a| model.contains(a)).cloned().collect()
    }

    fn minus<'a>(&'a self, l: &'a BTreeSet<Atom>) -> impl Iterator<Item = &'a Atom> + 'a {
        self.atoms.iter().filter(move |a| !l.contains(*a))
    }
}

#[derive(Clone, Debug)]
pub struct MaxConResult {
    /// The maximal consistent subset `L`.
    pub subset: BTreeSet<Atom>,
    pub oracle_calls: usize,
    /// An answer set of `P` plus the facts `L`.
    pub witness: Interpretation,
    /// The lower bound after each oracle call, starting with the
    /// feasibility check.
    pub trace: Vec<BTreeSet<Atom>>,
}

/// `0 { s1; ...; sk }.`
pub fn choice_of<'a>(s: impl IntoIterator<Item = &'a Atom>) -> Rule {
    Rule::choice(0, s.into_iter().cloned().collect()).expect("bound 0 always fits")
}

/// `1 { s1; ...; sk }.`; fails on an empty set, which would be unsatisfiable.
pub fn atleast_of<'a>(s: impl IntoIterator<Item = &'a Atom>) -> Result<Rule, MaxConError> {
    let atoms: Vec<Atom> = s.into_iter().cloned().collect();
    if atoms.is_empty() {
        return Err(MaxConError::EmptyAtleast);
    }
    Ok(Rule::choice(1, atoms).expect("non-empty"))
}

fn facts<'a>(l: impl IntoIterator<Item = &'a Atom>) -> Vec<Rule> {
    l.into_iter().cloned().map(Rule::fact).collect()
}

/// Counts solver calls against one program and shares one deadline among
/// them.
pub struct Oracle<'a> {
    program: &'a Program,
    cfg: SolverConfig,
    deadline: Option<Instant>,
    calls: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(program: &'a Program, cfg: &SolverConfig) -> Self {
        Oracle { program, cfg: cfg.clone(), deadline: cfg.deadline(), calls: 0 }
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Solves the program extended with `extra`.
    pub fn solve_with(&mut self, extra: &[Rule]) -> Result<Option<Interpretation>, SolveError> {
        self.calls += 1;
        let cfg = SolverConfig { seed: self.cfg.seed.wrapping_add(self.calls as u64), ..self.cfg.clone() };
        Ok(solve_parts(&[self.program.rules(), extra], &cfg, self.deadline)?.model)
    }
}

fn check_subset(s: &TargetSet, l: &BTreeSet<Atom>) -> Result<(), MaxConError> {
    match l.iter().find(|a| !s.contains(a)) {
        Some(a) => Err(MaxConError::InvalidTarget(format!("{a} is not a target atom"))),
        None => Ok(()),
    }
}

/// Looks for a consistent superset of `l` within `s`. Returns `μ ∩ S` for
/// an answer set `μ` of `P`, the facts `l` and a free choice over `S ∖ l`.
pub fn can_extend(
    p: &Program,
    s: &TargetSet,
    l: &BTreeSet<Atom>,
    cfg: &SolverConfig,
) -> Result<Option<BTreeSet<Atom>>, MaxConError> {
    check_subset(s, l)?;
    let mut extra = facts(l);
    extra.push(choice_of(s.minus(l)));
    Ok(Oracle::new(p, cfg).solve_with(&extra)?.map(|m| s.meet(&m)))
}

/// Whether the consistent set `l` has no consistent strict superset
/// within `s`: `P`, the facts `l` and at least one atom of `S ∖ l` must be
/// inconsistent.
pub fn is_maximal(p: &Program, s: &TargetSet, l: &BTreeSet<Atom>, cfg: &SolverConfig) -> Result<bool, MaxConError> {
    check_subset(s, l)?;
    if s.minus(l).next().is_none() {
        return Ok(true);
    }
    let mut extra = facts(l);
    extra.push(atleast_of(s.minus(l))?);
    Ok(Oracle::new(p, cfg).solve_with(&extra)?.is_none())
}

pub fn maxcon(p: &Program, s: &TargetSet, algo: Algorithm, cfg: &SolverConfig) -> Result<MaxConResult, MaxConError> {
    match algo {
        Algorithm::Atleast => algo_atleast(p, s, cfg),
        Algorithm::Unit => algo_unit(p, s, cfg),
        Algorithm::Progression => algo_progression(p, s, cfg),
        Algorithm::MaxCard => algo_maxcard(p, s, cfg),
    }
}

struct Run<'a> {
    oracle: Oracle<'a>,
    s: &'a TargetSet,
    l: BTreeSet<Atom>,
    witness: Interpretation,
    trace: Vec<BTreeSet<Atom>>,
}

impl<'a> Run<'a> {
    /// Solves `P` with a free choice over `S`; the answer seeds `L`.
    fn start(p: &'a Program, s: &'a TargetSet, cfg: &SolverConfig) -> Result<Run<'a>, MaxConError> {
        let mut oracle = Oracle::new(p, cfg);
        let witness = oracle.solve_with(&[choice_of(s.atoms())])?.ok_or(MaxConError::NoConsistentSubset)?;
        let l = s.meet(&witness);
        Ok(Run { oracle, s, trace: vec![l.clone()], l, witness })
    }

    /// One oracle call on `P ∪ extra`; on success `L` becomes `μ ∩ S`.
    fn step(&mut self, extra: &[Rule]) -> Result<bool, MaxConError> {
        let model = self.oracle.solve_with(extra)?;
        let found = model.is_some();
        if let Some(m) = model {
            self.l = self.s.meet(&m);
            self.witness = m;
        }
        self.trace.push(self.l.clone());
        Ok(found)
    }

    fn finish(self) -> MaxConResult {
        MaxConResult { subset: self.l, oracle_calls: self.oracle.calls(), witness: self.witness, trace: self.trace }
    }
}

pub fn algo_atleast(p: &Program, s: &TargetSet, cfg: &SolverConfig) -> Result<MaxConResult, MaxConError> {
    let mut run = Run::start(p, s, cfg)?;
    loop {
        if s.minus(&run.l).next().is_none() {
            return Ok(run.finish());
        }
        let mut extra = facts(&run.l);
        extra.push(atleast_of(s.minus(&run.l))?);
        if !run.step(&extra)? {
            return Ok(run.finish());
        }
    }
}

pub fn algo_unit(p: &Program, s: &TargetSet, cfg: &SolverConfig) -> Result<MaxConResult, MaxConError> {
    let mut run = Run::start(p, s, cfg)?;
    for (i, sf) in s.atoms().iter().enumerate() {
        if run.l.contains(sf) {
            continue;
        }
        let mut extra = facts(run.l.iter().chain([sf]));
        extra.push(choice_of(s.atoms()[i + 1..].iter().filter(|a| !run.l.contains(*a))));
        run.step(&extra)?;
    }
    Ok(run.finish())
}

pub fn algo_progression(p: &Program, s: &TargetSet, cfg: &SolverConfig) -> Result<MaxConResult, MaxConError> {
    let mut run = Run::start(p, s, cfg)?;
    let mut rem: Vec<Atom> = s.minus(&run.l).cloned().collect();
    let mut k = 1usize;
    while !rem.is_empty() {
        let take = k.min(rem.len());
        let chunk: Vec<Atom> = rem.drain(..take).collect();
        let mut extra = facts(run.l.iter().chain(&chunk));
        extra.push(choice_of(&rem));
        if run.step(&extra)? {
            k *= 2;
            rem.retain(|a| !run.l.contains(a));
        } else {
            if chunk.len() > 1 {
                rem.splice(0..0, chunk);
            }
            k = 1;
        }
    }
    Ok(run.finish())
}

pub fn algo_maxcard(p: &Program, s: &TargetSet, cfg: &SolverConfig) -> Result<MaxConResult, MaxConError> {
    let mut run = Run::start(p, s, cfg)?;
    while run.l.len() < s.len() {
        let bound = run.l.len() + 1;
        let rule = Rule::choice(bound, s.atoms().to_vec()).expect("bound at most |S|");
        if !run.step(&[rule])? {
            break;
        }
    }
    Ok(run.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_atom, parse_program};
    use crate::solver::{is_answer_set, solve};

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    fn target(atoms: &[&str]) -> TargetSet {
        TargetSet::new(atoms.iter().map(|a| parse_atom(a).unwrap()).collect()).unwrap()
    }

    fn set(atoms: &[&str]) -> BTreeSet<Atom> {
        atoms.iter().map(|a| parse_atom(a).unwrap()).collect()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    const STONES: &str = ":- not move(a).\nmove(a) :- stone(b), not stone(c).";
    const COUPLED: &str = ":- a, not b.\n:- b, not a.";

    /// Consistency of `P ∪ facts(L)` by exhaustive enumeration.
    fn consistent(p: &Program, l: &BTreeSet<Atom>) -> bool {
        let extended = p.extend(l.iter().cloned().map(Rule::fact)).unwrap();
        solve(&extended, &SolverConfig::brute_force()).unwrap().consistent()
    }

    fn brute_maximal(p: &Program, s: &TargetSet, l: &BTreeSet<Atom>) -> bool {
        let n = s.len();
        consistent(p, l)
            && (0u32..1 << n).all(|mask| {
                let cand: BTreeSet<Atom> =
                    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| s.atoms()[i].clone()).collect();
                !(cand.is_superset(l) && cand.len() > l.len()) || !consistent(p, &cand)
            })
    }

    #[test]
    fn choice_and_atleast_rules() {
        assert_eq!(choice_of(&set(&["a", "b"])).to_string(), "0 { a; b }.");
        assert_eq!(choice_of(&set(&["stone(b)"])).to_string(), "0 { stone(b) }.");
        assert_eq!(choice_of(&BTreeSet::new()).to_string(), "0 { }.");
        assert_eq!(atleast_of(&set(&["a", "b"])).unwrap().to_string(), "1 { a; b }.");
        assert_eq!(atleast_of(&set(&["x"])).unwrap().to_string(), "1 { x }.");
        assert_eq!(atleast_of(&BTreeSet::new()).unwrap_err(), MaxConError::EmptyAtleast);
    }

    #[test]
    fn target_set_rejects_duplicates_and_variables() {
        let a = parse_atom("a").unwrap();
        assert!(TargetSet::new(vec![a.clone(), a]).is_err());
        assert!(TargetSet::new(vec![parse_atom("p(X)").unwrap()]).is_err());
        let s = target(&["a", "b", "c", "d", "e"]);
        let t = s.shuffled(3);
        assert_eq!(t, s.shuffled(3));
        let mut sorted = t.atoms().to_vec();
        sorted.sort();
        assert_eq!(sorted, s.atoms());
    }

    #[test]
    fn can_extend_examples() {
        let p = prog(STONES);
        let s = target(&["stone(b)", "stone(c)"]);
        assert_eq!(can_extend(&p, &s, &BTreeSet::new(), &cfg()).unwrap(), Some(set(&["stone(b)"])));
        assert_eq!(can_extend(&p, &s, &set(&["stone(c)"]), &cfg()).unwrap(), None);
        assert!(!consistent(&p, &set(&["stone(c)"])));
        assert!(!consistent(&p, &set(&["stone(b)", "stone(c)"])));
        assert_eq!(can_extend(&prog("a."), &TargetSet::empty(), &BTreeSet::new(), &cfg()).unwrap(), Some(BTreeSet::new()));
        assert!(can_extend(&p, &s, &set(&["zzz"]), &cfg()).is_err());
    }

    #[test]
    fn is_maximal_examples() {
        let p = prog(COUPLED);
        let s = target(&["a", "b"]);
        assert!(!is_maximal(&p, &s, &BTreeSet::new(), &cfg()).unwrap());
        assert!(!consistent(&p, &set(&["a"])) && !consistent(&p, &set(&["b"])));
        assert!(consistent(&p, &set(&["a", "b"])));
        assert!(is_maximal(&p, &s, &set(&["a", "b"]), &cfg()).unwrap());

        let p = prog(STONES);
        let s = target(&["stone(b)", "stone(c)"]);
        assert!(is_maximal(&p, &s, &set(&["stone(b)"]), &cfg()).unwrap());
        assert!(brute_maximal(&p, &s, &set(&["stone(b)"])));
    }

    #[test]
    fn every_algorithm_on_the_stones() {
        let p = prog(STONES);
        for s in [target(&["stone(b)", "stone(c)"]), target(&["stone(c)", "stone(b)"])] {
            for algo in Algorithm::ALL {
                let r = maxcon(&p, &s, algo, &cfg()).unwrap();
                assert_eq!(r.subset, set(&["stone(b)"]), "{algo}");
                let extended = p.extend(r.subset.iter().cloned().map(Rule::fact)).unwrap();
                assert!(is_answer_set(&extended, &r.witness));
            }
        }
    }

    #[test]
    fn unit_rejects_stone_c_first() {
        // Feasibility yields {stone(b)}; stone(c) is then tried and refused.
        let r = algo_unit(&prog(STONES), &target(&["stone(c)", "stone(b)"]), &cfg()).unwrap();
        assert_eq!(r.oracle_calls, 2);
        assert_eq!(r.trace, vec![set(&["stone(b)"]), set(&["stone(b)"])]);
    }

    #[test]
    fn coupled_atoms_are_found_together() {
        let p = prog(COUPLED);
        for algo in Algorithm::ALL {
            let r = maxcon(&p, &target(&["a", "b"]), algo, &cfg()).unwrap();
            assert_eq!(r.subset, set(&["a", "b"]), "{algo}");
        }
    }

    #[test]
    fn empty_target() {
        for algo in Algorithm::ALL {
            let r = maxcon(&prog("a :- not b."), &TargetSet::empty(), algo, &cfg()).unwrap();
            assert!(r.subset.is_empty());
            assert_eq!(r.oracle_calls, 1);
        }
    }

    #[test]
    fn unconstrained_target_is_taken_whole() {
        let s = target(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        let p = prog("z :- not y.");
        for algo in Algorithm::ALL {
            let r = maxcon(&p, &s, algo, &cfg()).unwrap();
            assert_eq!(r.subset.len(), 8, "{algo}");
        }
        // Forcing the feasibility answer to the empty set leaves the chunks
        // to do the work: 1, 2, 4, then the last 1.
        let p = prog("z :- not y.\n:- a, not q.\n{ q }.");
        let r = algo_progression(&p, &s, &SolverConfig::brute_force()).unwrap();
        assert_eq!(r.subset.len(), 8);
        assert!(r.oracle_calls <= 1 + 4);
    }

    #[test]
    fn maxcard_examples() {
        let r = algo_maxcard(&prog(":- a, not b."), &target(&["a", "b"]), &cfg()).unwrap();
        assert_eq!(r.subset, set(&["a", "b"]));
        let r = algo_maxcard(&prog(":- a, b.\n:- a, c.\n:- b, c."), &target(&["a", "b", "c"]), &cfg()).unwrap();
        assert_eq!(r.subset.len(), 1);
    }

    #[test]
    fn infeasible_target_is_reported() {
        for algo in Algorithm::ALL {
            let err = maxcon(&prog(":- not a."), &target(&["b"]), algo, &cfg()).unwrap_err();
            assert_eq!(err, MaxConError::NoConsistentSubset);
        }
    }

    #[test]
    fn lower_bounds_only_grow() {
        let p = prog(":- a, b.\n:- c, d.\n:- e, not f.\n{ g }.\n:- g, h.");
        let s = target(&["a", "b", "c", "d", "e", "f", "g", "h"]);
        for algo in [Algorithm::Atleast, Algorithm::Unit, Algorithm::Progression] {
            let r = maxcon(&p, &s, algo, &cfg()).unwrap();
            assert!(r.trace.windows(2).all(|w| w[0].is_subset(&w[1])), "{algo}");
            assert!(brute_maximal(&p, &s, &r.subset), "{algo}");
        }
    }
}
