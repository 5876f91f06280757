//! Completion-based search with lazy loop handling.
//!
//! The ground program is translated to its Clark completion over atom and
//! body variables and handed to the CDCL engine. Every total model is then
//! checked for unfounded atoms; if some are found, their loop nogoods are
//! added and the search resumes. A model without unfounded atoms is an
//! answer set.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cdcl::{Cdcl, Lit};
use super::compile::{CHead, Compiled};
use super::Interrupted;

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct SearchStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub loop_nogoods: u64,
    pub candidates: u64,
}

pub(crate) struct SearchOutcome {
    /// Each answer set as sorted atom indices into the compiled program.
    pub models: Vec<Vec<u32>>,
    pub stats: SearchStats,
    pub dump: Option<String>,
}

struct Encoding {
    /// Variable of each atom; `None` when the atom can never be derived.
    atom_var: Vec<Option<u32>>,
    /// Body literal of each normal rule that survived simplification.
    rule_body: Vec<Option<Lit>>,
    /// Surviving normal rules by head atom.
    support: Vec<Vec<usize>>,
    /// Surviving normal rules by positive body atom.
    watchers: Vec<Vec<usize>>,
    in_choice: Vec<bool>,
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    truth: Lit,
}

impl Encoding {
    fn fresh(&mut self) -> Lit {
        let v = self.num_vars;
        self.num_vars += 1;
        Lit::new(v, true)
    }

    fn new(c: &Compiled) -> Encoding {
        let n = c.num_atoms();
        let mut in_choice = vec![false; n];
        for r in &c.rules {
            if let CHead::Choice { atoms, .. } = &r.head {
                for &a in atoms {
                    in_choice[a as usize] = true;
                }
            }
        }
        let possible = possibly_true(c, &in_choice);

        let mut enc = Encoding {
            atom_var: vec![None; n],
            rule_body: vec![None; c.rules.len()],
            support: vec![Vec::new(); n],
            watchers: vec![Vec::new(); n],
            in_choice,
            num_vars: 0,
            clauses: Vec::new(),
            truth: Lit::new(0, true),
        };
        enc.truth = enc.fresh();
        enc.clauses.push(vec![enc.truth]);
        for (a, &ok) in possible.iter().enumerate() {
            if ok {
                enc.atom_var[a] = Some(enc.fresh().var());
            }
        }

        let mut bodies: HashMap<Vec<Lit>, Lit> = HashMap::new();
        for (idx, r) in c.rules.iter().enumerate() {
            if let CHead::Choice { bound, atoms } = &r.head {
                let lits: Vec<Lit> = atoms.iter().map(|&a| enc.atom_lit(a).expect("choice atoms are possible")).collect();
                enc.at_least(&lits, *bound);
                continue;
            }
            if r.pos.iter().any(|&a| !possible[a as usize]) {
                continue;
            }
            let mut lits: Vec<Lit> = r.pos.iter().map(|&a| enc.atom_lit(a).expect("checked above")).collect();
            lits.extend(r.neg.iter().filter_map(|&a| enc.atom_lit(a).map(|l| !l)));
            lits.sort_unstable();
            let body = match lits.len() {
                0 => enc.truth,
                1 => lits[0],
                _ => match bodies.get(&lits) {
                    Some(&b) => b,
                    None => {
                        let b = enc.fresh();
                        let mut back = vec![b];
                        for &l in &lits {
                            enc.clauses.push(vec![!b, l]);
                            back.push(!l);
                        }
                        enc.clauses.push(back);
                        bodies.insert(lits, b);
                        b
                    }
                },
            };
            match r.head {
                CHead::Atom(h) => {
                    let head = enc.atom_lit(h).expect("head of a surviving rule is possible");
                    enc.clauses.push(vec![!body, head]);
                    enc.rule_body[idx] = Some(body);
                    enc.support[h as usize].push(idx);
                    let mut pos = r.pos.clone();
                    pos.dedup();
                    for a in pos {
                        enc.watchers[a as usize].push(idx);
                    }
                }
                CHead::Falsum => enc.clauses.push(vec![!body]),
                CHead::Choice { .. } => unreachable!(),
            }
        }

        for a in 0..n {
            let Some(lit) = enc.atom_lit(a as u32) else { continue };
            if enc.in_choice[a] {
                continue;
            }
            let mut clause = vec![!lit];
            clause.extend(enc.support[a].iter().map(|&r| enc.rule_body[r].expect("support rules survive")));
            enc.clauses.push(clause);
        }
        enc
    }

    fn atom_lit(&self, a: u32) -> Option<Lit> {
        self.atom_var[a as usize].map(|v| Lit::new(v, true))
    }

    fn at_least(&mut self, lits: &[Lit], k: usize) {
        match k {
            0 => {}
            _ if k > lits.len() => self.clauses.push(Vec::new()),
            1 => self.clauses.push(lits.to_vec()),
            _ => {
                let negated: Vec<Lit> = lits.iter().map(|&l| !l).collect();
                self.at_most(&negated, lits.len() - k);
            }
        }
    }

    /// Sequential-counter encoding of "at most `m` of `ys` are true".
    fn at_most(&mut self, ys: &[Lit], m: usize) {
        let n = ys.len();
        if m >= n {
            return;
        }
        if m == 0 {
            self.clauses.extend(ys.iter().map(|&y| vec![!y]));
            return;
        }
        // s[i][j]: at least j+1 of ys[0..=i] are true.
        let s: Vec<Vec<Lit>> = (0..n - 1).map(|_| (0..m).map(|_| self.fresh()).collect()).collect();
        self.clauses.push(vec![!ys[0], s[0][0]]);
        for &sj in &s[0][1..] {
            self.clauses.push(vec![!sj]);
        }
        for i in 1..n - 1 {
            self.clauses.push(vec![!ys[i], s[i][0]]);
            self.clauses.push(vec![!s[i - 1][0], s[i][0]]);
            for j in 1..m {
                self.clauses.push(vec![!ys[i], !s[i - 1][j - 1], s[i][j]]);
                self.clauses.push(vec![!s[i - 1][j], s[i][j]]);
            }
            self.clauses.push(vec![!ys[i], !s[i - 1][m - 1]]);
        }
        self.clauses.push(vec![!ys[n - 1], !s[n - 2][m - 1]]);
    }

    /// True atoms of `model` that the reduct cannot derive.
    fn unfounded(&self, c: &Compiled, model: &[bool]) -> Vec<u32> {
        let n = model.len();
        let mut derived = vec![false; n];
        let mut missing: Vec<usize> = vec![usize::MAX; c.rules.len()];
        let mut queue: Vec<u32> = Vec::new();
        for a in 0..n {
            if model[a] && self.in_choice[a] {
                derived[a] = true;
                queue.push(a as u32);
            }
        }
        for (idx, r) in c.rules.iter().enumerate() {
            if self.rule_body[idx].is_none() || r.neg.iter().any(|&a| model[a as usize]) {
                continue;
            }
            missing[idx] = r.pos.len();
            if r.pos.is_empty() {
                if let CHead::Atom(h) = r.head {
                    if !derived[h as usize] {
                        derived[h as usize] = true;
                        queue.push(h);
                    }
                }
            }
        }
        while let Some(a) = queue.pop() {
            for &idx in &self.watchers[a as usize] {
                if missing[idx] == usize::MAX {
                    continue;
                }
                missing[idx] -= 1;
                if missing[idx] == 0 {
                    if let CHead::Atom(h) = c.rules[idx].head {
                        if !derived[h as usize] {
                            derived[h as usize] = true;
                            queue.push(h);
                        }
                    }
                }
            }
        }
        (0..n as u32).filter(|&a| model[a as usize] && !derived[a as usize]).collect()
    }

    /// Loop nogoods for an unfounded set: each member needs a rule whose
    /// positive body lies outside the set.
    fn loop_nogoods(&self, c: &Compiled, unfounded: &[u32]) -> Vec<Vec<Lit>> {
        let mut member = vec![false; self.atom_var.len()];
        for &a in unfounded {
            member[a as usize] = true;
        }
        let mut external: Vec<Lit> = unfounded
            .iter()
            .flat_map(|&a| self.support[a as usize].iter())
            .filter(|&&r| c.rules[r].pos.iter().all(|&b| !member[b as usize]))
            .map(|&r| self.rule_body[r].expect("support rules survive"))
            .collect();
        external.sort_unstable();
        external.dedup();
        unfounded
            .iter()
            .map(|&a| {
                let mut clause = vec![!self.atom_lit(a).expect("true atoms are possible")];
                clause.extend_from_slice(&external);
                clause
            })
            .collect()
    }
}

/// Atoms derivable when default negation is ignored and every choice atom
/// is assumed. Everything else is false in every answer set.
fn possibly_true(c: &Compiled, in_choice: &[bool]) -> Vec<bool> {
    let n = c.num_atoms();
    let mut possible = in_choice.to_vec();
    let mut missing: Vec<usize> = Vec::with_capacity(c.rules.len());
    let mut watchers: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut queue: Vec<u32> = (0..n as u32).filter(|&a| possible[a as usize]).collect();
    for (idx, r) in c.rules.iter().enumerate() {
        missing.push(r.pos.len());
        for &a in &r.pos {
            watchers[a as usize].push(idx);
        }
        if let (CHead::Atom(h), true) = (&r.head, r.pos.is_empty()) {
            if !possible[*h as usize] {
                possible[*h as usize] = true;
                queue.push(*h);
            }
        }
    }
    while let Some(a) = queue.pop() {
        for &idx in &watchers[a as usize] {
            missing[idx] -= 1;
            if missing[idx] == 0 {
                if let CHead::Atom(h) = c.rules[idx].head {
                    if !possible[h as usize] {
                        possible[h as usize] = true;
                        queue.push(h);
                    }
                }
            }
        }
    }
    possible
}

fn write_dimacs(out: &mut String, clauses: &[Vec<Lit>]) {
    for c in clauses {
        for l in c {
            let _ = write!(out, "{} ", l.dimacs());
        }
        out.push_str("0\n");
    }
}

pub(crate) fn enumerate(
    c: &Compiled,
    limit: usize,
    seed: u64,
    deadline: Option<Instant>,
    dump: bool,
) -> Result<SearchOutcome, Interrupted> {
    let enc = Encoding::new(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sat = Cdcl::new(enc.num_vars as usize, &mut rng);
    for clause in &enc.clauses {
        if !sat.add_clause(clause) {
            break;
        }
    }

    let mut stats = SearchStats::default();
    let mut models = Vec::new();
    let mut learned_loops: Vec<Vec<Lit>> = Vec::new();
    let atom_lits: Vec<(u32, Lit)> =
        (0..c.num_atoms() as u32).filter_map(|a| enc.atom_lit(a).map(|l| (a, l))).collect();

    while models.len() < limit {
        if !sat.solve(deadline)? {
            break;
        }
        stats.candidates += 1;
        let mut model = vec![false; c.num_atoms()];
        for &(a, l) in &atom_lits {
            model[a as usize] = sat.is_true(l);
        }
        let unfounded = enc.unfounded(c, &model);
        if !unfounded.is_empty() {
            for clause in enc.loop_nogoods(c, &unfounded) {
                stats.loop_nogoods += 1;
                sat.add_clause(&clause);
                if dump {
                    learned_loops.push(clause);
                }
            }
            continue;
        }
        models.push((0..c.num_atoms() as u32).filter(|&a| model[a as usize]).collect());
        let block: Vec<Lit> = atom_lits.iter().map(|&(a, l)| if model[a as usize] { !l } else { l }).collect();
        if !sat.add_clause(&block) {
            break;
        }
    }
    stats.decisions = sat.stats.decisions;
    stats.conflicts = sat.stats.conflicts;

    let dump = dump.then(|| {
        let mut out = String::new();
        for (a, l) in &atom_lits {
            let _ = writeln!(out, "c atom {} {}", l.dimacs(), c.atoms[*a as usize]);
        }
        let _ = writeln!(out, "p cnf {} {}", enc.num_vars, enc.clauses.len() + learned_loops.len());
        write_dimacs(&mut out, &enc.clauses);
        out.push_str("c loop nogoods\n");
        write_dimacs(&mut out, &learned_loops);
        out
    });
    Ok(SearchOutcome { models, stats, dump })
}
