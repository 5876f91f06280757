//! Guess-and-check over every subset of the program's atoms, using bit
//! masks. Exponential on purpose; it is the reference the search backend is
//! tested against.

use std::time::Instant;

use super::compile::{CHead, Compiled};
use super::Interrupted;

struct Masks {
    /// (head bit, pos mask, neg mask) of each normal rule.
    normal: Vec<(u64, u64, u64)>,
    /// (pos mask, neg mask) of each constraint.
    constraints: Vec<(u64, u64)>,
    /// (atom mask, bound) of each choice rule.
    choices: Vec<(u64, u32)>,
    choice_atoms: u64,
}

fn mask_of(atoms: &[u32]) -> u64 {
    atoms.iter().fold(0, |m, &a| m | 1 << a)
}

impl Masks {
    fn new(c: &Compiled) -> Masks {
        let mut m = Masks { normal: Vec::new(), constraints: Vec::new(), choices: Vec::new(), choice_atoms: 0 };
        for r in &c.rules {
            let (pos, neg) = (mask_of(&r.pos), mask_of(&r.neg));
            match &r.head {
                CHead::Atom(h) => m.normal.push((1 << h, pos, neg)),
                CHead::Falsum => m.constraints.push((pos, neg)),
                CHead::Choice { bound, atoms } => {
                    let set = mask_of(atoms);
                    m.choice_atoms |= set;
                    m.choices.push((set, *bound as u32));
                }
            }
        }
        m
    }

    fn is_answer_set(&self, cand: u64) -> bool {
        if self.constraints.iter().any(|&(pos, neg)| pos & !cand == 0 && neg & cand == 0) {
            return false;
        }
        if self.choices.iter().any(|&(set, bound)| (set & cand).count_ones() < bound) {
            return false;
        }
        let mut derived = self.choice_atoms & cand;
        loop {
            let before = derived;
            for &(head, pos, neg) in &self.normal {
                if neg & cand == 0 && pos & !derived == 0 {
                    derived |= head;
                }
            }
            if derived & !cand != 0 {
                return false;
            }
            if derived == before {
                return derived == cand;
            }
        }
    }
}

/// Answer sets as bit masks over `c.atoms`, in increasing mask order.
/// Callers guarantee `c.num_atoms() < 64`.
pub(crate) fn enumerate(
    c: &Compiled,
    limit: usize,
    deadline: Option<Instant>,
    checked: &mut u64,
) -> Result<Vec<u64>, Interrupted> {
    let n = c.num_atoms();
    debug_assert!(n < 64);
    let masks = Masks::new(c);
    let mut found = Vec::new();
    if limit == 0 {
        return Ok(found);
    }
    for cand in 0..(1u64 << n) {
        if cand & 0xfff == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Interrupted);
        }
        *checked += 1;
        if masks.is_answer_set(cand) {
            found.push(cand);
            if found.len() >= limit {
                break;
            }
        }
    }
    Ok(found)
}
