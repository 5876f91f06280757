//! Index-based form of a ground program, shared by both backends.

use std::collections::HashMap;

use crate::program::{Atom, Head, Rule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum CHead {
    Atom(u32),
    Falsum,
    Choice { bound: usize, atoms: Vec<u32> },
}

#[derive(Clone, Debug)]
pub(crate) struct CRule {
    pub head: CHead,
    /// Sorted, deduplicated.
    pub pos: Vec<u32>,
    /// Sorted, deduplicated.
    pub neg: Vec<u32>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Compiled {
    pub atoms: Vec<Atom>,
    pub rules: Vec<CRule>,
}

impl Compiled {
    /// Returns `None` if a rule is not ground.
    pub fn new<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> Option<Compiled> {
        let mut index: HashMap<Atom, u32> = HashMap::new();
        let mut atoms: Vec<Atom> = Vec::new();
        let mut intern = |a: &Atom| -> u32 {
            if let Some(&i) = index.get(a) {
                return i;
            }
            let i = atoms.len() as u32;
            atoms.push(a.clone());
            index.insert(a.clone(), i);
            i
        };
        let mut out = Vec::new();
        for rule in rules {
            if !rule.is_ground() {
                return None;
            }
            let head = match rule.head() {
                Head::Atom(a) => CHead::Atom(intern(a)),
                Head::Falsum => CHead::Falsum,
                Head::Choice { bound, atoms } => {
                    CHead::Choice { bound: *bound, atoms: atoms.iter().map(&mut intern).collect() }
                }
            };
            let mut pos: Vec<u32> = rule.pos().map(&mut intern).collect();
            let mut neg: Vec<u32> = rule.neg().map(&mut intern).collect();
            pos.sort_unstable();
            pos.dedup();
            neg.sort_unstable();
            neg.dedup();
            out.push(CRule { head, pos, neg });
        }
        Some(Compiled { atoms, rules: out })
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }
}
