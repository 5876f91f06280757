//! Property tests over randomly generated programs.

mod common;

use std::collections::BTreeSet;

use aspcorrect::correction::{apply, extract_correction, instrument, min_correct, CorrectionError, CorrectionSpec, Polarity};
use aspcorrect::ground::{check_safety, ground, herbrand_universe};
use aspcorrect::harness::gen::{graceful, patterns};
use aspcorrect::maxcon::{maxcon, Algorithm, MaxConError, TargetSet};
use aspcorrect::parse::parse_program;
use aspcorrect::program::{render, Atom, Head, Interpretation, Literal, Program, Rule, RuleId, Term};
use aspcorrect::solver::{enumerate, is_answer_set, SolverConfig};
use common::*;
use proptest::prelude::*;

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0i64..4).prop_map(Term::from),
        prop::sample::select(vec!["c", "d"]).prop_map(Term::from),
        prop::sample::select(vec!["X", "Y", "Z"]).prop_map(Term::var),
    ]
}

fn atom() -> impl Strategy<Value = Atom> {
    (prop::sample::select(vec!["p", "q", "r"]), prop::collection::vec(term(), 0..=2)).prop_map(|(pred, args)| {
        // Keep each predicate at a fixed arity so programs stay well formed.
        let arity = match pred {
            "p" => 0,
            "q" => 1,
            _ => 2,
        };
        let mut args = args;
        args.resize(arity, Term::from(0));
        Atom::new(pred, args)
    })
}

fn literal() -> impl Strategy<Value = Literal> {
    (atom(), any::<bool>()).prop_map(|(a, neg)| if neg { Literal::neg(a) } else { Literal::pos(a) })
}

/// A possibly non-ground, possibly unsafe rule.
fn rule() -> impl Strategy<Value = Rule> {
    prop_oneof![
        4 => (atom(), prop::collection::vec(literal(), 0..4)).prop_map(|(h, b)| Rule::normal(h, b)),
        2 => prop::collection::vec(literal(), 1..4).prop_map(Rule::constraint),
        1 => (0usize..3, prop::collection::btree_set(atom(), 1..4)).prop_map(|(k, atoms)| {
            let atoms: Vec<Atom> = atoms.into_iter().filter(Atom::is_ground).collect();
            let atoms = if atoms.is_empty() { vec![Atom::prop("p")] } else { atoms };
            Rule::choice(k.min(atoms.len()), atoms).unwrap()
        }),
    ]
}

fn program() -> impl Strategy<Value = Program> {
    prop::collection::vec(rule(), 0..8).prop_map(|rules| Program::new(rules).unwrap())
}

/// A safe program: every rule variable is bound by a positive `dom/1`
/// literal, and `dom` has facts.
fn safe_program() -> impl Strategy<Value = Program> {
    program().prop_map(|p| {
        let mut rules: Vec<Rule> = (0..2).map(|i| Rule::fact(Atom::new("dom", vec![Term::from(i)]))).collect();
        for r in p.rules() {
            let guards = r.variables().into_iter().map(|v| Literal::pos(Atom::new("dom", vec![Term::Var(v)])));
            let body: Vec<Literal> = r.body().iter().cloned().chain(guards).collect();
            rules.push(match r.head_atom() {
                Some(h) => Rule::normal(h.clone(), body),
                None if r.body().is_empty() => r.clone(),
                None => Rule::constraint(body),
            });
        }
        Program::new(rules).unwrap()
    })
}

fn is_choice(r: &Rule) -> bool {
    matches!(r.head(), Head::Choice { .. })
}

fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0u32..1 << items.len()).map(|m| (0..items.len()).filter(|i| m >> i & 1 == 1).map(|i| items[i].clone()).collect()).collect()
}

fn seeds() -> impl Strategy<Value = u64> {
    0u64..1_000_000
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_inverts_render(p in program()) {
        let back = parse_program(&render(&p)).unwrap();
        prop_assert!(back.structurally_eq(&p), "{}\nreparsed as\n{}", p, back);
    }

    #[test]
    fn grounding_is_idempotent(p in safe_program()) {
        let g = ground(&p).unwrap();
        prop_assert!(g.program.is_ground());
        let again = ground(&g.program).unwrap();
        prop_assert!(again.program.structurally_eq(&g.program));
    }

    #[test]
    fn instance_count_matches_universe(p in safe_program()) {
        let g = ground(&p).unwrap();
        let u = herbrand_universe(&p).len();
        for r in p.rules() {
            let expected = u.pow(r.variables().len() as u32);
            prop_assert_eq!(g.instances_of(r.id()).count(), expected);
            for id in g.instances_of(r.id()) {
                prop_assert_eq!(g.source_of(id), Some(r.id()));
            }
        }
        prop_assert_eq!(g.program.len(), p.rules().iter().map(|r| u.pow(r.variables().len() as u32)).sum::<usize>());
    }

    #[test]
    fn unsafe_rules_are_reported(p in program()) {
        let unsafe_rule = p.rules().iter().any(|r| {
            let bound: BTreeSet<_> = r.pos().flat_map(|a| a.variables().cloned()).collect();
            r.variables().iter().any(|v| !bound.contains(v))
        });
        prop_assert_eq!(!check_safety(&p).is_empty(), unsafe_rule);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn backends_agree(seed in seeds(), search_seed in seeds()) {
        let p = random_program(seed, 10, 20);
        let brute = enumerate(&p, None, &SolverConfig::brute_force()).unwrap();
        let search = enumerate(&p, None, &SolverConfig::search().with_seed(search_seed)).unwrap();
        prop_assert_eq!(brute, search);
    }

    #[test]
    fn checker_accepts_exactly_the_answer_sets(seed in seeds()) {
        let p = random_program(seed, 8, 14);
        let models: BTreeSet<Interpretation> = enumerate(&p, None, &SolverConfig::search()).unwrap().into_iter().collect();
        for i in all_interpretations(&p) {
            prop_assert_eq!(is_answer_set(&p, &i), models.contains(&i), "{}", i);
        }
    }

    /// Answer sets of programs without choice rules are subset-incomparable.
    #[test]
    fn answer_sets_form_an_antichain(seed in seeds()) {
        let p = random_program(seed, 10, 20);
        let p = Program::with_ids(p.rules().iter().filter(|r| !is_choice(r)).cloned().collect()).unwrap();
        let models = enumerate(&p, None, &SolverConfig::search()).unwrap();
        for a in &models {
            for b in &models {
                prop_assert!(a == b || !a.atoms().is_subset(b.atoms()));
            }
        }
    }

    #[test]
    fn maxcon_is_sound_and_maximal(seed in seeds(), order in any::<u64>()) {
        let p = random_program(seed, 10, 16);
        let s = TargetSet::new(random_target(seed, &p, 8)).unwrap().shuffled(order);
        let mut best = None;
        let mut infeasible = 0;
        for algo in Algorithm::ALL {
            match maxcon(&p, &s, algo, &SolverConfig::default().with_seed(seed)) {
                Ok(r) => {
                    prop_assert!(r.subset.iter().all(|a| s.contains(a)));
                    let with_l = p.extend(r.subset.iter().cloned().map(Rule::fact)).unwrap();
                    prop_assert!(is_answer_set(&with_l, &r.witness));
                    prop_assert!(exhaustively_maximal(&p, s.atoms(), &r.subset), "{} returned {:?}", algo, r.subset);
                    let n = s.len();
                    let bound = match algo {
                        Algorithm::Atleast => n + 2,
                        Algorithm::Unit => n + 1,
                        Algorithm::Progression => 3 * n + 1,
                        Algorithm::MaxCard => usize::MAX,
                    };
                    prop_assert!(r.oracle_calls <= bound);
                    if algo == Algorithm::MaxCard {
                        best = Some(r.subset.len());
                    } else {
                        prop_assert!(r.trace.windows(2).all(|w| w[0].is_subset(&w[1])));
                        prop_assert_eq!(r.trace.last(), Some(&r.subset));
                    }
                }
                Err(MaxConError::NoConsistentSubset) => {
                    prop_assert!(!any_consistent_subset(&p, s.atoms()));
                    infeasible += 1;
                }
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
        prop_assert!(infeasible == 0 || infeasible == 4);
        if let Some(x) = best {
            for algo in [Algorithm::Atleast, Algorithm::Unit, Algorithm::Progression] {
                let r = maxcon(&p, &s, algo, &SolverConfig::default()).unwrap();
                prop_assert!(r.subset.len() <= x);
            }
        }
    }

    #[test]
    fn instrumentation_is_invertible(seed in seeds(), pick in any::<u64>()) {
        let p = random_program(seed, 8, 12);
        let removable: BTreeSet<RuleId> = p.rules().iter().filter(|r| !is_choice(r)).map(Rule::id).filter(|id| pick >> (id.0 % 64) & 1 == 1).collect();
        let atoms: Vec<Atom> = p.atoms().into_iter().collect();
        let addable: Vec<Rule> = atoms.iter().take(2).map(|a| Rule::fact(a.clone()))
            .filter(|r| !p.rules().iter().any(|x| x.structurally_eq(r))).collect();
        let ip = instrument(&p, &removable, &addable).unwrap();
        prop_assert_eq!(ip.selectors.len(), removable.len() + addable.len());
        // Keeping every selector gives back P; removing them all gives P ∖ R ∪ A.
        for (l, removed, added) in [
            (ip.selectors.atoms().iter().cloned().collect::<BTreeSet<_>>(), 0, 0),
            (BTreeSet::new(), removable.len(), addable.len()),
        ] {
            let c = extract_correction(&l, &Interpretation::new(), &ip);
            prop_assert_eq!((c.removed.len(), c.added.len()), (removed, added));
        }
        for (s, origin) in &ip.provenance {
            match origin.polarity {
                Polarity::Removal => prop_assert!(removable.contains(&origin.rule.id())),
                Polarity::Addition => prop_assert!(addable.contains(&origin.rule)),
            }
            prop_assert!(ip.is_selector(s));
        }
        // With selector facts for exactly `l`, the instrumented program has the
        // same answer sets (minus selectors) as the corrected program.
        let l: BTreeSet<Atom> = ip.selectors.atoms().iter().enumerate().filter(|(i, _)| pick >> (i + 32) & 1 == 1).map(|(_, a)| a.clone()).collect();
        let c = extract_correction(&l, &Interpretation::new(), &ip);
        let gated = ip.program.extend(l.iter().cloned().map(Rule::fact)).unwrap();
        let strip = |m: Interpretation| m.restrict(|a| !ip.is_selector(a));
        let via_selectors: BTreeSet<Interpretation> = enumerate(&gated, None, &SolverConfig::default()).unwrap().into_iter().map(strip).collect();
        let direct: BTreeSet<Interpretation> = enumerate(&c.apply(&p), None, &SolverConfig::default()).unwrap().into_iter().collect();
        prop_assert_eq!(via_selectors, direct);
    }

    #[test]
    fn corrections_are_valid_and_minimal(seed in seeds()) {
        let p = random_program(seed, 8, 12);
        prop_assume!(!consistent(&p));
        let removable: BTreeSet<RuleId> = p.rules().iter().filter(|r| !is_choice(r)).map(Rule::id).take(4).collect();
        let addable: Vec<Rule> = p.atoms().into_iter().take(3).map(Rule::fact).filter(|r| !p.rules().iter().any(|x| x.structurally_eq(r))).collect();
        let spec = CorrectionSpec { removable, addable_rules: addable, addition_exprs: vec![] };
        match min_correct(&p, &spec, Algorithm::Progression, &SolverConfig::default()) {
            Ok(r) => {
                let c = r.correction;
                prop_assert!(is_answer_set(&c.apply(&p), &c.witness));
                for i in 0..c.removed.len() {
                    let mut fewer = c.removed.clone();
                    fewer.remove(i);
                    prop_assert!(!consistent(&apply(&p, &fewer, &c.added)));
                }
                for i in 0..c.added.len() {
                    let mut fewer = c.added.clone();
                    fewer.remove(i);
                    prop_assert!(!consistent(&apply(&p, &c.removed, &fewer)));
                }
            }
            Err(CorrectionError::NoCorrection) => {
                let removable: Vec<Rule> = spec.removable.iter().map(|id| p.rule(*id).unwrap().clone()).collect();
                for removed in subsets(&removable) {
                    for added in subsets(&spec.addable_rules) {
                        prop_assert!(!consistent(&apply(&p, &removed, &added)));
                    }
                }
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_instances_round_trip(seed in 0u64..1000, v in 3usize..7, t in 3usize..9) {
        let e = (v * (v - 1) / 2).min(v + 2);
        let p_len = t.min(4);
        for inst in [graceful(v, e, seed).unwrap(), patterns(t, p_len, seed).unwrap()] {
            let p = parse_program(&inst.program).unwrap();
            prop_assert!(p.is_ground());
            prop_assert!(check_safety(&p).is_empty());
            prop_assert!(parse_program(&render(&p)).unwrap().structurally_eq(&p));
            let g = ground(&p).unwrap();
            let spec = inst.spec.resolve(&g).unwrap();
            prop_assert!(!spec.removable.is_empty());
            let again = aspcorrect::correction::SpecFile::from_json(&inst.spec.to_json()).unwrap();
            prop_assert_eq!(again.to_json(), inst.spec.to_json());
        }
    }
}
