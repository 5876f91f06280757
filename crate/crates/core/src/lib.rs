//! Maximal consistent subsets and minimal corrections for answer-set
//! programs.
//!
//! The pipeline: [`parse`] source text, [`ground`] it, decide consistency
//! with [`solver`], compute maximal consistent subsets of atoms with
//! [`maxcon`] and turn those into rule-level repairs with [`correction`].
//! [`harness`] loads files, generates instances and runs benchmarks.
//!
//! ```
//! use aspcorrect::correction::{min_correct, CorrectionSpec};
//! use aspcorrect::maxcon::Algorithm;
//! use aspcorrect::parse::{parse_program, parse_rule};
//! use aspcorrect::program::RuleId;
//! use aspcorrect::solver::SolverConfig;
//!
//! let p = parse_program("a :- not b.\n:- a.\nc.").unwrap();
//! let spec = CorrectionSpec {
//!     removable: [RuleId(2)].into(),
//!     addable_rules: vec![parse_rule("b.").unwrap()],
//!     ..Default::default()
//! };
//! let r = min_correct(&p, &spec, Algorithm::Unit, &SolverConfig::default()).unwrap();
//! assert_eq!(r.correction.size(), 1);
//! ```

pub mod ground;
pub mod parse;
pub mod program;
pub mod solver;
pub mod maxcon;
pub mod correction;
pub mod harness;

// The guide's code blocks run as doc-tests so they cannot drift from the
// library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/programs.md")]
    pub struct Programs;
    #[doc = include_str!("../../../book/src/solving.md")]
    pub struct Solving;
    #[doc = include_str!("../../../book/src/maxcon.md")]
    pub struct Maxcon;
    #[doc = include_str!("../../../book/src/corrections.md")]
    pub struct Corrections;
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    pub struct Benchmarks;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
}
