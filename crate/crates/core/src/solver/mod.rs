//! Consistency checking for ground programs.
//!
//! Two interchangeable backends decide whether a ground program has an
//! answer set: [`Backend::BruteForce`] tries every subset of atoms, and
//! [`Backend::Search`] runs conflict-driven search over the completion with
//! lazy unfounded-set checks. [`is_answer_set`] is a third, independent
//! code path used to validate both.

mod brute;
mod cdcl;
mod check;
mod compile;
mod search;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use check::{is_answer_set, least_model, reduct};

use crate::program::{Interpretation, Program, Rule};
use compile::Compiled;

pub const DEFAULT_BRUTE_FORCE_CEILING: usize = 20;

/// Largest ceiling the bit-mask enumerator can represent.
pub const MAX_BRUTE_FORCE_CEILING: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    BruteForce,
    #[default]
    Search,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" | "brute-force" => Ok(Backend::BruteForce),
            "search" => Ok(Backend::Search),
            other => Err(format!("unknown oracle `{other}` (expected `brute` or `search`)")),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::BruteForce => "brute",
            Backend::Search => "search",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: Backend,
    /// The brute-force backend refuses programs with more atoms than this.
    pub brute_force_ceiling: usize,
    pub seed: u64,
    /// Wall-clock budget. For a bare [`solve`] it covers that one call; an
    /// [`crate::maxcon::Oracle`] spreads it over all of its calls.
    pub budget: Option<Duration>,
    /// Keep a DIMACS-style dump of the completion and loop nogoods.
    pub dump: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Search,
            brute_force_ceiling: DEFAULT_BRUTE_FORCE_CEILING,
            seed: 0,
            budget: None,
            dump: false,
        }
    }
}

impl SolverConfig {
    pub fn brute_force() -> Self {
        SolverConfig { backend: Backend::BruteForce, ..Default::default() }
    }

    pub fn search() -> Self {
        SolverConfig::default()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: Duration) -> Self {
        self.budget = Some(budget);
        self
    }

    pub(crate) fn deadline(&self) -> Option<Instant> {
        self.budget.map(|b| Instant::now() + b)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub loop_nogoods: u64,
    /// Candidate models examined: completion models for search, subsets
    /// for brute force.
    pub candidates: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// An answer set, or `None` if the program has none.
    pub model: Option<Interpretation>,
    pub stats: SolveStats,
    pub dump: Option<String>,
}

impl SolveResult {
    pub fn consistent(&self) -> bool {
        self.model.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("time budget exceeded")]
    BudgetExceeded,
    #[error("brute-force backend refuses {atoms} atoms (ceiling {ceiling})")]
    TooManyAtoms { atoms: usize, ceiling: usize },
    #[error("brute-force ceiling must be between 1 and {MAX_BRUTE_FORCE_CEILING}, got {0}")]
    InvalidCeiling(usize),
    #[error("program is not ground")]
    NotGround,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Interrupted;

impl From<Interrupted> for SolveError {
    fn from(_: Interrupted) -> Self {
        SolveError::BudgetExceeded
    }
}

/// Decides whether `p` has an answer set and returns one if so.
pub fn solve(p: &Program, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    solve_parts(&[p.rules()], cfg, cfg.deadline())
}

/// Up to `limit` distinct answer sets (all of them for `None`), sorted.
pub fn enumerate(p: &Program, limit: Option<usize>, cfg: &SolverConfig) -> Result<Vec<Interpretation>, SolveError> {
    let (models, _, _) = run(&[p.rules()], limit.unwrap_or(usize::MAX), cfg, cfg.deadline())?;
    let mut models = models;
    models.sort();
    Ok(models)
}

/// Solves the union of several rule slices without materializing it.
pub(crate) fn solve_parts(parts: &[&[Rule]], cfg: &SolverConfig, deadline: Option<Instant>) -> Result<SolveResult, SolveError> {
    let (mut models, stats, dump) = run(parts, 1, cfg, deadline)?;
    Ok(SolveResult { model: models.pop(), stats, dump })
}

fn run(
    parts: &[&[Rule]],
    limit: usize,
    cfg: &SolverConfig,
    deadline: Option<Instant>,
) -> Result<(Vec<Interpretation>, SolveStats, Option<String>), SolveError> {
    let started = Instant::now();
    let compiled = Compiled::new(parts.iter().flat_map(|rules| rules.iter())).ok_or(SolveError::NotGround)?;
    let to_interp = |atoms: &mut dyn Iterator<Item = u32>| -> Interpretation {
        atoms.map(|a| compiled.atoms[a as usize].clone()).collect()
    };
    let mut stats = SolveStats::default();
    let (models, dump) = match cfg.backend {
        Backend::BruteForce => {
            if cfg.brute_force_ceiling == 0 || cfg.brute_force_ceiling > MAX_BRUTE_FORCE_CEILING {
                return Err(SolveError::InvalidCeiling(cfg.brute_force_ceiling));
            }
            if compiled.num_atoms() > cfg.brute_force_ceiling {
                return Err(SolveError::TooManyAtoms { atoms: compiled.num_atoms(), ceiling: cfg.brute_force_ceiling });
            }
            let masks = brute::enumerate(&compiled, limit, deadline, &mut stats.candidates)?;
            let models = masks
                .into_iter()
                .map(|m| to_interp(&mut (0..compiled.num_atoms() as u32).filter(move |a| m >> a & 1 == 1)))
                .collect();
            (models, None)
        }
        Backend::Search => {
            let out = search::enumerate(&compiled, limit, cfg.seed, deadline, cfg.dump)?;
            stats.decisions = out.stats.decisions;
            stats.conflicts = out.stats.conflicts;
            stats.loop_nogoods = out.stats.loop_nogoods;
            stats.candidates = out.stats.candidates;
            let models = out.models.into_iter().map(|m| to_interp(&mut m.into_iter())).collect();
            (models, out.dump)
        }
    };
    stats.elapsed = started.elapsed();
    Ok((models, stats, dump))
}
