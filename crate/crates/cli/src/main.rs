use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use aspcorrect::correction::{min_correct_with_order, CorrectionError};
use aspcorrect::harness::bench::{bench, BenchConfig};
use aspcorrect::harness::gen::{graceful, patterns, Instance};
use aspcorrect::harness::{load_grounded, load_spec};
use aspcorrect::maxcon::{maxcon, Algorithm, MaxConError, TargetSet};
use aspcorrect::parse::parse_atom;
use aspcorrect::program::{Atom, Interpretation, Rule};
use aspcorrect::solver::{enumerate, solve, Backend, SolverConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_NO_SUBSET: u8 = 30;

#[derive(Parser)]
#[command(name = "aspcorrect", version, about = "Maximal consistent subsets and minimal corrections for answer-set programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a program has an answer set.
    Solve {
        file: PathBuf,
        /// Number of answer sets to print; 0 prints all.
        #[arg(long, default_value_t = 1)]
        models: usize,
        /// Write the completion and loop nogoods in DIMACS form to this file.
        #[arg(long, value_name = "FILE")]
        dump_completion: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compute a maximal consistent subset of target atoms.
    Maxcon {
        file: PathBuf,
        /// All ground atoms of predicate `p/k` in the grounded program.
        #[arg(long, value_name = "P/K", conflicts_with = "target_file", required_unless_present = "target_file")]
        target_pred: Option<String>,
        /// One ground atom per line.
        #[arg(long, value_name = "FILE")]
        target_file: Option<PathBuf>,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Compute a minimal correction of an inconsistent program.
    Correct {
        file: PathBuf,
        spec: PathBuf,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Generate graceful-graph instances.
    GenGraceful {
        #[arg(long, short = 'v')]
        vertices: usize,
        #[arg(long, short = 'e')]
        edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of instances, with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate permutation-pattern instances.
    GenPatterns {
        #[arg(long, short = 't')]
        text_len: usize,
        #[arg(long, short = 'p')]
        pattern_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run algorithms over a directory of instances.
    Bench {
        dir: PathBuf,
        /// Comma-separated subset of a,u,p,x.
        #[arg(long, default_value = "a,u,p,x", value_delimiter = ',')]
        algos: Vec<Algorithm>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        shuffle: bool,
        /// Also write per-run records as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Leave timings out of the JSON report.
        #[arg(long)]
        deterministic: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long, default_value = "a")]
    algo: Algorithm,
    /// Permute the target atoms with the seed before starting.
    #[arg(long)]
    shuffle: bool,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget per command (per run for bench).
    #[arg(long, value_name = "MS")]
    budget_ms: Option<u64>,
    #[arg(long, value_enum, default_value_t = Oracle::Search)]
    oracle: Oracle,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Brute,
    Search,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl Common {
    fn solver(&self) -> SolverConfig {
        SolverConfig {
            backend: match self.oracle {
                Oracle::Brute => Backend::BruteForce,
                Oracle::Search => Backend::Search,
            },
            seed: self.seed,
            budget: self.budget_ms.map(Duration::from_millis),
            ..SolverConfig::default()
        }
    }
}

fn atoms_json<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Vec<String> {
    atoms.into_iter().map(Atom::to_string).collect()
}

fn rules_json(rules: &[Rule]) -> Vec<String> {
    rules.iter().map(Rule::to_string).collect()
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("plain data"));
}

fn cmd_solve(file: &Path, models: usize, dump: Option<&Path>, common: &Common) -> Result<u8> {
    let g = load_grounded(file)?;
    let mut cfg = common.solver();
    cfg.dump = dump.is_some();
    let result = solve(&g.program, &cfg)?;
    if let (Some(path), Some(text)) = (dump, &result.dump) {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let found: Vec<Interpretation> = match (&result.model, models) {
        (None, _) => Vec::new(),
        (Some(m), 1) => vec![m.clone()],
        (Some(_), n) => enumerate(&g.program, (n > 0).then_some(n), &cfg)?,
    };
    let verdict = if result.consistent() { "SAT" } else { "UNSAT" };
    let stats = &result.stats;
    match common.format {
        Format::Json => print_json(&json!({
            "result": verdict,
            "models": found.iter().map(atoms_json).collect::<Vec<_>>(),
            "stats": {
                "decisions": stats.decisions,
                "conflicts": stats.conflicts,
                "loop_nogoods": stats.loop_nogoods,
                "candidates": stats.candidates,
                "elapsed_ms": stats.elapsed.as_millis() as u64,
            },
        })),
        Format::Text => {
            println!("{verdict}");
            for (i, m) in found.iter().enumerate() {
                println!("Answer {}: {}", i + 1, m);
            }
            println!(
                "decisions={} conflicts={} loop_nogoods={} candidates={} elapsed_ms={}",
                stats.decisions,
                stats.conflicts,
                stats.loop_nogoods,
                stats.candidates,
                stats.elapsed.as_millis()
            );
        }
    }
    Ok(if result.consistent() { EXIT_SAT } else { EXIT_UNSAT })
}

fn read_targets(path: &Path) -> Result<Vec<Atom>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut atoms = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('%').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let atom = parse_atom(line.trim_end_matches('.')).map_err(|e| anyhow::anyhow!("{}:{}: {}", path.display(), n + 1, e.message))?;
        atoms.push(atom);
    }
    Ok(atoms)
}

fn cmd_maxcon(file: &Path, pred: Option<&str>, target_file: Option<&Path>, algo: &AlgoArgs, common: &Common) -> Result<u8> {
    let g = load_grounded(file)?;
    let atoms = match (pred, target_file) {
        (Some(sig), _) => {
            let (name, arity) = sig.rsplit_once('/').context("--target-pred expects p/k")?;
            let arity: usize = arity.parse().context("--target-pred expects p/k")?;
            g.program.atoms().into_iter().filter(|a| &*a.predicate == name && a.arity() == arity).collect()
        }
        (None, Some(path)) => read_targets(path)?,
        (None, None) => bail!("give --target-pred or --target-file"),
    };
    let mut s = TargetSet::new(atoms)?;
    if algo.shuffle {
        s = s.shuffled(common.seed);
    }
    let r = match maxcon(&g.program, &s, algo.algo, &common.solver()) {
        Ok(r) => r,
        Err(MaxConError::NoConsistentSubset) => {
            eprintln!("no subset of the target atoms is consistent with the program");
            return Ok(EXIT_NO_SUBSET);
        }
        Err(e) => return Err(e.into()),
    };
    match common.format {
        Format::Json => print_json(&json!({
            "L": atoms_json(&r.subset),
            "witness": atoms_json(&r.witness),
            "oracle_calls": r.oracle_calls,
            "algo": algo.algo.to_string(),
        })),
        Format::Text => {
            println!("L: {}", Interpretation::from(r.subset.clone()));
            println!("witness: {}", r.witness);
            println!("oracle_calls: {}", r.oracle_calls);
        }
    }
    Ok(0)
}

fn cmd_correct(file: &Path, spec_path: &Path, algo: &AlgoArgs, common: &Common) -> Result<u8> {
    let g = load_grounded(file)?;
    let spec = load_spec(spec_path, &g)?;
    let shuffle = algo.shuffle.then_some(common.seed);
    let report = match min_correct_with_order(&g.program, &spec, algo.algo, &common.solver(), shuffle) {
        Ok(r) => r,
        Err(CorrectionError::NoCorrection) => {
            eprintln!("no correction exists within the given removable and addable rules");
            return Ok(EXIT_NO_SUBSET);
        }
        Err(e) => return Err(e.into()),
    };
    let c = &report.correction;
    match common.format {
        Format::Json => print_json(&json!({
            "remove": rules_json(&c.removed),
            "add": rules_json(&c.added),
            "materialized_A": rules_json(&report.materialized_a),
            "oracle_calls": report.oracle_calls,
        })),
        Format::Text => {
            for r in &c.removed {
                println!("- {r}");
            }
            for r in &c.added {
                println!("+ {r}");
            }
            println!("oracle_calls: {}", report.oracle_calls);
        }
    }
    Ok(0)
}

fn write_instances(out: &Path, seed: u64, count: u64, make: impl Fn(u64) -> Result<Instance, aspcorrect::harness::gen::GenError>) -> Result<u8> {
    for s in seed..seed + count {
        let inst = make(s)?;
        let (lp, _) = inst.write_to(out).with_context(|| format!("writing to {}", out.display()))?;
        println!("{}", lp.display());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { file, models, dump_completion, common } => cmd_solve(&file, models, dump_completion.as_deref(), &common),
        Command::Maxcon { file, target_pred, target_file, algo, common } => {
            cmd_maxcon(&file, target_pred.as_deref(), target_file.as_deref(), &algo, &common)
        }
        Command::Correct { file, spec, algo, common } => cmd_correct(&file, &spec, &algo, &common),
        Command::GenGraceful { vertices, edges, seed, count, out } => {
            write_instances(&out, seed, count, |s| graceful(vertices, edges, s))
        }
        Command::GenPatterns { text_len, pattern_len, seed, count, out } => {
            write_instances(&out, seed, count, |s| patterns(text_len, pattern_len, s))
        }
        Command::Bench { dir, algos, jobs, shuffle, csv, deterministic, common } => {
            let algos: Vec<Algorithm> = algos.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
            let mut cfg = BenchConfig { algos, jobs, shuffle, solver: common.solver(), ..BenchConfig::default() };
            if let Some(b) = cfg.solver.budget.take() {
                cfg.budget = b;
            }
            let report = bench(&dir, &cfg).with_context(|| format!("reading {}", dir.display()))?;
            if let Some(path) = csv {
                fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            match (common.format, deterministic) {
                (Format::Text, _) => print!("{}", report.to_text()),
                (Format::Json, true) => println!("{}", report.deterministic_json()),
                (Format::Json, false) => println!("{}", report.to_json()),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
