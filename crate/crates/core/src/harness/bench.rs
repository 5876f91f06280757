//! Runs every algorithm on every instance of a directory and tabulates
//! solved counts and correction-size differences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::gen::family_of;
use super::{load_grounded, load_spec, spec_path_for};
use crate::correction::{min_correct_with_order, CorrectionError};
use crate::maxcon::Algorithm;
use crate::solver::{SolveError, SolverConfig};

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(60);

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub algos: Vec<Algorithm>,
    /// Per (instance, algorithm) run.
    pub budget: Duration,
    pub jobs: usize,
    pub solver: SolverConfig,
    /// Shuffle the selector order with the solver seed.
    pub shuffle: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { algos: Algorithm::ALL.to_vec(), budget: DEFAULT_BUDGET, jobs: 1, solver: SolverConfig::default(), shuffle: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Corrected,
    NoCorrection,
    Timeout,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub family: String,
    pub algorithm: char,
    pub outcome: Outcome,
    pub solved: bool,
    pub elapsed_ms: u64,
    pub oracle_calls: usize,
    /// `|M_r| + |M_a|` when a correction was found.
    pub correction_size: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyRow {
    pub family: String,
    pub instances: usize,
    pub solved: BTreeMap<char, usize>,
    /// Instances solved by at least one algorithm.
    pub vbs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaRow {
    /// Correction size under an algorithm minus the size under `x`.
    pub delta: i64,
    pub counts: BTreeMap<char, usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub solved: Vec<FamilyRow>,
    pub deltas: Vec<DeltaRow>,
}

/// Instance files (`*.lp`) in `dir`, sorted by name.
pub fn instances_in(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lp"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn bench(dir: &Path, cfg: &BenchConfig) -> io::Result<BenchReport> {
    let files = instances_in(dir)?;
    let jobs: Vec<(&PathBuf, Algorithm)> = files.iter().flat_map(|f| cfg.algos.iter().map(move |&a| (f, a))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(io::Error::other)?;
    let records: Vec<BenchRecord> = pool.install(|| jobs.par_iter().map(|&(f, a)| run_one(f, a, cfg)).collect());
    Ok(BenchReport::from_records(records))
}

/// One (instance, algorithm) run. Loading is not timed.
pub fn run_one(lp: &Path, algo: Algorithm, cfg: &BenchConfig) -> BenchRecord {
    let instance = lp.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut record = BenchRecord {
        family: family_of(&instance).to_owned(),
        instance,
        algorithm: algo.letter(),
        outcome: Outcome::Error,
        solved: false,
        elapsed_ms: 0,
        oracle_calls: 0,
        correction_size: None,
        seed: cfg.solver.seed,
        error: None,
    };
    let loaded = load_grounded(lp).and_then(|g| {
        let spec = load_spec(&spec_path_for(lp), &g)?;
        Ok((g, spec))
    });
    let (g, spec) = match loaded {
        Ok(x) => x,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let solver = SolverConfig { budget: Some(cfg.budget), ..cfg.solver.clone() };
    let shuffle = cfg.shuffle.then_some(cfg.solver.seed);
    let started = Instant::now();
    let result = min_correct_with_order(&g.program, &spec, algo, &solver, shuffle);
    let elapsed = started.elapsed();
    record.elapsed_ms = elapsed.as_millis() as u64;
    match result {
        Ok(report) if elapsed <= cfg.budget => {
            record.outcome = Outcome::Corrected;
            record.solved = true;
            record.oracle_calls = report.oracle_calls;
            record.correction_size = Some(report.correction.size());
        }
        Ok(_) | Err(CorrectionError::Solver(SolveError::BudgetExceeded)) => record.outcome = Outcome::Timeout,
        Err(CorrectionError::NoCorrection) => {
            record.outcome = Outcome::NoCorrection;
            record.solved = true;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

impl BenchReport {
    pub fn from_records(mut records: Vec<BenchRecord>) -> BenchReport {
        records.sort_by(|a, b| (&a.instance, a.algorithm).cmp(&(&b.instance, b.algorithm)));
        let algos: BTreeSet<char> = records.iter().map(|r| r.algorithm).collect();

        let mut by_family: BTreeMap<&str, BTreeMap<&str, Vec<&BenchRecord>>> = BTreeMap::new();
        for r in &records {
            by_family.entry(&r.family).or_default().entry(&r.instance).or_default().push(r);
        }
        let solved = by_family
            .iter()
            .map(|(family, instances)| FamilyRow {
                family: family.to_string(),
                instances: instances.len(),
                solved: algos
                    .iter()
                    .map(|&a| (a, instances.values().filter(|rs| rs.iter().any(|r| r.algorithm == a && r.solved)).count()))
                    .collect(),
                vbs: instances.values().filter(|rs| rs.iter().any(|r| r.solved)).count(),
            })
            .collect();

        let mut deltas: BTreeMap<i64, BTreeMap<char, usize>> = BTreeMap::new();
        let mut by_instance: BTreeMap<&str, BTreeMap<char, usize>> = BTreeMap::new();
        for r in &records {
            if let Some(size) = r.correction_size {
                by_instance.entry(&r.instance).or_default().insert(r.algorithm, size);
            }
        }
        for sizes in by_instance.values() {
            let Some(&x) = sizes.get(&'x') else { continue };
            for (&a, &size) in sizes.iter().filter(|(a, _)| **a != 'x') {
                *deltas.entry(size as i64 - x as i64).or_default().entry(a).or_default() += 1;
            }
        }
        let deltas = deltas.into_iter().map(|(delta, counts)| DeltaRow { delta, counts }).collect();
        BenchReport { records, solved, deltas }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// The report without timings; identical across runs with the same
    /// seed as long as no run is close to the budget.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        for r in &mut copy.records {
            r.elapsed_ms = 0;
        }
        copy.to_json()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance,family,algorithm,outcome,solved,elapsed_ms,oracle_calls,correction_size,seed\n");
        for r in &self.records {
            let outcome = serde_json::to_value(r.outcome).expect("plain data");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.instance,
                r.family,
                r.algorithm,
                outcome.as_str().unwrap_or_default(),
                r.solved,
                r.elapsed_ms,
                r.oracle_calls,
                r.correction_size.map(|s| s.to_string()).unwrap_or_default(),
                r.seed
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut algos: Vec<char> = self.solved.first().map(|r| r.solved.keys().copied().collect()).unwrap_or_default();
        algos.sort_by_key(|&c| "aupx".find(c));
        let mut out = String::new();
        let _ = write!(out, "{:<24}{:>6}", "family", "n");
        for a in &algos {
            let _ = write!(out, "{a:>6}");
        }
        let _ = writeln!(out, "{:>6}", "VBS");
        for row in &self.solved {
            let _ = write!(out, "{:<24}{:>6}", row.family, row.instances);
            for a in &algos {
                let _ = write!(out, "{:>6}", row.solved[a]);
            }
            let _ = writeln!(out, "{:>6}", row.vbs);
        }
        let others: Vec<char> = algos.iter().copied().filter(|&a| a != 'x').collect();
        if !self.deltas.is_empty() {
            out.push('\n');
            let _ = write!(out, "{:<8}", "delta");
            for a in &others {
                let _ = write!(out, "{a:>6}");
            }
            out.push('\n');
            for row in &self.deltas {
                let _ = write!(out, "{:<8}", row.delta);
                for a in &others {
                    let _ = write!(out, "{:>6}", row.counts.get(a).copied().unwrap_or(0));
                }
                out.push('\n');
            }
        }
        out
    }
}
