//! File-level plumbing shared by the command-line tool and the benchmark
//! runner.

pub mod bench;
pub mod gen;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::correction::{CorrectionError, CorrectionSpec, SpecFile};
use crate::ground::{ground, GroundError, Grounding};
use crate::parse::parse_program;
use crate::program::Program;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// Already formatted as `file:line:col: message`.
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Ground { path: String, source: GroundError },
    #[error("{path}: {source}")]
    Spec { path: String, source: CorrectionError },
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })
}

pub fn load_program(path: &Path) -> Result<Program, LoadError> {
    let text = read(path)?;
    parse_program(&text).map_err(|e| LoadError::Parse(e.with_file(&path.display().to_string())))
}

/// Parses, checks safety and grounds.
pub fn load_grounded(path: &Path) -> Result<Grounding, LoadError> {
    let p = load_program(path)?;
    ground(&p).map_err(|source| LoadError::Ground { path: path.display().to_string(), source })
}

pub fn load_spec(path: &Path, g: &Grounding) -> Result<CorrectionSpec, LoadError> {
    let text = read(path)?;
    let err = |source| LoadError::Spec { path: path.display().to_string(), source };
    SpecFile::from_json(&text).and_then(|f| f.resolve(g)).map_err(err)
}

/// `dir/name.lp` to `dir/name.spec.json`.
pub fn spec_path_for(lp: &Path) -> PathBuf {
    let stem = lp.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    lp.with_file_name(format!("{stem}.spec.json"))
}
