//! Adapter for command-line MIP solvers.
//!
//! The model is written as a minimization MPS file, the solver is run once
//! with a solution-file flag, and the `name value` pairs it writes are read
//! back by column name.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use super::export::{write_mps, MpsSense};
use super::model::MilpModel;
use super::solve::{Limits, SolveOutcome, SolveStats, SolveStatus, SolverAdapter};
use crate::error::{Error, Result};

/// Environment variable naming the solver binary.
pub const SOLVER_BIN_ENV: &str = "MSD_SOLVER_BIN";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalKind {
    Highs,
    Cbc,
}

impl ExternalKind {
    /// Guesses the solver from the binary's file name.
    pub fn detect(binary: &Path) -> Option<Self> {
        let stem = binary.file_stem()?.to_string_lossy().to_ascii_lowercase();
        if stem.contains("highs") {
            Some(ExternalKind::Highs)
        } else if stem.contains("cbc") {
            Some(ExternalKind::Cbc)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExternalAdapter {
    pub binary: PathBuf,
    pub kind: ExternalKind,
    pub threads: Option<usize>,
}

/// Solver-reported status and column values.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub status: SolveStatus,
    pub values: HashMap<String, f64>,
}

impl ExternalAdapter {
    pub fn new(binary: impl Into<PathBuf>, kind: ExternalKind) -> Self {
        Self {
            binary: binary.into(),
            kind,
            threads: None,
        }
    }

    /// Adapter for the binary in `MSD_SOLVER_BIN`, if set and recognizable.
    pub fn from_env() -> Result<Self> {
        let bin = std::env::var_os(SOLVER_BIN_ENV)
            .ok_or_else(|| Error::SolverUnavailable(format!("{SOLVER_BIN_ENV} is not set")))?;
        let bin = PathBuf::from(bin);
        let kind = ExternalKind::detect(&bin).ok_or_else(|| {
            Error::SolverUnavailable(format!("cannot tell whether {} is highs or cbc", bin.display()))
        })?;
        Ok(Self::new(bin, kind))
    }

    fn command(&self, model: &Path, solution: &Path, dir: &Path, limits: &Limits) -> Result<Command> {
        let mut cmd = Command::new(&self.binary);
        match self.kind {
            ExternalKind::Highs => {
                let opts = dir.join("highs.opt");
                let mut text = format!(
                    "time_limit = {}\nmip_rel_gap = {}\nwrite_solution_style = 0\n",
                    limits.time.as_secs_f64(),
                    limits.gap
                );
                if let Some(t) = self.threads {
                    text.push_str(&format!("threads = {t}\n"));
                }
                std::fs::write(&opts, text)?;
                cmd.arg("--model_file")
                    .arg(model)
                    .arg("--options_file")
                    .arg(&opts)
                    .arg("--solution_file")
                    .arg(solution);
            }
            ExternalKind::Cbc => {
                cmd.arg(model)
                    .arg("-sec")
                    .arg(limits.time.as_secs_f64().to_string())
                    .arg("-ratio")
                    .arg(limits.gap.to_string());
                if let Some(t) = self.threads {
                    cmd.arg("-threads").arg(t.to_string());
                }
                cmd.arg("-solve").arg("-solu").arg(solution);
            }
        }
        Ok(cmd)
    }
}

impl SolverAdapter for ExternalAdapter {
    fn name(&self) -> &str {
        match self.kind {
            ExternalKind::Highs => "highs",
            ExternalKind::Cbc => "cbc",
        }
    }

    fn solve(&self, model: &MilpModel, limits: &Limits) -> Result<SolveOutcome> {
        let dir = tempfile::tempdir()?;
        let mps = dir.path().join("model.mps");
        let sol = dir.path().join("model.sol");
        std::fs::write(&mps, write_mps(model, MpsSense::Minimize)?)?;
        let start = Instant::now();
        let output = self
            .command(&mps, &sol, dir.path(), limits)?
            .output()
            .map_err(|e| Error::SolverUnavailable(format!("{}: {e}", self.binary.display())))?;
        let elapsed = start.elapsed().as_secs_f64();
        if !sol.exists() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            let stdout = String::from_utf8_lossy(&output.stdout);
            if stdout.to_ascii_lowercase().contains("infeasible") {
                return SolveOutcome::from_values(model, SolveStatus::Infeasible, None, stats(self, elapsed));
            }
            return Err(Error::SolverFailed(format!(
                "{} wrote no solution file (exit {:?}): {}",
                self.name(),
                output.status.code(),
                stderr.trim()
            )));
        }
        let text = std::fs::read_to_string(&sol)?;
        let parsed = match self.kind {
            ExternalKind::Highs => parse_highs_solution(&text)?,
            ExternalKind::Cbc => parse_cbc_solution(&text)?,
        };
        let values = if parsed.values.is_empty() {
            None
        } else {
            let mut v = vec![0.0; model.num_vars()];
            for (j, var) in model.variables.iter().enumerate() {
                v[j] = *parsed.values.get(&var.name).ok_or_else(|| {
                    Error::SolverFailed(format!("solution has no value for `{}`", var.name))
                })?;
            }
            Some(v)
        };
        let mut out = SolveOutcome::from_values(model, parsed.status, values, stats(self, elapsed))?;
        if parsed.status == SolveStatus::Optimal {
            out.stats.gap = Some(limits.gap);
        }
        Ok(out)
    }
}

fn stats(a: &ExternalAdapter, elapsed: f64) -> SolveStats {
    SolveStats {
        solver: a.name().into(),
        wall_time_secs: elapsed,
        gap: None,
        nodes: None,
    }
}

fn bad(message: impl Into<String>) -> Error {
    Error::SolverFailed(format!("unreadable solution file: {}", message.into()))
}

/// Reads a HiGHS raw solution file (`write_solution_style = 0`).
pub fn parse_highs_solution(text: &str) -> Result<SolutionFile> {
    let mut lines = text.lines().map(str::trim);
    let mut status = None;
    while let Some(l) = lines.next() {
        if l == "Model status" {
            status = lines.next().map(str::to_string);
            break;
        }
    }
    let status = status.ok_or_else(|| bad("no model status"))?;
    let status = match status.to_ascii_lowercase().as_str() {
        "optimal" => SolveStatus::Optimal,
        "infeasible" => SolveStatus::Infeasible,
        s if s.contains("time limit") || s.contains("iteration limit") || s.contains("interrupt") => {
            SolveStatus::TimeLimit
        }
        _ => SolveStatus::Error,
    };
    let mut values = HashMap::new();
    let mut feasible = false;
    let mut count = None;
    for l in lines.by_ref() {
        if l == "Feasible" {
            feasible = true;
        }
        if let Some(n) = l.strip_prefix("# Columns ") {
            count = Some(n.trim().parse::<usize>().map_err(|_| bad(l))?);
            break;
        }
    }
    if let (true, Some(n)) = (feasible, count) {
        for _ in 0..n {
            let l = lines.next().ok_or_else(|| bad("truncated column list"))?;
            let (name, v) = l.rsplit_once(char::is_whitespace).ok_or_else(|| bad(l))?;
            values.insert(name.trim().to_string(), v.parse().map_err(|_| bad(l))?);
        }
    }
    Ok(SolutionFile { status, values })
}

/// Reads a CBC `-solu` file: a status line, then `index name value [dj]`.
pub fn parse_cbc_solution(text: &str) -> Result<SolutionFile> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| bad("empty file"))?.to_ascii_lowercase();
    let status = if head.starts_with("optimal") {
        SolveStatus::Optimal
    } else if head.contains("infeasible") {
        SolveStatus::Infeasible
    } else if head.starts_with("stopped") {
        SolveStatus::TimeLimit
    } else {
        SolveStatus::Error
    };
    let mut values = HashMap::new();
    if status != SolveStatus::Infeasible {
        for l in lines {
            let toks: Vec<&str> = l.split_whitespace().filter(|t| *t != "**").collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() < 3 {
                return Err(bad(l));
            }
            values.insert(toks[1].to_string(), toks[2].parse().map_err(|_| bad(l))?);
        }
    }
    Ok(SolutionFile { status, values })
}
