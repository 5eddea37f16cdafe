//! Solver-agnostic MILP representation.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::dominance::Criterion;
use crate::error::{Error, Result};
use crate::solver::{LpProblem, MipProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Constraint families of the M1/M2 formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `x_i - φ_ik <= y_k`: φ majorizes the benchmark shortfall below `x_i`.
    GainBenchmarkShortfall,
    /// `x_k + ψ_k >= b`: ψ majorizes the candidate shortfall below `b`.
    GainUpperShortfall,
    /// `x_i - x_k + M(1 - z_ik) - θ_ik >= 0`.
    GainOrderLink,
    /// `M z_ik - θ_ik >= 0`.
    GainOrderGate,
    /// `x_i - r - M ξ_i <= 0`: ξ_i flags gains.
    GainIndicator,
    /// Integrated-CDF comparison at each gain, relaxed by `M(1 - ξ_i)`.
    GainAggregate,
    /// `x_k + δ_ik >= y_i` for benchmark losses `i`.
    LossShortfall,
    /// `Σ p_k δ_ik <= F²_Y(y_i)`.
    LossAggregate,
    /// `Σ λ_j = 1`.
    Budget,
    /// `η_k <= x_k - r + M(1 - ξ_k)`.
    ReferenceGainLink,
    /// `η_k <= M ξ_k`.
    ReferenceGainGate,
    /// `Σ p_k η_k >= E[(Y - r)⁺]`: upper-tail comparison at the reference point.
    ReferenceGainAggregate,
    /// `x_k + M ζ_ik >= y_i`: ζ_ik flags `x_k < y_i`.
    StrictBelow,
    /// `Σ p_k ζ_ik <= max{F_Y(y_{i-1}), d⁻}`.
    ConditionalFsd,
    /// `λ_j - k_j / steps = 0`: restricts weights to a simplex lattice.
    Lattice,
}

impl Family {
    /// Families that appear in the formulation as published (without the
    /// reference-point gain check or lattice restriction).
    pub fn is_literal(self) -> bool {
        !matches!(
            self,
            Family::ReferenceGainLink
                | Family::ReferenceGainGate
                | Family::ReferenceGainAggregate
                | Family::Lattice
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub family: Option<Family>,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Big-M constants used per constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigMValues {
    pub pairwise: f64,
    pub indicator: f64,
    pub aggregate: f64,
}

impl BigMValues {
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            pairwise: self.pairwise * factor,
            indicator: self.indicator * factor,
            aggregate: self.aggregate * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub criterion: Criterion,
    pub reference: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    /// `F²_Y(b)`.
    pub f2_y_b: f64,
    /// Benchmark states with `y_i <= r` (0-based canonical indices).
    pub loss_states: Vec<usize>,
    pub num_assets: usize,
    pub num_states: usize,
    pub bounds: (f64, f64),
    /// Sorted benchmark returns and the shared state probabilities.
    pub benchmark: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    pub maximize: bool,
    pub big_m: Option<BigMValues>,
    pub metadata: Option<ModelMetadata>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>, maximize: bool) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            maximize,
            big_m: None,
            metadata: None,
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: Option<f64>) -> usize {
        let upper = match kind {
            VarKind::Binary => Some(upper.unwrap_or(1.0).min(1.0)),
            _ => upper,
        };
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        family: Option<Family>,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        let coeffs = merge_terms(coeffs);
        self.constraints.push(Constraint {
            name: name.into(),
            family,
            coeffs,
            sense,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    pub fn rows_by_family(&self) -> BTreeMap<Family, usize> {
        let mut out = BTreeMap::new();
        for c in &self.constraints {
            if let Some(f) = c.family {
                *out.entry(f).or_insert(0) += 1;
            }
        }
        out
    }

    /// Number of variables whose name starts with `{prefix}_`.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        let p = format!("{prefix}_");
        self.variables.iter().filter(|v| v.name.starts_with(&p)).count()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn name_index(&self) -> HashMap<&str, usize> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect()
    }

    /// Columns of the portfolio weights `lam_1, lam_2, ...` in asset order.
    pub fn weight_columns(&self) -> Vec<usize> {
        let mut cols: Vec<(usize, usize)> = self
            .variables
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                v.name
                    .strip_prefix("lam_")
                    .and_then(|s| s.parse::<usize>().ok())
                    .map(|j| (j, i))
            })
            .collect();
        cols.sort_unstable();
        cols.into_iter().map(|(_, i)| i).collect()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Largest constraint or bound violation at `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        self.to_mip().lp.max_violation(values)
    }

    /// Minimization form for the native solver (objective negated when
    /// maximizing).
    pub fn to_mip(&self) -> MipProblem {
        let sign = if self.maximize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; self.num_vars()];
        for &(j, c) in &self.objective {
            cost[j] += sign * c;
        }
        let (row_lower, row_upper) = self
            .constraints
            .iter()
            .map(|c| match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            })
            .unzip();
        MipProblem {
            lp: LpProblem {
                col_lower: self.variables.iter().map(|v| v.lower).collect(),
                col_upper: self
                    .variables
                    .iter()
                    .map(|v| v.upper.unwrap_or(f64::INFINITY))
                    .collect(),
                cost,
                rows: self.constraints.iter().map(|c| c.coeffs.clone()).collect(),
                row_lower,
                row_upper,
            },
            integer: self.variables.iter().map(|v| v.kind.is_integer()).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let mut names = std::collections::HashSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate variable `{}`", v.name)));
            }
            if v.name.is_empty() || v.name.contains(char::is_whitespace) {
                return Err(Error::InvalidModel(format!("invalid variable name `{}`", v.name)));
            }
        }
        let in_range = |terms: &[(usize, f64)]| terms.iter().all(|&(j, c)| j < n && c.is_finite());
        if !in_range(&self.objective) {
            return Err(Error::InvalidModel("objective references an unknown column".into()));
        }
        for c in &self.constraints {
            if !in_range(&c.coeffs) || !c.rhs.is_finite() {
                return Err(Error::InvalidModel(format!("constraint `{}` is malformed", c.name)));
            }
        }
        Ok(())
    }
}

/// Sums duplicate columns and drops zero coefficients, keeping first-seen order.
pub(crate) fn merge_terms(terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (j, c) in terms {
        match slot.get(&j) {
            Some(&s) => out[s].1 += c,
            None => {
                slot.insert(j, out.len());
                out.push((j, c));
            }
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}
