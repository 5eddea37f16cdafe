//! Fixed-format MPS.
//!
//! Fields start at the standard columns (2, 5, 15, 25, 40, 50). A name or
//! number wider than its field pushes the rest of the line right but stays
//! separated by blanks, so whitespace-splitting readers accept it. The
//! reader here splits on whitespace as well.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::num;
use crate::error::{Error, Result};
use crate::milp::model::{MilpModel, Sense, VarKind};

/// Objective sense written to the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsSense {
    /// Keep the model's sense, with an `OBJSENSE` section when maximizing.
    Native,
    /// Always minimize, negating a maximization objective. For solvers that
    /// ignore `OBJSENSE`.
    Minimize,
}

/// Renders `model` as fixed-format MPS. Integer columns are bracketed by
/// `MARKER` lines and every column gets explicit bounds.
pub fn write_mps(model: &MilpModel, sense: MpsSense) -> Result<String> {
    model.validate()?;
    let obj_name = objective_row_name(model);
    let negate = sense == MpsSense::Minimize && model.maximize;
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", model.name);
    if model.maximize && sense == MpsSense::Native {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {obj_name}");
    for c in &model.constraints {
        let t = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {t}  {}", c.name);
    }

    let mut by_col: Vec<Vec<(&str, f64)>> = vec![Vec::new(); model.num_vars()];
    for &(j, c) in &model.objective {
        by_col[j].push((obj_name.as_str(), if negate { -c } else { c }));
    }
    for row in &model.constraints {
        for &(j, c) in &row.coeffs {
            by_col[j].push((row.name.as_str(), c));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (v, entries) in model.variables.iter().zip(&by_col) {
        let is_int = v.kind.is_integer();
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER{markers:<4}  'MARKER'                 '{tag}'");
            markers += 1;
            in_int = is_int;
        }
        if entries.is_empty() {
            field_line(&mut out, "", &v.name, &[(obj_name.as_str(), 0.0)]);
        }
        for pair in entries.chunks(2) {
            field_line(&mut out, "", &v.name, pair);
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER{markers:<4}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    let rhs: Vec<(&str, f64)> = model
        .constraints
        .iter()
        .filter(|c| c.rhs != 0.0)
        .map(|c| (c.name.as_str(), c.rhs))
        .collect();
    for pair in rhs.chunks(2) {
        field_line(&mut out, "", "RHS", pair);
    }

    out.push_str("BOUNDS\n");
    for v in &model.variables {
        match (v.lower, v.upper) {
            (l, None) if l == f64::NEG_INFINITY => bound_line(&mut out, "FR", &v.name, None),
            (l, Some(u)) if l == u => bound_line(&mut out, "FX", &v.name, Some(u)),
            (l, upper) => {
                if l == f64::NEG_INFINITY {
                    bound_line(&mut out, "MI", &v.name, None);
                } else {
                    bound_line(&mut out, "LO", &v.name, Some(l));
                }
                match upper {
                    Some(u) => bound_line(&mut out, "UP", &v.name, Some(u)),
                    None => bound_line(&mut out, "PL", &v.name, None),
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

fn objective_row_name(model: &MilpModel) -> String {
    let mut name = String::from("obj");
    while model.constraints.iter().any(|c| c.name == name) {
        name.push('_');
    }
    name
}

fn field_line(out: &mut String, code: &str, name: &str, pairs: &[(&str, f64)]) {
    let mut line = format!(" {code:<2} {name:<8}");
    for (k, (row, v)) in pairs.iter().enumerate() {
        let gap = if k == 0 { "  " } else { "   " };
        let _ = write!(line, "{gap}{row:<8}  {:>12}", num(*v));
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

fn bound_line(out: &mut String, code: &str, col: &str, value: Option<f64>) {
    let mut line = format!(" {code:<2} {:<8}  {col:<8}", "BND");
    if let Some(v) = value {
        let _ = write!(line, "  {:>12}", num(v));
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Reads an MPS file.
pub fn read_mps(path: &Path) -> Result<MilpModel> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, path)
}

/// Parses MPS text (fixed or free layout, names without blanks).
pub fn parse_mps(text: &str) -> Result<MilpModel> {
    parse(text, Path::new("<mps>"))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    Done,
}

struct Col {
    name: String,
    integer: bool,
    lower: Option<f64>,
    upper: Option<f64>,
}

fn parse(text: &str, path: &Path) -> Result<MilpModel> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let number = |s: &str, line: usize| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| err(line, format!("bad number `{s}`")))
    };

    let mut name = String::from("model");
    let mut maximize = false;
    let mut objective_row: Option<String> = None;
    let mut free_rows: Vec<String> = Vec::new();
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<Col> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut coeffs: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut in_int = false;
    let mut sec = Section::None;

    for (no, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        if line.starts_with('*') || line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with([' ', '\t']) {
            let head = toks[0].to_ascii_uppercase();
            sec = match head.as_str() {
                "NAME" => {
                    if toks.len() > 1 {
                        name = toks[1..].join(" ");
                    }
                    Section::None
                }
                "OBJSENSE" => match toks.get(1) {
                    Some(s) => {
                        maximize = s.to_ascii_uppercase().starts_with("MAX");
                        Section::None
                    }
                    None => Section::ObjSense,
                },
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::Done,
                "RANGES" => return Err(err(no, "RANGES are not supported".into())),
                _ => return Err(err(no, format!("unknown section `{}`", toks[0]))),
            };
            continue;
        }
        match sec {
            Section::None | Section::Done => return Err(err(no, "data outside a section".into())),
            Section::ObjSense => maximize = toks[0].to_ascii_uppercase().starts_with("MAX"),
            Section::Rows => {
                let [t, r] = toks[..] else {
                    return Err(err(no, "expected `type name`".into()));
                };
                let sense = match t.to_ascii_uppercase().as_str() {
                    "N" => {
                        if objective_row.is_none() {
                            objective_row = Some(r.to_string());
                        } else {
                            free_rows.push(r.to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(err(no, format!("unknown row type `{t}`"))),
                };
                row_index.insert(r.to_string(), rows.len());
                rows.push((r.to_string(), sense));
                coeffs.push(Vec::new());
                rhs.push(0.0);
            }
            Section::Columns => {
                if toks.get(1) == Some(&"'MARKER'") {
                    match toks.get(2).copied() {
                        Some("'INTORG'") => in_int = true,
                        Some("'INTEND'") => in_int = false,
                        _ => return Err(err(no, "bad MARKER line".into())),
                    }
                    continue;
                }
                if toks.len() < 3 || toks.len() % 2 == 0 {
                    return Err(err(no, "expected `column row value [row value]`".into()));
                }
                let j = match col_index.get(toks[0]) {
                    Some(&j) => j,
                    None => {
                        cols.push(Col {
                            name: toks[0].to_string(),
                            integer: in_int,
                            lower: None,
                            upper: None,
                        });
                        col_index.insert(toks[0].to_string(), cols.len() - 1);
                        cols.len() - 1
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = number(pair[1], no)?;
                    if objective_row.as_deref() == Some(pair[0]) {
                        if v != 0.0 {
                            objective.push((j, v));
                        }
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        coeffs[i].push((j, v));
                    } else if !free_rows.iter().any(|r| r == pair[0]) {
                        return Err(err(no, format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                // The set name is optional in some writers.
                let start = if toks.len() % 2 == 1 { 1 } else { 0 };
                for pair in toks[start..].chunks(2) {
                    if pair.len() != 2 {
                        return Err(err(no, "expected `row value` pairs".into()));
                    }
                    let v = number(pair[1], no)?;
                    match row_index.get(pair[0]) {
                        Some(&i) => rhs[i] = v,
                        None if objective_row.as_deref() == Some(pair[0]) => {
                            return Err(err(no, "objective constants are not supported".into()))
                        }
                        None => return Err(err(no, format!("unknown row `{}`", pair[0]))),
                    }
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(err(no, "expected `type set column [value]`".into()));
                }
                let kind = toks[0].to_ascii_uppercase();
                let Some(&j) = col_index.get(toks[2]) else {
                    return Err(err(no, format!("unknown column `{}`", toks[2])));
                };
                let value = match toks.get(3) {
                    Some(s) => Some(number(s, no)?),
                    None => None,
                };
                let need = |v: Option<f64>| v.ok_or_else(|| err(no, format!("{kind} bound needs a value")));
                let c = &mut cols[j];
                match kind.as_str() {
                    "UP" => c.upper = Some(need(value)?),
                    "LO" => c.lower = Some(need(value)?),
                    "FX" => {
                        let v = need(value)?;
                        (c.lower, c.upper) = (Some(v), Some(v));
                    }
                    "FR" => (c.lower, c.upper) = (Some(f64::NEG_INFINITY), Some(f64::INFINITY)),
                    "MI" => c.lower = Some(f64::NEG_INFINITY),
                    "PL" => c.upper = Some(f64::INFINITY),
                    "BV" => {
                        c.integer = true;
                        (c.lower, c.upper) = (Some(0.0), Some(1.0));
                    }
                    "LI" => {
                        c.integer = true;
                        c.lower = Some(need(value)?);
                    }
                    "UI" => {
                        c.integer = true;
                        c.upper = Some(need(value)?);
                    }
                    _ => return Err(err(no, format!("unknown bound type `{kind}`"))),
                }
            }
        }
    }
    if sec != Section::Done {
        return Err(err(text.lines().count(), "missing ENDATA".into()));
    }

    let mut model = MilpModel::new(name, maximize);
    for c in cols {
        let lower = c.lower.unwrap_or(0.0);
        let upper = c.upper.filter(|u| u.is_finite());
        let kind = match (c.integer, lower, upper) {
            (false, _, _) => VarKind::Continuous,
            (true, l, Some(u)) if l == 0.0 && u == 1.0 => VarKind::Binary,
            (true, _, _) => VarKind::Integer,
        };
        model.add_var(c.name, kind, lower, upper);
    }
    model.objective = objective;
    for (((row, sense), terms), b) in rows.into_iter().zip(coeffs).zip(rhs) {
        model.add_constraint(row, None, terms, sense, b);
    }
    model.validate()?;
    Ok(model)
}
