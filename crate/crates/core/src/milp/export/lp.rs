//! CPLEX-style LP text format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::num;
use crate::error::{Error, Result};
use crate::milp::model::{MilpModel, Sense, VarKind};

const WIDTH: usize = 78;

/// Renders `model` as LP text. Deterministic for a given model.
pub fn write_lp(model: &MilpModel) -> Result<String> {
    model.validate()?;
    let names: Vec<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str(if model.maximize { "Maximize\n" } else { "Minimize\n" });
    let mut obj = model.objective.clone();
    if obj.is_empty() && !names.is_empty() {
        obj.push((0, 0.0));
    }
    wrap(&mut out, "obj:", &terms(&obj, &names), None);
    out.push_str("Subject To\n");
    for c in &model.constraints {
        let mut t = terms(&c.coeffs, &names);
        if t.is_empty() && !names.is_empty() {
            t = terms(&[(0, 0.0)], &names);
        }
        let tail = format!("{} {}", c.sense.symbol(), num(c.rhs));
        wrap(&mut out, &format!("{}:", c.name), &t, Some(&tail));
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        let line = match (v.lower, v.upper) {
            (l, None) if l == f64::NEG_INFINITY => format!(" {} free", v.name),
            (l, None) => format!(" {} >= {}", v.name, num(l)),
            (l, Some(u)) if l == f64::NEG_INFINITY => format!(" -inf <= {} <= {}", v.name, num(u)),
            (l, Some(u)) => format!(" {} <= {} <= {}", num(l), v.name, num(u)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    for (title, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let cols: Vec<String> = model
            .variables
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.clone())
            .collect();
        if !cols.is_empty() {
            out.push_str(title);
            out.push('\n');
            wrap(&mut out, "", &cols, None);
        }
    }
    out.push_str("End\n");
    Ok(out)
}

fn terms(coeffs: &[(usize, f64)], names: &[&str]) -> Vec<String> {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &(j, c))| {
            let sign = if c < 0.0 || (c == 0.0 && c.is_sign_negative()) { "-" } else { "+" };
            let mag = c.abs();
            let body = if mag == 1.0 {
                names[j].to_string()
            } else {
                format!("{} {}", num(mag), names[j])
            };
            if k == 0 && sign == "+" {
                body
            } else {
                format!("{sign} {body}")
            }
        })
        .collect()
}

/// Appends ` head item item ... tail`, breaking lines before `WIDTH`.
fn wrap(out: &mut String, head: &str, items: &[String], tail: Option<&str>) {
    let mut line = format!(" {head}");
    for item in items.iter().map(String::as_str).chain(tail) {
        if line.len() + 1 + item.len() > WIDTH && !line.trim().is_empty() {
            out.push_str(&line);
            out.push('\n');
            line = String::from("  ");
        }
        if !line.trim().is_empty() || head.is_empty() {
            line.push(' ');
        }
        line.push_str(item);
    }
    out.push_str(&line);
    out.push('\n');
}

/// Reads an LP file.
pub fn read_lp(path: &Path) -> Result<MilpModel> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, path)
}

/// Parses LP text. Columns come back in the order of the `Bounds` section,
/// followed by any column that only appears elsewhere.
pub fn parse_lp(text: &str) -> Result<MilpModel> {
    parse(text, Path::new("<lp>"))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Rel(Sense),
    Plus,
    Minus,
    Colon,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" | "minimize" | "minimise" | "minimum" | "min" => {
            Section::Objective
        }
        "subject to" | "such that" | "st" | "s.t." => Section::Rows,
        "bounds" | "bound" => Section::Bounds,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "generals" | "general" | "gen" => Section::Generals,
        "end" => Section::End,
        _ => return None,
    })
}

struct Parser<'a> {
    path: &'a Path,
    order: Vec<String>,
    index: HashMap<String, usize>,
}

impl Parser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: PathBuf::from(self.path),
            line,
            message: message.into(),
        }
    }

    fn col(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.order.push(name.to_string());
        self.index.insert(name.to_string(), self.order.len() - 1);
        self.order.len() - 1
    }

    fn lex(&self, line: &str, no: usize) -> Result<Vec<Tok>> {
        let b = line.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < b.len() {
            let c = b[i] as char;
            match c {
                ' ' | '\t' | '\r' => i += 1,
                '+' => {
                    out.push(Tok::Plus);
                    i += 1;
                }
                '-' => {
                    out.push(Tok::Minus);
                    i += 1;
                }
                ':' => {
                    out.push(Tok::Colon);
                    i += 1;
                }
                '<' | '>' | '=' => {
                    let two = line.get(i..i + 2).unwrap_or("");
                    let (sense, len) = match two {
                        "<=" | "=<" => (Sense::Le, 2),
                        ">=" | "=>" => (Sense::Ge, 2),
                        _ => match c {
                            '<' => (Sense::Le, 1),
                            '>' => (Sense::Ge, 1),
                            _ => (Sense::Eq, 1),
                        },
                    };
                    out.push(Tok::Rel(sense));
                    i += len;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < b.len() {
                        let d = b[i] as char;
                        let exp_sign = (d == '+' || d == '-') && matches!(b[i - 1], b'e' | b'E');
                        if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    let s = &line[start..i];
                    let v = s.parse().map_err(|_| self.err(no, format!("bad number `{s}`")))?;
                    out.push(Tok::Num(v));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < b.len() && (b[i].is_ascii_alphanumeric() || matches!(b[i], b'_' | b'.' | b'[' | b']')) {
                        i += 1;
                    }
                    let s = &line[start..i];
                    match s.to_ascii_lowercase().as_str() {
                        "inf" | "infinity" => out.push(Tok::Num(f64::INFINITY)),
                        _ => out.push(Tok::Ident(s.to_string())),
                    }
                }
                _ => return Err(self.err(no, format!("unexpected character `{c}`"))),
            }
        }
        Ok(out)
    }

    /// Linear terms up to the first relation or the end of the tokens.
    fn expr(&mut self, toks: &[(Tok, usize)], mut k: usize) -> Result<(Vec<(usize, f64)>, usize)> {
        let mut out = Vec::new();
        while k < toks.len() && !matches!(toks[k].0, Tok::Rel(_)) {
            let line = toks[k].1;
            let mut sign = 1.0;
            while let Some((Tok::Plus | Tok::Minus, _)) = toks.get(k) {
                if toks[k].0 == Tok::Minus {
                    sign = -sign;
                }
                k += 1;
            }
            let mut coef = 1.0;
            if let Some((Tok::Num(v), _)) = toks.get(k) {
                coef = *v;
                k += 1;
            }
            match toks.get(k) {
                Some((Tok::Ident(name), _)) => {
                    let j = self.col(name);
                    out.push((j, sign * coef));
                    k += 1;
                }
                _ => return Err(self.err(line, "expected a variable name")),
            }
        }
        Ok((out, k))
    }

    fn signed(&self, toks: &[(Tok, usize)], k: &mut usize, line: usize) -> Result<f64> {
        let mut sign = 1.0;
        while let Some((Tok::Plus | Tok::Minus, _)) = toks.get(*k) {
            if toks[*k].0 == Tok::Minus {
                sign = -sign;
            }
            *k += 1;
        }
        match toks.get(*k) {
            Some((Tok::Num(v), _)) => {
                *k += 1;
                Ok(sign * v)
            }
            _ => Err(self.err(line, "expected a number")),
        }
    }
}

struct Row {
    name: String,
    coeffs: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
}

fn parse(text: &str, path: &Path) -> Result<MilpModel> {
    let mut p = Parser {
        path,
        order: Vec::new(),
        index: HashMap::new(),
    };
    let mut name = String::from("model");
    let mut maximize = None;
    let mut obj_toks: Vec<(Tok, usize)> = Vec::new();
    let mut row_toks: Vec<(Tok, usize)> = Vec::new();
    let mut bounds: Vec<(Vec<Tok>, usize)> = Vec::new();
    let mut binaries = Vec::new();
    let mut generals = Vec::new();
    let mut sec = Section::Preamble;

    for (no, raw) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        if sec == Section::Preamble {
            if let Some(rest) = raw.trim().strip_prefix('\\') {
                if name == "model" && !rest.trim().is_empty() {
                    name = rest.trim().to_string();
                }
                continue;
            }
        }
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section(line) {
            if s == Section::Objective {
                maximize = Some(line.trim().to_ascii_lowercase().starts_with("max"));
            }
            sec = s;
            continue;
        }
        match sec {
            Section::Preamble => return Err(p.err(no, "expected an objective sense")),
            Section::Objective => obj_toks.extend(p.lex(line, no)?.into_iter().map(|t| (t, no))),
            Section::Rows => row_toks.extend(p.lex(line, no)?.into_iter().map(|t| (t, no))),
            Section::Bounds => bounds.push((p.lex(line, no)?, no)),
            Section::Binaries => binaries.extend(line.split_whitespace().map(|s| (s.to_string(), no))),
            Section::Generals => generals.extend(line.split_whitespace().map(|s| (s.to_string(), no))),
            Section::End => return Err(p.err(no, "text after End")),
        }
    }
    let Some(maximize) = maximize else {
        return Err(p.err(0, "missing objective section"));
    };
    if sec != Section::End {
        return Err(p.err(text.lines().count(), "missing End"));
    }

    // Bounds first so their order fixes the column order.
    let mut bound_of: HashMap<usize, (f64, Option<f64>)> = HashMap::new();
    for (toks, no) in &bounds {
        let (j, lo, hi) = parse_bound(&mut p, toks, *no)?;
        let entry = bound_of.entry(j).or_insert((0.0, None));
        if let Some(lo) = lo {
            entry.0 = lo;
        }
        if let Some(hi) = hi {
            entry.1 = if hi == f64::INFINITY { None } else { Some(hi) };
        }
    }

    let mut k = 0;
    if let (Some((Tok::Ident(_), _)), Some((Tok::Colon, _))) = (obj_toks.first(), obj_toks.get(1)) {
        k = 2;
    }
    let (objective, end) = p.expr(&obj_toks, k)?;
    if end != obj_toks.len() {
        return Err(p.err(obj_toks[end].1, "relation in objective"));
    }

    let mut rows = Vec::new();
    let mut k = 0;
    while k < row_toks.len() {
        let line = row_toks[k].1;
        let mut row_name = format!("R{}", rows.len() + 1);
        if let (Some((Tok::Ident(n), _)), Some((Tok::Colon, _))) = (row_toks.get(k), row_toks.get(k + 1)) {
            row_name = n.clone();
            k += 2;
        }
        let (coeffs, next) = p.expr(&row_toks, k)?;
        k = next;
        let Some((Tok::Rel(sense), _)) = row_toks.get(k) else {
            return Err(p.err(line, format!("row `{row_name}` has no relation")));
        };
        let sense = *sense;
        k += 1;
        let rhs = p.signed(&row_toks, &mut k, line)?;
        rows.push(Row {
            name: row_name,
            coeffs,
            sense,
            rhs,
        });
    }

    let mut kinds: HashMap<usize, VarKind> = HashMap::new();
    for (list, kind) in [(&binaries, VarKind::Binary), (&generals, VarKind::Integer)] {
        for (n, _) in list {
            let j = p.col(n);
            kinds.insert(j, kind);
        }
    }

    let mut model = MilpModel::new(name, maximize);
    for (j, col) in p.order.iter().enumerate() {
        let kind = kinds.get(&j).copied().unwrap_or(VarKind::Continuous);
        let (lo, hi) = match (bound_of.get(&j), kind) {
            (Some(&b), _) => b,
            (None, VarKind::Binary) => (0.0, Some(1.0)),
            (None, _) => (0.0, None),
        };
        model.add_var(col.clone(), kind, lo, hi);
    }
    model.objective = objective;
    for r in rows {
        model.add_constraint(r.name, None, r.coeffs, r.sense, r.rhs);
    }
    model.validate()?;
    Ok(model)
}

/// One `Bounds` line: `x free`, `x op v`, `v op x` or `v op x op v`.
fn parse_bound(p: &mut Parser<'_>, toks: &[Tok], no: usize) -> Result<(usize, Option<f64>, Option<f64>)> {
    let toks: Vec<(Tok, usize)> = toks.iter().cloned().map(|t| (t, no)).collect();
    let bad = |p: &Parser<'_>| p.err(no, "malformed bound");
    if let [(Tok::Ident(n), _), (Tok::Ident(f), _)] = toks.as_slice() {
        if f.eq_ignore_ascii_case("free") {
            return Ok((p.col(n), Some(f64::NEG_INFINITY), Some(f64::INFINITY)));
        }
        return Err(bad(p));
    }
    let mut k = 0;
    let first_num = if matches!(toks.first(), Some((Tok::Ident(_), _))) {
        None
    } else {
        Some(p.signed(&toks, &mut k, no)?)
    };
    let mut lo = None;
    let mut hi = None;
    if let Some(v) = first_num {
        let Some((Tok::Rel(s), _)) = toks.get(k) else { return Err(bad(p)) };
        match s {
            Sense::Le => lo = Some(v),
            Sense::Ge => hi = Some(v),
            Sense::Eq => (lo, hi) = (Some(v), Some(v)),
        }
        k += 1;
    }
    let Some((Tok::Ident(n), _)) = toks.get(k) else { return Err(bad(p)) };
    let j = p.col(n);
    k += 1;
    if k < toks.len() {
        let Some((Tok::Rel(s), _)) = toks.get(k) else { return Err(bad(p)) };
        let s = *s;
        k += 1;
        let v = p.signed(&toks, &mut k, no)?;
        match s {
            Sense::Le => hi = Some(v),
            Sense::Ge => lo = Some(v),
            Sense::Eq => (lo, hi) = (Some(v), Some(v)),
        }
    }
    if k != toks.len() {
        return Err(bad(p));
    }
    Ok((j, lo, hi))
}
