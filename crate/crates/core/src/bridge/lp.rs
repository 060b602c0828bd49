use std::fmt::Write as _;

use super::BridgeError;
use crate::milp::{BranchClass, MilpModel, Relation, Sense, Variable};

/// Longest name accepted by the LP format.
pub const MAX_NAME_LEN: usize = 255;
const LINE_WIDTH: usize = 100;

/// Variable names may not start with `e`/`E`, which the format reserves for
/// exponents; row labels end in `:` and are exempt.
fn check_name(name: &str, is_var: bool) -> Result<(), BridgeError> {
    let valid_start = name.chars().next().is_some_and(|c| {
        !c.is_ascii_digit() && c != '.' && !(is_var && (c == 'e' || c == 'E'))
    });
    if name.len() > MAX_NAME_LEN {
        return Err(BridgeError::NameTooLong(name.to_string()));
    }
    if !valid_start || name.chars().any(|c| c.is_whitespace() || ":<>=+-".contains(c)) {
        return Err(BridgeError::BadName(name.to_string()));
    }
    Ok(())
}

/// Appends `label: terms` wrapping at [`LINE_WIDTH`].
fn write_expr(out: &mut String, label: &str, terms: &[(i64, &str)]) {
    let mut line = format!(" {label}:");
    let mut first = true;
    for &(coef, name) in terms {
        let mut tok = String::new();
        match (first, coef < 0) {
            (true, true) => tok.push_str(" -"),
            (true, false) => {}
            (false, true) => tok.push_str(" -"),
            (false, false) => tok.push_str(" +"),
        }
        if coef.abs() != 1 {
            let _ = write!(tok, " {}", coef.abs());
        }
        let _ = write!(tok, " {name}");
        if line.len() + tok.len() > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push_str(&tok);
        first = false;
    }
    out.push_str(&line);
}

fn bound_line(v: &Variable) -> Option<String> {
    if v.is_binary() {
        return None;
    }
    let name = &v.name;
    Some(match (v.lower, v.upper) {
        (None, None) => format!(" {name} free"),
        (Some(l), Some(u)) if l == u => format!(" {name} = {l}"),
        (Some(l), Some(u)) => format!(" {l} <= {name} <= {u}"),
        (Some(0), None) => return None,
        (Some(l), None) => format!(" {name} >= {l}"),
        (None, Some(u)) => format!(" -infinity <= {name} <= {u}"),
    })
}

/// Serializes `model` in the CPLEX LP dialect. Output is deterministic.
pub fn write_lp_file(model: &MilpModel) -> Result<Vec<u8>, BridgeError> {
    for v in model.variables() {
        check_name(&v.name, true)?;
    }
    for c in model.constraints() {
        check_name(&c.name, false)?;
    }
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name());
    out.push_str(match model.sense() {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let obj: Vec<(i64, &str)> = model
        .variables()
        .iter()
        .filter(|v| v.objective != 0)
        .map(|v| (v.objective, v.name.as_str()))
        .collect();
    if obj.is_empty() {
        out.push_str(" obj:");
        if let Some(v) = model.variables().first() {
            let _ = write!(out, " 0 {}", v.name);
        }
    } else {
        write_expr(&mut out, "obj", &obj);
    }
    out.push('\n');
    if model.num_constraints() > 0 {
        out.push_str("Subject To\n");
        for c in model.constraints() {
            let terms: Vec<(i64, &str)> = c
                .terms
                .iter()
                .map(|&(k, a)| (a, model.variables()[k].name.as_str()))
                .collect();
            if terms.is_empty() {
                let first = model.variables().first().map_or("", |v| v.name.as_str());
                let _ = write!(out, " {}: 0 {first}", c.name);
            } else {
                write_expr(&mut out, &c.name, &terms);
            }
            let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
        }
    }
    let bounds: Vec<String> = model.variables().iter().filter_map(bound_line).collect();
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        for b in bounds {
            out.push_str(&b);
            out.push('\n');
        }
    }
    let names_section = |out: &mut String, title: &str, names: Vec<&str>| {
        if names.is_empty() {
            return;
        }
        out.push_str(title);
        out.push('\n');
        let mut line = String::new();
        for n in names {
            if !line.is_empty() && line.len() + n.len() + 1 > LINE_WIDTH {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(n);
        }
        out.push_str(&line);
        out.push('\n');
    };
    let binaries = model
        .variables()
        .iter()
        .filter(|v| v.is_binary())
        .map(|v| v.name.as_str())
        .collect();
    names_section(&mut out, "Binaries", binaries);
    let generals = model
        .variables()
        .iter()
        .filter(|v| v.integer && !v.is_binary())
        .map(|v| v.name.as_str())
        .collect();
    names_section(&mut out, "Generals", generals);
    out.push_str("End\n");
    Ok(out.into_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_of(line: &str) -> Option<(Section, Option<Sense>)> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "minimize" | "minimum" | "min" => (Section::Objective, Some(Sense::Minimize)),
        "maximize" | "maximum" | "max" => (Section::Objective, Some(Sense::Maximize)),
        "subject to" | "such that" | "st" | "s.t." => (Section::Constraints, None),
        "bounds" | "bound" => (Section::Bounds, None),
        "binaries" | "binary" | "bin" => (Section::Binaries, None),
        "generals" | "general" | "gen" => (Section::Generals, None),
        "end" => (Section::End, None),
        _ => return None,
    })
}

fn parse_num(tok: &str, line: usize) -> Result<i64, BridgeError> {
    tok.parse::<i64>().map_err(|_| BridgeError::Parse {
        line,
        message: format!("expected an integer, found '{tok}'"),
    })
}

fn parse_bound(tok: &str, line: usize) -> Result<Option<i64>, BridgeError> {
    match tok.to_ascii_lowercase().as_str() {
        "-inf" | "-infinity" | "+inf" | "inf" | "infinity" | "+infinity" => Ok(None),
        _ => parse_num(tok, line).map(Some),
    }
}

struct Pending {
    label: Option<String>,
    terms: Vec<(i64, String)>,
    relation: Option<Relation>,
    rhs: Option<i64>,
    line: usize,
    /// A sign or coefficient is waiting for its variable.
    dangling: bool,
}

fn dangling_error(line: usize) -> BridgeError {
    BridgeError::Parse { line, message: "sign or coefficient without a variable".into() }
}

/// Parses a linear expression stream: `[-|+] [coef] name ...`.
fn push_terms(
    p: &mut Pending,
    tokens: &[&str],
    sign: &mut i64,
    coef: &mut Option<i64>,
    line: usize,
) -> Result<(), BridgeError> {
    for &t in tokens {
        if p.relation.is_some() {
            if p.rhs.is_some() {
                return Err(BridgeError::Parse {
                    line,
                    message: format!("unexpected token '{t}' after right-hand side"),
                });
            }
            p.rhs = Some(parse_num(t, line)?);
            continue;
        }
        let relation = match t {
            "<=" | "=<" | "<" => Some(Relation::Le),
            ">=" | "=>" | ">" => Some(Relation::Ge),
            "=" => Some(Relation::Eq),
            _ => None,
        };
        if relation.is_some() {
            if p.dangling {
                return Err(dangling_error(line));
            }
            p.relation = relation;
            continue;
        }
        match t {
            "+" => p.dangling = true,
            "-" => {
                *sign = -*sign;
                p.dangling = true;
            }
            _ if t.ends_with(':') && p.label.is_none() && p.terms.is_empty() && coef.is_none() => {
                p.label = Some(t.trim_end_matches(':').to_string());
            }
            _ if t.chars().next().is_some_and(|c| c.is_ascii_digit()) => {
                *coef = Some(parse_num(t, line)?);
                p.dangling = true;
            }
            _ => {
                let c = *sign * coef.take().unwrap_or(1);
                p.terms.push((c, t.to_string()));
                *sign = 1;
                p.dangling = false;
            }
        }
    }
    Ok(())
}

/// Reads the LP dialect produced by [`write_lp_file`]: whitespace-separated
/// tokens, integer coefficients, one row may span several lines.
pub fn read_lp_file(text: &str) -> Result<MilpModel, BridgeError> {
    let mut name = String::from("lp");
    let mut sense = None;
    let mut section = Section::Preamble;
    let mut objective: Option<Pending> = None;
    let mut rows: Vec<Pending> = Vec::new();
    let mut bounds: Vec<(usize, Vec<String>)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut generals: Vec<String> = Vec::new();
    let (mut sign, mut coef) = (1i64, None);
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(rest) = raw.trim_start().strip_prefix('\\') {
            if let Some(n) = rest.trim().strip_prefix("Problem:") {
                name = n.trim().to_string();
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        if let Some((s, sn)) = section_of(raw) {
            section = s;
            if sn.is_some() {
                sense = sn;
            }
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match section {
            Section::Preamble | Section::End => {
                return Err(BridgeError::Parse {
                    line: line_no,
                    message: "content outside of a section".into(),
                })
            }
            Section::Objective => {
                let p = objective.get_or_insert(Pending {
                    label: None,
                    terms: Vec::new(),
                    relation: None,
                    rhs: None,
                    line: line_no,
                    dangling: false,
                });
                push_terms(p, &tokens, &mut sign, &mut coef, line_no)?;
            }
            Section::Constraints => {
                let starts_new = tokens[0].ends_with(':')
                    || rows.last().map_or(true, |r| r.rhs.is_some());
                if starts_new {
                    rows.push(Pending {
                        label: None,
                        terms: Vec::new(),
                        relation: None,
                        rhs: None,
                        line: line_no,
                        dangling: false,
                    });
                    sign = 1;
                    coef = None;
                }
                let p = rows.last_mut().unwrap();
                push_terms(p, &tokens, &mut sign, &mut coef, line_no)?;
            }
            Section::Bounds => bounds.push((line_no, tokens.iter().map(|s| s.to_string()).collect())),
            Section::Binaries => binaries.extend(tokens.iter().map(|s| s.to_string())),
            Section::Generals => generals.extend(tokens.iter().map(|s| s.to_string())),
        }
    }
    if let Some(p) = objective.iter().chain(rows.iter()).find(|p| p.dangling) {
        return Err(dangling_error(p.line));
    }
    if let Some(p) = objective.as_ref().filter(|p| p.relation.is_some()) {
        return Err(BridgeError::Parse { line: p.line, message: "relation in the objective".into() });
    }
    let sense = sense.ok_or(BridgeError::Parse {
        line: 1,
        message: "missing Minimize/Maximize section".into(),
    })?;

    // Variables in order of first appearance.
    let mut order: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut note = |n: &str| {
        if seen.insert(n.to_string()) {
            order.push(n.to_string());
        }
    };
    for p in objective.iter().chain(rows.iter()) {
        for (_, n) in &p.terms {
            note(n);
        }
    }
    for (_, toks) in &bounds {
        for t in toks {
            let numeric = parse_bound(t, 0).is_ok();
            if !numeric && !["<=", ">=", "=", "free", "<", ">", "=<", "=>"].contains(&t.as_str()) {
                note(t);
            }
        }
    }
    for n in binaries.iter().chain(generals.iter()) {
        note(n);
    }

    let mut model = MilpModel::new(name, sense);
    let obj: std::collections::HashMap<&str, i64> = objective
        .as_ref()
        .map(|p| p.terms.iter().map(|(c, n)| (n.as_str(), *c)).collect())
        .unwrap_or_default();
    for n in &order {
        let binary = binaries.contains(n);
        let integer = binary || generals.contains(n);
        let upper = if binary { Some(1) } else { None };
        model.add_var(
            n.clone(),
            Some(0),
            upper,
            integer,
            obj.get(n.as_str()).copied().unwrap_or(0),
            BranchClass::Other,
        )?;
    }
    for (line, toks) in &bounds {
        let line = *line;
        let t: Vec<&str> = toks.iter().map(|s| s.as_str()).collect();
        let (var, lo, hi) = match t.as_slice() {
            [v, "free"] => (*v, None, None),
            [v, "=", x] => {
                let x = parse_num(x, line)?;
                (*v, Some(Some(x)), Some(Some(x)))
            }
            [l, "<=", v, "<=", u] => (*v, Some(parse_bound(l, line)?), Some(parse_bound(u, line)?)),
            [v, ">=", l] => (*v, Some(parse_bound(l, line)?), None),
            [v, "<=", u] => (*v, None, Some(parse_bound(u, line)?)),
            _ => {
                return Err(BridgeError::Parse {
                    line,
                    message: format!("unsupported bound '{}'", toks.join(" ")),
                })
            }
        };
        let k = model.var_index(var).expect("noted above");
        let v = &mut model.variables[k];
        match (lo, hi) {
            (None, None) => {
                v.lower = None;
                v.upper = None;
            }
            (lo, hi) => {
                if let Some(l) = lo {
                    v.lower = l;
                }
                if let Some(u) = hi {
                    v.upper = u;
                }
            }
        }
    }
    for p in rows {
        let label = p.label.ok_or(BridgeError::Parse {
            line: p.line,
            message: "unnamed row".into(),
        })?;
        let (Some(relation), Some(rhs)) = (p.relation, p.rhs) else {
            return Err(BridgeError::Parse {
                line: p.line,
                message: format!("row {label} lacks a relation or right-hand side"),
            });
        };
        let terms: Vec<(usize, i64)> = p
            .terms
            .iter()
            .map(|(c, n)| (model.var_index(n).expect("noted above"), *c))
            .collect();
        model.add_constraint(label, terms, relation, rhs)?;
    }
    model.check_well_formed()?;
    Ok(model)
}
