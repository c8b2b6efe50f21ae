//! The subset of the CPLEX LP text format used for exported models.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::milp::{Constraint, MilpModel, Sense, VarKind, Variable};

const TERMS_PER_LINE: usize = 6;

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(usize, Rational)]) {
    for (k, (var, coef)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variables()[*var].name;
        let mag = coef.abs();
        let sign = if coef.is_negative() { "-" } else if k == 0 { "" } else { "+" };
        let sep = if sign.is_empty() { "" } else { " " };
        if mag == Rational::one() {
            let _ = write!(out, " {sign}{sep}{name}");
        } else {
            let _ = write!(out, " {sign}{sep}{mag} {name}");
        }
    }
}

/// Serializes a model: objective, constraints, explicit zero lower bounds
/// for every variable (in model order) and the integer variables.
pub fn export_milp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {} variables ({} integer), {} constraints",
        model.variables().len(),
        model.num_integer(),
        model.constraints().len()
    );
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model, model.objective());
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, model, &c.terms);
        let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        let _ = writeln!(out, " {} >= 0", v.name);
    }
    out.push_str("Generals\n");
    for v in model.variables().iter().filter(|v| v.kind == VarKind::Integer) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Generals,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "minimize" | "minimum" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(format!("LP file: {}", msg.into()))
}

/// Linear expression `[(name, coefficient)]` from whitespace tokens.
fn parse_expr(tokens: &[&str]) -> Result<Vec<(String, Rational)>> {
    let mut terms = Vec::new();
    let mut sign = Rational::one();
    let mut coef: Option<Rational> = None;
    for &tok in tokens {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Ok(v) = tok.parse::<Rational>() {
                    if coef.is_some() {
                        return Err(bad(format!("two coefficients in a row near `{tok}`")));
                    }
                    coef = Some(v);
                } else {
                    let c = coef.take().unwrap_or_else(Rational::one);
                    terms.push((tok.to_string(), sign * c));
                    sign = Rational::one();
                }
            }
        }
    }
    if coef.is_some() {
        return Err(bad("dangling coefficient"));
    }
    Ok(terms)
}

/// Reads back a file written by [`export_milp`]. Variable order is the order
/// of the `Bounds` section.
pub fn parse_lp(text: &str) -> Result<MilpModel> {
    let mut section = Section::Preamble;
    let mut objective_text = String::new();
    let mut constraint_text = String::new();
    let mut variables: Vec<Variable> = Vec::new();
    let mut integers = Vec::new();
    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(next) = section_header(line) {
            section = next;
            continue;
        }
        match section {
            Section::Preamble => return Err(bad(format!("text before the objective: `{line}`"))),
            Section::Objective => {
                objective_text.push(' ');
                objective_text.push_str(line);
            }
            Section::Constraints => {
                constraint_text.push(' ');
                constraint_text.push_str(line);
            }
            Section::Bounds => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                match parts.as_slice() {
                    [name, ">=", zero] if zero.parse::<Rational>().is_ok_and(|z| z.is_zero()) => {
                        variables.push(Variable {
                            name: name.to_string(),
                            kind: VarKind::Continuous,
                        });
                    }
                    _ => return Err(bad(format!("unsupported bound `{line}`"))),
                }
            }
            Section::Generals => integers.extend(line.split_whitespace().map(str::to_string)),
            Section::End => return Err(bad(format!("text after End: `{line}`"))),
        }
    }
    if section != Section::End {
        return Err(bad("missing End"));
    }

    let index: std::collections::HashMap<&str, usize> =
        variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let resolve = |terms: Vec<(String, Rational)>| -> Result<Vec<(usize, Rational)>> {
        terms
            .into_iter()
            .map(|(name, c)| {
                index
                    .get(name.as_str())
                    .map(|&i| (i, c))
                    .ok_or_else(|| bad(format!("variable {name} has no bound line")))
            })
            .collect()
    };
    let mut kinds = vec![VarKind::Continuous; variables.len()];
    for name in &integers {
        let i = *index
            .get(name.as_str())
            .ok_or_else(|| bad(format!("general {name} has no bound line")))?;
        kinds[i] = VarKind::Integer;
    }

    let obj_tokens: Vec<&str> = objective_text.split_whitespace().collect();
    let obj_tokens = match obj_tokens.first() {
        Some(t) if t.ends_with(':') => &obj_tokens[1..],
        _ => &obj_tokens[..],
    };
    let objective = resolve(parse_expr(obj_tokens)?)?;

    let mut constraints = Vec::new();
    let tokens: Vec<&str> = constraint_text.split_whitespace().collect();
    let mut start = 0;
    while start < tokens.len() {
        let name = tokens[start]
            .strip_suffix(':')
            .ok_or_else(|| bad(format!("expected a constraint name, found `{}`", tokens[start])))?;
        let end = tokens[start + 1..]
            .iter()
            .position(|t| t.ends_with(':'))
            .map_or(tokens.len(), |p| start + 1 + p);
        let body = &tokens[start + 1..end];
        let op = body
            .iter()
            .position(|t| matches!(*t, "<=" | "=<" | ">=" | "=>" | "="))
            .ok_or_else(|| bad(format!("constraint {name} has no relation")))?;
        let sense = match body[op] {
            "<=" | "=<" => Sense::Le,
            ">=" | "=>" => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = match &body[op + 1..] {
            [v] => v.parse::<Rational>().map_err(|_| bad(format!("bad right-hand side in {name}")))?,
            ["-", v] => -v.parse::<Rational>().map_err(|_| bad(format!("bad right-hand side in {name}")))?,
            _ => return Err(bad(format!("constraint {name} needs a constant right-hand side"))),
        };
        constraints.push(Constraint {
            name: name.to_string(),
            terms: resolve(parse_expr(&body[..op])?)?,
            sense,
            rhs,
        });
        start = end;
    }

    for (v, k) in variables.iter_mut().zip(kinds) {
        v.kind = k;
    }
    MilpModel::new(variables, objective, constraints)
}
