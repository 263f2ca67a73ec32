//! Free-format MPS dump of a [`MilpModel`].
//!
//! Layout written by [`write_mps`]:
//!
//! ```text
//! NAME <model>
//! ROWS
//!  N  OBJ
//!  L  <row>            one line per row, L / G / E by sense
//! COLUMNS
//!     MARKER 'MARKER' 'INTORG'   around binary columns
//!     <var> OBJ <c>              objective entry, only when nonzero
//!     <var> <row> <a>            one line per nonzero
//! RHS
//!     RHS <row> <b>              only nonzero right-hand sides
//!     RHS OBJ <-constant>        objective constant, negated
//! BOUNDS
//!  BV BND <var>                  binary
//!  FX / FR / MI / LO / UP BND <var> [<value>]
//! ENDATA
//! ```
//!
//! Columns without bound lines default to `[0, +inf)`. Numbers use the
//! shortest representation that parses back to the same `f64`. Names must
//! not contain whitespace.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{LpError, MilpModel, Sense, VarId, VarKind};

const OBJ_ROW: &str = "OBJ";

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("name `{0}` contains whitespace and cannot be written as free MPS")]
    BadName(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] LpError),
}

fn check_name(name: &str) -> Result<(), MpsError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) || name == OBJ_ROW {
        return Err(MpsError::BadName(name.to_string()));
    }
    Ok(())
}

pub fn write_mps(model: &MilpModel) -> Result<String, MpsError> {
    let mut out = String::new();
    let model_name = if model.name().is_empty() {
        "MODEL"
    } else {
        model.name()
    };
    check_name(model_name)?;
    let _ = writeln!(out, "NAME {model_name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for row in model.rows() {
        check_name(&row.name)?;
        let tag = match row.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {tag}  {}", row.name);
    }

    // column-major view of the rows
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (r, row) in model.rows().iter().enumerate() {
        for &(v, a) in &row.terms {
            columns[v.0].push((r, a));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for def in model.variables() {
        check_name(&def.name)?;
        let is_bin = def.kind == VarKind::Binary;
        if is_bin != in_int {
            let tag = if is_bin { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    M{marker} 'MARKER' '{tag}'");
            marker += 1;
            in_int = is_bin;
        }
        let c = model.objective()[def.id.0];
        // empty columns still need one line so the variable is declared
        if c != 0.0 || columns[def.id.0].is_empty() {
            let _ = writeln!(out, "    {} {OBJ_ROW} {c:?}", def.name);
        }
        for &(r, a) in &columns[def.id.0] {
            let _ = writeln!(out, "    {} {} {a:?}", def.name, model.rows()[r].name);
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker} 'MARKER' 'INTEND'");
    }

    out.push_str("RHS\n");
    for row in model.rows() {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    RHS {} {:?}", row.name, row.rhs);
        }
    }
    if model.objective_constant() != 0.0 {
        let _ = writeln!(out, "    RHS {OBJ_ROW} {:?}", -model.objective_constant());
    }

    out.push_str("BOUNDS\n");
    for def in model.variables() {
        let n = &def.name;
        if def.kind == VarKind::Binary && def.lower == 0.0 && def.upper == 1.0 {
            let _ = writeln!(out, " BV BND {n}");
            continue;
        }
        let (lo, up) = (def.lower, def.upper);
        if lo == up {
            let _ = writeln!(out, " FX BND {n} {lo:?}");
        } else if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            let _ = writeln!(out, " FR BND {n}");
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(out, " MI BND {n}");
            } else if lo != 0.0 || def.kind == VarKind::Binary {
                let _ = writeln!(out, " LO BND {n} {lo:?}");
            }
            if up != f64::INFINITY {
                let _ = writeln!(out, " UP BND {n} {up:?}");
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

#[derive(PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

/// Reads the free-format subset produced by [`write_mps`].
pub fn read_mps(text: &str) -> Result<MilpModel, MpsError> {
    let err = |line: usize, msg: String| MpsError::Parse { line, msg };
    let mut model = MilpModel::new("");
    let mut section = Section::None;
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_terms: Vec<Vec<(VarId, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut obj: Vec<(VarId, f64)> = Vec::new();
    let mut obj_const = 0.0;
    let mut in_int = false;
    let mut kinds: Vec<VarKind> = Vec::new();
    let mut bounds: Vec<(f64, f64)> = Vec::new();
    let mut var_index: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();

    let parse_num = |line: usize, s: &str| -> Result<f64, MpsError> {
        s.parse::<f64>()
            .map_err(|e| err(line, format!("bad number `{s}`: {e}")))
    };

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            match fields[0] {
                "NAME" => model = MilpModel::new(fields.get(1).copied().unwrap_or("")),
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "BOUNDS" => section = Section::Bounds,
                "ENDATA" => break,
                other => return Err(err(line_no, format!("unknown section `{other}`"))),
            }
            continue;
        }
        match section {
            Section::Rows => {
                let [tag, name] = fields[..] else {
                    return Err(err(line_no, "expected `<type> <name>`".into()));
                };
                let sense = match tag {
                    "N" => continue,
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(err(line_no, format!("unknown row type `{tag}`"))),
                };
                row_index.insert(name.to_string(), rows.len());
                rows.push((name.to_string(), sense));
                row_terms.push(Vec::new());
                rhs.push(0.0);
            }
            Section::Columns => {
                if fields.len() == 3 && fields[1] == "'MARKER'" {
                    in_int = fields[2] == "'INTORG'";
                    continue;
                }
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(line_no, "expected `<col> <row> <value> ...`".into()));
                }
                let col = fields[0];
                let j = match var_index.get(col) {
                    Some(&j) => j,
                    None => {
                        let j = names.len();
                        var_index.insert(col.to_string(), j);
                        names.push(col.to_string());
                        kinds.push(if in_int {
                            VarKind::Binary
                        } else {
                            VarKind::Continuous
                        });
                        bounds.push((0.0, f64::INFINITY));
                        j
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(line_no, pair[1])?;
                    if pair[0] == OBJ_ROW {
                        obj.push((VarId(j), value));
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(line_no, format!("unknown row `{}`", pair[0])))?;
                        row_terms[r].push((VarId(j), value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() < 3 {
                    return Err(err(line_no, "expected `<set> <row> <value>`".into()));
                }
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(line_no, pair[1])?;
                    if pair[0] == OBJ_ROW {
                        obj_const = -value;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(line_no, format!("unknown row `{}`", pair[0])))?;
                        rhs[r] = value;
                    }
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err(line_no, "expected `<type> <set> <col> [value]`".into()));
                }
                let j = *var_index
                    .get(fields[2])
                    .ok_or_else(|| err(line_no, format!("unknown column `{}`", fields[2])))?;
                let value = match fields.get(3) {
                    Some(s) => Some(parse_num(line_no, s)?),
                    None => None,
                };
                let need = |v: Option<f64>| v.ok_or_else(|| err(line_no, "missing bound value".into()));
                let b = &mut bounds[j];
                match fields[0] {
                    "BV" => {
                        kinds[j] = VarKind::Binary;
                        *b = (0.0, 1.0);
                    }
                    "FX" => {
                        let v = need(value)?;
                        *b = (v, v);
                    }
                    "FR" => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = f64::INFINITY,
                    "LO" => b.0 = need(value)?,
                    "UP" => b.1 = need(value)?,
                    other => return Err(err(line_no, format!("unknown bound type `{other}`"))),
                }
            }
            Section::None => return Err(err(line_no, "data before first section".into())),
        }
    }

    for j in 0..names.len() {
        let (lo, up) = bounds[j];
        let (lo, up) = if kinds[j] == VarKind::Binary && up == f64::INFINITY {
            (lo, 1.0)
        } else {
            (lo, up)
        };
        model.add_variable(names[j].clone(), lo, up, kinds[j])?;
    }
    for (r, (name, sense)) in rows.into_iter().enumerate() {
        model.add_constraint(name, std::mem::take(&mut row_terms[r]), sense, rhs[r])?;
    }
    for (v, c) in obj {
        model.add_objective_term(v, c)?;
    }
    model.set_objective_constant(obj_const);
    Ok(model)
}
