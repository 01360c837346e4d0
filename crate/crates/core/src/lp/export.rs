//! Fixed-format MPS export, for replaying a program in an external solver.
//!
//! Rows are named `R<i>`, columns `C<j>`, the objective `COST`. Field
//! positions follow the classic fixed layout (columns 2-3, 5-12, 15-22,
//! 25-36, 40-47, 50-61), so names are limited to eight characters and the
//! program to 10^7 rows/columns.

use std::fmt::Write as _;

use super::{LinearProgram, Relation};

fn num(v: f64) -> String {
    let s = format!("{v:.6e}");
    if s.len() <= 12 {
        s
    } else {
        format!("{v:.4e}")
    }
}

fn entry(out: &mut String, code: &str, name: &str, row: &str, value: f64) {
    let _ = writeln!(out, " {code:<2} {name:<8}  {row:<8}  {:>12}", num(value));
}

/// Renders `lp` as fixed-format MPS text under the problem name `name`.
pub fn write_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", &name[..name.len().min(8)]);
    out.push_str("ROWS\n N  COST\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        let code = match c.relation {
            Relation::Ge => "G",
            Relation::Le => "L",
            Relation::Eq => "E",
        };
        let _ = writeln!(out, " {code:<2} R{i}");
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
    for (i, c) in lp.constraints().iter().enumerate() {
        for &(j, a) in &c.coeffs {
            cols[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    for (j, col) in cols.iter().enumerate() {
        let cname = format!("C{j}");
        let cost = lp.objective()[j];
        if cost != 0.0 {
            entry(&mut out, "", &cname, "COST", cost);
        }
        for &(i, a) in col {
            entry(&mut out, "", &cname, &format!("R{i}"), a);
        }
    }

    out.push_str("RHS\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        if c.rhs != 0.0 {
            entry(&mut out, "", "RHS", &format!("R{i}"), c.rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for (j, &(lo, hi)) in lp.bounds().iter().enumerate() {
        let cname = format!("C{j}");
        if lo == hi {
            entry(&mut out, "FX", "BND", &cname, lo);
            continue;
        }
        if lo != 0.0 {
            entry(&mut out, "LO", "BND", &cname, lo);
        }
        entry(&mut out, "UP", "BND", &cname, hi);
    }
    out.push_str("ENDATA\n");
    out
}
