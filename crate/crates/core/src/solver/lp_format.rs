use std::fmt::Write;

use super::{ColumnKind, MixedProgram, ObjectiveSense, RowSense};

/// Writes the program in CPLEX LP text format, for cross-checking with
/// external solvers. Identifiers are sanitized to the LP character set.
pub fn to_lp_format(program: &MixedProgram) -> String {
    let names: Vec<String> = program.columns.iter().enumerate().map(|(j, c)| sanitize(&c.name, 'x', j)).collect();
    let mut out = String::new();
    out.push_str(match program.sense {
        ObjectiveSense::Maximize => "Maximize\n",
        ObjectiveSense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, &program.objective, &names);
    if program.objective_offset != 0.0 {
        // LP format has no native constant; it is recorded as a comment.
        let _ = write!(out, "\n\\ objective offset {}", program.objective_offset);
    }
    out.push_str("\nSubject To\n");
    for (i, row) in program.rows.iter().enumerate() {
        let _ = write!(out, " {}:", sanitize(&row.name, 'r', i));
        write_terms(&mut out, &row.coefficients, &names);
        let sense = match row.sense {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        };
        let _ = writeln!(out, " {sense} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (col, name) in program.columns.iter().zip(&names) {
        let lower = if col.lower == f64::NEG_INFINITY { "-inf".to_string() } else { col.lower.to_string() };
        let upper = if col.upper == f64::INFINITY { "+inf".to_string() } else { col.upper.to_string() };
        let _ = writeln!(out, " {lower} <= {name} <= {upper}");
    }
    let binaries: Vec<&String> = program
        .columns
        .iter()
        .zip(&names)
        .filter(|(c, _)| c.kind == ColumnKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for &(j, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), names[j]);
    }
}

fn sanitize(name: &str, prefix: char, index: usize) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.".contains(c) { c } else { '_' })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        format!("{prefix}{index}_{cleaned}")
    } else {
        cleaned
    }
}
