//! CPLEX LP text output.

use std::io::Write;

use num_rational::Rational64;

use super::{FormulationError, IlpModel, Sense};

const TERMS_PER_LINE: usize = 8;

fn number(x: Rational64) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}", *x.numer() as f64 / *x.denom() as f64)
    }
}

fn term(first: bool, coef: Rational64, name: &str) -> String {
    let neg = coef < 0.into();
    let mag = if neg { -coef } else { coef };
    let sign = match (first, neg) {
        (true, false) => "",
        (true, true) => "- ",
        (false, false) => "+ ",
        (false, true) => "- ",
    };
    if mag == 1.into() {
        format!("{sign}{name}")
    } else {
        format!("{sign}{} {name}", number(mag))
    }
}

/// Writes `model` in CPLEX LP format. The leading comment records the instance hash,
/// `t_max`, `ε` and that time indices start at 0.
pub fn export_lp<W: Write>(model: &IlpModel, mut sink: W) -> Result<(), FormulationError> {
    let names: Vec<String> = model.vars.iter().map(|v| v.to_string()).collect();
    let mut out = String::new();
    out.push_str(&format!(
        "\\ dwsched model instance={} t_max={} epsilon={} big_m={} time_index=0-based\n",
        model.instance_hash,
        model.t_max,
        model.epsilon,
        model.big_m
    ));
    out.push_str("Minimize\n obj: CMAX\nSubject To\n");
    for row in &model.rows {
        out.push_str(&format!(" {}:", row.name));
        if row.terms.is_empty() {
            out.push_str(" 0 CMAX");
        }
        for (k, &(col, coef)) in row.terms.iter().enumerate() {
            if k > 0 && k % TERMS_PER_LINE == 0 {
                out.push_str("\n   ");
            }
            out.push(' ');
            out.push_str(&term(k == 0, coef, &names[col]));
        }
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        out.push_str(&format!(" {op} {}\n", number(row.rhs)));
    }
    out.push_str(&format!("Bounds\n 0 <= CMAX <= {}\nGeneral\n CMAX\nBinary\n", model.t_max));
    let binaries: Vec<&String> = model
        .vars
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.is_binary())
        .map(|(_, n)| n)
        .collect();
    for chunk in binaries.chunks(TERMS_PER_LINE) {
        out.push(' ');
        out.push_str(&chunk.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    sink.write_all(out.as_bytes())?;
    Ok(())
}
