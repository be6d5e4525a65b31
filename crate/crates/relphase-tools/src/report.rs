//! JSON documents and aligned text tables for reports.

use std::collections::{BTreeMap, BTreeSet};

use relphase::constructions::{ConstructionSpec, PhaseRule};
use relphase::verify::{lowered, LedgerRow, VerificationReport};
use serde_json::{json, Value};

pub const SCHEMA: u64 = 1;

fn bits(x: usize, n: usize) -> String {
    (0..n).map(|q| if x >> (n - 1 - q) & 1 == 1 { '1' } else { '0' }).collect()
}

fn set_text(s: &BTreeSet<u64>) -> String {
    let parts: Vec<String> = s.iter().map(u64::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn qubits_text(s: &BTreeSet<usize>) -> String {
    let parts: Vec<String> = s.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn params_text(k: Option<usize>, m: Option<usize>, variant: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(k) = k {
        s.push_str(&format!(" k={}", k));
    }
    if let Some(m) = m {
        s.push_str(&format!(" m={}", m));
    }
    if let Some(v) = variant {
        s.push_str(&format!(" [{}]", v));
    }
    s
}

/// Sidecar describing a synthesized construction; the circuit itself is
/// embedded in the text format.
pub fn spec_json(spec: &ConstructionSpec) -> Value {
    let phase = match &spec.target.phase {
        PhaseRule::Exact => json!("exact"),
        PhaseRule::Relative { support, .. } => json!({ "relative": support }),
    };
    json!({
        "schema": SCHEMA,
        "name": spec.name,
        "k": spec.k,
        "m": spec.m,
        "variant": spec.variant,
        "formula": {
            "text": spec.formula.text,
            "values": spec.formula.values,
            "asserted": spec.formula.asserted,
        },
        "phase_support": phase,
        "validity": spec.validity,
        "t_count": lowered(&spec.circuit).t_count().values(),
        "circuit": spec.circuit.to_text(),
    })
}

fn phases_json(phases: &BTreeMap<usize, u8>, n: usize) -> Value {
    let m: serde_json::Map<String, Value> =
        phases.iter().filter(|(_, &p)| p != 0).map(|(&x, &p)| (bits(x, n), json!(p))).collect();
    Value::Object(m)
}

/// JSON for one verification report. `n_bits` is the width used to label
/// basis inputs in the phase table.
pub fn verification_json(r: &VerificationReport, n_bits: usize) -> Value {
    json!({
        "name": r.name,
        "k": r.k,
        "m": r.m,
        "variant": r.variant,
        "passed": r.passed(),
        "semantics_ok": r.semantics_ok,
        "trace_preserving": r.trace_preserving,
        "tcount_ok": r.tcount_ok(),
        "measured_tcounts": r.measured_tcounts,
        "formula_tcounts": r.formula_tcounts,
        "formula": r.formula_text,
        "formula_asserted": r.formula_asserted,
        "phase_support_found": r.phase_support_found,
        "phase_support_declared": r.phase_support_declared,
        "phases": r.phases.as_ref().map(|p| phases_json(p, n_bits)),
        "diagnostic": r.diagnostic,
    })
}

pub fn verifications_json(rs: &[(VerificationReport, usize)]) -> Value {
    json!({
        "schema": SCHEMA,
        "passed": rs.iter().all(|(r, _)| r.passed()),
        "reports": rs.iter().map(|(r, n)| verification_json(r, *n)).collect::<Vec<_>>(),
    })
}

/// One human-readable line per report.
pub fn verification_line(r: &VerificationReport) -> String {
    let mut s = format!("{}{}: ", r.name, params_text(r.k, r.m, r.variant.as_deref()));
    s.push_str(if r.semantics_ok { "semantics ok" } else { "semantics FAILED" });
    s.push_str(&format!(", T-count {}", set_text(&r.measured_tcounts)));
    if r.formula_asserted {
        let verdict = if r.tcount_ok() { "match" } else { "MISMATCH" };
        s.push_str(&format!(" vs {} = {} ({})", r.formula_text, set_text(&r.formula_tcounts), verdict));
    } else {
        s.push_str(&format!(" ({} = {}, not asserted)", r.formula_text, set_text(&r.formula_tcounts)));
    }
    if let (Some(found), Some(declared)) = (&r.phase_support_found, &r.phase_support_declared) {
        s.push_str(&format!(", phase support {} within {}", qubits_text(found), qubits_text(declared)));
    }
    if let Some(d) = &r.diagnostic {
        s.push_str(&format!("; {}", d));
    }
    s
}

fn ledger_row_json(r: &LedgerRow) -> Value {
    json!({
        "gate": r.gate,
        "ancilla": r.ancilla,
        "construction": r.construction,
        "variant": r.variant,
        "k": r.k,
        "m": r.m,
        "formula_text": r.formula_text,
        "formula": r.formula,
        "measured": r.measured,
        "validity": r.validity,
        "reference_only": r.reference_only,
        "match": r.matches(),
    })
}

pub fn ledger_json(rows: &[LedgerRow], k_max: usize) -> Value {
    json!({
        "schema": SCHEMA,
        "kmax": k_max,
        "all_match": ledger_all_match(rows),
        "rows": rows.iter().map(ledger_row_json).collect::<Vec<_>>(),
    })
}

/// True when every row with a measurement equals its formula.
pub fn ledger_all_match(rows: &[LedgerRow]) -> bool {
    rows.iter().all(|r| r.matches() != Some(false))
}

/// Render rows as an aligned table with a header line.
pub fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{:<w$}", c, w = w)).collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
        out.push('\n');
    }
    out
}

pub fn ledger_table(rows: &[LedgerRow]) -> String {
    let header = ["gate", "ancilla", "construction", "k", "m", "formula", "expected", "measured", "valid for", "match"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let construction = match &r.variant {
                Some(v) => format!("{} [{}]", r.construction, v),
                None => r.construction.clone(),
            };
            vec![
                r.gate.clone(),
                r.ancilla.clone(),
                construction,
                r.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                r.m.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
                r.formula_text.clone(),
                set_text(&r.formula),
                r.measured.as_ref().map(set_text).unwrap_or_else(|| "reference only".into()),
                r.validity.clone(),
                match r.matches() {
                    Some(true) => "yes".into(),
                    Some(false) => "NO".into(),
                    None => "-".into(),
                },
            ]
        })
        .collect();
    aligned(&header, &cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_labels_put_qubit_zero_first() {
        assert_eq!(bits(6, 3), "110");
        assert_eq!(bits(1, 4), "0001");
    }

    #[test]
    fn table_columns_line_up() {
        let t = aligned(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\n---  --\nxyz  1\n");
    }
}
