//! Entrywise comparison of two reports.

use std::fmt::Write as _;

use cellhom::{Error, Result};

use crate::config::VerifyConfig;
use crate::report::Report;

/// Entries below this fraction of their tensor's largest reference entry
/// are compared against that floor instead of their own magnitude.
pub const RELATIVE_FLOOR: f64 = 1e-3;
/// Floor for tensors whose reference vanishes, in report units.
pub const ABSOLUTE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EntryDiff {
    pub tensor: String,
    pub row: usize,
    pub col: usize,
    pub value: f64,
    pub reference: f64,
    /// `|value − reference| / max(|reference|, floor)`
    pub error: f64,
    pub tolerance: f64,
}

impl EntryDiff {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }

    pub fn label(&self) -> String {
        format!("{}[{}][{}]", self.tensor, self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub entries: Vec<EntryDiff>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(EntryDiff::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EntryDiff> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn max_error(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.error))
    }

    /// Entries sorted by `error / tolerance`, largest first.
    pub fn worst(&self, n: usize) -> Vec<&EntryDiff> {
        let mut v: Vec<&EntryDiff> = self.entries.iter().collect();
        v.sort_by(|a, b| (b.error / b.tolerance).total_cmp(&(a.error / a.tolerance)));
        v.truncate(n);
        v
    }

    pub fn table(&self, n: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:>16} {:>16} {:>11} {:>9}", "entry", "value", "reference", "rel. error", "tol");
        for e in self.worst(n) {
            let _ = writeln!(
                s,
                "{:<28} {:>16.8e} {:>16.8e} {:>11.3e} {:>9.1e}{}",
                e.label(),
                e.value,
                e.reference,
                e.error,
                e.tolerance,
                if e.passed() { "" } else { "  FAIL" }
            );
        }
        let _ = writeln!(
            s,
            "{} entries, {} failed, max relative error {:.3e}",
            self.entries.len(),
            self.failures().count(),
            self.max_error()
        );
        s
    }
}

pub fn compare(report: &Report, reference: &Report, tolerances: &VerifyConfig) -> Result<Verification> {
    let (Some(p), Some(r)) = (&report.parameters, &reference.parameters) else {
        return Err(Error::Verify("both reports must contain parameters".into()));
    };
    let ours = p.tensors();
    let theirs = r.tensors();
    let mut entries = Vec::new();
    for (name, rows, cols, reference) in theirs {
        let Some((_, r2, c2, values)) = ours.iter().find(|t| t.0 == name) else {
            return Err(Error::Verify(format!("layout mismatch: `{name}` missing from the report")));
        };
        if (*r2, *c2) != (rows, cols) {
            return Err(Error::Verify(format!(
                "layout mismatch: `{name}` is {r2}×{c2} in the report but {rows}×{cols} in the reference"
            )));
        }
        let max = reference.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let floor = (RELATIVE_FLOOR * max).max(ABSOLUTE_FLOOR);
        let tolerance = tolerances.tolerance(name);
        for (k, (&v, &rf)) in values.iter().zip(&reference).enumerate() {
            entries.push(EntryDiff {
                tensor: name.to_string(),
                row: k / cols,
                col: k % cols,
                value: v,
                reference: rf,
                error: (v - rf).abs() / rf.abs().max(floor),
                tolerance,
            });
        }
    }
    Ok(Verification { entries })
}
