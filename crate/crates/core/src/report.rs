//! Line-oriented verification reports: one `PASS`/`FAIL` line per check plus
//! a machine-readable summary. Line order is canonicalized so reports are
//! byte-identical across runs with identical inputs, seeds and bounds.

use std::fmt::Write as _;

use serde::Serialize;

/// A single verification outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub pass: bool,
    /// `<suite>.<check>` label.
    pub name: String,
    pub detail: String,
}

/// Accumulates checks for one suite run.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct Summary {
    pass: usize,
    fail: usize,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn record(&mut self, pass: bool, name: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(Check {
            pass,
            name: name.into(),
            detail: detail.into(),
        });
    }

    pub fn pass(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.record(true, name, detail);
    }

    pub fn fail(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.record(false, name, detail);
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn n_pass(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn n_fail(&self) -> usize {
        self.checks.len() - self.n_pass()
    }

    pub fn all_pass(&self) -> bool {
        self.n_fail() == 0
    }

    /// Report text: sorted check lines plus a trailing JSON summary line.
    pub fn render(&self) -> String {
        let mut lines: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    format!("{tag} {}", c.name)
                } else {
                    format!("{tag} {} {}", c.name, c.detail)
                }
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        for l in &lines {
            let _ = writeln!(out, "{l}");
        }
        let summary = Summary {
            pass: self.n_pass(),
            fail: self.n_fail(),
        };
        let _ = writeln!(out, "{}", serde_json::to_string(&summary).expect("summary json"));
        out
    }
}
