use std::fmt;

use serde::{Deserialize, Serialize};

/// One asserted relation `value ≤ bound` (or a named boolean condition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Outcome of a property or identity suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub items: Vec<CheckItem>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed: true,
            items: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records `value ≤ bound`.
    pub fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) -> bool {
        let passed = value <= bound;
        self.record(label, value, bound, passed)
    }

    /// Records `value ≥ bound`.
    pub fn at_least(&mut self, label: impl Into<String>, value: f64, bound: f64) -> bool {
        let passed = value >= bound;
        self.record(label, value, bound, passed)
    }

    pub fn record(
        &mut self,
        label: impl Into<String>,
        value: f64,
        bound: f64,
        passed: bool,
    ) -> bool {
        self.passed &= passed;
        self.items.push(CheckItem {
            label: label.into(),
            value,
            bound,
            passed,
        });
        passed
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.passed &= other.passed;
        let prefix = other.name;
        self.items.extend(other.items.into_iter().map(|mut item| {
            item.label = format!("{prefix}: {}", item.label);
            item
        }));
        self.notes.extend(other.notes);
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.passed)
    }

    /// The item with the largest `value − bound`.
    pub fn worst(&self) -> Option<&CheckItem> {
        self.items
            .iter()
            .max_by(|a, b| (a.value - a.bound).total_cmp(&(b.value - b.bound)))
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed = self.failures().count();
        write!(
            f,
            "[{}] {}: {} items, {} failed",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.items.len(),
            failed
        )?;
        for item in self.failures().take(5) {
            write!(
                f,
                "\n    {}: value {:.3e}, bound {:.3e}",
                item.label, item.value, item.bound
            )?;
        }
        Ok(())
    }
}
