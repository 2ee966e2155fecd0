//! Pass/fail reports shared by the numerical audits.

use std::fmt;

/// One audited property with its worst observed residual.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditItem {
    pub name: String,
    pub passed: bool,
    /// Worst-case residual (or violation) seen over all samples.
    pub worst: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AuditReport {
    pub title: String,
    pub items: Vec<AuditItem>,
}

impl AuditReport {
    pub fn new(title: impl Into<String>) -> Self {
        AuditReport {
            title: title.into(),
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, passed: bool, worst: f64, detail: impl Into<String>) {
        self.items.push(AuditItem {
            name: name.to_string(),
            passed,
            worst,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, name: &str) -> Option<&AuditItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "audit: {}", self.title)?;
        writeln!(f, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" })?;
        for item in &self.items {
            writeln!(f)?;
            writeln!(f, "item: {}", item.name)?;
            writeln!(f, "status: {}", if item.passed { "pass" } else { "fail" })?;
            writeln!(f, "worst: {:e}", item.worst)?;
            if !item.detail.is_empty() {
                writeln!(f, "detail: {}", item.detail)?;
            }
        }
        Ok(())
    }
}
