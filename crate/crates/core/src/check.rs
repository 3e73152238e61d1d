//! Runtime invariant checks.
//!
//! Algorithms record every invariant they test in a [`CheckLog`]. A failed
//! hard check aborts the run with [`Error::Assertion`]; diagnostics are
//! recorded but never abort.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
    /// Witness of the first failure, if any.
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckLog {
    pub checks: BTreeMap<String, CheckTally>,
}

impl CheckLog {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> String) -> Option<String> {
        let tally = self.checks.entry(name.to_string()).or_default();
        if ok {
            tally.passed += 1;
            return None;
        }
        tally.failed += 1;
        let w = witness();
        if tally.first_failure.is_none() {
            tally.first_failure = Some(w.clone());
        }
        Some(w)
    }

    /// Records a hard check; a failure becomes an assertion error.
    pub fn require(
        &mut self,
        name: &str,
        ok: bool,
        witness: impl FnOnce() -> String,
    ) -> Result<()> {
        match self.record(name, ok, witness) {
            None => Ok(()),
            Some(w) => Err(Error::assertion(name, w)),
        }
    }

    /// Records a diagnostic that is reported but does not abort.
    pub fn note(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> String) {
        self.record(name, ok, witness);
    }

    pub fn merge(&mut self, other: &CheckLog) {
        for (name, t) in &other.checks {
            let mine = self.checks.entry(name.clone()).or_default();
            mine.passed += t.passed;
            mine.failed += t.failed;
            if mine.first_failure.is_none() {
                mine.first_failure.clone_from(&t.first_failure);
            }
        }
    }

    pub fn passed(&self) -> usize {
        self.checks.values().map(|t| t.passed).sum()
    }

    pub fn failed(&self) -> usize {
        self.checks.values().map(|t| t.failed).sum()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn count(&self, name: &str) -> usize {
        self.checks.get(name).map_or(0, |t| t.passed + t.failed)
    }
}
