//! Per-identity verification records.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub id: String,
    pub status: Status,
    pub counterexample: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// One record per identity; repeated recordings of an identity keep the
/// first counterexample.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub dimensions: BTreeMap<String, usize>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, id: &str, outcome: Result<(), String>) {
        if let Some(c) = self.checks.iter_mut().find(|c| c.id == id) {
            if let (Status::Pass, Err(msg)) = (c.status, &outcome) {
                c.status = Status::Fail;
                c.counterexample = Some(msg.clone());
            }
            return;
        }
        let (status, counterexample) = match outcome {
            Ok(()) => (Status::Pass, None),
            Err(msg) => (Status::Fail, Some(msg)),
        };
        self.checks.push(Check {
            suite: String::new(),
            id: id.to_string(),
            status,
            counterexample,
        });
    }

    pub fn pass(&mut self, id: &str) {
        self.record(id, Ok(()));
    }

    pub fn fail(&mut self, id: &str, msg: impl Into<String>) {
        self.record(id, Err(msg.into()));
    }

    pub fn dimension(&mut self, name: &str, dim: usize) {
        self.dimensions.insert(name.to_string(), dim);
    }

    pub fn merge(&mut self, other: Report) {
        for c in other.checks {
            let outcome = match c.status {
                Status::Pass => Ok(()),
                Status::Fail => Err(c.counterexample.unwrap_or_default()),
            };
            self.record(&c.id, outcome);
        }
        self.dimensions.extend(other.dimensions);
    }

    /// Merges `other` with every identity id prefixed by `scope/`.
    pub fn merge_scoped(&mut self, scope: &str, other: Report) {
        let mut renamed = Report::new();
        for mut c in other.checks {
            c.id = format!("{scope}/{}", c.id);
            renamed.checks.push(c);
        }
        for (k, v) in other.dimensions {
            renamed.dimensions.insert(format!("{scope}/{k}"), v);
        }
        self.merge(renamed);
    }

    pub fn with_suite(mut self, suite: &str) -> Self {
        for c in &mut self.checks {
            c.suite = suite.to_string();
        }
        self
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn passed(&self, id: &str) -> Option<bool> {
        self.get(id).map(Check::passed)
    }
}

/// Compares two maps column by column, naming the first differing basis element.
pub fn agree(lhs: &Matrix, rhs: &Matrix, at: &str) -> Result<(), String> {
    if lhs.shape() != rhs.shape() {
        return Err(format!(
            "{at}: shapes differ {:?} vs {:?}",
            lhs.shape(),
            rhs.shape()
        ));
    }
    match lhs.differing_columns(rhs).first() {
        None => Ok(()),
        Some(&c) => Err(format!(
            "{at}, basis element {c}: {:?} != {:?}",
            lhs.column(c),
            rhs.column(c)
        )),
    }
}

pub fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_counterexample_is_kept() {
        let mut r = Report::new();
        r.pass("a");
        r.fail("a", "first");
        r.fail("a", "second");
        r.pass("b");
        assert_eq!(r.checks.len(), 2);
        assert_eq!(r.get("a").unwrap().counterexample.as_deref(), Some("first"));
        assert!(!r.all_passed());
    }

    #[test]
    fn agree_locates_column() {
        let a = Matrix::from_rows(2, &[vec![1, 0], vec![0, 1]]);
        let b = Matrix::from_rows(2, &[vec![1, 1], vec![0, 1]]);
        let err = agree(&a, &b, "x").unwrap_err();
        assert!(err.contains("basis element 1"));
        assert!(agree(&a, &a, "x").is_ok());
    }
}
