//! Finite directed posets with a fixed linear extension.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedPoset {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
    /// A linear extension: `order[0]` is minimal.
    order: Vec<usize>,
}

impl DirectedPoset {
    /// Validates the partial order axioms. Directedness is checked separately
    /// so that broken inputs can still be reported on.
    pub fn new(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = labels.len();
        if leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("order relation must be square".into()));
        }
        for i in 0..n {
            if !leq[i][i] {
                return Err(Error::Invalid(format!("order is not reflexive at {}", labels[i])));
            }
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(Error::Invalid(format!(
                        "order is not antisymmetric at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
                for k in 0..n {
                    if leq[i][j] && leq[j][k] && !leq[i][k] {
                        return Err(Error::Invalid(format!(
                            "order is not transitive at ({}, {}, {})",
                            labels[i], labels[j], labels[k]
                        )));
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| ((0..n).filter(|&j| leq[j][i]).count(), i));
        Ok(Self { labels, leq, order })
    }

    /// From explicit covering pairs `(lower, upper)`, closed transitively.
    pub fn from_pairs(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::Invalid(format!("order pair ({i}, {j}) out of range")));
            }
            leq[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i][k] && leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
        Self::new(labels, leq)
    }

    pub fn point() -> Self {
        Self::chain(1)
    }

    /// `1 < 2 < ... < n`.
    pub fn chain(n: usize) -> Self {
        let labels = (1..=n).map(|i| i.to_string()).collect();
        let leq = (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect();
        Self::new(labels, leq).expect("chain is a partial order")
    }

    /// Nonempty subsets of `{1..n}` under inclusion, listed by bitmask.
    pub fn subsets(n: usize) -> Self {
        let masks: Vec<usize> = (1..1usize << n).collect();
        let labels = masks
            .iter()
            .map(|m| {
                let parts: Vec<String> = (0..n).filter(|b| m >> b & 1 == 1).map(|b| (b + 1).to_string()).collect();
                format!("{{{}}}", parts.join(","))
            })
            .collect();
        let leq = masks
            .iter()
            .map(|a| masks.iter().map(|b| a & b == *a).collect())
            .collect();
        Self::new(labels, leq).expect("inclusion is a partial order")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn linear_extension(&self) -> &[usize] {
        &self.order
    }

    /// All pairs `(i, j)` with `i <= j`, in a fixed order.
    pub fn comparable_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.leq[i][j])
            .collect()
    }

    /// Covering pairs `(i, j)`: `i < j` with nothing strictly between.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        self.comparable_pairs()
            .into_iter()
            .filter(|&(i, j)| {
                i != j && !(0..n).any(|k| k != i && k != j && self.leq[i][k] && self.leq[k][j])
            })
            .collect()
    }

    pub fn upper_bounds(&self, i: usize, j: usize) -> Vec<usize> {
        self.order
            .iter()
            .copied()
            .filter(|&k| self.leq[i][k] && self.leq[j][k])
            .collect()
    }

    /// The first upper bound in the linear extension.
    pub fn choose_upper_bound(&self, i: usize, j: usize) -> Result<usize> {
        self.upper_bounds(i, j)
            .first()
            .copied()
            .ok_or_else(|| Error::NoUpperBound(self.labels[i].clone(), self.labels[j].clone()))
    }

    pub fn is_directed(&self) -> bool {
        let n = self.len();
        n > 0 && (0..n).all(|i| (0..n).all(|j| !self.upper_bounds(i, j).is_empty()))
    }

    /// The maximum, which exists for nonempty finite directed posets.
    pub fn max(&self) -> Result<usize> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Invalid("empty poset".into()));
        }
        for i in 0..n {
            for j in 0..n {
                self.choose_upper_bound(i, j)?;
            }
        }
        (0..n)
            .find(|&m| (0..n).all(|i| self.leq[i][m]))
            .ok_or_else(|| Error::NoUpperBound(self.labels[0].clone(), self.labels[n - 1].clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_subsets() {
        let c = DirectedPoset::chain(4);
        assert_eq!(c.max().unwrap(), 3);
        assert_eq!(c.choose_upper_bound(1, 2).unwrap(), 2);
        assert_eq!(c.covering_pairs(), vec![(0, 1), (1, 2), (2, 3)]);

        let s = DirectedPoset::subsets(2);
        assert_eq!(s.labels(), ["{1}", "{2}", "{1,2}"]);
        assert_eq!(s.max().unwrap(), 2);
        assert_eq!(s.choose_upper_bound(0, 1).unwrap(), 2);
        assert!(s.is_directed());
    }

    #[test]
    fn undirected_poset_has_no_max() {
        let p = DirectedPoset::from_pairs(vec!["a".into(), "b".into()], &[]).unwrap();
        assert!(!p.is_directed());
        assert!(matches!(p.max(), Err(Error::NoUpperBound(_, _))));
    }

    #[test]
    fn rejects_cycles() {
        assert!(DirectedPoset::from_pairs(vec!["a".into(), "b".into()], &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn linear_extension_respects_order() {
        let s = DirectedPoset::subsets(3);
        let pos: Vec<usize> = {
            let mut pos = vec![0; s.len()];
            for (k, &i) in s.linear_extension().iter().enumerate() {
                pos[i] = k;
            }
            pos
        };
        for (i, j) in s.comparable_pairs() {
            assert!(pos[i] <= pos[j]);
        }
    }
}
