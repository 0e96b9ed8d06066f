//! Finite-dimensional algebras over `F_p` given by structure constants.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, is_zero_vec, unit_vector, Matrix, Subspace};

/// Listed idempotents, optionally flagged pairwise orthogonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentFamily {
    pub labels: Vec<String>,
    pub elements: Vec<Vec<u64>>,
    pub orthogonal: bool,
}

#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    p: u64,
    dim: usize,
    /// `table[(i * dim + j) * dim + k]` is the `b_k` coefficient of `b_i b_j`.
    table: Vec<u64>,
    unit: Option<Vec<u64>>,
    family: Option<IdempotentFamily>,
    left_reg: Vec<Matrix>,
    right_reg: Vec<Matrix>,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.dim == other.dim && self.table == other.table
    }
}

impl FiniteAlgebra {
    /// Builds an algebra without checking the axioms; see [`FiniteAlgebra::check`].
    pub fn from_table(p: u64, dim: usize, table: Vec<u64>, unit: Option<Vec<u64>>) -> Self {
        assert_eq!(table.len(), dim * dim * dim, "structure tensor must have dim^3 entries");
        let table: Vec<u64> = table.into_iter().map(|v| v % p).collect();
        let mut left_reg = Vec::with_capacity(dim);
        let mut right_reg = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut l = Matrix::zeros(p, dim, dim);
            let mut r = Matrix::zeros(p, dim, dim);
            for j in 0..dim {
                for t in 0..dim {
                    l.set(t, j, table[(k * dim + j) * dim + t]);
                    r.set(t, j, table[(j * dim + k) * dim + t]);
                }
            }
            left_reg.push(l);
            right_reg.push(r);
        }
        Self {
            p,
            dim,
            table,
            unit,
            family: None,
            left_reg,
            right_reg,
        }
    }

    /// Builds an algebra and verifies associativity and the unit.
    pub fn new(p: u64, dim: usize, table: Vec<u64>, unit: Option<Vec<u64>>) -> Result<Self> {
        let a = Self::from_table(p, dim, table, unit);
        a.check()?;
        Ok(a)
    }

    pub fn field(p: u64) -> Self {
        Self::from_table(p, 1, vec![1], Some(vec![1]))
    }

    /// `M_n(F_p)` with basis `E_rc` at index `r * n + c`.
    pub fn matrix_algebra(p: u64, n: usize) -> Self {
        let d = n * n;
        let mut table = vec![0; d * d * d];
        for r in 0..n {
            for c in 0..n {
                for s in 0..n {
                    // E_rc E_cs = E_rs
                    table[((r * n + c) * d + c * n + s) * d + r * n + s] = 1;
                }
            }
        }
        let unit = (0..d).map(|k| u64::from(k / n == k % n)).collect();
        Self::from_table(p, d, table, Some(unit))
    }

    /// `F_p[x]/(x^n)` with basis `1, x, ..., x^{n-1}`.
    pub fn truncated_polynomial(p: u64, n: usize) -> Self {
        let mut table = vec![0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                if i + j < n {
                    table[(i * n + j) * n + i + j] = 1;
                }
            }
        }
        Self::from_table(p, n, table, Some(unit_vector(n, 0)))
    }

    /// Direct product; the basis is the concatenation of the factors' bases.
    pub fn product(p: u64, factors: &[&FiniteAlgebra]) -> Self {
        let dim: usize = factors.iter().map(|f| f.dim).sum();
        let mut table = vec![0; dim * dim * dim];
        let mut off = 0;
        let mut unit = Some(vec![0; dim]);
        for f in factors {
            let d = f.dim;
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        table[((off + i) * dim + off + j) * dim + off + k] = f.table[(i * d + j) * d + k];
                    }
                }
            }
            match (&mut unit, &f.unit) {
                (Some(u), Some(fu)) => u[off..off + d].copy_from_slice(fu),
                _ => unit = None,
            }
            off += d;
        }
        Self::from_table(p, dim, table, unit)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn table(&self) -> &[u64] {
        &self.table
    }
    pub fn unit(&self) -> Option<&[u64]> {
        self.unit.as_deref()
    }
    pub fn family(&self) -> Option<&IdempotentFamily> {
        self.family.as_ref()
    }

    pub fn with_family(mut self, family: IdempotentFamily) -> Self {
        self.family = Some(family);
        self
    }

    pub fn without_family(mut self) -> Self {
        self.family = None;
        self
    }

    pub fn same_structure(&self, other: &FiniteAlgebra) -> bool {
        self == other
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.dim]
    }

    pub fn basis(&self, k: usize) -> Vec<u64> {
        unit_vector(self.dim, k)
    }

    /// Left multiplication by `b_k`.
    pub fn left_regular(&self, k: usize) -> &Matrix {
        &self.left_reg[k]
    }

    /// Right multiplication by `b_k`.
    pub fn right_regular(&self, k: usize) -> &Matrix {
        &self.right_reg[k]
    }

    pub fn left_mul_matrix(&self, x: &[u64]) -> Matrix {
        combine(self.p, self.dim, &self.left_reg, x)
    }

    pub fn right_mul_matrix(&self, x: &[u64]) -> Matrix {
        combine(self.p, self.dim, &self.right_reg, x)
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.left_mul_matrix(x).apply(y)
    }

    pub fn is_idempotent(&self, e: &[u64]) -> bool {
        self.mul(e, e) == e
    }

    pub fn is_central(&self, x: &[u64]) -> bool {
        self.left_mul_matrix(x) == self.right_mul_matrix(x)
    }

    /// Associativity on basis triples and two-sidedness of the unit.
    pub fn check(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let bij: Vec<u64> = (0..self.dim).map(|k| self.table[(i * self.dim + j) * self.dim + k]).collect();
                let lhs = self.left_mul_matrix(&bij);
                let rhs = self.left_reg[i].mul(&self.left_reg[j]);
                if lhs != rhs {
                    let l = lhs.differing_columns(&rhs)[0];
                    return Err(Error::NotAssociative(i, j, l));
                }
            }
        }
        if let Some(u) = &self.unit {
            if !self.left_mul_matrix(u).is_identity() || !self.right_mul_matrix(u).is_identity() {
                return Err(Error::Invalid("listed unit is not two-sided".into()));
            }
        }
        if let Some(f) = &self.family {
            for (label, e) in f.labels.iter().zip(&f.elements) {
                if !self.is_idempotent(e) {
                    return Err(Error::Invalid(format!("family element {label} is not idempotent")));
                }
            }
        }
        Ok(())
    }

    /// Same vector space with multiplication `x * y = y x`.
    pub fn opposite(&self) -> FiniteAlgebra {
        let d = self.dim;
        let mut table = vec![0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    table[(i * d + j) * d + k] = self.table[(j * d + i) * d + k];
                }
            }
        }
        Self::from_table(self.p, d, table, self.unit.clone())
    }

    /// Subalgebra spanned by the columns of `incl`, in those coordinates.
    pub fn subalgebra(&self, incl: &Matrix, unit: Option<Vec<u64>>) -> Result<FiniteAlgebra> {
        let space = Subspace::from_vectors(self.p, self.dim, &incl.columns());
        let k = incl.cols();
        if space.dim() != k {
            return Err(Error::Invalid("subalgebra spanning set is not independent".into()));
        }
        // Solve coordinates against the given columns, not the echelon basis.
        let cols = incl.columns();
        let mut table = vec![0; k * k * k];
        for i in 0..k {
            for j in 0..k {
                let prod = self.mul(&cols[i], &cols[j]);
                let coords = incl
                    .solve_right(&Matrix::from_columns(self.p, self.dim, &[prod]))
                    .ok_or_else(|| Error::Invalid("span is not closed under multiplication".into()))?;
                for t in 0..k {
                    table[(i * k + j) * k + t] = coords.get(t, 0);
                }
            }
        }
        Ok(Self::from_table(self.p, k, table, unit))
    }

    /// The corner `e A e` with unit `e`, and its inclusion into `A`.
    pub fn corner(&self, e: &[u64]) -> Result<(FiniteAlgebra, Matrix)> {
        let sandwich = self.left_mul_matrix(e).mul(&self.right_mul_matrix(e));
        let space = sandwich.image();
        let incl = space.inclusion();
        let unit = space
            .coordinates(e)
            .ok_or_else(|| Error::Invalid("corner idempotent is not idempotent".into()))?;
        let alg = self.subalgebra(&incl, Some(unit))?;
        Ok((alg, incl))
    }

    /// Index of the first family element acting as a two-sided identity on all `xs`.
    pub fn local_unit_for(&self, xs: &[Vec<u64>]) -> Option<usize> {
        let f = self.family.as_ref()?;
        f.elements.iter().position(|e| {
            xs.iter()
                .all(|x| self.mul(e, x) == *x && self.mul(x, e) == *x)
        })
    }
}

fn combine(p: u64, dim: usize, mats: &[Matrix], x: &[u64]) -> Matrix {
    assert_eq!(x.len(), mats.len());
    let mut out = Matrix::zeros(p, dim, dim);
    for (k, &c) in x.iter().enumerate() {
        if c != 0 {
            out = out.add(&mats[k].scale(c));
        }
    }
    out
}

/// Checks `f(b_i b_j) = f(b_i) f(b_j)` on all basis pairs.
pub fn multiplicativity_defect(src: &FiniteAlgebra, tgt: &FiniteAlgebra, f: &Matrix) -> Option<String> {
    if f.shape() != (tgt.dim(), src.dim()) {
        return Some(format!("shape {:?} does not match {}x{}", f.shape(), tgt.dim(), src.dim()));
    }
    for i in 0..src.dim() {
        for j in 0..src.dim() {
            let lhs = f.apply(&src.mul(&src.basis(i), &src.basis(j)));
            let rhs = tgt.mul(&f.column(i), &f.column(j));
            if lhs != rhs {
                return Some(format!("basis pair ({i}, {j}): {lhs:?} != {rhs:?}"));
            }
        }
    }
    None
}

/// An algebra map, checked multiplicative on construction.
#[derive(Clone, Debug)]
pub struct AlgebraMorphism {
    pub source: Arc<FiniteAlgebra>,
    pub target: Arc<FiniteAlgebra>,
    pub map: Matrix,
}

impl AlgebraMorphism {
    pub fn new(source: Arc<FiniteAlgebra>, target: Arc<FiniteAlgebra>, map: Matrix) -> Result<Self> {
        if let Some(d) = multiplicativity_defect(&source, &target, &map) {
            return Err(Error::Invalid(format!("not multiplicative: {d}")));
        }
        Ok(Self { source, target, map })
    }

    /// Listed idempotents of the source land on idempotents of the target.
    pub fn preserves_idempotents(&self) -> bool {
        self.source.family().is_none_or(|f| {
            f.elements
                .iter()
                .all(|e| self.target.is_idempotent(&self.map.apply(e)))
        })
    }
}

/// True iff every supplied subset is absorbed two-sidedly by a listed idempotent,
/// and listed idempotents are pairwise orthogonal when so flagged.
pub fn verify_local_units(alg: &FiniteAlgebra, subsets: &[Vec<Vec<u64>>]) -> Result<bool> {
    let fam = match alg.family() {
        Some(f) if !f.elements.is_empty() => f,
        _ => return Err(Error::EmptyFamily),
    };
    if fam.elements.iter().any(|e| !alg.is_idempotent(e)) {
        return Ok(false);
    }
    if fam.orthogonal {
        for (i, ei) in fam.elements.iter().enumerate() {
            for (j, ej) in fam.elements.iter().enumerate() {
                if i != j && !is_zero_vec(&alg.mul(ei, ej)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(subsets.iter().all(|s| alg.local_unit_for(s).is_some()))
}

/// `leq[i][j]` iff `e_i e_j = e_j e_i = e_i`.
pub fn family_order(alg: &FiniteAlgebra) -> Result<Vec<Vec<bool>>> {
    let fam = alg.family().ok_or(Error::EmptyFamily)?;
    let n = fam.elements.len();
    let mut leq = vec![vec![false; n]; n];
    for (row, ei) in leq.iter_mut().zip(&fam.elements) {
        for (cell, ej) in row.iter_mut().zip(&fam.elements) {
            *cell = alg.mul(ei, ej) == *ei && alg.mul(ej, ei) == *ei;
        }
    }
    Ok(leq)
}

/// Every pair of listed idempotents has a listed upper bound.
pub fn family_is_directed(alg: &FiniteAlgebra) -> Result<bool> {
    let leq = family_order(alg)?;
    let n = leq.len();
    Ok((0..n).all(|i| (0..n).all(|j| (0..n).any(|k| leq[i][k] && leq[j][k]))))
}

/// Columns of the identity, as a convenience for sample subsets.
pub fn basis_singletons(alg: &FiniteAlgebra) -> Vec<Vec<Vec<u64>>> {
    (0..alg.dim()).map(|k| vec![alg.basis(k)]).collect()
}

pub fn whole_basis(alg: &FiniteAlgebra) -> Vec<Vec<u64>> {
    (0..alg.dim()).map(|k| alg.basis(k)).collect()
}

/// Sum of vectors mod p.
pub fn vsum(p: u64, xs: &[&[u64]]) -> Vec<u64> {
    let n = xs.first().map_or(0, |x| x.len());
    let mut out = vec![0; n];
    for x in xs {
        linalg::axpy(p, &mut out, 1, x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block() -> FiniteAlgebra {
        let f = FiniteAlgebra::field(2);
        let m = FiniteAlgebra::matrix_algebra(2, 2);
        FiniteAlgebra::product(2, &[&f, &m])
    }

    fn block_family(b: FiniteAlgebra, labels: &[&str], elems: Vec<Vec<u64>>) -> FiniteAlgebra {
        b.with_family(IdempotentFamily {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            elements: elems,
            orthogonal: false,
        })
    }

    #[test]
    fn standard_algebras_are_associative() {
        for a in [
            FiniteAlgebra::field(3),
            FiniteAlgebra::matrix_algebra(2, 3),
            FiniteAlgebra::truncated_polynomial(2, 3),
            block(),
        ] {
            a.check().unwrap();
            a.opposite().check().unwrap();
        }
    }

    #[test]
    fn broken_table_is_rejected() {
        // b0 * b0 = b1, b1 * anything = b1: (b0 b0) b0 = b1 but b0 (b0 b0) = b0 b1 = 0
        let mut table = vec![0; 8];
        table[1] = 1;
        table[(2) * 2 + 1] = 1;
        table[(3) * 2 + 1] = 1;
        let a = FiniteAlgebra::from_table(2, 2, table, None);
        assert!(matches!(a.check(), Err(Error::NotAssociative(..))));
    }

    #[test]
    fn unital_local_units() {
        let a = FiniteAlgebra::matrix_algebra(2, 2);
        let u = a.unit().unwrap().to_vec();
        let a = a.with_family(IdempotentFamily {
            labels: vec!["1".into()],
            elements: vec![u],
            orthogonal: false,
        });
        assert!(verify_local_units(&a, &basis_singletons(&a)).unwrap());
    }

    #[test]
    fn block_local_units_by_enumeration() {
        let e1 = vec![1, 0, 0, 0, 0];
        let e2 = vec![0, 1, 0, 0, 1];
        let e12 = vec![1, 1, 0, 0, 1];
        let b = block_family(block(), &["1", "2", "12"], vec![e1.clone(), e2.clone(), e12]);
        assert!(verify_local_units(&b, &basis_singletons(&b)).unwrap());
        assert!(verify_local_units(&b, &[whole_basis(&b)]).unwrap());
        assert!(family_is_directed(&b).unwrap());

        let only1 = block_family(block(), &["1"], vec![e1.clone()]);
        assert!(!verify_local_units(&only1, &[vec![e2.clone()]]).unwrap());
        assert_eq!(only1.mul(&e1, &e2), vec![0; 5]);
    }

    #[test]
    fn empty_family_is_an_error() {
        assert_eq!(verify_local_units(&block(), &[]), Err(Error::EmptyFamily));
    }

    #[test]
    fn corner_of_matrix_algebra() {
        let m3 = FiniteAlgebra::matrix_algebra(2, 3);
        let mut e = vec![0; 9];
        e[0] = 1;
        e[4] = 1;
        let (c, incl) = m3.corner(&e).unwrap();
        assert_eq!(c.dim(), 4);
        assert_eq!(c, FiniteAlgebra::matrix_algebra(2, 2));
        assert_eq!(incl.rank(), 4);
        assert!(multiplicativity_defect(&c, &m3, &incl).is_none());
    }

    #[test]
    fn central_idempotents_of_products_only() {
        let b = block();
        assert!(b.is_central(&[1, 0, 0, 0, 0]));
        let m = FiniteAlgebra::matrix_algebra(2, 2);
        assert!(!m.is_central(&[1, 0, 0, 0]));
    }
}
