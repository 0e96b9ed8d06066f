//! Dense exact linear algebra over a prime field `F_p`.
//!
//! Vectors are plain `Vec<u64>` of residues. A linear map `V -> W` is a
//! [`Matrix`] with `dim W` rows and `dim V` columns acting on column vectors,
//! so `g ∘ f` is `g.mul(&f)`.

use std::fmt;

/// Largest modulus accepted; keeps every product of two residues inside `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub fn add(p: u64, a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(p: u64, a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mul(p: u64, a: u64, b: u64) -> u64 {
    (a * b) % p
}

pub fn neg(p: u64, a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub fn inv(p: u64, a: u64) -> u64 {
    assert!(!a.is_multiple_of(p), "inverse of zero in F_{p}");
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(p, acc, base);
        }
        base = mul(p, base, base);
        exp >>= 1;
    }
    acc
}

/// Reduces an arbitrary integer into `[0, p)`.
pub fn residue(p: u64, v: i64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

pub fn axpy(p: u64, y: &mut [u64], a: u64, x: &[u64]) {
    if a == 0 {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = add(p, *yi, mul(p, a, *xi));
    }
}

pub fn is_zero_vec(v: &[u64]) -> bool {
    v.iter().all(|&x| x == 0)
}

pub fn unit_vector(n: usize, k: usize) -> Vec<u64> {
    let mut v = vec![0; n];
    v[k] = 1;
    v
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over F_{} [", self.rows, self.cols, self.p)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major entries, reducing each one mod `p`.
    pub fn from_entries(p: u64, rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        Self {
            p,
            rows,
            cols,
            data: entries.iter().map(|&v| residue(p, v)).collect(),
        }
    }

    pub fn from_rows(p: u64, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let flat: Vec<i64> = rows.iter().flat_map(|row| {
            assert_eq!(row.len(), c, "ragged rows");
            row.iter().copied()
        }).collect();
        Self::from_entries(p, r, c, &flat)
    }

    /// Stacks the given vectors as columns. `rows` is needed when `cols` is empty.
    pub fn from_columns(p: u64, rows: usize, cols: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(p, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &v) in c.iter().enumerate() {
                m.data[i * m.cols + j] = v % p;
            }
        }
        m
    }

    pub fn prime(&self) -> u64 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u64>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[u64]) {
        assert_eq!(v.len(), self.rows);
        for (r, &x) in v.iter().enumerate() {
            self.data[r * self.cols + c] = x % self.p;
        }
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.data)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Self::identity(self.p, self.rows)
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "vector length {} vs {} columns", v.len(), self.cols);
        let p = self.p;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| add(p, acc, mul(p, a, b)))
            })
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch {:?} * {:?}", self.shape(), other.shape());
        let p = self.p;
        let mut out = Matrix::zeros(p, self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(brow) {
                    *o = (*o + a * b) % p;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        let p = self.p;
        Matrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| add(p, a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        let p = self.p;
        Matrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| sub(p, a, b)).collect(),
        }
    }

    pub fn scale(&self, s: u64) -> Matrix {
        let p = self.p;
        let s = s % p;
        Matrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| mul(p, a, s)).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    /// Kronecker product; row-major index `(i, k) -> i * other.rows + k`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let p = self.p;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(p, rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if b != 0 {
                            out.data[(i * other.rows + k) * cols + j * other.cols + l] = mul(p, a, b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn hstack(p: u64, rows: usize, blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(p, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for r in 0..rows {
                out.data[r * cols + off..r * cols + off + b.cols].copy_from_slice(b.row(r));
            }
            off += b.cols;
        }
        out
    }

    pub fn vstack(p: u64, cols: usize, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend_from_slice(&b.data);
        }
        Matrix { p, rows, cols, data }
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let p = self.p;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for k in 0..m.cols {
                    m.data.swap(pr * m.cols + k, r * m.cols + k);
                }
            }
            let iv = inv(p, m.get(r, c));
            for k in c..m.cols {
                let v = m.get(r, k);
                m.data[r * m.cols + k] = mul(p, v, iv);
            }
            let pivot_row: Vec<u64> = m.row(r).to_vec();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f == 0 {
                    continue;
                }
                let nf = neg(p, f);
                let row = &mut m.data[i * m.cols..(i + 1) * m.cols];
                axpy(p, row, nf, &pivot_row);
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Null space `{ v | self · v = 0 }`.
    pub fn kernel(&self) -> Subspace {
        let (r, pivots) = self.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut vecs = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0; self.cols];
            v[f] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = neg(p, r.get(row, f));
            }
            vecs.push(v);
        }
        Subspace::from_vectors(p, self.cols, &vecs)
    }

    /// Column space.
    pub fn image(&self) -> Subspace {
        Subspace::from_vectors(self.p, self.rows, &self.columns())
    }

    /// Some `X` with `self · X = rhs`, or `None` when the system is inconsistent.
    pub fn solve_right(&self, rhs: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, rhs.rows);
        let p = self.p;
        let aug = Matrix::hstack(p, self.rows, &[self, rhs]);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(p, self.cols, rhs.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.data[pc * rhs.cols + j] = r.get(row, self.cols + j);
            }
        }
        Some(x)
    }

    /// Some `X` with `X · self = rhs`.
    pub fn solve_left(&self, rhs: &Matrix) -> Option<Matrix> {
        self.transpose()
            .solve_right(&rhs.transpose())
            .map(|x| x.transpose())
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve_right(&Matrix::identity(self.p, self.rows))?;
        (self.mul(&x).is_identity()).then_some(x)
    }

    /// Columns where `self` and `other` differ.
    pub fn differing_columns(&self, other: &Matrix) -> Vec<usize> {
        assert_eq!(self.shape(), other.shape());
        (0..self.cols)
            .filter(|&c| (0..self.rows).any(|r| self.get(r, c) != other.get(r, c)))
            .collect()
    }

    /// Row-major flattening, used when a matrix is an unknown of a linear system.
    pub fn to_vec(&self) -> Vec<u64> {
        self.data.clone()
    }

    pub fn from_vec(p: u64, rows: usize, cols: usize, v: Vec<u64>) -> Matrix {
        assert_eq!(v.len(), rows * cols);
        Matrix { p, rows, cols, data: v }
    }

    /// Restricts columns to `cols` (in order).
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.p, self.rows, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for r in 0..self.rows {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }
}

/// A subspace of `F_p^n` stored by its unique reduced echelon basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(p: u64, ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::zeros(p, 0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: u64, ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::identity(p, ambient),
            pivots: (0..ambient).collect(),
        }
    }

    pub fn from_vectors(p: u64, ambient: usize, vecs: &[Vec<u64>]) -> Self {
        let rows: Vec<u64> = vecs
            .iter()
            .flat_map(|v| {
                assert_eq!(v.len(), ambient);
                v.iter().copied()
            })
            .collect();
        let m = Matrix::from_vec(p, vecs.len(), ambient, rows);
        Self::from_row_matrix(&m)
    }

    pub fn from_row_matrix(m: &Matrix) -> Self {
        let (r, pivots) = m.rref();
        let k = pivots.len();
        let basis = Matrix::from_vec(m.p, k, m.cols, r.data[..k * m.cols].to_vec());
        Self {
            ambient: m.cols,
            basis,
            pivots,
        }
    }

    pub fn prime(&self) -> u64 {
        self.basis.p
    }
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Echelon basis as rows.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<u64>> {
        (0..self.dim()).map(|r| self.basis.row(r).to_vec()).collect()
    }

    /// Echelon basis as the columns of an `ambient × dim` inclusion matrix.
    pub fn inclusion(&self) -> Matrix {
        self.basis.transpose()
    }

    /// Coordinates with respect to the echelon basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(v.len(), self.ambient);
        let coords: Vec<u64> = self.pivots.iter().map(|&c| v[c]).collect();
        let back = self.inclusion().apply(&coords);
        (back == v).then_some(coords)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis_vectors().iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let m = Matrix::vstack(self.prime(), self.ambient, &[&self.basis, &other.basis]);
        Self::from_row_matrix(&m)
    }

    /// Coordinate matrix (`dim × cols`) for the columns of `m`, or `None` if
    /// some column leaves the subspace.
    pub fn coordinate_matrix(&self, m: &Matrix) -> Option<Matrix> {
        let cols: Option<Vec<Vec<u64>>> = m.columns().iter().map(|c| self.coordinates(c)).collect();
        Some(Matrix::from_columns(self.prime(), self.dim(), &cols?))
    }
}

/// `F_p^n / rel` with a canonical complement spanned by the non-pivot
/// coordinate vectors of `rel`'s echelon basis.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub dim: usize,
    /// `dim × ambient`; kernel is exactly `rel`.
    pub projection: Matrix,
    /// `ambient × dim`; `projection · section = id`.
    pub section: Matrix,
    pub relations: Subspace,
}

pub fn kernel_basis(m: &Matrix) -> Subspace {
    m.kernel()
}

pub fn quotient_space(ambient: usize, rel: &Subspace) -> Quotient {
    assert_eq!(rel.ambient(), ambient);
    let p = rel.prime();
    let mut is_pivot = vec![false; ambient];
    for &c in rel.pivots() {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..ambient).filter(|&c| !is_pivot[c]).collect();
    let dim = free.len();
    let mut slot = vec![usize::MAX; ambient];
    for (k, &c) in free.iter().enumerate() {
        slot[c] = k;
    }
    let mut projection = Matrix::zeros(p, dim, ambient);
    let mut section = Matrix::zeros(p, ambient, dim);
    for (k, &c) in free.iter().enumerate() {
        projection.set(k, c, 1);
        section.set(c, k, 1);
    }
    // A pivot coordinate e_c reduces to e_c - row_r, whose free part is -row_r.
    for (r, &pc) in rel.pivots().iter().enumerate() {
        let row = rel.basis().row(r);
        for (c, &v) in row.iter().enumerate() {
            if v != 0 && !is_pivot[c] {
                projection.set(slot[c], pc, neg(p, v));
            }
        }
    }
    Quotient {
        dim,
        projection,
        section,
        relations: rel.clone(),
    }
}

pub fn is_isomorphism(m: &Matrix) -> bool {
    m.rows() == m.cols() && m.rank() == m.rows()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every vector of `F_p^n`.
    fn all_vectors(p: u64, n: usize) -> Vec<Vec<u64>> {
        let total = (p as usize).pow(n as u32);
        (0..total)
            .map(|mut k| {
                (0..n)
                    .map(|_| {
                        let d = (k % p as usize) as u64;
                        k /= p as usize;
                        d
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        assert_eq!(kernel_basis(&Matrix::identity(2, 3)).dim(), 0);
    }

    #[test]
    fn kernel_of_zero_is_everything() {
        let k = kernel_basis(&Matrix::zeros(2, 2, 2));
        assert_eq!(k, Subspace::full(2, 2));
    }

    #[test]
    fn kernel_matches_enumeration() {
        let m = Matrix::from_rows(2, &[vec![1, 1], vec![1, 1]]);
        let oracle: Vec<Vec<u64>> = all_vectors(2, 2)
            .into_iter()
            .filter(|v| is_zero_vec(&m.apply(v)))
            .collect();
        assert_eq!(oracle, vec![vec![0, 0], vec![1, 1]]);
        let k = kernel_basis(&m);
        assert_eq!(k, Subspace::from_vectors(2, 2, &oracle));
        assert_eq!(k.basis_vectors(), vec![vec![1, 1]]);
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_space(4, &Subspace::zero(2, 4));
        assert_eq!(q.dim, 4);
        assert!(q.projection.is_identity());

        let q = quotient_space(2, &Subspace::full(2, 2));
        assert_eq!(q.dim, 0);

        let rel = Subspace::from_vectors(2, 4, &[vec![1, 0, 1, 0], vec![0, 1, 0, 1]]);
        let q = quotient_space(4, &rel);
        assert_eq!(q.dim, 2);
        assert!(q.projection.mul(&q.section).is_identity());
        assert_eq!(q.projection.kernel(), rel);
    }

    #[test]
    fn isomorphism_examples() {
        assert!(is_isomorphism(&Matrix::identity(2, 3)));
        assert!(!is_isomorphism(&Matrix::zeros(2, 2, 3)));
        // det [[1,1],[0,1]] = 1*1 - 1*0 = 1
        assert!(is_isomorphism(&Matrix::from_rows(2, &[vec![1, 1], vec![0, 1]])));
    }

    #[test]
    fn solve_and_inverse() {
        let a = Matrix::from_rows(3, &[vec![1, 2], vec![0, 1]]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        let b = Matrix::from_rows(3, &[vec![1], vec![2]]);
        let x = a.solve_right(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        let sing = Matrix::from_rows(3, &[vec![1, 1], vec![1, 1]]);
        assert!(sing.solve_right(&Matrix::from_rows(3, &[vec![1], vec![0]])).is_none());
    }

    #[test]
    fn field_inverse_is_inverse() {
        for p in [2u64, 3, 5, 7, 101] {
            for a in 1..p {
                assert_eq!(mul(p, a, inv(p, a)), 1);
            }
        }
    }

    fn matrix_strategy() -> impl Strategy<Value = (u64, Matrix)> {
        (prop::sample::select(vec![2u64, 3, 5]), 0usize..6, 0usize..6).prop_flat_map(|(p, r, c)| {
            prop::collection::vec(0..p, r * c)
                .prop_map(move |d| (p, Matrix::from_vec(p, r, c, d)))
        })
    }

    proptest! {
        #[test]
        fn rank_nullity((_p, m) in matrix_strategy()) {
            let k = m.kernel();
            prop_assert_eq!(k.dim() + m.rank(), m.cols());
            for v in k.basis_vectors() {
                prop_assert!(is_zero_vec(&m.apply(&v)));
            }
        }

        #[test]
        fn quotient_laws((p, m) in matrix_strategy()) {
            let n = m.cols();
            let rel = m.transpose().image();
            prop_assume!(rel.ambient() == n);
            let q = quotient_space(n, &rel);
            prop_assert_eq!(q.dim, n - rel.dim());
            prop_assert!(q.projection.mul(&q.section).is_identity());
            prop_assert_eq!(q.projection.kernel(), rel.clone());
            // section ∘ projection is the identity modulo rel
            let diff = q.section.mul(&q.projection).sub(&Matrix::identity(p, n));
            for c in diff.columns() {
                prop_assert!(rel.contains(&c));
            }
        }
    }
}
