//! Finite-dimensional bimodules, balanced tensor products and duals.
//!
//! One-sided modules are bimodules over the ground field on the other side.

use std::sync::Arc;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, quotient_space, unit_vector, Matrix, Quotient, Subspace};

/// A `(B, A)`-bimodule. `left_act[k]` is the action of `b_k`, `right_act[k]`
/// the action of `a_k`, both as matrices on the carrier.
#[derive(Clone, Debug)]
pub struct Bimodule {
    left: Arc<FiniteAlgebra>,
    right: Arc<FiniteAlgebra>,
    dim: usize,
    left_act: Vec<Matrix>,
    right_act: Vec<Matrix>,
}

pub fn same_algebra(a: &Arc<FiniteAlgebra>, b: &Arc<FiniteAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || a.same_structure(b)
}

impl Bimodule {
    pub fn new(
        left: Arc<FiniteAlgebra>,
        right: Arc<FiniteAlgebra>,
        dim: usize,
        left_act: Vec<Matrix>,
        right_act: Vec<Matrix>,
    ) -> Result<Self> {
        if left_act.len() != left.dim() || right_act.len() != right.dim() {
            return Err(Error::DimensionMismatch("one action matrix per algebra basis element".into()));
        }
        if left_act.iter().chain(&right_act).any(|m| m.shape() != (dim, dim)) {
            return Err(Error::DimensionMismatch(format!("action matrices must be {dim}x{dim}")));
        }
        Ok(Self {
            left,
            right,
            dim,
            left_act,
            right_act,
        })
    }

    /// `A` as an `(A, A)`-bimodule.
    pub fn regular(a: &Arc<FiniteAlgebra>) -> Self {
        let l = (0..a.dim()).map(|k| a.left_regular(k).clone()).collect();
        let r = (0..a.dim()).map(|k| a.right_regular(k).clone()).collect();
        Self::new(a.clone(), a.clone(), a.dim(), l, r).expect("regular bimodule")
    }

    /// `A` as a right `A`-module.
    pub fn regular_right(a: &Arc<FiniteAlgebra>) -> Self {
        let k = Arc::new(FiniteAlgebra::field(a.prime()));
        let r = (0..a.dim()).map(|i| a.right_regular(i).clone()).collect();
        Self::new(k, a.clone(), a.dim(), vec![Matrix::identity(a.prime(), a.dim())], r)
            .expect("regular right module")
    }

    /// A right `A`-module, i.e. a `(k, A)`-bimodule.
    pub fn right_module(a: &Arc<FiniteAlgebra>, dim: usize, right_act: Vec<Matrix>) -> Result<Self> {
        let k = Arc::new(FiniteAlgebra::field(a.prime()));
        Self::new(k, a.clone(), dim, vec![Matrix::identity(a.prime(), dim)], right_act)
    }

    pub fn zero(left: Arc<FiniteAlgebra>, right: Arc<FiniteAlgebra>) -> Self {
        let p = left.prime();
        let l = vec![Matrix::zeros(p, 0, 0); left.dim()];
        let r = vec![Matrix::zeros(p, 0, 0); right.dim()];
        Self::new(left, right, 0, l, r).expect("zero module")
    }

    pub fn prime(&self) -> u64 {
        self.left.prime()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn left_algebra(&self) -> &Arc<FiniteAlgebra> {
        &self.left
    }
    pub fn right_algebra(&self) -> &Arc<FiniteAlgebra> {
        &self.right
    }
    pub fn left_actions(&self) -> &[Matrix] {
        &self.left_act
    }
    pub fn right_actions(&self) -> &[Matrix] {
        &self.right_act
    }

    pub fn left_matrix(&self, b: &[u64]) -> Matrix {
        combine(self.prime(), self.dim, &self.left_act, b)
    }

    pub fn right_matrix(&self, a: &[u64]) -> Matrix {
        combine(self.prime(), self.dim, &self.right_act, a)
    }

    /// Same actions, with the left algebra replaced by a structurally equal one.
    pub fn with_left_algebra(&self, left: Arc<FiniteAlgebra>) -> Result<Self> {
        if !same_algebra(&left, &self.left) {
            return Err(Error::Invalid("replacement left algebra differs".into()));
        }
        Ok(Self { left, ..self.clone() })
    }

    pub fn with_right_algebra(&self, right: Arc<FiniteAlgebra>) -> Result<Self> {
        if !same_algebra(&right, &self.right) {
            return Err(Error::Invalid("replacement right algebra differs".into()));
        }
        Ok(Self { right, ..self.clone() })
    }

    /// Forgets the left action.
    pub fn as_right_module(&self) -> Self {
        Self::right_module(&self.right, self.dim, self.right_act.clone()).expect("same shapes")
    }

    /// Forgets the right action.
    pub fn as_left_module(&self) -> Self {
        let k = Arc::new(FiniteAlgebra::field(self.prime()));
        Self::new(
            self.left.clone(),
            k,
            self.dim,
            self.left_act.clone(),
            vec![Matrix::identity(self.prime(), self.dim)],
        )
        .expect("same shapes")
    }

    /// The left `B`-module structure as a right `B^op`-module.
    pub fn left_as_right_opposite(&self) -> Self {
        let op = Arc::new(self.left.opposite());
        Self::right_module(&op, self.dim, self.left_act.clone()).expect("same shapes")
    }

    /// Restriction of scalars on the left along `f: C -> B`.
    pub fn restrict_left(&self, c: Arc<FiniteAlgebra>, f: &Matrix) -> Self {
        let l = (0..c.dim()).map(|k| self.left_matrix(&f.column(k))).collect();
        Self::new(c, self.right.clone(), self.dim, l, self.right_act.clone()).expect("same shapes")
    }

    /// Both actions associative and commuting, on basis elements.
    pub fn check(&self) -> std::result::Result<(), String> {
        let (b, a) = (&self.left, &self.right);
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let lhs = self.left_matrix(&b.mul(&b.basis(i), &b.basis(j)));
                if lhs != self.left_act[i].mul(&self.left_act[j]) {
                    return Err(format!("left action not associative at ({i}, {j})"));
                }
            }
        }
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                let lhs = self.right_matrix(&a.mul(&a.basis(i), &a.basis(j)));
                if lhs != self.right_act[j].mul(&self.right_act[i]) {
                    return Err(format!("right action not associative at ({i}, {j})"));
                }
            }
        }
        for (i, l) in self.left_act.iter().enumerate() {
            for (j, r) in self.right_act.iter().enumerate() {
                if l.mul(r) != r.mul(l) {
                    return Err(format!("actions do not commute at ({i}, {j})"));
                }
            }
        }
        Ok(())
    }

    pub fn is_left_unital(&self) -> bool {
        self.left.unit().is_some_and(|u| self.left_matrix(u).is_identity())
    }

    pub fn is_right_unital(&self) -> bool {
        self.right.unit().is_some_and(|u| self.right_matrix(u).is_identity())
    }

    /// Carrier restricted to an invariant subspace, with its inclusion.
    pub fn submodule(&self, sub: &Subspace) -> Result<(Bimodule, Matrix)> {
        let incl = sub.inclusion();
        let induce = |m: &Matrix| -> Result<Matrix> {
            sub.coordinate_matrix(&m.mul(&incl))
                .ok_or_else(|| Error::Invalid("subspace is not invariant".into()))
        };
        let l = self.left_act.iter().map(induce).collect::<Result<Vec<_>>>()?;
        let r = self.right_act.iter().map(induce).collect::<Result<Vec<_>>>()?;
        let m = Bimodule::new(self.left.clone(), self.right.clone(), sub.dim(), l, r)?;
        Ok((m, incl))
    }

    /// Quotient by an invariant subspace.
    pub fn quotient(&self, sub: &Subspace) -> Result<(Bimodule, Quotient)> {
        let q = quotient_space(self.dim, sub);
        let induce = |m: &Matrix| -> Result<Matrix> {
            let img = m.mul(&sub.inclusion());
            if img.columns().iter().any(|c| !sub.contains(c)) {
                return Err(Error::Invalid("subspace is not invariant".into()));
            }
            Ok(q.projection.mul(m).mul(&q.section))
        };
        let l = self.left_act.iter().map(induce).collect::<Result<Vec<_>>>()?;
        let r = self.right_act.iter().map(induce).collect::<Result<Vec<_>>>()?;
        let m = Bimodule::new(self.left.clone(), self.right.clone(), q.dim, l, r)?;
        Ok((m, q))
    }

    /// Direct sum over shared algebras; blocks are concatenated.
    pub fn direct_sum(parts: &[&Bimodule]) -> Result<Bimodule> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty direct sum".into()))?;
        let p = first.prime();
        let dim: usize = parts.iter().map(|m| m.dim).sum();
        let block = |pick: &dyn Fn(&Bimodule) -> &Matrix| -> Matrix {
            let mut out = Matrix::zeros(p, dim, dim);
            let mut off = 0;
            for m in parts {
                let a = pick(m);
                for r in 0..m.dim {
                    for c in 0..m.dim {
                        out.set(off + r, off + c, a.get(r, c));
                    }
                }
                off += m.dim;
            }
            out
        };
        for m in parts {
            if !same_algebra(&m.left, &first.left) || !same_algebra(&m.right, &first.right) {
                return Err(Error::Invalid("direct sum over different algebras".into()));
            }
        }
        let l = (0..first.left.dim()).map(|k| block(&|m: &Bimodule| &m.left_act[k])).collect();
        let r = (0..first.right.dim()).map(|k| block(&|m: &Bimodule| &m.right_act[k])).collect();
        Bimodule::new(first.left.clone(), first.right.clone(), dim, l, r)
    }

    /// Submodule generated by `v` under both actions.
    pub fn spin(&self, v: &[u64]) -> Subspace {
        let p = self.prime();
        let gens: Vec<&Matrix> = self.left_act.iter().chain(&self.right_act).collect();
        let mut space = Subspace::zero(p, self.dim);
        let mut frontier = vec![v.to_vec()];
        if self.is_left_unital() || self.is_right_unital() || self.left.dim() == 0 {
            space = space.sum(&Subspace::from_vectors(p, self.dim, &frontier));
        } else {
            // Without a unit, v itself need not lie in the generated submodule.
            frontier = gens.iter().map(|g| g.apply(v)).collect();
            space = Subspace::from_vectors(p, self.dim, &frontier);
        }
        while let Some(w) = frontier.pop() {
            for g in &gens {
                let x = g.apply(&w);
                if !space.contains(&x) {
                    space = space.sum(&Subspace::from_vectors(p, self.dim, std::slice::from_ref(&x)));
                    frontier.push(x);
                }
            }
        }
        space
    }
}

fn combine(p: u64, dim: usize, mats: &[Matrix], x: &[u64]) -> Matrix {
    assert_eq!(x.len(), mats.len(), "coefficient vector has wrong length");
    let mut out = Matrix::zeros(p, dim, dim);
    for (k, &c) in x.iter().enumerate() {
        if c != 0 {
            out = out.add(&mats[k].scale(c));
        }
    }
    out
}

/// Left and right linearity defects of `f: src -> tgt`.
pub fn bimodule_map_defect(src: &Bimodule, tgt: &Bimodule, f: &Matrix) -> Option<String> {
    if f.shape() != (tgt.dim(), src.dim()) {
        return Some(format!("shape {:?}, expected {}x{}", f.shape(), tgt.dim(), src.dim()));
    }
    right_linearity_defect(src, tgt, f).or_else(|| {
        src.left_act
            .iter()
            .zip(&tgt.left_act)
            .enumerate()
            .find(|(_, (ls, lt))| f.mul(ls) != lt.mul(f))
            .map(|(k, _)| format!("not left linear for basis element {k}"))
    })
}

pub fn right_linearity_defect(src: &Bimodule, tgt: &Bimodule, f: &Matrix) -> Option<String> {
    if f.shape() != (tgt.dim(), src.dim()) {
        return Some(format!("shape {:?}, expected {}x{}", f.shape(), tgt.dim(), src.dim()));
    }
    src.right_act
        .iter()
        .zip(&tgt.right_act)
        .enumerate()
        .find(|(_, (rs, rt))| f.mul(rs) != rt.mul(f))
        .map(|(k, _)| format!("not right linear for basis element {k}"))
}

/// Bimodule map with its endpoints.
#[derive(Clone, Debug)]
pub struct BimoduleMap {
    pub source: Bimodule,
    pub target: Bimodule,
    pub map: Matrix,
}

impl BimoduleMap {
    pub fn new(source: Bimodule, target: Bimodule, map: Matrix) -> Result<Self> {
        if let Some(d) = bimodule_map_defect(&source, &target, &map) {
            return Err(Error::Invalid(d));
        }
        Ok(Self { source, target, map })
    }
}

/// `M ⊗_B N` as a quotient of the plain tensor product. The plain index of
/// `x ⊗ y` is `x * dim N + y`.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub module: Bimodule,
    pub proj: Matrix,
    pub sec: Matrix,
    pub left_dim: usize,
    pub right_dim: usize,
}

impl Tensor {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn plain_dim(&self) -> usize {
        self.left_dim * self.right_dim
    }

    /// Class of `x ⊗ y`.
    pub fn element(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.proj.apply(&kron_vec(self.module.prime(), x, y))
    }

    /// `f ⊗ g` into `target`, verified to respect the balancing relations.
    pub fn map_to(&self, target: &Tensor, f: &Matrix, g: &Matrix, what: &str) -> Result<Matrix> {
        let y = target.proj.mul(&f.kron(g));
        factor_through(&y, &self.proj, &self.sec, what)
    }
}

pub fn kron_vec(p: u64, x: &[u64], y: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for &a in x {
        for &b in y {
            out.push(a * b % p);
        }
    }
    out
}

/// Balanced tensor product of a `(C, B)`- and a `(B, A)`-bimodule.
pub fn tensor_over(m: &Bimodule, n: &Bimodule) -> Result<Tensor> {
    if !same_algebra(&m.right, &n.left) {
        return Err(Error::Invalid("tensor factors do not share the middle algebra".into()));
    }
    let p = m.prime();
    let (dm, dn) = (m.dim, n.dim);
    let plain = dm * dn;
    let im = Matrix::identity(p, dm);
    let inn = Matrix::identity(p, dn);
    let mut rel_vecs = Vec::new();
    for k in 0..m.right.dim() {
        let r = m.right_act[k].kron(&inn).sub(&im.kron(&n.left_act[k]));
        rel_vecs.extend(r.columns().into_iter().filter(|c| c.iter().any(|&v| v != 0)));
    }
    let rel = Subspace::from_vectors(p, plain, &rel_vecs);
    let q = quotient_space(plain, &rel);
    let induce = |x: &Matrix| q.projection.mul(x).mul(&q.section);
    let l = m.left_act.iter().map(|a| induce(&a.kron(&inn))).collect();
    let r = n.right_act.iter().map(|a| induce(&im.kron(a))).collect();
    let module = Bimodule::new(m.left.clone(), n.right.clone(), q.dim, l, r)?;
    Ok(Tensor {
        module,
        proj: q.projection,
        sec: q.section,
        left_dim: dm,
        right_dim: dn,
    })
}

/// The map induced on a quotient by `y` defined on representatives; fails
/// unless `y` kills the kernel of `proj`.
pub fn factor_through(y: &Matrix, proj: &Matrix, sec: &Matrix, what: &str) -> Result<Matrix> {
    let f = y.mul(sec);
    if f.mul(proj) != *y {
        return Err(Error::WellDefinedness(what.to_string()));
    }
    Ok(f)
}

/// Three-fold product `M ⊗ (N ⊗ O)`, with the map from plain triples.
#[derive(Clone, Debug)]
pub struct Triple {
    pub inner: Tensor,
    pub outer: Tensor,
    /// From the plain index `(x * dim N + y) * dim O + z`.
    pub from_plain: Matrix,
    pub to_plain: Matrix,
}

pub fn triple_right(m: &Bimodule, n: &Bimodule, o: &Bimodule) -> Result<Triple> {
    let inner = tensor_over(n, o)?;
    let outer = tensor_over(m, &inner.module)?;
    let from_plain = outer
        .proj
        .mul(&Matrix::identity(m.prime(), m.dim).kron(&inner.proj));
    let to_plain = Matrix::identity(m.prime(), m.dim).kron(&inner.sec).mul(&outer.sec);
    Ok(Triple {
        inner,
        outer,
        from_plain,
        to_plain,
    })
}

/// Three-fold product `(M ⊗ N) ⊗ O`.
pub fn triple_left(m: &Bimodule, n: &Bimodule, o: &Bimodule) -> Result<Triple> {
    let inner = tensor_over(m, n)?;
    let outer = tensor_over(&inner.module, o)?;
    let from_plain = outer
        .proj
        .mul(&inner.proj.kron(&Matrix::identity(m.prime(), o.dim)));
    let to_plain = inner.sec.kron(&Matrix::identity(m.prime(), o.dim)).mul(&outer.sec);
    Ok(Triple {
        inner,
        outer,
        from_plain,
        to_plain,
    })
}

/// Left-associated product `((M_1 ⊗ M_2) ⊗ ...) ⊗ M_n` with maps from and to
/// the plain product, whose index is lexicographic in the factors.
#[derive(Clone, Debug)]
pub struct Nested {
    pub module: Bimodule,
    pub proj: Matrix,
    pub sec: Matrix,
    pub dims: Vec<usize>,
}

impl Nested {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn plain_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Class of `v_1 ⊗ ... ⊗ v_n`.
    pub fn element(&self, vecs: &[&[u64]]) -> Vec<u64> {
        let p = self.module.prime();
        let plain = vecs[1..].iter().fold(vecs[0].to_vec(), |acc, v| kron_vec(p, &acc, v));
        self.proj.apply(&plain)
    }
}

pub fn nested(factors: &[&Bimodule]) -> Result<Nested> {
    let first = factors.first().ok_or_else(|| Error::Invalid("empty tensor product".into()))?;
    let p = first.prime();
    let mut cur = Nested {
        module: (*first).clone(),
        proj: Matrix::identity(p, first.dim),
        sec: Matrix::identity(p, first.dim),
        dims: vec![first.dim],
    };
    for f in &factors[1..] {
        let t = tensor_over(&cur.module, f)?;
        let id = Matrix::identity(p, f.dim);
        cur = Nested {
            proj: t.proj.mul(&cur.proj.kron(&id)),
            sec: cur.sec.kron(&id).mul(&t.sec),
            module: t.module,
            dims: cur.dims.iter().copied().chain([f.dim]).collect(),
        };
    }
    Ok(cur)
}

/// Matrix of a linear map given on plain basis tuples, listed lexicographically.
pub fn plain_map<F>(p: u64, dims: &[usize], out_dim: usize, f: F) -> Matrix
where
    F: Fn(&[usize]) -> Vec<u64>,
{
    let total: usize = dims.iter().product();
    let mut out = Matrix::zeros(p, out_dim, total);
    let mut idx = vec![0; dims.len()];
    for col in 0..total {
        let mut rem = col;
        for k in (0..dims.len()).rev() {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        let v = f(&idx);
        if v.iter().any(|&x| x != 0) {
            out.set_column(col, &v);
        }
    }
    out
}

/// Whether the action map `M ⊗_A A -> M` (right) or `A ⊗_A M -> M` (left) is bijective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn is_firm(m: &Bimodule, side: Side) -> Result<bool> {
    let p = m.prime();
    match side {
        Side::Right => {
            let a = m.right.clone();
            let t = tensor_over(m, &Bimodule::regular(&a))?;
            let mut y = Matrix::zeros(p, m.dim, t.plain_dim());
            for x in 0..m.dim {
                for k in 0..a.dim() {
                    y.set_column(x * a.dim() + k, &m.right_act[k].column(x));
                }
            }
            let f = factor_through(&y, &t.proj, &t.sec, "right action map")?;
            Ok(crate::linalg::is_isomorphism(&f))
        }
        Side::Left => {
            let b = m.left.clone();
            let t = tensor_over(&Bimodule::regular(&b), m)?;
            let mut y = Matrix::zeros(p, m.dim, t.plain_dim());
            for k in 0..b.dim() {
                for x in 0..m.dim {
                    y.set_column(k * m.dim + x, &m.left_act[k].column(x));
                }
            }
            let f = factor_through(&y, &t.proj, &t.sec, "left action map")?;
            Ok(crate::linalg::is_isomorphism(&f))
        }
    }
}

/// Basis of `{ X : dim_out x dim_in | constraint(X) = 0 }` for a linear constraint.
pub fn solve_linear_maps<F>(p: u64, dim_in: usize, dim_out: usize, constraint: F) -> Vec<Matrix>
where
    F: Fn(&Matrix) -> Vec<u64>,
{
    let n = dim_in * dim_out;
    if n == 0 {
        return Vec::new();
    }
    let cols: Vec<Vec<u64>> = (0..n)
        .map(|k| constraint(&Matrix::from_vec(p, dim_out, dim_in, unit_vector(n, k))))
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    let system = Matrix::from_columns(p, rows, &cols);
    kernel_basis(&system)
        .basis_vectors()
        .into_iter()
        .map(|v| Matrix::from_vec(p, dim_out, dim_in, v))
        .collect()
}

/// Right `A`-linear maps `P -> A`, as an `(A, B)`-bimodule with explicit
/// functional matrices (`dim A x dim P`) for each basis vector.
#[derive(Clone, Debug)]
pub struct DualModule {
    pub module: Bimodule,
    pub functionals: Vec<Matrix>,
    space: Subspace,
    rows: usize,
    cols: usize,
}

impl DualModule {
    pub fn dim(&self) -> usize {
        self.functionals.len()
    }

    /// The functional with the given coordinates.
    pub fn functional(&self, coords: &[u64]) -> Matrix {
        let p = self.module.prime();
        let mut out = Matrix::zeros(p, self.rows, self.cols);
        for (c, f) in coords.iter().zip(&self.functionals) {
            if *c != 0 {
                out = out.add(&f.scale(*c));
            }
        }
        out
    }

    /// Coordinates of a functional, if it lies in this space.
    pub fn coords(&self, phi: &Matrix) -> Option<Vec<u64>> {
        let v = phi.to_vec();
        let p = self.module.prime();
        let basis = Matrix::from_columns(
            p,
            self.rows * self.cols,
            &self.functionals.iter().map(Matrix::to_vec).collect::<Vec<_>>(),
        );
        basis
            .solve_right(&Matrix::from_columns(p, v.len(), &[v]))
            .map(|x| x.column(0))
    }

    /// Stacked coordinate columns for a list of functionals.
    pub fn coords_matrix(&self, phis: &[Matrix]) -> Option<Matrix> {
        let cols: Option<Vec<Vec<u64>>> = phis.iter().map(|f| self.coords(f)).collect();
        Some(Matrix::from_columns(self.module.prime(), self.dim(), &cols?))
    }

    /// Subspace (in flattened functional coordinates) spanned by this dual.
    pub fn span(&self) -> &Subspace {
        &self.space
    }

    /// Restriction to the sub-bimodule with the given coordinate subspace.
    pub fn restrict(&self, sub: &Subspace) -> Result<(DualModule, Matrix)> {
        let (module, incl) = self.module.submodule(sub)?;
        let functionals: Vec<Matrix> = incl.columns().iter().map(|c| self.functional(c)).collect();
        let flat: Vec<Vec<u64>> = functionals.iter().map(Matrix::to_vec).collect();
        let space = Subspace::from_vectors(self.module.prime(), self.rows * self.cols, &flat);
        Ok((
            DualModule {
                module,
                functionals,
                space,
                rows: self.rows,
                cols: self.cols,
            },
            incl,
        ))
    }

    /// Evaluation `φ ⊗ x ↦ φ(x)` on the plain product `P* ⊗ P` (`dim A x dim P* · dim P`).
    pub fn evaluation_plain(&self) -> Matrix {
        let p = self.module.prime();
        let dp = self.cols;
        let mut out = Matrix::zeros(p, self.rows, self.dim() * dp);
        for (l, f) in self.functionals.iter().enumerate() {
            for x in 0..dp {
                out.set_column(l * dp + x, &f.column(x));
            }
        }
        out
    }
}

/// `Hom_A(P, A)` for a `(B, A)`-bimodule `P` over unital `A`.
pub fn dual_module(p: &Bimodule) -> Result<DualModule> {
    let a = p.right.clone();
    if a.unit().is_none() {
        return Err(Error::Precondition("dual module needs a unital right algebra".into()));
    }
    let pr = p.prime();
    let (da, dp) = (a.dim(), p.dim);
    let basis = solve_linear_maps(pr, dp, da, |phi| {
        let mut out = Vec::with_capacity(da * da * dp);
        for k in 0..da {
            let d = phi.mul(&p.right_act[k]).sub(&a.right_regular(k).mul(phi));
            out.extend_from_slice(d.entries());
        }
        out
    });
    let flat: Vec<Vec<u64>> = basis.iter().map(Matrix::to_vec).collect();
    let space = Subspace::from_vectors(pr, da * dp, &flat);
    let mut dual = DualModule {
        module: Bimodule::zero(a.clone(), p.left.clone()),
        functionals: basis,
        space,
        rows: da,
        cols: dp,
    };
    let left: Vec<Matrix> = (0..da)
        .map(|k| {
            let imgs: Vec<Matrix> = dual.functionals.iter().map(|f| a.left_regular(k).mul(f)).collect();
            dual.coords_matrix(&imgs).expect("left action preserves the dual")
        })
        .collect();
    let right: Vec<Matrix> = (0..p.left.dim())
        .map(|k| {
            let imgs: Vec<Matrix> = dual.functionals.iter().map(|f| f.mul(&p.left_act[k])).collect();
            dual.coords_matrix(&imgs).expect("right action preserves the dual")
        })
        .collect();
    dual.module = Bimodule::new(a, p.left.clone(), dual.functionals.len(), left, right)?;
    Ok(dual)
}

/// `f*: Q* -> P*`, `ψ ↦ ψ ∘ f`, for `f: P -> Q`.
pub fn dual_map(f: &Matrix, dual_q: &DualModule, dual_p: &DualModule) -> Result<Matrix> {
    let imgs: Vec<Matrix> = dual_q.functionals.iter().map(|psi| psi.mul(f)).collect();
    dual_p
        .coords_matrix(&imgs)
        .ok_or_else(|| Error::Invalid("precomposition leaves the dual".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_isomorphism;

    fn arc(a: FiniteAlgebra) -> Arc<FiniteAlgebra> {
        Arc::new(a)
    }

    /// Columns `F_p^n` as an `(M_n, F_p)`-bimodule.
    fn columns(p: u64, n: usize) -> Bimodule {
        let m = arc(FiniteAlgebra::matrix_algebra(p, n));
        let k = arc(FiniteAlgebra::field(p));
        let l = (0..n * n)
            .map(|idx| {
                let mut e = Matrix::zeros(p, n, n);
                e.set(idx / n, idx % n, 1);
                e
            })
            .collect();
        Bimodule::new(m, k, n, l, vec![Matrix::identity(p, n)]).unwrap()
    }

    /// Rows `F_p^n` as an `(F_p, M_n)`-bimodule; `v · E_rc` moves coordinate `r` to `c`.
    fn rows(p: u64, n: usize, m: &Arc<FiniteAlgebra>) -> Bimodule {
        let k = arc(FiniteAlgebra::field(p));
        let r = (0..n * n)
            .map(|idx| {
                let mut e = Matrix::zeros(p, n, n);
                e.set(idx % n, idx / n, 1);
                e
            })
            .collect();
        Bimodule::new(k, m.clone(), n, vec![Matrix::identity(p, n)], r).unwrap()
    }

    /// Relation-enumeration oracle: dimension of the span of all
    /// `(x b) ⊗ y - x ⊗ (b y)` over basis triples, computed independently.
    fn oracle_tensor_dim(m: &Bimodule, n: &Bimodule) -> usize {
        let p = m.prime();
        let mut vecs = Vec::new();
        for k in 0..m.right_algebra().dim() {
            for x in 0..m.dim() {
                for y in 0..n.dim() {
                    let xb = m.right_actions()[k].column(x);
                    let by = n.left_actions()[k].column(y);
                    let mut v = kron_vec(p, &xb, &unit_vector(n.dim(), y));
                    let w = kron_vec(p, &unit_vector(m.dim(), x), &by);
                    for (a, b) in v.iter_mut().zip(w) {
                        *a = crate::linalg::sub(p, *a, b);
                    }
                    vecs.push(v);
                }
            }
        }
        m.dim() * n.dim() - Subspace::from_vectors(p, m.dim() * n.dim(), &vecs).dim()
    }

    #[test]
    fn tensor_examples() {
        let k = arc(FiniteAlgebra::field(2));
        let f = Bimodule::regular(&k);
        assert_eq!(tensor_over(&f, &f).unwrap().dim(), 1);

        let a = arc(FiniteAlgebra::truncated_polynomial(2, 2));
        let a_over_k = Bimodule::new(a.clone(), k.clone(), 2, (0..2).map(|i| a.left_regular(i).clone()).collect(), vec![Matrix::identity(2, 2)]).unwrap();
        let k_over_a = Bimodule::new(k.clone(), a.clone(), 2, vec![Matrix::identity(2, 2)], (0..2).map(|i| a.right_regular(i).clone()).collect()).unwrap();
        let t = tensor_over(&a_over_k, &k_over_a).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(oracle_tensor_dim(&a_over_k, &k_over_a), 4);

        let cols = columns(2, 3);
        let rws = rows(2, 3, cols.left_algebra());
        let t = tensor_over(&rws, &cols).unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(oracle_tensor_dim(&rws, &cols), 1);
    }

    #[test]
    fn bimodule_laws_hold_for_examples() {
        let cols = columns(3, 2);
        cols.check().unwrap();
        rows(3, 2, cols.left_algebra()).check().unwrap();
        let a = arc(FiniteAlgebra::truncated_polynomial(2, 3));
        Bimodule::regular(&a).check().unwrap();
    }

    #[test]
    fn firmness() {
        let m = arc(FiniteAlgebra::matrix_algebra(2, 2));
        assert!(is_firm(&columns(2, 2), Side::Left).unwrap());
        assert!(is_firm(&Bimodule::regular(&m), Side::Right).unwrap());

        // zero action of a nonunital algebra with local units
        let mut table = vec![0; 1];
        table[0] = 1;
        let e = arc(FiniteAlgebra::from_table(2, 1, table, None));
        let zero_act = Bimodule::right_module(&e, 1, vec![Matrix::zeros(2, 1, 1)]).unwrap();
        assert!(!is_firm(&zero_act, Side::Right).unwrap());
    }

    #[test]
    fn unital_tensor_is_identity() {
        let m = arc(FiniteAlgebra::matrix_algebra(2, 2));
        let n = columns(2, 2);
        let t = tensor_over(&Bimodule::regular(&m), &n).unwrap();
        assert_eq!(t.dim(), n.dim());
    }

    #[test]
    fn dual_examples() {
        let a = arc(FiniteAlgebra::truncated_polynomial(2, 2));
        let d = dual_module(&Bimodule::regular(&a)).unwrap();
        assert_eq!(d.dim(), a.dim());
        d.module.check().unwrap();

        let cols = columns(2, 2);
        let d = dual_module(&cols).unwrap();
        assert_eq!(d.dim(), 2);
        d.module.check().unwrap();

        let k = arc(FiniteAlgebra::field(2));
        let zero = Bimodule::zero(k.clone(), k);
        assert_eq!(dual_module(&zero).unwrap().dim(), 0);
    }

    #[test]
    fn dual_is_contravariant() {
        let cols = columns(2, 3);
        let d = dual_module(&cols).unwrap();
        let m = cols.left_algebra().clone();
        // left multiplications by basis elements are right-linear endomorphisms
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                let f = &cols.left_actions()[i];
                let g = &cols.left_actions()[j];
                let lhs = dual_map(&g.mul(f), &d, &d).unwrap();
                let rhs = dual_map(f, &d, &d).unwrap().mul(&dual_map(g, &d, &d).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn solve_linear_maps_finds_commutant() {
        let cols = columns(2, 2);
        let m = cols.left_algebra();
        // endomorphisms commuting with the full matrix algebra are scalars
        let sols = solve_linear_maps(2, 2, 2, |x| {
            let mut out = Vec::new();
            for k in 0..m.dim() {
                let a = &cols.left_actions()[k];
                out.extend_from_slice(x.mul(a).sub(&a.mul(x)).entries());
            }
            out
        });
        assert_eq!(sols.len(), 1);
        assert!(sols[0].is_identity());
        assert!(is_isomorphism(&sols[0]));
    }

    #[test]
    fn spin_generates_submodules() {
        let m = arc(FiniteAlgebra::matrix_algebra(2, 2));
        let reg = Bimodule::regular_right(&m);
        // E_11 · M_2 is the first row
        assert_eq!(reg.spin(&[1, 0, 0, 0]).dim(), 2);
        assert_eq!(reg.spin(&[1, 0, 0, 1]).dim(), 4);
    }
}
