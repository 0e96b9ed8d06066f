//! Built-in firm bimodule systems.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::FiniteAlgebra;
use crate::bimodule::Bimodule;
use crate::comatrix::FirmBimoduleSystem;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poset::DirectedPoset;
use crate::system::{DirectSystem, LazyChain, Level};

pub const DEFAULT_BUDGET: usize = 64;

/// Largest number of summands accepted by the direct-sum generator; the poset has `2^m - 1` elements.
pub const MAX_PARTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    Sweedler,
    Block,
    Corner(usize),
    LazyCorner(usize),
    KgtDirectSum(Vec<usize>),
    /// `F ⊕ 0` over the block algebra: flat, not faithfully flat.
    Degenerate,
}

impl Generator {
    pub fn parse(name: &str, params: &[usize]) -> Result<Self> {
        let one = |what: &str| -> Result<usize> {
            match params {
                [n] if *n >= 1 => Ok(*n),
                _ => Err(Error::Invalid(format!("{what} takes one positive parameter"))),
            }
        };
        let none = |g: Generator| -> Result<Generator> {
            if params.is_empty() {
                Ok(g)
            } else {
                Err(Error::Invalid(format!("{name} takes no parameters")))
            }
        };
        match name {
            "sweedler" => none(Self::Sweedler),
            "block" => none(Self::Block),
            "degenerate" => none(Self::Degenerate),
            "corner" => one("corner").map(Self::Corner),
            "lazy-corner" => one("lazy-corner").map(Self::LazyCorner),
            "kgt-directsum" => {
                if params.is_empty() || params.contains(&0) {
                    return Err(Error::Invalid("kgt-directsum takes positive part sizes".into()));
                }
                Ok(Self::KgtDirectSum(params.to_vec()))
            }
            other => Err(Error::Invalid(format!("unknown generator {other}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sweedler => "sweedler",
            Self::Block => "block",
            Self::Corner(_) => "corner",
            Self::LazyCorner(_) => "lazy-corner",
            Self::KgtDirectSum(_) => "kgt-directsum",
            Self::Degenerate => "degenerate",
        }
    }

    pub fn params(&self) -> Vec<usize> {
        match self {
            Self::Corner(n) | Self::LazyCorner(n) => vec![*n],
            Self::KgtDirectSum(parts) => parts.clone(),
            _ => Vec::new(),
        }
    }

    /// `dim B + dim P + dim A` at the top of the system.
    pub fn size(&self) -> usize {
        match self {
            Self::Sweedler => 1 + 2 + 2,
            Self::Block => 5 + 3 + 2,
            Self::Degenerate => 5 + 1 + 1,
            Self::Corner(n) | Self::LazyCorner(n) => n * n + n + 1,
            Self::KgtDirectSum(parts) => parts.iter().map(|n| n * n + n + 1).sum(),
        }
    }

    pub fn build(&self, p: u64, budget: usize) -> Result<FirmBimoduleSystem> {
        if self.size() > budget {
            return Err(Error::BudgetExceeded(format!("{self} has size {} over the cap {budget}", self.size())));
        }
        match self {
            Self::Sweedler => sweedler(p),
            Self::Block => kgt_direct_sum(p, &[1, 2]),
            Self::Degenerate => degenerate(p),
            Self::Corner(n) => corner(p, *n),
            Self::LazyCorner(n) => LazyCorner::new(p).truncate(*n),
            Self::KgtDirectSum(parts) => {
                if parts.len() > MAX_PARTS {
                    return Err(Error::BudgetExceeded(format!("at most {MAX_PARTS} summands")));
                }
                kgt_direct_sum(p, parts)
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        for n in self.params() {
            write!(f, " {n}")?;
        }
        Ok(())
    }
}

fn pad(p: u64, from: usize, to: usize) -> Matrix {
    let mut m = Matrix::zeros(p, to, from);
    for i in 0..from {
        m.set(i, i, 1);
    }
    m
}

/// `E_rc` of `M_m` to `E_rc` of `M_n`, for `m <= n`.
fn pad_matrices(p: u64, m: usize, n: usize) -> Matrix {
    let mut out = Matrix::zeros(p, n * n, m * m);
    for r in 0..m {
        for c in 0..m {
            out.set(r * n + c, r * m + c, 1);
        }
    }
    out
}

/// `F^n` as an `(M_n, A)`-bimodule, with `A` acting through `weights`.
fn columns(b: &Arc<FiniteAlgebra>, a: &Arc<FiniteAlgebra>, n: usize, weights: &[u64]) -> Result<Bimodule> {
    let p = b.prime();
    let left = (0..n * n)
        .map(|idx| {
            let mut e = Matrix::zeros(p, n, n);
            e.set(idx / n, idx % n, 1);
            e
        })
        .collect();
    let right = weights.iter().map(|&w| Matrix::identity(p, n).scale(w)).collect();
    Bimodule::new(b.clone(), a.clone(), n, left, right)
}

fn point_system<T: crate::system::SystemObject>(object: T) -> Result<DirectSystem<T>> {
    DirectSystem::new(DirectedPoset::point(), vec![object], BTreeMap::new(), Some(BTreeMap::new()))
}

/// `A = F_p[x]/(x^2)` over `B = F_p` with `P = A`.
pub fn sweedler(p: u64) -> Result<FirmBimoduleSystem> {
    let a = Arc::new(FiniteAlgebra::truncated_polynomial(p, 2));
    let module = Bimodule::regular_right(&a);
    let b = module.left_algebra().clone();
    FirmBimoduleSystem::new(a, point_system(b)?, point_system(module)?)
}

/// The chain `M_1 ⊂ ... ⊂ M_n` acting on `F ⊂ ... ⊂ F^n` over `A = F`.
pub fn corner(p: u64, n: usize) -> Result<FirmBimoduleSystem> {
    let a = Arc::new(FiniteAlgebra::field(p));
    let rings: Vec<Arc<FiniteAlgebra>> = (1..=n).map(|i| Arc::new(FiniteAlgebra::matrix_algebra(p, i))).collect();
    let modules = rings.iter().enumerate().map(|(i, b)| columns(b, &a, i + 1, &[1])).collect::<Result<Vec<_>>>()?;
    let mut rf = BTreeMap::new();
    let mut rb = BTreeMap::new();
    let mut mf = BTreeMap::new();
    let mut mb = BTreeMap::new();
    for i in 1..n {
        rf.insert((i - 1, i), pad_matrices(p, i, i + 1));
        rb.insert((i - 1, i), pad_matrices(p, i, i + 1).transpose());
        mf.insert((i - 1, i), pad(p, i, i + 1));
        mb.insert((i - 1, i), pad(p, i, i + 1).transpose());
    }
    let poset = DirectedPoset::chain(n);
    FirmBimoduleSystem::new(
        a,
        DirectSystem::new(poset.clone(), rings, rf, Some(rb))?,
        DirectSystem::new(poset, modules, mf, Some(mb))?,
    )
}

/// Corner levels `e_i B e_i` acting on `e_i P`, with inclusions and the
/// truncations `x ↦ e_i x e_i`, `p ↦ e_i p`. Needs `e_i e_j = e_j e_i = e_i` for `i <= j`.
pub fn from_idempotents(
    poset: DirectedPoset,
    b: &Arc<FiniteAlgebra>,
    module: &Bimodule,
    idempotents: &[Vec<u64>],
) -> Result<FirmBimoduleSystem> {
    if idempotents.len() != poset.len() {
        return Err(Error::DimensionMismatch("one idempotent per poset element".into()));
    }
    let a = module.right_algebra().clone();
    let mut rings = Vec::new();
    let mut ring_incl = Vec::new();
    let mut modules = Vec::new();
    let mut mod_incl = Vec::new();
    for e in idempotents {
        let (bi, incl) = b.corner(e)?;
        let bi = Arc::new(bi);
        let space = module.left_matrix(e).image();
        let q = space.inclusion();
        let induce = |m: &Matrix| -> Result<Matrix> {
            space
                .coordinate_matrix(&m.mul(&q))
                .ok_or_else(|| Error::Invalid("corner of the module is not invariant".into()))
        };
        let left = (0..bi.dim())
            .map(|k| induce(&module.left_matrix(&incl.column(k))))
            .collect::<Result<Vec<_>>>()?;
        let right = module.right_actions().iter().map(induce).collect::<Result<Vec<_>>>()?;
        modules.push(Bimodule::new(bi.clone(), a.clone(), space.dim(), left, right)?);
        rings.push(bi);
        ring_incl.push(incl);
        mod_incl.push(q);
    }
    let solve = |lhs: &Matrix, rhs: &Matrix, what: &str| -> Result<Matrix> {
        lhs.solve_right(rhs)
            .ok_or_else(|| Error::Invalid(format!("idempotents are not nested: {what}")))
    };
    let (mut rf, mut rb, mut mf, mut mb) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for (i, j) in poset.comparable_pairs() {
        if i == j {
            continue;
        }
        let at = format!("({}, {})", poset.label(i), poset.label(j));
        let ei = &idempotents[i];
        let sandwich = b.left_mul_matrix(ei).mul(&b.right_mul_matrix(ei));
        rf.insert((i, j), solve(&ring_incl[j], &ring_incl[i], &at)?);
        rb.insert((i, j), solve(&ring_incl[i], &sandwich.mul(&ring_incl[j]), &at)?);
        mf.insert((i, j), solve(&mod_incl[j], &mod_incl[i], &at)?);
        mb.insert((i, j), solve(&mod_incl[i], &module.left_matrix(ei).mul(&mod_incl[j]), &at)?);
    }
    FirmBimoduleSystem::new(
        a,
        DirectSystem::new(poset.clone(), rings, rf, Some(rb))?,
        DirectSystem::new(poset, modules, mf, Some(mb))?,
    )
}

/// `B = M_{n_1} × ... × M_{n_m}` acting on `P = F^{n_1} ⊕ ... ⊕ F^{n_m}`,
/// `A = F^m` acting on the `k`-th summand through its `k`-th factor, over
/// the nonempty subsets of the summands.
pub fn kgt_direct_sum(p: u64, parts: &[usize]) -> Result<FirmBimoduleSystem> {
    let m = parts.len();
    let fields: Vec<FiniteAlgebra> = (0..m).map(|_| FiniteAlgebra::field(p)).collect();
    let a = Arc::new(FiniteAlgebra::product(p, &fields.iter().collect::<Vec<_>>()));
    let blocks: Vec<FiniteAlgebra> = parts.iter().map(|&n| FiniteAlgebra::matrix_algebra(p, n)).collect();
    let b = Arc::new(FiniteAlgebra::product(p, &blocks.iter().collect::<Vec<_>>()));
    let module = block_module(p, &b, &a, parts, &vec![true; m])?;
    let mut offsets = Vec::with_capacity(m);
    let mut off = 0;
    for &n in parts {
        offsets.push(off);
        off += n * n;
    }
    let poset = DirectedPoset::subsets(m);
    let masks: Vec<usize> = (1..1usize << m).collect();
    let idempotents: Vec<Vec<u64>> = masks
        .iter()
        .map(|mask| {
            let mut e = vec![0; b.dim()];
            for (k, &n) in parts.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    for d in 0..n {
                        e[offsets[k] + d * n + d] = 1;
                    }
                }
            }
            e
        })
        .collect();
    from_idempotents(poset, &b, &module, &idempotents)
}

/// `⊕ F^{n_k}` over `(∏ M_{n_k}, A)`, keeping only the summands flagged in `keep`.
/// `A` is either `F^m` acting summand-wise or `F`.
fn block_module(p: u64, b: &Arc<FiniteAlgebra>, a: &Arc<FiniteAlgebra>, parts: &[usize], keep: &[bool]) -> Result<Bimodule> {
    let dims: Vec<usize> = parts.iter().zip(keep).map(|(&n, &k)| if k { n } else { 0 }).collect();
    let total: usize = dims.iter().sum();
    let mut left = Vec::with_capacity(b.dim());
    let mut row_off = 0;
    for (k, &n) in parts.iter().enumerate() {
        for idx in 0..n * n {
            let mut e = Matrix::zeros(p, total, total);
            if keep[k] {
                e.set(row_off + idx / n, row_off + idx % n, 1);
            }
            left.push(e);
        }
        row_off += dims[k];
    }
    let right = if a.dim() == parts.len() {
        let mut out = Vec::with_capacity(a.dim());
        let mut off = 0;
        for &d in &dims {
            let mut e = Matrix::zeros(p, total, total);
            for x in 0..d {
                e.set(off + x, off + x, 1);
            }
            out.push(e);
            off += d;
        }
        out
    } else {
        vec![Matrix::identity(p, total)]
    };
    Bimodule::new(b.clone(), a.clone(), total, left, right)
}

/// `F ⊕ 0` over the block algebra `F × M_2`, with `A = F`, as a single level.
pub fn degenerate(p: u64) -> Result<FirmBimoduleSystem> {
    let a = Arc::new(FiniteAlgebra::field(p));
    let b = Arc::new(FiniteAlgebra::product(
        p,
        &[&FiniteAlgebra::field(p), &FiniteAlgebra::matrix_algebra(p, 2)],
    ));
    let module = block_module(p, &b, &a, &[1, 2], &[true, false])?;
    FirmBimoduleSystem::new(a, point_system(b)?, point_system(module)?)
}

/// The corner chain produced level by level on demand.
pub struct LazyCorner {
    p: u64,
    rings: LazyChain<Arc<FiniteAlgebra>>,
    modules: LazyChain<Bimodule>,
}

impl LazyCorner {
    pub fn new(p: u64) -> Self {
        let a = Arc::new(FiniteAlgebra::field(p));
        let rings = LazyChain::new(move |n| Level {
            object: Arc::new(FiniteAlgebra::matrix_algebra(p, n)),
            up: pad_matrices(p, n - 1, n),
            down: Some(pad_matrices(p, n - 1, n).transpose()),
        });
        let modules = LazyChain::new(move |n| Level {
            object: columns(&Arc::new(FiniteAlgebra::matrix_algebra(p, n)), &a, n, &[1]).expect("column module"),
            up: pad(p, n - 1, n),
            down: Some(pad(p, n - 1, n).transpose()),
        });
        Self { p, rings, modules }
    }

    pub fn generated_levels(&self) -> usize {
        self.rings.generated_levels()
    }

    pub fn truncate(&self, n: usize) -> Result<FirmBimoduleSystem> {
        let rings = self.rings.truncate(n)?;
        let objects: Vec<Arc<FiniteAlgebra>> = rings.objects().to_vec();
        let mods = self.modules.truncate(n)?;
        // Rebind module left algebras to the ring chain's objects.
        let modules = mods
            .objects()
            .iter()
            .zip(&objects)
            .map(|(m, b)| m.with_left_algebra(b.clone()))
            .collect::<Result<Vec<_>>>()?;
        let mods = DirectSystem::new(
            mods.poset().clone(),
            modules,
            mods.transitions().clone(),
            mods.retractions_map().cloned(),
        )?
        .with_truncation(true);
        FirmBimoduleSystem::new(Arc::new(FiniteAlgebra::field(self.p)), rings, mods)
    }
}

/// The unit vector of `B` at the identity of the `k`-th block.
pub fn block_unit(parts: &[usize], k: usize) -> Vec<u64> {
    let total: usize = parts.iter().map(|n| n * n).sum();
    let off: usize = parts[..k].iter().map(|n| n * n).sum();
    let n = parts[k];
    let mut e = vec![0; total];
    for d in 0..n {
        e[off + d * n + d] = 1;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comatrix::build_context;

    #[test]
    fn parse_round_trip() {
        for g in [
            Generator::Sweedler,
            Generator::Block,
            Generator::Corner(3),
            Generator::LazyCorner(4),
            Generator::KgtDirectSum(vec![1, 2]),
            Generator::Degenerate,
        ] {
            assert_eq!(Generator::parse(g.name(), &g.params()).unwrap(), g);
        }
        assert!(Generator::parse("corner", &[]).is_err());
        assert!(Generator::parse("nope", &[]).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(Generator::Corner(8).build(2, DEFAULT_BUDGET), Err(Error::BudgetExceeded(_))));
        assert!(Generator::Corner(7).build(2, DEFAULT_BUDGET).is_ok());
    }

    #[test]
    fn block_levels() {
        let sys = Generator::Block.build(2, DEFAULT_BUDGET).unwrap();
        let dims: Vec<usize> = sys.modules.objects().iter().map(Bimodule::dim).collect();
        assert_eq!(dims, vec![1, 2, 3]);
        let rdims: Vec<usize> = sys.rings.objects().iter().map(|b| b.dim()).collect();
        assert_eq!(rdims, vec![1, 4, 5]);
        assert!(sys.check_compat().all_passed());
    }

    #[test]
    fn corner_matches_idempotent_construction() {
        let p = 2;
        let n = 3;
        let b = Arc::new(FiniteAlgebra::matrix_algebra(p, n));
        let a = Arc::new(FiniteAlgebra::field(p));
        let module = columns(&b, &a, n, &[1]).unwrap();
        let idem: Vec<Vec<u64>> = (1..=n)
            .map(|i| (0..n * n).map(|k| u64::from(k / n == k % n && k / n < i)).collect())
            .collect();
        let via = from_idempotents(DirectedPoset::chain(n), &b, &module, &idem).unwrap();
        let direct = corner(p, n).unwrap();
        assert!(via.check_compat().all_passed());
        let x = build_context(&via).unwrap();
        let y = build_context(&direct).unwrap();
        assert_eq!(x.comatrix.coring.dim(), y.comatrix.coring.dim());
        assert_eq!(x.ring.dim(), y.ring.dim());
        assert_eq!(x.pdagger.dim(), y.pdagger.dim());
    }

    #[test]
    fn lazy_corner_truncations() {
        let lazy = LazyCorner::new(2);
        let sys = lazy.truncate(3).unwrap();
        assert!(sys.modules.truncated());
        assert!(sys.check_compat().all_passed());
        assert_eq!(lazy.generated_levels(), 3);
    }

    #[test]
    fn every_generator_builds_a_compatible_system() {
        for g in [Generator::Sweedler, Generator::Degenerate, Generator::KgtDirectSum(vec![2, 1, 1])] {
            let sys = g.build(2, DEFAULT_BUDGET).unwrap();
            let r = sys.check_compat();
            assert!(r.all_passed(), "{g}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }
}
