//! The adjunctions of a comatrix coring context, flatness tests and the
//! descent comparison on finite test sets.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::FiniteAlgebra;
use crate::bimodule::{factor_through, is_firm, nested, plain_map, solve_linear_maps, tensor_over, Bimodule, Nested, Side, Tensor};
use crate::comatrix::{dual_basis, ComatrixContext};
use crate::coring::{cotensor, Comodule, Coring};
use crate::error::{Error, Result};
use crate::linalg::{axpy, is_isomorphism, is_zero_vec, unit_vector, Matrix, Subspace};
use crate::par::{self, Exec};
use crate::report::{agree, Report};

/// Largest number of vectors enumerated when no basis vector exposes a proper submodule.
pub const SEARCH_CAP: u64 = 1 << 16;

struct Plain<'a> {
    ctx: &'a ComatrixContext,
    /// `η(e)` on the plain product `P ⊗ P†`.
    unit: Vec<u64>,
    /// `ε` on the plain product `P† ⊗ P`.
    eps: Matrix,
}

impl<'a> Plain<'a> {
    fn new(ctx: &'a ComatrixContext) -> Result<Self> {
        Ok(Self {
            ctx,
            unit: ctx.plain_unit_image()?,
            eps: ctx.plain_eps(),
        })
    }

    fn dp(&self) -> usize {
        self.ctx.p.dim()
    }

    fn dq(&self) -> usize {
        self.ctx.pdag.dim()
    }

    /// Nonzero terms `(coef, x, ψ)` of `η(e)`.
    fn unit_terms(&self) -> Vec<(u64, usize, usize)> {
        let dq = self.dq();
        self.unit
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| (c, k / dq, k % dq))
            .collect()
    }

    /// `m ε(ψ ⊗ x)`.
    fn act(&self, m: &Bimodule, mi: usize, psi: usize, x: usize) -> Vec<u64> {
        m.right_matrix(&self.eps.column(psi * self.dp() + x)).column(mi)
    }
}

fn sum_terms(p: u64, dim: usize, terms: impl IntoIterator<Item = (u64, Vec<u64>)>) -> Vec<u64> {
    let mut out = vec![0; dim];
    for (c, v) in terms {
        axpy(p, &mut out, c, &v);
    }
    out
}

/// Lifts a vector of `M ⊗ N` to the plain product and lists its terms `(coef, m, n)`.
fn plain_terms(t: &Tensor, v: &[u64]) -> Vec<(u64, usize, usize)> {
    let n = t.right_dim;
    t.sec
        .apply(v)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0)
        .map(|(k, c)| (c, k / n, k % n))
        .collect()
}

/// `η_N: N -> N ⊗_B P ⊗_A P†`, `n ↦ n ⊗ η(e)`.
pub fn fg_unit(ctx: &ComatrixContext, n: &Bimodule) -> Result<(Nested, Matrix)> {
    let pl = Plain::new(ctx)?;
    let pr = ctx.prime();
    let target = nested(&[n, &ctx.p, &ctx.pdag])?;
    let (dp, dq) = (pl.dp(), pl.dq());
    let terms = pl.unit_terms();
    let map = plain_map(pr, &[n.dim()], target.dim(), |ix| {
        let e = unit_vector(n.dim(), ix[0]);
        sum_terms(
            pr,
            target.dim(),
            terms
                .iter()
                .map(|&(c, x, q)| (c, target.element(&[&e, &unit_vector(dp, x), &unit_vector(dq, q)]))),
        )
    });
    Ok((target, map))
}

/// `ε_M: M ⊗_A P† ⊗_B P -> M`, `m ⊗ ψ ⊗ x ↦ m ε(ψ ⊗ x)`.
pub fn fg_counit(ctx: &ComatrixContext, m: &Bimodule) -> Result<(Nested, Matrix)> {
    let pl = Plain::new(ctx)?;
    let source = nested(&[m, &ctx.pdag, &ctx.p])?;
    let y = plain_map(ctx.prime(), &source.dims, m.dim(), |ix| pl.act(m, ix[0], ix[1], ix[2]));
    let map = factor_through(&y, &source.proj, &source.sec, "ε_M")?;
    Ok((source, map))
}

/// Both triangle identities of `(- ⊗_B P, - ⊗_A P†)` on the given test modules.
pub fn check_module_adjunction(
    ctx: &ComatrixContext,
    right_b: &[(String, Bimodule)],
    right_a: &[(String, Bimodule)],
    exec: Exec,
) -> Report {
    let mut r = Report::new();
    for (name, out) in right_b.iter().zip(par::map(exec, right_b, |(_, n)| triangle_f(ctx, n))) {
        r.record("triangle-tensor-p", out.map_err(|e| format!("N = {}: {e}", name.0)));
    }
    for (name, out) in right_a.iter().zip(par::map(exec, right_a, |(_, m)| triangle_g(ctx, m))) {
        r.record("triangle-tensor-pdagger", out.map_err(|e| format!("M = {}: {e}", name.0)));
    }
    r
}

fn triangle_f(ctx: &ComatrixContext, n: &Bimodule) -> std::result::Result<(), String> {
    let inner = || -> Result<std::result::Result<(), String>> {
        let pl = Plain::new(ctx)?;
        let pr = ctx.prime();
        let fnn = tensor_over(n, &ctx.p)?;
        let (src, eps) = fg_counit(ctx, &fnn.module)?;
        let (dp, dq) = (pl.dp(), pl.dq());
        let terms = pl.unit_terms();
        let y = plain_map(pr, &[n.dim(), dp], src.dim(), |ix| {
            let e = unit_vector(n.dim(), ix[0]);
            sum_terms(
                pr,
                src.dim(),
                terms.iter().map(|&(c, x, q)| {
                    let head = fnn.element(&e, &unit_vector(dp, x));
                    (c, src.element(&[&head, &unit_vector(dq, q), &unit_vector(dp, ix[1])]))
                }),
            )
        });
        let f_eta = factor_through(&y, &fnn.proj, &fnn.sec, "N ⊗ η ⊗ P")?;
        Ok(agree(&eps.mul(&f_eta), &Matrix::identity(pr, fnn.dim()), "ε_{N⊗P} (η_N ⊗ P)"))
    };
    inner().unwrap_or_else(|e| Err(e.to_string()))
}

fn triangle_g(ctx: &ComatrixContext, m: &Bimodule) -> std::result::Result<(), String> {
    let inner = || -> Result<std::result::Result<(), String>> {
        let pl = Plain::new(ctx)?;
        let pr = ctx.prime();
        let gm = tensor_over(m, &ctx.pdag)?;
        let (tgt, eta) = fg_unit(ctx, &gm.module)?;
        let dq = pl.dq();
        let y = plain_map(pr, &tgt.dims, gm.dim(), |ix| {
            let g = unit_vector(gm.dim(), ix[0]);
            sum_terms(
                pr,
                gm.dim(),
                plain_terms(&gm, &g)
                    .into_iter()
                    .map(|(c, mi, q)| (c, gm.element(&pl.act(m, mi, q, ix[1]), &unit_vector(dq, ix[2])))),
            )
        });
        let g_eps = factor_through(&y, &tgt.proj, &tgt.sec, "ε_M ⊗ P†")?;
        Ok(agree(&g_eps.mul(&eta), &Matrix::identity(pr, gm.dim()), "(ε_M ⊗ P†) η_{M⊗P†}"))
    };
    inner().unwrap_or_else(|e| Err(e.to_string()))
}

/// The right comodule `N ⊗_B P` with coaction `n ⊗ x ↦ n ⊗ ρ(x)`.
pub fn k_functor(ctx: &ComatrixContext, coring: &Coring, n: &Bimodule) -> Result<(Comodule, Tensor)> {
    let pl = Plain::new(ctx)?;
    let pr = ctx.prime();
    let fnn = tensor_over(n, &ctx.p)?;
    let t = tensor_over(&fnn.module, &coring.carrier)?;
    let (dp, dq) = (pl.dp(), pl.dq());
    let terms = pl.unit_terms();
    let y = plain_map(pr, &[n.dim(), dp], t.dim(), |ix| {
        let e = unit_vector(n.dim(), ix[0]);
        sum_terms(
            pr,
            t.dim(),
            terms.iter().map(|&(c, x, q)| {
                let d = ctx.d.element(&unit_vector(dq, q), &unit_vector(dp, ix[1]));
                (c, t.element(&fnn.element(&e, &unit_vector(dp, x)), &d))
            }),
        )
    });
    let coaction = factor_through(&y, &fnn.proj, &fnn.sec, "coaction of N ⊗ P")?;
    Ok((Comodule::new(fnn.module.clone(), Side::Right, coring, coaction)?, fnn))
}

/// `M □_D P†` as a right `B`-module, with its inclusion into `M ⊗_A P†`.
pub struct RModule {
    pub module: Bimodule,
    pub tensor: Tensor,
    pub space: Subspace,
    pub inclusion: Matrix,
}

pub fn r_functor(ctx: &ComatrixContext, coring: &Coring, m: &Comodule) -> Result<RModule> {
    let (_, left) = ctx.comodule_structures(coring)?;
    let cot = cotensor(m, &left, coring)?;
    let (module, inclusion) = cot.tensor.module.submodule(&cot.space)?;
    Ok(RModule {
        module,
        tensor: cot.tensor,
        space: cot.space,
        inclusion,
    })
}

/// `η_N: N -> (N ⊗_B P) □_D P†`, in cotensor coordinates.
pub fn kr_unit(ctx: &ComatrixContext, coring: &Coring, n: &Bimodule) -> Result<(RModule, Matrix)> {
    let pl = Plain::new(ctx)?;
    let pr = ctx.prime();
    let (kn, fnn) = k_functor(ctx, coring, n)?;
    let rk = r_functor(ctx, coring, &kn)?;
    let (dp, dq) = (pl.dp(), pl.dq());
    let terms = pl.unit_terms();
    let y = plain_map(pr, &[n.dim()], rk.tensor.dim(), |ix| {
        let e = unit_vector(n.dim(), ix[0]);
        sum_terms(
            pr,
            rk.tensor.dim(),
            terms
                .iter()
                .map(|&(c, x, q)| (c, rk.tensor.element(&fnn.element(&e, &unit_vector(dp, x)), &unit_vector(dq, q)))),
        )
    });
    let coords = rk
        .space
        .coordinate_matrix(&y)
        .ok_or_else(|| Error::CotensorMembership(format!("η_N misses the cotensor, N of dimension {}", n.dim())))?;
    Ok((rk, coords))
}

/// `ε_M: (M □_D P†) ⊗_B P -> M`.
pub fn kr_counit(ctx: &ComatrixContext, m: &Comodule, rm: &RModule) -> Result<(Tensor, Matrix)> {
    let pl = Plain::new(ctx)?;
    let t = tensor_over(&rm.module, &ctx.p)?;
    let y = plain_map(ctx.prime(), &[rm.module.dim(), pl.dp()], m.dim(), |ix| {
        let v = rm.inclusion.column(ix[0]);
        sum_terms(
            ctx.prime(),
            m.dim(),
            plain_terms(&rm.tensor, &v)
                .into_iter()
                .map(|(c, mi, q)| (c, pl.act(&m.carrier, mi, q, ix[1]))),
        )
    });
    let map = factor_through(&y, &t.proj, &t.sec, "ε_M on (M □ P†) ⊗ P")?;
    Ok((t, map))
}

/// Both triangle identities of `(K, R)` on the given test objects.
pub fn check_comodule_adjunction(
    ctx: &ComatrixContext,
    coring: &Coring,
    right_b: &[(String, Bimodule)],
    comodules: &[(String, Comodule)],
    exec: Exec,
) -> Report {
    let mut r = Report::new();
    for (name, out) in right_b.iter().zip(par::map(exec, right_b, |(_, n)| triangle_k(ctx, coring, n))) {
        r.record("triangle-k", out.map_err(|e| format!("N = {}: {e}", name.0)));
    }
    for (name, out) in comodules.iter().zip(par::map(exec, comodules, |(_, m)| triangle_r(ctx, coring, m))) {
        r.record("triangle-r", out.map_err(|e| format!("M = {}: {e}", name.0)));
    }
    r
}

fn triangle_k(ctx: &ComatrixContext, coring: &Coring, n: &Bimodule) -> std::result::Result<(), String> {
    let inner = || -> Result<std::result::Result<(), String>> {
        let (rk, eta) = kr_unit(ctx, coring, n)?;
        let (kn, fnn) = k_functor(ctx, coring, n)?;
        let (t, eps) = kr_counit(ctx, &kn, &rk)?;
        let k_eta = fnn.map_to(&t, &eta, &Matrix::identity(ctx.prime(), ctx.p.dim()), "η_N ⊗ P")?;
        Ok(agree(&eps.mul(&k_eta), &Matrix::identity(ctx.prime(), kn.dim()), "ε_{K N} K(η_N)"))
    };
    inner().unwrap_or_else(|e| Err(e.to_string()))
}

fn triangle_r(ctx: &ComatrixContext, coring: &Coring, m: &Comodule) -> std::result::Result<(), String> {
    let inner = || -> Result<std::result::Result<(), String>> {
        let pr = ctx.prime();
        let rm = r_functor(ctx, coring, m)?;
        let (_, eps) = kr_counit(ctx, m, &rm)?;
        let (rkr, eta) = kr_unit(ctx, coring, &rm.module)?;
        let lifted = rkr
            .tensor
            .map_to(&rm.tensor, &eps, &Matrix::identity(pr, ctx.pdag.dim()), "ε_M ⊗ P†")?;
        let r_eps = rm
            .space
            .coordinate_matrix(&lifted.mul(&rkr.inclusion))
            .ok_or_else(|| Error::CotensorMembership("R(ε_M) leaves the cotensor".into()))?;
        Ok(agree(&r_eps.mul(&eta), &Matrix::identity(pr, rm.module.dim()), "R(ε_M) η_{R M}"))
    };
    inner().unwrap_or_else(|e| Err(e.to_string()))
}

/// Flatness of `P` as a left `B`-module, via projectivity of each corner.
pub fn is_flat(p: &Bimodule) -> Result<bool> {
    let b = p.left_algebra();
    if b.unit().is_some() {
        return Ok(projective_left(p));
    }
    let fam = b.family().ok_or(Error::EmptyFamily)?;
    for e in &fam.elements {
        let (bi, incl) = b.corner(e)?;
        let bi = Arc::new(bi);
        let space = p.left_matrix(e).image();
        let q = space.inclusion();
        let left = (0..bi.dim())
            .map(|k| {
                space
                    .coordinate_matrix(&p.left_matrix(&incl.column(k)).mul(&q))
                    .ok_or_else(|| Error::Invalid("corner of P is not invariant".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let k = Arc::new(FiniteAlgebra::field(p.prime()));
        let corner = Bimodule::new(bi, k, space.dim(), left, vec![Matrix::identity(p.prime(), space.dim())])?;
        if !projective_left(&corner) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn projective_left(p: &Bimodule) -> bool {
    dual_basis(&p.left_as_right_opposite()).is_ok()
}

/// Flat, and `S ⊗_B P ≠ 0` for every simple right `B`-module `S`.
pub fn is_faithfully_flat(p: &Bimodule) -> Result<bool> {
    if !is_flat(p)? {
        return Ok(false);
    }
    for s in simple_modules(p.left_algebra())? {
        if tensor_over(&s, p)?.dim() == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A minimal nonzero submodule, in the coordinates of `m`.
pub fn minimal_submodule(m: &Bimodule) -> Result<Subspace> {
    let pr = m.prime();
    let n = m.dim();
    if n == 0 {
        return Err(Error::Invalid("zero module has no minimal submodule".into()));
    }
    let proper = |v: &[u64]| -> Option<Subspace> {
        let s = m.spin(v);
        (s.dim() > 0 && s.dim() < n).then_some(s)
    };
    let mut found = (0..n).find_map(|k| proper(&unit_vector(n, k)));
    if found.is_none() {
        let total = pr.checked_pow(n as u32).filter(|&t| t <= SEARCH_CAP).ok_or_else(|| {
            Error::BudgetExceeded(format!("simplicity test over {pr}^{n} vectors"))
        })?;
        found = (1..total).find_map(|code| {
            let mut v = vec![0; n];
            let mut c = code;
            for x in v.iter_mut() {
                *x = c % pr;
                c /= pr;
            }
            proper(&v)
        });
    }
    match found {
        None => Ok(Subspace::full(pr, n)),
        Some(s) => {
            let (sub, incl) = m.submodule(&s)?;
            let inner = minimal_submodule(&sub)?;
            Ok(Subspace::from_vectors(pr, n, &incl.mul(&inner.inclusion()).columns()))
        }
    }
}

fn isomorphic_simples(s: &Bimodule, t: &Bimodule) -> bool {
    if s.dim() != t.dim() {
        return false;
    }
    let maps = solve_linear_maps(s.prime(), s.dim(), t.dim(), |x| {
        s.right_actions()
            .iter()
            .zip(t.right_actions())
            .flat_map(|(rs, rt)| x.mul(rs).sub(&rt.mul(x)).to_vec())
            .collect()
    });
    !maps.is_empty()
}

/// Representatives of the firm simple right `B`-modules, read off a composition series of `B_B`.
pub fn simple_modules(b: &Arc<FiniteAlgebra>) -> Result<Vec<Bimodule>> {
    let mut out: Vec<Bimodule> = Vec::new();
    let mut cur = Bimodule::regular_right(b);
    while cur.dim() > 0 {
        let s = minimal_submodule(&cur)?;
        let (simple, _) = cur.submodule(&s)?;
        if is_firm(&simple, Side::Right)? && !out.iter().any(|t| isomorphic_simples(t, &simple)) {
            out.push(simple);
        }
        cur = cur.quotient(&s)?.0;
    }
    Ok(out)
}

/// A uniformly random nonzero vector.
pub fn random_vector(rng: &mut ChaCha8Rng, p: u64, n: usize) -> Vec<u64> {
    loop {
        let v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        if n == 0 || !is_zero_vec(&v) {
            return v;
        }
    }
}

/// The submodule of `M ⊕ M` generated by a random vector.
pub fn random_cyclic(rng: &mut ChaCha8Rng, m: &Bimodule) -> Result<Bimodule> {
    let double = Bimodule::direct_sum(&[m, m])?;
    let v = random_vector(rng, m.prime(), double.dim());
    Ok(double.submodule(&double.spin(&v))?.0)
}

/// Test objects: right `B`-modules, right `A`-modules and right `D`-comodules.
pub struct TestSets {
    pub right_b: Vec<(String, Bimodule)>,
    pub right_a: Vec<(String, Bimodule)>,
    pub comodules: Vec<(String, Comodule)>,
}

pub fn test_sets(ctx: &ComatrixContext, coring: &Coring, seed: u64) -> Result<TestSets> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bb = Bimodule::regular_right(&ctx.b);
    let mut right_b = vec![("B".to_string(), bb.clone())];
    for (k, s) in simple_modules(&ctx.b)?.into_iter().enumerate() {
        right_b.push((format!("simple {}", k + 1), s));
    }
    let n_random = random_cyclic(&mut rng, &bb)?;
    right_b.push(("random".to_string(), n_random.clone()));

    let aa = Bimodule::regular_right(&ctx.a);
    let right_a = vec![
        ("A".to_string(), aa.clone()),
        ("D".to_string(), coring.carrier.as_right_module()),
        ("random".to_string(), random_cyclic(&mut rng, &aa)?),
    ];

    let (p_right, _) = ctx.comodule_structures(coring)?;
    let (k_random, _) = k_functor(ctx, coring, &n_random)?;
    let comodules = vec![
        ("P".to_string(), p_right),
        ("D".to_string(), Comodule::regular(coring)),
        ("K(random)".to_string(), k_random),
    ];
    Ok(TestSets {
        right_b,
        right_a,
        comodules,
    })
}

/// Outcome of comparing `M_B` with `M^D` on test objects.
#[derive(Clone, Debug)]
pub struct Descent {
    pub report: Report,
    pub faithfully_flat: bool,
    /// A test module and a nonzero element killed by its unit.
    pub kernel_witness: Option<(String, Vec<u64>)>,
}

/// Units and counits of `(K, R)` on the test objects, against faithful flatness of `P`.
pub fn descent_check(ctx: &ComatrixContext, coring: &Coring, tests: &TestSets, exec: Exec) -> Result<Descent> {
    if !is_flat(&ctx.p)? {
        return Err(Error::Precondition("P is not flat as a left B-module".into()));
    }
    let faithfully_flat = is_faithfully_flat(&ctx.p)?;
    let mut report = Report::new();
    let units = par::map(exec, &tests.right_b, |(_, n)| kr_unit(ctx, coring, n).map(|(_, eta)| eta));
    let mut kernel_witness = None;
    let mut any_unit_fails = false;
    for ((name, _), eta) in tests.right_b.iter().zip(units) {
        let eta = eta?;
        if is_isomorphism(&eta) {
            continue;
        }
        any_unit_fails = true;
        let ker = eta.kernel();
        if kernel_witness.is_none() && ker.dim() > 0 {
            kernel_witness = Some((name.clone(), ker.basis_vectors()[0].clone()));
        }
        if faithfully_flat {
            report.fail(
                "unit-iso",
                format!("N = {name}: η_N has rank {} on dimension {}", eta.rank(), eta.cols()),
            );
        }
    }
    if faithfully_flat {
        report.record("unit-iso", Ok(()));
    } else {
        report.record(
            "unit-defect-exhibited",
            match &kernel_witness {
                Some(_) => Ok(()),
                None if any_unit_fails => Ok(()),
                None => Err("P is not faithfully flat but every sampled unit is an isomorphism".into()),
            },
        );
    }
    let counits = par::map(exec, &tests.comodules, |(_, m)| counit_checks(ctx, coring, m));
    for ((name, _), out) in tests.comodules.iter().zip(counits) {
        let (iso, factor, j_iso) = out?;
        report.record("counit-iso", iso.map_err(|e| format!("M = {name}: {e}")));
        report.record("counit-factorization", factor.map_err(|e| format!("M = {name}: {e}")));
        report.record("comparison-iso", j_iso.map_err(|e| format!("M = {name}: {e}")));
    }
    report.dimension("faithfully-flat", usize::from(faithfully_flat));
    Ok(Descent {
        report,
        faithfully_flat,
        kernel_witness,
    })
}

type Outcome = std::result::Result<(), String>;

/// `ε_M` bijective; `ε_M = (M ⊗ ε) j` with `j: (M □ P†) ⊗ P -> M □_D D`; `j` bijective.
fn counit_checks(ctx: &ComatrixContext, coring: &Coring, m: &Comodule) -> Result<(Outcome, Outcome, Outcome)> {
    let pr = ctx.prime();
    let rm = r_functor(ctx, coring, m)?;
    let (t, eps) = kr_counit(ctx, m, &rm)?;
    let iso = if is_isomorphism(&eps) {
        Ok(())
    } else {
        Err(format!("ε_M has rank {} between dimensions {} and {}", eps.rank(), eps.cols(), eps.rows()))
    };
    let md = tensor_over(&m.carrier, &coring.carrier)?;
    let (dp, dq) = (ctx.p.dim(), ctx.pdag.dim());
    let y = plain_map(pr, &[rm.module.dim(), dp], md.dim(), |ix| {
        let v = rm.inclusion.column(ix[0]);
        sum_terms(
            pr,
            md.dim(),
            plain_terms(&rm.tensor, &v).into_iter().map(|(c, mi, q)| {
                let d = ctx.d.element(&unit_vector(dq, q), &unit_vector(dp, ix[1]));
                (c, md.element(&unit_vector(m.dim(), mi), &d))
            }),
        )
    });
    let j = factor_through(&y, &t.proj, &t.sec, "comparison map into M ⊗ D")?;
    let m_eps_plain = plain_map(pr, &[m.dim(), coring.dim()], m.dim(), |ix| {
        m.carrier.right_matrix(&coring.counit.column(ix[1])).column(ix[0])
    });
    let m_eps = factor_through(&m_eps_plain, &md.proj, &md.sec, "M ⊗ ε")?;
    let factor = agree(&m_eps.mul(&j), &eps, "(M ⊗ ε) j");
    let left_d = Comodule::new(coring.carrier.clone(), Side::Left, coring, coring.comult.clone())?;
    let cot = cotensor(m, &left_d, coring)?;
    let j_iso = match cot.space.coordinate_matrix(&j) {
        Some(c) if is_isomorphism(&c) => Ok(()),
        Some(c) => Err(format!("j has rank {} onto M □ D of dimension {}", c.rank(), cot.dim())),
        None => Err("j leaves M □ D".into()),
    };
    Ok((iso, factor, j_iso))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn columns(p: u64, n: usize) -> Bimodule {
        let m = Arc::new(FiniteAlgebra::matrix_algebra(p, n));
        let k = Arc::new(FiniteAlgebra::field(p));
        let l = (0..n * n)
            .map(|idx| {
                let mut e = Matrix::zeros(p, n, n);
                e.set(idx / n, idx % n, 1);
                e
            })
            .collect();
        Bimodule::new(m, k, n, l, vec![Matrix::identity(p, n)]).unwrap()
    }

    #[test]
    fn flatness_examples() {
        let b = Arc::new(FiniteAlgebra::matrix_algebra(2, 2));
        assert!(is_flat(&Bimodule::regular(&b)).unwrap());
        assert!(is_faithfully_flat(&Bimodule::regular(&b)).unwrap());
        assert!(is_flat(&columns(2, 2)).unwrap());

        let a = Arc::new(FiniteAlgebra::truncated_polynomial(2, 2));
        let k = Arc::new(FiniteAlgebra::field(2));
        let dead = Bimodule::new(
            a,
            k,
            1,
            vec![Matrix::identity(2, 1), Matrix::zeros(2, 1, 1)],
            vec![Matrix::identity(2, 1)],
        )
        .unwrap();
        assert!(!is_flat(&dead).unwrap());
    }

    #[test]
    fn simples_of_small_algebras() {
        let m3 = Arc::new(FiniteAlgebra::matrix_algebra(2, 3));
        let s = simple_modules(&m3).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].dim(), 3);

        let dual = Arc::new(FiniteAlgebra::truncated_polynomial(2, 2));
        let s = simple_modules(&dual).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].dim(), 1);

        let block = Arc::new(FiniteAlgebra::product(
            2,
            &[&FiniteAlgebra::field(2), &FiniteAlgebra::matrix_algebra(2, 2)],
        ));
        let dims: Vec<usize> = simple_modules(&block).unwrap().iter().map(Bimodule::dim).collect();
        assert_eq!(dims, vec![1, 2]);
    }

    #[test]
    fn random_cyclic_is_seeded() {
        let b = Arc::new(FiniteAlgebra::matrix_algebra(2, 2));
        let bb = Bimodule::regular_right(&b);
        let x = random_cyclic(&mut ChaCha8Rng::seed_from_u64(7), &bb).unwrap();
        let y = random_cyclic(&mut ChaCha8Rng::seed_from_u64(7), &bb).unwrap();
        assert_eq!(x.right_actions(), y.right_actions());
    }
}
