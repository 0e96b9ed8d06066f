//! Dual bases, the colimit dual `P†`, the system `G`, the comatrix coring
//! `P† ⊗_B P`, the matrix ring `P ⊗_A P†` and the comatrix coring context.

use std::sync::Arc;

use crate::algebra::{multiplicativity_defect, FiniteAlgebra};
use crate::bimodule::{
    bimodule_map_defect, dual_map, dual_module, factor_through, is_firm, plain_map, same_algebra, tensor_over,
    Bimodule, DualModule, Side, Tensor,
};
use crate::coring::{check_coring_morphism, colimit_coring, colimit_coring_oracle, coring_on_cocone, Comodule, Coring, ZCoalgebra};
use crate::error::{Error, Result};
use crate::linalg::{is_isomorphism, unit_vector, Matrix, Subspace};
use crate::poset::DirectedPoset;
use crate::report::{agree, Report};
use crate::system::{local_units_from_colimit, DirectSystem};

/// Pairs `(z_r, z_r^*)` with `p = Σ z_r z_r^*(p)`.
#[derive(Clone, Debug)]
pub struct DualBasis {
    pub dual: DualModule,
    /// `z_r` as columns.
    pub elements: Matrix,
    /// Coordinates of `z_r^*` in `dual`, as columns.
    pub functionals: Matrix,
}

impl DualBasis {
    pub fn len(&self) -> usize {
        self.elements.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn functional(&self, r: usize) -> Matrix {
        self.dual.functional(&self.functionals.column(r))
    }

    /// `Σ z_r ⊗ z_r^*` in `P ⊗_A P*`, with `z_r` first acted on by `left`.
    pub fn coevaluation(&self, t: &Tensor, left: Option<&Matrix>) -> Vec<u64> {
        let p = self.elements.prime();
        let mut out = vec![0; t.dim()];
        for r in 0..self.len() {
            let z = self.elements.column(r);
            let z = left.map_or(z.clone(), |l| l.apply(&z));
            let v = t.element(&z, &self.functionals.column(r));
            crate::linalg::axpy(p, &mut out, 1, &v);
        }
        out
    }

    /// Both dual basis identities, exhaustively.
    pub fn check(&self, module: &Bimodule) -> std::result::Result<(), String> {
        let p = module.prime();
        let n = module.dim();
        let a = module.right_algebra();
        let mut recon = Matrix::zeros(p, n, n);
        for r in 0..self.len() {
            let f = self.functional(r);
            let z = self.elements.column(r);
            for x in 0..n {
                let v = module.right_matrix(&f.column(x)).apply(&z);
                let mut col = recon.column(x);
                crate::linalg::axpy(p, &mut col, 1, &v);
                recon.set_column(x, &col);
            }
        }
        agree(&recon, &Matrix::identity(p, n), "p = Σ z z*(p)")?;
        for (l, phi) in self.dual.functionals.iter().enumerate() {
            let mut sum = Matrix::zeros(p, a.dim(), n);
            for r in 0..self.len() {
                let coeff = phi.apply(&self.elements.column(r));
                sum = sum.add(&a.left_mul_matrix(&coeff).mul(&self.functional(r)));
            }
            agree(&sum, phi, &format!("φ = Σ φ(z) z*, functional {l}"))?;
        }
        Ok(())
    }
}

/// A finite dual basis of `P` as a right module, indexed by the basis of `P`.
pub fn dual_basis(module: &Bimodule) -> Result<DualBasis> {
    let p = module.prime();
    let n = module.dim();
    let dual = dual_module(module)?;
    let nd = dual.dim();
    let unknowns = n * nd;
    let mut cols = Vec::with_capacity(unknowns);
    for r in 0..n {
        for l in 0..nd {
            let f = &dual.functionals[l];
            let mut col = Vec::with_capacity(n * n);
            for x in 0..n {
                col.extend(module.right_matrix(&f.column(x)).column(r));
            }
            cols.push(col);
        }
    }
    let rhs: Vec<u64> = (0..n).flat_map(|x| unit_vector(n, x)).collect();
    if n == 0 {
        return Ok(DualBasis {
            dual,
            elements: Matrix::zeros(p, 0, 0),
            functionals: Matrix::zeros(p, nd, 0),
        });
    }
    let system = Matrix::from_columns(p, n * n, &cols);
    let sol = system
        .solve_right(&Matrix::from_columns(p, n * n, &[rhs]))
        .ok_or_else(|| Error::NotFGProjective("no dual basis solves p = Σ z z*(p)".into()))?;
    let coeffs = sol.column(0);
    let functionals = Matrix::from_columns(
        p,
        nd,
        &(0..n).map(|r| coeffs[r * nd..(r + 1) * nd].to_vec()).collect::<Vec<_>>(),
    );
    Ok(DualBasis {
        dual,
        elements: Matrix::identity(p, n),
        functionals,
    })
}

/// Split systems of unital algebras `B_i` and `(B_i, A)`-bimodules `P_i`
/// over the same poset, each `P_i` finitely generated projective over `A`.
#[derive(Clone, Debug)]
pub struct FirmBimoduleSystem {
    pub base: Arc<FiniteAlgebra>,
    pub rings: DirectSystem<Arc<FiniteAlgebra>>,
    pub modules: DirectSystem<Bimodule>,
    pub dual_bases: Vec<DualBasis>,
}

/// The colimits of both systems with their injections and retractions.
#[derive(Clone, Debug)]
pub struct Limits {
    pub b: Arc<FiniteAlgebra>,
    pub beta: Vec<Matrix>,
    pub gamma: Vec<Matrix>,
    pub p: Bimodule,
    pub sigma: Vec<Matrix>,
    pub tau: Vec<Matrix>,
    pub apex: usize,
}

impl FirmBimoduleSystem {
    pub fn new(
        base: Arc<FiniteAlgebra>,
        rings: DirectSystem<Arc<FiniteAlgebra>>,
        modules: DirectSystem<Bimodule>,
    ) -> Result<Self> {
        if rings.poset() != modules.poset() {
            return Err(Error::Invalid("ring and module systems use different posets".into()));
        }
        if !rings.is_split() || !modules.is_split() {
            return Err(Error::Precondition("both systems must be split".into()));
        }
        let mut dual_bases = Vec::with_capacity(modules.objects().len());
        for (i, m) in modules.objects().iter().enumerate() {
            let label = modules.poset().label(i);
            if !same_algebra(m.left_algebra(), rings.object(i)) || !same_algebra(m.right_algebra(), &base) {
                return Err(Error::Invalid(format!("module at {label} is over the wrong algebras")));
            }
            let db = dual_basis(m).map_err(|e| match e {
                Error::NotFGProjective(msg) => Error::NotFGProjective(format!("module at {label}: {msg}")),
                other => other,
            })?;
            dual_bases.push(db);
        }
        Ok(Self {
            base,
            rings,
            modules,
            dual_bases,
        })
    }

    pub fn poset(&self) -> &DirectedPoset {
        self.modules.poset()
    }

    pub fn prime(&self) -> u64 {
        self.base.prime()
    }

    fn at(&self, idx: &[usize]) -> String {
        let labels: Vec<&str> = idx.iter().map(|&i| self.poset().label(i)).collect();
        format!("at ({})", labels.join(", "))
    }

    pub fn limits(&self) -> Result<Limits> {
        let (b, rcol) = local_units_from_colimit(&self.rings)?;
        let gamma = self.rings.retractions(&rcol)?;
        let mcol = self.modules.colimit()?;
        let tau = self.modules.retractions(&mcol)?;
        let b = Arc::new(b);
        let p = mcol.object.with_left_algebra(b.clone())?;
        Ok(Limits {
            b,
            beta: rcol.injections,
            gamma,
            p,
            sigma: mcol.injections,
            tau,
            apex: mcol.apex,
        })
    }

    /// Both systems' axioms, the compatibility of the module actions with the
    /// ring transitions, and the dual basis identities.
    pub fn check_compat(&self) -> Report {
        let mut r = Report::new();
        r.merge_scoped("rings", self.rings.check());
        r.merge_scoped("modules", self.modules.check());
        let p = self.prime();
        for (i, db) in self.dual_bases.iter().enumerate() {
            let pi = self.modules.object(i);
            r.record("dual-basis", db.check(pi).map_err(|e| format!("{}: {e}", self.at(&[i]))));
            match tensor_over(pi, &db.dual.module) {
                Ok(t) => {
                    for k in 0..pi.left_algebra().dim() {
                        let lhs = db.coevaluation(&t, Some(&pi.left_actions()[k]));
                        let mut rhs = vec![0; t.dim()];
                        for rr in 0..db.len() {
                            let moved = db.dual.module.right_actions()[k].apply(&db.functionals.column(rr));
                            let v = t.element(&db.elements.column(rr), &moved);
                            crate::linalg::axpy(p, &mut rhs, 1, &v);
                        }
                        r.record(
                            "dual-basis-balanced",
                            if lhs == rhs {
                                Ok(())
                            } else {
                                Err(format!("{}, basis element {k}: {lhs:?} != {rhs:?}", self.at(&[i])))
                            },
                        );
                    }
                }
                Err(e) => r.fail("dual-basis-balanced", e.to_string()),
            }
        }
        for (i, j) in self.poset().comparable_pairs() {
            self.check_pair(i, j, &mut r);
        }
        r
    }

    fn check_pair(&self, i: usize, j: usize, r: &mut Report) {
        let (pi, pj) = (self.modules.object(i), self.modules.object(j));
        let bi = self.rings.object(i);
        let beta = self.rings.transition(i, j);
        let sigma = self.modules.transition(i, j);
        let tau = self.modules.retraction(i, j).expect("split");
        let (di, dj) = (&self.dual_bases[i].dual, &self.dual_bases[j].dual);
        let unit = bi.unit().expect("unital levels").to_vec();
        let e = pj.left_matrix(&beta.apply(&unit));
        let at = self.at(&[i, j]);
        r.record("corner-idempotent-action", agree(&sigma.mul(tau), &e, &at));
        for (l, phi) in dj.functionals.iter().enumerate() {
            r.record(
                "dual-idempotent-action",
                agree(&phi.mul(&e), &phi.mul(sigma).mul(tau), &format!("{at}, functional {l}")),
            );
        }
        for k in 0..bi.dim() {
            let lb = &pi.left_actions()[k];
            let lbeta = pj.left_matrix(&beta.column(k));
            let at_k = format!("{at}, basis element {k} of the ring");
            r.record("action-compat", agree(&lbeta, &sigma.mul(lb).mul(tau), &at_k));
            r.record("inclusion-linearity", agree(&sigma.mul(lb), &lbeta.mul(sigma), &at_k));
            r.record("truncation-linearity", agree(&tau.mul(&lbeta), &lb.mul(tau), &at_k));
            for (l, phi) in dj.functionals.iter().enumerate() {
                r.record(
                    "dual-action-transport",
                    agree(&phi.mul(&lbeta), &phi.mul(sigma).mul(lb).mul(tau), &format!("{at_k}, functional {l}")),
                );
            }
            for (l, phi) in di.functionals.iter().enumerate() {
                r.record(
                    "dual-extension-linearity",
                    agree(&phi.mul(lb).mul(tau), &phi.mul(tau).mul(&lbeta), &format!("{at_k}, functional {l}")),
                );
            }
        }
        // The dual basis of P_j, restricted along σ and τ, is one of P_i.
        let (dbi, dbj) = (&self.dual_bases[i], &self.dual_bases[j]);
        let outcome = tensor_over(pi, &di.module).map_err(|e| e.to_string()).and_then(|t| {
            let lhs = dbi.coevaluation(&t, None);
            let mut rhs = vec![0; t.dim()];
            for rr in 0..dbj.len() {
                let z = tau.apply(&dbj.elements.column(rr));
                let f = dbj.functional(rr).mul(sigma);
                let coords = di.coords(&f).ok_or_else(|| format!("{at}: restricted functional leaves the dual"))?;
                crate::linalg::axpy(self.prime(), &mut rhs, 1, &t.element(&z, &coords));
            }
            if lhs == rhs {
                Ok(())
            } else {
                Err(format!("{at}: {lhs:?} != {rhs:?}"))
            }
        });
        r.record("dual-basis-restriction", outcome);
    }
}

/// `P† ⊂ P*` with the injections `τ_i^*: P_i^* -> P†`.
#[derive(Clone, Debug)]
pub struct PDagger {
    pub dual: DualModule,
    pub module: DualModule,
    /// Coordinates in `P†` to coordinates in `P*`.
    pub inclusion: Matrix,
    pub injections: Vec<Matrix>,
}

impl PDagger {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }
}

/// Functionals factoring through some `τ_i`, i.e. with `φ = φ σ_i τ_i`.
pub fn build_pdagger(sys: &FirmBimoduleSystem, lim: &Limits) -> Result<PDagger> {
    let p = sys.prime();
    let dual = dual_module(&lim.p)?;
    let mut space = Subspace::zero(p, dual.dim());
    for (s, t) in lim.sigma.iter().zip(&lim.tau) {
        let e = dual_map(&s.mul(t), &dual, &dual)?;
        let fixed = e.sub(&Matrix::identity(p, dual.dim())).kernel();
        space = space.sum(&fixed);
    }
    let (module, inclusion) = dual.restrict(&space)?;
    let mut injections = Vec::with_capacity(lim.tau.len());
    for (i, t) in lim.tau.iter().enumerate() {
        let di = &sys.dual_bases[i].dual;
        let imgs: Vec<Matrix> = di.functionals.iter().map(|f| f.mul(t)).collect();
        let m = module
            .coords_matrix(&imgs)
            .ok_or_else(|| Error::Invalid(format!("τ* at {} leaves P†", sys.poset().label(i))))?;
        injections.push(m);
    }
    Ok(PDagger {
        dual,
        module,
        inclusion,
        injections,
    })
}

/// Cocone, action transport and firmness checks for `P†`.
pub fn check_pdagger(sys: &FirmBimoduleSystem, lim: &Limits, pd: &PDagger) -> Report {
    let mut r = Report::new();
    let poset = sys.poset();
    for (i, j) in poset.comparable_pairs() {
        let tau = sys.modules.retraction(i, j).expect("split");
        let (di, dj) = (&sys.dual_bases[i].dual, &sys.dual_bases[j].dual);
        let outcome = dual_map(tau, di, dj)
            .map_err(|e| e.to_string())
            .and_then(|t| agree(&pd.injections[j].mul(&t), &pd.injections[i], &format!("at ({}, {})", poset.label(i), poset.label(j))));
        r.record("dual-cocone", outcome);
    }
    for i in 0..poset.len() {
        let bi = sys.rings.object(i);
        let di = &sys.dual_bases[i].dual;
        for k in 0..bi.dim() {
            let lhs = pd.module.module.right_matrix(&lim.beta[i].column(k)).mul(&pd.injections[i]);
            let rhs = pd.injections[i].mul(&di.module.right_actions()[k]);
            r.record(
                "dual-action",
                agree(&lhs, &rhs, &format!("at ({}), basis element {k}", poset.label(i))),
            );
        }
    }
    r.record(
        "pdagger-firm",
        match is_firm(&pd.module.module, Side::Right) {
            Ok(true) => Ok(()),
            Ok(false) => Err("P† is not firm over B".into()),
            Err(e) => Err(e.to_string()),
        },
    );
    r
}

/// The system `G(i) = P_i^* ⊗_{B_i} P_i` with its finite comatrix corings.
#[derive(Clone, Debug)]
pub struct GSystem {
    pub z: ZCoalgebra,
    pub tensors: Vec<Tensor>,
}

fn finite_comatrix(db: &DualBasis, module: &Bimodule) -> Result<(Tensor, Coring)> {
    let p = module.prime();
    let g = tensor_over(&db.dual.module, module)?;
    let square = tensor_over(&g.module, &g.module)?;
    let (nd, n) = (db.dual.dim(), module.dim());
    let y = plain_map(p, &[nd, n], square.dim(), |ix| {
        let phi = unit_vector(nd, ix[0]);
        let x = unit_vector(n, ix[1]);
        let mut out = vec![0; square.dim()];
        for r in 0..db.len() {
            let left = g.element(&phi, &db.elements.column(r));
            let right = g.element(&db.functionals.column(r), &x);
            crate::linalg::axpy(p, &mut out, 1, &square.element(&left, &right));
        }
        out
    });
    let comult = factor_through(&y, &g.proj, &g.sec, "comultiplication φ ⊗ p ↦ φ ⊗ E ⊗ p")?;
    let counit = factor_through(&db.dual.evaluation_plain(), &g.proj, &g.sec, "evaluation")?;
    let coring = Coring::with_square(g.module.clone(), square, comult, counit)?;
    Ok((g, coring))
}

pub fn build_g(sys: &FirmBimoduleSystem) -> Result<GSystem> {
    let n = sys.poset().len();
    let mut tensors = Vec::with_capacity(n);
    let mut corings = Vec::with_capacity(n);
    for i in 0..n {
        let (t, c) = finite_comatrix(&sys.dual_bases[i], sys.modules.object(i))?;
        tensors.push(t);
        corings.push(c);
    }
    let mut fwd = std::collections::BTreeMap::new();
    for (i, j) in sys.poset().comparable_pairs() {
        if i == j {
            continue;
        }
        let sigma = sys.modules.transition(i, j);
        let tau = sys.modules.retraction(i, j).expect("split");
        let tstar = dual_map(tau, &sys.dual_bases[i].dual, &sys.dual_bases[j].dual)?;
        let what = format!("transition of G at ({}, {})", sys.poset().label(i), sys.poset().label(j));
        fwd.insert((i, j), tensors[i].map_to(&tensors[j], &tstar, sigma, &what)?);
    }
    let carriers = corings.iter().map(|c| c.carrier.clone()).collect();
    let system = DirectSystem::new(sys.poset().clone(), carriers, fwd, None)?;
    Ok(GSystem {
        z: ZCoalgebra { system, corings },
        tensors,
    })
}

/// `G` with the retractions `φ_j ⊗ p_j ↦ φ_j σ_ji ⊗ τ_ij(p_j)`; needs central corner idempotents.
pub fn split_g(sys: &FirmBimoduleSystem, lim: &Limits, g: &GSystem) -> Result<DirectSystem<Bimodule>> {
    let fam = lim.b.family().ok_or(Error::EmptyFamily)?;
    for (label, e) in fam.labels.iter().zip(&fam.elements) {
        if !lim.b.is_central(e) {
            return Err(Error::NotCentral(label.clone()));
        }
    }
    let mut back = std::collections::BTreeMap::new();
    for (i, j) in sys.poset().comparable_pairs() {
        if i == j {
            continue;
        }
        let sigma = sys.modules.transition(i, j);
        let tau = sys.modules.retraction(i, j).expect("split");
        let sstar = dual_map(sigma, &sys.dual_bases[j].dual, &sys.dual_bases[i].dual)?;
        let what = format!("retraction of G at ({}, {})", sys.poset().label(i), sys.poset().label(j));
        back.insert((i, j), g.tensors[j].map_to(&g.tensors[i], &sstar, tau, &what)?);
    }
    let fwd = g.z.system.transitions().clone();
    DirectSystem::new(sys.poset().clone(), g.z.system.objects().to_vec(), fwd, Some(back))
}

/// `P† ⊗_B P` with the cocone `g_i(φ ⊗ p) = φ τ_i ⊗ σ_i(p)` and the coring
/// structure determined by it.
#[derive(Clone, Debug)]
pub struct ComatrixCoring {
    pub tensor: Tensor,
    pub cocone: Vec<Matrix>,
    pub coring: Coring,
}

pub fn build_comatrix_coring(lim: &Limits, pd: &PDagger, g: &GSystem) -> Result<ComatrixCoring> {
    let d = tensor_over(&pd.module.module, &lim.p)?;
    let mut cocone = Vec::with_capacity(g.tensors.len());
    for (i, gt) in g.tensors.iter().enumerate() {
        cocone.push(gt.map_to(&d, &pd.injections[i], &lim.sigma[i], "cocone map g_i")?);
    }
    let coring = coring_on_cocone(d.module.clone(), &cocone, &g.z)?;
    Ok(ComatrixCoring { tensor: d, cocone, coring })
}

/// `P ⊗_A P†`.
pub fn matrix_tensor(lim: &Limits, pd: &PDagger) -> Result<Tensor> {
    tensor_over(&lim.p, &pd.module.module)
}

/// The algebra on `P ⊗_A P†` with `(x ⊗ φ)(y ⊗ ψ) = x ε(φ ⊗ y) ⊗ ψ`, where
/// `eps_plain` is `ε` on the plain product `P† ⊗ P`.
pub fn matrix_ring(p: &Bimodule, pdag: &Bimodule, eps_plain: &Matrix) -> Result<(FiniteAlgebra, Tensor)> {
    let pr = p.prime();
    let s = tensor_over(p, pdag)?;
    let (dp, dq) = (p.dim(), pdag.dim());
    let y = plain_map(pr, &[dp, dq, dp, dq], s.dim(), |ix| {
        let a = eps_plain.column(ix[1] * dp + ix[2]);
        let x = p.right_matrix(&a).column(ix[0]);
        s.element(&x, &unit_vector(dq, ix[3]))
    });
    let f = factor_through(&y, &s.proj.kron(&s.proj), &s.sec.kron(&s.sec), "matrix ring multiplication")?;
    let d = s.dim();
    let mut table = vec![0; d * d * d];
    for a in 0..d {
        for b in 0..d {
            for (k, v) in f.column(a * d + b).into_iter().enumerate() {
                table[(a * d + b) * d + k] = v;
            }
        }
    }
    let alg = FiniteAlgebra::from_table(pr, d, table, None);
    alg.check()?;
    Ok((alg, s))
}

/// `η(β_i(b)) = Σ σ_i(b z) ⊗ z^* τ_i`, solved over all levels at once.
pub fn build_eta(sys: &FirmBimoduleSystem, lim: &Limits, pd: &PDagger, s: &Tensor) -> Result<Matrix> {
    let p = sys.prime();
    let mut rhs = Vec::new();
    for (i, db) in sys.dual_bases.iter().enumerate() {
        let pi = sys.modules.object(i);
        let bi = sys.rings.object(i);
        let mut cols = Vec::with_capacity(bi.dim());
        for k in 0..bi.dim() {
            let mut v = vec![0; s.dim()];
            let mut w = vec![0; s.dim()];
            for r in 0..db.len() {
                let f = db.functional(r).mul(&lim.tau[i]);
                let fc = pd
                    .module
                    .coords(&f)
                    .ok_or_else(|| Error::Invalid("z* τ_i leaves P†".into()))?;
                let x = lim.sigma[i].apply(&pi.left_actions()[k].apply(&db.elements.column(r)));
                crate::linalg::axpy(p, &mut v, 1, &s.element(&x, &fc));
                let moved = db.dual.functional(&db.dual.module.right_actions()[k].apply(&db.functionals.column(r)));
                let gc = pd
                    .module
                    .coords(&moved.mul(&lim.tau[i]))
                    .ok_or_else(|| Error::Invalid("z* b τ_i leaves P†".into()))?;
                let z = lim.sigma[i].apply(&db.elements.column(r));
                crate::linalg::axpy(p, &mut w, 1, &s.element(&z, &gc));
            }
            if v != w {
                return Err(Error::IndexDependence(format!(
                    "η at ({}), basis element {k}: the two expressions differ",
                    sys.poset().label(i)
                )));
            }
            cols.push(v);
        }
        rhs.push(Matrix::from_columns(p, s.dim(), &cols));
    }
    let h = Matrix::hstack(p, lim.b.dim(), &lim.beta.iter().collect::<Vec<_>>());
    h.solve_left(&Matrix::hstack(p, s.dim(), &rhs.iter().collect::<Vec<_>>()))
        .ok_or_else(|| Error::IndexDependence("η".into()))
}

/// `(B, A, P, P†, η, ε)` with `η: B -> P ⊗_A P†` and `ε: P† ⊗_B P -> A`.
#[derive(Clone, Debug)]
pub struct ComatrixContext {
    pub b: Arc<FiniteAlgebra>,
    pub a: Arc<FiniteAlgebra>,
    pub p: Bimodule,
    pub pdag: Bimodule,
    pub s: Tensor,
    pub d: Tensor,
    pub eta: Matrix,
    pub eps: Matrix,
}

impl ComatrixContext {
    pub fn prime(&self) -> u64 {
        self.a.prime()
    }

    /// A local unit of `B` acting as identity on everything: the unit if
    /// present, else the first family element absorbing the whole basis.
    pub fn local_unit(&self) -> Result<Vec<u64>> {
        if let Some(u) = self.b.unit() {
            return Ok(u.to_vec());
        }
        let all = crate::algebra::whole_basis(&self.b);
        let k = self
            .b
            .local_unit_for(&all)
            .ok_or_else(|| Error::Precondition("no local unit absorbs all of B".into()))?;
        Ok(self.b.family().expect("family present").elements[k].clone())
    }

    /// `η(e)` lifted to the plain product `P ⊗ P†`.
    pub fn plain_unit_image(&self) -> Result<Vec<u64>> {
        Ok(self.s.sec.apply(&self.eta.apply(&self.local_unit()?)))
    }

    /// `ε` on the plain product `P† ⊗ P`.
    pub fn plain_eps(&self) -> Matrix {
        self.eps.mul(&self.d.proj)
    }

    /// Bilinearity of `η` and `ε` and both context laws.
    pub fn check(&self) -> Report {
        let mut r = Report::new();
        r.record(
            "eta-bilinear",
            bimodule_map_defect(&Bimodule::regular(&self.b), &self.s.module, &self.eta).map_or(Ok(()), Err),
        );
        r.record(
            "eps-bilinear",
            bimodule_map_defect(&self.d.module, &Bimodule::regular(&self.a), &self.eps).map_or(Ok(()), Err),
        );
        r.record("context-left-law", self.left_law().map_err(|e| e.to_string()));
        r.record("context-right-law", self.right_law().map_err(|e| e.to_string()));
        r
    }

    pub fn validate(&self) -> Result<()> {
        self.left_law()?;
        self.right_law()
    }

    /// `b^- ε(b^+ ⊗ p) = b p`.
    fn left_law(&self) -> Result<()> {
        let pr = self.prime();
        let (dp, dq) = (self.p.dim(), self.pdag.dim());
        let eps = self.plain_eps();
        let act = plain_map(pr, &[dp, dq, dp], dp, |ix| {
            self.p.right_matrix(&eps.column(ix[1] * dp + ix[2])).column(ix[0])
        });
        let lifted = self.s.sec.mul(&self.eta);
        for k in 0..self.b.dim() {
            let bk = lifted.column(k);
            let lb = self.p.left_matrix(&self.b.basis(k));
            for y in 0..dp {
                let lhs = act.apply(&crate::bimodule::kron_vec(pr, &bk, &unit_vector(dp, y)));
                if lhs != lb.column(y) {
                    return Err(Error::LawFailure {
                        law: "b^- ε(b^+ ⊗ p) = b p".into(),
                        at: format!("(b, p) = (basis {k}, basis {y})"),
                    });
                }
            }
        }
        Ok(())
    }

    /// `ε(q ⊗ b^-) b^+ = q b`.
    fn right_law(&self) -> Result<()> {
        let pr = self.prime();
        let (dp, dq) = (self.p.dim(), self.pdag.dim());
        let eps = self.plain_eps();
        let act = plain_map(pr, &[dq, dp, dq], dq, |ix| {
            self.pdag.left_matrix(&eps.column(ix[0] * dp + ix[1])).column(ix[2])
        });
        let lifted = self.s.sec.mul(&self.eta);
        for k in 0..self.b.dim() {
            let bk = lifted.column(k);
            let rb = self.pdag.right_matrix(&self.b.basis(k));
            for q in 0..dq {
                let lhs = act.apply(&crate::bimodule::kron_vec(pr, &unit_vector(dq, q), &bk));
                if lhs != rb.column(q) {
                    return Err(Error::LawFailure {
                        law: "ε(q ⊗ b^-) b^+ = q b".into(),
                        at: format!("(b, q) = (basis {k}, basis {q})"),
                    });
                }
            }
        }
        Ok(())
    }

    /// The comatrix coring of the context: `Δ(q ⊗ p) = q ⊗ η(e) ⊗ p`, counit `ε`.
    pub fn coring(&self) -> Result<Coring> {
        let pr = self.prime();
        let (dp, dq) = (self.p.dim(), self.pdag.dim());
        let square = tensor_over(&self.d.module, &self.d.module)?;
        let c = Matrix::from_columns(pr, dp * dq, &[self.plain_unit_image()?]);
        let pi = square.proj.mul(&self.d.proj.kron(&self.d.proj));
        let y = pi.mul(&Matrix::identity(pr, dq).kron(&c).kron(&Matrix::identity(pr, dp)));
        let comult = factor_through(&y, &self.d.proj, &self.d.sec, "q ⊗ p ↦ q ⊗ η(e) ⊗ p")?;
        Coring::with_square(self.d.module.clone(), square, comult, self.eps.clone())
    }

    /// `P` as a right and `P†` as a left comodule over the context coring.
    pub fn comodule_structures(&self, coring: &Coring) -> Result<(Comodule, Comodule)> {
        let pr = self.prime();
        let (dp, dq) = (self.p.dim(), self.pdag.dim());
        let c = Matrix::from_columns(pr, dp * dq, &[self.plain_unit_image()?]);
        let tr = tensor_over(&self.p, &coring.carrier)?;
        let rho_r = tr
            .proj
            .mul(&Matrix::identity(pr, dp).kron(&self.d.proj))
            .mul(&c.kron(&Matrix::identity(pr, dp)));
        let tl = tensor_over(&coring.carrier, &self.pdag)?;
        let rho_l = tl
            .proj
            .mul(&self.d.proj.kron(&Matrix::identity(pr, dq)))
            .mul(&Matrix::identity(pr, dq).kron(&c));
        Ok((
            Comodule::new(self.p.clone(), Side::Right, coring, rho_r)?,
            Comodule::new(self.pdag.clone(), Side::Left, coring, rho_l)?,
        ))
    }

    /// `S = P ⊗_A P†` with the multiplication induced by `ε`.
    pub fn matrix_ring(&self) -> Result<FiniteAlgebra> {
        matrix_ring(&self.p, &self.pdag, &self.plain_eps()).map(|(a, _)| a)
    }
}

/// Everything built from a firm bimodule system.
#[derive(Clone, Debug)]
pub struct Comatrix {
    pub limits: Limits,
    pub pdagger: PDagger,
    pub g: GSystem,
    pub comatrix: ComatrixCoring,
    pub ring: Arc<FiniteAlgebra>,
    pub context: ComatrixContext,
}

pub fn build_context(sys: &FirmBimoduleSystem) -> Result<Comatrix> {
    let limits = sys.limits()?;
    let pdagger = build_pdagger(sys, &limits)?;
    let g = build_g(sys)?;
    let comatrix = build_comatrix_coring(&limits, &pdagger, &g)?;
    let eps = comatrix.coring.counit.clone();
    let (ring, s) = matrix_ring(&limits.p, &pdagger.module.module, &eps.mul(&comatrix.tensor.proj))?;
    let eta = build_eta(sys, &limits, &pdagger, &s)?;
    let context = ComatrixContext {
        b: limits.b.clone(),
        a: sys.base.clone(),
        p: limits.p.clone(),
        pdag: pdagger.module.module.clone(),
        s,
        d: comatrix.tensor.clone(),
        eta,
        eps,
    };
    Ok(Comatrix {
        limits,
        pdagger,
        g,
        comatrix,
        ring: Arc::new(ring),
        context,
    })
}

impl Comatrix {
    pub fn prime(&self) -> u64 {
        self.context.prime()
    }

    /// Checks of `P†`, `G`, the cocone, both colimit constructions, `η` and `S`.
    pub fn check(&self, sys: &FirmBimoduleSystem) -> Report {
        let mut r = Report::new();
        r.merge(check_pdagger(sys, &self.limits, &self.pdagger));
        r.record(
            "evaluation-counit",
            agree(&self.comatrix.coring.counit, &self.context.eps, "counit is evaluation"),
        );
        r.record("g-naturality", self.g.z.check_naturality().map_err(|e| e.to_string()));
        for (i, (gc, map)) in self.g.z.corings.iter().zip(&self.comatrix.cocone).enumerate() {
            let label = sys.poset().label(i);
            let rep = check_coring_morphism(gc, &self.comatrix.coring, map);
            r.record(
                "cocone-coring-morphisms",
                rep.failures()
                    .next()
                    .map_or(Ok(()), |f| Err(format!("at ({label}): {} {}", f.id, f.counterexample.clone().unwrap_or_default()))),
            );
        }
        for (i, j) in sys.poset().comparable_pairs() {
            let lhs = self.comatrix.cocone[j].mul(self.g.z.system.transition(i, j));
            r.record(
                "cocone",
                agree(&lhs, &self.comatrix.cocone[i], &format!("at ({}, {})", sys.poset().label(i), sys.poset().label(j))),
            );
        }
        let d = &self.comatrix.coring;
        for (id, col) in [("colimit-apex", colimit_coring(&self.g.z)), ("colimit-oracle", colimit_coring_oracle(&self.g.z))] {
            let outcome = col.map_err(|e| e.to_string()).and_then(|col| {
                let p = self.prime();
                let h = Matrix::hstack(p, d.dim(), &self.comatrix.cocone.iter().collect::<Vec<_>>());
                let rhs = Matrix::hstack(p, col.coring.dim(), &col.injections.iter().collect::<Vec<_>>());
                let m = h.solve_left(&rhs).ok_or("no mediating map from P† ⊗_B P")?;
                if !is_isomorphism(&m) {
                    return Err("mediating map is not an isomorphism".to_string());
                }
                let rep = check_coring_morphism(d, &col.coring, &m);
                let failure = rep
                    .failures()
                    .next()
                    .map(|f| format!("mediating map: {} {}", f.id, f.counterexample.clone().unwrap_or_default()));
                failure.map_or(Ok(()), Err)
            });
            r.record(id, outcome);
        }
        let ctx = &self.context;
        r.record(
            "eta-multiplicative",
            multiplicativity_defect(&ctx.b, &self.ring, &ctx.eta).map_or(Ok(()), Err),
        );
        if let Some(fam) = ctx.b.family() {
            for (label, e) in fam.labels.iter().zip(&fam.elements) {
                let img = ctx.eta.apply(e);
                r.record(
                    "eta-idempotents",
                    if self.ring.is_idempotent(&img) {
                        Ok(())
                    } else {
                        Err(format!("η of the local unit at ({label}) is not idempotent"))
                    },
                );
            }
        }
        match self.ring.check() {
            Ok(()) => r.pass("matrix-ring-associative"),
            Err(e) => r.fail("matrix-ring-associative", e.to_string()),
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

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

    fn single(p_mod: Bimodule) -> FirmBimoduleSystem {
        let b = p_mod.left_algebra().clone();
        let a = p_mod.right_algebra().clone();
        let rings = DirectSystem::new(DirectedPoset::point(), vec![b], BTreeMap::new(), Some(BTreeMap::new())).unwrap();
        let modules = DirectSystem::new(DirectedPoset::point(), vec![p_mod], BTreeMap::new(), Some(BTreeMap::new())).unwrap();
        FirmBimoduleSystem::new(a, rings, modules).unwrap()
    }

    #[test]
    fn dual_basis_examples() {
        let a = Arc::new(FiniteAlgebra::truncated_polynomial(2, 2));
        let free = Bimodule::regular_right(&a);
        let db = dual_basis(&free).unwrap();
        db.check(&free).unwrap();

        let cols = columns(2, 2);
        let db = dual_basis(&cols).unwrap();
        assert_eq!(db.len(), 2);
        db.check(&cols).unwrap();

        let dead = Bimodule::right_module(&a, 1, vec![Matrix::zeros(2, 1, 1), Matrix::zeros(2, 1, 1)]).unwrap();
        assert!(matches!(dual_basis(&dead), Err(Error::NotFGProjective(_))));
    }

    #[test]
    fn single_columns_module() {
        let sys = single(columns(2, 3));
        assert!(sys.check_compat().all_passed());
        let cm = build_context(&sys).unwrap();
        assert_eq!(cm.comatrix.coring.dim(), 1);
        assert_eq!(cm.ring.dim(), 9);
        assert!(cm.comatrix.coring.check().all_passed());
        let rep = cm.check(&sys);
        assert!(rep.all_passed(), "{:?}", rep.failures().collect::<Vec<_>>());
        assert!(cm.context.check().all_passed());
        let ctx_coring = cm.context.coring().unwrap();
        assert_eq!(ctx_coring.comult, cm.comatrix.coring.comult);
    }

    #[test]
    fn trivial_context() {
        let k = Arc::new(FiniteAlgebra::field(2));
        let sys = single(Bimodule::regular(&k));
        let cm = build_context(&sys).unwrap();
        assert_eq!(cm.ring.dim(), 1);
        assert!(cm.context.check().all_passed());
    }

    #[test]
    fn doubled_counit_breaks_context() {
        let sys = single(columns(3, 2));
        let cm = build_context(&sys).unwrap();
        let mut ctx = cm.context.clone();
        ctx.eps = ctx.eps.scale(2);
        assert!(matches!(ctx.validate(), Err(Error::LawFailure { .. })));
    }
}
