//! Endomorphism rings of split comodule systems, the comparison `κ`, the
//! canonical map into a coring and the Galois property.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{basis_singletons, verify_local_units, FiniteAlgebra, IdempotentFamily};
use crate::bimodule::{dual_module, factor_through, plain_map, solve_linear_maps, tensor_over, triple_right, Bimodule, Side};
use crate::comatrix::{build_context, Comatrix, FirmBimoduleSystem};
use crate::coring::{check_coring_morphism, colinearity_defect, Comodule, Coring};
use crate::descent::{descent_check, is_faithfully_flat, test_sets, Descent};
use crate::error::{Error, Result};
use crate::linalg::{axpy, is_isomorphism, unit_vector, Matrix, Subspace};
use crate::par::Exec;
use crate::report::{agree, Report};
use crate::system::{DirectSystem, OracleColimit};

/// A linear space of `rows × cols` matrices with a fixed basis.
#[derive(Clone, Debug)]
pub struct MapSpace {
    pub basis: Vec<Matrix>,
    stacked: Matrix,
    rows: usize,
    cols: usize,
}

impl MapSpace {
    pub fn new(p: u64, rows: usize, cols: usize, basis: Vec<Matrix>) -> Self {
        let vecs: Vec<Vec<u64>> = basis.iter().map(Matrix::to_vec).collect();
        Self {
            stacked: Matrix::from_columns(p, rows * cols, &vecs),
            basis,
            rows,
            cols,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn coords(&self, m: &Matrix) -> Option<Vec<u64>> {
        if m.shape() != (self.rows, self.cols) {
            return None;
        }
        if self.basis.is_empty() {
            return m.is_zero().then(Vec::new);
        }
        let p = m.prime();
        self.stacked
            .solve_right(&Matrix::from_columns(p, self.rows * self.cols, &[m.to_vec()]))
            .map(|x| x.column(0))
    }

    pub fn element(&self, coords: &[u64]) -> Matrix {
        let p = self.stacked.prime();
        let v = self.stacked.apply(coords);
        Matrix::from_vec(p, self.rows, self.cols, v)
    }

    /// Coordinates of `f(b_k)` for each basis map, as columns.
    fn induced(&self, target: &MapSpace, f: impl Fn(&Matrix) -> Matrix, what: &str) -> Result<Matrix> {
        let p = self.stacked.prime();
        let cols = self
            .basis
            .iter()
            .map(|b| target.coords(&f(b)).ok_or_else(|| Error::WellDefinedness(what.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(p, target.dim(), &cols))
    }
}

/// Right `A`-linear, colinear maps `src -> tgt`.
pub fn colinear_maps(src: &Comodule, tgt: &Comodule) -> MapSpace {
    let p = src.carrier.prime();
    let c_dim = src.tensor.right_dim;
    let id_c = Matrix::identity(p, c_dim);
    let basis = solve_linear_maps(p, src.dim(), tgt.dim(), |x| {
        let mut out: Vec<u64> = src
            .carrier
            .right_actions()
            .iter()
            .zip(tgt.carrier.right_actions())
            .flat_map(|(rs, rt)| x.mul(rs).sub(&rt.mul(x)).to_vec())
            .collect();
        let lhs = tgt.coaction.mul(x);
        let rhs = tgt.tensor.proj.mul(&x.kron(&id_c)).mul(&src.tensor.sec).mul(&src.coaction);
        out.extend(lhs.sub(&rhs).to_vec());
        out
    });
    MapSpace::new(p, tgt.dim(), src.dim(), basis)
}

/// The algebra of a space of endomorphisms closed under composition.
fn composition_algebra(space: &MapSpace, p: u64) -> Result<FiniteAlgebra> {
    let k = space.dim();
    let mut table = vec![0; k * k * k];
    for i in 0..k {
        for j in 0..k {
            let c = space
                .coords(&space.basis[i].mul(&space.basis[j]))
                .ok_or_else(|| Error::Invalid("endomorphisms are not closed under composition".into()))?;
            for (t, v) in c.into_iter().enumerate() {
                table[(i * k + j) * k + t] = v;
            }
        }
    }
    let unit = space.coords(&Matrix::identity(p, space.rows));
    FiniteAlgebra::new(p, k, table, unit)
}

/// A split system of right `C`-comodules over one coring.
#[derive(Clone, Debug)]
pub struct ComoduleFamily {
    pub coring: Coring,
    pub carriers: DirectSystem<Bimodule>,
    pub comodules: Vec<Comodule>,
}

impl ComoduleFamily {
    pub fn new(coring: Coring, carriers: DirectSystem<Bimodule>, coactions: Vec<Matrix>) -> Result<Self> {
        if !carriers.is_split() {
            return Err(Error::Precondition("comodule system must be split".into()));
        }
        let comodules = carriers
            .objects()
            .iter()
            .zip(coactions)
            .map(|(m, rho)| Comodule::new(m.clone(), Side::Right, &coring, rho))
            .collect::<Result<Vec<_>>>()?;
        let poset = carriers.poset();
        for (i, j) in poset.comparable_pairs() {
            let at = format!("({}, {})", poset.label(i), poset.label(j));
            if let Some(msg) = colinearity_defect(&comodules[i], &comodules[j], carriers.transition(i, j)) {
                return Err(Error::NotColinearTransitions(format!("transition at {at}: {msg}")));
            }
            let back = carriers.retraction(i, j).expect("split");
            if let Some(msg) = colinearity_defect(&comodules[j], &comodules[i], back) {
                return Err(Error::NotColinearTransitions(format!("retraction at {at}: {msg}")));
            }
        }
        Ok(Self {
            coring,
            carriers,
            comodules,
        })
    }

    pub fn check(&self) -> Report {
        let mut r = Report::new();
        for (i, m) in self.comodules.iter().enumerate() {
            let label = self.carriers.poset().label(i);
            for c in m.check(&self.coring).checks {
                r.record(&c.id, if c.passed() { Ok(()) } else { Err(format!("at ({label}): {}", c.counterexample.unwrap_or_default())) });
            }
        }
        r
    }
}

/// `T_i = End^C(M_i)` with `ρ_ji(t) = μ_ji t ν_ij`, and the resulting firm bimodule system.
#[derive(Clone, Debug)]
pub struct EndoSystem {
    pub family: ComoduleFamily,
    pub endos: Vec<MapSpace>,
    pub system: FirmBimoduleSystem,
}

pub fn endo_system(family: &ComoduleFamily) -> Result<EndoSystem> {
    let p = family.coring.prime();
    let poset = family.carriers.poset().clone();
    let endos: Vec<MapSpace> = family.comodules.iter().map(|m| colinear_maps(m, m)).collect();
    let rings = endos
        .iter()
        .map(|e| composition_algebra(e, p).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let a = family.coring.base().clone();
    let modules = family
        .comodules
        .iter()
        .zip(&endos)
        .zip(&rings)
        .map(|((m, e), t)| Bimodule::new(t.clone(), a.clone(), m.dim(), e.basis.clone(), m.carrier.right_actions().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let (mut rf, mut rb, mut mf, mut mb) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for (i, j) in poset.comparable_pairs() {
        if i == j {
            continue;
        }
        let mu = family.carriers.transition(i, j);
        let nu = family.carriers.retraction(i, j).expect("split");
        let at = format!("({}, {})", poset.label(i), poset.label(j));
        rf.insert((i, j), endos[i].induced(&endos[j], |t| mu.mul(t).mul(nu), &format!("μ t ν at {at}"))?);
        rb.insert((i, j), endos[j].induced(&endos[i], |t| nu.mul(t).mul(mu), &format!("ν t μ at {at}"))?);
        mf.insert((i, j), mu.clone());
        mb.insert((i, j), nu.clone());
    }
    let system = FirmBimoduleSystem::new(
        a,
        DirectSystem::new(poset.clone(), rings, rf, Some(rb))?,
        DirectSystem::new(poset, modules, mf, Some(mb))?,
    )?;
    Ok(EndoSystem {
        family: family.clone(),
        endos,
        system,
    })
}

/// `T† ⊂ End^C(M)` for the colimit `M`, with the idempotents `e_i = μ_i ν_i`.
#[derive(Clone, Debug)]
pub struct TDagger {
    pub endos: MapSpace,
    pub algebra: FiniteAlgebra,
    /// Coordinates in `T†` to coordinates in `End^C(M)`.
    pub inclusion: Matrix,
    pub idempotents: Vec<Matrix>,
    pub mu: Vec<Matrix>,
    pub nu: Vec<Matrix>,
    pub apex: usize,
}

pub fn build_tdagger(es: &EndoSystem) -> Result<TDagger> {
    let fam = &es.family;
    let p = fam.coring.prime();
    let col = fam.carriers.colimit()?;
    let nu = fam.carriers.retractions(&col)?;
    let mu = col.injections;
    let top = &fam.comodules[col.apex];
    let endos = colinear_maps(top, top);
    let idempotents: Vec<Matrix> = mu.iter().zip(&nu).map(|(m, n)| m.mul(n)).collect();
    let mut space = Subspace::zero(p, endos.dim());
    for e in &idempotents {
        let sandwich = endos.induced(&endos, |t| e.mul(t).mul(e), "e t e")?;
        space = space.sum(&sandwich.sub(&Matrix::identity(p, endos.dim())).kernel());
    }
    let inclusion = space.inclusion();
    let t_alg = composition_algebra(&endos, p)?;
    let unit = endos
        .coords(&Matrix::identity(p, top.dim()))
        .and_then(|u| space.coordinates(&u));
    let labels = fam.carriers.poset().labels().to_vec();
    let elements = idempotents
        .iter()
        .map(|e| {
            endos
                .coords(e)
                .and_then(|c| space.coordinates(&c))
                .ok_or_else(|| Error::Invalid("e_i is not in T†".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let algebra = t_alg.subalgebra(&inclusion, unit)?.with_family(IdempotentFamily {
        labels,
        elements,
        orthogonal: false,
    });
    Ok(TDagger {
        endos,
        algebra,
        inclusion,
        idempotents,
        mu,
        nu,
        apex: col.apex,
    })
}

/// Idempotent identities, normal form, local units, and `ρ` as a colimit cocone.
pub fn check_tdagger(es: &EndoSystem, td: &TDagger) -> Report {
    let mut r = Report::new();
    let poset = es.family.carriers.poset();
    for (i, e) in td.idempotents.iter().enumerate() {
        let at = format!("at ({})", poset.label(i));
        r.record("idempotent-absorbs-injection", agree(&e.mul(&td.mu[i]), &td.mu[i], &at));
        r.record("idempotent-absorbs-retraction", agree(&td.nu[i].mul(e), &td.nu[i], &at));
    }
    for (i, j) in poset.comparable_pairs() {
        let at = format!("at ({}, {})", poset.label(i), poset.label(j));
        let (ei, ej) = (&td.idempotents[i], &td.idempotents[j]);
        r.record("idempotents-nested", agree(&ej.mul(ei), ei, &at).and(agree(&ei.mul(ej), ei, &at)));
    }
    for k in 0..td.algebra.dim() {
        let t = td.endos.element(&td.inclusion.column(k));
        let witness = (0..poset.len()).find(|&i| {
            let e = &td.idempotents[i];
            e.mul(&t).mul(e) == t
        });
        let outcome = match witness {
            None => Err(format!("basis element {k} of T† has no witness")),
            Some(i) => {
                let ti = td.nu[i].mul(&t).mul(&td.mu[i]);
                let mut out = agree(&td.mu[i].mul(&ti).mul(&td.nu[i]), &t, &format!("basis element {k}, witness {}", poset.label(i)));
                for j in 0..poset.len() {
                    if out.is_ok() && poset.leq(i, j) {
                        let tj = td.nu[j].mul(&t).mul(&td.mu[j]);
                        let mu = es.family.carriers.transition(i, j);
                        let nu = es.family.carriers.retraction(i, j).expect("split");
                        out = agree(&mu.mul(&ti).mul(nu), &tj, &format!("basis element {k} at ({}, {})", poset.label(i), poset.label(j)));
                    }
                }
                out
            }
        };
        r.record("normal-form", outcome);
    }
    r.record(
        "tdagger-local-units",
        match verify_local_units(&td.algebra, &basis_singletons(&td.algebra)) {
            Ok(true) => Ok(()),
            Ok(false) => Err("some basis element has no local unit".into()),
            Err(e) => Err(e.to_string()),
        },
    );
    // ρ_i(t) = μ_i t ν_i lands in T† and the images at the apex exhaust it.
    let mut images = Vec::new();
    for (i, e) in es.endos.iter().enumerate() {
        let out = e.induced(&td.endos, |t| td.mu[i].mul(t).mul(&td.nu[i]), "ρ_i").and_then(|m| {
            let space = Subspace::from_row_matrix(&td.inclusion.transpose());
            space
                .coordinate_matrix(&m)
                .ok_or_else(|| Error::WellDefinedness(format!("ρ at ({}) leaves T†", poset.label(i))))
        });
        match out {
            Ok(m) => images.push(m),
            Err(e) => {
                r.fail("tdagger-cocone", e.to_string());
                return r;
            }
        }
    }
    let mut cocone = Ok(());
    for (i, j) in poset.comparable_pairs() {
        let trans = es.system.rings.transition(i, j);
        if cocone.is_ok() {
            cocone = agree(&images[j].mul(trans), &images[i], &format!("at ({}, {})", poset.label(i), poset.label(j)));
        }
    }
    if cocone.is_ok() && !is_isomorphism(&images[td.apex]) {
        cocone = Err("ρ at the apex is not bijective onto T†".into());
    }
    r.record("tdagger-cocone", cocone);
    r.dimension("T†", td.algebra.dim());
    r
}

/// `κ: P† ⊗_{T†} P -> P* ⊗_T P` and its inverse `λ(φ ⊗ p) = φ σ_i τ_i ⊗ p`.
#[derive(Clone, Debug)]
pub struct Kappa {
    pub kappa: Matrix,
    pub lambda: Matrix,
}

pub fn kappa_check(es: &EndoSystem, td: &TDagger) -> Result<(Kappa, Report)> {
    let fam = &es.family;
    let p = fam.coring.prime();
    let top = &fam.comodules[td.apex];
    let a = fam.coring.base().clone();
    let t_full = Arc::new(composition_algebra(&td.endos, p)?);
    let module = Bimodule::new(t_full.clone(), a.clone(), top.dim(), td.endos.basis.clone(), top.carrier.right_actions().to_vec())?;
    let dual = dual_module(&module)?;
    let t_dag = Arc::new(td.algebra.clone());
    let module_dag = module.restrict_left(t_dag.clone(), &td.inclusion);
    let mut space = Subspace::zero(p, dual.dim());
    for e in &td.idempotents {
        let imgs: Vec<Matrix> = dual.functionals.iter().map(|f| f.mul(e)).collect();
        let m = dual
            .coords_matrix(&imgs)
            .ok_or_else(|| Error::Invalid("φ e_i leaves P*".into()))?;
        space = space.sum(&m.sub(&Matrix::identity(p, dual.dim())).kernel());
    }
    let (restricted, incl) = dual.restrict(&space)?;
    let right = (0..t_dag.dim())
        .map(|k| restricted.module.right_matrix(&td.inclusion.column(k)))
        .collect();
    let pdag = Bimodule::new(
        a,
        t_dag,
        restricted.dim(),
        restricted.module.left_actions().to_vec(),
        right,
    )?;
    let x = tensor_over(&pdag, &module_dag)?;
    let y = tensor_over(&dual.module, &module)?;
    let kappa = x.map_to(&y, &incl, &Matrix::identity(p, top.dim()), "κ")?;
    let order = fam.carriers.poset().linear_extension().to_vec();
    let failure = std::cell::RefCell::new(None::<String>);
    let l = plain_map(p, &[dual.dim(), top.dim()], x.dim(), |ix| {
        let ex = unit_vector(top.dim(), ix[1]);
        let Some(&i) = order.iter().find(|&&i| td.idempotents[i].apply(&ex) == ex) else {
            failure.borrow_mut().get_or_insert_with(|| format!("basis element {} of P is fixed by no e_i", ix[1]));
            return vec![0; x.dim()];
        };
        let phi = dual.functionals[ix[0]].mul(&td.idempotents[i]);
        match restricted.coords(&phi) {
            Some(c) => x.element(&c, &ex),
            None => {
                failure.borrow_mut().get_or_insert_with(|| format!("φ e_i leaves P† at ({})", fam.carriers.poset().label(i)));
                vec![0; x.dim()]
            }
        }
    });
    if let Some(msg) = failure.into_inner() {
        return Err(Error::WellDefinedness(msg));
    }
    let lambda = factor_through(&l, &y.proj, &y.sec, "λ")?;
    let mut r = Report::new();
    r.record(
        "kappa-inverse",
        agree(&kappa.mul(&lambda), &Matrix::identity(p, y.dim()), "κ λ")
            .and(agree(&lambda.mul(&kappa), &Matrix::identity(p, x.dim()), "λ κ")),
    );
    r.dimension("P† ⊗_T† P", x.dim());
    r.dimension("P* ⊗_T P", y.dim());
    Ok((Kappa { kappa, lambda }, r))
}

/// The diagram over pairs of indices: `G(i)` on the diagonal and
/// `P_j* ⊗ (Hom^C(M_i, M_j) ⊗ P_i)` elsewhere, with its oracle colimit compared to the comatrix coring.
pub fn extended_diagram(es: &EndoSystem, cm: &Comatrix) -> Result<Report> {
    let fam = &es.family;
    let p = fam.coring.prime();
    let poset = fam.carriers.poset();
    let n = poset.len();
    let sys = &es.system;
    let mut r = Report::new();
    let mut slots: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    let mut dims: Vec<usize> = cm.g.tensors.iter().map(|t| t.dim()).collect();
    let mut morphisms: Vec<(usize, usize, Matrix)> = Vec::new();
    let mut cocone: Vec<Matrix> = cm.comatrix.cocone.clone();
    for (i, j) in poset.comparable_pairs() {
        if i != j {
            morphisms.push((i, j, cm.g.z.system.transition(i, j).clone()));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let at = format!("({}, {})", poset.label(i), poset.label(j));
            let homs = colinear_maps(&fam.comodules[i], &fam.comodules[j]);
            let (ti, tj) = (sys.rings.object(i), sys.rings.object(j));
            let (pi, pj) = (sys.modules.object(i), sys.modules.object(j));
            let left = (0..tj.dim())
                .map(|k| homs.induced(&homs, |h| pj.left_actions()[k].mul(h), "T_j action on Hom"))
                .collect::<Result<Vec<_>>>()?;
            let right = (0..ti.dim())
                .map(|k| homs.induced(&homs, |h| h.mul(&pi.left_actions()[k]), "T_i action on Hom"))
                .collect::<Result<Vec<_>>>()?;
            let hom_mod = Bimodule::new(tj.clone(), ti.clone(), homs.dim(), left, right)?;
            let dj = &sys.dual_bases[j].dual;
            let di = &sys.dual_bases[i].dual;
            let tri = triple_right(&dj.module, &hom_mod, pi)?;
            let (gi, gj) = (&cm.g.tensors[i], &cm.g.tensors[j]);
            let dims3 = [dj.dim(), homs.dim(), pi.dim()];
            let bad = std::cell::Cell::new(false);
            let yl = plain_map(p, &dims3, gi.dim(), |ix| {
                let h = &homs.basis[ix[1]];
                let f = dj.functional(&unit_vector(dj.dim(), ix[0])).mul(h);
                match di.coords(&f) {
                    Some(c) => gi.element(&c, &unit_vector(pi.dim(), ix[2])),
                    None => {
                        bad.set(true);
                        vec![0; gi.dim()]
                    }
                }
            });
            if bad.get() {
                return Err(Error::WellDefinedness(format!("φ h leaves P_i* at {at}")));
            }
            let yr = plain_map(p, &dims3, gj.dim(), |ix| {
                let x = homs.basis[ix[1]].column(ix[2]);
                gj.element(&unit_vector(dj.dim(), ix[0]), &x)
            });
            let fl = factor_through(&yl, &tri.from_plain, &tri.to_plain, &format!("F(l) at {at}"))?;
            let fr = factor_through(&yr, &tri.from_plain, &tri.to_plain, &format!("F(r) at {at}"))?;
            let comm = if poset.leq(i, j) {
                agree(&cm.g.z.system.transition(i, j).mul(&fl), &fr, &format!("at {at}"))
            } else if poset.leq(j, i) {
                agree(&cm.g.z.system.transition(j, i).mul(&fr), &fl, &format!("at {at}"))
            } else {
                Ok(())
            };
            r.record("extended-commutation", comm);
            let f_ij = cm.comatrix.cocone[i].mul(&fl);
            r.record(
                "extended-cocone",
                agree(&f_ij, &cm.comatrix.cocone[j].mul(&fr), &format!("at {at}")),
            );
            let slot = slots.len();
            slots.push((i, j));
            dims.push(tri.outer.dim());
            morphisms.push((slot, i, fl));
            morphisms.push((slot, j, fr));
            cocone.push(f_ij);
        }
    }
    let oracle = OracleColimit::new(p, &dims, &morphisms);
    let outcome = oracle.mediating(&cocone).map_err(|e| e.to_string()).and_then(|m| {
        if is_isomorphism(&m) {
            Ok(())
        } else {
            Err(format!("mediating map has rank {} between dimensions {} and {}", m.rank(), m.cols(), m.rows()))
        }
    });
    r.record("extended-colimit", outcome);
    r.dimension("extended colimit", oracle.dim());
    Ok(r)
}

/// The comatrix data of the endomorphism system together with `can: M† ⊗_{T†} M -> C`.
#[derive(Clone, Debug)]
pub struct Galois {
    pub endo: EndoSystem,
    pub comatrix: Comatrix,
    pub levels: Vec<Matrix>,
    pub can: Matrix,
}

impl Galois {
    pub fn is_galois(&self) -> bool {
        is_isomorphism(&self.can)
    }

    pub fn coring(&self) -> &Coring {
        &self.endo.family.coring
    }

    /// Cocone property of the level maps, coring morphism laws and the dual basis identity.
    pub fn check(&self) -> Report {
        let mut r = Report::new();
        let poset = self.endo.family.carriers.poset();
        let g = &self.comatrix.g;
        for (i, j) in poset.comparable_pairs() {
            r.record(
                "can-cocone",
                agree(
                    &self.levels[j].mul(g.z.system.transition(i, j)),
                    &self.levels[i],
                    &format!("at ({}, {})", poset.label(i), poset.label(j)),
                ),
            );
        }
        for c in check_coring_morphism(&self.comatrix.comatrix.coring, self.coring(), &self.can).checks {
            r.record(&format!("can-{}", c.id), if c.passed() { Ok(()) } else { Err(c.counterexample.unwrap_or_default()) });
        }
        let c = &self.coring().carrier;
        let p = c.prime();
        for (i, db) in self.endo.system.dual_bases.iter().enumerate() {
            let gt = &g.tensors[i];
            let dim_m = self.endo.system.modules.object(i).dim();
            let mut out = Ok(());
            for phi in 0..db.dual.dim() {
                let e_phi = unit_vector(db.dual.dim(), phi);
                for m in 0..dim_m {
                    let mut lhs = vec![0; c.dim()];
                    for rr in 0..db.len() {
                        let coeff = db.functional(rr).column(m);
                        let v = self.levels[i].apply(&gt.element(&e_phi, &db.elements.column(rr)));
                        axpy(p, &mut lhs, 1, &c.right_matrix(&coeff).apply(&v));
                    }
                    let rhs = self.levels[i].apply(&gt.element(&e_phi, &unit_vector(dim_m, m)));
                    if out.is_ok() && lhs != rhs {
                        out = Err(format!("at ({}), functional {phi}, element {m}", poset.label(i)));
                    }
                }
            }
            r.record("can-dual-basis", out);
        }
        r.record(
            "galois",
            if self.is_galois() {
                Ok(())
            } else {
                Err(format!("can has rank {} between dimensions {} and {}", self.can.rank(), self.can.cols(), self.can.rows()))
            },
        );
        r
    }
}

pub fn canonical_map(family: &ComoduleFamily) -> Result<Galois> {
    let endo = endo_system(family)?;
    let comatrix = build_context(&endo.system)?;
    let c = &family.coring;
    let p = c.prime();
    let mut levels = Vec::new();
    for (i, m) in family.comodules.iter().enumerate() {
        let gt = &comatrix.g.tensors[i];
        let dual = &endo.system.dual_bases[i].dual;
        let rho = m.tensor.sec.mul(&m.coaction);
        let dc = c.dim();
        let y = plain_map(p, &[dual.dim(), m.dim()], dc, |ix| {
            let phi = dual.functional(&unit_vector(dual.dim(), ix[0]));
            let mut out = vec![0; dc];
            for (k, coef) in rho.column(ix[1]).into_iter().enumerate() {
                if coef != 0 {
                    let (x, cc) = (k / dc, k % dc);
                    let v = c.carrier.left_matrix(&phi.column(x)).column(cc);
                    axpy(p, &mut out, coef, &v);
                }
            }
            out
        });
        levels.push(factor_through(&y, &gt.proj, &gt.sec, "can at a level")?);
    }
    let h = Matrix::hstack(p, comatrix.comatrix.coring.dim(), &comatrix.comatrix.cocone.iter().collect::<Vec<_>>());
    let can = h
        .solve_left(&Matrix::hstack(p, c.dim(), &levels.iter().collect::<Vec<_>>()))
        .ok_or_else(|| Error::WellDefinedness("can on the colimit".into()))?;
    Ok(Galois {
        endo,
        comatrix,
        levels,
        can,
    })
}

/// The modules of a firm bimodule system as comodules over its own comatrix
/// coring, `ρ_i(p) = Σ z ⊗ g_i(z* ⊗ p)`.
pub fn self_family(sys: &FirmBimoduleSystem, cm: &Comatrix) -> Result<ComoduleFamily> {
    let coring = cm.comatrix.coring.clone();
    let p = coring.prime();
    let carriers: Vec<Bimodule> = sys.modules.objects().iter().map(Bimodule::as_right_module).collect();
    let mut coactions = Vec::new();
    for (i, m) in carriers.iter().enumerate() {
        let db = &sys.dual_bases[i];
        let t = tensor_over(m, &coring.carrier)?;
        let gt = &cm.g.tensors[i];
        let cols: Vec<Vec<u64>> = (0..m.dim())
            .map(|x| {
                let mut out = vec![0; t.dim()];
                for r in 0..db.len() {
                    let d = cm.comatrix.cocone[i].apply(&gt.element(&db.functionals.column(r), &unit_vector(m.dim(), x)));
                    axpy(p, &mut out, 1, &t.element(&db.elements.column(r), &d));
                }
                out
            })
            .collect();
        coactions.push(Matrix::from_columns(p, t.dim(), &cols));
    }
    let fwd = sys.modules.transitions().iter().filter(|((i, j), _)| i != j).map(|(k, v)| (*k, v.clone())).collect();
    let back = sys
        .modules
        .retractions_map()
        .ok_or_else(|| Error::Precondition("module system must be split".into()))?
        .iter()
        .filter(|((i, j), _)| i != j)
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    let carriers = DirectSystem::new(sys.poset().clone(), carriers, fwd, Some(back))?;
    ComoduleFamily::new(coring, carriers, coactions)
}

fn single_point(coring: Coring, carrier: Bimodule, coaction: Matrix) -> Result<ComoduleFamily> {
    let sys = DirectSystem::new(
        crate::poset::DirectedPoset::point(),
        vec![carrier],
        BTreeMap::new(),
        Some(BTreeMap::new()),
    )?;
    ComoduleFamily::new(coring, sys, vec![coaction])
}

/// `A = F_p[x]/(x^2)` as a comodule over the coring `A ⊗_{F_p} A`, `a ↦ 1 ⊗ (1 ⊗ a)`,
/// and the map `φ ⊗ m ↦ φ(1) ⊗ m` identifying the comatrix coring with it.
pub type Alignment = Box<dyn Fn(&Comatrix) -> Result<Matrix> + Send + Sync>;

pub struct SweedlerReference {
    pub family: ComoduleFamily,
    pub alignment: Alignment,
}

pub fn sweedler_reference(p: u64) -> Result<SweedlerReference> {
    let a = Arc::new(FiniteAlgebra::truncated_polynomial(p, 2));
    let k = Arc::new(FiniteAlgebra::field(p));
    let incl = Matrix::from_columns(p, 2, &[a.unit().expect("unital").to_vec()]);
    let (coring, t) = Coring::sweedler(&a, &k, &incl)?;
    let m = Bimodule::regular_right(&a);
    let mc = tensor_over(&m, &coring.carrier)?;
    let one = a.unit().expect("unital").to_vec();
    let cols: Vec<Vec<u64>> = (0..2).map(|x| mc.element(&one, &t.element(&one, &unit_vector(2, x)))).collect();
    let family = single_point(coring, m, Matrix::from_columns(p, mc.dim(), &cols))?;
    let alignment = Box::new(move |cm: &Comatrix| -> Result<Matrix> {
        let d = &cm.comatrix.tensor;
        let pd = &cm.pdagger.module;
        let y = plain_map(p, &[pd.dim(), 2], t.dim(), |ix| {
            let phi = pd.functional(&unit_vector(pd.dim(), ix[0]));
            t.element(&phi.apply(&one), &unit_vector(2, ix[1]))
        });
        factor_through(&y, &d.proj, &d.sec, "φ ⊗ m ↦ φ(1) ⊗ m")
    });
    Ok(SweedlerReference { family, alignment })
}

/// `e_1 A` over `A = F_p × F_p` as a comodule over the trivial coring `A`.
pub fn non_galois_example(p: u64) -> Result<ComoduleFamily> {
    let a = Arc::new(FiniteAlgebra::product(p, &[&FiniteAlgebra::field(p), &FiniteAlgebra::field(p)]));
    let coring = Coring::trivial(&a)?;
    let m = Bimodule::right_module(&a, 1, vec![Matrix::identity(p, 1), Matrix::zeros(p, 1, 1)])?;
    let t = tensor_over(&m, &coring.carrier)?;
    let rho = Matrix::from_columns(p, t.dim(), &[t.element(&[1], a.unit().expect("unital"))]);
    single_point(coring, m, rho)
}

/// Descent for the comatrix coring of the endomorphism system, with the
/// regular `C`-comodule carried over along `can^{-1}` as an extra test object.
pub fn galois_equivalence_check(g: &Galois, seed: u64, exec: Exec) -> Result<Descent> {
    if !g.is_galois() {
        return Err(Error::Precondition("can is not an isomorphism".into()));
    }
    let ctx = &g.comatrix.context;
    if !is_faithfully_flat(&ctx.p)? {
        return Err(Error::Precondition("M is not faithfully flat over T†".into()));
    }
    let d = ctx.coring()?;
    let mut tests = test_sets(ctx, &d, seed)?;
    let c = g.coring();
    let inv = g.can.inverse().ok_or_else(|| Error::Precondition("can is not invertible".into()))?;
    let cd = tensor_over(&c.carrier, &d.carrier)?;
    let p = c.prime();
    let coaction = cd
        .proj
        .mul(&Matrix::identity(p, c.dim()).kron(&inv))
        .mul(&c.square.sec)
        .mul(&c.comult);
    tests
        .comodules
        .push(("C via can".to_string(), Comodule::new(c.carrier.clone(), Side::Right, &d, coaction)?));
    descent_check(ctx, &d, &tests, exec)
}

/// Every Galois-side identity for the self-comodule family of `sys`.
pub fn galois_battery(sys: &FirmBimoduleSystem, cm: &Comatrix) -> Result<(Galois, Report)> {
    let fam = self_family(sys, cm)?;
    let g = canonical_map(&fam)?;
    let mut r = fam.check();
    r.merge_scoped("endo", g.endo.system.check_compat());
    let td = build_tdagger(&g.endo)?;
    r.merge(check_tdagger(&g.endo, &td));
    r.merge(kappa_check(&g.endo, &td)?.1);
    r.merge(extended_diagram(&g.endo, &g.comatrix)?);
    r.merge(g.check());
    Ok((g, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{Generator, DEFAULT_BUDGET};

    fn galois_of(g: Generator) -> Galois {
        let sys = g.build(2, DEFAULT_BUDGET).unwrap();
        let cm = build_context(&sys).unwrap();
        canonical_map(&self_family(&sys, &cm).unwrap()).unwrap()
    }

    #[test]
    fn corner_endomorphisms_are_matrix_algebras() {
        let g = galois_of(Generator::Corner(3));
        let dims: Vec<usize> = g.endo.endos.iter().map(MapSpace::dim).collect();
        assert_eq!(dims, vec![1, 4, 9]);
        assert!(g.is_galois());
        let td = build_tdagger(&g.endo).unwrap();
        assert_eq!(td.algebra.dim(), 9);
        assert!(check_tdagger(&g.endo, &td).all_passed());
    }

    #[test]
    fn non_galois_is_detected() {
        let fam = non_galois_example(2).unwrap();
        let g = canonical_map(&fam).unwrap();
        assert!(!g.is_galois());
        assert!(matches!(galois_equivalence_check(&g, 0, Exec::Sequential), Err(Error::Precondition(_))));
    }

    #[test]
    fn sweedler_can_is_the_alignment() {
        let r = sweedler_reference(2).unwrap();
        let g = canonical_map(&r.family).unwrap();
        assert!(g.is_galois());
        assert_eq!(g.can, (r.alignment)(&g.comatrix).unwrap());
    }

    #[test]
    fn non_colinear_transition_is_rejected() {
        let a = Arc::new(FiniteAlgebra::product(2, &[&FiniteAlgebra::field(2), &FiniteAlgebra::field(2)]));
        let coring = Coring::trivial(&a).unwrap();
        let m1 = Bimodule::right_module(&a, 1, vec![Matrix::identity(2, 1), Matrix::zeros(2, 1, 1)]).unwrap();
        let m2 = Bimodule::right_module(&a, 1, vec![Matrix::zeros(2, 1, 1), Matrix::identity(2, 1)]).unwrap();
        let rho = |m: &Bimodule| {
            let t = tensor_over(m, &coring.carrier).unwrap();
            Matrix::from_columns(2, t.dim(), &[t.element(&[1], a.unit().unwrap())])
        };
        let coactions = vec![rho(&m1), rho(&m2)];
        let id = Matrix::identity(2, 1);
        let carriers = DirectSystem::new(
            crate::poset::DirectedPoset::chain(2),
            vec![m1, m2],
            BTreeMap::from([((0, 1), id.clone())]),
            Some(BTreeMap::from([((0, 1), id)])),
        )
        .unwrap();
        assert!(matches!(
            ComoduleFamily::new(coring, carriers, coactions),
            Err(Error::NotColinearTransitions(_))
        ));
    }
}
