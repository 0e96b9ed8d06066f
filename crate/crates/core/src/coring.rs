//! Corings, comodules, cotensor products and colimits of systems of corings.

use std::sync::Arc;

use crate::algebra::FiniteAlgebra;
use crate::bimodule::{
    bimodule_map_defect, factor_through, plain_map, tensor_over, triple_right, Bimodule, Side, Tensor,
};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, unit_vector, Matrix, Subspace};
use crate::report::{agree, Report};
use crate::system::DirectSystem;

/// An `A`-coring: carrier `C`, `Δ: C -> C ⊗_A C`, `ε: C -> A`.
#[derive(Clone, Debug)]
pub struct Coring {
    pub carrier: Bimodule,
    pub square: Tensor,
    pub comult: Matrix,
    pub counit: Matrix,
}

impl Coring {
    pub fn new(carrier: Bimodule, comult: Matrix, counit: Matrix) -> Result<Self> {
        let a = carrier.left_algebra().clone();
        if !crate::bimodule::same_algebra(&a, carrier.right_algebra()) {
            return Err(Error::Invalid("coring carrier must be an A-bimodule".into()));
        }
        let square = tensor_over(&carrier, &carrier)?;
        if comult.shape() != (square.dim(), carrier.dim()) || counit.shape() != (a.dim(), carrier.dim()) {
            return Err(Error::DimensionMismatch("comultiplication or counit has the wrong shape".into()));
        }
        Ok(Self {
            carrier,
            square,
            comult,
            counit,
        })
    }

    /// As `new`, reusing an already computed `C ⊗_A C`.
    pub fn with_square(carrier: Bimodule, square: Tensor, comult: Matrix, counit: Matrix) -> Result<Self> {
        let a_dim = carrier.left_algebra().dim();
        if comult.shape() != (square.dim(), carrier.dim()) || counit.shape() != (a_dim, carrier.dim()) {
            return Err(Error::DimensionMismatch("comultiplication or counit has the wrong shape".into()));
        }
        Ok(Self {
            carrier,
            square,
            comult,
            counit,
        })
    }

    pub fn base(&self) -> &Arc<FiniteAlgebra> {
        self.carrier.left_algebra()
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn prime(&self) -> u64 {
        self.carrier.prime()
    }

    /// `A` with `Δ(a) = 1 ⊗ a` and `ε = id`.
    pub fn trivial(a: &Arc<FiniteAlgebra>) -> Result<Self> {
        let unit = a
            .unit()
            .ok_or_else(|| Error::Precondition("trivial coring needs a unit".into()))?
            .to_vec();
        let carrier = Bimodule::regular(a);
        let square = tensor_over(&carrier, &carrier)?;
        let cols: Vec<Vec<u64>> = (0..a.dim()).map(|k| square.element(&unit, &a.basis(k))).collect();
        let comult = Matrix::from_columns(a.prime(), square.dim(), &cols);
        Self::new(carrier, comult, Matrix::identity(a.prime(), a.dim()))
    }

    /// `A ⊗_B A` with `Δ(a ⊗ a') = a ⊗ 1 ⊗ a'` and `ε(a ⊗ a') = a a'`, for a
    /// unital subalgebra `B` embedded by `incl`.
    pub fn sweedler(a: &Arc<FiniteAlgebra>, b: &Arc<FiniteAlgebra>, incl: &Matrix) -> Result<(Self, Tensor)> {
        let p = a.prime();
        let unit = a
            .unit()
            .ok_or_else(|| Error::Precondition("Sweedler coring needs a unital algebra".into()))?
            .to_vec();
        let right_b: Vec<Matrix> = (0..b.dim()).map(|k| a.right_mul_matrix(&incl.column(k))).collect();
        let left_b: Vec<Matrix> = (0..b.dim()).map(|k| a.left_mul_matrix(&incl.column(k))).collect();
        let a_b = Bimodule::new(
            a.clone(),
            b.clone(),
            a.dim(),
            (0..a.dim()).map(|k| a.left_regular(k).clone()).collect(),
            right_b,
        )?;
        let b_a = Bimodule::new(
            b.clone(),
            a.clone(),
            a.dim(),
            left_b,
            (0..a.dim()).map(|k| a.right_regular(k).clone()).collect(),
        )?;
        let t = tensor_over(&a_b, &b_a)?;
        let square = tensor_over(&t.module, &t.module)?;
        let d = a.dim();
        let y = plain_map(p, &[d, d], square.dim(), |ix| {
            square.element(&t.element(&unit_vector(d, ix[0]), &unit), &t.element(&unit, &unit_vector(d, ix[1])))
        });
        let comult = factor_through(&y, &t.proj, &t.sec, "Sweedler comultiplication")?;
        let y = plain_map(p, &[d, d], d, |ix| a.mul(&a.basis(ix[0]), &a.basis(ix[1])));
        let counit = factor_through(&y, &t.proj, &t.sec, "Sweedler counit")?;
        Ok((Self::new(t.module.clone(), comult, counit)?, t))
    }

    /// `Δ` followed by the section into the plain square.
    fn plain_comult(&self) -> Matrix {
        self.square.sec.mul(&self.comult)
    }

    /// Exhaustive check of bilinearity, coassociativity and both counit laws.
    pub fn check(&self) -> Report {
        let mut r = Report::new();
        let p = self.prime();
        let a = self.base();
        let c = &self.carrier;
        let n = c.dim();
        r.record(
            "comultiplication-bilinear",
            bimodule_map_defect(c, &self.square.module, &self.comult).map_or(Ok(()), Err),
        );
        r.record(
            "counit-bilinear",
            bimodule_map_defect(c, &Bimodule::regular(a), &self.counit).map_or(Ok(()), Err),
        );
        let d = self.plain_comult();
        match triple_right(c, c, c) {
            Ok(t) => {
                let id = Matrix::identity(p, n);
                let lhs = t.from_plain.mul(&d.kron(&id)).mul(&d);
                let rhs = t.from_plain.mul(&id.kron(&d)).mul(&d);
                r.record("coassociativity", agree(&lhs, &rhs, "coassociativity"));
            }
            Err(e) => r.fail("coassociativity", e.to_string()),
        }
        let left = plain_map(p, &[n, n], n, |ix| c.left_matrix(&self.counit.column(ix[0])).column(ix[1]));
        let right = plain_map(p, &[n, n], n, |ix| c.right_matrix(&self.counit.column(ix[1])).column(ix[0]));
        let id = Matrix::identity(p, n);
        r.record("counit-left", agree(&left.mul(&d), &id, "counit on the left"));
        r.record("counit-right", agree(&right.mul(&d), &id, "counit on the right"));
        r
    }
}

/// `(f ⊗ f) ∘ Δ = Δ' ∘ f` and `ε' ∘ f = ε`.
pub fn check_coring_morphism(src: &Coring, tgt: &Coring, f: &Matrix) -> Report {
    let mut r = Report::new();
    r.record(
        "morphism-bilinear",
        bimodule_map_defect(&src.carrier, &tgt.carrier, f).map_or(Ok(()), Err),
    );
    if f.shape() != (tgt.dim(), src.dim()) {
        r.fail("morphism-comultiplication", "shape mismatch");
        return r;
    }
    match src.square.map_to(&tgt.square, f, f, "tensor square of the morphism") {
        Ok(ff) => r.record(
            "morphism-comultiplication",
            agree(&ff.mul(&src.comult), &tgt.comult.mul(f), "comultiplication"),
        ),
        Err(e) => r.fail("morphism-comultiplication", e.to_string()),
    }
    r.record("morphism-counit", agree(&tgt.counit.mul(f), &src.counit, "counit"));
    r
}

/// A right (`M -> M ⊗_A C`) or left (`M -> C ⊗_A M`) comodule.
#[derive(Clone, Debug)]
pub struct Comodule {
    pub carrier: Bimodule,
    pub side: Side,
    pub tensor: Tensor,
    pub coaction: Matrix,
}

impl Comodule {
    pub fn new(carrier: Bimodule, side: Side, coring: &Coring, coaction: Matrix) -> Result<Self> {
        let tensor = match side {
            Side::Right => tensor_over(&carrier, &coring.carrier)?,
            Side::Left => tensor_over(&coring.carrier, &carrier)?,
        };
        if coaction.shape() != (tensor.dim(), carrier.dim()) {
            return Err(Error::DimensionMismatch("coaction has the wrong shape".into()));
        }
        Ok(Self {
            carrier,
            side,
            tensor,
            coaction,
        })
    }

    /// `C` as a right comodule over itself.
    pub fn regular(coring: &Coring) -> Self {
        Self {
            carrier: coring.carrier.clone(),
            side: Side::Right,
            tensor: coring.square.clone(),
            coaction: coring.comult.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    fn plain_coaction(&self) -> Matrix {
        self.tensor.sec.mul(&self.coaction)
    }

    pub fn check(&self, coring: &Coring) -> Report {
        let mut r = Report::new();
        let p = coring.prime();
        let m = &self.carrier;
        let n = m.dim();
        let nc = coring.dim();
        r.record(
            "coaction-linear",
            bimodule_map_defect(m, &self.tensor.module, &self.coaction).map_or(Ok(()), Err),
        );
        let rho = self.plain_coaction();
        let d = coring.plain_comult();
        let idm = Matrix::identity(p, n);
        let idc = Matrix::identity(p, nc);
        let (lhs, rhs, counit) = match self.side {
            Side::Right => {
                let t = match triple_right(m, &coring.carrier, &coring.carrier) {
                    Ok(t) => t,
                    Err(e) => {
                        r.fail("coaction-coassociativity", e.to_string());
                        return r;
                    }
                };
                let lhs = t.from_plain.mul(&idm.kron(&d)).mul(&rho);
                let rhs = t.from_plain.mul(&rho.kron(&idc)).mul(&rho);
                let counit = plain_map(p, &[n, nc], n, |ix| {
                    m.right_matrix(&coring.counit.column(ix[1])).column(ix[0])
                });
                (lhs, rhs, counit)
            }
            Side::Left => {
                let t = match triple_right(&coring.carrier, &coring.carrier, m) {
                    Ok(t) => t,
                    Err(e) => {
                        r.fail("coaction-coassociativity", e.to_string());
                        return r;
                    }
                };
                let lhs = t.from_plain.mul(&idc.kron(&rho)).mul(&rho);
                let rhs = t.from_plain.mul(&d.kron(&idm)).mul(&rho);
                let counit = plain_map(p, &[nc, n], n, |ix| {
                    m.left_matrix(&coring.counit.column(ix[0])).column(ix[1])
                });
                (lhs, rhs, counit)
            }
        };
        r.record("coaction-coassociativity", agree(&lhs, &rhs, "coaction"));
        r.record("coaction-counit", agree(&counit.mul(&rho), &idm, "coaction counit"));
        r
    }
}

/// Colinearity defect of `f: src -> tgt` for comodules on the same side.
pub fn colinearity_defect(src: &Comodule, tgt: &Comodule, f: &Matrix) -> Option<String> {
    let p = src.carrier.prime();
    let c_dim = match src.side {
        Side::Right => src.tensor.right_dim,
        Side::Left => src.tensor.left_dim,
    };
    let id = Matrix::identity(p, c_dim);
    let lifted = match src.side {
        Side::Right => f.kron(&id),
        Side::Left => id.kron(f),
    };
    let lhs = tgt.coaction.mul(f);
    let rhs = tgt.tensor.proj.mul(&lifted).mul(&src.tensor.sec).mul(&src.coaction);
    agree(&lhs, &rhs, "colinearity").err()
}

/// `N □_C M` inside `N ⊗_A M`.
#[derive(Clone, Debug)]
pub struct Cotensor {
    pub tensor: Tensor,
    pub space: Subspace,
    pub inclusion: Matrix,
}

impl Cotensor {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

pub fn cotensor(n: &Comodule, m: &Comodule, coring: &Coring) -> Result<Cotensor> {
    if n.side != Side::Right || m.side != Side::Left {
        return Err(Error::Precondition("cotensor needs a right and a left comodule".into()));
    }
    let p = coring.prime();
    let t = tensor_over(&n.carrier, &m.carrier)?;
    let tri = triple_right(&n.carrier, &coring.carrier, &m.carrier)?;
    let idn = Matrix::identity(p, n.dim());
    let idm = Matrix::identity(p, m.dim());
    let left_leg = tri.from_plain.mul(&idn.kron(&m.plain_coaction()));
    let right_leg = tri.from_plain.mul(&n.plain_coaction().kron(&idm));
    let diff = left_leg.sub(&right_leg).mul(&t.sec);
    let space = kernel_basis(&diff);
    let inclusion = space.inclusion();
    Ok(Cotensor {
        tensor: t,
        space,
        inclusion,
    })
}

/// A direct system of `A`-bimodules with a coring structure at each index.
#[derive(Clone, Debug)]
pub struct ZCoalgebra {
    pub system: DirectSystem<Bimodule>,
    pub corings: Vec<Coring>,
}

impl ZCoalgebra {
    /// Every transition must be a coring morphism.
    pub fn check_naturality(&self) -> Result<()> {
        let poset = self.system.poset();
        for (i, j) in poset.comparable_pairs() {
            let rep = check_coring_morphism(&self.corings[i], &self.corings[j], self.system.transition(i, j));
            let failure = rep
                .failures()
                .next()
                .map(|f| format!("{}: {}", f.id, f.counterexample.clone().unwrap_or_default()));
            if let Some(msg) = failure {
                return Err(Error::NotNatural(format!("({}, {})", poset.label(i), poset.label(j)), msg));
            }
        }
        Ok(())
    }

    pub fn check(&self) -> Report {
        let mut r = Report::new();
        for (i, c) in self.corings.iter().enumerate() {
            r.merge_scoped(&format!("level {}", self.system.poset().label(i)), c.check());
        }
        r.record("naturality", self.check_naturality().map_err(|e| e.to_string()));
        r
    }
}

#[derive(Clone, Debug)]
pub struct CoringColimit {
    pub coring: Coring,
    pub injections: Vec<Matrix>,
}

/// The coring structure on a cocone carrier determined by `Δ c_i = (c_i ⊗ c_i) Δ_i`, `ε c_i = ε_i`.
pub fn coring_on_cocone(carrier: Bimodule, injections: &[Matrix], z: &ZCoalgebra) -> Result<Coring> {
    let p = carrier.prime();
    let square = tensor_over(&carrier, &carrier)?;
    let mut rhs_d = Vec::new();
    let mut rhs_e = Vec::new();
    for (c, g) in z.corings.iter().zip(injections) {
        rhs_d.push(c.square.map_to(&square, g, g, "tensor square of a cocone map")?.mul(&c.comult));
        rhs_e.push(c.counit.clone());
    }
    let h = Matrix::hstack(p, carrier.dim(), &injections.iter().collect::<Vec<_>>());
    let comult = h
        .solve_left(&Matrix::hstack(p, square.dim(), &rhs_d.iter().collect::<Vec<_>>()))
        .ok_or_else(|| Error::WellDefinedness("comultiplication on the colimit".into()))?;
    let a_dim = carrier.left_algebra().dim();
    let counit = h
        .solve_left(&Matrix::hstack(p, a_dim, &rhs_e.iter().collect::<Vec<_>>()))
        .ok_or_else(|| Error::WellDefinedness("counit on the colimit".into()))?;
    Coring::new(carrier, comult, counit)
}

/// Colimit at the apex of the index poset.
pub fn colimit_coring(z: &ZCoalgebra) -> Result<CoringColimit> {
    z.check_naturality()?;
    let col = z.system.colimit()?;
    let coring = coring_on_cocone(col.object, &col.injections, z)?;
    Ok(CoringColimit {
        coring,
        injections: col.injections,
    })
}

/// Colimit as the disjoint union modulo the transitions.
pub fn colimit_coring_oracle(z: &ZCoalgebra) -> Result<CoringColimit> {
    z.check_naturality()?;
    let (carrier, oc) = z.system.oracle_module()?;
    let coring = coring_on_cocone(carrier, &oc.injections, z)?;
    Ok(CoringColimit {
        coring,
        injections: oc.injections,
    })
}

/// A system of right comodules over the levels of a Z-coalgebra.
#[derive(Clone, Debug)]
pub struct ComoduleSystem {
    pub system: DirectSystem<Bimodule>,
    pub comodules: Vec<Comodule>,
}

/// The coaction on the colimit determined by `ρ m_i = (m_i ⊗ c_i) ρ_i`.
pub fn colimit_comodule(h: &ComoduleSystem, z: &ZCoalgebra, col: &CoringColimit) -> Result<(Comodule, Vec<Matrix>)> {
    let poset = h.system.poset();
    for (i, j) in poset.comparable_pairs() {
        let mu = h.system.transition(i, j);
        let g = z.system.transition(i, j);
        let (ci, cj) = (&h.comodules[i], &h.comodules[j]);
        let lhs = cj.coaction.mul(mu);
        let rhs = cj.tensor.proj.mul(&mu.kron(g)).mul(&ci.tensor.sec).mul(&ci.coaction);
        if let Err(e) = agree(&lhs, &rhs, "coaction transport") {
            return Err(Error::NotNatural(format!("({}, {})", poset.label(i), poset.label(j)), e));
        }
    }
    let mcol = h.system.colimit()?;
    let p = col.coring.prime();
    let carrier = mcol.object.clone();
    let tensor = tensor_over(&carrier, &col.coring.carrier)?;
    let mut rhs = Vec::new();
    for ((m, c), comod) in mcol.injections.iter().zip(&col.injections).zip(&h.comodules) {
        rhs.push(comod.tensor.map_to(&tensor, m, c, "cocone on the coaction")?.mul(&comod.coaction));
    }
    let hmat = Matrix::hstack(p, carrier.dim(), &mcol.injections.iter().collect::<Vec<_>>());
    let coaction = hmat
        .solve_left(&Matrix::hstack(p, tensor.dim(), &rhs.iter().collect::<Vec<_>>()))
        .ok_or_else(|| Error::WellDefinedness("coaction on the colimit".into()))?;
    Ok((Comodule::new(carrier, Side::Right, &col.coring, coaction)?, mcol.injections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::DirectedPoset;
    use std::collections::BTreeMap;

    fn sweedler() -> Coring {
        let a = Arc::new(FiniteAlgebra::truncated_polynomial(2, 2));
        let b = Arc::new(FiniteAlgebra::field(2));
        let incl = Matrix::from_rows(2, &[vec![1], vec![0]]);
        Coring::sweedler(&a, &b, &incl).unwrap().0
    }

    #[test]
    fn trivial_and_sweedler_pass() {
        let a = Arc::new(FiniteAlgebra::truncated_polynomial(3, 2));
        assert!(Coring::trivial(&a).unwrap().check().all_passed());
        let s = sweedler();
        assert_eq!(s.dim(), 4);
        let rep = s.check();
        assert!(rep.all_passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn zero_counit_fails() {
        let mut s = sweedler();
        s.counit = Matrix::zeros(2, 2, 4);
        let rep = s.check();
        assert_eq!(rep.passed("counit-left"), Some(false));
    }

    #[test]
    fn regular_comodule_and_cotensor() {
        let s = sweedler();
        let c = Comodule::regular(&s);
        assert!(c.check(&s).all_passed());
        // C as a left comodule over itself
        let left = Comodule::new(s.carrier.clone(), Side::Left, &s, s.comult.clone()).unwrap();
        assert!(left.check(&s).all_passed());
        // C □ C ≅ C
        assert_eq!(cotensor(&c, &left, &s).unwrap().dim(), s.dim());
    }

    #[test]
    fn trivial_cotensor_is_whole_tensor() {
        let a = Arc::new(FiniteAlgebra::truncated_polynomial(2, 2));
        let t = Coring::trivial(&a).unwrap();
        let r = Comodule::regular(&t);
        let l = Comodule::new(t.carrier.clone(), Side::Left, &t, t.comult.clone()).unwrap();
        let ct = cotensor(&r, &l, &t).unwrap();
        assert_eq!(ct.dim(), ct.tensor.dim());
    }

    #[test]
    fn constant_system_colimit() {
        let s = sweedler();
        let ids: BTreeMap<_, _> = [((0, 1), Matrix::identity(2, 4))].into_iter().collect();
        let sys = DirectSystem::new(DirectedPoset::chain(2), vec![s.carrier.clone(), s.carrier.clone()], ids, None).unwrap();
        let z = ZCoalgebra {
            system: sys,
            corings: vec![s.clone(), s.clone()],
        };
        let col = colimit_coring(&z).unwrap();
        assert_eq!(col.coring.comult, s.comult);
        assert!(col.coring.check().all_passed());
        let oracle = colimit_coring_oracle(&z).unwrap();
        assert_eq!(oracle.coring.dim(), 4);
        assert!(oracle.coring.check().all_passed());
    }
}
