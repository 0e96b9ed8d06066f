//! Direct systems over finite directed posets, their colimits and canonical retractions.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::algebra::{multiplicativity_defect, FiniteAlgebra, IdempotentFamily};
use crate::bimodule::{factor_through, right_linearity_defect, same_algebra, Bimodule};
use crate::error::{Error, Result};
use crate::linalg::{quotient_space, Matrix, Quotient, Subspace};
use crate::poset::DirectedPoset;
use crate::report::{agree, Report};

/// Objects that can sit at the vertices of a direct system.
pub trait SystemObject: Clone + Send + Sync {
    fn carrier_dim(&self) -> usize;
    fn prime(&self) -> u64;
    /// Structure defect of a transition `src -> tgt`.
    fn forward_defect(src: &Self, tgt: &Self, f: &Matrix) -> Option<String>;
    /// Structure defect of a retraction `tgt -> src`.
    fn backward_defect(src: &Self, tgt: &Self, f: &Matrix) -> Option<String>;
}

impl SystemObject for Arc<FiniteAlgebra> {
    fn carrier_dim(&self) -> usize {
        self.dim()
    }
    fn prime(&self) -> u64 {
        FiniteAlgebra::prime(self)
    }
    fn forward_defect(src: &Self, tgt: &Self, f: &Matrix) -> Option<String> {
        multiplicativity_defect(src, tgt, f)
    }
    fn backward_defect(src: &Self, tgt: &Self, f: &Matrix) -> Option<String> {
        // Retractions of algebras are only required to be linear.
        (f.shape() != (src.dim(), tgt.dim())).then(|| format!("shape {:?}", f.shape()))
    }
}

impl SystemObject for Bimodule {
    fn carrier_dim(&self) -> usize {
        self.dim()
    }
    fn prime(&self) -> u64 {
        Bimodule::prime(self)
    }
    fn forward_defect(src: &Self, tgt: &Self, f: &Matrix) -> Option<String> {
        right_linearity_defect(src, tgt, f)
    }
    fn backward_defect(src: &Self, tgt: &Self, f: &Matrix) -> Option<String> {
        right_linearity_defect(tgt, src, f)
    }
}

/// Transitions `forward[(i, j)]: M_i -> M_j` and, when split, retractions
/// `backward[(i, j)]: M_j -> M_i`, for every `i <= j`.
#[derive(Clone, Debug)]
pub struct DirectSystem<T> {
    poset: DirectedPoset,
    objects: Vec<T>,
    forward: BTreeMap<(usize, usize), Matrix>,
    backward: Option<BTreeMap<(usize, usize), Matrix>>,
    truncated: bool,
}

impl<T: SystemObject> DirectSystem<T> {
    /// Missing comparable pairs are filled in by composing given ones.
    pub fn new(
        poset: DirectedPoset,
        objects: Vec<T>,
        forward: BTreeMap<(usize, usize), Matrix>,
        backward: Option<BTreeMap<(usize, usize), Matrix>>,
    ) -> Result<Self> {
        if objects.len() != poset.len() {
            return Err(Error::DimensionMismatch("one object per poset element".into()));
        }
        let check_shapes = |m: &BTreeMap<(usize, usize), Matrix>, back: bool| -> Result<()> {
            for (&(i, j), f) in m {
                if i >= objects.len() || j >= objects.len() || !poset.leq(i, j) {
                    return Err(Error::Invalid(format!("transition ({i}, {j}) is not an order pair")));
                }
                let (src, tgt) = if back { (j, i) } else { (i, j) };
                let want = (objects[tgt].carrier_dim(), objects[src].carrier_dim());
                if f.shape() != want {
                    return Err(Error::DimensionMismatch(format!(
                        "transition ({}, {}) has shape {:?}, expected {:?}",
                        poset.label(i),
                        poset.label(j),
                        f.shape(),
                        want
                    )));
                }
            }
            Ok(())
        };
        check_shapes(&forward, false)?;
        if let Some(b) = &backward {
            check_shapes(b, true)?;
        }
        let p = objects.first().map_or(2, T::prime);
        let dims: Vec<usize> = objects.iter().map(T::carrier_dim).collect();
        let forward = close(&poset, &dims, p, forward, false)?;
        let backward = backward.map(|b| close(&poset, &dims, p, b, true)).transpose()?;
        Ok(Self {
            poset,
            objects,
            forward,
            backward,
            truncated: false,
        })
    }

    pub fn with_truncation(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn poset(&self) -> &DirectedPoset {
        &self.poset
    }

    pub fn objects(&self) -> &[T] {
        &self.objects
    }

    pub fn object(&self, i: usize) -> &T {
        &self.objects[i]
    }

    pub fn prime(&self) -> u64 {
        self.objects.first().map_or(2, T::prime)
    }

    pub fn is_split(&self) -> bool {
        self.backward.is_some()
    }

    /// `M_i -> M_j` for `i <= j`.
    pub fn transition(&self, i: usize, j: usize) -> &Matrix {
        &self.forward[&(i, j)]
    }

    /// `M_j -> M_i` for `i <= j`.
    pub fn retraction(&self, i: usize, j: usize) -> Option<&Matrix> {
        self.backward.as_ref().map(|b| &b[&(i, j)])
    }

    pub fn transitions(&self) -> &BTreeMap<(usize, usize), Matrix> {
        &self.forward
    }

    pub fn retractions_map(&self) -> Option<&BTreeMap<(usize, usize), Matrix>> {
        self.backward.as_ref()
    }

    /// Replaces one transition without re-closing, for mutation testing.
    pub fn set_transition(&mut self, i: usize, j: usize, f: Matrix) {
        self.forward.insert((i, j), f);
    }

    pub fn set_retraction(&mut self, i: usize, j: usize, f: Matrix) {
        if let Some(b) = &mut self.backward {
            b.insert((i, j), f);
        }
    }

    fn at(&self, idx: &[usize]) -> String {
        let labels: Vec<&str> = idx.iter().map(|&i| self.poset.label(i)).collect();
        format!("at ({})", labels.join(", "))
    }

    /// Exhaustive check of the direct system axioms and, when split, the retraction laws.
    pub fn check(&self) -> Report {
        let mut r = Report::new();
        let n = self.poset.len();
        r.record(
            "directed",
            if self.poset.is_directed() { Ok(()) } else { Err("some pair has no upper bound".into()) },
        );
        let pairs = self.poset.comparable_pairs();
        for i in 0..n {
            r.record(
                "identity-transition",
                if self.transition(i, i).is_identity() {
                    Ok(())
                } else {
                    Err(format!("{}: transition is not the identity", self.at(&[i])))
                },
            );
        }
        for &(i, j) in &pairs {
            let outcome = match T::forward_defect(&self.objects[i], &self.objects[j], self.transition(i, j)) {
                None => Ok(()),
                Some(d) => Err(format!("{}: {d}", self.at(&[i, j]))),
            };
            r.record("transition-structure", outcome);
            for k in 0..n {
                if self.poset.leq(j, k) {
                    let lhs = self.transition(j, k).mul(self.transition(i, j));
                    r.record("functoriality", agree(&lhs, self.transition(i, k), &self.at(&[i, j, k])));
                }
            }
        }
        if self.backward.is_none() {
            return r;
        }
        for i in 0..n {
            let nu = self.retraction(i, i).expect("split");
            r.record(
                "retraction-identity",
                if nu.is_identity() { Ok(()) } else { Err(format!("{}: retraction is not the identity", self.at(&[i]))) },
            );
        }
        for &(i, j) in &pairs {
            let nu = self.retraction(i, j).expect("split");
            let outcome = match T::backward_defect(&self.objects[i], &self.objects[j], nu) {
                None => Ok(()),
                Some(d) => Err(format!("{}: {d}", self.at(&[i, j]))),
            };
            r.record("retraction-structure", outcome);
            let id = Matrix::identity(self.prime(), self.objects[i].carrier_dim());
            r.record(
                "retraction-left-inverse",
                agree(&nu.mul(self.transition(i, j)), &id, &self.at(&[i, j])),
            );
            for k in 0..n {
                if self.poset.leq(j, k) {
                    let lhs = nu.mul(self.retraction(j, k).expect("split"));
                    r.record(
                        "retraction-functoriality",
                        agree(&lhs, self.retraction(i, k).expect("split"), &self.at(&[i, j, k])),
                    );
                }
            }
        }
        r
    }

    /// Colimit at the maximum element.
    pub fn colimit(&self) -> Result<Colimit<T>> {
        let apex = self.poset.max()?;
        let injections = (0..self.poset.len()).map(|i| self.transition(i, apex).clone()).collect();
        Ok(Colimit {
            object: self.objects[apex].clone(),
            apex,
            injections,
            truncated: self.truncated,
        })
    }

    /// `μ_j ∘ μ_ji = μ_i` for all `i <= j`.
    pub fn check_cocone(&self, injections: &[Matrix]) -> std::result::Result<(), String> {
        for (i, j) in self.poset.comparable_pairs() {
            agree(&injections[j].mul(self.transition(i, j)), &injections[i], &self.at(&[i, j]))?;
        }
        Ok(())
    }

    /// The unique `ν_i` with `ν_i ∘ μ_k = ν_il ∘ μ_lk` for any `l >= i, k`.
    pub fn retractions(&self, col: &Colimit<T>) -> Result<Vec<Matrix>> {
        if !self.is_split() {
            return Err(Error::Precondition("retractions need a split system".into()));
        }
        let n = self.poset.len();
        let p = self.prime();
        let dim = col.object.carrier_dim();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut us = Vec::with_capacity(n);
            for k in 0..n {
                let l = self.poset.choose_upper_bound(i, k)?;
                let u = self.retraction(i, l).expect("split").mul(self.transition(k, l));
                let alt = self.retraction(i, col.apex).expect("split").mul(self.transition(k, col.apex));
                if u != alt {
                    return Err(Error::IndependenceFailure {
                        i: self.poset.label(i).to_string(),
                        k: self.poset.label(k).to_string(),
                    });
                }
                us.push(u);
            }
            let h = Matrix::hstack(p, dim, &col.injections.iter().collect::<Vec<_>>());
            let rhs = Matrix::hstack(p, self.objects[i].carrier_dim(), &us.iter().collect::<Vec<_>>());
            let nu = h.solve_left(&rhs).ok_or_else(|| Error::IndependenceFailure {
                i: self.poset.label(i).to_string(),
                k: "the cocone".into(),
            })?;
            out.push(nu);
        }
        Ok(out)
    }

    /// `ν_i ∘ μ_i = id` and `ν_i = ν_ij ∘ ν_j`.
    pub fn check_retractions(&self, col: &Colimit<T>, nus: &[Matrix]) -> Report {
        let mut r = Report::new();
        for (i, nu) in nus.iter().enumerate() {
            let id = Matrix::identity(self.prime(), self.objects[i].carrier_dim());
            r.record("colimit-retractions", agree(&nu.mul(&col.injections[i]), &id, &self.at(&[i])));
        }
        for (i, j) in self.poset.comparable_pairs() {
            let rhs = self.retraction(i, j).expect("split").mul(&nus[j]);
            r.record("colimit-retraction-compat", agree(&nus[i], &rhs, &self.at(&[i, j])));
        }
        r
    }

    /// Disjoint union modulo `x ~ μ_ji(x)`.
    pub fn oracle(&self) -> OracleColimit {
        let dims: Vec<usize> = self.objects.iter().map(T::carrier_dim).collect();
        let morphisms: Vec<(usize, usize, Matrix)> = self
            .poset
            .comparable_pairs()
            .into_iter()
            .filter(|(i, j)| i != j)
            .map(|(i, j)| (i, j, self.transition(i, j).clone()))
            .collect();
        OracleColimit::new(self.prime(), &dims, &morphisms)
    }
}

impl DirectSystem<Bimodule> {
    /// Oracle colimit with induced actions; all objects must share both algebras.
    pub fn oracle_module(&self) -> Result<(Bimodule, OracleColimit)> {
        let first = &self.objects[0];
        if self
            .objects
            .iter()
            .any(|m| !same_algebra(m.left_algebra(), first.left_algebra()) || !same_algebra(m.right_algebra(), first.right_algebra()))
        {
            return Err(Error::Precondition("oracle module colimit needs shared algebras".into()));
        }
        let oc = self.oracle();
        let left = (0..first.left_algebra().dim())
            .map(|k| {
                let blocks: Vec<Matrix> = self.objects.iter().map(|m| m.left_actions()[k].clone()).collect();
                oc.induce(&blocks, "left action on the colimit")
            })
            .collect::<Result<Vec<_>>>()?;
        let right = (0..first.right_algebra().dim())
            .map(|k| {
                let blocks: Vec<Matrix> = self.objects.iter().map(|m| m.right_actions()[k].clone()).collect();
                oc.induce(&blocks, "right action on the colimit")
            })
            .collect::<Result<Vec<_>>>()?;
        let m = Bimodule::new(first.left_algebra().clone(), first.right_algebra().clone(), oc.dim(), left, right)?;
        Ok((m, oc))
    }
}

fn close(
    poset: &DirectedPoset,
    dims: &[usize],
    p: u64,
    mut given: BTreeMap<(usize, usize), Matrix>,
    backward: bool,
) -> Result<BTreeMap<(usize, usize), Matrix>> {
    for (i, &d) in dims.iter().enumerate() {
        given.entry((i, i)).or_insert_with(|| Matrix::identity(p, d));
    }
    let pairs = poset.comparable_pairs();
    loop {
        let mut changed = false;
        for &(i, j) in &pairs {
            if given.contains_key(&(i, j)) {
                continue;
            }
            let via = (0..poset.len()).find(|&k| {
                k != i && k != j && given.contains_key(&(i, k)) && given.contains_key(&(k, j))
            });
            if let Some(k) = via {
                let f = if backward {
                    given[&(i, k)].mul(&given[&(k, j)])
                } else {
                    given[&(k, j)].mul(&given[&(i, k)])
                };
                given.insert((i, j), f);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(&(i, j)) = pairs.iter().find(|pr| !given.contains_key(pr)) {
        return Err(Error::Invalid(format!(
            "no transition given or composable for ({}, {})",
            poset.label(i),
            poset.label(j)
        )));
    }
    Ok(given)
}

#[derive(Clone, Debug)]
pub struct Colimit<T> {
    pub object: T,
    pub apex: usize,
    /// `μ_i: M_i -> M`.
    pub injections: Vec<Matrix>,
    pub truncated: bool,
}

impl<T: SystemObject> Colimit<T> {
    /// The injections jointly span the colimit carrier.
    pub fn jointly_spanning(&self) -> bool {
        let p = self.object.prime();
        let dim = self.object.carrier_dim();
        let vecs: Vec<Vec<u64>> = self.injections.iter().flat_map(|m| m.columns()).collect();
        Subspace::from_vectors(p, dim, &vecs).dim() == dim
    }
}

/// `⊕ X_v` modulo `ι_s x - ι_t f(x)` for each generating morphism `f: X_s -> X_t`.
#[derive(Clone, Debug)]
pub struct OracleColimit {
    pub quotient: Quotient,
    pub offsets: Vec<usize>,
    pub dims: Vec<usize>,
    /// `X_v -> colimit`.
    pub injections: Vec<Matrix>,
}

impl OracleColimit {
    pub fn new(p: u64, dims: &[usize], morphisms: &[(usize, usize, Matrix)]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut total = 0;
        for d in dims {
            offsets.push(total);
            total += d;
        }
        let mut rels = Vec::new();
        for (s, t, f) in morphisms {
            for x in 0..dims[*s] {
                let mut v = vec![0; total];
                v[offsets[*s] + x] = 1;
                let img = f.column(x);
                for (y, c) in img.into_iter().enumerate() {
                    let slot = &mut v[offsets[*t] + y];
                    *slot = crate::linalg::sub(p, *slot, c);
                }
                rels.push(v);
            }
        }
        let quotient = quotient_space(total, &Subspace::from_vectors(p, total, &rels));
        let injections = dims
            .iter()
            .zip(&offsets)
            .map(|(&d, &off)| {
                let mut emb = Matrix::zeros(p, total, d);
                for x in 0..d {
                    emb.set(off + x, x, 1);
                }
                quotient.projection.mul(&emb)
            })
            .collect();
        Self {
            quotient,
            offsets,
            dims: dims.to_vec(),
            injections,
        }
    }

    pub fn dim(&self) -> usize {
        self.quotient.dim
    }

    fn block_diagonal(&self, blocks: &[Matrix]) -> Matrix {
        let p = self.quotient.projection.prime();
        let total: usize = self.dims.iter().sum();
        let rows: usize = blocks.iter().map(Matrix::rows).sum();
        let mut out = Matrix::zeros(p, rows, total);
        let mut roff = 0;
        for (b, &coff) in blocks.iter().zip(&self.offsets) {
            for r in 0..b.rows() {
                for c in 0..b.cols() {
                    out.set(roff + r, coff + c, b.get(r, c));
                }
            }
            roff += b.rows();
        }
        out
    }

    /// The endomorphism of the colimit induced by compatible endomorphisms of the pieces.
    pub fn induce(&self, blocks: &[Matrix], what: &str) -> Result<Matrix> {
        let y = self.quotient.projection.mul(&self.block_diagonal(blocks));
        factor_through(&y, &self.quotient.projection, &self.quotient.section, what)
    }

    /// The unique map out of the colimit with `m ∘ ι_v = targets[v]`.
    pub fn mediating(&self, targets: &[Matrix]) -> Result<Matrix> {
        let p = self.quotient.projection.prime();
        let rows = targets.first().map_or(0, Matrix::rows);
        let lhs = Matrix::hstack(p, self.dim(), &self.injections.iter().collect::<Vec<_>>());
        let rhs = Matrix::hstack(p, rows, &targets.iter().collect::<Vec<_>>());
        lhs.solve_left(&rhs)
            .ok_or_else(|| Error::WellDefinedness("mediating map out of the colimit".into()))
    }
}

/// The colimit algebra with the images of the units `1_{B_i}` as idempotent family.
pub fn local_units_from_colimit(
    sys: &DirectSystem<Arc<FiniteAlgebra>>,
) -> Result<(FiniteAlgebra, Colimit<Arc<FiniteAlgebra>>)> {
    let col = sys.colimit()?;
    let mut elements = Vec::with_capacity(sys.poset().len());
    for (i, b) in sys.objects().iter().enumerate() {
        let u = b
            .unit()
            .ok_or_else(|| Error::Precondition(format!("algebra at {} has no unit", sys.poset().label(i))))?;
        elements.push(col.injections[i].apply(u));
    }
    let family = IdempotentFamily {
        labels: sys.poset().labels().to_vec(),
        elements,
        orthogonal: false,
    };
    let alg = (*col.object).clone().with_family(family);
    Ok((alg, col))
}

/// One level of a lazily generated chain.
#[derive(Clone, Debug)]
pub struct Level<T> {
    pub object: T,
    /// From the previous level; unused at level 1.
    pub up: Matrix,
    /// To the previous level, when split.
    pub down: Option<Matrix>,
}

type Generator<T> = Box<dyn Fn(usize) -> Level<T> + Send + Sync>;

/// A chain `1 < 2 < ...` whose levels are produced on demand and memoized.
pub struct LazyChain<T> {
    generator: Generator<T>,
    memo: Mutex<BTreeMap<usize, Arc<Level<T>>>>,
}

impl<T: SystemObject> LazyChain<T> {
    pub fn new(generator: impl Fn(usize) -> Level<T> + Send + Sync + 'static) -> Self {
        Self {
            generator: Box::new(generator),
            memo: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn level(&self, n: usize) -> Arc<Level<T>> {
        assert!(n >= 1, "levels start at 1");
        if let Some(l) = self.memo.lock().expect("memo lock").get(&n) {
            return l.clone();
        }
        let level = Arc::new((self.generator)(n));
        self.memo.lock().expect("memo lock").entry(n).or_insert(level).clone()
    }

    pub fn generated_levels(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }

    /// The finite system on levels `1..=n`, flagged as truncated.
    pub fn truncate(&self, n: usize) -> Result<DirectSystem<T>> {
        let levels: Vec<Arc<Level<T>>> = (1..=n).map(|k| self.level(k)).collect();
        let objects = levels.iter().map(|l| l.object.clone()).collect();
        let mut fwd = BTreeMap::new();
        let mut back = BTreeMap::new();
        let mut split = true;
        for (k, level) in levels.iter().enumerate().skip(1) {
            fwd.insert((k - 1, k), level.up.clone());
            match &level.down {
                Some(d) => {
                    back.insert((k - 1, k), d.clone());
                }
                None => split = false,
            }
        }
        let sys = DirectSystem::new(DirectedPoset::chain(n), objects, fwd, split.then_some(back))?;
        Ok(sys.with_truncation(true))
    }
}
