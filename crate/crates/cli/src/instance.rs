//! Canonical TOML instance files: a materialized firm bimodule system plus
//! the generator call that produced it and optional mutations.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use coringlab_core::algebra::{FiniteAlgebra, IdempotentFamily};
use coringlab_core::bimodule::Bimodule;
use coringlab_core::comatrix::FirmBimoduleSystem;
use coringlab_core::instances::Generator;
use coringlab_core::linalg::Matrix;
use coringlab_core::poset::DirectedPoset;
use coringlab_core::system::DirectSystem;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "coringlab-instance/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub rows: usize,
    pub cols: usize,
    /// Row-major residues.
    pub entries: Vec<u64>,
}

impl MatrixSpec {
    pub fn of(m: &Matrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().to_vec(),
        }
    }

    pub fn to_matrix(&self, p: u64, what: &str) -> Result<Matrix> {
        ensure!(
            self.entries.len() == self.rows * self.cols,
            "{what}: {} entries for a {}x{} matrix",
            self.entries.len(),
            self.rows,
            self.cols
        );
        ensure!(self.entries.iter().all(|&v| v < p), "{what}: entries must be residues mod {p}");
        let signed: Vec<i64> = self.entries.iter().map(|&v| v as i64).collect();
        Ok(Matrix::from_entries(p, self.rows, self.cols, &signed))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub labels: Vec<String>,
    pub elements: Vec<Vec<u64>>,
    pub orthogonal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub dim: usize,
    /// `table[(i * dim + j) * dim + k]` is the `b_k` coefficient of `b_i b_j`.
    pub table: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
}

impl AlgebraSpec {
    pub fn of(a: &FiniteAlgebra) -> Self {
        Self {
            dim: a.dim(),
            table: a.table().to_vec(),
            unit: a.unit().map(<[u64]>::to_vec),
            family: a.family().map(|f| FamilySpec {
                labels: f.labels.clone(),
                elements: f.elements.clone(),
                orthogonal: f.orthogonal,
            }),
        }
    }

    pub fn to_algebra(&self, p: u64, what: &str) -> Result<FiniteAlgebra> {
        ensure!(self.table.len() == self.dim.pow(3), "{what}: structure table needs dim^3 entries");
        ensure!(self.table.iter().all(|&v| v < p), "{what}: entries must be residues mod {p}");
        let a = FiniteAlgebra::from_table(p, self.dim, self.table.clone(), self.unit.clone());
        Ok(match &self.family {
            Some(f) => a.with_family(IdempotentFamily {
                labels: f.labels.clone(),
                elements: f.elements.clone(),
                orthogonal: f.orthogonal,
            }),
            None => a,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub dim: usize,
    pub left: Vec<MatrixSpec>,
    pub right: Vec<MatrixSpec>,
}

/// The maps attached to an order pair `source <= target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub source: String,
    pub target: String,
    pub forward: MatrixSpec,
    pub backward: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub params: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Rings,
    Modules,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mutation {
    ZeroTransition { layer: Layer, source: String, target: String },
    ZeroRetraction { layer: Layer, source: String, target: String },
    ScaleCounit { factor: u64 },
    ScaleUnit { factor: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub format: String,
    pub prime: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    pub base: AlgebraSpec,
    pub labels: Vec<String>,
    /// Strict order pairs `[lower, upper]` by label index.
    pub order: Vec<[usize; 2]>,
    pub rings: Vec<AlgebraSpec>,
    pub modules: Vec<ModuleSpec>,
    pub ring_maps: Vec<PairSpec>,
    pub module_maps: Vec<PairSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mutations: Vec<Mutation>,
}

type PairMaps = BTreeMap<(usize, usize), Matrix>;

fn pairs<T: coringlab_core::system::SystemObject>(sys: &DirectSystem<T>) -> Vec<PairSpec> {
    let poset = sys.poset();
    poset
        .comparable_pairs()
        .into_iter()
        .filter(|(i, j)| i != j)
        .map(|(i, j)| PairSpec {
            source: poset.label(i).to_string(),
            target: poset.label(j).to_string(),
            forward: MatrixSpec::of(sys.transition(i, j)),
            backward: MatrixSpec::of(sys.retraction(i, j).expect("split system")),
        })
        .collect()
}

impl Instance {
    pub fn from_system(sys: &FirmBimoduleSystem, generator: Option<&Generator>) -> Self {
        let poset = sys.poset();
        let n = poset.len();
        let order = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| i != j).map(move |j| [i, j]))
            .filter(|&[i, j]| poset.leq(i, j))
            .collect();
        Self {
            format: FORMAT.to_string(),
            prime: sys.prime(),
            generator: generator.map(|g| GeneratorSpec {
                name: g.name().to_string(),
                params: g.params(),
            }),
            base: AlgebraSpec::of(&sys.base),
            labels: poset.labels().to_vec(),
            order,
            rings: sys.rings.objects().iter().map(|a| AlgebraSpec::of(a)).collect(),
            modules: sys
                .modules
                .objects()
                .iter()
                .map(|m| ModuleSpec {
                    dim: m.dim(),
                    left: m.left_actions().iter().map(MatrixSpec::of).collect(),
                    right: m.right_actions().iter().map(MatrixSpec::of).collect(),
                })
                .collect(),
            ring_maps: pairs(&sys.rings),
            module_maps: pairs(&sys.modules),
            mutations: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let inst: Instance = toml::from_str(text).context("malformed instance file")?;
        ensure!(inst.format == FORMAT, "unsupported format {:?}", inst.format);
        ensure!(coringlab_core::linalg::is_prime(inst.prime), "{} is not prime", inst.prime);
        Ok(inst)
    }

    /// Keys sorted, matrices row-major.
    pub fn serialize(&self) -> Result<String> {
        let value = toml::Value::try_from(self)?;
        Ok(toml::to_string(&value)?)
    }

    pub fn generator(&self) -> Result<Option<Generator>> {
        self.generator
            .as_ref()
            .map(|g| Generator::parse(&g.name, &g.params).map_err(Into::into))
            .transpose()
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .with_context(|| format!("unknown index label {label:?}"))
    }

    fn maps(&self, specs: &[PairSpec], layer: &str) -> Result<(PairMaps, PairMaps)> {
        let (mut fwd, mut back) = (BTreeMap::new(), BTreeMap::new());
        for s in specs {
            let (i, j) = (self.label_index(&s.source)?, self.label_index(&s.target)?);
            let at = format!("{layer} ({}, {})", s.source, s.target);
            fwd.insert((i, j), s.forward.to_matrix(self.prime, &format!("{at} forward"))?);
            back.insert((i, j), s.backward.to_matrix(self.prime, &format!("{at} backward"))?);
        }
        Ok((fwd, back))
    }

    pub fn to_system(&self) -> Result<FirmBimoduleSystem> {
        let p = self.prime;
        let n = self.labels.len();
        ensure!(self.rings.len() == n, "one ring per index label");
        ensure!(self.modules.len() == n, "one module per index label");
        let pairs: Vec<(usize, usize)> = self.order.iter().map(|&[i, j]| (i, j)).collect();
        let poset = DirectedPoset::from_pairs(self.labels.clone(), &pairs)?;
        let base = Arc::new(self.base.to_algebra(p, "base")?);
        let rings = self
            .rings
            .iter()
            .zip(&self.labels)
            .map(|(r, l)| r.to_algebra(p, &format!("ring {l}")).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let modules = self
            .modules
            .iter()
            .zip(&rings)
            .zip(&self.labels)
            .map(|((m, r), l)| {
                let what = format!("module {l}");
                let left = m.left.iter().map(|x| x.to_matrix(p, &what)).collect::<Result<Vec<_>>>()?;
                let right = m.right.iter().map(|x| x.to_matrix(p, &what)).collect::<Result<Vec<_>>>()?;
                Bimodule::new(r.clone(), base.clone(), m.dim, left, right).with_context(|| what.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let (rf, rb) = self.maps(&self.ring_maps, "ring map")?;
        let (mf, mb) = self.maps(&self.module_maps, "module map")?;
        let rings = DirectSystem::new(poset.clone(), rings, rf, Some(rb))?;
        let modules = DirectSystem::new(poset, modules, mf, Some(mb))?;
        Ok(FirmBimoduleSystem::new(base, rings, modules)?)
    }

    /// Structural mutations; the context-level ones are applied by the verifier.
    pub fn apply_structural(&self, sys: &mut FirmBimoduleSystem) -> Result<()> {
        for m in &self.mutations {
            match m {
                Mutation::ZeroTransition { layer, source, target } | Mutation::ZeroRetraction { layer, source, target } => {
                    let (i, j) = (self.label_index(source)?, self.label_index(target)?);
                    if i == j || !sys.poset().leq(i, j) {
                        bail!("({source}, {target}) is not a strict order pair");
                    }
                    let forward = matches!(m, Mutation::ZeroTransition { .. });
                    let shape = match layer {
                        Layer::Rings => sys.rings.transition(i, j).shape(),
                        Layer::Modules => sys.modules.transition(i, j).shape(),
                    };
                    let zero = if forward {
                        Matrix::zeros(sys.prime(), shape.0, shape.1)
                    } else {
                        Matrix::zeros(sys.prime(), shape.1, shape.0)
                    };
                    match (layer, forward) {
                        (Layer::Rings, true) => sys.rings.set_transition(i, j, zero),
                        (Layer::Rings, false) => sys.rings.set_retraction(i, j, zero),
                        (Layer::Modules, true) => sys.modules.set_transition(i, j, zero),
                        (Layer::Modules, false) => sys.modules.set_retraction(i, j, zero),
                    }
                }
                Mutation::ScaleCounit { .. } | Mutation::ScaleUnit { .. } => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use coringlab_core::instances::DEFAULT_BUDGET;

    #[test]
    fn round_trip_is_byte_identical() {
        for g in [Generator::Sweedler, Generator::Block, Generator::Corner(3), Generator::KgtDirectSum(vec![2, 1])] {
            let sys = g.build(2, DEFAULT_BUDGET).unwrap();
            let text = Instance::from_system(&sys, Some(&g)).serialize().unwrap();
            let again = Instance::parse(&text).unwrap().serialize().unwrap();
            assert_eq!(text, again, "{g}");
        }
    }

    #[test]
    fn reloaded_system_matches() {
        let g = Generator::Block;
        let sys = g.build(3, DEFAULT_BUDGET).unwrap();
        let inst = Instance::from_system(&sys, Some(&g));
        let back = inst.to_system().unwrap();
        assert_eq!(Instance::from_system(&back, Some(&g)), inst);
        assert_eq!(inst.generator().unwrap(), Some(g));
    }

    #[test]
    fn keys_are_sorted_within_each_table() {
        let sys = Generator::Block.build(2, DEFAULT_BUDGET).unwrap();
        let text = Instance::from_system(&sys, Some(&Generator::Block)).serialize().unwrap();
        for section in text.split("\n\n") {
            let keys: Vec<&str> = section
                .lines()
                .filter(|l| !l.starts_with('[') && l.contains(" = "))
                .map(|l| l.split(" = ").next().unwrap())
                .collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
        }
    }

    #[test]
    fn rejects_non_residues() {
        let sys = Generator::Sweedler.build(2, DEFAULT_BUDGET).unwrap();
        let mut inst = Instance::from_system(&sys, None);
        inst.modules[0].right[0].entries[0] = 7;
        assert!(inst.to_system().is_err());
    }
}
