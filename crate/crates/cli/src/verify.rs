//! Runs verification suites over an instance and assembles the report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Result};
use coringlab_core::comatrix::{build_context, Comatrix, FirmBimoduleSystem};
use coringlab_core::descent::{check_comodule_adjunction, check_module_adjunction, descent_check, test_sets};
use coringlab_core::galois::{galois_battery, galois_equivalence_check};
use coringlab_core::instances::{Generator, DEFAULT_BUDGET};
use coringlab_core::par::{self, Exec};
use coringlab_core::report::{Check, Report, Status};
use coringlab_core::system::{DirectSystem, SystemObject};
use coringlab_core::Error;
use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Mutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Systems,
    Comatrix,
    Coring,
    Adjunction,
    Descent,
    Galois,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Systems,
        Suite::Comatrix,
        Suite::Coring,
        Suite::Adjunction,
        Suite::Descent,
        Suite::Galois,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Systems => "systems",
            Suite::Comatrix => "comatrix",
            Suite::Coring => "coring",
            Suite::Adjunction => "adjunction",
            Suite::Descent => "descent",
            Suite::Galois => "galois",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}; expected one of systems, comatrix, coring, adjunction, descent, galois"))
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub level: Option<usize>,
    pub exec: Exec,
    pub budget: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            seed: 0,
            level: None,
            exec: Exec::default(),
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub passed: bool,
    pub identities: usize,
    pub millis: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub instance: String,
    pub prime: u64,
    pub seed: u64,
    pub level: Option<usize>,
    pub suites: Vec<SuiteSummary>,
    pub checks: Vec<Check>,
    pub dimensions: BTreeMap<String, usize>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn suite_passed(&self, suite: Suite) -> Option<bool> {
        self.suites.iter().find(|s| s.suite == suite).map(|s| s.passed)
    }

    pub fn check(&self, suite: Suite, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.suite == suite.name() && c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

/// What one suite produced.
struct Outcome {
    report: Report,
    notes: Vec<String>,
}

impl Outcome {
    fn of(report: Report) -> Self {
        Self { report, notes: Vec::new() }
    }

    fn error(id: &str, e: impl fmt::Display) -> Self {
        let mut report = Report::new();
        report.fail(id, e.to_string());
        Self::of(report)
    }
}

fn load(inst: &Instance, opts: &Options) -> Result<FirmBimoduleSystem> {
    let mut sys = match opts.level {
        None => inst.to_system()?,
        Some(n) => match inst.generator()? {
            Some(Generator::LazyCorner(_)) => Generator::LazyCorner(n).build(inst.prime, opts.budget)?,
            _ => bail!("--level applies to lazy-corner instances only"),
        },
    };
    inst.apply_structural(&mut sys)?;
    Ok(sys)
}

fn context(sys: &FirmBimoduleSystem, inst: &Instance) -> Result<Comatrix, Error> {
    let mut cm = build_context(sys)?;
    for m in &inst.mutations {
        match m {
            Mutation::ScaleCounit { factor } => {
                cm.context.eps = cm.context.eps.scale(*factor);
                cm.comatrix.coring.counit = cm.comatrix.coring.counit.scale(*factor);
            }
            Mutation::ScaleUnit { factor } => cm.context.eta = cm.context.eta.scale(*factor),
            _ => {}
        }
    }
    Ok(cm)
}

fn colimit_retractions<T: SystemObject>(sys: &DirectSystem<T>) -> Report {
    let run = || -> Result<Report, Error> {
        let col = sys.colimit()?;
        let nus = sys.retractions(&col)?;
        Ok(sys.check_retractions(&col, &nus))
    };
    run().unwrap_or_else(|e| {
        let mut r = Report::new();
        r.fail("colimit-retractions", e.to_string());
        r
    })
}

fn systems(sys: &FirmBimoduleSystem) -> Outcome {
    let mut r = Report::new();
    r.record("base-algebra", sys.base.check().map_err(|e| e.to_string()));
    for (i, a) in sys.rings.objects().iter().enumerate() {
        let at = sys.poset().label(i);
        r.record("ring-algebras", a.check().map_err(|e| format!("at ({at}): {e}")));
    }
    for (i, m) in sys.modules.objects().iter().enumerate() {
        let at = sys.poset().label(i);
        r.record("bimodule-axioms", m.check().map_err(|e| format!("at ({at}): {e}")));
    }
    r.merge_scoped("rings", sys.rings.check());
    r.merge_scoped("modules", sys.modules.check());
    r.merge_scoped("rings", colimit_retractions(&sys.rings));
    r.merge_scoped("modules", colimit_retractions(&sys.modules));
    r.merge(sys.check_compat());
    Outcome::of(r)
}

fn comatrix(sys: &FirmBimoduleSystem, cm: &Comatrix) -> Outcome {
    let mut r = cm.check(sys);
    r.merge(cm.context.check());
    r.dimension("B", cm.limits.b.dim());
    r.dimension("A", sys.base.dim());
    r.dimension("P", cm.limits.p.dim());
    r.dimension("P†", cm.pdagger.dim());
    r.dimension("P† ⊗_B P", cm.comatrix.coring.dim());
    r.dimension("P ⊗_A P†", cm.ring.dim());
    Outcome::of(r)
}

fn coring(cm: &Comatrix) -> Outcome {
    let mut r = cm.comatrix.coring.check();
    r.merge_scoped("levels", cm.g.z.check());
    match cm.context.coring() {
        Ok(c) => {
            r.merge_scoped("context", c.check());
            match cm.context.comodule_structures(&c) {
                Ok((right, left)) => {
                    r.merge_scoped("comodule-p", right.check(&c));
                    r.merge_scoped("comodule-pdagger", left.check(&c));
                }
                Err(e) => r.fail("comodule-structures", e.to_string()),
            }
        }
        Err(e) => r.fail("context/construction", e.to_string()),
    }
    Outcome::of(r)
}

fn adjunction(cm: &Comatrix, seed: u64, exec: Exec) -> Outcome {
    let ctx = &cm.context;
    let run = || -> Result<Report, Error> {
        let d = ctx.coring()?;
        let tests = test_sets(ctx, &d, seed)?;
        let mut r = check_module_adjunction(ctx, &tests.right_b, &tests.right_a, exec);
        r.merge(check_comodule_adjunction(ctx, &d, &tests.right_b, &tests.comodules, exec));
        Ok(r)
    };
    run().map_or_else(|e| Outcome::error("construction", e), Outcome::of)
}

fn descent(cm: &Comatrix, seed: u64, exec: Exec) -> Outcome {
    let ctx = &cm.context;
    let run = || -> Result<Outcome, Error> {
        let d = ctx.coring()?;
        let tests = test_sets(ctx, &d, seed)?;
        let out = match descent_check(ctx, &d, &tests, exec) {
            Ok(out) => out,
            Err(Error::Precondition(msg)) => return Ok(Outcome::error("flatness", msg)),
            Err(e) => return Err(e),
        };
        let mut notes = Vec::new();
        if let Some((name, v)) = out.kernel_witness {
            notes.push(format!("unit on {name} kills {v:?}"));
        }
        Ok(Outcome { report: out.report, notes })
    };
    run().unwrap_or_else(|e| Outcome::error("construction", e))
}

fn galois(sys: &FirmBimoduleSystem, cm: &Comatrix, seed: u64, exec: Exec) -> Outcome {
    let (g, mut r) = match galois_battery(sys, cm) {
        Ok(x) => x,
        Err(e) => return Outcome::error("construction", e),
    };
    let mut notes = Vec::new();
    match galois_equivalence_check(&g, seed, exec) {
        Ok(d) => r.merge_scoped("equivalence", d.report),
        Err(Error::Precondition(msg)) => notes.push(format!("equivalence not checked: {msg}")),
        Err(e) => r.fail("equivalence/construction", e.to_string()),
    }
    Outcome { report: r, notes }
}

pub fn verify(inst: &Instance, opts: &Options) -> VerificationReport {
    let name = match inst.generator() {
        Ok(Some(g)) => match opts.level {
            Some(n) => format!("{} at level {n}", g.name()),
            None => g.to_string(),
        },
        _ => "custom".to_string(),
    };
    let mut suites: Vec<Suite> = opts.suites.clone();
    suites.sort();
    suites.dedup();
    let loaded = load(inst, opts);
    let cm = loaded.as_ref().ok().map(|sys| context(sys, inst));
    let outcomes = par::map(opts.exec, &suites, |&suite| {
        let start = Instant::now();
        let out = match (&loaded, &cm, suite) {
            (Err(e), _, Suite::Systems) => Outcome::error("instance-load", format!("{e:#}")),
            (Err(_), _, _) => Outcome::error("construction", "instance did not load"),
            (Ok(sys), _, Suite::Systems) => systems(sys),
            (Ok(_), Some(Err(e)), _) => Outcome::error("construction", e),
            (Ok(sys), Some(Ok(cm)), s) => match s {
                Suite::Comatrix => comatrix(sys, cm),
                Suite::Coring => coring(cm),
                Suite::Adjunction => adjunction(cm, opts.seed, opts.exec),
                Suite::Descent => descent(cm, opts.seed, opts.exec),
                Suite::Galois => galois(sys, cm, opts.seed, opts.exec),
                Suite::Systems => unreachable!(),
            },
            (Ok(_), None, _) => unreachable!(),
        };
        (out, start.elapsed().as_secs_f64() * 1e3)
    });
    let mut report = VerificationReport {
        instance: name,
        prime: inst.prime,
        seed: opts.seed,
        level: opts.level,
        suites: Vec::new(),
        checks: Vec::new(),
        dimensions: BTreeMap::new(),
        notes: Vec::new(),
    };
    for (suite, (out, millis)) in suites.into_iter().zip(outcomes) {
        let r = out.report.with_suite(suite.name());
        report.suites.push(SuiteSummary {
            suite,
            passed: r.all_passed(),
            identities: r.checks.len(),
            millis,
        });
        report.checks.extend(r.checks);
        for (k, v) in r.dimensions {
            report.dimensions.insert(format!("{suite}/{k}"), v);
        }
        report.notes.extend(out.notes.into_iter().map(|n| format!("{suite}: {n}")));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn level_needs_a_lazy_instance() {
        let sys = Generator::Corner(2).build(2, DEFAULT_BUDGET).unwrap();
        let inst = Instance::from_system(&sys, Some(&Generator::Corner(2)));
        let opts = Options {
            level: Some(3),
            suites: vec![Suite::Systems],
            ..Options::default()
        };
        let r = verify(&inst, &opts);
        assert!(!r.all_passed());
        assert!(r.check(Suite::Systems, "instance-load").is_some());
    }
}
