//! Acceptance criteria, one verdict line each. Exits non-zero if any criterion fails.

use std::time::Instant;

use coringlab::instance::{Layer, Mutation};
use coringlab::{verify, Instance, Options, Suite, VerificationReport};
use coringlab_core::comatrix::build_context;
use coringlab_core::galois::{build_tdagger, canonical_map, kappa_check, self_family, sweedler_reference};
use coringlab_core::instances::{Generator, LazyCorner, DEFAULT_BUDGET};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn builtins() -> Vec<Generator> {
    vec![Generator::Sweedler, Generator::Block, Generator::Corner(3)]
}

fn all_instances() -> Vec<Generator> {
    vec![
        Generator::Sweedler,
        Generator::Block,
        Generator::Corner(3),
        Generator::LazyCorner(3),
        Generator::KgtDirectSum(vec![1, 2]),
        Generator::Degenerate,
    ]
}

fn instance(g: &Generator, p: u64) -> Instance {
    let sys = g.build(p, DEFAULT_BUDGET).expect("built-in instance");
    Instance::from_system(&sys, Some(g))
}

fn run(inst: &Instance, suites: &[Suite], seed: u64) -> VerificationReport {
    verify(
        inst,
        &Options {
            suites: suites.to_vec(),
            seed,
            ..Options::default()
        },
    )
}

fn first_failure(r: &VerificationReport) -> String {
    r.failures()
        .next()
        .map(|c| format!("{}/{}: {}", c.suite, c.id, c.counterexample.as_deref().unwrap_or("")))
        .unwrap_or_default()
}

fn coring_axioms() -> Verdict {
    let mut times = Vec::new();
    for g in builtins() {
        let sys = g.build(2, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let cm = build_context(&sys).map_err(|e| format!("{g}: {e}"))?;
        let r = cm.comatrix.coring.check();
        let secs = start.elapsed().as_secs_f64();
        for id in ["coassociativity", "counit-left", "counit-right"] {
            if r.passed(id) != Some(true) {
                return Err(format!("{g}: {id} does not hold"));
            }
        }
        if !r.all_passed() {
            return Err(format!("{g}: {:?}", r.failures().next()));
        }
        if secs >= 1.0 {
            return Err(format!("{g}: took {secs:.2} s"));
        }
        times.push(format!("{g} {:.1} ms", secs * 1e3));
    }
    Ok(times.join(", "))
}

fn identity_battery() -> Verdict {
    const IDS: [(Suite, &str); 16] = [
        (Suite::Systems, "rings/retraction-left-inverse"),
        (Suite::Systems, "modules/retraction-left-inverse"),
        (Suite::Systems, "modules/colimit-retractions"),
        (Suite::Systems, "modules/colimit-retraction-compat"),
        (Suite::Systems, "action-compat"),
        (Suite::Systems, "dual-basis"),
        (Suite::Systems, "corner-idempotent-action"),
        (Suite::Systems, "dual-idempotent-action"),
        (Suite::Systems, "inclusion-linearity"),
        (Suite::Systems, "truncation-linearity"),
        (Suite::Systems, "dual-action-transport"),
        (Suite::Systems, "dual-extension-linearity"),
        (Suite::Comatrix, "dual-action"),
        (Suite::Systems, "dual-basis-balanced"),
        (Suite::Comatrix, "context-left-law"),
        (Suite::Comatrix, "context-right-law"),
    ];
    let start = Instant::now();
    let mut count = 0;
    for g in builtins() {
        let r = run(&instance(&g, 2), &[Suite::Systems, Suite::Comatrix], 0);
        for (suite, id) in IDS {
            match r.check(suite, id) {
                None => return Err(format!("{g}: {suite}/{id} was not checked")),
                Some(c) if !c.passed() => return Err(format!("{g}: {suite}/{id}: {:?}", c.counterexample)),
                _ => {}
            }
        }
        if !r.all_passed() {
            return Err(format!("{g}: {}", first_failure(&r)));
        }
        count += r.checks.len();
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 5.0 {
        return Err(format!("took {secs:.2} s"));
    }
    Ok(format!("{count} identities in {:.0} ms", secs * 1e3))
}

fn oracle_equivalence() -> Verdict {
    for g in all_instances() {
        let r = run(&instance(&g, 2), &[Suite::Comatrix], 0);
        for id in ["colimit-oracle", "colimit-apex", "cocone-coring-morphisms"] {
            if r.check(Suite::Comatrix, id).map(|c| c.passed()) != Some(true) {
                return Err(format!("{g}: {id}: {}", first_failure(&r)));
            }
        }
    }
    Ok(format!("{} instances", all_instances().len()))
}

fn dimension_facts() -> Verdict {
    let expected = [(Generator::Sweedler, 4, 1), (Generator::Block, 2, 5), (Generator::Corner(3), 1, 9)];
    let mut seen = Vec::new();
    let mut wrong = Vec::new();
    for (g, d, s) in expected {
        let cm = build_context(&g.build(2, DEFAULT_BUDGET).unwrap()).map_err(|e| e.to_string())?;
        let (got_d, got_s) = (cm.comatrix.coring.dim(), cm.ring.dim());
        seen.push(format!("{g}: D {got_d}, S {got_s}"));
        if got_d != d {
            wrong.push(format!("{g}: dim P† ⊗_B P = {got_d}, expected {d}"));
        }
        if got_s != s {
            wrong.push(format!("{g}: dim P ⊗_A P† = {got_s}, expected {s}"));
        }
    }
    if wrong.is_empty() {
        Ok(seen.join("; "))
    } else {
        Err(wrong.join("; "))
    }
}

fn kappa_isomorphism() -> Verdict {
    let kappa_ok = |sys: &coringlab_core::comatrix::FirmBimoduleSystem, what: &str| -> Result<(usize, usize), String> {
        let cm = build_context(sys).map_err(|e| format!("{what}: {e}"))?;
        let g = canonical_map(&self_family(sys, &cm).map_err(|e| format!("{what}: {e}"))?).map_err(|e| format!("{what}: {e}"))?;
        let td = build_tdagger(&g.endo).map_err(|e| format!("{what}: {e}"))?;
        let (k, r) = kappa_check(&g.endo, &td).map_err(|e| format!("{what}: {e}"))?;
        if !r.all_passed() {
            return Err(format!("{what}: {:?}", r.failures().next()));
        }
        Ok((td.algebra.dim(), k.kappa.rows()))
    };
    for g in all_instances() {
        kappa_ok(&g.build(2, DEFAULT_BUDGET).unwrap(), &g.to_string())?;
    }
    let lazy = LazyCorner::new(2);
    let mut levels = Vec::new();
    let mut prev: Option<coringlab_core::comatrix::FirmBimoduleSystem> = None;
    for n in 2..=5 {
        let sys = lazy.truncate(n).map_err(|e| e.to_string())?;
        let (t, x) = kappa_ok(&sys, &format!("level {n}"))?;
        if t != n * n {
            return Err(format!("level {n}: dim T† = {t}"));
        }
        if let Some(lower) = &prev {
            for (i, j) in lower.poset().comparable_pairs() {
                if lower.modules.transition(i, j) != sys.modules.transition(i, j)
                    || lower.rings.transition(i, j) != sys.rings.transition(i, j)
                {
                    return Err(format!("level {} does not embed in level {n} at ({i}, {j})", n - 1));
                }
            }
        }
        levels.push(format!("{n}: T† {t}, P† ⊗ P {x}"));
        prev = Some(sys);
    }
    Ok(format!("κ λ = 1 and λ κ = 1; lazy levels {}", levels.join(", ")))
}

fn adjunction_triangles() -> Verdict {
    for g in all_instances() {
        for seed in [0, 1, 17] {
            let inst = instance(&g, 2);
            let a = run(&inst, &[Suite::Adjunction], seed);
            if !a.all_passed() {
                return Err(format!("{g}, seed {seed}: {}", first_failure(&a)));
            }
            for id in ["triangle-tensor-p", "triangle-tensor-pdagger", "triangle-k", "triangle-r"] {
                if a.check(Suite::Adjunction, id).is_none() {
                    return Err(format!("{g}: {id} was not checked"));
                }
            }
            if run(&inst, &[Suite::Adjunction], seed).checks != a.checks {
                return Err(format!("{g}, seed {seed}: report differs between runs"));
            }
        }
    }
    Ok("all instances, seeds 0, 1, 17".into())
}

fn descent_shape() -> Verdict {
    for g in all_instances() {
        let r = run(&instance(&g, 2), &[Suite::Descent], 3);
        let ff = r.dimensions.get("descent/faithfully-flat") == Some(&1);
        let passed = |id: &str| r.check(Suite::Descent, id).map(|c| c.passed());
        if !r.all_passed() {
            return Err(format!("{g}: {}", first_failure(&r)));
        }
        if passed("counit-iso") != Some(true) {
            return Err(format!("{g}: counits not checked"));
        }
        match (ff, g == Generator::Degenerate) {
            (true, false) if passed("unit-iso") == Some(true) => {}
            (false, true) if passed("unit-defect-exhibited") == Some(true) && r.notes.iter().any(|n| n.contains("kills")) => {}
            _ => return Err(format!("{g}: faithfully flat = {ff} does not match the unit behaviour")),
        }
    }
    let r = run(&instance(&Generator::Degenerate, 2), &[Suite::Descent], 3);
    Ok(format!("degenerate variant: {}", r.notes.join("; ")))
}

fn galois_self_consistency() -> Verdict {
    for g in all_instances() {
        let r = run(&instance(&g, 2), &[Suite::Galois], 5);
        if !r.all_passed() {
            return Err(format!("{g}: {}", first_failure(&r)));
        }
        if r.check(Suite::Galois, "galois").map(|c| c.passed()) != Some(true) {
            return Err(format!("{g}: can not checked"));
        }
        let ff = r.dimensions.get("galois/equivalence/faithfully-flat") == Some(&1);
        if ff && r.check(Suite::Galois, "equivalence/comparison-iso").is_none() {
            return Err(format!("{g}: equivalence not checked"));
        }
    }
    for p in [2, 3] {
        let sw = sweedler_reference(p).map_err(|e| e.to_string())?;
        let g = canonical_map(&sw.family).map_err(|e| e.to_string())?;
        if !g.is_galois() || g.can != (sw.alignment)(&g.comatrix).map_err(|e| e.to_string())? {
            return Err(format!("Sweedler coring over F_{p}: can differs from the aligned identity"));
        }
    }
    Ok("self-Galois on all instances; Sweedler can is the aligned identity".into())
}

fn mutation_sensitivity() -> Verdict {
    let located = |r: &VerificationReport| r.failures().any(|c| c.counterexample.as_deref().is_some_and(|s| s.contains("at (") || s.contains("basis")));
    let mut count = 0;
    for g in all_instances() {
        let base = instance(&g, 2);
        let sys = base.to_system().unwrap();
        for (i, j) in sys.poset().comparable_pairs().into_iter().filter(|(i, j)| i != j) {
            for layer in [Layer::Rings, Layer::Modules] {
                let mut inst = base.clone();
                inst.mutations.push(Mutation::ZeroTransition {
                    layer,
                    source: base.labels[i].clone(),
                    target: base.labels[j].clone(),
                });
                let r = run(&inst, &Suite::ALL, 0);
                if r.all_passed() || !located(&r) {
                    return Err(format!("{g}: zeroed {layer:?} transition ({}, {}) went unnoticed", base.labels[i], base.labels[j]));
                }
                count += 1;
            }
        }
        let mut inst = instance(&g, 3);
        inst.mutations.push(Mutation::ScaleCounit { factor: 2 });
        let r = run(&inst, &Suite::ALL, 0);
        if r.all_passed() || !located(&r) {
            return Err(format!("{g} over F_3: doubled counit went unnoticed"));
        }
        count += 1;
    }
    Ok(format!("{count} mutants, all caught with a located counterexample"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("coring axioms of the comatrix coring", coring_axioms),
        ("identity battery on the built-in instances", identity_battery),
        ("comatrix coring matches the oracle colimit coring", oracle_equivalence),
        ("dimension facts", dimension_facts),
        ("κ is an isomorphism with inverse λ", kappa_isomorphism),
        ("adjunction triangle identities", adjunction_triangles),
        ("descent holds exactly under faithful flatness", descent_shape),
        ("Galois self-consistency", galois_self_consistency),
        ("mutation sensitivity", mutation_sensitivity),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}  [{detail}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}  [{detail}]", k + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
