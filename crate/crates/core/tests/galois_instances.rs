use coringlab_core::comatrix::build_context;
use coringlab_core::galois::{
    build_tdagger, canonical_map, check_tdagger, extended_diagram, galois_battery, galois_equivalence_check,
    kappa_check, non_galois_example, self_family, sweedler_reference,
};
use coringlab_core::instances::{Generator, LazyCorner, DEFAULT_BUDGET};
use coringlab_core::par::Exec;
use coringlab_core::Error;

fn failures(r: &coringlab_core::report::Report) -> Vec<String> {
    r.failures().map(|c| format!("{}: {}", c.id, c.counterexample.clone().unwrap_or_default())).collect()
}

#[test]
fn builtins_are_galois_over_their_own_comatrix_coring() {
    for g in [Generator::Sweedler, Generator::Block, Generator::Corner(3), Generator::KgtDirectSum(vec![1, 2])] {
        let sys = g.build(2, DEFAULT_BUDGET).unwrap();
        let cm = build_context(&sys).unwrap();
        let (gal, r) = galois_battery(&sys, &cm).unwrap();
        assert!(r.all_passed(), "{g}: {:?}", failures(&r));
        assert!(gal.is_galois(), "{g}");
    }
}

#[test]
fn tdagger_dimensions() {
    // (generator, dim T†)
    for (g, d) in [(Generator::Sweedler, 1), (Generator::Block, 5), (Generator::Corner(3), 9)] {
        let sys = g.build(2, DEFAULT_BUDGET).unwrap();
        let cm = build_context(&sys).unwrap();
        let gal = canonical_map(&self_family(&sys, &cm).unwrap()).unwrap();
        let td = build_tdagger(&gal.endo).unwrap();
        assert_eq!(td.algebra.dim(), d, "{g}");
    }
}

#[test]
fn kappa_is_invertible_along_the_lazy_chain() {
    let lazy = LazyCorner::new(2);
    for n in 2..=5 {
        let sys = lazy.truncate(n).unwrap();
        let cm = build_context(&sys).unwrap();
        let gal = canonical_map(&self_family(&sys, &cm).unwrap()).unwrap();
        let td = build_tdagger(&gal.endo).unwrap();
        assert!(check_tdagger(&gal.endo, &td).all_passed(), "level {n}");
        let (k, r) = kappa_check(&gal.endo, &td).unwrap();
        assert!(r.all_passed(), "level {n}: {:?}", failures(&r));
        assert_eq!(k.kappa.rank(), k.kappa.rows());
        let ext = extended_diagram(&gal.endo, &gal.comatrix).unwrap();
        assert!(ext.all_passed(), "level {n}: {:?}", failures(&ext));
    }
}

#[test]
fn sweedler_reference_matches_alignment() {
    for p in [2, 3, 5] {
        let r = sweedler_reference(p).unwrap();
        let g = canonical_map(&r.family).unwrap();
        assert!(g.check().all_passed(), "p = {p}");
        assert_eq!(g.can, (r.alignment)(&g.comatrix).unwrap());
    }
}

#[test]
fn non_galois_instance() {
    let g = canonical_map(&non_galois_example(2).unwrap()).unwrap();
    assert!(!g.is_galois());
    let r = g.check();
    assert_eq!(r.passed("galois"), Some(false));
    assert_eq!(r.passed("can-cocone"), Some(true));
    assert!(matches!(galois_equivalence_check(&g, 3, Exec::Sequential), Err(Error::Precondition(_))));
}

#[test]
fn galois_descent_includes_transported_comodule() {
    let sys = Generator::Corner(3).build(2, DEFAULT_BUDGET).unwrap();
    let cm = build_context(&sys).unwrap();
    let g = canonical_map(&self_family(&sys, &cm).unwrap()).unwrap();
    let d = galois_equivalence_check(&g, 5, Exec::Sequential).unwrap();
    assert!(d.report.all_passed(), "{:?}", failures(&d.report));
    assert!(d.faithfully_flat);
}
