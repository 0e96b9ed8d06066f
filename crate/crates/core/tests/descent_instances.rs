use coringlab_core::comatrix::build_context;
use coringlab_core::descent::{check_comodule_adjunction, check_module_adjunction, descent_check, is_faithfully_flat, is_flat, test_sets};
use coringlab_core::instances::{Generator, DEFAULT_BUDGET};
use coringlab_core::par::Exec;

fn failures(r: &coringlab_core::report::Report) -> Vec<String> {
    r.failures().map(|c| format!("{}: {:?}", c.id, c.counterexample)).collect()
}

#[test]
fn adjunctions_and_descent_on_builtins() {
    for g in [Generator::Sweedler, Generator::Block, Generator::Corner(3)] {
        let sys = g.build(2, DEFAULT_BUDGET).unwrap();
        let cm = build_context(&sys).unwrap();
        let ctx = &cm.context;
        let coring = ctx.coring().unwrap();
        let tests = test_sets(ctx, &coring, 11).unwrap();
        let m = check_module_adjunction(ctx, &tests.right_b, &tests.right_a, Exec::Sequential);
        assert!(m.all_passed(), "{g}: {:?}", failures(&m));
        let k = check_comodule_adjunction(ctx, &coring, &tests.right_b, &tests.comodules, Exec::Sequential);
        assert!(k.all_passed(), "{g}: {:?}", failures(&k));
        assert!(is_faithfully_flat(&ctx.p).unwrap(), "{g}");
        let d = descent_check(ctx, &coring, &tests, Exec::Sequential).unwrap();
        assert!(d.faithfully_flat);
        assert!(d.report.all_passed(), "{g}: {:?}", failures(&d.report));
    }
}

#[test]
fn degenerate_variant_is_flat_but_not_faithfully_flat() {
    let sys = Generator::Degenerate.build(2, DEFAULT_BUDGET).unwrap();
    let cm = build_context(&sys).unwrap();
    let ctx = &cm.context;
    assert!(is_flat(&ctx.p).unwrap());
    assert!(!is_faithfully_flat(&ctx.p).unwrap());
    let coring = ctx.coring().unwrap();
    let tests = test_sets(ctx, &coring, 3).unwrap();
    let d = descent_check(ctx, &coring, &tests, Exec::Sequential).unwrap();
    assert!(!d.faithfully_flat);
    assert!(d.report.all_passed(), "{:?}", failures(&d.report));
    let (name, v) = d.kernel_witness.expect("a unit with a kernel");
    assert!(v.iter().any(|&x| x != 0), "{name}");
}

#[test]
fn negated_unit_breaks_a_triangle() {
    let sys = Generator::Corner(2).build(3, DEFAULT_BUDGET).unwrap();
    let cm = build_context(&sys).unwrap();
    let mut ctx = cm.context.clone();
    ctx.eta = ctx.eta.scale(2);
    let coring = cm.context.coring().unwrap();
    let tests = test_sets(&cm.context, &coring, 1).unwrap();
    let m = check_module_adjunction(&ctx, &tests.right_b, &tests.right_a, Exec::Sequential);
    assert!(!m.all_passed());
}

#[test]
fn sequential_and_parallel_agree() {
    let sys = Generator::Block.build(2, DEFAULT_BUDGET).unwrap();
    let cm = build_context(&sys).unwrap();
    let ctx = &cm.context;
    let coring = ctx.coring().unwrap();
    let tests = test_sets(ctx, &coring, 5).unwrap();
    let a = check_comodule_adjunction(ctx, &coring, &tests.right_b, &tests.comodules, Exec::Sequential);
    let b = check_comodule_adjunction(ctx, &coring, &tests.right_b, &tests.comodules, Exec::Parallel);
    assert_eq!(a, b);
}
