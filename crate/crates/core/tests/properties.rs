use coringlab_core::algebra::FiniteAlgebra;
use coringlab_core::comatrix::build_context;
use coringlab_core::descent::{descent_check, is_faithfully_flat, test_sets};
use coringlab_core::galois::{canonical_map, self_family};
use coringlab_core::instances::{Generator, DEFAULT_BUDGET};
use coringlab_core::linalg::{Matrix, Subspace};
use coringlab_core::par::Exec;
use proptest::prelude::*;

fn generator() -> impl Strategy<Value = Generator> {
    prop_oneof![
        Just(Generator::Sweedler),
        Just(Generator::Block),
        Just(Generator::Degenerate),
        (1usize..=4).prop_map(Generator::Corner),
        prop::collection::vec(1usize..=2, 1..=3).prop_map(Generator::KgtDirectSum),
    ]
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn echelon_form_is_canonical(p in prime(), seed in prop::collection::vec(0u64..5, 12), mix in prop::collection::vec(0u64..5, 9)) {
        let vecs: Vec<Vec<u64>> = seed.chunks(4).map(|c| c.iter().map(|x| x % p).collect()).collect();
        let a = Subspace::from_vectors(p, 4, &vecs);
        let mixed: Vec<Vec<u64>> = mix
            .chunks(3)
            .map(|cs| {
                let mut out = vec![0; 4];
                for (c, v) in cs.iter().zip(&vecs) {
                    coringlab_core::linalg::axpy(p, &mut out, c % p, v);
                }
                out
            })
            .collect();
        let b = Subspace::from_vectors(p, 4, &mixed);
        prop_assert!(a.contains_subspace(&b));
        if b.dim() == a.dim() {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn solving_reproduces_the_right_hand_side(p in prime(), a in prop::collection::vec(0u64..3, 12), x in prop::collection::vec(0u64..3, 8)) {
        let a = Matrix::from_vec(p, 3, 4, a.into_iter().map(|v| v % p).collect());
        let x = Matrix::from_vec(p, 4, 2, x.into_iter().map(|v| v % p).collect());
        let b = a.mul(&x);
        let sol = a.solve_right(&b).expect("consistent system");
        prop_assert_eq!(a.mul(&sol), b.clone());
        let bt = b.transpose();
        let left = a.transpose().solve_left(&bt);
        prop_assert!(left.is_none() || left.unwrap().mul(&a.transpose()) == bt);
    }

    #[test]
    fn algebra_multiplication_is_associative(p in prime(), n in 1usize..=3, xs in prop::collection::vec(0u64..3, 27)) {
        for alg in [FiniteAlgebra::matrix_algebra(p, n), FiniteAlgebra::truncated_polynomial(p, n + 1)] {
            let d = alg.dim();
            let v = |k: usize| -> Vec<u64> { (0..d).map(|i| xs[(k * d + i) % xs.len()] % p).collect() };
            let (x, y, z) = (v(0), v(1), v(2));
            prop_assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
            let one = alg.unit().unwrap().to_vec();
            prop_assert_eq!(alg.mul(&one, &x), x.clone());
            prop_assert_eq!(alg.mul(&x, &one), x);
        }
    }

    #[test]
    fn generated_systems_satisfy_the_identity_battery(g in generator(), p in prime()) {
        let sys = g.build(p, DEFAULT_BUDGET).unwrap();
        prop_assert!(sys.rings.check().all_passed());
        prop_assert!(sys.modules.check().all_passed());
        prop_assert!(sys.check_compat().all_passed());
        let cm = build_context(&sys).unwrap();
        let r = cm.check(&sys);
        prop_assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
        prop_assert!(cm.comatrix.coring.check().all_passed());
        let col = sys.modules.colimit().unwrap();
        let spans = Subspace::from_vectors(p, col.object.dim(), &col.injections.iter().flat_map(Matrix::columns).collect::<Vec<_>>());
        prop_assert_eq!(spans.dim(), col.object.dim());
    }

    #[test]
    fn self_family_is_galois(g in generator(), p in prime()) {
        let sys = g.build(p, DEFAULT_BUDGET).unwrap();
        let cm = build_context(&sys).unwrap();
        let gal = canonical_map(&self_family(&sys, &cm).unwrap()).unwrap();
        prop_assert!(gal.is_galois(), "{}", g);
        prop_assert!(gal.check().all_passed());
    }

    #[test]
    fn descent_holds_exactly_when_faithfully_flat(g in generator(), p in prime(), seed in 0u64..1000) {
        let sys = g.build(p, DEFAULT_BUDGET).unwrap();
        let cm = build_context(&sys).unwrap();
        let ctx = &cm.context;
        let d = ctx.coring().unwrap();
        let tests = test_sets(ctx, &d, seed).unwrap();
        let out = descent_check(ctx, &d, &tests, Exec::Sequential).unwrap();
        let ff = is_faithfully_flat(&ctx.p).unwrap();
        prop_assert_eq!(out.faithfully_flat, ff);
        prop_assert!(out.report.all_passed());
        prop_assert_eq!(out.report.passed("unit-iso").is_some(), ff);
        prop_assert_eq!(out.report.passed("unit-defect-exhibited").is_some(), !ff);
        prop_assert_eq!(out.kernel_witness.is_some(), !ff);
        let again = descent_check(ctx, &d, &test_sets(ctx, &d, seed).unwrap(), Exec::Sequential).unwrap();
        prop_assert_eq!(out.report, again.report);
    }
}
