use clab_core::algebra::Operation;
use clab_core::theorems::{check_arbitrary, Verdict};
use clab_core::two_dim::{glue_closure, is_subuniverse4, transpose_set};
use clab_core::{cg, is_congruence, Context, FiniteAlgebra, Limits, Matrix2x2, TupleSet4};
use proptest::prelude::*;

fn op(symbol: &str, arity: usize, n: usize) -> impl Strategy<Value = Operation> {
    let symbol = symbol.to_string();
    prop::collection::vec(0..n, n.pow(arity as u32)).prop_map(move |table| Operation {
        symbol: symbol.clone(),
        arity,
        table,
    })
}

/// Algebras on 2 or 3 elements with a binary and an optional unary
/// operation.
fn small_algebra() -> impl Strategy<Value = FiniteAlgebra> {
    (2usize..=3)
        .prop_flat_map(|n| (Just(n), op("*", 2, n), prop::option::of(op("'", 1, n))))
        .prop_map(|(n, bin, un)| {
            let ops = std::iter::once(bin).chain(un).collect();
            FiniteAlgebra::new("random", n, ops).unwrap()
        })
}

fn ctx(alg: FiniteAlgebra) -> Context {
    Context::new(alg, Limits::default())
}

fn matrix_set() -> impl Strategy<Value = TupleSet4> {
    prop::collection::vec((0..3usize, 0..3usize, 0..3usize, 0..3usize), 0..12).prop_map(|v| {
        TupleSet4::from_matrices(
            3,
            v.into_iter().map(|(a, b, c, d)| Matrix2x2::new(a, b, c, d)),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relations_are_nested(alg in small_algebra()) {
        let ctx = ctx(alg);
        for (a, b) in ctx.congruence_pairs().unwrap() {
            let g = clab_core::g_generators(&a, &b);
            let m = ctx.m(&a, &b).unwrap();
            let ms = ctx.mstar(&a, &b).unwrap();
            let r = ctx.r(&a, &b);
            prop_assert!(g.is_subset(&m));
            prop_assert!(m.is_subset(&ms));
            prop_assert!(ms.is_subset(&r));
            prop_assert!(is_subuniverse4(ctx.algebra(), &ms, u128::MAX).unwrap());
        }
    }

    #[test]
    fn transpose_swaps_congruences(alg in small_algebra()) {
        let ctx = ctx(alg);
        for (a, b) in ctx.congruence_pairs().unwrap() {
            let left = transpose_set(&ctx.mstar(&a, &b).unwrap());
            prop_assert_eq!(left, ctx.mstar(&b, &a).unwrap());
        }
    }

    #[test]
    fn arbitrary_algebra_claims_hold(alg in small_algebra()) {
        let ctx = ctx(alg);
        for (a, b) in ctx.congruence_pairs().unwrap() {
            let r = check_arbitrary(&ctx, &a, &b).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.reason);
        }
    }

    #[test]
    fn commutator_laws(alg in small_algebra()) {
        let ctx = ctx(alg);
        let pairs = ctx.congruence_pairs().unwrap();
        for (a, b) in &pairs {
            let c = ctx.commutator(a, b).unwrap();
            prop_assert!(c.is_below(&a.meet(b)));
            prop_assert_eq!(c.is_equality(), ctx.commutator_is_zero(a, b).unwrap());
            prop_assert!(is_congruence(ctx.algebra(), &c).unwrap().is_none());
            prop_assert!(c.is_below(&ctx.hypercommutator(a, b).unwrap()));
            let deltas = ctx.trace(a, b).unwrap().deltas();
            for w in deltas.windows(2) {
                prop_assert!(w[0].is_below(&w[1]));
            }
            for (a2, b2) in &pairs {
                if a.is_below(a2) && b.is_below(b2) {
                    prop_assert!(c.is_below(&ctx.commutator(a2, b2).unwrap()));
                }
            }
        }
    }

    #[test]
    fn cg_is_least(alg in small_algebra(), x in 0..3usize, y in 0..3usize) {
        let ctx = ctx(alg);
        let n = ctx.size();
        let (x, y) = (x % n, y % n);
        let theta = cg(ctx.algebra(), [(x, y)]).unwrap();
        prop_assert!(theta.related(x, y));
        prop_assert!(is_congruence(ctx.algebra(), &theta).unwrap().is_none());
        for other in ctx.congruences().unwrap() {
            if other.related(x, y) {
                prop_assert!(theta.is_below(other));
            }
        }
    }

    #[test]
    fn glue_closure_is_a_closure(s in matrix_set(), t in matrix_set()) {
        let cs = glue_closure(&s);
        prop_assert!(s.is_subset(&cs));
        prop_assert_eq!(glue_closure(&cs), cs.clone());
        let mut st = s.clone();
        st.union_with(&t);
        prop_assert!(cs.is_subset(&glue_closure(&st)));
    }
}
