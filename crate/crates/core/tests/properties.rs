use finsler_core::ad::{derive, expand, Group, MultiIndex, Shape};
use finsler_core::dsl::{parse, Expr, Func};
use finsler_core::geometry::fundamental_tensor;
use finsler_core::sample::{SamplePlan, TangentSample};
use finsler_core::tensor::{HermitianMatrix, Tensor, C};
use finsler_core::zoo::{self, IDS};
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(a, b)| C::new(a, b))
}

fn point() -> impl Strategy<Value = TangentSample> {
    (
        prop::collection::vec(complex(0.6), 2),
        prop::collection::vec(complex(1.0), 2).prop_filter("eta away from 0", |e| e.iter().all(|x| x.norm() > 0.2)),
    )
        .prop_map(|(z, eta)| TangentSample::new(z, eta))
}

/// Entire expressions in z, eta and their conjugates.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..2usize).prop_map(Expr::z),
        (0..2usize).prop_map(Expr::eta),
        (0..2usize).prop_map(|k| Expr::call(Func::Conj, Expr::z(k))),
        (0..2usize).prop_map(|k| Expr::call(Func::Conj, Expr::eta(k))),
        complex(2.0).prop_map(Expr::num),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 0..4i32).prop_map(|(a, e)| Expr::pow(a, e)),
            inner.clone().prop_map(|a| Expr::call(Func::Conj, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Abs2, a)),
            inner.prop_map(|a| Expr::call(Func::Exp, Expr::mul(Expr::real(0.25), a))),
        ]
    })
}

fn multi_index(max: u8) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec((0..4usize, 0..2usize), 1..=max as usize).prop_map(|ops| {
        let mut m = MultiIndex::zero(2);
        for (g, k) in ops {
            m = m.with(Group::ALL[g], k, 1);
        }
        m
    })
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn value(e: &Expr, s: &TangentSample, m: &MultiIndex) -> C {
    derive(e, s, std::slice::from_ref(m)).unwrap().get(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_then_parse_evaluates_the_same(e in expr(), s in point()) {
        let back = parse(&e.to_string()).unwrap();
        let (a, b) = (e.eval_at(&s.z, &s.eta).unwrap(), back.eval_at(&s.z, &s.eta).unwrap());
        prop_assert!(close(a, b, 1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn derivatives_are_linear(e1 in expr(), e2 in expr(), a in complex(2.0), b in complex(2.0), s in point(), m in multi_index(3)) {
        let combo = Expr::add(Expr::mul(Expr::num(a), e1.clone()), Expr::mul(Expr::num(b), e2.clone()));
        let lhs = value(&combo, &s, &m);
        let rhs = a * value(&e1, &s, &m) + b * value(&e2, &s, &m);
        prop_assert!(close(lhs, rhs, 1e-10), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn real_functions_have_conjugate_symmetric_derivatives(e in expr(), s in point(), m in multi_index(3)) {
        let real = Expr::add(e.clone(), Expr::call(Func::Conj, e));
        let a = value(&real, &s, &m);
        let b = value(&real, &s, &m.conj_swapped());
        prop_assert!(close(a, b.conj(), 1e-10), "{} vs {}", a, b);
    }

    #[test]
    fn mixed_partials_commute(e in expr(), s in point(), ops in prop::collection::vec((0..4usize, 0..2usize), 1..=3)) {
        let jet = expand(&e, &s, Shape::new(3, 3)).unwrap();
        let apply = |order: &mut dyn Iterator<Item = &(usize, usize)>| {
            order.fold(jet.clone(), |j, &(g, k)| j.derivative(Group::ALL[g], k)).value()
        };
        let forward = apply(&mut ops.iter());
        let backward = apply(&mut ops.iter().rev());
        let m = ops.iter().fold(MultiIndex::zero(2), |m, &(g, k)| m.with(Group::ALL[g], k, 1));
        prop_assert!(close(forward, backward, 1e-10), "{} vs {}", forward, backward);
        prop_assert!(close(forward, value(&e, &s, &m), 1e-10));
    }

    #[test]
    fn zoo_metrics_are_homogeneous(k in 0..IDS.len(), seed in any::<u64>(), lambda in complex(2.0)) {
        prop_assume!(lambda.norm() > 0.1);
        let spec = zoo::make_default(IDS[k]).unwrap();
        let plan = SamplePlan { seed, z_count: 1, eta_count: 1, radius: 0.5 };
        let s = spec.samples(&plan).unwrap().flat().remove(0);
        let l = spec.assemble_l();
        let l0 = l.eval_at(&s.z, &s.eta).unwrap();
        let scaled: Vec<C> = s.eta.iter().map(|x| lambda * x).collect();
        let l1 = l.eval_at(&s.z, &scaled).unwrap();
        prop_assert!(close(l1, l0 * lambda.norm_sqr(), 1e-12));
        prop_assert!(l0.im.abs() <= 1e-12 * l0.re && l0.re > 0.0);
        // g_{i j̄} η^i η̄^j = L
        let g = fundamental_tensor(&l, &s).unwrap();
        let mut q = C::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                q += g.0[[i, j]] * s.eta[i] * s.eta[j].conj();
            }
        }
        prop_assert!(close(q, l0, 1e-12), "{} vs {}", q, l0);
        prop_assert!(g.is_positive_definite());
    }

    #[test]
    fn hermitian_inverse_is_an_involution(entries in prop::collection::vec(complex(1.0), 9), n in 1..4usize) {
        // M = B B* + I is positive definite
        let b = Tensor::from_fn(n, 2, |ix| entries[ix[0] * 3 + ix[1]]);
        let m = b.matmul(&b.adjoint()).add(&Tensor::identity(n));
        let h = HermitianMatrix::from_tensor(m.clone());
        let inv = h.invert().unwrap();
        let back = inv.invert().unwrap();
        prop_assert!(back.0.sub(&m).max_abs() < 1e-10 * (1.0 + m.max_abs()));
        let id = m.matmul(&inv.0).sub(&Tensor::identity(n)).max_abs();
        prop_assert!(id < 1e-10);
    }

    #[test]
    fn sampling_is_deterministic_and_respects_the_domain(seed in any::<u64>()) {
        let spec = zoo::make_default("kropina").unwrap();
        let plan = SamplePlan { seed, z_count: 2, eta_count: 3, radius: 0.5 };
        let a = spec.samples(&plan).unwrap().flat();
        let b = spec.samples(&plan).unwrap().flat();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|s| spec.admits(s)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_b_alpha_beta_metrics_are_generalized_berwald(
        b1 in complex(0.5),
        b2 in complex(0.5),
        kropina in any::<bool>(),
        seed in any::<u64>(),
    ) {
        prop_assume!(b1.norm() + b2.norm() > 0.05 && b1.norm_sqr() + b2.norm_sqr() < 0.5);
        let id = if kropina { "kropina" } else { "randers" };
        let params = zoo::ZooParams {
            b: Some(format!("{},{}", Expr::num(b1), Expr::num(b2))),
            ..Default::default()
        };
        let spec = zoo::make(id, &params).unwrap();
        let plan = SamplePlan { seed, z_count: 2, eta_count: 3, radius: 0.5 };
        let r = finsler_core::classify::classify(&spec, &plan, finsler_core::classify::DEFAULT_TOL).unwrap();
        prop_assert_eq!(r.class("generalized_berwald"), Some(finsler_core::classify::Verdict::Holds));
        prop_assert!(!r.inconsistent(), "{:?}", r.crosschecks.iter().filter(|c| !c.consistent).collect::<Vec<_>>());
    }
}
