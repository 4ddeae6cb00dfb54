use approx::assert_relative_eq;
use proptest::prelude::*;

use gfkernel::basic::BasicElement;
use gfkernel::cli::expr::{DAtom, Expr, FAtom, Lin};
use gfkernel::cli::parse_expr;
use gfkernel::dist::{pair, Distribution};
use gfkernel::jet::{compose, from_taylor, leibniz, taylor_mul, to_taylor};
use gfkernel::kernel::{make_mollifier, standard_sequence, DyadicCover, SmoothingKernel};
use gfkernel::smooth::{Domain, TestFn};
use gfkernel::testing::fit_order;

fn dom() -> Domain {
    Domain::interval(-2.0, 2.0).unwrap()
}

fn coeff() -> impl Strategy<Value = f64> {
    (1u32..40).prop_map(|n| n as f64 / 4.0)
}

fn point() -> impl Strategy<Value = f64> {
    (-6i32..=6).prop_map(|n| n as f64 / 4.0)
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        coeff().prop_map(Expr::Num),
        (coeff(), point()).prop_map(|(c, a)| Expr::Iota(Lin(vec![(c, DAtom::Delta(a))]))),
        point().prop_map(|a| Expr::Iota(Lin(vec![(1.0, DAtom::Heaviside(Some(a)))]))),
        prop_oneof![Just("sin"), Just("x"), Just("exp")]
            .prop_map(|n| Expr::Sigma(Lin(vec![(1.0, FAtom::Named(n.to_string()))]))),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Expr::LieTilde(Lin(vec![(1.0, FAtom::Const)]), Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn leibniz_agrees_with_taylor_product(f in prop::collection::vec(-3.0f64..3.0, 5), g in prop::collection::vec(-3.0f64..3.0, 5)) {
        let via = from_taylor(&taylor_mul(&to_taylor(&f), &to_taylor(&g), 5));
        for (a, b) in leibniz(&f, &g).iter().zip(&via) {
            assert_relative_eq!(*a, *b, epsilon = 1e-10, max_relative = 1e-12);
        }
    }

    #[test]
    fn composing_with_identity_is_neutral(f in prop::collection::vec(-3.0f64..3.0, 5), x0 in -1.0f64..1.0) {
        let id = vec![x0, 1.0, 0.0, 0.0, 0.0];
        for (a, b) in compose(&f, &id).iter().zip(&f) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn fit_recovers_power_laws(p in -6.0f64..6.0, c in 0.1f64..10.0) {
        let vals: Vec<(usize, f64)> = [8usize, 16, 32, 64, 128].iter().map(|&k| (k, c * (k as f64).powf(p))).collect();
        let f = fit_order(&vals).unwrap();
        assert_relative_eq!(f.slope, p, epsilon = 1e-9);
        prop_assert!(f.residual < 1e-9);
    }

    #[test]
    fn pairing_is_linear(a in -1.5f64..1.5, b in -1.5f64..1.5, s in -3.0f64..3.0, c in -0.5f64..0.5) {
        let phi = TestFn::bump(c, 1.2, &dom()).unwrap();
        let (u, v) = (Distribution::delta(a, dom()).unwrap(), Distribution::heaviside_at(b, dom()).unwrap());
        let lhs = pair(&u.add(&v.scale(s)).unwrap(), &phi).unwrap().value;
        let rhs = pair(&u, &phi).unwrap().value + s * pair(&v, &phi).unwrap().value;
        assert_relative_eq!(lhs, rhs, epsilon = 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn iota_is_linear_on_kernels(a in -1.0f64..1.0, s in -3.0f64..3.0, x in -1.0f64..1.0) {
        let rho = make_mollifier(2, 1.0).unwrap();
        let kern: SmoothingKernel = standard_sequence(&dom(), &rho, &DyadicCover::standard(dom())).unwrap().get(16).unwrap();
        let (u, v) = (Distribution::delta(a, dom()).unwrap(), Distribution::heaviside(dom()).unwrap());
        let sum = BasicElement::iota(&u.add(&v.scale(s)).unwrap()).eval(&kern).unwrap().value(x).unwrap();
        let parts = BasicElement::iota(&u).add(&BasicElement::iota(&v).scale(s)).unwrap().eval(&kern).unwrap().value(x).unwrap();
        assert_relative_eq!(sum, parts, epsilon = 1e-9, max_relative = 1e-9);
    }
}
