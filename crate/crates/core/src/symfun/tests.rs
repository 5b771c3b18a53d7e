use super::*;
use proptest::prelude::*;

type C = Complex<f64>;

fn kp(k: f64) -> DunklParameter<f64> {
    DunklParameter::new(k).unwrap()
}

fn cm(a: f64, b: f64, c_: f64, d: f64) -> CanonicalMatrix<f64> {
    CanonicalMatrix::new(a, b, c_, d).unwrap()
}

fn ev(e: &SymExpr<f64>, x: f64) -> C {
    evaluate(e, x).unwrap()
}

fn grid() -> Vec<f64> {
    (0..=40).map(|i| -5.0 + 0.25 * i as f64 + 0.0137).collect()
}

fn max_diff(a: &SymExpr<f64>, b: &SymExpr<f64>, xs: &[f64]) -> f64 {
    let ea = a.evaluator();
    let eb = b.evaluator();
    xs.iter()
        .map(|&x| (ea.eval(x).unwrap() - eb.eval(x).unwrap()).norm())
        .fold(0.0, f64::max)
}

#[test]
fn evaluate_examples() {
    assert_eq!(ev(&SymExpr::gaussian(0.5), 0.0), C::new(1.0, 0.0));
    // x · cos x via j_{-1/2}
    let u = SymExpr::product(vec![SymExpr::monomial(1), SymExpr::bessel(-0.5, 1.0)]);
    let q = SymExpr::odd_quotient(u);
    assert!((ev(&q, 0.0) - C::new(2.0, 0.0)).norm() < 1e-15);
    let h = SymExpr::hermite_type(2, 1.0);
    assert!((ev(&h, 1.0).re - (-1.0f64).exp()).abs() < 1e-15);
}

#[test]
fn differentiate_examples() {
    let d = differentiate(&SymExpr::gaussian(0.5));
    assert!((ev(&d, 1.0).re + (-0.5f64).exp()).abs() < 1e-15);
    let d = differentiate(&SymExpr::bessel(0.0, 1.0));
    assert_eq!(ev(&d, 0.0).norm(), 0.0);
    let d = differentiate(&SymExpr::hermite_type(1, 1.0));
    assert!((ev(&d, 0.0) - C::new(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn reflect_examples() {
    let f = SymExpr::hermite_type(1, 1.0);
    let r = reflect(&f);
    for x in grid() {
        assert!((ev(&r, x) + ev(&f, x)).norm() < 1e-15);
    }
    let g = SymExpr::gaussian(0.5);
    assert!(max_diff(&reflect(&g), &g, &grid()) == 0.0);
    let mixed = SymExpr::sum(vec![
        SymExpr::exp_quad(C::new(-1.0, 0.3), C::new(0.4, -1.0), C::new(0.0, 0.0)),
        SymExpr::odd_quotient(SymExpr::exp_quad(C::new(-0.5, 0.0), C::new(0.0, 2.0), C::new(0.0, 0.0))),
    ]);
    assert!(max_diff(&reflect(&reflect(&mixed)), &mixed, &grid()) <= 1e-14);
}

#[test]
fn dunkl_examples() {
    let k = kp(0.5);
    let e = SymExpr::dunkl_kernel(k, 2.0);
    let v = ev(&apply_dunkl(k, &e), 0.0);
    assert!((v - C::new(0.0, 2.0)).norm() < 1e-14);

    let f = SymExpr::sum(vec![SymExpr::hermite_type(3, 0.7), SymExpr::gaussian(0.2)]);
    assert!(max_diff(&apply_dunkl(kp(-0.5), &f), &differentiate(&f), &grid()) <= 1e-14);

    let v = ev(&apply_dunkl(kp(0.0), &SymExpr::gaussian(1.0)), 1.0);
    assert!((v.re + 2.0 * (-1.0f64).exp()).abs() < 1e-15 && v.im == 0.0);
}

#[test]
fn dunkl_value_at_origin() {
    // Λ_k e (0) = (2k+2) e'(0)
    let f = SymExpr::sum(vec![SymExpr::hermite_type(1, 0.3), SymExpr::gaussian(1.0)]);
    let k = 1.3;
    let v = ev(&apply_dunkl(kp(k), &f), 0.0);
    let d = ev(&differentiate(&f), 0.0);
    assert!((v - d * (2.0 * k + 2.0)).norm() < 1e-14);
}

#[test]
fn lcd_examples() {
    let f = SymExpr::sum(vec![SymExpr::hermite_type(1, 0.5), SymExpr::gaussian(0.2)]);
    let k = kp(0.5);
    let m = CanonicalMatrix::dunkl();
    assert!(max_diff(&apply_lcd(k, &m, &f), &apply_dunkl(k, &f), &grid()) <= 1e-14);

    let shear = cm(1.0, 1.0, 0.0, 1.0);
    let lam = 0.7;
    let e = SymExpr::lcdt_kernel(k, &shear, lam);
    let lhs = apply_lcd(k, &shear, &e);
    let rhs = SymExpr::scale(C::new(0.0, -lam / shear.b), e.clone());
    assert!(max_diff(&lhs, &rhs, &grid()) <= 1e-9);
}

#[test]
fn kernel_matches_numeric() {
    let k = kp(0.5);
    let m = cm(2.0, 1.0, 1.0, 1.0);
    let e = SymExpr::lcdt_kernel(k, &m, 1.3);
    for x in grid() {
        let want = crate::specfun::lcdt_kernel(k, &m, 1.3, x).unwrap();
        assert!((ev(&e, x) - want).norm() < 1e-14);
    }
}

#[test]
fn eigenrelation_residual_when_a_differs_from_d() {
    // Λ_{k,M} E^M = -i(λ/b) E^M + i (a-d)/b · x E^M
    let k = kp(0.5);
    let m = cm(2.0, 1.0, 1.0, 1.0);
    let lam = 1.1;
    let e = SymExpr::lcdt_kernel(k, &m, lam);
    let lhs = apply_lcd(k, &m, &e);
    let plain = SymExpr::scale(C::new(0.0, -lam / m.b), e.clone());
    let extra = SymExpr::scale(
        C::new(0.0, (m.a - m.d) / m.b),
        SymExpr::product(vec![SymExpr::monomial(1), e.clone()]),
    );
    let full = SymExpr::sum(vec![plain.clone(), extra]);
    assert!(max_diff(&lhs, &full, &grid()) <= 1e-9);
    assert!(max_diff(&lhs, &plain, &grid()) > 1e-3);
}

#[test]
fn chirp_conjugation() {
    let k = kp(1.0);
    let m = CanonicalMatrix::rotation(std::f64::consts::FRAC_PI_3).unwrap();
    let f = SymExpr::sum(vec![SymExpr::hermite_type(2, 0.6), SymExpr::hermite_type(1, 1.0)]);
    let lhs = apply_lcd(k, &m.inverse(), &f);
    let ab = m.a_over_b();
    let inner = SymExpr::product(vec![SymExpr::chirp(ab), f.clone()]);
    let rhs = SymExpr::product(vec![SymExpr::chirp(-ab), apply_dunkl(k, &inner)]);
    let xs: Vec<f64> = (0..50).map(|i| -4.0 + 0.163 * i as f64).collect();
    assert!(max_diff(&lhs, &rhs, &xs) <= 1e-10);
}

#[test]
fn iterate_examples() {
    let k = kp(0.5);
    let m = cm(1.0, 1.0, 0.0, 1.0);
    let f = SymExpr::hermite_type(2, 1.0);
    assert!(max_diff(&iterate_op(k, &m, &f, 0).unwrap(), &f, &grid()) == 0.0);

    let lam = 0.7;
    let e = SymExpr::lcdt_kernel(k, &m, lam);
    let two = iterate_op(k, &m, &e, 2).unwrap();
    let want = SymExpr::scale(C::new(0.0, -lam / m.b).powi(2), e.clone());
    assert!(max_diff(&two, &want, &grid()) <= 1e-8);

    let once = iterate_op(k, &m, &f, 1).unwrap();
    let twice = iterate_op(k, &m, &once, 1).unwrap();
    assert!(max_diff(&twice, &iterate_op(k, &m, &f, 2).unwrap(), &grid()) <= 1e-12);
}

#[test]
fn iterate_limits() {
    let f = SymExpr::gaussian(1.0);
    let m = CanonicalMatrix::dunkl();
    assert!(matches!(iterate_op(kp(0.0), &m, &f, 61), Err(Error::Parameter { .. })));
    let c = f.canonical();
    let e = c.iterate_lcd(0.0, 0.0, 10, 3).unwrap_err();
    assert!(matches!(e, Error::Resource(_)));
}

#[test]
fn iterate_growth_is_polynomial() {
    let k = kp(2.0);
    let m = cm(1.0, 1.0, 0.0, 1.0).inverse();
    let f = SymExpr::hermite_type(2, 1.0).canonical();
    let it = iterate_canonical(k, &m, &f, 30).unwrap();
    assert!(it.size() <= 40, "size {}", it.size());
}

fn richardson(e: &SymExpr<f64>, x: f64) -> C {
    let h = 1e-3;
    let d = |h: f64| (ev(e, x + h) - ev(e, x - h)) / (2.0 * h);
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

#[test]
fn derivative_matches_finite_differences() {
    let cases = vec![
        SymExpr::monomial(3),
        SymExpr::exp_quad(C::new(-0.4, 0.3), C::new(0.2, 0.5), C::new(0.1, 0.0)),
        SymExpr::bessel(0.5, 1.7),
        SymExpr::odd_quotient(SymExpr::exp_quad(C::new(-0.5, 0.0), C::new(0.0, 1.5), C::new(0.0, 0.0))),
        SymExpr::odd_quotient(SymExpr::hermite_type(3, 0.5)),
        SymExpr::scale(C::new(0.3, -2.0), SymExpr::product(vec![SymExpr::monomial(2), SymExpr::bessel(2.0, 0.9)])),
        SymExpr::sum(vec![SymExpr::gaussian(0.5), SymExpr::monomial(1)]),
    ];
    for e in &cases {
        let d = differentiate(e);
        for &x in &[-1.7, -0.3, 0.05, 0.6, 2.2] {
            let fd = richardson(e, x);
            let v = ev(&d, x);
            assert!((fd - v).norm() <= 1e-8 * (1.0 + v.norm()), "{e:?} at {x}: {fd} vs {v}");
        }
        // twice, so quotient derivatives go through the quotient rule again
        let dd = differentiate(&d);
        for &x in &[-0.9, 0.4, 1.3] {
            let fd = richardson(&d, x);
            let v = ev(&dd, x);
            assert!((fd - v).norm() <= 1e-7 * (1.0 + v.norm()), "{e:?}'' at {x}");
        }
    }
}

#[test]
fn irreducible_quotient_is_smooth_at_origin() {
    // (e^{iβx} - e^{-iβx}) / x with β = 1.5 is 2i sin(1.5x)/x, so the value at 0 is 3i
    let u = SymExpr::exp_quad(C::new(0.0, 0.0), C::new(0.0, 1.5), C::new(0.0, 0.0));
    let q = SymExpr::odd_quotient(u);
    assert!((ev(&q, 0.0) - C::new(0.0, 3.0)).norm() < 1e-14);
    for &x in &[1e-9_f64, 1e-3, 0.05, 0.3, 2.0] {
        let want = C::new(0.0, 2.0 * (1.5 * x).sin() / x);
        assert!((ev(&q, x) - want).norm() < 1e-13, "x={x}");
    }
    let d = differentiate(&q);
    assert!(matches!(d.canonical().quotients.first(), Some(q) if q.power == 2));
    for &x in &[-0.2_f64, 1e-4, 0.01, 0.7] {
        let want = C::new(0.0, 2.0 * (1.5 * x * (1.5 * x).cos() - (1.5 * x).sin()) / (x * x));
        assert!((ev(&d, x) - want).norm() < 1e-10, "x={x}");
    }
}

fn corpus() -> Vec<SymExpr<f64>> {
    vec![
        SymExpr::gaussian(0.5),
        SymExpr::hermite_type(1, 0.5),
        SymExpr::hermite_type(2, 0.5),
        SymExpr::exp_quad(C::new(-1.0, 0.25), C::new(0.0, 0.0), C::new(0.0, 0.0)),
        SymExpr::product(vec![SymExpr::gaussian(0.3), SymExpr::exp_quad(C::new(0.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 0.0))]),
    ]
}

#[test]
fn antisymmetry() {
    use crate::quadrature::build_rule;
    let k = kp(0.5);
    let m = cm(1.0, 1.0, 0.0, 1.0);
    let rule = build_rule(k, 14.0, 56, 16).unwrap();
    let fs = corpus();
    let ip = |a: &Canonical<f64>, b: &Canonical<f64>| -> (C, f64, f64) {
        let va = Evaluator::new(a).eval_many(rule.nodes()).unwrap();
        let vb = Evaluator::new(b).eval_many(rule.nodes()).unwrap();
        let mut s = C::new(0.0, 0.0);
        let (mut na, mut nb) = (0.0, 0.0);
        for ((x, y), w) in va.iter().zip(&vb).zip(rule.weights()) {
            s += x * y.conj() * w;
            na += x.norm_sqr() * w;
            nb += y.norm_sqr() * w;
        }
        (s, na.sqrt(), nb.sqrt())
    };
    for f in &fs {
        for g in &fs {
            let cf = f.canonical();
            let cg = g.canonical();
            let lf = cf.lcd(k.value(), m.d_over_b());
            let lg = cg.lcd(k.value(), m.d_over_b());
            let (a, _, _) = ip(&lf, &cg);
            let (b, _, _) = ip(&cf, &lg);
            let (_, nf, ng) = ip(&cf, &cg);
            assert!((a + b).norm() <= 1e-8 * nf * ng);
        }
    }
}

#[test]
fn dunkl_continuous_at_origin() {
    for e in corpus() {
        for &k in &[-0.5, 0.0, 0.5, 2.0] {
            let l = apply_dunkl(kp(k), &e);
            let v0 = ev(&l, 0.0);
            for &x in &[1e-6, -1e-6] {
                assert!((ev(&l, x) - v0).norm() <= 1e-5 * (1.0 + v0.norm()));
            }
        }
    }
}

#[test]
fn json_round_trip() {
    let e = SymExpr::sum(vec![
        SymExpr::lcdt_kernel(kp(0.5), &cm(2.0, 1.0, 1.0, 1.0), 0.3),
        SymExpr::odd_quotient(SymExpr::hermite_type(2, 0.1)),
        SymExpr::Quotient { numerator: Box::new(SymExpr::monomial(3)), power: 2 },
    ]);
    let s = serde_json::to_string(&e).unwrap();
    let back: SymExpr<f64> = serde_json::from_str(&s).unwrap();
    assert_eq!(back, e);
    assert!(s.contains("\"node\":\"odd_quotient\""));
}

#[test]
fn validation() {
    let bad = SymExpr::exp_quad(C::new(0.1, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
    assert_eq!(bad.validate().unwrap_err().field(), Some("exp_quad.alpha"));
    assert!(SymExpr::bessel(-0.7, 1.0).validate().is_err());
}

#[test]
fn to_expr_prefers_odd_quotient_nodes() {
    let u = SymExpr::exp_quad(C::new(-1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, 0.0));
    let q = SymExpr::odd_quotient(u).canonical().to_expr();
    assert!(matches!(q, SymExpr::OddQuotient { .. }));
}

fn arb_leaf() -> impl Strategy<Value = SymExpr<f64>> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| SymExpr::constant(C::new(a, b))),
        (0u32..4).prop_map(SymExpr::monomial),
        (0.1..1.5f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, ai, br, bi)| {
            SymExpr::exp_quad(C::new(-a, ai), C::new(br, bi), C::new(0.0, 0.0))
        }),
        (-0.5..3.0f64, -2.0..2.0f64).prop_map(|(k, c_)| SymExpr::bessel(k, c_)),
    ]
}

fn arb_expr() -> impl Strategy<Value = SymExpr<f64>> {
    arb_leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..3).prop_map(SymExpr::sum),
            prop::collection::vec(inner.clone(), 1..3).prop_map(SymExpr::product),
            inner.clone().prop_map(SymExpr::odd_quotient),
            (inner, -2.0..2.0f64).prop_map(|(e, s)| SymExpr::scale(C::new(s, 0.5), e)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_under_operator_sequences(e in arb_expr(), ops in prop::collection::vec(0u8..3, 0..=6), k in -0.5..2.0f64) {
        let m = cm(1.0, 1.0, 0.0, 1.0);
        let mut cur = e;
        for op in ops {
            cur = match op {
                0 => differentiate(&cur),
                1 => reflect(&cur),
                _ => apply_lcd(kp(k), &m, &cur),
            };
        }
        prop_assert!(cur.validate().is_ok());
        for &x in &[-1.3, -1e-7, 0.0, 2e-3, 0.9] {
            let v = ev(&cur, x);
            prop_assert!(v.re.is_finite() && v.im.is_finite());
        }
    }

    #[test]
    fn reflect_is_involution(e in arb_expr(), x in -3.0..3.0f64) {
        let r = reflect(&reflect(&e));
        let a = ev(&r, x);
        let b = ev(&e, x);
        prop_assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
    }

    #[test]
    fn reflect_matches_negated_argument(e in arb_expr(), x in -3.0..3.0f64) {
        let a = ev(&reflect(&e), x);
        let b = ev(&e, -x);
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
    }
}
