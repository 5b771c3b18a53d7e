use super::*;
use crate::corpus::{schwartz_corpus, symbolic_rules, BumpSpectrum};
use crate::specfun::{dunkl_kernel_dx, DunklParameter};
use crate::transform::sample_expr;
use proptest::prelude::*;

fn kp(k: f64) -> DunklParameter<f64> {
    DunklParameter::new(k).unwrap()
}

fn cm(a: f64, b: f64, c_: f64, d: f64) -> CanonicalMatrix<f64> {
    CanonicalMatrix::new(a, b, c_, d).unwrap()
}

fn pipe_for(e: &SymExpr<f64>, k: f64, m: CanonicalMatrix<f64>) -> SpectralPipeline<f64> {
    let (xr, lr) = symbolic_rules(kp(k), m.b).unwrap();
    SpectralPipeline::new(sample_expr(e, xr).unwrap(), m, lr).unwrap()
}

fn matrices() -> Vec<CanonicalMatrix<f64>> {
    vec![
        cm(0.0, 1.0, -1.0, 0.0),
        cm(1.0, 1.0, 0.0, 1.0),
        CanonicalMatrix::rotation(std::f64::consts::FRAC_PI_3).unwrap(),
    ]
}

#[test]
fn order_zero_is_l2() {
    let p = pipe_for(&SymExpr::gaussian(0.5), 0.0, cm(1.0, 1.0, 0.0, 1.0));
    let v = sobolev_norm(&p, 0.0).unwrap();
    assert!((v.value - 0.5f64.sqrt()).abs() < 1e-6);
    assert!(v.warnings.is_empty());
    let l2 = p.input().lp_norm(Exponent::Finite(2.0));
    assert!((v.value - l2).abs() < 1e-8);
    assert!((sobolev_opsum_norm(&p, 0).unwrap().value - l2).abs() < 1e-8);
}

#[test]
fn zero_function_norms() {
    let (xr, lr) = symbolic_rules(kp(0.5), 1.0).unwrap();
    let p = SpectralPipeline::new(SampledFunction::zero(xr.clone(), "0"), cm(1.0, 1.0, 0.0, 1.0), lr).unwrap();
    for s in [-1.0, 0.0, 3.0] {
        assert_eq!(sobolev_norm(&p, s).unwrap().value, 0.0);
    }
    let z = SymExpr::zero();
    assert_eq!(seminorm_s(&z, 1, 1, &xr).unwrap(), 0.0);
    assert_eq!(seminorm_r(&z, 1, 1, &xr).unwrap(), 0.0);
    assert_eq!(seminorm_op(&z, &cm(1.0, 1.0, 0.0, 1.0), 2, 3, &xr).unwrap(), 0.0);
    let d = derivative_via_spectrum(&p, 2, xr).unwrap();
    assert!(d.values().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn nesting_over_corpus() {
    for m in matrices() {
        for (name, e) in schwartz_corpus::<f64>() {
            let p = pipe_for(&e, 0.5, m);
            let vals: Vec<f64> = [0.0, 0.5, 1.0, 2.0].iter().map(|&s| sobolev_norm(&p, s).unwrap().value).collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{name}");
        }
    }
}

#[test]
fn opsum_equals_weighted_norm_for_unit_b() {
    let m = cm(1.0, 1.0, 0.0, 1.0);
    let member = BumpSpectrum::single(1.0, 2.0).unwrap().realize(kp(0.0), &m).unwrap();
    let p = SpectralPipeline::with_plan(member.plan.clone(), member.function.clone()).unwrap();
    let a = sobolev_opsum_norm(&p, 1).unwrap().value;
    let b = sobolev_norm(&p, 1.0).unwrap().value;
    assert!((a / b - 1.0).abs() < 1e-6);
    assert!(sobolev_opsum_norm(&p, 7).is_err());
}

#[test]
fn opsum_ratio_bracket() {
    for m in matrices() {
        let lo = m.b.abs().min(1.0).powi(2) / 2.0;
        let hi = 2.0 / m.b.abs().min(1.0).powi(6);
        for (name, e) in schwartz_corpus::<f64>() {
            let p = pipe_for(&e, 0.0, m);
            for mm in 0..=3 {
                let r = (sobolev_norm(&p, mm as f64).unwrap().value / sobolev_opsum_norm(&p, mm).unwrap().value).powi(2);
                assert!(r >= lo.powi(mm as i32) * 0.99 && r <= hi.powi(mm as i32).max(1.0) * 1.01, "{name} m={mm}: {r}");
            }
        }
    }
}

#[test]
fn seminorm_examples() {
    let (xr, _) = symbolic_rules(kp(0.0), 1.0).unwrap();
    let g = SymExpr::gaussian(0.5);
    assert!((seminorm_s(&g, 0, 0, &xr).unwrap() - 1.0).abs() < 1e-12);
    let want = 2.0 * (-0.5f64).exp();
    assert!((seminorm_s(&g, 1, 0, &xr).unwrap() - want).abs() < 1e-12);
    assert!((seminorm_r(&g, 0, 0, &xr).unwrap() - 1.0).abs() < 1e-12);
    assert!((seminorm_r(&g, 0, 1, &xr).unwrap() - seminorm_s(&g, 1, 0, &xr).unwrap()).abs() < 1e-14);
    // sup |x e^{-x²/2}| = e^{-1/2}
    assert!((seminorm_s(&g, 0, 1, &xr).unwrap() - (-0.5f64).exp()).abs() < 1e-12);
}

#[test]
fn seminorm_op_basics() {
    let (xr, _) = symbolic_rules(kp(0.5), 1.0).unwrap();
    let m = cm(2.0, 1.0, 1.0, 1.0);
    for (name, e) in schwartz_corpus::<f64>() {
        let l2 = sample_expr(&e, xr.clone()).unwrap().lp_norm(Exponent::Finite(2.0));
        assert!((seminorm_op(&e, &m, 0, 0, &xr).unwrap() - l2).abs() < 1e-14 * l2.max(1.0));
        for r in 0..=4 {
            for p in 0..=4 {
                let v = seminorm_op(&e, &m, r, p, &xr).unwrap();
                assert!(v.is_finite() && v > 0.0, "{name}");
                assert!(seminorm_s(&e, r, p as u32, &xr).unwrap().is_finite());
            }
        }
    }
    assert!(seminorm_op(&SymExpr::gaussian(0.5), &m, 0, 13, &xr).is_err());
}

#[test]
fn derivative_matches_symbolic() {
    let corpus = schwartz_corpus::<f64>();
    for (i, (k, m)) in [(-0.5, 0), (0.0, 1), (2.0, 2), (0.5, 1)].into_iter().enumerate() {
        let m = matrices()[m];
        for (name, e) in [&corpus[i % 4], &corpus[(i + 1) % 4]].into_iter() {
            {
                let p = pipe_for(e, k, m);
                let xr = p.input().rule().clone();
                let mut c = e.canonical();
                for n in 0..=2u32 {
                    let got = derivative_via_spectrum(&p, n, xr.clone()).unwrap();
                    let want = SampledFunction::new(xr.clone(), Evaluator::new(&c).eval_many(xr.nodes()).unwrap(), "w").unwrap();
                    let err = got.sup_distance(&want).unwrap();
                    assert!(err < 1e-6, "k={k} {m:?} {name} n={n}: {err}");
                    c = c.derivative();
                }
            }
        }
    }
}

#[test]
fn derivative_order_limit() {
    let p = pipe_for(&SymExpr::gaussian(0.5), 0.0, cm(1.0, 1.0, 0.0, 1.0));
    assert_eq!(derivative_via_spectrum_at(&p, 5, &[0.0]).unwrap_err().field(), Some("n"));
}

#[test]
fn embedding_bound_for_standard_matrix() {
    let m = cm(0.0, 1.0, -1.0, 0.0);
    for k in [-0.5, 0.5] {
        for n in 0..=2u32 {
            let s = k + n as f64 + 2.5;
            let c = embedding_constant(&m, kp(k), s, n).unwrap();
            let fine = crate::quadrature::build_rule(kp(k), 2000.0, 4000, 16).unwrap();
            let cq = embedding_constant_quadrature(&m, s, n, &fine);
            assert!((cq / c - 1.0).abs() < 1e-6, "k={k} n={n}: {cq} vs {c}");
            for (name, e) in schwartz_corpus::<f64>() {
                let p = pipe_for(&e, k, m);
                let d = derivative_via_spectrum(&p, n, p.input().rule().clone()).unwrap();
                let sup = d.lp_norm(Exponent::Infinity);
                let w = sobolev_norm(&p, s).unwrap().value;
                assert!(sup <= c * w, "{name} k={k} n={n}: {sup} > {}", c * w);
            }
        }
    }
    let scaled = cm(0.0, 2.0, -0.5, 0.0);
    let r = embedding_constant(&scaled, kp(0.0), 3.0, 1).unwrap() / embedding_constant(&m, kp(0.0), 3.0, 1).unwrap();
    assert!((r - 2f64.powi(-2)).abs() < 1e-14);
    assert_eq!(embedding_constant(&m, kp(0.0), 2.0, 1).unwrap_err().field(), Some("s"));
}

#[test]
fn chirp_polynomials() {
    let h = chirp_derivative_polys(0.3f64, 2);
    // (e^{iβx²})'' = (2iβ + (2iβx)²) e^{iβx²}
    assert!((h[2][0] - Complex::new(0.0, 0.6)).norm() < 1e-15);
    assert!((h[2][2] - Complex::new(-0.36, 0.0)).norm() < 1e-15);
    assert_eq!(binomial(4, 2), 6.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]
    #[test]
    fn kernel_derivative_bound(k in -0.5f64..3.0, lam in -40.0f64..40.0, x in -40.0f64..40.0, n in 0u32..=3) {
        let v = dunkl_kernel_dx(kp(k), n, lam, x).unwrap().norm();
        prop_assert!(v <= lam.abs().powi(n as i32) + 1e-10);
    }
}
