use super::*;
use crate::corpus::{symbolic_rules, BumpSpectrum};
use crate::specfun::DunklParameter;
use crate::transform::sample_expr;

fn kp(k: f64) -> DunklParameter<f64> {
    DunklParameter::new(k).unwrap()
}

fn cm(a: f64, b: f64, c_: f64, d: f64) -> CanonicalMatrix<f64> {
    CanonicalMatrix::new(a, b, c_, d).unwrap()
}

const P1: Exponent<f64> = Exponent::Finite(1.0);
const P2: Exponent<f64> = Exponent::Finite(2.0);
const PINF: Exponent<f64> = Exponent::Infinity;

fn bump_pipe(l1: f64, l2: f64, k: f64, m: CanonicalMatrix<f64>) -> SpectralPipeline<f64> {
    BumpSpectrum::single(l1, l2).unwrap().realize(kp(k), &m).unwrap().pipeline().unwrap()
}

fn gaussian_pipe(m: CanonicalMatrix<f64>) -> SpectralPipeline<f64> {
    let (xr, lr) = symbolic_rules(kp(0.0), m.b).unwrap();
    SpectralPipeline::new(sample_expr(&SymExpr::gaussian(0.5), xr).unwrap(), m, lr).unwrap()
}

fn zero_pipe() -> SpectralPipeline<f64> {
    let (xr, lr) = symbolic_rules(kp(0.0), 1.0).unwrap();
    SpectralPipeline::new(SampledFunction::zero(xr, "0"), cm(1.0, 1.0, 0.0, 1.0), lr).unwrap()
}

/// Endpoint offset where `e^{1-1/(1-t²)}` crosses `threshold`.
fn crossing(threshold: f64) -> f64 {
    let q = 1.0 - threshold.ln();
    (1.0 - 1.0 / q).sqrt()
}

#[test]
fn fits_recover_planted_rates() {
    let logs: Vec<f64> = (0..=40)
        .map(|n| {
            let n = n as f64;
            n * 0.7 - 1.3 * n.sqrt() + 0.5 * (n.max(1.0)).ln() + 2.0 + 0.3 / n.max(1.0)
        })
        .collect();
    assert!((fit_log_rate(&logs, 13).unwrap() - 0.7).abs() < 1e-9);
    assert!((fit_ratio_rate(&logs, 13).unwrap() - 0.7).abs() < 1e-3);
}

#[test]
fn oracle_examples() {
    let m = cm(1.0, 1.0, 0.0, 1.0);
    let b = BumpSpectrum::single(1.0, 2.0).unwrap();
    let (_, lr) = b.rules(kp(0.0), 1.0).unwrap();
    let g = b.spectrum(&m, lr.clone()).unwrap();
    let want = 1.5 + 0.5 * crossing(1e-10);
    let r = support_radius_oracle(&g, 1e-10).unwrap();
    assert!((r - want).abs() <= lr.max_spacing(), "{r} vs {want}");

    let m2 = cm(1.0, 2.0, 0.0, 1.0);
    let b2 = BumpSpectrum::new(vec![(-3.0, -1.0), (1.0, 2.0)], 1.0).unwrap();
    let (_, lr2) = b2.rules(kp(0.0), 2.0).unwrap();
    let g2 = b2.spectrum(&m2, lr2.clone()).unwrap();
    let want2 = (2.0 + crossing(1e-10)) / 2.0;
    let r2 = support_radius_oracle(&g2, 1e-10).unwrap();
    assert!((r2 - want2).abs() <= lr2.max_spacing(), "{r2} vs {want2}");

    let zero = Spectrum::from_fn(lr, Some(m), |_| num_complex::Complex::new(0.0, 0.0), "0").unwrap();
    assert_eq!(support_radius_oracle(&zero, 1e-10).unwrap(), 0.0);
    assert!(support_radius_oracle(&zero, 1.0).is_err());
}

#[test]
fn sigma_on_bump() {
    let pipe = bump_pipe(1.0, 2.0, 0.0, cm(1.0, 1.0, 0.0, 1.0));
    let e = estimate_sigma(&pipe, P2, 30, Method::Ratio).unwrap();
    assert!((e.sigma_hat / 2.0 - 1.0).abs() < 0.02, "{}", e.sigma_hat);
    for p in [P1, P2, PINF] {
        let e = estimate_sigma(&pipe, p, 50, Method::Root).unwrap();
        assert!((e.sigma_hat / 2.0 - 1.0).abs() < 0.10, "{p:?}: {}", e.sigma_hat);
        assert!(!e.diverging);
        assert!(e.raw < e.sigma_hat);
    }
}

#[test]
fn sigma_degenerate_cases() {
    let z = estimate_sigma(&zero_pipe(), P2, 30, Method::Root).unwrap();
    assert_eq!(z.sigma_hat, 0.0);
    let g = estimate_sigma(&gaussian_pipe(cm(1.0, 1.0, 0.0, 1.0)), P2, 40, Method::Root).unwrap();
    assert!(g.diverging && g.sigma_hat == f64::INFINITY, "{}", g.loglog_slope);
    let js = serde_json::to_string(&g).unwrap();
    assert!(js.contains(r#""sigma_hat":"inf""#));
}

#[test]
fn polynomial_domain() {
    let pipe = bump_pipe(1.0, 2.0, 0.0, cm(1.0, 1.0, 0.0, 1.0));
    let quarter = RealPolynomial::new(vec![0.0, 0.0, 0.25]).unwrap();
    let r = poly_domain_test(&pipe, &quarter, P2, 40, POLY_TOL).unwrap();
    assert!(r.verdict && (r.score - 1.0).abs() < 0.05, "{}", r.score);
    let square = RealPolynomial::new(vec![0.0, 0.0, 1.0]).unwrap();
    let r = poly_domain_test(&pipe, &square, P2, 40, POLY_TOL).unwrap();
    assert!(!r.verdict && (r.score / 4.0 - 1.0).abs() < 0.05, "{}", r.score);
    let r = poly_domain_test(&zero_pipe(), &square, P2, 40, POLY_TOL).unwrap();
    assert!(r.verdict && r.score == 0.0);
}

#[test]
fn compact_spectrum() {
    let pipe = bump_pipe(1.0, 2.0, 0.0, cm(1.0, 1.0, 0.0, 1.0));
    let r = compact_spectrum_test(&pipe, P2, 25).unwrap();
    assert!(r.compact && (r.sigma2_hat / 4.0 - 1.0).abs() < 0.05, "{}", r.sigma2_hat);
    let r = compact_spectrum_test(&gaussian_pipe(cm(0.0, 1.0, -1.0, 0.0)), P2, 25).unwrap();
    assert!(!r.compact);
    let r = compact_spectrum_test(&zero_pipe(), P2, 25).unwrap();
    assert!(r.compact && r.sigma2_hat == 0.0);
}

#[test]
fn heat_gap() {
    for (l1, l2, b) in [(1.0, 2.0, 1.0), (0.5, 1.0, 1.0), (2.0, 3.0, 2.0)] {
        let pipe = bump_pipe(l1, l2, 0.0, cm(1.0, b, 0.0, 1.0));
        let d = estimate_delta(&pipe, P2, 40).unwrap();
        assert!(d.converged && d.n_used >= 20);
        let want = (l1 / b) * (l1 / b);
        assert!((d.delta_hat / want - 1.0).abs() < 0.02, "[{l1},{l2}] b={b}: {}", d.delta_hat);
        let v = vanishing_interval_transform(&pipe, P2, 40).unwrap();
        assert!(v.r_hat >= 0.95 * l1 / b);
    }
    // e^{-4n} reaches the forward roundoff floor after a handful of terms
    let steep = estimate_delta(&bump_pipe(2.0, 3.0, 0.0, cm(1.0, 1.0, 0.0, 1.0)), P2, 40).unwrap();
    assert!(!steep.converged && steep.n_used < 10);
    let across = BumpSpectrum::single(-1.0, 1.5).unwrap().realize(kp(0.0), &cm(1.0, 1.0, 0.0, 1.0)).unwrap();
    let d = estimate_delta(&across.pipeline().unwrap(), P2, 40).unwrap();
    assert!(d.delta_hat < 0.02, "{}", d.delta_hat);
    let g = estimate_delta(&gaussian_pipe(cm(1.0, 1.0, 0.0, 1.0)), P2, 40).unwrap();
    assert!(g.delta_hat < 0.02, "{}", g.delta_hat);
    let z = vanishing_interval_transform(&zero_pipe(), P2, 40).unwrap();
    assert_eq!(z.r_hat, f64::INFINITY);
}

#[test]
fn physical_vanishing_interval() {
    let k = kp(0.5);
    let m = CanonicalMatrix::rotation(std::f64::consts::FRAC_PI_3).unwrap();
    let hole = BumpSpectrum::symmetric(1.0, 2.0).unwrap();
    let (wide, tight) = hole.rules(k, m.b).unwrap();
    let f = SampledFunction::from_fn(tight, |x| num_complex::Complex::new(hole.eval(x), 0.0), "hole").unwrap();
    let v = vanishing_interval_physical(&f, &m, wide, P2, 40).unwrap();
    assert_eq!(v.side, Side::Physical);
    assert!((v.radius - 1.0).abs() < 0.02, "{}", v.radius);
}
