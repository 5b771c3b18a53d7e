//! Desk-scale verification suites with per-check values and tolerances.

use std::sync::Arc;

use lcdt::corpus::{schwartz_corpus, symbolic_rules, BumpSpectrum};
use lcdt::operators::{HeatMode, RealPolynomial, SpectralPipeline};
use lcdt::paleywiener::{
    compact_spectrum_test, estimate_delta, estimate_sigma, poly_domain_test, support_radius_oracle, Method, POLY_TOL,
};
use lcdt::quadrature::{build_rule, Exponent, QuadratureRule, SampledFunction};
use lcdt::sobolev::{derivative_via_spectrum, embedding_constant, grid_sup, sobolev_norm, sup_grid};
use lcdt::specfun::{dunkl_kernel, j_norm, CanonicalMatrix, DunklParameter, KernelDerivative};
use lcdt::symfun::{apply_lcd, iterate_op, Evaluator, SymExpr};
use lcdt::transform::{
    chirp_factorized_forward, hausdorff_young, lcdt_forward, lcdt_forward_expr, lcdt_inverse, sample_expr,
};
use lcdt::{Error, Result};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::config::{MatrixSpec, RunConfig};

type C = Complex<f64>;

pub const SUITES: [&str; 5] = ["specfun", "transform", "operators", "sobolev", "pw"];

/// How a measured value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// value ≤ tolerance
    AtMost,
    /// value ≥ tolerance
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    #[serde(with = "lcdt::scalar::ext_float")]
    pub value: f64,
    #[serde(with = "lcdt::scalar::ext_float")]
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub k: f64,
    pub matrix: MatrixSpec,
    pub checks: Vec<Check>,
    pub failed: Vec<String>,
    pub passed: bool,
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn at_most(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.push(name.into(), value, tolerance, Relation::AtMost, value <= tolerance);
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.push(name.into(), value, tolerance, Relation::AtLeast, value >= tolerance);
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.push(name.into(), if ok { 1.0 } else { 0.0 }, 1.0, Relation::AtLeast, ok);
    }

    fn push(&mut self, name: String, value: f64, tolerance: f64, relation: Relation, passed: bool) {
        // NaN never passes
        let passed = passed && !value.is_nan();
        self.checks.push(Check { suite: self.suite.to_string(), name, value, tolerance, relation, passed });
    }
}

/// Runs `suite` ("all" or one of [`SUITES`]) at the config's `k` and matrix.
pub fn run(suite: &str, cfg: &RunConfig) -> Result<VerifyReport> {
    let names: Vec<&'static str> = match suite {
        "all" => SUITES.to_vec(),
        s => vec![*SUITES
            .iter()
            .find(|n| **n == s)
            .ok_or_else(|| Error::param("suite", format!("unknown suite `{s}`")))?],
    };
    let k = cfg.param()?;
    let m = cfg.canonical_matrix()?;
    let mut checks = Vec::new();
    for name in names {
        let mut r = Recorder { suite: name, checks: Vec::new() };
        match name {
            "specfun" => specfun(&mut r, k, &m)?,
            "transform" => transform(&mut r, k, &m)?,
            "operators" => operators(&mut r, k, &m)?,
            "sobolev" => sobolev(&mut r, k, &m)?,
            "pw" => pw(&mut r, k, &m)?,
            _ => unreachable!("suite names are fixed"),
        }
        checks.extend(r.checks);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}.{}", c.suite, c.name)).collect();
    Ok(VerifyReport { suite: suite.to_string(), k: cfg.k, matrix: cfg.matrix, passed: failed.is_empty(), failed, checks })
}

fn rule(k: DunklParameter<f64>, radius: f64, panels: usize) -> Result<Arc<QuadratureRule<f64>>> {
    Ok(Arc::new(build_rule(k, radius, panels, 16)?))
}

fn max_dist(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[C]) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn symmetric_points(half: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| -half + 2.0 * half * i as f64 / (count - 1) as f64).collect()
}

/// Closed-form LCT of `e^{-x²/2}` (the `k = -1/2` transform).
pub fn gaussian_lct(m: &CanonicalMatrix<f64>, lam: f64) -> C {
    let i = C::new(0.0, 1.0);
    let a = C::new(0.5, -0.5 * m.a / m.b);
    let pre = (i * m.b).powf(-0.5);
    pre * (i * 0.5 * m.d / m.b * lam * lam).exp() / (2.0 * a).sqrt() * (-(lam * lam) / (4.0 * a * m.b * m.b)).exp()
}

fn specfun(r: &mut Recorder, k: DunklParameter<f64>, m: &CanonicalMatrix<f64>) -> Result<()> {
    let ks = [-0.5, 0.0, 0.5, 2.0];
    let mut origin = 0.0f64;
    for kv in ks {
        let kk = DunklParameter::new(kv)?;
        for x in [-3.0, 0.0, 7.5] {
            origin = origin.max((dunkl_kernel(kk, 0.0, x)? - C::new(1.0, 0.0)).norm());
        }
    }
    r.at_most("kernel_at_zero_frequency", origin, 1e-15);

    let fr = dunkl_kernel(DunklParameter::new(-0.5)?, 1.0, std::f64::consts::FRAC_PI_2)?;
    r.at_most("fourier_reduction", (fr - C::new(0.0, 1.0)).norm(), 1e-15);

    let mut half = 0.0f64;
    for i in 1..=400 {
        let x = 0.125 * i as f64;
        half = half.max((j_norm(0.5, x)? - x.sin() / x).abs()).max((j_norm(-0.5, x)? - x.cos()).abs());
    }
    r.at_most("half_order_bessel_closed_form", half, 1e-13);

    let pts = symmetric_points(30.0, 121);
    let mut modulus = 0.0f64;
    let mut deriv = f64::NEG_INFINITY;
    for kv in ks {
        let kk = DunklParameter::new(kv)?;
        let ders: Vec<KernelDerivative<f64>> = (0..=3).map(|n| KernelDerivative::new(kk, n)).collect();
        for &lam in &pts {
            for &x in &pts[..61] {
                let x = x / 6.0;
                modulus = modulus.max(dunkl_kernel(kk, lam, x)?.norm());
                for (n, d) in ders.iter().enumerate() {
                    deriv = deriv.max(d.eval(lam, x)?.norm() - lam.abs().powi(n as i32));
                }
            }
        }
    }
    r.at_most("kernel_modulus_at_most_one", modulus - 1.0, 1e-12);
    r.at_most("kernel_derivative_bound", deriv, 1e-10);

    let xs = symmetric_points(5.0, 101);
    let mut eig = 0.0f64;
    for lam in [0.7, 2.3] {
        let e = SymExpr::lcdt_kernel(k, m, lam);
        let lhs = Evaluator::new(&apply_lcd(k, m, &e).canonical());
        let ev = Evaluator::new(&e.canonical());
        for &x in &xs {
            let ex = ev.eval(x)?;
            // residual i((a-d)/b)·x·E vanishes when a = d
            let want = ex * C::new(0.0, -lam / m.b) + ex * C::new(0.0, (m.a - m.d) / m.b * x);
            eig = eig.max((lhs.eval(x)? - want).norm());
        }
    }
    r.at_most("kernel_eigenrelation", eig, 1e-9);
    Ok(())
}

fn transform(r: &mut Recorder, k: DunklParameter<f64>, m: &CanonicalMatrix<f64>) -> Result<()> {
    let half = DunklParameter::new(-0.5)?;
    let std = CanonicalMatrix::dunkl();
    let f = sample_expr(&SymExpr::gaussian(0.5), rule(half, 12.0, 48)?)?;
    let lr = Arc::new(QuadratureRule::from_parts(half, 1.0, vec![-1.0, 0.0, 1.0], vec![1.0; 3])?);
    let g = lcdt_forward(&f, &std, lr)?;
    let ratio = g.values()[2].norm() / g.values()[1].norm();
    r.at_most("gaussian_fourier_ratio", (ratio - (-0.5f64).exp()).abs(), 1e-8);

    let (xr, lr) = symbolic_rules(half, m.b)?;
    let g = lcdt_forward(&sample_expr(&SymExpr::gaussian(0.5), xr)?, m, lr)?;
    let want: Vec<C> = g.lambdas().iter().map(|&l| gaussian_lct(m, l)).collect();
    r.at_most("gaussian_lct_closed_form", max_dist(g.values(), &want) / max_abs(&want), 1e-8);

    let (xr, lr) = symbolic_rules(k, m.b)?;
    let mut iso = 0.0f64;
    let mut trip = 0.0f64;
    let mut chirp = 0.0f64;
    let mut hy = f64::INFINITY;
    for (_, e) in schwartz_corpus::<f64>() {
        let f = sample_expr(&e, xr.clone())?;
        let g = lcdt_forward(&f, m, lr.clone())?;
        let n2 = Exponent::Finite(2.0);
        iso = iso.max((g.lp_norm(n2) / f.lp_norm(n2) - 1.0).abs());
        trip = trip.max(lcdt_inverse(&g, xr.clone())?.sup_distance(&f)?);
        let c = chirp_factorized_forward(&e, m, xr.clone(), lr.clone())?;
        chirp = chirp.max(max_dist(c.values(), g.values()) / max_abs(g.values()));
        for p in [1.0, 4.0 / 3.0, 2.0] {
            hy = hy.min(hausdorff_young(&f, &g, p)?.slack);
        }
    }
    r.at_most("plancherel_relative", iso, 1e-6);
    r.at_most("round_trip_sup", trip, 1e-6);
    r.at_most("chirp_path_relative", chirp, 1e-8);
    r.at_least("hausdorff_young_slack", hy, -1e-9);

    let e = SymExpr::hermite_type(1, 0.5);
    let base = lcdt_forward_expr(&e, m, xr.clone(), lr.clone())?;
    let scale = max_abs(base.values());
    let mut inter = 0.0f64;
    for n in 1..=6usize {
        let it = iterate_op(k, &m.inverse(), &e, n)?;
        let lhs = lcdt_forward_expr(&it, m, xr.clone(), lr.clone())?;
        let want: Vec<C> = base
            .lambdas()
            .iter()
            .zip(base.values())
            .map(|(&l, &v)| v * C::new(0.0, l / m.b).powi(n as i32))
            .collect();
        let norm = scale * (lr.radius() / m.b.abs()).powi(n as i32);
        inter = inter.max(max_dist(lhs.values(), &want) / norm);
    }
    r.at_most("intertwining_relative", inter, 1e-7);
    Ok(())
}

fn operators(r: &mut Recorder, k: DunklParameter<f64>, m: &CanonicalMatrix<f64>) -> Result<()> {
    let (xr, lr) = symbolic_rules(k, m.b)?;
    let e = SymExpr::hermite_type(1, 0.5);
    let pipe = SpectralPipeline::new(sample_expr(&e, xr.clone())?, *m, lr)?;
    let mut gap = 0.0f64;
    for n in 1..=6 {
        let spec = pipe.power(n)?.function;
        let sym = sample_expr(&iterate_op(k, &m.inverse(), &e, n)?, xr.clone())?;
        gap = gap.max(spec.sup_distance(&sym)? / max_abs(sym.values()));
    }
    r.at_most("spectral_symbolic_powers", gap, 1e-6);

    // compact spectrum keeps the series terms bounded by e^{n σ²}
    let member = BumpSpectrum::single(1.0, 2.0)?.realize(k, m)?;
    let g = SpectralPipeline::with_plan(member.plan.clone(), member.function.clone())?;
    let mut modes = 0.0f64;
    for n in 1..=3 {
        let a = g.heat(n as f64, HeatMode::Multiplier)?.function;
        let b = g.heat(n as f64, HeatMode::Series { terms: None })?.function;
        modes = modes.max(a.sup_distance(&b)?);
    }
    r.at_most("heat_series_vs_multiplier", modes, 1e-6);

    let h1 = g.heat(1.0, HeatMode::Multiplier)?.function;
    let h2 = g.heat(2.0, HeatMode::Multiplier)?.function;
    let again = SpectralPipeline::with_plan(g.plan().clone(), h1)?.heat(1.0, HeatMode::Multiplier)?.function;
    r.at_most("heat_semigroup_law_relative", again.sup_distance(&h2)? / max_abs(g.input().values()), 1e-8);
    Ok(())
}

fn sobolev(r: &mut Recorder, k: DunklParameter<f64>, m: &CanonicalMatrix<f64>) -> Result<()> {
    let (xr, lr) = symbolic_rules(k, m.b)?;
    let mut l2 = 0.0f64;
    let mut nested = true;
    let mut deriv = 0.0f64;
    for (_, e) in schwartz_corpus::<f64>() {
        let f = sample_expr(&e, xr.clone())?;
        let pipe = SpectralPipeline::new(f.clone(), *m, lr.clone())?;
        let s0 = sobolev_norm(&pipe, 0.0)?.value;
        let norm = f.lp_norm(Exponent::Finite(2.0));
        l2 = l2.max((s0 - norm).abs() / norm);
        let vals: Vec<f64> =
            [0.0, 0.5, 1.0, 2.0].iter().map(|&s| sobolev_norm(&pipe, s).map(|v| v.value)).collect::<Result<_>>()?;
        nested &= vals.windows(2).all(|w| w[0] <= w[1]);
        let mut c = e.canonical();
        for n in 0..=2u32 {
            let got = derivative_via_spectrum(&pipe, n, xr.clone())?;
            let want = SampledFunction::new(xr.clone(), Evaluator::new(&c).eval_many(xr.nodes())?, "want")?;
            deriv = deriv.max(got.sup_distance(&want)?);
            c = c.derivative();
        }
    }
    r.at_most("order_zero_equals_l2", l2, 1e-6);
    r.flag("nesting_monotone", nested);
    r.at_most("derivative_via_spectrum", deriv, 1e-6);

    let std = CanonicalMatrix::dunkl();
    let (xs, ls) = symbolic_rules(k, 1.0)?;
    let mut worst = f64::NEG_INFINITY;
    for (_, e) in schwartz_corpus::<f64>() {
        let pipe = SpectralPipeline::new(sample_expr(&e, xs.clone())?, std, ls.clone())?;
        for n in 0..=2u32 {
            let s = k.value() + n as f64 + 2.5;
            let bound = embedding_constant(&std, k, s, n)? * sobolev_norm(&pipe, s)?.value;
            let c = (0..n).fold(e.canonical(), |c, _| c.derivative());
            let ev = Evaluator::new(&c);
            let sup = grid_sup(|x| ev.eval(x).map(|v| v.norm()), &sup_grid(&xs))?;
            worst = worst.max(sup / bound);
        }
    }
    r.at_most("embedding_bound_ratio", worst, 1.0 + 1e-9);
    Ok(())
}

fn pw(r: &mut Recorder, k: DunklParameter<f64>, m: &CanonicalMatrix<f64>) -> Result<()> {
    let bump = BumpSpectrum::single(1.0, 2.0)?;
    let member = bump.realize(k, m)?;
    let pipe = member.pipeline()?;
    let sigma = bump.sigma(m.b);
    let p2 = Exponent::Finite(2.0);

    let oracle = support_radius_oracle(&member.spectrum, 1e-10)?;
    r.at_most("support_oracle_relative", (oracle / sigma - 1.0).abs(), 0.02);

    let ratio = estimate_sigma(&pipe, p2, 30, Method::Ratio)?;
    r.at_most("sigma_ratio_n30_relative", (ratio.sigma_hat / sigma - 1.0).abs(), 0.02);
    let root = estimate_sigma(&pipe, p2, 50, Method::Root)?;
    r.at_most("sigma_root_n50_relative", (root.sigma_hat / sigma - 1.0).abs(), 0.10);

    let quarter = RealPolynomial::new(vec![0.0, 0.0, 0.25 * m.b * m.b])?;
    let want = bump.multiplier_sup(m.b, |t| quarter.eval(t));
    let poly = poly_domain_test(&pipe, &quarter, p2, 40, POLY_TOL)?;
    r.at_most("poly_score_relative", (poly.score / want - 1.0).abs(), 0.05);
    r.flag("poly_verdict", poly.verdict == (want <= 1.0 + POLY_TOL));

    let compact = compact_spectrum_test(&pipe, p2, 25)?;
    r.flag("compact_verdict", compact.compact);
    r.at_most("compact_sigma2_relative", (compact.sigma2_hat / (sigma * sigma) - 1.0).abs(), 0.05);

    let delta = estimate_delta(&pipe, p2, 40)?;
    r.at_most("delta_relative", (delta.delta_hat / bump.delta(m.b) - 1.0).abs(), 0.02);

    let (xr, lr) = symbolic_rules(k, m.b)?;
    let zero = SpectralPipeline::new(SampledFunction::zero(xr.clone(), "zero"), *m, lr.clone())?;
    r.at_most("zero_function_sigma", estimate_sigma(&zero, p2, 30, Method::Root)?.sigma_hat, 0.0);
    let gauss = SpectralPipeline::new(sample_expr(&SymExpr::gaussian(0.5), xr)?, *m, lr)?;
    r.flag("gaussian_diverges", estimate_sigma(&gauss, p2, 40, Method::Root)?.sigma_hat == f64::INFINITY);
    Ok(())
}
