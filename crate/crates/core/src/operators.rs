//! Operator powers, polynomial operators and the heat semigroup.
//!
//! Every operator acts spectrally: `Λ_{k,M^{-1}}` is the multiplier `iλ/b` on
//! `D^M_k f`. Multipliers are handled as log-magnitude plus phase and rescaled
//! by their maximum on the support, so norm sequences never overflow.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{log_lp_norm, Exponent, QuadratureRule, SampledFunction};
use crate::scalar::Real;
use crate::specfun::{ln_gamma, CanonicalMatrix};
use crate::symfun::{Evaluator, SymExpr, TERM_BUDGET};
use crate::transform::{LcdtPlan, Spectrum};

/// Largest operator power on the spectral path.
pub const MAX_SPECTRAL_N: usize = 60;
/// Largest operator power on the symbolic path.
pub const MAX_SYMBOLIC_N: usize = 30;
/// Relative spectral energy beyond `EDGE_BAND · Λ` that triggers a warning.
pub const EDGE_WARN: f64 = 1e-10;
pub const EDGE_BAND: f64 = 0.9;
/// Truncation bound of the heat series.
pub const SERIES_TOL: f64 = 1e-12;
pub const MAX_SERIES_TERMS: usize = 400;

/// Real polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealPolynomial<T = f64> {
    coefficients: Vec<T>,
}

impl<T: Real> RealPolynomial<T> {
    pub fn new(coefficients: Vec<T>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::param("polynomial", "needs at least one coefficient"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("polynomial", "coefficients must be finite"));
        }
        if coefficients.len() > 1 && *coefficients.last().unwrap() == T::zero() {
            return Err(Error::param("polynomial", "leading coefficient must be nonzero"));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, t: T) -> T {
        self.coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }

    /// Errors unless the degree is at least one.
    pub fn require_nonconstant(&self) -> Result<()> {
        if self.degree() == 0 {
            return Err(Error::param("polynomial", "must be non-constant"));
        }
        Ok(())
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for RealPolynomial<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Self::new(Vec::<T>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    Spectral,
    Symbolic,
}

/// Operator family indexed by `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    /// `Λ^n_{k,M^{-1}}`, multiplier `(iλ/b)^n`
    Power,
    /// `Δ^n_{k,M^{-1}}`, multiplier `(-(λ/b)²)^n`
    Laplacian,
    /// `P^n(iΛ_{k,M^{-1}})`, multiplier `P(λ/b)^n`
    Poly(RealPolynomial<T>),
    /// `Σ_m n^m Δ^m / m!`, multiplier `e^{-nλ²/b²}`
    Heat,
}

impl<T: Real> Family<T> {
    /// `(ln|m|, m/|m|)` of the `n`-th multiplier at `λ`.
    fn log_multiplier(&self, n: T, lam: T, b: T) -> (T, Complex<T>) {
        let one = Complex::new(T::one(), T::zero());
        if n == T::zero() {
            return (T::zero(), one);
        }
        let t = lam / b;
        let signed_power = |v: T, n: T| -> (T, Complex<T>) {
            let sign = if v < T::zero() && n.to_usize().unwrap_or(0) % 2 == 1 { -one } else { one };
            (n * v.abs().ln(), sign)
        };
        match self {
            Family::Power => {
                let (l, s) = signed_power(t, n);
                let ipow = match n.to_usize().unwrap_or(0) % 4 {
                    0 => one,
                    1 => Complex::new(T::zero(), T::one()),
                    2 => -one,
                    _ => Complex::new(T::zero(), -T::one()),
                };
                (l, s * ipow)
            }
            Family::Laplacian => {
                let (l, _) = signed_power(t, n + n);
                let sign = if n.to_usize().unwrap_or(0) % 2 == 1 { -one } else { one };
                (l, sign)
            }
            Family::Poly(p) => signed_power(p.eval(t), n),
            Family::Heat => (-n * t * t, one),
        }
    }
}

/// Output of a spectral operator application.
#[derive(Debug, Clone)]
pub struct OperatorOutput<T: Real = f64> {
    pub function: SampledFunction<T>,
    /// relative spectral energy beyond `0.9 Λ`
    pub edge_fraction: T,
    pub warnings: Vec<String>,
}

/// One row of a norm sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct NormEntry<T = f64> {
    pub n: usize,
    #[serde(with = "crate::scalar::ext_float")]
    pub log_norm: T,
    /// `norm^{1/n}`, absent at `n = 0`
    #[serde(with = "crate::scalar::ext_float::option", default)]
    pub root: Option<T>,
    /// `norm_n / norm_{n-1}`, absent at `n = 0`
    #[serde(with = "crate::scalar::ext_float::option", default)]
    pub ratio: Option<T>,
    /// relative spectral energy beyond `0.9 Λ`, spectral path only
    #[serde(with = "crate::scalar::ext_float::option", default)]
    pub edge_fraction: Option<T>,
}

impl<T: Real> NormEntry<T> {
    pub fn norm(&self) -> T {
        self.log_norm.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct NormSequence<T = f64> {
    pub p: Exponent<T>,
    pub path: Path,
    pub entries: Vec<NormEntry<T>>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl<T: Real> NormSequence<T> {
    /// Builds entries from log-norms indexed from `n = 0`.
    pub fn from_log_norms(p: Exponent<T>, path: Path, logs: &[T], edges: Option<&[T]>) -> Result<Self> {
        if logs.iter().any(|l| l.is_nan() || *l == T::infinity()) {
            return Err(Error::Computation("norm sequence produced NaN or overflow".into()));
        }
        let entries = logs
            .iter()
            .enumerate()
            .map(|(n, &l)| {
                let (root, ratio) = if n == 0 {
                    (None, None)
                } else if l == T::neg_infinity() {
                    (Some(T::zero()), Some(T::zero()))
                } else {
                    (Some((l / T::lit(n as f64)).exp()), Some((l - logs[n - 1]).exp()))
                };
                NormEntry { n, log_norm: l, root, ratio, edge_fraction: edges.map(|e| e[n]) }
            })
            .collect();
        Ok(Self { p, path, entries, warnings: Vec::new() })
    }

    pub fn log_norms(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.log_norm).collect()
    }

    pub fn n_max(&self) -> usize {
        self.entries.last().map(|e| e.n).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.log_norm == T::neg_infinity())
    }

    /// CSV with columns `n, lognorm, root, ratio`.
    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "lognorm", "root", "ratio"])?;
        let opt = |v: Option<T>| v.map(|v| v.to_string()).unwrap_or_default();
        for e in &self.entries {
            wr.write_record([e.n.to_string(), e.log_norm.to_string(), opt(e.root), opt(e.ratio)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Heat-semigroup evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum HeatMode {
    Multiplier,
    /// truncated `Σ n^m Δ^m f / m!`; `terms: None` picks the certified count
    Series { terms: Option<usize> },
}

/// Smallest `T` with `x^T / T! < tol` and `T ≥ x`.
pub fn certified_series_terms(x: f64, tol: f64) -> usize {
    if x <= 0.0 {
        return 1;
    }
    let mut t = x.ceil().max(1.0) as usize;
    while (t as f64) * x.ln() - ln_gamma(t as f64 + 1.0) >= tol.ln() {
        t += 1;
    }
    t
}

/// Forward transform of a function, cached for repeated spectral operators.
#[derive(Debug, Clone)]
pub struct SpectralPipeline<T: Real = f64> {
    plan: Arc<LcdtPlan<T>>,
    input: SampledFunction<T>,
    spectrum: Spectrum<T>,
}

/// Centre of the truncation taper, as a fraction of the rule radius.
pub const TAPER_CENTRE: f64 = 0.6;
/// Width of the truncation taper, as a fraction of the rule radius.
pub const TAPER_WIDTH: f64 = 0.08;

/// Multiplies samples by `erfc((|x| - c)/s)/2`, which removes the hard cutoff at the
/// rule radius. Leakage from the cut then stays within a few `1/s` of the true spectrum.
pub fn taper<T: Real>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let r = f.rule().radius().to_f64_lossy();
    let (c, s) = (TAPER_CENTRE * r, TAPER_WIDTH * r);
    f.map(
        |x, v| v * T::lit(0.5 * libm::erfc((x.to_f64_lossy().abs() - c) / s)),
        f.label.clone(),
    )
}

impl<T: Real> SpectralPipeline<T> {
    pub fn new(f: SampledFunction<T>, matrix: CanonicalMatrix<T>, lambda_rule: Arc<QuadratureRule<T>>) -> Result<Self> {
        let plan = Arc::new(LcdtPlan::new(matrix, f.rule().clone(), lambda_rule)?);
        Self::with_plan(plan, f)
    }

    pub fn with_plan(plan: Arc<LcdtPlan<T>>, f: SampledFunction<T>) -> Result<Self> {
        let spectrum = plan.forward(&f)?;
        Ok(Self { plan, input: f, spectrum })
    }

    /// Pipeline whose input is the inverse transform of `spectrum`.
    pub fn from_spectrum(plan: Arc<LcdtPlan<T>>, spectrum: Spectrum<T>) -> Result<Self> {
        let input = plan.inverse(&spectrum)?;
        Ok(Self { plan, input, spectrum })
    }

    /// Same as [`Self::with_plan`], with the forward transform applied to [`taper`]`(f)`.
    /// Meant for slowly decaying data cut off at the rule radius.
    pub fn tapered(plan: Arc<LcdtPlan<T>>, f: SampledFunction<T>) -> Result<Self> {
        let spectrum = plan.forward(&taper(&f))?;
        Ok(Self { plan, input: f, spectrum })
    }

    pub fn plan(&self) -> &Arc<LcdtPlan<T>> {
        &self.plan
    }

    pub fn input(&self) -> &SampledFunction<T> {
        &self.input
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn matrix(&self) -> &CanonicalMatrix<T> {
        self.plan.matrix()
    }

    /// Applies the `n`-th member of `family`, returning values scaled by `e^{-shift}` and the shift.
    fn scaled(&self, family: &Family<T>, n: T) -> Result<(Vec<Complex<T>>, T, T)> {
        let b = self.matrix().b;
        let g = self.spectrum.values();
        let lams = self.spectrum.lambdas();
        let lm: Vec<(T, Complex<T>)> = lams.iter().map(|&l| family.log_multiplier(n, l, b)).collect();
        let shift = lm
            .iter()
            .zip(g)
            .filter(|(_, v)| v.norm() > T::zero())
            .map(|((l, _), _)| *l)
            .fold(T::neg_infinity(), T::max);
        if shift == T::neg_infinity() {
            return Ok((vec![Complex::new(T::zero(), T::zero()); self.plan.x_rule().len()], T::zero(), T::zero()));
        }
        let h: Vec<Complex<T>> = lm.iter().zip(g).map(|(&(l, ph), &v)| ph * v * (l - shift).exp()).collect();
        let edge = edge_fraction(self.plan.lambda_rule(), &h);
        Ok((self.plan.inverse_values(&h)?, shift, edge))
    }

    fn output(&self, family: &Family<T>, n: T, label: String) -> Result<OperatorOutput<T>> {
        let (v, shift, edge) = self.scaled(family, n)?;
        let s = shift.exp();
        let values = v.into_iter().map(|z| z * s).collect();
        let function = SampledFunction::new(self.plan.x_rule().clone(), values, label)?;
        let mut warnings = Vec::new();
        if edge > T::lit(EDGE_WARN) {
            warnings.push(edge_warning(edge));
        }
        Ok(OperatorOutput { function, edge_fraction: edge, warnings })
    }

    /// `Λ^n_{k,M^{-1}} f`.
    pub fn power(&self, n: usize) -> Result<OperatorOutput<T>> {
        check_spectral_n(n)?;
        self.output(&Family::Power, T::lit(n as f64), format!("power{n}[{}]", self.input.label))
    }

    /// `P^n(iΛ_{k,M^{-1}}) f`.
    pub fn poly(&self, p: &RealPolynomial<T>, n: usize) -> Result<OperatorOutput<T>> {
        p.require_nonconstant()?;
        check_spectral_n(n)?;
        self.output(&Family::Poly(p.clone()), T::lit(n as f64), format!("poly{n}[{}]", self.input.label))
    }

    /// Heat semigroup at time `n`.
    pub fn heat(&self, n: T, mode: HeatMode) -> Result<OperatorOutput<T>> {
        if !(n >= T::zero()) || !n.is_finite() {
            return Err(Error::param("n", "heat time must be finite and nonnegative"));
        }
        let label = format!("heat[{}]", self.input.label);
        match mode {
            HeatMode::Multiplier => self.output(&Family::Heat, n, label),
            HeatMode::Series { terms } => {
                let edge = self.plan.lambda_rule().radius() / self.matrix().b.abs();
                let x = (n * edge * edge).to_f64_lossy();
                let need = certified_series_terms(x, SERIES_TOL);
                let terms = match terms {
                    Some(t) if t < need => {
                        return Err(Error::param(
                            "series_terms",
                            format!("tail bound needs at least {need} terms, got {t}"),
                        ))
                    }
                    Some(t) => t,
                    None => need,
                };
                if terms > MAX_SERIES_TERMS {
                    return Err(Error::param(
                        "series_terms",
                        format!("tail bound needs {need} terms, above the limit {MAX_SERIES_TERMS}"),
                    ));
                }
                let mut acc = vec![Complex::new(T::zero(), T::zero()); self.plan.x_rule().len()];
                let mut max_edge = T::zero();
                let terms = if n == T::zero() { 1 } else { terms };
                for m in 0..terms {
                    let (v, shift, e) = self.scaled(&Family::Laplacian, T::lit(m as f64))?;
                    max_edge = max_edge.max(e);
                    let mf = T::lit(m as f64);
                    let log_c = if m == 0 { T::zero() } else { mf * n.ln() - T::lit(ln_gamma(m as f64 + 1.0)) };
                    let c = (log_c + shift).exp();
                    for (a, z) in acc.iter_mut().zip(v) {
                        *a += z * c;
                    }
                }
                let function = SampledFunction::new(self.plan.x_rule().clone(), acc, label)?;
                let mut warnings = Vec::new();
                if max_edge > T::lit(EDGE_WARN) {
                    warnings.push(edge_warning(max_edge));
                }
                Ok(OperatorOutput { function, edge_fraction: max_edge, warnings })
            }
        }
    }

    /// `ln ‖·‖_p` of the `n`-th family member for `n = 0..=n_max`.
    pub fn norm_sequence(&self, family: &Family<T>, p: Exponent<T>, n_max: usize) -> Result<NormSequence<T>> {
        let limit = if *family == Family::Laplacian { MAX_SPECTRAL_N / 2 } else { MAX_SPECTRAL_N };
        if n_max > limit {
            return Err(Error::param("n_max", format!("at most {limit} on the spectral path, got {n_max}")));
        }
        if let Family::Poly(q) = family {
            q.require_nonconstant()?;
        }
        let mut logs = Vec::with_capacity(n_max + 1);
        let mut edges = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let (v, shift, e) = self.scaled(family, T::lit(n as f64))?;
            logs.push(log_lp_norm(self.plan.x_rule(), &v, p) + shift);
            edges.push(e);
        }
        let mut seq = NormSequence::from_log_norms(p, Path::Spectral, &logs, Some(&edges))?;
        if let Some(&e) = edges.iter().rev().find(|&&e| e > T::lit(EDGE_WARN)) {
            seq.warnings.push(edge_warning(e));
        }
        Ok(seq)
    }
}

fn check_spectral_n(n: usize) -> Result<()> {
    if n > MAX_SPECTRAL_N {
        return Err(Error::param("n", format!("at most {MAX_SPECTRAL_N} on the spectral path, got {n}")));
    }
    Ok(())
}

fn edge_warning<T: Real>(e: T) -> String {
    format!("spectral energy near the grid edge is {:e} of the total", e.to_f64_lossy())
}

/// Share of `Σ w |h|²` carried by `|λ| > 0.9 Λ`.
pub fn edge_fraction<T: Real>(rule: &QuadratureRule<T>, h: &[Complex<T>]) -> T {
    let cut = T::lit(EDGE_BAND) * rule.radius();
    let mut edge = T::zero();
    let mut total = T::zero();
    for ((&l, &w), v) in rule.nodes().iter().zip(rule.weights()).zip(h) {
        let e = w * v.norm_sqr();
        total += e;
        if l.abs() > cut {
            edge += e;
        }
    }
    if total == T::zero() {
        T::zero()
    } else {
        edge / total
    }
}

/// `Λ^n_{k,M^{-1}} f` through the transform.
pub fn apply_power_spectral<T: Real>(
    f: &SampledFunction<T>,
    matrix: &CanonicalMatrix<T>,
    lambda_rule: Arc<QuadratureRule<T>>,
    n: usize,
) -> Result<OperatorOutput<T>> {
    SpectralPipeline::new(f.clone(), *matrix, lambda_rule)?.power(n)
}

/// `P^n(iΛ_{k,M^{-1}}) f`, the inverse transform of `P(λ/b)^n D^M_k f`.
pub fn apply_poly_op<T: Real>(
    f: &SampledFunction<T>,
    matrix: &CanonicalMatrix<T>,
    lambda_rule: Arc<QuadratureRule<T>>,
    p: &RealPolynomial<T>,
    n: usize,
) -> Result<OperatorOutput<T>> {
    SpectralPipeline::new(f.clone(), *matrix, lambda_rule)?.poly(p, n)
}

pub fn heat_semigroup<T: Real>(
    f: &SampledFunction<T>,
    matrix: &CanonicalMatrix<T>,
    lambda_rule: Arc<QuadratureRule<T>>,
    n: T,
    mode: HeatMode,
) -> Result<OperatorOutput<T>> {
    SpectralPipeline::new(f.clone(), *matrix, lambda_rule)?.heat(n, mode)
}

/// Spectral-path `‖Λ^n_{k,M^{-1}} f‖_p` for `n = 0..=n_max`.
pub fn norm_sequence<T: Real>(
    f: &SampledFunction<T>,
    matrix: &CanonicalMatrix<T>,
    lambda_rule: Arc<QuadratureRule<T>>,
    p: Exponent<T>,
    n_max: usize,
) -> Result<NormSequence<T>> {
    SpectralPipeline::new(f.clone(), *matrix, lambda_rule)?.norm_sequence(&Family::Power, p, n_max)
}

/// Symbolic-path `‖Λ^n_{k,M^{-1}} e‖_p` on the nodes of `x_rule`.
pub fn symbolic_norm_sequence<T: Real>(
    e: &SymExpr<T>,
    matrix: &CanonicalMatrix<T>,
    x_rule: &QuadratureRule<T>,
    p: Exponent<T>,
    n_max: usize,
) -> Result<NormSequence<T>> {
    if n_max > MAX_SYMBOLIC_N {
        return Err(Error::param("n_max", format!("at most {MAX_SYMBOLIC_N} on the symbolic path, got {n_max}")));
    }
    let k = x_rule.k().value();
    let dob = matrix.inverse().d_over_b();
    let mut cur = e.canonical();
    let mut logs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            cur = cur.iterate_lcd(k, dob, 1, TERM_BUDGET)?;
        }
        let v = Evaluator::new(&cur).eval_many(x_rule.nodes())?;
        logs.push(log_lp_norm(x_rule, &v, p));
    }
    NormSequence::from_log_norms(p, Path::Symbolic, &logs, None)
}
