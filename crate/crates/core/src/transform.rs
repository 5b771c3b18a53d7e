//! Forward and inverse transforms by direct quadrature.
//!
//! [`LcdtPlan`] caches the real kernel parts `A = j_k(t)` and
//! `B = t/(2(k+1)) j_{k+1}(t)` on the positive quadrant `λ > 0, x > 0`; parity
//! of `A` (even) and `B` (odd) recovers the other three quadrants, and the
//! chirps and prefactor are applied as vectors.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{log_lp_norm, Exponent, QuadratureRule, SampledFunction};
use crate::scalar::Real;
use crate::specfun::{dunkl_kernel, kernel_parts, CanonicalMatrix, DunklParameter};
use crate::symfun::{Canonical, Evaluator, SymExpr};

/// Relative tail mass above which a symbolic input triggers a warning.
pub const TAIL_MASS_TOL: f64 = 1e-12;

fn cz<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Values of a transform on the nodes of a frequency rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Spectrum<T: Real = f64> {
    pub label: String,
    pub k: DunklParameter<T>,
    /// `None` for the plain Dunkl transform
    pub matrix: Option<CanonicalMatrix<T>>,
    rule: Arc<QuadratureRule<T>>,
    values: Vec<Complex<T>>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
struct SpectrumRepr<T: Real> {
    label: String,
    k: DunklParameter<T>,
    matrix: Option<CanonicalMatrix<T>>,
    rule: QuadratureRule<T>,
    values: Vec<Complex<T>>,
    #[serde(default)]
    warnings: Vec<String>,
}

impl<T: Real> TryFrom<SpectrumRepr<T>> for Spectrum<T> {
    type Error = Error;

    fn try_from(r: SpectrumRepr<T>) -> Result<Self> {
        if r.rule.k() != r.k {
            return Err(Error::param("k", "spectrum and lambda rule disagree"));
        }
        let mut s = Spectrum::new(Arc::new(r.rule), r.values, r.matrix, r.label)?;
        s.warnings = r.warnings;
        Ok(s)
    }
}

impl<T: Real> Spectrum<T> {
    pub fn new(
        rule: Arc<QuadratureRule<T>>,
        values: Vec<Complex<T>>,
        matrix: Option<CanonicalMatrix<T>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::Shape(format!("{} values for {} frequencies", values.len(), rule.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Computation("spectrum values must be finite".into()));
        }
        Ok(Self { label: label.into(), k: rule.k(), matrix, rule, values, warnings: Vec::new() })
    }

    pub fn from_fn<F: Fn(T) -> Complex<T>>(
        rule: Arc<QuadratureRule<T>>,
        matrix: Option<CanonicalMatrix<T>>,
        f: F,
        label: impl Into<String>,
    ) -> Result<Self> {
        let values = rule.nodes().iter().map(|&l| f(l)).collect();
        Self::new(rule, values, matrix, label)
    }

    #[inline]
    pub fn rule(&self) -> &Arc<QuadratureRule<T>> {
        &self.rule
    }

    #[inline]
    pub fn lambdas(&self) -> &[T] {
        self.rule.nodes()
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Pointwise multiplier `m(λ) · g(λ)`.
    pub fn multiply<F: Fn(T) -> Complex<T>>(&self, m: F, label: impl Into<String>) -> Self {
        let values = self
            .rule
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&l, &v)| m(l) * v)
            .collect();
        Self { label: label.into(), values, warnings: self.warnings.clone(), ..self.clone() }
    }

    /// `ln ‖g‖_p` against `dμ_k(λ)`.
    pub fn log_norm(&self, p: Exponent<T>) -> T {
        log_lp_norm(&self.rule, &self.values, p)
    }

    pub fn lp_norm(&self, p: Exponent<T>) -> T {
        self.log_norm(p).exp()
    }

    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lambda", "re", "im"])?;
        for (l, v) in self.rule.nodes().iter().zip(&self.values) {
            wr.write_record([l.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Halves {
    /// indices of positive nodes, ascending
    pos: Vec<usize>,
    /// mirror index for each positive node
    neg: Vec<usize>,
    zero: Option<usize>,
}

impl Halves {
    fn new<T: Real>(nodes: &[T]) -> Self {
        let n = nodes.len();
        let first = n.div_ceil(2);
        let pos: Vec<usize> = (first..n).collect();
        let neg = pos.iter().map(|&i| n - 1 - i).collect();
        let zero = (n % 2 == 1).then_some(n / 2);
        Self { pos, neg, zero }
    }
}

/// Cached kernel tables for a fixed `(k, M, x-rule, λ-rule)`.
#[derive(Debug, Clone)]
pub struct LcdtPlan<T: Real = f64> {
    k: DunklParameter<T>,
    matrix: CanonicalMatrix<T>,
    x_rule: Arc<QuadratureRule<T>>,
    lambda_rule: Arc<QuadratureRule<T>>,
    xh: Halves,
    lh: Halves,
    /// row j (positive λ), column p (positive x)
    a: Vec<T>,
    b: Vec<T>,
    x_chirp: Vec<Complex<T>>,
    l_chirp: Vec<Complex<T>>,
    pre: Complex<T>,
    pre_inv: Complex<T>,
}

impl<T: Real> LcdtPlan<T> {
    pub fn new(
        matrix: CanonicalMatrix<T>,
        x_rule: Arc<QuadratureRule<T>>,
        lambda_rule: Arc<QuadratureRule<T>>,
    ) -> Result<Self> {
        let k = x_rule.k();
        if lambda_rule.k() != k {
            return Err(Error::param("k", "x and lambda rules use different multiplicity parameters"));
        }
        let xh = Halves::new(x_rule.nodes());
        let lh = Halves::new(lambda_rule.nodes());
        let xs: Vec<T> = xh.pos.iter().map(|&i| x_rule.nodes()[i]).collect();
        let inv_b = T::one() / matrix.b.abs();
        let nx = xs.len();
        let rows: Vec<(Vec<T>, Vec<T>)> = lh
            .pos
            .par_iter()
            .map(|&j| {
                let lam = lambda_rule.nodes()[j] * inv_b;
                let mut ra = Vec::with_capacity(nx);
                let mut rb = Vec::with_capacity(nx);
                for &x in &xs {
                    let (a, b) = kernel_parts(k, lam * x)?;
                    ra.push(a);
                    rb.push(b);
                }
                Ok((ra, rb))
            })
            .collect::<Result<_>>()?;
        let mut a = Vec::with_capacity(rows.len() * nx);
        let mut b = Vec::with_capacity(rows.len() * nx);
        for (ra, rb) in rows {
            a.extend(ra);
            b.extend(rb);
        }
        let half = T::lit(0.5);
        let x_chirp = x_rule
            .nodes()
            .iter()
            .map(|&x| Complex::from_polar(T::one(), half * matrix.a_over_b() * x * x))
            .collect();
        let l_chirp = lambda_rule
            .nodes()
            .iter()
            .map(|&l| Complex::from_polar(T::one(), half * matrix.d_over_b() * l * l))
            .collect();
        let pre = matrix.prefactor(k);
        let pre_inv = matrix.inverse().prefactor(k);
        Ok(Self { k, matrix, x_rule, lambda_rule, xh, lh, a, b, x_chirp, l_chirp, pre, pre_inv })
    }

    pub fn k(&self) -> DunklParameter<T> {
        self.k
    }

    pub fn matrix(&self) -> &CanonicalMatrix<T> {
        &self.matrix
    }

    pub fn x_rule(&self) -> &Arc<QuadratureRule<T>> {
        &self.x_rule
    }

    pub fn lambda_rule(&self) -> &Arc<QuadratureRule<T>> {
        &self.lambda_rule
    }

    fn sign_b(&self) -> T {
        if self.matrix.b > T::zero() {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Transform values at the λ nodes from values at the x nodes.
    pub fn forward_values(&self, f: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if f.len() != self.x_rule.len() {
            return Err(Error::Shape(format!("{} values for {} nodes", f.len(), self.x_rule.len())));
        }
        let u: Vec<Complex<T>> = f
            .iter()
            .zip(self.x_rule.weights())
            .zip(&self.x_chirp)
            .map(|((&v, &w), &c)| v * c * w)
            .collect();
        let up: Vec<Complex<T>> = self.xh.pos.iter().zip(&self.xh.neg).map(|(&p, &q)| u[p] + u[q]).collect();
        let um: Vec<Complex<T>> = self.xh.pos.iter().zip(&self.xh.neg).map(|(&p, &q)| u[p] - u[q]).collect();
        let u0 = self.xh.zero.map(|z| u[z]).unwrap_or_else(cz);
        let nx = up.len();
        let sums: Vec<(Complex<T>, Complex<T>)> = (0..self.lh.pos.len())
            .into_par_iter()
            .map(|j| {
                let ra = &self.a[j * nx..(j + 1) * nx];
                let rb = &self.b[j * nx..(j + 1) * nx];
                let mut sa = u0;
                let mut sb = cz();
                for p in 0..nx {
                    sa += up[p] * ra[p];
                    sb += um[p] * rb[p];
                }
                (sa, sb)
            })
            .collect();
        let i_s = Complex::new(T::zero(), self.sign_b());
        let mut out = vec![cz(); self.lambda_rule.len()];
        for (j, (sa, sb)) in sums.into_iter().enumerate() {
            let jp = self.lh.pos[j];
            let jn = self.lh.neg[j];
            out[jp] = self.pre * self.l_chirp[jp] * (sa - i_s * sb);
            out[jn] = self.pre * self.l_chirp[jn] * (sa + i_s * sb);
        }
        if let Some(z) = self.lh.zero {
            let total = u.iter().fold(cz(), |a, &v| a + v);
            out[z] = self.pre * self.l_chirp[z] * total;
        }
        Ok(out)
    }

    /// Inverse transform values at the x nodes from values at the λ nodes.
    pub fn inverse_values(&self, g: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if g.len() != self.lambda_rule.len() {
            return Err(Error::Shape(format!("{} values for {} frequencies", g.len(), self.lambda_rule.len())));
        }
        let v: Vec<Complex<T>> = g
            .iter()
            .zip(self.lambda_rule.weights())
            .zip(&self.l_chirp)
            .map(|((&g, &w), &c)| g * c.conj() * w)
            .collect();
        let vp: Vec<Complex<T>> = self.lh.pos.iter().zip(&self.lh.neg).map(|(&p, &q)| v[p] + v[q]).collect();
        let vm: Vec<Complex<T>> = self.lh.pos.iter().zip(&self.lh.neg).map(|(&p, &q)| v[p] - v[q]).collect();
        let v0 = self.lh.zero.map(|z| v[z]).unwrap_or_else(cz);
        let nx = self.xh.pos.len();
        let nl = vp.len();
        const CHUNK: usize = 64;
        let sums: Vec<(Complex<T>, Complex<T>)> = (0..nx.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(nx);
                let mut sa = vec![v0; hi - lo];
                let mut sb = vec![cz(); hi - lo];
                for j in 0..nl {
                    let ra = &self.a[j * nx + lo..j * nx + hi];
                    let rb = &self.b[j * nx + lo..j * nx + hi];
                    for p in 0..hi - lo {
                        sa[p] += vp[j] * ra[p];
                        sb[p] += vm[j] * rb[p];
                    }
                }
                sa.into_iter().zip(sb)
            })
            .collect();
        let i_s = Complex::new(T::zero(), self.sign_b());
        let mut out = vec![cz(); self.x_rule.len()];
        for (p, (sa, sb)) in sums.into_iter().enumerate() {
            let ip = self.xh.pos[p];
            let iq = self.xh.neg[p];
            out[ip] = self.pre_inv * self.x_chirp[ip].conj() * (sa + i_s * sb);
            out[iq] = self.pre_inv * self.x_chirp[iq].conj() * (sa - i_s * sb);
        }
        if let Some(z) = self.xh.zero {
            let total = v.iter().fold(cz(), |a, &w| a + w);
            out[z] = self.pre_inv * self.x_chirp[z].conj() * total;
        }
        Ok(out)
    }

    pub fn forward(&self, f: &SampledFunction<T>) -> Result<Spectrum<T>> {
        if f.rule().as_ref() != self.x_rule.as_ref() {
            return Err(Error::Shape("function is not sampled on the plan's x rule".into()));
        }
        let values = self.forward_values(f.values())?;
        Spectrum::new(self.lambda_rule.clone(), values, Some(self.matrix), format!("lcdt[{}]", f.label))
    }

    pub fn inverse(&self, g: &Spectrum<T>) -> Result<SampledFunction<T>> {
        if g.rule().as_ref() != self.lambda_rule.as_ref() {
            return Err(Error::Shape("spectrum is not sampled on the plan's lambda rule".into()));
        }
        if g.matrix.as_ref() != Some(&self.matrix) {
            return Err(Error::param("matrix", "spectrum was produced with a different matrix"));
        }
        let values = self.inverse_values(g.values())?;
        SampledFunction::new(self.x_rule.clone(), values, format!("inverse[{}]", g.label))
    }
}

/// `D^M_k f` on the nodes of `lambda_rule`.
pub fn lcdt_forward<T: Real>(
    f: &SampledFunction<T>,
    matrix: &CanonicalMatrix<T>,
    lambda_rule: Arc<QuadratureRule<T>>,
) -> Result<Spectrum<T>> {
    LcdtPlan::new(*matrix, f.rule().clone(), lambda_rule)?.forward(f)
}

/// `D^M_k e` for a symbolic input sampled on `x_rule`, with a tail-mass warning.
pub fn lcdt_forward_expr<T: Real>(
    e: &SymExpr<T>,
    matrix: &CanonicalMatrix<T>,
    x_rule: Arc<QuadratureRule<T>>,
    lambda_rule: Arc<QuadratureRule<T>>,
) -> Result<Spectrum<T>> {
    let f = sample_expr(e, x_rule)?;
    let mut g = lcdt_forward(&f, matrix, lambda_rule)?;
    if let Some(w) = tail_warning(&e.canonical(), &f)? {
        g.warnings.push(w);
    }
    Ok(g)
}

/// `D^{M^{-1}}_k g` on the nodes of `x_rule`.
pub fn lcdt_inverse<T: Real>(g: &Spectrum<T>, x_rule: Arc<QuadratureRule<T>>) -> Result<SampledFunction<T>> {
    let m = g.matrix.ok_or_else(|| Error::param("matrix", "spectrum carries no matrix"))?;
    LcdtPlan::new(m, x_rule, g.rule().clone())?.inverse(g)
}

/// `D^{M^{-1}}_k g` at arbitrary points, by direct kernel evaluation.
pub fn lcdt_inverse_at<T: Real>(g: &Spectrum<T>, xs: &[T]) -> Result<Vec<Complex<T>>> {
    let m = g.matrix.ok_or_else(|| Error::param("matrix", "spectrum carries no matrix"))?;
    let inv = m.inverse();
    let pre = inv.prefactor(g.k);
    let half = T::lit(0.5);
    let weighted: Vec<(T, Complex<T>)> = g
        .lambdas()
        .iter()
        .zip(g.values())
        .zip(g.rule().weights())
        .map(|((&l, &v), &w)| (l, v * w * Complex::from_polar(T::one(), -half * m.d_over_b() * l * l)))
        .collect();
    xs.par_iter()
        .map(|&x| {
            let mut acc = cz();
            for &(l, v) in &weighted {
                acc += v * dunkl_kernel(g.k, l / m.b, x)?;
            }
            Ok(pre * Complex::from_polar(T::one(), -half * m.a_over_b() * x * x) * acc)
        })
        .collect()
}

/// Plain Dunkl transform `∫ f(x) E_k(-iλ, x) dμ_k(x)` at `lambdas`, by direct kernel evaluation.
pub fn dunkl_transform_at<T: Real>(f: &SampledFunction<T>, lambdas: &[T]) -> Result<Vec<Complex<T>>> {
    let rule = f.rule();
    let k = rule.k();
    let u: Vec<(T, Complex<T>)> = rule
        .nodes()
        .iter()
        .zip(f.values())
        .zip(rule.weights())
        .map(|((&x, &v), &w)| (x, v * w))
        .collect();
    lambdas
        .par_iter()
        .map(|&l| {
            let mut acc = cz();
            for &(x, v) in &u {
                acc += v * dunkl_kernel(k, -l, x)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Plain Dunkl transform on the nodes of `lambda_rule`.
pub fn dunkl_transform<T: Real>(f: &SampledFunction<T>, lambda_rule: Arc<QuadratureRule<T>>) -> Result<Spectrum<T>> {
    if lambda_rule.k() != f.rule().k() {
        return Err(Error::param("k", "x and lambda rules use different multiplicity parameters"));
    }
    let values = dunkl_transform_at(f, lambda_rule.nodes())?;
    Spectrum::new(lambda_rule, values, None, format!("dunkl[{}]", f.label))
}

/// `e^{(i/2)(d/b)λ²} (ib)^{-(k+1)} D_k(e^{(i/2)(a/b)x²} f)(λ/b)`, through the plain Dunkl transform.
pub fn chirp_factorized_forward<T: Real>(
    e: &SymExpr<T>,
    matrix: &CanonicalMatrix<T>,
    x_rule: Arc<QuadratureRule<T>>,
    lambda_rule: Arc<QuadratureRule<T>>,
) -> Result<Spectrum<T>> {
    let chirped = SymExpr::product(vec![SymExpr::chirp(matrix.a_over_b()), e.clone()]);
    let h = sample_expr(&chirped, x_rule)?;
    let scaled: Vec<T> = lambda_rule.nodes().iter().map(|&l| l / matrix.b).collect();
    let d = dunkl_transform_at(&h, &scaled)?;
    let pre = matrix.prefactor(lambda_rule.k());
    let half = T::lit(0.5);
    let values = lambda_rule
        .nodes()
        .iter()
        .zip(d)
        .map(|(&l, v)| pre * Complex::from_polar(T::one(), half * matrix.d_over_b() * l * l) * v)
        .collect();
    let mut g = Spectrum::new(lambda_rule, values, Some(*matrix), "chirp-factorized")?;
    let f = sample_expr(e, h.rule().clone())?;
    if let Some(w) = tail_warning(&e.canonical(), &f)? {
        g.warnings.push(w);
    }
    Ok(g)
}

/// Samples a tree on the nodes of a rule.
pub fn sample_expr<T: Real>(e: &SymExpr<T>, rule: Arc<QuadratureRule<T>>) -> Result<SampledFunction<T>> {
    sample_canonical(&e.canonical(), rule, "expr")
}

pub fn sample_canonical<T: Real>(
    c: &Canonical<T>,
    rule: Arc<QuadratureRule<T>>,
    label: impl Into<String>,
) -> Result<SampledFunction<T>> {
    let values = Evaluator::new(c).eval_many(rule.nodes())?;
    SampledFunction::new(rule, values, label)
}

/// Both sides of `‖D^M_k f‖_q ≤ |b|^{-(k+1)(1-2/q)} ‖f‖_p`, `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffYoung<T> {
    pub p: T,
    pub lhs: T,
    pub rhs: T,
    /// `(rhs - lhs) / rhs`, zero when both vanish
    pub slack: T,
}

pub fn hausdorff_young<T: Real>(f: &SampledFunction<T>, g: &Spectrum<T>, p: T) -> Result<HausdorffYoung<T>> {
    if !(p >= T::one() && p <= T::lit(2.0)) {
        return Err(Error::param("p", format!("must lie in [1, 2], got {p}")));
    }
    let m = g.matrix.ok_or_else(|| Error::param("matrix", "spectrum carries no matrix"))?;
    let (q, inv_q) = if p == T::one() {
        (Exponent::Infinity, T::zero())
    } else {
        let q = p / (p - T::one());
        (Exponent::Finite(q), T::one() / q)
    };
    let kp1 = g.k.value() + T::one();
    let lhs = g.lp_norm(q);
    let rhs = m.b.abs().powf(-kp1 * (T::one() - T::lit(2.0) * inv_q)) * f.lp_norm(Exponent::Finite(p));
    let slack = if rhs > T::zero() { (rhs - lhs) / rhs } else { -lhs };
    Ok(HausdorffYoung { p, lhs, rhs, slack })
}

/// Upper estimate of `∫_{|x|>X} |f| dμ_k` from the term structure.
///
/// Bessel factors are bounded by 1; each term contributes its Gaussian-type
/// tail `|c| x^m e^{Re α x² + |Re β| x}` integrated against the density.
pub fn tail_mass<T: Real>(c: &Canonical<T>, k: DunklParameter<T>, radius: T) -> T {
    let expo = T::lit(2.0) * k.value() + T::one();
    let norm = k.measure_normalizer();
    let mut total = T::zero();
    let mut add_terms = |terms: &[crate::symfun::Term<T>], shift: i32| {
        for t in terms {
            let a = -t.alpha.re;
            let b = t.beta.re.abs();
            let m = T::lit(t.power as f64 - shift as f64) + expo;
            // log-derivative of the integrand at X; the tail is at most value / rate
            let rate = T::lit(2.0) * a * radius - b - m / radius;
            if rate <= T::zero() {
                total = T::infinity();
                return;
            }
            let log_val = t.coef.norm().ln() + m * radius.ln() - a * radius * radius + b * radius;
            total += T::lit(2.0) * log_val.exp() / rate / norm;
        }
    };
    add_terms(&c.terms, 0);
    for q in &c.quotients {
        add_terms(&q.numer, q.power as i32);
    }
    total
}

fn tail_warning<T: Real>(c: &Canonical<T>, f: &SampledFunction<T>) -> Result<Option<String>> {
    let rule = f.rule();
    let tail = tail_mass(c, rule.k(), rule.radius());
    let mass = f.lp_norm(Exponent::Finite(T::one()));
    if mass == T::zero() {
        return Ok(None);
    }
    let rel = tail / mass;
    Ok((!(rel < T::lit(TAIL_MASS_TOL))).then(|| {
        format!("estimated tail mass beyond |x| = {} is {:e} of the total", rule.radius(), rel.to_f64_lossy())
    }))
}
