//! Sobolev norms `W^s_{k,M}`, seminorm families and spectral reconstruction of derivatives.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::{edge_fraction, Family, SpectralPipeline, EDGE_WARN};
use crate::quadrature::{log_lp_norm, Exponent, QuadratureRule, SampledFunction};
use crate::scalar::Real;
use crate::specfun::{j_norm_ladder, ln_gamma, CanonicalMatrix, DunklParameter, KernelDerivative};
use crate::symfun::{Canonical, Evaluator, SymExpr, TERM_BUDGET};

/// Largest operator power on the symbolic seminorm path.
pub const MAX_SEMINORM_P: usize = 12;
/// Largest order for spectral derivative reconstruction.
pub const MAX_DERIVATIVE: u32 = 4;
/// Refinement factor of the overlay grid used for suprema.
pub const SUP_REFINE: usize = 4;

/// A value with the accuracy warnings raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

/// `‖f‖_{W^s} = (∫ (1+λ²)^s |D^M_k f|² dμ_k)^{1/2}`.
pub fn sobolev_norm<T: Real>(pipe: &SpectralPipeline<T>, s: T) -> Result<Measured<T>> {
    if !s.is_finite() {
        return Err(Error::param("s", "must be finite"));
    }
    let g = pipe.spectrum();
    let half = T::lit(0.5);
    let weighted: Vec<Complex<T>> = g
        .lambdas()
        .iter()
        .zip(g.values())
        .map(|(&l, &v)| v * (T::one() + l * l).powf(half * s))
        .collect();
    let rule = g.rule();
    let value = log_lp_norm(rule, &weighted, Exponent::Finite(T::lit(2.0))).exp();
    let edge = edge_fraction(rule, &weighted);
    let mut warnings = Vec::new();
    if edge > T::lit(EDGE_WARN) {
        warnings.push(format!(
            "weighted spectrum keeps {:e} of its energy near the grid edge",
            edge.to_f64_lossy()
        ));
    }
    Ok(Measured { value, warnings })
}

/// `(Σ_{n≤m} ‖Λ^n_{k,M^{-1}} f‖²₂)^{1/2}` on the spectral path.
pub fn sobolev_opsum_norm<T: Real>(pipe: &SpectralPipeline<T>, m: usize) -> Result<Measured<T>> {
    if m > 6 {
        return Err(Error::param("m", format!("at most 6, got {m}")));
    }
    let seq = pipe.norm_sequence(&Family::Power, Exponent::Finite(T::lit(2.0)), m)?;
    let value = seq.entries.iter().map(|e| e.norm().powi(2)).fold(T::zero(), |a, b| a + b).sqrt();
    Ok(Measured { value, warnings: seq.warnings })
}

/// Nodes of `rule` with `SUP_REFINE - 1` extra points in every gap.
pub fn sup_grid<T: Real>(rule: &QuadratureRule<T>) -> Vec<T> {
    let nodes = rule.nodes();
    let mut out = Vec::with_capacity(nodes.len() * SUP_REFINE);
    for w in nodes.windows(2) {
        for j in 0..SUP_REFINE {
            out.push(w[0] + (w[1] - w[0]) * T::lit(j as f64 / SUP_REFINE as f64));
        }
    }
    if let Some(&last) = nodes.last() {
        out.push(last);
    }
    out
}

/// Supremum of `h` over the overlay grid, polished by golden-section search around the best point.
pub fn grid_sup<T: Real, F>(h: F, grid: &[T]) -> Result<T>
where
    F: Fn(T) -> Result<T> + Sync,
{
    if grid.is_empty() {
        return Ok(T::zero());
    }
    let vals: Vec<T> = grid.par_iter().map(|&x| h(x)).collect::<Result<_>>()?;
    let (mut best_i, mut best) = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if best == T::zero() {
        return Ok(best);
    }
    let mut lo = grid[best_i.saturating_sub(1)];
    let mut hi = grid[(best_i + 1).min(grid.len() - 1)];
    let r = T::lit(0.618_033_988_749_894_8);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = h(x1)?;
    let mut f2 = h(x2)?;
    for _ in 0..80 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = h(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = h(x2)?;
        }
    }
    Ok(best.max(f1).max(f2))
}

fn one_plus_x2_pow<T: Real>(q: u32) -> Canonical<T> {
    let base = Canonical::constant(Complex::new(T::one(), T::zero())).add(&Canonical::monomial(2));
    (0..q).fold(Canonical::constant(Complex::new(T::one(), T::zero())), |acc, _| acc.mul(&base))
}

/// `S_{n,m}(φ) = sup_x (1+x²)^n |φ^{(m)}(x)|` over the overlay grid of `rule`.
pub fn seminorm_s<T: Real>(phi: &SymExpr<T>, n: u32, m: u32, rule: &QuadratureRule<T>) -> Result<T> {
    let mut c = phi.canonical();
    for _ in 0..m {
        c = c.derivative();
    }
    let ev = Evaluator::new(&c);
    let nf = T::lit(n as f64);
    grid_sup(|x| Ok((T::one() + x * x).powf(nf) * ev.eval(x)?.norm()), &sup_grid(rule))
}

/// `R_{p,q}(φ) = sup_x |(d/dx)^p ((1+x²)^q φ)(x)|` over the overlay grid of `rule`.
pub fn seminorm_r<T: Real>(phi: &SymExpr<T>, p: u32, q: u32, rule: &QuadratureRule<T>) -> Result<T> {
    let mut c = one_plus_x2_pow(q).mul(&phi.canonical());
    for _ in 0..p {
        c = c.derivative();
    }
    let ev = Evaluator::new(&c);
    grid_sup(|x| Ok(ev.eval(x)?.norm()), &sup_grid(rule))
}

/// `‖(1+x²)^{r/2} Λ^p_{k,M^{-1}} φ‖_{L²_k}` by quadrature on `rule`.
pub fn seminorm_op<T: Real>(
    phi: &SymExpr<T>,
    matrix: &CanonicalMatrix<T>,
    r: u32,
    p: usize,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    if p > MAX_SEMINORM_P {
        return Err(Error::param("p", format!("at most {MAX_SEMINORM_P}, got {p}")));
    }
    let c = phi
        .canonical()
        .iterate_lcd(rule.k().value(), matrix.inverse().d_over_b(), p, TERM_BUDGET)?;
    let v = Evaluator::new(&c).eval_many(rule.nodes())?;
    let half_r = T::lit(r as f64 * 0.5);
    let w: Vec<Complex<T>> = rule
        .nodes()
        .iter()
        .zip(v)
        .map(|(&x, z)| z * (T::one() + x * x).powf(half_r))
        .collect();
    Ok(log_lp_norm(rule, &w, Exponent::Finite(T::lit(2.0))).exp())
}

/// Coefficients of `H_m` with `(d/dx)^m e^{iβx²} = H_m(x) e^{iβx²}`, ascending.
fn chirp_derivative_polys<T: Real>(beta: T, n: u32) -> Vec<Vec<Complex<T>>> {
    let mut out = vec![vec![Complex::new(T::one(), T::zero())]];
    let two_ib = Complex::new(T::zero(), beta + beta);
    for m in 0..n as usize {
        let h = &out[m];
        let mut next = vec![Complex::new(T::zero(), T::zero()); h.len() + 1];
        for (j, &c) in h.iter().enumerate() {
            if j > 0 {
                next[j - 1] += c * T::lit(j as f64);
            }
            next[j + 1] += c * two_ib;
        }
        out.push(next);
    }
    out
}

fn binomial(n: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `f^{(n)}` at arbitrary points from the spectrum of `f`.
///
/// With `g = D^M_k f`, `f(x) = (-ib)^{-(k+1)} e^{-(i/2)(a/b)x²} F(x)` where
/// `F(x) = ∫ g(λ) e^{-(i/2)(d/b)λ²} E_k(iλ/b, x) dμ_k(λ)`; derivatives of `F`
/// fall on the kernel and the chirp is differentiated in closed form.
pub fn derivative_via_spectrum_at<T: Real>(pipe: &SpectralPipeline<T>, n: u32, xs: &[T]) -> Result<Vec<Complex<T>>> {
    if n > MAX_DERIVATIVE {
        return Err(Error::param("n", format!("at most {MAX_DERIVATIVE}, got {n}")));
    }
    let m = *pipe.matrix();
    let g = pipe.spectrum();
    let k = g.k;
    let half = T::lit(0.5);
    // pair ±λ so one Bessel ladder serves both signs of t
    let chirped = |i: usize| {
        let l = g.lambdas()[i];
        g.values()[i] * g.rule().weights()[i] * Complex::from_polar(T::one(), -half * m.d_over_b() * l * l)
    };
    let nl = g.lambdas().len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut pairs: Vec<(T, Complex<T>, Complex<T>)> = Vec::with_capacity(nl / 2 + 1);
    for i in nl.div_ceil(2)..nl {
        let (vp, vm) = (chirped(i), chirped(nl - 1 - i));
        if vp != zero || vm != zero {
            pairs.push((g.lambdas()[i] / m.b, vp, vm));
        }
    }
    if nl % 2 == 1 {
        pairs.push((T::zero(), chirped(nl / 2), zero));
    }
    let kds: Vec<KernelDerivative<T>> = (0..=n).map(|j| KernelDerivative::new(k, j)).collect();
    let ladder_len = kds.iter().map(|d| d.ladder_len()).max().unwrap_or(1);
    let polys = chirp_derivative_polys(-half * m.a_over_b(), n);
    let pre = m.inverse().prefactor(k);
    xs.par_iter()
        .map(|&x| {
            let mut fj = vec![Complex::new(T::zero(), T::zero()); n as usize + 1];
            for &(nu, vp, vm) in &pairs {
                let t = nu * x;
                let ladder = j_norm_ladder(k.value(), t, ladder_len)?;
                for (j, kd) in kds.iter().enumerate() {
                    let s = nu.powi(j as i32);
                    fj[j] += vp * kd.eval_with_ladder(t, &ladder) * s;
                    if vm != zero {
                        let sm = if j % 2 == 1 { -s } else { s };
                        fj[j] += vm * kd.eval_with_ladder(-t, &ladder) * sm;
                    }
                }
            }
            let mut total = Complex::new(T::zero(), T::zero());
            for j in 0..=n {
                let h = &polys[(n - j) as usize];
                let hx = h.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * x + c);
                total += fj[j as usize] * hx * T::lit(binomial(n, j));
            }
            Ok(pre * Complex::from_polar(T::one(), -half * m.a_over_b() * x * x) * total)
        })
        .collect()
}

/// `f^{(n)}` on the nodes of `x_rule`.
pub fn derivative_via_spectrum<T: Real>(
    pipe: &SpectralPipeline<T>,
    n: u32,
    x_rule: Arc<QuadratureRule<T>>,
) -> Result<SampledFunction<T>> {
    let v = derivative_via_spectrum_at(pipe, n, x_rule.nodes())?;
    SampledFunction::new(x_rule, v, format!("d{n}[{}]", pipe.input().label))
}

/// `|b|^{-(k+1)} (∫ |λ/b|^{2n} (1+λ²)^{-s} dμ_k)^{1/2}` in closed form.
///
/// Bounds `sup |f^{(n)}| / ‖f‖_{W^s}` when `a = 0`. The integral is
/// `Γ(n+k+1) Γ(s-n-k-1) / (Γ(s) 2^{k+1} Γ(k+1))`, finite only for `s > k + n + 1`.
pub fn embedding_constant<T: Real>(matrix: &CanonicalMatrix<T>, k: DunklParameter<T>, s: T, n: u32) -> Result<T> {
    let kv = k.value();
    let nf = T::lit(n as f64);
    let excess = s - nf - kv - T::one();
    if !(excess > T::zero()) {
        return Err(Error::param("s", format!("must exceed k + n + 1 = {}", kv + nf + T::one())));
    }
    let log_int = ln_gamma(nf + kv + T::one()) + ln_gamma(excess) - ln_gamma(s) - k.measure_normalizer().ln();
    let b = matrix.b.abs();
    Ok((T::lit(0.5) * log_int - nf * b.ln() - (kv + T::one()) * b.ln()).exp())
}

/// Quadrature counterpart of [`embedding_constant`] on `lambda_rule`.
pub fn embedding_constant_quadrature<T: Real>(
    matrix: &CanonicalMatrix<T>,
    s: T,
    n: u32,
    lambda_rule: &QuadratureRule<T>,
) -> T {
    let b = matrix.b.abs();
    let k = lambda_rule.k().value();
    let integral = lambda_rule.integrate(|l| (l / b).abs().powi(2 * n as i32) * (T::one() + l * l).powf(-s));
    b.powf(-(k + T::one())) * integral.sqrt()
}

#[cfg(test)]
mod tests;
