//! Pointwise evaluation of canonical forms.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::Result;
use crate::scalar::Real;
use crate::specfun::j_norm;

use super::canonical::{Canonical, Quotient, Term};

/// Degree of the Taylor expansion used for quotients beyond their power.
const TAYLOR_EXTRA: usize = 30;

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[derive(Debug, Clone)]
struct FlatTerm<T> {
    coef: Complex<T>,
    power: i32,
    exp: Option<usize>,
    bessels: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Block<T> {
    exps: Vec<(Complex<T>, Complex<T>)>,
    bessels: Vec<(T, T)>,
    terms: Vec<FlatTerm<T>>,
}

impl<T: Real> Block<T> {
    fn new(terms: &[Term<T>]) -> Self {
        let mut exps: Vec<(Complex<T>, Complex<T>)> = Vec::new();
        let mut bessels: Vec<(T, T)> = Vec::new();
        let flat = terms
            .iter()
            .map(|t| {
                let exp = if t.alpha == czero() && t.beta == czero() {
                    None
                } else {
                    Some(match exps.iter().position(|e| *e == (t.alpha, t.beta)) {
                        Some(i) => i,
                        None => {
                            exps.push((t.alpha, t.beta));
                            exps.len() - 1
                        }
                    })
                };
                let bs = t
                    .bessels
                    .iter()
                    .map(|b| match bessels.iter().position(|e| e == b) {
                        Some(i) => i,
                        None => {
                            bessels.push(*b);
                            bessels.len() - 1
                        }
                    })
                    .collect();
                FlatTerm { coef: t.coef, power: t.power as i32, exp, bessels: bs }
            })
            .collect();
        Self { exps, bessels, terms: flat }
    }

    fn eval(&self, x: T) -> Result<Complex<T>> {
        let ev: Vec<Complex<T>> = self
            .exps
            .iter()
            .map(|(a, b)| (*a * (x * x) + *b * x).exp())
            .collect();
        let bv = self
            .bessels
            .iter()
            .map(|&(kappa, c)| j_norm(kappa, c * x))
            .collect::<Result<Vec<T>>>()?;
        let mut acc = czero();
        for t in &self.terms {
            let mut r = x.powi(t.power);
            for &i in &t.bessels {
                r *= bv[i];
            }
            let mut v = t.coef * r;
            if let Some(i) = t.exp {
                v *= ev[i];
            }
            acc += v;
        }
        Ok(acc)
    }
}

/// Taylor coefficients of a term at the origin, up to `deg`.
fn term_taylor<T: Real>(t: &Term<T>, deg: usize) -> Vec<Complex<T>> {
    let mut s = vec![czero::<T>(); deg + 1];
    // e^{βx + αx²}: (n+1) s_{n+1} = β s_n + 2α s_{n-1}
    s[0] = Complex::new(T::one(), T::zero());
    for n in 0..deg {
        let mut v = t.beta * s[n];
        if n >= 1 {
            v += t.alpha * s[n - 1] * T::lit(2.0);
        }
        s[n + 1] = v / T::lit((n + 1) as f64);
    }
    for &(kappa, c) in &t.bessels {
        let mut b = vec![T::zero(); deg + 1];
        b[0] = T::one();
        let q = -c * c / T::lit(4.0);
        let mut n = 1;
        while 2 * n <= deg {
            let nf = T::lit(n as f64);
            b[2 * n] = b[2 * n - 2] * q / (nf * (nf + kappa));
            n += 1;
        }
        let mut prod = vec![czero::<T>(); deg + 1];
        for i in 0..=deg {
            if s[i] == czero() {
                continue;
            }
            for j in (0..=deg - i).step_by(2) {
                prod[i + j] += s[i] * b[j];
            }
        }
        s = prod;
    }
    let m = t.power as usize;
    let mut out = vec![czero::<T>(); deg + 1];
    for i in 0..=deg {
        if i + m <= deg {
            out[i + m] = s[i] * t.coef;
        }
    }
    out
}

#[derive(Debug, Clone)]
struct QuotientEval<T> {
    power: i32,
    numer: Block<T>,
    radius: T,
    /// coefficients of N(x)/x^p as a power series
    series: Vec<Complex<T>>,
}

impl<T: Real> QuotientEval<T> {
    fn new(q: &Quotient<T>) -> Self {
        let p = q.power as usize;
        let series = q
            .taylor
            .get_or_init(|| {
                let deg = p + TAYLOR_EXTRA;
                let mut acc = vec![czero::<T>(); deg + 1];
                for t in &q.numer {
                    for (a, v) in acc.iter_mut().zip(term_taylor(t, deg)) {
                        *a += v;
                    }
                }
                acc[p..].to_vec()
            })
            .clone();
        let scale = Canonical::frequency_scale(&q.numer);
        let radius = T::lit(0.25) / (T::one() + scale);
        Self { power: q.power as i32, numer: Block::new(&q.numer), radius, series }
    }

    fn eval(&self, x: T) -> Result<Complex<T>> {
        if x.abs() >= self.radius {
            return Ok(self.numer.eval(x)? / x.powi(self.power));
        }
        let mut acc = czero();
        for c in self.series.iter().rev() {
            acc = acc * x + *c;
        }
        Ok(acc)
    }
}

/// Compiled evaluator for a canonical form.
#[derive(Debug, Clone)]
pub struct Evaluator<T> {
    main: Block<T>,
    quotients: Vec<QuotientEval<T>>,
}

impl<T: Real> Evaluator<T> {
    pub fn new(c: &Canonical<T>) -> Self {
        Self {
            main: Block::new(&c.terms),
            quotients: c.quotients.iter().map(QuotientEval::new).collect(),
        }
    }

    pub fn eval(&self, x: T) -> Result<Complex<T>> {
        let mut v = self.main.eval(x)?;
        for q in &self.quotients {
            v += q.eval(x)?;
        }
        Ok(v)
    }

    /// Values at every point, computed in parallel; order matches `xs`.
    pub fn eval_many(&self, xs: &[T]) -> Result<Vec<Complex<T>>> {
        xs.par_iter().map(|&x| self.eval(x)).collect()
    }
}
