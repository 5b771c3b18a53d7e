//! Canonical form: a sum of terms `c · x^m · e^{αx²+βx} · Π j_κ(c x)` plus
//! removable quotients `N(x) / x^p` whose numerators are plain term sums.

use std::cmp::Ordering;
use std::sync::{Arc, OnceLock};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative size below which a merged coefficient counts as cancelled.
pub(crate) const DROP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub coef: Complex<T>,
    pub power: u32,
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
    /// (order κ, scale c >= 0), sorted
    pub bessels: Vec<(T, T)>,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn cmp_real<T: Real>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

fn cmp_complex<T: Real>(a: Complex<T>, b: Complex<T>) -> Ordering {
    cmp_real(a.re, b.re).then(cmp_real(a.im, b.im))
}

fn clean<T: Real>(v: T) -> T {
    // folds -0.0 into +0.0 so equal keys compare equal
    if v == T::zero() {
        T::zero()
    } else {
        v
    }
}

impl<T: Real> Term<T> {
    pub fn constant(c: Complex<T>) -> Self {
        Self { coef: c, power: 0, alpha: zero(), beta: zero(), bessels: Vec::new() }
    }

    fn normalize_key(&mut self) {
        self.alpha = Complex::new(clean(self.alpha.re), clean(self.alpha.im));
        self.beta = Complex::new(clean(self.beta.re), clean(self.beta.im));
        for b in &mut self.bessels {
            b.0 = clean(b.0);
            b.1 = clean(b.1.abs());
        }
        self.bessels
            .sort_by(|a, b| cmp_real(a.1, b.1).then(cmp_real(a.0, b.0)));
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.power
            .cmp(&other.power)
            .then(cmp_complex(self.alpha, other.alpha))
            .then(cmp_complex(self.beta, other.beta))
            .then(self.bessels.len().cmp(&other.bessels.len()))
            .then_with(|| {
                for (a, b) in self.bessels.iter().zip(&other.bessels) {
                    let o = cmp_real(a.0, b.0).then(cmp_real(a.1, b.1));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
    }

    fn mul(&self, other: &Self) -> Self {
        let mut bessels = self.bessels.clone();
        bessels.extend_from_slice(&other.bessels);
        let mut t = Self {
            coef: self.coef * other.coef,
            power: self.power + other.power,
            alpha: self.alpha + other.alpha,
            beta: self.beta + other.beta,
            bessels,
        };
        t.normalize_key();
        t
    }

    fn reflect(&self) -> Self {
        let mut t = self.clone();
        if t.power % 2 == 1 {
            t.coef = -t.coef;
        }
        t.beta = -t.beta;
        t.normalize_key();
        t
    }

    fn derivative_into(&self, out: &mut Vec<Self>) {
        let two = T::lit(2.0);
        if self.power > 0 {
            out.push(Self {
                coef: self.coef * T::lit(self.power as f64),
                power: self.power - 1,
                ..self.clone()
            });
        }
        if self.beta != zero() {
            out.push(Self { coef: self.coef * self.beta, ..self.clone() });
        }
        if self.alpha != zero() {
            out.push(Self {
                coef: self.coef * self.alpha * two,
                power: self.power + 1,
                ..self.clone()
            });
        }
        // d/dx j_κ(c x) = -c² x / (2(κ+1)) j_{κ+1}(c x)
        for i in 0..self.bessels.len() {
            let (kappa, c) = self.bessels[i];
            if c == T::zero() {
                continue;
            }
            let mut t = self.clone();
            t.coef = -self.coef * (c * c / (two * (kappa + T::one())));
            t.power += 1;
            t.bessels[i].0 = kappa + T::one();
            t.normalize_key();
            out.push(t);
        }
    }
}

/// Quotient `numer(x) / x^power`; the numerator vanishes to order `power` at 0.
#[derive(Debug, Clone)]
pub struct Quotient<T> {
    pub power: u32,
    pub numer: Vec<Term<T>>,
    pub(crate) taylor: Arc<OnceLock<Vec<Complex<T>>>>,
}

impl<T: PartialEq> PartialEq for Quotient<T> {
    fn eq(&self, other: &Self) -> bool {
        self.power == other.power && self.numer == other.numer
    }
}

impl<T: Real> Quotient<T> {
    fn new(power: u32, numer: Vec<Term<T>>) -> Self {
        Self { power, numer, taylor: Arc::new(OnceLock::new()) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canonical<T> {
    pub terms: Vec<Term<T>>,
    pub quotients: Vec<Quotient<T>>,
}

/// Sorts, merges like terms and drops cancelled coefficients.
fn merge<T: Real>(mut terms: Vec<Term<T>>) -> Vec<Term<T>> {
    for t in &mut terms {
        t.normalize_key();
    }
    terms.sort_by(|a, b| a.key_cmp(b));
    let mut out: Vec<Term<T>> = Vec::with_capacity(terms.len());
    let mut mass = T::zero();
    let tol = T::lit(DROP_TOL);
    let flush = |out: &mut Vec<Term<T>>, mass: T| {
        if let Some(last) = out.last() {
            let c = last.coef.norm();
            if c == T::zero() || c <= tol * mass {
                out.pop();
            }
        }
    };
    for t in terms {
        if t.coef == zero() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.key_cmp(&t) == Ordering::Equal => {
                mass += t.coef.norm();
                last.coef += t.coef;
            }
            _ => {
                flush(&mut out, mass);
                mass = t.coef.norm();
                out.push(t);
            }
        }
    }
    flush(&mut out, mass);
    out
}

impl<T: Real> Default for Canonical<T> {
    fn default() -> Self {
        Self { terms: Vec::new(), quotients: Vec::new() }
    }
}

impl<T: Real> Canonical<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_term(t: Term<T>) -> Self {
        Self::from_parts(vec![t], Vec::new())
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::from_term(Term::constant(c))
    }

    pub fn monomial(m: u32) -> Self {
        Self::from_term(Term { power: m, ..Term::constant(Complex::new(T::one(), T::zero())) })
    }

    pub fn exp_quad(alpha: Complex<T>, beta: Complex<T>, gamma: Complex<T>) -> Self {
        Self::from_term(Term { alpha, beta, ..Term::constant(gamma.exp()) })
    }

    pub fn bessel(order: T, scale: T) -> Self {
        let one = Complex::new(T::one(), T::zero());
        if scale == T::zero() {
            return Self::constant(one);
        }
        Self::from_term(Term { bessels: vec![(order, scale.abs())], ..Term::constant(one) })
    }

    /// Builds a normalized value: merged terms, quotients reduced and merged by power.
    pub fn from_parts(terms: Vec<Term<T>>, quotients: Vec<Quotient<T>>) -> Self {
        let mut terms = terms;
        let mut by_power: Vec<(u32, Vec<Term<T>>)> = Vec::new();
        for q in quotients {
            let mut low = Vec::new();
            for t in merge(q.numer) {
                if t.power >= q.power {
                    terms.push(Term { power: t.power - q.power, ..t });
                } else {
                    low.push(t);
                }
            }
            if low.is_empty() {
                continue;
            }
            match by_power.iter_mut().find(|e| e.0 == q.power) {
                Some(e) => e.1.extend(low),
                None => by_power.push((q.power, low)),
            }
        }
        by_power.sort_by_key(|e| e.0);
        let quotients = by_power
            .into_iter()
            .filter_map(|(p, n)| {
                let n = merge(n);
                (!n.is_empty()).then(|| Quotient::new(p, n))
            })
            .collect();
        Self { terms: merge(terms), quotients }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.quotients.is_empty()
    }

    /// Number of stored terms including quotient numerators.
    pub fn size(&self) -> usize {
        self.terms.len() + self.quotients.iter().map(|q| q.numer.len()).sum::<usize>()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        let mut qs = self.quotients.clone();
        qs.extend_from_slice(&other.quotients);
        Self::from_parts(terms, qs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        if c == zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|t| Term { coef: t.coef * c, ..t.clone() }).collect();
        let qs = self
            .quotients
            .iter()
            .map(|q| Quotient::new(q.power, q.numer.iter().map(|t| Term { coef: t.coef * c, ..t.clone() }).collect()))
            .collect();
        Self::from_parts(terms, qs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prod = |a: &[Term<T>], b: &[Term<T>]| -> Vec<Term<T>> {
            let mut v = Vec::with_capacity(a.len() * b.len());
            for s in a {
                for t in b {
                    v.push(s.mul(t));
                }
            }
            v
        };
        let terms = prod(&self.terms, &other.terms);
        let mut qs = Vec::new();
        for q in &other.quotients {
            qs.push(Quotient::new(q.power, prod(&self.terms, &q.numer)));
        }
        for q in &self.quotients {
            qs.push(Quotient::new(q.power, prod(&q.numer, &other.terms)));
            for r in &other.quotients {
                qs.push(Quotient::new(q.power + r.power, prod(&q.numer, &r.numer)));
            }
        }
        Self::from_parts(terms, qs)
    }

    /// Multiplies by `x^m`.
    pub fn shift(&self, m: u32) -> Self {
        self.mul(&Self::monomial(m))
    }

    pub fn derivative(&self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * 3);
        for t in &self.terms {
            t.derivative_into(&mut terms);
        }
        let mut qs = Vec::with_capacity(self.quotients.len());
        for q in &self.quotients {
            // (N/x^p)' = (x N' - p N) / x^{p+1}
            let mut dn = Vec::new();
            for t in &q.numer {
                t.derivative_into(&mut dn);
            }
            let mut numer: Vec<Term<T>> = dn.into_iter().map(|t| Term { power: t.power + 1, ..t }).collect();
            let p = T::lit(q.power as f64);
            numer.extend(q.numer.iter().map(|t| Term { coef: -t.coef * p, ..t.clone() }));
            qs.push(Quotient::new(q.power + 1, numer));
        }
        Self::from_parts(terms, qs)
    }

    pub fn reflect(&self) -> Self {
        let terms = self.terms.iter().map(Term::reflect).collect();
        let qs = self
            .quotients
            .iter()
            .map(|q| {
                let sign = if q.power % 2 == 1 { -T::one() } else { T::one() };
                Quotient::new(
                    q.power,
                    q.numer
                        .iter()
                        .map(|t| {
                            let r = t.reflect();
                            Term { coef: r.coef * sign, ..r }
                        })
                        .collect(),
                )
            })
            .collect();
        Self::from_parts(terms, qs)
    }

    /// `(u(x) - u(-x)) / x`.
    pub fn odd_quotient(&self) -> Self {
        let diff = merge({
            let mut v = self.terms.clone();
            v.extend(self.terms.iter().map(|t| {
                let r = t.reflect();
                Term { coef: -r.coef, ..r }
            }));
            v
        });
        let mut terms = Vec::with_capacity(diff.len());
        let mut rest = Vec::new();
        for t in diff {
            if t.power >= 1 {
                terms.push(Term { power: t.power - 1, ..t });
            } else {
                rest.push(t);
            }
        }
        let mut qs = Vec::with_capacity(self.quotients.len() + 1);
        if !rest.is_empty() {
            qs.push(Quotient::new(1, rest));
        }
        for q in &self.quotients {
            // N/x^p - R(N)/(-x)^p, then one more power of x
            let sign = if q.power % 2 == 1 { T::one() } else { -T::one() };
            let mut numer = q.numer.clone();
            numer.extend(q.numer.iter().map(|t| {
                let r = t.reflect();
                Term { coef: r.coef * sign, ..r }
            }));
            qs.push(Quotient::new(q.power + 1, numer));
        }
        Self::from_parts(terms, qs)
    }

    /// `Λ_k u = u' + (2k+1)/2 · (u(x) - u(-x))/x`.
    pub fn dunkl(&self, k: T) -> Self {
        let d = self.derivative();
        let c = (T::lit(2.0) * k + T::one()) * T::lit(0.5);
        if c == T::zero() {
            return d;
        }
        d.add(&self.odd_quotient().scale(Complex::new(c, T::zero())))
    }

    /// `Λ_k u - i (d/b) x u`.
    pub fn lcd(&self, k: T, d_over_b: T) -> Self {
        let base = self.dunkl(k);
        if d_over_b == T::zero() {
            return base;
        }
        base.add(&self.shift(1).scale(Complex::new(T::zero(), -d_over_b)))
    }

    pub fn iterate_lcd(&self, k: T, d_over_b: T, n: usize, budget: usize) -> Result<Self> {
        let mut cur = self.clone();
        for step in 0..n {
            cur = cur.lcd(k, d_over_b);
            if cur.size() > budget {
                return Err(Error::Resource(format!(
                    "operator iterate {} of {n} holds {} terms, budget is {budget}",
                    step + 1,
                    cur.size()
                )));
            }
        }
        Ok(cur)
    }

    /// Largest `|β| + sqrt|α| + max c` over all terms, a scale for the Taylor radius.
    pub(crate) fn frequency_scale(terms: &[Term<T>]) -> T {
        terms.iter().fold(T::zero(), |m, t| {
            let c = t.bessels.iter().fold(T::zero(), |a, b| a + b.1);
            m.max(t.beta.norm() + t.alpha.norm().sqrt() + c)
        })
    }

    /// True when `self(-x) == -self(x)` structurally.
    pub fn is_odd(&self) -> bool {
        self.add(&self.reflect()).is_zero()
    }
}
