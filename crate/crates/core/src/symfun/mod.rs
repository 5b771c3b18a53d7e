//! Symbolic test functions closed under differentiation, reflection and the
//! Dunkl-type operators.
//!
//! A [`SymExpr`] is the user-facing tree (and the JSON input format). All
//! calculus happens on its [`Canonical`] form, which collects coefficients over
//! the basis `x^m · e^{αx²+βx} · Π j_κ(c x)`.

mod canonical;
mod eval;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use canonical::{Canonical, Quotient, Term};
pub use eval::Evaluator;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::{CanonicalMatrix, DunklParameter};

/// Default cap on `n` for [`iterate_op`].
pub const MAX_ITERATES: usize = 60;
/// Default cap on stored terms during iteration.
pub const TERM_BUDGET: usize = 50_000;

/// Expression tree. Serialized with a `node` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum SymExpr<T = f64> {
    Constant {
        value: Complex<T>,
    },
    Monomial {
        power: u32,
    },
    /// `e^{αx² + βx + γ}`
    ExpQuad {
        alpha: Complex<T>,
        beta: Complex<T>,
        gamma: Complex<T>,
    },
    /// `j_κ(c x)`
    Bessel {
        order: T,
        scale: T,
    },
    /// `(u(x) - u(-x)) / x`, equal to `2 u'(0)` at the origin
    OddQuotient {
        child: Box<SymExpr<T>>,
    },
    /// `N(x) / x^p` where `N` vanishes to order `p` at 0; produced when
    /// differentiating odd quotients that do not reduce to polynomials
    Quotient {
        numerator: Box<SymExpr<T>>,
        power: u32,
    },
    Sum {
        terms: Vec<SymExpr<T>>,
    },
    Product {
        factors: Vec<SymExpr<T>>,
    },
    Scale {
        factor: Complex<T>,
        child: Box<SymExpr<T>>,
    },
}

fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

impl<T: Real> SymExpr<T> {
    pub fn zero() -> Self {
        Self::Constant { value: c(T::zero(), T::zero()) }
    }

    pub fn constant(value: Complex<T>) -> Self {
        Self::Constant { value }
    }

    pub fn real(v: T) -> Self {
        Self::constant(c(v, T::zero()))
    }

    pub fn monomial(power: u32) -> Self {
        Self::Monomial { power }
    }

    pub fn exp_quad(alpha: Complex<T>, beta: Complex<T>, gamma: Complex<T>) -> Self {
        Self::ExpQuad { alpha, beta, gamma }
    }

    /// `e^{-a x²}`.
    pub fn gaussian(a: T) -> Self {
        Self::exp_quad(c(-a, T::zero()), c(T::zero(), T::zero()), c(T::zero(), T::zero()))
    }

    /// `e^{(i/2) s x²}`.
    pub fn chirp(s: T) -> Self {
        Self::exp_quad(c(T::zero(), s * T::lit(0.5)), c(T::zero(), T::zero()), c(T::zero(), T::zero()))
    }

    pub fn bessel(order: T, scale: T) -> Self {
        Self::Bessel { order, scale }
    }

    pub fn odd_quotient(child: Self) -> Self {
        Self::OddQuotient { child: Box::new(child) }
    }

    pub fn sum(terms: Vec<Self>) -> Self {
        Self::Sum { terms }
    }

    pub fn product(factors: Vec<Self>) -> Self {
        Self::Product { factors }
    }

    pub fn scale(factor: Complex<T>, child: Self) -> Self {
        Self::Scale { factor, child: Box::new(child) }
    }

    /// `x^m e^{-a x²}`.
    pub fn hermite_type(m: u32, a: T) -> Self {
        if m == 0 {
            return Self::gaussian(a);
        }
        Self::product(vec![Self::monomial(m), Self::gaussian(a)])
    }

    /// `E_k(iλ, x) = j_k(λx) + iλx/(2(k+1)) j_{k+1}(λx)` as a tree in `x`.
    pub fn dunkl_kernel(k: DunklParameter<T>, lam: T) -> Self {
        let kv = k.value();
        let s = lam.abs();
        let odd = Self::scale(
            c(T::zero(), lam / (T::lit(2.0) * (kv + T::one()))),
            Self::product(vec![Self::monomial(1), Self::bessel(kv + T::one(), s)]),
        );
        Self::sum(vec![Self::bessel(kv, s), odd])
    }

    /// `E^M_k(λ, x)` as a tree in `x`.
    pub fn lcdt_kernel(k: DunklParameter<T>, m: &CanonicalMatrix<T>, lam: T) -> Self {
        let phase = T::lit(0.5) * m.d_over_b() * lam * lam;
        Self::scale(
            Complex::from_polar(T::one(), phase),
            Self::product(vec![Self::chirp(m.a_over_b()), Self::dunkl_kernel(k, -lam / m.b)]),
        )
    }

    /// Checks the structural invariants of every node.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { value } => finite(*value, "constant.value"),
            Self::Monomial { .. } => Ok(()),
            Self::ExpQuad { alpha, beta, gamma } => {
                finite(*alpha, "exp_quad.alpha")?;
                finite(*beta, "exp_quad.beta")?;
                finite(*gamma, "exp_quad.gamma")?;
                if alpha.re > T::zero() {
                    return Err(Error::param("exp_quad.alpha", "real part must be <= 0"));
                }
                Ok(())
            }
            Self::Bessel { order, scale } => {
                if !order.is_finite() || *order < T::lit(-0.5) {
                    return Err(Error::param("bessel.order", "must be >= -1/2"));
                }
                if !scale.is_finite() {
                    return Err(Error::param("bessel.scale", "must be finite"));
                }
                Ok(())
            }
            Self::OddQuotient { child } => child.validate(),
            Self::Quotient { numerator, .. } => numerator.validate(),
            Self::Sum { terms } => terms.iter().try_for_each(Self::validate),
            Self::Product { factors } => factors.iter().try_for_each(Self::validate),
            Self::Scale { factor, child } => {
                finite(*factor, "scale.factor")?;
                child.validate()
            }
        }
    }

    /// Canonical form of the tree.
    pub fn canonical(&self) -> Canonical<T> {
        match self {
            Self::Constant { value } => Canonical::constant(*value),
            Self::Monomial { power } => Canonical::monomial(*power),
            Self::ExpQuad { alpha, beta, gamma } => Canonical::exp_quad(*alpha, *beta, *gamma),
            Self::Bessel { order, scale } => Canonical::bessel(*order, *scale),
            Self::OddQuotient { child } => child.canonical().odd_quotient(),
            Self::Quotient { numerator, power } => {
                let n = numerator.canonical();
                let mut qs = Vec::new();
                if !n.terms.is_empty() {
                    qs.push(Quotient { power: *power, numer: n.terms, taylor: Default::default() });
                }
                for q in n.quotients {
                    qs.push(Quotient { power: q.power + power, numer: q.numer, taylor: Default::default() });
                }
                Canonical::from_parts(Vec::new(), qs)
            }
            Self::Sum { terms } => terms
                .iter()
                .fold(Canonical::zero(), |acc, t| acc.add(&t.canonical())),
            Self::Product { factors } => factors
                .iter()
                .fold(Canonical::constant(c(T::one(), T::zero())), |acc, f| acc.mul(&f.canonical())),
            Self::Scale { factor, child } => child.canonical().scale(*factor),
        }
    }

    pub fn evaluator(&self) -> Evaluator<T> {
        Evaluator::new(&self.canonical())
    }
}

fn finite<T: Real>(v: Complex<T>, field: &str) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, "must be finite"))
    }
}

fn term_expr<T: Real>(t: &Term<T>) -> SymExpr<T> {
    let mut factors = Vec::new();
    if t.power > 0 {
        factors.push(SymExpr::monomial(t.power));
    }
    let z = c(T::zero(), T::zero());
    if t.alpha != z || t.beta != z {
        factors.push(SymExpr::exp_quad(t.alpha, t.beta, z));
    }
    for &(order, scale) in &t.bessels {
        factors.push(SymExpr::bessel(order, scale));
    }
    let body = match factors.len() {
        0 => return SymExpr::constant(t.coef),
        1 => factors.pop().expect("one factor"),
        _ => SymExpr::product(factors),
    };
    if t.coef == c(T::one(), T::zero()) {
        body
    } else {
        SymExpr::scale(t.coef, body)
    }
}

fn terms_expr<T: Real>(terms: &[Term<T>]) -> SymExpr<T> {
    match terms.len() {
        0 => SymExpr::zero(),
        1 => term_expr(&terms[0]),
        _ => SymExpr::sum(terms.iter().map(term_expr).collect()),
    }
}

impl<T: Real> Canonical<T> {
    /// Back to a tree; odd numerators over `x` become odd-quotient nodes.
    pub fn to_expr(&self) -> SymExpr<T> {
        let mut parts = Vec::new();
        if !self.terms.is_empty() {
            parts.push(terms_expr(&self.terms));
        }
        for q in &self.quotients {
            let numer = Canonical::from_parts(q.numer.clone(), Vec::new());
            if q.power == 1 && numer.is_odd() {
                let half = numer.scale(c(T::lit(0.5), T::zero()));
                parts.push(SymExpr::odd_quotient(terms_expr(&half.terms)));
            } else {
                parts.push(SymExpr::Quotient { numerator: Box::new(terms_expr(&q.numer)), power: q.power });
            }
        }
        match parts.len() {
            0 => SymExpr::zero(),
            1 => parts.pop().expect("one part"),
            _ => SymExpr::sum(parts),
        }
    }
}

/// Value of `e` at `x`.
pub fn evaluate<T: Real>(e: &SymExpr<T>, x: T) -> Result<Complex<T>> {
    if !x.is_finite() {
        return Err(Error::Range(format!("evaluation point {x} is not finite")));
    }
    e.evaluator().eval(x)
}

pub fn differentiate<T: Real>(e: &SymExpr<T>) -> SymExpr<T> {
    e.canonical().derivative().to_expr()
}

/// `x ↦ e(-x)`, built structurally.
pub fn reflect<T: Real>(e: &SymExpr<T>) -> SymExpr<T> {
    match e {
        SymExpr::Constant { .. } | SymExpr::Bessel { .. } | SymExpr::OddQuotient { .. } => e.clone(),
        SymExpr::Monomial { power } => {
            if power % 2 == 0 {
                e.clone()
            } else {
                SymExpr::scale(c(-T::one(), T::zero()), e.clone())
            }
        }
        SymExpr::ExpQuad { alpha, beta, gamma } => SymExpr::exp_quad(*alpha, -*beta, *gamma),
        SymExpr::Quotient { numerator, power } => {
            let inner = SymExpr::Quotient { numerator: Box::new(reflect(numerator)), power: *power };
            if power % 2 == 0 {
                inner
            } else {
                SymExpr::scale(c(-T::one(), T::zero()), inner)
            }
        }
        SymExpr::Sum { terms } => SymExpr::sum(terms.iter().map(reflect).collect()),
        SymExpr::Product { factors } => SymExpr::product(factors.iter().map(reflect).collect()),
        SymExpr::Scale { factor, child } => SymExpr::scale(*factor, reflect(child)),
    }
}

/// `Λ_k e = e' + (2k+1)/2 · (e(x) - e(-x))/x`.
pub fn apply_dunkl<T: Real>(k: DunklParameter<T>, e: &SymExpr<T>) -> SymExpr<T> {
    e.canonical().dunkl(k.value()).to_expr()
}

/// `Λ_{k,M} e = Λ_k e - i(d/b) x e`.
pub fn apply_lcd<T: Real>(k: DunklParameter<T>, m: &CanonicalMatrix<T>, e: &SymExpr<T>) -> SymExpr<T> {
    e.canonical().lcd(k.value(), m.d_over_b()).to_expr()
}

/// `Λ_{k,M}^n e` with canonical simplification after every step.
pub fn iterate_op<T: Real>(
    k: DunklParameter<T>,
    m: &CanonicalMatrix<T>,
    e: &SymExpr<T>,
    n: usize,
) -> Result<SymExpr<T>> {
    Ok(iterate_canonical(k, m, &e.canonical(), n)?.to_expr())
}

/// Same as [`iterate_op`] on a canonical form.
pub fn iterate_canonical<T: Real>(
    k: DunklParameter<T>,
    m: &CanonicalMatrix<T>,
    e: &Canonical<T>,
    n: usize,
) -> Result<Canonical<T>> {
    if n > MAX_ITERATES {
        return Err(Error::param("n", format!("at most {MAX_ITERATES} iterates, got {n}")));
    }
    e.iterate_lcd(k.value(), m.d_over_b(), n, TERM_BUDGET)
}

#[cfg(test)]
mod tests;
