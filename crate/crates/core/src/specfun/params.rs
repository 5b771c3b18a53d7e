use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Multiplicity parameter `k` of the Dunkl weight `|x|^(2k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct DunklParameter<T = f64>(T);

impl<T: Real> DunklParameter<T> {
    pub fn new(k: T) -> Result<Self> {
        if !k.is_finite() || k < T::lit(-0.5) {
            return Err(Error::param("k", format!("must be finite and >= -1/2, got {k}")));
        }
        Ok(Self(k))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    /// `2^(k+1) Γ(k+1)`, the normalizer of the Dunkl measure.
    pub fn measure_normalizer(self) -> T {
        let kp1 = self.0 + T::one();
        (kp1 * T::LN_2() + super::ln_gamma(kp1)).exp()
    }

    #[inline]
    pub fn is_fourier(self) -> bool {
        self.0 == T::lit(-0.5)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for DunklParameter<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let k = T::deserialize(d)?;
        Self::new(k).map_err(serde::de::Error::custom)
    }
}

const DET_TOL: f64 = 1e-12;
const B_MIN: f64 = 1e-9;

/// Unimodular parameter matrix `(a, b; c, d)` of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalMatrix<T = f64> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

#[derive(Deserialize)]
struct RawMatrix<T> {
    a: T,
    b: T,
    c: T,
    d: T,
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for CanonicalMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = RawMatrix::<T>::deserialize(d)?;
        Self::new(m.a, m.b, m.c, m.d).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> CanonicalMatrix<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        for (name, v) in [("matrix.a", a), ("matrix.b", b), ("matrix.c", c), ("matrix.d", d)] {
            if !v.is_finite() {
                return Err(Error::param(name, "entry must be finite"));
            }
        }
        if b.abs() < T::lit(B_MIN) {
            return Err(Error::param("matrix.b", format!("|b| must be at least {B_MIN:e}, got {b}")));
        }
        let det = a * d - b * c;
        if (det - T::one()).abs() > T::lit(DET_TOL) {
            return Err(Error::param("matrix", format!("determinant must be 1, got {det}")));
        }
        Ok(Self { a, b, c, d })
    }

    /// `(0, 1; -1, 0)`, for which the transform is a rescaled Dunkl transform.
    pub fn dunkl() -> Self {
        Self { a: T::zero(), b: T::one(), c: -T::one(), d: T::zero() }
    }

    /// `(cos θ, -sin θ; sin θ, cos θ)`.
    pub fn rotation(theta: T) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        Self::new(c, -s, s, c)
    }

    /// `(d, -b; -c, a)`.
    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Same `a/b` and `d/b` ratios with `b` scaled by `s`.
    pub fn scaled_b(&self, s: T) -> Result<Self> {
        let b = self.b * s;
        let a = self.a * s;
        let d = self.d * s;
        let c = (a * d - T::one()) / b;
        Self::new(a, b, c, d)
    }

    #[inline]
    pub fn d_over_b(&self) -> T {
        self.d / self.b
    }

    #[inline]
    pub fn a_over_b(&self) -> T {
        self.a / self.b
    }

    /// `(i b)^(-(k+1))` on the principal branch.
    pub fn prefactor(&self, k: DunklParameter<T>) -> Complex<T> {
        let kp1 = k.value() + T::one();
        let half_pi = T::FRAC_PI_2();
        let arg = if self.b > T::zero() { half_pi } else { -half_pi };
        let log = Complex::new(self.b.abs().ln(), arg);
        (-log * kp1).exp()
    }
}
