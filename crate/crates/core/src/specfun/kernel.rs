use num_complex::Complex;

use crate::error::Result;
use crate::scalar::Real;

use super::bessel::j_norm_ladder;
use super::params::{CanonicalMatrix, DunklParameter};

/// Even and odd real parts of `E_k(i t, 1) = A(t) + i B(t)`:
/// `A = j_k(t)`, `B = t/(2(k+1)) j_{k+1}(t)`.
#[inline]
pub fn kernel_parts<T: Real>(k: DunklParameter<T>, t: T) -> Result<(T, T)> {
    let kv = k.value();
    if k.is_fourier() {
        let (s, c) = t.sin_cos();
        return Ok((c, s));
    }
    let l = j_norm_ladder(kv, t, 2)?;
    Ok((l[0], t / (T::lit(2.0) * (kv + T::one())) * l[1]))
}

/// Dunkl kernel `E_k(iλ, x)`.
pub fn dunkl_kernel<T: Real>(k: DunklParameter<T>, lam: T, x: T) -> Result<Complex<T>> {
    let (a, b) = kernel_parts(k, lam * x)?;
    Ok(Complex::new(a, b))
}

/// Transform kernel `e^{(i/2)(d/b λ² + a/b x²)} E_k(-iλ/b, x)`.
pub fn lcdt_kernel<T: Real>(
    k: DunklParameter<T>,
    m: &CanonicalMatrix<T>,
    lam: T,
    x: T,
) -> Result<Complex<T>> {
    let phase = T::lit(0.5) * (m.d_over_b() * lam * lam + m.a_over_b() * x * x);
    let e = dunkl_kernel(k, -lam / m.b, x)?;
    Ok(Complex::from_polar(T::one(), phase) * e)
}

/// Expansion of `(d/dt)^n E_k(i t, 1)` as `Σ c · t^m · j_{k+s}(t)`.
#[derive(Debug, Clone)]
pub struct KernelDerivative<T> {
    k: DunklParameter<T>,
    n: u32,
    /// (coefficient, power of t, order shift)
    terms: Vec<(Complex<T>, u32, u32)>,
}

impl<T: Real> KernelDerivative<T> {
    pub fn new(k: DunklParameter<T>, n: u32) -> Self {
        let kv = k.value();
        let half = T::lit(0.5);
        let mut terms = vec![
            (Complex::new(T::one(), T::zero()), 0u32, 0u32),
            (Complex::new(T::zero(), half / (kv + T::one())), 1, 1),
        ];
        for _ in 0..n {
            let mut next: Vec<(Complex<T>, u32, u32)> = Vec::with_capacity(terms.len() * 2);
            let mut push = |c: Complex<T>, m: u32, s: u32| {
                if let Some(t) = next.iter_mut().find(|t| t.1 == m && t.2 == s) {
                    t.0 += c;
                } else {
                    next.push((c, m, s));
                }
            };
            for &(c, m, s) in &terms {
                if m > 0 {
                    push(c * T::lit(m as f64), m - 1, s);
                }
                // d/dt j_κ(t) = -t/(2(κ+1)) j_{κ+1}(t)
                let kappa = kv + T::lit(s as f64);
                push(-c * (half / (kappa + T::one())), m + 1, s + 1);
            }
            terms = next;
        }
        Self { k, n, terms }
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    /// Number of orders `j_k, j_{k+1}, ...` the expansion needs.
    pub fn ladder_len(&self) -> usize {
        self.terms.iter().map(|t| t.2).max().unwrap_or(0) as usize + 1
    }

    /// `(d/dt)^n E_k(i t, 1)` at `t`.
    pub fn eval_t(&self, t: T) -> Result<Complex<T>> {
        if self.k.is_fourier() {
            let i_n = Complex::new(T::zero(), T::one()).powi(self.n as i32);
            return Ok(i_n * Complex::from_polar(T::one(), t));
        }
        let ladder = j_norm_ladder(self.k.value(), t, self.ladder_len())?;
        Ok(self.eval_with_ladder(t, &ladder))
    }

    /// Same as [`Self::eval_t`] given `j_{k+s}(t)` for `s < ladder_len()`.
    pub fn eval_with_ladder(&self, t: T, ladder: &[T]) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(c, m, s) in &self.terms {
            acc += c * (t.powi(m as i32) * ladder[s as usize]);
        }
        acc
    }

    /// `∂^n_x E_k(iλ, x) = λ^n (d/dt)^n E_k(i t, 1)` at `t = λx`.
    pub fn eval(&self, lam: T, x: T) -> Result<Complex<T>> {
        Ok(self.eval_t(lam * x)? * lam.powi(self.n as i32))
    }
}

/// `∂^n_x E_k(iλ, x)`.
pub fn dunkl_kernel_dx<T: Real>(k: DunklParameter<T>, n: u32, lam: T, x: T) -> Result<Complex<T>> {
    KernelDerivative::new(k, n).eval(lam, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel::j_series;

    fn kp(k: f64) -> DunklParameter<f64> {
        DunklParameter::new(k).unwrap()
    }

    // reference kernel from the series alone
    fn series_kernel(k: f64, lam: f64, x: f64) -> Complex<f64> {
        let t = lam * x;
        Complex::new(j_series(k, t), t / (2.0 * (k + 1.0)) * j_series(k + 1.0, t))
    }

    #[test]
    fn zero_frequency_is_one() {
        for &k in &[-0.5, 0.0, 3.0] {
            assert_eq!(dunkl_kernel(kp(k), 0.0, 17.0).unwrap(), Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn fourier_reduction() {
        let v = dunkl_kernel(kp(-0.5), 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((v - Complex::new(0.0, 1.0)).norm() < 1e-15);
        let s = series_kernel(-0.5, 1.0, std::f64::consts::FRAC_PI_2);
        assert!((v - s).norm() < 1e-14);
    }

    #[test]
    fn modulus_below_one() {
        let v = dunkl_kernel(kp(1.0), 2.0, 0.5).unwrap();
        assert!(v.norm() <= 1.0);
        assert!((v - series_kernel(1.0, 2.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn lcdt_kernel_examples() {
        let m = CanonicalMatrix::new(0.0, 1.0, -1.0, 0.0).unwrap();
        let v = lcdt_kernel(kp(-0.5), &m, 1.0, 1.0).unwrap();
        assert!((v - Complex::from_polar(1.0, -1.0)).norm() < 1e-15);

        let shear = CanonicalMatrix::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let v = lcdt_kernel(kp(0.0), &shear, 0.0, 2.0).unwrap();
        assert!((v - Complex::from_polar(1.0, 2.0)).norm() < 1e-15);

        let l0 = 1.7;
        let v = lcdt_kernel(kp(0.5), &shear, l0, 0.0).unwrap();
        assert!((v - Complex::from_polar(1.0, 0.5 * l0 * l0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_by_finite_difference() {
        for &k in &[-0.5, 0.0, 0.5, 2.0] {
            for n in 1..=3 {
                let lo = KernelDerivative::new(kp(k), n - 1);
                let hi = KernelDerivative::new(kp(k), n);
                for &t in &[0.3, 5.0, 9.7, 33.0] {
                    let h = 1e-4;
                    let fd = (lo.eval_t(t + h).unwrap() - lo.eval_t(t - h).unwrap()) / (2.0 * h);
                    let d = hi.eval_t(t).unwrap();
                    assert!((fd - d).norm() < 1e-7, "k={k} n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn derivative_order_zero_is_kernel() {
        let d = KernelDerivative::new(kp(0.5), 0);
        let v = d.eval(1.3, -2.0).unwrap();
        assert!((v - dunkl_kernel(kp(0.5), 1.3, -2.0).unwrap()).norm() < 1e-15);
    }
}
