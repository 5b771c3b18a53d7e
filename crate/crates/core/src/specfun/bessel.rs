//! Normalized Bessel function `j_ν(x) = Γ(ν+1) (2/x)^ν J_ν(x)`.
//!
//! Three regimes: the defining power series for `|x| <= SERIES_MAX`, Miller's
//! backward recurrence in the middle band, and the Hankel asymptotic expansion
//! for large arguments. Miller normalization uses
//! `(x/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! J_{ν+2k}(x)`, which needs no gamma values and
//! yields a whole ladder of orders `ν, ν+1, ...` in one sweep.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::gamma::ln_gamma;

pub(crate) const SERIES_MAX: f64 = 8.0;
pub(crate) const RANGE_MAX: f64 = 1e8;
const HANKEL_MIN: f64 = 30.0;
const MAX_TERMS: usize = 400;

fn hankel_threshold(nu: f64) -> f64 {
    HANKEL_MIN.max(2.0 * nu * nu)
}

fn check<T: Real>(nu: T, x: T) -> Result<()> {
    if !x.is_finite() || !nu.is_finite() {
        return Err(Error::Range(format!("non-finite argument j_{nu}({x})")));
    }
    if nu < T::lit(-0.5) {
        return Err(Error::param("order", format!("order must be >= -1/2, got {nu}")));
    }
    if x.abs() > T::lit(RANGE_MAX) {
        return Err(Error::Range(format!("|x| = {} exceeds {RANGE_MAX:e}", x.abs())));
    }
    Ok(())
}

/// `j_ν(x)` for `ν >= -1/2`.
pub fn j_norm<T: Real>(nu: T, x: T) -> Result<T> {
    check(nu, x)?;
    let ax = x.abs();
    if ax == T::zero() {
        return Ok(T::one());
    }
    if nu == T::lit(-0.5) {
        return Ok(ax.cos());
    }
    if nu == T::lit(0.5) {
        return Ok(ax.sin() / ax);
    }
    Ok(if ax <= T::lit(SERIES_MAX) {
        j_series(nu, ax)
    } else if ax.to_f64_lossy() >= hankel_threshold(nu.to_f64_lossy()) {
        j_hankel(nu, ax)
    } else {
        j_miller(nu, ax, 1)[0]
    })
}

/// `[j_ν(x), j_{ν+1}(x), ..., j_{ν+count-1}(x)]`.
pub fn j_norm_ladder<T: Real>(nu: T, x: T, count: usize) -> Result<Vec<T>> {
    check(nu, x)?;
    let ax = x.abs();
    if count == 0 {
        return Ok(Vec::new());
    }
    if ax == T::zero() {
        return Ok(vec![T::one(); count]);
    }
    if nu == T::lit(-0.5) && count <= 2 {
        let (s, c) = ax.sin_cos();
        return Ok([c, s / ax][..count].to_vec());
    }
    let top = nu + T::lit((count - 1) as f64);
    Ok(if ax <= T::lit(SERIES_MAX) {
        (0..count).map(|s| j_series(nu + T::lit(s as f64), ax)).collect()
    } else if ax.to_f64_lossy() >= hankel_threshold(top.to_f64_lossy()) {
        (0..count).map(|s| j_hankel(nu + T::lit(s as f64), ax)).collect()
    } else {
        j_miller(nu, ax, count)
    })
}

pub(crate) fn j_series<T: Real>(nu: T, x: T) -> T {
    let q = -x * x / T::lit(4.0);
    let eps = T::epsilon() * T::lit(0.5);
    let mut term = T::one();
    let mut sum = T::one();
    for n in 1..MAX_TERMS {
        let nf = T::lit(n as f64);
        term *= q / (nf * (nf + nu));
        sum += term;
        if term.abs() <= eps * sum.abs() && nf * nf > -q {
            break;
        }
    }
    sum
}

pub(crate) fn j_hankel<T: Real>(nu: T, x: T) -> T {
    let mu4 = T::lit(4.0) * nu * nu;
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut last = T::infinity();
    for k in 1..60 {
        let kf = T::lit(k as f64);
        let odd = T::lit((2 * k - 1) as f64);
        term = term * (mu4 - odd * odd) / (kf * T::lit(8.0) * x);
        let mag = term.abs();
        if mag > last || mag <= T::epsilon() * T::lit(1e-2) {
            break;
        }
        last = mag;
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
    }
    let phi = (nu * T::lit(0.5) + T::lit(0.25)) * T::PI();
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    let amp = (T::lit(2.0) / (T::PI() * x)).sqrt();
    let big_j = amp * (p * cos_chi - q * sin_chi);
    let log_scale = ln_gamma(nu + T::one()) + nu * (T::lit(2.0) / x).ln();
    log_scale.exp() * big_j
}

pub(crate) fn j_miller<T: Real>(nu: T, x: T, count: usize) -> Vec<T> {
    let xf = x.to_f64_lossy();
    let mut top = (xf + 50.0 + 2.0 * xf.sqrt()).ceil() as usize + count;
    if top % 2 == 1 {
        top += 1;
    }
    // r_k = Γ(ν+k) / (k! Γ(ν+1)), with r_0 term folded in as weight 1 on J_ν
    let mut r = vec![T::one(); top / 2 + 1];
    for k in 2..r.len() {
        let kf = T::lit(k as f64);
        r[k] = r[k - 1] * (nu + kf - T::one()) / kf;
    }
    let big = T::lit(1e200);
    let tiny = T::lit(1e-200);
    let mut ladder = vec![T::zero(); count];
    let mut a_next = T::zero();
    let mut a = T::lit(1e-30);
    let mut norm = T::zero();
    let two_over_x = T::lit(2.0) / x;
    for m in (1..=top).rev() {
        if m < count {
            ladder[m] = a;
        }
        if m % 2 == 0 {
            norm += (nu + T::lit(m as f64)) * r[m / 2] * a;
        }
        let a_prev = two_over_x * (nu + T::lit(m as f64)) * a - a_next;
        a_next = a;
        a = a_prev;
        if a.abs() > big {
            a *= tiny;
            a_next *= tiny;
            norm *= tiny;
            for v in ladder.iter_mut() {
                *v *= tiny;
            }
        }
    }
    ladder[0] = a;
    norm += a;
    let mut out = Vec::with_capacity(count);
    let mut poch = T::one();
    let mut pow = T::one();
    for (s, &v) in ladder.iter().enumerate() {
        if s > 0 {
            poch *= nu + T::lit(s as f64);
            pow *= two_over_x;
        }
        out.push(poch * pow * v / norm);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn origin_is_one() {
        assert_eq!(j_norm(0.7, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn fourier_order() {
        let v = j_norm(-0.5, std::f64::consts::PI).unwrap();
        assert!((v + 1.0).abs() < 1e-15);
        // general path (series) for order -1/2 agrees with cos
        for &x in &[0.3, 2.0, 7.5] {
            assert!((j_series(-0.5, x) - f64::cos(x)).abs() < 1e-13);
        }
        for &x in &[9.0, 20.0, 29.0] {
            assert!((j_miller(-0.5, x, 1)[0] - f64::cos(x)).abs() < 1e-13, "x={x}");
        }
        for &x in &[31.0, 100.0, 1234.5] {
            assert!((j_hankel(-0.5, x) - f64::cos(x)).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn half_order_closed_form() {
        // j_{3/2}(x) = 3 (sin x - x cos x) / x^3
        for &x in &[0.5_f64, 3.0, 9.0, 25.0, 60.0] {
            let want = 3.0 * (x.sin() - x * x.cos()) / x.powi(3);
            let got = j_norm_ladder(0.5, x, 2).unwrap()[1];
            assert!((got - want).abs() < 1e-14, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(j_norm(0.0_f64, 2.404826).unwrap().abs() < 1e-5);
        assert!(j_norm(0.0_f64, 2.404_825_557_695_773).unwrap().abs() < 1e-14);
    }

    #[test]
    fn regimes_agree_on_overlap() {
        for &nu in &[-0.5, 0.0, 0.3, 1.0, 2.0, 3.0, 7.5] {
            for i in 0..=20 {
                let x = 5.0 + 3.0 * i as f64 / 20.0;
                let s = j_series(nu, x);
                let m = j_miller(nu, x, 1)[0];
                assert!((s - m).abs() < 1e-12 * j_envelope(nu, x), "nu={nu} x={x}: {s} {m}");
            }
        }
        for &nu in &[-0.5, 0.0, 0.5, 1.0, 2.0, 3.0] {
            for i in 0..=20 {
                let x = 30.0 + 20.0 * i as f64 / 20.0;
                let h = j_hankel(nu, x);
                let m = j_miller(nu, x, 1)[0];
                let scale = j_hankel(nu, x).abs().max(j_envelope(nu, x));
                assert!((h - m).abs() < 1e-12 * scale, "nu={nu} x={x}: {h} {m}");
            }
        }
    }

    // size of j_ν near x, ignoring the oscillation
    fn j_envelope(nu: f64, x: f64) -> f64 {
        (ln_gamma(nu + 1.0) + nu * (2.0 / x).ln()).exp() * (2.0 / (std::f64::consts::PI * x)).sqrt()
    }

    #[test]
    fn ladder_matches_single_orders() {
        for &x in &[0.1_f64, 4.0, 8.5, 15.0, 45.0, 300.0] {
            let l = j_norm_ladder(0.5, x, 5).unwrap();
            for (s, &v) in l.iter().enumerate() {
                let w = j_norm(0.5 + s as f64, x).unwrap();
                assert!((v - w).abs() < 1e-12 * w.abs().max(j_envelope(0.5 + s as f64, x)), "x={x} s={s}");
            }
        }
    }

    #[test]
    fn three_term_recurrence() {
        // j_ν(t) = j_{ν+1}(t) - t²/(4(ν+1)(ν+2)) j_{ν+2}(t)
        for &nu in &[-0.5_f64, 0.0, 1.5] {
            for &t in &[0.7_f64, 6.0, 11.0, 40.0, 200.0] {
                let l = j_norm_ladder(nu, t, 3).unwrap();
                let rhs = l[1] - t * t / (4.0 * (nu + 1.0) * (nu + 2.0)) * l[2];
                assert!((l[0] - rhs).abs() < 1e-11 * j_envelope(nu, t).max(1.0), "nu={nu} t={t}");
            }
        }
    }

    #[test]
    fn even_in_x() {
        for &x in &[0.3, 9.1, 77.0] {
            assert_eq!(j_norm(1.2, x).unwrap(), j_norm(1.2, -x).unwrap());
        }
    }

    #[test]
    fn classical_values() {
        // J_0(10) and J_1(10) from standard tables
        let j0 = -0.245_935_764_451_348_3;
        assert!(close(j_norm(0.0, 10.0).unwrap(), j0, 1e-13));
        let j1 = 0.043_472_746_168_861_44;
        // j_1(x) = 2 J_1(x) / x
        assert!(close(j_norm(1.0, 10.0).unwrap(), 2.0 * j1 / 10.0, 1e-12));
    }

    #[test]
    fn range_guard() {
        assert!(matches!(j_norm(0.0, 1e9), Err(Error::Range(_))));
        assert!(matches!(j_norm(0.0, f64::NAN), Err(Error::Range(_))));
    }
}
