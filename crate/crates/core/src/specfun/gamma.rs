use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(z: T) -> T {
    // z is the shifted argument x - 1
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (z + T::lit(i as f64));
    }
    acc
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        // reflection keeps the Lanczos sum away from its poles
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * (T::TAU()).ln() + (z + T::lit(0.5)) * t.ln() - t + lanczos_sum(z).ln()
}

/// Γ(x) for real `x` away from the non-positive integers.
pub fn gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    if x > T::lit(20.0) {
        return ln_gamma(x).exp();
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::TAU().sqrt() * t.powf(z + T::lit(0.5)) * (-t).exp() * lanczos_sum(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn factorials() {
        let mut f = 1.0_f64;
        for n in 1..30 {
            assert!(rel(gamma(n as f64), f) < 1e-13, "n={n}");
            f *= n as f64;
        }
    }

    #[test]
    fn half_integers() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut v = sqrt_pi;
        for n in 0..40 {
            let x = n as f64 + 0.5;
            assert!(rel(gamma(x), v) < 1e-13, "x={x}");
            assert!((ln_gamma(x) - v.ln()).abs() < 1e-13 * v.ln().abs().max(1.0));
            v *= x;
        }
    }

    #[test]
    fn recurrence_over_range() {
        let mut x = 0.5;
        while x < 50.0 {
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 2e-13, "x={x}");
            x += 0.37;
        }
    }

    #[test]
    fn large_log() {
        // Stirling with two correction terms at x = 200
        let x = 200.0_f64;
        let st = (x - 0.5) * x.ln() - x + 0.5 * std::f64::consts::TAU.ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!((ln_gamma(x) - st).abs() < 1e-11);
    }
}
