//! Test-function corpus: Schwartz functions given symbolically and
//! compact-spectrum functions defined by a smooth bump on the transform side.

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{build_rule, QuadratureRule, SampledFunction};
use crate::scalar::Real;
use crate::specfun::{CanonicalMatrix, DunklParameter};
use crate::symfun::SymExpr;
use crate::operators::SpectralPipeline;
use crate::transform::{LcdtPlan, Spectrum};

/// Nodes per Gauss-Legendre panel for every corpus rule.
pub const NODES_PER_PANEL: usize = 16;
/// Maximum kernel phase change across one panel.
pub const PANEL_PHASE: f64 = 10.0;
/// Physical extent of a bump member is `X_SCALE · |b| / width`.
pub const X_SCALE: f64 = 400.0;
/// Frequency extent of a bump member relative to its outermost endpoint.
pub const LAMBDA_MARGIN: f64 = 1.15;

/// Sum of bumps `e^{s - s/(1-t²)}`, each rescaled to an interval of the frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpSpectrum<T = f64> {
    pub intervals: Vec<(T, T)>,
    pub smoothness: T,
}

#[derive(Deserialize)]
struct BumpRepr<T> {
    intervals: Vec<(T, T)>,
    smoothness: Option<T>,
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for BumpSpectrum<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BumpRepr::<T>::deserialize(d)?;
        Self::new(r.intervals, r.smoothness.unwrap_or(T::one())).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> BumpSpectrum<T> {
    pub fn new(mut intervals: Vec<(T, T)>, smoothness: T) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::param("bump.intervals", "at least one interval is required"));
        }
        if !(smoothness > T::zero()) || !smoothness.is_finite() {
            return Err(Error::param("bump.smoothness", "must be positive and finite"));
        }
        for &(a, b) in &intervals {
            if !a.is_finite() || !b.is_finite() || !(a < b) {
                return Err(Error::param("bump.intervals", format!("invalid interval [{a}, {b}]")));
            }
        }
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::param("bump.intervals", "intervals overlap"));
        }
        Ok(Self { intervals, smoothness })
    }

    pub fn single(l1: T, l2: T) -> Result<Self> {
        Self::new(vec![(l1, l2)], T::one())
    }

    /// Bumps on `[l1, l2]` and its mirror image.
    pub fn symmetric(l1: T, l2: T) -> Result<Self> {
        Self::new(vec![(-l2, -l1), (l1, l2)], T::one())
    }

    pub fn eval(&self, lam: T) -> T {
        let s = self.smoothness;
        self.intervals
            .iter()
            .map(|&(a, b)| {
                let t = (lam + lam - a - b) / (b - a);
                if t.abs() < T::one() {
                    (s - s / (T::one() - t * t)).exp()
                } else {
                    T::zero()
                }
            })
            .fold(T::zero(), |x, y| x + y)
    }

    pub fn max_abs(&self) -> T {
        self.intervals.iter().map(|&(a, b)| a.abs().max(b.abs())).fold(T::zero(), T::max)
    }

    pub fn min_width(&self) -> T {
        self.intervals.iter().map(|&(a, b)| b - a).fold(T::infinity(), T::min)
    }

    /// `σ = sup |λ/b|` over the support.
    pub fn sigma(&self, b: T) -> T {
        self.max_abs() / b.abs()
    }

    /// `δ = inf |λ/b|²` over the support.
    pub fn delta(&self, b: T) -> T {
        let d = self
            .intervals
            .iter()
            .map(|&(a, c)| if a <= T::zero() && c >= T::zero() { T::zero() } else { a.abs().min(c.abs()) })
            .fold(T::infinity(), T::min);
        (d / b.abs()).powi(2)
    }

    /// `sup |P(λ/b)|` over the support, by dense sampling.
    pub fn multiplier_sup<F: Fn(T) -> T>(&self, b: T, p: F) -> T {
        let steps = 4000;
        self.intervals
            .iter()
            .flat_map(|&(a, c)| (0..=steps).map(move |i| a + (c - a) * T::lit(i as f64 / steps as f64)))
            .map(|l| p(l / b).abs())
            .fold(T::zero(), T::max)
    }

    /// Physical and frequency rules resolving the realized function.
    pub fn rules(&self, k: DunklParameter<T>, b: T) -> Result<(Arc<QuadratureRule<T>>, Arc<QuadratureRule<T>>)> {
        let x_max = T::lit(X_SCALE) * b.abs() / self.min_width();
        let l_max = T::lit(LAMBDA_MARGIN) * self.max_abs();
        let panels = (x_max * l_max / (b.abs() * T::lit(PANEL_PHASE))).ceil().to_usize().unwrap_or(1).max(1) * 2;
        let x_rule = Arc::new(build_rule(k, x_max, panels, NODES_PER_PANEL)?);
        let l_rule = Arc::new(build_rule(k, l_max, panels, NODES_PER_PANEL)?);
        Ok((x_rule, l_rule))
    }

    /// Constructed spectrum on the nodes of `lambda_rule`.
    pub fn spectrum(&self, matrix: &CanonicalMatrix<T>, lambda_rule: Arc<QuadratureRule<T>>) -> Result<Spectrum<T>> {
        Spectrum::from_fn(lambda_rule, Some(*matrix), |l| num_complex::Complex::new(self.eval(l), T::zero()), self.label())
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.intervals.iter().map(|(a, b)| format!("[{a},{b}]")).collect();
        format!("bump{}", parts.join("u"))
    }

    /// Realizes the physical function by inverse transform on the default rules.
    pub fn realize(&self, k: DunklParameter<T>, matrix: &CanonicalMatrix<T>) -> Result<BumpMember<T>> {
        let (x_rule, l_rule) = self.rules(k, matrix.b)?;
        let plan = Arc::new(LcdtPlan::new(*matrix, x_rule, l_rule.clone())?);
        let spectrum = self.spectrum(matrix, l_rule)?;
        let mut function = plan.inverse(&spectrum)?;
        function.label = self.label();
        Ok(BumpMember { bump: self.clone(), plan, spectrum, function })
    }
}

/// A realized compact-spectrum function with its constructed spectrum.
#[derive(Debug, Clone)]
pub struct BumpMember<T: Real = f64> {
    pub bump: BumpSpectrum<T>,
    pub plan: Arc<LcdtPlan<T>>,
    pub spectrum: Spectrum<T>,
    pub function: SampledFunction<T>,
}

impl<T: Real> BumpMember<T> {
    /// Tapered pipeline fed with the realized physical values, as for user data.
    pub fn pipeline(&self) -> Result<SpectralPipeline<T>> {
        SpectralPipeline::tapered(self.plan.clone(), self.function.clone())
    }
}

/// Physical extent of the symbolic corpus rules.
pub const SYM_X_MAX: f64 = 12.0;
/// Frequency extent of the symbolic corpus rules.
pub const SYM_LAMBDA_MAX: f64 = 16.0;

/// Rules for symbolic corpus members; panels keep the kernel phase per panel below 10.
pub fn symbolic_rules<T: Real>(
    k: DunklParameter<T>,
    b: T,
) -> Result<(Arc<QuadratureRule<T>>, Arc<QuadratureRule<T>>)> {
    let x = T::lit(SYM_X_MAX);
    let l = T::lit(SYM_LAMBDA_MAX);
    let per_unit = |other: T| (other / (b.abs() * T::lit(PANEL_PHASE))).max(T::lit(2.0));
    let xp = (x * per_unit(l)).ceil().to_usize().unwrap_or(2) * 2;
    let lp = (l * per_unit(x)).ceil().to_usize().unwrap_or(2) * 2;
    Ok((
        Arc::new(build_rule(k, x, xp, NODES_PER_PANEL)?),
        Arc::new(build_rule(k, l, lp, NODES_PER_PANEL)?),
    ))
}

/// Named Schwartz members: Gaussian, x·Gaussian, x²·Gaussian, chirped Gaussian.
pub fn schwartz_corpus<T: Real>() -> Vec<(&'static str, SymExpr<T>)> {
    let g = || SymExpr::gaussian(T::lit(0.5));
    vec![
        ("gaussian", g()),
        ("x_gaussian", SymExpr::product(vec![SymExpr::monomial(1), g()])),
        ("x2_gaussian", SymExpr::product(vec![SymExpr::monomial(2), g()])),
        ("chirped_gaussian", SymExpr::product(vec![SymExpr::chirp(T::lit(0.5)), g()])),
    ]
}

/// The two compact-spectrum members used corpus-wide.
pub fn bump_corpus<T: Real>() -> Vec<BumpSpectrum<T>> {
    vec![
        BumpSpectrum::single(T::one(), T::lit(2.0)).unwrap(),
        BumpSpectrum::symmetric(T::lit(0.5), T::lit(1.5)).unwrap(),
    ]
}
