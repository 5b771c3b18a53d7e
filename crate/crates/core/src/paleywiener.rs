//! Spectral-support estimators built on operator norm sequences.
//!
//! Limits of `‖Λ^n f‖^{1/n}` converge slowly for smooth spectra, so each
//! estimator fits the tail of the log-norm sequence and reports the fitted
//! growth rate next to the raw last entry.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{symbolic_norm_sequence, Family, NormSequence, RealPolynomial, SpectralPipeline};
use crate::quadrature::{Exponent, QuadratureRule, SampledFunction};
use crate::specfun::CanonicalMatrix;
use crate::symfun::SymExpr;
use crate::transform::{LcdtPlan, Spectrum};

/// Edge-energy fraction at `n_max` above which a sequence is treated as truncated.
pub const DIVERGENCE_EDGE: f64 = 1e-6;
/// Log-log slope of roots, per unit multiplier degree, above which a sequence diverges.
pub const DIVERGENCE_SLOPE: f64 = 0.25;
/// Relative agreement of the two fit windows required to report convergence.
pub const CONVERGENCE_TOL: f64 = 0.01;
/// Default verdict slack of the polynomial-domain test.
pub const POLY_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Root,
    Ratio,
}

/// Least-squares fit of `y ≈ Σ c_j φ_j(n)` over `ns`.
fn lstsq(ns: &[f64], ys: &[f64], basis: &[fn(f64) -> f64]) -> Option<Vec<f64>> {
    if ns.len() < basis.len() {
        return None;
    }
    let a = DMatrix::from_fn(ns.len(), basis.len(), |i, j| basis[j](ns[i]));
    let y = DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&y, 1e-13).ok()?;
    Some(sol.iter().copied().collect())
}

fn log_basis(points: usize) -> Vec<fn(f64) -> f64> {
    let full: Vec<fn(f64) -> f64> =
        vec![|n| n, |n| n.sqrt(), |n| n.ln(), |_| 1.0, |n| 1.0 / n, |n| 1.0 / n.sqrt()];
    match points {
        p if p >= 12 => full,
        p if p >= 10 => full[..5].to_vec(),
        p if p >= 6 => full[..4].to_vec(),
        _ => vec![|n| n, |_| 1.0],
    }
}

fn ratio_basis(points: usize) -> Vec<fn(f64) -> f64> {
    let full: Vec<fn(f64) -> f64> = vec![|_| 1.0, |n| n.powf(-0.5), |n| 1.0 / n, |n| n.powf(-1.5)];
    match points {
        p if p >= 8 => full,
        p if p >= 4 => full[..2].to_vec(),
        _ => full[..1].to_vec(),
    }
}

/// Growth rate `L` of `ln N_n ≈ nL + A√n + B ln n + C + D/n + E/√n` over `[lo, n_max]`.
pub fn fit_log_rate(logs: &[f64], lo: usize) -> Option<f64> {
    let hi = logs.len().checked_sub(1)?;
    let lo = lo.max(1);
    let ns: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    let ys: Vec<f64> = (lo..=hi).map(|n| logs[n]).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return None;
    }
    lstsq(&ns, &ys, &log_basis(ns.len())).map(|c| c[0])
}

/// Limit of `ln(N_n/N_{n-1}) ≈ L + A n^{-1/2} + B n^{-1} + C n^{-3/2}` over `[lo, n_max]`.
pub fn fit_ratio_rate(logs: &[f64], lo: usize) -> Option<f64> {
    let hi = logs.len().checked_sub(1)?;
    let lo = lo.max(2);
    let ns: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    let ys: Vec<f64> = (lo..=hi).map(|n| logs[n] - logs[n - 1]).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return None;
    }
    lstsq(&ns, &ys, &ratio_basis(ns.len())).map(|c| c[0])
}

/// Least-squares slope of `ln root_n` against `ln n` over the last third.
pub fn loglog_root_slope(seq: &NormSequence<f64>) -> f64 {
    let n_max = seq.n_max();
    let lo = (n_max / 3).max(1);
    let pts: Vec<(f64, f64)> = seq.entries[lo..]
        .iter()
        .filter_map(|e| e.root.filter(|r| *r > 0.0).map(|r| ((e.n as f64).ln(), r.ln())))
        .collect();
    lstsq(
        &pts.iter().map(|p| p.0).collect::<Vec<_>>(),
        &pts.iter().map(|p| p.1).collect::<Vec<_>>(),
        &[|x| x, |_| 1.0],
    )
    .map(|c| c[0])
    .unwrap_or(0.0)
}

/// Least-squares slope of `root_n` against `1/n` over the last third.
pub fn inverse_n_slope(seq: &NormSequence<f64>) -> f64 {
    let lo = (seq.n_max() / 3).max(1);
    let pts: Vec<(f64, f64)> = seq.entries[lo..]
        .iter()
        .filter_map(|e| e.root.map(|r| (1.0 / e.n as f64, r)))
        .collect();
    lstsq(
        &pts.iter().map(|p| p.0).collect::<Vec<_>>(),
        &pts.iter().map(|p| p.1).collect::<Vec<_>>(),
        &[|x| x, |_| 1.0],
    )
    .map(|c| c[0])
    .unwrap_or(0.0)
}

/// Fitted exponential rate with its two-window convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// rate from the `[n_max/3, n_max]` window
    pub rate: f64,
    /// rate from the `[n_max/2, n_max]` window
    pub rate_check: f64,
    pub converged: bool,
}

fn fit_rate(seq: &NormSequence<f64>, method: Method) -> Option<RateFit> {
    let logs = seq.log_norms();
    let n_max = seq.n_max();
    let f = |lo: usize| match method {
        Method::Root => fit_log_rate(&logs, lo),
        Method::Ratio => fit_ratio_rate(&logs, lo),
    };
    let rate = f(n_max / 3)?;
    let rate_check = f(n_max / 2).unwrap_or(rate);
    let converged = (rate - rate_check).abs() < CONVERGENCE_TOL;
    Some(RateFit { rate, rate_check, converged })
}

/// Divergence test: truncated spectrum at `n_max` or roots growing like a power of `n`.
fn diverges(seq: &NormSequence<f64>, degree: f64) -> bool {
    let edge = seq.entries.last().and_then(|e| e.edge_fraction).unwrap_or(0.0);
    edge > DIVERGENCE_EDGE || loglog_root_slope(seq) > DIVERGENCE_SLOPE * degree
}

/// Estimate of `σ_f = sup |λ/b|` over the spectral support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    #[serde(with = "crate::scalar::ext_float")]
    pub sigma_hat: f64,
    pub method: Method,
    #[serde(with = "crate::scalar::ext_float")]
    pub p: f64,
    pub n_used: usize,
    pub converged: bool,
    pub diverging: bool,
    /// last raw root or ratio
    #[serde(with = "crate::scalar::ext_float")]
    pub raw: f64,
    /// slope of the roots against `1/n` over the last third
    pub slope: f64,
    /// slope of `ln root` against `ln n` over the last third
    pub loglog_slope: f64,
    pub fit: Option<RateFit>,
    pub sequence: NormSequence<f64>,
}

/// Estimates `σ_f` from an operator-power norm sequence.
pub fn estimate_sigma_from_sequence(seq: NormSequence<f64>, method: Method) -> Result<SupportEstimate> {
    estimate_rate(seq, method, 1.0)
}

fn estimate_rate(seq: NormSequence<f64>, method: Method, degree: f64) -> Result<SupportEstimate> {
    let n_max = seq.n_max();
    if n_max < 3 {
        return Err(Error::param("n_max", "at least 3 terms are needed"));
    }
    let last = seq.entries[n_max];
    let raw = match method {
        Method::Root => last.root.unwrap_or(0.0),
        Method::Ratio => last.ratio.unwrap_or(0.0),
    };
    let base = |sigma_hat: f64, converged: bool, diverging: bool, fit: Option<RateFit>, seq: NormSequence<f64>| {
        SupportEstimate {
            sigma_hat,
            method,
            p: seq.p.value(),
            n_used: n_max,
            converged,
            diverging,
            raw,
            slope: inverse_n_slope(&seq),
            loglog_slope: loglog_root_slope(&seq),
            fit,
            sequence: seq,
        }
    };
    if seq.is_zero() {
        return Ok(base(0.0, true, false, None, seq));
    }
    if seq.entries.iter().any(|e| e.log_norm == f64::NEG_INFINITY) {
        return Err(Error::Computation("norm sequence vanishes at some but not all orders".into()));
    }
    if diverges(&seq, degree) {
        return Ok(base(f64::INFINITY, false, true, None, seq));
    }
    let fit = fit_rate(&seq, method).ok_or_else(|| Error::Computation("tail fit failed".into()))?;
    Ok(base(fit.rate.exp(), fit.converged, false, Some(fit), seq))
}

/// `σ_f` on the spectral path.
pub fn estimate_sigma(pipe: &SpectralPipeline<f64>, p: Exponent<f64>, n_max: usize, method: Method) -> Result<SupportEstimate> {
    estimate_rate(pipe.norm_sequence(&Family::Power, p, n_max)?, method, 1.0)
}

/// `σ_f` on the symbolic path (`n_max ≤ 30`).
pub fn estimate_sigma_symbolic(
    e: &SymExpr<f64>,
    matrix: &CanonicalMatrix<f64>,
    x_rule: &QuadratureRule<f64>,
    p: Exponent<f64>,
    n_max: usize,
    method: Method,
) -> Result<SupportEstimate> {
    estimate_rate(symbolic_norm_sequence(e, matrix, x_rule, p, n_max)?, method, 1.0)
}

/// Largest `|λ/b|` with `|g(λ)| > threshold · max |g|`.
pub fn support_radius_oracle(g: &Spectrum<f64>, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param("threshold", "must lie in (0, 1)"));
    }
    let b = g.matrix.map(|m| m.b).unwrap_or(1.0);
    let peak = g.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    Ok(g
        .lambdas()
        .iter()
        .zip(g.values())
        .filter(|(_, v)| v.norm() > threshold * peak)
        .map(|(l, _)| (l / b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyDomainReport {
    pub polynomial: RealPolynomial<f64>,
    /// fitted limit of `‖P^n(iΛ) f‖_p^{1/n}`
    #[serde(with = "crate::scalar::ext_float")]
    pub score: f64,
    pub verdict: bool,
    pub tolerance: f64,
    pub estimate: SupportEstimate,
}

/// Tests `supp D^M_k f ⊆ {λ : |P(λ/b)| ≤ 1}` through the growth of `P^n(iΛ) f`.
pub fn poly_domain_test(
    pipe: &SpectralPipeline<f64>,
    poly: &RealPolynomial<f64>,
    p: Exponent<f64>,
    n_max: usize,
    tolerance: f64,
) -> Result<PolyDomainReport> {
    poly.require_nonconstant()?;
    let seq = pipe.norm_sequence(&Family::Poly(poly.clone()), p, n_max)?;
    let estimate = estimate_rate(seq, Method::Root, poly.degree() as f64)?;
    let score = estimate.sigma_hat;
    Ok(PolyDomainReport { polynomial: poly.clone(), score, verdict: score <= 1.0 + tolerance, tolerance, estimate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactReport {
    pub compact: bool,
    /// fitted limit of `‖Δ^n f‖_p^{1/n}`, equal to `σ_f²`
    #[serde(with = "crate::scalar::ext_float")]
    pub sigma2_hat: f64,
    pub estimate: SupportEstimate,
}

pub fn compact_spectrum_test(pipe: &SpectralPipeline<f64>, p: Exponent<f64>, n_max: usize) -> Result<CompactReport> {
    let seq = pipe.norm_sequence(&Family::Laplacian, p, n_max)?;
    let estimate = estimate_rate(seq, Method::Root, 2.0)?;
    Ok(CompactReport { compact: !estimate.diverging, sigma2_hat: estimate.sigma_hat, estimate })
}

/// Estimate of `δ_f = inf |λ/b|²` over the spectral support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    #[serde(with = "crate::scalar::ext_float")]
    pub delta_hat: f64,
    /// `-ln ‖h_n‖^{1/n}` at `n_max`
    #[serde(with = "crate::scalar::ext_float")]
    pub raw: f64,
    pub n_used: usize,
    pub converged: bool,
    pub fit: Option<RateFit>,
    pub sequence: NormSequence<f64>,
}

/// `δ_f` from the heat-semigroup norms `h_n = ‖e^{-nλ²/b²} D^M_k f‖`, with the `1/n` exponent.
pub fn estimate_delta(pipe: &SpectralPipeline<f64>, p: Exponent<f64>, n_max: usize) -> Result<GapEstimate> {
    let seq = pipe.norm_sequence(&Family::Heat, p, n_max)?;
    if seq.is_zero() {
        return delta_from_sequence(seq, None);
    }
    let floor = roundoff_floor(pipe, p, n_max)?;
    delta_from_sequence(seq, Some(&floor))
}

/// Entries must exceed the roundoff floor by this factor to enter a fit.
pub const FLOOR_MARGIN: f64 = 1e3;

/// Log-norms of the heat sequence of a flat spectrum at the forward roundoff level
/// `ε · |prefactor| · ‖f‖_1`.
pub fn roundoff_floor(pipe: &SpectralPipeline<f64>, p: Exponent<f64>, n_max: usize) -> Result<Vec<f64>> {
    let k = pipe.plan().k();
    let level = f64::EPSILON * pipe.matrix().prefactor(k).norm() * pipe.input().lp_norm(Exponent::Finite(1.0));
    let flat = Spectrum::from_fn(
        pipe.spectrum().rule().clone(),
        Some(*pipe.matrix()),
        |_| num_complex::Complex::new(level, 0.0),
        "floor",
    )?;
    let fp = SpectralPipeline::from_spectrum(pipe.plan().clone(), flat)?;
    Ok(fp.norm_sequence(&Family::Heat, p, n_max)?.log_norms())
}

/// `δ_f` from a heat sequence; with a floor, the fit stops before the first entry
/// within [`FLOOR_MARGIN`] of it.
pub fn delta_from_sequence(seq: NormSequence<f64>, floor: Option<&[f64]>) -> Result<GapEstimate> {
    let n_max = seq.n_max();
    if n_max < 3 {
        return Err(Error::param("n_max", "at least 3 terms are needed"));
    }
    let raw = -seq.entries[n_max].log_norm / n_max as f64;
    if seq.is_zero() {
        return Ok(GapEstimate { delta_hat: f64::INFINITY, raw, n_used: n_max, converged: true, fit: None, sequence: seq });
    }
    let n_used = match floor {
        Some(fl) => seq
            .entries
            .iter()
            .position(|e| e.log_norm < fl[e.n] + FLOOR_MARGIN.ln())
            .map_or(n_max, |i| i.saturating_sub(1)),
        None => n_max,
    };
    if n_used < 3 {
        return Err(Error::Computation("heat norms reach the roundoff floor before n = 3".into()));
    }
    let mut head = seq.clone();
    head.entries.truncate(n_used + 1);
    let fit = fit_rate(&head, Method::Root).ok_or_else(|| Error::Computation("tail fit failed".into()))?;
    Ok(GapEstimate {
        delta_hat: (-fit.rate).max(0.0),
        raw,
        n_used,
        converged: fit.converged,
        fit: Some(fit),
        sequence: seq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `D^M_k f` vanishes for `|λ/b| < r`
    Transform,
    /// `f` vanishes on `(-r, r)`
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub side: Side,
    /// `sqrt(δ_hat)` in units of `|·/b|`
    #[serde(with = "crate::scalar::ext_float")]
    pub r_hat: f64,
    /// `|b| · r_hat`, the radius in the variable itself
    #[serde(with = "crate::scalar::ext_float")]
    pub radius: f64,
    pub gap: GapEstimate,
}

fn vanishing_report(side: Side, b: f64, gap: GapEstimate) -> VanishingReport {
    let r_hat = gap.delta_hat.sqrt();
    VanishingReport { side, r_hat, radius: b.abs() * r_hat, gap }
}

/// Radius of the hole of `D^M_k f` around the origin.
pub fn vanishing_interval_transform(pipe: &SpectralPipeline<f64>, p: Exponent<f64>, n_max: usize) -> Result<VanishingReport> {
    Ok(vanishing_report(Side::Transform, pipe.matrix().b, estimate_delta(pipe, p, n_max)?))
}

/// Radius of the hole of `f` around the origin.
///
/// The detector runs on `D^M_k f` as data with the inverse matrix, whose
/// transform is `f` itself; `lambda_rule` is the frequency rule for `D^M_k f`.
pub fn vanishing_interval_physical(
    f: &SampledFunction<f64>,
    matrix: &CanonicalMatrix<f64>,
    lambda_rule: Arc<QuadratureRule<f64>>,
    p: Exponent<f64>,
    n_max: usize,
) -> Result<VanishingReport> {
    let forward = LcdtPlan::new(*matrix, f.rule().clone(), lambda_rule.clone())?;
    let g = forward.forward(f)?;
    let data = SampledFunction::new(lambda_rule, g.values().to_vec(), format!("transform[{}]", f.label))?;
    let plan = Arc::new(LcdtPlan::new(matrix.inverse(), data.rule().clone(), f.rule().clone())?);
    let pipe = SpectralPipeline::tapered(plan, data)?;
    Ok(vanishing_report(Side::Physical, matrix.b, estimate_delta(&pipe, p, n_max)?))
}

#[cfg(test)]
mod tests;
