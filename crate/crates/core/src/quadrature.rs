//! Discretization of the Dunkl measure `dμ_k = |x|^(2k+1) dx / (2^(k+1) Γ(k+1))`.

use std::io::{Read, Write};
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::DunklParameter;

/// Nodes and weights realizing `∫ · dμ_k` on `[-X, X]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule<T = f64> {
    k: DunklParameter<T>,
    radius: T,
    nodes: Vec<T>,
    weights: Vec<T>,
}

#[derive(Deserialize)]
struct RawRule<T> {
    k: T,
    radius: T,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for QuadratureRule<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RawRule::<T>::deserialize(d)?;
        let k = DunklParameter::new(r.k).map_err(serde::de::Error::custom)?;
        Self::from_parts(k, r.radius, r.nodes, r.weights).map_err(serde::de::Error::custom)
    }
}

/// Composite Gauss-Legendre rule on `[-X, X]` with the Dunkl density folded into the weights.
///
/// `panels` must be even so that the origin is a panel boundary.
pub fn build_rule<T: Real>(
    k: DunklParameter<T>,
    radius: T,
    panels: usize,
    nodes_per_panel: usize,
) -> Result<QuadratureRule<T>> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::param("grid.x_max", format!("must be positive and finite, got {radius}")));
    }
    if panels < 2 || panels % 2 == 1 {
        return Err(Error::param("grid.panels", format!("must be even and >= 2, got {panels}")));
    }
    if nodes_per_panel < 2 {
        return Err(Error::param(
            "grid.nodes_per_panel",
            format!("must be >= 2, got {nodes_per_panel}"),
        ));
    }
    let half = panels / 2;
    let h = radius / T::lit(half as f64);
    let gl = GaussLegendre::new(NonZeroUsize::new(nodes_per_panel).expect("checked above"));
    let mut base: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
    base.sort_by(|a, b| a.0.total_cmp(&b.0));

    let norm = k.measure_normalizer();
    let expo = T::lit(2.0) * k.value() + T::one();
    let mut pos_nodes = Vec::with_capacity(half * nodes_per_panel);
    let mut pos_weights = Vec::with_capacity(half * nodes_per_panel);
    let half_h = h * T::lit(0.5);
    for p in 0..half {
        let left = h * T::lit(p as f64);
        let mid = left + half_h;
        for &(t, w) in &base {
            let x = mid + half_h * T::lit(t);
            pos_nodes.push(x);
            pos_weights.push(T::lit(w) * half_h * x.powf(expo) / norm);
        }
    }
    let mut nodes = Vec::with_capacity(2 * pos_nodes.len());
    let mut weights = Vec::with_capacity(2 * pos_nodes.len());
    for i in (0..pos_nodes.len()).rev() {
        nodes.push(-pos_nodes[i]);
        weights.push(pos_weights[i]);
    }
    nodes.extend_from_slice(&pos_nodes);
    weights.extend_from_slice(&pos_weights);
    Ok(QuadratureRule { k, radius, nodes, weights })
}

impl<T: Real> QuadratureRule<T> {
    /// Validates externally supplied nodes and weights.
    pub fn from_parts(k: DunklParameter<T>, radius: T, nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Shape(format!(
                "{} nodes vs {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("nodes", "must be strictly increasing"));
        }
        let n = nodes.len();
        if (0..n).any(|i| nodes[i] != -nodes[n - 1 - i]) {
            return Err(Error::param("nodes", "must be symmetric about 0"));
        }
        if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(Error::param("weights", "must be finite and nonnegative"));
        }
        if !(radius > T::zero()) {
            return Err(Error::param("radius", "must be positive"));
        }
        Ok(Self { k, radius, nodes, weights })
    }

    #[inline]
    pub fn k(&self) -> DunklParameter<T> {
        self.k
    }

    #[inline]
    pub fn radius(&self) -> T {
        self.radius
    }

    #[inline]
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest gap between consecutive nodes.
    pub fn max_spacing(&self) -> T {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::zero(), T::max)
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    /// Same discretization with a different multiplicity parameter.
    pub fn same_layout(&self) -> (T, usize) {
        (self.radius, self.nodes.len())
    }
}

/// Exponent of an `L^p` norm; `Infinity` is the grid maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent<T = f64> {
    Finite(T),
    #[serde(with = "infinity_str")]
    Infinity,
}

mod infinity_str {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "inf" | "infinity" | "Infinity" => Ok(()),
            other => Err(serde::de::Error::custom(format!("expected \"inf\", got {other:?}"))),
        }
    }
}

impl<T: Real> Exponent<T> {
    pub fn new(p: T) -> Result<Self> {
        if p == T::infinity() {
            return Ok(Exponent::Infinity);
        }
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::param("p", format!("exponent must be >= 1 or infinity, got {p}")));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn value(self) -> T {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => T::infinity(),
        }
    }

    /// Conjugate exponent `p/(p-1)`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(T::one()),
            Exponent::Finite(p) if p == T::one() => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - T::one())),
        }
    }
}

/// `ln ‖f‖_p` against the rule weights, `-inf` for the zero function.
pub fn log_lp_norm<T: Real>(rule: &QuadratureRule<T>, values: &[Complex<T>], p: Exponent<T>) -> T {
    let peak = values.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    if peak == T::zero() {
        return T::neg_infinity();
    }
    match p {
        Exponent::Infinity => peak.ln(),
        Exponent::Finite(p) => {
            let s = values
                .iter()
                .zip(rule.weights())
                .fold(T::zero(), |acc, (v, &w)| acc + w * (v.norm() / peak).powf(p));
            peak.ln() + s.ln() / p
        }
    }
}

/// `‖f‖_p` of values sampled at the rule nodes.
pub fn lp_norm_values<T: Real>(rule: &QuadratureRule<T>, values: &[Complex<T>], p: Exponent<T>) -> T {
    log_lp_norm(rule, values, p).exp()
}

/// Complex values at the nodes of a rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFunction<T = f64> {
    pub label: String,
    rule: Arc<QuadratureRule<T>>,
    values: Vec<Complex<T>>,
}

#[derive(Deserialize)]
struct RawSampled<T: Real> {
    label: String,
    rule: QuadratureRule<T>,
    values: Vec<Complex<T>>,
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for SampledFunction<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RawSampled::<T>::deserialize(d)?;
        Self::new(Arc::new(r.rule), r.values, r.label).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> SampledFunction<T> {
    pub fn new(rule: Arc<QuadratureRule<T>>, values: Vec<Complex<T>>, label: impl Into<String>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::Shape(format!(
                "{} values for a rule with {} nodes",
                values.len(),
                rule.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Computation("sampled values must be finite".into()));
        }
        Ok(Self { label: label.into(), rule, values })
    }

    pub fn from_fn<F: Fn(T) -> Complex<T>>(rule: Arc<QuadratureRule<T>>, f: F, label: impl Into<String>) -> Result<Self> {
        let values = rule.nodes().iter().map(|&x| f(x)).collect();
        Self::new(rule, values, label)
    }

    pub fn zero(rule: Arc<QuadratureRule<T>>, label: impl Into<String>) -> Self {
        let n = rule.len();
        Self { label: label.into(), rule, values: vec![Complex::new(T::zero(), T::zero()); n] }
    }

    #[inline]
    pub fn rule(&self) -> &Arc<QuadratureRule<T>> {
        &self.rule
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn map<F: Fn(T, Complex<T>) -> Complex<T>>(&self, f: F, label: impl Into<String>) -> Self {
        let values = self
            .rule
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| f(x, v))
            .collect();
        Self { label: label.into(), rule: self.rule.clone(), values }
    }

    pub fn lp_norm(&self, p: Exponent<T>) -> T {
        lp_norm_values(&self.rule, &self.values, p)
    }

    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        same_rule(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["node", "re", "im"])?;
        for (x, v) in self.rule.nodes().iter().zip(&self.values) {
            wr.write_record([x.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads values written by [`to_csv`](Self::to_csv); the node column must match `rule`.
    pub fn from_csv<R: Read>(r: R, rule: Arc<QuadratureRule<T>>, label: impl Into<String>) -> Result<Self>
    where
        T: std::str::FromStr,
    {
        let mut rd = csv::Reader::from_reader(r);
        let mut values = Vec::with_capacity(rule.len());
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let parse = |j: usize| -> Result<T> {
                rec.get(j)
                    .and_then(|s| s.trim().parse::<T>().ok())
                    .ok_or_else(|| Error::Format(format!("row {i}: bad column {j}")))
            };
            let x = parse(0)?;
            if rule.nodes().get(i) != Some(&x) {
                return Err(Error::Shape(format!("row {i}: node {x} does not match the rule")));
            }
            values.push(Complex::new(parse(1)?, parse(2)?));
        }
        Self::new(rule, values, label)
    }
}

fn same_rule<T: Real>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<()> {
    if Arc::ptr_eq(&f.rule, &g.rule) || f.rule == g.rule {
        Ok(())
    } else {
        Err(Error::Shape("functions are sampled on different rules".into()))
    }
}

/// `‖f‖_p`.
pub fn lp_norm<T: Real>(f: &SampledFunction<T>, p: T) -> Result<T> {
    Ok(f.lp_norm(Exponent::new(p)?))
}

/// `Σ w_i f_i conj(g_i)`.
pub fn inner_product<T: Real>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<Complex<T>> {
    same_rule(f, g)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(f.rule.weights())
        .fold(Complex::new(T::zero(), T::zero()), |acc, ((a, b), &w)| acc + a * b.conj() * w))
}
