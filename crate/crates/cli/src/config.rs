//! Run configuration: one flat JSON file per run.

use std::path::PathBuf;
use std::sync::Arc;

use lcdt::corpus::{schwartz_corpus, symbolic_rules, BumpSpectrum, NODES_PER_PANEL};
use lcdt::operators::{RealPolynomial, SpectralPipeline};
use lcdt::paleywiener::{Method, Side, POLY_TOL};
use lcdt::quadrature::{build_rule, Exponent, QuadratureRule};
use lcdt::specfun::{CanonicalMatrix, DunklParameter};
use lcdt::symfun::SymExpr;
use lcdt::transform::sample_expr;
use lcdt::{Error, Function, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for MatrixSpec {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, c: 0.0, d: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_max: f64,
    pub x_panels: usize,
    pub lambda_max: f64,
    pub lambda_panels: usize,
    #[serde(default = "default_nodes")]
    pub nodes_per_panel: usize,
}

fn default_nodes() -> usize {
    NODES_PER_PANEL
}

/// Test function: an expression tree, a named corpus member or a spectral bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Expr { expr: SymExpr<f64> },
    Corpus { name: String },
    Bump { intervals: Vec<(f64, f64)>, #[serde(default = "one")] smoothness: f64 },
}

fn one() -> f64 {
    1.0
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec::Bump { intervals: vec![(1.0, 2.0)], smoothness: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub matrix: MatrixSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub function: FunctionSpec,
    #[serde(default = "default_p")]
    pub p: Exponent<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub polynomial: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_side")]
    pub side: Side,
    #[serde(default)]
    pub taper: Option<bool>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_p() -> Exponent<f64> {
    Exponent::Finite(2.0)
}
fn default_n_max() -> usize {
    30
}
fn default_method() -> Method {
    Method::Ratio
}
fn default_tol() -> f64 {
    POLY_TOL
}
fn default_side() -> Side {
    Side::Transform
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults parse")
    }
}

/// Field named by a serde message such as "unknown field `x`".
fn serde_field(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            match serde_field(&msg) {
                Some(field) if msg.contains("field") => Error::param(field, msg),
                _ => Error::param("config", msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn param(&self) -> Result<DunklParameter<f64>> {
        DunklParameter::new(self.k)
    }

    pub fn canonical_matrix(&self) -> Result<CanonicalMatrix<f64>> {
        let m = self.matrix;
        CanonicalMatrix::new(m.a, m.b, m.c, m.d)
    }

    pub fn poly(&self) -> Result<RealPolynomial<f64>> {
        let c = self.polynomial.clone().ok_or_else(|| Error::param("polynomial", "required for the poly estimator"))?;
        let p = RealPolynomial::new(c)?;
        p.require_nonconstant()?;
        Ok(p)
    }

    pub fn bump(&self) -> Result<Option<BumpSpectrum<f64>>> {
        match &self.function {
            FunctionSpec::Bump { intervals, smoothness } => {
                BumpSpectrum::new(intervals.clone(), *smoothness).map(Some).map_err(|e| prefix(e, "function"))
            }
            _ => Ok(None),
        }
    }

    pub fn expr(&self) -> Result<Option<SymExpr<f64>>> {
        match &self.function {
            FunctionSpec::Expr { expr } => {
                expr.validate().map_err(|e| prefix(e, "function.expr"))?;
                Ok(Some(expr.clone()))
            }
            FunctionSpec::Corpus { name } => schwartz_corpus::<f64>()
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|(_, e)| Some(e))
                .ok_or_else(|| Error::param("function.name", format!("unknown corpus member `{name}`"))),
            FunctionSpec::Bump { .. } => Ok(None),
        }
    }

    /// Checks every field against the invariants of the module that consumes it.
    pub fn validate(&self) -> Result<()> {
        self.param()?;
        self.canonical_matrix()?;
        match self.p {
            Exponent::Finite(p) if !(p >= 1.0) || !p.is_finite() => {
                return Err(Error::param("p", format!("must be >= 1 or \"inf\", got {p}")))
            }
            _ => {}
        }
        if self.n_max < 3 || self.n_max > 60 {
            return Err(Error::param("n_max", format!("must lie in [3, 60], got {}", self.n_max)));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::param("tolerance", "must be finite and >= 0"));
        }
        if let Some(g) = &self.grid {
            for (v, name) in [(g.x_max, "grid.x_max"), (g.lambda_max, "grid.lambda_max")] {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::param(name, "must be positive and finite"));
                }
            }
            for (v, name) in [(g.x_panels, "grid.x_panels"), (g.lambda_panels, "grid.lambda_panels")] {
                if v == 0 || v % 2 == 1 {
                    return Err(Error::param(name, "must be a positive even count"));
                }
            }
            if g.nodes_per_panel == 0 || g.nodes_per_panel > 64 {
                return Err(Error::param("grid.nodes_per_panel", "must lie in [1, 64]"));
            }
        }
        if let Some(c) = &self.polynomial {
            RealPolynomial::new(c.clone())?;
        }
        self.bump()?;
        self.expr()?;
        Ok(())
    }

    /// The grid actually used: explicit, or the corpus default for the function kind.
    pub fn resolved_grid(&self) -> Result<GridSpec> {
        if let Some(g) = self.grid {
            return Ok(g);
        }
        let k = self.param()?;
        let b = self.matrix.b;
        let (x, l) = match self.bump()? {
            Some(bump) => bump.rules(k, b)?,
            None => symbolic_rules(k, b)?,
        };
        let panels = |r: &QuadratureRule<f64>| r.len() / NODES_PER_PANEL;
        Ok(GridSpec {
            x_max: x.radius(),
            x_panels: panels(&x),
            lambda_max: l.radius(),
            lambda_panels: panels(&l),
            nodes_per_panel: NODES_PER_PANEL,
        })
    }

    pub fn rules(&self) -> Result<(Arc<QuadratureRule<f64>>, Arc<QuadratureRule<f64>>)> {
        let g = self.resolved_grid()?;
        let k = self.param()?;
        Ok((
            Arc::new(build_rule(k, g.x_max, g.x_panels, g.nodes_per_panel)?),
            Arc::new(build_rule(k, g.lambda_max, g.lambda_panels, g.nodes_per_panel)?),
        ))
    }

    pub fn taper_enabled(&self) -> bool {
        self.taper.unwrap_or(matches!(self.function, FunctionSpec::Bump { .. }))
    }

    /// Physical samples: the expression on the x rule, or the bump realized by inverse transform.
    pub fn sample(&self) -> Result<Function> {
        let (x, l) = self.rules()?;
        if let Some(e) = self.expr()? {
            let mut f = sample_expr(&e, x)?;
            f.label = self.label();
            return Ok(f);
        }
        let bump = self.bump()?.expect("bump or expression");
        let m = self.canonical_matrix()?;
        let plan = lcdt::transform::LcdtPlan::new(m, x, l.clone())?;
        let mut f = plan.inverse(&bump.spectrum(&m, l)?)?;
        f.label = self.label();
        Ok(f)
    }

    /// Bump descriptor sampled directly as a function of `x`, for the physical-side detector.
    pub fn sample_physical_bump(&self) -> Result<Option<Function>> {
        let Some(bump) = self.bump()? else { return Ok(None) };
        let (x, _) = self.rules()?;
        Ok(Some(Function::from_fn(x, |t| num_complex::Complex::new(bump.eval(t), 0.0), self.label())?))
    }

    pub fn pipeline(&self) -> Result<SpectralPipeline<f64>> {
        let f = self.sample()?;
        let (_, l) = self.rules()?;
        let plan = Arc::new(lcdt::transform::LcdtPlan::new(self.canonical_matrix()?, f.rule().clone(), l)?);
        if self.taper_enabled() {
            SpectralPipeline::tapered(plan, f)
        } else {
            SpectralPipeline::with_plan(plan, f)
        }
    }

    pub fn label(&self) -> String {
        match &self.function {
            FunctionSpec::Expr { .. } => "expr".into(),
            FunctionSpec::Corpus { name } => name.clone(),
            FunctionSpec::Bump { intervals, smoothness } => BumpSpectrum::new(intervals.clone(), *smoothness)
                .map(|b| b.label())
                .unwrap_or_else(|_| "bump".into()),
        }
    }

    /// Copy with every default made explicit, echoed into outputs.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        c.grid = Some(self.resolved_grid()?);
        c.taper = Some(self.taper_enabled());
        c.out = None;
        Ok(c)
    }
}

fn prefix(e: Error, parent: &str) -> Error {
    match e {
        Error::Parameter { field, message } => Error::param(format!("{parent}.{field}"), message),
        other => other,
    }
}
