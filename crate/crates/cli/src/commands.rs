//! The three subcommands. Each writes its artifacts into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use lcdt::operators::NormSequence;
use lcdt::paleywiener::{
    compact_spectrum_test, estimate_delta, estimate_sigma, poly_domain_test, vanishing_interval_physical,
    vanishing_interval_transform, Side,
};
use lcdt::transform::{lcdt_forward, lcdt_forward_expr};
use lcdt::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::verify::{self, VerifyReport};

pub const WHICH: [&str; 5] = ["sigma", "delta", "poly", "compact", "vanishing"];

/// Writes through a temporary sibling so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::param("out", format!("cannot create {}: {e}", out.display())))
}

#[derive(Serialize)]
struct TransformMeta<'a> {
    config: &'a RunConfig,
    points: usize,
    warnings: &'a [String],
    spectrum_csv: &'a str,
}

/// Forward transform of the configured function: `spectrum.csv`, `spectrum.json`, `transform.json`.
pub fn transform(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let resolved = cfg.resolved()?;
    let m = cfg.canonical_matrix()?;
    let (x, l) = cfg.rules()?;
    let g = match cfg.expr()? {
        Some(e) => lcdt_forward_expr(&e, &m, x, l)?,
        None => lcdt_forward(&cfg.sample()?, &m, l)?,
    };
    prepare(out)?;
    let csv = out.join("spectrum.csv");
    let mut buf = Vec::new();
    g.to_csv(&mut buf)?;
    write_atomic(&csv, &buf)?;
    let json = out.join("spectrum.json");
    write_json(&json, &g)?;
    let meta = out.join("transform.json");
    write_json(&meta, &TransformMeta { config: &resolved, points: g.values().len(), warnings: &g.warnings, spectrum_csv: "spectrum.csv" })?;
    Ok(vec![csv, json, meta])
}

#[derive(Serialize)]
struct EstimateFile<'a, R: Serialize> {
    which: &'a str,
    config: &'a RunConfig,
    sequence_csv: String,
    /// the δ exponent convention: ‖h_n‖ ~ e^{-nδ}, r² = δ
    #[serde(skip_serializing_if = "Option::is_none")]
    convention: Option<&'static str>,
    report: R,
}

fn emit<R: Serialize>(cfg: &RunConfig, out: &Path, which: &str, report: R, seq: &NormSequence<f64>) -> Result<Vec<PathBuf>> {
    let resolved = cfg.resolved()?;
    prepare(out)?;
    let name = format!("sequence_{which}.csv");
    let csv = out.join(&name);
    let mut buf = Vec::new();
    seq.to_csv(&mut buf)?;
    write_atomic(&csv, &buf)?;
    let convention = matches!(which, "delta" | "vanishing").then_some("delta_hat = -lim ln‖h_n‖/n; r_hat = sqrt(delta_hat)");
    let json = out.join(format!("estimate_{which}.json"));
    write_json(&json, &EstimateFile { which, config: &resolved, sequence_csv: name, convention, report })?;
    Ok(vec![json, csv])
}

/// Runs one estimator: `estimate_<which>.json` and `sequence_<which>.csv`.
pub fn estimate(cfg: &RunConfig, which: &str, out: &Path) -> Result<Vec<PathBuf>> {
    if !WHICH.contains(&which) {
        return Err(Error::param("which", format!("expected one of {WHICH:?}, got `{which}`")));
    }
    if which == "poly" {
        cfg.poly()?;
    }
    if which == "vanishing" && cfg.side == Side::Physical {
        return vanishing_physical(cfg, out);
    }
    let pipe = cfg.pipeline()?;
    let (p, n) = (cfg.p, cfg.n_max);
    match which {
        "sigma" => {
            let r = estimate_sigma(&pipe, p, n, cfg.method)?;
            emit(cfg, out, which, &r, &r.sequence)
        }
        "delta" => {
            let r = estimate_delta(&pipe, p, n)?;
            emit(cfg, out, which, &r, &r.sequence)
        }
        "poly" => {
            let r = poly_domain_test(&pipe, &cfg.poly()?, p, n, cfg.tolerance)?;
            emit(cfg, out, which, &r, &r.estimate.sequence)
        }
        "compact" => {
            let r = compact_spectrum_test(&pipe, p, n)?;
            emit(cfg, out, which, &r, &r.estimate.sequence)
        }
        _ => {
            let r = vanishing_interval_transform(&pipe, p, n)?;
            emit(cfg, out, which, &r, &r.gap.sequence)
        }
    }
}

/// Physical side: a bump descriptor is read as a function of `x`, so the rules swap roles.
fn vanishing_physical(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let m = cfg.canonical_matrix()?;
    let (f, lambda_rule) = match cfg.bump()? {
        Some(b) => {
            let (wide, tight) = b.rules(cfg.param()?, m.b)?;
            let f = lcdt::Function::from_fn(tight, |t| num_complex::Complex::new(b.eval(t), 0.0), cfg.label())?;
            (f, wide)
        }
        None => (cfg.sample()?, cfg.rules()?.1),
    };
    let r = vanishing_interval_physical(&f, &m, lambda_rule, cfg.p, cfg.n_max)?;
    emit(cfg, out, "vanishing", &r, &r.gap.sequence)
}

/// Runs a verification suite and writes `verify_<suite>.json`.
pub fn verify(cfg: &RunConfig, suite: &str, out: &Path) -> Result<(VerifyReport, PathBuf)> {
    let report = verify::run(suite, cfg)?;
    prepare(out)?;
    let path = out.join(format!("verify_{suite}.json"));
    write_json(&path, &report)?;
    Ok((report, path))
}
