//! Command-line front end. Every verb produces one report document that
//! embeds the resolved run configuration; the exit status is 0 when every
//! check passes, 1 on a tolerance failure and 2 on a usage error.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cft::{eta_row, gamma_row, CgRow};
use crate::enumeration::{holo_residual_report, observable, EnumError, Lattice, MarkedPoint};
use crate::geometry::build_domain;
use crate::holo_solver::{
    alignment, characteristic_roots, check_c2_fugacity, determinant_scan, potts_weight_ratio, solve, RootKind, SpinParams,
};
use crate::json::{complex, num, nums, render, sci};
use crate::models::{integrable_direction, spin_value, ModelId, WeightSet};
use crate::ybe::{dense_diagram_residual, tl_ybe_residual, DiagramReport, YbeConvention};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {msg}")]
    Malformed { path: String, msg: String },
    #[error("cannot write {path}: {msg}")]
    Io { path: String, msg: String },
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "parafermion", version, about = "Discrete holomorphicity checks for lattice loop models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the local holomorphicity equations for the tile weights.
    Solve(SolveArgs),
    /// Scan the system determinant along the spin axis.
    DetScan(DetScanArgs),
    /// Enumerate a small domain and evaluate contour sums face by face.
    HoloVerify(HoloArgs),
    /// Check the Yang–Baxter equation for a weight family.
    YbeVerify(YbeArgs),
    /// Tabulate Coulomb-gas data over a γ or η grid.
    Cg(CgArgs),
    /// Merge run reports into a pass/fail matrix.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Read every angle flag in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// dense, dilute or c2.
    #[arg(long)]
    pub model: String,
    /// Potts angle γ with √Q = 2 cos γ (dense model).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Crossing angle η with n = −2 cos 2η (dilute and c2 models).
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub alpha: f64,
    /// Winding increment at the (π − α)-corners; defaults to α (dense only).
    #[arg(long)]
    pub beta: Option<f64>,
    /// `auto` or an explicit spin.
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub spin: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DetScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub alpha: f64,
    /// `lo,hi`
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    pub s_range: String,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Largest accepted distance between a numeric and a closed-form root.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct HoloArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub rows: usize,
    #[arg(long, default_value_t = 2)]
    pub cols: usize,
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub spin: String,
    /// Relative perturbation applied to the weights (falsifiability runs).
    #[arg(long, allow_hyphen_values = true)]
    pub perturb: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct YbeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Dense spectral parameters.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    /// Dilute/c2 spectral parameters.
    #[arg(long, allow_hyphen_values = true)]
    pub psi1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub psi2: Option<f64>,
    /// `auto` or a convention name such as `phi-sum-flipu`.
    #[arg(long, default_value = "auto")]
    pub convention: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CgArgs {
    /// `gamma:lo:hi:n` or `eta:lo:hi:n`.
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Solve,
    DetScan,
    HoloVerify,
    YbeVerify,
    Cg,
    Report,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Solve => "solve",
            Verb::DetScan => "det-scan",
            Verb::HoloVerify => "holo-verify",
            Verb::YbeVerify => "ybe-verify",
            Verb::Cg => "cg",
            Verb::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinChoice {
    Auto,
    Value(f64),
}

/// Fully resolved parameters of one run. Angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub verb: Verb,
    pub model: Option<ModelId>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub spin: Option<SpinChoice>,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub psi1: Option<f64>,
    pub psi2: Option<f64>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub s_range: Option<(f64, f64)>,
    pub steps: Option<usize>,
    pub perturb: Option<f64>,
    pub convention: Option<String>,
    pub grid: Option<Grid>,
    pub inputs: Vec<PathBuf>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridVar {
    Gamma,
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub var: GridVar,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64).collect()
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

impl RunConfig {
    fn blank(verb: Verb, format: Format, out: Option<PathBuf>) -> RunConfig {
        RunConfig {
            verb,
            model: None,
            gamma: None,
            eta: None,
            alpha: None,
            beta: None,
            spin: None,
            u: None,
            v: None,
            psi1: None,
            psi2: None,
            rows: None,
            cols: None,
            s_range: None,
            steps: None,
            perturb: None,
            convention: None,
            grid: None,
            inputs: vec![],
            tol: None,
            out,
            format,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<RunConfig, CliError> {
        let deg = |o: &Output| if o.degrees { PI / 180.0 } else { 1.0 };
        let cfg = match cli.command {
            Command::Solve(a) => {
                let k = deg(&a.output);
                let mut c = RunConfig::blank(Verb::Solve, a.output.format, a.output.out);
                c.set_model(&a.model, k)?;
                c.alpha = Some(a.alpha * k);
                c.beta = a.beta.map(|b| b * k);
                c.spin = Some(parse_spin(&a.spin)?);
                c.tol = Some(a.tol);
                c
            }
            Command::DetScan(a) => {
                let k = deg(&a.output);
                let mut c = RunConfig::blank(Verb::DetScan, a.output.format, a.output.out);
                c.set_model(&a.model, k)?;
                c.alpha = Some(a.alpha * k);
                c.s_range = Some(parse_range(&a.s_range)?);
                c.steps = Some(a.steps);
                c.tol = Some(a.tol);
                c
            }
            Command::HoloVerify(a) => {
                let k = deg(&a.output);
                let mut c = RunConfig::blank(Verb::HoloVerify, a.output.format, a.output.out);
                c.set_model(&a.model, k)?;
                c.alpha = Some(a.alpha * k);
                c.beta = a.beta.map(|b| b * k);
                c.rows = Some(a.rows);
                c.cols = Some(a.cols);
                c.spin = Some(parse_spin(&a.spin)?);
                c.perturb = a.perturb;
                c.tol = Some(a.tol);
                c
            }
            Command::YbeVerify(a) => {
                let k = deg(&a.output);
                let mut c = RunConfig::blank(Verb::YbeVerify, a.output.format, a.output.out);
                c.set_model(&a.model, k)?;
                c.u = a.u.map(|x| x * k);
                c.v = a.v.map(|x| x * k);
                c.psi1 = a.psi1.map(|x| x * k);
                c.psi2 = a.psi2.map(|x| x * k);
                c.convention = Some(a.convention);
                c.tol = Some(a.tol);
                c
            }
            Command::Cg(a) => {
                let k = deg(&a.output);
                let mut c = RunConfig::blank(Verb::Cg, a.output.format, a.output.out);
                let mut g = parse_grid(&a.grid)?;
                g.lo *= k;
                g.hi *= k;
                c.grid = Some(g);
                c.tol = Some(a.tol);
                c
            }
            Command::Report(a) => {
                let mut c = RunConfig::blank(Verb::Report, Format::Json, a.out);
                c.inputs = a.inputs;
                c
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn set_model(&mut self, m: &ModelArgs, k: f64) -> Result<(), CliError> {
        let model: ModelId = m.model.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
        match (model, m.gamma, m.eta) {
            (ModelId::DensePotts, Some(g), None) => self.gamma = Some(g * k),
            (ModelId::DensePotts, _, _) => return usage("the dense model takes --gamma (and not --eta)"),
            (_, None, Some(e)) => self.eta = Some(e * k),
            (_, _, _) => return usage(format!("the {model} model takes --eta (and not --gamma)")),
        }
        self.model = Some(model);
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return usage("--tol must be positive");
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < PI) {
                return usage("--alpha must lie strictly between 0 and pi");
            }
        }
        if let Some(b) = self.beta {
            if self.model != Some(ModelId::DensePotts) {
                return usage("--beta is only meaningful for the dense model");
            }
            if !(b > 0.0 && b < PI) {
                return usage("--beta must lie strictly between 0 and pi");
            }
        }
        if let (Some(r), Some(c)) = (self.rows, self.cols) {
            if r == 0 || c == 0 {
                return usage("--rows and --cols must be at least 1");
            }
        }
        if let Some(n) = self.steps {
            if n < 2 {
                return usage("--steps must be at least 2");
            }
        }
        if self.format == Format::Csv && !matches!(self.verb, Verb::DetScan | Verb::Cg) {
            return usage(format!("{} has no CSV output", self.verb.name()));
        }
        if self.verb == Verb::YbeVerify {
            let dense = self.model == Some(ModelId::DensePotts);
            let (a, b) = if dense { (self.u, self.v) } else { (self.psi1, self.psi2) };
            if a.is_none() || b.is_none() {
                return usage(if dense { "dense ybe-verify needs --u and --v" } else { "ybe-verify needs --psi1 and --psi2" });
            }
            if let Some(c) = &self.convention {
                if c != "auto" && !dense && c.parse::<YbeConvention>().is_err() {
                    return usage(format!("unknown convention {c:?}"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("verb".into(), json!(self.verb.name()));
        m.insert("model".into(), self.model.map(|x| json!(x.name())).unwrap_or(Value::Null));
        m.insert("gamma".into(), opt_num(self.gamma));
        m.insert("eta".into(), opt_num(self.eta));
        m.insert("alpha".into(), opt_num(self.alpha));
        m.insert("beta".into(), opt_num(self.beta));
        m.insert(
            "spin".into(),
            match self.spin {
                None => Value::Null,
                Some(SpinChoice::Auto) => json!("auto"),
                Some(SpinChoice::Value(s)) => num(s),
            },
        );
        m.insert("u".into(), opt_num(self.u));
        m.insert("v".into(), opt_num(self.v));
        m.insert("psi1".into(), opt_num(self.psi1));
        m.insert("psi2".into(), opt_num(self.psi2));
        m.insert("rows".into(), self.rows.map(|x| json!(x)).unwrap_or(Value::Null));
        m.insert("cols".into(), self.cols.map(|x| json!(x)).unwrap_or(Value::Null));
        m.insert("s_range".into(), self.s_range.map(|(a, b)| nums(&[a, b])).unwrap_or(Value::Null));
        m.insert("steps".into(), self.steps.map(|x| json!(x)).unwrap_or(Value::Null));
        m.insert("perturb".into(), opt_num(self.perturb));
        m.insert("convention".into(), self.convention.clone().map(Value::String).unwrap_or(Value::Null));
        m.insert(
            "grid".into(),
            self.grid
                .map(|g| {
                    json!({
                        "variable": match g.var { GridVar::Gamma => "gamma", GridVar::Eta => "eta" },
                        "lo": num(g.lo),
                        "hi": num(g.hi),
                        "n": g.n,
                    })
                })
                .unwrap_or(Value::Null),
        );
        m.insert("inputs".into(), Value::Array(self.inputs.iter().map(|p| json!(p.display().to_string())).collect()));
        m.insert("tol".into(), opt_num(self.tol));
        m.insert("out".into(), self.out.as_ref().map(|p| json!(p.display().to_string())).unwrap_or(Value::Null));
        m.insert("format".into(), json!(self.format.name()));
        Value::Object(m)
    }

    fn model_angle(&self) -> (ModelId, f64) {
        let m = self.model.expect("validated");
        (m, self.gamma.or(self.eta).expect("validated"))
    }
}

fn parse_spin(s: &str) -> Result<SpinChoice, CliError> {
    if s == "auto" {
        return Ok(SpinChoice::Auto);
    }
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(SpinChoice::Value)
        .ok_or_else(|| CliError::Usage(format!("--spin takes `auto` or a number, got {s:?}")))
}

fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || CliError::Usage(format!("--s-range takes `lo,hi`, got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(hi > lo) {
        return usage("--s-range needs lo < hi");
    }
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<Grid, CliError> {
    let bad = || CliError::Usage(format!("--grid takes `gamma:lo:hi:n` or `eta:lo:hi:n`, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let var = match parts[0] {
        "gamma" => GridVar::Gamma,
        "eta" => GridVar::Eta,
        _ => return Err(bad()),
    };
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let hi: f64 = parts[2].parse().map_err(|_| bad())?;
    let n: usize = parts[3].parse().map_err(|_| bad())?;
    if n == 0 || hi < lo {
        return Err(bad());
    }
    Ok(Grid { var, lo, hi, n })
}

/// One asserted quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < tol`.
    fn below(name: &str, value: f64, tol: f64) -> Check {
        Check { name: name.into(), value, tol, pass: value < tol }
    }

    fn flag(name: &str, pass: bool) -> Check {
        Check { name: name.into(), value: if pass { 1.0 } else { 0.0 }, tol: 0.0, pass }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "value": num(self.value), "tol": num(self.tol), "pass": self.pass })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn finish(cfg: &RunConfig, mut body: Map<String, Value>, checks: Vec<Check>, csv: Option<String>) -> Outcome {
    let pass = checks.iter().all(|c| c.pass);
    let mut m = Map::new();
    m.insert("config".into(), cfg.to_json());
    m.append(&mut body);
    m.insert("checks".into(), Value::Array(checks.iter().map(Check::to_json).collect()));
    m.insert("pass".into(), json!(pass));
    Outcome { report: Value::Object(m), csv, checks }
}

fn weights_json(w: &WeightSet) -> Value {
    let mut m = Map::new();
    for (s, &x) in w.model.symbols().iter().zip(w.values()) {
        m.insert(s.name().into(), num(x));
    }
    Value::Object(m)
}

fn resolve_spin(cfg: &RunConfig, model: ModelId, angle: f64) -> f64 {
    match cfg.spin.unwrap_or(SpinChoice::Auto) {
        SpinChoice::Auto => spin_value(model, angle),
        SpinChoice::Value(s) => s,
    }
}

fn params_for(model: ModelId, s: f64, alpha: f64, beta: f64) -> SpinParams {
    match model {
        ModelId::DensePotts => SpinParams::dense(s, alpha, beta),
        _ => SpinParams::for_model(model, s, alpha),
    }
}

/// Weights the holomorphic solution should reproduce at the automatic spin.
fn reference_weights(model: ModelId, angle: f64, alpha: f64, beta: f64) -> Result<WeightSet, CliError> {
    let fug = model.fugacity(angle);
    match model {
        ModelId::DensePotts => {
            let r = potts_weight_ratio(angle, alpha, beta).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(WeightSet::new(model, &[1.0, r], fug))
        }
        _ => Ok(WeightSet::new(model, &integrable_direction(model, angle, alpha), fug)),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.verb {
        Verb::Solve => run_solve(cfg),
        Verb::DetScan => run_det_scan(cfg),
        Verb::HoloVerify => run_holo(cfg),
        Verb::YbeVerify => run_ybe(cfg),
        Verb::Cg => run_cg(cfg),
        Verb::Report => run_report(cfg),
    }
}

fn run_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, angle) = cfg.model_angle();
    let alpha = cfg.alpha.expect("validated");
    let beta = cfg.beta.unwrap_or(alpha);
    let tol = cfg.tol.expect("validated");
    let fug = model.fugacity(angle);
    let s = resolve_spin(cfg, model, angle);
    let params = params_for(model, s, alpha, beta);
    let sol = solve(model, fug, params, tol);
    let mut checks = vec![Check::flag("null_space_nonempty", !sol.basis.is_empty())];
    let mut residuals = Map::new();
    residuals.insert("null_dimension".into(), json!(sol.basis.len()));
    residuals.insert("null_vector_residual".into(), num(sol.singular_gap));
    if cfg.spin == Some(SpinChoice::Auto) {
        let reference = reference_weights(model, angle, alpha, beta)?;
        let scale = reference.norm();
        let r = sol.system.max_residual(reference.values()) / scale;
        let a = alignment(&sol.basis, reference.values());
        residuals.insert("reference_residual".into(), num(r));
        residuals.insert("reference_alignment".into(), num(a));
        checks.push(Check::below("reference_residual", r, tol));
        checks.push(Check::below("reference_misalignment", 1.0 - a, tol));
    }
    let weights = sol
        .basis
        .first()
        .map(|b| weights_json(&WeightSet::new(model, b, fug)))
        .unwrap_or(Value::Null);
    let mut body = Map::new();
    body.insert("model".into(), json!(model.name()));
    body.insert("fugacity".into(), num(fug));
    body.insert("alpha".into(), num(alpha));
    body.insert("beta".into(), num(beta));
    body.insert("spin".into(), num(s));
    body.insert("spin_roots".into(), nums(&characteristic_roots(model, fug, -1.0, 1.0)));
    body.insert("weights".into(), weights);
    body.insert(
        "null_basis".into(),
        Value::Array(sol.basis.iter().map(|b| weights_json(&WeightSet::new(model, b, fug))).collect()),
    );
    body.insert("residuals".into(), Value::Object(residuals));
    Ok(finish(cfg, body, checks, None))
}

fn run_det_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, angle) = cfg.model_angle();
    let alpha = cfg.alpha.expect("validated");
    let (lo, hi) = cfg.s_range.expect("validated");
    let steps = cfg.steps.expect("validated");
    let tol = cfg.tol.expect("validated");
    let fug = model.fugacity(angle);
    let chars = characteristic_roots(model, fug, lo, hi);
    let expected = spin_value(model, angle);
    let mut body = Map::new();
    body.insert("model".into(), json!(model.name()));
    body.insert("fugacity".into(), num(fug));
    body.insert("alpha".into(), num(alpha));
    body.insert("expected_spin".into(), num(expected));
    body.insert("characteristic_roots".into(), nums(&chars));
    if model == ModelId::C2Loop {
        if let Err(e) = check_c2_fugacity(fug) {
            // the determinant carries a factor n² − 1 and vanishes identically
            body.insert("degenerate_fugacity".into(), json!(e.to_string()));
            body.insert("identically_zero".into(), json!(true));
            body.insert("roots".into(), json!([]));
            let checks = vec![Check::flag("determinant_not_identically_zero", false)];
            return Ok(finish(cfg, body, checks, None));
        }
    }
    let scan = determinant_scan(model, fug, alpha, (lo, hi), steps).map_err(|e| CliError::Usage(e.to_string()))?;
    let roots: Vec<Value> = scan
        .roots
        .iter()
        .map(|r| {
            json!({
                "s": num(r.s),
                "kind": match r.kind { RootKind::Spin => "spin", RootKind::EmbeddingDegenerate => "embedding" },
                "closed_form_gap": num(r.closed_form_gap),
            })
        })
        .collect();
    let worst = scan
        .roots
        .iter()
        .filter(|r| r.kind == RootKind::Spin)
        .map(|r| r.closed_form_gap)
        .fold(0.0, f64::max);
    let mut checks = vec![
        Check::flag("determinant_not_identically_zero", !scan.identically_zero),
        Check::below("worst_spin_root_gap", worst, tol),
    ];
    if expected >= lo && expected <= hi {
        let gap = scan.roots.iter().map(|r| (r.s - expected).abs()).fold(f64::INFINITY, f64::min);
        checks.push(Check::below("expected_spin_found", gap, tol));
    }
    body.insert("identically_zero".into(), json!(scan.identically_zero));
    body.insert("roots".into(), Value::Array(roots));
    let csv = if cfg.format == Format::Csv {
        let mut out = String::from("s,det\n");
        for (s, d) in &scan.samples {
            let _ = writeln!(out, "{},{}", sci(*s), sci(*d));
        }
        Some(out)
    } else {
        body.insert(
            "samples".into(),
            Value::Array(scan.samples.iter().map(|&(s, d)| json!([num(s), num(d)])).collect()),
        );
        None
    };
    Ok(finish(cfg, body, checks, csv))
}

fn run_holo(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, angle) = cfg.model_angle();
    let alpha = cfg.alpha.expect("validated");
    let beta = cfg.beta.unwrap_or(alpha);
    let tol = cfg.tol.expect("validated");
    let s = resolve_spin(cfg, model, angle);
    let mut w = reference_weights(model, angle, alpha, beta)?;
    if let Some(eps) = cfg.perturb {
        w = w.perturbed(eps);
    }
    let domain = build_domain(cfg.rows.expect("validated"), cfg.cols.expect("validated"), alpha)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let enum_err = |e: EnumError| CliError::Usage(e.to_string());
    let lat = Lattice::new(domain, model, beta, 0).map_err(enum_err)?;
    let field = observable(&lat, &w, s, MarkedPoint::boundary_default()).map_err(enum_err)?;
    let rep = holo_residual_report(&field, &lat.domain).map_err(enum_err)?;
    let face_json = |f: &crate::enumeration::FaceResidual| {
        json!({
            "face": f.face,
            "origin_adjacent": f.origin_adjacent,
            "residual": complex(f.residual),
            "abs": num(f.residual.norm()),
        })
    };
    let mut params = Map::new();
    params.insert("model".into(), json!(model.name()));
    params.insert("fugacity".into(), num(w.fugacity));
    params.insert("alpha".into(), num(alpha));
    params.insert("beta".into(), num(beta));
    params.insert("spin".into(), num(s));
    params.insert("weights".into(), weights_json(&w));
    let mut body = Map::new();
    body.insert("params".into(), Value::Object(params));
    body.insert("partition_function".into(), num(field.partition_function));
    body.insert("configurations".into(), json!(field.configurations));
    body.insert("interior_max_residual".into(), num(rep.interior_max));
    body.insert(
        "origin_adjacent_residuals".into(),
        Value::Array(rep.per_face.iter().filter(|f| f.origin_adjacent).map(face_json).collect()),
    );
    body.insert("per_plaquette".into(), Value::Array(rep.per_face.iter().map(face_json).collect()));
    let checks = vec![Check::below("interior_max_residual", rep.interior_max, tol)];
    Ok(finish(cfg, body, checks, None))
}

fn class_json(r: &DiagramReport) -> Value {
    Value::Array(
        r.classes
            .iter()
            .map(|c| json!({ "pattern": c.class.label(), "lhs": num(c.lhs), "rhs": num(c.rhs), "diff": num(c.diff) }))
            .collect(),
    )
}

fn run_ybe(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (model, angle) = cfg.model_angle();
    let tol = cfg.tol.expect("validated");
    let mut body = Map::new();
    body.insert("model".into(), json!(model.name()));
    if model == ModelId::DensePotts {
        let (u, v) = (cfg.u.expect("validated"), cfg.v.expect("validated"));
        let diag = dense_diagram_residual(angle, u, v);
        let tl = tl_ybe_residual(angle, u, v);
        body.insert("convention".into(), json!("a=sin(x), b=sin(gamma-x) at (u, u+v-gamma, v)"));
        body.insert("tl_residual".into(), num(tl));
        body.insert("classes".into(), class_json(&diag));
        body.insert("max_residual".into(), num(diag.max_residual));
        let checks = vec![
            Check::below("diagram_residual", diag.max_residual, tol),
            Check::below("tl_residual", tl, tol),
            Check::below("checker_disagreement", (diag.max_residual - tl).abs(), tol),
        ];
        return Ok(finish(cfg, body, checks, None));
    }
    let (x1, x2) = (cfg.psi1.expect("validated"), cfg.psi2.expect("validated"));
    let err = |e: crate::ybe::YbeError| CliError::Usage(e.to_string());
    let requested = cfg.convention.as_deref().unwrap_or("auto");
    let (conv, scanned) = if requested == "auto" {
        let mut scores = Vec::new();
        for c in YbeConvention::all() {
            scores.push((c, c.residual(model, angle, x1, x2).map_err(err)?.max_residual));
        }
        let best = scores.iter().copied().fold(None, |acc: Option<(YbeConvention, f64)>, x| match acc {
            Some(a) if a.1 <= x.1 => Some(a),
            _ => Some(x),
        });
        (best.expect("at least one convention").0, scores)
    } else {
        let c: YbeConvention = requested.parse().map_err(err)?;
        (c, vec![])
    };
    let rep = conv.residual(model, angle, x1, x2).map_err(err)?;
    body.insert("convention".into(), json!(conv.name()));
    body.insert(
        "scanned".into(),
        Value::Array(scanned.iter().map(|(c, r)| json!({ "convention": c.name(), "max_residual": num(*r) })).collect()),
    );
    body.insert("classes".into(), class_json(&rep));
    body.insert("max_residual".into(), num(rep.max_residual));
    let checks = vec![Check::below("diagram_residual", rep.max_residual, tol)];
    Ok(finish(cfg, body, checks, None))
}

fn run_cg(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid.expect("validated");
    let tol = cfg.tol.expect("validated");
    let rows: Vec<CgRow> = grid
        .points()
        .into_iter()
        .map(|x| match grid.var {
            GridVar::Gamma => gamma_row(x),
            GridVar::Eta => eta_row(x),
        })
        .collect();
    let (label, gap) = match grid.var {
        GridVar::Gamma => ("gamma", rows.iter().map(|r| (r.s - r.h31).abs()).fold(0.0, f64::max)),
        GridVar::Eta => ("eta", rows.iter().filter(|r| r.g > 0.0).map(|r| (r.s - r.h21).abs()).fold(0.0, f64::max)),
    };
    let identity = match grid.var {
        GridVar::Gamma => "s_equals_h31",
        GridVar::Eta => "s_equals_h21",
    };
    let checks = vec![Check::below(identity, gap, tol)];
    let mut body = Map::new();
    body.insert("variable".into(), json!(label));
    let csv = if cfg.format == Format::Csv {
        let mut out = format!("{label},g,c,s,h21,h31\n");
        for r in &rows {
            let cols = [r.param, r.g, r.c, r.s, r.h21, r.h31].map(sci);
            let _ = writeln!(out, "{}", cols.join(","));
        }
        Some(out)
    } else {
        body.insert(
            "rows".into(),
            Value::Array(
                rows.iter()
                    .map(|r| {
                        json!({ label: num(r.param), "g": num(r.g), "c": num(r.c), "s": num(r.s), "h21": num(r.h21), "h31": num(r.h31) })
                    })
                    .collect(),
            ),
        );
        None
    };
    Ok(finish(cfg, body, checks, csv))
}

fn run_report(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut runs = Vec::new();
    let mut matrix: BTreeMap<String, BTreeMap<String, bool>> = BTreeMap::new();
    for p in &cfg.inputs {
        let path = p.display().to_string();
        let bad = |msg: &str| CliError::Malformed { path: path.clone(), msg: msg.to_string() };
        let text = std::fs::read_to_string(p).map_err(|e| bad(&e.to_string()))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        let verb = v.pointer("/config/verb").and_then(Value::as_str).ok_or_else(|| bad("missing config.verb"))?;
        let model = v.pointer("/config/model").and_then(Value::as_str).unwrap_or("-");
        let pass = v.get("pass").and_then(Value::as_bool).ok_or_else(|| bad("missing pass flag"))?;
        let cell = matrix.entry(model.to_string()).or_default().entry(verb.to_string()).or_insert(true);
        *cell &= pass;
        runs.push(json!({ "path": path, "verb": verb, "model": model, "pass": pass }));
    }
    let checks: Vec<Check> = runs
        .iter()
        .map(|r| Check::flag(&format!("{}:{}:{}", r["model"].as_str().unwrap_or("-"), r["verb"].as_str().unwrap_or("-"), r["path"].as_str().unwrap_or("-")), r["pass"].as_bool().unwrap_or(false)))
        .collect();
    let mut body = Map::new();
    body.insert("runs".into(), Value::Array(runs));
    body.insert("matrix".into(), serde_json::to_value(&matrix).expect("maps of bools serialise"));
    Ok(finish(cfg, body, checks, None))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io { path: p.display().to_string(), msg: e.to_string() }),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Io { path: "stdout".into(), msg: e.to_string() })
                }
                _ => Ok(()),
            }
        }
    }
}

/// Parses arguments, runs the verb, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let text = outcome.csv.clone().unwrap_or_else(|| render(&outcome.report));
    if let Err(e) = write_output(cfg.out.as_deref(), &text) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let failures = outcome.failures();
    if failures.is_empty() {
        EXIT_PASS
    } else {
        for c in failures {
            if c.tol > 0.0 {
                eprintln!("FAIL {}: {:e} (tol {:e})", c.name, c.value, c.tol);
            } else {
                eprintln!("FAIL {}", c.name);
            }
        }
        EXIT_FAIL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> Result<RunConfig, CliError> {
        let mut full = vec!["parafermion"];
        full.extend_from_slice(args);
        RunConfig::from_cli(Cli::try_parse_from(full).map_err(|e| CliError::Usage(e.to_string()))?)
    }

    #[test]
    fn parses_angles_and_degrees() {
        let c = config(&["solve", "--model", "dense", "--gamma", "45", "--alpha", "90", "--degrees"]).unwrap();
        assert!((c.gamma.unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((c.alpha.unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(c.spin, Some(SpinChoice::Auto));
    }

    #[test]
    fn usage_errors() {
        assert!(config(&["solve", "--model", "dense", "--eta", "0.4", "--alpha", "1"]).is_err());
        assert!(config(&["solve", "--model", "dilute", "--gamma", "0.4", "--alpha", "1"]).is_err());
        assert!(config(&["solve", "--model", "nope", "--gamma", "0.4", "--alpha", "1"]).is_err());
        assert!(config(&["solve", "--model", "dense", "--gamma", "0.4", "--alpha", "4"]).is_err());
        assert!(config(&["solve", "--model", "dense", "--gamma", "0.4", "--alpha", "1", "--tol", "0"]).is_err());
        assert!(config(&["solve", "--model", "dense", "--gamma", "0.4", "--alpha", "1", "--spin", "x"]).is_err());
        assert!(config(&["solve", "--model", "dense", "--gamma", "0.4", "--alpha", "1", "--format", "csv"]).is_err());
        assert!(config(&["cg", "--grid", "gamma:0:1"]).is_err());
        assert!(config(&["ybe-verify", "--model", "dilute", "--eta", "0.4", "--psi1", "0.1"]).is_err());
    }

    #[test]
    fn grid_points() {
        let g = parse_grid("gamma:0:1:5").unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn solve_passes_at_integrable_point() {
        let c = config(&["solve", "--model", "dense", "--gamma", "0.7", "--alpha", "1.1"]).unwrap();
        let o = run(&c).unwrap();
        assert!(o.pass(), "{:?}", o.failures());
        let c = config(&["solve", "--model", "dilute", "--eta", "0.9", "--alpha", "1.1"]).unwrap();
        assert!(run(&c).unwrap().pass());
    }

    #[test]
    fn empty_report_passes() {
        let c = config(&["report"]).unwrap();
        let o = run(&c).unwrap();
        assert!(o.pass());
        assert_eq!(o.report["runs"], json!([]));
    }
}
