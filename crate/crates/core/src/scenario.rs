//! Scenario runner: reproduces the reference experiments end to end and
//! writes diff-able CSV series plus a JSON manifest with one pass/fail entry
//! per check. Identical configs produce bit-identical CSVs (fixed summation
//! order, fixed seeds, no timestamps).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::breathing;
use crate::coercivity;
use crate::error::{Error, Result};
use crate::grid::{make_grid, ComplexField, Grid};
use crate::kaup;
use crate::pde::{evolve, evolve_linear, EvolveConfig};
use crate::scattering;
use crate::soliton;
use crate::volterra;

pub const KINDS: [&str; 7] = [
    "fig1_breathing",
    "fig2_fastslow",
    "fig3_linear_relax",
    "fig6_free_breathing",
    "volterra",
    "coercivity",
    "scattering_sweep",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Bool(bool),
    List(Vec<f64>),
    Text(String),
}

impl ParamValue {
    pub fn render(&self) -> Value {
        match self {
            ParamValue::Number(x) => serde_json::json!(x),
            ParamValue::Bool(b) => serde_json::json!(b),
            ParamValue::List(v) => serde_json::json!(v),
            ParamValue::Text(s) => serde_json::json!(s),
        }
    }
}

/// A parsed scenario configuration: a kind plus a normalized parameter map.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: String,
    pub params: BTreeMap<String, ParamValue>,
    pub sweep: BTreeMap<String, Vec<f64>>,
}

/// One manifest check: `pass` is `measured <= bound` for "le" checks and
/// `|measured - expected| <= tolerance` for "eq" checks (tolerances are
/// multiplied by the runner's `--tol-scale`).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: &'static str,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn le(name: &str, measured: f64, bound: f64, tol_scale: f64) -> Check {
        Check {
            name: name.into(),
            kind: "le",
            measured,
            expected: bound,
            tolerance: bound * tol_scale,
            pass: measured <= bound * tol_scale,
        }
    }

    fn eq(name: &str, measured: f64, expected: f64, tol: f64, tol_scale: f64) -> Check {
        Check {
            name: name.into(),
            kind: "eq",
            measured,
            expected,
            tolerance: tol * tol_scale,
            pass: (measured - expected).abs() <= tol * tol_scale,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub kind: String,
    pub version: String,
    pub parameters: BTreeMap<String, Value>,
    pub tol_scale: f64,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
    pub pass: bool,
}

#[derive(Debug)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl RunArtifact {
    pub fn all_pass(&self) -> bool {
        self.manifest.pass
    }
}

// ---------------------------------------------------------------------------
// Config parsing and validation
// ---------------------------------------------------------------------------

fn parse_scalar(text: &str) -> ParamValue {
    let t = text.trim();
    if let Ok(x) = t.parse::<f64>() {
        return ParamValue::Number(x);
    }
    if t == "true" || t == "false" {
        return ParamValue::Bool(t == "true");
    }
    if t.contains(',') {
        let parts: Vec<_> = t.split(',').map(str::trim).collect();
        if let Ok(nums) = parts.iter().map(|p| p.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>() {
            return ParamValue::List(nums);
        }
    }
    ParamValue::Text(t.to_string())
}

fn value_to_param(v: &Value) -> Option<ParamValue> {
    match v {
        Value::Number(n) => n.as_f64().map(ParamValue::Number),
        Value::Bool(b) => Some(ParamValue::Bool(*b)),
        Value::String(s) => Some(ParamValue::Text(s.clone())),
        Value::Array(items) => {
            let nums: Option<Vec<f64>> = items.iter().map(Value::as_f64).collect();
            nums.map(ParamValue::List)
        }
        _ => None,
    }
}

/// Parse a config file: JSON (object) or `key=value` lines; `#` comments.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let trimmed = text.trim_start();
    let mut params: BTreeMap<String, ParamValue> = BTreeMap::new();
    let mut sweep: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    if trimmed.starts_with('{') {
        let root: Value = serde_json::from_str(&text)?;
        let obj = root
            .as_object()
            .ok_or_else(|| Error::Config("top-level JSON must be an object".into()))?;
        for (key, val) in obj {
            if key == "sweep" {
                let sobj = val
                    .as_object()
                    .ok_or_else(|| Error::Config("\"sweep\" must be an object".into()))?;
                for (sk, sv) in sobj {
                    let nums: Option<Vec<f64>> =
                        sv.as_array().map(|a| a.iter().filter_map(Value::as_f64).collect());
                    match nums {
                        Some(list) if !list.is_empty() => {
                            sweep.insert(sk.clone(), list);
                        }
                        _ => {
                            return Err(Error::Config(format!(
                                "sweep values for \"{sk}\" must be a non-empty numeric array"
                            )))
                        }
                    }
                }
            } else {
                let pv = value_to_param(val).ok_or_else(|| {
                    Error::Config(format!("unsupported JSON value for key \"{key}\""))
                })?;
                params.insert(key.clone(), pv);
            }
        }
    } else {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got \"{line}\"", lineno + 1))
            })?;
            params.insert(key.trim().to_string(), parse_scalar(val));
        }
    }
    let kind = match params.remove("kind") {
        Some(ParamValue::Text(k)) => k,
        Some(other) => {
            return Err(Error::Config(format!("\"kind\" must be a string, got {other:?}")))
        }
        None => return Err(Error::Config("missing required key \"kind\"".into())),
    };
    let name = match params.remove("name") {
        Some(ParamValue::Text(n)) => n,
        None => kind.clone(),
        Some(other) => {
            return Err(Error::Config(format!("\"name\" must be a string, got {other:?}")))
        }
    };
    Ok(ScenarioConfig { name, kind, params, sweep })
}

struct ParamSpec {
    key: &'static str,
    required: bool,
    default: Option<ParamValue>,
    doc: &'static str,
}

fn specs_for(kind: &str) -> Option<Vec<ParamSpec>> {
    use ParamValue::*;
    let num = |x: f64| Some(Number(x));
    let spec = |key, required, default, doc| ParamSpec { key, required, default, doc };
    let common_grid = |n_default: f64, xmax_default: f64| {
        vec![
            spec("xmax", false, num(xmax_default), "half-width of the box"),
            spec("n", false, num(n_default), "grid nodes (odd)"),
        ]
    };
    let series = |dt: f64, t_max: f64, stride: f64| {
        vec![
            spec("dt", false, num(dt), "time step"),
            spec("t_max", false, num(t_max), "final time"),
            spec("record_stride", false, num(stride), "steps between records"),
        ]
    };
    let mut out = match kind {
        "fig1_breathing" => {
            let mut v = vec![spec("q", true, None, "impurity strength (|q| <= 0.05)")];
            v.extend(series(0.005, 60.0, 20.0));
            v.extend(common_grid(4001.0, 40.0));
            v
        }
        "fig6_free_breathing" => {
            let mut v = vec![
                spec("h", true, None, "family parameter (0 < h <= 0.3)"),
                spec("phase_refine", false, Some(Bool(false)), "apply the φ(h) phase correction"),
            ];
            v.extend(series(0.005, 60.0, 20.0));
            v.extend(common_grid(4001.0, 40.0));
            v
        }
        "fig2_fastslow" => {
            let mut v = vec![
                spec("q_list", false, Some(List(vec![0.05, 0.025])), "impurity strengths (attractive)"),
                spec("a0", false, num(-3.0), "initial soliton center"),
                spec("v0", false, num(0.0), "initial soliton velocity"),
                spec("ode_dt", false, num(1e-3), "RK4 step"),
                spec("ode_t_max", false, num(400.0), "ODE horizon"),
                spec("amp_scale", false, num(30.0), "amplitude diagnostic scale"),
            ];
            v.extend(series(0.005, 80.0, 20.0));
            v.extend(common_grid(4001.0, 40.0));
            v
        }
        "fig3_linear_relax" => {
            let mut v = vec![spec(
                "q_list",
                false,
                Some(List(vec![0.5, std::f64::consts::SQRT_2 / 4.0])),
                "linear impurity strengths",
            )];
            v.extend(series(0.01, 350.0, 50.0));
            v.extend(common_grid(20001.0, 200.0));
            v
        }
        "volterra" => vec![
            spec("n_terms", false, num(10.0), "Neumann terms"),
            spec("grid_points", false, num(10001.0), "nodes over [-10, 30]"),
        ],
        "coercivity" => {
            let mut v = vec![
                spec("q", false, num(0.0), "impurity strength (|q| <= 0.1)"),
                spec("oracle_n", false, num(1001.0), "coarse grid for the dense oracle"),
            ];
            v.extend(common_grid(4001.0, 40.0));
            v
        }
        "scattering_sweep" => vec![
            spec("samples", false, num(50.0), "random (k, q) oracle samples"),
            spec("seed", false, num(0.0), "RNG seed"),
            spec("eigen_q", false, num(-0.05), "q for the threshold-eigenstate residual"),
        ],
        _ => return None,
    };
    out.sort_by_key(|s| s.key);
    Some(out)
}

/// Validation report: normalized parameters or the full list of problems.
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub normalized: BTreeMap<String, ParamValue>,
}

pub fn validate_config(cfg: &ScenarioConfig) -> ValidationReport {
    let mut errors = Vec::new();
    let mut normalized = BTreeMap::new();
    let Some(specs) = specs_for(&cfg.kind) else {
        return ValidationReport {
            errors: vec![format!(
                "unknown scenario kind \"{}\" (known: {})",
                cfg.kind,
                KINDS.join(", ")
            )],
            normalized,
        };
    };
    for s in &specs {
        match (cfg.params.get(s.key), &s.default, s.required) {
            (Some(v), _, _) => {
                normalized.insert(s.key.to_string(), v.clone());
            }
            (None, Some(d), _) => {
                normalized.insert(s.key.to_string(), d.clone());
            }
            (None, None, true) => errors.push(format!(
                "missing required parameter \"{}\" ({}) for kind {}",
                s.key, s.doc, cfg.kind
            )),
            _ => {}
        }
    }
    for key in cfg.params.keys() {
        if !specs.iter().any(|s| s.key == key) {
            errors.push(format!("unknown parameter \"{key}\" for kind {}", cfg.kind));
        }
    }
    for key in cfg.sweep.keys() {
        if !specs.iter().any(|s| s.key == key) {
            errors.push(format!("sweep over unknown parameter \"{key}\""));
        }
    }
    // Range checks on the normalized values.
    let num = |k: &str| normalized.get(k).and_then(|v| match v {
        ParamValue::Number(x) => Some(*x),
        _ => None,
    });
    match cfg.kind.as_str() {
        "fig1_breathing" => {
            if let Some(q) = num("q") {
                if !(q.abs() <= 0.05 && q != 0.0) {
                    errors.push(format!("q must satisfy 0 < |q| <= 0.05, got {q}"));
                }
            } else if cfg.params.contains_key("q") {
                errors.push("q must be a number".into());
            }
        }
        "fig6_free_breathing" => {
            if let Some(h) = num("h") {
                if !(h > 0.0 && h <= 0.3) {
                    errors.push(format!("h must satisfy 0 < h <= 0.3, got {h}"));
                }
            } else if cfg.params.contains_key("h") {
                errors.push("h must be a number".into());
            }
        }
        "coercivity" => {
            if let Some(q) = num("q") {
                if q.abs() > 0.1 {
                    errors.push(format!("|q| <= 0.1 required, got {q}"));
                }
            }
        }
        _ => {}
    }
    if let Some(n) = num("n") {
        if n < 3.0 || (n as usize) % 2 == 0 {
            errors.push(format!("n must be odd and >= 3, got {n}"));
        }
    }
    if let Some(dt) = num("dt") {
        if dt <= 0.0 {
            errors.push(format!("dt must be positive, got {dt}"));
        }
    }
    if let Some(t) = num("t_max") {
        if t <= 0.0 {
            errors.push(format!("t_max must be positive, got {t}"));
        }
    }
    ValidationReport { errors, normalized }
}

/// Catalog of scenario kinds with their parameters (for `list`).
pub fn list_scenarios() -> String {
    let mut out = String::new();
    for kind in KINDS {
        let _ = writeln!(out, "{kind}");
        for s in specs_for(kind).unwrap() {
            let req = if s.required {
                "required".to_string()
            } else {
                format!("default {:?}", s.default.as_ref().unwrap().render())
            };
            let _ = writeln!(out, "  {:<14} {:<22} {}", s.key, req, s.doc);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

struct Csv {
    text: String,
    name: String,
}

impl Csv {
    fn new(name: &str, header: &[&str]) -> Csv {
        Csv { text: header.join(",") + "\n", name: name.to_string() }
    }

    fn row(&mut self, values: &[f64]) {
        let line: Vec<String> = values.iter().map(|&v| fmt(v)).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    fn write(self, dir: &Path) -> Result<String> {
        fs::write(dir.join(&self.name), self.text)?;
        Ok(self.name)
    }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct RunCtx {
    params: BTreeMap<String, ParamValue>,
    checks: Vec<Check>,
    files: Vec<String>,
    notes: Vec<String>,
    tol_scale: f64,
}

impl RunCtx {
    fn num(&self, key: &str) -> f64 {
        match self.params.get(key) {
            Some(ParamValue::Number(x)) => *x,
            other => panic!("validated parameter {key} missing or non-numeric: {other:?}"),
        }
    }

    fn list(&self, key: &str) -> Vec<f64> {
        match self.params.get(key) {
            Some(ParamValue::List(v)) => v.clone(),
            Some(ParamValue::Number(x)) => vec![*x],
            other => panic!("validated parameter {key} missing or non-list: {other:?}"),
        }
    }

    fn flag(&self, key: &str) -> bool {
        matches!(self.params.get(key), Some(ParamValue::Bool(true)))
    }

    fn grid(&self) -> Result<Grid> {
        let xmax = self.num("xmax");
        make_grid(-xmax, xmax, self.num("n") as usize)
    }
}

/// Run one scenario into `out_dir/<name>/`. Config errors are reported
/// exhaustively before any computation starts.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    tol_scale: f64,
    quiet: bool,
) -> Result<RunArtifact> {
    let report = validate_config(cfg);
    if !report.errors.is_empty() {
        return Err(Error::Config(report.errors.join("; ")));
    }
    let dir = out_dir.join(&cfg.name);
    fs::create_dir_all(&dir)?;
    let mut ctx = RunCtx {
        params: report.normalized,
        checks: Vec::new(),
        files: Vec::new(),
        notes: Vec::new(),
        tol_scale,
    };

    match cfg.kind.as_str() {
        "fig1_breathing" => run_fig1(&mut ctx, &dir)?,
        "fig6_free_breathing" => run_fig6(&mut ctx, &dir)?,
        "fig2_fastslow" => run_fig2(&mut ctx, &dir)?,
        "fig3_linear_relax" => run_fig3(&mut ctx, &dir)?,
        "volterra" => run_volterra(&mut ctx, &dir)?,
        "coercivity" => run_coercivity(&mut ctx, &dir)?,
        "scattering_sweep" => run_scattering(&mut ctx, &dir)?,
        other => return Err(Error::Config(format!("unknown scenario kind \"{other}\""))),
    }

    let manifest = Manifest {
        scenario: cfg.name.clone(),
        kind: cfg.kind.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        parameters: ctx.params.iter().map(|(k, v)| (k.clone(), v.render())).collect(),
        tol_scale,
        pass: ctx.checks.iter().all(|c| c.pass),
        checks: ctx.checks,
        files: ctx.files,
        notes: ctx.notes,
    };
    // Manifest is written last, atomically.
    let tmp = dir.join("manifest.json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(&manifest)?)?;
    fs::rename(&tmp, dir.join("manifest.json"))?;

    if !quiet {
        for c in &manifest.checks {
            println!(
                "[{}] {}: measured {:.6e} vs {} {:.6e}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.measured,
                if c.kind == "le" { "bound" } else { "expected" },
                c.expected,
            );
        }
    }
    Ok(RunArtifact { dir, manifest })
}

fn drift_checks(ctx: &mut RunCtx, series: &crate::pde::TimeSeries, mass_tol: f64) {
    let m0 = series.mass[0];
    let e0 = series.energy[0];
    let mass_drift = series
        .mass
        .iter()
        .map(|m| (m - m0).abs() / m0)
        .fold(0.0, f64::max);
    let energy_drift = series.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    ctx.checks.push(Check::le("mass_drift", mass_drift, mass_tol, ctx.tol_scale));
    ctx.checks.push(Check::le("energy_drift", energy_drift, 1e-4, ctx.tol_scale));
}

fn run_fig1(ctx: &mut RunCtx, dir: &Path) -> Result<()> {
    let q = ctx.num("q");
    let grid = ctx.grid()?;
    let u0 = breathing::breathing_initial(q, grid);
    let cfg = EvolveConfig::new(ctx.num("dt"), ctx.num("t_max"), q)?
        .with_stride(ctx.num("record_stride") as usize);
    let series = evolve(&u0, &cfg)?;

    let pred = breathing::theorem_prediction(&u0, q, 10.0)?;
    let (lambda, int_w0) = (pred.lambda, pred.integral_w0);
    ctx.notes.push(format!("lambda = {lambda:.12}, integral_w0 = {int_w0:.12}"));

    let mut csv = Csv::new(
        "series.csv",
        &["t", "abs_u0", "re_u0", "im_u0", "abs_prediction", "mass", "energy"],
    );
    for (j, &t) in series.times.iter().enumerate() {
        let p = if t >= 1.0 {
            breathing::prediction_value(lambda, int_w0, t).norm()
        } else {
            f64::NAN
        };
        csv.row(&[t, series.u_at_0[j].norm(), series.u_at_0[j].re, series.u_at_0[j].im, p, series.mass[j], series.energy[j]]);
    }
    ctx.files.push(csv.write(dir)?);

    // Oscillation period of |u(0,t)| over [5, t_max] vs 4π/λ².
    let lo = series.times.iter().position(|&t| t >= 5.0).unwrap_or(0);
    let amp: Vec<f64> = series.u_at_0[lo..].iter().map(|v| v.norm()).collect();
    let period = soliton::period_estimate(&amp, &series.times[lo..])?;
    let want = 4.0 * std::f64::consts::PI / (lambda * lambda);
    ctx.checks.push(Check::eq("period_vs_4pi_over_lambda_sq", period, want, 0.02 * want, ctx.tol_scale));

    // Pointwise envelope bound over [10, t_max]:
    // ||u| - |pred|| <= 0.25 * (2 * 2q * sqrt(2/(π t))).
    let mut worst_ratio = 0.0f64;
    for (j, &t) in series.times.iter().enumerate() {
        if t < 10.0 {
            continue;
        }
        let pred_t = breathing::prediction_value(lambda, int_w0, t).norm();
        let tol = 0.25 * 2.0 * int_w0.abs() * (2.0 / (std::f64::consts::PI * t)).sqrt();
        worst_ratio = worst_ratio.max((series.u_at_0[j].norm() - pred_t).abs() / tol);
    }
    ctx.checks.push(Check::le("envelope_pointwise_ratio", worst_ratio, 1.0, ctx.tol_scale));

    drift_checks(ctx, &series, 1e-6);
    Ok(())
}

fn run_fig6(ctx: &mut RunCtx, dir: &Path) -> Result<()> {
    let h = ctx.num("h");
    let grid = ctx.grid()?;
    let refine = ctx.flag("phase_refine");
    let u0 = kaup::free_breathing_initial(h, grid);
    let cfg = EvolveConfig::new(ctx.num("dt"), ctx.num("t_max"), 0.0)?
        .with_stride(ctx.num("record_stride") as usize);
    let series = evolve(&u0, &cfg)?;

    let mut csv = Csv::new(
        "series.csv",
        &["t", "abs_u0", "re_u0", "im_u0", "abs_prediction", "mass", "energy"],
    );
    let mut sup_dev = 0.0f64;
    let mut amps = Vec::new();
    let mut times = Vec::new();
    for (j, &t) in series.times.iter().enumerate() {
        let p = if t >= 1.0 {
            kaup::free_breathing_prediction(h, t, refine)?.norm()
        } else {
            f64::NAN
        };
        let a = series.u_at_0[j].norm();
        csv.row(&[t, a, series.u_at_0[j].re, series.u_at_0[j].im, p, series.mass[j], series.energy[j]]);
        if (10.0..=60.0).contains(&t) {
            sup_dev = sup_dev.max((a - p).abs());
            amps.push(a);
            times.push(t);
        }
    }
    ctx.files.push(csv.write(dir)?);

    let bound = 0.5 * h * h + 0.25 * h * (std::f64::consts::PI / (2.0 * 10.0)).sqrt();
    ctx.checks.push(Check::le("sup_moduli_deviation", sup_dev, bound, ctx.tol_scale));

    let period = soliton::period_estimate(&amps, &times)?;
    let want = 4.0 * std::f64::consts::PI;
    ctx.checks.push(Check::eq("period_4pi", period, want, 0.02 * want, ctx.tol_scale));

    drift_checks(ctx, &series, 1e-6);
    Ok(())
}

fn run_fig2(ctx: &mut RunCtx, dir: &Path) -> Result<()> {
    let qs = ctx.list("q_list");
    if qs.len() != 2 {
        return Err(Error::Config(format!("fig2 takes exactly two q values, got {qs:?}")));
    }
    let grid = ctx.grid()?;
    let scale = ctx.num("amp_scale");
    let mut ode_periods = Vec::new();
    let mut fast_periods = Vec::new();
    for (idx, &q) in qs.iter().enumerate() {
        // Effective ODE.
        let path = soliton::integrate_soliton_ode(
            ctx.num("a0"),
            ctx.num("v0"),
            q,
            ctx.num("ode_t_max"),
            ctx.num("ode_dt"),
        )?;
        let mut csv = Csv::new(&format!("ode_q{idx}.csv"), &["t", "a", "v", "gamma"]);
        for s in path.iter().step_by(50) {
            csv.row(&[s.t, s.a, s.v, s.gamma]);
        }
        ctx.files.push(csv.write(dir)?);
        let (aa, tt): (Vec<f64>, Vec<f64>) = path.iter().map(|s| (s.a, s.t)).unzip();
        ode_periods.push(soliton::period_estimate(&aa, &tt)?);

        // PDE with center tracking.
        let u0 = ComplexField::from_real_fn(grid, |x| 1.0 / (x - ctx.num("a0")).cosh());
        let cfg = EvolveConfig::new(ctx.num("dt"), ctx.num("t_max"), q)?
            .with_stride(ctx.num("record_stride") as usize)
            .with_center_tracking();
        let series = evolve(&u0, &cfg)?;
        let diag = soliton::amplitude_diagnostic(&series, scale)?;
        let center = series.center.as_ref().unwrap();
        let mut csv = Csv::new(
            &format!("pde_q{idx}.csv"),
            &["t", "center", "amp_at_center", "amp_diagnostic", "abs_u0", "mass", "energy"],
        );
        for (j, &t) in series.times.iter().enumerate() {
            csv.row(&[
                t,
                center[j],
                series.amp_at_center.as_ref().unwrap()[j],
                diag[j],
                series.u_at_0[j].norm(),
                series.mass[j],
                series.energy[j],
            ]);
        }
        ctx.files.push(csv.write(dir)?);

        let lo = series.times.iter().position(|&t| t >= 2.0).unwrap_or(0);
        fast_periods.push(soliton::period_estimate(&diag[lo..], &series.times[lo..])?);
    }
    let ratio = ode_periods[1] / ode_periods[0];
    let want = (qs[0] / qs[1]).sqrt();
    ctx.checks.push(Check::eq("ode_period_ratio", ratio, want, 0.02 * want, ctx.tol_scale));

    let fast_ratio = fast_periods[1] / fast_periods[0];
    ctx.checks.push(Check::eq("fast_period_agreement", fast_ratio, 1.0, 0.15, ctx.tol_scale));
    let four_pi = 4.0 * std::f64::consts::PI;
    ctx.checks.push(Check::eq(
        "fast_period_vs_4pi",
        fast_periods[0],
        four_pi,
        0.15 * four_pi,
        ctx.tol_scale,
    ));
    ctx.notes.push(format!("ode periods: {ode_periods:?}, fast periods: {fast_periods:?}"));
    Ok(())
}

fn run_fig3(ctx: &mut RunCtx, dir: &Path) -> Result<()> {
    let qs = ctx.list("q_list");
    if qs.len() != 2 {
        return Err(Error::Config(format!("fig3 takes exactly two q values, got {qs:?}")));
    }
    ctx.notes.push(
        "q_list[1] follows the 1/2 -> (1/2)/sqrt(2) = sqrt(2)/4 halved-q² reading; the \
         figure caption's \"sqrt(2)/2\" is recorded here as a typo"
            .into(),
    );
    let grid = ctx.grid()?;
    let mut periods = Vec::new();
    for (idx, &q) in qs.iter().enumerate() {
        let u0 = ComplexField::from_real_fn(grid, |x| 1.0 / x.cosh());
        let cfg = EvolveConfig::new(ctx.num("dt"), ctx.num("t_max"), q)?
            .with_stride(ctx.num("record_stride") as usize)
            .linear();
        let series = evolve_linear(&u0, &cfg)?;
        let mut csv = Csv::new(
            &format!("series_q{idx}.csv"),
            &["t", "abs_u0", "re_u0", "im_u0", "mass", "energy"],
        );
        for (j, &t) in series.times.iter().enumerate() {
            csv.row(&[
                t,
                series.u_at_0[j].norm(),
                series.u_at_0[j].re,
                series.u_at_0[j].im,
                series.mass[j],
                series.energy[j],
            ]);
        }
        ctx.files.push(csv.write(dir)?);

        let amp: Vec<f64> = series.u_at_0.iter().map(|v| v.norm()).collect();
        periods.push(soliton::period_estimate(&amp, &series.times)?);

        // Plateau: mean of |u(0,t)| over the last two beat periods vs
        // v_q(0) ∫ sech v_q.
        let beat = 4.0 * std::f64::consts::PI / (q * q);
        let t_end = *series.times.last().unwrap();
        let window_lo = t_end - 2.0 * beat.min(0.45 * t_end);
        let window: Vec<f64> = series
            .times
            .iter()
            .zip(&amp)
            .filter(|(t, _)| **t >= window_lo)
            .map(|(_, a)| *a)
            .collect();
        let plateau = window.iter().sum::<f64>() / window.len() as f64;
        let vq = ComplexField::from_real_fn(grid, |x| q.sqrt() * (-q * x.abs()).exp());
        let sech = ComplexField::from_real_fn(grid, |x| 1.0 / x.cosh());
        let reference = vq.at0().re * crate::grid::inner(&sech, &vq)?;
        ctx.checks.push(Check::eq(
            &format!("plateau_q{idx}"),
            plateau,
            reference,
            0.05 * reference,
            ctx.tol_scale,
        ));

        let m0 = series.mass[0];
        let drift = series.mass.iter().map(|m| (m - m0).abs() / m0).fold(0.0, f64::max);
        ctx.checks.push(Check::le(&format!("mass_drift_q{idx}"), drift, 1e-8, ctx.tol_scale));
    }
    let ratio = periods[1] / periods[0];
    ctx.checks.push(Check::eq("period_ratio", ratio, 2.0, 0.05 * 2.0, ctx.tol_scale));
    ctx.notes.push(format!("measured periods: {periods:?}"));
    Ok(())
}

fn run_volterra(ctx: &mut RunCtx, dir: &Path) -> Result<()> {
    let n_terms = ctx.num("n_terms") as usize;
    let n = ctx.num("grid_points") as usize;
    let sum = volterra::volterra_series(n_terms, n)?;
    let stride = (n / 200).max(1);
    let mut csv = Csv::new("volterra.csv", &["x", "v1_num", "v2_num", "v1_exact", "v2_exact"]);
    for j in (0..n).step_by(stride) {
        let (e1, e2) = volterra::exact_v(sum.x[j]);
        csv.row(&[sum.x[j], sum.v1[j], sum.v2[j], e1, e2]);
    }
    ctx.files.push(csv.write(dir)?);

    let limit = volterra::resonance_limit();
    ctx.checks.push(Check::eq("resonance_limit_at_left_edge", sum.v2[0], limit, 1e-3, ctx.tol_scale));

    let mut sup = 0.0f64;
    for (j, &x) in sum.x.iter().enumerate() {
        if (-5.0..=5.0).contains(&x) {
            let (e1, e2) = volterra::exact_v(x);
            sup = sup.max((sum.v1[j] - e1).abs()).max((sum.v2[j] - e2).abs());
        }
    }
    ctx.checks.push(Check::le("sup_deviation_from_exact", sup, 1e-4, ctx.tol_scale));
    Ok(())
}

fn run_coercivity(ctx: &mut RunCtx, dir: &Path) -> Result<()> {
    let q = ctx.num("q");
    let grid = ctx.grid()?;
    let (mp, mm) = coercivity::coercivity_blocks(q, grid)?;
    let minimum = mp.min(mm);
    let coarse = make_grid(-grid.xmax, grid.xmax, ctx.num("oracle_n") as usize)?;
    let banded_coarse = coercivity::coercivity_estimate(q, coarse)?;
    let dense = coercivity::coercivity_dense_oracle(q, coarse)?;

    let mut csv = Csv::new(
        "coercivity.csv",
        &["q", "minimum", "plus_block", "minus_block", "banded_coarse", "dense_oracle"],
    );
    csv.row(&[q, minimum, mp, mm, banded_coarse, dense]);
    ctx.files.push(csv.write(dir)?);

    ctx.checks.push(Check::le("oracle_disagreement", (banded_coarse - dense).abs(), 1e-3, ctx.tol_scale));
    if q == 0.0 {
        ctx.checks.push(Check::le("below_analytic_bound", 0.0555 * 0.99 - minimum, 0.0, ctx.tol_scale));
        let unconstrained = coercivity::unconstrained_plus_minimum(0.0, grid)?;
        ctx.checks.push(Check::le("unconstrained_plus_negative", unconstrained, 0.0, ctx.tol_scale));
    } else {
        ctx.checks.push(Check::le("positive_minimum", -minimum, 0.0, ctx.tol_scale));
    }
    Ok(())
}

fn run_scattering(ctx: &mut RunCtx, dir: &Path) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let samples = ctx.num("samples") as usize;
    let seed = ctx.num("seed") as u64;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);

    let mut csv = Csv::new(
        "scattering.csv",
        &[
            "k", "q", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im",
            "oracle_rel_err",
        ],
    );
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let k = rng.gen_range(0.1..5.0);
        let q = rng.gen_range(-0.05..0.05);
        let kk = Complex64::new(k, 0.0);
        let c = scattering::scattering_coeffs(kk, q)?;
        let s = scattering::scattering_coeffs_linsolve(kk, q)?;
        let scale = 1.0 + c.b.norm();
        let err = [(c.a - s.a), (c.b - s.b), (c.c - s.c), (c.d - s.d)]
            .iter()
            .map(|d| d.norm() / scale)
            .fold(0.0, f64::max);
        worst = worst.max(err);
        csv.row(&[k, q, c.a.re, c.a.im, c.b.re, c.b.im, c.c.re, c.c.im, c.d.re, c.d.im, err]);
    }
    ctx.files.push(csv.write(dir)?);
    ctx.checks.push(Check::le("closed_form_vs_linsolve", worst, 1e-10, ctx.tol_scale));

    // (A,B,C,D)(iq) = (0,0,1,0).
    let mut worst_iq = 0.0f64;
    for q in [0.03, -0.04, 0.05] {
        let c = scattering::scattering_coeffs(Complex64::new(0.0, q), q)?;
        worst_iq = worst_iq
            .max(c.a.norm())
            .max(c.b.norm())
            .max((c.c - 1.0).norm())
            .max(c.d.norm());
    }
    ctx.checks.push(Check::le("coefficients_at_k_iq", worst_iq, 1e-12, ctx.tol_scale));

    // Threshold eigenstate residual.
    let qe = ctx.num("eigen_q");
    let big = make_grid(-200.0, 200.0, 40001)?;
    let eig = scattering::eigenstate_near_one(qe, big)?;
    let applied = kaup::apply_hq(&eig.state, qe);
    let terms: Vec<f64> = (1..big.n - 1)
        .map(|j| {
            let ru = applied.upper[j] - eig.mu_eig * eig.state.upper[j];
            let rl = applied.lower[j] - eig.mu_eig * eig.state.lower[j];
            big.weight(j) * (ru.norm_sqr() + rl.norm_sqr())
        })
        .collect();
    let residual = crate::grid::pairwise_sum(&terms).sqrt();
    ctx.checks.push(Check::le("eigenstate_residual", residual, 1e-3, ctx.tol_scale));

    // Near-zero root offsets scale like sqrt(q).
    let mut roots_csv = Csv::new(
        "roots.csv",
        &["q", "root1_re", "root1_im", "root2_re", "root2_im", "offset"],
    );
    let mut pts = Vec::new();
    for q in [1e-4, 1e-3, 1e-2] {
        let (r1, r2) = scattering::find_b_roots_near_zero(q)?;
        let off = (r1 - Complex64::new(0.0, -1.0)).norm();
        roots_csv.row(&[q, r1.re, r1.im, r2.re, r2.im, off]);
        pts.push((q.ln(), off.ln()));
    }
    ctx.files.push(roots_csv.write(dir)?);
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    ctx.checks.push(Check::eq("root_offset_exponent", slope, 0.5, 0.02, ctx.tol_scale));
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Expand the sweep grids into individual configurations.
pub fn expand_sweep(cfg: &ScenarioConfig) -> Vec<ScenarioConfig> {
    if cfg.sweep.is_empty() {
        return vec![cfg.clone()];
    }
    let mut combos: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
    for (key, values) in &cfg.sweep {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for combo in &combos {
            for &v in values {
                let mut c = combo.clone();
                c.insert(key.clone(), v);
                next.push(c);
            }
        }
        combos = next;
    }
    combos
        .into_iter()
        .map(|combo| {
            let mut out = cfg.clone();
            out.sweep.clear();
            let mut suffix = String::new();
            for (k, v) in &combo {
                out.params.insert(k.clone(), ParamValue::Number(*v));
                let _ = write!(suffix, "_{k}={v}");
            }
            out.name = format!("{}{}", cfg.name, suffix);
            out
        })
        .collect()
}

/// Run all sweep points (concurrently; each run owns its output directory).
pub fn run_sweep(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    tol_scale: f64,
    quiet: bool,
) -> Result<Vec<RunArtifact>> {
    let points = expand_sweep(cfg);
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut results: Vec<Option<Result<RunArtifact>>> = Vec::new();
    results.resize_with(points.len(), || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(points.len()) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if idx >= points.len() {
                    break;
                }
                let res = run_scenario(&points[idx], out_dir, tol_scale, quiet);
                slots.lock().unwrap()[idx] = Some(res);
            });
        }
    });
    results.into_iter().map(|r| r.expect("worker filled every slot")).collect()
}
