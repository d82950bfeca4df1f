//! Config, report and the `check | geometry | solve` pipelines.
//!
//! Exit codes are the machine contract:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | config or schema error |
//! | 2 | a requested hypothesis check failed |
//! | 3 | a requested hypothesis check was inconclusive |
//! | 4 | solver nonconvergence or the two critical points are not distinct |
//! | 5 | mountain-pass geometry not certified |
//!
//! Logs go to standard error; files are written atomically (temp + rename).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checkers::{self, Condition, ConditionReport, SampleSpec, V1Spec, Verdict};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::geometry::{certify, default_direction, GeometryConfig, GeometryReport};
use crate::grid::{DiffScheme, RadialGrid};
use crate::model::{Nonlinearity, Potential, ProblemSpec};
use crate::solvers::{minimize_in_ball, mountain_pass, verify_distinct, CriticalPoint, Distinctness, MPPath, SolverConfig, TraceRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK_FAIL: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;
pub const EXIT_GEOMETRY: i32 = 5;

pub const REPORT_FILE: &str = "report.json";
pub const SOLUTION_FILES: [&str; 2] = ["step1.csv", "step2.csv"];
pub const TRACE_FILES: [&str; 2] = ["step1_trace.csv", "step2_trace.csv"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub b: f64,
    pub potential: Potential,
    pub nonlinearity: Nonlinearity,
    /// Auto-selected as `max(0, 1 − inf V)` when null.
    #[serde(default)]
    pub v0: Option<f64>,
}

impl ProblemConfig {
    pub fn spec(&self) -> ProblemSpec {
        let spec = ProblemSpec::new(self.b, self.potential.clone(), self.nonlinearity.clone());
        match self.v0 {
            Some(v0) => spec.with_v0(v0),
            None => spec,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radius: f64,
    pub n: usize,
    pub scheme: DiffScheme,
    /// `solve` also re-solves on `B_{1.5R}` at the same spacing and reports
    /// the level changes.
    pub truncation_check: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            radius: 8.0,
            n: 256,
            scheme: DiffScheme::Staggered4,
            truncation_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub conditions: Vec<Condition>,
    pub samples: SampleSpec,
    pub v1: V1Spec,
    /// Defaults to `4 + k/20` up to 10.
    pub mu_grid: Option<Vec<f64>>,
    /// Minimum growth of `|F̃|/u⁴` from `|u| = 10` to `10³`.
    pub divergence_factor: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            conditions: vec![Condition::V1, Condition::S1, Condition::S2, Condition::S3, Condition::AR],
            samples: SampleSpec::default(),
            v1: V1Spec::default(),
            mu_grid: None,
            divergence_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_seed() -> u64 {
    42
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.problem.spec().validate()?;
        if !(self.grid.radius > 0.0) || !self.grid.radius.is_finite() {
            return Err(Error::Config(format!("grid.radius must be positive, got {}", self.grid.radius)));
        }
        self.solver.validate()?;
        self.geometry.validate()?;
        self.checks.samples.validate()?;
        if self.checks.conditions.contains(&Condition::V1) {
            self.checks.v1.validate()?;
        }
        if !(self.checks.divergence_factor > 1.0) {
            return Err(Error::Config("checks.divergence_factor must exceed 1".into()));
        }
        Ok(())
    }

    /// Parses, applies `key=value` overrides (dotted paths; values as JSON,
    /// else as strings) and validates.
    pub fn load(text: &str, overrides: &[String]) -> Result<RunConfig> {
        // parse once unmodified for line-precise errors
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if overrides.is_empty() {
            config.validate()?;
            return Ok(config);
        }
        let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: RunConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(format!("after --set overrides: {e}")))?;
        config.validate()?;
        Ok(config)
    }
}

pub fn apply_override(value: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{assignment}`")))?;
    let parsed: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = value;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("--set key `{key}` has an empty segment")));
        }
        let map = match node {
            Value::Object(m) => m,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just created")
            }
            _ => return Err(Error::Config(format!("--set key `{key}`: `{part}` is not inside an object"))),
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one segment")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub point: CriticalPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<MPPath>,
}

/// Levels re-solved on the enlarged ball; report only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationCheck {
    pub radius: f64,
    pub n: usize,
    pub level_min: f64,
    pub level_mp: Option<f64>,
    /// `|L(1.5R) − L(R)| / |L(R)|`
    pub change_min: f64,
    pub change_mp: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    /// The shift actually applied.
    pub v0: f64,
    pub exit_code: i32,
    pub hypotheses: Vec<ConditionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step1: Option<StepSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step2: Option<StepSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinctness: Option<Distinctness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub versions: BTreeMap<String, String>,
}

impl RunReport {
    fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            v0: config.problem.spec().shift_constant(),
            exit_code: EXIT_OK,
            hypotheses: vec![],
            geometry: None,
            step1: None,
            step2: None,
            distinctness: None,
            truncation: None,
            errors: vec![],
            timings: BTreeMap::new(),
            versions: BTreeMap::from([
                ("kirchhoff-mp".to_string(), env!("CARGO_PKG_VERSION").to_string()),
                ("report-format".to_string(), "1".to_string()),
            ]),
        }
    }
}

/// Solution profiles and traces produced by `solve`, written next to the report.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub profiles: Vec<(String, Vec<f64>, Vec<f64>)>,
    pub traces: Vec<(String, Vec<TraceRow>)>,
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, key: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.insert(key.to_string(), t.elapsed().as_secs_f64());
    out
}

fn exit_for_checks(reports: &[ConditionReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        EXIT_CHECK_FAIL
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

pub fn run_checks(config: &RunConfig) -> Result<Vec<ConditionReport>> {
    let spec = config.problem.spec().shifted();
    let nl = spec.shifted_nonlinearity();
    let c = &config.checks;
    let mut conditions = c.conditions.clone();
    conditions.sort();
    conditions.dedup();
    let mut out = Vec::new();
    for cond in conditions {
        info!("checking {cond:?}");
        let r = match cond {
            Condition::V1 => checkers::check_v1(&config.problem.potential, &c.v1, config.seed)?,
            Condition::S1 => checkers::check_s1(&nl, &c.samples),
            Condition::S2 => checkers::check_s2(&nl, &c.samples, c.divergence_factor),
            Condition::S3 => checkers::check_s3(&nl, &c.samples),
            Condition::AR => {
                let grid = c.mu_grid.clone().unwrap_or_else(checkers::default_mu_grid);
                checkers::check_ar(&nl, &grid, &c.samples)?
            }
        };
        info!("{cond:?}: {:?} (margin {:e})", r.verdict, r.margin);
        out.push(r);
    }
    Ok(out)
}

fn functional(config: &RunConfig) -> Result<Functional> {
    let grid = RadialGrid::new(config.grid.radius, config.grid.n, config.grid.scheme)?;
    Functional::new(&config.problem.spec().shifted(), &grid)
}

pub fn cmd_check(config: &RunConfig) -> Result<(RunReport, Artifacts)> {
    let mut report = RunReport::new("check", config);
    report.hypotheses = timed(&mut report.timings, "checks", || run_checks(config))?;
    report.exit_code = exit_for_checks(&report.hypotheses);
    Ok((report, Artifacts::default()))
}

pub fn cmd_geometry(config: &RunConfig) -> Result<(RunReport, Artifacts)> {
    let mut report = RunReport::new("geometry", config);
    let f = functional(config)?;
    let geo = timed(&mut report.timings, "geometry", || certify(&f, &config.geometry, config.seed))?;
    report.exit_code = if geo.holds { EXIT_OK } else { EXIT_GEOMETRY };
    report.geometry = Some(geo);
    Ok((report, Artifacts::default()))
}

/// Checks (report only), geometry, local minimizer, mountain pass, distinctness.
pub fn cmd_solve(config: &RunConfig) -> Result<(RunReport, Artifacts)> {
    let mut report = RunReport::new("solve", config);
    let mut artifacts = Artifacts::default();
    report.hypotheses = timed(&mut report.timings, "checks", || run_checks(config))?;
    let f = functional(config)?;
    let geo = timed(&mut report.timings, "geometry", || certify(&f, &config.geometry, config.seed))?;
    info!("geometry: rho = {}, eta = {:e}, holds = {}", geo.rho, geo.eta, geo.holds);
    if !geo.holds {
        report.exit_code = EXIT_GEOMETRY;
        report.geometry = Some(geo);
        return Ok((report, artifacts));
    }
    let nodes = f.grid().nodes().to_vec();

    let dir = default_direction(&f);
    let t0 = geo.t_star.unwrap_or(0.0).min(0.5 * geo.rho);
    let start: Vec<f64> = dir.iter().map(|d| t0 * d).collect();
    let step1 = timed(&mut report.timings, "step1", || minimize_in_ball(&f, geo.rho, &start, &config.solver));
    info!("step 1: level {:e}, residual {:e}, converged {}", step1.level, step1.residual, step1.converged);
    artifacts.profiles.push((SOLUTION_FILES[0].into(), nodes.clone(), step1.u.clone()));
    artifacts.traces.push((TRACE_FILES[0].into(), step1.trace.clone()));
    let mut ok = step1.converged;

    let e = geo.negative_point.as_ref().expect("geometry holds").e.clone();
    let mp = timed(&mut report.timings, "step2", || mountain_pass(&f, &e, Some(geo.eta), &config.solver));
    match mp {
        Ok(mp) => {
            info!("step 2: level {:e}, residual {:e}, converged {}", mp.point.level, mp.point.residual, mp.point.converged);
            ok &= mp.point.converged;
            artifacts.profiles.push((SOLUTION_FILES[1].into(), nodes, mp.point.u.clone()));
            artifacts.traces.push((TRACE_FILES[1].into(), mp.point.trace.clone()));
            let d = verify_distinct(&f, &step1, &mp.point, &config.solver);
            ok &= d.pass;
            report.distinctness = Some(d);
            report.step2 = Some(StepSummary {
                point: mp.point,
                path: Some(mp.path),
            });
        }
        Err(err) => {
            warn!("step 2 failed: {err}");
            report.errors.push(format!("step 2: {err}"));
            ok = false;
        }
    }
    if config.grid.truncation_check {
        let level_mp = report.step2.as_ref().map(|s| s.point.level);
        let t = timed(&mut report.timings, "truncation", || {
            truncation_check(config, &step1, level_mp, &start, &e, geo.rho)
        });
        match t {
            Ok(t) => report.truncation = Some(t),
            Err(err) => report.errors.push(format!("truncation check: {err}")),
        }
    }
    report.step1 = Some(StepSummary { point: step1, path: None });
    report.geometry = Some(geo);
    report.exit_code = if ok { EXIT_OK } else { EXIT_NONCONVERGENCE };
    Ok((report, artifacts))
}

/// Relative level change above which the truncation check adds a note.
const TRUNCATION_WARN: f64 = 1e-2;

/// Re-runs both steps on `B_{1.5R}` with `⌈3n/2⌉` nodes, padding the start
/// and `e` with zeros.
fn truncation_check(
    config: &RunConfig,
    step1: &CriticalPoint,
    level_mp: Option<f64>,
    start: &[f64],
    e: &[f64],
    rho: f64,
) -> Result<TruncationCheck> {
    let n = (3 * config.grid.n).div_ceil(2);
    let radius = 1.5 * config.grid.radius;
    let grid = RadialGrid::new(radius, n, config.grid.scheme)?;
    let f = Functional::new(&config.problem.spec().shifted(), &grid)?;
    let pad = |v: &[f64]| {
        let mut out = v.to_vec();
        out.resize(n, 0.0);
        out
    };
    let mut notes = Vec::new();
    let min = minimize_in_ball(&f, rho, &pad(start), &config.solver);
    if !min.converged {
        notes.push("step 1 did not converge on the enlarged ball".into());
    }
    let rel = |new: f64, old: f64| (new - old).abs() / old.abs().max(f64::MIN_POSITIVE);
    let mut mp_level = None;
    if level_mp.is_some() {
        match mountain_pass(&f, &pad(e), None, &config.solver) {
            Ok(mp) => {
                if !mp.point.converged {
                    notes.push("step 2 did not converge on the enlarged ball".into());
                }
                mp_level = Some(mp.point.level);
            }
            Err(err) => notes.push(format!("step 2 on the enlarged ball: {err}")),
        }
    }
    let change_min = rel(min.level, step1.level);
    let change_mp = mp_level.zip(level_mp).map(|(a, b)| rel(a, b));
    for (step, change) in [("step 1", Some(change_min)), ("step 2", change_mp)] {
        if let Some(c) = change.filter(|&c| c > TRUNCATION_WARN) {
            warn!("{step} level moved by {c:.3e} on the enlarged ball");
            notes.push(format!("{step} level moved by {c:.3e}; the truncation radius is too small for it"));
        }
    }
    Ok(TruncationCheck {
        radius,
        n,
        level_min: min.level,
        level_mp: mp_level,
        change_min,
        change_mp,
        notes,
    })
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// `r,u` rows with 17 significant digits.
pub fn profile_csv(r: &[f64], u: &[f64]) -> String {
    let mut s = String::from("r,u\n");
    for (r, u) in r.iter().zip(u) {
        writeln!(s, "{r:.16e},{u:.16e}").expect("writing to a String");
    }
    s
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("iter,level,residual,cerami\n");
    for t in rows {
        writeln!(s, "{},{:.16e},{:.16e},{:.16e}", t.iter, t.level, t.residual, t.cerami).expect("writing to a String");
    }
    s
}

pub fn write_outputs(dir: &Path, report: &RunReport, artifacts: &Artifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(&dir.join(REPORT_FILE), (json + "\n").as_bytes())?;
    for (name, r, u) in &artifacts.profiles {
        write_atomic(&dir.join(name), profile_csv(r, u).as_bytes())?;
    }
    for (name, rows) in &artifacts.traces {
        write_atomic(&dir.join(name), trace_csv(rows).as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override a config entry, e.g. `--set grid.n=128` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(name = "kirchhoff-mp", version, about = "Two-solution pipeline for a radial nonlocal Kirchhoff problem")]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Sample the structural hypotheses on V and f.
    Check(CommonArgs),
    /// Certify the mountain-pass geometry.
    Geometry(CommonArgs),
    /// Run the full two-solution pipeline.
    Solve(CommonArgs),
}

type Pipeline = fn(&RunConfig) -> Result<(RunReport, Artifacts)>;

/// Entry point behind the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, common, cmd): (&str, CommonArgs, Pipeline) = match args.command {
        Sub::Check(c) => ("check", c, cmd_check),
        Sub::Geometry(c) => ("geometry", c, cmd_geometry),
        Sub::Solve(c) => ("solve", c, cmd_solve),
    };
    let mut overrides = common.set.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(out) = &common.output {
        overrides.push(format!("output_dir={}", Value::String(out.display().to_string())));
    }
    let config = match fs::read_to_string(&common.config)
        .map_err(Error::from)
        .and_then(|text| RunConfig::load(&text, &overrides))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", common.config.display());
            return EXIT_CONFIG;
        }
    };
    info!("{name}: config {}", common.config.display());
    let (report, artifacts) = match cmd(&config) {
        Ok(r) => r,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NONCONVERGENCE;
        }
    };
    if let Err(e) = write_outputs(&config.output_dir, &report, &artifacts) {
        eprintln!("error: writing {}: {e}", config.output_dir.display());
        return EXIT_CONFIG;
    }
    info!("{name}: exit {}", report.exit_code);
    report.exit_code
}

/// Caps the global rayon pool from the `THREADS` environment variable.
pub fn init_threads() {
    if let Some(n) = std::env::var("THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"problem": {"b": 1, "potential": {"kind": "constant", "value": 1},
        "nonlinearity": {"kind": "power", "coefficient": 1, "exponent": 4}}}"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::load(MINIMAL, &[]).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.seed, 42);
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::load(MINIMAL, &[]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::load(&text, &[]).unwrap(), c);
    }

    #[test]
    fn overrides() {
        let c = RunConfig::load(MINIMAL, &["grid.n=128".into(), "geometry.rho=2.5".into(), "checks.conditions=[\"AR\"]".into()]).unwrap();
        assert_eq!(c.grid.n, 128);
        assert_eq!(c.geometry.rho, Some(2.5));
        assert_eq!(c.checks.conditions, vec![Condition::AR]);
        assert!(RunConfig::load(MINIMAL, &["grid.bogus=1".into()]).is_err());
        assert!(RunConfig::load(MINIMAL, &["nokey".into()]).is_err());
    }

    #[test]
    fn errors_carry_lines() {
        let bad = "{\n\"problem\": {\"b\": 1,\n \"typo\": 3}}";
        let e = RunConfig::load(bad, &[]).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let small = RunConfig::load(MINIMAL, &["grid.n=4".into()]).unwrap();
        assert!(functional(&small).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let r = [0.1, 1.0 / 3.0];
        let u = [std::f64::consts::PI, -1e-300];
        let text = profile_csv(&r, &u);
        let back: Vec<f64> = text
            .lines()
            .skip(1)
            .flat_map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect();
        assert_eq!(back, vec![r[0], u[0], r[1], u[1]]);
    }
}
