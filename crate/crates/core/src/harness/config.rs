//! Experiment config files.
//!
//! TOML with a `spec_version = 1` header and four sections. The full grammar
//! is in the crate README; every validation problem is reported, not just
//! the first.

use std::fmt;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::geometry::MirrorMap;
use crate::problem::{build_problem, DataSource, Loss, Matrix, ProblemSpec, SyntheticRecipe};
use crate::regularizer::Regularizer;
use crate::schedule::{Averaging, Preset, ProxWeight, Schedule, StepRule};
use crate::solver::Mode;

pub const CONFIG_VERSION: i64 = 1;

const TOP_KEYS: &[&str] = &["spec_version", "problem", "schedule", "run", "output"];
const PROBLEM_KEYS: &[&str] = &[
    "loss",
    "regularizer",
    "mirror",
    "lambda",
    "lo",
    "hi",
    "radius",
    "batch_size",
    "rows",
    "dim",
    "sparsity",
    "noise",
    "seed",
    "a",
    "b",
    "c",
    "a_file",
    "b_file",
    "c_file",
];
const SCHEDULE_KEYS: &[&str] = &[
    "preset",
    "step_rule",
    "step_scale",
    "step_power",
    "steps",
    "c",
    "mu",
    "alpha_rule",
    "alpha_scale",
    "averaging",
];
const RUN_KEYS: &[&str] = &["iterations", "mode", "seeds", "stride"];
const OUTPUT_KEYS: &[&str] = &["dir", "name", "reference_tol", "reference_budget", "wall_clock"];

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// Set for syntax errors.
    pub line: Option<usize>,
    /// Dotted key, e.g. `problem.lambda`.
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), _) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid config ({} error{})",
            self.0.len(),
            if self.0.len() == 1 { "" } else { "s" }
        )?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Debug)]
pub enum ScheduleKind {
    Preset(Preset),
    Custom {
        weight: ProxWeight,
        averaging: Averaging,
    },
}

#[derive(Clone, Debug)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub step: StepRule,
}

impl ScheduleConfig {
    /// `unchecked` admits increasing step rules.
    pub fn build(&self, unchecked: bool) -> crate::Result<Schedule> {
        match (&self.kind, unchecked) {
            (ScheduleKind::Preset(p), false) => Schedule::preset(*p, self.step.clone()),
            (ScheduleKind::Preset(p), true) => Schedule::preset_unchecked(*p, self.step.clone()),
            (ScheduleKind::Custom { weight, averaging }, false) => {
                Schedule::custom(self.step.clone(), weight.clone(), averaging.clone())
            }
            (ScheduleKind::Custom { weight, averaging }, true) => {
                Schedule::custom_unchecked(self.step.clone(), weight.clone(), averaging.clone())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub schedule: ScheduleConfig,
    pub iterations: usize,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub stride: usize,
    pub out_dir: Option<PathBuf>,
    pub name: String,
    pub reference_tol: f64,
    pub reference_budget: usize,
    pub wall_clock: bool,
    /// Continue through schedule violations, marking the bound invalid.
    pub allow_violations: bool,
}

/// Parses a config whose data files, if any, are relative to the working
/// directory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    parse_config_in(text, Path::new("."), false)
}

/// Parses a config, resolving relative paths against `base`. With
/// `allow_unsafe`, schedules outside the convergence constraints are
/// accepted and runs continue past violations.
pub fn parse_config_in(
    text: &str,
    base: &Path,
    allow_unsafe: bool,
) -> Result<ExperimentConfig, ConfigErrors> {
    let doc: Table = toml::from_str(text).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            line: Some(e.span().map_or(1, |s| line_of(text, s.start))),
            key: None,
            message: e.message().trim().to_string(),
        }])
    })?;
    let mut errs = Errors::default();
    for k in doc.keys() {
        if !TOP_KEYS.contains(&k.as_str()) {
            errs.push(k, "unknown key");
        }
    }
    match doc.get("spec_version") {
        None => errs.push(
            "spec_version",
            format!("missing; expected spec_version = {CONFIG_VERSION}"),
        ),
        Some(Value::Integer(CONFIG_VERSION)) => {}
        Some(v) => errs.push(
            "spec_version",
            format!("unsupported version {v}; expected {CONFIG_VERSION}"),
        ),
    }

    let problem = Section::new(&doc, "problem", PROBLEM_KEYS, true, &mut errs);
    let schedule = Section::new(&doc, "schedule", SCHEDULE_KEYS, true, &mut errs);
    let run = Section::new(&doc, "run", RUN_KEYS, true, &mut errs);
    let output = Section::new(&doc, "output", OUTPUT_KEYS, false, &mut errs);

    let problem = parse_problem(&problem, base, &mut errs);
    let schedule = parse_schedule(&schedule, allow_unsafe, &mut errs);

    let iterations = run.require(run.uint("iterations", &mut errs), "iterations", &mut errs);
    if iterations == Some(0) {
        errs.push("run.iterations", "must be at least 1");
    }
    let mode = match run.str("mode", &mut errs).unwrap_or("exact") {
        "exact" => Some(Mode::Exact),
        "stochastic" => Some(Mode::Stochastic),
        other => {
            errs.push(
                "run.mode",
                format!("unknown mode `{other}`; expected exact or stochastic"),
            );
            None
        }
    };
    let seeds = match run.raw("seeds") {
        None => Some(vec![0]),
        Some(_) => run.uints("seeds", &mut errs),
    };
    if let Some(seeds) = &seeds {
        if seeds.is_empty() {
            errs.push("run.seeds", "needs at least one seed");
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            errs.push("run.seeds", "seeds must be distinct");
        }
    }
    let stride = run.uint("stride", &mut errs).unwrap_or(1);
    if stride == 0 {
        errs.push("run.stride", "must be at least 1");
    }

    let out_dir = output.str("dir", &mut errs).map(|d| base.join(d));
    let name = output.str("name", &mut errs).unwrap_or("trace").to_string();
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
    {
        errs.push(
            "output.name",
            "must be a nonempty run of letters, digits, `-`, `_` or `.`",
        );
    }
    let reference_tol = output.float("reference_tol", &mut errs).unwrap_or(1e-8);
    if !(reference_tol > 0.0) {
        errs.push("output.reference_tol", "must be positive");
    }
    let min_budget = 10 * iterations.unwrap_or(0) as usize;
    let reference_budget = output
        .uint("reference_budget", &mut errs)
        .map(|b| b as usize)
        .unwrap_or(min_budget);
    if reference_budget < min_budget {
        errs.push(
            "output.reference_budget",
            format!("must be at least 10 x run.iterations = {min_budget}"),
        );
    }
    let wall_clock = output.bool("wall_clock", &mut errs).unwrap_or(false);

    match (errs.0.is_empty(), problem, schedule, iterations, mode, seeds) {
        (true, Some(problem), Some(schedule), Some(iterations), Some(mode), Some(seeds)) => {
            Ok(ExperimentConfig {
                problem,
                schedule,
                iterations: iterations as usize,
                mode,
                seeds,
                stride: stride as usize,
                out_dir,
                name,
                reference_tol,
                reference_budget,
                wall_clock,
                allow_violations: allow_unsafe,
            })
        }
        _ => {
            if errs.0.is_empty() {
                errs.push("config", "invalid");
            }
            Err(ConfigErrors(errs.0))
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[derive(Default)]
struct Errors(Vec<ConfigError>);

impl Errors {
    fn push(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigError {
            line: None,
            key: Some(key.into()),
            message: message.into(),
        });
    }
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn new(doc: &'a Table, name: &'static str, allowed: &[&str], required: bool, errs: &mut Errors) -> Self {
        let table = match doc.get(name) {
            None => {
                if required {
                    errs.push(name, "missing section");
                }
                None
            }
            Some(Value::Table(t)) => {
                for k in t.keys() {
                    if !allowed.contains(&k.as_str()) {
                        errs.push(format!("{name}.{k}"), "unknown key");
                    }
                }
                Some(t)
            }
            Some(_) => {
                errs.push(name, "must be a section");
                None
            }
        };
        Section { name, table }
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.name)
    }

    fn raw(&self, k: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(k))
    }

    fn has(&self, k: &str) -> bool {
        self.raw(k).is_some()
    }

    fn require<T>(&self, v: Option<T>, k: &str, errs: &mut Errors) -> Option<T> {
        if v.is_none() && !self.has(k) && self.table.is_some() {
            errs.push(self.key(k), "missing required key");
        }
        v
    }

    fn str(&self, k: &str, errs: &mut Errors) -> Option<&'a str> {
        match self.raw(k)? {
            Value::String(s) => Some(s),
            _ => {
                errs.push(self.key(k), "expected a string");
                None
            }
        }
    }

    fn float(&self, k: &str, errs: &mut Errors) -> Option<f64> {
        let v = self.raw(k)?;
        let out = number(v);
        if out.is_none() {
            errs.push(self.key(k), "expected a number");
        }
        out
    }

    fn uint(&self, k: &str, errs: &mut Errors) -> Option<u64> {
        match self.raw(k)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                errs.push(self.key(k), "expected a nonnegative integer");
                None
            }
        }
    }

    fn bool(&self, k: &str, errs: &mut Errors) -> Option<bool> {
        match self.raw(k)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                errs.push(self.key(k), "expected true or false");
                None
            }
        }
    }

    fn uints(&self, k: &str, errs: &mut Errors) -> Option<Vec<u64>> {
        let out = match self.raw(k)? {
            Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Some(*i as u64),
                    _ => None,
                })
                .collect(),
            _ => None,
        };
        if out.is_none() {
            errs.push(self.key(k), "expected an array of nonnegative integers");
        }
        out
    }

    fn floats(&self, k: &str, errs: &mut Errors) -> Option<Vec<f64>> {
        let out = match self.raw(k)? {
            Value::Array(a) => a.iter().map(number).collect(),
            _ => None,
        };
        if out.is_none() {
            errs.push(self.key(k), "expected an array of numbers");
        }
        out
    }

    /// A number or an array of numbers.
    fn scalar_or_floats(&self, k: &str, errs: &mut Errors) -> Option<Result<f64, Vec<f64>>> {
        match self.raw(k)? {
            Value::Array(_) => self.floats(k, errs).map(Err),
            _ => self.float(k, errs).map(Ok),
        }
    }

    fn matrix(&self, k: &str, errs: &mut Errors) -> Option<Vec<Vec<f64>>> {
        let out = match self.raw(k)? {
            Value::Array(rows) => rows
                .iter()
                .map(|r| match r {
                    Value::Array(r) => r.iter().map(number).collect(),
                    _ => None,
                })
                .collect(),
            _ => None,
        };
        if out.is_none() {
            errs.push(self.key(k), "expected an array of arrays of numbers");
        }
        out
    }

    /// Keys in `keys` that are present but meaningless in this context.
    fn reject(&self, keys: &[&str], why: &str, errs: &mut Errors) {
        for k in keys {
            if self.has(k) {
                errs.push(self.key(k), why.to_string());
            }
        }
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn read_file(sec: &Section, key: &str, base: &Path, errs: &mut Errors) -> Option<Matrix> {
    let rel = sec.str(key, errs)?;
    let path = base.join(rel);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            errs.push(sec.key(key), format!("cannot read {}: {e}", path.display()));
            return None;
        }
    };
    match Matrix::parse_text(&text) {
        Ok(m) => Some(m),
        Err(e) => {
            errs.push(sec.key(key), format!("{}: {e}", path.display()));
            None
        }
    }
}

/// A vector given inline or as a file of whitespace-separated numbers.
fn vector(sec: &Section, inline: &str, file: &str, base: &Path, errs: &mut Errors) -> Option<Vec<f64>> {
    match (sec.has(inline), sec.has(file)) {
        (true, true) => {
            errs.push(sec.key(file), format!("conflicts with {}", sec.key(inline)));
            None
        }
        (true, false) => sec.floats(inline, errs),
        (false, true) => read_file(sec, file, base, errs).map(|m| m.row_iter().flatten().copied().collect()),
        (false, false) => None,
    }
}

fn parse_problem(sec: &Section, base: &Path, errs: &mut Errors) -> Option<ProblemSpec> {
    sec.table?;
    let before = errs.0.len();
    let loss = match sec.require(sec.str("loss", errs), "loss", errs) {
        Some("logistic") => Some(Loss::Logistic),
        Some("lad") => Some(Loss::LeastAbsoluteDeviation),
        Some("linear") => Some(Loss::Linear),
        Some(other) => {
            errs.push(
                sec.key("loss"),
                format!("unknown loss `{other}`; expected logistic, lad or linear"),
            );
            None
        }
        None => None,
    };
    let mirror = match sec.str("mirror", errs).unwrap_or("euclidean") {
        "euclidean" => Some(MirrorMap::Euclidean),
        "entropy" => Some(MirrorMap::NegativeEntropy),
        other => {
            errs.push(
                sec.key("mirror"),
                format!("unknown mirror `{other}`; expected euclidean or entropy"),
            );
            None
        }
    };
    let batch_size = sec.uint("batch_size", errs).unwrap_or(1) as usize;

    // Data source.
    let inline = ["a", "b", "a_file", "b_file"].iter().any(|k| sec.has(k));
    let cost = ["c", "c_file"].iter().any(|k| sec.has(k));
    let synth_keys = ["rows", "dim", "sparsity", "noise", "seed"];
    let synthetic = synth_keys.iter().any(|k| sec.has(k));
    let data = match (inline, cost, synthetic) {
        (true, false, false) => {
            let a = match (sec.has("a"), sec.has("a_file")) {
                (true, true) => {
                    errs.push(sec.key("a_file"), "conflicts with problem.a");
                    None
                }
                (true, false) => sec
                    .matrix("a", errs)
                    .and_then(|rows| match Matrix::from_rows(rows) {
                        Ok(m) => Some(m),
                        Err(e) => {
                            errs.push(sec.key("a"), e.to_string());
                            None
                        }
                    }),
                (false, true) => read_file(sec, "a_file", base, errs),
                (false, false) => {
                    errs.push(sec.key("a"), "missing design matrix (a or a_file)");
                    None
                }
            };
            let b = vector(sec, "b", "b_file", base, errs);
            if b.is_none() && !sec.has("b") && !sec.has("b_file") {
                errs.push(sec.key("b"), "missing targets (b or b_file)");
            }
            match (a, b) {
                (Some(a), Some(b)) => Some(DataSource::Inline { a, b }),
                _ => None,
            }
        }
        (false, true, false) => vector(sec, "c", "c_file", base, errs).map(DataSource::Cost),
        (false, false, true) => {
            let dim = sec.require(sec.uint("dim", errs), "dim", errs);
            let rows = if loss == Some(Loss::Linear) {
                sec.reject(&["rows"], "unused by the linear loss", errs);
                Some(1)
            } else {
                sec.require(sec.uint("rows", errs), "rows", errs)
            };
            let sparsity = sec
                .uint("sparsity", errs)
                .unwrap_or_else(|| dim.unwrap_or(0).min(5));
            let noise = sec.float("noise", errs).unwrap_or(0.1);
            let seed = sec.uint("seed", errs).unwrap_or(0);
            match (rows, dim) {
                (Some(rows), Some(dim)) => Some(DataSource::Synthetic(SyntheticRecipe {
                    rows: rows as usize,
                    dim: dim as usize,
                    sparsity: sparsity as usize,
                    noise,
                    seed,
                })),
                _ => None,
            }
        }
        (false, false, false) => {
            errs.push(
                sec.name,
                "no data: give a synthetic recipe (rows, dim, ...), a design (a/b or a_file/b_file) or a cost (c or c_file)",
            );
            None
        }
        _ => {
            errs.push(
                sec.name,
                "data keys from more than one source (synthetic, design matrix, cost vector)",
            );
            None
        }
    };
    let dim = match &data {
        Some(DataSource::Inline { a, .. }) => Some(a.cols()),
        Some(DataSource::Cost(c)) => Some(c.len()),
        Some(DataSource::Synthetic(r)) => Some(r.dim),
        None => None,
    };

    let regularizer = match sec.require(sec.str("regularizer", errs), "regularizer", errs) {
        Some(kind) => {
            let all = ["lambda", "lo", "hi", "radius"];
            let used: &[&str] = match kind {
                "l1" => &["lambda"],
                "box" => &["lo", "hi"],
                "l2-ball" => &["radius"],
                _ => &[],
            };
            let unused: Vec<&str> = all.iter().copied().filter(|k| !used.contains(k)).collect();
            sec.reject(&unused, &format!("not used by the `{kind}` regularizer"), errs);
            let built = match kind {
                "l1" => sec
                    .require(sec.float("lambda", errs), "lambda", errs)
                    .map(Regularizer::l1),
                "box" => {
                    let lo = sec.require(sec.scalar_or_floats("lo", errs), "lo", errs);
                    let hi = sec.require(sec.scalar_or_floats("hi", errs), "hi", errs);
                    match (lo, hi, dim) {
                        (Some(lo), Some(hi), Some(d)) => {
                            // Scalars broadcast to every coordinate.
                            let expand = |v: Result<f64, Vec<f64>>| match v {
                                Ok(x) => vec![x; d],
                                Err(v) => v,
                            };
                            Some(Regularizer::indicator_box(expand(lo), expand(hi)))
                        }
                        _ => None,
                    }
                }
                "simplex" => Some(Ok(Regularizer::IndicatorSimplex)),
                "l2-ball" => sec
                    .require(sec.float("radius", errs), "radius", errs)
                    .map(Regularizer::indicator_l2_ball),
                "zero" => Some(Ok(Regularizer::Zero)),
                other => {
                    errs.push(
                        sec.key("regularizer"),
                        format!("unknown regularizer `{other}`; expected l1, box, simplex, l2-ball or zero"),
                    );
                    None
                }
            };
            // Blame the parameter key when there is exactly one.
            let blamed = match used {
                [only] => *only,
                _ => "regularizer",
            };
            match built {
                Some(Ok(g)) => Some(g),
                Some(Err(e)) => {
                    errs.push(sec.key(blamed), e.to_string());
                    None
                }
                None => None,
            }
        }
        None => None,
    };

    let spec = ProblemSpec {
        loss: loss?,
        regularizer: regularizer?,
        mirror: mirror?,
        data: data?,
        batch_size,
    };
    if errs.0.len() > before {
        return None;
    }
    // Registry, dimensions and batch size, before any experiment runs.
    match build_problem(&spec) {
        Ok(_) => Some(spec),
        Err(e) => {
            errs.push(sec.name, e.to_string());
            None
        }
    }
}

fn parse_schedule(sec: &Section, allow_unsafe: bool, errs: &mut Errors) -> Option<ScheduleConfig> {
    sec.table?;
    let before = errs.0.len();
    let preset = sec.require(sec.str("preset", errs), "preset", errs)?;
    let custom_keys = ["alpha_rule", "alpha_scale", "averaging"];
    if preset != "custom" {
        sec.reject(&custom_keys, "only used by the custom preset", errs);
    }
    if preset != "rda" {
        sec.reject(&["c"], "only used by the rda preset", errs);
    }
    let needs_mu = preset == "averaged-leap-frog"
        || (preset == "custom" && sec.raw("averaging").and_then(Value::as_str) == Some("gamma-fraction"));
    if !needs_mu {
        sec.reject(&["mu"], "only used with gamma-fraction averaging", errs);
    }
    let mu = if needs_mu {
        sec.require(sec.float("mu", errs), "mu", errs)
    } else {
        None
    };

    let step = if preset == "rda" {
        sec.reject(
            &["step_rule", "step_scale", "step_power", "steps"],
            "the rda preset fixes s = 1",
            errs,
        );
        Some(StepRule::Constant(1.0))
    } else {
        parse_step(sec, errs)
    };

    let kind = match preset {
        "forward-backward" => Some(ScheduleKind::Preset(Preset::ForwardBackward)),
        "rda" => Some(ScheduleKind::Preset(Preset::Rda {
            c: sec.float("c", errs).unwrap_or(1.0),
        })),
        "leap-frog" => Some(ScheduleKind::Preset(Preset::LeapFrog)),
        "constant-backward" => Some(ScheduleKind::Preset(Preset::ConstantBackward)),
        "averaged-leap-frog" => mu.map(|mu| ScheduleKind::Preset(Preset::AveragedLeapFrog { mu })),
        "custom" => {
            let scale = sec.float("alpha_scale", errs).unwrap_or(1.0);
            let weight = match sec.str("alpha_rule", errs).unwrap_or("constant") {
                "constant" => Some(ProxWeight::Constant(scale)),
                "sqrt" => Some(ProxWeight::Sqrt { scale }),
                other => {
                    errs.push(
                        sec.key("alpha_rule"),
                        format!("unknown rule `{other}`; expected constant or sqrt"),
                    );
                    None
                }
            };
            let averaging = match sec.str("averaging", errs).unwrap_or("none") {
                "none" => Some(Averaging::None),
                "previous-step" => Some(Averaging::PreviousStep),
                "current-step" => Some(Averaging::CurrentStep),
                "gamma-fraction" => mu.map(Averaging::GammaFraction),
                other => {
                    errs.push(
                        sec.key("averaging"),
                        format!("unknown averaging `{other}`; expected none, previous-step, current-step or gamma-fraction"),
                    );
                    None
                }
            };
            match (weight, averaging) {
                (Some(weight), Some(averaging)) => Some(ScheduleKind::Custom { weight, averaging }),
                _ => None,
            }
        }
        other => {
            errs.push(
                sec.key("preset"),
                format!(
                    "unknown preset `{other}`; expected forward-backward, rda, leap-frog, \
                     constant-backward, averaged-leap-frog or custom"
                ),
            );
            None
        }
    };
    let cfg = ScheduleConfig {
        kind: kind?,
        step: step?,
    };
    if errs.0.len() > before {
        return None;
    }
    if let Err(e) = cfg.build(allow_unsafe) {
        let msg = match e {
            crate::Error::InvalidParameter(m) => m,
            e => e.to_string(),
        };
        errs.push(sec.name, msg);
        return None;
    }
    Some(cfg)
}

fn parse_step(sec: &Section, errs: &mut Errors) -> Option<StepRule> {
    let rule = sec.str("step_rule", errs).unwrap_or("inv-sqrt");
    let scale = sec.float("step_scale", errs).unwrap_or(1.0);
    let (power, steps) = match rule {
        "power" => (true, false),
        "sequence" => (false, true),
        _ => (false, false),
    };
    if !power {
        sec.reject(&["step_power"], "only used by the power step rule", errs);
    }
    if !steps {
        sec.reject(&["steps"], "only used by the sequence step rule", errs);
    } else {
        sec.reject(&["step_scale"], "not used by the sequence step rule", errs);
    }
    match rule {
        "constant" => Some(StepRule::Constant(scale)),
        "inv-sqrt" => Some(StepRule::InvSqrt { scale }),
        "power" => sec
            .require(sec.float("step_power", errs), "step_power", errs)
            .map(|exponent| StepRule::Power { scale, exponent }),
        "sequence" => sec
            .require(sec.floats("steps", errs), "steps", errs)
            .map(StepRule::Sequence),
        other => {
            errs.push(
                sec.key("step_rule"),
                format!("unknown step rule `{other}`; expected constant, inv-sqrt, power or sequence"),
            );
            None
        }
    }
}
