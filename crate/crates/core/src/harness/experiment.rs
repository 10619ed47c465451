use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ScheduleKind};
use super::trace::{float, write_atomic, write_trace_csv};
use super::HarnessError;
use crate::geometry::PrimalPoint;
use crate::problem::{build_problem, CompositeProblem, ProblemSpec};
use crate::reference::{reference_optimum, ReferenceSolution};
use crate::schedule::{Preset, Schedule};
use crate::solver::{run, RunOptions, Trace};

const CACHE_DIR: &str = ".xrda-cache";

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn cache_key(spec: &ProblemSpec, tol: f64, budget: usize) -> String {
    // Debug output of f64 round-trips, so equal keys mean equal problems.
    let digest = Sha256::digest(format!("{spec:?}|tol={tol:e}|budget={budget}").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn encode_reference(r: &ReferenceSolution) -> String {
    let x: Vec<String> = r.x_star.iter().map(|&v| float(v)).collect();
    format!(
        "f_star {}\ncertified_gap {}\ncertified {}\nx {}\n",
        float(r.f_star),
        float(r.certified_gap),
        r.certified,
        x.join(" ")
    )
}

fn decode_reference(text: &str) -> Option<ReferenceSolution> {
    let mut lines = text.lines();
    let mut field = |name: &str| {
        lines
            .next()?
            .strip_prefix(name)?
            .strip_prefix(' ')
            .map(str::to_owned)
    };
    let f_star = field("f_star")?.parse().ok()?;
    let certified_gap = field("certified_gap")?.parse().ok()?;
    let certified = field("certified")?.parse().ok()?;
    let x = field("x")?
        .split_whitespace()
        .map(|t| t.parse().ok())
        .collect::<Option<Vec<f64>>>()?;
    Some(ReferenceSolution {
        x_star: PrimalPoint::new(x),
        f_star,
        certified_gap,
        certified,
    })
}

/// Reference optimum for `spec`, reusing a cached solve from `cache_dir`
/// when one exists for the same problem, tolerance and budget.
pub fn load_or_compute_reference(
    problem: &CompositeProblem,
    spec: &ProblemSpec,
    tol: f64,
    budget: usize,
    cache_dir: Option<&Path>,
) -> Result<ReferenceSolution, HarnessError> {
    let path = cache_dir.map(|d| d.join(format!("{}.ref", cache_key(spec, tol, budget))));
    if let Some(path) = &path {
        if let Some(r) = std::fs::read_to_string(path)
            .ok()
            .and_then(|t| decode_reference(&t))
        {
            if r.x_star.dim() == problem.dim() {
                return Ok(r);
            }
        }
    }
    let r = reference_optimum(problem, tol, budget)?;
    if let (Some(dir), Some(path)) = (cache_dir, &path) {
        create_dir(dir)?;
        write_atomic(path, encode_reference(&r).as_bytes())?;
    }
    Ok(r)
}

fn prepare(
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<(CompositeProblem, ReferenceSolution), HarnessError> {
    create_dir(out)?;
    let p = build_problem(&cfg.problem)?;
    let r = load_or_compute_reference(
        &p,
        &cfg.problem,
        cfg.reference_tol,
        cfg.reference_budget,
        Some(&out.join(CACHE_DIR)),
    )?;
    if !r.certified {
        eprintln!(
            "warning: reference optimum certified only to {:e} (requested {:e})",
            r.certified_gap, cfg.reference_tol
        );
    }
    Ok((p, r))
}

fn options(cfg: &ExperimentConfig, seed: u64) -> RunOptions {
    RunOptions {
        stride: cfg.stride,
        mode: cfg.mode,
        seed,
        x1: None,
        allow_violations: cfg.allow_violations,
        wall_clock: cfg.wall_clock,
    }
}

/// Runs every seed of `cfg` in parallel and writes one trace per seed to
/// `out/<name>-seed<seed>.csv`. All seeds share one reference optimum.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let (p, reference) = prepare(cfg, out)?;
    let sched = cfg.schedule.build(cfg.allow_violations)?;
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let (_, trace) = run(&p, &sched, cfg.iterations, Some(&reference), &options(cfg, seed))?;
            let path = out.join(format!("{}-seed{seed}.csv", cfg.name));
            write_trace_csv(&trace, &path)?;
            Ok(path)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Parses `forward-backward`, `rda[:c]`, `leap-frog`, `constant-backward`
/// or `averaged-leap-frog[:mu]`.
pub fn parse_preset(text: &str) -> Result<Preset, HarnessError> {
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    let value = |default: f64| -> Result<f64, HarnessError> {
        arg.map_or(Ok(default), |a| {
            a.parse()
                .map_err(|_| HarnessError::Usage(format!("bad preset parameter in `{text}`")))
        })
    };
    let preset = match name {
        "forward-backward" | "fb" => Preset::ForwardBackward,
        "rda" => Preset::Rda { c: value(1.0)? },
        "leap-frog" => Preset::LeapFrog,
        "constant-backward" => Preset::ConstantBackward,
        "averaged-leap-frog" => Preset::AveragedLeapFrog { mu: value(0.5)? },
        _ => return Err(HarnessError::Usage(format!("unknown preset `{text}`"))),
    };
    if arg.is_some() && !matches!(name, "rda" | "averaged-leap-frog") {
        return Err(HarnessError::Usage(format!("preset `{name}` takes no parameter")));
    }
    Ok(preset)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub preset: String,
    pub final_gap: f64,
    pub final_nnz: usize,
    pub median_backward_step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("preset,final_gap,final_nnz,median_backward_step\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.preset,
                float(r.final_gap),
                r.final_nnz,
                float(r.median_backward_step)
            );
        }
        s
    }

    pub fn to_table(&self) -> String {
        let header = ["preset", "final_gap", "final_nnz", "median_backward_step"];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.preset.clone(),
                    format!("{:.6e}", r.final_gap),
                    r.final_nnz.to_string(),
                    format!("{:.6e}", r.median_backward_step),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..4)
            .map(|j| {
                cells
                    .iter()
                    .map(|c| c[j].len())
                    .chain([header[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut s = String::new();
        let mut line = |cols: [&str; 4]| {
            let _ = write!(s, "{:<w$}", cols[0], w = widths[0]);
            for j in 1..4 {
                let _ = write!(s, "  {:>w$}", cols[j], w = widths[j]);
            }
            s.push('\n');
        };
        line(header);
        for c in &cells {
            line([&c[0], &c[1], &c[2], &c[3]]);
        }
        s
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

fn summarize(label: String, trace: &Trace) -> CompareRow {
    let last = trace.rows.last();
    CompareRow {
        preset: label,
        final_gap: last.map_or(f64::NAN, |r| r.gap_best),
        final_nnz: last.map_or(0, |r| r.nnz),
        median_backward_step: median(trace.rows.iter().map(|r| r.backward_step).collect()),
    }
}

/// Runs each preset on the problem of `cfg` with its step rule and first
/// seed, then writes `out/<name>-compare.csv` and `.txt`.
pub fn compare(cfg: &ExperimentConfig, presets: &[Preset], out: &Path) -> Result<Comparison, HarnessError> {
    if presets.is_empty() {
        return Err(HarnessError::Usage("compare needs at least one preset".into()));
    }
    let (p, reference) = prepare(cfg, out)?;
    let opts = options(cfg, cfg.seeds[0]);
    let rows = presets
        .par_iter()
        .map(|&preset| {
            let sched = if cfg.allow_violations {
                Schedule::preset_unchecked(preset, cfg.schedule.step.clone())?
            } else {
                Schedule::preset(preset, cfg.schedule.step.clone())?
            };
            let (_, trace) = run(&p, &sched, cfg.iterations, Some(&reference), &opts)?;
            let label = match preset {
                Preset::Rda { c } => format!("rda(c={c})"),
                Preset::AveragedLeapFrog { mu } => format!("averaged-leap-frog(mu={mu})"),
                other => other.name().to_string(),
            };
            Ok(summarize(label, &trace))
        })
        .collect::<Vec<Result<CompareRow, HarnessError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let cmp = Comparison { rows };
    write_atomic(
        &out.join(format!("{}-compare.csv", cfg.name)),
        cmp.to_csv().as_bytes(),
    )?;
    write_atomic(
        &out.join(format!("{}-compare.txt", cfg.name)),
        cmp.to_table().as_bytes(),
    )?;
    Ok(cmp)
}

/// Presets to compare when none are named: the configured one's step rule
/// under all five presets.
pub fn default_presets(cfg: &ExperimentConfig) -> Vec<Preset> {
    let (c, mu) = match cfg.schedule.kind {
        ScheduleKind::Preset(Preset::Rda { c }) => (c, 0.5),
        ScheduleKind::Preset(Preset::AveragedLeapFrog { mu }) => (1.0, mu),
        _ => (1.0, 0.5),
    };
    vec![
        Preset::ForwardBackward,
        Preset::Rda { c },
        Preset::LeapFrog,
        Preset::ConstantBackward,
        Preset::AveragedLeapFrog { mu },
    ]
}

fn vector_text(v: &[f64]) -> String {
    v.iter().map(|&x| float(x) + "\n").collect()
}

/// Writes the problem data of `cfg` as text files: `A.txt` and `b.txt`, or
/// `c.txt`, plus `x_true.txt` for synthetic instances.
pub fn gen_problem(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    create_dir(out)?;
    let p = build_problem(&cfg.problem)?;
    let mut files: Vec<(&str, String)> = Vec::new();
    if let Some((a, b)) = p.design() {
        files.push(("A.txt", a.to_text()));
        files.push(("b.txt", vector_text(b)));
    }
    if let Some(c) = p.cost() {
        files.push(("c.txt", vector_text(c)));
    }
    if let Some(x) = p.planted() {
        files.push(("x_true.txt", vector_text(x.as_slice())));
    }
    files
        .into_iter()
        .map(|(name, text)| {
            let path = out.join(name);
            write_atomic(&path, text.as_bytes())?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;

    #[test]
    fn reference_cache_round_trips() {
        let r = ReferenceSolution {
            x_star: PrimalPoint::new(vec![0.1, -1.0 / 3.0, 0.0]),
            f_star: 0.123_456_789_012_345_67,
            certified_gap: 3e-12,
            certified: true,
        };
        assert_eq!(decode_reference(&encode_reference(&r)), Some(r));
        assert_eq!(decode_reference("garbage"), None);
    }

    #[test]
    fn presets_parse() {
        assert_eq!(parse_preset("rda:2").unwrap(), Preset::Rda { c: 2.0 });
        assert_eq!(
            parse_preset("averaged-leap-frog").unwrap(),
            Preset::AveragedLeapFrog { mu: 0.5 }
        );
        assert!(parse_preset("leap-frog:1").is_err());
        assert!(parse_preset("nesterov").is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn table_is_aligned() {
        let cmp = Comparison {
            rows: vec![CompareRow {
                preset: "leap-frog".into(),
                final_gap: 1e-3,
                final_nnz: 5,
                median_backward_step: 12.5,
            }],
        };
        let t = cmp.to_table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].len(), lines[1].len());
    }

    #[test]
    fn gen_problem_writes_planted_solution() {
        let cfg = parse_config(
            "spec_version = 1\n[problem]\nloss = \"lad\"\nregularizer = \"l1\"\nlambda = 0.1\n\
             rows = 4\ndim = 3\nsparsity = 1\n[schedule]\npreset = \"leap-frog\"\n[run]\niterations = 1\n",
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = gen_problem(&cfg, dir.path()).unwrap();
        let names: Vec<_> = files.iter().map(|f| f.file_name().unwrap().to_owned()).collect();
        assert_eq!(names, ["A.txt", "b.txt", "x_true.txt"]);
        let x = std::fs::read_to_string(dir.path().join("x_true.txt")).unwrap();
        assert_eq!(x.lines().filter(|l| l.parse::<f64>().unwrap() != 0.0).count(), 1);
    }
}
