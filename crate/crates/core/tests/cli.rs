use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xrda::harness::{read_trace_csv, write_trace_csv};

const BASE: &str = r#"spec_version = 1

[problem]
loss = "lad"
regularizer = "l1"
lambda = 0.1
rows = 30
dim = 10
sparsity = 3
noise = 0.1
seed = 4

[schedule]
preset = "rda"

[run]
iterations = 1000
"#;

fn xrda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xrda"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, format!("{BASE}{extra}")).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_then_check_bound_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "stride = 1\n");
    let out = dir.path().join("out");
    let o = xrda(&["run", "--config", s(&cfg), "--out", s(&out), "--stride", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = out.join("trace-seed0.csv");
    assert_eq!(stdout(&o).trim(), trace.display().to_string());
    let rows = read_trace_csv(&trace).unwrap().rows;
    assert_eq!(
        rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        (1..=10).map(|k| 100 * k).collect::<Vec<_>>()
    );
    assert!(out.join(".xrda-cache").is_dir());

    let o = xrda(&["check-bound", s(&trace)]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 10);
}

#[test]
fn check_bound_flags_a_corrupted_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "stride = 250\n");
    let out = dir.path().join("out");
    assert!(xrda(&["run", "--config", s(&cfg), "--out", s(&out)])
        .status
        .success());
    let path = out.join("trace-seed0.csv");
    let mut trace = read_trace_csv(&path).unwrap();
    trace.rows[2].gap_best = trace.rows[2].bound + 1.0;
    write_trace_csv(&trace, &path).unwrap();
    let o = xrda(&["check-bound", s(&path)]);
    assert_eq!(o.status.code(), Some(3));
    let fails: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("FAIL"))
        .map(String::from)
        .collect();
    assert_eq!(fails.len(), 1);
    assert!(fails[0].contains("n=750"), "{fails:?}");
}

#[test]
fn exact_mode_seeds_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "seeds = [1, 2]\nstride = 50\n");
    let out = dir.path().join("out");
    assert!(xrda(&["run", "--config", s(&cfg), "--out", s(&out)])
        .status
        .success());
    let a = std::fs::read(out.join("trace-seed1.csv")).unwrap();
    let b = std::fs::read(out.join("trace-seed2.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stochastic_seeds_differ_and_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "mode = \"stochastic\"\nseeds = [1, 2]\nstride = 50\n",
    );
    let out1 = dir.path().join("o1");
    let out2 = dir.path().join("o2");
    for out in [&out1, &out2] {
        assert!(xrda(&["run", "--config", s(&cfg), "--out", s(out)])
            .status
            .success());
    }
    let read = |d: &Path, seed: u32| std::fs::read(d.join(format!("trace-seed{seed}.csv"))).unwrap();
    assert_ne!(read(&out1, 1), read(&out1, 2));
    assert_eq!(read(&out1, 1), read(&out2, 1));
    assert_eq!(read(&out1, 2), read(&out2, 2));

    let traces = [out1.join("trace-seed1.csv"), out1.join("trace-seed2.csv")];
    let o = xrda(&["check-bound", "--stochastic", s(&traces[0]), s(&traces[1])]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
}

fn compare_rows(out: &Path) -> Vec<(String, f64)> {
    let text = std::fs::read_to_string(out.join("trace-compare.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "median_backward_step").unwrap();
    lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].to_string(), cells[col].parse().unwrap())
        })
        .collect()
}

#[test]
fn compare_contrasts_backward_steps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "");
    let out = dir.path().join("out");
    let o = xrda(&[
        "compare",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--presets",
        "forward-backward,leap-frog",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("median_backward_step"));
    let rows = compare_rows(&out);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].1 > rows[0].1, "{rows:?}");

    let o = xrda(&[
        "compare",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--presets",
        "leap-frog",
    ]);
    assert!(o.status.success());
    assert_eq!(compare_rows(&out).len(), 1);
    assert!(out.join("trace-compare.txt").is_file());
}

#[test]
fn rda_backward_step_grows_like_sqrt_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "stride = 1\n");
    let out = dir.path().join("out");
    assert!(xrda(&["run", "--config", s(&cfg), "--out", s(&out)])
        .status
        .success());
    let rows = read_trace_csv(&out.join("trace-seed0.csv")).unwrap().rows;
    // RDA: gamma_n = n - 1 and alpha_n = sqrt(n).
    for r in rows.iter().filter(|r| r.n > 1) {
        let n = r.n as f64;
        assert!((r.backward_step - (n - 1.0) / n.sqrt()).abs() <= 1e-12 * n);
    }
}

#[test]
fn gen_problem_writes_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "");
    let out = dir.path().join("data");
    let o = xrda(&["gen-problem", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["A.txt", "b.txt", "x_true.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let a = std::fs::read_to_string(out.join("A.txt")).unwrap();
    assert_eq!(a.lines().filter(|l| !l.trim().is_empty()).count(), 30);
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        BASE.replace("lambda = 0.1", "lambda = -1.0")
            .replace("preset = \"rda\"", "preset = \"fancy\"")
            + "bogus = 3\n",
    )
    .unwrap();
    let o = xrda(&["run", "--config", s(&path), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("problem.lambda"), "{err}");
    assert!(err.contains("schedule.preset"), "{err}");
    assert!(err.contains("run.bogus"), "{err}");

    assert_eq!(xrda(&["run"]).status.code(), Some(1));
    assert_eq!(xrda(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(xrda(&["check-bound"]).status.code(), Some(1));
    assert_eq!(xrda(&["--help"]).status.code(), Some(0));
}

#[test]
fn unsafe_schedules_need_the_flag_and_yield_no_bound() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace(
        "preset = \"rda\"",
        "preset = \"leap-frog\"\nstep_rule = \"sequence\"\nsteps = [0.1, 0.2, 0.3]",
    ) + "iterations = 20\n";
    let text = text.replace("iterations = 1000\n", "");
    let path = dir.path().join("u.toml");
    std::fs::write(&path, text).unwrap();
    let out = dir.path().join("out");
    let o = xrda(&["run", "--config", s(&path), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("non-increasing"));

    let o = xrda(&["run", "--unsafe", "--config", s(&path), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = out.join("trace-seed0.csv");
    let o = xrda(&["check-bound", s(&trace)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "");
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = xrda(&["run", "--config", s(&cfg), "--out", s(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
