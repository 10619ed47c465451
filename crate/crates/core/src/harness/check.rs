use std::path::PathBuf;

use super::trace::read_trace_csv;
use super::HarnessError;
use crate::solver::Trace;

/// Absolute slack added to the bound, covering the reference's residual gap.
pub const DEFAULT_SLACK: f64 = 1e-9;
/// Allowance for the finite-sample seed mean in stochastic checks.
pub const STOCHASTIC_FACTOR: f64 = 1.10;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// One `PASS`/`FAIL` line per row (strict) or per aggregate (stochastic).
    pub lines: Vec<String>,
    pub passed: bool,
}

/// Checks traces against their bound column.
///
/// Strict mode requires `gap_best` and `gap_avg` to stay below
/// `bound + slack` on every row of every trace. Otherwise the traces are
/// treated as seeds of one stochastic experiment and only the seed mean of
/// the final `gap_best` is compared with `1.10 x bound + slack`.
pub fn check_bound(paths: &[PathBuf], strict: bool, slack: f64) -> Result<BoundReport, HarnessError> {
    if paths.is_empty() {
        return Err(HarnessError::Usage("check-bound needs at least one trace".into()));
    }
    let traces = paths
        .iter()
        .map(|p| read_trace_csv(p).map(|t| (p, t)))
        .collect::<Result<Vec<_>, _>>()?;
    for (path, trace) in &traces {
        if trace.rows.is_empty() {
            return Err(HarnessError::Usage(format!(
                "{}: trace has no rows",
                path.display()
            )));
        }
        if let Some(r) = trace.rows.iter().find(|r| r.bound.is_nan()) {
            return Err(HarnessError::Usage(format!(
                "{}: no valid bound at n = {} (trace from an --unsafe run or without a reference)",
                path.display(),
                r.n
            )));
        }
    }
    Ok(if strict {
        strict_report(&traces, slack)
    } else {
        mean_report(&traces, slack)?
    })
}

fn strict_report(traces: &[(&PathBuf, Trace)], slack: f64) -> BoundReport {
    let mut lines = Vec::new();
    let mut passed = true;
    for (path, trace) in traces {
        for r in &trace.rows {
            let limit = r.bound + slack;
            let ok = r.gap_best <= limit && r.gap_avg <= limit;
            passed &= ok;
            lines.push(format!(
                "{} {} n={} gap_best={:e} gap_avg={:e} bound={:e}",
                if ok { "PASS" } else { "FAIL" },
                path.display(),
                r.n,
                r.gap_best,
                r.gap_avg,
                r.bound
            ));
        }
    }
    BoundReport { lines, passed }
}

fn mean_report(traces: &[(&PathBuf, Trace)], slack: f64) -> Result<BoundReport, HarnessError> {
    let finals: Vec<_> = traces
        .iter()
        .map(|(p, t)| (p, t.rows.last().expect("nonempty")))
        .collect();
    let n = finals[0].1.n;
    if let Some((p, r)) = finals.iter().find(|(_, r)| r.n != n) {
        return Err(HarnessError::Usage(format!(
            "{} ends at n = {} but {} ends at n = {n}",
            p.display(),
            r.n,
            finals[0].0.display()
        )));
    }
    let k = finals.len() as f64;
    let mean_gap = finals.iter().map(|(_, r)| r.gap_best).sum::<f64>() / k;
    let bound = finals.iter().map(|(_, r)| r.bound).sum::<f64>() / k;
    let limit = STOCHASTIC_FACTOR * bound + slack;
    let passed = mean_gap <= limit;
    Ok(BoundReport {
        lines: vec![format!(
            "{} seeds={} n={n} mean_gap_best={mean_gap:e} limit={limit:e} (bound={bound:e})",
            if passed { "PASS" } else { "FAIL" },
            finals.len()
        )],
        passed,
    })
}
