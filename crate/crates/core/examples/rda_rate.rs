//! Optimality gap of RDA on a LAD+L1 problem, with a least-squares fit of
//! the log-log slope.

use xrda::geometry::MirrorMap;
use xrda::problem::{build_problem, DataSource, Loss, ProblemSpec, SyntheticRecipe};
use xrda::reference::reference_optimum;
use xrda::regularizer::Regularizer;
use xrda::schedule::{Preset, Schedule, StepRule};
use xrda::solver::{run, RunOptions};

fn main() -> xrda::Result<()> {
    let p = build_problem(&ProblemSpec {
        loss: Loss::LeastAbsoluteDeviation,
        regularizer: Regularizer::l1(0.1)?,
        mirror: MirrorMap::Euclidean,
        data: DataSource::Synthetic(SyntheticRecipe {
            rows: 50,
            dim: 20,
            sparsity: 5,
            noise: 0.0,
            seed: 1,
        }),
        batch_size: 1,
    })?;
    let reference = reference_optimum(&p, 1e-10, 200_000)?;
    println!(
        "f* = {:.12} (certified gap {:.1e})",
        reference.f_star, reference.certified_gap
    );

    let sched = Schedule::preset(Preset::Rda { c: 1.0 }, StepRule::Constant(1.0))?;
    let (_, trace) = run(&p, &sched, 20_000, Some(&reference), &RunOptions::default())?;
    let mut pts = Vec::new();
    for r in &trace.rows {
        if r.n.is_power_of_two() {
            println!("n={:>6} gap_best={:.3e} bound={:.3e}", r.n, r.gap_best, r.bound);
        }
        if r.n >= 100 && r.gap_best > 0.0 {
            pts.push(((r.n as f64).ln(), r.gap_best.ln()));
        }
    }
    let k = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    println!("fitted slope of log gap against log n: {:.3}", sxy / sxx);
    Ok(())
}
