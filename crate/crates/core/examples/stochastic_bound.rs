//! Seed-averaged gaps under sampled subgradients, against the expected
//! bound.

use rayon::prelude::*;
use xrda::geometry::MirrorMap;
use xrda::problem::{build_problem, DataSource, Loss, ProblemSpec, SyntheticRecipe};
use xrda::reference::reference_optimum;
use xrda::regularizer::Regularizer;
use xrda::schedule::{Preset, Schedule, StepRule};
use xrda::solver::{run, Mode, RunOptions};

fn main() -> xrda::Result<()> {
    let p = build_problem(&ProblemSpec {
        loss: Loss::Logistic,
        regularizer: Regularizer::l1(0.1)?,
        mirror: MirrorMap::Euclidean,
        data: DataSource::Synthetic(SyntheticRecipe {
            rows: 50,
            dim: 20,
            sparsity: 5,
            noise: 0.5,
            seed: 1,
        }),
        batch_size: 1,
    })?;
    let reference = reference_optimum(&p, 1e-10, 100_000)?;
    let sched = Schedule::preset(Preset::Rda { c: 1.0 }, StepRule::Constant(1.0))?;
    let iterations = 10_000;
    let finals = (1..=20u64)
        .into_par_iter()
        .map(|seed| {
            let opts = RunOptions {
                mode: Mode::Stochastic,
                seed,
                stride: iterations,
                ..RunOptions::default()
            };
            run(&p, &sched, iterations, Some(&reference), &opts).map(|(_, t)| t.rows.last().cloned().unwrap())
        })
        .collect::<xrda::Result<Vec<_>>>()?;
    let mean = finals.iter().map(|r| r.gap_best).sum::<f64>() / finals.len() as f64;
    let bound = finals[0].bound;
    println!(
        "seeds=20 n={} mean gap_best={mean:.3e} bound={bound:.3e} ratio={:.4}",
        finals[0].n,
        mean / bound
    );
    Ok(())
}
