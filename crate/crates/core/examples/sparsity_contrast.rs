//! Iterate sparsity of leap-frog versus forward-backward: leap-frog's
//! backward step grows, so the L1 prox zeroes more coordinates.

use xrda::geometry::MirrorMap;
use xrda::problem::{build_problem, DataSource, Loss, ProblemSpec, SyntheticRecipe};
use xrda::regularizer::Regularizer;
use xrda::schedule::{Preset, Schedule, StepRule};
use xrda::solver::{run, RunOptions};

fn main() -> xrda::Result<()> {
    let p = build_problem(&ProblemSpec {
        loss: Loss::LeastAbsoluteDeviation,
        regularizer: Regularizer::l1(0.1)?,
        mirror: MirrorMap::Euclidean,
        data: DataSource::Synthetic(SyntheticRecipe {
            rows: 200,
            dim: 100,
            sparsity: 5,
            noise: 0.0,
            seed: 1,
        }),
        batch_size: 1,
    })?;
    let opts = RunOptions {
        stride: 1000,
        ..RunOptions::default()
    };
    for preset in [Preset::ForwardBackward, Preset::LeapFrog] {
        let sched = Schedule::preset(preset, StepRule::InvSqrt { scale: 1.0 })?;
        let (state, trace) = run(&p, &sched, 5000, None, &opts)?;
        let nnz: Vec<usize> = trace.rows.iter().map(|r| r.nnz).collect();
        println!(
            "{:<18} f={:.6} backward step={:>8.3} nnz every 1000 iterations {:?}",
            preset.name(),
            state.objective(),
            state.backward_step(),
            nnz
        );
    }
    Ok(())
}
