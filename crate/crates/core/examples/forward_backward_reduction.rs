//! The forward-backward preset reproduces the plain proximal subgradient
//! loop `x <- prox_{s G}(x - s g)`.

use xrda::geometry::{MirrorMap, PrimalPoint};
use xrda::problem::{build_problem, DataSource, Loss, ProblemSpec, SyntheticRecipe};
use xrda::regularizer::Regularizer;
use xrda::schedule::{Preset, Schedule, StepRule};
use xrda::solver::{Oracle, SolverState};

fn main() -> xrda::Result<()> {
    let p = build_problem(&ProblemSpec {
        loss: Loss::LeastAbsoluteDeviation,
        regularizer: Regularizer::l1(0.1)?,
        mirror: MirrorMap::Euclidean,
        data: DataSource::Synthetic(SyntheticRecipe {
            rows: 50,
            dim: 20,
            sparsity: 5,
            noise: 0.1,
            seed: 3,
        }),
        batch_size: 1,
    })?;
    let rule = StepRule::InvSqrt { scale: 1.0 };
    let sched = Schedule::preset(Preset::ForwardBackward, rule.clone())?;
    let mut st = SolverState::init(&p, &sched, None)?;
    let mut x = PrimalPoint::zeros(p.dim());
    let mut worst = 0.0f64;
    for n in 1..=2000 {
        let s = rule.at(n);
        let g = p.loss_subgradient(&x);
        let y = PrimalPoint::new(x.iter().zip(g.iter()).map(|(xi, gi)| xi - s * gi).collect());
        x = p.regularizer().prox(p.mirror(), &y, s)?;
        st.step(&p, &sched, &mut Oracle::Exact)?;
        worst = worst.max(st.x().max_abs_diff(&x));
        if n % 500 == 0 {
            println!(
                "n={n:>5} f={:.8} max deviation so far {worst:.2e}",
                st.objective()
            );
        }
    }
    Ok(())
}
