//! Extended regularized dual averaging (XRDA) for composite problems
//! `min_x f(x) = F(x) + G(x)` with a Lipschitz loss `F` and a simple
//! regularizer `G`.
//!
//! One recursion covers forward-backward splitting, regularized dual
//! averaging and the leap-frog family; see [`schedule::Preset`]. Each
//! capability has a runnable program under `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `mirror_geometry` | mirror maps, Bregman distances, dual round trips |
//! | `prox_operators` | closed-form mirror prox steps |
//! | `forward_backward_reduction` | the FB preset against a hand-written loop |
//! | `rda_rate` | the `n^(-1/2)` rate of RDA on a LAD+L1 problem |
//! | `sparsity_contrast` | iterate sparsity of leap-frog versus FB |
//! | `stochastic_bound` | seed-averaged gaps under sampled subgradients |
//! | `experiment_from_config` | the config-driven harness end to end |
//!
//! ```
//! use xrda::problem::{build_problem, DataSource, Loss, ProblemSpec, SyntheticRecipe};
//! use xrda::regularizer::Regularizer;
//! use xrda::schedule::{Preset, Schedule, StepRule};
//! use xrda::geometry::MirrorMap;
//! use xrda::solver::{run, RunOptions};
//!
//! let p = build_problem(&ProblemSpec {
//!     loss: Loss::LeastAbsoluteDeviation,
//!     regularizer: Regularizer::l1(0.1).unwrap(),
//!     mirror: MirrorMap::Euclidean,
//!     data: DataSource::Synthetic(SyntheticRecipe { rows: 30, dim: 10, sparsity: 2, noise: 0.1, seed: 1 }),
//!     batch_size: 1,
//! })
//! .unwrap();
//! let sched = Schedule::preset(Preset::LeapFrog, StepRule::InvSqrt { scale: 1.0 }).unwrap();
//! let (state, _) = run(&p, &sched, 200, None, &RunOptions::default()).unwrap();
//! assert!(state.objective() < p.objective(&p.regularizer().canonical_argmin(10)));
//! ```

// Negated float comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod harness;
pub mod problem;
pub mod reference;
pub mod regularizer;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
