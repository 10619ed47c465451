//! The XRDA iteration in dual coordinates.
//!
//! One step maps `(x~_{n-1/2}, x~_n)` to `(x~_{n+1/2}, x~_{n+1})`:
//!
//! ```text
//! x~'_n      = (1 - mu_n) x~_{n-1/2} + mu_n x~_n
//! x~_{n+1/2} = (alpha_n / alpha_{n+1}) x~'_n + (1 - alpha_n / alpha_{n+1}) x~_1 - (s_n / alpha_{n+1}) g_n
//! x_{n+1}    = argmin_z D(z, x_{n+1/2}) + (gamma_{n+1} / alpha_{n+1}) G(z)
//! ```
//!
//! with `mu_n = t_n / gamma_n` and `gamma_{n+1} = (1 - mu_n) gamma_n + s_n`.
//! The subgradient `h_{n+1}` of `G` at `x_{n+1}` falls out of the prox step
//! and is kept for the next averaging step.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{DualPoint, MirrorMap, PrimalPoint};
use crate::problem::CompositeProblem;
use crate::reference::ReferenceSolution;
use crate::regularizer::Regularizer;
use crate::schedule::{averaging_fraction, next_gamma, Schedule};

/// Magnitudes at or below this count as zero in `nnz`.
pub const NNZ_THRESHOLD: f64 = 1e-12;

/// Source of forward-step subgradients.
#[derive(Clone, Debug)]
pub enum Oracle {
    Exact,
    Stochastic(Box<ChaCha8Rng>),
}

impl Oracle {
    pub fn stochastic(seed: u64) -> Self {
        Oracle::Stochastic(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    fn sample(&mut self, p: &CompositeProblem, x: &PrimalPoint) -> DualPoint {
        match self {
            Oracle::Exact => p.loss_subgradient(x),
            Oracle::Stochastic(rng) => p.sample_subgradient(x, rng).value,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Stochastic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    n: usize,
    x_tilde_half: DualPoint,
    x_tilde_n: DualPoint,
    x_n: PrimalPoint,
    x_1: PrimalPoint,
    x_tilde_1: DualPoint,
    h_n: DualPoint,
    gamma_n: f64,
    alpha_n: f64,
    s_n: f64,
    s_sum: f64,
    weighted_sum: Vec<f64>,
    f_n: f64,
    best_f: f64,
    best_x: PrimalPoint,
    bound_acc: f64,
    dual_accum: DualPoint,
    enforce_schedule: bool,
    schedule_violated: bool,
}

impl SolverState {
    /// Starts at `x_1` (default: [`Regularizer::start_point`]) with
    /// `h_1 = 0` and `gamma_1 = 0`.
    pub fn init(p: &CompositeProblem, sched: &Schedule, x1: Option<PrimalPoint>) -> Result<Self> {
        let g = p.regularizer();
        let m = p.mirror();
        g.check_supported(m)?;
        let d = p.dim();
        let canonical = g.start_point(m, d);
        let x1 = match x1 {
            Some(x) => {
                if x.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: x.dim(),
                    });
                }
                let (value, minimum) = (g.value(&x), g.value(&canonical));
                if !(value <= minimum + 1e-9) {
                    return Err(Error::NotRegularizerMinimizer { value, minimum });
                }
                x
            }
            None => canonical,
        };
        if let Err(e) = m.check_interior(&x1) {
            return Err(match (m, e) {
                (MirrorMap::NegativeEntropy, Error::Domain { index, value, .. }) => {
                    Error::InvalidParameter(format!(
                        "x1 coordinate {index} = {value} is outside the open positive orthant; \
                         use the simplex regularizer, whose default start is the uniform vector"
                    ))
                }
                (_, e) => e,
            });
        }
        let xt1 = m.grad(&x1)?;
        let s1 = sched.s(1);
        let a1 = sched.alpha(1);
        if !(a1 > 0.0) || !(s1 > 0.0) {
            return Err(Error::ScheduleViolation {
                n: 1,
                reason: "s_1 and alpha_1 must be positive".into(),
            });
        }
        let f1 = p.objective(&x1);
        Ok(SolverState {
            n: 1,
            x_tilde_half: xt1.clone(),
            x_tilde_n: xt1.clone(),
            x_n: x1.clone(),
            x_tilde_1: xt1,
            h_n: DualPoint::zeros(d),
            gamma_n: 0.0,
            alpha_n: a1,
            s_n: s1,
            s_sum: s1,
            weighted_sum: x1.iter().map(|v| s1 * v).collect(),
            f_n: f1,
            best_f: f1,
            best_x: x1.clone(),
            bound_acc: s1 * s1 / a1,
            dual_accum: DualPoint::zeros(d),
            x_1: x1,
            enforce_schedule: true,
            schedule_violated: false,
        })
    }

    /// Continue past schedule violations instead of halting. The bound is
    /// reported as invalid once a violation has happened.
    pub fn allow_schedule_violations(mut self) -> Self {
        self.enforce_schedule = false;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn x(&self) -> &PrimalPoint {
        &self.x_n
    }
    pub fn x_tilde(&self) -> &DualPoint {
        &self.x_tilde_n
    }
    pub fn x_tilde_half(&self) -> &DualPoint {
        &self.x_tilde_half
    }
    pub fn x1(&self) -> &PrimalPoint {
        &self.x_1
    }
    pub fn gamma(&self) -> f64 {
        self.gamma_n
    }
    pub fn alpha(&self) -> f64 {
        self.alpha_n
    }
    /// `S_n = s_1 + ... + s_n`.
    pub fn step_sum(&self) -> f64 {
        self.s_sum
    }
    /// `s_1^2 / alpha_1 + ... + s_n^2 / alpha_n`.
    pub fn bound_accumulator(&self) -> f64 {
        self.bound_acc
    }
    /// `sum_{i<n} (s_i g_i + t_i h_i)`.
    pub fn dual_accum(&self) -> &DualPoint {
        &self.dual_accum
    }
    /// `f(x_n)`.
    pub fn objective(&self) -> f64 {
        self.f_n
    }
    /// `min_{i<=n} f(x_i)` and its argmin.
    pub fn best(&self) -> (f64, &PrimalPoint) {
        (self.best_f, &self.best_x)
    }
    /// Backward step `gamma_n / alpha_n` that produced `x_n`.
    pub fn backward_step(&self) -> f64 {
        self.gamma_n / self.alpha_n
    }
    pub fn schedule_violated(&self) -> bool {
        self.schedule_violated
    }

    /// `h_n`, the element of the subdifferential of `G` at `x_n` produced by
    /// the last prox step (`h_1 = 0`).
    pub fn extract_h(&self) -> &DualPoint {
        &self.h_n
    }

    /// `x_bar_n = S_n^{-1} sum s_i x_i`.
    pub fn averaged_iterate(&self) -> PrimalPoint {
        PrimalPoint::new(self.weighted_sum.iter().map(|v| v / self.s_sum).collect())
    }

    /// `S_n^{-1} (alpha_n D + M^2 / (2 sigma) sum s_i^2 / alpha_i)` with
    /// `D = D(x*, x_1)` supplied by the caller.
    pub fn theoretical_bound(&self, d_star: f64, lipschitz: f64, sigma: f64) -> f64 {
        (self.alpha_n * d_star + lipschitz * lipschitz / (2.0 * sigma) * self.bound_acc) / self.s_sum
    }

    /// Advances from `n` to `n + 1`.
    pub fn step(&mut self, p: &CompositeProblem, sched: &Schedule, oracle: &mut Oracle) -> Result<()> {
        let n = self.n;
        let m = p.mirror();
        let s = self.s_n;
        let alpha = self.alpha_n;
        let alpha_next = sched.alpha(n + 1);
        let s_next = sched.s(n + 1);
        let t = sched.t(n, self.gamma_n, &self.x_n);
        if let Err(e) = sched.check(n, self.gamma_n, t) {
            if self.enforce_schedule {
                return Err(e);
            }
            self.schedule_violated = true;
        }
        let mu = averaging_fraction(self.gamma_n, t);
        let g = oracle.sample(p, &self.x_n);

        let ratio = alpha / alpha_next;
        let forward = s / alpha_next;
        let mut half = Vec::with_capacity(self.x_tilde_n.dim());
        for i in 0..self.x_tilde_n.dim() {
            let averaged = if mu == 0.0 {
                self.x_tilde_half[i]
            } else if mu == 1.0 {
                self.x_tilde_n[i]
            } else {
                (1.0 - mu) * self.x_tilde_half[i] + mu * self.x_tilde_n[i]
            };
            let shrunk = if ratio == 1.0 {
                averaged
            } else {
                ratio * averaged + (1.0 - ratio) * self.x_tilde_1[i]
            };
            half.push(shrunk - forward * g[i]);
        }
        let half = DualPoint::new(half);

        let gamma_next = next_gamma(self.gamma_n, s, t);
        let backward = gamma_next / alpha_next;
        let (x_next, xt_next) = p.regularizer().prox_dual(m, &half, backward)?;
        let h_next = if gamma_next > 0.0 {
            DualPoint::new(
                half.iter()
                    .zip(xt_next.iter())
                    .map(|(a, b)| (a - b) / backward)
                    .collect(),
            )
        } else {
            DualPoint::zeros(half.dim())
        };

        for (i, acc) in self.dual_accum.as_mut_slice().iter_mut().enumerate() {
            *acc += s * g[i] + t * self.h_n[i];
        }

        let f_next = p.objective(&x_next);
        self.s_sum += s_next;
        for (w, v) in self.weighted_sum.iter_mut().zip(x_next.iter()) {
            *w += s_next * v;
        }
        self.bound_acc += s_next * s_next / alpha_next;
        if f_next < self.best_f {
            self.best_f = f_next;
            self.best_x = x_next.clone();
        }

        self.n = n + 1;
        self.x_tilde_half = half;
        self.x_tilde_n = xt_next;
        self.x_n = x_next;
        self.h_n = h_next;
        self.gamma_n = gamma_next;
        self.alpha_n = alpha_next;
        self.s_n = s_next;
        self.f_n = f_next;
        Ok(())
    }

    /// `x_n` recomputed from the accumulated argmin form
    /// `argmin_x <sum_{i<n} s_i g_i + t_i h_i, x> + alpha_n D(x, x_1) + gamma_n G(x)`.
    /// Closed form only for the Euclidean mirror with `L1`, `Zero` or a box.
    pub fn argmin_form_iterate(&self, p: &CompositeProblem) -> Result<PrimalPoint> {
        let g = p.regularizer();
        let supported = p.mirror() == MirrorMap::Euclidean
            && matches!(
                g,
                Regularizer::L1 { .. } | Regularizer::Zero | Regularizer::IndicatorBox { .. }
            );
        if !supported {
            return Err(Error::Unsupported {
                mirror: p.mirror().name(),
                regularizer: g.name(),
            });
        }
        let center = PrimalPoint::new(
            self.x_1
                .iter()
                .zip(self.dual_accum.iter())
                .map(|(x, a)| x - a / self.alpha_n)
                .collect(),
        );
        g.prox(p.mirror(), &center, self.gamma_n / self.alpha_n)
    }

    /// `h_n` evaluated from the accumulated optimality condition
    /// `-(alpha_n (x~_n - x~_1) + sum_{i<n} s_i g_i + t_i h_i) / gamma_n`.
    pub fn accumulated_h(&self) -> DualPoint {
        if self.gamma_n == 0.0 {
            return DualPoint::zeros(self.x_tilde_n.dim());
        }
        DualPoint::new(
            (0..self.x_tilde_n.dim())
                .map(|i| {
                    -(self.alpha_n * (self.x_tilde_n[i] - self.x_tilde_1[i]) + self.dual_accum[i])
                        / self.gamma_n
                })
                .collect(),
        )
    }
}

fn nnz(x: &PrimalPoint) -> usize {
    x.iter().filter(|v| v.abs() > NNZ_THRESHOLD).count()
}

/// One logged row.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub f_x: f64,
    pub f_avg: f64,
    pub gap_best: f64,
    pub gap_avg: f64,
    pub bound: f64,
    pub backward_step: f64,
    pub nnz: usize,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Log every `stride`-th iterate.
    pub stride: usize,
    pub mode: Mode,
    pub seed: u64,
    pub x1: Option<PrimalPoint>,
    /// Keep going past schedule violations (the bound column becomes NaN).
    pub allow_violations: bool,
    /// Record wall-clock time. Off by default so traces are reproducible.
    pub wall_clock: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            stride: 1,
            mode: Mode::Exact,
            seed: 0,
            x1: None,
            allow_violations: false,
            wall_clock: false,
        }
    }
}

/// Applies `n_iters` steps from the initial state, logging iterate `n`
/// whenever `n` is a multiple of the stride. Gap and bound columns are NaN
/// without a reference solution.
pub fn run(
    p: &CompositeProblem,
    sched: &Schedule,
    n_iters: usize,
    reference: Option<&ReferenceSolution>,
    opts: &RunOptions,
) -> Result<(SolverState, Trace)> {
    run_with(p, sched, n_iters, reference, opts, |_| Ok(()))
}

/// [`run`] with a callback invoked on every state, including the initial
/// one. Returning an error stops the run.
pub fn run_with<F>(
    p: &CompositeProblem,
    sched: &Schedule,
    n_iters: usize,
    reference: Option<&ReferenceSolution>,
    opts: &RunOptions,
    mut inspect: F,
) -> Result<(SolverState, Trace)>
where
    F: FnMut(&SolverState) -> Result<()>,
{
    if n_iters == 0 {
        return Err(Error::InvalidParameter("n_iters must be at least 1".into()));
    }
    if opts.stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1".into()));
    }
    let mut state = SolverState::init(p, sched, opts.x1.clone())?;
    if opts.allow_violations {
        state = state.allow_schedule_violations();
    }
    let mut oracle = match opts.mode {
        Mode::Exact => Oracle::Exact,
        Mode::Stochastic => Oracle::stochastic(opts.seed),
    };
    let d_star = match reference {
        Some(r) => Some(p.mirror().bregman(&r.x_star, state.x1())?),
        None => None,
    };
    let start = Instant::now();
    let mut trace = Trace::default();
    let log = |state: &SolverState, trace: &mut Trace| {
        if !state.n.is_multiple_of(opts.stride) {
            return;
        }
        let x_avg = state.averaged_iterate();
        let f_avg = p.objective(&x_avg);
        let (gap_best, gap_avg, bound) = match (reference, d_star) {
            (Some(r), Some(d)) => {
                let bound = if state.schedule_violated {
                    f64::NAN
                } else {
                    state.theoretical_bound(d, p.lipschitz(), p.mirror().sigma())
                };
                (state.best_f - r.f_star, f_avg - r.f_star, bound)
            }
            _ => (f64::NAN, f64::NAN, f64::NAN),
        };
        trace.rows.push(TraceRow {
            n: state.n,
            f_x: state.f_n,
            f_avg,
            gap_best,
            gap_avg,
            bound,
            backward_step: state.backward_step(),
            nnz: nnz(&state.x_n),
            elapsed_s: if opts.wall_clock {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
        });
    };
    inspect(&state)?;
    log(&state, &mut trace);
    for _ in 0..n_iters {
        state.step(p, sched, &mut oracle)?;
        inspect(&state)?;
        log(&state, &mut trace);
    }
    Ok((state, trace))
}
