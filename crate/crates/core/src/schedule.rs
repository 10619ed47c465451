//! Parameter sequences `(s_n, alpha_n, t_n)` and the backward-step weight
//! `gamma_n` they induce through `gamma_{n+1} = gamma_n - t_n + s_n`.
//!
//! The convergence guarantee needs `s` non-increasing, `alpha`
//! non-decreasing and `0 <= t_n <= gamma_n`. Parametric rules are checked
//! when a schedule is built; the solver re-checks every index as it runs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::PrimalPoint;

/// Forward step sizes `s_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum StepRule {
    Constant(f64),
    /// `scale / sqrt(n)`.
    InvSqrt {
        scale: f64,
    },
    /// `scale * n^(-exponent)`.
    Power {
        scale: f64,
        exponent: f64,
    },
    /// Explicit values; the last one repeats.
    Sequence(Vec<f64>),
}

impl StepRule {
    pub fn at(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match self {
            StepRule::Constant(c) => *c,
            StepRule::InvSqrt { scale } => scale / (n as f64).sqrt(),
            StepRule::Power { scale, exponent } => scale * (n as f64).powf(-exponent),
            StepRule::Sequence(v) => v[(n - 1).min(v.len() - 1)],
        }
    }

    fn validate(&self, monotone: bool) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{what} must be positive, got {v}"
                )))
            }
        };
        match self {
            StepRule::Constant(c) => positive(*c, "step size"),
            StepRule::InvSqrt { scale } => positive(*scale, "step scale"),
            StepRule::Power { scale, exponent } => {
                positive(*scale, "step scale")?;
                if !exponent.is_finite() {
                    return Err(Error::InvalidParameter("step exponent must be finite".into()));
                }
                if monotone && *exponent < 0.0 {
                    return Err(Error::InvalidParameter("s must be non-increasing".into()));
                }
                Ok(())
            }
            StepRule::Sequence(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidParameter("step sequence is empty".into()));
                }
                for &s in v {
                    positive(s, "step size")?;
                }
                if monotone && v.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidParameter("s must be non-increasing".into()));
                }
                Ok(())
            }
        }
    }
}

/// Prox-center weights `alpha_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProxWeight {
    Constant(f64),
    /// `scale * sqrt(n)`.
    Sqrt {
        scale: f64,
    },
}

impl ProxWeight {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            ProxWeight::Constant(c) => *c,
            ProxWeight::Sqrt { scale } => scale * (n as f64).sqrt(),
        }
    }
}

/// State-dependent choice of `t_n`, given `n`, `gamma_n` and `x_n`.
pub trait AveragingPolicy: Send + Sync {
    fn weight(&self, n: usize, gamma: f64, x: &PrimalPoint) -> f64;
}

impl<F> AveragingPolicy for F
where
    F: Fn(usize, f64, &PrimalPoint) -> f64 + Send + Sync,
{
    fn weight(&self, n: usize, gamma: f64, x: &PrimalPoint) -> f64 {
        self(n, gamma, x)
    }
}

/// Averaging weights `t_n`.
#[derive(Clone)]
pub enum Averaging {
    None,
    /// `t_n = s_{n-1}` for `n > 1`.
    PreviousStep,
    /// `t_n = s_n` for `n > 1`.
    CurrentStep,
    /// `t_n = mu * gamma_n`.
    GammaFraction(f64),
    Policy(Arc<dyn AveragingPolicy>),
}

impl fmt::Debug for Averaging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Averaging::None => write!(f, "None"),
            Averaging::PreviousStep => write!(f, "PreviousStep"),
            Averaging::CurrentStep => write!(f, "CurrentStep"),
            Averaging::GammaFraction(mu) => write!(f, "GammaFraction({mu})"),
            Averaging::Policy(_) => write!(f, "Policy(..)"),
        }
    }
}

/// The named special cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    /// `alpha = 1`, `t_n = s_{n-1}`: plain forward-backward splitting.
    ForwardBackward,
    /// `s = 1`, `alpha_n = c sqrt(n)`, `t = 0`.
    Rda { c: f64 },
    /// `alpha = 1`, `t = 0`: backward step grows as the sum of steps.
    LeapFrog,
    /// `alpha = 1`, `t_n = s_n`: backward step pinned at `s_1`.
    ConstantBackward,
    /// `alpha = 1`, `t_n = mu gamma_n`.
    AveragedLeapFrog { mu: f64 },
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::ForwardBackward => "forward-backward",
            Preset::Rda { .. } => "rda",
            Preset::LeapFrog => "leap-frog",
            Preset::ConstantBackward => "constant-backward",
            Preset::AveragedLeapFrog { .. } => "averaged-leap-frog",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Schedule {
    step: StepRule,
    weight: ProxWeight,
    averaging: Averaging,
    preset: Option<Preset>,
}

impl Schedule {
    /// Builds a preset. `step` is ignored by [`Preset::Rda`], which fixes
    /// `s = 1`.
    pub fn preset(kind: Preset, step: StepRule) -> Result<Self> {
        Self::preset_checked(kind, step, true)
    }

    /// Like [`Schedule::preset`] but accepts increasing step rules. Runs
    /// with such schedules must allow violations.
    pub fn preset_unchecked(kind: Preset, step: StepRule) -> Result<Self> {
        Self::preset_checked(kind, step, false)
    }

    fn preset_checked(kind: Preset, step: StepRule, monotone: bool) -> Result<Self> {
        let (step, weight, averaging) = match kind {
            Preset::ForwardBackward => (step, ProxWeight::Constant(1.0), Averaging::PreviousStep),
            Preset::Rda { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "RDA scale c must be positive, got {c}"
                    )));
                }
                (
                    StepRule::Constant(1.0),
                    ProxWeight::Sqrt { scale: c },
                    Averaging::None,
                )
            }
            Preset::LeapFrog => (step, ProxWeight::Constant(1.0), Averaging::None),
            Preset::ConstantBackward => (step, ProxWeight::Constant(1.0), Averaging::CurrentStep),
            Preset::AveragedLeapFrog { mu } => {
                (step, ProxWeight::Constant(1.0), Averaging::GammaFraction(mu))
            }
        };
        let mut s = Self::build(step, weight, averaging, monotone)?;
        s.preset = Some(kind);
        Ok(s)
    }

    pub fn custom(step: StepRule, weight: ProxWeight, averaging: Averaging) -> Result<Self> {
        Self::build(step, weight, averaging, true)
    }

    pub fn custom_unchecked(step: StepRule, weight: ProxWeight, averaging: Averaging) -> Result<Self> {
        Self::build(step, weight, averaging, false)
    }

    fn build(step: StepRule, weight: ProxWeight, averaging: Averaging, monotone: bool) -> Result<Self> {
        step.validate(monotone)?;
        match weight {
            ProxWeight::Constant(c) | ProxWeight::Sqrt { scale: c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be positive, got {c}"
                    )));
                }
            }
        }
        if let Averaging::GammaFraction(mu) = averaging {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::InvalidParameter(format!(
                    "mu must lie in [0, 1], got {mu}"
                )));
            }
        }
        Ok(Schedule {
            step,
            weight,
            averaging,
            preset: None,
        })
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        self.preset
    }

    pub fn step_rule(&self) -> &StepRule {
        &self.step
    }

    pub fn s(&self, n: usize) -> f64 {
        self.step.at(n)
    }

    pub fn alpha(&self, n: usize) -> f64 {
        self.weight.at(n)
    }

    /// `t_n` given `gamma_n` and the current iterate.
    pub fn t(&self, n: usize, gamma: f64, x: &PrimalPoint) -> f64 {
        match &self.averaging {
            Averaging::None => 0.0,
            Averaging::PreviousStep if n > 1 => self.s(n - 1),
            Averaging::CurrentStep if n > 1 => self.s(n),
            Averaging::PreviousStep | Averaging::CurrentStep => 0.0,
            Averaging::GammaFraction(mu) => mu * gamma,
            Averaging::Policy(p) => p.weight(n, gamma, x),
        }
    }

    /// Checks the constraints that involve index `n` only through the
    /// schedule: `s_{n+1} <= s_n`, `alpha_n <= alpha_{n+1}`, positivity,
    /// and `0 <= t_n <= gamma_n`.
    pub fn check(&self, n: usize, gamma: f64, t: f64) -> Result<()> {
        let violation = |reason: String| Err(Error::ScheduleViolation { n, reason });
        let (s, s_next) = (self.s(n), self.s(n + 1));
        let (a, a_next) = (self.alpha(n), self.alpha(n + 1));
        if !(s > 0.0 && s.is_finite()) {
            return violation(format!("s_n = {s} must be positive"));
        }
        if s_next > s {
            return violation(format!("s must be non-increasing (s_n = {s}, s_n+1 = {s_next})"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return violation(format!("alpha_n = {a} must be positive"));
        }
        if a_next < a {
            return violation(format!(
                "alpha must be non-decreasing (alpha_n = {a}, alpha_n+1 = {a_next})"
            ));
        }
        if !(t >= 0.0) {
            return violation(format!("t_n = {t} must be nonnegative"));
        }
        if t > gamma * (1.0 + 1e-12) {
            return violation(format!("t_n = {t} exceeds gamma_n = {gamma}"));
        }
        Ok(())
    }

    /// `gamma_1 .. gamma_n` for schedules whose averaging does not depend on
    /// the iterates.
    pub fn gamma_sequence(&self, n: usize) -> Result<Vec<f64>> {
        if matches!(self.averaging, Averaging::Policy(_)) {
            return Err(Error::InvalidParameter(
                "gamma depends on the iterates for policy-driven averaging".into(),
            ));
        }
        let x = PrimalPoint::default();
        let mut out = Vec::with_capacity(n);
        let mut gamma = 0.0;
        for k in 1..=n {
            out.push(gamma);
            let t = self.t(k, gamma, &x);
            self.check(k, gamma, t)?;
            gamma = next_gamma(gamma, self.s(k), t);
        }
        Ok(out)
    }
}

/// `gamma_{n+1} = (1 - mu_n) gamma_n + s_n` with `mu_n = t_n / gamma_n`,
/// evaluated so that `t_n = gamma_n` and `t_n = s_n` are exact.
pub fn next_gamma(gamma: f64, s: f64, t: f64) -> f64 {
    if t == s {
        gamma
    } else {
        (gamma - t) + s
    }
}

/// `mu_n = t_n / gamma_n`, with `mu := 0` when `gamma_n = 0`.
pub fn averaging_fraction(gamma: f64, t: f64) -> f64 {
    if gamma > 0.0 {
        (t / gamma).min(1.0)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv_sqrt() -> StepRule {
        StepRule::InvSqrt { scale: 1.0 }
    }

    #[test]
    fn forward_backward_gamma_tracks_previous_step() {
        let s = Schedule::preset(Preset::ForwardBackward, inv_sqrt()).unwrap();
        let g = s.gamma_sequence(200).unwrap();
        assert_eq!(g[0], 0.0);
        for (n, &gn) in g.iter().enumerate().skip(1) {
            // gamma_{n+1} = s_n exactly, so t_{n+1} = gamma_{n+1}.
            assert_eq!(gn, s.s(n));
            assert_eq!(s.t(n + 1, gn, &PrimalPoint::default()), gn);
        }
    }

    #[test]
    fn leap_frog_gamma_is_partial_sum() {
        let s = Schedule::preset(
            Preset::LeapFrog,
            StepRule::Sequence(vec![1.0, 0.5, 0.5, 0.25, 0.125]),
        )
        .unwrap();
        let g = s.gamma_sequence(8).unwrap();
        // Dyadic steps keep every partial sum exact.
        assert_eq!(g, vec![0.0, 1.0, 1.5, 2.0, 2.25, 2.375, 2.5, 2.625]);
        let s = Schedule::preset(Preset::LeapFrog, inv_sqrt()).unwrap();
        let g = s.gamma_sequence(1000).unwrap();
        let mut sum = 0.0;
        for (n, &gn) in g.iter().enumerate().skip(1) {
            sum += s.s(n);
            assert!((gn - sum).abs() <= 1e-12 * sum);
        }
    }

    #[test]
    fn constant_backward_gamma_is_first_step() {
        let s = Schedule::preset(Preset::ConstantBackward, StepRule::InvSqrt { scale: 0.7 }).unwrap();
        let g = s.gamma_sequence(500).unwrap();
        for &gn in &g[1..] {
            assert_eq!(gn, s.s(1));
        }
    }

    #[test]
    fn averaged_leap_frog_recursion() {
        let s = Schedule::preset(
            Preset::AveragedLeapFrog { mu: 0.5 },
            StepRule::Sequence(vec![1.0, 0.5, 0.25]),
        )
        .unwrap();
        let g = s.gamma_sequence(5).unwrap();
        // gamma_{n+1} = gamma_n / 2 + s_n.
        assert_eq!(g, vec![0.0, 1.0, 1.0, 0.75, 0.625]);
    }

    #[test]
    fn rda_weights() {
        let s = Schedule::preset(Preset::Rda { c: 2.0 }, inv_sqrt()).unwrap();
        assert_eq!(s.s(17), 1.0);
        assert_eq!(s.alpha(4), 4.0);
        let g = s.gamma_sequence(10).unwrap();
        assert_eq!(g[9], 9.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(Schedule::preset(Preset::Rda { c: 0.0 }, inv_sqrt()).is_err());
        assert!(Schedule::preset(Preset::AveragedLeapFrog { mu: 1.5 }, inv_sqrt()).is_err());
        let err = Schedule::preset(Preset::LeapFrog, StepRule::Sequence(vec![0.5, 1.0])).unwrap_err();
        assert!(err.to_string().contains("s must be non-increasing"));
        let err = Schedule::preset(
            Preset::LeapFrog,
            StepRule::Power {
                scale: 1.0,
                exponent: -0.5,
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("s must be non-increasing"));
    }

    #[test]
    fn policy_violations_are_reported() {
        let greedy: Arc<dyn AveragingPolicy> = Arc::new(|_n: usize, g: f64, _x: &PrimalPoint| 2.0 * g + 1.0);
        let s = Schedule::custom(inv_sqrt(), ProxWeight::Constant(1.0), Averaging::Policy(greedy)).unwrap();
        let t = s.t(1, 0.0, &PrimalPoint::default());
        assert!(matches!(
            s.check(1, 0.0, t),
            Err(Error::ScheduleViolation { n: 1, .. })
        ));
        assert!(s.gamma_sequence(3).is_err());
    }

    #[test]
    fn decreasing_alpha_is_a_violation() {
        // Sequence steps cannot express decreasing alpha; emulate through check.
        let s = Schedule::custom(
            StepRule::Constant(1.0),
            ProxWeight::Constant(1.0),
            Averaging::None,
        )
        .unwrap();
        assert!(s.check(3, 2.0, 0.0).is_ok());
        assert!(s.check(3, 2.0, 2.5).is_err());
        assert!(s.check(3, 2.0, -0.1).is_err());
    }
}
