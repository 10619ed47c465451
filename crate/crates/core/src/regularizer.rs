//! The backward-step side of a composite objective.
//!
//! Every supported (mirror, regularizer) pair has a closed-form mirror-prox
//! map `argmin_z D(z, y) + s G(z)`; the registry in
//! [`Regularizer::check_supported`] rejects the rest up front.

use crate::error::{Error, Result};
use crate::geometry::{DualPoint, MirrorMap, Norm, PrimalPoint};

/// Absolute tolerance for indicator membership in [`Regularizer::value`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Regularizer {
    /// `lambda * |x|_1`.
    L1 {
        lambda: f64,
    },
    /// Indicator of `{lo <= x <= hi}`.
    IndicatorBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Indicator of the probability simplex.
    IndicatorSimplex,
    /// Indicator of `{|x|_2 <= radius}`.
    IndicatorL2Ball {
        radius: f64,
    },
    Zero,
}

impl Regularizer {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Regularizer::L1 { lambda })
    }

    pub fn indicator_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] <= hi[i])) {
            return Err(Error::InvalidParameter(format!(
                "box bounds require lo <= hi, violated at coordinate {i}"
            )));
        }
        Ok(Regularizer::IndicatorBox { lo, hi })
    }

    pub fn indicator_l2_ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Regularizer::IndicatorL2Ball { radius })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::L1 { .. } => "l1",
            Regularizer::IndicatorBox { .. } => "box",
            Regularizer::IndicatorSimplex => "simplex",
            Regularizer::IndicatorL2Ball { .. } => "l2ball",
            Regularizer::Zero => "zero",
        }
    }

    /// Dimension fixed by the regularizer, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Regularizer::IndicatorBox { lo, .. } => Some(lo.len()),
            _ => None,
        }
    }

    /// Registry of pairs with a closed-form mirror-prox map.
    pub fn check_supported(&self, mirror: MirrorMap) -> Result<()> {
        let ok = matches!(
            (mirror, self),
            (
                MirrorMap::Euclidean,
                Regularizer::L1 { .. }
                    | Regularizer::IndicatorBox { .. }
                    | Regularizer::IndicatorL2Ball { .. }
                    | Regularizer::Zero
            ) | (
                MirrorMap::NegativeEntropy,
                Regularizer::IndicatorSimplex | Regularizer::Zero
            )
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Unsupported {
                mirror: mirror.name(),
                regularizer: self.name(),
            })
        }
    }

    /// `G(x)` with the extended-value convention: `+inf` outside an
    /// indicator's set.
    pub fn value(&self, x: &PrimalPoint) -> f64 {
        let inside = match self {
            Regularizer::L1 { lambda } => return lambda * x.norm(Norm::L1),
            Regularizer::Zero => return 0.0,
            Regularizer::IndicatorBox { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l - MEMBERSHIP_TOL && v <= h + MEMBERSHIP_TOL),
            Regularizer::IndicatorSimplex => {
                x.iter().all(|&v| v >= -MEMBERSHIP_TOL)
                    && (x.iter().sum::<f64>() - 1.0).abs() <= MEMBERSHIP_TOL
            }
            Regularizer::IndicatorL2Ball { radius } => x.norm(Norm::L2) <= radius + MEMBERSHIP_TOL,
        };
        if inside {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Mirror-prox update `argmin_z D(z, y) + s G(z)` for a primal center.
    pub fn prox(&self, mirror: MirrorMap, y: &PrimalPoint, s: f64) -> Result<PrimalPoint> {
        self.check_supported(mirror)?;
        check_step(s)?;
        mirror.check_interior(y)?;
        if s == 0.0 {
            return Ok(y.clone());
        }
        match (mirror, self) {
            (MirrorMap::NegativeEntropy, Regularizer::IndicatorSimplex) => {
                let total: f64 = y.iter().sum();
                Ok(PrimalPoint::new(y.iter().map(|v| v / total).collect()))
            }
            (MirrorMap::NegativeEntropy, Regularizer::Zero) => Ok(y.clone()),
            _ => Ok(self.euclidean_prox(y.as_slice(), s)),
        }
    }

    /// Mirror-prox update given the center in dual coordinates. Returns the
    /// minimizer and its dual image.
    ///
    /// For the entropy mirror on the simplex the result is a softmax of
    /// `y~`, evaluated with a max shift so that large dual coordinates never
    /// overflow.
    pub fn prox_dual(
        &self,
        mirror: MirrorMap,
        y_tilde: &DualPoint,
        s: f64,
    ) -> Result<(PrimalPoint, DualPoint)> {
        self.check_supported(mirror)?;
        check_step(s)?;
        match (mirror, self) {
            (MirrorMap::Euclidean, _) => {
                let x = if s == 0.0 {
                    PrimalPoint::new(y_tilde.as_slice().to_vec())
                } else {
                    self.euclidean_prox(y_tilde.as_slice(), s)
                };
                let xt = DualPoint::new(x.as_slice().to_vec());
                Ok((x, xt))
            }
            (MirrorMap::NegativeEntropy, Regularizer::IndicatorSimplex) if s > 0.0 => {
                let shift = y_tilde.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                let weights: Vec<f64> = y_tilde.iter().map(|v| (v - shift).exp()).collect();
                let total: f64 = weights.iter().sum();
                let log_total = total.ln();
                let x = weights.iter().map(|w| w / total).collect();
                // 1 + log x_i without going through x_i, which may underflow.
                let xt = y_tilde.iter().map(|v| 1.0 + (v - shift) - log_total).collect();
                Ok((PrimalPoint::new(x), DualPoint::new(xt)))
            }
            (MirrorMap::NegativeEntropy, _) => {
                let x = mirror.grad_inverse(y_tilde)?;
                Ok((x, y_tilde.clone()))
            }
        }
    }

    fn euclidean_prox(&self, y: &[f64], s: f64) -> PrimalPoint {
        let out = match self {
            Regularizer::L1 { lambda } => {
                let thr = s * lambda;
                y.iter().map(|&v| soft_threshold(v, thr)).collect()
            }
            Regularizer::IndicatorBox { lo, hi } => y
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| v.clamp(l, h))
                .collect(),
            Regularizer::IndicatorL2Ball { radius } => {
                let n = Norm::L2.of(y);
                if n <= *radius {
                    y.to_vec()
                } else {
                    y.iter().map(|v| v * (radius / n)).collect()
                }
            }
            Regularizer::Zero => y.to_vec(),
            Regularizer::IndicatorSimplex => unreachable!("rejected by the registry"),
        };
        PrimalPoint::new(out)
    }

    /// Whether `h` belongs to the subdifferential of `G` at `x`, up to `tol`.
    pub fn in_subdifferential(&self, h: &DualPoint, x: &PrimalPoint, tol: f64) -> Result<bool> {
        if h.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: h.dim(),
            });
        }
        match self {
            Regularizer::L1 { lambda } => Ok(h.iter().zip(x.iter()).all(|(&hi, &xi)| {
                hi.abs() <= lambda + tol && (xi.abs() <= tol || (hi - lambda * xi.signum()).abs() <= tol)
            })),
            Regularizer::IndicatorBox { lo, hi } => Ok((0..x.dim()).all(|i| {
                let at_hi = (x[i] - hi[i]).abs() <= tol;
                let at_lo = (x[i] - lo[i]).abs() <= tol;
                match (at_lo, at_hi) {
                    (true, true) => true,
                    (false, true) => h[i] >= -tol,
                    (true, false) => h[i] <= tol,
                    (false, false) => h[i].abs() <= tol,
                }
            })),
            Regularizer::Zero => Ok(h.norm(Norm::Linf) <= tol),
            _ => Err(Error::UnsupportedOperation {
                operation: "subdifferential membership",
                regularizer: self.name(),
            }),
        }
    }

    /// Default starting point under `mirror`: the canonical minimizer of
    /// `G`, except that the entropy mirror with `Zero` starts at the
    /// minimizer of the mirror function, `x_i = 1/e`.
    pub fn start_point(&self, mirror: MirrorMap, dim: usize) -> PrimalPoint {
        match (mirror, self) {
            (MirrorMap::NegativeEntropy, Regularizer::Zero) => PrimalPoint::new(vec![(-1.0f64).exp(); dim]),
            _ => self.canonical_argmin(dim),
        }
    }

    /// A canonical minimizer of `G`.
    pub fn canonical_argmin(&self, dim: usize) -> PrimalPoint {
        match self {
            Regularizer::L1 { .. } | Regularizer::Zero | Regularizer::IndicatorL2Ball { .. } => {
                PrimalPoint::zeros(dim)
            }
            Regularizer::IndicatorBox { lo, hi } => PrimalPoint::new(
                lo.iter()
                    .zip(hi)
                    .map(|(&l, &h)| if l <= 0.0 && 0.0 <= h { 0.0 } else { 0.5 * (l + h) })
                    .collect(),
            ),
            Regularizer::IndicatorSimplex => PrimalPoint::new(vec![1.0 / dim as f64; dim]),
        }
    }
}

fn check_step(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "prox step must be finite and nonnegative, got {s}"
        )))
    }
}

pub fn soft_threshold(v: f64, thr: f64) -> f64 {
    if v > thr {
        v - thr
    } else if v < -thr {
        v + thr
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> PrimalPoint {
        PrimalPoint::new(v.to_vec())
    }
    fn d(v: &[f64]) -> DualPoint {
        DualPoint::new(v.to_vec())
    }

    #[test]
    fn values() {
        assert_eq!(Regularizer::l1(2.0).unwrap().value(&p(&[1.0, -1.5])), 5.0);
        assert_eq!(Regularizer::IndicatorSimplex.value(&p(&[0.3, 0.7])), 0.0);
        assert_eq!(
            Regularizer::IndicatorSimplex.value(&p(&[0.3, 0.8])),
            f64::INFINITY
        );
        let ball = Regularizer::indicator_l2_ball(1.0).unwrap();
        assert_eq!(ball.value(&p(&[1.0, 1.0])), f64::INFINITY);
        assert_eq!(Regularizer::Zero.value(&p(&[4.0])), 0.0);
    }

    #[test]
    fn constructors_validate() {
        assert!(Regularizer::l1(0.0).is_err());
        assert!(Regularizer::indicator_l2_ball(-1.0).is_err());
        assert!(Regularizer::indicator_box(vec![1.0], vec![0.0]).is_err());
        assert!(Regularizer::indicator_box(vec![0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn registry() {
        let l1 = Regularizer::l1(1.0).unwrap();
        assert!(l1.check_supported(MirrorMap::Euclidean).is_ok());
        assert_eq!(
            l1.check_supported(MirrorMap::NegativeEntropy),
            Err(Error::Unsupported {
                mirror: "entropy",
                regularizer: "l1"
            })
        );
        assert!(Regularizer::IndicatorSimplex
            .check_supported(MirrorMap::Euclidean)
            .is_err());
        assert!(Regularizer::IndicatorSimplex
            .check_supported(MirrorMap::NegativeEntropy)
            .is_ok());
    }

    #[test]
    fn soft_thresholding() {
        let g = Regularizer::l1(1.0).unwrap();
        let x = g.prox(MirrorMap::Euclidean, &p(&[1.2, -0.3, 0.5]), 0.5).unwrap();
        assert!(x.max_abs_diff(&p(&[0.7, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn simplex_normalization() {
        for s in [0.1, 1.0, 10.0] {
            let x = Regularizer::IndicatorSimplex
                .prox(MirrorMap::NegativeEntropy, &p(&[0.2, 0.6]), s)
                .unwrap();
            assert!(x.max_abs_diff(&p(&[0.25, 0.75])) < 1e-15);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let y = p(&[0.9, -1.1, 0.2]);
        let g = Regularizer::l1(3.0).unwrap();
        assert_eq!(g.prox(MirrorMap::Euclidean, &y, 0.0).unwrap(), y);
        let y = p(&[0.2, 0.6]);
        assert_eq!(
            Regularizer::IndicatorSimplex
                .prox(MirrorMap::NegativeEntropy, &y, 0.0)
                .unwrap(),
            y
        );
    }

    #[test]
    fn dual_prox_survives_large_dual_coordinates() {
        let (x, xt) = Regularizer::IndicatorSimplex
            .prox_dual(MirrorMap::NegativeEntropy, &d(&[2000.0, 1999.0]), 1.0)
            .unwrap();
        let e = std::f64::consts::E;
        assert!((x[0] - e / (1.0 + e)).abs() < 1e-15);
        assert!((xt[0] - (1.0 + x[0].ln())).abs() < 1e-14);
        assert!((xt[1] - (1.0 + x[1].ln())).abs() < 1e-14);
    }

    #[test]
    fn box_and_ball_projection() {
        let b = Regularizer::indicator_box(vec![-1.0, 0.0], vec![1.0, 0.5]).unwrap();
        let x = b.prox(MirrorMap::Euclidean, &p(&[2.0, 0.25]), 1.0).unwrap();
        assert_eq!(x, p(&[1.0, 0.25]));
        let ball = Regularizer::indicator_l2_ball(1.0).unwrap();
        let x = ball.prox(MirrorMap::Euclidean, &p(&[3.0, 4.0]), 1.0).unwrap();
        assert!(x.max_abs_diff(&p(&[0.6, 0.8])) < 1e-15);
    }

    #[test]
    fn subdifferential_membership() {
        let g = Regularizer::l1(1.0).unwrap();
        assert!(g
            .in_subdifferential(&d(&[1.0, -0.3]), &p(&[2.0, 0.0]), 1e-9)
            .unwrap());
        assert!(!g
            .in_subdifferential(&d(&[1.5, 0.0]), &p(&[2.0, 0.0]), 1e-9)
            .unwrap());
        assert!(!g
            .in_subdifferential(&d(&[-1.0, 0.0]), &p(&[2.0, 0.0]), 1e-9)
            .unwrap());
        assert!(Regularizer::Zero
            .in_subdifferential(&d(&[0.0, 0.0]), &p(&[5.0, -2.0]), 1e-9)
            .unwrap());
        assert!(!Regularizer::Zero
            .in_subdifferential(&d(&[1e-3, 0.0]), &p(&[5.0, -2.0]), 1e-9)
            .unwrap());
        let b = Regularizer::indicator_box(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(b
            .in_subdifferential(&d(&[2.0, -3.0, 0.0]), &p(&[1.0, 0.0, 0.5]), 1e-9)
            .unwrap());
        assert!(!b
            .in_subdifferential(&d(&[-2.0, 0.0, 0.0]), &p(&[1.0, 0.0, 0.5]), 1e-9)
            .unwrap());
        assert!(Regularizer::IndicatorSimplex
            .in_subdifferential(&d(&[0.0]), &p(&[1.0]), 1e-9)
            .is_err());
    }

    #[test]
    fn canonical_minimizers() {
        assert_eq!(Regularizer::l1(0.3).unwrap().canonical_argmin(3), p(&[0.0; 3]));
        assert_eq!(Regularizer::IndicatorSimplex.canonical_argmin(4), p(&[0.25; 4]));
        assert_eq!(Regularizer::Zero.canonical_argmin(2), p(&[0.0; 2]));
        let e = Regularizer::Zero.start_point(MirrorMap::NegativeEntropy, 2);
        assert_eq!(
            MirrorMap::NegativeEntropy.grad(&e).unwrap().as_slice(),
            &[0.0, 0.0]
        );
        let b = Regularizer::indicator_box(vec![-1.0, 1.0], vec![1.0, 3.0]).unwrap();
        let x = b.canonical_argmin(2);
        assert_eq!(x, p(&[0.0, 2.0]));
        assert_eq!(b.value(&x), 0.0);
    }
}
