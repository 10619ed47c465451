//! Primal and dual vectors, norms, and the mirror maps that identify them.
//!
//! A [`MirrorMap`] is a strongly convex function `phi` whose gradient sends a
//! primal point `x` to its dual image `x~ = grad phi(x)`. All iterates of the
//! solver live in dual coordinates and are mapped back through the inverse
//! gradient once per iteration.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Entropy coordinates below this value are treated as outside the open
/// positive orthant.
pub const ENTROPY_FLOOR: f64 = 1e-300;

macro_rules! point_type {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Default)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(coords: Vec<f64>) -> Self {
                $name(coords)
            }

            /// Checked constructor: non-empty and every entry finite.
            pub fn try_new(coords: Vec<f64>) -> Result<Self> {
                if coords.is_empty() {
                    return Err(Error::InvalidParameter(
                        "points must have at least one coordinate".into(),
                    ));
                }
                if let Some((i, v)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "coordinate {i} is not finite ({v})"
                    )));
                }
                Ok($name(coords))
            }

            pub fn zeros(dim: usize) -> Self {
                $name(vec![0.0; dim])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn iter(&self) -> std::slice::Iter<'_, f64> {
                self.0.iter()
            }

            pub fn norm(&self, which: Norm) -> f64 {
                which.of(&self.0)
            }

            /// Largest absolute coordinate difference.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                $name(v)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "{:?}"), self.0)
            }
        }
    };
}

point_type!(PrimalPoint, "A point of the primal space `V`.");
point_type!(
    DualPoint,
    "A linear functional on `V`: gradients, subgradients and mirror images."
);

/// Vector norms used by the two supported mirror geometries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `<g, x>`.
pub fn pairing(g: &DualPoint, x: &PrimalPoint) -> Result<f64> {
    check_dims(x.dim(), g.dim())?;
    Ok(g.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
}

pub fn norm(x: &PrimalPoint, which: Norm) -> f64 {
    x.norm(which)
}

pub fn dual_norm(g: &DualPoint, which: Norm) -> f64 {
    g.norm(which)
}

/// Mirror functions with closed-form gradients and inverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MirrorMap {
    /// `phi(x) = 1/2 |x|_2^2` on all of `R^d`.
    Euclidean,
    /// `phi(x) = sum x_i log x_i` on the open positive orthant.
    NegativeEntropy,
}

impl MirrorMap {
    pub fn name(self) -> &'static str {
        match self {
            MirrorMap::Euclidean => "euclidean",
            MirrorMap::NegativeEntropy => "entropy",
        }
    }

    /// Strong convexity modulus with respect to [`Self::primal_norm`].
    pub fn sigma(self) -> f64 {
        1.0
    }

    pub fn primal_norm(self) -> Norm {
        match self {
            MirrorMap::Euclidean => Norm::L2,
            MirrorMap::NegativeEntropy => Norm::L1,
        }
    }

    pub fn dual_norm(self) -> Norm {
        match self {
            MirrorMap::Euclidean => Norm::L2,
            MirrorMap::NegativeEntropy => Norm::Linf,
        }
    }

    /// Fails unless every coordinate is in the open domain of `grad phi`.
    pub fn check_interior(self, x: &PrimalPoint) -> Result<()> {
        if let MirrorMap::NegativeEntropy = self {
            if let Some((index, &value)) = x
                .iter()
                .enumerate()
                .find(|(_, &v)| !(v >= ENTROPY_FLOOR) || !v.is_finite())
            {
                return Err(Error::Domain {
                    mirror: self.name(),
                    index,
                    value,
                });
            }
        }
        Ok(())
    }

    // The closed domain of phi: entropy accepts exact zeros (0 log 0 = 0).
    fn check_closed_domain(self, x: &PrimalPoint) -> Result<()> {
        if let MirrorMap::NegativeEntropy = self {
            if let Some((index, &value)) = x.iter().enumerate().find(|(_, &v)| !(v >= 0.0) || !v.is_finite())
            {
                return Err(Error::Domain {
                    mirror: self.name(),
                    index,
                    value,
                });
            }
        }
        Ok(())
    }

    pub fn value(self, x: &PrimalPoint) -> Result<f64> {
        self.check_closed_domain(x)?;
        Ok(match self {
            MirrorMap::Euclidean => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            MirrorMap::NegativeEntropy => x.iter().map(|&v| xlogx(v)).sum(),
        })
    }

    pub fn grad(self, x: &PrimalPoint) -> Result<DualPoint> {
        self.check_interior(x)?;
        Ok(match self {
            MirrorMap::Euclidean => DualPoint::new(x.as_slice().to_vec()),
            MirrorMap::NegativeEntropy => DualPoint::new(x.iter().map(|v| 1.0 + v.ln()).collect()),
        })
    }

    /// Inverse of [`Self::grad`]. The entropy inverse `exp(x~ - 1)` reports
    /// overflow instead of saturating to infinity.
    pub fn grad_inverse(self, xt: &DualPoint) -> Result<PrimalPoint> {
        match self {
            MirrorMap::Euclidean => Ok(PrimalPoint::new(xt.as_slice().to_vec())),
            MirrorMap::NegativeEntropy => {
                let mut out = Vec::with_capacity(xt.dim());
                for (index, &value) in xt.iter().enumerate() {
                    let v = (value - 1.0).exp();
                    if !v.is_finite() {
                        return Err(Error::Overflow { index, value });
                    }
                    out.push(v);
                }
                Ok(PrimalPoint::new(out))
            }
        }
    }

    /// `D(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>`, with `x` in the
    /// closed domain and `y` in the interior.
    pub fn bregman(self, x: &PrimalPoint, y: &PrimalPoint) -> Result<f64> {
        check_dims(x.dim(), y.dim())?;
        self.check_closed_domain(x)?;
        self.check_interior(y)?;
        let d = match self {
            MirrorMap::Euclidean => {
                0.5 * x
                    .iter()
                    .zip(y.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            }
            // Generalized KL divergence; equal to the definition term by term.
            MirrorMap::NegativeEntropy => x
                .iter()
                .zip(y.iter())
                .map(|(&a, &b)| if a == 0.0 { b } else { a * (a / b).ln() - a + b })
                .sum(),
        };
        Ok(d.max(0.0))
    }
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}
