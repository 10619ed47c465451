//! Composite objectives `f = F + G` with Lipschitz losses `F`.
//!
//! Three losses are provided: logistic regression, least absolute deviation
//! and a linear functional. All are globally Lipschitz, so a single constant
//! `M` bounds every exact and sampled subgradient in the mirror's dual norm.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{DualPoint, MirrorMap, PrimalPoint};
use crate::regularizer::Regularizer;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::InvalidParameter("matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    /// Parses the dense text format: one row per line, whitespace-separated
    /// decimals. Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!(
                            "line {}: cannot parse `{tok}` as a number",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Matrix::from_rows(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in self.row_iter() {
            let line: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Loss {
    /// `(1/m) sum log(1 + exp(-b_i <a_i, x>))` with labels `b_i = +-1`.
    Logistic,
    /// `(1/m) sum |<a_i, x> - b_i|`.
    LeastAbsoluteDeviation,
    /// `<c, x>`.
    Linear,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::LeastAbsoluteDeviation => "lad",
            Loss::Linear => "linear",
        }
    }
}

/// Recipe for a planted-sparse synthetic instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticRecipe {
    pub rows: usize,
    pub dim: usize,
    /// Number of nonzeros in the planted solution.
    pub sparsity: usize,
    pub noise: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Inline { a: Matrix, b: Vec<f64> },
    Cost(Vec<f64>),
    Synthetic(SyntheticRecipe),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub loss: Loss,
    pub regularizer: Regularizer,
    pub mirror: MirrorMap,
    pub data: DataSource,
    pub batch_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Data {
    Rows { a: Matrix, b: Vec<f64> },
    Cost(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeProblem {
    loss: Loss,
    data: Data,
    regularizer: Regularizer,
    mirror: MirrorMap,
    lipschitz: f64,
    batch_size: usize,
    planted: Option<PrimalPoint>,
}

/// A stochastic subgradient together with the RNG position it was drawn
/// from.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSample {
    pub value: DualPoint,
    pub rng_word_pos: u128,
}

pub fn build_problem(spec: &ProblemSpec) -> Result<CompositeProblem> {
    spec.regularizer.check_supported(spec.mirror)?;
    let (data, planted) = match &spec.data {
        DataSource::Inline { a, b } => {
            if spec.loss == Loss::Linear {
                return Err(Error::InvalidParameter(
                    "the linear loss takes a cost vector, not a design matrix".into(),
                ));
            }
            (
                Data::Rows {
                    a: a.clone(),
                    b: b.clone(),
                },
                None,
            )
        }
        DataSource::Cost(c) => {
            if spec.loss != Loss::Linear {
                return Err(Error::InvalidParameter(format!(
                    "the {} loss needs a design matrix and targets",
                    spec.loss.name()
                )));
            }
            (Data::Cost(c.clone()), None)
        }
        DataSource::Synthetic(recipe) => {
            let (data, planted) = synthesize(spec.loss, recipe)?;
            (data, Some(planted))
        }
    };
    let problem = CompositeProblem::from_parts(
        spec.loss,
        data,
        spec.regularizer.clone(),
        spec.mirror,
        spec.batch_size,
        planted,
    )?;
    Ok(problem)
}

fn synthesize(loss: Loss, r: &SyntheticRecipe) -> Result<(Data, PrimalPoint)> {
    if r.rows == 0 || r.dim == 0 {
        return Err(Error::InvalidParameter(
            "synthetic problems need rows >= 1 and dim >= 1".into(),
        ));
    }
    if r.sparsity > r.dim {
        return Err(Error::InvalidParameter(format!(
            "sparsity {} exceeds dimension {}",
            r.sparsity, r.dim
        )));
    }
    if !(r.noise >= 0.0) {
        return Err(Error::InvalidParameter("noise must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let mut planted = vec![0.0; r.dim];
    for i in index::sample(&mut rng, r.dim, r.sparsity) {
        let magnitude = 1.0 + rng.random::<f64>();
        planted[i] = if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        };
    }
    if loss == Loss::Linear {
        let c = (0..r.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        return Ok((Data::Cost(c), PrimalPoint::new(planted)));
    }
    let mut rows = Vec::with_capacity(r.rows);
    let mut b = Vec::with_capacity(r.rows);
    for _ in 0..r.rows {
        let a: Vec<f64> = (0..r.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let eps: f64 = StandardNormal.sample(&mut rng);
        let z = dot(&a, &planted) + r.noise * eps;
        b.push(match loss {
            Loss::Logistic => {
                if z >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => z,
        });
        rows.push(a);
    }
    Ok((
        Data::Rows {
            a: Matrix::from_rows(rows)?,
            b,
        },
        PrimalPoint::new(planted),
    ))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + exp(-t))` without overflow.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl CompositeProblem {
    fn from_parts(
        loss: Loss,
        data: Data,
        regularizer: Regularizer,
        mirror: MirrorMap,
        batch_size: usize,
        planted: Option<PrimalPoint>,
    ) -> Result<Self> {
        regularizer.check_supported(mirror)?;
        let (rows, dim) = match &data {
            Data::Rows { a, b } => {
                if a.rows() != b.len() {
                    return Err(Error::DimensionMismatch {
                        expected: a.rows(),
                        found: b.len(),
                    });
                }
                if loss == Loss::Logistic {
                    if let Some(i) = b.iter().position(|&v| v != 1.0 && v != -1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "logistic labels must be +1 or -1, row {i} has {}",
                            b[i]
                        )));
                    }
                }
                (a.rows(), a.cols())
            }
            Data::Cost(c) => (1, c.len()),
        };
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if let Some(d) = regularizer.dim() {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        if batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        if batch_size > rows {
            return Err(Error::BatchTooLarge {
                batch: batch_size,
                rows,
            });
        }
        let mut p = CompositeProblem {
            loss,
            data,
            regularizer,
            mirror,
            lipschitz: 0.0,
            batch_size,
            planted,
        };
        p.lipschitz = p.estimate_lipschitz();
        Ok(p)
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    pub fn mirror(&self) -> MirrorMap {
        self.mirror
    }

    /// `M`: bound on every subgradient of `F` in the mirror's dual norm.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Result<Self> {
        if batch_size == 0 || batch_size > self.rows() {
            return Err(Error::BatchTooLarge {
                batch: batch_size,
                rows: self.rows(),
            });
        }
        self.batch_size = batch_size;
        Ok(self)
    }

    /// The planted solution of a synthetic instance.
    pub fn planted(&self) -> Option<&PrimalPoint> {
        self.planted.as_ref()
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            Data::Rows { a, .. } => a.cols(),
            Data::Cost(c) => c.len(),
        }
    }

    /// Number of data rows (one for the linear loss).
    pub fn rows(&self) -> usize {
        match &self.data {
            Data::Rows { a, .. } => a.rows(),
            Data::Cost(_) => 1,
        }
    }

    pub fn design(&self) -> Option<(&Matrix, &[f64])> {
        match &self.data {
            Data::Rows { a, b } => Some((a, b)),
            Data::Cost(_) => None,
        }
    }

    pub fn cost(&self) -> Option<&[f64]> {
        match &self.data {
            Data::Cost(c) => Some(c),
            Data::Rows { .. } => None,
        }
    }

    /// Max over rows of the dual norm of the row (linear: of the cost).
    /// Valid for both losses because their scalar slopes are bounded by 1.
    pub fn estimate_lipschitz(&self) -> f64 {
        let dn = self.mirror.dual_norm();
        match &self.data {
            Data::Rows { a, .. } => a.row_iter().map(|r| dn.of(r)).fold(0.0, f64::max),
            Data::Cost(c) => dn.of(c),
        }
    }

    fn row_loss(&self, margin_or_residual: f64, target: f64) -> f64 {
        match self.loss {
            Loss::Logistic => softplus(-target * margin_or_residual),
            Loss::LeastAbsoluteDeviation => (margin_or_residual - target).abs(),
            Loss::Linear => unreachable!(),
        }
    }

    /// Derivative (or sign subgradient) of the row loss in `<a_i, x>`.
    pub(crate) fn row_slope(&self, z: f64, target: f64) -> f64 {
        match self.loss {
            Loss::Logistic => -target * sigmoid(-target * z),
            Loss::LeastAbsoluteDeviation => sign(z - target),
            Loss::Linear => unreachable!(),
        }
    }

    pub fn loss_value(&self, x: &PrimalPoint) -> f64 {
        match &self.data {
            Data::Rows { a, b } => {
                let total: f64 = a
                    .row_iter()
                    .zip(b)
                    .map(|(r, &t)| self.row_loss(dot(r, x.as_slice()), t))
                    .sum();
                total / a.rows() as f64
            }
            Data::Cost(c) => dot(c, x.as_slice()),
        }
    }

    pub fn loss_subgradient(&self, x: &PrimalPoint) -> DualPoint {
        match &self.data {
            Data::Rows { a, .. } => self.batch_subgradient(x, 0..a.rows()),
            Data::Cost(c) => DualPoint::new(c.clone()),
        }
    }

    fn batch_subgradient(&self, x: &PrimalPoint, batch: impl ExactSizeIterator<Item = usize>) -> DualPoint {
        let Data::Rows { a, b } = &self.data else {
            unreachable!()
        };
        let count = batch.len() as f64;
        let mut g = vec![0.0; a.cols()];
        for i in batch {
            let r = a.row(i);
            let w = self.row_slope(dot(r, x.as_slice()), b[i]);
            if w != 0.0 {
                for (gj, rj) in g.iter_mut().zip(r) {
                    *gj += w * rj;
                }
            }
        }
        for gj in &mut g {
            *gj /= count;
        }
        DualPoint::new(g)
    }

    /// Subgradient of the loss averaged over an explicit set of rows.
    pub fn subgradient_on_rows(&self, x: &PrimalPoint, rows: &[usize]) -> DualPoint {
        match &self.data {
            Data::Rows { .. } => self.batch_subgradient(x, rows.iter().copied()),
            Data::Cost(c) => DualPoint::new(c.clone()),
        }
    }

    /// Unbiased stochastic subgradient: the subgradient of the loss averaged
    /// over a uniformly drawn batch of distinct rows.
    pub fn sample_subgradient(&self, x: &PrimalPoint, rng: &mut ChaCha8Rng) -> GradientSample {
        let rng_word_pos = rng.get_word_pos();
        let value = match &self.data {
            Data::Rows { a, .. } => {
                if self.batch_size == a.rows() {
                    self.batch_subgradient(x, 0..a.rows())
                } else {
                    let batch = index::sample(rng, a.rows(), self.batch_size);
                    self.batch_subgradient(x, batch.into_iter())
                }
            }
            Data::Cost(c) => DualPoint::new(c.clone()),
        };
        GradientSample { value, rng_word_pos }
    }

    pub fn objective(&self, x: &PrimalPoint) -> f64 {
        self.loss_value(x) + self.regularizer.value(x)
    }
}
