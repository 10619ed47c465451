//! Closed-form mirror prox steps `argmin_z D(z, y) + s G(z)`.

use xrda::geometry::{MirrorMap, PrimalPoint};
use xrda::regularizer::Regularizer;

fn main() -> xrda::Result<()> {
    let y = PrimalPoint::new(vec![1.5, -0.2, 0.6, -2.0]);
    let s = 0.5;
    let cases = [
        ("l1 (lambda = 1)", Regularizer::l1(1.0)?),
        (
            "box [-1, 1]",
            Regularizer::indicator_box(vec![-1.0; 4], vec![1.0; 4])?,
        ),
        ("l2 ball (r = 1)", Regularizer::indicator_l2_ball(1.0)?),
        ("zero", Regularizer::Zero),
    ];
    println!("y = {:?}, s = {s}", y.as_slice());
    for (name, g) in &cases {
        let z = g.prox(MirrorMap::Euclidean, &y, s)?;
        println!("euclidean {name:<16} -> {:?}", z.as_slice());
    }

    let w = PrimalPoint::new(vec![2.0, 1.0, 1.0, 0.5]);
    let z = Regularizer::IndicatorSimplex.prox(MirrorMap::NegativeEntropy, &w, s)?;
    println!("entropy   simplex          -> {:?}", z.as_slice());
    // The dual form never exponentiates large coordinates directly.
    let huge = MirrorMap::Euclidean.grad(&PrimalPoint::new(vec![800.0, 799.0, 0.0, 0.0]))?;
    let (z, _) = Regularizer::IndicatorSimplex.prox_dual(MirrorMap::NegativeEntropy, &huge, s)?;
    println!("entropy   simplex (dual)   -> {:?}", z.as_slice());
    Ok(())
}
