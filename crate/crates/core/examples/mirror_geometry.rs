//! Mirror maps, Bregman distances and dual round trips.

use xrda::geometry::{MirrorMap, PrimalPoint};

fn main() -> xrda::Result<()> {
    let x = PrimalPoint::new(vec![0.7, 0.2, 0.1]);
    let y = PrimalPoint::new(vec![1.0 / 3.0; 3]);
    for m in [MirrorMap::Euclidean, MirrorMap::NegativeEntropy] {
        let xt = m.grad(&x)?;
        let back = m.grad_inverse(&xt)?;
        let l1: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b).abs()).sum();
        println!(
            "{:<16} sigma={} D(x,y)={:.6} D(y,x)={:.6} ||x-y||_1^2/2={:.6} round-trip error={:.1e}",
            m.name(),
            m.sigma(),
            m.bregman(&x, &y)?,
            m.bregman(&y, &x)?,
            0.5 * l1 * l1,
            back.max_abs_diff(&x),
        );
    }
    // Entropy needs strictly positive points for its gradient.
    let edge = PrimalPoint::new(vec![1.0, 0.0, 0.0]);
    println!(
        "entropy grad at a vertex: {:?}",
        MirrorMap::NegativeEntropy.grad(&edge).err()
    );
    println!(
        "KL from vertex to center: {:.6}",
        MirrorMap::NegativeEntropy.bregman(&edge, &y)?
    );
    Ok(())
}
