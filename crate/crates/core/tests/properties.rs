use proptest::prelude::*;

use xrda::geometry::{pairing, DualPoint, MirrorMap, Norm, PrimalPoint};
use xrda::problem::{build_problem, CompositeProblem, DataSource, Loss, Matrix, ProblemSpec};
use xrda::regularizer::Regularizer;
use xrda::schedule::{next_gamma, Averaging, Preset, ProxWeight, Schedule, StepRule};
use xrda::solver::{Oracle, SolverState};

fn vec_in(lo: f64, hi: f64, d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, d)
}

fn simplex(d: usize) -> impl Strategy<Value = Vec<f64>> {
    vec_in(0.01, 1.0, d).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn instance(loss: Loss) -> impl Strategy<Value = CompositeProblem> {
    (2usize..6, 2usize..5).prop_flat_map(move |(m, d)| {
        (vec_in(-2.0, 2.0, m * d), vec_in(-1.0, 1.0, m)).prop_map(move |(flat, b)| {
            let rows = flat.chunks(d).map(<[f64]>::to_vec).collect();
            let b = if loss == Loss::Logistic {
                b.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect()
            } else {
                b
            };
            build_problem(&ProblemSpec {
                loss,
                regularizer: Regularizer::l1(0.1).unwrap(),
                mirror: MirrorMap::Euclidean,
                data: DataSource::Inline {
                    a: Matrix::from_rows(rows).unwrap(),
                    b,
                },
                batch_size: 1,
            })
            .unwrap()
        })
    })
}

fn regularizers(d: usize) -> Vec<Regularizer> {
    vec![
        Regularizer::l1(0.3).unwrap(),
        Regularizer::Zero,
        Regularizer::indicator_box(vec![-0.5; d], vec![0.7; d]).unwrap(),
        Regularizer::indicator_l2_ball(1.0).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn euclidean_bregman_is_half_squared_distance(x in vec_in(-5.0, 5.0, 4), y in vec_in(-5.0, 5.0, 4)) {
        let (xp, yp) = (PrimalPoint::new(x.clone()), PrimalPoint::new(y.clone()));
        let d = MirrorMap::Euclidean.bregman(&xp, &yp).unwrap();
        let linf = xp.max_abs_diff(&yp);
        prop_assert!(d >= 0.0);
        prop_assert!(d + 1e-12 >= 0.5 * linf * linf);
        let direct: f64 = x.iter().zip(&y).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
        prop_assert!((d - direct).abs() <= 1e-12 * (1.0 + direct));
    }

    #[test]
    fn entropy_bregman_satisfies_pinsker(x in simplex(5), y in simplex(5)) {
        let (xp, yp) = (PrimalPoint::new(x), PrimalPoint::new(y));
        let d = MirrorMap::NegativeEntropy.bregman(&xp, &yp).unwrap();
        let l1: f64 = xp.iter().zip(yp.iter()).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(d >= -1e-15);
        prop_assert!(d + 1e-12 >= 0.5 * l1 * l1);
    }

    #[test]
    fn bregman_matches_its_definition(x in vec_in(0.05, 3.0, 4), y in vec_in(0.05, 3.0, 4)) {
        for m in [MirrorMap::Euclidean, MirrorMap::NegativeEntropy] {
            let (xp, yp) = (PrimalPoint::new(x.clone()), PrimalPoint::new(y.clone()));
            let diff = PrimalPoint::new(x.iter().zip(&y).map(|(a, b)| a - b).collect());
            let direct = m.value(&xp).unwrap() - m.value(&yp).unwrap()
                - pairing(&m.grad(&yp).unwrap(), &diff).unwrap();
            let d = m.bregman(&xp, &yp).unwrap();
            prop_assert!((d - direct).abs() <= 1e-10 * (1.0 + direct.abs()), "{m:?}: {d} vs {direct}");
        }
    }

    #[test]
    fn mirror_round_trip(x in vec_in(1e-6, 50.0, 6)) {
        for m in [MirrorMap::Euclidean, MirrorMap::NegativeEntropy] {
            let xp = PrimalPoint::new(x.clone());
            let back = m.grad_inverse(&m.grad(&xp).unwrap()).unwrap();
            for (a, b) in back.iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn mirror_gradient_matches_finite_differences(x in vec_in(0.1, 4.0, 3)) {
        let h = 1e-6;
        for m in [MirrorMap::Euclidean, MirrorMap::NegativeEntropy] {
            let g = m.grad(&PrimalPoint::new(x.clone())).unwrap();
            for i in 0..x.len() {
                let mut up = x.clone();
                let mut dn = x.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (m.value(&PrimalPoint::new(up)).unwrap() - m.value(&PrimalPoint::new(dn)).unwrap()) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() <= 1e-6, "{m:?} coord {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn euclidean_prox_residual_is_a_subgradient(y in vec_in(-3.0, 3.0, 4), s in 0.01f64..5.0) {
        let yp = PrimalPoint::new(y.clone());
        for g in regularizers(4) {
            let z = g.prox(MirrorMap::Euclidean, &yp, s).unwrap();
            prop_assert!(g.value(&z).is_finite());
            if matches!(g, Regularizer::IndicatorL2Ball { .. }) {
                // Normal cone of the ball: the residual is a nonnegative multiple of z.
                let r: Vec<f64> = y.iter().zip(z.iter()).map(|(a, b)| a - b).collect();
                let rn = Norm::L2.of(&r);
                if rn > 1e-12 {
                    prop_assert!((z.norm(Norm::L2) - 1.0).abs() <= 1e-9);
                    let cos = r.iter().zip(z.iter()).map(|(a, b)| a * b).sum::<f64>() / rn;
                    prop_assert!((cos - 1.0).abs() <= 1e-9);
                }
                continue;
            }
            let h = DualPoint::new(y.iter().zip(z.iter()).map(|(a, b)| (a - b) / s).collect());
            prop_assert!(g.in_subdifferential(&h, &z, 1e-9).unwrap(), "{g:?}");
        }
    }

    #[test]
    fn euclidean_prox_beats_feasible_points(y in vec_in(-3.0, 3.0, 4), w in vec_in(-0.5, 0.5, 4), s in 0.01f64..5.0) {
        let yp = PrimalPoint::new(y.clone());
        let obj = |g: &Regularizer, z: &PrimalPoint| {
            0.5 * z.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + s * g.value(z)
        };
        for g in regularizers(4) {
            let z = g.prox(MirrorMap::Euclidean, &yp, s).unwrap();
            let other = PrimalPoint::new(w.clone());
            prop_assert!(obj(&g, &z) <= obj(&g, &other) + 1e-12);
        }
    }

    #[test]
    fn euclidean_prox_is_nonexpansive(a in vec_in(-3.0, 3.0, 4), b in vec_in(-3.0, 3.0, 4), s in 0.01f64..5.0) {
        let (ap, bp) = (PrimalPoint::new(a), PrimalPoint::new(b));
        for g in regularizers(4) {
            let pa = g.prox(MirrorMap::Euclidean, &ap, s).unwrap();
            let pb = g.prox(MirrorMap::Euclidean, &bp, s).unwrap();
            let before: Vec<f64> = ap.iter().zip(bp.iter()).map(|(x, y)| x - y).collect();
            let after: Vec<f64> = pa.iter().zip(pb.iter()).map(|(x, y)| x - y).collect();
            prop_assert!(Norm::L2.of(&after) <= Norm::L2.of(&before) + 1e-12);
        }
    }

    #[test]
    fn entropy_simplex_prox_is_normalization(y in vec_in(0.01, 10.0, 5), s in 0.01f64..5.0) {
        let z = Regularizer::IndicatorSimplex.prox(MirrorMap::NegativeEntropy, &PrimalPoint::new(y.clone()), s).unwrap();
        let total: f64 = y.iter().sum();
        prop_assert!((z.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (a, b) in z.iter().zip(&y) {
            prop_assert!((a - b / total).abs() <= 1e-15);
        }
    }

    #[test]
    fn loss_subgradients_support_the_loss(
        p in prop_oneof![instance(Loss::LeastAbsoluteDeviation), instance(Loss::Logistic)],
        x in vec_in(-2.0, 2.0, 5),
        z in vec_in(-2.0, 2.0, 5),
    ) {
        let d = p.dim();
        let (xp, zp) = (PrimalPoint::new(x[..d].to_vec()), PrimalPoint::new(z[..d].to_vec()));
        let g = p.loss_subgradient(&xp);
        let diff = PrimalPoint::new(zp.iter().zip(xp.iter()).map(|(a, b)| a - b).collect());
        let lin = p.loss_value(&xp) + pairing(&g, &diff).unwrap();
        prop_assert!(p.loss_value(&zp) >= lin - 1e-10);
        prop_assert!(g.norm(p.mirror().dual_norm()) <= p.lipschitz() + 1e-12);
    }

    #[test]
    fn sampled_subgradients_are_unbiased(p in instance(Loss::LeastAbsoluteDeviation), x in vec_in(-2.0, 2.0, 5)) {
        let d = p.dim();
        let m = p.rows();
        let xp = PrimalPoint::new(x[..d].to_vec());
        let full = p.loss_subgradient(&xp);
        let mut mean = vec![0.0; d];
        for i in 0..m {
            let gi = p.subgradient_on_rows(&xp, &[i]);
            prop_assert!(gi.norm(p.mirror().dual_norm()) <= p.lipschitz() + 1e-12);
            for (acc, v) in mean.iter_mut().zip(gi.iter()) {
                *acc += v / m as f64;
            }
        }
        for (a, b) in mean.iter().zip(full.iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // Pairs without replacement average to the same value.
        let mut pair_mean = vec![0.0; d];
        let pairs = (m * (m - 1) / 2) as f64;
        for i in 0..m {
            for j in i + 1..m {
                let g = p.subgradient_on_rows(&xp, &[i, j]);
                for (acc, v) in pair_mean.iter_mut().zip(g.iter()) {
                    *acc += v / pairs;
                }
            }
        }
        for (a, b) in pair_mean.iter().zip(full.iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn gamma_recursion_holds(steps in prop::collection::vec(1u32..64, 1..40), frac in 0.0f64..1.0) {
        let mut sorted: Vec<f64> = steps.iter().map(|&k| k as f64 / 8.0).collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = sorted.len();
        // No averaging: gamma is the exact running step sum.
        let none = Schedule::custom(StepRule::Sequence(sorted.clone()), ProxWeight::Constant(1.0), Averaging::None).unwrap();
        let gammas = none.gamma_sequence(n).unwrap();
        let mut sum = 0.0;
        for (k, g) in gammas.iter().enumerate() {
            prop_assert_eq!(*g, sum);
            sum += sorted[k];
        }
        // Fractional averaging follows gamma_{n+1} = (1 - mu) gamma_n + s_n.
        let frac_sched = Schedule::custom(StepRule::Sequence(sorted.clone()), ProxWeight::Constant(1.0), Averaging::GammaFraction(frac)).unwrap();
        let gammas = frac_sched.gamma_sequence(n).unwrap();
        for k in 1..n {
            let expected = (1.0 - frac) * gammas[k - 1] + sorted[k - 1];
            prop_assert!((gammas[k] - expected).abs() <= 1e-12 * (1.0 + expected));
        }
        prop_assert_eq!(next_gamma(2.0, 0.5, 0.5), 2.0);
    }

    #[test]
    fn backward_step_follows_preset(steps in prop::collection::vec(1u32..64, 2..30)) {
        let mut sorted: Vec<f64> = steps.iter().map(|&k| k as f64 / 8.0).collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = sorted.len();
        let p = build_problem(&ProblemSpec {
            loss: Loss::LeastAbsoluteDeviation,
            regularizer: Regularizer::l1(0.1).unwrap(),
            mirror: MirrorMap::Euclidean,
            data: DataSource::Inline {
                a: Matrix::from_rows(vec![vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.7, -1.0]]).unwrap(),
                b: vec![1.0, -0.5, 0.2],
            },
            batch_size: 1,
        }).unwrap();
        for preset in [Preset::LeapFrog, Preset::ConstantBackward, Preset::ForwardBackward] {
            let sched = Schedule::preset(preset, StepRule::Sequence(sorted.clone())).unwrap();
            let mut st = SolverState::init(&p, &sched, None).unwrap();
            let mut prev = 0.0;
            for k in 1..n {
                st.step(&p, &sched, &mut Oracle::Exact).unwrap();
                let b = st.backward_step();
                match preset {
                    Preset::LeapFrog => prop_assert!(b >= prev - 1e-12),
                    Preset::ConstantBackward => prop_assert!((b - sorted[0]).abs() <= 1e-12),
                    Preset::ForwardBackward => prop_assert!((b - sorted[k - 1]).abs() <= 1e-12),
                    _ => unreachable!(),
                }
                prev = b;
            }
        }
    }
}
