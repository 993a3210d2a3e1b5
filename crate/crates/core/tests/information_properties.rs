use approx::assert_abs_diff_eq;
use parsimony::information::{info, kl, kl_to_measure, restricted_minimizer, DiscreteDist};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dist(rng: &mut impl Rng, n: usize) -> DiscreteDist {
    DiscreteDist::normalize((0..n).map(|_| rng.gen_range(0.01..1.0)).collect()).unwrap()
}

fn dist_strategy(n: usize) -> impl Strategy<Value = DiscreteDist> {
    proptest::collection::vec(0.01f64..1.0, n).prop_map(|w| DiscreteDist::normalize(w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn additivity(r in dist_strategy(5), q0 in dist_strategy(5), q1 in dist_strategy(5), q2 in dist_strategy(5)) {
        let direct = info(&r, &q2, &q0).unwrap();
        let staged = info(&r, &q2, &q1).unwrap() + info(&r, &q1, &q0).unwrap();
        prop_assert!((direct - staged).abs() < 1e-10);
    }

    #[test]
    fn antisymmetry(r in dist_strategy(4), a in dist_strategy(4), b in dist_strategy(4)) {
        prop_assert!((info(&r, &a, &b).unwrap() + info(&r, &b, &a).unwrap()).abs() < 1e-12);
        prop_assert_eq!(info(&r, &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn chain_rule_on_2x3(r in dist_strategy(6), q1 in dist_strategy(6), q0 in dist_strategy(6)) {
        // Joint index x * 3 + y.
        let marginal = |d: &DiscreteDist| DiscreteDist::normalize(
            (0..2).map(|x| (0..3).map(|y| d.weights()[x * 3 + y]).sum()).collect()).unwrap();
        let conditional = |d: &DiscreteDist, x: usize| DiscreteDist::normalize(
            (0..3).map(|y| d.weights()[x * 3 + y]).collect()).unwrap();
        let joint = info(&r, &q1, &q0).unwrap();
        let rx = marginal(&r);
        let mut staged = info(&rx, &marginal(&q1), &marginal(&q0)).unwrap();
        for x in 0..2 {
            staged += rx.weights()[x] * info(&conditional(&r, x), &conditional(&q1, x), &conditional(&q0, x)).unwrap();
        }
        prop_assert!((joint - staged).abs() < 1e-10);
    }

    #[test]
    fn kl_is_nonnegative(r in dist_strategy(6), q in dist_strategy(6)) {
        prop_assert!(kl(&r, &q).unwrap() >= -1e-15);
    }
}

#[test]
fn proper_utility() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let truth = random_dist(&mut rng, 6);
        let prior = random_dist(&mut rng, 6);
        let best = info(&truth, &truth, &prior).unwrap();
        for _ in 0..200 {
            let q = random_dist(&mut rng, 6);
            assert!(info(&truth, &q, &prior).unwrap() < best);
        }
    }
}

#[test]
fn posterior_optimizes_the_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let grid = 8;
        let prior = random_dist(&mut rng, grid);
        let log2_lik: Vec<f64> = (0..grid).map(|_| rng.gen_range(-12.0..0.0)).collect();
        let objective = |q: &DiscreteDist| {
            q.weights().iter().zip(&log2_lik).map(|(w, l)| w * l).sum::<f64>() - kl(q, &prior).unwrap()
        };
        let post = DiscreteDist::normalize(
            prior.weights().iter().zip(&log2_lik).map(|(p, l)| p * l.exp2()).collect(),
        )
        .unwrap();
        let best = objective(&post);
        for _ in 0..200 {
            let eps = rng.gen_range(0.001..0.5);
            let noise = random_dist(&mut rng, grid);
            let q = DiscreteDist::normalize(
                post.weights().iter().zip(noise.weights()).map(|(a, b)| (1.0 - eps) * a + eps * b).collect(),
            )
            .unwrap();
            assert!(objective(&q) < best);
        }
    }
}

#[test]
fn restricted_minimizer_beats_random_feasible_beliefs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..25 {
        let n = rng.gen_range(2..=16);
        // Lengths from a random subnormalized prefix code.
        let lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(1..8) as f64).collect();
        let kraft: f64 = lengths.iter().map(|l| (-l).exp2()).sum();
        let lengths: Vec<f64> = lengths.iter().map(|l| l + kraft.log2().ceil().max(0.0)).collect();
        let mut feasible: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        feasible[rng.gen_range(0..n)] = true;
        let measure: Vec<f64> = lengths.iter().map(|l| (-l).exp2()).collect();
        let (q_star, kl_star) = restricted_minimizer(&lengths, &feasible).unwrap();
        assert_abs_diff_eq!(kl_to_measure(&q_star, &measure).unwrap(), kl_star, epsilon = 1e-12);
        for _ in 0..200 {
            let q = DiscreteDist::normalize(
                feasible.iter().map(|&f| if f { rng.gen_range(0.0..1.0) } else { 0.0 }).collect(),
            )
            .unwrap();
            assert!(kl_to_measure(&q, &measure).unwrap() >= kl_star - 1e-12);
        }
    }
}
