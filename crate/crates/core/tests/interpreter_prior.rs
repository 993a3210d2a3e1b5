use parsimony::interpreters::{
    stationary_prior, stationary_prior_from, transition_matrix, SimulatorLengths, DEFAULT_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lengths(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.gen_range(0.5..12.0) }).collect())
        .collect()
}

#[test]
fn restarts_agree_and_stay_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for n in [2, 3, 6] {
        let t = transition_matrix(&SimulatorLengths::new(random_lengths(&mut rng, n)).unwrap());
        let reference = stationary_prior(&t, DEFAULT_TOL).unwrap();
        assert!(reference.weights().iter().all(|&w| w > 0.0));
        for _ in 0..50 {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let start: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let p = stationary_prior_from(&t, &start, DEFAULT_TOL).unwrap();
            for (a, b) in p.weights().iter().zip(reference.weights()) {
                assert!((a - b).abs() <= 10.0 * DEFAULT_TOL);
            }
        }
    }
}

#[test]
fn constant_shift_leaves_the_prior_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = random_lengths(&mut rng, 4);
    let shifted: Vec<Vec<f64>> = base.iter().map(|r| r.iter().map(|v| v + 7.5).collect()).collect();
    let t0 = transition_matrix(&SimulatorLengths::new(base).unwrap());
    let t1 = transition_matrix(&SimulatorLengths::with_offsets(shifted).unwrap());
    for (r0, r1) in t0.iter().zip(&t1) {
        for (a, b) in r0.iter().zip(r1) {
            assert!((a - b).abs() < 1e-15);
        }
    }
    let p0 = stationary_prior(&t0, DEFAULT_TOL).unwrap();
    let p1 = stationary_prior(&t1, DEFAULT_TOL).unwrap();
    for (a, b) in p0.weights().iter().zip(p1.weights()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn residual_within_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = transition_matrix(&SimulatorLengths::new(random_lengths(&mut rng, 8)).unwrap());
    let p = stationary_prior(&t, DEFAULT_TOL).unwrap();
    for (i, row) in t.iter().enumerate() {
        let tp: f64 = row.iter().zip(p.weights()).map(|(a, b)| a * b).sum();
        assert!((tp - p.weights()[i]).abs() <= DEFAULT_TOL);
    }
}
