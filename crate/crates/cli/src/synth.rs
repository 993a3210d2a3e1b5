//! Synthetic datasets. Each generator's parameters are written into the
//! output as comment lines.

use parsimony::rng::stream;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::args::SynthKind;
use crate::error::{CliError, Result};

pub struct Dataset {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// `x ~ U(0, 10)`, `y = 2 sin(x/2) + 0.2 x + N(0, 1)`.
pub fn regress1d(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = stream(seed, "synth-regress1d", 0);
    (0..n)
        .map(|_| {
            let x: f64 = rng.gen_range(0.0..10.0);
            let e: f64 = StandardNormal.sample(&mut rng);
            (x, 2.0 * (x / 2.0).sin() + 0.2 * x + e)
        })
        .collect()
}

/// Points in `[0,1]^2` labelled `a` on the diagonal blocks (both
/// coordinates below 1/2 or both above) and `b` off them. A point comes
/// from the `a` blocks with probability `(1 + skew) / 2`.
pub fn blocks2d(n: usize, seed: u64, skew: f64) -> Vec<(f64, f64, &'static str)> {
    let mut rng = stream(seed, "synth-blocks2d", 0);
    (0..n)
        .map(|_| {
            let diagonal = rng.gen_bool((1.0 + skew) / 2.0);
            let u: f64 = rng.gen_range(0.0..0.5);
            let v: f64 = rng.gen_range(0.0..0.5);
            let high = rng.gen_bool(0.5);
            let (x1, x2) = match (diagonal, high) {
                (true, false) => (u, v),
                (true, true) => (0.5 + u, 0.5 + v),
                (false, false) => (u, 0.5 + v),
                (false, true) => (0.5 + u, v),
            };
            (x1, x2, if diagonal { "a" } else { "b" })
        })
        .collect()
}

/// Points uniform on `[0,1]^2`; `P(label = b | x) = x1`, so labels mix
/// smoothly from left to right and each label has overall share 1/2.
pub fn mixed2d(n: usize, seed: u64) -> Vec<(f64, f64, &'static str)> {
    let mut rng = stream(seed, "synth-mixed2d", 0);
    (0..n)
        .map(|_| {
            let x1: f64 = rng.gen_range(0.0..1.0);
            let x2: f64 = rng.gen_range(0.0..1.0);
            let b = rng.gen_bool(x1);
            (x1, x2, if b { "b" } else { "a" })
        })
        .collect()
}

pub fn generate(kind: SynthKind, n: usize, seed: u64, skew: f64) -> Result<Dataset> {
    if n == 0 {
        return Err(CliError::BadFlag("--n must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&skew) {
        return Err(CliError::BadFlag("--skew must lie in [0, 1)".into()));
    }
    let classes = |pts: Vec<(f64, f64, &str)>| -> Vec<Vec<String>> {
        pts.into_iter()
            .map(|(a, b, l)| vec![num(a), num(b), l.to_string()])
            .collect()
    };
    let header2d = vec!["f1".to_string(), "f2".to_string(), "label".to_string()];
    Ok(match kind {
        SynthKind::Regress1d => Dataset {
            comments: vec![format!("regress1d n={n} seed={seed}: x ~ U(0,10), y = 2 sin(x/2) + 0.2 x + N(0,1)")],
            header: vec!["x".into(), "y".into()],
            rows: regress1d(n, seed).into_iter().map(|(x, y)| vec![num(x), num(y)]).collect(),
        },
        SynthKind::Blocks2d => Dataset {
            comments: vec![
                format!(
                    "blocks2d n={n} seed={seed} skew={skew}: x ~ U([0,1]^2), label a on the diagonal blocks, drawn with probability (1+skew)/2"
                ),
                "labels: a,b".into(),
            ],
            header: header2d,
            rows: classes(blocks2d(n, seed, skew)),
        },
        SynthKind::Mixed2d => Dataset {
            comments: vec![
                format!("mixed2d n={n} seed={seed}: x ~ U([0,1]^2), P(label=b|x) = x1"),
                "labels: a,b".into(),
            ],
            header: header2d,
            rows: classes(mixed2d(n, seed)),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        assert_eq!(regress1d(12, 3), regress1d(12, 3));
        assert_eq!(regress1d(12, 3).len(), 12);
        assert_eq!(blocks2d(1, 5, 0.0).len(), 1);
        assert_ne!(mixed2d(5, 1), mixed2d(5, 2));
    }

    #[test]
    fn blocks_follow_the_diagonal_rule() {
        for (x1, x2, l) in blocks2d(500, 1, 0.6) {
            assert_eq!((x1 < 0.5) == (x2 < 0.5), l == "a");
        }
        let a = blocks2d(4000, 2, 0.6).iter().filter(|p| p.2 == "a").count() as f64;
        assert!((a / 4000.0 - 0.8).abs() < 0.03);
    }

    #[test]
    fn mixed_proportions_within_three_sigma() {
        let n = 2000.0;
        let b = mixed2d(2000, 9).iter().filter(|p| p.2 == "b").count() as f64;
        assert!((b - n / 2.0).abs() <= 3.0 * (n * 0.25).sqrt());
    }

    #[test]
    fn flags_are_checked() {
        assert_eq!(generate(SynthKind::Regress1d, 0, 1, 0.0).err().unwrap().exit_code(), 3);
        assert_eq!(generate(SynthKind::Blocks2d, 5, 1, 1.0).err().unwrap().exit_code(), 3);
    }
}
