use parsimony::codecs::{
    fraction_decode, fraction_encode, integer_decode, integer_encode, kraft_sum, BinaryFraction, IntCodeScheme,
};
use proptest::prelude::*;

fn schemes() -> Vec<IntCodeScheme> {
    vec![
        IntCodeScheme::Unary,
        IntCodeScheme::EliasGamma,
        IntCodeScheme::EliasDelta,
        IntCodeScheme::EliasOmega,
        IntCodeScheme::Rissanen(1),
        IntCodeScheme::Rissanen(2),
        IntCodeScheme::Rissanen(3),
        IntCodeScheme::Rissanen(4),
        IntCodeScheme::LengthSymbol(4),
        IntCodeScheme::LengthSymbol(8),
    ]
}

fn codeword(s: IntCodeScheme, z: u64) -> Vec<bool> {
    integer_encode(s, z).unwrap().bit_vec().unwrap()
}

#[test]
fn roundtrip_every_value_to_ten_thousand() {
    for s in schemes() {
        for z in (0..=10_000).filter(|&z| s.represents(z)) {
            let bits = codeword(s, z);
            assert_eq!(integer_decode(s, &bits).unwrap(), (z, bits.len()), "{s} at {z}");
            assert_eq!(s.length_of(z).unwrap(), bits.len() as f64);
        }
    }
}

#[test]
fn prefix_free_to_4096() {
    for s in schemes() {
        let mut words: Vec<String> = (0..=4096u64)
            .filter(|&z| s.represents(z))
            .map(|z| codeword(s, z).iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect();
        words.sort();
        // Any prefix pair shows up between lexicographic neighbours.
        for w in words.windows(2) {
            assert!(!w[1].starts_with(&w[0]), "{s}: {} prefixes {}", w[0], w[1]);
        }
    }
}

#[test]
fn kraft_sums() {
    for s in schemes() {
        let total = kraft_sum(s, None).unwrap();
        if s == IntCodeScheme::Rissanen(4) {
            // Values stop at 2^64 - 2: the 63 third-level values 64..=126, each
            // with a 10-bit prefix, would start segments wider than 64 bits.
            assert_eq!(total, 1.0 - 63.0 / 1024.0);
        } else if s.is_complete() {
            assert!((total - 1.0).abs() <= 1e-9, "{s}: {total}");
        } else {
            assert!(total <= 1.0 + 1e-12, "{s}: {total}");
        }
    }
    assert_eq!(kraft_sum(IntCodeScheme::Unary, Some(20)).unwrap(), 1.0 - (-21.0f64).exp2());
}

#[test]
fn lengths_are_nondecreasing_with_plateaus() {
    for s in schemes() {
        let lens: Vec<f64> = (0..=4096u64)
            .filter(|&z| s.represents(z))
            .map(|z| s.length_of(z).unwrap())
            .collect();
        assert!(lens.windows(2).all(|w| w[0] <= w[1]), "{s}");
    }
    // Elias γ is flat on [2^j - 1, 2^(j+1) - 2] at 2j + 1 bits.
    for j in 0..12u32 {
        for z in (1u64 << j) - 1..=(1u64 << (j + 1)) - 2 {
            assert_eq!(IntCodeScheme::EliasGamma.length_of(z).unwrap(), 2.0 * j as f64 + 1.0);
        }
    }
    // Length-symbol(4) is flat on each payload width.
    for (width, range) in [(0u32, 0..=0u64), (1, 1..=2), (2, 3..=6), (3, 7..=14)] {
        for z in range {
            assert_eq!(IntCodeScheme::LengthSymbol(4).length_of(z).unwrap(), 2.0 + width as f64);
        }
    }
}

proptest! {
    #[test]
    fn elias_roundtrip_large(z in 0u64..(1u64 << 50)) {
        for s in [IntCodeScheme::EliasGamma, IntCodeScheme::EliasDelta, IntCodeScheme::EliasOmega, IntCodeScheme::Rissanen(4)] {
            let bits = codeword(s, z);
            prop_assert_eq!(integer_decode(s, &bits).unwrap(), (z, bits.len()));
        }
    }

    #[test]
    fn decoding_ignores_trailing_bits(z in 0u64..5000, tail in proptest::collection::vec(any::<bool>(), 0..16)) {
        for s in schemes().into_iter().filter(|s| s.represents(z)) {
            let mut bits = codeword(s, z);
            let n = bits.len();
            bits.extend(&tail);
            prop_assert_eq!(integer_decode(s, &bits).unwrap(), (z, n));
        }
    }

    #[test]
    fn fractions_roundtrip(z in 0u32..12, seed in any::<u64>()) {
        let i = seed % (1u64 << z) + 1;
        let f = BinaryFraction::new(z, i).unwrap();
        for s in [IntCodeScheme::EliasGamma, IntCodeScheme::Rissanen(3), IntCodeScheme::LengthSymbol(16)] {
            let bits = fraction_encode(s, f).unwrap().bit_vec().unwrap();
            prop_assert_eq!(fraction_decode(s, &bits).unwrap(), (f, bits.len()));
        }
    }
}
