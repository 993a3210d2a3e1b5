//! Log-gamma and digamma for positive arguments.
//!
//! Both shift the argument above [`ASYMPTOTIC_FLOOR`] with the recurrences
//! `lnΓ(x+1) = lnΓ(x) + ln x` and `ψ(x+1) = ψ(x) + 1/x`, then apply the
//! Stirling / asymptotic series.

const ASYMPTOTIC_FLOOR: f64 = 12.0;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    let mut shift = 0.0;
    let mut y = x;
    while y < ASYMPTOTIC_FLOOR {
        shift += y.ln();
        y += 1.0;
    }
    stirling(y) - shift
}

fn stirling(x: f64) -> f64 {
    // Bernoulli coefficients B_{2n} / (2n (2n - 1)).
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in C {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `log2 Γ(x)`.
pub fn log2_gamma(x: f64) -> f64 {
    ln_gamma(x) / std::f64::consts::LN_2
}

/// Digamma `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma requires a positive argument, got {x}");
    let mut acc = 0.0;
    let mut y = x;
    while y < ASYMPTOTIC_FLOOR {
        acc -= 1.0 / y;
        y += 1.0;
    }
    // B_{2n} / (2n)
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32_760.0,
        1.0 / 12.0,
    ];
    let inv2 = 1.0 / (y * y);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in C {
        series += c * pow;
        pow *= inv2;
    }
    acc + y.ln() - 0.5 / y - series
}
