//! Scaled complementary error function and helpers for the polar density
//! in its deep-tail regime.

use libm::erfc;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// `exp(x^2) erfc(x)`, finite for every finite `x`.
pub fn erfcx(x: f64) -> f64 {
    if x < 26.0 {
        if x < -26.0 {
            return f64::INFINITY;
        }
        (x * x).exp() * erfc(x)
    } else {
        // Asymptotic series; five terms reach full precision beyond x = 26.
        let z = 1.0 / (2.0 * x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..6 {
            term *= -((2 * k - 1) as f64) * z;
            sum += term;
        }
        FRAC_1_SQRT_PI / x * sum
    }
}

/// `ln erfc(x)`, accurate where `erfc` underflows.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 5.0 {
        erfc(x).ln()
    } else {
        erfcx(x).ln() - x * x
    }
}

/// `1 - sqrt(pi) x erfcx(x)` for `x >= 0`, without cancellation at large `x`.
pub fn erfcx_bracket(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 8.0 {
        1.0 - std::f64::consts::PI.sqrt() * x * erfcx(x)
    } else {
        // 1/(2x^2) - 3/(4x^4) + 15/(8x^6) - ...
        let z = 1.0 / (2.0 * x * x);
        let mut term = z;
        let mut sum = z;
        for k in 2..12 {
            term *= -((2 * k - 1) as f64) * z;
            sum += term;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn erfcx_reference_values() {
        // Values from the defining integral evaluated at high precision.
        let cases = [
            (0.0, 1.0),
            (1.0, 0.427_583_576_155_807_0),
            (5.0, 0.110_704_637_733_068_6),
            (30.0, 0.018_795_888_861_416_75),
            (-1.0, 5.008_980_080_762_283),
        ];
        for (x, want) in cases {
            let got = erfcx(x);
            assert!((got / want - 1.0).abs() < 1e-12, "erfcx({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn erfcx_is_continuous_at_switch() {
        let lo = erfcx(26.0 - 1e-9);
        let hi = erfcx(26.0);
        assert!((lo / hi - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bracket_is_continuous_and_positive() {
        let lo = erfcx_bracket(8.0 - 1e-12);
        let hi = erfcx_bracket(8.0);
        assert!((lo / hi - 1.0).abs() < 1e-9, "{lo} vs {hi}");
        for i in 0..200 {
            let x = i as f64 * 0.25;
            let b = erfcx_bracket(x);
            assert!(b > 0.0 && b <= 1.0, "bracket({x}) = {b}");
        }
        assert!((erfcx_bracket(1e4) * 2e8 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn ln_erfc_matches_direct_form() {
        for x in [-3.0, 0.0, 2.0, 4.9, 5.0, 5.1, 10.0] {
            let direct = erfc(x).ln();
            assert!((ln_erfc(x) - direct).abs() < 1e-11 * direct.abs().max(1.0), "x = {x}");
        }
        assert!((ln_erfc(40.0) - (-1600.0 - (40.0 * std::f64::consts::PI.sqrt()).ln())).abs() < 1e-3);
    }
}
