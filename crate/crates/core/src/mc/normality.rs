//! Henze–Zirkler test of bivariate normality.

use statrs::distribution::{ContinuousCDF, LogNormal};

use super::StatsError;

const MIN_ROWS: usize = 20;
const DIM: f64 = 2.0;

/// Returns `(statistic, p_value)` for the rows of `samples`. The p-value
/// uses the lognormal approximation to the null law with the default
/// smoothing `b = ((2p+1) n / 4)^{1/(p+4)} / √2`.
pub fn henze_zirkler(samples: &[[f64; 2]]) -> Result<(f64, f64), StatsError> {
    let n = samples.len();
    if n < MIN_ROWS {
        return Err(StatsError::TooFewPoints { need: MIN_ROWS, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().fold([0.0; 2], |m, r| [m[0] + r[0], m[1] + r[1]]);
    let mean = [mean[0] / nf, mean[1] / nf];
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for r in samples {
        let (dx, dy) = (r[0] - mean[0], r[1] - mean[1]);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let (sxx, sxy, syy) = (sxx / nf, sxy / nf, syy / nf);
    let det = sxx * syy - sxy * sxy;
    if !det.is_finite() || det <= 1e-12 * sxx * syy {
        return Err(StatsError::SingularCovariance);
    }
    // S⁻¹
    let (ixx, ixy, iyy) = (syy / det, -sxy / det, sxx / det);
    let mahal = |dx: f64, dy: f64| ixx * dx * dx + 2.0 * ixy * dx * dy + iyy * dy * dy;

    let b = (((2.0 * DIM + 1.0) * nf / 4.0).powf(1.0 / (DIM + 4.0))) / std::f64::consts::SQRT_2;
    let b2 = b * b;

    let mut pair_sum = nf; // j == k terms
    for (j, rj) in samples.iter().enumerate() {
        let mut row = 0.0;
        for rk in &samples[j + 1..] {
            row += (-0.5 * b2 * mahal(rj[0] - rk[0], rj[1] - rk[1])).exp();
        }
        pair_sum += 2.0 * row;
    }
    let single_sum: f64 =
        samples.iter().map(|r| (-0.5 * b2 / (1.0 + b2) * mahal(r[0] - mean[0], r[1] - mean[1])).exp()).sum();
    let hz = pair_sum / nf - 2.0 * (1.0 + b2).powf(-DIM / 2.0) * single_sum + nf * (1.0 + 2.0 * b2).powf(-DIM / 2.0);

    let p = DIM;
    let a = 1.0 + 2.0 * b2;
    let b4 = b2 * b2;
    let b8 = b4 * b4;
    let wb = (1.0 + b2) * (1.0 + 3.0 * b2);
    let mu = 1.0 - a.powf(-p / 2.0) * (1.0 + p * b2 / a + p * (p + 2.0) * b4 / (2.0 * a * a));
    let si2 = 2.0 * (1.0 + 4.0 * b2).powf(-p / 2.0)
        + 2.0 * a.powf(-p) * (1.0 + 2.0 * p * b4 / (a * a) + 3.0 * p * (p + 2.0) * b8 / (4.0 * a.powi(4)))
        - 4.0 * wb.powf(-p / 2.0) * (1.0 + 3.0 * p * b4 / (2.0 * wb) + p * (p + 2.0) * b8 / (2.0 * wb * wb));
    let pmu = (mu.powi(4) / (si2 + mu * mu)).sqrt().ln();
    let psi = ((si2 + mu * mu) / (mu * mu)).ln().sqrt();
    let null = LogNormal::new(pmu, psi).expect("lognormal null parameters are finite and positive");
    Ok((hz, null.sf(hz)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NoiseStream;

    fn normal_rows(seed: u64, n: usize) -> Vec<[f64; 2]> {
        let mut s = NoiseStream::new(seed).draw(0);
        (0..n)
            .map(|_| {
                let (a, b) = s.normal_pair();
                // Correlated, shifted and scaled: the test is affine invariant.
                [3.0 + 2.0 * a, -1.0 + 0.5 * a + 0.3 * b]
            })
            .collect()
    }

    #[test]
    fn accepts_bivariate_normal() {
        let passes = (0..10).filter(|&r| henze_zirkler(&normal_rows(100 + r, 2000)).unwrap().1 > 0.05).count();
        assert!(passes >= 9, "{passes}/10");
    }

    #[test]
    fn rejects_uniform_square() {
        let mut s = NoiseStream::new(5).draw(0);
        let rows: Vec<[f64; 2]> = (0..2000)
            .map(|_| {
                let (a, b) = s.normal_pair();
                // Φ(z) is uniform on (0, 1).
                let u = |z: f64| 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
                [u(a), u(b)]
            })
            .collect();
        let (stat, p) = henze_zirkler(&rows).unwrap();
        assert!(p < 0.01, "HZ = {stat}, p = {p}");
    }

    #[test]
    fn affine_invariance() {
        let rows = normal_rows(8, 300);
        let moved: Vec<[f64; 2]> = rows.iter().map(|r| [10.0 - 3.0 * r[0] + r[1], 0.2 * r[1]]).collect();
        let (a, _) = henze_zirkler(&rows).unwrap();
        let (b, _) = henze_zirkler(&moved).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(henze_zirkler(&[[1.0, 2.0]; 50]), Err(StatsError::SingularCovariance));
        let line: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, 2.0 * i as f64]).collect();
        assert_eq!(henze_zirkler(&line), Err(StatsError::SingularCovariance));
        assert_eq!(henze_zirkler(&normal_rows(1, 19)), Err(StatsError::TooFewPoints { need: 20, got: 19 }));
    }
}
