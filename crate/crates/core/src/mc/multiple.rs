//! Multiple-testing adjustment and p-value combination.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::StatsError;

fn check(p: &[f64]) -> Result<(), StatsError> {
    match p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(&bad) => Err(StatsError::OutOfRange(bad)),
        None => Ok(()),
    }
}

/// Benjamini–Hochberg step-up adjusted p-values, in input order.
pub fn benjamini_hochberg(p: &[f64]) -> Result<Vec<f64>, StatsError> {
    check(p)?;
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        running = running.min(p[i] * (m as f64 / (rank + 1) as f64));
        out[i] = running;
    }
    Ok(out)
}

/// Fisher's method: `(−2 Σ ln p, P[χ²_{2k} ≥ statistic])`.
pub fn fisher_combine(p: &[f64]) -> Result<(f64, f64), StatsError> {
    check(p)?;
    if p.is_empty() {
        return Err(StatsError::TooFewPoints { need: 1, got: 0 });
    }
    let stat: f64 = -2.0 * p.iter().map(|v| v.ln()).sum::<f64>();
    let stat = stat.max(0.0);
    if stat.is_infinite() {
        return Ok((stat, 0.0));
    }
    let chi = ChiSquared::new(2.0 * p.len() as f64).expect("positive degrees of freedom");
    Ok((stat, chi.sf(stat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bh_hand_example() {
        let adj = benjamini_hochberg(&[0.005, 0.01, 0.03, 0.04]).unwrap();
        for (a, b) in adj.iter().zip([0.02, 0.02, 0.04, 0.04]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(benjamini_hochberg(&[0.9, 0.95]).unwrap(), vec![0.95, 0.95]);
        assert_eq!(benjamini_hochberg(&[1.2]), Err(StatsError::OutOfRange(1.2)));
    }

    #[test]
    fn fisher_examples() {
        assert_eq!(fisher_combine(&[1.0, 1.0, 1.0]).unwrap(), (0.0, 1.0));
        let (s, p) = fisher_combine(&[0.05, 0.05]).unwrap();
        assert!((s - 11.982_929_094).abs() < 1e-6, "{s}");
        // χ²₄ tail: e^{-s/2}(1 + s/2)
        assert!((p - (-s / 2.0).exp() * (1.0 + s / 2.0)).abs() < 1e-12);
        assert!((p - 0.0175).abs() < 1e-4);
        assert_eq!(fisher_combine(&[0.0, 0.5]).unwrap().1, 0.0);
    }

    proptest! {
        #[test]
        fn bh_is_permutation_equivariant(
            p in prop::collection::vec(0.0f64..=1.0, 1..30),
            seed in any::<u64>(),
        ) {
            let m = p.len();
            let mut perm: Vec<usize> = (0..m).collect();
            let mut s = seed;
            for i in (1..m).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let shuffled: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
            let direct = benjamini_hochberg(&p).unwrap();
            let via = benjamini_hochberg(&shuffled).unwrap();
            for (j, &i) in perm.iter().enumerate() {
                prop_assert_eq!(via[j], direct[i]);
            }
        }

        #[test]
        fn bh_is_monotone_and_dominates(p in prop::collection::vec(0.0f64..=1.0, 1..30)) {
            let adj = benjamini_hochberg(&p).unwrap();
            let mut pairs: Vec<(f64, f64)> = p.iter().copied().zip(adj.iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in pairs.windows(2) {
                prop_assert!(w[0].1 <= w[1].1);
            }
            for (raw, a) in p.iter().zip(&adj) {
                prop_assert!(a >= raw && *a <= 1.0);
            }
        }
    }
}
