//! End-to-end checks through the public API: generate, estimate, and compare
//! with the analytic description.

use proptest::prelude::*;
use syncphase::mc::{run_mc, McConfig};
use syncphase::pdf::{rmse_polar, rmse_uniform_limit, total_mass};
use syncphase::signal::{deg_to_rad, generate};
use syncphase::spectral::{dft_variance, estimate_phase, principal_arg, theoretical_moments};
use syncphase::{Frequency, PolarPdf, SignalParams};

fn params(n: usize, k: usize, phi: f64, snr_db: f64, sigma_p_deg: f64) -> SignalParams {
    let f0 = Frequency::from_integer(5);
    SignalParams::with_snr_db(2.0, f0, f0.scaled(n as i64, k as i64), phi, snr_db, deg_to_rad(sigma_p_deg), n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_estimate_recovers_phase(n in 8usize..400, kf in 0.01f64..0.49, phi in -3.1f64..3.1) {
        let k = ((kf * n as f64) as usize).clamp(1, (n - 1) / 2);
        let p = params(n, k, phi, f64::INFINITY, 0.0);
        let stat = estimate_phase(&generate(&p, 1)).unwrap();
        prop_assert!((stat.phase_estimate - phi).abs() < 1e-10);
        prop_assert!((stat.d_reduced.norm() - 1.0).abs() < 1e-10);
        prop_assert_eq!(stat.dft_bin, k);
    }

    #[test]
    fn reduced_variance_matches_unreduced(n in 2usize..5000, snr_db in -40f64..60.0, sp in 0f64..20.0) {
        let p = params(n.max(3) * 2, 1, 0.3, snr_db, sp);
        let m = theoretical_moments(&p);
        let scale = 2.0 / (p.amplitude() * p.n_samples() as f64);
        let rel = (dft_variance(&p) * scale * scale / m.variance - 1.0).abs();
        prop_assert!(rel < 1e-12, "rel {rel}");
    }

    #[test]
    fn density_is_normalized_and_rmse_bounded(n in 10usize..10_000, snr_db in -60f64..60.0, sp in 0f64..30.0) {
        let m = theoretical_moments(&params(n, 1, 1.0, snr_db, sp));
        let pdf = PolarPdf::from_moments(&m).unwrap();
        prop_assert!((total_mass(&pdf).unwrap() - 1.0).abs() < 1e-8);
        let r = rmse_polar(&pdf).unwrap();
        prop_assert!(r > 0.0 && r <= rmse_uniform_limit() * (1.0 + 1e-9));
    }
}

#[test]
fn monte_carlo_agrees_with_density() {
    let p = params(64, 3, 1.2, 3.0, 2.0);
    let m = theoretical_moments(&p);
    let analytic = rmse_polar(&PolarPdf::from_moments(&m).unwrap()).unwrap();
    let r = run_mc(&McConfig::new(p, 40_000, 11).with_workers(2)).unwrap();
    let z = (r.rmse_empirical - analytic) / r.mc_standard_error;
    assert!(z.abs() < 4.0, "z = {z}");
    assert!((principal_arg(r.mean_d) - 1.2).abs() < 0.01);
}
