use ionsense::calibration::{pup_model, pup_model_exact};
use ionsense::entanglement::{
    phase_space_integral, reduced_boson_purity_numeric, renyi_entropy, squeezing_parameters, wigner_hybrid_plus,
    GaussianPhaseSpace,
};
use ionsense::kernels::{kernels_classical_efield, kernels_displacement, kernels_generic, kernels_quantum_efield};
use ionsense::moments::moments_at_detuning;
use ionsense::quadrature::gauss_hermite_rule;
use ionsense::sensitivity::{averaged_sensitivity, bounds, perturbative_displacement};
use ionsense::units::{
    beta_from_displacement, displacement_from_beta, displacement_from_force, drive_force, hz_to_rad, rad_to_hz,
    PhysicalConstants,
};
use ionsense::{Kernels, NoiseModel, Protocol, ProtocolSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use std::f64::consts::PI;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x1ce5), failure_persistence: None, ..ProptestConfig::default() }
}

/// Relative closeness with a floor at `scale` for values crossing zero.
fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(scale)
}

fn kernels_close(a: &Kernels, b: &Kernels, h_scale: f64, p_scale: f64, q_scale: f64) -> bool {
    close(a.h.re, b.h.re, 1e-9, h_scale)
        && close(a.h.im, b.h.im, 1e-9, h_scale)
        && close(a.p, b.p, 1e-9, p_scale)
        && close(a.q, b.q, 1e-9, q_scale)
}

fn schedule_of(p: Protocol) -> ionsense::PulseSchedule {
    ProtocolSpec::new(p, 10).unwrap().schedule()
}

proptest! {
    #![proptest_config(cfg(100))]

    #[test]
    fn unit_conversions_invert(hz in 1e-3f64..1e7, beta in -5.0f64..5.0, n in 1u32..10_000) {
        let c = PhysicalConstants::default();
        prop_assert!(close(rad_to_hz(hz_to_rad(hz)), hz, 1e-12, 0.0));
        let z = displacement_from_beta(beta, n, &c);
        prop_assert!(close(beta_from_displacement(z, n, &c), beta, 1e-12, 1e-300));
    }

    #[test]
    fn force_chain_matches_direct_beta(z in -1e-6f64..1e-6, t in 1e-5f64..1e-2, n in 1u32..1000) {
        let c = PhysicalConstants::default();
        let zc = displacement_from_force(drive_force(z, &c), t, &c);
        let direct = -c.trap_freq * z * t / 2.0;
        prop_assert!(close(beta_from_displacement(zc, n, &c), beta_from_displacement(direct, n, &c), 1e-12, 1e-300));
    }

    #[test]
    fn sql_values_are_exact(t in 1e-6f64..1.0, nbar in 0.0f64..20.0) {
        let b = bounds(t, nbar, 1.0, 1.0).unwrap();
        prop_assert_eq!(b.sql_beta, 0.25);
        prop_assert_eq!(b.sql_eta, 1.0 / (4.0 * t * t));
    }

    #[test]
    fn displacement_kernels_match_generic(g in 0.1f64..10.0, tau in 0.05f64..3.0, d in -3.0f64..3.0, beta in -2.0f64..2.0) {
        let a = kernels_displacement(g, tau, d, beta).unwrap();
        let b = kernels_generic(&schedule_of(Protocol::Displacement { g, tau, beta }), d).unwrap();
        let gt = g * tau;
        prop_assert!(kernels_close(&a, &b, gt, gt * gt, gt * beta.abs()), "{a:?} {b:?}");
    }

    #[test]
    fn classical_kernels_match_generic(g in 0.1f64..10.0, tau in 0.05f64..2.0, k in 1.0f64..4.0, d in -3.0f64..3.0, eta in -2.0f64..2.0) {
        let t = k * tau;
        let a = kernels_classical_efield(g, tau, t, d, eta).unwrap();
        let b = kernels_generic(&schedule_of(Protocol::ClassicalEField { g, tau, t_total: t, eta }), d).unwrap();
        let gt = g * t;
        prop_assert!(kernels_close(&a, &b, gt, gt * gt, gt * t * eta.abs()), "{a:?} {b:?}");
    }

    #[test]
    fn quantum_kernels_match_generic(g in 0.1f64..10.0, tau in 0.05f64..2.0, k in 2.0f64..5.0, d in -3.0f64..3.0, eta in -2.0f64..2.0) {
        let t = k * tau;
        let a = kernels_quantum_efield(g, tau, t, d, eta).unwrap();
        let b = kernels_generic(&schedule_of(Protocol::QuantumEField { g, tau, t_total: t, eta }), d).unwrap();
        let gt = g * t;
        prop_assert!(kernels_close(&a, &b, gt, gt * gt, gt * t * eta.abs()), "{a:?} {b:?}");
    }

    #[test]
    fn kernel_scaling(g in 0.1f64..5.0, tau in 0.05f64..2.0, d in -2.0f64..2.0, lam in 0.2f64..5.0) {
        let a = kernels_displacement(g, tau, d, 0.7).unwrap();
        let b = kernels_displacement(lam * g, tau, d, 0.7).unwrap();
        let c = kernels_displacement(g, tau, d, 0.7 * lam).unwrap();
        let gt = g * tau;
        prop_assert!(close(b.h.norm(), lam * a.h.norm(), 1e-12, lam * gt * 1e-3));
        prop_assert!(close(b.p, lam * lam * a.p, 1e-12, lam * lam * gt * gt * 1e-3));
        prop_assert!(close(b.q, lam * a.q, 1e-12, lam * gt * 1e-3));
        prop_assert!(close(c.q, lam * a.q, 1e-12, lam * gt * 1e-3));
        let t = 3.0 * tau;
        let e = kernels_quantum_efield(g, tau, t, d, 0.4).unwrap();
        let f = kernels_quantum_efield(g, tau, t, d, 0.4 * lam).unwrap();
        let h = kernels_quantum_efield(lam * g, tau, t, d, 0.4).unwrap();
        prop_assert!(close(f.q, lam * e.q, 1e-12, lam * g * t * t * 1e-3));
        prop_assert!(close(h.q, lam * e.q, 1e-12, lam * g * t * t * 1e-3));
        prop_assert!(close(h.p, lam * lam * e.p, 1e-12, lam * lam * g * g * t * t * 1e-3));
    }

    #[test]
    fn kernel_parity(g in 0.1f64..5.0, tau in 0.05f64..2.0, d in 0.0f64..2.0) {
        let a = kernels_displacement(g, tau, d, 0.9).unwrap();
        let b = kernels_displacement(g, tau, -d, 0.9).unwrap();
        let gt = g * tau;
        prop_assert!(close(a.h_abs_sq(), b.h_abs_sq(), 1e-12, gt * gt * 1e-6));
        prop_assert!(close(a.p, -b.p, 1e-12, gt * gt * 1e-6));
        prop_assert!(close(a.q, b.q, 1e-12, gt * 1e-6));
        for (x, y) in [
            (kernels_classical_efield(g, tau, 2.5 * tau, d, 1.0).unwrap(), kernels_classical_efield(g, tau, 2.5 * tau, -d, 1.0).unwrap()),
            (kernels_quantum_efield(g, tau, 2.5 * tau, d, 1.0).unwrap(), kernels_quantum_efield(g, tau, 2.5 * tau, -d, 1.0).unwrap()),
        ] {
            let gt = g * 2.5 * tau;
            prop_assert!(close(x.h_abs_sq(), y.h_abs_sq(), 1e-12, gt * gt * 1e-6));
            prop_assert!(close(x.p, -y.p, 1e-12, gt * gt * 1e-6));
        }
    }

    #[test]
    fn series_branch_is_continuous(g in 0.1f64..5.0, tau in 0.05f64..2.0) {
        let edge = 1e-4 / tau;
        let below = kernels_displacement(g, tau, edge * (1.0 - 1e-12), 1.0).unwrap();
        let above = kernels_displacement(g, tau, edge * (1.0 + 1e-12), 1.0).unwrap();
        let gt = g * tau;
        prop_assert!(kernels_close(&below, &above, gt * 1e-4, gt * gt * 1e-4, gt));
        let t = 3.0 * tau;
        let edge = 1e-4 / t;
        let below = kernels_quantum_efield(g, tau, t, edge * (1.0 - 1e-12), 1.0).unwrap();
        let above = kernels_quantum_efield(g, tau, t, edge * (1.0 + 1e-12), 1.0).unwrap();
        let gt = g * t;
        prop_assert!(kernels_close(&below, &above, gt * 1e-4, gt * gt * 1e-4, gt * t));
    }

    #[test]
    fn thermal_occupation_enters_through_h(hr in -2.0f64..2.0, hi in -2.0f64..2.0, p in -3.0f64..3.0, nbar in 0.0f64..10.0, nbar2 in 0.0f64..10.0, n in 2u32..200) {
        let k = Kernels { h: Complex64::new(hr, hi), p, q: 0.8, odf_on_time: 1.0 };
        let s = ((nbar + 0.5) / (nbar2 + 0.5)).sqrt();
        let k2 = Kernels { h: k.h * s, ..k };
        let a = moments_at_detuning(&k, n, &NoiseModel::new(0.0, nbar, 0.3, 1.0).unwrap());
        let b = moments_at_detuning(&k2, n, &NoiseModel::new(0.0, nbar2, 0.3, 1.0).unwrap());
        prop_assume!(a.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        prop_assert!(close(a.jy_sq, b.jy_sq, 1e-12, 0.0));
        prop_assert!(close(a.slope, b.slope, 1e-12, 1e-300));
        prop_assert!(close(a.jx_mean, b.jx_mean, 1e-12, 1e-300));
    }

    #[test]
    fn jy_sq_is_monotone(h in 0.0f64..2.0, dh in 0.0f64..1.0, p in -3.0f64..3.0, nbar in 0.0f64..10.0, dn in 0.0f64..5.0, n in 3u32..200) {
        let noise = |nb: f64| NoiseModel::new(0.0, nb, 0.2, 1.0).unwrap();
        let k = |h: f64| Kernels { h: Complex64::new(h, 0.0), p, q: 1.0, odf_on_time: 1.0 };
        let base = moments_at_detuning(&k(h), n, &noise(nbar));
        prop_assume!(base.is_ok());
        let base = base.unwrap().jy_sq;
        prop_assert!(moments_at_detuning(&k(h + dh), n, &noise(nbar)).unwrap().jy_sq >= base);
        prop_assert!(moments_at_detuning(&k(h), n, &noise(nbar + dn)).unwrap().jy_sq >= base);
    }
}

proptest! {
    #![proptest_config(cfg(40))]

    #[test]
    fn classical_never_beats_thermal_bound(
        g in 0.1f64..5.0, t in 0.1f64..3.0, frac in 0.05f64..1.0, nbar in 0.0f64..8.0,
        sigma in 0.0f64..0.3, gamma in 0.0f64..0.3, n in 2u32..300,
    ) {
        let tau = frac * t;
        let noise = NoiseModel::new(sigma, nbar, gamma, 1.0).unwrap();
        let spec = ProtocolSpec::new(Protocol::ClassicalEField { g, tau, t_total: t, eta: 0.0 }, n).unwrap();
        let r = averaged_sensitivity(&spec, &noise, &gauss_hermite_rule(sigma, 32).unwrap());
        prop_assume!(r.is_ok());
        prop_assert!(r.unwrap().delta_sq > (2.0 * nbar + 1.0) / (4.0 * t * t));
    }

    #[test]
    fn sigma_sign_and_excess_noise(g in 0.5f64..5.0, tau in 0.05f64..1.0, sigma in 0.01f64..0.5, f in 1.0f64..2.0, df in 1e-3f64..1.0) {
        let spec = ProtocolSpec::new(Protocol::Displacement { g, tau, beta: 0.0 }, 150).unwrap();
        let noise = NoiseModel::new(sigma, 2.0, 0.1, f).unwrap();
        let a = averaged_sensitivity(&spec, &noise, &gauss_hermite_rule(sigma, 64).unwrap());
        prop_assume!(a.is_ok());
        let a = a.unwrap().delta_sq;
        let b = averaged_sensitivity(&spec, &noise, &gauss_hermite_rule(-sigma, 64).unwrap()).unwrap().delta_sq;
        prop_assert_eq!(a, b);
        let flipped = NoiseModel { sigma: -sigma, ..noise };
        prop_assert_eq!(perturbative_displacement(g, tau, &noise).total(), perturbative_displacement(g, tau, &flipped).total());
        let louder = NoiseModel { excess_noise_factor: f + df, ..noise };
        let c = averaged_sensitivity(&spec, &louder, &gauss_hermite_rule(sigma, 64).unwrap()).unwrap().delta_sq;
        prop_assert!(c > a);
    }

    #[test]
    fn quantum_ideal_at_half_length(g in 0.1f64..10.0, t in 0.05f64..3.0, n in 2u32..1000, nbar in 0.0f64..5.0) {
        let spec = ProtocolSpec::new(Protocol::QuantumEField { g, tau: t / 2.0, t_total: t, eta: 0.0 }, n).unwrap();
        let noise = NoiseModel::new(0.0, nbar, 0.0, 1.0).unwrap();
        let r = averaged_sensitivity(&spec, &noise, &gauss_hermite_rule(0.0, 2).unwrap()).unwrap();
        let h = t / 2.0;
        prop_assert!(close(r.delta_sq, 1.0 / (4.0 * g * g * h * h * h * h), 1e-12, 0.0));
    }

    #[test]
    fn squeezing_is_bounded_and_decreasing(a in 0.0f64..20.0, da in 1e-3f64..2.0) {
        let s = squeezing_parameters(a).unwrap();
        let t = squeezing_parameters(a + da).unwrap();
        prop_assert!(s.xi_sq <= 1.0 && s.xi_sq_eigen <= 1.0 + 1e-15);
        prop_assert!(t.xi_sq < s.xi_sq);
        prop_assert!(t.xi_sq_eigen < s.xi_sq_eigen);
    }

    #[test]
    fn pup_closed_form_tracks_exact(tau in 0.0f64..3e-3, sigma_hz in 0.0f64..60.0) {
        let (g, s) = (2.0 * PI * 3.91e3, 2.0 * PI * sigma_hz);
        let a = pup_model(tau, g, s, 5.0, 150, 250.0);
        let b = pup_model_exact(tau, g, s, 5.0, 150, 250.0).unwrap();
        prop_assert!((a - b).abs() <= 0.02 * b.abs().max(1e-300));
    }
}

#[test]
fn entropy_matches_reduced_purity() {
    let (g, tau) = (2.0, 1.5);
    for i in 0..20 {
        let t = tau * (i as f64 + 0.5) / 20.0;
        let s2 = renyi_entropy(g, tau, t).unwrap();
        let purity = reduced_boson_purity_numeric(g * t);
        assert!(((-s2).exp() - purity).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn hybrid_covariance_from_moments() {
    for a in [0.3, 1.0, 2.5] {
        let cov = GaussianPhaseSpace::hybrid_plus(a).covariance;
        let l = 14.0 * (1.0 + a * a);
        let m = |f: &dyn Fn(f64, f64) -> f64| phase_space_integral(|x, p| f(x, p) * wigner_hybrid_plus(x, p, a), l, 1201);
        assert!((m(&|_, _| 1.0) - 1.0).abs() < 1e-10);
        assert!((m(&|x, _| x * x) - cov[(0, 0)]).abs() < 1e-8);
        assert!((m(&|x, p| x * p) - cov[(0, 1)]).abs() < 1e-8);
        assert!((m(&|_, p| p * p) - cov[(1, 1)]).abs() < 1e-8);
    }
}
