//! Property tests over randomized resonator configurations.

use num_complex::Complex64;
use proptest::prelude::*;

use ringpair_core::biphoton::{
    biphoton_state, car, herald, populations, psi2_intracavity_closed_form,
};
use ringpair_core::commutators::{commutator_residual, commutators_closed_form};
use ringpair_core::linalg::relative_error;
use ringpair_core::params::{ModeLabel, ModeParams, Process, PumpConfig, SystemConfig};
use ringpair_core::transfer::{
    building_blocks, circulation_factor, classical_lossy_transfer, gh_identity_residual,
    intracavity_transfer, intracavity_transfer_composed, lossless_transfer, output_transfer,
    output_transfer_composed, single_mode_noise_magnitude,
};

#[derive(Debug, Clone)]
struct Params {
    rho_a: f64,
    rho_b: f64,
    alpha_a: f64,
    alpha_b: f64,
    t_a: f64,
    t_b: f64,
    gain: f64,
    amplitude: f64,
    phase: f64,
    theta: f64,
}

impl Params {
    fn config(&self) -> SystemConfig {
        let pump = PumpConfig::new(Process::Spdc, self.gain, self.amplitude, self.phase).unwrap();
        SystemConfig::new(
            ModeParams::from_couplings(ModeLabel::Signal, self.rho_a, self.alpha_a, self.t_a)
                .unwrap(),
            ModeParams::from_couplings(ModeLabel::Idler, self.rho_b, self.alpha_b, self.t_b)
                .unwrap(),
            ModeParams::from_couplings(ModeLabel::Pump, self.rho_a, self.alpha_a, self.t_a)
                .unwrap(),
            pump,
        )
        .unwrap()
    }

    fn omega(&self) -> f64 {
        self.theta / self.t_a
    }
}

fn params() -> impl Strategy<Value = Params> {
    (
        (0.0..0.995f64, 0.0..0.995f64),
        (0.8..0.9995f64, 0.8..0.9995f64),
        (0.5..2.0f64, 0.5..2.0f64),
        1e-9..2e-4f64,
        (0.1..2.0f64, 0.0..std::f64::consts::TAU),
        0.0..std::f64::consts::TAU,
    )
        .prop_map(
            |((rho_a, rho_b), (alpha_a, alpha_b), (t_a, t_b), gain, (amplitude, phase), theta)| {
                Params {
                    rho_a,
                    rho_b,
                    alpha_a,
                    alpha_b,
                    t_a,
                    t_b,
                    gain,
                    amplitude,
                    phase,
                    theta,
                }
            },
        )
}

proptest! {
    #[test]
    fn mode_normalization_holds(rho in 0.0..1.0f64, alpha in 0.0..1.0f64, t in 0.01..10.0f64) {
        let mode = ModeParams::from_couplings(ModeLabel::Signal, rho, alpha, t).unwrap();
        prop_assert!((mode.rho.powi(2) + mode.tau.powi(2) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn circulation_factor_matches_geometric_sum(
        rho in 0.0..0.95f64,
        alpha in 0.5..0.999f64,
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let s = circulation_factor(rho, alpha, theta).unwrap();
        let q = Complex64::from_polar(rho * alpha, theta);
        let mut partial = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for _ in 0..2000 {
            partial += term;
            term *= q;
        }
        prop_assert!((s - partial).norm() <= 1e-10);
    }

    #[test]
    fn lossless_transfer_is_unimodular(rho in 0.0..0.999f64, theta in 0.0..std::f64::consts::TAU) {
        let g = lossless_transfer(rho, theta).unwrap();
        prop_assert!((g.norm() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn lossy_transfer_subunitary_with_noise_closure(
        rho in 0.0..0.999f64,
        alpha in 0.5..1.0f64,
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let g = classical_lossy_transfer(rho, alpha, theta).unwrap();
        prop_assert!(g.norm() <= 1.0 + 1e-14);
        let h = single_mode_noise_magnitude(g).unwrap();
        // |H|^2 = tau^2 (1-alpha^2) / |1 - rho alpha e^{i theta}|^2.
        let denom = (Complex64::new(1.0, 0.0) - Complex64::from_polar(rho * alpha, theta)).norm_sqr();
        let expected = (1.0 - rho * rho) * (1.0 - alpha * alpha) / denom;
        prop_assert!((h * h - expected).abs() <= 1e-13);
    }

    #[test]
    fn gh_identity_and_dual_construction(p in params()) {
        let config = p.config();
        let omega = p.omega();
        let pair = output_transfer(&config, omega).unwrap();
        let blocks = building_blocks(&config, omega);
        prop_assert!(gh_identity_residual(&pair, &blocks) <= 1e-12);

        let composed = output_transfer_composed(&config, omega).unwrap();
        prop_assert!(pair.g.relative_distance(&composed.g) <= 1e-12);
        prop_assert!(pair.h.relative_distance(&composed.h) <= 1e-12);
    }

    #[test]
    fn intracavity_dual_construction(p in params()) {
        let config = p.config();
        let omega = p.omega();
        let inside = intracavity_transfer(&config, omega).unwrap();
        let composed = intracavity_transfer_composed(&config, omega).unwrap();
        prop_assert!(inside.g.relative_distance(&composed.g) <= 1e-12);
        prop_assert!(inside.h.relative_distance(&composed.h) <= 1e-12);
    }

    #[test]
    fn closed_form_commutators_satisfy_unitarity(p in params()) {
        let config = p.config();
        let pair = output_transfer(&config, p.omega()).unwrap();
        let closed = commutators_closed_form(&config);
        prop_assert!(commutator_residual(&closed, &pair).unwrap() <= 1e-12);
    }

    #[test]
    fn psi2_dual_route(p in params()) {
        let config = p.config();
        let omega = p.omega();
        let inside = intracavity_transfer(&config, omega).unwrap();
        let comms = commutators_closed_form(&config);
        let state = biphoton_state(&inside, &comms, config.pump.effective_phase());
        let closed = psi2_intracavity_closed_form(&config, omega).unwrap();
        prop_assert!(relative_error(state.psi2, closed) <= 1e-10);
    }

    #[test]
    fn herald_bounded_and_populations_normalized(p in params()) {
        let config = p.config();
        let omega = p.omega();
        let comms = commutators_closed_form(&config);
        for pair in [
            output_transfer(&config, omega).unwrap(),
            intracavity_transfer(&config, omega).unwrap(),
        ] {
            let state = biphoton_state(&pair, &comms, config.pump.effective_phase());
            let h = herald(&state, &comms);
            prop_assert!((0.0..=1.0).contains(&h));
            let pops = populations(&config, &state, &comms);
            prop_assert!((pops.p0 + pops.p1a + pops.p1b + pops.p2 - 1.0).abs() <= 1e-12);
            let c = car(&state, &comms);
            if c.is_finite() && pops.p1a + pops.p1b > 0.0 {
                prop_assert!((pops.p2 / (pops.p1a + pops.p1b) - c).abs() / c <= 1e-12);
            }
        }
    }

    #[test]
    fn transfer_quantities_2pi_periodic(p in params()) {
        // Equal round-trip times so one omega shift advances both phases by 2 pi.
        let mut p = p;
        p.t_b = p.t_a;
        let config = p.config();
        let omega = p.omega();
        let shifted = omega + std::f64::consts::TAU / p.t_a;
        let a = output_transfer(&config, omega).unwrap();
        let b = output_transfer(&config, shifted).unwrap();
        prop_assert!(a.g.relative_distance(&b.g) <= 1e-12);
        prop_assert!(a.h.relative_distance(&b.h) <= 1e-12);
    }
}
