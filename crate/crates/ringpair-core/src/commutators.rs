//! Quantum-noise commutator constants fixed by output-field unitarity.
//!
//! Requiring the output fields to keep canonical free-field commutators
//! turns into four real linear equations for C_aa, C_bb and Re/Im D_ab,
//! where
//!
//!   [f_a, f_a†] = C_aa δ,  [f_b, f_b†] = C_bb δ,
//!   [f_a, f_b†] = C_ab δ,  [f_a, f_b]  = D_ab δ.
//!
//! det(H) ≠ 0 forces C_ab = 0 outright. The system has the exact solution
//!
//!   C_kk = 1 − α_k² − |r_k|²,   D_ab = i(r_b* − r_a) = i g α_p (T_b − T_a),
//!
//! which this module provides both ways: assembled-and-solved numerically,
//! and in closed form for cross-validation.
//!
//! Sign note: expanding [b_out, b_out†] with the field vector (a, b†)ᵀ
//! puts the cross terms in with a minus sign, −2Re(H_ba H_bb* D_ab); the
//! closed-form solution satisfies the system exactly only with that sign.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{solve4, Solve4};
use crate::params::SystemConfig;
use crate::transfer::{Location, TransferPair};

/// Condition-number ceiling beyond which the numeric solve is reported
/// rather than trusted.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Noise-operator commutator constants.
#[derive(Debug, Clone, Copy)]
pub struct CommutatorSet {
    pub c_aa: f64,
    pub c_bb: f64,
    pub c_ab: Complex64,
    pub d_ab: Complex64,
}

impl CommutatorSet {
    /// Negative diagonal commutators flag the formal weak-pump breakdown
    /// |r|² > 1 − α²; surfaced as a diagnostic, never masked.
    pub fn is_physical(&self) -> bool {
        self.c_aa >= 0.0 && self.c_bb >= 0.0
    }
}

/// The assembled 4×4 real system A·(C_aa, C_bb, Re D_ab, Im D_ab)ᵀ = rhs.
#[derive(Debug, Clone)]
pub struct CommutatorSystem {
    pub matrix: [[f64; 4]; 4],
    pub rhs: [f64; 4],
}

/// Assemble the unitarity system from an output-bus transfer pair.
pub fn assemble_commutator_system(pair: &TransferPair) -> Result<CommutatorSystem> {
    if pair.location != Location::OutputBus {
        return Err(Error::validation(
            "commutator system is defined by output-bus unitarity; got an intracavity pair",
        ));
    }
    let g = &pair.g;
    let h = &pair.h;

    // [a_out, a_out†] = δ.
    let w1 = h.aa * h.ab.conj();
    // [b_out, b_out†] = δ (cross terms enter with the opposite sign).
    let w2 = h.ba * h.bb.conj();
    // [a_out, b_out] = 0, split into real and imaginary parts.
    let u = h.aa * h.ba.conj();
    let v = h.ab * h.bb.conj();
    let p = h.aa * h.bb.conj();
    let q = h.ab * h.ba.conj();
    let r = g.ab * g.bb.conj() - g.aa * g.ba.conj();

    Ok(CommutatorSystem {
        matrix: [
            [h.aa.norm_sqr(), -h.ab.norm_sqr(), 2.0 * w1.re, -2.0 * w1.im],
            [-h.ba.norm_sqr(), h.bb.norm_sqr(), -2.0 * w2.re, 2.0 * w2.im],
            [u.re, -v.re, p.re + q.re, -p.im + q.im],
            [u.im, -v.im, p.im + q.im, p.re - q.re],
        ],
        rhs: [
            1.0 - (g.aa.norm_sqr() - g.ab.norm_sqr()),
            1.0 - (g.bb.norm_sqr() - g.ba.norm_sqr()),
            r.re,
            r.im,
        ],
    })
}

/// Solve the unitarity system numerically.
///
/// Generic configurations give a well-conditioned 4×4 solve. If a pivot
/// underflows (τ → 0 degeneracies) the solve falls back to the diagonal
/// 2×2 subsystem with D_ab = 0, the unique continuous limit. A singular
/// non-degenerate system is reported with its condition estimate.
pub fn solve_commutators_numeric(pair: &TransferPair) -> Result<CommutatorSet> {
    let system = assemble_commutator_system(pair)?;
    let c_ab = Complex64::new(0.0, 0.0);
    match solve4(&system.matrix, &system.rhs) {
        Ok(Solve4 { x, condition }) => {
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::numerical(format!(
                    "commutator solve produced non-finite values (condition {condition:.3e})"
                )));
            }
            Ok(CommutatorSet {
                c_aa: x[0],
                c_bb: x[1],
                c_ab,
                d_ab: Complex64::new(x[2], x[3]),
            })
        }
        Err(_) => {
            let h = &pair.h;
            let (haa2, hbb2) = (h.aa.norm_sqr(), h.bb.norm_sqr());
            if haa2 == 0.0 || hbb2 == 0.0 {
                return Err(Error::numerical(
                    "commutator system singular and diagonal subsystem degenerate (tau = 0)",
                ));
            }
            Ok(CommutatorSet {
                c_aa: system.rhs[0] / haa2,
                c_bb: system.rhs[1] / hbb2,
                c_ab,
                d_ab: Complex64::new(0.0, 0.0),
            })
        }
    }
}

/// Condition estimate of the assembled system (for diagnostics).
pub fn system_condition(pair: &TransferPair) -> Result<f64> {
    let system = assemble_commutator_system(pair)?;
    Ok(solve4(&system.matrix, &system.rhs)?.condition)
}

/// The exact closed-form solution; ω-independent identically.
pub fn commutators_closed_form(config: &SystemConfig) -> CommutatorSet {
    let p = config.pump_parameters();
    CommutatorSet {
        c_aa: 1.0 - config.signal.alpha.powi(2) - p.r_a.norm_sqr(),
        c_bb: 1.0 - config.idler.alpha.powi(2) - p.r_b.norm_sqr(),
        c_ab: Complex64::new(0.0, 0.0),
        d_ab: Complex64::new(0.0, 1.0) * (p.r_b.conj() - p.r_a),
    }
}

/// High-cavity-Q limit of the diagonal constants:
/// C_kk → γ′_k T_k − |g α_p T_k|².
pub fn highq_commutator_limit(config: &SystemConfig) -> (f64, f64) {
    let p = config.pump_parameters();
    (
        config.signal.internal_rate * config.signal.round_trip_time - p.r_a.norm_sqr(),
        config.idler.internal_rate * config.idler.round_trip_time - p.r_b.norm_sqr(),
    )
}

/// Max absolute residual of a commutator set in the four unitarity
/// equations of the given output-bus pair.
pub fn commutator_residual(set: &CommutatorSet, pair: &TransferPair) -> Result<f64> {
    let system = assemble_commutator_system(pair)?;
    let x = [set.c_aa, set.c_bb, set.d_ab.re, set.d_ab.im];
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let lhs: f64 = (0..4).map(|j| system.matrix[i][j] * x[j]).sum();
        worst = worst.max((lhs - system.rhs[i]).abs());
    }
    // det(H)·C_ab = 0 closes the set.
    worst = worst.max((pair.h.det() * set.c_ab).norm());
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ModeLabel, ModeParams, Process, PumpConfig};
    use crate::transfer::output_transfer;

    fn config(rho: f64, alpha: f64, g: f64) -> SystemConfig {
        let pump = PumpConfig::new(Process::Spdc, g, 1.0, 0.0).unwrap();
        SystemConfig::symmetric(rho, alpha, 1.0, pump).unwrap()
    }

    fn asymmetric_config() -> SystemConfig {
        let pump = PumpConfig::new(Process::Spdc, 2e-5, 1.3, 0.8).unwrap();
        let a = ModeParams::from_couplings(ModeLabel::Signal, 0.92, 0.97, 0.9).unwrap();
        let b = ModeParams::from_couplings(ModeLabel::Idler, 0.88, 0.95, 1.4).unwrap();
        let c = ModeParams::from_couplings(ModeLabel::Pump, 0.9, 0.97, 1.0).unwrap();
        SystemConfig::new(a, b, c, pump).unwrap()
    }

    #[test]
    fn lossless_needs_no_noise() {
        let cfg = config(0.9, 1.0, 0.0);
        let pair = output_transfer(&cfg, 0.4).unwrap();
        let set = solve_commutators_numeric(&pair).unwrap();
        assert!(set.c_aa.abs() < 1e-13);
        assert!(set.c_bb.abs() < 1e-13);
        assert!(set.d_ab.norm() < 1e-13);
        let closed = commutators_closed_form(&cfg);
        assert_eq!(closed.c_aa, 0.0);
        assert_eq!(closed.d_ab.norm(), 0.0);
    }

    #[test]
    fn decoupled_modes_solve_diagonally() {
        let cfg = config(0.9, 0.95, 0.0);
        let pair = output_transfer(&cfg, 0.7).unwrap();
        let set = solve_commutators_numeric(&pair).unwrap();
        let expected = 1.0 - 0.95f64.powi(2);
        assert!((set.c_aa - expected).abs() < 1e-13);
        assert!((set.c_bb - expected).abs() < 1e-13);
        assert!(set.d_ab.norm() < 1e-14);
    }

    #[test]
    fn numeric_matches_closed_form() {
        let cfg = config(0.93, 0.95, 1e-5);
        let pair = output_transfer(&cfg, 0.3).unwrap();
        let set = solve_commutators_numeric(&pair).unwrap();
        let closed = commutators_closed_form(&cfg);
        assert!((set.c_aa - closed.c_aa).abs() < 1e-12);
        assert!((set.c_bb - closed.c_bb).abs() < 1e-12);
        assert!((set.d_ab - closed.d_ab).norm() < 1e-12);
        // C_kk ≈ 1 - 0.9025 - 1e-10.
        assert!((closed.c_aa - (1.0 - 0.9025 - 1e-10)).abs() < 1e-12);
    }

    #[test]
    fn equal_round_trip_times_give_zero_cross_commutator() {
        let cfg = config(0.9, 0.97, 1e-4);
        assert_eq!(commutators_closed_form(&cfg).d_ab.norm(), 0.0);
        // Unequal times: D_ab = i g alpha_p (T_b - T_a).
        let cfg = asymmetric_config();
        let closed = commutators_closed_form(&cfg);
        let expected = Complex64::new(0.0, 1.0)
            * cfg.pump.gain
            * cfg.pump.effective_amplitude()
            * (cfg.idler.round_trip_time - cfg.signal.round_trip_time);
        assert!((closed.d_ab - expected).norm() < 1e-18);
        assert!(closed.d_ab.norm() > 0.0);
    }

    #[test]
    fn closed_form_satisfies_unitarity_equations() {
        let cfg = asymmetric_config();
        for omega in [0.0, 0.4, 1.9, 5.5] {
            let pair = output_transfer(&cfg, omega).unwrap();
            let closed = commutators_closed_form(&cfg);
            assert!(commutator_residual(&closed, &pair).unwrap() < 1e-12);
        }
    }

    #[test]
    fn numeric_solve_residual_is_tiny() {
        let cfg = asymmetric_config();
        let pair = output_transfer(&cfg, 1.1).unwrap();
        let set = solve_commutators_numeric(&pair).unwrap();
        assert!(commutator_residual(&set, &pair).unwrap() < 1e-12);
        assert!(system_condition(&pair).unwrap() < CONDITION_LIMIT);
    }

    #[test]
    fn intracavity_pair_rejected() {
        let cfg = config(0.9, 0.95, 1e-5);
        let pair = crate::transfer::intracavity_transfer(&cfg, 0.3).unwrap();
        assert!(assemble_commutator_system(&pair).is_err());
    }

    #[test]
    fn highq_limit_values() {
        // gamma' T = 0.01, r = 0: limit is exactly 0.01.
        let pump = PumpConfig::new(Process::Spdc, 0.0, 0.0, 0.0).unwrap();
        let a = ModeParams::from_rates(ModeLabel::Signal, 1.0, 0.01, 1.0).unwrap();
        let b = ModeParams::from_rates(ModeLabel::Idler, 1.0, 0.01, 1.0).unwrap();
        let c = ModeParams::from_rates(ModeLabel::Pump, 1.0, 0.0, 1.0).unwrap();
        let cfg = SystemConfig::new(a, b, c, pump).unwrap();
        let (caa, cbb) = highq_commutator_limit(&cfg);
        assert_eq!(caa, 0.01);
        assert_eq!(cbb, 0.01);
        // r dominates when gamma' = 0: limit goes negative, flagging the
        // formal breakdown region.
        let pump = PumpConfig::new(Process::Spdc, 1e-3, 1.0, 0.0).unwrap();
        let cfg = SystemConfig::symmetric(0.9, 1.0, 1.0, pump).unwrap();
        let (caa, _) = highq_commutator_limit(&cfg);
        assert!((caa + 1e-6).abs() < 1e-18);
        assert!(!commutators_closed_form(&cfg).is_physical());
    }

    #[test]
    fn exact_minus_limit_is_second_order() {
        // Halving gamma' T quarters the gap between exact and high-Q C_kk.
        let mut gaps = Vec::new();
        for gamma_int_t in [1e-2, 5e-3, 2.5e-3] {
            let pump = PumpConfig::new(Process::Spdc, 0.0, 0.0, 0.0).unwrap();
            let a = ModeParams::from_rates(ModeLabel::Signal, 1.0, gamma_int_t, 1.0).unwrap();
            let b = ModeParams::from_rates(ModeLabel::Idler, 1.0, gamma_int_t, 1.0).unwrap();
            let c = ModeParams::from_rates(ModeLabel::Pump, 1.0, 0.0, 1.0).unwrap();
            let cfg = SystemConfig::new(a, b, c, pump).unwrap();
            let exact = commutators_closed_form(&cfg).c_aa;
            let (limit, _) = highq_commutator_limit(&cfg);
            gaps.push((exact - limit).abs());
        }
        let order1 = (gaps[0] / gaps[1]).log2();
        let order2 = (gaps[1] / gaps[2]).log2();
        assert!((order1 - 2.0).abs() < 0.1, "order {order1}");
        assert!((order2 - 2.0).abs() < 0.1, "order {order2}");
    }
}
