//! Biphoton observables: the two-photon wavefunction, singles amplitudes,
//! reduced-density-matrix populations, and the pair / coincidence-to-
//! accidental / heralding rates, at the output bus or inside the ring.
//!
//! All amplitudes are built from one transfer pair (G, H) and the matching
//! commutator constants; intracavity quantities use (G^(L), H^(L)) through
//! the identical expressions. The two-photon amplitude
//!
//!   ψ⁽²⁾ = e^{iθ_p} G_aa* G_bb + e^{−iθ_p} G_ab G_ba*
//!
//! carries an overall e^{iθ_p}, so every |·|² observable is pump-phase
//! independent. The intracavity amplitude also has a one-line closed form
//! ([`psi2_intracavity_closed_form`]) used as the second algebraic route.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::commutators::{commutators_closed_form, CommutatorSet};
use crate::params::SystemConfig;
use crate::transfer::{intracavity_transfer, output_transfer, Location, TransferPair};

/// Absolute threshold below which the accidental denominator counts as the
/// lossless zero and CAR returns the +∞ sentinel.
pub const CAR_SENTINEL_TOL: f64 = 1e-14;

/// First-order biphoton state amplitudes at one detuning.
#[derive(Debug, Clone, Copy)]
pub struct BiphotonState {
    /// Two-photon amplitude ψ⁽²⁾ (the wavefunction is |r_ab|·ψ⁽²⁾).
    pub psi2: Complex64,
    /// First-order vacuum correction C_vac.
    pub c_vac: Complex64,
    /// Signal-survives amplitude φ_a⁽¹⁾ (idler lost to the environment).
    pub phi_a1: Complex64,
    /// Idler-survives amplitude φ_b⁽¹⁾ (signal lost to the environment).
    pub phi_b1: Complex64,
    /// Both-photons-lost weight R₀ ≥ 0.
    pub r0: f64,
    pub location: Location,
}

/// Per-detuning observable record.
#[derive(Debug, Clone, Copy)]
pub struct RateRecord {
    pub omega: f64,
    /// Pair generation rate R_ab = |r_ab|²|ψ⁽²⁾|².
    pub pair_rate: f64,
    pub singles_a: f64,
    pub singles_b: f64,
    pub car: f64,
    pub herald: f64,
    pub p0: f64,
    pub p1a: f64,
    pub p1b: f64,
    pub p2: f64,
}

/// Normalized photon-number populations of the reduced signal–idler state.
#[derive(Debug, Clone, Copy)]
pub struct Populations {
    pub p0: f64,
    pub p1a: f64,
    pub p1b: f64,
    pub p2: f64,
}

/// Assemble the first-order state amplitudes from a transfer pair and its
/// commutator constants. `theta_p` is the effective pump phase.
pub fn biphoton_state(pair: &TransferPair, comms: &CommutatorSet, theta_p: f64) -> BiphotonState {
    let g = &pair.g;
    let h = &pair.h;
    let plus = Complex64::from_polar(1.0, theta_p);
    let minus = plus.conj();

    let psi2 = plus * g.aa.conj() * g.bb + minus * g.ab * g.ba.conj();
    let c_vac = plus * (g.ab.conj() * g.bb + h.ab.conj() * h.bb * comms.c_bb)
        + minus * (g.aa * g.ba.conj() + h.aa * h.ba.conj() * comms.c_aa);
    let phi_a1 = plus * g.aa.conj() * h.bb + minus * g.ba.conj() * h.ab;
    let phi_b1 = plus * g.bb * h.aa.conj() + minus * g.ab * h.ba.conj();
    // Environment two-photon weight; the trace rule leaves the product of
    // the diagonal constants (C_ab = 0 kills the printed cross form).
    let env = plus * h.aa.conj() * h.bb + minus * h.ab * h.ba.conj();
    let r0 = comms.c_aa * comms.c_bb * env.norm_sqr();

    BiphotonState {
        psi2,
        c_vac,
        phi_a1,
        phi_b1,
        r0,
        location: pair.location,
    }
}

/// Pair generation rate R_ab = |r_ab|²·|ψ⁽²⁾|².
pub fn pair_rate(config: &SystemConfig, state: &BiphotonState) -> f64 {
    config.r_ab_squared() * state.psi2.norm_sqr()
}

/// Loss-induced singles rates
/// (|r_ab|²|φ_a⁽¹⁾|²C_bb, |r_ab|²C_aa|φ_b⁽¹⁾|²).
pub fn singles_rates(
    config: &SystemConfig,
    state: &BiphotonState,
    comms: &CommutatorSet,
) -> (f64, f64) {
    let scale = config.r_ab_squared();
    (
        scale * state.phi_a1.norm_sqr() * comms.c_bb,
        scale * comms.c_aa * state.phi_b1.norm_sqr(),
    )
}

/// Coincidence-to-accidental ratio; the common |r_ab|² cancels. Returns
/// the +∞ sentinel when the accidental denominator is the lossless zero.
pub fn car(state: &BiphotonState, comms: &CommutatorSet) -> f64 {
    let denom = state.phi_a1.norm_sqr() * comms.c_bb + comms.c_aa * state.phi_b1.norm_sqr();
    if denom.abs() <= CAR_SENTINEL_TOL {
        return f64::INFINITY;
    }
    state.psi2.norm_sqr() / denom
}

/// Heralding efficiency of the idler given a signal detection,
/// |ψ⁽²⁾|²/(|φ_a⁽¹⁾|²C_bb + |ψ⁽²⁾|²) ∈ [0, 1].
pub fn herald(state: &BiphotonState, comms: &CommutatorSet) -> f64 {
    let pair_term = state.psi2.norm_sqr();
    let denom = state.phi_a1.norm_sqr() * comms.c_bb + pair_term;
    if denom == 0.0 {
        // No pairs and no singles at all (r = 0 at exact extinction).
        return f64::NAN;
    }
    pair_term / denom
}

/// Photon-number populations from the O(|r_ab|²)-truncated norm.
pub fn populations(
    config: &SystemConfig,
    state: &BiphotonState,
    comms: &CommutatorSet,
) -> Populations {
    let scale = config.r_ab_squared();
    let w2 = scale * state.psi2.norm_sqr();
    let w1a = scale * state.phi_a1.norm_sqr() * comms.c_bb;
    let w1b = scale * comms.c_aa * state.phi_b1.norm_sqr();
    let w0 = 1.0 + scale * (state.c_vac.norm_sqr() + state.r0);
    let total = w0 + w1a + w1b + w2;
    Populations {
        p0: w0 / total,
        p1a: w1a / total,
        p1b: w1b / total,
        p2: w2 / total,
    }
}

/// Intracavity two-photon amplitude in one closed expression; the second
/// algebraic route against the matrix pipeline.
pub fn psi2_intracavity_closed_form(config: &SystemConfig, omega: f64) -> Result<Complex64> {
    let p = config.pump_parameters();
    let (ra, rb) = (p.r_a.norm(), p.r_b.norm());
    let theta_p = config.pump.effective_phase();
    let theta_a = config.signal.theta(omega);
    let theta_b = config.idler.theta(omega);
    let (alpha_a, alpha_b) = (config.signal.alpha, config.idler.alpha);
    let (rho_a, rho_b) = (config.signal.rho, config.idler.rho);
    let (tau_a, tau_b) = (config.signal.tau, config.idler.tau);
    let ea = Complex64::from_polar(1.0, theta_a);
    let eb = Complex64::from_polar(1.0, theta_b);

    let numerator = alpha_a
        * alpha_b
        * tau_a
        * tau_b
        * Complex64::from_polar(1.0, theta_b + theta_p)
        * (eb * ra * rb - (1.0 - ea * alpha_a * rho_a) * (eb - alpha_b * rho_b));
    let den_1 = ea * eb * ra * rb - (ea - alpha_a * rho_a) * (eb - alpha_b * rho_b);
    let den_2 = (1.0 - ea * alpha_a * rho_a) * (1.0 - eb * alpha_b * rho_b) - ra * rb;
    let denominator = den_1 * den_2;
    if denominator.norm() == 0.0 {
        return Err(Error::pole(format!(
            "closed-form two-photon amplitude singular at omega = {omega}"
        )));
    }
    Ok(numerator / denominator)
}

/// Symmetric-parameter closed-form CAR inside the ring:
/// α²(1−ρ²)/(2(1−|r|²−α²)). Errors on asymmetric configs, where the
/// matrix pipeline is the ground truth. Lossless denominators return the
/// +∞ sentinel.
pub fn symmetric_car_closed_form(config: &SystemConfig) -> Result<f64> {
    if !config.is_symmetric() {
        return Err(Error::validation(
            "closed-form CAR applies to symmetric configs only (equal T, rho, alpha); \
             use the matrix pipeline for asymmetric parameters",
        ));
    }
    let p = config.pump_parameters();
    let alpha2 = config.signal.alpha.powi(2);
    let rho2 = config.signal.rho.powi(2);
    let denom = 2.0 * (1.0 - p.r_a.norm() * p.r_b.norm() - alpha2);
    if denom.abs() <= CAR_SENTINEL_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(alpha2 * (1.0 - rho2) / denom)
}

/// Closed-form intracavity heralding efficiency, valid for general
/// (asymmetric) parameters: α_b²(1−ρ_b²)/(1−|r_b|²−α_b²ρ_b²).
pub fn herald_closed_form(config: &SystemConfig) -> f64 {
    let p = config.pump_parameters();
    let alpha_b2 = config.idler.alpha.powi(2);
    let rho_b2 = config.idler.rho.powi(2);
    alpha_b2 * (1.0 - rho_b2) / (1.0 - p.r_b.norm_sqr() - alpha_b2 * rho_b2)
}

/// Closed-form intracavity (CAR, herald) pair; symmetric-parameter mode.
pub fn closed_form_rates(config: &SystemConfig) -> Result<(f64, f64)> {
    Ok((symmetric_car_closed_form(config)?, herald_closed_form(config)))
}

/// Full per-detuning pipeline at the chosen location.
pub fn rate_record(config: &SystemConfig, omega: f64, location: Location) -> Result<RateRecord> {
    let pair = match location {
        Location::OutputBus => output_transfer(config, omega)?,
        Location::Intracavity => intracavity_transfer(config, omega)?,
    };
    let comms = commutators_closed_form(config);
    let state = biphoton_state(&pair, &comms, config.pump.effective_phase());
    let (singles_a, singles_b) = singles_rates(config, &state, &comms);
    let pops = populations(config, &state, &comms);
    Ok(RateRecord {
        omega,
        pair_rate: pair_rate(config, &state),
        singles_a,
        singles_b,
        car: car(&state, &comms),
        herald: herald(&state, &comms),
        p0: pops.p0,
        p1a: pops.p1a,
        p1b: pops.p1b,
        p2: pops.p2,
    })
}
