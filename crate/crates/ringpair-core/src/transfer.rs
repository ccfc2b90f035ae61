//! Transfer functions of the lossy single-bus microring.
//!
//! Single-mode transfers first (lossless, phenomenological-loss, pump
//! enhancement), then the coupled signal–idler 2×2 matrices
//!
//!   a⃗_out = G(ω) a⃗_in + H(ω) f⃗,     a⃗(L₋) = G^(L) a⃗_in + H^(L) f⃗,
//!
//! on the field vector (a, b†)ᵀ. Each matrix is available through two
//! independent routes: the closed-form entries over the common denominator
//!
//!   D = (1−ρ_a ξ_a)(1−ρ_b ξ_b) − r_a r_b,   ξ_k = α_k e^{iθ_k},
//!
//! and the composition G = Xτ(M − Pξ Tρ)⁻¹ Pξ Xτ − Tρ, H = Xτ(M − Pξ Tρ)⁻¹.
//! The closed form is the production path; the composition is kept public
//! as the oracle that guards against transcription mistakes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::params::{ModeParams, SystemConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerance below which a denominator counts as a pole.
const POLE_TOL: f64 = 1e-14;

/// Where a transfer pair relates fields: the output bus or just before the
/// ring's exit coupler (z = L₋).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    OutputBus,
    Intracavity,
}

/// The pair (G, H) — or (G^(L), H^(L)) — with the shared denominator D at
/// one detuning.
#[derive(Debug, Clone, Copy)]
pub struct TransferPair {
    pub g: Mat2,
    pub h: Mat2,
    pub denominator: Complex64,
    pub location: Location,
}

/// The matrices of the coupled equations of motion:
/// M has unit diagonal and ±i·r off-diagonal; Pξ, Tρ, Xτ are diagonal.
#[derive(Debug, Clone, Copy)]
pub struct BuildingBlocks {
    pub m: Mat2,
    pub p_xi: Mat2,
    pub t_rho: Mat2,
    pub x_tau: Mat2,
    pub xi_a: Complex64,
    pub xi_b: Complex64,
}

/// Circulation factor S = 1/(1 − ρα e^{iθ}), the closed geometric series
/// over round trips.
pub fn circulation_factor(rho: f64, alpha: f64, theta: f64) -> Result<Complex64> {
    let product = rho * alpha;
    if product >= 1.0 {
        return Err(Error::pole(format!(
            "circulation factor diverges: rho*alpha = {product} >= 1"
        )));
    }
    if product < 0.0 {
        return Err(Error::validation("rho and alpha must be non-negative"));
    }
    Ok(ONE / (ONE - Complex64::from_polar(product, theta)))
}

/// Lossless unimodular transfer G = e^{iθ}(1 − ρe^{−iθ})/(1 − ρe^{iθ}).
pub fn lossless_transfer(rho: f64, theta: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::validation(format!(
            "rho must lie in [0, 1], got {rho}"
        )));
    }
    let denom = ONE - Complex64::from_polar(rho, theta);
    if denom.norm() <= POLE_TOL {
        return Err(Error::pole(
            "lossless transfer singular (rho = 1 on resonance)",
        ));
    }
    let numer = ONE - Complex64::from_polar(rho, -theta);
    Ok(Complex64::from_polar(1.0, theta) * numer / denom)
}

/// Classical transfer with phenomenological loss:
/// G = (αe^{iθ} − ρ)/(1 − ρα e^{iθ}), |G| ≤ 1.
pub fn classical_lossy_transfer(rho: f64, alpha: f64, theta: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&rho) || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::validation(format!(
            "rho and alpha must lie in [0, 1], got rho={rho}, alpha={alpha}"
        )));
    }
    let denom = ONE - Complex64::from_polar(rho * alpha, theta);
    if denom.norm() <= POLE_TOL {
        return Err(Error::pole("lossy transfer singular (rho*alpha = 1 on resonance)"));
    }
    Ok((Complex64::from_polar(alpha, theta) - rho) / denom)
}

/// Single-mode noise magnitude |H| = √(1 − |G|²) required by unitarity.
pub fn single_mode_noise_magnitude(g: Complex64) -> Result<f64> {
    let g2 = g.norm_sqr();
    if g2 > 1.0 + 1e-12 {
        return Err(Error::Invariant(format!(
            "unitarity violation: |G|^2 = {g2} > 1"
        )));
    }
    Ok((1.0 - g2).max(0.0).sqrt())
}

/// Sampling point of the pump field inside the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingPoint {
    /// Just inside the input coupler, z = 0₊.
    Entry,
    /// After one round trip, z = L₋.
    Exit,
}

/// Lossless classical pump built up inside the ring:
/// ⟨c(0₊)⟩ = τ_c/(1−ρ_c e^{iθ_c})·c_in, ⟨c(L₋)⟩ carries one extra e^{iθ_c}.
pub fn pump_in_ring(
    mode: &ModeParams,
    theta: f64,
    input: Complex64,
    point: RingPoint,
) -> Result<Complex64> {
    let denom = ONE - Complex64::from_polar(mode.rho, theta);
    if denom.norm() <= POLE_TOL {
        return Err(Error::pole("pump enhancement singular (rho_c = 1 on resonance)"));
    }
    let entry = mode.tau / denom * input;
    Ok(match point {
        RingPoint::Entry => entry,
        RingPoint::Exit => entry * Complex64::from_polar(1.0, theta),
    })
}

/// Pump leaving on the bus: the lossless unimodular transfer applied to
/// the pump mode.
pub fn pump_out(mode: &ModeParams, theta: f64, input: Complex64) -> Result<Complex64> {
    Ok(lossless_transfer(mode.rho, theta)? * input)
}

/// Assemble M, Pξ, Tρ, Xτ at detuning ω.
pub fn building_blocks(config: &SystemConfig, omega: f64) -> BuildingBlocks {
    let p = config.pump_parameters();
    let xi_a = config.signal.xi(omega);
    let xi_b = config.idler.xi(omega);
    BuildingBlocks {
        m: Mat2::new(ONE, I * p.r_a, -I * p.r_b, ONE),
        p_xi: Mat2::diagonal(xi_a, xi_b),
        t_rho: Mat2::diagonal(config.signal.rho.into(), config.idler.rho.into()),
        x_tau: Mat2::diagonal(config.signal.tau.into(), config.idler.tau.into()),
        xi_a,
        xi_b,
    }
}

struct Denominator {
    d: Complex64,
    factor_a: Complex64,
    factor_b: Complex64,
}

fn denominator(config: &SystemConfig, omega: f64) -> Result<Denominator> {
    let p = config.pump_parameters();
    let factor_a = ONE - config.signal.rho * config.signal.xi(omega);
    let factor_b = ONE - config.idler.rho * config.idler.xi(omega);
    let d = factor_a * factor_b - p.r_a * p.r_b;
    let scale = (factor_a * factor_b).norm().max((p.r_a * p.r_b).norm()).max(1e-300);
    if d.norm() <= POLE_TOL * scale {
        return Err(Error::pole(format!(
            "transfer denominator D vanishes at omega = {omega}"
        )));
    }
    Ok(Denominator { d, factor_a, factor_b })
}

/// Output-bus transfer pair from the closed-form entries.
pub fn output_transfer(config: &SystemConfig, omega: f64) -> Result<TransferPair> {
    let p = config.pump_parameters();
    let den = denominator(config, omega)?;
    let (xi_a, xi_b) = (config.signal.xi(omega), config.idler.xi(omega));
    let (rho_a, rho_b) = (config.signal.rho, config.idler.rho);
    let (tau_a, tau_b) = (config.signal.tau, config.idler.tau);
    let rr = p.r_a * p.r_b;

    let g = Mat2::new(
        ((xi_a - rho_a) * den.factor_b + rr * rho_a) / den.d,
        -I * p.r_a * tau_a * tau_b * xi_b / den.d,
        I * p.r_b * tau_b * tau_a * xi_a / den.d,
        ((xi_b - rho_b) * den.factor_a + rr * rho_b) / den.d,
    );
    let h = Mat2::new(
        tau_a * den.factor_b / den.d,
        -I * p.r_a * tau_a / den.d,
        I * p.r_b * tau_b / den.d,
        tau_b * den.factor_a / den.d,
    );
    Ok(TransferPair {
        g,
        h,
        denominator: den.d,
        location: Location::OutputBus,
    })
}

/// Output-bus pair by explicit composition through (M − Pξ Tρ)⁻¹; the
/// independent oracle for [`output_transfer`].
pub fn output_transfer_composed(config: &SystemConfig, omega: f64) -> Result<TransferPair> {
    let blocks = building_blocks(config, omega);
    let core = blocks.m.sub(&blocks.p_xi.mul(&blocks.t_rho));
    let inv = core
        .inverse()
        .map_err(|_| Error::pole("singular (M - P_xi T_rho)".to_string()))?;
    let h = blocks.x_tau.mul(&inv);
    let g = h.mul(&blocks.p_xi).mul(&blocks.x_tau).sub(&blocks.t_rho);
    Ok(TransferPair {
        g,
        h,
        denominator: core.det(),
        location: Location::OutputBus,
    })
}

/// Intracavity transfer pair (fields at z = L₋) from the closed-form
/// entries. Requires both cross-couplings nonzero: the intracavity
/// relation divides by τ.
pub fn intracavity_transfer(config: &SystemConfig, omega: f64) -> Result<TransferPair> {
    if config.signal.tau == 0.0 || config.idler.tau == 0.0 {
        return Err(Error::validation(
            "intracavity transfer undefined for tau = 0 (ring decoupled from bus)",
        ));
    }
    let p = config.pump_parameters();
    let den = denominator(config, omega)?;
    let (xi_a, xi_b) = (config.signal.xi(omega), config.idler.xi(omega));
    let (tau_a, tau_b) = (config.signal.tau, config.idler.tau);

    let g = Mat2::new(
        tau_a * den.factor_b * xi_a / den.d,
        -I * p.r_a * tau_b * xi_b / den.d,
        I * p.r_b * tau_a * xi_a / den.d,
        tau_b * den.factor_a * xi_b / den.d,
    );
    let h = Mat2::new(
        den.factor_b / den.d,
        -I * p.r_a / den.d,
        I * p.r_b / den.d,
        den.factor_a / den.d,
    );
    Ok(TransferPair {
        g,
        h,
        denominator: den.d,
        location: Location::Intracavity,
    })
}

/// Intracavity pair through G^(L) = Xτ⁻¹ H Pξ Xτ and H^(L) = Xτ⁻¹ H; the
/// independent oracle for [`intracavity_transfer`].
pub fn intracavity_transfer_composed(config: &SystemConfig, omega: f64) -> Result<TransferPair> {
    if config.signal.tau == 0.0 || config.idler.tau == 0.0 {
        return Err(Error::validation(
            "intracavity transfer undefined for tau = 0 (ring decoupled from bus)",
        ));
    }
    let blocks = building_blocks(config, omega);
    let out = output_transfer_composed(config, omega)?;
    let x_inv = Mat2::diagonal(
        ONE / Complex64::from(config.signal.tau),
        ONE / Complex64::from(config.idler.tau),
    );
    let h = x_inv.mul(&out.h);
    let g = h.mul(&blocks.p_xi).mul(&blocks.x_tau);
    Ok(TransferPair {
        g,
        h,
        denominator: out.denominator,
        location: Location::Intracavity,
    })
}

/// Residual of the unitarity identity G = H·Pξ·Xτ − Tρ, as a relative
/// max-norm distance. Zero (to rounding) for any correctly constructed
/// output-bus pair; deliberately callable on corrupted pairs so the check
/// itself is testable.
pub fn gh_identity_residual(pair: &TransferPair, blocks: &BuildingBlocks) -> f64 {
    let reconstructed = pair.h.mul(&blocks.p_xi).mul(&blocks.x_tau).sub(&blocks.t_rho);
    pair.g.relative_distance(&reconstructed)
}
