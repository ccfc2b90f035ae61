//! Biphoton pair generation in a lossy single-bus microring resonator.
//!
//! The engine models spontaneous parametric down-conversion and four-wave
//! mixing of a classically pumped microring coupled to one bus waveguide,
//! using an input–output formalism whose circulation factors resum every
//! round trip of the fields. It computes:
//!
//! * single-mode and coupled 2×2 transfer matrices (output bus and
//!   intracavity), with closed-form and composed routes ([`transfer`]);
//! * the quantum-noise commutator constants fixed by output unitarity,
//!   solved numerically and in closed form ([`commutators`]);
//! * the two-photon wavefunction, loss-induced singles, populations, and
//!   the pair / CAR / heralding rates ([`biphoton`]);
//! * the high-cavity-Q reductions to standard Langevin theory, pole
//!   analysis, and convergence studies ([`highq`]);
//! * deterministic parameter sweeps with CSV/JSON emission ([`sweep`])
//!   driven by a line-oriented config format ([`config`]), plus a
//!   randomized invariant suite ([`verify`]).
//!
//! Everything internal works in the dimensionless groups θ = ωT, γT, γ′T
//! and r = g·α_p·T; physical units are converted at the [`params`]
//! boundary.

pub mod biphoton;
pub mod commutators;
pub mod config;
pub mod error;
pub mod highq;
pub mod linalg;
pub mod params;
pub mod sweep;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
