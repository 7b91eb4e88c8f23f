//! Quantum noise budget of a two-tone (dichromatic) optomechanical force sensor.
//!
//! Two optical modes separated by the mechanical frequency are pumped on
//! resonance; the beat of the probe tones reads out the mechanical oscillator
//! while radiation pressure feeds amplitude fluctuations back onto it. Because
//! the probe has two independent quantum outputs, the back-action channel can
//! be measured on one output combination and subtracted from the other in
//! post-processing, evading the standard quantum limit over a broad band.
//!
//! The crate provides three independent routes to the noise budget:
//!
//! * closed-form output quadratures and force-referred spectral densities for
//!   each measurement strategy ([`spectra`], [`sideband`]),
//! * a brute-force frequency-domain linear-system solver that re-derives every
//!   transfer coefficient numerically and checks the symplectic structure of
//!   the scattering matrix ([`oracle`]),
//! * a semiclassical time-domain Langevin integrator with Welch spectral
//!   estimation, post-processed strategy combinations, and matched-filter
//!   force detection ([`sim`]).
//!
//! All rates and frequencies are angular (rad/s). Spectral densities are
//! single-sided: a vacuum input quadrature carries unit PSD, a thermal
//! quadrature carries `2 n_T + 1`.

pub mod channels;
pub mod error;
pub mod minimize;
pub mod oracle;
pub mod params;
pub mod sideband;
pub mod sim;
pub mod spectra;
pub mod verify;

pub use channels::{Channel, NoiseModel, TransferRow};
pub use error::Error;
pub use params::{ForceSignal, MeanField, ModeFrequencies, SystemParams};
pub use spectra::StrategyKind;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
