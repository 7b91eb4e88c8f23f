//! Input noise/signal channels and complex transfer rows over them.
//!
//! Everything downstream works in the sum/difference quadrature basis: the
//! two probe tones give amplitude and phase quadratures whose sums and
//! differences decouple, and the parasitic sidebands add four more quadrature
//! channels with the same structure.

use num_complex::Complex64;

use crate::error::Error;
use crate::params::SystemParams;
use crate::Result;

/// Number of input channels (fixed ordering, see [`Channel::ALL`]).
pub const N_CHANNELS: usize = 12;

/// Input channel labels.
///
/// `Amp*`/`Phase*` are the sum (+) and difference (-) combinations of the two
/// probe vacuum quadratures; `Thermal*` the mechanical bath quadratures;
/// `Force*` the classical signal force quadratures; `Sb*` the corresponding
/// sum/difference quadratures of the parasitic-sideband vacuum inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    AmpPlus,
    AmpMinus,
    PhasePlus,
    PhaseMinus,
    ThermalAmp,
    ThermalPhase,
    ForceAmp,
    ForcePhase,
    SbAmpPlus,
    SbAmpMinus,
    SbPhasePlus,
    SbPhaseMinus,
}

impl Channel {
    /// Fixed channel ordering used by every row and matrix in the crate.
    pub const ALL: [Channel; N_CHANNELS] = [
        Channel::AmpPlus,
        Channel::AmpMinus,
        Channel::PhasePlus,
        Channel::PhaseMinus,
        Channel::ThermalAmp,
        Channel::ThermalPhase,
        Channel::ForceAmp,
        Channel::ForcePhase,
        Channel::SbAmpPlus,
        Channel::SbAmpMinus,
        Channel::SbPhasePlus,
        Channel::SbPhaseMinus,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Classical signal channels (excluded from noise sums and from the
    /// symplectic check).
    pub const fn is_force(self) -> bool {
        matches!(self, Channel::ForceAmp | Channel::ForcePhase)
    }

    pub const fn is_thermal(self) -> bool {
        matches!(self, Channel::ThermalAmp | Channel::ThermalPhase)
    }

    pub const fn is_sideband(self) -> bool {
        matches!(
            self,
            Channel::SbAmpPlus | Channel::SbAmpMinus | Channel::SbPhasePlus | Channel::SbPhaseMinus
        )
    }

    pub const fn label(self) -> &'static str {
        match self {
            Channel::AmpPlus => "alpha_a_plus",
            Channel::AmpMinus => "alpha_a_minus",
            Channel::PhasePlus => "alpha_phi_plus",
            Channel::PhaseMinus => "alpha_phi_minus",
            Channel::ThermalAmp => "q_a",
            Channel::ThermalPhase => "q_phi",
            Channel::ForceAmp => "f_a",
            Channel::ForcePhase => "f_phi",
            Channel::SbAmpPlus => "alpha_tilde_a_plus",
            Channel::SbAmpMinus => "alpha_tilde_a_minus",
            Channel::SbPhasePlus => "alpha_tilde_phi_plus",
            Channel::SbPhaseMinus => "alpha_tilde_phi_minus",
        }
    }
}

/// Complex coefficients mapping every input channel to one output quadrature
/// at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferRow {
    /// Offset frequency Omega, rad/s.
    pub omega: f64,
    coeffs: [Complex64; N_CHANNELS],
}

impl TransferRow {
    pub fn zeroed(omega: f64) -> Self {
        TransferRow {
            omega,
            coeffs: [Complex64::new(0.0, 0.0); N_CHANNELS],
        }
    }

    pub fn coeff(&self, ch: Channel) -> Complex64 {
        self.coeffs[ch.index()]
    }

    pub fn set(&mut self, ch: Channel, value: Complex64) {
        self.coeffs[ch.index()] = value;
    }

    pub fn add(&mut self, ch: Channel, value: Complex64) {
        self.coeffs[ch.index()] += value;
    }

    pub fn coeffs(&self) -> &[Complex64; N_CHANNELS] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self + weight * other`; frequencies must match.
    pub fn add_scaled(&self, other: &TransferRow, weight: Complex64) -> Result<TransferRow> {
        if self.omega != other.omega {
            return Err(Error::FrequencyMismatch(self.omega, other.omega));
        }
        let mut out = self.clone();
        for i in 0..N_CHANNELS {
            out.coeffs[i] += weight * other.coeffs[i];
        }
        Ok(out)
    }

    /// Scale the coefficient of one channel group in place.
    pub fn scale_channels(&mut self, pred: impl Fn(Channel) -> bool, factor: Complex64) {
        for ch in Channel::ALL {
            if pred(ch) {
                self.coeffs[ch.index()] *= factor;
            }
        }
    }

    /// Combination of two rows that cancels `other`'s contribution on
    /// `channel`: `self - (self[ch]/other[ch]) * other`, with the target
    /// coefficient forced to exactly zero. Used to reconstruct the
    /// back-action-free combination from numerically solved rows.
    pub fn cancel_channel(&self, other: &TransferRow, channel: Channel) -> Result<TransferRow> {
        let denom = other.coeff(channel);
        let weight = if denom.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -self.coeff(channel) / denom
        };
        self.add_scaled(other, weight)
    }

    /// Output PSD: sum over noise channels of |coefficient|^2 times the
    /// channel PSD. Force channels are excluded.
    pub fn output_psd(&self, noise: &NoiseModel) -> f64 {
        Channel::ALL
            .iter()
            .filter(|ch| !ch.is_force())
            .map(|ch| self.coeff(*ch).norm_sqr() * noise.psd(*ch))
            .sum()
    }

    /// Squared magnitude of the signal transfer, summed over the force
    /// quadrature channels.
    pub fn signal_weight(&self) -> f64 {
        self.coeff(Channel::ForceAmp).norm_sqr() + self.coeff(Channel::ForcePhase).norm_sqr()
    }

    /// Force-referred PSD: output PSD divided by the signal weight.
    pub fn force_referred_psd(&self, noise: &NoiseModel) -> Result<f64> {
        let w = self.signal_weight();
        if w == 0.0 {
            return Err(Error::ZeroSignalCoefficient);
        }
        Ok(self.output_psd(noise) / w)
    }

    /// Apply the row to one realization of the input channels.
    pub fn apply(&self, inputs: &[Complex64; N_CHANNELS]) -> Complex64 {
        self.coeffs
            .iter()
            .zip(inputs.iter())
            .map(|(c, x)| c * x)
            .sum()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Row deviation normalized by the reference row's largest coefficient.
    pub fn max_rel_deviation(&self, reference: &TransferRow) -> f64 {
        let scale = reference.max_abs().max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .zip(reference.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

/// Single-sided PSD assigned to each input channel.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    /// PSD of each optical vacuum quadrature (main and sideband), normally 1.
    pub vacuum: f64,
    /// PSD of each thermal quadrature: 2 n_T + 1, or 0 with the thermal
    /// channel disabled.
    pub thermal: f64,
}

impl NoiseModel {
    pub fn from_params(params: &SystemParams) -> Self {
        NoiseModel {
            vacuum: 1.0,
            thermal: params.thermal_psd(),
        }
    }

    pub fn vacuum_only() -> Self {
        NoiseModel {
            vacuum: 1.0,
            thermal: 0.0,
        }
    }

    pub fn psd(&self, ch: Channel) -> f64 {
        if ch.is_force() {
            0.0
        } else if ch.is_thermal() {
            self.thermal
        } else {
            self.vacuum
        }
    }
}
