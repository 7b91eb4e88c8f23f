//! Closed-form output quadratures and force-referred spectral densities for
//! the main measurement strategies.
//!
//! The amplitude-quadrature set solves to
//!
//! ```text
//! beta_{a+} = xi alpha_{a+}
//! beta_{a-} = xi (alpha_{a-} - K alpha_{a+} / (gamma_m - i Omega))
//!             - sqrt(xi K)/(gamma_m - i Omega) (sqrt(2 gamma_m) q_a - f_phi)
//! ```
//!
//! with `xi = (gamma + i Omega)/(gamma - i Omega)` and
//! `K = 4 gamma eta^2 C^2 / (gamma^2 + Omega^2)`. Measuring both outputs and
//! adding `K/(gamma_m - i Omega) beta_{a+}` to `beta_{a-}` removes the
//! back-action term at every frequency; the phase-quadrature set is the
//! mirror image with the roles of +/- and a/phi swapped.
//!
//! Force referral divides an output PSD by the squared signal coefficient
//! `K/(gamma_m^2 + Omega^2)`, giving the budget
//! `S_f = 2 gamma_m (2 n_T + 1) + (gamma_m^2 + Omega^2)/K + K` for the raw
//! difference quadrature and dropping the last (back-action) term for the
//! combined one. Unit homodyne efficiency is assumed throughout.

use num_complex::Complex64;

use crate::channels::{Channel, TransferRow};
use crate::error::Error;
use crate::params::{xi_factor, SystemParams};
use crate::Result;

/// Which output combination is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyKind {
    /// The difference amplitude quadrature beta_{a-} alone (back action in).
    RawMinusAmplitude,
    /// beta_{a-} with the back action subtracted using beta_{a+}.
    CombinedAmplitude,
    /// The sum phase quadrature beta_{phi+} alone.
    PhasePlus,
    /// beta_{phi+} with the back action subtracted using beta_{phi-}.
    CombinedPhase,
    /// Rotated quadrature pair; varphi = 0 reduces to the amplitude pair,
    /// varphi = pi/2 to the phase pair.
    GeneralizedPair { varphi: f64 },
    /// Combined amplitude readout including the parasitic-sideband residual.
    SidebandCorrupted,
    /// Sideband residual reduced by the output-filter compensation.
    SidebandFiltered,
}

impl StrategyKind {
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::RawMinusAmplitude => "raw_minus_amplitude",
            StrategyKind::CombinedAmplitude => "combined_amplitude",
            StrategyKind::PhasePlus => "phase_plus",
            StrategyKind::CombinedPhase => "combined_phase",
            StrategyKind::GeneralizedPair { .. } => "generalized_pair",
            StrategyKind::SidebandCorrupted => "sideband_corrupted",
            StrategyKind::SidebandFiltered => "sideband_filtered",
        }
    }
}

/// sqrt(xi K) with the branch that equals 2 sqrt(gamma) eta C / (gamma - i Omega).
pub(crate) fn sqrt_xi_k(params: &SystemParams, omega: f64) -> Complex64 {
    2.0 * params.gamma.sqrt() * params.eta * params.pump_c / Complex64::new(params.gamma, -omega)
}

/// Output rows (beta_{a+}, beta_{a-}) of the amplitude-quadrature set.
pub fn transfer_amplitude(params: &SystemParams, omega: f64) -> (TransferRow, TransferRow) {
    let xi = xi_factor(params.gamma, omega);
    let k = params.probe_power(omega);
    let mech = Complex64::new(params.gamma_m, -omega);
    let sxk = sqrt_xi_k(params, omega);

    let mut plus = TransferRow::zeroed(omega);
    plus.set(Channel::AmpPlus, xi);

    let mut minus = TransferRow::zeroed(omega);
    minus.set(Channel::AmpMinus, xi);
    minus.set(Channel::AmpPlus, -xi * k / mech);
    minus.set(Channel::ThermalAmp, -sxk * (2.0 * params.gamma_m).sqrt() / mech);
    minus.set(Channel::ForcePhase, sxk / mech);
    (plus, minus)
}

/// Output rows (beta_{phi-}, beta_{phi+}) of the phase-quadrature set.
///
/// Mirror of [`transfer_amplitude`] with +/- and a/phi swapped; the signal
/// enters through the f_a quadrature with the opposite sign.
pub fn transfer_phase(params: &SystemParams, omega: f64) -> (TransferRow, TransferRow) {
    let xi = xi_factor(params.gamma, omega);
    let k = params.probe_power(omega);
    let mech = Complex64::new(params.gamma_m, -omega);
    let sxk = sqrt_xi_k(params, omega);

    let mut minus = TransferRow::zeroed(omega);
    minus.set(Channel::PhaseMinus, xi);

    let mut plus = TransferRow::zeroed(omega);
    plus.set(Channel::PhasePlus, xi);
    plus.set(Channel::PhaseMinus, -xi * k / mech);
    plus.set(Channel::ThermalPhase, -sxk * (2.0 * params.gamma_m).sqrt() / mech);
    plus.set(Channel::ForceAmp, -sxk / mech);
    (minus, plus)
}

/// Back-action-free combination `beta_{a-} + K/(gamma_m - i Omega) beta_{a+}`.
///
/// The weight is read off the rows themselves, so the same construction
/// applies to numerically solved rows; the cancelled coefficient is exactly
/// zero by construction.
pub fn combine_back_action_free(plus: &TransferRow, minus: &TransferRow) -> Result<TransferRow> {
    let mut comb = minus.cancel_channel(plus, Channel::AmpPlus)?;
    comb.set(Channel::AmpPlus, Complex64::new(0.0, 0.0));
    Ok(comb)
}

/// Phase-pair analogue: cancels the alpha_{phi-} back-action channel of
/// beta_{phi+} using beta_{phi-}.
pub fn combine_back_action_free_phase(
    minus: &TransferRow,
    plus: &TransferRow,
) -> Result<TransferRow> {
    let mut comb = plus.cancel_channel(minus, Channel::PhaseMinus)?;
    comb.set(Channel::PhaseMinus, Complex64::new(0.0, 0.0));
    Ok(comb)
}

/// Rotated-quadrature pair: returns (sum, difference) of
/// `b_{+varphi} = b_{+a} cos + b_{+phi} sin` and
/// `b_{-varphi} = b_{-a} cos - b_{-phi} sin`.
///
/// The sum carries no mechanical information (its force coefficients vanish);
/// the difference carries the signal together with the back action, which the
/// sum lets one subtract.
pub fn generalized_pair(
    params: &SystemParams,
    omega: f64,
    varphi: f64,
) -> Result<(TransferRow, TransferRow)> {
    let (beta_ap, beta_am) = transfer_amplitude(params, omega);
    let (beta_pm, beta_pp) = transfer_phase(params, omega);
    let c = Complex64::new(std::f64::consts::SQRT_2 * varphi.cos(), 0.0);
    let s = Complex64::new(std::f64::consts::SQRT_2 * varphi.sin(), 0.0);
    // b_{+v} + b_{-v} = sqrt2 (beta_{a+} cos + beta_{phi-} sin)
    let sum = TransferRow::zeroed(omega)
        .add_scaled(&beta_ap, c)?
        .add_scaled(&beta_pm, s)?;
    // b_{+v} - b_{-v} = sqrt2 (beta_{a-} cos + beta_{phi+} sin)
    let diff = TransferRow::zeroed(omega)
        .add_scaled(&beta_am, c)?
        .add_scaled(&beta_pp, s)?;
    Ok((sum, diff))
}

fn require_power(params: &SystemParams, what: &str) -> Result<()> {
    if params.eta * params.pump_c == 0.0 {
        return Err(Error::ZeroProbePower(format!(
            "{what} diverges at K = 0 (shot term ~ 1/K)"
        )));
    }
    Ok(())
}

/// Force-referred PSD of the raw difference amplitude quadrature:
/// `2 gamma_m (2 n_T + 1) + (gamma_m^2 + Omega^2)/K + K` (thermal term only
/// when enabled), rad/s.
pub fn force_psd_raw(params: &SystemParams, omega: f64) -> Result<f64> {
    require_power(params, "raw force PSD")?;
    let k = params.probe_power(omega);
    let shot = (params.gamma_m * params.gamma_m + omega * omega) / k;
    Ok(2.0 * params.gamma_m * params.thermal_psd() + shot + k)
}

/// Standard quantum limit S_SQL,f = 2 sqrt(gamma_m^2 + Omega^2), rad/s.
pub fn force_psd_sql(params: &SystemParams, omega: f64) -> f64 {
    2.0 * params.gamma_m.hypot(omega)
}

/// Force-referred PSD of the back-action-free combination:
/// `2 gamma_m (2 n_T + 1) + (gamma_m^2 + Omega^2)/K`, rad/s. Strictly
/// decreasing in K; unbounded below with the thermal channel off.
pub fn force_psd_combined(params: &SystemParams, omega: f64) -> Result<f64> {
    require_power(params, "combined force PSD")?;
    let k = params.probe_power(omega);
    let shot = (params.gamma_m * params.gamma_m + omega * omega) / k;
    Ok(2.0 * params.gamma_m * params.thermal_psd() + shot)
}

/// Minimum detectable force amplitude for a window of length `tau`:
/// f_s0 >= sqrt(S_f * (2 pi / tau) / (2 pi)) = sqrt(S_f / tau).
pub fn detection_threshold(spectrum_value: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "detection window must be positive, got {tau}"
        )));
    }
    Ok((spectrum_value / tau).sqrt())
}

/// Frequency grid specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub scale: GridScale,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl FrequencyGrid {
    /// Default spectrum grid: 2001 linear points over
    /// [-5e3 gamma_m, +5e3 gamma_m] clipped to |Omega| <= gamma (the
    /// slow-amplitude model holds for |Omega| << omega_m).
    pub fn default_for(params: &SystemParams) -> Self {
        let half = (5e3 * params.gamma_m).min(params.gamma);
        FrequencyGrid {
            scale: GridScale::Linear,
            min: -half,
            max: half,
            points: 2001,
        }
    }

    /// The canonical verification grid: 201 log points from 1e-2 gamma_m to
    /// min(1e2 gamma_m, 0.5 gamma).
    pub fn canonical_log(params: &SystemParams) -> Self {
        FrequencyGrid {
            scale: GridScale::Log,
            min: 1e-2 * params.gamma_m,
            max: (1e2 * params.gamma_m).min(0.5 * params.gamma),
            points: 201,
        }
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid bounds must satisfy min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        let n = self.points;
        let grid: Vec<f64> = match self.scale {
            GridScale::Linear => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
            GridScale::Log => {
                if self.min <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "log grid requires positive bounds".into(),
                    ));
                }
                let (l0, l1) = (self.min.ln(), self.max.ln());
                (0..n)
                    .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        };
        Ok(grid)
    }
}

/// Frequency grid plus force-referred single-sided PSD per strategy.
#[derive(Debug, Clone)]
pub struct ForceSpectrum {
    pub omegas: Vec<f64>,
    pub raw: Vec<f64>,
    pub combined: Vec<f64>,
    pub with_sidebands: Vec<f64>,
    pub filtered: Vec<f64>,
    pub sql: Vec<f64>,
}

impl ForceSpectrum {
    /// Evaluate every closed-form strategy over `grid`.
    pub fn compute(params: &SystemParams, grid: &[f64]) -> Result<ForceSpectrum> {
        let mut out = ForceSpectrum {
            omegas: grid.to_vec(),
            raw: Vec::with_capacity(grid.len()),
            combined: Vec::with_capacity(grid.len()),
            with_sidebands: Vec::with_capacity(grid.len()),
            filtered: Vec::with_capacity(grid.len()),
            sql: Vec::with_capacity(grid.len()),
        };
        for &w in grid {
            out.raw.push(force_psd_raw(params, w)?);
            out.combined.push(force_psd_combined(params, w)?);
            out.with_sidebands.push(crate::sideband::force_psd_with_sidebands(
                params,
                w,
                crate::sideband::GTildeForm::Approximate,
            )?);
            out.filtered.push(crate::sideband::force_psd_filtered(params, w)?);
            out.sql.push(force_psd_sql(params, w));
        }
        debug_assert!(out.is_valid());
        Ok(out)
    }

    /// Grid strictly increasing and every PSD non-negative.
    pub fn is_valid(&self) -> bool {
        self.omegas.windows(2).all(|w| w[0] < w[1])
            && [
                &self.raw,
                &self.combined,
                &self.with_sidebands,
                &self.filtered,
                &self.sql,
            ]
            .iter()
            .all(|col| col.iter().all(|v| v.is_finite() && *v >= 0.0))
    }
}
