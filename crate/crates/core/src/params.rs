//! Physical parameters, regime validation, elementary frequency-domain
//! factors, and the mean-field steady state.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Reduced Planck constant, J s (CODATA, exact SI h / 2 pi).
pub const HBAR: f64 = 1.054_571_817_646_156_5e-34;
/// Boltzmann constant, J/K (exact SI).
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// All physical rates, coupling, pump, and thermal parameters of the sensor.
///
/// Rates are angular half-linewidths in rad/s. `eta` and `pump_c` are real
/// and non-negative; the probe tone phases are absorbed into the quadrature
/// definitions. Optical carrier, mass, and cavity length are optional and
/// only used to derive the coupling and the zero-point amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Optical half-linewidth gamma, rad/s.
    pub gamma: f64,
    /// Mechanical half-linewidth gamma_m, rad/s.
    pub gamma_m: f64,
    /// Mechanical eigenfrequency omega_m, rad/s.
    pub omega_m: f64,
    /// Optical carrier omega_0, rad/s (only used to derive the coupling).
    pub omega0: Option<f64>,
    /// Oscillator mass, kg (only used for x_0 and force normalization).
    pub mass: Option<f64>,
    /// Cavity arm length, m (only used to derive the coupling).
    pub length: Option<f64>,
    /// Optomechanical coupling eta, 1/s, real and non-negative.
    pub eta: f64,
    /// Intracavity mean quadrature amplitude C (photon-flux normalized).
    pub pump_c: f64,
    /// Thermal occupation number of the mechanical bath.
    pub n_thermal: f64,
    /// Whether the thermal force channel is included in noise budgets.
    pub thermal_on: bool,
}

/// One regime condition checked by [`SystemParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeCondition {
    /// gamma_m << gamma.
    MechanicalNarrow,
    /// gamma << omega_m (resolved sidebands).
    ResolvedSideband,
}

/// Pass/warn outcome for one regime condition.
#[derive(Debug, Clone)]
pub struct RegimeDiagnostic {
    pub condition: RegimeCondition,
    /// Achieved separation ratio (e.g. gamma / gamma_m).
    pub ratio: f64,
    /// Required separation factor.
    pub required: f64,
    pub pass: bool,
}

impl SystemParams {
    /// Desk-scale canonical parameter set: gamma = 2pi 1e4, gamma_m = 2pi 1e2,
    /// omega_m = 2pi 1e6 rad/s, pump set so that K(0) = gamma_m, thermal off.
    pub fn canonical() -> Self {
        let gamma_m = 2.0 * std::f64::consts::PI * 1e2;
        let mut p = SystemParams {
            gamma: 2.0 * std::f64::consts::PI * 1e4,
            gamma_m,
            omega_m: 2.0 * std::f64::consts::PI * 1e6,
            omega0: None,
            mass: None,
            length: None,
            eta: 1.0,
            pump_c: 0.0,
            n_thermal: 0.0,
            thermal_on: false,
        };
        p.set_power_at(0.0, gamma_m);
        p
    }

    /// Set the pump amplitude so that the normalized probe power equals
    /// `k_target` at frequency `omega` (rad/s). Requires `eta > 0`.
    pub fn set_power_at(&mut self, omega: f64, k_target: f64) {
        assert!(self.eta > 0.0 && k_target >= 0.0 && self.gamma > 0.0);
        self.pump_c =
            (k_target * (self.gamma * self.gamma + omega * omega) / (4.0 * self.gamma)).sqrt()
                / self.eta;
    }

    /// Builder-style variant of [`set_power_at`](Self::set_power_at).
    pub fn with_power_at(mut self, omega: f64, k_target: f64) -> Self {
        self.set_power_at(omega, k_target);
        self
    }

    /// Check the regime assumptions with the default separation factor 10.
    ///
    /// Violations of the ordering are warnings (`pass = false`), not errors:
    /// the oracle and the Monte Carlo stay valid outside the resolved-sideband
    /// regime, only the analytic approximations degrade. Non-positive rates
    /// and negative couplings are hard errors.
    pub fn validate(&self) -> Result<Vec<RegimeDiagnostic>> {
        self.validate_with_factor(10.0)
    }

    /// Same as [`validate`](Self::validate) with a configurable ratio threshold.
    pub fn validate_with_factor(&self, factor: f64) -> Result<Vec<RegimeDiagnostic>> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("gamma_m", self.gamma_m),
            ("omega_m", self.omega_m),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eta must be non-negative, got {}",
                self.eta
            )));
        }
        if !self.pump_c.is_finite() || self.pump_c < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pump_c must be non-negative, got {}",
                self.pump_c
            )));
        }
        if !self.n_thermal.is_finite() || self.n_thermal < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "n_thermal must be non-negative, got {}",
                self.n_thermal
            )));
        }
        let r1 = self.gamma / self.gamma_m;
        let r2 = self.omega_m / self.gamma;
        Ok(vec![
            RegimeDiagnostic {
                condition: RegimeCondition::MechanicalNarrow,
                ratio: r1,
                required: factor,
                pass: r1 >= factor,
            },
            RegimeDiagnostic {
                condition: RegimeCondition::ResolvedSideband,
                ratio: r2,
                required: factor,
                pass: r2 >= factor,
            },
        ])
    }

    /// Normalized probe power K(Omega) = 4 gamma eta^2 C^2 / (gamma^2 + Omega^2),
    /// rad/s. Even in Omega; K(0) = 4 eta^2 C^2 / gamma.
    pub fn probe_power(&self, omega: f64) -> f64 {
        let ec = self.eta * self.pump_c;
        4.0 * self.gamma * ec * ec / (self.gamma * self.gamma + omega * omega)
    }

    /// K at zero offset frequency.
    pub fn probe_power_dc(&self) -> f64 {
        self.probe_power(0.0)
    }

    /// Probe power reaching the standard quantum limit at this frequency,
    /// K_SQL = sqrt(gamma_m^2 + Omega^2).
    pub fn probe_power_sql(&self, omega: f64) -> f64 {
        self.gamma_m.hypot(omega)
    }

    /// Single-sided PSD carried by each thermal quadrature channel:
    /// `2 n_T + 1` when the thermal channel is enabled, zero otherwise.
    pub fn thermal_psd(&self) -> f64 {
        if self.thermal_on {
            2.0 * self.n_thermal + 1.0
        } else {
            0.0
        }
    }

    /// Pump quadrature amplitudes A_+- that reproduce `pump_c` under the
    /// zero-drive mean field, A = sqrt(gamma/2) C.
    pub fn pump_amplitude(&self) -> f64 {
        (self.gamma / 2.0).sqrt() * self.pump_c
    }
}

/// Unimodular cavity reflection factor xi = (gamma + i Omega)/(gamma - i Omega).
pub fn xi_factor(gamma: f64, omega: f64) -> Complex64 {
    Complex64::new(gamma, omega) / Complex64::new(gamma, -omega)
}

/// Zero-point amplitude x_0 = sqrt(hbar / (2 m omega_m)), meters.
pub fn zero_point_amplitude(mass: f64, omega_m: f64) -> Result<f64> {
    if !(mass > 0.0 && omega_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "zero_point_amplitude requires mass > 0 and omega_m > 0, got ({mass}, {omega_m})"
        )));
    }
    Ok((HBAR / (2.0 * mass * omega_m)).sqrt())
}

/// Optomechanical coupling eta = (x_0 / L) omega_0, 1/s.
pub fn coupling_eta(omega0: f64, length: f64, x0: f64) -> Result<f64> {
    if !(omega0 > 0.0 && length > 0.0 && x0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coupling_eta requires omega0 > 0, length > 0, x0 >= 0, got ({omega0}, {length}, {x0})"
        )));
    }
    Ok(x0 / length * omega0)
}

/// Bose occupation of the mechanical mode at temperature `t` kelvin.
///
/// The standard 1/(exp(hbar omega_m / k_B T) - 1). Exposed so configs can be
/// written in kelvin; the noise model itself takes the occupation number
/// directly.
pub fn occupation_from_temperature(omega_m: f64, t: f64) -> Result<f64> {
    if !(omega_m > 0.0 && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "occupation requires omega_m > 0 and T >= 0, got ({omega_m}, {t})"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / ((HBAR * omega_m / (K_BOLTZMANN * t)).exp_m1()))
}

/// The two probe-tone eigenfrequencies and their splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFrequencies {
    pub omega_minus: f64,
    pub omega_plus: f64,
}

impl ModeFrequencies {
    /// Modes split symmetrically about the carrier: omega_+- = omega0 +- split/2.
    pub fn from_splitting(omega0: f64, splitting: f64) -> Self {
        ModeFrequencies {
            omega_minus: omega0 - splitting / 2.0,
            omega_plus: omega0 + splitting / 2.0,
        }
    }

    /// Frequency-synchronized pair: splitting equal to the mechanical frequency.
    pub fn synchronized(omega0: f64, omega_m: f64) -> Self {
        Self::from_splitting(omega0, omega_m)
    }

    pub fn splitting(&self) -> f64 {
        self.omega_plus - self.omega_minus
    }

    /// True when the splitting matches the mechanical frequency to `tol` relative.
    pub fn is_synchronized(&self, omega_m: f64, tol: f64) -> bool {
        (self.splitting() - omega_m).abs() <= tol * omega_m
    }
}

/// Mean-field steady state of the pumped system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanField {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// Mean mechanical amplitude driven by the static beat of the pumps.
    pub d: Complex64,
    /// Ponderomotive parameter nu = eta^2 / (gamma gamma_m).
    pub nu: f64,
}

/// How the steady state treats the mean mechanical drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteadyStateMode {
    /// The working assumption of the linearized model: the resonant
    /// ponderomotive excitation is compensated externally, D = 0 and
    /// C_+- = sqrt(2/gamma) A_+-.
    #[default]
    ZeroDrive,
    /// Solve the self-consistent pair for C_+- including the ponderomotive
    /// back-reaction of D on the optics.
    SelfConsistent,
}

const STEADY_TOL: f64 = 1e-12;
const STEADY_MAX_ITER: usize = 200;

/// Mean-field steady state for real pump quadrature amplitudes `a_plus`,
/// `a_minus` >= 0.
///
/// In `SelfConsistent` mode the pair
/// `x = g^2 A_+^2 / (1 + nu y)^2`, `y = g^2 A_-^2 / (1 - nu x)^2`
/// (with `x = |C_+|^2`, `y = |C_-|^2`, `g = sqrt(2/gamma)`) is solved by
/// damped fixed-point iteration with a Newton fallback, relative tolerance
/// 1e-12, at most 200 iterations. Non-convergence reports `nu |C|^2`,
/// signaling proximity to the ponderomotive instability at `nu x -> 1`.
pub fn steady_state(
    params: &SystemParams,
    a_plus: f64,
    a_minus: f64,
    mode: SteadyStateMode,
) -> Result<MeanField> {
    if !(a_plus >= 0.0 && a_minus >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pump amplitudes must be non-negative, got ({a_plus}, {a_minus})"
        )));
    }
    params.validate()?;
    let nu = params.eta * params.eta / (params.gamma * params.gamma_m);
    let g = (2.0 / params.gamma).sqrt();

    if matches!(mode, SteadyStateMode::ZeroDrive) {
        return Ok(MeanField {
            c_plus: Complex64::new(g * a_plus, 0.0),
            c_minus: Complex64::new(g * a_minus, 0.0),
            d: Complex64::new(0.0, 0.0),
            nu,
        });
    }

    let gp2 = g * g * a_plus * a_plus;
    let gm2 = g * g * a_minus * a_minus;
    if nu == 0.0 || (a_plus == 0.0 || a_minus == 0.0) {
        // with either pump off the beat vanishes and the pair decouples
        let x = gp2 / (1.0 + nu * gm2).powi(2);
        let y = gm2 / (1.0 - nu * gp2).powi(2);
        let (x, y) = if a_minus == 0.0 {
            (gp2, 0.0)
        } else if a_plus == 0.0 {
            (0.0, gm2)
        } else {
            (x, y)
        };
        return finish_steady(params, nu, a_plus, a_minus, x, y);
    }

    let f_x = |y: f64| gp2 / (1.0 + nu * y).powi(2);
    let f_y = |x: f64| gm2 / (1.0 - nu * x).powi(2);

    let mut x = gp2;
    let mut y = gm2;
    let damping = 0.5;
    let mut converged = false;
    for _ in 0..STEADY_MAX_ITER {
        if nu * x >= 1.0 {
            return Err(Error::NonConvergence {
                iterations: STEADY_MAX_ITER,
                nu_c_sq: nu * x,
            });
        }
        let xn = (1.0 - damping) * x + damping * f_x(y);
        let yn = (1.0 - damping) * y + damping * f_y(xn.min(0.999_999 / nu));
        let dx = (xn - x).abs() / xn.max(f64::MIN_POSITIVE);
        let dy = (yn - y).abs() / yn.max(f64::MIN_POSITIVE);
        x = xn;
        y = yn;
        if dx < STEADY_TOL && dy < STEADY_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        // Newton on F1 = x (1 + nu y)^2 - g^2 A_+^2, F2 = y (1 - nu x)^2 - g^2 A_-^2
        for _ in 0..STEADY_MAX_ITER {
            let py = 1.0 + nu * y;
            let px = 1.0 - nu * x;
            let f1 = x * py * py - gp2;
            let f2 = y * px * px - gm2;
            let j11 = py * py;
            let j12 = 2.0 * nu * x * py;
            let j21 = -2.0 * nu * y * px;
            let j22 = px * px;
            let det = j11 * j22 - j12 * j21;
            if det.abs() < 1e-300 {
                return Err(Error::NonConvergence {
                    iterations: 2 * STEADY_MAX_ITER,
                    nu_c_sq: nu * x,
                });
            }
            let sx = (f1 * j22 - f2 * j12) / det;
            let sy = (f2 * j11 - f1 * j21) / det;
            x -= sx;
            y -= sy;
            if sx.abs() <= STEADY_TOL * x.abs() && sy.abs() <= STEADY_TOL * y.abs() {
                converged = true;
                break;
            }
        }
        if !converged || !(nu * x < 1.0) || x < 0.0 || y < 0.0 {
            return Err(Error::NonConvergence {
                iterations: 2 * STEADY_MAX_ITER,
                nu_c_sq: nu * x,
            });
        }
    }
    finish_steady(params, nu, a_plus, a_minus, x, y)
}

fn finish_steady(
    params: &SystemParams,
    nu: f64,
    a_plus: f64,
    a_minus: f64,
    x: f64,
    y: f64,
) -> Result<MeanField> {
    let g = (2.0 / params.gamma).sqrt();
    // C_+ = g A_+ / (1 + nu y), C_- = g A_- / (1 - nu x); real for real pumps
    let c_plus = g * a_plus / (1.0 + nu * y);
    let c_minus = g * a_minus / (1.0 - nu * x);
    let d = params.eta * c_plus * c_minus / params.gamma_m;
    Ok(MeanField {
        c_plus: Complex64::new(c_plus, 0.0),
        c_minus: Complex64::new(c_minus, 0.0),
        d: Complex64::new(d, 0.0),
        nu,
    })
}

/// Result of the polarization-based drive compensation.
#[derive(Debug, Clone, Copy)]
pub struct Compensation {
    /// Required auxiliary pump product E_+ E_-^*.
    pub pump_product: Complex64,
    /// Residual |gamma_m D| relative to |eta C_+ C_-^*| after compensation.
    pub residual_rel: f64,
}

/// Auxiliary pump product that zeroes the mean mechanical drive:
/// gamma_m D = eta C_+ C_-^* + eta_e E_+ E_-^* = 0.
pub fn compensation_pumps(
    params: &SystemParams,
    eta_e: f64,
    c_plus: Complex64,
    c_minus: Complex64,
) -> Result<Compensation> {
    if eta_e == 0.0 {
        return Err(Error::ZeroAuxiliaryCoupling);
    }
    let drive = params.eta * c_plus * c_minus.conj();
    let pump_product = -drive / eta_e;
    let residual = drive + eta_e * pump_product;
    let scale = drive.norm();
    let residual_rel = if scale == 0.0 {
        residual.norm()
    } else {
        residual.norm() / scale
    };
    Ok(Compensation {
        pump_product,
        residual_rel,
    })
}

/// Resonant signal force in normalized units.
///
/// `amplitude` is f_s0 = F_s0 / sqrt(2 hbar omega_m m) in 1/s; the slow
/// complex envelope during the window is f_s = (f_s0 / 2) e^{-i psi}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSignal {
    /// Normalized force amplitude f_s0, 1/s.
    pub amplitude: f64,
    /// Force phase psi_f, rad. psi = pi/2 puts the signal in the amplitude
    /// quadrature pair, psi = 0 in the phase quadrature pair.
    pub phase: f64,
    /// Duration of the force window, s.
    pub tau: f64,
}

impl ForceSignal {
    pub fn new(amplitude: f64, phase: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "force duration must be positive, got {tau}"
            )));
        }
        Ok(ForceSignal {
            amplitude,
            phase,
            tau,
        })
    }

    /// Detection bandwidth Delta Omega = 2 pi / tau.
    pub fn bandwidth(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.tau
    }

    /// Slow complex envelope f_s = (f_s0/2) e^{-i psi} inside the window.
    pub fn envelope(&self) -> Complex64 {
        0.5 * self.amplitude * Complex64::new(0.0, -self.phase).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn validate_passes_canonical_ordering() {
        let p = SystemParams {
            gamma: 100.0,
            gamma_m: 1.0,
            omega_m: 1e4,
            ..SystemParams::canonical()
        };
        let diags = p.validate().unwrap();
        assert!(diags.iter().all(|d| d.pass));
    }

    #[test]
    fn validate_warns_on_small_optical_separation() {
        let p = SystemParams {
            gamma: 2.0,
            gamma_m: 1.0,
            omega_m: 1e4,
            ..SystemParams::canonical()
        };
        let diags = p.validate().unwrap();
        let narrow = diags
            .iter()
            .find(|d| d.condition == RegimeCondition::MechanicalNarrow)
            .unwrap();
        assert!(!narrow.pass);
        assert!(diags
            .iter()
            .find(|d| d.condition == RegimeCondition::ResolvedSideband)
            .unwrap()
            .pass);
    }

    #[test]
    fn validate_warns_on_unresolved_sideband() {
        let p = SystemParams {
            gamma: 100.0,
            gamma_m: 1.0,
            omega_m: 50.0,
            ..SystemParams::canonical()
        };
        let diags = p.validate().unwrap();
        assert!(!diags
            .iter()
            .find(|d| d.condition == RegimeCondition::ResolvedSideband)
            .unwrap()
            .pass);
    }

    #[test]
    fn validate_rejects_nonpositive_rate() {
        let p = SystemParams {
            gamma: -1.0,
            ..SystemParams::canonical()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn zero_point_unit_forcing_values() {
        // m = 1 kg, omega_m = hbar/2 makes the radicand exactly 1
        assert_abs_diff_eq!(zero_point_amplitude(1.0, HBAR / 2.0).unwrap(), 1.0);
    }

    #[test]
    fn zero_point_scaling_law() {
        let x1 = zero_point_amplitude(1e-6, 2e5).unwrap();
        let x2 = zero_point_amplitude(4e-6, 2e5).unwrap();
        assert_relative_eq!(x2, x1 / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_point_high_precision_value() {
        // frozen from an independent 30-digit evaluation of sqrt(hbar/(2 m omega_m))
        let x0 = zero_point_amplitude(1e-9, 2.0 * std::f64::consts::PI * 1e6).unwrap();
        assert_relative_eq!(x0, 9.160_794_660_502_730_2e-17, max_relative = 1e-15);
    }

    #[test]
    fn coupling_ratio_one_and_zero() {
        assert_relative_eq!(coupling_eta(5.0e14, 1.0, 1.0).unwrap(), 5.0e14);
        assert_abs_diff_eq!(coupling_eta(5.0e14, 1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            coupling_eta(1.77e15, 1.0, 1e-15).unwrap(),
            1.77,
            max_relative = 1e-15
        );
        assert!(coupling_eta(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn xi_identity_and_quarter_turn() {
        assert_abs_diff_eq!(xi_factor(1.0, 0.0).re, 1.0);
        assert_abs_diff_eq!(xi_factor(1.0, 0.0).im, 0.0);
        let x = xi_factor(1.0, 1.0); // (1+i)/(1-i) = i
        assert_abs_diff_eq!(x.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x.im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn probe_power_unit_substitution() {
        // gamma = 1, eta C = 1/2, Omega = 0 -> K = 1
        let p = SystemParams {
            gamma: 1.0,
            eta: 1.0,
            pump_c: 0.5,
            ..SystemParams::canonical()
        };
        assert_abs_diff_eq!(p.probe_power(0.0), 1.0);
        // Lorentzian half value at Omega = gamma
        assert_relative_eq!(p.probe_power(1.0), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn probe_power_canonical_grid_frozen() {
        // canonical pump: K(0) = gamma_m; values frozen from an independent
        // evaluation of 4 gamma (eta C)^2 / (gamma^2 + Omega^2)
        let p = SystemParams::canonical();
        let gm = p.gamma_m;
        let cases = [
            (0.0, 6.283_185_307_179_587_6e2),
            (gm, 6.282_557_051_474_440_2e2),
            (10.0 * gm, 6.220_975_551_662_958_2e2),
            (p.gamma, 3.141_592_653_589_793_8e2),
            (2.0 * p.gamma, 1.256_637_061_435_917_4e2),
        ];
        for (w, expect) in cases {
            assert_relative_eq!(p.probe_power(w), expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn steady_state_zero_drive_mode() {
        let p = SystemParams::canonical();
        let a = p.pump_amplitude();
        let mf = steady_state(&p, a, a, SteadyStateMode::ZeroDrive).unwrap();
        assert_relative_eq!(mf.c_plus.re, p.pump_c, max_relative = 1e-14);
        assert_relative_eq!(mf.c_minus.re, p.pump_c, max_relative = 1e-14);
        assert_abs_diff_eq!(mf.d.norm(), 0.0);
        assert_relative_eq!(
            mf.nu,
            p.eta * p.eta / (p.gamma * p.gamma_m),
            max_relative = 1e-15
        );
    }

    #[test]
    fn steady_state_nu_zero_reproduces_linear_amplitudes() {
        let mut p = SystemParams::canonical();
        p.eta = 0.0;
        let g = (2.0 / p.gamma).sqrt();
        let mf = steady_state(&p, 3.0, 2.0, SteadyStateMode::SelfConsistent).unwrap();
        assert_relative_eq!(mf.c_plus.re, g * 3.0, max_relative = 1e-14);
        assert_relative_eq!(mf.c_minus.re, g * 2.0, max_relative = 1e-14);
        assert_abs_diff_eq!(mf.d.norm(), 0.0);
    }

    #[test]
    fn steady_state_single_pump() {
        let p = SystemParams::canonical();
        let g = (2.0 / p.gamma).sqrt();
        let mf = steady_state(&p, 5.0, 0.0, SteadyStateMode::SelfConsistent).unwrap();
        assert_relative_eq!(mf.c_plus.re, g * 5.0, max_relative = 1e-12);
        assert_abs_diff_eq!(mf.c_minus.norm(), 0.0);
        assert_abs_diff_eq!(mf.d.norm(), 0.0);
    }

    #[test]
    fn steady_state_matches_dense_bracketing_oracle() {
        // nu g^2 A^2 = 0.01 regime; oracle: dense scan + bisection on the
        // single-variable residual for x = |C_+|^2 after eliminating y.
        let mut p = SystemParams::canonical();
        p.eta = 40.0;
        let nu = p.eta * p.eta / (p.gamma * p.gamma_m);
        let g2 = 2.0 / p.gamma;
        let a = (0.01 / (nu * g2)).sqrt(); // nu g^2 A^2 = 0.01
        let gp2 = g2 * a * a;
        let gm2 = gp2;
        let resid = |x: f64| {
            let y = gm2 / (1.0 - nu * x).powi(2);
            x * (1.0 + nu * y).powi(2) - gp2
        };
        // bracket by dense scan
        let n = 20_000;
        let hi = 0.999 / nu;
        let mut xlo = 0.0;
        let mut xhi = hi;
        let mut prev = resid(0.0);
        for i in 1..=n {
            let x = hi * i as f64 / n as f64;
            let r = resid(x);
            if prev <= 0.0 && r > 0.0 {
                xlo = hi * (i - 1) as f64 / n as f64;
                xhi = x;
                break;
            }
            prev = r;
        }
        for _ in 0..200 {
            let mid = 0.5 * (xlo + xhi);
            if resid(mid) > 0.0 {
                xhi = mid;
            } else {
                xlo = mid;
            }
        }
        let x_oracle = 0.5 * (xlo + xhi);
        let mf = steady_state(&p, a, a, SteadyStateMode::SelfConsistent).unwrap();
        let x_solver = mf.c_plus.norm_sqr();
        assert_relative_eq!(x_solver, x_oracle, max_relative = 1e-9);
        // consistency: plugging back into the defining pair
        let y_solver = mf.c_minus.norm_sqr();
        assert_relative_eq!(
            x_solver * (1.0 + nu * y_solver).powi(2),
            gp2,
            max_relative = 1e-11
        );
    }

    #[test]
    fn compensation_zero_beat() {
        let p = SystemParams::canonical();
        let c = compensation_pumps(&p, 1.0, Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0))
            .unwrap();
        assert_abs_diff_eq!(c.pump_product.norm(), 0.0);
    }

    #[test]
    fn compensation_equal_couplings() {
        let p = SystemParams::canonical();
        let cp = Complex64::new(3.0, 0.5);
        let cm = Complex64::new(2.0, -0.25);
        let c = compensation_pumps(&p, p.eta, cp, cm).unwrap();
        let expect = -cp * cm.conj();
        assert_relative_eq!(c.pump_product.re, expect.re, max_relative = 1e-14);
        assert_relative_eq!(c.pump_product.im, expect.im, max_relative = 1e-14);
        assert!(c.residual_rel <= 1e-12);
    }

    #[test]
    fn compensation_weak_coupling_scales_product() {
        let p = SystemParams::canonical();
        let cp = Complex64::new(3.0, 0.0);
        let cm = Complex64::new(2.0, 0.0);
        let c1 = compensation_pumps(&p, p.eta, cp, cm).unwrap();
        let c2 = compensation_pumps(&p, p.eta / 100.0, cp, cm).unwrap();
        assert_relative_eq!(
            c2.pump_product.norm(),
            100.0 * c1.pump_product.norm(),
            max_relative = 1e-12
        );
        assert!(c2.residual_rel <= 1e-12);
        assert!(compensation_pumps(&p, 0.0, cp, cm).is_err());
    }

    #[test]
    fn mode_frequencies_synchronized() {
        let m = ModeFrequencies::synchronized(1e15, 2.0 * std::f64::consts::PI * 1e6);
        assert_relative_eq!(
            m.splitting(),
            2.0 * std::f64::consts::PI * 1e6,
            max_relative = 1e-9
        );
        assert!(m.is_synchronized(2.0 * std::f64::consts::PI * 1e6, 1e-9));
    }

    #[test]
    fn occupation_is_bose() {
        // hbar omega / kB T = ln 2 -> n = 1/(2-1) = 1
        let omega = 2.0 * std::f64::consts::PI * 1e6;
        let t = HBAR * omega / (K_BOLTZMANN * std::f64::consts::LN_2);
        assert_relative_eq!(
            occupation_from_temperature(omega, t).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(occupation_from_temperature(omega, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn force_signal_envelope_and_bandwidth() {
        let f = ForceSignal::new(2.0, std::f64::consts::FRAC_PI_2, 0.5).unwrap();
        assert_relative_eq!(f.bandwidth(), 4.0 * std::f64::consts::PI, max_relative = 1e-15);
        let e = f.envelope();
        // (f_s0/2) e^{-i pi/2} = -i
        assert_abs_diff_eq!(e.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.im, -1.0, epsilon = 1e-15);
        assert!(ForceSignal::new(1.0, 0.0, 0.0).is_err());
    }
}
