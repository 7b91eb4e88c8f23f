//! Semiclassical time-domain integration of the slow-amplitude Langevin
//! equations, with signal injection, spectral estimation, strategy
//! post-processing, and matched-filter force detection.
//!
//! Operator noises are replaced by complex Gaussian c-number processes whose
//! symmetrized correlators match the quantum ones; for linear dynamics the
//! estimated symmetrized spectra then coincide with the quantum predictions.
//! Each input quadrature is an independent white noise of single-sided PSD S
//! (1 for vacuum, `2 n_T + 1` for the thermal force), discretized with
//! per-step variance S / (2 dt).
//!
//! The integrator is Euler-Maruyama: the system is linear with additive
//! noise, so strong first-order accuracy is reached, and in-band coefficient
//! biases are O(gamma dt).

pub mod detect;
pub mod strategy;
pub mod welch;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::params::{ForceSignal, SystemParams};
use crate::Result;

pub use detect::{detection_ensemble, detect_force, DetectionReport};
pub use strategy::{measure_strategy, run_montecarlo, CombinationKernel, McConfig, McResult};
pub use welch::{periodogram, welch_psd, Psd, Window};

/// A resonant force injected during `[start, start + signal.tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceInjection {
    pub signal: ForceSignal,
    /// Window start time, s.
    pub start: f64,
}

/// Which full-rate output series the bundle keeps (decimated series are
/// always recorded). Full-rate storage is what strategy post-processing and
/// detection operate on; long production runs use the streaming estimator
/// instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoreOutputs {
    #[default]
    None,
    AmplitudePair,
    PhasePair,
    All,
}

/// Time-domain simulation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Integration step, s. Default 0.005/gamma (0.005/omega_m with
    /// sidebands enabled).
    pub dt: Option<f64>,
    /// Simulated time, s.
    pub duration: f64,
    /// RNG seed; identical (params, config, seed) gives a bit-identical
    /// bundle.
    pub seed: u64,
    /// Keep every `decimate`-th sample in the bundle series.
    pub decimate: usize,
    /// Disable to integrate the deterministic part only.
    pub noise_on: bool,
    pub force: Option<ForceInjection>,
    /// Integrate the detuned sideband fields as well (needs the smaller step).
    pub include_sidebands: bool,
    pub store_outputs: StoreOutputs,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: None,
            duration: 1.0,
            seed: 1,
            decimate: 64,
            noise_on: true,
            force: None,
            include_sidebands: false,
            store_outputs: StoreOutputs::None,
        }
    }
}

/// Non-fatal conditions noticed by [`validate_config`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigWarning(pub String);

impl SimConfig {
    pub fn effective_dt(&self, params: &SystemParams) -> f64 {
        self.dt.unwrap_or(if self.include_sidebands {
            0.005 / params.omega_m
        } else {
            0.005 / params.gamma
        })
    }
}

/// Hard-checks the step-size invariants, warns about short records.
pub fn validate_config(params: &SystemParams, config: &SimConfig) -> Result<Vec<ConfigWarning>> {
    params.validate()?;
    let dt = config.effective_dt(params);
    if !(dt > 0.0) || !(config.duration > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "dt and duration must be positive, got ({dt}, {})",
            config.duration
        )));
    }
    if dt > 0.01 / params.gamma {
        return Err(Error::InvalidConfig(format!(
            "dt = {dt:.3e} exceeds 0.01/gamma = {:.3e}",
            0.01 / params.gamma
        )));
    }
    if config.include_sidebands && dt > 0.01 / params.omega_m {
        return Err(Error::InvalidConfig(format!(
            "sideband integration needs dt <= 0.01/omega_m = {:.3e}, got {dt:.3e}",
            0.01 / params.omega_m
        )));
    }
    if config.decimate == 0 {
        return Err(Error::InvalidConfig("decimate must be >= 1".into()));
    }
    let mut warnings = Vec::new();
    if config.duration < 50.0 / params.gamma_m {
        warnings.push(ConfigWarning(format!(
            "duration {} s is below 50/gamma_m = {:.3e} s; the mechanical line \
             will not be spectrally resolved",
            config.duration,
            50.0 / params.gamma_m
        )));
    }
    Ok(warnings)
}

/// Full-rate output quadrature series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FullOutputs {
    pub beta_amp_plus: Vec<f64>,
    pub beta_amp_minus: Vec<f64>,
    pub beta_phase_plus: Vec<f64>,
    pub beta_phase_minus: Vec<f64>,
}

/// Sampled slow amplitudes and output quadratures with run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesBundle {
    pub dt: f64,
    pub decimate: usize,
    pub seed: u64,
    pub params_hash: u64,
    pub force: Option<ForceInjection>,
    /// Decimated sample times, s.
    pub times: Vec<f64>,
    /// Decimated intracavity and mechanical slow amplitudes.
    pub c_plus: Vec<Complex64>,
    pub c_minus: Vec<Complex64>,
    pub d: Vec<Complex64>,
    /// Decimated sideband slow amplitudes (empty unless enabled).
    pub c_tilde_plus: Vec<Complex64>,
    pub c_tilde_minus: Vec<Complex64>,
    /// Decimated output quadrature series.
    pub beta_amp_plus: Vec<f64>,
    pub beta_amp_minus: Vec<f64>,
    pub beta_phase_plus: Vec<f64>,
    pub beta_phase_minus: Vec<f64>,
    /// Full-rate output series when requested.
    pub full: Option<FullOutputs>,
}

impl TimeSeriesBundle {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Consistent lengths and no NaN anywhere.
    pub fn check(&self) -> Result<()> {
        let n = self.times.len();
        let lengths_ok = self.c_plus.len() == n
            && self.c_minus.len() == n
            && self.d.len() == n
            && self.beta_amp_plus.len() == n
            && self.beta_amp_minus.len() == n
            && self.beta_phase_plus.len() == n
            && self.beta_phase_minus.len() == n;
        if !lengths_ok {
            return Err(Error::InvalidConfig("bundle series lengths differ".into()));
        }
        let complex_ok = self
            .c_plus
            .iter()
            .chain(&self.c_minus)
            .chain(&self.d)
            .chain(&self.c_tilde_plus)
            .chain(&self.c_tilde_minus)
            .all(|z| z.re.is_finite() && z.im.is_finite());
        let real_ok = self
            .beta_amp_plus
            .iter()
            .chain(&self.beta_amp_minus)
            .chain(&self.beta_phase_plus)
            .chain(&self.beta_phase_minus)
            .all(|v| v.is_finite());
        if !(complex_ok && real_ok) {
            return Err(Error::InvalidConfig("bundle contains non-finite samples".into()));
        }
        Ok(())
    }
}

/// One integration step's outputs handed to sinks.
pub(crate) struct StepOutputs {
    pub beta_amp_plus: f64,
    pub beta_amp_minus: f64,
    pub beta_phase_plus: f64,
    pub beta_phase_minus: f64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub d: Complex64,
    pub c_tilde_plus: Complex64,
    pub c_tilde_minus: Complex64,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hash of the physically relevant parameter fields (bundle provenance).
pub fn params_hash(params: &SystemParams) -> u64 {
    let mut bytes = Vec::with_capacity(8 * 6);
    for v in [
        params.gamma,
        params.gamma_m,
        params.omega_m,
        params.eta,
        params.pump_c,
        params.n_thermal,
        if params.thermal_on { 1.0 } else { 0.0 },
    ] {
        bytes.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fnv1a(&bytes)
}

/// Euler-Maruyama integration of the linearized slow-amplitude equations
/// (zero-drive mean field), calling `sink` with every step's outputs.
///
/// Per step the noise draws are ordered: a_+ (re, im), a_- (re, im), q
/// (re, im, only with the thermal channel on), then sideband inputs
/// (re, im each) when enabled. Outputs use the pre-update state together
/// with the step's fresh input noise, matching the causal structure of the
/// input-output relation.
pub(crate) fn integrate(
    params: &SystemParams,
    config: &SimConfig,
    mut sink: impl FnMut(usize, &StepOutputs),
) -> Result<()> {
    validate_config(params, config)?;
    let dt = config.effective_dt(params);
    let n_steps = (config.duration / dt).round() as usize;
    if n_steps == 0 {
        return Err(Error::InvalidConfig("duration shorter than one step".into()));
    }

    let gamma = params.gamma;
    let gamma_m = params.gamma_m;
    let ec = params.eta * params.pump_c;
    let s2g = (2.0 * gamma).sqrt();
    let s2gm = (2.0 * gamma_m).sqrt();
    let thermal_psd = params.thermal_psd();

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let normal = StandardNormal;
    // complex noise z = (x + iy)/sqrt2 with per-quadrature std sqrt(S/(2dt))
    // gives component std sqrt(S)/(2 sqrt(dt))
    let sig_vac = if config.noise_on {
        1.0 / (2.0 * dt.sqrt())
    } else {
        0.0
    };
    let sig_th = if config.noise_on {
        (thermal_psd).sqrt() / (2.0 * dt.sqrt())
    } else {
        0.0
    };
    let draw_thermal = config.noise_on && thermal_psd > 0.0;

    let force_env = config.force.map(|inj| {
        let i_fs = Complex64::new(0.0, 1.0) * inj.signal.envelope();
        let n0 = (inj.start / dt).round() as usize;
        let n1 = ((inj.start + inj.signal.tau) / dt).round() as usize;
        (i_fs, n0, n1)
    });

    // instability guard: 1e6 x the steady fluctuation scale
    let k0 = params.probe_power_dc();
    let scale = 1.0
        + (k0 / gamma_m.max(f64::MIN_POSITIVE)).sqrt()
        + thermal_psd.sqrt()
        + config
            .force
            .map(|inj| inj.signal.amplitude * (1.0 / gamma_m + 1.0 / gamma))
            .unwrap_or(0.0);
    let threshold = 1e6 * scale;

    let mut c_p = Complex64::new(0.0, 0.0);
    let mut c_m = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let mut ct_p = Complex64::new(0.0, 0.0);
    let mut ct_m = Complex64::new(0.0, 0.0);
    let rot_p = Complex64::new(gamma, 2.0 * params.omega_m); // decay of c~_+
    let rot_m = Complex64::new(gamma, -2.0 * params.omega_m); // decay of c~_-

    let draw = |rng: &mut ChaCha12Rng, sig: f64| -> Complex64 {
        let x: f64 = normal.sample(rng);
        let y: f64 = normal.sample(rng);
        Complex64::new(sig * x, sig * y)
    };

    for step in 0..n_steps {
        let a_p = draw(&mut rng, sig_vac);
        let a_m = draw(&mut rng, sig_vac);
        let q = if draw_thermal {
            draw(&mut rng, sig_th)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let (at_p, at_m) = if config.include_sidebands {
            (draw(&mut rng, sig_vac), draw(&mut rng, sig_vac))
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        };

        // input-output with the pre-update state
        let b_p = -a_p + s2g * c_p;
        let b_m = -a_m + s2g * c_m;
        let out = StepOutputs {
            beta_amp_plus: b_p.re + b_m.re,
            beta_amp_minus: b_p.re - b_m.re,
            beta_phase_plus: b_p.im + b_m.im,
            beta_phase_minus: b_p.im - b_m.im,
            c_plus: c_p,
            c_minus: c_m,
            d,
            c_tilde_plus: ct_p,
            c_tilde_minus: ct_m,
        };
        sink(step, &out);

        let mut d_dot = -gamma_m * d + ec * (c_p + c_m.conj());
        if let Some((i_fs, n0, n1)) = force_env {
            if step >= n0 && step < n1 {
                d_dot += i_fs;
            }
        }
        if config.include_sidebands {
            d_dot += -ec * (ct_m + ct_p.conj());
        }
        let c_p_next = c_p + dt * (-gamma * c_p - ec * d) + dt * s2g * a_p;
        let c_m_next = c_m + dt * (-gamma * c_m + ec * d.conj()) + dt * s2g * a_m;
        let d_next = d + dt * d_dot + dt * s2gm * q;
        if config.include_sidebands {
            let ct_p_next = ct_p + dt * (-rot_p * ct_p - ec * d.conj()) + dt * s2g * at_p;
            let ct_m_next = ct_m + dt * (-rot_m * ct_m + ec * d) + dt * s2g * at_m;
            ct_p = ct_p_next;
            ct_m = ct_m_next;
        }
        c_p = c_p_next;
        c_m = c_m_next;
        d = d_next;

        if step % 4096 == 0 {
            let worst = c_p.norm().max(c_m.norm()).max(d.norm());
            if !worst.is_finite() || worst > threshold {
                let state = if !c_p.norm().is_finite() || c_p.norm() >= worst {
                    "c_plus"
                } else if c_m.norm() >= worst {
                    "c_minus"
                } else {
                    "d"
                };
                return Err(Error::Instability {
                    time: step as f64 * dt,
                    state,
                    magnitude: worst,
                    threshold,
                });
            }
        }
    }
    Ok(())
}

/// Record sink shared by [`simulate`] and the streaming estimator.
pub(crate) struct Recorder {
    bundle: TimeSeriesBundle,
    decimate: usize,
    dt: f64,
    keep_amp: bool,
    keep_phase: bool,
    include_sb: bool,
}

impl Recorder {
    pub(crate) fn new(params: &SystemParams, config: &SimConfig, dt: f64) -> Self {
        let store = config.store_outputs;
        let bundle = TimeSeriesBundle {
            dt,
            decimate: config.decimate,
            seed: config.seed,
            params_hash: params_hash(params),
            force: config.force,
            times: Vec::new(),
            c_plus: Vec::new(),
            c_minus: Vec::new(),
            d: Vec::new(),
            c_tilde_plus: Vec::new(),
            c_tilde_minus: Vec::new(),
            beta_amp_plus: Vec::new(),
            beta_amp_minus: Vec::new(),
            beta_phase_plus: Vec::new(),
            beta_phase_minus: Vec::new(),
            full: if store == StoreOutputs::None {
                None
            } else {
                Some(FullOutputs::default())
            },
        };
        Recorder {
            bundle,
            decimate: config.decimate.max(1),
            dt,
            keep_amp: matches!(store, StoreOutputs::AmplitudePair | StoreOutputs::All),
            keep_phase: matches!(store, StoreOutputs::PhasePair | StoreOutputs::All),
            include_sb: config.include_sidebands,
        }
    }

    pub(crate) fn push(&mut self, step: usize, out: &StepOutputs) {
        if step % self.decimate == 0 {
            let b = &mut self.bundle;
            b.times.push(step as f64 * self.dt);
            b.c_plus.push(out.c_plus);
            b.c_minus.push(out.c_minus);
            b.d.push(out.d);
            b.beta_amp_plus.push(out.beta_amp_plus);
            b.beta_amp_minus.push(out.beta_amp_minus);
            b.beta_phase_plus.push(out.beta_phase_plus);
            b.beta_phase_minus.push(out.beta_phase_minus);
            if self.include_sb {
                b.c_tilde_plus.push(out.c_tilde_plus);
                b.c_tilde_minus.push(out.c_tilde_minus);
            }
        }
        if let Some(full) = self.bundle.full.as_mut() {
            if self.keep_amp {
                full.beta_amp_plus.push(out.beta_amp_plus);
                full.beta_amp_minus.push(out.beta_amp_minus);
            }
            if self.keep_phase {
                full.beta_phase_plus.push(out.beta_phase_plus);
                full.beta_phase_minus.push(out.beta_phase_minus);
            }
        }
    }

    pub(crate) fn finish(self) -> Result<TimeSeriesBundle> {
        self.bundle.check()?;
        Ok(self.bundle)
    }
}

/// Integrate and record a [`TimeSeriesBundle`].
pub fn simulate(params: &SystemParams, config: &SimConfig) -> Result<TimeSeriesBundle> {
    let dt = config.effective_dt(params);
    let mut recorder = Recorder::new(params, config, dt);
    integrate(params, config, |step, out| recorder.push(step, out))?;
    recorder.finish()
}
