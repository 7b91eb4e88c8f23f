use thiserror::Error;

/// Errors produced by the model, the oracle solver, and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("steady-state iteration did not converge after {iterations} iterations \
             (nu*|C|^2 = {nu_c_sq:.6e}, near ponderomotive instability)")]
    NonConvergence { iterations: usize, nu_c_sq: f64 },

    #[error("compensation impossible: auxiliary coupling eta_e is zero")]
    ZeroAuxiliaryCoupling,

    #[error("probe power K is zero: {0}")]
    ZeroProbePower(String),

    #[error("linear system is singular at Omega = {omega:.6e} rad/s ({context})")]
    SingularSystem { omega: f64, context: String },

    #[error("transfer rows evaluated at different frequencies: {0:.6e} vs {1:.6e}")]
    FrequencyMismatch(f64, f64),

    #[error("force referral impossible: zero signal coefficient in output row")]
    ZeroSignalCoefficient,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("simulation unstable at t = {time:.6e} s: |{state}| = {magnitude:.3e} \
             exceeds {threshold:.3e}")]
    Instability {
        time: f64,
        state: &'static str,
        magnitude: f64,
        threshold: f64,
    },

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error("bundle is missing required channel data: {0}")]
    MissingChannel(String),
}
