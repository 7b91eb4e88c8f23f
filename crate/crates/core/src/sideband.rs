//! Parasitic sidebands at omega_+- -/+ 2 omega_m: their residual back action,
//! the corrected force budgets, the optimal probe power, and the output-filter
//! compensation.
//!
//! The sideband fields see the cavity detuned by 2 omega_m, so their
//! intracavity response carries the denominators `gamma +- 2i omega_m - i Omega`.
//! Two of their sum/difference quadratures (`g~_{a+}`, `g~_{phi-}`) drive the
//! mechanics exactly like the main back-action channel but carry no mechanical
//! information themselves, which is what makes partial compensation by output
//! filtering possible.

use num_complex::Complex64;

use crate::channels::{Channel, TransferRow};
use crate::error::Error;
use crate::minimize::{minimize_log10, Minimum};
use crate::params::{xi_factor, SystemParams};
use crate::spectra::{combine_back_action_free, transfer_amplitude};
use crate::Result;

/// Whether the sideband quadratures keep the exact detuned denominators or
/// the leading resolved-sideband form sqrt(gamma)/(2 omega_m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GTildeForm {
    /// Exact detuned response; what the oracle integrates.
    #[default]
    Exact,
    /// Leading order in gamma/omega_m; reproduces the closed-form budgets
    /// verbatim.
    Approximate,
}

/// Output-filter compensation of the sideband residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub enabled: bool,
}

impl FilterSpec {
    /// Residual fraction R = Omega / (2 omega_m) of the parasitic back action
    /// left after measuring the optimal sideband output quadratures.
    pub fn reduction_factor(params: &SystemParams, omega: f64) -> f64 {
        omega.abs() / (2.0 * params.omega_m)
    }
}

/// Intracavity response of the sideband fields:
/// `c~_+(Omega) (gamma + 2i omega_m - i Omega) = sqrt(2 gamma) a~_+(Omega) - eta C d^dag(-Omega)`
/// and the mirror equation for `c~_-` with `+ eta C d(Omega)`.
///
/// The mechanical drive is kept symbolic (coefficient fields) because `c~_+-`
/// are not quadratures; assembling them into `g~` quadrature rows eliminates
/// the mechanical terms exactly.
#[derive(Debug, Clone, Copy)]
pub struct TildeIntracavity {
    /// gamma + 2i omega_m - i Omega.
    pub denom_plus: Complex64,
    /// gamma - 2i omega_m - i Omega.
    pub denom_minus: Complex64,
    /// Coefficient of a~_+(Omega) in c~_+.
    pub input_plus: Complex64,
    /// Coefficient of a~_-(Omega) in c~_-.
    pub input_minus: Complex64,
    /// Coefficient of d^dag(-Omega) in c~_+.
    pub mech_dag_plus: Complex64,
    /// Coefficient of d(Omega) in c~_-.
    pub mech_minus: Complex64,
}

pub fn tilde_intracavity(params: &SystemParams, omega: f64) -> TildeIntracavity {
    let dp = Complex64::new(params.gamma, 2.0 * params.omega_m - omega);
    let dm = Complex64::new(params.gamma, -2.0 * params.omega_m - omega);
    let s2g = (2.0 * params.gamma).sqrt();
    let ec = params.eta * params.pump_c;
    TildeIntracavity {
        denom_plus: dp,
        denom_minus: dm,
        input_plus: s2g / dp,
        input_minus: s2g / dm,
        mech_dag_plus: -ec / dp,
        mech_minus: ec / dm,
    }
}

/// The sideband quadrature combinations that drive the mechanics.
///
/// Returns rows for `g~_{a+}` and `g~_{phi-}` over the sideband input
/// channels. Both carry exactly zero coefficient on every mechanical, thermal
/// and signal channel. In `Exact` form
///
/// ```text
/// g~_{a+}   = sqrt(2 gamma) [ (gamma - i Omega) at_{a+} + 2 omega_m at_{phi-} ] / D
/// g~_{phi-} = sqrt(2 gamma) [ -2 omega_m at_{a+} + (gamma - i Omega) at_{phi-} ] / D
/// D = (gamma - i Omega)^2 + 4 omega_m^2
/// ```
///
/// and in `Approximate` form only the `2 omega_m / D ~ 1/(2 omega_m)` pieces
/// survive.
pub fn tilde_g_rows(
    params: &SystemParams,
    omega: f64,
    form: GTildeForm,
) -> (TransferRow, TransferRow) {
    let s2g = (2.0 * params.gamma).sqrt();
    let mut g_a = TransferRow::zeroed(omega);
    let mut g_phi = TransferRow::zeroed(omega);
    match form {
        GTildeForm::Exact => {
            let cav = Complex64::new(params.gamma, -omega);
            let d = cav * cav + 4.0 * params.omega_m * params.omega_m;
            g_a.set(Channel::SbAmpPlus, s2g * cav / d);
            g_a.set(Channel::SbPhaseMinus, s2g * 2.0 * params.omega_m / d);
            g_phi.set(Channel::SbAmpPlus, -s2g * 2.0 * params.omega_m / d);
            g_phi.set(Channel::SbPhaseMinus, s2g * cav / d);
        }
        GTildeForm::Approximate => {
            let w = Complex64::new(s2g / (2.0 * params.omega_m), 0.0);
            g_a.set(Channel::SbPhaseMinus, w);
            g_phi.set(Channel::SbAmpPlus, -w);
        }
    }
    (g_a, g_phi)
}

/// Weight multiplying the `g~_{a+}` row inside the combined output:
/// `xi K (gamma - i Omega) / (sqrt(2 gamma) (gamma_m - i Omega))`.
fn tilde_weight(params: &SystemParams, omega: f64) -> Complex64 {
    let xi = xi_factor(params.gamma, omega);
    let k = params.probe_power(omega);
    xi * k * Complex64::new(params.gamma, -omega)
        / ((2.0 * params.gamma).sqrt() * Complex64::new(params.gamma_m, -omega))
}

/// Back-action-free combination including the parasitic-sideband residual.
///
/// The main `alpha_{a+}` back-action coefficient is exactly zero; the
/// residual enters through the `g~_{a+}` quadrature with the weight above.
pub fn beta_comb_with_sidebands(
    params: &SystemParams,
    omega: f64,
    form: GTildeForm,
) -> Result<TransferRow> {
    let (plus, minus) = transfer_amplitude(params, omega);
    let comb = combine_back_action_free(&plus, &minus)?;
    let (g_a, _) = tilde_g_rows(params, omega, form);
    comb.add_scaled(&g_a, tilde_weight(params, omega))
}

/// Force budget with the sideband residual included:
/// `2 gamma_m (2 n_T + 1) + (gamma_m^2 + Omega^2)/K + K (gamma^2 + Omega^2)/(4 omega_m^2)`
/// in `Approximate` form; the `Exact` form referres the full combined row.
pub fn force_psd_with_sidebands(
    params: &SystemParams,
    omega: f64,
    form: GTildeForm,
) -> Result<f64> {
    let k = params.probe_power(omega);
    if k == 0.0 {
        return Err(Error::ZeroProbePower(
            "sideband-corrected force PSD diverges at K = 0".into(),
        ));
    }
    match form {
        GTildeForm::Approximate => {
            let shot = (params.gamma_m * params.gamma_m + omega * omega) / k;
            let residual = k * (params.gamma * params.gamma + omega * omega)
                / (4.0 * params.omega_m * params.omega_m);
            Ok(2.0 * params.gamma_m * params.thermal_psd() + shot + residual)
        }
        GTildeForm::Exact => {
            let row = beta_comb_with_sidebands(params, omega, GTildeForm::Exact)?;
            row.force_referred_psd(&crate::channels::NoiseModel::from_params(params))
        }
    }
}

/// Probe power that minimizes the sideband-corrected budget:
/// `K_opt = 2 omega_m sqrt((gamma_m^2 + Omega^2)/(gamma^2 + Omega^2))`.
///
/// Exceeds the SQL power `sqrt(gamma_m^2 + Omega^2)` by `2 omega_m /
/// sqrt(gamma^2 + Omega^2) >> 1` in the resolved-sideband regime.
pub fn optimal_power_with_sidebands(params: &SystemParams, omega: f64) -> f64 {
    2.0 * params.omega_m
        * ((params.gamma_m * params.gamma_m + omega * omega)
            / (params.gamma * params.gamma + omega * omega))
            .sqrt()
}

/// Unimodular quadrature phase of the output filter:
/// `e^{i phi} = sqrt((gamma + 2i omega_m)/(gamma - 2i omega_m))`.
pub fn filter_phase(params: &SystemParams) -> Complex64 {
    (Complex64::new(params.gamma, 2.0 * params.omega_m)
        / Complex64::new(params.gamma, -2.0 * params.omega_m))
    .sqrt()
}

/// Combined row with the sideband coefficients reduced by the filter factor
/// R = Omega/(2 omega_m).
pub fn filtered_row(params: &SystemParams, omega: f64, form: GTildeForm) -> Result<TransferRow> {
    let mut row = beta_comb_with_sidebands(params, omega, form)?;
    let r = FilterSpec::reduction_factor(params, omega);
    row.scale_channels(Channel::is_sideband, Complex64::new(r, 0.0));
    Ok(row)
}

/// Force budget after filtered-sideband compensation.
///
/// For `gamma_m = 0` (the regime in which the closed form is stated) this is
/// `Omega^2/K + K gamma^2 Omega^2 / (16 omega_m^4)`; otherwise it falls back
/// to referring the general filtered row (approximate sideband form) plus the
/// thermal term.
pub fn force_psd_filtered(params: &SystemParams, omega: f64) -> Result<f64> {
    let k = params.probe_power(omega);
    if k == 0.0 {
        return Err(Error::ZeroProbePower(
            "filtered force PSD diverges at K = 0".into(),
        ));
    }
    if params.gamma_m == 0.0 {
        let g2 = params.gamma * params.gamma;
        let wm4 = params.omega_m.powi(4);
        return Ok(omega * omega / k + k * g2 * omega * omega / (16.0 * wm4));
    }
    let row = filtered_row(params, omega, GTildeForm::Approximate)?;
    row.force_referred_psd(&crate::channels::NoiseModel::from_params(params))
}

/// Minimize a force budget over the probe power at fixed frequency.
///
/// Golden-section on log10 K over [1e-6, 1e6] x K_SQL with parabolic
/// refinement; `budget` receives params re-pinned so that K(omega) equals the
/// trial power.
pub fn minimize_over_power(
    params: &SystemParams,
    omega: f64,
    budget: impl Fn(&SystemParams, f64) -> Result<f64>,
) -> Result<Minimum> {
    let ksql = params.probe_power_sql(omega);
    let mut scratch = params.clone();
    if scratch.eta == 0.0 {
        scratch.eta = 1.0;
    }
    let eval = |k: f64| {
        let mut p = scratch.clone();
        p.set_power_at(omega, k);
        budget(&p, omega).unwrap_or(f64::INFINITY)
    };
    let m = minimize_log10(eval, 1e-6 * ksql, 1e6 * ksql, 1e-10);
    if !m.value.is_finite() {
        return Err(Error::ZeroProbePower(
            "budget not finite anywhere in the power bracket".into(),
        ));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::force_psd_combined;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn tilde_intracavity_decoupled_at_zero_coupling() {
        let mut p = SystemParams::canonical();
        p.eta = 0.0;
        let t = tilde_intracavity(&p, 0.3 * p.gamma);
        assert_abs_diff_eq!(t.mech_dag_plus.norm(), 0.0);
        assert_abs_diff_eq!(t.mech_minus.norm(), 0.0);
        let expect_p = (2.0 * p.gamma).sqrt() / t.denom_plus;
        assert_abs_diff_eq!((t.input_plus - expect_p).norm(), 0.0);
    }

    #[test]
    fn tilde_intracavity_vanishes_at_large_mechanical_frequency() {
        let mut p = SystemParams::canonical();
        let t1 = tilde_intracavity(&p, 0.0);
        p.omega_m *= 100.0;
        let t2 = tilde_intracavity(&p, 0.0);
        assert_relative_eq!(
            t2.input_plus.norm(),
            t1.input_plus.norm() / 100.0,
            max_relative = 1e-4
        );
    }

    #[test]
    fn gtilde_rows_have_no_mechanical_channels() {
        let p = SystemParams::canonical();
        for form in [GTildeForm::Exact, GTildeForm::Approximate] {
            let (ga, gphi) = tilde_g_rows(&p, 3.0 * p.gamma_m, form);
            for row in [&ga, &gphi] {
                for ch in [
                    Channel::AmpPlus,
                    Channel::AmpMinus,
                    Channel::PhasePlus,
                    Channel::PhaseMinus,
                    Channel::ThermalAmp,
                    Channel::ThermalPhase,
                    Channel::ForceAmp,
                    Channel::ForcePhase,
                ] {
                    assert_eq!(row.coeff(ch).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn gtilde_approximation_gap_shrinks_with_resolved_sidebands() {
        // relative deviation of the rows bounded by 2 (gamma + |Omega|)/omega_m
        let mut p = SystemParams::canonical();
        for ratio in [30.0, 100.0, 300.0, 1000.0] {
            p.omega_m = ratio * p.gamma;
            for w in [0.0, 0.1 * p.gamma, 0.5 * p.gamma] {
                let (exact, _) = tilde_g_rows(&p, w, GTildeForm::Exact);
                let (approx, _) = tilde_g_rows(&p, w, GTildeForm::Approximate);
                let dev = exact.max_rel_deviation(&approx);
                assert!(
                    dev <= 2.0 * (p.gamma + w.abs()) / p.omega_m,
                    "dev {dev} exceeds bound at ratio {ratio}, w {w}"
                );
            }
        }
    }

    #[test]
    fn gtilde_gap_three_percent_at_canonical_point() {
        // omega_m = 100 gamma, Omega = 0.1 gamma
        let mut p = SystemParams::canonical();
        p.omega_m = 100.0 * p.gamma;
        let w = 0.1 * p.gamma;
        let (exact, _) = tilde_g_rows(&p, w, GTildeForm::Exact);
        let (approx, _) = tilde_g_rows(&p, w, GTildeForm::Approximate);
        assert!(exact.max_rel_deviation(&approx) < 0.03);
    }

    #[test]
    fn comb_with_sidebands_keeps_main_cancellation() {
        let p = SystemParams::canonical().with_power_at(0.0, 1e4);
        let row = beta_comb_with_sidebands(&p, 2.0 * p.gamma_m, GTildeForm::Exact).unwrap();
        assert_eq!(row.coeff(Channel::AmpPlus).norm(), 0.0);
        assert!(row.coeff(Channel::SbAmpPlus).norm() > 0.0);
        assert!(row.coeff(Channel::SbPhaseMinus).norm() > 0.0);
    }

    #[test]
    fn comb_with_sidebands_zero_power_has_no_measurement() {
        let mut p = SystemParams::canonical();
        p.pump_c = 0.0;
        let row = beta_comb_with_sidebands(&p, p.gamma_m, GTildeForm::Exact).unwrap();
        assert_abs_diff_eq!(row.coeff(Channel::ForcePhase).norm(), 0.0);
        assert_abs_diff_eq!(row.coeff(Channel::ThermalAmp).norm(), 0.0);
        assert_abs_diff_eq!(row.coeff(Channel::SbAmpPlus).norm(), 0.0);
        assert!(row.coeff(Channel::AmpMinus).norm() > 0.0);
    }

    #[test]
    fn sideband_budget_reduces_to_combined_at_large_omega_m() {
        let mut p = SystemParams::canonical();
        p.omega_m *= 1e6;
        let w = 3.0 * p.gamma_m;
        assert_relative_eq!(
            force_psd_with_sidebands(&p, w, GTildeForm::Approximate).unwrap(),
            force_psd_combined(&p, w).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn sideband_budget_minimum_matches_analytic_bound() {
        // thermal off, gamma_m = 0: min_K = (sqrt(gamma^2+Omega^2)/2 omega_m) * 2|Omega|
        let mut p = SystemParams::canonical();
        p.gamma_m = 0.0;
        let w = p.gamma;
        let m = minimize_log10(
            |k| w * w / k + k * (p.gamma * p.gamma + w * w) / (4.0 * p.omega_m * p.omega_m),
            1e-6 * w,
            1e6 * w,
            1e-10,
        );
        let bound = (p.gamma * p.gamma + w * w).sqrt() / (2.0 * p.omega_m) * 2.0 * w;
        assert_relative_eq!(m.value, bound, max_relative = 1e-12);
    }

    #[test]
    fn optimal_power_formula_and_argmin_agree() {
        let p = SystemParams::canonical();
        for w in [0.1 * p.gamma_m, p.gamma_m, 20.0 * p.gamma_m, 0.5 * p.gamma] {
            let kopt = optimal_power_with_sidebands(&p, w);
            let m = minimize_over_power(&p, w, |pp, ww| {
                force_psd_with_sidebands(pp, ww, GTildeForm::Approximate)
            })
            .unwrap();
            assert_relative_eq!(m.x, kopt, max_relative = 1e-9);
            assert!(kopt > p.probe_power_sql(w));
        }
    }

    #[test]
    fn optimal_power_substitution_at_omega_equals_gamma() {
        // gamma_m = 0, Omega = gamma: K_opt = sqrt(2) omega_m Omega / gamma
        let mut p = SystemParams::canonical();
        p.gamma_m = 0.0;
        let w = p.gamma;
        assert_relative_eq!(
            optimal_power_with_sidebands(&p, w),
            std::f64::consts::SQRT_2 * p.omega_m * w / p.gamma,
            max_relative = 1e-14
        );
    }

    #[test]
    fn filter_phase_limits() {
        let mut p = SystemParams::canonical();
        p.omega_m = 1e-9 * p.gamma;
        let e = filter_phase(&p);
        assert_abs_diff_eq!(e.re, 1.0, epsilon = 1e-8);
        p.omega_m = 1e9 * p.gamma;
        let e = filter_phase(&p);
        assert_abs_diff_eq!(e.im, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn filtered_rows_scale_sidebands_by_reduction_factor() {
        let p = SystemParams::canonical();
        let w = 5.0 * p.gamma_m;
        let unfiltered = beta_comb_with_sidebands(&p, w, GTildeForm::Exact).unwrap();
        let filtered = filtered_row(&p, w, GTildeForm::Exact).unwrap();
        let r = FilterSpec::reduction_factor(&p, w);
        for ch in [Channel::SbAmpPlus, Channel::SbPhaseMinus] {
            assert_relative_eq!(
                filtered.coeff(ch).norm(),
                r * unfiltered.coeff(ch).norm(),
                max_relative = 1e-14
            );
        }
        // non-sideband channels untouched
        assert_eq!(
            filtered.coeff(Channel::AmpMinus),
            unfiltered.coeff(Channel::AmpMinus)
        );
    }

    #[test]
    fn filtered_budget_first_term_scaling() {
        let mut p = SystemParams::canonical();
        p.gamma_m = 0.0;
        let w = 0.1 * p.gamma;
        let small = p.clone().with_power_at(w, 1e-3 * w);
        let bigger = p.clone().with_power_at(w, 1e-2 * w);
        let s1 = force_psd_filtered(&small, w).unwrap();
        let s2 = force_psd_filtered(&bigger, w).unwrap();
        // shot-dominated regime: tenfold power cuts the budget tenfold
        assert_relative_eq!(s2, s1 / 10.0, max_relative = 1e-3);
    }

    #[test]
    fn filtered_minimum_is_am_gm_value() {
        let mut p = SystemParams::canonical();
        p.gamma_m = 0.0;
        for w in [0.05 * p.gamma, 0.3 * p.gamma, 0.9 * p.gamma] {
            let m = minimize_over_power(&p, w, force_psd_filtered).unwrap();
            let expect = p.gamma * w * w / (2.0 * p.omega_m * p.omega_m);
            assert_relative_eq!(m.value, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn filtered_fallback_with_damping_includes_thermal() {
        let mut p = SystemParams::canonical();
        p.thermal_on = true;
        p.n_thermal = 2.0;
        let w = 3.0 * p.gamma_m;
        let sf = force_psd_filtered(&p, w).unwrap();
        let r = FilterSpec::reduction_factor(&p, w);
        let k = p.probe_power(w);
        let expect = 2.0 * p.gamma_m * (2.0 * p.n_thermal + 1.0)
            + (p.gamma_m * p.gamma_m + w * w) / k
            + r * r * k * (p.gamma * p.gamma + w * w) / (4.0 * p.omega_m * p.omega_m);
        assert_relative_eq!(sf, expect, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn filter_phase_is_unimodular(gamma in 1.0f64..1e8, omega_m in 1.0f64..1e9) {
            let mut p = SystemParams::canonical();
            p.gamma = gamma;
            p.omega_m = omega_m;
            prop_assert!((filter_phase(&p).norm() - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn sideband_budget_dominates_combined(
            log_k in -3.0f64..5.0,
            omega_rel in 0.01f64..50.0,
        ) {
            let p0 = SystemParams::canonical();
            let w = omega_rel * p0.gamma_m;
            let p = p0.with_power_at(w, 10f64.powf(log_k) * p0.gamma_m);
            let with = force_psd_with_sidebands(&p, w, GTildeForm::Approximate).unwrap();
            let without = force_psd_combined(&p, w).unwrap();
            prop_assert!(with >= without);
        }

        #[test]
        fn filtered_beats_unfiltered_minimum(omega_rel in 0.01f64..0.99) {
            // for |Omega| < gamma << omega_m
            let mut p = SystemParams::canonical();
            p.gamma_m = 0.0;
            let w = omega_rel * p.gamma;
            let filt = minimize_over_power(&p, w, force_psd_filtered).unwrap();
            let unfilt = minimize_over_power(&p, w, |pp, ww| {
                force_psd_with_sidebands(pp, ww, GTildeForm::Approximate)
            })
            .unwrap();
            prop_assert!(filt.value <= unfilt.value);
        }
    }
}
