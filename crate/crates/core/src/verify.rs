//! Structured cross-verification: closed forms against the brute-force
//! solver, symplectic structure, optimization identities, and the mean-field
//! compensation. Produces a machine-readable report; the CLI `verify`
//! command formats it and sets the exit code.

use num_complex::Complex64;

use crate::channels::{Channel, NoiseModel, TransferRow};
use crate::minimize::Minimum;
use crate::oracle::{assemble, solve_scattering, symplectic_check, OutputQuadrature};
use crate::params::{compensation_pumps, SystemParams};
use crate::sideband::{
    beta_comb_with_sidebands, force_psd_filtered, force_psd_with_sidebands, minimize_over_power,
    optimal_power_with_sidebands, tilde_g_rows, GTildeForm,
};
use crate::spectra::{
    combine_back_action_free, force_psd_raw, force_psd_sql, transfer_amplitude, transfer_phase,
    FrequencyGrid,
};
use crate::Result;

/// One verified invariant.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    /// Worst measured deviation (meaning depends on the check).
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn new(name: &'static str, measured: f64, threshold: f64, note: String) -> Self {
        Check {
            name,
            measured,
            threshold,
            passed: measured.is_finite() && measured <= threshold,
            note,
        }
    }
}

/// Report of a full verification run.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Self-test fault injection: corrupts one closed-form coefficient so the
/// oracle comparison must fail with a named invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    CorruptAmplitudeRow,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Frequency grid; defaults to the canonical 201-point log grid.
    pub grid: Option<Vec<f64>>,
    pub fault: Option<Fault>,
}

/// Worst row deviation between closed form and oracle across the grid.
struct Worst {
    value: f64,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0 }
    }
    fn update(&mut self, v: f64) {
        if v > self.value || !v.is_finite() {
            self.value = v;
        }
    }
}

/// Run every verification check at the given parameters.
pub fn run_verification(params: &SystemParams, opts: &VerifyOptions) -> Result<VerifyReport> {
    params.validate()?;
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => FrequencyGrid::canonical_log(params).build()?,
    };
    let noise = NoiseModel::from_params(params);
    let mut checks = Vec::new();

    // oracle equivalence of the closed-form rows
    let mut dev22 = Worst::new();
    let mut dev26 = Worst::new();
    let mut dev34 = Worst::new();
    let mut dev_comb = Worst::new();
    let mut dev_sympl_off = Worst::new();
    let mut dev_sympl_on = Worst::new();
    let mut dev_psd = Worst::new();
    let mut dev_tilde = Worst::new();
    for &w in &grid {
        let sc_off = solve_scattering(&assemble(params, w, false))?;
        let sc_on = solve_scattering(&assemble(params, w, true))?;

        let (mut plus, minus) = transfer_amplitude(params, w);
        if opts.fault == Some(Fault::CorruptAmplitudeRow) {
            plus.add(Channel::AmpPlus, Complex64::new(1e-6, 0.0));
        }
        let (pminus, pplus) = transfer_phase(params, w);
        dev22.update(
            sc_off
                .row(OutputQuadrature::BetaAmpPlus)
                .unwrap()
                .max_rel_deviation(&plus),
        );
        dev22.update(
            sc_off
                .row(OutputQuadrature::BetaAmpMinus)
                .unwrap()
                .max_rel_deviation(&minus),
        );
        dev26.update(
            sc_off
                .row(OutputQuadrature::BetaPhaseMinus)
                .unwrap()
                .max_rel_deviation(&pminus),
        );
        dev26.update(
            sc_off
                .row(OutputQuadrature::BetaPhasePlus)
                .unwrap()
                .max_rel_deviation(&pplus),
        );

        // combined row reconstructed from oracle rows: back action gone
        let oracle_comb = sc_on
            .row(OutputQuadrature::BetaAmpMinus)
            .unwrap()
            .cancel_channel(sc_on.row(OutputQuadrature::BetaAmpPlus).unwrap(), Channel::AmpPlus)?;
        let scale = oracle_comb.max_abs().max(f64::MIN_POSITIVE);
        dev_comb.update(oracle_comb.coeff(Channel::AmpPlus).norm() / scale);

        // sideband-corrected closed form vs the same oracle reconstruction
        let closed34 = beta_comb_with_sidebands(params, w, GTildeForm::Exact)?;
        dev34.update(oracle_comb.max_rel_deviation(&closed34));

        dev_sympl_off.update(symplectic_check(&sc_off));
        dev_sympl_on.update(symplectic_check(&sc_on));

        // referred budgets
        let sf_oracle = sc_off
            .row(OutputQuadrature::BetaAmpMinus)
            .unwrap()
            .force_referred_psd(&noise)?;
        let sf_closed = force_psd_raw(params, w)?;
        dev_psd.update((sf_oracle - sf_closed).abs() / sf_closed);

        // tilde intracavity structure: the solved sideband unknowns satisfy
        // the detuned response with the solved mechanical rows
        let t = crate::sideband::tilde_intracavity(params, w);
        let d_a = sc_on.unknown_row(crate::oracle::Unknown::MechAmp).unwrap();
        let d_phi = sc_on.unknown_row(crate::oracle::Unknown::MechPhase).unwrap();
        let ct_p = sc_on.unknown_row(crate::oracle::Unknown::SbPlus).unwrap();
        // d^dag(-W) = (d_a - i d_phi)/sqrt2
        let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut residual: f64 = 0.0;
        for ch in Channel::ALL {
            let d_dag = half * (d_a.coeff(ch) - Complex64::new(0.0, 1.0) * d_phi.coeff(ch));
            // c~_+ = input_plus a~_+ + mech_dag_plus d^dag(-W)
            let direct = match ch {
                Channel::SbAmpPlus => t.input_plus * 0.5,
                Channel::SbAmpMinus => t.input_plus * 0.5,
                Channel::SbPhasePlus => t.input_plus * Complex64::new(0.0, 0.5),
                Channel::SbPhaseMinus => t.input_plus * Complex64::new(0.0, 0.5),
                _ => Complex64::new(0.0, 0.0),
            };
            let expect = direct + t.mech_dag_plus * d_dag;
            residual = residual.max((ct_p.coeff(ch) - expect).norm());
        }
        dev_tilde.update(residual / ct_p.max_abs().max(f64::MIN_POSITIVE));
    }
    checks.push(Check::new(
        "oracle_rows_amplitude",
        dev22.value,
        1e-10,
        "closed-form amplitude-pair rows vs linear solve".into(),
    ));
    checks.push(Check::new(
        "oracle_rows_phase",
        dev26.value,
        1e-10,
        "closed-form phase-pair rows vs linear solve".into(),
    ));
    checks.push(Check::new(
        "oracle_rows_sideband_comb",
        dev34.value,
        1e-10,
        "sideband-corrected combination vs linear solve (exact response)".into(),
    ));
    checks.push(Check::new(
        "back_action_free_combination",
        dev_comb.value,
        1e-12,
        "alpha_{a+} weight of the oracle-reconstructed combination".into(),
    ));
    checks.push(Check::new(
        "symplectic_main",
        dev_sympl_off.value,
        1e-10,
        "quadrature commutator preservation, sidebands off".into(),
    ));
    checks.push(Check::new(
        "symplectic_sidebands",
        dev_sympl_on.value,
        1e-10,
        "quadrature commutator preservation, sidebands on".into(),
    ));
    checks.push(Check::new(
        "oracle_force_budget",
        dev_psd.value,
        1e-10,
        "force-referred raw budget vs oracle propagation".into(),
    ));
    checks.push(Check::new(
        "tilde_intracavity_structure",
        dev_tilde.value,
        1e-10,
        "solved sideband fields satisfy the detuned response".into(),
    ));

    // optimization identities
    let mut dev_sql_val = Worst::new();
    let mut dev_sql_arg = Worst::new();
    let mut dev_sb_val = Worst::new();
    let mut dev_sb_arg = Worst::new();
    let mut thermal_off = params.clone();
    thermal_off.thermal_on = false;
    for &w in &grid {
        let Minimum { x, value } = minimize_over_power(&thermal_off, w, force_psd_raw)?;
        let sql = force_psd_sql(params, w);
        dev_sql_val.update((value - sql).abs() / sql);
        let ksql = params.probe_power_sql(w);
        dev_sql_arg.update((x - ksql).abs() / ksql);

        let m = minimize_over_power(&thermal_off, w, |p, ww| {
            force_psd_with_sidebands(p, ww, GTildeForm::Approximate)
        })?;
        let bound = (params.gamma * params.gamma + w * w).sqrt() / (2.0 * params.omega_m) * sql;
        dev_sb_val.update((m.value - bound).abs() / bound);
        let kopt = optimal_power_with_sidebands(params, w);
        dev_sb_arg.update((m.x - kopt).abs() / kopt);
    }
    checks.push(Check::new(
        "sql_envelope_value",
        dev_sql_val.value,
        1e-12,
        "min over power of the raw budget vs 2 sqrt(gamma_m^2 + Omega^2)".into(),
    ));
    checks.push(Check::new(
        "sql_envelope_argmin",
        dev_sql_arg.value,
        1e-9,
        "optimal power vs sqrt(gamma_m^2 + Omega^2)".into(),
    ));
    checks.push(Check::new(
        "sideband_bound_value",
        dev_sb_val.value,
        1e-12,
        "min of the sideband-corrected budget vs its analytic bound".into(),
    ));
    checks.push(Check::new(
        "sideband_bound_argmin",
        dev_sb_arg.value,
        1e-9,
        "optimal power vs 2 omega_m sqrt((gamma_m^2+Omega^2)/(gamma^2+Omega^2))".into(),
    ));

    // filtered compensation at gamma_m = 0 over the in-band frequencies
    let mut gm0 = params.clone();
    gm0.gamma_m = 0.0;
    gm0.thermal_on = false;
    let mut dev_filt = Worst::new();
    let mut improvement_ok = true;
    let mut factor2 = Worst::new();
    for &w in &grid {
        if w <= 0.0 || w >= params.gamma {
            continue;
        }
        let m = minimize_over_power(&gm0, w, force_psd_filtered)?;
        let direct = params.gamma * w * w / (2.0 * params.omega_m * params.omega_m);
        dev_filt.update((m.value - direct).abs() / direct);
        let unfiltered = minimize_over_power(&gm0, w, |p, ww| {
            force_psd_with_sidebands(p, ww, GTildeForm::Approximate)
        })?;
        improvement_ok &= m.value <= unfiltered.value;
        // displayed bound (gamma |Omega| / 2 omega_m^2) S_SQL is exactly twice
        // the direct optimum; record the ratio so the discrepancy stays visible
        let displayed = params.gamma * w / (2.0 * params.omega_m * params.omega_m) * (2.0 * w);
        factor2.update((displayed / m.value - 2.0).abs());
    }
    checks.push(Check::new(
        "filtered_minimum_value",
        dev_filt.value,
        1e-12,
        "min of the filtered budget vs gamma Omega^2 / (2 omega_m^2)".into(),
    ));
    checks.push(Check::new(
        "filtered_beats_unfiltered",
        if improvement_ok { 0.0 } else { 1.0 },
        0.5,
        "filtered optimum at or below the unfiltered one for |Omega| < gamma".into(),
    ));
    checks.push(Check::new(
        "filtered_displayed_bound_ratio",
        factor2.value,
        1e-9,
        "the quoted filtered bound sits a factor 2 above the direct optimum; \
         the direct value is reported"
            .into(),
    ));

    // approximation gap of the sideband quadratures
    let mut dev_gap = Worst::new();
    for &w in &grid {
        let (exact, _) = tilde_g_rows(params, w, GTildeForm::Exact);
        let (approx, _) = tilde_g_rows(params, w, GTildeForm::Approximate);
        let gap = exact.max_rel_deviation(&approx);
        let bound = 2.0 * (params.gamma + w.abs()) / params.omega_m;
        dev_gap.update(gap / bound);
    }
    checks.push(Check::new(
        "gtilde_approximation_gap",
        dev_gap.value,
        1.0,
        "exact vs leading-order sideband quadratures within 2(gamma+|Omega|)/omega_m".into(),
    ));

    // duality of the two quadrature pairs
    let mut dev_dual = Worst::new();
    for &w in &grid {
        let (_, am) = transfer_amplitude(params, w);
        let (_, pp) = transfer_phase(params, w);
        let sa = am.force_referred_psd(&noise)?;
        let sp = pp.force_referred_psd(&noise)?;
        dev_dual.update((sa - sp).abs() / sa);
    }
    checks.push(Check::new(
        "quadrature_pair_duality",
        dev_dual.value,
        1e-12,
        "amplitude-pair and phase-pair budgets coincide".into(),
    ));

    // closed-form combination: structural zero
    let mut dev_zero = Worst::new();
    for &w in &grid {
        let (plus, minus) = transfer_amplitude(params, w);
        let comb = combine_back_action_free(&plus, &minus)?;
        dev_zero.update(comb.coeff(Channel::AmpPlus).norm());
    }
    checks.push(Check::new(
        "combination_structural_zero",
        dev_zero.value,
        0.0,
        "alpha_{a+} weight of the closed-form combination is exactly zero".into(),
    ));

    // mean-field drive compensation
    let mf = crate::params::steady_state(
        params,
        params.pump_amplitude(),
        params.pump_amplitude(),
        crate::params::SteadyStateMode::SelfConsistent,
    )?;
    let mut dev_comp = Worst::new();
    for eta_e in [params.eta, params.eta / 100.0] {
        let c = compensation_pumps(params, eta_e, mf.c_plus, mf.c_minus)?;
        dev_comp.update(c.residual_rel);
    }
    checks.push(Check::new(
        "drive_compensation",
        dev_comp.value,
        1e-12,
        "auxiliary pumps null the mean mechanical drive (eta_e = eta and eta/100)".into(),
    ));

    Ok(VerifyReport { checks })
}

/// Convenience: worst deviation between two rows for external reporting.
pub fn row_deviation(a: &TransferRow, b: &TransferRow) -> f64 {
    a.max_rel_deviation(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_parameters_pass_all_checks() {
        let report = run_verification(&SystemParams::canonical(), &VerifyOptions::default())
            .unwrap();
        for c in &report.checks {
            assert!(
                c.passed,
                "{} failed: measured {:.3e} > {:.3e}",
                c.name, c.measured, c.threshold
            );
        }
    }

    #[test]
    fn injected_fault_fails_the_named_invariant() {
        let report = run_verification(
            &SystemParams::canonical(),
            &VerifyOptions {
                grid: None,
                fault: Some(Fault::CorruptAmplitudeRow),
            },
        )
        .unwrap();
        assert!(!report.all_passed());
        let failed = report.failed();
        assert!(failed.iter().any(|c| c.name == "oracle_rows_amplitude"));
    }
}
