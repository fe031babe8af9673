//! Self-checks run by `fockswap verify`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use crate::analysis::{fidelity, fock_fidelity};
use crate::error::Result;
use crate::fock::{FockState, ModeId, ModeRegistry};
use crate::oracle::evolve_via_permanents;
use crate::protocol::{
    apply_swap_correction, build_figure1_circuit, herald_probabilities, hong_ou_mandel, interaction_violations,
    prepare_input, reference, run_state_transfer, run_swapping, transfer_success_probability_via_oracle, HeraldCase,
    ProtocolParams, Scope,
};
use crate::report::swap_target;
use crate::sampling::{random_mode_unitary, random_qubit, seeded_rng};

/// Tolerance for state comparisons (amplitudes and fidelities).
pub const STATE_CHECK_TOLERANCE: f64 = 1e-10;
/// Tolerance for probabilities.
pub const PROBABILITY_CHECK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(id: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            id: id.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random inputs per randomized check.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 2024,
            samples: 10,
        }
    }
}

/// Runs every check against `params`. Errors only on invalid parameters;
/// a failed check is reported, not raised.
pub fn run_checks(params: &ProtocolParams, opts: VerifyOptions) -> Result<Vec<CheckResult>> {
    params.validate()?;
    Ok(vec![
        hom()?,
        element_unitarity(),
        no_interaction(),
        oracle_full_circuit(opts)?,
        oracle_random_circuits(opts)?,
        herald_partition(params)?,
        heralded_d3(params)?,
        heralded_d4(params)?,
        swap_corrections(params)?,
        transfer_fidelity(params)?,
        transfer_oracle(params)?,
    ])
}

fn hom() -> Result<CheckResult> {
    let d = hong_ou_mandel()?;
    let ok = d[1].1 < 1e-14
        && (d[0].1 - 0.5).abs() < PROBABILITY_CHECK_TOLERANCE
        && (d[2].1 - 0.5).abs() < PROBABILITY_CHECK_TOLERANCE;
    Ok(CheckResult::new(
        "hom_dip",
        ok,
        format!("P(2,0)={:.3e} P(1,1)={:.3e} P(0,2)={:.3e}", d[0].1, d[1].1, d[2].1),
    ))
}

fn element_unitarity() -> CheckResult {
    let worst = build_figure1_circuit(Scope::Transfer)
        .stages()
        .iter()
        .map(|s| s.unitary.matrix().unitarity_deviation())
        .fold(0.0, f64::max);
    CheckResult::new(
        "element_unitarity",
        worst < 1e-12,
        format!("max ‖U†U − I‖ = {worst:.3e}"),
    )
}

fn no_interaction() -> CheckResult {
    let v = interaction_violations(&build_figure1_circuit(Scope::Transfer));
    CheckResult::new("no_alice_bob_element", v.is_empty(), format!("violating stages: {v:?}"))
}

fn oracle_full_circuit(opts: VerifyOptions) -> Result<CheckResult> {
    let circuit = build_figure1_circuit(Scope::Transfer);
    let u = circuit.global_unitary()?;
    let mut rng = seeded_rng(opts.seed);
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let (a, b) = random_qubit(&mut rng);
        let (c, d) = random_qubit(&mut rng);
        let input = prepare_input(&ProtocolParams::new(a, b, c, d), circuit.registry().clone())?;
        let direct = circuit.evolve(&input, None)?;
        let oracle = evolve_via_permanents(&u, &input)?;
        worst = worst.max(direct.max_amplitude_diff(&oracle)?);
    }
    Ok(CheckResult::new(
        "oracle_full_circuit",
        worst <= STATE_CHECK_TOLERANCE,
        format!("{} inputs, max amplitude difference {worst:.3e}", opts.samples),
    ))
}

fn oracle_random_circuits(opts: VerifyOptions) -> Result<CheckResult> {
    let mut rng = seeded_rng(opts.seed ^ 0x5eed);
    let modes: Vec<ModeId> = (0..4).map(|i| ModeId::bare(format!("m{i}"))).collect();
    let reg = Arc::new(ModeRegistry::new(modes.clone())?);
    let one = Complex64::new(1.0, 0.0);
    let mut worst = 0.0f64;
    for k in 0..opts.samples {
        let u = random_mode_unitary(modes.clone(), &mut rng)?;
        let photons = 2 + k % 2;
        let mut input = FockState::vacuum(reg.clone())?;
        for p in 0..photons {
            input = input.create_photon(&[(modes[p % 3].clone(), one)])?;
        }
        let direct = input.apply_mode_unitary(&u)?;
        let oracle = evolve_via_permanents(&u, &input)?;
        worst = worst.max(direct.max_amplitude_diff(&oracle)?);
    }
    Ok(CheckResult::new(
        "oracle_random_circuits",
        worst <= STATE_CHECK_TOLERANCE,
        format!("{} circuits, max amplitude difference {worst:.3e}", opts.samples),
    ))
}

fn herald_partition(params: &ProtocolParams) -> Result<CheckResult> {
    let p = herald_probabilities(params)?;
    let total = p.d3 + p.d4 + p.discarded;
    Ok(CheckResult::new(
        "herald_partition",
        (total - 1.0).abs() < PROBABILITY_CHECK_TOLERANCE,
        format!("P(D3)={:.6} P(D4)={:.6} P(discarded)={:.6}", p.d3, p.d4, p.discarded),
    ))
}

fn heralded_d3(params: &ProtocolParams) -> Result<CheckResult> {
    let run = run_swapping(params, HeraldCase::D3)?;
    if run.herald_probability == 0.0 {
        return Ok(CheckResult::new(
            "herald_d3_state",
            true,
            "herald never fires for these inputs".into(),
        ));
    }
    let expected = reference::heralded_d3(params, run.heralded_state.registry().clone())?;
    let f = fock_fidelity(&run.heralded_state, &expected)?;
    Ok(CheckResult::new(
        "herald_d3_state",
        f >= 1.0 - STATE_CHECK_TOLERANCE,
        format!("fidelity {f:.12}"),
    ))
}

fn heralded_d4(params: &ProtocolParams) -> Result<CheckResult> {
    let run = run_swapping(params, HeraldCase::D4)?;
    if run.herald_probability == 0.0 {
        return Ok(CheckResult::new(
            "herald_d4_state",
            true,
            "herald never fires for these inputs".into(),
        ));
    }
    let reg = run.heralded_state.registry().clone();
    let projected = fock_fidelity(
        &run.heralded_state,
        &reference::heralded_d4_projected(params, reg.clone())?,
    )?;
    let nominal = fock_fidelity(&run.heralded_state, &reference::heralded_d4_nominal(params, reg)?)?;
    Ok(CheckResult::new(
        "herald_d4_state",
        projected >= 1.0 - STATE_CHECK_TOLERANCE,
        format!("fidelity {projected:.12} with the projected form, {nominal:.6} with the nominal form"),
    ))
}

fn swap_corrections(params: &ProtocolParams) -> Result<CheckResult> {
    let run = run_swapping(params, HeraldCase::D3)?;
    let target = swap_target(params);
    let mut worst = 1.0f64;
    for o in run.outcomes.iter().filter(|o| o.probability > 0.0) {
        worst = worst.min(fidelity(&apply_swap_correction(o), &target)?);
    }
    Ok(CheckResult::new(
        "swap_corrections",
        worst >= 1.0 - STATE_CHECK_TOLERANCE,
        format!("minimum corrected fidelity {worst:.12}"),
    ))
}

/// Uses the caller's `c, d` with `a = b = 1/√2`, the regime the correction
/// table is stated for.
fn transfer_fidelity(params: &ProtocolParams) -> Result<CheckResult> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let p = ProtocolParams { a: h, b: h, ..*params };
    let run = run_state_transfer(&p)?;
    let worst = run
        .branches
        .iter()
        .filter(|b| b.probability > 0.0)
        .map(|b| b.fidelity_to_target)
        .fold(1.0, f64::min);
    Ok(CheckResult::new(
        "transfer_fidelity",
        worst >= 1.0 - STATE_CHECK_TOLERANCE,
        format!(
            "minimum branch fidelity {worst:.12}, success probability {:.6}",
            run.total_success_probability
        ),
    ))
}

fn transfer_oracle(params: &ProtocolParams) -> Result<CheckResult> {
    let direct = run_state_transfer(params)?.total_success_probability;
    let oracle = transfer_success_probability_via_oracle(params)?;
    Ok(CheckResult::new(
        "transfer_probability_oracle",
        (direct - oracle).abs() < PROBABILITY_CHECK_TOLERANCE,
        format!("direct {direct:.12}, oracle {oracle:.12}"),
    ))
}
