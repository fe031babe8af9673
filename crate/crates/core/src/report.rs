//! Machine-readable summary of one protocol run, with reference values set
//! next to the simulated ones.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{fock_fidelity, TwoQubitState};
use crate::error::Result;
use crate::fock::{FockState, ModeId};
use crate::protocol::{
    self, apply_swap_correction, build_figure1_circuit, coincidence_pattern, herald_probabilities, paths, reference,
    run_state_transfer, run_swapping, stages, HeraldCase, HeraldProbabilities, ProtocolParams, Scope, SwapOutcome,
    TransferBranch,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperClaim {
    pub id: String,
    pub paper_value: f64,
    pub computed: f64,
    pub abs_delta: f64,
}

impl PaperClaim {
    pub fn new(id: &str, paper_value: f64, computed: f64) -> Self {
        PaperClaim {
            id: id.to_string(),
            paper_value,
            computed,
            abs_delta: (paper_value - computed).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedOutcome {
    pub outcome: SwapOutcome,
    pub corrected: TwoQubitState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResults {
    pub herald_probabilities: HeraldProbabilities,
    pub swap_d3: Vec<CorrectedOutcome>,
    pub swap_d4: Vec<SwapOutcome>,
    pub transfer_branches: Vec<TransferBranch>,
    pub transfer_success_probability: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub config_echo: ProtocolParams,
    pub results: ProtocolResults,
    pub paper_claims: Vec<PaperClaim>,
}

/// `|amplitude| / |coefficient|` for the first term whose coefficient is not
/// negligible; recovers a normalization constant from a normalized state.
fn recovered_constant(state: &FockState, terms: &[(Vec<ModeId>, f64)]) -> Result<Option<f64>> {
    for (modes, coeff) in terms {
        if *coeff > 1e-9 {
            return Ok(Some(state.amplitude_of(modes)?.norm() / coeff));
        }
    }
    Ok(None)
}

fn n1_from_simulation(params: &ProtocolParams) -> Result<Option<f64>> {
    use paths::*;
    let circuit = build_figure1_circuit(Scope::Swap);
    let reg = circuit.registry().clone();
    let after_pr1 = circuit.evolve(&protocol::prepare_input(params, reg.clone())?, Some(stages::AFTER_PR1))?;
    let (state, p) = after_pr1.project(&coincidence_pattern(&reg))?;
    if p == 0.0 {
        return Ok(None);
    }
    let (a, b, c, d) = (params.a.norm(), params.b.norm(), params.c.norm(), params.d.norm());
    recovered_constant(
        &state,
        &[
            (
                vec![ModeId::h(PSI1), ModeId::h(A1_OUT), ModeId::v(PHI2)],
                2f64.sqrt() * a * d,
            ),
            (vec![ModeId::h(PSI1), ModeId::h(A2_OUT), ModeId::h(PHI1_OUT)], a * c),
            (vec![ModeId::v(PSI2_OUT), ModeId::h(A1_OUT), ModeId::v(PHI2)], b * d),
        ],
    )
}

fn heralded_constant(state: &FockState, herald: &str, params: &ProtocolParams) -> Result<Option<f64>> {
    use paths::*;
    let ac = (params.a * params.c).norm();
    let bd = (params.b * params.d).norm();
    recovered_constant(
        state,
        &[
            (vec![ModeId::h(PSI1), ModeId::h(PHI1_OUT), ModeId::h(herald)], ac),
            (vec![ModeId::v(PSI2_OUT), ModeId::v(PHI2), ModeId::h(herald)], bd),
        ],
    )
}

impl ProtocolReport {
    pub fn generate(params: &ProtocolParams) -> Result<Self> {
        params.validate()?;
        let herald = herald_probabilities(params)?;
        let d3 = run_swapping(params, HeraldCase::D3)?;
        let d4 = run_swapping(params, HeraldCase::D4)?;
        let transfer = run_state_transfer(params)?;

        let mut claims = Vec::new();
        let hom = protocol::hong_ou_mandel()?;
        claims.push(PaperClaim::new("hom_coincidence_probability", 0.0, hom[1].1));
        if let Some(n1) = n1_from_simulation(params)? {
            claims.push(PaperClaim::new("central_norm_n1", reference::n1(params), n1));
        }
        if d3.herald_probability > 0.0 {
            if let Some(n2) = heralded_constant(&d3.heralded_state, paths::D3, params)? {
                claims.push(PaperClaim::new("herald_d3_norm_n2", reference::n2(params), n2));
            }
        }
        if d4.herald_probability > 0.0 {
            if let Some(n2p) = heralded_constant(&d4.heralded_state, paths::D4, params)? {
                claims.push(PaperClaim::new(
                    "herald_d4_norm_n2_prime",
                    reference::n2_prime(params),
                    n2p,
                ));
            }
            let nominal = reference::heralded_d4_nominal(params, d4.heralded_state.registry().clone())?;
            claims.push(PaperClaim::new(
                "herald_d4_state_fidelity",
                1.0,
                fock_fidelity(&d4.heralded_state, &nominal)?,
            ));
        }
        claims.push(PaperClaim::new(
            "transfer_success_probability",
            0.125,
            transfer.total_success_probability,
        ));

        Ok(ProtocolReport {
            config_echo: *params,
            results: ProtocolResults {
                herald_probabilities: herald,
                swap_d3: d3
                    .outcomes
                    .iter()
                    .map(|o| CorrectedOutcome {
                        outcome: o.clone(),
                        corrected: apply_swap_correction(o),
                    })
                    .collect(),
                swap_d4: d4.outcomes,
                transfer_branches: transfer.branches,
                transfer_success_probability: transfer.total_success_probability,
                warnings: transfer.warnings,
            },
            paper_claims: claims,
        })
    }
}

/// Target of every corrected swap outcome: `ac|HH⟩ − bd|VV⟩`.
pub fn swap_target(params: &ProtocolParams) -> TwoQubitState {
    let zero = Complex64::new(0.0, 0.0);
    TwoQubitState::new([params.a * params.c, zero, zero, -params.b * params.d])
}
