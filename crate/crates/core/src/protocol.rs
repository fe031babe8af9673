//! The three-interferometer experiment: Alice's interferometer (paths `psi*`),
//! the shared one (`A*`, heralding detectors D3/D4) and Bob's (`phi*`,
//! analysis detectors D5–D8).
//!
//! Nothing is dropped by hand. The full three-photon state is evolved through
//! every element and the protocol outcomes are read off by post-selecting on
//! the herald detector together with one photon in Alice's region and one in
//! Bob's. Bunched and crossed-over amplitudes fail that coincidence condition.
//!
//! Stage order:
//!
//! ```text
//! PBS1 PBS2 PBS3 | M1 BS1 BS2 M2 | PR1 BS4 | BS3 BS5 | PR2 PR3 PBS4 PBS5
//! ```
//!
//! BS1 couples Alice's V arm (`psi2`) with the shared V arm (`A2`); BS2
//! couples the shared H arm (`A1`) with Bob's H arm (`phi1`). Reflection keeps
//! a photon inside its own interferometer, transmission crosses over.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    fidelity, reduce_to_qubit, reduce_to_two_qubits, PolarizationQubit, QubitEncoding, Reduced, TwoQubitState,
};
use crate::circuit::Circuit;
use crate::elements::{ElementSpec, RotatorKind};
use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, ModeRegistry, PostSelectionPattern};
use crate::oracle::evolve_via_permanents;

/// Mode path labels.
pub mod paths {
    pub const PSI_IN: &str = "psi0";
    pub const PSI1: &str = "psi1";
    pub const PSI2: &str = "psi2";
    pub const PSI2_OUT: &str = "psi2'";
    pub const PSI3: &str = "psi3";
    pub const PSI4: &str = "psi4";

    pub const A_IN: &str = "A0";
    pub const A1: &str = "A1";
    pub const A2: &str = "A2";
    pub const A1_OUT: &str = "A1'";
    pub const A2_OUT: &str = "A2'";
    pub const D3: &str = "D3";
    pub const D4: &str = "D4";

    pub const PHI_IN: &str = "phi0";
    pub const PHI1: &str = "phi1";
    pub const PHI2: &str = "phi2";
    pub const PHI1_OUT: &str = "phi1'";
    pub const PHI3: &str = "phi3";
    pub const PHI4: &str = "phi4";
    pub const D5: &str = "D5";
    pub const D6: &str = "D6";
    pub const D7: &str = "D7";
    pub const D8: &str = "D8";

    pub const ALICE: [&str; 6] = [PSI_IN, PSI1, PSI2, PSI2_OUT, PSI3, PSI4];
    pub const SHARED: [&str; 7] = [A_IN, A1, A2, A1_OUT, A2_OUT, D3, D4];
    pub const BOB: [&str; 6] = [PHI_IN, PHI1, PHI2, PHI1_OUT, PHI3, PHI4];
}

/// Labels of the evolution checkpoints.
pub mod stages {
    /// Last preparation stage: the state here is the product of the three
    /// polarizing-beam-splitter outputs.
    pub const AFTER_PBS: &str = "PBS3";
    /// Last element of the central M1/BS1/BS2/M2 block.
    pub const AFTER_CENTRAL: &str = "M2";
    pub const AFTER_PR1: &str = "PR1";
    /// Heralding beam splitter; Alice's and Bob's recombiners follow.
    pub const AFTER_HERALD: &str = "BS4";
    pub const AFTER_ALICE_RECOMBINE: &str = "BS3";
    pub const AFTER_BOB_RECOMBINE: &str = "BS5";
}

/// Which part of the table a mode belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    Alice,
    Shared,
    Bob,
}

pub fn region_of(path: &str) -> Option<Region> {
    use paths::*;
    if ALICE.contains(&path) {
        Some(Region::Alice)
    } else if SHARED.contains(&path) {
        Some(Region::Shared)
    } else if BOB.contains(&path) || [D5, D6, D7, D8].contains(&path) {
        Some(Region::Bob)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Entanglement swapping: ends at Alice's and Bob's recombining splitters.
    Swap,
    /// Adds Bob's Hadamard rotators and polarization analysis onto D5–D8.
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeraldCase {
    D3,
    D4,
}

impl HeraldCase {
    pub fn path(self) -> &'static str {
        match self {
            HeraldCase::D3 => paths::D3,
            HeraldCase::D4 => paths::D4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlicePath {
    Psi3,
    Psi4,
}

impl AlicePath {
    pub const ALL: [AlicePath; 2] = [AlicePath::Psi3, AlicePath::Psi4];

    pub fn path(self) -> &'static str {
        match self {
            AlicePath::Psi3 => paths::PSI3,
            AlicePath::Psi4 => paths::PSI4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BobPath {
    Phi3,
    Phi4,
}

impl BobPath {
    pub const ALL: [BobPath; 2] = [BobPath::Phi3, BobPath::Phi4];

    pub fn path(self) -> &'static str {
        match self {
            BobPath::Phi3 => paths::PHI3,
            BobPath::Phi4 => paths::PHI4,
        }
    }
}

/// Joint path outcome of Alice and Bob after their recombining splitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathPattern {
    pub alice: AlicePath,
    pub bob: BobPath,
}

impl PathPattern {
    pub const ALL: [PathPattern; 4] = [
        PathPattern {
            alice: AlicePath::Psi3,
            bob: BobPath::Phi3,
        },
        PathPattern {
            alice: AlicePath::Psi3,
            bob: BobPath::Phi4,
        },
        PathPattern {
            alice: AlicePath::Psi4,
            bob: BobPath::Phi3,
        },
        PathPattern {
            alice: AlicePath::Psi4,
            bob: BobPath::Phi4,
        },
    ];

    /// Relative sign of the `|VV⟩` term against `|HH⟩` in the heralded
    /// swap output for this pattern: `ac|HH⟩ + sign·bd|VV⟩`.
    pub fn vv_sign(self) -> f64 {
        match (self.alice, self.bob) {
            (AlicePath::Psi3, BobPath::Phi3) | (AlicePath::Psi4, BobPath::Phi4) => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BobDetector {
    D5,
    D6,
    D7,
    D8,
}

impl BobDetector {
    pub const ALL: [BobDetector; 4] = [BobDetector::D5, BobDetector::D6, BobDetector::D7, BobDetector::D8];

    /// The single mode each analysis detector sees.
    pub fn mode(self) -> ModeId {
        match self {
            BobDetector::D5 => ModeId::h(paths::D5),
            BobDetector::D6 => ModeId::v(paths::D6),
            BobDetector::D7 => ModeId::h(paths::D7),
            BobDetector::D8 => ModeId::v(paths::D8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    Identity,
    SigmaZ,
}

impl Correction {
    pub fn apply(self, q: &PolarizationQubit) -> PolarizationQubit {
        match self {
            Correction::Identity => *q,
            Correction::SigmaZ => q.sigma_z(),
        }
    }
}

/// Alice's feed-forward rule for the state transfer: σz on the path listed
/// for Bob's detector, identity on the other.
pub fn table1_correction(detector: BobDetector, alice_path: AlicePath) -> Correction {
    use AlicePath::*;
    use BobDetector::*;
    match (detector, alice_path) {
        (D5 | D8, Psi3) | (D6 | D7, Psi4) => Correction::SigmaZ,
        (D5 | D8, Psi4) | (D6 | D7, Psi3) => Correction::Identity,
    }
}

/// Input polarizations: photon 1 `a|H⟩ + b|V⟩` (Alice), photon 2 `chi2`
/// (shared), photon 3 `c|H⟩ + d|V⟩` (Bob).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    #[serde(with = "crate::serde_complex::single")]
    pub a: Complex64,
    #[serde(with = "crate::serde_complex::single")]
    pub b: Complex64,
    #[serde(with = "crate::serde_complex::single")]
    pub c: Complex64,
    #[serde(with = "crate::serde_complex::single")]
    pub d: Complex64,
    #[serde(with = "crate::serde_complex::many")]
    pub chi2: [Complex64; 2],
}

/// Tolerance for `|a|² + |b|² = 1` and friends.
pub const PARAM_TOLERANCE: f64 = 1e-12;

impl ProtocolParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        ProtocolParams {
            a,
            b,
            c,
            d,
            chi2: [Complex64::new(FRAC_1_SQRT_2, 0.0); 2],
        }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        let r = |x| Complex64::new(x, 0.0);
        Self::new(r(a), r(b), r(c), r(d))
    }

    /// `a = b = c = d = 1/√2`.
    pub fn balanced() -> Self {
        Self::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }

    pub fn with_chi2(mut self, h: Complex64, v: Complex64) -> Self {
        self.chi2 = [h, v];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("a,b", self.a, self.b),
            ("c,d", self.c, self.d),
            ("chi2", self.chi2[0], self.chi2[1]),
        ];
        for (name, x, y) in pairs {
            let n = x.norm_sqr() + y.norm_sqr();
            if (n - 1.0).abs() > PARAM_TOLERANCE {
                return Err(Error::Normalization(format!("|{name}|² sums to {n}")));
            }
        }
        Ok(())
    }

    /// The transfer correction table assumes `a = b`.
    pub fn transfer_warning(&self) -> Option<String> {
        ((self.a - self.b).norm() > PARAM_TOLERANCE).then(|| {
            format!(
                "a = {} differs from b = {}; the correction table only guarantees unit fidelity for a = b = 1/√2",
                self.a, self.b
            )
        })
    }
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self::balanced()
    }
}

fn bs(in1: &str, in2: &str, out1: &str, out2: &str) -> ElementSpec {
    ElementSpec::PathBeamSplitter {
        inputs: [in1.into(), in2.into()],
        outputs: [out1.into(), out2.into()],
    }
}

fn pbs(input: &str, out_h: &str, out_v: &str) -> ElementSpec {
    ElementSpec::PolarizingBeamSplitter {
        input: input.into(),
        out_h: out_h.into(),
        out_v: out_v.into(),
    }
}

fn rotator(rotation: RotatorKind, path: &str) -> ElementSpec {
    ElementSpec::PolarizationRotator {
        rotation,
        path: path.into(),
    }
}

fn mirror(path: &str) -> ElementSpec {
    ElementSpec::Mirror { path: path.into() }
}

pub fn registry(scope: Scope) -> ModeRegistry {
    let mut all: Vec<&str> = Vec::new();
    all.extend(paths::ALICE);
    all.extend(paths::SHARED);
    all.extend(paths::BOB);
    let mut reg = ModeRegistry::with_paths(all).expect("static labels are unique");
    if scope == Scope::Transfer {
        for det in BobDetector::ALL {
            reg.push(det.mode()).expect("static labels are unique");
        }
    }
    reg
}

/// Builds the staged circuit for the given scope.
pub fn build_figure1_circuit(scope: Scope) -> Circuit {
    use paths::*;
    let mut stages = vec![
        ("PBS1", pbs(PSI_IN, PSI1, PSI2)),
        ("PBS2", pbs(A_IN, A1, A2)),
        ("PBS3", pbs(PHI_IN, PHI1, PHI2)),
        ("M1", mirror(PSI1)),
        ("BS1", bs(PSI2, A2, A2_OUT, PSI2_OUT)),
        ("BS2", bs(A1, PHI1, PHI1_OUT, A1_OUT)),
        ("M2", mirror(PHI2)),
        ("PR1", rotator(RotatorKind::Flip, A2_OUT)),
        ("BS4", bs(A1_OUT, A2_OUT, D3, D4)),
        ("BS3", bs(PSI1, PSI2_OUT, PSI3, PSI4)),
        ("BS5", bs(PHI1_OUT, PHI2, PHI3, PHI4)),
    ];
    if scope == Scope::Transfer {
        stages.extend([
            ("PR2", rotator(RotatorKind::Hadamard, PHI3)),
            ("PR3", rotator(RotatorKind::Hadamard, PHI4)),
            ("PBS4", pbs(PHI3, D5, D6)),
            ("PBS5", pbs(PHI4, D7, D8)),
        ]);
    }
    Circuit::new(
        Arc::new(registry(scope)),
        stages.into_iter().map(|(l, s)| (l.to_string(), s)).collect(),
    )
    .expect("the fixed layout is a valid circuit")
}

/// Stages whose modes span both Alice's and Bob's regions. Empty for the
/// layouts built here: photons 1 and 3 never meet an element together.
pub fn interaction_violations(circuit: &Circuit) -> Vec<String> {
    circuit
        .stages()
        .iter()
        .filter(|s| {
            let regions: BTreeSet<Region> = s.unitary.modes().iter().filter_map(|m| region_of(&m.path)).collect();
            regions.contains(&Region::Alice) && regions.contains(&Region::Bob)
        })
        .map(|s| s.label.clone())
        .collect()
}

/// Three-photon product input on the circuit's input paths.
pub fn prepare_input(params: &ProtocolParams, registry: Arc<ModeRegistry>) -> Result<FockState> {
    params.validate()?;
    FockState::vacuum(registry)?
        .create_photon(&[
            (ModeId::h(paths::PSI_IN), params.a),
            (ModeId::v(paths::PSI_IN), params.b),
        ])?
        .create_photon(&[
            (ModeId::h(paths::A_IN), params.chi2[0]),
            (ModeId::v(paths::A_IN), params.chi2[1]),
        ])?
        .create_photon(&[
            (ModeId::h(paths::PHI_IN), params.c),
            (ModeId::v(paths::PHI_IN), params.d),
        ])
}

fn region_modes(registry: &ModeRegistry, region: Region) -> Vec<ModeId> {
    registry
        .modes()
        .iter()
        .filter(|m| region_of(&m.path) == Some(region))
        .cloned()
        .collect()
}

fn path_modes(path: &str) -> [ModeId; 2] {
    [ModeId::h(path), ModeId::v(path)]
}

/// One photon in Alice's region and one in Bob's (the third is then
/// necessarily in the shared interferometer).
pub fn coincidence_pattern(registry: &ModeRegistry) -> PostSelectionPattern {
    PostSelectionPattern::new()
        .group(region_modes(registry, Region::Alice), 1)
        .group(region_modes(registry, Region::Bob), 1)
}

/// The herald detector (polarization-blind) fires together with the
/// Alice/Bob coincidence.
pub fn herald_pattern(registry: &ModeRegistry, herald: HeraldCase) -> PostSelectionPattern {
    let base = coincidence_pattern(registry);
    base.group(path_modes(herald.path()), 1)
}

/// Probabilities of every heralding class, the discarded one computed by
/// direct classification of the evolved terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldProbabilities {
    pub d3: f64,
    pub d4: f64,
    pub discarded: f64,
}

pub fn herald_probabilities(params: &ProtocolParams) -> Result<HeraldProbabilities> {
    let circuit = build_figure1_circuit(Scope::Swap);
    let reg = circuit.registry().clone();
    let state = circuit.evolve(&prepare_input(params, reg.clone())?, Some(stages::AFTER_HERALD))?;
    let (_, d3) = state.project(&herald_pattern(&reg, HeraldCase::D3))?;
    let (_, d4) = state.project(&herald_pattern(&reg, HeraldCase::D4))?;

    let count = |occ: &crate::fock::OccupationVector, pred: &dyn Fn(&ModeId) -> bool| -> u32 {
        reg.modes()
            .iter()
            .enumerate()
            .filter(|(_, m)| pred(m))
            .map(|(i, _)| u32::from(occ[i]))
            .sum()
    };
    let mut discarded = 0.0;
    for (occ, amp) in state.terms() {
        let alice = count(occ, &|m| region_of(&m.path) == Some(Region::Alice));
        let bob = count(occ, &|m| region_of(&m.path) == Some(Region::Bob));
        let on_d3 = count(occ, &|m| m.path == paths::D3);
        let on_d4 = count(occ, &|m| m.path == paths::D4);
        let accepted = alice == 1 && bob == 1 && (on_d3 == 1 || on_d4 == 1);
        if !accepted {
            discarded += amp.norm_sqr();
        }
    }
    Ok(HeraldProbabilities { d3, d4, discarded })
}

/// Heralded polarization–polarization state for one path pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapOutcome {
    pub pattern: PathPattern,
    pub conditional_state: TwoQubitState,
    /// Probability of this pattern given the herald.
    pub probability: f64,
    pub correction_needed: bool,
}

#[derive(Debug, Clone)]
pub struct SwapRun {
    pub herald: HeraldCase,
    /// Joint probability of the herald and the Alice/Bob coincidence.
    pub herald_probability: f64,
    /// Normalized conditional state right after the herald splitter, before
    /// Alice and Bob recombine their paths.
    pub heralded_state: FockState,
    /// Empty when the herald never fires.
    pub outcomes: Vec<SwapOutcome>,
}

/// Runs the swapping protocol and returns the heralded outcome table.
pub fn run_swapping(params: &ProtocolParams, herald: HeraldCase) -> Result<SwapRun> {
    let circuit = build_figure1_circuit(Scope::Swap);
    let reg = circuit.registry().clone();
    let input = prepare_input(params, reg.clone())?;
    let pattern = herald_pattern(&reg, herald);

    let before_recombination = circuit.evolve(&input, Some(stages::AFTER_HERALD))?;
    let (heralded_state, herald_probability) = before_recombination.project(&pattern)?;

    let end = circuit.evolve(&input, None)?;
    let (conditioned, p_end) = end.project(&pattern)?;
    let mut outcomes = Vec::new();
    if p_end > 0.0 {
        for pat in PathPattern::ALL {
            let select = PostSelectionPattern::new()
                .group(path_modes(pat.alice.path()), 1)
                .group(path_modes(pat.bob.path()), 1);
            let (branch, probability) = conditioned.project(&select)?;
            let conditional_state = if probability == 0.0 {
                TwoQubitState::new([Complex64::new(0.0, 0.0); 4])
            } else {
                two_qubit(&branch, pat)?
            };
            outcomes.push(SwapOutcome {
                pattern: pat,
                conditional_state,
                probability,
                correction_needed: pat.vv_sign() > 0.0,
            });
        }
    }
    Ok(SwapRun {
        herald,
        herald_probability,
        heralded_state,
        outcomes,
    })
}

fn two_qubit(state: &FockState, pat: PathPattern) -> Result<TwoQubitState> {
    let map = [
        QubitEncoding::polarization(pat.alice.path()),
        QubitEncoding::polarization(pat.bob.path()),
    ];
    match reduce_to_two_qubits(state, &map)? {
        Reduced::Pure(s) => Ok(s),
        Reduced::Mixed(_) => Err(Error::Encoding(format!(
            "pattern {pat:?} left the polarization pair entangled with the herald photon"
        ))),
    }
}

/// Local σz corrections: Alice flips when she finds her photon in `psi4`,
/// Bob when he finds his in `phi4`. Every pattern then carries
/// `ac|HH⟩ − bd|VV⟩` up to a global phase.
pub fn apply_swap_correction(outcome: &SwapOutcome) -> TwoQubitState {
    let mut s = outcome.conditional_state;
    if outcome.pattern.alice == AlicePath::Psi4 {
        s = s.sigma_z(0);
    }
    if outcome.pattern.bob == BobPath::Phi4 {
        s = s.sigma_z(1);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBranch {
    pub detector: BobDetector,
    pub alice_path: AlicePath,
    pub alice_state_before: PolarizationQubit,
    pub correction: Correction,
    pub alice_state_after: PolarizationQubit,
    /// Fidelity of the corrected state with `c|H⟩ + d|V⟩`; 0 for a branch
    /// that never occurs.
    pub fidelity_to_target: f64,
    /// Absolute probability of the herald, the coincidence and this branch.
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct TransferRun {
    pub herald_probability: f64,
    pub branches: Vec<TransferBranch>,
    /// Alice's conditional path⊗polarization state per Bob detector, as
    /// amplitudes over `[psi3:H, psi3:V, psi4:H, psi4:V]`.
    pub alice_states: Vec<(BobDetector, TwoQubitState)>,
    pub total_success_probability: f64,
    pub warnings: Vec<String>,
}

/// Evolves the transfer layout on the given input and keeps the heralded,
/// coincident part (unnormalized).
pub fn transfer_heralded_state(params: &ProtocolParams) -> Result<(FockState, f64)> {
    let circuit = build_figure1_circuit(Scope::Transfer);
    let reg = circuit.registry().clone();
    let end = circuit.evolve(&prepare_input(params, reg.clone())?, None)?;
    let kept = end.filter(&herald_pattern(&reg, HeraldCase::D3))?;
    let p = kept.norm_sqr();
    Ok((kept, p))
}

/// Runs the state-transfer protocol: herald on D3, Bob's detection on
/// D5–D8, Alice's path, and the feed-forward correction.
pub fn run_state_transfer(params: &ProtocolParams) -> Result<TransferRun> {
    let (kept, herald_probability) = transfer_heralded_state(params)?;
    let target = PolarizationQubit::new(params.c, params.d);
    let mut branches = Vec::with_capacity(8);
    let mut alice_states = Vec::with_capacity(4);
    for det in BobDetector::ALL {
        let on_det = kept.filter(&PostSelectionPattern::new().mode(det.mode(), 1))?;
        let mut alice = [Complex64::new(0.0, 0.0); 4];
        for (k, path) in AlicePath::ALL.into_iter().enumerate() {
            for (j, mode) in path_modes(path.path()).into_iter().enumerate() {
                alice[2 * k + j] = on_det.amplitude_of(&[mode, ModeId::h(paths::D3), det.mode()])?;
            }
        }
        alice_states.push((det, TwoQubitState::new(alice).normalized()));

        for path in AlicePath::ALL {
            let branch = on_det.filter(&PostSelectionPattern::new().group(path_modes(path.path()), 1))?;
            let probability = branch.norm_sqr();
            let correction = table1_correction(det, path);
            let (before, after, fid) = if probability == 0.0 {
                let zero = PolarizationQubit::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                (zero, zero, 0.0)
            } else {
                let before = match reduce_to_qubit(&branch, &QubitEncoding::polarization(path.path()))? {
                    Reduced::Pure(q) => q.normalized(),
                    Reduced::Mixed(_) => {
                        return Err(Error::Encoding(format!(
                            "Alice's qubit in {det:?}/{path:?} is entangled with the other photons"
                        )))
                    }
                };
                let after = correction.apply(&before);
                (before, after, fidelity(&after, &target)?)
            };
            branches.push(TransferBranch {
                detector: det,
                alice_path: path,
                alice_state_before: before,
                correction,
                alice_state_after: after,
                fidelity_to_target: fid,
                probability,
            });
        }
    }
    let total_success_probability = branches.iter().map(|b| b.probability).sum();
    Ok(TransferRun {
        herald_probability,
        branches,
        alice_states,
        total_success_probability,
        warnings: params.transfer_warning().into_iter().collect(),
    })
}

/// Same accepted-event probability as [`run_state_transfer`], computed by the
/// permanent oracle from the circuit's global unitary.
pub fn transfer_success_probability_via_oracle(params: &ProtocolParams) -> Result<f64> {
    let circuit = build_figure1_circuit(Scope::Transfer);
    let reg = circuit.registry().clone();
    let out = evolve_via_permanents(&circuit.global_unitary()?, &prepare_input(params, reg.clone())?)?;
    let analysed = PostSelectionPattern::new().group(BobDetector::ALL.map(BobDetector::mode), 1);
    let kept = out.filter(&herald_pattern(&reg, HeraldCase::D3))?.filter(&analysed)?;
    Ok(kept.norm_sqr())
}

/// Output distribution of two photons entering opposite ports of a 50:50
/// beam splitter: `[(2,0), (1,1), (0,2)]`.
pub fn hong_ou_mandel() -> Result<[((u8, u8), f64); 3]> {
    let (x, y, u, v) = (
        ModeId::bare("in1"),
        ModeId::bare("in2"),
        ModeId::bare("out1"),
        ModeId::bare("out2"),
    );
    let reg = Arc::new(ModeRegistry::new([x.clone(), y.clone(), u.clone(), v.clone()])?);
    let one = Complex64::new(1.0, 0.0);
    let out = FockState::vacuum(reg)?
        .create_photon(&[(x.clone(), one)])?
        .create_photon(&[(y.clone(), one)])?
        .apply_mode_unitary(&crate::elements::beam_splitter(&x, &y, &u, &v)?)?;
    let p = |modes: &[ModeId]| out.amplitude_of(modes).map(|a| a.norm_sqr());
    Ok([
        ((2, 0), p(&[u.clone(), u.clone()])?),
        ((1, 1), p(&[u.clone(), v.clone()])?),
        ((0, 2), p(&[v.clone(), v])?),
    ])
}

/// Closed-form states for comparison, written directly on the simulator's
/// mode labels.
pub mod reference {
    use super::*;

    fn modes(list: &[(&str, bool)]) -> Vec<ModeId> {
        list.iter()
            .map(|&(p, h)| if h { ModeId::h(p) } else { ModeId::v(p) })
            .collect()
    }

    /// Heralded state before recombination, D3 case:
    /// `N2 (ac|psi1 H⟩|phi1' H⟩ + bd|psi2' V⟩|phi2 V⟩)`, herald photon on D3:H.
    pub fn heralded_d3(params: &ProtocolParams, registry: Arc<ModeRegistry>) -> Result<FockState> {
        use paths::*;
        let (a, b, c, d) = (params.a, params.b, params.c, params.d);
        let t1 = modes(&[(PSI1, true), (PHI1_OUT, true), (D3, true)]);
        let t2 = modes(&[(PSI2_OUT, false), (PHI2, false), (D3, true)]);
        Ok(FockState::from_mode_terms(registry, &[(&t1, a * c), (&t2, b * d)])?.normalized())
    }

    /// Nominal closed form of the D4 case, kept as the comparison target:
    /// `ac|psi1 H, phi1' H⟩ + bd|psi2' V, phi2 V⟩ − 2√2 i·ad|psi1 H, phi2 V⟩`.
    pub fn heralded_d4_nominal(params: &ProtocolParams, registry: Arc<ModeRegistry>) -> Result<FockState> {
        heralded_d4_with_signs(params, registry, 1.0, -1.0)
    }

    /// The D4 case obtained by projecting the post-PR1 coincidence state on
    /// the port orthogonal to D3:
    /// `ac|psi1 H, phi1' H⟩ − bd|psi2' V, phi2 V⟩ + 2√2 i·ad|psi1 H, phi2 V⟩`.
    pub fn heralded_d4_projected(params: &ProtocolParams, registry: Arc<ModeRegistry>) -> Result<FockState> {
        heralded_d4_with_signs(params, registry, -1.0, 1.0)
    }

    fn heralded_d4_with_signs(
        params: &ProtocolParams,
        registry: Arc<ModeRegistry>,
        bd_sign: f64,
        cross_sign: f64,
    ) -> Result<FockState> {
        use paths::*;
        let (a, b, c, d) = (params.a, params.b, params.c, params.d);
        let i = Complex64::new(0.0, 1.0);
        let t1 = modes(&[(PSI1, true), (PHI1_OUT, true), (D4, true)]);
        let t2 = modes(&[(PSI2_OUT, false), (PHI2, false), (D4, true)]);
        let t3 = modes(&[(PSI1, true), (PHI2, false), (D4, true)]);
        Ok(FockState::from_mode_terms(
            registry,
            &[
                (&t1, a * c),
                (&t2, b * d * bd_sign),
                (&t3, i * a * d * 2.0 * 2f64.sqrt() * cross_sign),
            ],
        )?
        .normalized())
    }

    /// `N2 = (|ac|² + |bd|²)^(-1/2)`.
    pub fn n2(params: &ProtocolParams) -> f64 {
        ((params.a * params.c).norm_sqr() + (params.b * params.d).norm_sqr()).powf(-0.5)
    }

    /// `N2' = (|ac|² + |bd|² + 8|ad|²)^(-1/2)`.
    pub fn n2_prime(params: &ProtocolParams) -> f64 {
        ((params.a * params.c).norm_sqr() + (params.b * params.d).norm_sqr() + 8.0 * (params.a * params.d).norm_sqr())
            .powf(-0.5)
    }

    /// `N1 = (|ac|² + 4|ad|² + |bd|²)^(-1/2)`.
    pub fn n1(params: &ProtocolParams) -> f64 {
        ((params.a * params.c).norm_sqr() + 4.0 * (params.a * params.d).norm_sqr() + (params.b * params.d).norm_sqr())
            .powf(-0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fock_fidelity;
    use crate::elements::ElementFamily;
    use crate::sampling::{random_qubit, seeded_rng};
    use std::collections::HashMap;

    fn inventory(c: &Circuit) -> HashMap<ElementFamily, usize> {
        let mut counts = HashMap::new();
        for s in c.stages() {
            *counts.entry(s.spec.family()).or_insert(0) += 1;
        }
        counts
    }

    #[test]
    fn swap_layout_inventory() {
        let c = build_figure1_circuit(Scope::Swap);
        let inv = inventory(&c);
        assert_eq!(inv[&ElementFamily::BeamSplitter], 5);
        assert_eq!(inv[&ElementFamily::PolarizingBeamSplitter], 3);
        assert_eq!(inv[&ElementFamily::PolarizationRotator], 1);
        assert_eq!(inv[&ElementFamily::Mirror], 2);
        let labels: Vec<_> = c.labels().collect();
        assert_eq!(
            labels,
            ["PBS1", "PBS2", "PBS3", "M1", "BS1", "BS2", "M2", "PR1", "BS4", "BS3", "BS5"]
        );
    }

    #[test]
    fn transfer_layout_inventory() {
        let c = build_figure1_circuit(Scope::Transfer);
        let inv = inventory(&c);
        assert_eq!(inv[&ElementFamily::BeamSplitter], 5);
        assert_eq!(inv[&ElementFamily::PolarizingBeamSplitter], 5);
        assert_eq!(inv[&ElementFamily::PolarizationRotator], 3);
        assert_eq!(inv[&ElementFamily::Mirror], 2);
        for det in BobDetector::ALL {
            assert!(c.registry().contains(&det.mode()));
        }
        for s in c.stages() {
            assert!(s.unitary.matrix().unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn photons_one_and_three_never_share_an_element() {
        for scope in [Scope::Swap, Scope::Transfer] {
            assert!(interaction_violations(&build_figure1_circuit(scope)).is_empty());
        }
    }

    #[test]
    fn violation_detector_flags_cross_region_element() {
        let reg = Arc::new(registry(Scope::Swap));
        let c = Circuit::new(
            reg,
            vec![("X".into(), bs(paths::PSI_IN, paths::PHI_IN, paths::PSI1, paths::PHI1))],
        )
        .unwrap();
        assert_eq!(interaction_violations(&c), vec!["X".to_string()]);
    }

    #[test]
    fn table1() {
        use AlicePath::*;
        use BobDetector::*;
        assert_eq!(table1_correction(D5, Psi3), Correction::SigmaZ);
        assert_eq!(table1_correction(D5, Psi4), Correction::Identity);
        assert_eq!(table1_correction(D6, Psi3), Correction::Identity);
        assert_eq!(table1_correction(D6, Psi4), Correction::SigmaZ);
        assert_eq!(table1_correction(D7, Psi3), Correction::Identity);
        assert_eq!(table1_correction(D7, Psi4), Correction::SigmaZ);
        assert_eq!(table1_correction(D8, Psi3), Correction::SigmaZ);
        assert_eq!(table1_correction(D8, Psi4), Correction::Identity);
    }

    #[test]
    fn input_photon_count_and_trivial_product() {
        let reg = Arc::new(registry(Scope::Swap));
        let s = prepare_input(&ProtocolParams::real(1.0, 0.0, 1.0, 0.0), reg).unwrap();
        assert_eq!(s.photon_count(), 3);
        assert_eq!(s.len(), 2);
        let amp = s
            .amplitude_of(&[
                ModeId::h(paths::PSI_IN),
                ModeId::h(paths::A_IN),
                ModeId::h(paths::PHI_IN),
            ])
            .unwrap();
        assert!((amp - FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn unnormalized_params_rejected() {
        let reg = Arc::new(registry(Scope::Swap));
        let err = prepare_input(&ProtocolParams::real(1.0, 1.0, 1.0, 0.0), reg).unwrap_err();
        assert!(matches!(err, Error::Normalization(_)));
    }

    #[test]
    fn balanced_swap_gives_bell_state() {
        let run = run_swapping(&ProtocolParams::balanced(), HeraldCase::D3).unwrap();
        let first = &run.outcomes[0];
        assert_eq!(first.pattern, PathPattern::ALL[0]);
        let bell = TwoQubitState::new([
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        ]);
        assert!(fidelity(&first.conditional_state, &bell).unwrap() > 1.0 - 1e-12);
        assert!((first.conditional_state.normalized().concurrence().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn d4_herald_matches_projected_form() {
        let mut rng = seeded_rng(5);
        for _ in 0..20 {
            let (a, b) = random_qubit(&mut rng);
            let (c, d) = random_qubit(&mut rng);
            let params = ProtocolParams::new(a, b, c, d);
            let run = run_swapping(&params, HeraldCase::D4).unwrap();
            let expected = reference::heralded_d4_projected(&params, run.heralded_state.registry().clone()).unwrap();
            assert!(fock_fidelity(&run.heralded_state, &expected).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn herald_classes_partition_probability() {
        let p = herald_probabilities(&ProtocolParams::real(0.8, 0.6, 0.6, 0.8)).unwrap();
        assert!((p.d3 + p.d4 + p.discarded - 1.0).abs() < 1e-12);
        // (|ac|² + |bd|²)/16 and (|ac|² + |bd|² + 8|ad|²)/16
        assert!((p.d3 - (0.48f64.powi(2) + 0.48f64.powi(2)) / 16.0).abs() < 1e-12);
        assert!((p.d4 - (0.48f64.powi(2) * 2.0 + 8.0 * 0.64f64.powi(2)) / 16.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_params_give_zero_herald() {
        // a = 0 and d = 0: only bd-type and ac-type terms vanish together.
        let run = run_swapping(&ProtocolParams::real(0.0, 1.0, 1.0, 0.0), HeraldCase::D3).unwrap();
        assert_eq!(run.herald_probability, 0.0);
        assert!(run.outcomes.is_empty());
        assert!(run.heralded_state.is_zero());
    }

    #[test]
    fn chi2_global_phase_does_not_matter() {
        let base = ProtocolParams::real(0.8, 0.6, 0.6, 0.8);
        let phase = Complex64::from_polar(1.0, 0.7);
        let shifted = base.with_chi2(phase * FRAC_1_SQRT_2, phase * FRAC_1_SQRT_2);
        let a = run_swapping(&base, HeraldCase::D3).unwrap();
        let b = run_swapping(&shifted, HeraldCase::D3).unwrap();
        assert!(fock_fidelity(&a.heralded_state, &b.heralded_state).unwrap() > 1.0 - 1e-12);
        assert!((a.herald_probability - b.herald_probability).abs() < 1e-14);
    }

    #[test]
    fn transfer_with_target_h_yields_h() {
        let params = ProtocolParams::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 1.0, 0.0);
        let run = run_state_transfer(&params).unwrap();
        let h = PolarizationQubit::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        for br in run.branches.iter().filter(|b| b.probability > 0.0) {
            assert!(fidelity(&br.alice_state_after, &h).unwrap() > 1.0 - 1e-12);
        }
        assert!(run.warnings.is_empty());
    }

    #[test]
    fn unequal_a_b_warns_and_loses_fidelity() {
        let run = run_state_transfer(&ProtocolParams::real(0.8, 0.6, 0.6, 0.8)).unwrap();
        assert_eq!(run.warnings.len(), 1);
        assert!(run.branches.iter().any(|b| b.fidelity_to_target < 1.0 - 1e-6));
    }

    #[test]
    fn hom_distribution() {
        let dist = hong_ou_mandel().unwrap();
        assert!((dist[0].1 - 0.5).abs() < 1e-15);
        assert!(dist[1].1 < 1e-30);
        assert!((dist[2].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn params_json_uses_re_im_objects() {
        let text = serde_json::to_string(&ProtocolParams::real(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(text.starts_with("{\"a\":{\"re\":1.0,\"im\":0.0}"), "{text}");
        let back: ProtocolParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ProtocolParams::real(1.0, 0.0, 0.0, 1.0));
    }
}
