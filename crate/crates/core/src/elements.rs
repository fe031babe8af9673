//! Optical elements as small unitaries on named modes.
//!
//! Convention: a matrix row describes where a photon entering that mode goes,
//! `a†_j → Σ_k U[j][k] a†_k`. Reflections (beam splitter, the V port of a
//! polarizing beam splitter, mirrors) pick up a factor `i`; transmissions are
//! real. With these phases the symmetric 50:50 splitter sends
//! `in1 → (out1 + i·out2)/√2` and `in2 → (i·out1 + out2)/√2`.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeId, ModeRegistry};
use crate::matrix::ComplexMatrix;
use crate::serde_complex::ComplexRepr;

/// Unitarity tolerance enforced on every constructed [`ModeUnitary`].
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A unitary acting on an ordered subset of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    modes: Vec<ModeId>,
    matrix: ComplexMatrix,
}

impl ModeUnitary {
    pub fn new(modes: Vec<ModeId>, matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != modes.len() {
            return Err(Error::Config(format!(
                "{}x{} matrix for {} modes",
                matrix.rows(),
                matrix.cols(),
                modes.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = modes.iter().find(|m| !seen.insert(*m)) {
            return Err(Error::Config(format!("mode {dup} listed twice")));
        }
        let deviation = matrix.unitarity_deviation();
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::Unitarity {
                deviation,
                tolerance: UNITARITY_TOLERANCE,
            });
        }
        Ok(ModeUnitary { modes, matrix })
    }

    pub fn identity(modes: Vec<ModeId>) -> Result<Self> {
        let n = modes.len();
        Self::new(modes, ComplexMatrix::identity(n))
    }

    /// Routes photons from `inputs` to `outputs` with the given block
    /// (rows: inputs, columns: outputs). Inputs and outputs may share labels.
    /// Output modes that were not inputs are assumed empty on arrival; the
    /// unitary is completed by sending them back to the drained input modes.
    pub fn routing(inputs: &[ModeId], outputs: &[ModeId], block: &ComplexMatrix) -> Result<Self> {
        if inputs.len() != outputs.len() || block.rows() != inputs.len() || block.cols() != outputs.len() {
            return Err(Error::Config("routing block shape mismatch".into()));
        }
        distinct(inputs, "inputs")?;
        distinct(outputs, "outputs")?;

        let mut modes: Vec<ModeId> = inputs.to_vec();
        let fresh: Vec<&ModeId> = outputs.iter().filter(|m| !inputs.contains(m)).collect();
        let drained: Vec<&ModeId> = inputs.iter().filter(|m| !outputs.contains(m)).collect();
        modes.extend(fresh.iter().map(|m| (*m).clone()));
        let pos = |m: &ModeId| modes.iter().position(|x| x == m).expect("listed above");

        let mut matrix = ComplexMatrix::zeros(modes.len(), modes.len());
        for (i, _) in inputs.iter().enumerate() {
            for (k, out) in outputs.iter().enumerate() {
                matrix[(i, pos(out))] = block[(i, k)];
            }
        }
        for (f, d) in fresh.iter().zip(&drained) {
            matrix[(pos(f), pos(d))] = ONE;
        }
        Self::new(modes, matrix)
    }

    /// Block-diagonal combination of two unitaries on disjoint modes.
    pub fn direct_sum(&self, other: &ModeUnitary) -> Result<Self> {
        let n = self.modes.len();
        let m = other.modes.len();
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        let mut matrix = ComplexMatrix::zeros(n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                matrix[(i, j)] = self.matrix[(i, j)];
            }
        }
        for i in 0..m {
            for j in 0..m {
                matrix[(n + i, n + j)] = other.matrix[(i, j)];
            }
        }
        Self::new(modes, matrix)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Full-registry matrix with identity on untouched modes.
    pub fn embed(&self, registry: &ModeRegistry) -> Result<ComplexMatrix> {
        let idx = self
            .modes
            .iter()
            .map(|m| registry.index_of(m))
            .collect::<Result<Vec<_>>>()?;
        let mut full = ComplexMatrix::identity(registry.len());
        for &g in &idx {
            full[(g, g)] = ZERO;
        }
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                full[(gi, gj)] = self.matrix[(i, j)];
            }
        }
        Ok(full)
    }

    /// The transformation "apply `self`, then `next`", on the union of modes.
    /// In the row convention this is the matrix product `self · next`.
    pub fn then(&self, next: &ModeUnitary) -> Result<Self> {
        let mut modes = self.modes.clone();
        for m in &next.modes {
            if !modes.contains(m) {
                modes.push(m.clone());
            }
        }
        let registry = ModeRegistry::new(modes.iter().cloned())?;
        let product = &self.embed(&registry)? * &next.embed(&registry)?;
        Self::new(modes, product)
    }
}

fn distinct(modes: &[ModeId], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for m in modes {
        if !seen.insert(m) {
            return Err(Error::Config(format!("duplicate mode {m} among {what}")));
        }
    }
    Ok(())
}

fn matrix2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_rows(vec![vec![a, b], vec![c, d]]).expect("2x2 literal")
}

fn balanced_block() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    matrix2(ONE * s, I * s, I * s, ONE * s)
}

/// Symmetric 50:50 beam splitter on single modes.
pub fn beam_splitter(in1: &ModeId, in2: &ModeId, out1: &ModeId, out2: &ModeId) -> Result<ModeUnitary> {
    ModeUnitary::routing(
        &[in1.clone(), in2.clone()],
        &[out1.clone(), out2.clone()],
        &balanced_block(),
    )
}

/// 50:50 beam splitter acting identically on the H and V sub-modes of four
/// path labels.
pub fn path_beam_splitter(in1: &str, in2: &str, out1: &str, out2: &str) -> Result<ModeUnitary> {
    let h = beam_splitter(&ModeId::h(in1), &ModeId::h(in2), &ModeId::h(out1), &ModeId::h(out2))?;
    let v = beam_splitter(&ModeId::v(in1), &ModeId::v(in2), &ModeId::v(out1), &ModeId::v(out2))?;
    h.direct_sum(&v)
}

/// Single-input polarizing beam splitter: H transmits to `out_h` with
/// amplitude 1, V reflects to `out_v` with amplitude `i`.
pub fn polarizing_beam_splitter(input: &str, out_h: &str, out_v: &str) -> Result<ModeUnitary> {
    if input == out_h || input == out_v || out_h == out_v {
        return Err(Error::Config(format!(
            "polarizing beam splitter needs distinct paths, got {input}/{out_h}/{out_v}"
        )));
    }
    ModeUnitary::routing(
        &[ModeId::h(input), ModeId::v(input)],
        &[ModeId::h(out_h), ModeId::v(out_v)],
        &matrix2(ONE, ZERO, ZERO, I),
    )
}

/// Two-port polarizing beam splitter: H transmits straight through, V
/// reflects across with amplitude `i`.
pub fn two_input_polarizing_beam_splitter(in1: &str, in2: &str, out1: &str, out2: &str) -> Result<ModeUnitary> {
    let labels = [in1, in2, out1, out2];
    if labels.iter().collect::<HashSet<_>>().len() != 4 {
        return Err(Error::Config(format!(
            "polarizing beam splitter needs four distinct paths, got {labels:?}"
        )));
    }
    let inputs = [ModeId::h(in1), ModeId::v(in1), ModeId::h(in2), ModeId::v(in2)];
    let outputs = [ModeId::h(out1), ModeId::v(out1), ModeId::h(out2), ModeId::v(out2)];
    let mut block = ComplexMatrix::zeros(4, 4);
    block[(0, 0)] = ONE; // in1 H → out1 H
    block[(1, 3)] = I; // in1 V → out2 V
    block[(2, 2)] = ONE; // in2 H → out2 H
    block[(3, 1)] = I; // in2 V → out1 V
    ModeUnitary::routing(&inputs, &outputs, &block)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotatorKind {
    /// H ↔ V.
    Flip,
    /// H → (H+V)/√2, V → (H−V)/√2.
    Hadamard,
}

/// Polarization rotator acting in place on the two sub-modes of `path`.
pub fn polarization_rotator(kind: RotatorKind, path: &str) -> Result<ModeUnitary> {
    let m = match kind {
        RotatorKind::Flip => matrix2(ZERO, ONE, ONE, ZERO),
        RotatorKind::Hadamard => {
            let s = FRAC_1_SQRT_2;
            matrix2(ONE * s, ONE * s, ONE * s, -ONE * s)
        }
    };
    ModeUnitary::new(vec![ModeId::h(path), ModeId::v(path)], m)
}

/// Mirror: a reflection phase `i` on both polarizations of `path`.
pub fn mirror(path: &str) -> Result<ModeUnitary> {
    ModeUnitary::new(vec![ModeId::h(path), ModeId::v(path)], matrix2(I, ZERO, ZERO, I))
}

/// Serializable description of an element. `build` turns it into a
/// [`ModeUnitary`]; the input/output lists drive circuit validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementSpec {
    BeamSplitter {
        inputs: [ModeId; 2],
        outputs: [ModeId; 2],
    },
    PathBeamSplitter {
        inputs: [String; 2],
        outputs: [String; 2],
    },
    PolarizingBeamSplitter {
        input: String,
        out_h: String,
        out_v: String,
    },
    TwoInputPolarizingBeamSplitter {
        inputs: [String; 2],
        outputs: [String; 2],
    },
    PolarizationRotator {
        rotation: RotatorKind,
        path: String,
    },
    Mirror {
        path: String,
    },
    Custom {
        modes: Vec<ModeId>,
        matrix: Vec<Vec<ComplexRepr>>,
    },
}

/// Coarse element family, used for inventory counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementFamily {
    BeamSplitter,
    PolarizingBeamSplitter,
    PolarizationRotator,
    Mirror,
    Custom,
}

impl ElementSpec {
    pub fn build(&self) -> Result<ModeUnitary> {
        match self {
            ElementSpec::BeamSplitter { inputs, outputs } => {
                beam_splitter(&inputs[0], &inputs[1], &outputs[0], &outputs[1])
            }
            ElementSpec::PathBeamSplitter { inputs, outputs } => {
                path_beam_splitter(&inputs[0], &inputs[1], &outputs[0], &outputs[1])
            }
            ElementSpec::PolarizingBeamSplitter { input, out_h, out_v } => {
                polarizing_beam_splitter(input, out_h, out_v)
            }
            ElementSpec::TwoInputPolarizingBeamSplitter { inputs, outputs } => {
                two_input_polarizing_beam_splitter(&inputs[0], &inputs[1], &outputs[0], &outputs[1])
            }
            ElementSpec::PolarizationRotator { rotation, path } => polarization_rotator(*rotation, path),
            ElementSpec::Mirror { path } => mirror(path),
            ElementSpec::Custom { modes, matrix } => {
                let rows = matrix
                    .iter()
                    .map(|r| r.iter().map(|&z| Complex64::from(z)).collect())
                    .collect();
                ModeUnitary::new(modes.clone(), ComplexMatrix::from_rows(rows)?)
            }
        }
    }

    pub fn family(&self) -> ElementFamily {
        match self {
            ElementSpec::BeamSplitter { .. } | ElementSpec::PathBeamSplitter { .. } => ElementFamily::BeamSplitter,
            ElementSpec::PolarizingBeamSplitter { .. } | ElementSpec::TwoInputPolarizingBeamSplitter { .. } => {
                ElementFamily::PolarizingBeamSplitter
            }
            ElementSpec::PolarizationRotator { .. } => ElementFamily::PolarizationRotator,
            ElementSpec::Mirror { .. } => ElementFamily::Mirror,
            ElementSpec::Custom { .. } => ElementFamily::Custom,
        }
    }

    /// Modes photons enter the element from.
    pub fn input_modes(&self) -> Vec<ModeId> {
        match self {
            ElementSpec::BeamSplitter { inputs, .. } => inputs.to_vec(),
            ElementSpec::PathBeamSplitter { inputs, .. }
            | ElementSpec::TwoInputPolarizingBeamSplitter { inputs, .. } => both_polarizations(inputs),
            ElementSpec::PolarizingBeamSplitter { input, .. } => both_polarizations(std::slice::from_ref(input)),
            ElementSpec::PolarizationRotator { path, .. } | ElementSpec::Mirror { path } => {
                both_polarizations(std::slice::from_ref(path))
            }
            ElementSpec::Custom { modes, .. } => modes.clone(),
        }
    }

    /// Modes photons leave the element through.
    pub fn output_modes(&self) -> Vec<ModeId> {
        match self {
            ElementSpec::BeamSplitter { outputs, .. } => outputs.to_vec(),
            ElementSpec::PathBeamSplitter { outputs, .. }
            | ElementSpec::TwoInputPolarizingBeamSplitter { outputs, .. } => both_polarizations(outputs),
            ElementSpec::PolarizingBeamSplitter { out_h, out_v, .. } => {
                vec![ModeId::h(out_h.as_str()), ModeId::v(out_v.as_str())]
            }
            ElementSpec::PolarizationRotator { path, .. } | ElementSpec::Mirror { path } => {
                both_polarizations(std::slice::from_ref(path))
            }
            ElementSpec::Custom { modes, .. } => modes.clone(),
        }
    }
}

fn both_polarizations(paths: &[String]) -> Vec<ModeId> {
    paths
        .iter()
        .flat_map(|p| [ModeId::h(p.as_str()), ModeId::v(p.as_str())])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_photon(reg: &Arc<ModeRegistry>, amps: &[(ModeId, Complex64)]) -> FockState {
        FockState::vacuum(reg.clone()).unwrap().create_photon(amps).unwrap()
    }

    #[test]
    fn beam_splitter_port_relations() {
        let [i1, i2, o1, o2] = ["i1", "i2", "o1", "o2"].map(ModeId::bare);
        let reg = Arc::new(ModeRegistry::new([i1.clone(), i2.clone(), o1.clone(), o2.clone()]).unwrap());
        let bs = beam_splitter(&i1, &i2, &o1, &o2).unwrap();
        let from1 = one_photon(&reg, &[(i1.clone(), ONE)]).apply_mode_unitary(&bs).unwrap();
        assert!((from1.amplitude_of(std::slice::from_ref(&o1)).unwrap() - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((from1.amplitude_of(std::slice::from_ref(&o2)).unwrap() - I * FRAC_1_SQRT_2).norm() < 1e-15);

        let from2 = one_photon(&reg, &[(i2.clone(), ONE)]).apply_mode_unitary(&bs).unwrap();
        assert!((from2.amplitude_of(&[o1]).unwrap() - I * FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((from2.amplitude_of(&[o2]).unwrap() - FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn double_beam_splitter_swaps_ports_with_phase_i() {
        let block = balanced_block();
        let sq = &block * &block;
        assert!(sq[(0, 0)].norm() < 1e-15);
        assert!((sq[(0, 1)] - I).norm() < 1e-15);
        assert!((sq[(1, 0)] - I).norm() < 1e-15);
    }

    #[test]
    fn duplicate_ports_rejected() {
        let x = ModeId::bare("x");
        let y = ModeId::bare("y");
        assert!(matches!(beam_splitter(&x, &x, &x, &y), Err(Error::Config(_))));
        assert!(matches!(beam_splitter(&x, &y, &y, &y), Err(Error::Config(_))));
        assert!(matches!(polarizing_beam_splitter("p", "p", "q"), Err(Error::Config(_))));
        assert!(matches!(
            two_input_polarizing_beam_splitter("p", "q", "r", "p"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let m = matrix2(ONE, ONE, ZERO, ONE);
        let err = ModeUnitary::new(vec![ModeId::bare("x"), ModeId::bare("y")], m).unwrap_err();
        assert!(matches!(err, Error::Unitarity { .. }));
    }

    #[test]
    fn pbs_routes_h_straight_and_v_with_phase_i() {
        let reg = Arc::new(ModeRegistry::with_paths(["in", "t", "r"]).unwrap());
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let s = one_photon(&reg, &[(ModeId::h("in"), a), (ModeId::v("in"), b)]);
        let out = s
            .apply_mode_unitary(&polarizing_beam_splitter("in", "t", "r").unwrap())
            .unwrap();
        assert!((out.amplitude_of(&[ModeId::h("t")]).unwrap() - a).norm() < 1e-15);
        assert!((out.amplitude_of(&[ModeId::v("r")]).unwrap() - I * b).norm() < 1e-15);
        assert_eq!(out.len(), 2);

        let h_only = one_photon(&reg, &[(ModeId::h("in"), ONE)])
            .apply_mode_unitary(&polarizing_beam_splitter("in", "t", "r").unwrap())
            .unwrap();
        assert_eq!(h_only.amplitude_of(&[ModeId::h("t")]).unwrap(), ONE);
    }

    #[test]
    fn vertical_photon_through_mirrored_pbs_pair_returns_with_minus_one() {
        // Split at the first PBS, recombine at its mirror image.
        let reg = Arc::new(ModeRegistry::with_paths(["in", "t", "r", "x", "back"]).unwrap());
        let split = polarizing_beam_splitter("in", "t", "r").unwrap();
        let merge = two_input_polarizing_beam_splitter("t", "r", "x", "back").unwrap();
        let out = one_photon(&reg, &[(ModeId::v("in"), ONE)])
            .apply_mode_unitary(&split)
            .unwrap()
            .apply_mode_unitary(&merge)
            .unwrap();
        // V reflected twice: i·i = −1, lands in the transmitted-H port `x`.
        assert!((out.amplitude_of(&[ModeId::v("x")]).unwrap() + ONE).norm() < 1e-15);
    }

    #[test]
    fn rotators() {
        let reg = Arc::new(ModeRegistry::with_paths(["p"]).unwrap());
        let v = one_photon(&reg, &[(ModeId::v("p"), ONE)]);
        let flipped = v
            .apply_mode_unitary(&polarization_rotator(RotatorKind::Flip, "p").unwrap())
            .unwrap();
        assert_eq!(flipped.amplitude_of(&[ModeId::h("p")]).unwrap(), ONE);

        let h = one_photon(&reg, &[(ModeId::h("p"), ONE)]);
        let had = polarization_rotator(RotatorKind::Hadamard, "p").unwrap();
        let once = h.apply_mode_unitary(&had).unwrap();
        assert!((once.amplitude_of(&[ModeId::h("p")]).unwrap() - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((once.amplitude_of(&[ModeId::v("p")]).unwrap() - FRAC_1_SQRT_2).norm() < 1e-15);
        let twice = once.apply_mode_unitary(&had).unwrap();
        assert!(twice.max_amplitude_diff(&h).unwrap() < 1e-15);
    }

    #[test]
    fn mirror_phases() {
        let reg = Arc::new(ModeRegistry::with_paths(["p"]).unwrap());
        let h = one_photon(&reg, &[(ModeId::h("p"), ONE)]);
        let m = mirror("p").unwrap();
        let once = h.apply_mode_unitary(&m).unwrap();
        assert_eq!(once.amplitude_of(&[ModeId::h("p")]).unwrap(), I);
        let thrice = once.apply_mode_unitary(&m).unwrap().apply_mode_unitary(&m).unwrap();
        assert!((thrice.amplitude_of(&[ModeId::h("p")]).unwrap() + I).norm() < 1e-15);
        assert!((thrice.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn every_constructor_is_unitary() {
        let built = [
            beam_splitter(
                &ModeId::bare("a"),
                &ModeId::bare("b"),
                &ModeId::bare("c"),
                &ModeId::bare("d"),
            )
            .unwrap(),
            path_beam_splitter("a", "b", "b", "a").unwrap(),
            polarizing_beam_splitter("a", "b", "c").unwrap(),
            two_input_polarizing_beam_splitter("a", "b", "c", "d").unwrap(),
            polarization_rotator(RotatorKind::Flip, "a").unwrap(),
            polarization_rotator(RotatorKind::Hadamard, "a").unwrap(),
            mirror("a").unwrap(),
        ];
        for u in &built {
            assert!(u.matrix().unitarity_deviation() < 1e-12, "{u:?}");
        }
    }

    #[test]
    fn beam_splitter_symmetric_under_port_swap() {
        let [a, b, c_, d] = ["a", "b", "c", "d"].map(ModeId::bare);
        let reg = ModeRegistry::new([a.clone(), b.clone(), c_.clone(), d.clone()]).unwrap();
        let one = beam_splitter(&a, &b, &c_, &d).unwrap().embed(&reg).unwrap();
        let two = beam_splitter(&b, &a, &d, &c_).unwrap().embed(&reg).unwrap();
        assert!(one.max_abs_diff(&two) < 1e-15);
    }

    #[test]
    fn composition_matches_sequential_product() {
        let [a, b] = ["a", "b"].map(ModeId::bare);
        let bs = beam_splitter(&a, &b, &a, &b).unwrap();
        let composed = bs.then(&bs).unwrap();
        assert!((composed.matrix()[(0, 1)] - I).norm() < 1e-15);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = ElementSpec::PolarizingBeamSplitter {
            input: "psi0".into(),
            out_h: "psi1".into(),
            out_v: "psi2".into(),
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"polarizing_beam_splitter\""));
        let back: ElementSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(
            back.build().unwrap(),
            polarizing_beam_splitter("psi0", "psi1", "psi2").unwrap()
        );
    }
}
