//! Qubit extraction from Fock states and entanglement diagnostics.
//!
//! A photonic qubit is a pair of modes holding exactly one photon between
//! them (polarization or dual-rail encoding). Two-qubit amplitudes are
//! ordered `[HH, HV, VH, VV]`, i.e. index `2·q1 + q2` with `H = 0`, `V = 1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, ModeRegistry, OccupationVector};
use crate::matrix::ComplexMatrix;

/// Tolerance for "is normalized" checks on qubit states and density matrices.
pub const STATE_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Anything that is a pure state given by a flat amplitude vector.
pub trait PureState {
    fn amplitudes(&self) -> &[Complex64];

    fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(Complex64::norm_sqr).sum()
    }
}

/// Single polarization qubit `α|H⟩ + β|V⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationQubit {
    #[serde(with = "crate::serde_complex::many")]
    pub amps: [Complex64; 2],
}

impl PolarizationQubit {
    pub fn new(h: Complex64, v: Complex64) -> Self {
        PolarizationQubit { amps: [h, v] }
    }

    pub fn h(&self) -> Complex64 {
        self.amps[0]
    }

    pub fn v(&self) -> Complex64 {
        self.amps[1]
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return *self;
        }
        PolarizationQubit::new(self.amps[0] / n, self.amps[1] / n)
    }

    pub fn sigma_z(&self) -> Self {
        PolarizationQubit::new(self.amps[0], -self.amps[1])
    }
}

impl PureState for PolarizationQubit {
    fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}

/// Two-qubit pure state over `[HH, HV, VH, VV]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    #[serde(with = "crate::serde_complex::many")]
    pub amps: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amps: [Complex64; 4]) -> Self {
        TwoQubitState { amps }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return *self;
        }
        TwoQubitState::new(self.amps.map(|a| a / n))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= STATE_TOLERANCE
    }

    /// σz on qubit 0 (first photon) or 1 (second photon).
    pub fn sigma_z(&self, qubit: usize) -> Self {
        let mut amps = self.amps;
        for (idx, a) in amps.iter_mut().enumerate() {
            let bit = if qubit == 0 { idx >> 1 } else { idx & 1 };
            if bit == 1 {
                *a = -*a;
            }
        }
        TwoQubitState::new(amps)
    }

    /// `2|α_HH α_VV − α_HV α_VH|` for a normalized state.
    pub fn concurrence(&self) -> Result<f64> {
        if !self.is_normalized() {
            return Err(Error::Normalization(format!(
                "two-qubit state has squared norm {}",
                self.norm_sqr()
            )));
        }
        let [hh, hv, vh, vv] = self.amps;
        Ok((2.0 * (hh * vv - hv * vh).norm()).min(1.0))
    }

    pub fn to_density(&self) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityMatrix { matrix: m }
    }

    /// Reduced state of one qubit after tracing out the other.
    pub fn reduced_qubit(&self, keep: usize) -> DensityMatrix {
        self.to_density().partial_trace(keep)
    }

    /// Re-embeds the two qubits as two photons on `registry`.
    pub fn to_fock(&self, registry: Arc<ModeRegistry>, map: &[QubitEncoding; 2]) -> Result<FockState> {
        let mut terms = Vec::with_capacity(4);
        for (idx, &amp) in self.amps.iter().enumerate() {
            let mut occ = OccupationVector::zeros(registry.len());
            occ[registry.index_of(map[0].mode(idx >> 1))?] += 1;
            occ[registry.index_of(map[1].mode(idx & 1))?] += 1;
            terms.push((occ, amp));
        }
        FockState::from_terms(registry, 2, terms)
    }
}

impl PureState for TwoQubitState {
    fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Config("density matrix must be square".into()));
        }
        if matrix.max_abs_diff(&matrix.adjoint()) > 1e-12 {
            return Err(Error::Config("density matrix is not Hermitian".into()));
        }
        let rho = DensityMatrix { matrix };
        let trace = rho.trace();
        if (trace - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::Normalization(format!("density matrix trace {trace}")));
        }
        if rho.eigenvalues().iter().any(|&e| e < -STATE_TOLERANCE) {
            return Err(Error::Config("density matrix has a negative eigenvalue".into()));
        }
        Ok(rho)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        let squared = &self.matrix * &self.matrix;
        (0..self.dim()).map(|i| squared[(i, i)].re).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_eigen(&self.matrix).0;
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Trace out one qubit of a 4×4 two-qubit density matrix.
    pub fn partial_trace(&self, keep: usize) -> DensityMatrix {
        assert_eq!(self.dim(), 4, "partial trace needs a two-qubit matrix");
        let mut out = ComplexMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                for t in 0..2 {
                    let (i, j) = if keep == 0 {
                        (2 * a + t, 2 * b + t)
                    } else {
                        (2 * t + a, 2 * t + b)
                    };
                    out[(a, b)] += self.matrix[(i, j)];
                }
            }
        }
        DensityMatrix { matrix: out }
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized pure state of matching dimension.
    pub fn fidelity_with(&self, psi: &impl PureState) -> Result<f64> {
        let amps = psi.amplitudes();
        if amps.len() != self.dim() {
            return Err(Error::Config("dimension mismatch".into()));
        }
        let mut acc = ZERO;
        for i in 0..amps.len() {
            for j in 0..amps.len() {
                acc += amps[i].conj() * self.matrix[(i, j)] * amps[j];
            }
        }
        Ok(acc.re / psi.norm_sqr())
    }

    /// Wootters concurrence `max(0, λ1 − λ2 − λ3 − λ4)` where `λ_i` are the
    /// square roots of the eigenvalues of `√ρ ρ̃ √ρ`, `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
    pub fn concurrence(&self) -> Result<f64> {
        if self.dim() != 4 {
            return Err(Error::Config("concurrence needs a two-qubit state".into()));
        }
        if (self.trace() - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::Normalization(format!("density matrix trace {}", self.trace())));
        }
        let flip = [(0, 3, -1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, -1.0)];
        let mut tilde = ComplexMatrix::zeros(4, 4);
        for &(i, k, si) in &flip {
            for &(j, l, sj) in &flip {
                tilde[(i, j)] = self.matrix[(k, l)].conj() * si * sj;
            }
        }
        let sqrt_rho = matrix_sqrt(&self.matrix);
        let m = &(&sqrt_rho * &tilde) * &sqrt_rho;
        let (ev, _) = hermitian_eigen(&m);
        // Round-off eigenvalues of order 1e-16 would otherwise survive the
        // square root as 1e-8.
        let floor = 1e-14 * ev.iter().fold(1e-300f64, |a, &e| a.max(e.abs()));
        let mut lambdas: Vec<f64> = ev.into_iter().map(|e| if e < floor { 0.0 } else { e.sqrt() }).collect();
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
    }
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn from_nalgebra(m: &DMatrix<Complex64>) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, DMatrix<Complex64>) {
    let a = to_nalgebra(m);
    // Symmetrize away rounding noise before the Hermitian solver.
    let sym = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn matrix_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (ev, vecs) = hermitian_eigen(m);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        ev.len(),
        ev.iter().map(|&e| Complex64::new(e.max(0.0).sqrt(), 0.0)),
    ));
    from_nalgebra(&(&vecs * diag * vecs.adjoint()))
}

/// `|⟨x|y⟩|² / (‖x‖²‖y‖²)`: global-phase invariant overlap of pure states.
pub fn fidelity<S: PureState>(x: &S, y: &S) -> Result<f64> {
    let (a, b) = (x.amplitudes(), y.amplitudes());
    if a.len() != b.len() {
        return Err(Error::Config(format!("dimensions {} and {} differ", a.len(), b.len())));
    }
    let overlap: Complex64 = a.iter().zip(b).map(|(p, q)| p.conj() * q).sum();
    let denom = x.norm_sqr() * y.norm_sqr();
    if denom == 0.0 {
        return Err(Error::Normalization("fidelity with a zero state".into()));
    }
    Ok((overlap.norm_sqr() / denom).min(1.0))
}

/// Fidelity between two Fock states on the same registry.
pub fn fock_fidelity(x: &FockState, y: &FockState) -> Result<f64> {
    let denom = x.norm_sqr() * y.norm_sqr();
    if denom == 0.0 {
        return Err(Error::Normalization("fidelity with a zero state".into()));
    }
    Ok((x.inner_product(y)?.norm_sqr() / denom).min(1.0))
}

/// The two modes carrying a qubit's `|0⟩` (H) and `|1⟩` (V) states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitEncoding {
    pub zero: ModeId,
    pub one: ModeId,
}

impl QubitEncoding {
    pub fn new(zero: ModeId, one: ModeId) -> Self {
        QubitEncoding { zero, one }
    }

    /// Polarization qubit on a path.
    pub fn polarization(path: &str) -> Self {
        QubitEncoding::new(ModeId::h(path), ModeId::v(path))
    }

    fn mode(&self, bit: usize) -> &ModeId {
        if bit == 0 {
            &self.zero
        } else {
            &self.one
        }
    }
}

/// Result of extracting qubits: pure when the rest of the system factors out,
/// mixed otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Reduced<T> {
    Pure(T),
    Mixed(DensityMatrix),
}

impl<T> Reduced<T> {
    pub fn pure(self) -> Option<T> {
        match self {
            Reduced::Pure(s) => Some(s),
            Reduced::Mixed(_) => None,
        }
    }
}

impl Reduced<TwoQubitState> {
    pub fn concurrence(&self) -> Result<f64> {
        match self {
            Reduced::Pure(s) => s.concurrence(),
            Reduced::Mixed(rho) => rho.concurrence(),
        }
    }
}

/// Groups the state by the occupation of every non-qubit mode and returns
/// the qubit amplitudes per group. Terms outside the encoded subspace are
/// dropped.
fn group_encoded(state: &FockState, qubits: &[&QubitEncoding]) -> Result<BTreeMap<OccupationVector, Vec<Complex64>>> {
    let registry = state.registry();
    let idx = qubits
        .iter()
        .map(|q| Ok((registry.index_of(&q.zero)?, registry.index_of(&q.one)?)))
        .collect::<Result<Vec<_>>>()?;
    let dim = 1usize << qubits.len();
    let mut groups: BTreeMap<OccupationVector, Vec<Complex64>> = BTreeMap::new();
    let mut ever_occupied = false;
    for (occ, amp) in state.terms() {
        let mut rest = occ.clone();
        let mut basis = 0usize;
        let mut encoded = true;
        for &(z, o) in &idx {
            let (nz, no) = (occ[z], occ[o]);
            ever_occupied |= nz + no > 0;
            if nz + no != 1 {
                encoded = false;
            }
            basis = (basis << 1) | usize::from(no);
            rest[z] = 0;
            rest[o] = 0;
        }
        if encoded {
            groups.entry(rest).or_insert_with(|| vec![ZERO; dim])[basis] += amp;
        }
    }
    if !ever_occupied {
        return Err(Error::Encoding("qubit modes are empty in every term".into()));
    }
    if groups.is_empty() {
        return Err(Error::Encoding(
            "no term holds exactly one photon per qubit mode pair".into(),
        ));
    }
    Ok(groups)
}

fn reduce(groups: BTreeMap<OccupationVector, Vec<Complex64>>) -> Result<Reduced<Vec<Complex64>>> {
    let mut vectors: Vec<Vec<Complex64>> = groups.into_values().collect();
    let total: f64 = vectors.iter().flatten().map(Complex64::norm_sqr).sum();
    if total == 0.0 {
        return Err(Error::Encoding("encoded subspace has zero weight".into()));
    }
    if vectors.len() == 1 {
        let v = vectors.pop().expect("one group");
        return Ok(Reduced::Pure(v.into_iter().map(|a| a / total.sqrt()).collect()));
    }
    let dim = vectors[0].len();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for v in &vectors {
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] += v[i] * v[j].conj() / total;
            }
        }
    }
    let rho = DensityMatrix::new(rho)?;
    if rho.purity() > 1.0 - 1e-12 {
        let (ev, vecs) = hermitian_eigen(rho.matrix());
        let top = (0..ev.len())
            .max_by(|&a, &b| ev[a].total_cmp(&ev[b]))
            .expect("nonempty");
        return Ok(Reduced::Pure((0..dim).map(|i| vecs[(i, top)]).collect()));
    }
    Ok(Reduced::Mixed(rho))
}

/// Extracts two qubits from a Fock state. When the remaining photons are in a
/// single configuration the result is pure; otherwise the remainder is traced
/// out.
pub fn reduce_to_two_qubits(state: &FockState, qubits: &[QubitEncoding; 2]) -> Result<Reduced<TwoQubitState>> {
    let groups = group_encoded(state, &[&qubits[0], &qubits[1]])?;
    Ok(match reduce(groups)? {
        Reduced::Pure(v) => Reduced::Pure(TwoQubitState::new([v[0], v[1], v[2], v[3]])),
        Reduced::Mixed(rho) => Reduced::Mixed(rho),
    })
}

/// Single-qubit analogue of [`reduce_to_two_qubits`].
pub fn reduce_to_qubit(state: &FockState, qubit: &QubitEncoding) -> Result<Reduced<PolarizationQubit>> {
    let groups = group_encoded(state, &[qubit])?;
    Ok(match reduce(groups)? {
        Reduced::Pure(v) => Reduced::Pure(PolarizationQubit::new(v[0], v[1])),
        Reduced::Mixed(rho) => Reduced::Mixed(rho),
    })
}
