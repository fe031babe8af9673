//! Few-photon bosonic Fock states over a registry of named modes.
//!
//! A [`FockState`] is a sparse superposition of occupation-number vectors with
//! a fixed total photon number. Linear optical elements act on creation
//! operators, `a†_j → Σ_k U[j][k] a†_k`, and are applied exactly by expanding
//! the product of creation operators on the acted modes. The matrix-permanent
//! route in [`crate::oracle`] computes the same amplitudes independently.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::ModeUnitary;
use crate::error::{Error, Result};

/// Amplitudes with modulus below this are dropped after every element.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Tolerance on `Σ|amplitude|² = 1` for the normalized flag and for
/// single-photon amplitude maps.
pub const NORM_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    /// Abstract or detector modes that carry no polarization label.
    None,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
            Polarization::None => f.write_str("-"),
        }
    }
}

/// A bosonic mode: spatial path label × polarization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId {
    pub path: String,
    pub polarization: Polarization,
}

impl ModeId {
    pub fn new(path: impl Into<String>, polarization: Polarization) -> Self {
        ModeId {
            path: path.into(),
            polarization,
        }
    }

    pub fn h(path: impl Into<String>) -> Self {
        Self::new(path, Polarization::H)
    }

    pub fn v(path: impl Into<String>) -> Self {
        Self::new(path, Polarization::V)
    }

    pub fn bare(path: impl Into<String>) -> Self {
        Self::new(path, Polarization::None)
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarization {
            Polarization::None => write!(f, "{}", self.path),
            p => write!(f, "{}:{}", self.path, p),
        }
    }
}

/// Ordered, duplicate-free list of modes. Occupation vectors index against
/// this order.
#[derive(Debug, Clone, Default)]
pub struct ModeRegistry {
    modes: Vec<ModeId>,
    index: HashMap<ModeId, usize>,
}

impl PartialEq for ModeRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
    }
}

impl ModeRegistry {
    pub fn new(modes: impl IntoIterator<Item = ModeId>) -> Result<Self> {
        let mut registry = ModeRegistry::default();
        for mode in modes {
            registry.push(mode)?;
        }
        Ok(registry)
    }

    /// Registers both polarization sub-modes of every listed path, in order.
    pub fn with_paths<'a>(paths: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        Self::new(paths.into_iter().flat_map(|p| [ModeId::h(p), ModeId::v(p)]))
    }

    pub fn push(&mut self, mode: ModeId) -> Result<usize> {
        if self.index.contains_key(&mode) {
            return Err(Error::Config(format!("mode {mode} registered twice")));
        }
        let i = self.modes.len();
        self.index.insert(mode.clone(), i);
        self.modes.push(mode);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &ModeId {
        &self.modes[i]
    }

    pub fn contains(&self, mode: &ModeId) -> bool {
        self.index.contains_key(mode)
    }

    pub fn index_of(&self, mode: &ModeId) -> Result<usize> {
        self.index
            .get(mode)
            .copied()
            .ok_or_else(|| Error::Mode(format!("mode {mode} is not registered")))
    }

    /// Indices of every registered mode whose path label satisfies `pred`.
    pub fn indices_where(&self, mut pred: impl FnMut(&ModeId) -> bool) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| pred(m))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Photon count per registered mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(Vec<u8>);

impl OccupationVector {
    pub fn zeros(n_modes: usize) -> Self {
        OccupationVector(vec![0; n_modes])
    }

    pub fn from_counts(counts: Vec<u8>) -> Self {
        OccupationVector(counts)
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Π n_i!`
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }
}

impl std::ops::Index<usize> for OccupationVector {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for OccupationVector {
    fn index_mut(&mut self, i: usize) -> &mut u8 {
        &mut self.0[i]
    }
}

pub(crate) fn factorial(n: u8) -> f64 {
    (1..=u32::from(n)).map(f64::from).product()
}

/// Pure state of a fixed number of photons, stored sparsely in the
/// lexicographically ordered occupation basis.
#[derive(Debug, Clone)]
pub struct FockState {
    registry: Arc<ModeRegistry>,
    photon_count: u32,
    terms: BTreeMap<OccupationVector, Complex64>,
    normalized: bool,
}

impl FockState {
    /// Zero-photon state with unit amplitude.
    pub fn vacuum(registry: Arc<ModeRegistry>) -> Result<Self> {
        if registry.is_empty() {
            return Err(Error::Config("vacuum needs a nonempty registry".into()));
        }
        let mut terms = BTreeMap::new();
        terms.insert(OccupationVector::zeros(registry.len()), Complex64::new(1.0, 0.0));
        Ok(FockState {
            registry,
            photon_count: 0,
            terms,
            normalized: true,
        })
    }

    /// Builds a state from explicit terms. Repeated occupations accumulate.
    pub fn from_terms(
        registry: Arc<ModeRegistry>,
        photon_count: u32,
        terms: impl IntoIterator<Item = (OccupationVector, Complex64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != registry.len() {
                return Err(Error::Config(format!(
                    "occupation vector has {} entries for a registry of {}",
                    occ.len(),
                    registry.len()
                )));
            }
            if occ.total() != photon_count {
                return Err(Error::Config(format!(
                    "occupation holds {} photons, state declares {photon_count}",
                    occ.total()
                )));
            }
            *map.entry(occ).or_insert(ZERO) += amp;
        }
        Ok(Self::assemble(registry, photon_count, map))
    }

    /// Convenience for tests and analytic references: each term lists the
    /// occupied modes (repeats allowed for multiply occupied modes).
    pub fn from_mode_terms(registry: Arc<ModeRegistry>, terms: &[(&[ModeId], Complex64)]) -> Result<Self> {
        let photon_count = terms.first().map_or(0, |(m, _)| m.len() as u32);
        let mut converted = Vec::with_capacity(terms.len());
        for (modes, amp) in terms {
            let mut occ = OccupationVector::zeros(registry.len());
            for m in modes.iter() {
                occ[registry.index_of(m)?] += 1;
            }
            converted.push((occ, *amp));
        }
        Self::from_terms(registry, photon_count, converted)
    }

    fn assemble(
        registry: Arc<ModeRegistry>,
        photon_count: u32,
        mut terms: BTreeMap<OccupationVector, Complex64>,
    ) -> Self {
        terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        let norm_sqr: f64 = terms.values().map(Complex64::norm_sqr).sum();
        FockState {
            registry,
            photon_count,
            terms,
            normalized: (norm_sqr - 1.0).abs() <= NORM_TOLERANCE,
        }
    }

    /// The empty superposition (returned by zero-probability projections).
    pub fn zero(registry: Arc<ModeRegistry>, photon_count: u32) -> Self {
        FockState {
            registry,
            photon_count,
            terms: BTreeMap::new(),
            normalized: false,
        }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn photon_count(&self) -> u32 {
        self.photon_count
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic occupation order.
    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or(ZERO)
    }

    /// Amplitude of the basis state with one photon in each listed mode
    /// (repeat a mode to ask for multiple occupancy).
    pub fn amplitude_of(&self, modes: &[ModeId]) -> Result<Complex64> {
        let mut occ = OccupationVector::zeros(self.registry.len());
        for m in modes {
            occ[self.registry.index_of(m)?] += 1;
        }
        Ok(self.amplitude(&occ))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm. The zero state is returned unchanged.
    pub fn normalized(&self) -> FockState {
        let norm = self.norm();
        if norm == 0.0 {
            return self.clone();
        }
        let terms = self.terms.iter().map(|(o, a)| (o.clone(), a / norm)).collect();
        Self::assemble(self.registry.clone(), self.photon_count, terms)
    }

    pub fn scaled(&self, factor: Complex64) -> FockState {
        let terms = self.terms.iter().map(|(o, a)| (o.clone(), a * factor)).collect();
        Self::assemble(self.registry.clone(), self.photon_count, terms)
    }

    fn check_same_space(&self, other: &FockState) -> Result<()> {
        if !Arc::ptr_eq(&self.registry, &other.registry) && *self.registry != *other.registry {
            return Err(Error::Mode("states live on different mode registries".into()));
        }
        Ok(())
    }

    /// Adds one photon in the superposition `Σ c_k a†_k`. The coefficients must
    /// have unit norm within [`NORM_TOLERANCE`].
    pub fn create_photon(&self, amplitude_map: &[(ModeId, Complex64)]) -> Result<FockState> {
        let weight: f64 = amplitude_map.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (weight - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization(format!(
                "single-photon amplitudes have squared norm {weight}"
            )));
        }
        self.create_photon_unnormalized(amplitude_map)
    }

    /// As [`FockState::create_photon`] without the normalization check.
    pub fn create_photon_unnormalized(&self, amplitude_map: &[(ModeId, Complex64)]) -> Result<FockState> {
        let targets = amplitude_map
            .iter()
            .map(|(m, c)| Ok((self.registry.index_of(m)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        let mut out = BTreeMap::new();
        for (occ, amp) in &self.terms {
            for &(i, c) in &targets {
                let mut next = occ.clone();
                let n = next[i];
                next[i] = n
                    .checked_add(1)
                    .ok_or_else(|| Error::Config("mode occupation overflow".into()))?;
                let bosonic = f64::from(u32::from(n) + 1).sqrt();
                *out.entry(next).or_insert(ZERO) += amp * c * bosonic;
            }
        }
        Ok(Self::assemble(self.registry.clone(), self.photon_count + 1, out))
    }

    /// `⟨self|other⟩` in the orthonormal occupation basis.
    pub fn inner_product(&self, other: &FockState) -> Result<Complex64> {
        self.check_same_space(other)?;
        if self.photon_count != other.photon_count {
            return Ok(ZERO);
        }
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = ZERO;
        for (occ, a) in &small.terms {
            if let Some(b) = large.terms.get(occ) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// Applies a mode transformation. Every photon on an acted mode `j` is
    /// redistributed as `a†_j → Σ_k U[j][k] a†_k`; bosonic `√n!` factors are
    /// carried exactly.
    pub fn apply_mode_unitary(&self, unitary: &ModeUnitary) -> Result<FockState> {
        let acted = unitary
            .modes()
            .iter()
            .map(|m| self.registry.index_of(m))
            .collect::<Result<Vec<_>>>()?;
        let matrix = unitary.matrix();
        let mut out = BTreeMap::new();
        let mut photons = Vec::new();
        for (occ, amp) in &self.terms {
            photons.clear();
            let mut rest = occ.clone();
            let mut denominator = 1.0;
            for (local, &global) in acted.iter().enumerate() {
                let n = occ[global];
                photons.extend(std::iter::repeat_n(local, usize::from(n)));
                denominator *= factorial(n);
                rest[global] = 0;
            }
            if photons.is_empty() {
                *out.entry(occ.clone()).or_insert(ZERO) += amp;
                continue;
            }
            let prefactor = amp / denominator.sqrt();
            distribute(&photons, matrix, &acted, &mut rest, prefactor, &mut out);
        }
        Ok(Self::assemble(self.registry.clone(), self.photon_count, out))
    }

    /// Conditions on a heralding pattern. Returns the renormalized conditional
    /// state and the probability of the event; an impossible event yields the
    /// zero state with probability 0.
    pub fn project(&self, pattern: &PostSelectionPattern) -> Result<(FockState, f64)> {
        let resolved = pattern.resolve(&self.registry)?;
        let kept: BTreeMap<_, _> = self
            .terms
            .iter()
            .filter(|(occ, _)| resolved.matches(occ))
            .map(|(o, a)| (o.clone(), *a))
            .collect();
        let total = self.norm_sqr();
        let mass: f64 = kept.values().map(Complex64::norm_sqr).sum();
        if mass == 0.0 || total == 0.0 {
            return Ok((FockState::zero(self.registry.clone(), self.photon_count), 0.0));
        }
        let scale = mass.sqrt();
        let terms = kept.into_iter().map(|(o, a)| (o, a / scale)).collect();
        Ok((
            Self::assemble(self.registry.clone(), self.photon_count, terms),
            mass / total,
        ))
    }

    /// Keeps the matching terms without renormalizing.
    pub fn filter(&self, pattern: &PostSelectionPattern) -> Result<FockState> {
        let resolved = pattern.resolve(&self.registry)?;
        let terms = self
            .terms
            .iter()
            .filter(|(occ, _)| resolved.matches(occ))
            .map(|(o, a)| (o.clone(), *a))
            .collect();
        Ok(Self::assemble(self.registry.clone(), self.photon_count, terms))
    }

    /// Largest per-amplitude difference against another state on the same
    /// registry.
    pub fn max_amplitude_diff(&self, other: &FockState) -> Result<f64> {
        self.check_same_space(other)?;
        let mut worst = 0.0_f64;
        for (occ, a) in &self.terms {
            worst = worst.max((a - other.amplitude(occ)).norm());
        }
        for (occ, b) in &other.terms {
            if !self.terms.contains_key(occ) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }
}

fn distribute(
    photons: &[usize],
    matrix: &crate::matrix::ComplexMatrix,
    acted: &[usize],
    occ: &mut OccupationVector,
    coefficient: Complex64,
    out: &mut BTreeMap<OccupationVector, Complex64>,
) {
    match photons.split_first() {
        None => {
            let created: f64 = acted.iter().map(|&g| factorial(occ[g])).product();
            *out.entry(occ.clone()).or_insert(ZERO) += coefficient * created.sqrt();
        }
        Some((&source, rest)) => {
            for (k, &u) in matrix.row(source).iter().enumerate() {
                if u == ZERO {
                    continue;
                }
                occ[acted[k]] += 1;
                distribute(rest, matrix, acted, occ, coefficient * u, out);
                occ[acted[k]] -= 1;
            }
        }
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (occ, amp)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|", amp.re, amp.im)?;
            let mut first = true;
            for (i, &count) in occ.counts().iter().enumerate() {
                if count == 0 {
                    continue;
                }
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                if count > 1 {
                    write!(f, "{count}·")?;
                }
                write!(f, "{}", self.registry.mode(i))?;
            }
            f.write_str("⟩")?;
        }
        Ok(())
    }
}

/// One heralding constraint: the listed modes together hold exactly `count`
/// photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyConstraint {
    pub modes: Vec<ModeId>,
    pub count: u32,
}

/// Conjunction of exact occupancy constraints defining a detection event.
/// Single-mode constraints are the usual per-mode pattern; grouped modes
/// model a detector that does not resolve polarization, or a coincidence
/// condition on a whole region.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PostSelectionPattern {
    constraints: Vec<OccupancyConstraint>,
}

impl PostSelectionPattern {
    pub fn new() -> Self {
        Self::default()
    }

    /// Requires mode `mode` to hold exactly `count` photons.
    pub fn mode(mut self, mode: ModeId, count: u32) -> Self {
        self.constraints.push(OccupancyConstraint {
            modes: vec![mode],
            count,
        });
        self
    }

    /// Requires the listed modes to hold exactly `count` photons in total.
    pub fn group(mut self, modes: impl IntoIterator<Item = ModeId>, count: u32) -> Self {
        self.constraints.push(OccupancyConstraint {
            modes: modes.into_iter().collect(),
            count,
        });
        self
    }

    pub fn constraints(&self) -> &[OccupancyConstraint] {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    fn resolve(&self, registry: &ModeRegistry) -> Result<ResolvedPattern> {
        let groups = self
            .constraints
            .iter()
            .map(|c| {
                let idx = c
                    .modes
                    .iter()
                    .map(|m| registry.index_of(m))
                    .collect::<Result<Vec<_>>>()?;
                Ok((idx, c.count))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedPattern { groups })
    }
}

struct ResolvedPattern {
    groups: Vec<(Vec<usize>, u32)>,
}

impl ResolvedPattern {
    fn matches(&self, occ: &OccupationVector) -> bool {
        self.groups
            .iter()
            .all(|(idx, count)| idx.iter().map(|&i| u32::from(occ[i])).sum::<u32>() == *count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::beam_splitter;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_modes() -> Arc<ModeRegistry> {
        Arc::new(ModeRegistry::new([ModeId::bare("x"), ModeId::bare("y")]).unwrap())
    }

    fn bs_xy() -> ModeUnitary {
        let (x, y) = (ModeId::bare("x"), ModeId::bare("y"));
        beam_splitter(&x, &y, &x, &y).unwrap()
    }

    #[test]
    fn vacuum_has_single_unit_term() {
        let vac = FockState::vacuum(two_modes()).unwrap();
        assert_eq!(vac.photon_count(), 0);
        assert_eq!(vac.len(), 1);
        assert_eq!(vac.amplitude(&OccupationVector::zeros(2)), c(1.0, 0.0));
        assert!((vac.norm() - 1.0).abs() < 1e-15);
        assert!(vac.is_normalized());
    }

    #[test]
    fn vacuum_on_empty_registry_is_config_error() {
        let err = FockState::vacuum(Arc::new(ModeRegistry::default())).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn unitary_leaves_vacuum_alone() {
        let vac = FockState::vacuum(two_modes()).unwrap();
        let out = vac.apply_mode_unitary(&bs_xy()).unwrap();
        assert!(out.max_amplitude_diff(&vac).unwrap() < 1e-15);
    }

    #[test]
    fn duplicate_registration_rejected() {
        assert!(ModeRegistry::new([ModeId::h("p"), ModeId::h("p")]).is_err());
    }

    #[test]
    fn polarization_qubit_from_single_creation() {
        let reg = Arc::new(ModeRegistry::with_paths(["psi0"]).unwrap());
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let state = FockState::vacuum(reg)
            .unwrap()
            .create_photon(&[(ModeId::h("psi0"), a), (ModeId::v("psi0"), b)])
            .unwrap();
        assert_eq!(state.photon_count(), 1);
        assert_eq!(state.amplitude_of(&[ModeId::h("psi0")]).unwrap(), a);
        assert_eq!(state.amplitude_of(&[ModeId::v("psi0")]).unwrap(), b);
    }

    #[test]
    fn second_photon_in_same_mode_gets_sqrt_two() {
        let reg = two_modes();
        let x = ModeId::bare("x");
        let one = FockState::vacuum(reg)
            .unwrap()
            .create_photon(&[(x.clone(), c(1.0, 0.0))])
            .unwrap();
        let two = one.create_photon_unnormalized(&[(x.clone(), c(1.0, 0.0))]).unwrap();
        let amp = two.amplitude_of(&[x.clone(), x]).unwrap();
        assert!((amp - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(!two.is_normalized());
    }

    #[test]
    fn unnormalized_map_rejected() {
        let vac = FockState::vacuum(two_modes()).unwrap();
        let err = vac.create_photon(&[(ModeId::bare("x"), c(0.5, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::Normalization(_)));
    }

    #[test]
    fn unregistered_mode_rejected() {
        let vac = FockState::vacuum(two_modes()).unwrap();
        let err = vac.create_photon(&[(ModeId::bare("z"), c(1.0, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::Mode(_)));
    }

    #[test]
    fn product_of_three_creations() {
        let reg = Arc::new(ModeRegistry::with_paths(["p", "q", "r"]).unwrap());
        let s = FockState::vacuum(reg)
            .unwrap()
            .create_photon(&[(ModeId::h("p"), c(0.6, 0.0)), (ModeId::v("p"), c(0.8, 0.0))])
            .unwrap()
            .create_photon(&[
                (ModeId::h("q"), c(FRAC_1_SQRT_2, 0.0)),
                (ModeId::v("q"), c(FRAC_1_SQRT_2, 0.0)),
            ])
            .unwrap()
            .create_photon(&[(ModeId::h("r"), c(0.0, 1.0))])
            .unwrap();
        assert_eq!(s.photon_count(), 3);
        assert_eq!(s.len(), 4);
        assert!(s.is_normalized());
        let amp = s
            .amplitude_of(&[ModeId::v("p"), ModeId::h("q"), ModeId::h("r")])
            .unwrap();
        assert!((amp - c(0.0, 0.8 * FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let reg = two_modes();
        let (x, y) = (ModeId::bare("x"), ModeId::bare("y"));
        let vac = FockState::vacuum(reg).unwrap();
        let sup = vac
            .create_photon(&[(x.clone(), c(FRAC_1_SQRT_2, 0.0)), (y.clone(), c(0.0, FRAC_1_SQRT_2))])
            .unwrap();
        let only_x = vac.create_photon(&[(x, c(1.0, 0.0))]).unwrap();
        let only_y = vac.create_photon(&[(y, c(1.0, 0.0))]).unwrap();
        assert!((sup.inner_product(&sup).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(only_x.inner_product(&only_y).unwrap(), ZERO);
        assert!((sup.inner_product(&only_x).unwrap() - FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn inner_product_across_registries_fails() {
        let a = FockState::vacuum(two_modes()).unwrap();
        let b = FockState::vacuum(Arc::new(ModeRegistry::with_paths(["p"]).unwrap())).unwrap();
        assert!(matches!(a.inner_product(&b), Err(Error::Mode(_))));
    }

    #[test]
    fn beam_splitter_single_photon() {
        let x = ModeId::bare("x");
        let s = FockState::vacuum(two_modes())
            .unwrap()
            .create_photon(&[(x.clone(), c(1.0, 0.0))])
            .unwrap();
        let out = s.apply_mode_unitary(&bs_xy()).unwrap();
        assert!((out.amplitude_of(&[x]).unwrap() - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((out.amplitude_of(&[ModeId::bare("y")]).unwrap() - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel_bunching() {
        let (x, y) = (ModeId::bare("x"), ModeId::bare("y"));
        let s = FockState::vacuum(two_modes())
            .unwrap()
            .create_photon(&[(x.clone(), c(1.0, 0.0))])
            .unwrap()
            .create_photon(&[(y.clone(), c(1.0, 0.0))])
            .unwrap();
        let out = s.apply_mode_unitary(&bs_xy()).unwrap();
        let bunched = c(0.0, FRAC_1_SQRT_2);
        assert!((out.amplitude_of(&[x.clone(), x.clone()]).unwrap() - bunched).norm() < 1e-15);
        assert!((out.amplitude_of(&[y.clone(), y.clone()]).unwrap() - bunched).norm() < 1e-15);
        assert!(out.amplitude_of(&[x, y]).unwrap().norm() < 1e-15);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let (x, y) = (ModeId::bare("x"), ModeId::bare("y"));
        let id = ModeUnitary::identity(vec![x.clone(), y.clone()]).unwrap();
        let s = FockState::vacuum(two_modes())
            .unwrap()
            .create_photon(&[(x, c(0.6, 0.0)), (y, c(0.0, 0.8))])
            .unwrap();
        assert_eq!(s.apply_mode_unitary(&id).unwrap().max_amplitude_diff(&s).unwrap(), 0.0);
    }

    #[test]
    fn projection_edge_cases() {
        let (x, y) = (ModeId::bare("x"), ModeId::bare("y"));
        let s = FockState::vacuum(two_modes())
            .unwrap()
            .create_photon(&[(x.clone(), c(0.6, 0.0)), (y.clone(), c(0.8, 0.0))])
            .unwrap();

        let (same, p) = s.project(&PostSelectionPattern::new()).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(same.max_amplitude_diff(&s).unwrap() < 1e-15);

        let (none, p) = s.project(&PostSelectionPattern::new().mode(x.clone(), 2)).unwrap();
        assert_eq!(p, 0.0);
        assert!(none.is_zero());

        let (on_y, p) = s.project(&PostSelectionPattern::new().mode(y.clone(), 1)).unwrap();
        assert!((p - 0.64).abs() < 1e-15);
        assert!(on_y.is_normalized());
        assert!((on_y.amplitude_of(&[y]).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn projection_on_unregistered_mode_fails() {
        let s = FockState::vacuum(two_modes()).unwrap();
        let pat = PostSelectionPattern::new().mode(ModeId::bare("nope"), 0);
        assert!(matches!(s.project(&pat), Err(Error::Mode(_))));
    }

    #[test]
    fn grouped_constraint_sums_modes() {
        let (x, y) = (ModeId::bare("x"), ModeId::bare("y"));
        let s = FockState::vacuum(two_modes())
            .unwrap()
            .create_photon(&[(x.clone(), c(0.6, 0.0)), (y.clone(), c(0.8, 0.0))])
            .unwrap();
        let (_, p) = s.project(&PostSelectionPattern::new().group([x, y], 1)).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn display_lists_occupied_modes() {
        let x = ModeId::h("psi1");
        let s = FockState::vacuum(Arc::new(ModeRegistry::with_paths(["psi1"]).unwrap()))
            .unwrap()
            .create_photon(&[(x, c(1.0, 0.0))])
            .unwrap();
        assert_eq!(s.to_string(), "(1.000000+0.000000i)|psi1:H⟩");
    }
}
