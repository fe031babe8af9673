//! Independent evolution path: multi-photon scattering amplitudes from matrix
//! permanents.
//!
//! For a transformation `a†_j → Σ_k U[j][k] a†_k`,
//!
//! ```text
//! ⟨out| Û |in⟩ = per(U[in; out]) / √(Π in_i! · Π out_k!)
//! ```
//!
//! where `U[in; out]` repeats row `j` `in_j` times and column `k` `out_k`
//! times. Nothing here shares code with [`FockState::apply_mode_unitary`].

use num_complex::Complex64;

pub use crate::matrix::ComplexMatrix;

use crate::elements::ModeUnitary;
use crate::error::{Error, Result};
use crate::fock::{FockState, OccupationVector};

/// Largest matrix handed to [`permanent`].
pub const MAX_PERMANENT_SIZE: usize = 12;

/// Largest photon number accepted by [`evolve_via_permanents`].
pub const MAX_ORACLE_PHOTONS: u32 = 4;

/// Cap on the enumerated output basis.
pub const MAX_OUTPUT_BASIS: usize = 2_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Permanent by Ryser's inclusion–exclusion formula, visiting column subsets
/// in Gray-code order so each step updates the row sums by one column.
pub fn permanent(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::Config(format!(
            "permanent of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::Config(format!(
            "permanent size {n} exceeds {MAX_PERMANENT_SIZE}"
        )));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut previous_gray = 0usize;
    for k in 1usize..(1 << n) {
        let gray = k ^ (k >> 1);
        let column = (gray ^ previous_gray).trailing_zeros() as usize;
        let added = gray & (1 << column) != 0;
        for (i, sum) in row_sums.iter_mut().enumerate() {
            if added {
                *sum += m[(i, column)];
            } else {
                *sum -= m[(i, column)];
            }
        }
        previous_gray = gray;
        let product: Complex64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize).is_multiple_of(2) {
            total += product;
        } else {
            total -= product;
        }
    }
    Ok(total)
}

fn expand(occ: &OccupationVector) -> Vec<usize> {
    occ.counts()
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i, usize::from(n)))
        .collect()
}

/// `⟨out_occ| Û |in_occ⟩`, both occupations indexed by `u.modes()`.
pub fn scattering_amplitude(
    u: &ModeUnitary,
    in_occ: &OccupationVector,
    out_occ: &OccupationVector,
) -> Result<Complex64> {
    if in_occ.len() != u.dim() || out_occ.len() != u.dim() {
        return Err(Error::Config("occupation length differs from unitary size".into()));
    }
    if in_occ.total() != out_occ.total() {
        return Err(Error::Config(format!(
            "photon number {} in, {} out",
            in_occ.total(),
            out_occ.total()
        )));
    }
    let rows = expand(in_occ);
    let cols = expand(out_occ);
    Ok(sub_permanent(u.matrix(), &rows, &cols)? / (in_occ.factorial_product() * out_occ.factorial_product()).sqrt())
}

fn sub_permanent(matrix: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> Result<Complex64> {
    let mut sub = ComplexMatrix::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            sub[(r, c)] = matrix[(i, j)];
        }
    }
    permanent(&sub)
}

/// Evolves `input` through a full-registry unitary by summing scattering
/// amplitudes over every output occupation of the same photon number.
///
/// Output modes that no occupied input mode can reach are skipped; their
/// amplitudes vanish identically because the corresponding permanent has a
/// zero column.
pub fn evolve_via_permanents(u: &ModeUnitary, input: &FockState) -> Result<FockState> {
    let registry = input.registry();
    if u.modes() != registry.modes() {
        return Err(Error::Mode(
            "oracle needs a unitary over the state's full registry, in registry order".into(),
        ));
    }
    let n = input.photon_count();
    if n > MAX_ORACLE_PHOTONS {
        return Err(Error::Config(format!(
            "oracle supports at most {MAX_ORACLE_PHOTONS} photons, got {n}"
        )));
    }
    let dim = u.dim();
    let matrix = u.matrix();

    let mut occupied = vec![false; dim];
    for (occ, _) in input.terms() {
        for (i, &c) in occ.counts().iter().enumerate() {
            occupied[i] |= c > 0;
        }
    }
    let reachable: Vec<usize> = (0..dim)
        .filter(|&k| (0..dim).any(|j| occupied[j] && matrix[(j, k)] != ZERO))
        .collect();
    let basis_size = multiset_count(reachable.len(), n as usize);
    if basis_size > MAX_OUTPUT_BASIS as u128 {
        return Err(Error::Config(format!(
            "output basis of {basis_size} states exceeds the oracle cap"
        )));
    }

    let inputs: Vec<(Vec<usize>, f64, Complex64)> = input
        .terms()
        .map(|(occ, amp)| (expand(occ), occ.factorial_product(), *amp))
        .collect();

    let mut terms = Vec::new();
    let mut choice = vec![0usize; n as usize];
    loop {
        let cols: Vec<usize> = choice.iter().map(|&c| reachable.get(c).copied().unwrap_or(0)).collect();
        if n == 0 || !reachable.is_empty() {
            let mut out = OccupationVector::zeros(dim);
            for &c in &cols {
                out[c] += 1;
            }
            let out_fact = out.factorial_product();
            let mut amp = ZERO;
            for (rows, in_fact, a) in &inputs {
                amp += a * sub_permanent(matrix, rows, &cols)? / (in_fact * out_fact).sqrt();
            }
            terms.push((out, amp));
        }
        if !next_multiset(&mut choice, reachable.len()) {
            break;
        }
    }
    FockState::from_terms(registry.clone(), n, terms)
}

/// Advances a non-decreasing index tuple over `0..k`; false when exhausted.
fn next_multiset(choice: &mut [usize], k: usize) -> bool {
    let len = choice.len();
    if len == 0 || k == 0 {
        return false;
    }
    let mut i = len;
    while i > 0 {
        i -= 1;
        if choice[i] + 1 < k {
            let v = choice[i] + 1;
            for c in &mut choice[i..] {
                *c = v;
            }
            return true;
        }
    }
    false
}

fn multiset_count(k: usize, n: usize) -> u128 {
    // C(k + n - 1, n)
    if n == 0 {
        return 1;
    }
    if k == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..n as u128 {
        acc = acc * (k as u128 + i) / (i + 1);
    }
    acc
}
