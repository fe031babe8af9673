//! Seeded random draws for parameter sweeps and randomized checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::elements::ModeUnitary;
use crate::error::Result;
use crate::fock::ModeId;
use crate::matrix::ComplexMatrix;

pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn random_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Random unitary: Gram–Schmidt on the rows of a complex Gaussian matrix.
pub fn random_unitary_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
        for r in &rows {
            let overlap: Complex64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(r) {
                *x -= overlap * y;
            }
        }
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        rows.push(v.into_iter().map(|x| x / norm).collect());
    }
    ComplexMatrix::from_rows(rows).expect("square by construction")
}

pub fn random_mode_unitary(modes: Vec<ModeId>, rng: &mut impl Rng) -> Result<ModeUnitary> {
    let n = modes.len();
    ModeUnitary::new(modes, random_unitary_matrix(n, rng))
}

/// Uniformly random normalized pair `(x, y)` with `|x|² + |y|² = 1`.
pub fn random_qubit(rng: &mut impl Rng) -> (Complex64, Complex64) {
    let (x, y) = (gaussian(rng), gaussian(rng));
    let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
    (x / norm, y / norm)
}

/// Random normalized real pair `(cos θ, sin θ)`, θ uniform on [0, 2π).
pub fn random_real_qubit(rng: &mut impl Rng) -> (Complex64, Complex64) {
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (Complex64::new(theta.cos(), 0.0), Complex64::new(theta.sin(), 0.0))
}
