//! Small dense linear-algebra helpers shared across the crate.
//!
//! Extreme-eigenvalue estimates run seeded power iterations so validation
//! stays O(N^2) per sweep; dense eigendecompositions are reserved for tests.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::problem::{CMatrix, CVector};

const POWER_ITERS: usize = 80;
const POWER_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

fn seeded_unit_vector(n: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = CVector::from_fn(n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let norm = v.norm();
    if norm > 0.0 {
        v /= Complex64::new(norm, 0.0);
    }
    v
}

/// Dominant eigenvalue (signed, largest magnitude) of a Hermitian matrix.
pub(crate) fn dominant_eig_hermitian(a: &CMatrix, seed: u64) -> f64 {
    let n = a.nrows();
    let mut v = seeded_unit_vector(n, seed);
    let mut rayleigh = 0.0;
    for _ in 0..POWER_ITERS {
        let w = a * &v;
        let norm = w.norm();
        if norm < f64::MIN_POSITIVE {
            return 0.0;
        }
        rayleigh = v.dotc(&w).re;
        v = w / Complex64::new(norm, 0.0);
    }
    rayleigh
}

/// Spectral norm (largest singular value) of a Hermitian matrix.
pub(crate) fn spectral_norm_hermitian(a: &CMatrix) -> f64 {
    dominant_eig_hermitian(a, POWER_SEED).abs()
}

/// Largest eigenvalue of a Hermitian matrix.
pub(crate) fn max_eig_hermitian(a: &CMatrix, norm2: f64) -> f64 {
    // shift up so every eigenvalue is nonnegative, then the dominant one is the max
    let n = a.nrows();
    let mut shifted = a.clone();
    let s = norm2 * 1.01 + f64::MIN_POSITIVE;
    for i in 0..n {
        shifted[(i, i)] += Complex64::new(s, 0.0);
    }
    dominant_eig_hermitian(&shifted, POWER_SEED ^ 0x5555) - s
}

/// Smallest eigenvalue of a Hermitian matrix given its spectral norm.
pub(crate) fn min_eig_hermitian(a: &CMatrix, norm2: f64) -> f64 {
    // B = sI - A has eigenvalues s - lambda >= 0; dominant(B) = s - lambda_min
    let n = a.nrows();
    let s = norm2 * 1.01 + f64::MIN_POSITIVE;
    let mut b = -a.clone();
    for i in 0..n {
        b[(i, i)] += Complex64::new(s, 0.0);
    }
    s - dominant_eig_hermitian(&b, POWER_SEED ^ 0xaaaa)
}

/// Deterministic real unit vector, used to start Hessian power iterations.
pub(crate) fn seeded_real_unit_vector(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0_f64..1.0));
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    v
}
