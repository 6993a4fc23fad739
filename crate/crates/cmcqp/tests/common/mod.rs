//! Shared helpers for the oracle test suites: random instance generation,
//! finite-difference gradients, and exact cubic fits of the search function.

#![allow(dead_code)]

use cmcqp::problem::{CMatrix, CVector, RVector};
use cmcqp::{CaseTag, Direction, PhaseVector, ProblemInstance, UnitModulusVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// i.i.d. standard complex normal entries (variance 1 per entry).
pub fn random_complex_matrix(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = 0.5_f64.sqrt();
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(s * normal(&mut rng), s * normal(&mut rng))
    })
}

/// Wishart-style Hermitian PSD matrix `B B^H / n`.
pub fn random_psd_matrix(n: usize, seed: u64) -> CMatrix {
    let b = random_complex_matrix(n, seed);
    (&b * b.adjoint()) / Complex64::new(n as f64, 0.0)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller on two uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn instance_a1(n: usize, seed: u64, direction: Direction) -> ProblemInstance {
    ProblemInstance::new(random_complex_matrix(n, seed), CaseTag::A1, direction).unwrap()
}

pub fn instance_a2(n: usize, seed: u64, direction: Direction) -> ProblemInstance {
    ProblemInstance::new(random_psd_matrix(n, seed), CaseTag::A2, direction).unwrap()
}

pub fn random_point(n: usize, seed: u64) -> (PhaseVector, UnitModulusVector) {
    let theta = PhaseVector::random(n, seed);
    let x = theta.to_unit_modulus();
    (theta, x)
}

/// Objective evaluated directly from the instance matrix, scalar double
/// loop; independent of the library's product kernels.
pub fn brute_force_objective(inst: &ProblemInstance, x: &UnitModulusVector) -> f64 {
    let a = inst.matrix();
    let n = a.nrows();
    let mut f = Complex64::default();
    for i in 0..n {
        for j in 0..n {
            f += x.as_vector()[i].conj() * a[(i, j)] * x.as_vector()[j];
        }
    }
    match inst.case() {
        CaseTag::A1 => f.norm_sqr(),
        CaseTag::A2 => f.re,
    }
}

pub fn objective_at(inst: &ProblemInstance, theta: &RVector) -> f64 {
    let x = theta.map(|t| Complex64::new(t.cos(), t.sin()));
    let a = inst.matrix();
    let f = x.dotc(&(a * &x));
    match inst.case() {
        CaseTag::A1 => f.norm_sqr(),
        CaseTag::A2 => f.re,
    }
}

/// Central finite differences of the instance objective.
pub fn fd_gradient(inst: &ProblemInstance, theta: &RVector, h: f64) -> RVector {
    RVector::from_fn(theta.len(), |i, _| {
        let mut tp = theta.clone();
        tp[i] += h;
        let mut tm = theta.clone();
        tm[i] -= h;
        (objective_at(inst, &tp) - objective_at(inst, &tm)) / (2.0 * h)
    })
}

/// Polynomial fit of the sampled search function on the scaled nodes
/// `rho = k s`, `k = 0..=4` (exact degree-4 interpolation; the extra node
/// pushes the cubic coefficient's truncation error to O(s^2)). Returns the
/// (cubic, quadratic, linear) coefficients.
pub fn fit_cubic(f: &mut dyn FnMut(f64) -> f64, s: f64) -> (f64, f64, f64) {
    let nodes = [0.0, 1.0, 2.0, 3.0, 4.0];
    let vals = nalgebra::DVector::from_iterator(5, nodes.iter().map(|&k| f(k * s)));
    let vander = nalgebra::DMatrix::from_fn(5, 5, |i, j| nodes[i].powi(j as i32));
    let coef = vander.lu().solve(&vals).expect("Vandermonde is invertible");
    (coef[3] / (s * s * s), coef[2] / (s * s), coef[1] / s)
}

/// Dense Hessian of the instance objective by central differences of the
/// analytic gradient, column by column.
pub fn dense_fd_hessian(inst: &ProblemInstance, theta: &RVector, h: f64) -> nalgebra::DMatrix<f64> {
    let n = theta.len();
    let grad = |t: &RVector| -> RVector {
        let x = cmcqp::UnitModulusVector::new(t.map(|v| Complex64::new(v.cos(), v.sin()))).unwrap();
        match inst.case() {
            CaseTag::A1 => cmcqp::objective::gradient_case1(inst, &x)
                .unwrap()
                .as_vector()
                .clone(),
            CaseTag::A2 => cmcqp::objective::gradient_case2(inst, &x)
                .unwrap()
                .as_vector()
                .clone(),
        }
    };
    let mut hmat = nalgebra::DMatrix::zeros(n, n);
    for j in 0..n {
        let mut tp = theta.clone();
        tp[j] += h;
        let mut tm = theta.clone();
        tm[j] -= h;
        let col = (grad(&tp) - grad(&tm)) / (2.0 * h);
        hmat.set_column(j, &col);
    }
    // symmetrize the finite-difference noise
    let ht = hmat.transpose();
    (hmat + ht) * 0.5
}

pub fn unit_vector(v: &CVector) -> f64 {
    v.iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max)
}
