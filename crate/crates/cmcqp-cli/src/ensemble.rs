//! Random instance ensembles with deterministic, seed-addressed generation.

use cmcqp::problem::CMatrix;
use cmcqp::{CaseTag, Direction, ProblemInstance, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Matrix ensemble family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Entries i.i.d. standard complex normal (arbitrary structure, case A1).
    CaseA1Gaussian,
    /// `B B^H / n` with standard complex normal `B` (Hermitian PSD, case A2).
    CaseA2Wishart,
}

impl EnsembleKind {
    pub fn case(self) -> CaseTag {
        match self {
            EnsembleKind::CaseA1Gaussian => CaseTag::A1,
            EnsembleKind::CaseA2Wishart => CaseTag::A2,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "a1-gaussian" | "a1" => Some(EnsembleKind::CaseA1Gaussian),
            "a2-wishart" | "a2" => Some(EnsembleKind::CaseA2Wishart),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::CaseA1Gaussian => "a1-gaussian",
            EnsembleKind::CaseA2Wishart => "a2-wishart",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    pub n: usize,
    pub seed: u64,
}

/// Standard complex normal matrix (unit variance per entry).
fn complex_gaussian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let s = 0.5_f64.sqrt();
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// Draws one validated instance; identical seeds give identical matrices.
pub fn gen_instance(e: &Ensemble, direction: Direction) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(e.seed);
    match e.kind {
        EnsembleKind::CaseA1Gaussian => {
            ProblemInstance::case_a1(complex_gaussian(e.n, &mut rng), direction)
        }
        EnsembleKind::CaseA2Wishart => {
            let b = complex_gaussian(e.n, &mut rng);
            let a = (&b * b.adjoint()) / Complex64::new(e.n as f64, 0.0);
            ProblemInstance::case_a2(a, direction)
        }
    }
}
