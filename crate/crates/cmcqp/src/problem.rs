//! Problem domain types: phase vectors, unit-modulus vectors, and problem
//! instances for the two constant-modulus quadratic program cases.
//!
//! Case A1 places no structural requirement on the matrix and the objective
//! is `|x^H A x|^2`; case A2 requires a Hermitian positive semi-definite
//! matrix and the objective is the real quadratic form `x^H A x`.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RVector = DVector<f64>;

/// Relative Frobenius tolerance for the Hermitian check on case-A2 matrices.
pub const HERMITIAN_REL_TOL: f64 = 1e-10;
/// Eigenvalue slack (relative to the spectral norm) for the PSD check.
pub const PSD_SLACK: f64 = 1e-8;
/// Unit-modulus tolerance on exported vectors.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("empty vector or zero-dimensional matrix")]
    Empty,
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("case A2 requires a Hermitian matrix (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error(
        "case A2 requires a positive semi-definite matrix (min eigenvalue estimate {min_eig:.3e})"
    )]
    NotPositiveSemiDefinite { min_eig: f64 },
    #[error("entry {index} has modulus {modulus} (must be 1 within {UNIT_MODULUS_TOL:.0e})")]
    NotUnitModulus { index: usize, modulus: f64 },
    #[error("expected case {expected:?}, got {got:?}")]
    CaseMismatch { expected: CaseTag, got: CaseTag },
    #[error("solver direction {config:?} disagrees with instance direction {instance:?}")]
    DirectionMismatch {
        config: Direction,
        instance: Direction,
    },
    #[error("imaginary residue {residue:.3e} exceeds tolerance for a Hermitian quadratic form")]
    ImaginaryResidue { residue: f64 },
    #[error("matrix is singular or not positive definite")]
    SingularMatrix,
    #[error("invalid matrix file: {0}")]
    MatrixFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Optimization direction. `tau()` is the sign used in the phase update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    /// Update sign: -1 for descent, +1 for ascent.
    pub fn tau(self) -> f64 {
        match self {
            Direction::Min => -1.0,
            Direction::Max => 1.0,
        }
    }

    /// True when `candidate` is at least as good as `reference`.
    pub fn improves_or_ties(self, candidate: f64, reference: f64) -> bool {
        match self {
            Direction::Min => candidate <= reference,
            Direction::Max => candidate >= reference,
        }
    }
}

/// Structural case of the embedded matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Arbitrary complex matrix, quartic objective `|x^H A x|^2`.
    A1,
    /// Hermitian PSD matrix, real quadratic objective `x^H A x`.
    A2,
}

/// Real vector of phases; the actual optimization variable.
///
/// Raw phases may drift outside `[0, 2pi)` during iteration (updates stay
/// exact that way); [`PhaseVector::canonical`] wraps them for export.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    theta: RVector,
}

impl PhaseVector {
    pub fn new(theta: RVector) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Empty);
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { theta })
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        Self::new(RVector::from_row_slice(theta))
    }

    /// Uniform random phases in `[0, 2pi)` from a counter-based RNG.
    pub fn random(n: usize, seed: u64) -> Self {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self {
            theta: RVector::from_fn(n, |_, _| rng.gen_range(0.0..TAU)),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Raw (possibly unwrapped) phases.
    pub fn raw(&self) -> &RVector {
        &self.theta
    }

    /// Phases wrapped into `[0, 2pi)`.
    pub fn canonical(&self) -> Self {
        Self {
            theta: self.theta.map(wrap_phase),
        }
    }

    /// The unit-modulus vector `x = e^{j theta}`.
    pub fn to_unit_modulus(&self) -> UnitModulusVector {
        UnitModulusVector {
            x: self.theta.map(|t| Complex64::new(t.cos(), t.sin())),
        }
    }
}

/// Wrap a single phase into `[0, 2pi)`.
pub fn wrap_phase(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    // rem_euclid can land exactly on TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `x = e^{j theta} = cos(theta) + j sin(theta)`.
pub fn phases_to_vector(theta: &PhaseVector) -> UnitModulusVector {
    theta.to_unit_modulus()
}

/// Complex vector with every entry on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitModulusVector {
    x: CVector,
}

impl UnitModulusVector {
    /// Validates `| |x_n| - 1 | <= 1e-12` for all entries.
    pub fn new(x: CVector) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty);
        }
        for (i, v) in x.iter().enumerate() {
            let m = v.norm();
            if !m.is_finite() || (m - 1.0).abs() > UNIT_MODULUS_TOL {
                return Err(Error::NotUnitModulus {
                    index: i,
                    modulus: m,
                });
            }
        }
        Ok(Self { x })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.x
    }

    pub fn into_vector(self) -> CVector {
        self.x
    }

    /// Elementwise arguments, wrapped into `[0, 2pi)`.
    pub fn to_phases(&self) -> PhaseVector {
        PhaseVector {
            theta: self.x.map(|v| wrap_phase(v.arg())),
        }
    }
}

/// Real gradient with respect to the phase vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    g: RVector,
}

impl GradientVector {
    pub(crate) fn from_raw(g: RVector) -> Self {
        debug_assert!(g.iter().all(|v| v.is_finite()));
        Self { g }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn as_vector(&self) -> &RVector {
        &self.g
    }

    pub fn norm(&self) -> f64 {
        self.g.norm()
    }

    pub fn norm_inf(&self) -> f64 {
        self.g.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// A matrix together with its case tag and optimization direction.
///
/// All products with `A` and `A^H` go through [`ProblemInstance::mul_a`] /
/// [`ProblemInstance::mul_ah`], which maintain a matrix-vector product
/// counter used by the complexity audit.
#[derive(Debug)]
pub struct ProblemInstance {
    a: CMatrix,
    a_adjoint: CMatrix,
    case: CaseTag,
    direction: Direction,
    norm_fro: f64,
    matvecs: AtomicU64,
}

impl Clone for ProblemInstance {
    fn clone(&self) -> Self {
        Self {
            a: self.a.clone(),
            a_adjoint: self.a_adjoint.clone(),
            case: self.case,
            direction: self.direction,
            norm_fro: self.norm_fro,
            matvecs: AtomicU64::new(0),
        }
    }
}

impl ProblemInstance {
    /// Validates and wraps a matrix. Case A2 additionally requires
    /// `||A - A^H||_F / ||A||_F <= 1e-10` and a smallest-eigenvalue estimate
    /// `>= -1e-8 ||A||_2`.
    pub fn new(a: CMatrix, case: CaseTag, direction: Direction) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if a.is_empty() {
            return Err(Error::Empty);
        }
        if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let a_adjoint = a.adjoint();
        let norm_fro = a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if case == CaseTag::A2 {
            let asym = (&a - &a_adjoint)
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                .sqrt();
            if norm_fro > 0.0 && asym / norm_fro > HERMITIAN_REL_TOL {
                return Err(Error::NotHermitian {
                    asymmetry: asym / norm_fro,
                });
            }
            if norm_fro > 0.0 {
                let norm2 = linalg::spectral_norm_hermitian(&a);
                let min_eig = linalg::min_eig_hermitian(&a, norm2);
                if min_eig < -PSD_SLACK * norm2 {
                    return Err(Error::NotPositiveSemiDefinite { min_eig });
                }
            }
        }
        Ok(Self {
            a,
            a_adjoint,
            case,
            direction,
            norm_fro,
            matvecs: AtomicU64::new(0),
        })
    }

    pub fn case_a1(a: CMatrix, direction: Direction) -> Result<Self> {
        Self::new(a, CaseTag::A1, direction)
    }

    pub fn case_a2(a: CMatrix, direction: Direction) -> Result<Self> {
        Self::new(a, CaseTag::A2, direction)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn norm_fro(&self) -> f64 {
        self.norm_fro
    }

    /// `A v`, counted.
    pub fn mul_a(&self, v: &CVector) -> CVector {
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        &self.a * v
    }

    /// `A^H v`, counted.
    pub fn mul_ah(&self, v: &CVector) -> CVector {
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        &self.a_adjoint * v
    }

    /// Matrix-vector products performed so far.
    pub fn matvec_count(&self) -> u64 {
        self.matvecs.load(Ordering::Relaxed)
    }

    pub fn reset_matvec_count(&self) {
        self.matvecs.store(0, Ordering::Relaxed);
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_case(&self, expected: CaseTag) -> Result<()> {
        if self.case != expected {
            return Err(Error::CaseMismatch {
                expected,
                got: self.case,
            });
        }
        Ok(())
    }
}
