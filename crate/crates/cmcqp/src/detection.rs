//! Optimum-detection code design: SNR maximization through the MVDR
//! reduction. For a fixed code the optimal receive filter is the MVDR
//! weight vector; substituting it back leaves the constant-modulus
//! quadratic program `max (z .* d)^H R^-1 (z .* d)`, solved as case A2
//! with `A = R^-1`.

use nalgebra::linalg::Cholesky;
use nalgebra::{Dyn, OMatrix};
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::objective::objective_case2;
use crate::problem::{
    CMatrix, CVector, Direction, Error, PhaseVector, ProblemInstance, Result, UnitModulusVector,
    UNIT_MODULUS_TOL,
};
use crate::solver::{solve_case2, IterationTrace, SolverConfig};

/// Covariance, Doppler steering vector, and the cached SPD factorization.
#[derive(Debug, Clone)]
pub struct DetectionScenario {
    r: CMatrix,
    d: CVector,
    doppler: f64,
    chol: Cholesky<Complex64, Dyn>,
    r_inv: CMatrix,
}

impl DetectionScenario {
    /// Validates Hermitian structure, positive-definite pivots, and the
    /// unit-modulus steering vector, then factors and inverts R once.
    pub fn new(r: CMatrix, d: CVector, doppler: f64) -> Result<Self> {
        let n = r.nrows();
        if n == 0 || r.ncols() != n {
            return Err(Error::NotSquare {
                rows: r.nrows(),
                cols: r.ncols(),
            });
        }
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d.len(),
            });
        }
        let norm_fro = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let asym = (&r - r.adjoint())
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm_fro > 0.0 && asym / norm_fro > 1e-10 {
            return Err(Error::NotHermitian {
                asymmetry: asym / norm_fro,
            });
        }
        for (i, v) in d.iter().enumerate() {
            let m = v.norm();
            if (m - 1.0).abs() > UNIT_MODULUS_TOL {
                return Err(Error::NotUnitModulus {
                    index: i,
                    modulus: m,
                });
            }
        }
        let trace: f64 = (0..n).map(|i| r[(i, i)].re).sum();
        let chol = Cholesky::new(r.clone()).ok_or(Error::SingularMatrix)?;
        let pivot_floor = 1e-12 * trace / n as f64;
        let l = chol.l_dirty();
        for i in 0..n {
            if l[(i, i)].re * l[(i, i)].re <= pivot_floor {
                return Err(Error::SingularMatrix);
            }
        }
        let r_inv = chol.inverse();
        Ok(Self {
            r,
            d,
            doppler,
            chol,
            r_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn covariance(&self) -> &CMatrix {
        &self.r
    }

    pub fn covariance_inverse(&self) -> &CMatrix {
        &self.r_inv
    }

    pub fn steering(&self) -> &CVector {
        &self.d
    }

    pub fn doppler(&self) -> f64 {
        self.doppler
    }

    /// `R^-1 v` through the cached factorization.
    pub fn solve_covariance(&self, v: &CVector) -> CVector {
        let mut out: OMatrix<Complex64, Dyn, nalgebra::U1> = v.clone();
        self.chol.solve_mut(&mut out);
        out
    }
}

/// Exponentially correlated disturbance `R[n,n'] = corr^|n-n'|` with Doppler
/// steering `d_n = e^{j 2 pi doppler n}`.
pub fn build_detection_scenario(n: usize, doppler: f64, corr: f64) -> Result<DetectionScenario> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if !(0.0 < corr && corr < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "correlation coefficient must lie in (0, 1), got {corr}"
        )));
    }
    let r = CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(corr.powi((i as i32 - j as i32).abs()), 0.0)
    });
    let d = CVector::from_fn(n, |i, _| {
        Complex64::from_polar(1.0, TAU * doppler * i as f64)
    });
    DetectionScenario::new(r, d, doppler)
}

/// MVDR weights `w = R^-1 s / (s^H R^-1 s)` for the composite steering
/// `s = z .* d`; distortionless by construction (`w^H s = 1`).
pub fn mvdr_weights(scn: &DetectionScenario, z: &UnitModulusVector) -> Result<CVector> {
    if z.len() != scn.dim() {
        return Err(Error::DimensionMismatch {
            expected: scn.dim(),
            got: z.len(),
        });
    }
    let s = CVector::from_fn(scn.dim(), |i, _| z.as_vector()[i] * scn.d[i]);
    let r_inv_s = scn.solve_covariance(&s);
    let denom = s.dotc(&r_inv_s);
    if denom.norm() < f64::MIN_POSITIVE {
        return Err(Error::SingularMatrix);
    }
    Ok(r_inv_s / denom)
}

/// Result of a detection-design run.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Optimized polyphase code `z = y .* conj(d)`.
    pub codes: UnitModulusVector,
    /// `10 log10(y^H R^-1 y)` at the final iterate.
    pub snr_db: f64,
    pub trace: IterationTrace,
}

/// Maximizes the post-MVDR SNR over unit-modulus codes by running the
/// case-A2 solver on `A = R^-1` from random phases seeded by `cfg.seed`.
pub fn solve_detection(scn: &DetectionScenario, cfg: &SolverConfig) -> Result<DetectionResult> {
    if cfg.direction != Direction::Max {
        return Err(Error::InvalidArgument(
            "detection design maximizes SNR; direction must be Max".into(),
        ));
    }
    let inst = ProblemInstance::case_a2(scn.r_inv.clone(), Direction::Max)?;
    let theta0 = PhaseVector::random(scn.dim(), cfg.seed);
    let (_, y, trace) = solve_case2(&inst, &theta0, cfg)?;
    let obj = objective_case2(&inst, &y)?;
    let codes = UnitModulusVector::new(CVector::from_fn(scn.dim(), |i, _| {
        y.as_vector()[i] * scn.d[i].conj()
    }))?;
    Ok(DetectionResult {
        codes,
        snr_db: 10.0 * obj.log10(),
        trace,
    })
}
