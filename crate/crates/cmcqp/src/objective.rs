//! Objective and gradient evaluation for both program cases, including the
//! trigonometric-form gradients used as cross-implementation oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::problem::{
    CaseTag, Error, GradientVector, PhaseVector, ProblemInstance, RVector, Result,
    UnitModulusVector,
};

/// `|x^H A x|^2` for a case-A1 instance.
pub fn objective_case1(inst: &ProblemInstance, x: &UnitModulusVector) -> Result<f64> {
    inst.check_case(CaseTag::A1)?;
    inst.check_dim(x.len())?;
    let ax = inst.mul_a(x.as_vector());
    Ok(x.as_vector().dotc(&ax).norm_sqr())
}

/// `x^H A x` for a case-A2 instance. The imaginary residue of the raw
/// computation is asserted small (a large residue means a non-Hermitian
/// matrix slipped past validation) and then discarded.
pub fn objective_case2(inst: &ProblemInstance, x: &UnitModulusVector) -> Result<f64> {
    inst.check_case(CaseTag::A2)?;
    inst.check_dim(x.len())?;
    let ax = inst.mul_a(x.as_vector());
    let z = x.as_vector().dotc(&ax);
    check_residue(inst, z)?;
    Ok(z.re)
}

pub(crate) fn check_residue(inst: &ProblemInstance, z: Complex64) -> Result<()> {
    // roundoff floor keeps the check meaningful when the value itself is tiny
    let floor = inst.norm_fro() * inst.dim() as f64 * f64::EPSILON;
    if z.im.abs() > 1e-10 * z.re.abs() + floor {
        return Err(Error::ImaginaryResidue { residue: z.im });
    }
    Ok(())
}

/// Gradient of `|x^H A x|^2` with respect to the phases:
/// `2 Im{(x^H A^H x Ax + x^H A x A^H x) .* conj(x)}`.
pub fn gradient_case1(inst: &ProblemInstance, x: &UnitModulusVector) -> Result<GradientVector> {
    inst.check_case(CaseTag::A1)?;
    inst.check_dim(x.len())?;
    let xv = x.as_vector();
    let ax = inst.mul_a(xv);
    let ahx = inst.mul_ah(xv);
    let f = xv.dotc(&ax);
    Ok(GradientVector::from_raw(case1_grad_from_products(
        xv, &ax, &ahx, f,
    )))
}

/// Gradient of `x^H A x` with respect to the phases: `2 Im{Ax .* conj(x)}`.
pub fn gradient_case2(inst: &ProblemInstance, x: &UnitModulusVector) -> Result<GradientVector> {
    inst.check_case(CaseTag::A2)?;
    inst.check_dim(x.len())?;
    let xv = x.as_vector();
    let ax = inst.mul_a(xv);
    Ok(GradientVector::from_raw(case2_grad_from_products(xv, &ax)))
}

pub(crate) fn case1_grad_from_products(
    x: &crate::problem::CVector,
    ax: &crate::problem::CVector,
    ahx: &crate::problem::CVector,
    f: Complex64,
) -> RVector {
    let fc = f.conj();
    RVector::from_fn(x.len(), |i, _| {
        2.0 * ((fc * ax[i] + f * ahx[i]) * x[i].conj()).im
    })
}

pub(crate) fn case2_grad_from_products(
    x: &crate::problem::CVector,
    ax: &crate::problem::CVector,
) -> RVector {
    RVector::from_fn(x.len(), |i, _| 2.0 * (ax[i] * x[i].conj()).im)
}

// Real/imaginary split of A used by the trig-form oracles.
struct ReImParts {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

fn split(inst: &ProblemInstance) -> ReImParts {
    let a = inst.matrix();
    ReImParts {
        re: a.map(|v| v.re),
        im: a.map(|v| v.im),
    }
}

/// Trigonometric-form gradient for case A1, computed from the separated
/// real/imaginary component formulas (the appendix derivation). Serves as an
/// independent oracle for [`gradient_case1`].
pub fn gradient_case1_trig(inst: &ProblemInstance, theta: &PhaseVector) -> Result<GradientVector> {
    inst.check_case(CaseTag::A1)?;
    inst.check_dim(theta.len())?;
    let p = split(inst);
    let c = theta.raw().map(f64::cos);
    let s = theta.raw().map(f64::sin);

    let im_minus = &p.im - p.im.transpose(); // Im{A - A^T}
    let im_plus = &p.im + p.im.transpose(); // Im{A + A^T}
    let re_plus = &p.re + p.re.transpose(); // Re{A + A^T}
    let re_minus = &p.re - p.re.transpose(); // Re{A - A^T}

    // Re{f} = c'Re{A}c - c'Im{A}s + s'Im{A}c + s'Re{A}s, same split for Im{f}
    let re_f =
        c.dot(&(&p.re * &c)) - c.dot(&(&p.im * &s)) + s.dot(&(&p.im * &c)) + s.dot(&(&p.re * &s));
    let im_f =
        c.dot(&(&p.im * &c)) + c.dot(&(&p.re * &s)) - s.dot(&(&p.re * &c)) + s.dot(&(&p.im * &s));

    let grad_re_f = (&im_minus * &c).component_mul(&c) + (&re_plus * &s).component_mul(&c)
        - (&re_plus * &c).component_mul(&s)
        + (&im_minus * &s).component_mul(&s);
    let grad_im_f = (&im_plus * &s).component_mul(&c)
        - (&re_minus * &c).component_mul(&c)
        - (&re_minus * &s).component_mul(&s)
        - (&im_plus * &c).component_mul(&s);

    Ok(GradientVector::from_raw(
        grad_re_f * (2.0 * re_f) + grad_im_f * (2.0 * im_f),
    ))
}

/// Trigonometric-form gradient for case A2:
/// `2(Im{A}cos + Re{A}sin) .* cos + 2(Im{A}sin - Re{A}cos) .* sin`.
pub fn gradient_case2_trig(inst: &ProblemInstance, theta: &PhaseVector) -> Result<GradientVector> {
    inst.check_case(CaseTag::A2)?;
    inst.check_dim(theta.len())?;
    let p = split(inst);
    let c = theta.raw().map(f64::cos);
    let s = theta.raw().map(f64::sin);
    let first = (&p.im * &c + &p.re * &s).component_mul(&c);
    let second = (&p.im * &s - &p.re * &c).component_mul(&s);
    Ok(GradientVector::from_raw((first + second) * 2.0))
}
