//! Closed-form cubic step-size determination.
//!
//! The search function along the update ray admits a third-order Taylor
//! expansion `tau*lambda rho^3 + mu rho^2 + tau*upsilon rho + Obj`; its
//! positive critical point gives the step. Two independent coefficient
//! routes are provided per case (the simplified common-component form used
//! by the solvers and the stacked block form from the appendix derivation),
//! plus a curvature-bound backup step and line-search baselines.

use num_complex::Complex64;

use nalgebra::DMatrix;

use crate::linalg;
use crate::objective::{case1_grad_from_products, case2_grad_from_products};
use crate::problem::{
    CVector, CaseTag, Direction, GradientVector, PhaseVector, ProblemInstance, RVector, Result,
    UnitModulusVector,
};

/// Coefficients of the third-order expansion of the step-size search
/// function about `rho = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoeffs {
    pub lambda: f64,
    pub mu: f64,
    pub upsilon: f64,
    pub obj_at_zero: f64,
}

/// How a step size was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSource {
    /// Positive root of the cubic's derivative.
    CubicRoot,
    /// Root of the quadratic remainder when `lambda` is negligible.
    QuadraticFallback,
    /// Conservative curvature-bound step `2 / beta_max`.
    Backup,
}

/// A positive step size together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub rho: f64,
    pub source: StepSource,
}

const BACKUP_SEED: u64 = 0xb0c5_7e9a_11dd_4001;
const BACKUP_FD_STEP: f64 = 1e-5;
const BACKUP_POWER_ITERS: usize = 20;
const BACKUP_SAFETY: f64 = 1.1;

/// Case A1 Taylor coefficients along the direction `g` (five matrix-vector
/// products; the common components `s` and `t` are formed once).
///
/// With `g = gradient_case1(inst, x)` the linear coefficient equals
/// `||g||^2` exactly.
pub fn coeffs_case1(
    inst: &ProblemInstance,
    x: &UnitModulusVector,
    g: &GradientVector,
) -> Result<StepCoeffs> {
    inst.check_case(CaseTag::A1)?;
    inst.check_dim(x.len())?;
    inst.check_dim(g.len())?;
    let xv = x.as_vector();
    let u1 = inst.mul_a(xv);
    let u2 = inst.mul_ah(xv);
    let f = xv.dotc(&u1);
    Ok(case1_coeffs_from_products(
        inst,
        xv,
        &u1,
        &u2,
        f,
        g.as_vector(),
    ))
}

/// Case A2 Taylor coefficients along `g` (two matrix-vector products).
pub fn coeffs_case2(
    inst: &ProblemInstance,
    x: &UnitModulusVector,
    g: &GradientVector,
) -> Result<StepCoeffs> {
    inst.check_case(CaseTag::A2)?;
    inst.check_dim(x.len())?;
    inst.check_dim(g.len())?;
    let xv = x.as_vector();
    let u1 = inst.mul_a(xv);
    Ok(case2_coeffs_from_products(inst, xv, &u1, g.as_vector()))
}

pub(crate) fn case1_coeffs_from_products(
    inst: &ProblemInstance,
    x: &CVector,
    u1: &CVector,
    u2: &CVector,
    f: Complex64,
    d: &RVector,
) -> StepCoeffs {
    let n = x.len();
    let fc = f.conj();
    let dx = CVector::from_fn(n, |i, _| Complex64::new(d[i], 0.0) * x[i]);
    let d2x = CVector::from_fn(n, |i, _| Complex64::new(d[i] * d[i], 0.0) * x[i]);
    let u5 = inst.mul_a(&dx);
    let u6 = inst.mul_ah(&dx);
    let u8 = inst.mul_a(&d2x);

    // common components: s drives the gradient, t the higher coefficients
    let mut t_d = Complex64::default();
    let mut t_d2 = Complex64::default();
    let mut s_d2 = Complex64::default();
    let mut s_d3 = Complex64::default();
    let mut q_m = Complex64::default(); // x^H A (d^2 x)
    let mut q_n = Complex64::default(); // (Ax .* x*)^T d^2
    let mut w = Complex64::default(); // (dx)^H A (dx)
    let mut big_f = Complex64::default(); // x^H A(dx) - (dx)^H A x
    let mut upsilon = 0.0;
    for i in 0..n {
        let xc = x[i].conj();
        let di = d[i];
        let d2 = di * di;
        let d3 = d2 * di;
        let s_i = (fc * u1[i] + f * u2[i]) * xc;
        let t_i = (fc * u5[i] + f * u6[i]) * xc;
        let ax_xc = u1[i] * xc;
        t_d += t_i * di;
        t_d2 += t_i * d2;
        s_d2 += s_i * d2;
        s_d3 += s_i * d3;
        q_m += xc * u8[i];
        q_n += ax_xc * d2;
        w += (dx[i]).conj() * u5[i];
        big_f += xc * u5[i] - ax_xc * di;
        upsilon += di * 2.0 * s_i.im;
    }
    let lambda = (t_d2 - s_d3 / 3.0 + (q_m.conj() + q_n.conj() - 2.0 * w.conj()) * big_f).im;
    let mu = (t_d - s_d2).re + big_f.norm_sqr();
    StepCoeffs {
        lambda,
        mu,
        upsilon,
        obj_at_zero: f.norm_sqr(),
    }
}

pub(crate) fn case2_coeffs_from_products(
    _inst: &ProblemInstance,
    x: &CVector,
    u1: &CVector,
    d: &RVector,
) -> StepCoeffs {
    let n = x.len();
    let dx = CVector::from_fn(n, |i, _| Complex64::new(d[i], 0.0) * x[i]);
    let u5 = _inst.mul_a(&dx);
    let mut t_d = Complex64::default();
    let mut t_d2 = Complex64::default();
    let mut s_d2 = Complex64::default();
    let mut s_d3 = Complex64::default();
    let mut obj = Complex64::default();
    let mut upsilon = 0.0;
    for i in 0..n {
        let xc = x[i].conj();
        let di = d[i];
        let d2 = di * di;
        let s_i = u1[i] * xc;
        let t_i = u5[i] * xc;
        t_d += t_i * di;
        t_d2 += t_i * d2;
        s_d2 += s_i * d2;
        s_d3 += s_i * (d2 * di);
        obj += s_i;
        upsilon += di * 2.0 * s_i.im;
    }
    StepCoeffs {
        lambda: (t_d2 - s_d3 / 3.0).im,
        mu: (t_d - s_d2).re,
        upsilon,
        obj_at_zero: obj.re,
    }
}

// ---------------------------------------------------------------------------
// Block-form oracles (stacked trig vector and 2N x 2N real block matrices).
// ---------------------------------------------------------------------------

struct BlockForm {
    a_r: DMatrix<f64>,
    a_i: DMatrix<f64>,
    stacked: RVector, // [cos(theta); sin(theta)]
}

impl BlockForm {
    fn build(inst: &ProblemInstance, theta: &PhaseVector) -> Self {
        let n = inst.dim();
        let a = inst.matrix();
        let mut a_r = DMatrix::<f64>::zeros(2 * n, 2 * n);
        let mut a_i = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let re = a[(i, j)].re;
                let im = a[(i, j)].im;
                // A_R = [Re -Im; Im Re], A_I = [Im Re; -Re Im]
                a_r[(i, j)] = re;
                a_r[(i, j + n)] = -im;
                a_r[(i + n, j)] = im;
                a_r[(i + n, j + n)] = re;
                a_i[(i, j)] = im;
                a_i[(i, j + n)] = re;
                a_i[(i + n, j)] = -re;
                a_i[(i + n, j + n)] = im;
            }
        }
        let mut stacked = RVector::zeros(2 * n);
        for i in 0..n {
            stacked[i] = theta.raw()[i].cos();
            stacked[i + n] = theta.raw()[i].sin();
        }
        Self { a_r, a_i, stacked }
    }

    /// `u^T (A_R + j A_I) v`
    fn form_k(&self, u: &RVector, v: &RVector) -> Complex64 {
        Complex64::new(u.dot(&(&self.a_r * v)), u.dot(&(&self.a_i * v)))
    }

    /// `u^T (A_I - j A_R) v`
    fn form_m(&self, u: &RVector, v: &RVector) -> Complex64 {
        Complex64::new(u.dot(&(&self.a_i * v)), -u.dot(&(&self.a_r * v)))
    }

    fn weighted(&self, d: &RVector, power: u32) -> RVector {
        let n = d.len();
        RVector::from_fn(2 * n, |i, _| d[i % n].powi(power as i32) * self.stacked[i])
    }
}

/// Case A1 coefficients recomputed through the appendix block form; equals
/// [`coeffs_case1`] to high accuracy and serves as its equivalence oracle.
pub fn coeffs_case1_blockform(
    inst: &ProblemInstance,
    theta: &PhaseVector,
    g: &GradientVector,
) -> Result<StepCoeffs> {
    inst.check_case(CaseTag::A1)?;
    inst.check_dim(theta.len())?;
    inst.check_dim(g.len())?;
    let bf = BlockForm::build(inst, theta);
    let d = g.as_vector();
    let w1 = bf.weighted(d, 1);
    let w2 = bf.weighted(d, 2);
    let w3 = bf.weighted(d, 3);
    let th = bf.stacked.clone();

    let lam_t = bf.form_m(&w2, &w1) * 0.5 - bf.form_m(&w1, &w2) * 0.5 - bf.form_m(&w3, &th) / 6.0
        + bf.form_m(&th, &w3) / 6.0;
    let mu_t = bf.form_k(&w1, &w1) - bf.form_k(&w2, &th) * 0.5 - bf.form_k(&th, &w2) * 0.5;
    let up_t = bf.form_m(&w1, &th) - bf.form_m(&th, &w1);
    let eta = bf.form_k(&th, &th); // equals x^H A x

    Ok(StepCoeffs {
        lambda: 2.0 * (eta.conj() * lam_t + mu_t.conj() * up_t).re,
        mu: (eta.conj() * mu_t * 2.0 + up_t.conj() * up_t).re,
        upsilon: 2.0 * (eta.conj() * up_t).re,
        obj_at_zero: eta.norm_sqr(),
    })
}

/// Case A2 block-form coefficients (appendix derivation, Hermitian matrix).
pub fn coeffs_case2_blockform(
    inst: &ProblemInstance,
    theta: &PhaseVector,
    g: &GradientVector,
) -> Result<StepCoeffs> {
    inst.check_case(CaseTag::A2)?;
    inst.check_dim(theta.len())?;
    inst.check_dim(g.len())?;
    let bf = BlockForm::build(inst, theta);
    let d = g.as_vector();
    let w1 = bf.weighted(d, 1);
    let w2 = bf.weighted(d, 2);
    let w3 = bf.weighted(d, 3);
    let th = bf.stacked.clone();

    let lambda = w2.dot(&(&bf.a_i * &w1)) - w3.dot(&(&bf.a_i * &th)) / 3.0;
    let mu = w1.dot(&(&bf.a_r * &w1)) - w2.dot(&(&bf.a_r * &th));
    let upsilon = 2.0 * w1.dot(&(&bf.a_i * &th));
    let obj_at_zero = th.dot(&(&bf.a_r * &th));
    Ok(StepCoeffs {
        lambda,
        mu,
        upsilon,
        obj_at_zero,
    })
}

/// The quadratic-form value `eta = x^H A x` reconstructed from the stacked
/// block form (test hook for the appendix identity).
pub fn blockform_eta(inst: &ProblemInstance, theta: &PhaseVector) -> Result<Complex64> {
    inst.check_dim(theta.len())?;
    let bf = BlockForm::build(inst, theta);
    let th = bf.stacked.clone();
    Ok(bf.form_k(&th, &th))
}

// ---------------------------------------------------------------------------
// Root selection.
// ---------------------------------------------------------------------------

/// Positive critical point of `tau*lambda rho^3 + mu rho^2 + tau*upsilon rho`.
///
/// Returns `None` (no positive root) when the discriminant is negative, the
/// root is nonpositive, or the critical point has the wrong curvature for
/// the requested direction; the caller then falls back to a backup step.
pub fn step_from_cubic(c: &StepCoeffs, direction: Direction) -> Option<StepDecision> {
    let tau = direction.tau();
    let eps_lambda = 1e-14 * c.mu.abs().max(c.upsilon.abs()).max(1.0);
    if c.lambda.abs() > eps_lambda {
        let disc = c.mu * c.mu - 3.0 * c.lambda * c.upsilon;
        if disc < 0.0 {
            return None;
        }
        let rho = (-c.mu - tau * disc.sqrt()) / (3.0 * tau * c.lambda);
        if !rho.is_finite() || rho <= 0.0 {
            return None;
        }
        // second derivative must match the requested extremum type
        let second = 6.0 * tau * c.lambda * rho + 2.0 * c.mu;
        let ok = match direction {
            Direction::Min => second > 0.0,
            Direction::Max => second < 0.0,
        };
        return ok.then_some(StepDecision {
            rho,
            source: StepSource::CubicRoot,
        });
    }
    // lambda negligible: critical point of mu rho^2 + tau upsilon rho
    if c.mu != 0.0 {
        let rho = -tau * c.upsilon / (2.0 * c.mu);
        if rho.is_finite() && rho > 0.0 {
            return Some(StepDecision {
                rho,
                source: StepSource::QuadraticFallback,
            });
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Backup step.
// ---------------------------------------------------------------------------

/// Largest Hessian eigenvalue of the instance objective at `theta`, from
/// power iteration on central-difference Hessian-vector products
/// (matrix-free, seeded start; a shifted second pass resolves the sign).
pub fn hessian_max_eig_estimate(inst: &ProblemInstance, theta: &PhaseVector) -> Result<f64> {
    inst.check_dim(theta.len())?;
    let grad_at = gradient_closure(inst);
    Ok(hessian_max_eig(
        &mut |th: &RVector| grad_at(th),
        theta.raw(),
    ))
}

/// Backup step `rho = 2 / beta_max(hessian)` with the largest-eigenvalue
/// estimate from power iteration on finite-difference Hessian-vector
/// products, inflated by a 1.1 safety factor. A nonpositive estimate falls
/// back to `1e-3 / ||g||`. The curvature bound is local, so the step is
/// verified by direct evaluation and halved until the move does not worsen
/// the instance objective.
pub fn backup_step(
    inst: &ProblemInstance,
    theta: &PhaseVector,
    g: &GradientVector,
) -> Result<StepDecision> {
    inst.check_dim(theta.len())?;
    inst.check_dim(g.len())?;
    let grad_at = gradient_closure(inst);
    let mut decision = backup_step_generic(&mut |th: &RVector| grad_at(th), theta.raw(), g.norm());
    let objective_at = |th: &RVector| -> f64 {
        let x = th.map(|t| Complex64::new(t.cos(), t.sin()));
        let z = x.dotc(&inst.mul_a(&x));
        match inst.case() {
            CaseTag::A1 => z.norm_sqr(),
            CaseTag::A2 => z.re,
        }
    };
    let tau = inst.direction().tau();
    let obj0 = objective_at(theta.raw());
    let slack = 1e-12 * obj0.abs().max(1.0);
    for _ in 0..60 {
        let candidate = objective_at(&(theta.raw() + g.as_vector() * (tau * decision.rho)));
        let worsened = match inst.direction() {
            crate::problem::Direction::Min => candidate > obj0 + slack,
            crate::problem::Direction::Max => candidate < obj0 - slack,
        };
        if !worsened {
            break;
        }
        decision.rho *= 0.5;
    }
    Ok(decision)
}

pub(crate) fn gradient_closure(inst: &ProblemInstance) -> impl Fn(&RVector) -> RVector + '_ {
    move |theta: &RVector| {
        let x = theta.map(|t| Complex64::new(t.cos(), t.sin()));
        match inst.case() {
            CaseTag::A1 => {
                let u1 = inst.mul_a(&x);
                let u2 = inst.mul_ah(&x);
                let f = x.dotc(&u1);
                case1_grad_from_products(&x, &u1, &u2, f)
            }
            CaseTag::A2 => {
                let u1 = inst.mul_a(&x);
                case2_grad_from_products(&x, &u1)
            }
        }
    }
}

pub(crate) fn backup_step_generic(
    grad_at: &mut dyn FnMut(&RVector) -> RVector,
    theta: &RVector,
    gnorm: f64,
) -> StepDecision {
    let beta = hessian_max_eig(grad_at, theta) * BACKUP_SAFETY;
    let rho = if beta <= 0.0 {
        1e-3 / gnorm
    } else {
        2.0 / beta
    };
    StepDecision {
        rho,
        source: StepSource::Backup,
    }
}

/// Largest Hessian eigenvalue at `theta` via matrix-free power iteration on
/// central-difference Hessian-vector products. A first pass bounds the
/// spectrum's magnitude; a second pass on the shifted operator `H + cI`
/// (all eigenvalues positive) converges to `lambda_max + c`.
pub(crate) fn hessian_max_eig(
    grad_at: &mut dyn FnMut(&RVector) -> RVector,
    theta: &RVector,
) -> f64 {
    let n = theta.len();
    let h = BACKUP_FD_STEP;
    let mut hv = |v: &RVector| -> RVector {
        let plus = grad_at(&(theta + v * h));
        let minus = grad_at(&(theta - v * h));
        (plus - minus) / (2.0 * h)
    };
    let mut v = linalg::seeded_real_unit_vector(n, BACKUP_SEED);
    let mut magnitude: f64 = 0.0;
    for _ in 0..BACKUP_POWER_ITERS {
        let w = hv(&v);
        let nw = w.norm();
        if nw < f64::MIN_POSITIVE {
            return 0.0;
        }
        magnitude = magnitude.max(nw);
        v = w / nw;
    }
    let shift = 1.25 * magnitude + f64::MIN_POSITIVE;
    let mut v = linalg::seeded_real_unit_vector(n, BACKUP_SEED ^ 0x77);
    let mut rayleigh = 0.0;
    for _ in 0..BACKUP_POWER_ITERS {
        let w = hv(&v) + &v * shift;
        let nw = w.norm();
        if nw < f64::MIN_POSITIVE {
            return 0.0;
        }
        rayleigh = v.dot(&w);
        v = w / nw;
    }
    rayleigh - shift
}

// ---------------------------------------------------------------------------
// Line-search baselines.
// ---------------------------------------------------------------------------

/// Grid scan over `(0, rho_max]` refined by golden-section search in the
/// winning bracket. Used as the step-size oracle for accuracy evaluations.
pub fn exhaustive_line_search(
    eval: &mut dyn FnMut(f64) -> f64,
    direction: Direction,
    rho_max: f64,
    grid: usize,
) -> f64 {
    assert!(rho_max > 0.0 && grid >= 3, "need rho_max > 0 and grid >= 3");
    let better = |a: f64, b: f64| match direction {
        Direction::Min => a < b,
        Direction::Max => a > b,
    };
    let at = |i: usize| rho_max * i as f64 / grid as f64;
    let mut best_i = 1;
    let mut best_v = eval(at(1));
    for i in 2..=grid {
        let v = eval(at(i));
        if better(v, best_v) {
            best_v = v;
            best_i = i;
        }
    }
    let mut a = at(best_i - 1);
    let mut b = at((best_i + 1).min(grid));
    let invphi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..30 {
        if better(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = eval(d);
        }
    }
    0.5 * (a + b)
}

/// Outcome of the Armijo backtracking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtrack {
    pub alpha: f64,
    /// False when no trial step satisfied the Armijo condition (pathological
    /// scaling or a worsening direction); `alpha` is then the floor value.
    pub satisfied: bool,
}

pub const BACKTRACK_MAX_SHRINKS: u32 = 50;

/// Armijo backtracking along `tau * g`: the largest `alpha0 * shrink^m`
/// whose improvement beats `c1 * alpha * ||g||^2`.
pub fn backtracking_line_search(
    eval: &mut dyn FnMut(f64) -> f64,
    g: &RVector,
    direction: Direction,
    alpha0: f64,
    shrink: f64,
    c1: f64,
) -> Backtrack {
    assert!(
        alpha0 > 0.0
            && (0.0..1.0).contains(&shrink)
            && shrink > 0.0
            && (0.0..1.0).contains(&c1)
            && c1 > 0.0
    );
    let tau = direction.tau();
    let slope = g.norm_squared();
    let f0 = eval(0.0);
    let mut alpha = alpha0;
    for _ in 0..=BACKTRACK_MAX_SHRINKS {
        let improvement = tau * (eval(alpha) - f0);
        if improvement >= c1 * alpha * slope {
            return Backtrack {
                alpha,
                satisfied: true,
            };
        }
        alpha *= shrink;
    }
    Backtrack {
        alpha: alpha0 * shrink.powi(BACKTRACK_MAX_SHRINKS as i32),
        satisfied: false,
    }
}
