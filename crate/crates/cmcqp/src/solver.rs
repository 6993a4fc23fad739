//! Iterative gradient descent/ascent solvers with closed-form step sizes,
//! monotonicity safeguard, SQUAREM acceleration, and comparison baselines.

use std::time::Instant;

use num_complex::Complex64;

use crate::linalg;
use crate::objective::{case1_grad_from_products, case2_grad_from_products, check_residue};
use crate::problem::{
    CVector, CaseTag, Direction, Error, PhaseVector, ProblemInstance, RVector, Result,
    UnitModulusVector,
};
use crate::stepsize::{
    backup_step_generic, case1_coeffs_from_products, case2_coeffs_from_products, step_from_cubic,
    Backtrack, StepCoeffs, StepSource,
};

/// Gradient norms below `ZERO_GRAD_TOL * n` at the start trigger one jitter
/// retry before declaring convergence.
const ZERO_GRAD_TOL: f64 = 1e-14;
/// Relative slack of the monotonicity guard.
pub const GUARD_SLACK: f64 = 1e-12;
/// Last-resort halvings when even the backup step violates the guard.
const MAX_GUARD_HALVINGS: u32 = 60;
/// Backtracking attempts of the SQUAREM extrapolation factor toward -1.
const SQUAREM_BACKTRACKS: u32 = 8;

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub direction: Direction,
    /// Normalized objective-change stopping tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Enable SQUAREM acceleration of the outer iteration.
    pub accelerate: bool,
    /// Seed for initialization jitter (and any derived randomness).
    pub seed: u64,
    /// Magnitude of the uniform jitter applied at a zero-gradient start.
    pub jitter: f64,
}

impl SolverConfig {
    pub fn new(direction: Direction) -> Self {
        Self {
            direction,
            tol: 1e-9,
            max_iters: 100_000,
            accelerate: false,
            seed: 0,
            jitter: 1e-8,
        }
    }

    pub fn minimize() -> Self {
        Self::new(Direction::Min)
    }

    pub fn maximize() -> Self {
        Self::new(Direction::Max)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_acceleration(mut self, on: bool) -> Self {
        self.accelerate = on;
        self
    }

    fn validate(&self) -> Result<()> {
        let tol_ok = self.tol > 0.0;
        let jitter_ok = self.jitter >= 0.0;
        if !tol_ok || self.max_iters == 0 || !jitter_ok {
            return Err(Error::InvalidArgument(
                "need tol > 0, max_iters >= 1, jitter >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Terminal status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
}

/// Provenance of the update that produced a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStep {
    /// Row 0: the initial point, no update.
    Init,
    CubicRoot,
    QuadraticFallback,
    Backup,
    /// SQUAREM-extrapolated outer update.
    Squarem,
    /// Constant-step baseline update.
    Fixed,
    /// Line-search baseline update.
    LineSearch,
    /// Constant-modulus projection update (PM-L baseline).
    Projection,
}

impl TraceStep {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceStep::Init => "init",
            TraceStep::CubicRoot => "cubic_root",
            TraceStep::QuadraticFallback => "quadratic_fallback",
            TraceStep::Backup => "backup",
            TraceStep::Squarem => "squarem",
            TraceStep::Fixed => "fixed",
            TraceStep::LineSearch => "line_search",
            TraceStep::Projection => "projection",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "init" => TraceStep::Init,
            "cubic_root" => TraceStep::CubicRoot,
            "quadratic_fallback" => TraceStep::QuadraticFallback,
            "backup" => TraceStep::Backup,
            "squarem" => TraceStep::Squarem,
            "fixed" => TraceStep::Fixed,
            "line_search" => TraceStep::LineSearch,
            "projection" => TraceStep::Projection,
            _ => return None,
        })
    }
}

impl From<StepSource> for TraceStep {
    fn from(s: StepSource) -> Self {
        match s {
            StepSource::CubicRoot => TraceStep::CubicRoot,
            StepSource::QuadraticFallback => TraceStep::QuadraticFallback,
            StepSource::Backup => TraceStep::Backup,
        }
    }
}

/// One per-iteration record. Row `k` describes the iterate after `k` outer
/// updates; `step_size`/`step_source` refer to the update that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub step_size: f64,
    pub step_source: TraceStep,
    pub grad_norm: f64,
    pub elapsed_ns: u64,
}

/// Complete record of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub status: SolveStatus,
    pub direction: Direction,
    /// False for baselines that do not enforce monotone objectives.
    pub monotone_guaranteed: bool,
}

impl IterationTrace {
    pub fn initial_objective(&self) -> f64 {
        self.rows.first().map_or(f64::NAN, |r| r.objective)
    }

    pub fn final_objective(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.objective)
    }

    /// Number of outer updates performed (rows minus the initial row).
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn elapsed_ns(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.elapsed_ns)
    }

    /// Checks the monotone-objective invariant with relative slack.
    pub fn is_monotone(&self, rel_slack: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let slack = rel_slack * w[0].objective.abs().max(1.0);
            match self.direction {
                Direction::Min => w[1].objective <= w[0].objective + slack,
                Direction::Max => w[1].objective >= w[0].objective - slack,
            }
        })
    }
}

/// Guard verdict for one objective transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardDecision {
    Accept,
    TriggerBackup,
}

/// Flags objective moves in the wrong direction beyond
/// `1e-12 * max(1, |prev|)`; the solver then recomputes the iterate with a
/// backup step.
pub fn monotonicity_guard(prev_obj: f64, new_obj: f64, direction: Direction) -> GuardDecision {
    let slack = GUARD_SLACK * prev_obj.abs().max(1.0);
    let violated = match direction {
        Direction::Min => new_obj > prev_obj + slack,
        Direction::Max => new_obj < prev_obj - slack,
    };
    if violated {
        GuardDecision::TriggerBackup
    } else {
        GuardDecision::Accept
    }
}

// ---------------------------------------------------------------------------
// Generic iteration engine.
// ---------------------------------------------------------------------------

/// Objective family the generic solver iterates on. Implementations cache
/// the matrix products shared between objective, gradient, and coefficients.
pub(crate) trait ObjectiveModel {
    type Cache;
    fn dim(&self) -> usize;
    fn eval(&mut self, x: &CVector) -> Result<(f64, Self::Cache)>;
    fn gradient(&mut self, x: &CVector, cache: &Self::Cache) -> RVector;
    fn coeffs(&mut self, x: &CVector, cache: &Self::Cache, d: &RVector) -> StepCoeffs;
    /// Gradient at an arbitrary phase point (backup-step Hessian products).
    fn gradient_at_theta(&mut self, theta: &RVector) -> RVector;
}

struct IterState<C> {
    theta: RVector,
    x: CVector,
    obj: f64,
    cache: C,
    g: RVector,
    gnorm: f64,
}

fn make_state<M: ObjectiveModel>(model: &mut M, theta: RVector) -> Result<IterState<M::Cache>> {
    let x = theta.map(|t| Complex64::new(t.cos(), t.sin()));
    let (obj, cache) = model.eval(&x)?;
    let g = model.gradient(&x, &cache);
    let gnorm = g.norm();
    Ok(IterState {
        theta,
        x,
        obj,
        cache,
        g,
        gnorm,
    })
}

fn plain_step<M: ObjectiveModel>(
    model: &mut M,
    state: &IterState<M::Cache>,
    direction: Direction,
) -> Result<(IterState<M::Cache>, f64, StepSource)> {
    let tau = direction.tau();
    let coeffs = model.coeffs(&state.x, &state.cache, &state.g);
    let mut decision = match step_from_cubic(&coeffs, direction) {
        Some(d) => d,
        None => backup_step_generic(
            &mut |th: &RVector| model.gradient_at_theta(th),
            &state.theta,
            state.gnorm,
        ),
    };
    let mut new_state = make_state(model, &state.theta + &state.g * (tau * decision.rho))?;
    if monotonicity_guard(state.obj, new_state.obj, direction) == GuardDecision::TriggerBackup {
        if decision.source != StepSource::Backup {
            decision = backup_step_generic(
                &mut |th: &RVector| model.gradient_at_theta(th),
                &state.theta,
                state.gnorm,
            );
            new_state = make_state(model, &state.theta + &state.g * (tau * decision.rho))?;
        }
        let mut halvings = 0;
        while monotonicity_guard(state.obj, new_state.obj, direction)
            == GuardDecision::TriggerBackup
            && halvings < MAX_GUARD_HALVINGS
        {
            decision.rho *= 0.5;
            new_state = make_state(model, &state.theta + &state.g * (tau * decision.rho))?;
            halvings += 1;
        }
    }
    Ok((new_state, decision.rho, decision.source))
}

fn squarem_outer<M: ObjectiveModel>(
    model: &mut M,
    state: &IterState<M::Cache>,
    direction: Direction,
) -> Result<(IterState<M::Cache>, f64, TraceStep)> {
    let (s1, _, _) = plain_step(model, state, direction)?;
    let (s2, rho2, src2) = plain_step(model, &s1, direction)?;
    let r = &s1.theta - &state.theta;
    let v = &s2.theta - &s1.theta * 2.0 + &state.theta;
    let v_norm = v.norm();
    if v_norm < 1e-30 {
        return Ok((s2, rho2, src2.into()));
    }
    let mut alpha = -r.norm() / v_norm;
    for _ in 0..SQUAREM_BACKTRACKS {
        if alpha >= -1.0 {
            break;
        }
        let acc_theta = &state.theta - &r * (2.0 * alpha) + &v * (alpha * alpha);
        let acc = make_state(model, acc_theta)?;
        let (s3, rho3, _) = plain_step(model, &acc, direction)?;
        let monotone = monotonicity_guard(state.obj, s3.obj, direction) == GuardDecision::Accept;
        if monotone && direction.improves_or_ties(s3.obj, s2.obj) {
            return Ok((s3, rho3, TraceStep::Squarem));
        }
        alpha = (alpha - 1.0) / 2.0;
    }
    Ok((s2, rho2, src2.into()))
}

fn apply_jitter(theta: &RVector, jitter: f64, seed: u64) -> RVector {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x4a17_7e52);
    theta.map(|t| t + rng.gen_range(-jitter..=jitter))
}

pub(crate) fn solve_generic<M: ObjectiveModel>(
    model: &mut M,
    theta0: &PhaseVector,
    cfg: &SolverConfig,
) -> Result<(PhaseVector, UnitModulusVector, IterationTrace)> {
    cfg.validate()?;
    if theta0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: theta0.len(),
        });
    }
    let n = model.dim();
    let start = Instant::now();
    let mut state = make_state(model, theta0.raw().clone())?;

    // exact stationary/degenerate start: jitter once, then report honestly
    if state.gnorm < ZERO_GRAD_TOL * n as f64 && cfg.jitter > 0.0 {
        let jittered = make_state(model, apply_jitter(&state.theta, cfg.jitter, cfg.seed))?;
        if jittered.gnorm >= ZERO_GRAD_TOL * n as f64 {
            state = jittered;
        }
    }

    let mut rows = vec![TraceRow {
        iter: 0,
        objective: state.obj,
        step_size: 0.0,
        step_source: TraceStep::Init,
        grad_norm: state.gnorm,
        elapsed_ns: start.elapsed().as_nanos() as u64,
    }];

    if state.gnorm < ZERO_GRAD_TOL * n as f64 {
        return finish(model_outputs(state), rows, SolveStatus::Converged, cfg);
    }

    let obj0_scale = state.obj.abs().max(f64::MIN_POSITIVE);
    let mut status = SolveStatus::MaxIters;
    for k in 1..=cfg.max_iters {
        // flat-plateau secondary stop on the gradient norm
        if state.gnorm <= cfg.tol.sqrt() * state.obj.abs().max(1.0) {
            status = SolveStatus::Converged;
            break;
        }
        let (new_state, rho, src) = if cfg.accelerate {
            squarem_outer(model, &state, cfg.direction)?
        } else {
            let (s, rho, src) = plain_step(model, &state, cfg.direction)?;
            (s, rho, src.into())
        };
        rows.push(TraceRow {
            iter: k,
            objective: new_state.obj,
            step_size: rho,
            step_source: src,
            grad_norm: new_state.gnorm,
            elapsed_ns: start.elapsed().as_nanos() as u64,
        });
        let delta = (new_state.obj - state.obj).abs();
        state = new_state;
        if delta / obj0_scale < cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    finish(model_outputs(state), rows, status, cfg)
}

fn model_outputs<C>(state: IterState<C>) -> (RVector, CVector) {
    (state.theta, state.x)
}

fn finish(
    (theta, x): (RVector, CVector),
    rows: Vec<TraceRow>,
    status: SolveStatus,
    cfg: &SolverConfig,
) -> Result<(PhaseVector, UnitModulusVector, IterationTrace)> {
    let phases = PhaseVector::new(theta)?.canonical();
    let x = UnitModulusVector::new(x)?;
    Ok((
        phases,
        x,
        IterationTrace {
            rows,
            status,
            direction: cfg.direction,
            monotone_guaranteed: true,
        },
    ))
}

// ---------------------------------------------------------------------------
// Case models.
// ---------------------------------------------------------------------------

pub(crate) struct Case1Model<'a> {
    pub inst: &'a ProblemInstance,
}

impl ObjectiveModel for Case1Model<'_> {
    type Cache = (CVector, CVector, Complex64);

    fn dim(&self) -> usize {
        self.inst.dim()
    }

    fn eval(&mut self, x: &CVector) -> Result<(f64, Self::Cache)> {
        let u1 = self.inst.mul_a(x);
        let u2 = self.inst.mul_ah(x);
        let f = x.dotc(&u1);
        Ok((f.norm_sqr(), (u1, u2, f)))
    }

    fn gradient(&mut self, x: &CVector, cache: &Self::Cache) -> RVector {
        case1_grad_from_products(x, &cache.0, &cache.1, cache.2)
    }

    fn coeffs(&mut self, x: &CVector, cache: &Self::Cache, d: &RVector) -> StepCoeffs {
        case1_coeffs_from_products(self.inst, x, &cache.0, &cache.1, cache.2, d)
    }

    fn gradient_at_theta(&mut self, theta: &RVector) -> RVector {
        let x = theta.map(|t| Complex64::new(t.cos(), t.sin()));
        let u1 = self.inst.mul_a(&x);
        let u2 = self.inst.mul_ah(&x);
        let f = x.dotc(&u1);
        case1_grad_from_products(&x, &u1, &u2, f)
    }
}

pub(crate) struct Case2Model<'a> {
    pub inst: &'a ProblemInstance,
}

impl ObjectiveModel for Case2Model<'_> {
    type Cache = CVector;

    fn dim(&self) -> usize {
        self.inst.dim()
    }

    fn eval(&mut self, x: &CVector) -> Result<(f64, Self::Cache)> {
        let u1 = self.inst.mul_a(x);
        let z = x.dotc(&u1);
        check_residue(self.inst, z)?;
        Ok((z.re, u1))
    }

    fn gradient(&mut self, x: &CVector, cache: &Self::Cache) -> RVector {
        case2_grad_from_products(x, cache)
    }

    fn coeffs(&mut self, x: &CVector, cache: &Self::Cache, d: &RVector) -> StepCoeffs {
        case2_coeffs_from_products(self.inst, x, cache, d)
    }

    fn gradient_at_theta(&mut self, theta: &RVector) -> RVector {
        let x = theta.map(|t| Complex64::new(t.cos(), t.sin()));
        let u1 = self.inst.mul_a(&x);
        case2_grad_from_products(&x, &u1)
    }
}

fn check_solver_inputs(
    inst: &ProblemInstance,
    expected: CaseTag,
    cfg: &SolverConfig,
) -> Result<()> {
    inst.check_case(expected)?;
    if inst.direction() != cfg.direction {
        return Err(Error::DirectionMismatch {
            config: cfg.direction,
            instance: inst.direction(),
        });
    }
    Ok(())
}

/// Gradient descent/ascent for case A1 with closed-form cubic steps.
pub fn solve_case1(
    inst: &ProblemInstance,
    theta0: &PhaseVector,
    cfg: &SolverConfig,
) -> Result<(PhaseVector, UnitModulusVector, IterationTrace)> {
    check_solver_inputs(inst, CaseTag::A1, cfg)?;
    let mut model = Case1Model { inst };
    solve_generic(&mut model, theta0, cfg)
}

/// Gradient descent/ascent for case A2 with closed-form cubic steps.
pub fn solve_case2(
    inst: &ProblemInstance,
    theta0: &PhaseVector,
    cfg: &SolverConfig,
) -> Result<(PhaseVector, UnitModulusVector, IterationTrace)> {
    check_solver_inputs(inst, CaseTag::A2, cfg)?;
    let mut model = Case2Model { inst };
    solve_generic(&mut model, theta0, cfg)
}

// ---------------------------------------------------------------------------
// SQUAREM over externally supplied fixed-point maps.
// ---------------------------------------------------------------------------

/// One SQUAREM-accelerated outer update of the fixed-point map `map`
/// (one full solver iteration) with objective evaluator `obj`.
///
/// Computes `r = F(x) - x`, `v = F(F(x)) - 2F(x) + x`, extrapolation factor
/// `alpha = -||r|| / ||v||`, applies the map once to the extrapolated
/// candidate, and falls back toward `F(F(x))` (backtracking `alpha` to -1)
/// whenever the candidate moves the objective the wrong way. Monotonicity is
/// always preserved.
pub fn squarem_accelerate(
    map: &mut dyn FnMut(&RVector) -> RVector,
    obj: &mut dyn FnMut(&RVector) -> f64,
    theta: &RVector,
    direction: Direction,
) -> RVector {
    let obj0 = obj(theta);
    let t1 = map(theta);
    let t2 = map(&t1);
    let r = &t1 - theta;
    let v = &t2 - &t1 * 2.0 + theta;
    let v_norm = v.norm();
    if v_norm < 1e-30 {
        return t2;
    }
    let obj_t2 = obj(&t2);
    let mut alpha = -r.norm() / v_norm;
    for _ in 0..SQUAREM_BACKTRACKS {
        if alpha >= -1.0 {
            break;
        }
        let candidate = theta - &r * (2.0 * alpha) + &v * (alpha * alpha);
        let stepped = map(&candidate);
        let val = obj(&stepped);
        let monotone = monotonicity_guard(obj0, val, direction) == GuardDecision::Accept;
        if monotone && direction.improves_or_ties(val, obj_t2) {
            return stepped;
        }
        alpha = (alpha - 1.0) / 2.0;
    }
    t2
}

// ---------------------------------------------------------------------------
// Baselines.
// ---------------------------------------------------------------------------

/// Power method-like baseline for case A2: constant-modulus projection of
/// the matrix-filtered iterate, `x <- exp(j arg(~A x))`. Maximization uses
/// `~A = A`; minimization ascends the complementary matrix
/// `(1 + eps) lambda_max(A) I - A`.
pub fn pml_baseline(
    inst: &ProblemInstance,
    theta0: &PhaseVector,
    cfg: &SolverConfig,
) -> Result<(UnitModulusVector, IterationTrace)> {
    check_solver_inputs(inst, CaseTag::A2, cfg)?;
    inst.check_dim(theta0.len())?;
    cfg.validate()?;
    let shift = match cfg.direction {
        Direction::Max => None,
        Direction::Min => {
            let norm2 = crate::linalg::spectral_norm_hermitian(inst.matrix());
            Some(linalg::max_eig_hermitian(inst.matrix(), norm2) * (1.0 + 1e-6))
        }
    };
    let start = Instant::now();
    let mut x = theta0.to_unit_modulus().into_vector();
    let mut rows = Vec::new();
    let mut status = SolveStatus::MaxIters;
    let mut prev = f64::NAN;
    let mut obj0_scale = 1.0;
    for k in 0..=cfg.max_iters {
        let ax = inst.mul_a(&x);
        let z = x.dotc(&ax);
        check_residue(inst, z)?;
        let obj = z.re;
        let gnorm = case2_grad_from_products(&x, &ax).norm();
        rows.push(TraceRow {
            iter: k,
            objective: obj,
            step_size: 0.0,
            step_source: if k == 0 {
                TraceStep::Init
            } else {
                TraceStep::Projection
            },
            grad_norm: gnorm,
            elapsed_ns: start.elapsed().as_nanos() as u64,
        });
        if k == 0 {
            obj0_scale = obj.abs().max(f64::MIN_POSITIVE);
        } else if (obj - prev).abs() / obj0_scale < cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
        prev = obj;
        if k == cfg.max_iters {
            break;
        }
        // filtered iterate; zero entries keep their previous phase
        let filtered: CVector = match shift {
            None => ax,
            Some(s) => {
                let mut f = -ax;
                for i in 0..f.len() {
                    f[i] += Complex64::new(s, 0.0) * x[i];
                }
                f
            }
        };
        for i in 0..x.len() {
            let m = filtered[i].norm();
            if m > 0.0 {
                x[i] = filtered[i] / Complex64::new(m, 0.0);
            }
        }
    }
    Ok((
        UnitModulusVector::new(x)?,
        IterationTrace {
            rows,
            status,
            direction: cfg.direction,
            monotone_guaranteed: true,
        },
    ))
}

/// Plain gradient descent/ascent with a constant step. No monotonicity
/// guarantee; the trace is flagged accordingly.
pub fn fixed_step_baseline(
    inst: &ProblemInstance,
    theta0: &PhaseVector,
    cfg: &SolverConfig,
    rho_fixed: f64,
) -> Result<(UnitModulusVector, IterationTrace)> {
    let rho_ok = rho_fixed >= 0.0;
    if !rho_ok {
        return Err(Error::InvalidArgument("rho_fixed must be >= 0".into()));
    }
    baseline_loop(inst, theta0, cfg, move |_eval, _g, _gnorm| {
        (rho_fixed, TraceStep::Fixed)
    })
}

/// Step-size rule for the line-search baselines.
#[derive(Debug, Clone, Copy)]
pub enum LineSearchMethod {
    /// Armijo backtracking (defaults 1.0, 0.5, 1e-4).
    Backtracking { alpha0: f64, shrink: f64, c1: f64 },
    /// Grid-plus-golden-section search over `(0, scale / ||g||]`.
    Exhaustive { rho_scale: f64, grid: usize },
}

impl LineSearchMethod {
    pub fn backtracking_default() -> Self {
        LineSearchMethod::Backtracking {
            alpha0: 1.0,
            shrink: 0.5,
            c1: 1e-4,
        }
    }

    pub fn exhaustive_default() -> Self {
        LineSearchMethod::Exhaustive {
            rho_scale: 10.0,
            grid: 2000,
        }
    }
}

/// Gradient descent/ascent with a line-searched step (GA-BLS / GA-ELS
/// baselines).
pub fn line_search_baseline(
    inst: &ProblemInstance,
    theta0: &PhaseVector,
    cfg: &SolverConfig,
    method: LineSearchMethod,
) -> Result<(UnitModulusVector, IterationTrace)> {
    let direction = cfg.direction;
    baseline_loop(inst, theta0, cfg, move |eval, g, gnorm| match method {
        LineSearchMethod::Backtracking { alpha0, shrink, c1 } => {
            let Backtrack { alpha, .. } =
                crate::stepsize::backtracking_line_search(eval, g, direction, alpha0, shrink, c1);
            (alpha, TraceStep::LineSearch)
        }
        LineSearchMethod::Exhaustive { rho_scale, grid } => {
            let rho_max = rho_scale / gnorm.max(f64::MIN_POSITIVE);
            let rho = crate::stepsize::exhaustive_line_search(eval, direction, rho_max, grid);
            (rho, TraceStep::LineSearch)
        }
    })
}

/// Shared driver for the non-cubic baselines: per iteration the rule sees an
/// objective-along-the-ray evaluator and returns (rho, tag, monotone_claim).
fn baseline_loop(
    inst: &ProblemInstance,
    theta0: &PhaseVector,
    cfg: &SolverConfig,
    mut rule: impl FnMut(&mut dyn FnMut(f64) -> f64, &RVector, f64) -> (f64, TraceStep),
) -> Result<(UnitModulusVector, IterationTrace)> {
    if inst.direction() != cfg.direction {
        return Err(Error::DirectionMismatch {
            config: cfg.direction,
            instance: inst.direction(),
        });
    }
    inst.check_dim(theta0.len())?;
    cfg.validate()?;
    let tau = cfg.direction.tau();
    let objective_of = |theta: &RVector| -> Result<f64> {
        let x = theta.map(|t| Complex64::new(t.cos(), t.sin()));
        let ax = inst.mul_a(&x);
        let z = x.dotc(&ax);
        match inst.case() {
            CaseTag::A1 => Ok(z.norm_sqr()),
            CaseTag::A2 => {
                check_residue(inst, z)?;
                Ok(z.re)
            }
        }
    };
    let grad_at = crate::stepsize::gradient_closure(inst);

    let start = Instant::now();
    let mut theta = theta0.raw().clone();
    let mut obj = objective_of(&theta)?;
    let mut g = grad_at(&theta);
    let mut rows = vec![TraceRow {
        iter: 0,
        objective: obj,
        step_size: 0.0,
        step_source: TraceStep::Init,
        grad_norm: g.norm(),
        elapsed_ns: start.elapsed().as_nanos() as u64,
    }];
    let obj0_scale = obj.abs().max(f64::MIN_POSITIVE);
    let mut status = SolveStatus::MaxIters;
    for k in 1..=cfg.max_iters {
        let gnorm = g.norm();
        if gnorm <= cfg.tol.sqrt() * obj.abs().max(1.0) {
            status = SolveStatus::Converged;
            break;
        }
        let (rho, tag) = {
            let theta_ref = &theta;
            let g_ref = &g;
            let mut eval = |r: f64| -> f64 {
                objective_of(&(theta_ref + g_ref * (tau * r))).unwrap_or(f64::NAN)
            };
            rule(&mut eval, &g, gnorm)
        };
        theta += &g * (tau * rho);
        let new_obj = objective_of(&theta)?;
        g = grad_at(&theta);
        rows.push(TraceRow {
            iter: k,
            objective: new_obj,
            step_size: rho,
            step_source: tag,
            grad_norm: g.norm(),
            elapsed_ns: start.elapsed().as_nanos() as u64,
        });
        let delta = (new_obj - obj).abs();
        obj = new_obj;
        if delta / obj0_scale < cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    let x = UnitModulusVector::new(theta.map(|t| Complex64::new(t.cos(), t.sin())))?;
    Ok((
        x,
        IterationTrace {
            rows,
            status,
            direction: cfg.direction,
            monotone_guaranteed: false,
        },
    ))
}
