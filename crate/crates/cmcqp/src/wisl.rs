//! Multi-waveform design by weighted integrated-sidelobe-level minimization.
//!
//! A set of M unit-modulus waveforms of length P is optimized to suppress
//! weighted auto-/cross-correlations at selected lags. The objective is a
//! sum of case-A1 pieces `gamma_p^2 |y_m'^H J_p y_m|^2` over waveform pairs
//! and lags; gradients and cubic step coefficients are evaluated in operator
//! form (shift structure plus FFT correlations), never materializing the
//! MP x MP piece matrices. Lengths below [`FFT_MIN_LEN`] use direct shift
//! loops; both routes agree to roundoff and are exposed for cross-checking.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::problem::{
    CVector, Direction, Error, GradientVector, PhaseVector, RVector, Result, UnitModulusVector,
    UNIT_MODULUS_TOL,
};
use crate::solver::{solve_generic, IterationTrace, ObjectiveModel, SolverConfig};
use crate::stepsize::StepCoeffs;

/// Code lengths at or above this use the FFT correlation path.
pub const FFT_MIN_LEN: usize = 32;

/// A bank of unit-modulus waveforms (columns) with per-lag ISL weights.
#[derive(Debug, Clone)]
pub struct WaveformSet {
    /// P x M matrix, one waveform per column.
    y: DMatrix<Complex64>,
    /// Nonnegative weights `gamma_p`, indexed `p + P - 1`, `|p| <= P - 1`.
    weights: Vec<f64>,
    /// Whether the constant self pieces (`m' = m`, `p = 0`) count toward the
    /// reported objective. They never contribute to gradients.
    pub include_self_terms: bool,
}

impl WaveformSet {
    pub fn new(y: DMatrix<Complex64>, weights: Vec<f64>) -> Result<Self> {
        let p_len = y.nrows();
        if p_len == 0 || y.ncols() == 0 {
            return Err(Error::Empty);
        }
        if weights.len() != 2 * p_len - 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * p_len - 1,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "lag weights must be finite and nonnegative".into(),
            ));
        }
        for (i, v) in y.iter().enumerate() {
            let m = v.norm();
            if !m.is_finite() || (m - 1.0).abs() > UNIT_MODULUS_TOL {
                return Err(Error::NotUnitModulus {
                    index: i,
                    modulus: m,
                });
            }
        }
        Ok(Self {
            y,
            weights,
            include_self_terms: true,
        })
    }

    /// Unit weights for lags `0 < |p| <= max_lag`, zero elsewhere.
    pub fn lag_window_weights(p_len: usize, max_lag: usize) -> Result<Vec<f64>> {
        if p_len == 0 || max_lag >= p_len {
            return Err(Error::InvalidArgument(format!(
                "max_lag must satisfy max_lag < P (got {max_lag}, P = {p_len})"
            )));
        }
        let mut w = vec![0.0; 2 * p_len - 1];
        for p in 1..=max_lag {
            w[p_len - 1 + p] = 1.0;
            w[p_len - 1 - p] = 1.0;
        }
        Ok(w)
    }

    /// Random-phase waveforms with the given weights.
    pub fn random(p_len: usize, m_count: usize, weights: Vec<f64>, seed: u64) -> Result<Self> {
        let phases = PhaseVector::random(p_len * m_count, seed);
        Self::from_phases(&phases, p_len, m_count, weights)
    }

    /// Builds from a stacked phase vector of length `P * M` (column order).
    pub fn from_phases(
        phases: &PhaseVector,
        p_len: usize,
        m_count: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if phases.len() != p_len * m_count {
            return Err(Error::DimensionMismatch {
                expected: p_len * m_count,
                got: phases.len(),
            });
        }
        let x = phases.to_unit_modulus();
        let y = DMatrix::from_fn(p_len, m_count, |i, m| x.as_vector()[m * p_len + i]);
        Self::new(y, weights)
    }

    pub fn code_length(&self) -> usize {
        self.y.nrows()
    }

    pub fn num_waveforms(&self) -> usize {
        self.y.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.y
    }

    pub fn weight(&self, p: isize) -> f64 {
        let p_len = self.code_length() as isize;
        if p.abs() >= p_len {
            0.0
        } else {
            self.weights[(p + p_len - 1) as usize]
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `vec(Y)`: columns stacked into a single unit-modulus vector.
    pub fn vectorized(&self) -> UnitModulusVector {
        let p_len = self.code_length();
        let m = self.num_waveforms();
        let v = CVector::from_fn(p_len * m, |i, _| self.y[(i % p_len, i / p_len)]);
        UnitModulusVector::new(v).expect("entries validated at construction")
    }

    /// Rebuilds the waveform matrix from a stacked vector (inverse of
    /// [`WaveformSet::vectorized`]).
    pub fn with_vectorized(&self, v: &UnitModulusVector) -> Result<Self> {
        let p_len = self.code_length();
        let m = self.num_waveforms();
        if v.len() != p_len * m {
            return Err(Error::DimensionMismatch {
                expected: p_len * m,
                got: v.len(),
            });
        }
        let y = DMatrix::from_fn(p_len, m, |i, c| v.as_vector()[c * p_len + i]);
        let mut out = Self::new(y, self.weights.clone())?;
        out.include_self_terms = self.include_self_terms;
        Ok(out)
    }
}

/// Shift matrix `J_p`: ones on the p-th super-diagonal for `p > 0`, the
/// |p|-th sub-diagonal for `p < 0`, and `J_0 = I`.
pub fn build_shift_matrix(p_len: usize, p: isize) -> Result<DMatrix<f64>> {
    if p.unsigned_abs() >= p_len {
        return Err(Error::InvalidArgument(format!(
            "|p| = {} must be < P = {p_len}",
            p.unsigned_abs()
        )));
    }
    let mut j = DMatrix::zeros(p_len, p_len);
    for i in 0..p_len {
        let col = i as isize + p;
        if (0..p_len as isize).contains(&col) {
            j[(i, col as usize)] = 1.0;
        }
    }
    Ok(j)
}

// ---------------------------------------------------------------------------
// Correlation backends.
// ---------------------------------------------------------------------------

/// All-lag correlations and weighted shift sums; implemented directly and
/// via FFT, with identical outputs up to roundoff.
trait Correlator {
    /// `c[p + P - 1] = sum_i conj(u[i]) v[i + p]` for `|p| <= P - 1`.
    fn corr(&mut self, u: &[Complex64], v: &[Complex64]) -> Vec<Complex64>;
    /// `z[i] = sum_p w[p + P - 1] v[i + p]` for `i` in `0..P`.
    fn wshift(&mut self, w: &[Complex64], v: &[Complex64]) -> Vec<Complex64>;
}

struct NaiveCorrelator;

impl Correlator for NaiveCorrelator {
    fn corr(&mut self, u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        let p_len = u.len();
        let mut out = vec![Complex64::default(); 2 * p_len - 1];
        for (k, slot) in out.iter_mut().enumerate() {
            let p = k as isize - (p_len as isize - 1);
            let mut acc = Complex64::default();
            for (i, ui) in u.iter().enumerate() {
                let j = i as isize + p;
                if (0..p_len as isize).contains(&j) {
                    acc += ui.conj() * v[j as usize];
                }
            }
            *slot = acc;
        }
        out
    }

    fn wshift(&mut self, w: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        let p_len = v.len();
        let mut out = vec![Complex64::default(); p_len];
        for (k, &wp) in w.iter().enumerate() {
            if wp == Complex64::default() {
                continue;
            }
            let p = k as isize - (p_len as isize - 1);
            for (i, slot) in out.iter_mut().enumerate() {
                let j = i as isize + p;
                if (0..p_len as isize).contains(&j) {
                    *slot += wp * v[j as usize];
                }
            }
        }
        out
    }
}

struct FftCorrelator {
    p_len: usize,
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf_a: Vec<Complex64>,
    buf_b: Vec<Complex64>,
}

impl FftCorrelator {
    fn new(p_len: usize) -> Self {
        let len = (3 * p_len).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            p_len,
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            buf_a: vec![Complex64::default(); len],
            buf_b: vec![Complex64::default(); len],
        }
    }

    /// Linear convolution of `a` with `b`, left in `buf_a`.
    fn convolve(&mut self, a: &[Complex64], b: &[Complex64]) {
        self.buf_a
            .iter_mut()
            .for_each(|v| *v = Complex64::default());
        self.buf_a[..a.len()].copy_from_slice(a);
        self.buf_b
            .iter_mut()
            .for_each(|v| *v = Complex64::default());
        self.buf_b[..b.len()].copy_from_slice(b);
        self.fwd.process(&mut self.buf_a);
        self.fwd.process(&mut self.buf_b);
        let scale = 1.0 / self.len as f64;
        for (x, y) in self.buf_a.iter_mut().zip(self.buf_b.iter()) {
            *x *= *y * scale;
        }
        self.inv.process(&mut self.buf_a);
    }
}

impl Correlator for FftCorrelator {
    fn corr(&mut self, u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        // corr(u, v)(p) = conv(conj(reverse(u)), v)[p + P - 1]
        let ur: Vec<Complex64> = u.iter().rev().map(|c| c.conj()).collect();
        self.convolve(&ur, v);
        self.buf_a[..2 * self.p_len - 1].to_vec()
    }

    fn wshift(&mut self, w: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        // z[i] = conv(reverse(w), v)[i + P - 1]
        let wr: Vec<Complex64> = w.iter().rev().copied().collect();
        self.convolve(&wr, v);
        self.buf_a[self.p_len - 1..2 * self.p_len - 1].to_vec()
    }
}

fn correlator_for(p_len: usize, force_fft: Option<bool>) -> Box<dyn Correlator> {
    let use_fft = force_fft.unwrap_or(p_len >= FFT_MIN_LEN);
    if use_fft {
        Box::new(FftCorrelator::new(p_len))
    } else {
        Box::new(NaiveCorrelator)
    }
}

// ---------------------------------------------------------------------------
// Operator-form evaluation.
// ---------------------------------------------------------------------------

/// Geometry plus scratch state for operator-form evaluation of the design
/// objective at arbitrary stacked vectors.
struct WislOperator {
    p_len: usize,
    m_count: usize,
    /// gamma_p^2 for cross pairs (complexified for reuse in weighted shifts).
    w_sq: Vec<Complex64>,
    /// Same with the p = 0 entry zeroed, used for self pairs.
    w_sq_self: Vec<Complex64>,
    /// Reported value of the constant self pieces: `M * gamma_0^2 * P^2`.
    self_term_value: f64,
    include_self_terms: bool,
    corr: Box<dyn Correlator>,
}

/// Per-iterate cache: waveform columns and all pair correlations.
struct WislCache {
    cols: Vec<Vec<Complex64>>,
    /// `r[m' * M + m]` = all-lag correlation of columns m' and m.
    r: Vec<Vec<Complex64>>,
}

impl WislOperator {
    fn from_set(ws: &WaveformSet, force_fft: Option<bool>) -> Self {
        let p_len = ws.code_length();
        let m_count = ws.num_waveforms();
        let w_sq: Vec<Complex64> = ws
            .weights
            .iter()
            .map(|g| Complex64::new(g * g, 0.0))
            .collect();
        let mut w_sq_self = w_sq.clone();
        w_sq_self[p_len - 1] = Complex64::default();
        let gamma0 = ws.weights[p_len - 1];
        Self {
            p_len,
            m_count,
            w_sq,
            w_sq_self,
            self_term_value: m_count as f64 * gamma0 * gamma0 * (p_len * p_len) as f64,
            include_self_terms: ws.include_self_terms,
            corr: correlator_for(p_len, force_fft),
        }
    }

    fn columns_of(&self, x: &CVector) -> Vec<Vec<Complex64>> {
        (0..self.m_count)
            .map(|m| x.as_slice()[m * self.p_len..(m + 1) * self.p_len].to_vec())
            .collect()
    }

    fn pair_weights(&self, mp: usize, m: usize) -> &[Complex64] {
        if mp == m {
            &self.w_sq_self
        } else {
            &self.w_sq
        }
    }

    fn build_cache(&mut self, x: &CVector) -> WislCache {
        let cols = self.columns_of(x);
        let mut r = Vec::with_capacity(self.m_count * self.m_count);
        for mp in 0..self.m_count {
            for m in 0..self.m_count {
                r.push(self.corr.corr(&cols[mp], &cols[m]));
            }
        }
        WislCache { cols, r }
    }

    /// Weighted squared correlation sum. Self pieces (`m' = m`, `p = 0`)
    /// are added back separately when the set reports them.
    fn objective(&self, cache: &WislCache) -> f64 {
        let mut total = 0.0;
        for mp in 0..self.m_count {
            for m in 0..self.m_count {
                let w = self.pair_weights(mp, m);
                let r = &cache.r[mp * self.m_count + m];
                total += w
                    .iter()
                    .zip(r.iter())
                    .map(|(w, r)| w.re * r.norm_sqr())
                    .sum::<f64>();
            }
        }
        if self.include_self_terms {
            total += self.self_term_value;
        }
        total
    }

    /// The shared accumulation behind `s` and `t`: for each waveform block a,
    /// `sum_m W(conj(r_am)) J of_m + sum_m' W(rev(r_m'a)) J of_m'`, times
    /// `conj(y_a)`. With `of = y` this is `s` (the gradient is `2 Im{s}`);
    /// with `of = g .* y` it is `t`.
    fn shared_vector(&mut self, cache: &WislCache, of_cols: &[Vec<Complex64>]) -> Vec<Complex64> {
        let p_len = self.p_len;
        let m_count = self.m_count;
        let mut s = vec![Complex64::default(); p_len * m_count];
        for a in 0..m_count {
            let mut acc = vec![Complex64::default(); p_len];
            for (m, col) in of_cols.iter().enumerate() {
                let w = self.pair_weights(a, m).to_vec();
                let r = &cache.r[a * m_count + m];
                let kernel: Vec<Complex64> =
                    w.iter().zip(r.iter()).map(|(w, r)| w * r.conj()).collect();
                for (slot, v) in acc.iter_mut().zip(self.corr.wshift(&kernel, col)) {
                    *slot += v;
                }
            }
            for (mp, col) in of_cols.iter().enumerate() {
                let w = self.pair_weights(mp, a).to_vec();
                let r = &cache.r[mp * m_count + a];
                // J_{-p} shifts enter through the lag-reversed kernel
                let kernel: Vec<Complex64> =
                    w.iter().zip(r.iter()).rev().map(|(w, r)| w * r).collect();
                for (slot, v) in acc.iter_mut().zip(self.corr.wshift(&kernel, col)) {
                    *slot += v;
                }
            }
            for i in 0..p_len {
                s[a * p_len + i] = acc[i] * cache.cols[a][i].conj();
            }
        }
        s
    }

    fn gradient(&mut self, cache: &WislCache) -> RVector {
        let cols = cache.cols.clone();
        let s = self.shared_vector(cache, &cols);
        RVector::from_fn(s.len(), |i, _| 2.0 * s[i].im)
    }

    fn coeffs(&mut self, cache: &WislCache, d: &RVector) -> StepCoeffs {
        let p_len = self.p_len;
        let m_count = self.m_count;
        // derived per-waveform sequences
        let dy: Vec<Vec<Complex64>> = (0..m_count)
            .map(|m| {
                (0..p_len)
                    .map(|i| cache.cols[m][i] * d[m * p_len + i])
                    .collect()
            })
            .collect();
        let d2y: Vec<Vec<Complex64>> = (0..m_count)
            .map(|m| {
                (0..p_len)
                    .map(|i| {
                        let di = d[m * p_len + i];
                        cache.cols[m][i] * (di * di)
                    })
                    .collect()
            })
            .collect();

        let cols = cache.cols.clone();
        let s = self.shared_vector(cache, &cols);
        let t = self.shared_vector(cache, &dy);

        let n = p_len * m_count;
        let mut t_d = Complex64::default();
        let mut t_d2 = Complex64::default();
        let mut s_d2 = Complex64::default();
        let mut s_d3 = Complex64::default();
        let mut upsilon = 0.0;
        for i in 0..n {
            let di = d[i];
            let d2 = di * di;
            t_d += t[i] * di;
            t_d2 += t[i] * d2;
            s_d2 += s[i] * d2;
            s_d3 += s[i] * (d2 * di);
            upsilon += di * 2.0 * s[i].im;
        }
        let mut lambda = (t_d2 - s_d3 / 3.0).im;
        let mut mu = (t_d - s_d2).re;

        // per-piece bracket products, one correlation set per ordered pair
        for mp in 0..m_count {
            for m in 0..m_count {
                let w = self.pair_weights(mp, m).to_vec();
                let q_m = self.corr.corr(&cache.cols[mp], &d2y[m]);
                let q_n = self.corr.corr(&d2y[mp], &cache.cols[m]);
                let big_w = self.corr.corr(&dy[mp], &dy[m]);
                let f1 = self.corr.corr(&cache.cols[mp], &dy[m]);
                let f2 = self.corr.corr(&dy[mp], &cache.cols[m]);
                for k in 0..w.len() {
                    let wk = w[k].re;
                    if wk == 0.0 {
                        continue;
                    }
                    let big_f = f1[k] - f2[k];
                    lambda +=
                        wk * ((q_m[k].conj() + q_n[k].conj() - 2.0 * big_w[k].conj()) * big_f).im;
                    mu += wk * big_f.norm_sqr();
                }
            }
        }
        StepCoeffs {
            lambda,
            mu,
            upsilon,
            obj_at_zero: self.objective(cache),
        }
    }
}

// ---------------------------------------------------------------------------
// Public operations.
// ---------------------------------------------------------------------------

/// Weighted ISL objective; FFT path for `P >= 32`, direct shifts below.
pub fn wisl_objective(ws: &WaveformSet) -> f64 {
    objective_with(ws, None)
}

/// Objective through explicit shift sums (dual-route check).
pub fn wisl_objective_naive(ws: &WaveformSet) -> f64 {
    objective_with(ws, Some(false))
}

/// Objective through FFT correlations (dual-route check).
pub fn wisl_objective_fft(ws: &WaveformSet) -> f64 {
    objective_with(ws, Some(true))
}

fn objective_with(ws: &WaveformSet, force_fft: Option<bool>) -> f64 {
    let mut op = WislOperator::from_set(ws, force_fft);
    let cache = op.build_cache(ws.vectorized().as_vector());
    op.objective(&cache)
}

/// Gradient of the design objective with respect to the `M * P` phases of
/// the stacked waveform vector, in operator form.
pub fn wisl_gradient(ws: &WaveformSet) -> GradientVector {
    gradient_with(ws, None)
}

pub fn wisl_gradient_naive(ws: &WaveformSet) -> GradientVector {
    gradient_with(ws, Some(false))
}

pub fn wisl_gradient_fft(ws: &WaveformSet) -> GradientVector {
    gradient_with(ws, Some(true))
}

fn gradient_with(ws: &WaveformSet, force_fft: Option<bool>) -> GradientVector {
    let mut op = WislOperator::from_set(ws, force_fft);
    let cache = op.build_cache(ws.vectorized().as_vector());
    GradientVector::from_raw(op.gradient(&cache))
}

/// Cubic step coefficients of the design objective along `-rho g`
/// (the design problem is always a minimization).
pub fn wisl_coeffs(ws: &WaveformSet, g: &GradientVector) -> Result<StepCoeffs> {
    let n = ws.code_length() * ws.num_waveforms();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.len(),
        });
    }
    let mut op = WislOperator::from_set(ws, None);
    let cache = op.build_cache(ws.vectorized().as_vector());
    Ok(op.coeffs(&cache, g.as_vector()))
}

struct WislModel {
    op: WislOperator,
}

impl ObjectiveModel for WislModel {
    type Cache = WislCache;

    fn dim(&self) -> usize {
        self.op.p_len * self.op.m_count
    }

    fn eval(&mut self, x: &CVector) -> Result<(f64, Self::Cache)> {
        let cache = self.op.build_cache(x);
        Ok((self.op.objective(&cache), cache))
    }

    fn gradient(&mut self, _x: &CVector, cache: &Self::Cache) -> RVector {
        self.op.gradient(cache)
    }

    fn coeffs(&mut self, _x: &CVector, cache: &Self::Cache, d: &RVector) -> StepCoeffs {
        self.op.coeffs(cache, d)
    }

    fn gradient_at_theta(&mut self, theta: &RVector) -> RVector {
        let x = theta.map(|t| Complex64::new(t.cos(), t.sin()));
        let cache = self.op.build_cache(&x);
        self.op.gradient(&cache)
    }
}

/// Minimizes the weighted ISL of a waveform set; mirrors the case-A1 solver
/// with the waveform gradient and coefficients, and recovers the waveform
/// matrix by unstacking the final vector.
pub fn solve_wisl(ws0: &WaveformSet, cfg: &SolverConfig) -> Result<(WaveformSet, IterationTrace)> {
    if cfg.direction != Direction::Min {
        return Err(Error::InvalidArgument(
            "waveform design minimizes the weighted ISL; direction must be Min".into(),
        ));
    }
    let mut model = WislModel {
        op: WislOperator::from_set(ws0, None),
    };
    let theta0 = ws0.vectorized().to_phases();
    let (_, x, trace) = solve_generic(&mut model, &theta0, cfg)?;
    Ok((ws0.with_vectorized(&x)?, trace))
}
