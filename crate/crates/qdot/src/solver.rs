//! Time evolution and steady states of the rate equations.
//!
//! The generator produced by [`crate::model`] is a real linear operator, so
//! evolution is an ordinary linear ODE. Integration uses an adaptive
//! Dormand-Prince 5(4) scheme with dense output on a caller-chosen grid.
//! Steady states come from two independent routes, a null-space computation
//! and long-time integration, so each can serve as a check on the other.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::model::{coord_dim, diag_slot, pair_slots, Liouvillian};

pub type Complex64 = Complex<f64>;

/// Largest tolerated drift of the trace away from one during integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(
        "step size underflow at t = {t:.6e}; tolerances are tighter than the arithmetic allows"
    )]
    StepUnderflow { t: f64 },
    #[error("trace drifted by {drift:.3e} at t = {t:.6e} (limit {TRACE_DRIFT_LIMIT:.0e})")]
    TraceDrift { t: f64, drift: f64 },
    #[error("steady state is not unique: null space has dimension {dim}")]
    DegenerateKernel { dim: usize },
    #[error("null-space vector has zero trace and cannot be normalized to a state")]
    ZeroTrace,
    #[error("steady-state residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Residual { residual: f64, tol: f64 },
    #[error("integration did not reach a steady state (last change {residual:.3e})")]
    NotConverged { residual: f64 },
    #[error("{0}")]
    BadInput(String),
}

/// Hermitian density matrix of an n-state system.
///
/// The complex matrix form is the public face; internally the solver works
/// in the real coordinate layout of [`crate::model`], and the conversions
/// [`DensityMatrix::to_coords`] and [`DensityMatrix::from_coords`] are exact
/// in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// The pure state |i⟩⟨i|.
    pub fn pure(n: usize, state: usize) -> Self {
        assert!(state < n, "state index out of range");
        let mut mat = DMatrix::zeros(n, n);
        mat[(state, state)] = Complex64::new(1.0, 0.0);
        Self { mat }
    }

    /// Diagonal (fully dephased) state with the given populations.
    pub fn from_diagonal(populations: &[f64]) -> Self {
        let n = populations.len();
        let mut mat = DMatrix::zeros(n, n);
        for (i, &p) in populations.iter().enumerate() {
            mat[(i, i)] = Complex64::new(p, 0.0);
        }
        Self { mat }
    }

    /// Accept an externally built matrix, requiring it to be square, finite
    /// and Hermitian to close to machine precision. The stored copy is
    /// symmetrized so later coordinate conversions are exact.
    pub fn try_from_matrix(mat: DMatrix<Complex64>) -> Result<Self, SolverError> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(SolverError::BadInput(format!(
                "density matrix must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let mut scale = 0.0f64;
        for v in mat.iter() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(SolverError::BadInput(
                    "density matrix contains a non-finite entry".into(),
                ));
            }
            scale = scale.max(v.norm());
        }
        let tol = 1e-12 * (1.0 + scale);
        let n = mat.nrows();
        for a in 0..n {
            for b in a..n {
                let asym = (mat[(a, b)] - mat[(b, a)].conj()).norm();
                if asym > tol {
                    return Err(SolverError::BadInput(format!(
                        "matrix is not Hermitian: entry ({a}, {b}) differs from its mirror by {asym:.3e}"
                    )));
                }
            }
        }
        let herm = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat: herm })
    }

    pub fn n_states(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.n_states()).map(|a| self.mat[(a, a)].re).sum()
    }

    /// Population σ_aa.
    pub fn occupation(&self, a: usize) -> f64 {
        self.mat[(a, a)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_states()).map(|a| self.occupation(a)).collect()
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.mat[(a, b)]
    }

    /// Largest entrywise difference |σ_ab − τ_ab|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n_states(), other.n_states());
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Real coordinates in the layout shared with the generator.
    pub fn to_coords(&self) -> DVector<f64> {
        let n = self.n_states();
        let mut v = DVector::zeros(coord_dim(n));
        for a in 0..n {
            v[diag_slot(n, a)] = self.mat[(a, a)].re;
        }
        for a in 0..n {
            for b in (a + 1)..n {
                let (x, y) = pair_slots(n, a, b);
                v[x] = self.mat[(a, b)].re;
                v[y] = self.mat[(a, b)].im;
            }
        }
        v
    }

    /// Rebuild the Hermitian matrix from real coordinates.
    pub fn from_coords(n: usize, coords: &DVector<f64>) -> Self {
        assert_eq!(coords.len(), coord_dim(n));
        let mut mat = DMatrix::zeros(n, n);
        for a in 0..n {
            mat[(a, a)] = Complex64::new(coords[diag_slot(n, a)], 0.0);
        }
        for a in 0..n {
            for b in (a + 1)..n {
                let (x, y) = pair_slots(n, a, b);
                mat[(a, b)] = Complex64::new(coords[x], coords[y]);
                mat[(b, a)] = Complex64::new(coords[x], -coords[y]);
            }
        }
        Self { mat }
    }
}

/// Points at which [`evolve`] reports the state.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputGrid {
    /// `k` evenly spaced points from 0 to the end time inclusive, k ≥ 2.
    Uniform(usize),
    /// Explicit times, strictly increasing, within [0, end time].
    Times(Vec<f64>),
}

impl OutputGrid {
    fn resolve(&self, t_end: f64) -> Result<Vec<f64>, SolverError> {
        match self {
            OutputGrid::Uniform(k) => {
                if *k < 2 {
                    return Err(SolverError::BadInput(
                        "a uniform output grid needs at least 2 points".into(),
                    ));
                }
                let m = (k - 1) as f64;
                Ok((0..*k).map(|i| t_end * (i as f64 / m)).collect())
            }
            OutputGrid::Times(times) => {
                if times.is_empty() {
                    return Err(SolverError::BadInput("output grid is empty".into()));
                }
                for (i, &t) in times.iter().enumerate() {
                    if !t.is_finite() || t < 0.0 || t > t_end {
                        return Err(SolverError::BadInput(format!(
                            "output time [{i}] = {t} is outside [0, {t_end}]"
                        )));
                    }
                    if i > 0 && t <= times[i - 1] {
                        return Err(SolverError::BadInput(
                            "output times must be strictly increasing".into(),
                        ));
                    }
                }
                Ok(times.clone())
            }
        }
    }
}

/// Controls for the adaptive integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Optional cap on the internal step size.
    pub max_step: Option<f64>,
    pub grid: OutputGrid,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: None,
            grid: OutputGrid::Uniform(201),
        }
    }
}

/// States recorded along an integration, aligned with their times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &DensityMatrix {
        &self.states[i]
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn into_final_state(mut self) -> DensityMatrix {
        self.states.pop().expect("trajectory is never empty")
    }
}

// Dormand-Prince 5(4) tableau. The last stage evaluates the derivative at
// the accepted point, so it seeds the next step (FSAL).
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and 4th-order weights.
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}

fn underflow_floor(t: f64) -> f64 {
    16.0 * f64::EPSILON * t.abs().max(1.0)
}

/// Integrate dσ/dt = L[σ] from t = 0 and record the state at the grid times.
///
/// The trace is checked at every output point: drift beyond
/// [`TRACE_DRIFT_LIMIT`] aborts the run, smaller drift is renormalized away.
/// If the requested tolerances force the step below the resolution of f64
/// arithmetic the run aborts with [`SolverError::StepUnderflow`].
pub fn evolve(
    lv: &Liouvillian,
    initial: &DensityMatrix,
    t_end: f64,
    options: &SolverOptions,
) -> Result<Trajectory, SolverError> {
    let n = lv.n_states();
    if initial.n_states() != n {
        return Err(SolverError::BadInput(format!(
            "initial state has {} states, generator has {n}",
            initial.n_states()
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SolverError::BadInput(format!(
            "end time must be positive and finite, got {t_end}"
        )));
    }
    if !(options.rel_tol > 0.0 && options.abs_tol > 0.0) {
        return Err(SolverError::BadInput("tolerances must be positive".into()));
    }
    if let Some(ms) = options.max_step {
        if !(ms.is_finite() && ms > 0.0) {
            return Err(SolverError::BadInput(format!(
                "max_step must be positive and finite, got {ms}"
            )));
        }
    }
    let targets = options.grid.resolve(t_end)?;

    let m = lv.matrix();
    let dim = lv.dim();
    let norm = lv.norm_inf();
    let max_step = options.max_step.unwrap_or(f64::INFINITY);

    let mut t = 0.0f64;
    let mut y = initial.to_coords();
    let mut k1 = m * &y;
    // A stiff generator wants a small first step; 1/(4·‖L‖) keeps the first
    // error estimate well inside the stability region.
    let mut h_ctrl = if norm > 0.0 { 0.25 / norm } else { t_end };
    h_ctrl = h_ctrl.min(max_step).min(t_end);

    let mut ks: [DVector<f64>; 7] = [
        DVector::zeros(dim),
        DVector::zeros(dim),
        DVector::zeros(dim),
        DVector::zeros(dim),
        DVector::zeros(dim),
        DVector::zeros(dim),
        DVector::zeros(dim),
    ];

    let mut times_out = Vec::with_capacity(targets.len());
    let mut states_out = Vec::with_capacity(targets.len());

    let record = |t: f64,
                  y: &mut DVector<f64>,
                  k1: &mut DVector<f64>,
                  times_out: &mut Vec<f64>,
                  states_out: &mut Vec<DensityMatrix>|
     -> Result<(), SolverError> {
        let trace: f64 = (0..n).map(|a| y[diag_slot(n, a)]).sum();
        let drift = (trace - 1.0).abs();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(SolverError::TraceDrift { t, drift });
        }
        if trace != 1.0 {
            *y /= trace;
            *k1 /= trace;
        }
        times_out.push(t);
        states_out.push(DensityMatrix::from_coords(n, y));
        Ok(())
    };

    for &target in &targets {
        while t < target {
            let gap = target - t;
            let h = h_ctrl.min(gap);
            if h < underflow_floor(t) {
                return Err(SolverError::StepUnderflow { t });
            }

            ks[0].copy_from(&k1);
            let stage = |ks: &[DVector<f64>; 7], coeffs: &[f64]| {
                let mut z = y.clone();
                for (c, k) in coeffs.iter().zip(ks.iter()) {
                    if *c != 0.0 {
                        z.axpy(h * c, k, 1.0);
                    }
                }
                z
            };
            ks[1] = m * stage(&ks, &A2);
            ks[2] = m * stage(&ks, &A3);
            ks[3] = m * stage(&ks, &A4);
            ks[4] = m * stage(&ks, &A5);
            ks[5] = m * stage(&ks, &A6);
            let y_new = stage(&ks, &A7);
            ks[6] = m * &y_new;

            let mut acc = 0.0f64;
            for i in 0..dim {
                let mut e = 0.0f64;
                for (c, k) in ERR.iter().zip(ks.iter()) {
                    if *c != 0.0 {
                        e += c * k[i];
                    }
                }
                e *= h;
                let sc = options.abs_tol + options.rel_tol * y[i].abs().max(y_new[i].abs());
                let q = e / sc;
                acc += q * q;
            }
            let err = (acc / dim as f64).sqrt();

            if err <= 1.0 {
                t = if h == gap { target } else { t + h };
                y = y_new;
                k1.copy_from(&ks[6]);
                if h >= h_ctrl {
                    h_ctrl = (h * step_factor(err)).min(max_step);
                }
            } else {
                h_ctrl = h * step_factor(err);
            }
        }
        record(target, &mut y, &mut k1, &mut times_out, &mut states_out)?;
    }

    Ok(Trajectory {
        times: times_out,
        states: states_out,
    })
}

// --- compensated arithmetic for the refinement residual ---------------------

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// r = b − A·x with the dot products carried in roughly doubled precision,
/// so iterative refinement can push the solve error to the last few bits.
fn residual_compensated(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let dim = a.nrows();
    let mut r = DVector::zeros(dim);
    for i in 0..dim {
        let mut s = 0.0f64;
        let mut c = 0.0f64;
        for j in 0..dim {
            let (p, pe) = two_prod(a[(i, j)], x[j]);
            let (t, te) = two_sum(s, p);
            s = t;
            c += te + pe;
        }
        let (hi, lo) = two_sum(b[i], -s);
        r[i] = hi + (lo - c);
    }
    r
}

/// Solve for the steady state by linear algebra on the generator.
///
/// The null space is located with an SVD (singular values below
/// 1e-10 times the largest are treated as zero); anything but a
/// one-dimensional null space is refused. The kernel vector is then
/// trace-normalized and polished by LU iterative refinement with
/// compensated residuals, replacing one redundant population row with the
/// trace constraint. Refinement matters: changes in the steady state far
/// below the SVD noise floor are physically meaningful when the generator
/// carries rates spanning many orders of magnitude.
pub fn steady_state_direct(lv: &Liouvillian) -> Result<DensityMatrix, SolverError> {
    let n = lv.n_states();
    let dim = lv.dim();
    let m = lv.matrix();
    let norm = lv.norm_inf();

    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let threshold = 1e-10 * sigma_max;
    let kernel_dim = if sigma_max == 0.0 {
        dim
    } else {
        sv.iter().filter(|&&s| s <= threshold).count()
    };
    if kernel_dim != 1 {
        return Err(SolverError::DegenerateKernel { dim: kernel_dim });
    }

    let v_t = svd.v_t.as_ref().expect("SVD was computed with V^T");
    let mut min_idx = 0;
    for (i, &s) in sv.iter().enumerate() {
        if s < sv[min_idx] {
            min_idx = i;
        }
    }
    let kernel: DVector<f64> = v_t.row(min_idx).transpose();
    let ktrace: f64 = (0..n).map(|a| kernel[diag_slot(n, a)]).sum();
    // ‖kernel‖₂ = 1, so a trace this small means the fixed point carries no
    // population and cannot represent a state.
    if ktrace.abs() < 1e-9 {
        return Err(SolverError::ZeroTrace);
    }
    let mut x = kernel / ktrace;

    // Replace one population row with the trace constraint and refine. The
    // dropped row is implied by the others through trace conservation.
    let scale = norm.max(1.0);
    'rows: for row in 0..n {
        let mut a = m.clone();
        let r = diag_slot(n, row);
        for col in 0..dim {
            a[(r, col)] = if col < n { scale } else { 0.0 };
        }
        let mut rhs = DVector::zeros(dim);
        rhs[r] = scale;
        let lu = a.clone().lu();
        let Some(solved) = lu.solve(&rhs) else {
            continue;
        };
        if !solved.iter().all(|v| v.is_finite()) {
            continue;
        }
        let mut refined = solved;
        for _ in 0..3 {
            let resid = residual_compensated(&a, &refined, &rhs);
            let Some(delta) = lu.solve(&resid) else {
                continue 'rows;
            };
            if !delta.iter().all(|v| v.is_finite()) {
                continue 'rows;
            }
            refined += delta;
        }
        x = refined;
        break;
    }

    let residual = (m * &x).amax();
    let tol = 1e-12 * norm.max(1.0);
    if residual > tol {
        return Err(SolverError::Residual { residual, tol });
    }
    Ok(DensityMatrix::from_coords(n, &x))
}

/// Slowest relaxation rate of the generator: the smallest |Re λ| over the
/// nonzero part of the spectrum.
///
/// Eigenvalues of modulus below 1e-10 times the largest are taken as the
/// stationary subspace and skipped. The scan runs over the full spectrum,
/// coherence branches included, so the result is the rate of the slowest
/// decaying mode of any kind. Returns 0 when nothing decays.
pub fn spectral_gap(lv: &Liouvillian) -> f64 {
    let eigs = lv.matrix().clone().complex_eigenvalues();
    let lam_max = eigs.iter().map(|l| l.norm()).fold(0.0f64, f64::max);
    if lam_max == 0.0 {
        return 0.0;
    }
    let threshold = 1e-10 * lam_max;
    eigs.iter()
        .filter(|l| l.norm() > threshold)
        .map(|l| l.re.abs())
        .fold(f64::INFINITY, f64::min)
        .min(lam_max)
}

/// Steady state by brute-force relaxation: integrate for about twenty
/// relaxation times, then keep stretching by one more relaxation time until
/// the state stops moving (entrywise change at most 1e-8).
///
/// Independent of [`steady_state_direct`] in everything but the generator
/// itself, which makes the pair a strong cross-check.
pub fn steady_state_by_integration(
    lv: &Liouvillian,
    initial: &DensityMatrix,
) -> Result<DensityMatrix, SolverError> {
    let gap = spectral_gap(lv);
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(SolverError::BadInput(
            "generator has no decaying modes; relaxation will not converge".into(),
        ));
    }
    let options = SolverOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        max_step: None,
        grid: OutputGrid::Uniform(2),
    };
    let mut state = evolve(lv, initial, 20.0 / gap, &options)?.into_final_state();
    let mut last_change = f64::INFINITY;
    for _ in 0..2 {
        let next = evolve(lv, &state, 1.0 / gap, &options)?.into_final_state();
        last_change = state.max_abs_diff(&next);
        state = next;
        if last_change <= 1e-8 {
            return Ok(state);
        }
    }
    Err(SolverError::NotConverged {
        residual: last_change,
    })
}
