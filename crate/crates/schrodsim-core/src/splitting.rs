//! Time-splitting propagators: the exact piecewise-exponential trace of the
//! Lie-split extended system (the verification path for the splitting
//! theorems), the classical split ODE reference, and the heat-form
//! split step built from diagonal unitaries.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::exec;
use crate::fokker_planck::SpectralAxis;
use crate::grid::PGrid;
use crate::linalg::{self, CMat, CVec};
use crate::linear_core::{HermitianSplit, SpectralData};

/// A fixed-step first-order (Lie) splitting schedule with steps·dt = T.
#[derive(Debug, Clone, Copy)]
pub struct SplitSchedule {
    pub dt: f64,
    pub steps: usize,
}

impl SplitSchedule {
    pub fn lie(t_final: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(t_final > 0.0) {
            return Err(CoreError::Parameter(format!(
                "schedule needs steps > 0 and T > 0, got steps = {steps}, T = {t_final}"
            )));
        }
        Ok(SplitSchedule { dt: t_final / steps as f64, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// The extended state of the Lie-split dynamics carried exactly in p.
///
/// In the H₁ eigenbasis every component is piecewise of the form
/// α e^{-p} + β e^{p} between breakpoints shared across components. The
/// transport stage shifts component i by λ_i·dt and the phase stage applies
/// e^{iH₂dt}, both closed operations on this family, so the representation
/// is exact up to roundoff for any number of steps.
#[derive(Debug, Clone)]
pub struct SemiAnalyticState {
    /// Sorted interior breakpoints; K points bound K+1 intervals.
    breakpoints: Vec<f64>,
    /// n × (K+1): coefficient of e^{-p} per component and interval.
    alpha: CMat,
    /// n × (K+1): coefficient of e^{+p}.
    beta: CMat,
    /// Eigenbasis map: v = Q ṽ.
    q: CMat,
    lambda: Vec<f64>,
    /// H₂ expressed in the eigenbasis.
    h2_tilde: CMat,
    pub time: f64,
}

const BREAKPOINT_MERGE_TOL: f64 = 1e-12;

impl SemiAnalyticState {
    /// The warped initial profile e^{-|p|} u₀ expressed in the eigenbasis.
    pub fn from_warped(
        split: &HermitianSplit,
        spectral: &SpectralData,
        u0: &CVec,
    ) -> Result<Self> {
        if u0.len() != split.n {
            return Err(CoreError::Dimension(format!(
                "state length {} does not match system size {}",
                u0.len(),
                split.n
            )));
        }
        let n = split.n;
        let ut0 = spectral.q.adjoint() * u0;
        let mut alpha = CMat::zeros(n, 2);
        let mut beta = CMat::zeros(n, 2);
        for i in 0..n {
            beta[(i, 0)] = ut0[i]; // p < 0: e^{+p}
            alpha[(i, 1)] = ut0[i]; // p >= 0: e^{-p}
        }
        let h2_tilde = spectral.q.adjoint() * &split.h2 * &spectral.q;
        Ok(SemiAnalyticState {
            breakpoints: vec![0.0],
            alpha,
            beta,
            q: spectral.q.clone(),
            lambda: spectral.eigenvalues.clone(),
            h2_tilde,
            time: 0.0,
        })
    }

    pub fn num_breakpoints(&self) -> usize {
        self.breakpoints.len()
    }

    /// One Lie step: exact transport by λ_i·dt per component, then the
    /// p-independent phase e^{iH₂dt}.
    pub fn step(&self, dt: f64) -> Result<Self> {
        let n = self.lambda.len();

        // union of the per-component shifted breakpoints
        let mut merged: Vec<f64> = Vec::with_capacity(self.breakpoints.len() * n);
        for &lam in &self.lambda {
            for &b in &self.breakpoints {
                merged.push(b + lam * dt);
            }
        }
        merged.sort_by(f64::total_cmp);
        merged.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_MERGE_TOL);
        let nk = merged.len();

        // refine each component onto the merged grid
        let mut alpha = CMat::zeros(n, nk + 1);
        let mut beta = CMat::zeros(n, nk + 1);
        let midpoint = |s: usize| -> f64 {
            if s == 0 {
                merged[0] - 1.0
            } else if s == nk {
                merged[nk - 1] + 1.0
            } else {
                0.5 * (merged[s - 1] + merged[s])
            }
        };
        for i in 0..n {
            let shift = self.lambda[i] * dt;
            let gain = C64::new(shift.exp(), 0.0);
            let decay = C64::new((-shift).exp(), 0.0);
            for s in 0..=nk {
                let m = midpoint(s);
                // interval of this component's own shifted grid containing m
                let idx = self
                    .breakpoints
                    .partition_point(|&b| b + shift < m);
                alpha[(i, s)] = self.alpha[(i, idx)] * gain;
                beta[(i, s)] = self.beta[(i, idx)] * decay;
            }
        }

        let rot = linalg::expm_hermitian(&self.h2_tilde, C64::new(0.0, dt))?;
        Ok(SemiAnalyticState {
            breakpoints: merged,
            alpha: &rot * alpha,
            beta: &rot * beta,
            q: self.q.clone(),
            lambda: self.lambda.clone(),
            h2_tilde: self.h2_tilde.clone(),
            time: self.time + dt,
        })
    }

    pub fn advance(mut self, steps: usize, dt: f64) -> Result<Self> {
        for _ in 0..steps {
            self = self.step(dt)?;
        }
        Ok(self)
    }

    /// Evaluate v(t, p) (original basis) at an arbitrary point.
    pub fn eval(&self, p: f64) -> CVec {
        &self.q * self.eval_eigen(p)
    }

    /// Evaluate ṽ(t, p) in the eigenbasis.
    pub fn eval_eigen(&self, p: f64) -> CVec {
        let s = self.breakpoints.partition_point(|&b| b < p);
        let em = C64::new((-p).exp(), 0.0);
        let ep = C64::new(p.exp(), 0.0);
        CVec::from_iterator(
            self.lambda.len(),
            (0..self.lambda.len()).map(|i| self.alpha[(i, s)] * em + self.beta[(i, s)] * ep),
        )
    }

    /// ∫ over (lo, hi) of Σ_i |ṽ_i(p)|² dp in closed form for one interval's
    /// coefficients.
    fn interval_mass(&self, s: usize, lo: f64, hi: f64) -> f64 {
        let n = self.lambda.len();
        let mut a2 = 0.0;
        let mut b2 = 0.0;
        let mut cross = 0.0;
        for i in 0..n {
            let a = self.alpha[(i, s)];
            let b = self.beta[(i, s)];
            a2 += a.norm_sqr();
            b2 += b.norm_sqr();
            cross += 2.0 * (a * b.conj()).re;
        }
        let mut m = 0.0;
        if a2 > 0.0 {
            let upper = if hi.is_infinite() { 0.0 } else { (-2.0 * hi).exp() };
            m += a2 * ((-2.0 * lo).exp() - upper) / 2.0;
        }
        if b2 > 0.0 {
            let lower = if lo.is_infinite() { 0.0 } else { (2.0 * lo).exp() };
            m += b2 * ((2.0 * hi).exp() - lower) / 2.0;
        }
        if cross != 0.0 && lo.is_finite() && hi.is_finite() {
            m += cross * (hi - lo);
        }
        m
    }

    /// ∫_{thr}^{∞} ‖ṽ‖² dp (the eigenbasis norm equals the original one).
    pub fn mass_above(&self, thr: f64) -> f64 {
        let nk = self.breakpoints.len();
        let mut tot = 0.0;
        for s in 0..=nk {
            let lo = if s == 0 { f64::NEG_INFINITY } else { self.breakpoints[s - 1] };
            let hi = if s == nk { f64::INFINITY } else { self.breakpoints[s] };
            let lo = lo.max(thr);
            if lo < hi {
                tot += self.interval_mass(s, lo, hi);
            }
        }
        tot
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_above(f64::NEG_INFINITY)
    }
}

/// Classical Lie-split trajectory of du/dt = Au: per step, e^{H₁dt} then
/// e^{iH₂dt}, both from the Padé exponential.
pub fn lie_split_reference(
    split: &HermitianSplit,
    u0: &CVec,
    schedule: SplitSchedule,
) -> Result<Vec<CVec>> {
    let e1 = linalg::expm(&split.h1.map(|z| z * schedule.dt))?;
    let e2 = linalg::expm(&split.h2.map(|z| z * C64::new(0.0, schedule.dt)))?;
    let mut u = u0.clone();
    let mut out = Vec::with_capacity(schedule.steps);
    for _ in 0..schedule.steps {
        u = &e2 * (&e1 * u);
        out.push(u.clone());
    }
    Ok(out)
}

/// Check the splitting-exactness identity v^m(p) = e^{-p} u^m on p ≥ 0.
///
/// Returns the maximum deviation over all steps and sample points. H₁ must
/// be negative semi-definite; the shifted variant below handles λ₊ > 0.
pub fn verify_splitting_exactness(
    split: &HermitianSplit,
    spectral: &SpectralData,
    u0: &CVec,
    schedule: SplitSchedule,
) -> Result<f64> {
    if spectral.lambda_plus > 1e-12 {
        return Err(CoreError::Precondition(format!(
            "H1 has a positive eigenvalue (lambda_plus = {:.6}); the identity only holds on \
             p >= lambda_plus * t — use the shifted variant",
            spectral.lambda_plus
        )));
    }
    verify_exactness_inner(split, spectral, u0, schedule, 0.0)
}

/// Same identity with the valid region shifted to p ≥ m·λ₊·dt at step m.
pub fn verify_splitting_exactness_shifted(
    split: &HermitianSplit,
    spectral: &SpectralData,
    u0: &CVec,
    schedule: SplitSchedule,
) -> Result<f64> {
    verify_exactness_inner(split, spectral, u0, schedule, spectral.lambda_plus.max(0.0))
}

const EXACTNESS_SAMPLES: usize = 31;
const EXACTNESS_SPAN: f64 = 3.0;

fn verify_exactness_inner(
    split: &HermitianSplit,
    spectral: &SpectralData,
    u0: &CVec,
    schedule: SplitSchedule,
    lambda_plus: f64,
) -> Result<f64> {
    let mut state = SemiAnalyticState::from_warped(split, spectral, u0)?;
    let classical = lie_split_reference(split, u0, schedule)?;
    let mut worst: f64 = 0.0;
    for (m, um) in classical.iter().enumerate() {
        state = state.step(schedule.dt)?;
        let threshold = lambda_plus * (m + 1) as f64 * schedule.dt;
        for j in 0..EXACTNESS_SAMPLES {
            let p = threshold + EXACTNESS_SPAN * j as f64 / (EXACTNESS_SAMPLES - 1) as f64;
            let dev = (state.eval(p) - um.map(|z| z * (-p).exp())).norm();
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// Projection probability P_r(t, p ≥ 0) computed from the split trajectory's
/// exact p-profile; equals ½(‖u_split(t)‖/‖u₀‖)² for NSD H₁.
pub fn splitting_probability(
    split: &HermitianSplit,
    spectral: &SpectralData,
    u0: &CVec,
    schedule: SplitSchedule,
) -> Result<f64> {
    if spectral.lambda_plus > 1e-12 {
        return Err(CoreError::Precondition(format!(
            "H1 has a positive eigenvalue (lambda_plus = {:.6}); the probability identity \
             requires a negative semi-definite H1",
            spectral.lambda_plus
        )));
    }
    let state = SemiAnalyticState::from_warped(split, spectral, u0)?
        .advance(schedule.steps, schedule.dt)?;
    let total = state.total_mass();
    if total <= 0.0 {
        return Err(CoreError::DegenerateState("the extended state has zero mass".into()));
    }
    Ok(state.mass_above(0.0) / total)
}

// ---------------------------------------------------------------------------
// Heat-form split step
// ---------------------------------------------------------------------------

/// One Lie step for the heat-form extended system, as a pair of diagonal
/// unitaries: e^{iH_D dt} in the doubly-Fourier basis (H_D = σΣ(D_l^μ)²⊗D_μ)
/// followed by e^{iH_U dt} in the physical-x basis (H_U = U⊗D_μ).
///
/// States are M^d × Np arrays with rows indexing the x tensor grid
/// (row-major across axes) and columns the p modes in ascending order; the
/// x side toggles between coefficient and nodal values inside the step, and
/// both sub-steps preserve the norm exactly.
pub struct HeatSplitStep {
    kinetic: Vec<C64>,
    potential: Vec<C64>,
    dims: Vec<usize>,
    np: usize,
    fft_fwd: Vec<Arc<dyn rustfft::Fft<f64>>>,
    fft_inv: Vec<Arc<dyn rustfft::Fft<f64>>>,
}

impl HeatSplitStep {
    pub fn new(
        potential_u: &[f64],
        sigma: f64,
        axes: &[SpectralAxis],
        pgrid: &PGrid,
        dt: f64,
    ) -> Result<Self> {
        if axes.is_empty() {
            return Err(CoreError::Parameter("at least one spatial axis is required".into()));
        }
        let rows: usize = axes.iter().map(|a| a.m).product();
        if potential_u.len() != rows {
            return Err(CoreError::Dimension(format!(
                "potential has {} entries but the grid has {rows}",
                potential_u.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(CoreError::Parameter(format!("dt must be positive, got {dt}")));
        }
        let pmodes = pgrid.modes();
        let axis_modes: Vec<Vec<f64>> = axes.iter().map(|a| a.modes()).collect();

        // |mu_x|^2 per x row (row-major over axes)
        let mut musq = vec![0.0f64; rows];
        for (row, m) in musq.iter_mut().enumerate() {
            let mut rem = row;
            for (ax, modes) in axis_modes.iter().enumerate().rev() {
                let l = rem % axes[ax].m;
                rem /= axes[ax].m;
                *m += modes[l] * modes[l];
            }
        }

        let np = pgrid.np;
        let mut kinetic = vec![C64::new(0.0, 0.0); rows * np];
        let mut potential = vec![C64::new(0.0, 0.0); rows * np];
        for k in 0..np {
            for row in 0..rows {
                kinetic[k * rows + row] = (C64::i() * sigma * musq[row] * pmodes[k] * dt).exp();
                potential[k * rows + row] =
                    (C64::i() * potential_u[row] * pmodes[k] * dt).exp();
            }
        }

        let mut planner = FftPlanner::new();
        let fft_fwd = axes.iter().map(|a| planner.plan_fft_forward(a.m)).collect();
        let fft_inv = axes.iter().map(|a| planner.plan_fft_inverse(a.m)).collect();
        Ok(HeatSplitStep {
            kinetic,
            potential,
            dims: axes.iter().map(|a| a.m).collect(),
            np,
            fft_fwd,
            fft_inv,
        })
    }

    /// Advance one step. `data` must be in (fourier_x, fourier_p).
    pub fn apply(&self, data: &mut CMat) -> Result<()> {
        let rows: usize = self.dims.iter().product();
        if data.nrows() != rows || data.ncols() != self.np {
            return Err(CoreError::Dimension(format!(
                "state is {}x{} but the step was built for {}x{}",
                data.nrows(),
                data.ncols(),
                rows,
                self.np
            )));
        }
        let kinetic = &self.kinetic;
        let potential = &self.potential;
        let dims = &self.dims;
        let fwd = &self.fft_fwd;
        let inv = &self.fft_inv;
        exec::for_each_chunk(data.as_mut_slice(), rows, |start, col| {
            let k = start / rows;
            for (e, ph) in col.iter_mut().zip(&kinetic[k * rows..(k + 1) * rows]) {
                *e *= ph;
            }
            tensor_fourier_inplace(col, dims, inv, false);
            for (e, ph) in col.iter_mut().zip(&potential[k * rows..(k + 1) * rows]) {
                *e *= ph;
            }
            tensor_fourier_inplace(col, dims, fwd, true);
        });
        Ok(())
    }
}

/// Unitary multi-axis DFT over a row-major tensor, with each axis stored in
/// ascending-mode order (the same shift convention as the p axis).
pub fn tensor_fourier_inplace(
    data: &mut [C64],
    dims: &[usize],
    plans: &[Arc<dyn rustfft::Fft<f64>>],
    forward: bool,
) {
    let total = data.len();
    for (ax, &m) in dims.iter().enumerate() {
        let stride: usize = dims[ax + 1..].iter().product();
        let scale = 1.0 / (m as f64).sqrt();
        let half = m / 2;
        let mut scratch = vec![C64::new(0.0, 0.0); m];
        let mut line = vec![C64::new(0.0, 0.0); m];
        let block = stride * m;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                if forward {
                    for j in 0..m {
                        line[j] = data[start + j * stride];
                    }
                    plans[ax].process(&mut line);
                    for k in 0..m {
                        scratch[k] = line[(k + half) % m] * scale;
                    }
                } else {
                    for k in 0..m {
                        scratch[(k + half) % m] = data[start + k * stride];
                    }
                    plans[ax].process(&mut scratch);
                    for e in scratch.iter_mut() {
                        *e *= scale;
                    }
                }
                for j in 0..m {
                    data[start + j * stride] = scratch[j];
                }
            }
        }
    }
}

/// Convenience: unitary x-transform of a full (rows × Np) state, rows being
/// the row-major x tensor.
pub fn x_fourier(data: &CMat, axes: &[SpectralAxis], forward: bool) -> CMat {
    let mut planner = FftPlanner::new();
    let plans: Vec<Arc<dyn rustfft::Fft<f64>>> = axes
        .iter()
        .map(|a| if forward { planner.plan_fft_forward(a.m) } else { planner.plan_fft_inverse(a.m) })
        .collect();
    let dims: Vec<usize> = axes.iter().map(|a| a.m).collect();
    let rows: usize = dims.iter().product();
    let mut out = data.clone();
    exec::for_each_chunk(out.as_mut_slice(), rows, |_, col| {
        tensor_fourier_inplace(col, &dims, &plans, forward);
    });
    out
}
