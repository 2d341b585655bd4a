//! Spectral discretization of the Fokker-Planck equation on a periodic box:
//! the momentum operator, the conservation-form generator and its symmetric
//! transformation, the heat-form effective potential, steady states, and
//! the positive-eigenvalue mesh scan.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::exec;
use crate::linalg::{self, CMat, CVec};

/// One spatial axis: M collocation points on [a, b) with periodic wrap.
#[derive(Debug, Clone)]
pub struct SpectralAxis {
    pub m: usize,
    pub a: f64,
    pub b: f64,
}

impl SpectralAxis {
    pub fn new(m: usize, a: f64, b: f64) -> Result<Self> {
        if m == 0 || m % 2 != 0 {
            return Err(CoreError::Parameter(format!("axis size must be even, got {m}")));
        }
        if !(b > a) {
            return Err(CoreError::Parameter(format!("axis needs b > a, got [{a}, {b}]")));
        }
        Ok(SpectralAxis { m, a, b })
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.m as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.a + j as f64 * self.dx()).collect()
    }

    /// Fourier modes μ_l = 2π(l−N−1)/(b−a), l = 1..M — ascending order.
    pub fn modes(&self) -> Vec<f64> {
        let n = self.m as i64 / 2;
        (1..=self.m as i64)
            .map(|l| 2.0 * std::f64::consts::PI * (l - n - 1) as f64 / (self.b - self.a))
            .collect()
    }
}

/// Built-in potentials plus user-tabulated values on the tensor grid.
#[derive(Debug, Clone)]
pub enum Potential {
    /// V(x) = c everywhere (the drift vanishes and the generator reduces to
    /// σΔ).
    Constant(f64),
    /// V(x) = |x|²/2 (non-periodic on the default box; used as in the source
    /// problem even so).
    Quadratic,
    /// V(x) = Σ_i cos(π x_i).
    Cosine,
    /// Tabulated values, row-major over the tensor grid; derivatives fall
    /// back to spectral differentiation.
    Table(Vec<f64>),
}

/// Which assembled generator a problem asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    ConservationI,
    ConservationII,
    Heat,
    FiniteDifference,
}

/// A Fokker-Planck instance on the tensor grid [a,b)^d.
#[derive(Debug, Clone)]
pub struct FokkerPlanckProblem {
    pub dim: usize,
    pub axis: SpectralAxis,
    pub sigma: f64,
    pub potential: Potential,
    pub form: Form,
}

/// Dense operators are never materialized beyond this many rows.
pub const MAX_OPERATOR_ROWS: usize = 4096;

impl FokkerPlanckProblem {
    pub fn new(
        dim: usize,
        axis: SpectralAxis,
        sigma: f64,
        potential: Potential,
        form: Form,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(CoreError::Parameter(format!("dim must be 1 or 2, got {dim}")));
        }
        if !(sigma > 0.0) {
            return Err(CoreError::Parameter(format!("sigma must be positive, got {sigma}")));
        }
        let rows = axis.m.pow(dim as u32);
        if rows > MAX_OPERATOR_ROWS {
            return Err(CoreError::Resource(format!(
                "grid has {rows} tensor points (cap {MAX_OPERATOR_ROWS})"
            )));
        }
        if let Potential::Table(t) = &potential {
            if t.len() != rows {
                return Err(CoreError::Dimension(format!(
                    "tabulated potential has {} entries, grid has {rows}",
                    t.len()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::Parameter("tabulated potential has non-finite entries".into()));
            }
        }
        Ok(FokkerPlanckProblem { dim, axis, sigma, potential, form })
    }

    pub fn rows(&self) -> usize {
        self.axis.m.pow(self.dim as u32)
    }

    /// Tensor-grid coordinates of row-major point `row`.
    pub fn point(&self, row: usize) -> Vec<f64> {
        let m = self.axis.m;
        let mut idx = vec![0usize; self.dim];
        let mut rem = row;
        for ax in (0..self.dim).rev() {
            idx[ax] = rem % m;
            rem /= m;
        }
        idx.iter().map(|&j| self.axis.a + j as f64 * self.axis.dx()).collect()
    }

    /// Potential sampled on the tensor grid (row-major).
    pub fn potential_values(&self) -> Vec<f64> {
        match &self.potential {
            Potential::Table(t) => t.clone(),
            _ => (0..self.rows())
                .map(|row| {
                    let x = self.point(row);
                    match self.potential {
                        Potential::Constant(c) => c,
                        Potential::Quadratic => x.iter().map(|xi| xi * xi).sum::<f64>() / 2.0,
                        Potential::Cosine => {
                            x.iter().map(|xi| (std::f64::consts::PI * xi).cos()).sum()
                        }
                        Potential::Table(_) => unreachable!(),
                    }
                })
                .collect(),
        }
    }
}

/// The one-axis momentum operator P_μ = Φ D_μ Φ⁻¹, Hermitian with
/// eigenvalues exactly the Fourier modes.
pub fn momentum_operator(m: usize, interval: (f64, f64)) -> Result<CMat> {
    let axis = SpectralAxis::new(m, interval.0, interval.1)?;
    let modes = axis.modes();
    let dx = axis.dx();
    // circulant: P[j,j'] = t_{(j-j') mod M}, t_k = (1/M) Σ_l μ_l e^{i μ_l k Δx};
    // filling t_{M-k} = conj(t_k) makes the matrix Hermitian by construction
    let mut t = vec![C64::new(0.0, 0.0); m];
    for k in 0..=m / 2 {
        let mut s = C64::new(0.0, 0.0);
        for &mu in &modes {
            s += C64::new(0.0, mu * k as f64 * dx).exp() * mu;
        }
        t[k] = s / m as f64;
        if k > 0 && k < m {
            t[m - k] = t[k].conj();
        }
    }
    Ok(CMat::from_fn(m, m, |j, jp| t[(j + m - jp) % m]))
}

/// Diagonal exponential factors of the potential.
#[derive(Debug, Clone)]
pub struct ExpPotential {
    pub plus: Vec<f64>,       // e^{+V/σ}
    pub minus: Vec<f64>,      // e^{-V/σ}
    pub half_plus: Vec<f64>,  // e^{+V/(2σ)}
    pub half_minus: Vec<f64>, // e^{-V/(2σ)}
}

/// The spectral building blocks of one problem: P_μ, its diagonal modes,
/// and the e^{±V/σ} factors (elementwise, not matrix exponentials).
pub struct SpectralOperators {
    pub pmu: CMat,
    pub dmu: Vec<f64>,
    pub exp_v: ExpPotential,
}

pub fn spectral_operators(prob: &FokkerPlanckProblem) -> Result<SpectralOperators> {
    let pmu = momentum_operator(prob.axis.m, (prob.axis.a, prob.axis.b))?;
    let v = prob.potential_values();
    let s = prob.sigma;
    Ok(SpectralOperators {
        pmu,
        dmu: prob.axis.modes(),
        exp_v: ExpPotential {
            plus: v.iter().map(|&vi| (vi / s).exp()).collect(),
            minus: v.iter().map(|&vi| (-vi / s).exp()).collect(),
            half_plus: v.iter().map(|&vi| (vi / (2.0 * s)).exp()).collect(),
            half_minus: v.iter().map(|&vi| (-vi / (2.0 * s)).exp()).collect(),
        },
    })
}

/// S = Σ_l P_l e^{-V/σ} P_l over the tensor grid (Hermitian).
///
/// For d = 2 the Kronecker structure is used directly: P₁ diag(e) P₁ only
/// couples rows with matching second index, so the sum fills in M-sized
/// blocks without ever forming P_l at full size.
fn momentum_sandwich_sum(prob: &FokkerPlanckProblem, pmu: &CMat, eminus: &[f64]) -> CMat {
    let m = prob.axis.m;
    match prob.dim {
        1 => {
            let diag = CMat::from_diagonal(&CVec::from_iterator(
                m,
                eminus.iter().map(|&e| C64::new(e, 0.0)),
            ));
            pmu * diag * pmu
        }
        2 => {
            let rows = m * m;
            let mut s = CMat::zeros(rows, rows);
            // axis 0: fixed second index t couples (i,t) with (j,t)
            for t in 0..m {
                let diag = CMat::from_diagonal(&CVec::from_iterator(
                    m,
                    (0..m).map(|k| C64::new(eminus[k * m + t], 0.0)),
                ));
                let blk = pmu * diag * pmu;
                for i in 0..m {
                    for j in 0..m {
                        s[(i * m + t, j * m + t)] += blk[(i, j)];
                    }
                }
            }
            // axis 1: fixed first index t couples (t,i) with (t,j)
            for t in 0..m {
                let diag = CMat::from_diagonal(&CVec::from_iterator(
                    m,
                    (0..m).map(|k| C64::new(eminus[t * m + k], 0.0)),
                ));
                let blk = pmu * diag * pmu;
                for i in 0..m {
                    for j in 0..m {
                        s[(t * m + i, t * m + j)] += blk[(i, j)];
                    }
                }
            }
            s
        }
        _ => unreachable!(),
    }
}

/// Conservation-form generator A = −σ (Σ_l P_l e^{-V/σ} P_l) e^{V/σ}.
///
/// Annihilates the discrete steady state e^{-V/σ} exactly.
pub fn assemble_conservation_a(prob: &FokkerPlanckProblem) -> Result<CMat> {
    let ops = spectral_operators(prob)?;
    let s = momentum_sandwich_sum(prob, &ops.pmu, &ops.exp_v.minus);
    let mut a = s;
    for j in 0..a.ncols() {
        let f = -prob.sigma * ops.exp_v.plus[j];
        for i in 0..a.nrows() {
            a[(i, j)] *= f;
        }
    }
    Ok(a)
}

/// Symmetric-form generator H = −σ e^{V/(2σ)} (Σ_l A_l) e^{V/(2σ)}:
/// Hermitian and negative semi-definite, similar to the conservation form.
pub fn assemble_symmetric_h(prob: &FokkerPlanckProblem) -> Result<CMat> {
    let ops = spectral_operators(prob)?;
    let s = momentum_sandwich_sum(prob, &ops.pmu, &ops.exp_v.minus);
    let mut h = s;
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            h[(i, j)] *= -prob.sigma * ops.exp_v.half_plus[i] * ops.exp_v.half_plus[j];
        }
    }
    Ok(h)
}

/// The heat-form effective potential U = |∇V|²/(4σ) − ΔV/2 on the grid.
#[derive(Debug, Clone)]
pub struct HeatPotential {
    pub values: Vec<f64>,
    /// True when ∇V, ΔV came from spectral differentiation of tabulated
    /// data rather than analytic formulas.
    pub spectral_fallback: bool,
}

pub fn heat_form_potential(prob: &FokkerPlanckProblem) -> Result<HeatPotential> {
    let rows = prob.rows();
    let sigma = prob.sigma;
    match &prob.potential {
        Potential::Constant(_) => {
            Ok(HeatPotential { values: vec![0.0; rows], spectral_fallback: false })
        }
        Potential::Quadratic => {
            // ∇V = x, ΔV = d
            let values = (0..rows)
                .map(|r| {
                    let x = prob.point(r);
                    let g2: f64 = x.iter().map(|xi| xi * xi).sum();
                    g2 / (4.0 * sigma) - prob.dim as f64 / 2.0
                })
                .collect();
            Ok(HeatPotential { values, spectral_fallback: false })
        }
        Potential::Cosine => {
            let pi = std::f64::consts::PI;
            let values = (0..rows)
                .map(|r| {
                    let x = prob.point(r);
                    let g2: f64 = x.iter().map(|xi| (pi * (pi * xi).sin()).powi(2)).sum();
                    let lap: f64 = x.iter().map(|xi| -pi * pi * (pi * xi).cos()).sum();
                    g2 / (4.0 * sigma) - lap / 2.0
                })
                .collect();
            Ok(HeatPotential { values, spectral_fallback: false })
        }
        Potential::Table(v) => {
            let pmu = momentum_operator(prob.axis.m, (prob.axis.a, prob.axis.b))?;
            let vc: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
            let mut g2 = vec![0.0f64; rows];
            let mut lap = vec![0.0f64; rows];
            for ax in 0..prob.dim {
                // ∂_ax = i P_ax, Δ contribution = -P_ax²
                let d1 = apply_axis(&pmu, &vc, ax, prob.dim, prob.axis.m);
                let d2 = apply_axis(&pmu, &d1, ax, prob.dim, prob.axis.m);
                for r in 0..rows {
                    let g = (C64::i() * d1[r]).re;
                    g2[r] += g * g;
                    lap[r] -= d2[r].re;
                }
            }
            let values =
                (0..rows).map(|r| g2[r] / (4.0 * sigma) - lap[r] / 2.0).collect();
            Ok(HeatPotential { values, spectral_fallback: true })
        }
    }
}

/// Apply a one-axis operator along tensor axis `ax` of a row-major vector.
fn apply_axis(op: &CMat, x: &[C64], ax: usize, dim: usize, m: usize) -> Vec<C64> {
    let rows = x.len();
    let stride = m.pow((dim - 1 - ax) as u32);
    let mut out = vec![C64::new(0.0, 0.0); rows];
    let block = stride * m;
    for base in (0..rows).step_by(block) {
        for off in 0..stride {
            for i in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..m {
                    acc += op[(i, j)] * x[base + off + j * stride];
                }
                out[base + off + i * stride] = acc;
            }
        }
    }
    out
}

/// ψ = e^{V/(2σ)} ∘ f.
pub fn transform_to_heat(f: &[C64], v: &[f64], sigma: f64) -> Result<Vec<C64>> {
    if f.len() != v.len() {
        return Err(CoreError::Dimension(format!(
            "state has {} entries, potential {}",
            f.len(),
            v.len()
        )));
    }
    Ok(f.iter().zip(v).map(|(fi, &vi)| fi * (vi / (2.0 * sigma)).exp()).collect())
}

/// f = e^{-V/(2σ)} ∘ ψ (inverse of [`transform_to_heat`]).
pub fn transform_from_heat(psi: &[C64], v: &[f64], sigma: f64) -> Result<Vec<C64>> {
    if psi.len() != v.len() {
        return Err(CoreError::Dimension(format!(
            "state has {} entries, potential {}",
            psi.len(),
            v.len()
        )));
    }
    Ok(psi.iter().zip(v).map(|(pi, &vi)| pi * (-vi / (2.0 * sigma)).exp()).collect())
}

/// The steady state f = e^{-V/σ}.
pub fn steady_state(v: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(CoreError::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    Ok(v.iter().map(|&vi| (-vi / sigma).exp()).collect())
}

/// λ₊ of the conservation-I Hermitian part for each mesh size in `m_list`.
pub fn positive_eig_scan(
    potential: &Potential,
    sigma: f64,
    interval: (f64, f64),
    m_list: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::Parameter("mesh list must be strictly ascending".into()));
    }
    let entries = exec::map_indexed(m_list.len(), |idx| -> Result<(usize, f64)> {
        let m = m_list[idx];
        let axis = SpectralAxis::new(m, interval.0, interval.1)?;
        let pot = match potential {
            Potential::Table(_) => {
                return Err(CoreError::Parameter(
                    "the eigenvalue scan needs an analytic potential (one table cannot serve \
                     several mesh sizes)"
                        .into(),
                ))
            }
            other => other.clone(),
        };
        let prob = FokkerPlanckProblem::new(1, axis, sigma, pot, Form::ConservationI)?;
        let a = assemble_conservation_a(&prob)?;
        let h1 = (&a + a.adjoint()).map(|z| z * 0.5);
        let (vals, _) = linalg::eigh(&h1)?;
        Ok((m, vals.last().copied().unwrap_or(0.0).max(0.0)))
    });
    entries.into_iter().collect()
}
