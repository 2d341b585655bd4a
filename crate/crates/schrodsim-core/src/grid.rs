//! The auxiliary-variable grid: a uniform periodic mesh on [L, R] with its
//! Fourier modes, and the rule that sizes the domain from the spectrum.

use crate::error::{CoreError, Result};

/// Uniform grid p_k = L + k·Δp, k = 0..Np, with Fourier modes
/// μ_l = 2πl/(R−L) for l = −Np/2 .. Np/2−1, stored ascending.
#[derive(Debug, Clone)]
pub struct PGrid {
    pub left: f64,
    pub right: f64,
    pub np: usize,
    pub dp: f64,
}

impl PGrid {
    pub fn new(left: f64, right: f64, np: usize) -> Result<Self> {
        if right <= left {
            return Err(CoreError::Parameter(format!(
                "grid needs R > L, got L = {left}, R = {right}"
            )));
        }
        if np == 0 || np % 2 != 0 {
            return Err(CoreError::Parameter(format!("Np must be even and positive, got {np}")));
        }
        Ok(PGrid { left, right, np, dp: (right - left) / np as f64 })
    }

    /// Grid from a step size; (R−L)/Δp must come out an even integer.
    pub fn with_spacing(left: f64, right: f64, dp: f64) -> Result<Self> {
        let np = (right - left) / dp;
        let rounded = np.round();
        if (np - rounded).abs() > 1e-9 || rounded <= 0.0 {
            return Err(CoreError::Parameter(format!(
                "(R-L)/dp = {np} is not a positive integer"
            )));
        }
        Self::new(left, right, rounded as usize)
    }

    pub fn point(&self, k: usize) -> f64 {
        self.left + k as f64 * self.dp
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.np).map(|k| self.point(k)).collect()
    }

    /// Fourier modes in ascending order: slot k holds μ for l = k − Np/2.
    pub fn modes(&self) -> Vec<f64> {
        let span = self.right - self.left;
        let half = self.np as i64 / 2;
        (0..self.np as i64)
            .map(|k| 2.0 * std::f64::consts::PI * (k - half) as f64 / span)
            .collect()
    }

    /// Index of the grid point equal to `p` (must lie on the grid).
    pub fn index_of(&self, p: f64) -> Result<usize> {
        let k = (p - self.left) / self.dp;
        let rounded = k.round();
        if (k - rounded).abs() > 1e-9 * self.np as f64 || rounded < 0.0 || rounded >= self.np as f64
        {
            return Err(CoreError::Parameter(format!(
                "p = {p} is not a grid point of [{}, {}] with dp = {}",
                self.left, self.right, self.dp
            )));
        }
        Ok(rounded as usize)
    }

    /// Smallest grid index whose point is ≥ `p`.
    pub fn index_at_or_above(&self, p: f64) -> Result<usize> {
        let k = ((p - self.left) / self.dp - 1e-12).ceil();
        if k < 0.0 {
            return Ok(0);
        }
        if k >= self.np as f64 {
            return Err(CoreError::Parameter(format!(
                "p = {p} lies beyond the right end {} of the grid",
                self.right
            )));
        }
        Ok(k as usize)
    }
}

/// Pick the truncation interval [L, R] for the auxiliary variable.
///
/// The left end is placed so that neither the fastest left-moving wave nor
/// the e^{+p} tail of the warped initial data carries more than `tail_tol`
/// of squared mass past it during [0, T]; the right end keeps the e^{-p}
/// tail below `tail_tol` even after growth at speed λ₊. Ends are rounded to
/// integers with an even span so that any dyadic Δp tiles it evenly.
pub fn choose_domain(
    lambda_min: f64,
    lambda_plus: f64,
    t_final: f64,
    left_anchor: f64,
    tail_tol: f64,
) -> Result<(f64, f64)> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(CoreError::Parameter(format!("tail_tol must lie in (0,1), got {tail_tol}")));
    }
    if t_final < 0.0 || !t_final.is_finite() {
        return Err(CoreError::Parameter(format!("T must be finite and >= 0, got {t_final}")));
    }
    if lambda_plus < 0.0 {
        return Err(CoreError::Parameter(format!("lambda_plus must be >= 0, got {lambda_plus}")));
    }
    // mass of the e^{+p} tail below L' is e^{2L'}/2
    let left_tail = 0.5 * (2.0 * tail_tol).ln();
    let left = (left_anchor.min(left_tail) - lambda_min.abs() * t_final).floor();
    let right = (lambda_plus * t_final - tail_tol.ln()).ceil();
    let right = if ((right - left) as i64) % 2 == 0 { right } else { right + 1.0 };
    Ok((left, right))
}
