//! Restoring u(t) from the extended state: pointwise restoration with the
//! unstable-mode threshold, projection probabilities, complexity
//! multiplicative factors, and observable quadrature.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::grid::PGrid;
use crate::linalg::CVec;
use crate::schrod::{Representation, SchrodState};

/// Everything a recovery run reports.
#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub u_restored: CVec,
    pub p_star: f64,
    pub probability: f64,
    pub g0: f64,
    pub g_plus: f64,
    pub g_c: f64,
    pub lambda_plus: f64,
}

/// Restore u(t) = e^{p*} v(t, p*) at a grid point p*.
///
/// p* must sit strictly inside the valid region: p* ≥ max(λ₊t, 0) + Δp.
pub fn restore_pointwise(
    state: &SchrodState,
    grid: &PGrid,
    lambda_plus: f64,
    p_star: f64,
) -> Result<CVec> {
    let threshold = (lambda_plus * state.time).max(0.0);
    if p_star < threshold + grid.dp - 1e-12 {
        return Err(CoreError::Precondition(format!(
            "p* = {p_star} is below the recovery threshold lambda_plus*t = {threshold} \
             (need p* >= threshold + dp)"
        )));
    }
    restore_at(state, grid, p_star)
}

/// Restoration without the threshold guard, for probing the invalid region.
pub fn restore_at(state: &SchrodState, grid: &PGrid, p_star: f64) -> Result<CVec> {
    let k = grid.index_of(p_star)?;
    let st = state.clone().into_representation(Representation::PhysicalP, grid)?;
    Ok(st.slot(k).map(|z| z * p_star.exp()))
}

/// The default restoration point: smallest grid point at or above
/// max(λ₊t, 0) + 5Δp, balancing threshold safety against e^{p}
/// amplification of the p-discretization error.
pub fn default_p_star(grid: &PGrid, lambda_plus: f64, t: f64) -> Result<f64> {
    let k = grid.index_at_or_above((lambda_plus * t).max(0.0) + 5.0 * grid.dp)?;
    Ok(grid.point(k))
}

/// Mean of e^{p_k} v(t, p_k) over `window` consecutive valid grid points
/// starting at p*. `window = 1` reduces to single-point restoration.
pub fn restore_windowed(
    state: &SchrodState,
    grid: &PGrid,
    lambda_plus: f64,
    p_star: f64,
    window: usize,
) -> Result<CVec> {
    if window == 0 {
        return Err(CoreError::Parameter("window must be at least 1".into()));
    }
    let k0 = grid.index_of(p_star)?;
    if k0 + window > grid.np {
        return Err(CoreError::Parameter(format!(
            "window of {window} points starting at p* = {p_star} runs off the grid"
        )));
    }
    let threshold = (lambda_plus * state.time).max(0.0);
    if p_star < threshold + grid.dp - 1e-12 {
        return Err(CoreError::Precondition(format!(
            "p* = {p_star} is below the recovery threshold lambda_plus*t = {threshold}"
        )));
    }
    let st = state.clone().into_representation(Representation::PhysicalP, grid)?;
    let n = st.system_dim();
    let mut acc = CVec::zeros(n);
    for k in k0..k0 + window {
        let w = C64::new(grid.point(k).exp() / window as f64, 0.0);
        acc += st.slot(k).map(|z| z * w);
    }
    Ok(acc)
}

/// Discrete projection probability: the squared-norm fraction of the state
/// on grid points p_k ≥ threshold.
pub fn projection_probability(state: &SchrodState, grid: &PGrid, threshold: f64) -> Result<f64> {
    if threshold < grid.left || threshold > grid.right {
        return Err(CoreError::Parameter(format!(
            "threshold {threshold} lies outside the grid [{}, {}]",
            grid.left, grid.right
        )));
    }
    let st = state.clone().into_representation(Representation::PhysicalP, grid)?;
    let mut above = 0.0;
    let mut total = 0.0;
    for k in 0..grid.np {
        let mass: f64 = st.data.column(k).iter().map(|z| z.norm_sqr()).sum();
        total += mass;
        if grid.point(k) >= threshold - 1e-15 {
            above += mass;
        }
    }
    if total <= 0.0 {
        return Err(CoreError::DegenerateState(
            "the extended state carries no norm; probabilities are undefined".into(),
        ));
    }
    Ok(above / total)
}

/// The multiplicative time-complexity factors:
/// g₀ = 2(‖u₀‖/‖u_T‖)², g₊ with the e^{-λ₊T} deflation, g_c with a general
/// shift c. For c = λ₊ the two expressions are arithmetically identical.
pub fn complexity_factors(
    u0: &CVec,
    u_t: &CVec,
    lambda_plus: f64,
    c: f64,
    t: f64,
) -> Result<(f64, f64, f64)> {
    let n0 = u0.norm();
    let nt = u_t.norm();
    if nt <= 0.0 {
        return Err(CoreError::DegenerateState(
            "the final state has zero norm; the g-factors diverge".into(),
        ));
    }
    let g0 = 2.0 * (n0 / nt).powi(2);
    let g_plus = shifted_g_factor(n0, nt, lambda_plus, t);
    let g_c = shifted_g_factor(n0, nt, c, t);
    Ok((g0, g_plus, g_c))
}

// Single arithmetic expression shared by g₊ and g_c, so equality at c = λ₊
// holds to the last bit.
fn shifted_g_factor(n0: f64, nt: f64, shift: f64, t: f64) -> f64 {
    2.0 * (n0 / ((-shift * t).exp() * nt)).powi(2)
}

/// Weighted quadrature with the scaled weights w̃_j = e^{-V_j/σ} w_j:
/// approximates ∫ f² dx from samples of f̃ = e^{V/(2σ)} f.
pub fn observable_quadrature(
    f_tilde: &[C64],
    v: &[f64],
    sigma: f64,
    weights: &[f64],
) -> Result<f64> {
    if f_tilde.len() != v.len() || f_tilde.len() != weights.len() {
        return Err(CoreError::Dimension(format!(
            "lengths differ: state {}, potential {}, weights {}",
            f_tilde.len(),
            v.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(CoreError::Parameter("quadrature weights must be non-negative".into()));
    }
    Ok(f_tilde
        .iter()
        .zip(v)
        .zip(weights)
        .map(|((f, &vj), &wj)| (-vj / sigma).exp() * wj * f.norm_sqr())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::choose_domain;
    use crate::linalg::CMat;
    use crate::linear_core::{hermitian_split, reference_evolve, spectral_data};
    use crate::schrod::{evolve, transport_oracle, warp_initial};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn restore_at_t_zero_is_exact() {
        let grid = PGrid::new(-4.0, 4.0, 64).unwrap();
        let u0 = CVec::from_vec(vec![c(0.7, -0.2), c(1.0, 0.5)]);
        let st = warp_initial(&u0, &grid).unwrap();
        for p in [0.5, 1.0, 2.5] {
            let r = restore_pointwise(&st, &grid, 0.0, p).unwrap();
            assert!((r - &u0).norm() <= 1e-13);
        }
    }

    #[test]
    fn restore_threshold_guard() {
        let grid = PGrid::new(-4.0, 4.0, 64).unwrap();
        let u0 = CVec::from_vec(vec![c(1.0, 0.0)]);
        let mut st = warp_initial(&u0, &grid).unwrap();
        st.time = 1.0;
        // lambda_plus * t = 0.5; p = 0.25 is invalid
        let err = restore_pointwise(&st, &grid, 0.5, 0.25).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0.5"), "error should name the threshold: {msg}");
        assert!(restore_at(&st, &grid, 0.25).is_ok());
    }

    #[test]
    fn restore_off_grid_point_rejected() {
        let grid = PGrid::new(-4.0, 4.0, 64).unwrap();
        let u0 = CVec::from_vec(vec![c(1.0, 0.0)]);
        let st = warp_initial(&u0, &grid).unwrap();
        assert!(restore_pointwise(&st, &grid, 0.0, 0.3).is_err());
    }

    #[test]
    fn restore_matches_transport_oracle_stable_scalar() {
        // H1 = diag(-1), t = 1, p* = 0.5: restored value e^{-1} u0 within O(dp)
        let a = CMat::from_element(1, 1, c(-1.0, 0.0));
        let split = hermitian_split(&a).unwrap();
        let sd = spectral_data(&split).unwrap();
        let u0 = CVec::from_vec(vec![c(1.0, 0.0)]);
        let (l, r) = choose_domain(-1.0, 0.0, 1.0, -1.0, 1e-9).unwrap();
        let dp = 2f64.powi(-7);
        let grid = PGrid::with_spacing(l, r, dp).unwrap();
        let st = warp_initial(&u0, &grid).unwrap();
        let out = evolve(&split, &st, &grid, 1.0).unwrap();
        let restored = restore_pointwise(&out, &grid, 0.0, 0.5).unwrap();
        let oracle = transport_oracle(&split, &sd, &u0, 1.0, 0.5).unwrap()
            .map(|z| z * (0.5f64).exp());
        assert!((restored[0] - oracle[0]).norm() <= 5.0 * dp);
        assert!((restored[0].re - (-1.0f64).exp()).abs() <= 5.0 * dp);
    }

    #[test]
    fn below_threshold_error_is_order_one() {
        // H1 = diag(0.5): restoring at p = 0.25 < lambda_plus t = 0.5 picks up
        // e^{2p - 0.5} u0 instead of e^{0.5} u0 — a Theta(1) error
        let a = CMat::from_element(1, 1, c(0.5, 0.0));
        let split = hermitian_split(&a).unwrap();
        let sd = spectral_data(&split).unwrap();
        let u0 = CVec::from_vec(vec![c(1.0, 0.0)]);
        let t = 1.0;
        let p = 0.25;
        // transport-oracle evaluation of the invalid region
        let v = transport_oracle(&split, &sd, &u0, t, p).unwrap();
        let restored = v[0] * c(p.exp(), 0.0);
        let wrong = (2.0 * p - 0.5f64).exp();
        assert!((restored.re - wrong).abs() < 1e-12);
        let truth = (0.5f64).exp();
        assert!((restored.re - truth).abs() > 0.1 * truth);
    }

    #[test]
    fn windowed_restore_reverts_to_single_point() {
        let grid = PGrid::new(-4.0, 4.0, 64).unwrap();
        let u0 = CVec::from_vec(vec![c(0.3, 0.9)]);
        let st = warp_initial(&u0, &grid).unwrap();
        let single = restore_pointwise(&st, &grid, 0.0, 1.0).unwrap();
        let windowed = restore_windowed(&st, &grid, 0.0, 1.0, 1).unwrap();
        assert!((single - windowed).norm() <= 1e-15);
        // at t = 0 every valid point restores u0 exactly, so any window does
        let wide = restore_windowed(&st, &grid, 0.0, 1.0, 8).unwrap();
        assert!((wide - &u0).norm() <= 1e-12);
    }

    #[test]
    fn probability_symmetric_initial_data() {
        let grid = PGrid::with_spacing(-16.0, 16.0, 2f64.powi(-6)).unwrap();
        let u0 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, -2.0)]);
        let st = warp_initial(&u0, &grid).unwrap();
        let p = projection_probability(&st, &grid, 0.0).unwrap();
        assert!((p - 0.5).abs() <= 5.0 * grid.dp);
    }

    #[test]
    fn probability_unitary_dynamics_stays_half() {
        // H1 = 0: the evolution is unitary on u, so P stays 1/2 + O(dp)
        let h2 = CMat::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.0, -0.7), c(0.0, 0.7), c(-0.2, 0.0)]);
        let a = h2.map(|z| z * C64::i());
        let split = hermitian_split(&a).unwrap();
        let (l, r) = choose_domain(0.0, 0.0, 1.5, -1.0, 1e-9).unwrap();
        let grid = PGrid::with_spacing(l, r, 2f64.powi(-6)).unwrap();
        let u0 = CVec::from_vec(vec![c(1.0, 0.0), c(0.5, 0.5)]);
        let st = warp_initial(&u0, &grid).unwrap();
        let out = evolve(&split, &st, &grid, 1.5).unwrap();
        let p = projection_probability(&out, &grid, 0.0).unwrap();
        assert!((p - 0.5).abs() <= 5.0 * grid.dp);
    }

    #[test]
    fn probability_decaying_scalar() {
        // H1 = diag(-1), t = 1: P -> e^{-2}/2, cross-checked by grid summation
        let a = CMat::from_element(1, 1, c(-1.0, 0.0));
        let split = hermitian_split(&a).unwrap();
        let (l, r) = choose_domain(-1.0, 0.0, 1.0, -1.0, 1e-9).unwrap();
        let grid = PGrid::with_spacing(l, r, 2f64.powi(-7)).unwrap();
        let u0 = CVec::from_vec(vec![c(1.0, 0.0)]);
        let st = warp_initial(&u0, &grid).unwrap();
        let out = evolve(&split, &st, &grid, 1.0).unwrap();
        let p = projection_probability(&out, &grid, 0.0).unwrap();
        let exact = 0.5 * (-2.0f64).exp();
        assert!((p - exact).abs() <= 5.0 * grid.dp, "p = {p}, exact = {exact}");
    }

    #[test]
    fn probability_degenerate_state() {
        let grid = PGrid::new(-2.0, 2.0, 8).unwrap();
        let st = SchrodState {
            data: CMat::zeros(2, 8),
            representation: Representation::PhysicalP,
            time: 0.0,
        };
        assert!(matches!(
            projection_probability(&st, &grid, 0.0),
            Err(CoreError::DegenerateState(_))
        ));
        assert!(projection_probability(&st, &grid, 5.0).is_err());
    }

    #[test]
    fn g_factors() {
        // norm-preserving: g0 = 2
        let u0 = CVec::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let (g0, _, _) = complexity_factors(&u0, &u0, 0.0, 0.0, 1.0).unwrap();
        assert!((g0 - 2.0).abs() < 1e-15);

        // |uT| = e^{-1} |u0|, lambda_plus = 0 -> g0 = 2e^2
        let ut = u0.map(|z| z * (-1.0f64).exp());
        let (g0, gp, _) = complexity_factors(&u0, &ut, 0.0, 0.0, 1.0).unwrap();
        assert!((g0 - 2.0 * (2.0f64).exp()).abs() < 1e-12);
        assert!((gp - g0).abs() < 1e-15);

        // c = lambda_plus: g_c == g_plus to the last bit
        let (_, gp, gc) = complexity_factors(&u0, &ut, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(gp, gc);

        let zero = CVec::zeros(2);
        assert!(complexity_factors(&u0, &zero, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn g_factor_from_oracle_norms() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(-1.0, 0.0), c(-1.0, 0.0)]));
        let u0 = CVec::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]);
        let ut = reference_evolve(&a, &u0, 1.0).unwrap();
        let (g0, _, _) = complexity_factors(&u0, &ut, 0.0, 0.0, 1.0).unwrap();
        assert!((g0 - 2.0 * (2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn quadrature_plain_and_constant() {
        // V = 0 reduces to plain quadrature
        let f: Vec<C64> = vec![c(1.0, 0.0); 8];
        let w = vec![2.0 / 8.0; 8];
        let v = vec![0.0; 8];
        let q = observable_quadrature(&f, &v, 1.0, &w).unwrap();
        assert!((q - 2.0).abs() < 1e-14); // ∫ 1 dx over (-1,1)

        assert!(observable_quadrature(&f, &v[..4], 1.0, &w).is_err());
        assert!(observable_quadrature(&f, &v, 1.0, &vec![-1.0; 8]).is_err());
    }

    #[test]
    fn quadrature_steady_state_against_fine_reference() {
        // f = e^{-V/σ}, V = cos(pi x), σ = 1: ∫ f² = ∫ e^{-2V}; f̃ = e^{V/(2σ)} f
        let quad = |m: usize| -> f64 {
            let dx = 2.0 / m as f64;
            let v: Vec<f64> = (0..m).map(|j| (PI * (-1.0 + j as f64 * dx)).cos()).collect();
            let f_tilde: Vec<C64> = v.iter().map(|&vj| c((-vj / 2.0).exp(), 0.0)).collect();
            let w = vec![dx; m];
            observable_quadrature(&f_tilde, &v, 1.0, &w).unwrap()
        };
        let coarse = quad(64);
        let fine = quad(4096);
        // the integrand is smooth periodic: the trapezoid-type rule is
        // spectrally accurate, so 64 points already agree to ~1e-8
        assert!((coarse - fine).abs() <= 1e-8, "coarse {coarse} fine {fine}");
    }
}
