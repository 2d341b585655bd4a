//! One runner per experiment. Each produces CSV tables plus a manifest and
//! returns the list of emitted files.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use schrodsim_core::circuit;
use schrodsim_core::convergence::observed_order;
use schrodsim_core::fokker_planck::{
    assemble_conservation_a, assemble_symmetric_h, heat_form_potential, positive_eig_scan,
    spectral_operators, FokkerPlanckProblem, Form, Potential, SpectralAxis,
};
use schrodsim_core::grid::{choose_domain, PGrid};
use schrodsim_core::instances;
use schrodsim_core::linalg::{self, CMat, CVec};
use schrodsim_core::recovery;
use schrodsim_core::schrod;
use schrodsim_core::splitting::{
    splitting_probability, verify_splitting_exactness, x_fourier, HeatSplitStep, SplitSchedule,
};
use schrodsim_core::{
    hermitian_split, reference_evolve, spectral_data, HermitianSplit, SpectralData,
};

use crate::config::*;
use crate::output::{provenance, Cell, CsvFile, Manifest};
use crate::RunError;

pub struct RunContext<'a> {
    pub out_dir: &'a Path,
    pub digest: String,
    pub seed: u64,
    pub resolved: serde_json::Value,
}

impl RunContext<'_> {
    fn manifest(&self, experiment: &str) -> Manifest {
        Manifest::new(experiment, &self.digest, Some(self.seed), self.resolved.clone())
    }

    fn csv(&self, experiment: &str, name: &str, header: &[&str]) -> CsvFile {
        CsvFile::new(
            self.out_dir,
            name,
            &provenance(experiment, &self.digest, Some(self.seed)),
            header,
        )
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The left end of the p-domain from the slowest relevant wave: components
/// whose weight in the initial data is below the tail tolerance cannot move
/// visible mass, so their speeds do not have to be resolved.
fn effective_lambda_min(sd: &SpectralData, u0: &CVec, tail_tol: f64) -> f64 {
    let weights = sd.q.adjoint() * u0;
    let total = u0.norm().max(1e-300);
    let mut lmin: f64 = 0.0;
    for (i, &lam) in sd.eigenvalues.iter().enumerate() {
        if weights[i].norm() > tail_tol * total {
            lmin = lmin.min(lam);
        }
    }
    lmin
}

fn build_system(spec: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<(HermitianSplit, CVec), RunError> {
    match spec {
        SystemSpec::Zero { n } => {
            check_system_size(*n)?;
            let split = hermitian_split(&CMat::zeros(*n, *n))?;
            let u0 = instances::random_vector(*n, rng);
            Ok((split, u0))
        }
        SystemSpec::RandomStable { n } => {
            check_system_size(*n)?;
            let split = instances::random_stable_split(*n, rng)?;
            let u0 = instances::random_vector(*n, rng);
            Ok((split, u0))
        }
        SystemSpec::RandomUnstable { n, delta } => {
            check_system_size(*n)?;
            if !(*delta > 0.0 && *delta < 4.0) {
                return Err(RunError::Validation(format!(
                    "system.delta must lie in (0, 4), got {delta}"
                )));
            }
            let split = instances::random_unstable_split(*n, *delta, rng)?;
            let u0 = instances::random_vector(*n, rng);
            Ok((split, u0))
        }
        SystemSpec::Matrix { entries } => {
            let n = entries.len();
            check_system_size(n)?;
            if entries.iter().any(|row| row.len() != n) {
                return Err(RunError::Validation("system.entries must be square".into()));
            }
            let a = CMat::from_fn(n, n, |i, j| C64::new(entries[i][j][0], entries[i][j][1]));
            let split = hermitian_split(&a)?;
            let u0 = instances::random_vector(n, rng);
            Ok((split, u0))
        }
    }
}

fn check_system_size(n: usize) -> Result<(), RunError> {
    if !(1..=64).contains(&n) {
        return Err(RunError::Validation(format!("system size n = {n} outside 1..=64")));
    }
    Ok(())
}

fn check_tail_tol(tail_tol: f64) -> Result<(), RunError> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(RunError::Validation(format!("tail_tol = {tail_tol} outside (0, 1)")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ode_schrod
// ---------------------------------------------------------------------------

pub fn run_ode_schrod(cfg: &OdeSchrodConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, RunError> {
    check_dp_exponents(&cfg.dp_exponents)?;
    check_tail_tol(cfg.tail_tol)?;
    if !(cfg.t_final > 0.0) {
        return Err(RunError::Validation(format!("t_final = {} must be positive", cfg.t_final)));
    }
    let window = cfg.window.unwrap_or(1);
    if window == 0 {
        return Err(RunError::Validation("window must be at least 1".into()));
    }

    let mut rng = rng_for(ctx.seed);
    let (split, u0) = build_system(&cfg.system, &mut rng)?;
    let sd = spectral_data(&split)?;
    let t = cfg.t_final;
    let expected = reference_evolve(&split.a, &u0, t)?;
    let lmin = effective_lambda_min(&sd, &u0, cfg.tail_tol);
    let (l, r) = choose_domain(lmin, sd.lambda_plus, t, cfg.l0, cfg.tail_tol)?;

    let mut csv = ctx.csv(
        "ode_schrod",
        "ode_schrod.csv",
        &[
            "dp",
            "np",
            "p_star",
            "restored_rel_err",
            "prob_p_ge_0",
            "prob_identity_err",
            "g0",
            "g_plus",
            "g_c",
        ],
    );
    let prob_exact = 0.5 * (expected.norm() / u0.norm()).powi(2);
    let mut state_errors: Vec<(f64, f64)> = Vec::new();

    // finest-grid reference for the p-refinement order
    let dp_fine = 2f64.powi(-(cfg.dp_exponents.iter().max().unwrap() + 3));
    let fine_grid = PGrid::with_spacing(l, r, dp_fine).map_err(RunError::from)?;
    let fine = schrod::evolve(&split, &schrod::warp_initial(&u0, &fine_grid)?, &fine_grid, t)?;

    for &k in &cfg.dp_exponents {
        let dp = 2f64.powi(-k);
        let grid = PGrid::with_spacing(l, r, dp)?;
        let st = schrod::warp_initial(&u0, &grid)?;
        let out = schrod::evolve(&split, &st, &grid, t)?;

        let p_star = recovery::default_p_star(&grid, sd.lambda_plus, t)?;
        let restored = if window == 1 {
            recovery::restore_pointwise(&out, &grid, sd.lambda_plus, p_star)?
        } else {
            recovery::restore_windowed(&out, &grid, sd.lambda_plus, p_star, window)?
        };
        let rel = (&restored - &expected).norm() / expected.norm().max(1e-300);
        let prob = recovery::projection_probability(&out, &grid, 0.0)?;
        let (g0, g_plus, g_c) =
            recovery::complexity_factors(&u0, &expected, sd.lambda_plus, sd.lambda_plus, t)?;

        let stride = (dp / dp_fine).round() as usize;
        let mut sup: f64 = 0.0;
        for slot in 0..grid.np {
            sup = sup.max((out.slot(slot) - fine.slot(slot * stride)).norm());
        }
        state_errors.push((dp, sup / u0.norm()));

        csv.row(&[
            dp.into(),
            grid.np.into(),
            p_star.into(),
            rel.into(),
            prob.into(),
            (prob - prob_exact).abs().into(),
            g0.into(),
            g_plus.into(),
            g_c.into(),
        ])
        .map_err(RunError::Other)?;
    }

    let mut manifest = ctx.manifest("ode_schrod");
    manifest.measure("lambda_plus", json!(sd.lambda_plus));
    manifest.measure("lambda_min", json!(sd.lambda_min));
    manifest.measure("domain", json!([l, r]));
    manifest.measure("norm_u0", json!(u0.norm()));
    manifest.measure("norm_uT", json!(expected.norm()));
    emit_order(&mut manifest, &state_errors);
    manifest.note(
        "left domain end uses the slowest wave carrying more than tail_tol of the initial \
         weight; components below that threshold cannot move visible mass",
    );

    finish(csv, manifest, ctx.out_dir)
}

fn emit_order(manifest: &mut Manifest, samples: &[(f64, f64)]) {
    let floor = 1e-13;
    if samples.len() >= 3 && samples.iter().all(|&(_, e)| e > floor) {
        match observed_order(samples) {
            Ok(order) => manifest.measure("p_refinement_order", json!(order)),
            Err(e) => manifest.note(format!("no order estimate: {e}")),
        }
    } else {
        manifest.note("state errors at the roundoff floor; no order estimate");
    }
    manifest.measure(
        "p_refinement_errors",
        json!(samples.iter().map(|&(dp, e)| json!([dp, e])).collect::<Vec<_>>()),
    );
}

fn finish(csv: CsvFile, mut manifest: Manifest, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let csv_path = csv.write().map_err(|e| RunError::Other(e.to_string()))?;
    manifest.output(&csv_path);
    let manifest_path = manifest.write(out_dir).map_err(|e| RunError::Other(e.to_string()))?;
    Ok(vec![csv_path, manifest_path])
}

// ---------------------------------------------------------------------------
// fp_conservation1 / fp_conservation2
// ---------------------------------------------------------------------------

fn fp_problem(
    m: usize,
    sigma: f64,
    potential: &PotentialSpec,
    form: Form,
) -> Result<FokkerPlanckProblem, RunError> {
    let axis = SpectralAxis::new(m, -1.0, 1.0)?;
    Ok(FokkerPlanckProblem::new(1, axis, sigma, potential.to_potential(), form)?)
}

/// Smooth strictly positive initial density on (-1, 1).
fn initial_density(m: usize) -> CVec {
    let axis = SpectralAxis { m, a: -1.0, b: 1.0 };
    CVec::from_iterator(
        m,
        axis.points()
            .into_iter()
            .map(|x| C64::new(1.0 + 0.5 * (std::f64::consts::PI * x).cos(), 0.0)),
    )
}

pub fn run_fp_conservation(
    cfg: &FpEvolveConfig,
    ctx: &RunContext,
    symmetric: bool,
) -> Result<Vec<PathBuf>, RunError> {
    check_dp_exponents(&cfg.dp_exponents)?;
    check_tail_tol(cfg.tail_tol)?;
    let name = if symmetric { "fp_conservation2" } else { "fp_conservation1" };
    let form = if symmetric { Form::ConservationII } else { Form::ConservationI };
    let prob = fp_problem(cfg.m, cfg.sigma, &cfg.potential, form)?;
    let generator = if symmetric {
        assemble_symmetric_h(&prob)?
    } else {
        assemble_conservation_a(&prob)?
    };
    let split = hermitian_split(&generator)?;
    let sd = spectral_data(&split)?;

    let f0 = initial_density(cfg.m);
    let u0 = if symmetric {
        // evolve the transformed variable psi = e^{V/(2 sigma)} f
        let ops = spectral_operators(&prob)?;
        CVec::from_iterator(
            cfg.m,
            f0.iter().zip(ops.exp_v.half_plus.iter()).map(|(f, &e)| f * e),
        )
    } else {
        f0
    };

    let t = cfg.t_final;
    let expected = reference_evolve(&split.a, &u0, t)?;
    let lmin = effective_lambda_min(&sd, &u0, cfg.tail_tol);
    let (l, r) = choose_domain(lmin, sd.lambda_plus, t, cfg.l0, cfg.tail_tol)?;

    let mut csv = ctx.csv(
        name,
        &format!("{name}.csv"),
        &["dp", "np", "p_star", "restored_rel_err", "prob_p_ge_threshold", "prob_identity_err"],
    );
    let mut state_errors = Vec::new();
    let dp_fine = 2f64.powi(-(cfg.dp_exponents.iter().max().unwrap() + 3));
    let fine_grid = PGrid::with_spacing(l, r, dp_fine)?;
    let fine = schrod::evolve(&split, &schrod::warp_initial(&u0, &fine_grid)?, &fine_grid, t)?;

    for &k in &cfg.dp_exponents {
        let dp = 2f64.powi(-k);
        let grid = PGrid::with_spacing(l, r, dp)?;
        let out = schrod::evolve(&split, &schrod::warp_initial(&u0, &grid)?, &grid, t)?;
        let p_star = recovery::default_p_star(&grid, sd.lambda_plus, t)?;
        let restored = recovery::restore_pointwise(&out, &grid, sd.lambda_plus, p_star)?;
        let rel = (&restored - &expected).norm() / expected.norm();
        let threshold = (sd.lambda_plus * t).max(0.0);
        let prob = recovery::projection_probability(&out, &grid, threshold)?;
        // for lambda_plus > 0 the identity involves the deflated norm
        let prob_exact = 0.5
            * ((-sd.lambda_plus * t).exp() * expected.norm() / u0.norm()).powi(2);

        let stride = (dp / dp_fine).round() as usize;
        let mut sup: f64 = 0.0;
        for slot in 0..grid.np {
            sup = sup.max((out.slot(slot) - fine.slot(slot * stride)).norm());
        }
        state_errors.push((dp, sup / u0.norm()));

        csv.row(&[
            dp.into(),
            grid.np.into(),
            p_star.into(),
            rel.into(),
            prob.into(),
            (prob - prob_exact).abs().into(),
        ])
        .map_err(RunError::Other)?;
    }

    let mut manifest = ctx.manifest(name);
    manifest.measure("lambda_plus", json!(sd.lambda_plus));
    manifest.measure("lambda_min_effective", json!(lmin));
    manifest.measure("domain", json!([l, r]));
    emit_order(&mut manifest, &state_errors);
    if symmetric {
        // steady-state fixed point under the conservation-II evolution
        let ops = spectral_operators(&prob)?;
        let psis =
            CVec::from_iterator(cfg.m, ops.exp_v.half_minus.iter().map(|&e| C64::new(e, 0.0)));
        let grid = PGrid::with_spacing(-11.0, 21.0, 2f64.powi(-5))?;
        let st = schrod::warp_initial(&psis, &grid)?;
        let out = schrod::evolve(&split, &st, &grid, 0.5)?;
        let drift = (&out.data - &st.data).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            / st.norm();
        manifest.measure("steady_state_drift", json!(drift));
    }
    manifest.note(format!("potential: {}", cfg.potential.describe()));
    finish(csv, manifest, ctx.out_dir)
}

// ---------------------------------------------------------------------------
// fp_heat_split
// ---------------------------------------------------------------------------

pub fn run_fp_heat_split(cfg: &FpHeatSplitConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, RunError> {
    check_stage_order(&cfg.stage_order)?;
    check_tail_tol(cfg.tail_tol)?;
    if cfg.steps_list.is_empty() || cfg.steps_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RunError::Validation("steps_list must be non-empty and ascending".into()));
    }
    if cfg.reference_refinement < 2 {
        return Err(RunError::Validation("reference_refinement must be at least 2".into()));
    }
    let prob = fp_problem(cfg.m, cfg.sigma, &cfg.potential, Form::Heat)?;
    let u = heat_form_potential(&prob)?;
    let axis = SpectralAxis::new(cfg.m, -1.0, 1.0)?;
    let (l, r) = choose_domain(0.0, 0.0, cfg.t_final, cfg.l0, cfg.tail_tol)?;
    let pgrid = PGrid::new(l, r, cfg.np)?;

    let psi0 = initial_density(cfg.m);
    let warp = schrod::warp_initial(&psi0, &pgrid)?;
    let c0 = x_fourier(
        &schrod::fourier_along_p(&warp.data, &pgrid, true)?,
        std::slice::from_ref(&axis),
        true,
    );

    let run = |steps: usize| -> Result<CMat, RunError> {
        let step = HeatSplitStep::new(
            &u.values,
            cfg.sigma,
            std::slice::from_ref(&axis),
            &pgrid,
            cfg.t_final / steps as f64,
        )?;
        let mut data = c0.clone();
        for _ in 0..steps {
            step.apply(&mut data)?;
        }
        Ok(data)
    };

    let reference = run(cfg.steps_list.last().unwrap() * cfg.reference_refinement)?;
    let mut csv = ctx.csv("fp_heat_split", "fp_heat_split.csv", &["dt", "steps", "err_vs_fine"]);
    let mut samples = Vec::new();
    for &steps in &cfg.steps_list {
        let diff = run(steps)? - &reference;
        let err = linalg::frob(&diff);
        let dt = cfg.t_final / steps as f64;
        samples.push((dt, err));
        csv.row(&[dt.into(), steps.into(), err.into()]).map_err(RunError::Other)?;
    }
    samples.reverse(); // ascending dt for the order fit

    let mut manifest = ctx.manifest("fp_heat_split");
    if u.spectral_fallback {
        manifest.note("potential derivatives from spectral differentiation of tabulated values");
    }
    if samples.len() >= 3 {
        match observed_order(&samples) {
            Ok(order) => manifest.measure("dt_order", json!(order)),
            Err(e) => manifest.note(format!("no dt-order estimate: {e}")),
        }
    }
    manifest.measure("u_max", json!(u.values.iter().cloned().fold(f64::MIN, f64::max)));
    finish(csv, manifest, ctx.out_dir)
}

// ---------------------------------------------------------------------------
// fp_fd_circuit
// ---------------------------------------------------------------------------

pub fn run_fp_fd_circuit(cfg: &FpFdCircuitConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, RunError> {
    check_tail_tol(cfg.tail_tol)?;
    if !(cfg.length > 0.0) {
        return Err(RunError::Validation(format!("length = {} must be positive", cfg.length)));
    }
    let mx = 1usize
        .checked_shl(cfg.n_x as u32)
        .ok_or_else(|| RunError::Validation("n_x too large".into()))?;
    let h = cfg.length / mx as f64;
    let (l, r) = choose_domain(0.0, 0.0, cfg.t_final, cfg.l0, cfg.tail_tol)?;
    let pgrid = PGrid::new(l, r, 1usize << cfg.n_p)?;

    // smooth periodic bump on [0, length)
    let psi0: Vec<C64> = (0..mx)
        .map(|j| {
            let x = j as f64 * h / cfg.length;
            C64::new(0.2 + (-20.0 * (x - 0.5) * (x - 0.5)).exp(), 0.0)
        })
        .collect();

    let (state, counts) =
        circuit::fd_heat_schrodingerized_evolve(cfg.n_x, cfg.n_p, h, &pgrid, &psi0, cfg.t_final)?;
    let d = circuit::build_fd_laplacian(mx, h, circuit::BoundaryCondition::Periodic)?;
    let expected = reference_evolve(&d, &CVec::from_vec(psi0), cfg.t_final)?;
    let p_star = recovery::default_p_star(&pgrid, 0.0, cfg.t_final)?;
    let restored = recovery::restore_pointwise(&state, &pgrid, 0.0, p_star)?;
    let rel = (&restored - &expected).norm() / expected.norm();

    let mut csv = ctx.csv(
        "fp_fd_circuit",
        "fp_fd_circuit.csv",
        &["n_x", "n_p", "dp", "restored_rel_err", "single_qubit_gates", "two_qubit_gates"],
    );
    csv.row(&[
        cfg.n_x.into(),
        cfg.n_p.into(),
        pgrid.dp.into(),
        rel.into(),
        counts.single_qubit.into(),
        counts.two_qubit.into(),
    ])
    .map_err(RunError::Other)?;

    let mut manifest = ctx.manifest("fp_fd_circuit");
    manifest.measure("mesh_width", json!(h));
    manifest.measure("restored_rel_err", json!(rel));
    manifest.measure(
        "gate_counts",
        json!({"single_qubit": counts.single_qubit, "two_qubit": counts.two_qubit, "opaque": counts.opaque}),
    );
    manifest.note("gate counts are diagnostics of this emulator's circuit, not complexity claims");
    finish(csv, manifest, ctx.out_dir)
}

// ---------------------------------------------------------------------------
// eig_scan
// ---------------------------------------------------------------------------

pub fn run_eig_scan(cfg: &EigScanConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, RunError> {
    if cfg.m_list.is_empty() || cfg.m_list.iter().any(|&m| m < 4 || m > 512) {
        return Err(RunError::Validation("m_list entries must lie in 4..=512".into()));
    }
    if !(cfg.sigma > 0.0) {
        return Err(RunError::Validation(format!("sigma = {} must be positive", cfg.sigma)));
    }
    let potential = cfg.potential.to_potential();
    if matches!(potential, Potential::Table(_)) {
        return Err(RunError::Validation(
            "eig_scan needs an analytic potential; one table cannot serve several meshes".into(),
        ));
    }
    let scan = positive_eig_scan(&potential, cfg.sigma, (-1.0, 1.0), &cfg.m_list)?;

    let mut csv = ctx.csv("eig_scan", "eig_scan.csv", &["M", "lambda_plus"]);
    for &(m, lp) in &scan {
        csv.row(&[m.into(), lp.into()]).map_err(RunError::Other)?;
    }
    let mut manifest = ctx.manifest("eig_scan");
    manifest.measure(
        "scan",
        json!(scan.iter().map(|&(m, lp)| json!({"M": m, "lambda_plus": lp})).collect::<Vec<_>>()),
    );
    if scan.len() >= 2 {
        let last = scan[scan.len() - 1].1;
        let prev = scan[scan.len() - 2].1;
        manifest.measure("last_difference", json!((last - prev).abs()));
    }
    manifest.note(format!(
        "scan assumes sigma = {} and the domain (-1, 1); the source of the reference value \
         does not state either",
        cfg.sigma
    ));
    finish(csv, manifest, ctx.out_dir)
}

// ---------------------------------------------------------------------------
// shift_verify
// ---------------------------------------------------------------------------

pub fn run_shift_verify(cfg: &ShiftVerifyConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, RunError> {
    if !(1..=6).contains(&cfg.n_x_max) {
        return Err(RunError::Validation(format!("n_x_max = {} outside 1..=6", cfg.n_x_max)));
    }
    let mut csv = ctx.csv("shift_verify", "shift_verify.csv", &["n_x", "max_error"]);
    let mut eig_csv = ctx.csv(
        "shift_verify",
        "fd_laplacian_eigs.csv",
        &["M", "max_eigenvalue_error"],
    );
    let mut worst: f64 = 0.0;
    for n_x in 1..=cfg.n_x_max {
        let err = circuit::verify_shift_diagonalization(n_x)?;
        worst = worst.max(err);
        csv.row(&[n_x.into(), err.into()]).map_err(RunError::Other)?;

        let m = 1usize << n_x;
        let d = circuit::build_fd_laplacian(m, 1.0, circuit::BoundaryCondition::Periodic)?;
        let (vals, _) = linalg::eigh(&d)?;
        let mut want = circuit::periodic_laplacian_eigenvalues(m, 1.0);
        want.sort_by(f64::total_cmp);
        let max_err = vals
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        eig_csv.row(&[m.into(), max_err.into()]).map_err(RunError::Other)?;
    }
    let mut manifest = ctx.manifest("shift_verify");
    manifest.measure("max_diagonalization_error", json!(worst));
    let csv_path = csv.write().map_err(|e| RunError::Other(e.to_string()))?;
    let eig_path = eig_csv.write().map_err(|e| RunError::Other(e.to_string()))?;
    manifest.output(&csv_path);
    manifest.output(&eig_path);
    let manifest_path =
        manifest.write(ctx.out_dir).map_err(|e| RunError::Other(e.to_string()))?;
    Ok(vec![csv_path, eig_path, manifest_path])
}

// ---------------------------------------------------------------------------
// splitting_verify
// ---------------------------------------------------------------------------

pub fn run_splitting_verify(
    cfg: &SplittingVerifyConfig,
    ctx: &RunContext,
) -> Result<Vec<PathBuf>, RunError> {
    check_stage_order(&cfg.stage_order)?;
    if cfg.instances == 0 || cfg.instances > 200 {
        return Err(RunError::Validation("instances must lie in 1..=200".into()));
    }
    check_system_size(cfg.n)?;
    if cfg.steps == 0 {
        return Err(RunError::Validation("steps must be positive".into()));
    }
    let schedule =
        SplitSchedule::lie(cfg.t_final, cfg.steps).map_err(|e| RunError::Validation(e.to_string()))?;

    let mut rng = rng_for(ctx.seed);
    let mut csv = ctx.csv(
        "splitting_verify",
        "splitting_verify.csv",
        &["instance", "max_deviation", "probability_error"],
    );
    let mut worst_dev: f64 = 0.0;
    let mut worst_prob: f64 = 0.0;
    for idx in 0..cfg.instances {
        let split = instances::random_stable_split(cfg.n, &mut rng)?;
        let sd = spectral_data(&split)?;
        let u0 = instances::random_vector(cfg.n, &mut rng);
        let dev = verify_splitting_exactness(&split, &sd, &u0, schedule)?;
        let p = splitting_probability(&split, &sd, &u0, schedule)?;
        let u_split = schrodsim_core::splitting::lie_split_reference(&split, &u0, schedule)?
            .pop()
            .expect("at least one step");
        let prob_err = (p - 0.5 * (u_split.norm() / u0.norm()).powi(2)).abs();
        worst_dev = worst_dev.max(dev);
        worst_prob = worst_prob.max(prob_err);
        csv.row(&[idx.into(), dev.into(), prob_err.into()]).map_err(RunError::Other)?;
    }
    let mut manifest = ctx.manifest("splitting_verify");
    manifest.measure("max_deviation", json!(worst_dev));
    manifest.measure("max_probability_error", json!(worst_prob));
    finish(csv, manifest, ctx.out_dir)
}
