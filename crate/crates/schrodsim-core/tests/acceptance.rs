//! Acceptance suite: one test per shipping criterion, each printing a
//! single PASS/FAIL line (run with `cargo test --test acceptance --release
//! -- --nocapture` to see them all).

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schrodsim_core::circuit;
use schrodsim_core::convergence::observed_order;
use schrodsim_core::fokker_planck::{
    assemble_conservation_a, assemble_symmetric_h, positive_eig_scan, spectral_operators,
    steady_state, FokkerPlanckProblem, Form, Potential, SpectralAxis,
};
use schrodsim_core::grid::{choose_domain, PGrid};
use schrodsim_core::instances;
use schrodsim_core::linalg::{self, CMat, CVec};
use schrodsim_core::linear_core::{hermitian_split, reference_evolve, spectral_data};
use schrodsim_core::recovery;
use schrodsim_core::schrod;
use schrodsim_core::splitting::{
    splitting_probability, verify_splitting_exactness, HeatSplitStep, SemiAnalyticState,
    SplitSchedule,
};

const SEED: u64 = 0x5EED_2024;

fn criterion<F>(id: usize, name: &str, body: F)
where
    F: FnOnce() -> Result<String, String>,
{
    match body() {
        Ok(detail) => println!("acceptance criterion {id:2} [{name}]: PASS  ({detail})"),
        Err(msg) => {
            println!("acceptance criterion {id:2} [{name}]: FAIL  ({msg})");
            panic!("criterion {id} ({name}) failed: {msg}");
        }
    }
}

fn dp_sweep() -> Vec<f64> {
    (5..=9).map(|k| 2f64.powi(-k)).collect()
}

struct StableInstance {
    split: schrodsim_core::HermitianSplit,
    spectral: schrodsim_core::SpectralData,
    u0: CVec,
}

fn stable_instances(count: usize, seed: u64) -> Vec<StableInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=8);
            let split = instances::random_stable_split(n, &mut rng).unwrap();
            let spectral = spectral_data(&split).unwrap();
            let u0 = instances::random_vector(n, &mut rng);
            StableInstance { split, spectral, u0 }
        })
        .collect()
}

fn evolve_on_grid(inst: &StableInstance, t: f64, dp: f64, l: f64, r: f64) -> (schrodsim_core::SchrodState, PGrid) {
    let grid = PGrid::with_spacing(l, r, dp).unwrap();
    let st = schrod::warp_initial(&inst.u0, &grid).unwrap();
    (schrod::evolve(&inst.split, &st, &grid, t).unwrap(), grid)
}

#[test]
fn criterion_01_oracle_equivalence_stable() {
    criterion(1, "oracle equivalence, stable ODEs", || {
        let start = std::time::Instant::now();
        let t = 1.0;
        let systems = stable_instances(20, SEED);
        let dps = dp_sweep();
        let dp_ref = 2f64.powi(-13);

        let mut per_dp_errors: Vec<Vec<f64>> = vec![Vec::new(); dps.len()];
        let mut worst_restore: f64 = 0.0;
        for (idx, inst) in systems.iter().enumerate() {
            let (l, r) =
                choose_domain(inst.spectral.lambda_min, 0.0, t, -1.0, 1e-9).unwrap();
            let expected = reference_evolve(&inst.split.a, &inst.u0, t).unwrap();
            let (fine, fine_grid) = evolve_on_grid(inst, t, dp_ref, l, r);
            for (j, &dp) in dps.iter().enumerate() {
                let (out, grid) = evolve_on_grid(inst, t, dp, l, r);
                // restored solution against the dense-exponential oracle
                let p_star = recovery::default_p_star(&grid, 0.0, t).unwrap();
                let u = recovery::restore_pointwise(&out, &grid, 0.0, p_star).unwrap();
                let rel = (&u - &expected).norm() / expected.norm();
                worst_restore = worst_restore.max(rel / dp);
                if rel > 5.0 * dp {
                    return Err(format!(
                        "system {idx}: restored error {rel:.3e} exceeds 5*dp = {:.3e}",
                        5.0 * dp
                    ));
                }
                // sup-in-p state error against the dp/16 self-reference
                let stride = (dp / dp_ref).round() as usize;
                let mut sup: f64 = 0.0;
                for k in 0..grid.np {
                    let coarse = out.slot(k);
                    let fine_col = fine.slot(k * stride);
                    debug_assert!((grid.point(k) - fine_grid.point(k * stride)).abs() < 1e-9);
                    sup = sup.max((coarse - fine_col).norm());
                }
                per_dp_errors[j].push(sup / inst.u0.norm());
            }
        }
        // observed p-order from the median error across systems
        let medians: Vec<(f64, f64)> = dps
            .iter()
            .zip(per_dp_errors.iter_mut())
            .map(|(&dp, errs)| {
                errs.sort_by(f64::total_cmp);
                (dp, errs[errs.len() / 2])
            })
            .collect();
        let order = observed_order(&medians).map_err(|e| e.to_string())?;
        if !(0.8..=1.2).contains(&order) {
            return Err(format!("observed p-order {order:.3} outside [0.8, 1.2]"));
        }
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed > 60.0 {
            return Err(format!("runtime {elapsed:.1}s exceeds 60s"));
        }
        Ok(format!(
            "20 systems, worst restored err/dp = {worst_restore:.3}, p-order {order:.3}, {elapsed:.1}s"
        ))
    });
}

#[test]
fn criterion_02_unstable_recovery_threshold() {
    criterion(2, "unstable recovery threshold", || {
        let t = 1.0;
        let a = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(0.5, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        let split = hermitian_split(&a).unwrap();
        let sd = spectral_data(&split).unwrap();
        let u0 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let expected = reference_evolve(&a, &u0, t).unwrap();
        let (l, r) = choose_domain(sd.lambda_min, sd.lambda_plus, t, -1.0, 1e-9).unwrap();

        let mut worst_valid: f64 = 0.0;
        let mut least_invalid = f64::INFINITY;
        for dp in dp_sweep() {
            let grid = PGrid::with_spacing(l, r, dp).unwrap();
            let st = schrod::warp_initial(&u0, &grid).unwrap();
            let out = schrod::evolve(&split, &st, &grid, t).unwrap();

            let p_star = recovery::default_p_star(&grid, sd.lambda_plus, t).unwrap();
            let u = recovery::restore_pointwise(&out, &grid, sd.lambda_plus, p_star).unwrap();
            let rel = (&u - &expected).norm() / expected.norm();
            worst_valid = worst_valid.max(rel / dp);
            if rel > 5.0 * dp {
                return Err(format!("valid-region error {rel:.3e} exceeds 5*dp at dp={dp:.1e}"));
            }

            let below = recovery::restore_at(&out, &grid, 0.25).unwrap();
            let bad = (&below - &expected).norm() / expected.norm();
            least_invalid = least_invalid.min(bad);
            if bad < 0.1 {
                return Err(format!(
                    "below-threshold error {bad:.3e} unexpectedly small at dp={dp:.1e}"
                ));
            }
        }
        Ok(format!(
            "valid err/dp <= {worst_valid:.3}, below-threshold err >= {least_invalid:.3}"
        ))
    });
}

#[test]
fn criterion_03_projection_probability() {
    criterion(3, "projection probability", || {
        let t = 1.0;
        let systems = stable_instances(6, SEED ^ 0x33);
        let mut worst: f64 = 0.0;
        for inst in &systems {
            let expected = reference_evolve(&inst.split.a, &inst.u0, t).unwrap();
            let exact = 0.5 * (expected.norm() / inst.u0.norm()).powi(2);
            let (l, r) = choose_domain(inst.spectral.lambda_min, 0.0, t, -1.0, 1e-9).unwrap();
            for dp in [2f64.powi(-5), 2f64.powi(-6), 2f64.powi(-7)] {
                let (out, grid) = evolve_on_grid(inst, t, dp, l, r);
                let p = recovery::projection_probability(&out, &grid, 0.0).unwrap();
                let err = (p - exact).abs();
                worst = worst.max(err / dp);
                if err > 5.0 * dp {
                    return Err(format!(
                        "grid probability error {err:.3e} exceeds 5*dp = {:.3e}",
                        5.0 * dp
                    ));
                }
            }
            // the same identity on the Lie-split trajectory, evaluated on the
            // exact piecewise-exponential profile
            let schedule = SplitSchedule::lie(t, 8).unwrap();
            let p_split =
                splitting_probability(&inst.split, &inst.spectral, &inst.u0, schedule)
                    .map_err(|e| e.to_string())?;
            let u_split = schrodsim_core::splitting::lie_split_reference(
                &inst.split,
                &inst.u0,
                schedule,
            )
            .unwrap()
            .pop()
            .unwrap();
            let formula = 0.5 * (u_split.norm() / inst.u0.norm()).powi(2);
            if (p_split - formula).abs() > 1e-10 {
                return Err(format!(
                    "split-trajectory identity off by {:.3e}",
                    (p_split - formula).abs()
                ));
            }
        }
        Ok(format!("6 systems x 3 meshes, worst grid err/dp = {worst:.3}; split identity to 1e-10"))
    });
}

#[test]
fn criterion_04_stabilization_equivalence() {
    criterion(4, "stabilization equivalence g_c = g_plus", || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x44);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let split = instances::random_unstable_split(n, rng.gen_range(0.1..0.8), &mut rng)
                .unwrap();
            let sd = spectral_data(&split).unwrap();
            let u0 = instances::random_vector(n, &mut rng);
            let t = 1.0;
            let ut = reference_evolve(&split.a, &u0, t).unwrap();
            let (_, g_plus, g_c) =
                recovery::complexity_factors(&u0, &ut, sd.lambda_plus, sd.lambda_plus, t)
                    .unwrap();
            let diff = (g_c - g_plus).abs();
            worst = worst.max(diff);
            if diff > 1e-14 {
                return Err(format!("g_c - g_plus = {diff:.3e} exceeds 1e-14"));
            }
        }
        Ok(format!("20 instances, max |g_c - g_plus| = {worst:.1e}"))
    });
}

#[test]
fn criterion_05_discrete_steady_states() {
    criterion(5, "discrete steady states", || {
        let mut worst_a: f64 = 0.0;
        let mut worst_h: f64 = 0.0;
        let mut worst_drift: f64 = 0.0;
        for potential in [Potential::Constant(0.0), Potential::Cosine] {
            for sigma in [0.5, 1.0] {
                for m in [16usize, 32, 64] {
                    let axis = SpectralAxis::new(m, -1.0, 1.0).unwrap();
                    let prob = FokkerPlanckProblem::new(
                        1,
                        axis,
                        sigma,
                        potential.clone(),
                        Form::ConservationI,
                    )
                    .unwrap();
                    let v = prob.potential_values();
                    let a = assemble_conservation_a(&prob).unwrap();
                    let h = assemble_symmetric_h(&prob).unwrap();
                    let fs: Vec<C64> = steady_state(&v, sigma)
                        .unwrap()
                        .into_iter()
                        .map(|x| C64::new(x, 0.0))
                        .collect();
                    let ops = spectral_operators(&prob).unwrap();
                    let psis: Vec<C64> =
                        ops.exp_v.half_minus.iter().map(|&x| C64::new(x, 0.0)).collect();
                    let ra = (&a * CVec::from_vec(fs)).norm();
                    let rh = (&h * CVec::from_vec(psis.clone())).norm();
                    worst_a = worst_a.max(ra);
                    worst_h = worst_h.max(rh);
                    if ra > 1e-10 || rh > 1e-10 {
                        return Err(format!(
                            "steady-state residuals |A fs| = {ra:.2e}, |H psis| = {rh:.2e} at \
                             sigma={sigma}, M={m}"
                        ));
                    }

                    // conservation-II evolution fixes the steady state
                    if m == 64 {
                        let split = hermitian_split(&h).unwrap();
                        let grid =
                            PGrid::with_spacing(-11.0, 21.0, 2f64.powi(-5)).unwrap();
                        let psi0 = CVec::from_vec(psis);
                        let st = schrod::warp_initial(&psi0, &grid).unwrap();
                        let out = schrod::evolve(&split, &st, &grid, 0.5).unwrap();
                        let drift = (&out.data - &st.data)
                            .iter()
                            .map(|z| z.norm_sqr())
                            .sum::<f64>()
                            .sqrt()
                            / st.norm();
                        worst_drift = worst_drift.max(drift);
                        if drift > 1e-8 {
                            return Err(format!(
                                "steady state drifted by {drift:.3e} under evolution \
                                 (sigma={sigma})"
                            ));
                        }
                    }
                }
            }
        }
        Ok(format!(
            "max |A fs| = {worst_a:.2e}, max |H psis| = {worst_h:.2e}, max drift = {worst_drift:.2e}"
        ))
    });
}

#[test]
fn criterion_06_eigenvalue_scan_reproduction() {
    criterion(6, "positive-eigenvalue mesh scan", || {
        let scan = positive_eig_scan(&Potential::Quadratic, 1.0, (-1.0, 1.0), &[16, 32, 64, 128])
            .map_err(|e| e.to_string())?;
        let by_m: std::collections::HashMap<usize, f64> = scan.iter().copied().collect();
        let l64 = by_m[&64];
        let l128 = by_m[&128];
        if (l64 - l128).abs() > 0.005 {
            return Err(format!("|lambda(64) - lambda(128)| = {:.4} > 0.005", (l64 - l128).abs()));
        }
        if (l128 - 0.073).abs() > 0.015 {
            return Err(format!("limit {l128:.4} outside 0.073 +/- 0.015"));
        }
        Ok(format!(
            "lambda_plus: {}",
            scan.iter().map(|(m, l)| format!("M={m}:{l:.4}")).collect::<Vec<_>>().join(" ")
        ))
    });
}

#[test]
fn criterion_07_symmetric_definiteness_and_similarity() {
    criterion(7, "symmetric-form definiteness and similarity", || {
        let mut worst_eig = f64::NEG_INFINITY;
        let mut worst_sim: f64 = 0.0;
        for potential in [Potential::Constant(0.0), Potential::Cosine] {
            for sigma in [0.5, 1.0] {
                for m in [16usize, 32, 64] {
                    let axis = SpectralAxis::new(m, -1.0, 1.0).unwrap();
                    let prob = FokkerPlanckProblem::new(
                        1,
                        axis,
                        sigma,
                        potential.clone(),
                        Form::ConservationII,
                    )
                    .unwrap();
                    let a = assemble_conservation_a(&prob).unwrap();
                    let h = assemble_symmetric_h(&prob).unwrap();
                    let (vals, _) = linalg::eigh(&h).unwrap();
                    let lmax = *vals.last().unwrap();
                    worst_eig = worst_eig.max(lmax);
                    if lmax > 1e-10 {
                        return Err(format!(
                            "lambda_max(H) = {lmax:.3e} > 1e-10 at sigma={sigma}, M={m}"
                        ));
                    }
                    let ops = spectral_operators(&prob).unwrap();
                    let mut sim = a;
                    for j in 0..sim.ncols() {
                        for i in 0..sim.nrows() {
                            sim[(i, j)] *= ops.exp_v.half_plus[i] * ops.exp_v.half_minus[j];
                        }
                    }
                    let dev = linalg::max_abs(&(sim - &h));
                    worst_sim = worst_sim.max(dev);
                    if dev > 1e-10 {
                        return Err(format!(
                            "similarity defect {dev:.3e} > 1e-10 at sigma={sigma}, M={m}"
                        ));
                    }
                }
            }
        }
        Ok(format!("max lambda_max(H) = {worst_eig:.2e}, max similarity defect = {worst_sim:.2e}"))
    });
}

#[test]
fn criterion_08_splitting_exactness_and_dt_order() {
    criterion(8, "splitting exactness and dt-order", || {
        // exactness identity on 10 seeded NSD instances
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x88);
        let mut worst_dev: f64 = 0.0;
        for _ in 0..10 {
            let n = rng.gen_range(2..=6);
            let split = instances::random_stable_split(n, &mut rng).unwrap();
            let sd = spectral_data(&split).unwrap();
            let u0 = instances::random_vector(n, &mut rng);
            let dev = verify_splitting_exactness(
                &split,
                &sd,
                &u0,
                SplitSchedule::lie(1.0, 10).unwrap(),
            )
            .map_err(|e| e.to_string())?;
            worst_dev = worst_dev.max(dev);
            if dev > 1e-11 {
                return Err(format!("exactness deviation {dev:.3e} > 1e-11"));
            }
        }

        // heat-form Lie splitting converges at first order in dt (smooth
        // density-like initial data keeps the commutator error asymptotic)
        let m = 32usize;
        let axis = SpectralAxis::new(m, -1.0, 1.0).unwrap();
        let prob =
            FokkerPlanckProblem::new(1, axis.clone(), 1.0, Potential::Cosine, Form::Heat).unwrap();
        let u = schrodsim_core::fokker_planck::heat_form_potential(&prob).unwrap();
        let pgrid = PGrid::new(-4.0, 22.0, 256).unwrap();
        let psi0 = CVec::from_iterator(
            m,
            axis.points().into_iter().map(|x| C64::new((-3.0 * x * x).exp() + 0.3, 0.0)),
        );
        let t = 0.5;

        let run = |steps: usize| -> CMat {
            let mut data = CMat::zeros(m, pgrid.np);
            let warp = schrod::warp_initial(&psi0, &pgrid).unwrap();
            data.copy_from(&warp.data);
            let data = schrodsim_core::splitting::x_fourier(
                &schrod::fourier_along_p(&data, &pgrid, true).unwrap(),
                &[axis.clone()],
                true,
            );
            let step =
                HeatSplitStep::new(&u.values, 1.0, &[axis.clone()], &pgrid, t / steps as f64)
                    .unwrap();
            let mut data = data;
            for _ in 0..steps {
                step.apply(&mut data).unwrap();
            }
            data
        };
        let reference = run(64 * 16);
        let samples: Vec<(f64, f64)> = [16usize, 32, 64]
            .iter()
            .map(|&steps| {
                let diff = run(steps) - &reference;
                (t / steps as f64, linalg::frob(&diff))
            })
            .collect();
        let order = observed_order(&samples).map_err(|e| e.to_string())?;
        if !(0.8..=1.2).contains(&order) {
            return Err(format!("heat-split dt-order {order:.3} outside [0.8, 1.2]"));
        }
        Ok(format!("max exactness deviation = {worst_dev:.2e}, dt-order = {order:.3}"))
    });
}

#[test]
fn criterion_09_shift_diagonalization() {
    criterion(9, "shift diagonalization and FD eigenvalues", || {
        let mut worst_shift: f64 = 0.0;
        for n_x in 1..=6 {
            let err = circuit::verify_shift_diagonalization(n_x).map_err(|e| e.to_string())?;
            worst_shift = worst_shift.max(err);
            if err > 1e-12 {
                return Err(format!("diagonalization error {err:.3e} > 1e-12 at n_x = {n_x}"));
            }
        }
        let mut worst_eig: f64 = 0.0;
        for n_x in 1..=6 {
            let m = 1usize << n_x;
            let d = circuit::build_fd_laplacian(m, 1.0, circuit::BoundaryCondition::Periodic)
                .unwrap();
            let (vals, _) = linalg::eigh(&d).unwrap();
            let mut want = circuit::periodic_laplacian_eigenvalues(m, 1.0);
            want.sort_by(f64::total_cmp);
            for (a, b) in vals.iter().zip(want.iter()) {
                let err = (a - b).abs();
                worst_eig = worst_eig.max(err);
                if err > 1e-12 {
                    return Err(format!("FD eigenvalue error {err:.3e} > 1e-12 at M = {m}"));
                }
            }
        }
        Ok(format!(
            "max diagonalization err = {worst_shift:.2e}, max FD eigenvalue err = {worst_eig:.2e}"
        ))
    });
}

#[test]
fn criterion_10_phase_kickback() {
    criterion(10, "phase kickback", || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xAA);
        let mut worst: f64 = 1.0;
        let mut tables = 0;
        while tables < 50 {
            let n = rng.gen_range(1..=5); // system + ancilla <= 10 qubits
            let m = 1usize << n;
            let mut amps: Vec<C64> = (0..m)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for a in amps.iter_mut() {
                *a /= norm;
            }
            let state = circuit::QuantumState::from_amplitudes(amps).unwrap();
            let q: Vec<u64> = (0..m).map(|_| rng.gen_range(0..m as u64)).collect();
            let out = circuit::diagonal_unitary_kickback(&state, &q).map_err(|e| e.to_string())?;
            let mut want = state.clone();
            want.apply_diagonal(&circuit::kickback_phases(&q, n).unwrap()).unwrap();
            let f = out.state.fidelity(&want);
            worst = worst.min(f);
            if f < 1.0 - 1e-12 {
                return Err(format!("fidelity {f:.15} below 1 - 1e-12 (n = {n})"));
            }
            tables += 1;
        }
        Ok(format!("50 q-tables, min fidelity = {worst:.15}"))
    });
}

#[test]
fn criterion_11_norm_conservation() {
    criterion(11, "norm conservation and warped mass", || {
        // warped initial mass is a Riemann sum of ∫ e^{-2|p|} dp = 1
        let u0 = CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, -0.8)]);
        for dp in [2f64.powi(-5), 2f64.powi(-7), 2f64.powi(-9)] {
            let grid = PGrid::with_spacing(-16.0, 16.0, dp).unwrap();
            let st = schrod::warp_initial(&u0, &grid).unwrap();
            let mass = st.norm().powi(2) * grid.dp;
            if (mass - u0.norm_squared()).abs() > dp * u0.norm_squared() {
                return Err(format!("warped mass off by {:.3e} at dp={dp:.1e}", mass - 1.0));
            }
        }

        // per-step norm preservation along Schrödingerized evolutions
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xBB);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let n = rng.gen_range(2..=6);
            let split = instances::random_stable_split(n, &mut rng).unwrap();
            let sd = spectral_data(&split).unwrap();
            let u0 = instances::random_vector(n, &mut rng);
            let (l, r) = choose_domain(sd.lambda_min, 0.0, 1.0, -1.0, 1e-9).unwrap();
            let grid = PGrid::with_spacing(l, r, 2f64.powi(-6)).unwrap();
            let mut st = schrod::warp_initial(&u0, &grid).unwrap();
            let base = st.norm();
            for _ in 0..10 {
                let next = schrod::evolve(&split, &st, &grid, 0.1).unwrap();
                let drift = (next.norm() - base).abs() / base;
                worst = worst.max(drift);
                if drift > 1e-10 {
                    return Err(format!("evolution norm drift {drift:.3e} > 1e-10 per step"));
                }
                st = next;
            }

            // split steps on the semi-analytic state preserve total mass
            let state = SemiAnalyticState::from_warped(&split, &sd, &u0).unwrap();
            let m0 = state.total_mass();
            let state = state.advance(10, 0.1).unwrap();
            let drift = (state.total_mass() - m0).abs() / m0;
            worst = worst.max(drift);
            if drift > 1e-10 {
                return Err(format!("split-state mass drift {drift:.3e} > 1e-10"));
            }
        }

        // heat-split sub-steps are diagonal unitaries: drift <= steps * 1e-13
        let m = 16usize;
        let axis = SpectralAxis::new(m, -1.0, 1.0).unwrap();
        let pgrid = PGrid::new(-4.0, 20.0, 192).unwrap();
        let x = axis.points();
        let uvals: Vec<f64> =
            x.iter().map(|&xi| (std::f64::consts::PI * xi).cos()).collect();
        let step = HeatSplitStep::new(&uvals, 1.0, &[axis], &pgrid, 0.01).unwrap();
        let mut data = CMat::from_fn(m, pgrid.np, |i, k| {
            C64::new(((i * 7 + k) % 13) as f64 / 13.0 - 0.5, ((i + k * 3) % 11) as f64 / 11.0)
        });
        let n0 = linalg::frob(&data);
        let steps = 50;
        for _ in 0..steps {
            step.apply(&mut data).unwrap();
        }
        let drift = (linalg::frob(&data) - n0).abs() / n0;
        if drift > steps as f64 * 1e-13 {
            return Err(format!("heat-split norm drift {drift:.3e} over {steps} steps"));
        }
        Ok(format!("max evolution drift = {worst:.2e}, heat-split drift = {drift:.2e}"))
    });
}
