//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use plankton_core::analysis::{check_n_bound, check_positivity, fit_extinction, steady_residual};
use plankton_core::discretization::{thomas_solve, Tridiagonal};
use plankton_core::oracles::{
    convergence_order, dense_solve, heat_exact_mixed, heat_exact_neumann,
};
use plankton_core::timestepper::{cfl_max_dt, step_explicit, ImexStepper};
use plankton_core::{
    integrate, FunctionalResponse, Grid, LightModel, Model, Parameters, Scheme, SolverConfig, State,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn state_diff(a: &State, b: &State) -> f64 {
    max_diff(&a.n, &b.n)
        .max(max_diff(&a.p, &b.p))
        .max((a.z - b.z).abs())
}

fn linear_params() -> Parameters {
    Parameters {
        uptake_rate: 0.0,
        boundary_nutrient: 0.5,
        phyto_mortality: 0.5,
        ..Parameters::default()
    }
}

fn run_imex(model: &Model, grid: &Grid, state: State, dt: f64, steps: usize) -> State {
    let stepper = ImexStepper::new(model, grid, dt).expect("stepper");
    (0..steps).fold(state, |s, _| stepper.step(&s).expect("imex step"))
}

fn spatial_convergence() -> Verdict {
    let params = linear_params();
    let model = Model::new(
        params,
        LightModel::ExponentialDecay,
        FunctionalResponse::HollingII,
    )
    .unwrap();
    let (dt, steps) = (1e-7, 100_000);
    let t = dt * steps as f64;
    let n_coeffs = [0.3, 0.1];
    let p_coeffs = [1.0, 0.3, 0.1];
    let mut n_err = Vec::new();
    let mut p_err = Vec::new();
    for m in [51, 101, 201] {
        let grid = Grid::new(params.depth, m).unwrap();
        let n0 = heat_exact_mixed(
            &n_coeffs,
            0.0,
            &grid,
            params.diffusivity,
            params.boundary_nutrient,
        );
        let s = run_imex(
            &model,
            &grid,
            State::new(n0, vec![0.0; m], 0.0, 0.0),
            dt,
            steps,
        );
        let exact = heat_exact_mixed(
            &n_coeffs,
            t,
            &grid,
            params.diffusivity,
            params.boundary_nutrient,
        );
        n_err.push((grid.dx(), max_diff(&s.n, &exact)));

        let p0 = heat_exact_neumann(
            &p_coeffs,
            0.0,
            &grid,
            params.diffusivity,
            params.phyto_mortality,
        );
        let flat_n = vec![params.boundary_nutrient; m];
        let s = run_imex(&model, &grid, State::new(flat_n, p0, 0.0, 0.0), dt, steps);
        let exact = heat_exact_neumann(
            &p_coeffs,
            t,
            &grid,
            params.diffusivity,
            params.phyto_mortality,
        );
        p_err.push((grid.dx(), max_diff(&s.p, &exact)));
    }
    let qn = convergence_order(&n_err).unwrap();
    let qp = convergence_order(&p_err).unwrap();
    let ok = (qn - 2.0).abs() <= 0.2 && (qp - 2.0).abs() <= 0.2;
    verdict(ok, format!("order n={qn:.3} p={qp:.3} (target 2.0 +- 0.2)"))
}

struct RandomRun {
    passed_positivity: bool,
    positivity_worst: f64,
    passed_bound: bool,
    bound_worst: f64,
}

fn random_runs() -> Vec<RandomRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let m = 41;
    (0..50)
        .map(|i| {
            let params = Parameters {
                diffusivity: rng.random_range(0.2..2.0),
                chi: rng.random_range(0.5..2.0),
                zoo_mortality: rng.random_range(0.0..0.5),
                phyto_mortality: rng.random_range(0.0..1.0),
                food_utilization: rng.random_range(0.5..2.0),
                uptake_rate: rng.random_range(0.5..3.0),
                light_attenuation: rng.random_range(0.0..3.0),
                self_shading: rng.random_range(0.0..3.0),
                boundary_nutrient: rng.random_range(0.0..2.0),
                ..Parameters::default()
            };
            let light = LightModel::ALL[i % LightModel::ALL.len()];
            let response = FunctionalResponse::ALL[i % FunctionalResponse::ALL.len()];
            let model = Model::new(params, light, response).unwrap();
            let grid = Grid::new(params.depth, m).unwrap();
            let mut n: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
            n[m - 1] = params.boundary_nutrient;
            let p: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
            let z = rng.random_range(0.0..2.0);
            let config = SolverConfig {
                dt: 0.5 * cfl_max_dt(&model, &grid),
                t_end: 1.0,
                scheme: Scheme::ImexEuler,
                snapshot_every: 1,
                ..SolverConfig::default()
            };
            let traj = integrate(&State::new(n, p, z, 0.0), &model, &grid, &config)
                .expect("random run integrates");
            let pos = check_positivity(&traj, 1e-10);
            let bound = check_n_bound(&traj, &params, 1e-8);
            RandomRun {
                passed_positivity: pos.passed,
                positivity_worst: pos.worst,
                passed_bound: bound.passed,
                bound_worst: bound.worst,
            }
        })
        .collect()
}

fn positivity(runs: &[RandomRun]) -> Verdict {
    let failed = runs.iter().filter(|r| !r.passed_positivity).count();
    let worst = runs
        .iter()
        .map(|r| r.positivity_worst)
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        failed == 0,
        format!(
            "{}/{} runs nonnegative, worst={worst:e} (tol 1e-10)",
            runs.len() - failed,
            runs.len()
        ),
    )
}

fn n_bound(runs: &[RandomRun]) -> Verdict {
    let failed = runs.iter().filter(|r| !r.passed_bound).count();
    let worst = runs
        .iter()
        .map(|r| r.bound_worst)
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        failed == 0,
        format!(
            "{}/{} runs within bound, worst={worst:e} (tol 1e-8)",
            runs.len() - failed,
            runs.len()
        ),
    )
}

fn bump(grid: &Grid, center: f64, width: f64, amplitude: f64) -> Vec<f64> {
    grid.nodes()
        .map(|h| amplitude * (-((h - center) / width).powi(2) / 2.0).exp())
        .collect()
}

fn extinction() -> Verdict {
    let params = Parameters {
        chi: 1.0,
        uptake_rate: 0.5,
        phyto_mortality: 1.0,
        zoo_mortality: 0.1,
        food_utilization: 1.0,
        depth: 1.0,
        light_attenuation: 1.0,
        ..Parameters::default()
    };
    let model = Model::new(
        params,
        LightModel::ExponentialDecay,
        FunctionalResponse::HollingII,
    )
    .unwrap();
    let grid = Grid::new(params.depth, 101).unwrap();
    let n0: Vec<f64> = grid
        .nodes()
        .map(|h| params.boundary_nutrient + 0.5 * (PI * h / 2.0).cos())
        .collect();
    let p0 = bump(&grid, 0.3, 0.1, 1.0);
    let config = SolverConfig {
        dt: 1e-3,
        t_end: 40.0,
        snapshot_every: 100,
        ..SolverConfig::default()
    };
    let traj = integrate(&State::new(n0, p0, 0.5, 0.0), &model, &grid, &config).unwrap();
    let fit = fit_extinction(&traj, &params, (20.0, 40.0)).unwrap();
    let bound = params.max_growth_rate() - params.phyto_mortality;
    let target = bound * 1.05;
    let last = traj.last();
    let p_inf = last.p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ok = fit.rate <= target && p_inf < 1e-6 && last.z < 1e-6;
    verdict(
        ok,
        format!(
            "rate={:.4} (<= {target:.4}: {}), |p|inf={p_inf:.3e} (< 1e-6: {}), z={:.3e} (< 1e-6: {})",
            fit.rate,
            fit.rate <= target,
            p_inf < 1e-6,
            last.z,
            last.z < 1e-6
        ),
    )
}

fn pure_decay() -> Verdict {
    let params = Parameters {
        uptake_rate: 0.0,
        phyto_mortality: 1.0,
        ..Parameters::default()
    };
    let model = Model::new(
        params,
        LightModel::ExponentialDecay,
        FunctionalResponse::HollingI,
    )
    .unwrap();
    let grid = Grid::new(params.depth, 51).unwrap();
    let n0 = vec![params.boundary_nutrient; 51];
    let p0 = bump(&grid, 0.5, 0.1, 1.0);
    let config = SolverConfig {
        dt: 1e-3,
        t_end: 5.0,
        snapshot_every: 50,
        ..SolverConfig::default()
    };
    let traj = integrate(&State::new(n0, p0, 0.0, 0.0), &model, &grid, &config).unwrap();
    let fit = fit_extinction(&traj, &params, (1.0, 5.0)).unwrap();
    let rel = (fit.rate + 1.0).abs();
    verdict(
        rel <= 0.02,
        format!("rate={:.5} (|rate+1| = {rel:.2e} <= 0.02)", fit.rate),
    )
}

fn trivial_equilibrium() -> Verdict {
    let params = Parameters::default();
    let grid = Grid::new(params.depth, 51).unwrap();
    let mut worst_residual = 0.0f64;
    let mut worst_drift = 0.0f64;
    for light in LightModel::ALL {
        for response in FunctionalResponse::ALL {
            let model = Model::new(params, light, response).unwrap();
            let s0 = State::trivial(&params, &grid);
            worst_residual = worst_residual.max(steady_residual(&s0, &model, &grid).unwrap());
            let s = run_imex(&model, &grid, s0.clone(), 1e-3, 10_000);
            worst_drift = worst_drift.max(state_diff(&s, &s0));
        }
    }
    let ok = worst_residual <= 1e-14 && worst_drift <= 1e-12;
    verdict(
        ok,
        format!("residual={worst_residual:e} (<= 1e-14), drift={worst_drift:e} (<= 1e-12)"),
    )
}

fn coupled_setup() -> (Model, Grid, State) {
    let params = Parameters {
        uptake_rate: 2.0,
        phyto_mortality: 0.3,
        zoo_mortality: 0.2,
        ..Parameters::default()
    };
    let model = Model::new(
        params,
        LightModel::ExponentialDecay,
        FunctionalResponse::HollingII,
    )
    .unwrap();
    let grid = Grid::new(params.depth, 21).unwrap();
    let n0 = grid
        .nodes()
        .map(|h| params.boundary_nutrient + 0.5 * (PI * h / 2.0).cos())
        .collect();
    let p0 = grid.nodes().map(|h| 0.5 + 0.3 * (PI * h).cos()).collect();
    (model, grid, State::new(n0, p0, 0.3, 0.0))
}

fn scheme_cross_validation() -> Verdict {
    let (model, grid, s0) = coupled_setup();
    let gap = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let imex = run_imex(&model, &grid, s0.clone(), dt, steps);
        let rk4 = (0..steps).fold(s0.clone(), |s, _| {
            step_explicit(&s, &model, &grid, dt).expect("rk4 step")
        });
        state_diff(&imex, &rk4)
    };
    let coarse = gap(1e-3);
    let fine = gap(5e-4);
    let ratio = coarse / fine;
    let ok = ratio >= 1.8 && fine <= 1e-3;
    verdict(
        ok,
        format!("gap dt={coarse:.3e}, dt/2={fine:.3e}, ratio={ratio:.3} (>= 1.8), fine <= 1e-3"),
    )
}

fn translation_scan() -> Verdict {
    let mut worst = f64::INFINITY;
    for response in FunctionalResponse::ALL {
        for bound in [1.0, 5.0, 20.0] {
            let lambda = response.translation_lambda(bound).unwrap();
            for i in 0..10_000 {
                let p = bound * i as f64 / 9_999.0;
                worst = worst.min(lambda * p - response.eval(p).unwrap());
            }
        }
    }
    verdict(
        worst >= -1e-12,
        format!("min(lambda p - g(p))={worst:e} (>= -1e-12)"),
    )
}

fn linear_algebra() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(3..=200);
        let lower: Vec<f64> = (0..m - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..m - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..m)
            .map(|j| {
                let off = if j > 0 { lower[j - 1].abs() } else { 0.0 }
                    + if j + 1 < m { upper[j].abs() } else { 0.0 };
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                sign * (off * rng.random_range(1.1..2.0) + 1e-3)
            })
            .collect();
        let rhs: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sys = Tridiagonal::new(lower, diag, upper).unwrap();
        let thomas = thomas_solve(&sys, &rhs).unwrap();
        let dense = dense_solve(&sys.to_dense(), &rhs).unwrap();
        let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        worst = worst.max(max_diff(&thomas, &dense) / scale);
    }
    verdict(
        worst <= 1e-10,
        format!("worst relative gap={worst:e} (<= 1e-10)"),
    )
}

fn flux_balance() -> Verdict {
    let (model, _, _) = coupled_setup();
    let params = model.params;
    let levels = [(2e-3, 21), (1e-3, 41), (5e-4, 81)];
    let residuals: Vec<f64> = levels
        .iter()
        .map(|&(dt, m)| {
            let grid = Grid::new(params.depth, m).unwrap();
            let n0 = grid
                .nodes()
                .map(|h| params.boundary_nutrient + 0.5 * (PI * h / 2.0).cos())
                .collect();
            let p0 = grid.nodes().map(|h| 0.5 + 0.3 * (PI * h).cos()).collect();
            let config = SolverConfig {
                dt,
                t_end: 1.0,
                snapshot_every: (0.1 / dt).round() as usize,
                ..SolverConfig::default()
            };
            let traj = integrate(&State::new(n0, p0, 0.3, 0.0), &model, &grid, &config).unwrap();
            traj.diagnostics
                .iter()
                .skip(1)
                .map(|d| d.flux_residual.abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let monotone = residuals.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let net = residuals[2] < residuals[0];
    verdict(
        monotone && net,
        format!(
            "max |residual| per level = {:.3e}, {:.3e}, {:.3e}",
            residuals[0], residuals[1], residuals[2]
        ),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {} [{secs:.2}s]", v.detail);
        all &= v.passed;
    };
    report(1, "spatial convergence", &mut spatial_convergence);
    let mut runs = None;
    report(2, "positivity", &mut || {
        let r = random_runs();
        let v = positivity(&r);
        runs = Some(r);
        v
    });
    let runs = runs.unwrap();
    report(3, "nutrient bound", &mut || n_bound(&runs));
    report(4, "extinction", &mut extinction);
    report(5, "pure decay rate", &mut pure_decay);
    report(6, "trivial equilibrium", &mut trivial_equilibrium);
    report(7, "scheme cross-validation", &mut scheme_cross_validation);
    report(8, "translation scan", &mut translation_scan);
    report(9, "tridiagonal vs dense", &mut linear_algebra);
    report(10, "flux balance refinement", &mut flux_balance);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
