//! Acceptance criteria A1–A10. Each test writes one `A<k> PASS|FAIL ...` line
//! straight to stderr (bypassing capture) before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use mildflow::admissibility::{estimate_scaling, upper_bound_h};
use mildflow::bcs::{representation_crosscheck, BoundaryControlSystem};
use mildflow::burgers::{BurgersSystem, LocalTerm};
use mildflow::flow_props::{check_cep, check_deviation_sampled, cocycle_residuals, PropsOptions, Sampler};
use mildflow::numerics::loglog_slope;
use mildflow::solver::global_bound;
use mildflow::{
    solve, DiagonalSemigroup, EvolutionSystem, Forcing, InputNorm, InputOperator, InputSignal, Nonlinearity,
    PolynomialInput, SolverConfig, SpectralState, TrajectoryStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(id: &str, pass: bool, detail: String) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{id} {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn arctan_system(n: usize) -> EvolutionSystem {
    let sg = DiagonalSemigroup::dirichlet_laplacian(n, 1.0).unwrap();
    EvolutionSystem::new(sg, InputOperator::identity(n), Nonlinearity::arctan(n, 1.0)).unwrap()
}

fn burgers(n: usize) -> BurgersSystem {
    BurgersSystem::new(n, LocalTerm::SinArctan { a: 0.5 }).unwrap()
}

#[test]
fn a1_linear_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for n in [8usize, 64, 512] {
        let sg = DiagonalSemigroup::dirichlet_laplacian(n, 1.0).unwrap();
        let m = 3;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let b = InputOperator::bounded(rows.clone()).unwrap();
        let sys = EvolutionSystem::new(sg, b, Nonlinearity::zero(n)).unwrap();
        let x0 = SpectralState::new((1..=n).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect()).unwrap();
        let grid = vec![0.0, 0.2, 0.45, 0.7, 1.0];
        let vals: Vec<Vec<f64>> = (0..4).map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let u = InputSignal::new(grid.clone(), vals.clone()).unwrap();

        let start = Instant::now();
        let tr = solve(&sys, &x0, &u, 1.0, &SolverConfig::default()).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());

        // variation of constants, summed cell by cell
        for (t, x) in tr.times.iter().zip(&tr.states) {
            for k in 0..n {
                let mu = -(((k + 1) * (k + 1)) as f64);
                let mut v = (mu * t).exp() * x0.coeffs()[k];
                for c in 0..4 {
                    let (a, bb) = (grid[c], grid[c + 1].min(*t));
                    if bb <= a {
                        break;
                    }
                    let drive: f64 = rows[k].iter().zip(&vals[c]).map(|(r, w)| r * w).sum();
                    v += drive * ((mu * (t - bb)).exp() - (mu * (t - a)).exp()) / -mu;
                }
                let err = (x.coeffs()[k] - v).abs() / v.abs().max(1e-3);
                worst = worst.max(err);
            }
        }
    }
    let pass = worst <= 1e-10 && slowest < 1.0;
    line("A1", pass, format!("max relative error {worst:.2e}, slowest solve {slowest:.3}s (N up to 512)"));
    assert!(pass);
}

#[test]
fn a2_blowup_bracketing() {
    let sg = DiagonalSemigroup::new(vec![0.0], 1.0).unwrap();
    let sys = EvolutionSystem::new(sg, InputOperator::zero(1, 1), Nonlinearity::scalar_square(1)).unwrap();
    let u = InputSignal::zero(1, 2.0).unwrap();
    let mut times = Vec::new();
    for threshold in [1e4, 1e5, 1e6] {
        let cfg = SolverConfig { blowup_threshold: threshold, ..Default::default() };
        let tr = solve(&sys, &SpectralState::new(vec![1.0]).unwrap(), &u, 2.0, &cfg).unwrap();
        match tr.status {
            TrajectoryStatus::Blowup { t_m, .. } => times.push(t_m),
            other => panic!("no blow-up: {other:?}"),
        }
    }
    // x(t) = 1/(1 - t) escapes at t = 1
    let close = times.iter().all(|t| (t - 1.0).abs() <= 0.01);
    let monotone = times.windows(2).all(|w| w[1] >= w[0]);
    let pass = close && monotone;
    line("A2", pass, format!("t_m at thresholds 1e4/1e5/1e6: {times:?}"));
    assert!(pass);
}

#[test]
fn a3_cocycle_residual() {
    let cfg = SolverConfig::default();
    let mut worst_res = 0.0f64;
    let mut min_slope = f64::INFINITY;
    let mut details = Vec::new();
    for (name, sys) in [("burgers", burgers(16).evolution_system()), ("arctan", arctan_system(16))] {
        let mut s = Sampler::new(&sys, 2024);
        let mut counted = 0;
        for _ in 0..20 {
            let x0 = s.state(1.0);
            let u = s.input(1.0, 1.0, 4);
            let t = s.uniform(0.2, 0.5);
            let h = s.uniform(0.1, 0.4);
            let r = cocycle_residuals(&sys, &x0, &u, t, h, &cfg, 8).unwrap();
            worst_res = worst_res.max(r[2] - (r[1] - r[2]) / 3.0);
            // slopes only mean something above the roundoff floor
            if r[2] > 1e-13 {
                min_slope = min_slope.min(-loglog_slope(&[1.0, 2.0, 4.0], &r));
                counted += 1;
            }
        }
        details.push(format!("{name}: {counted} slopes"));
    }
    let pass = worst_res <= 1e-6 && min_slope >= 1.8;
    line(
        "A3",
        pass,
        format!("residual after Richardson {worst_res:.2e}, min ladder slope {min_slope:.3} ({})", details.join(", ")),
    );
    assert!(pass);
}

#[test]
fn a4_deviation_bound() {
    let mut worst = 0.0f64;
    let mut total = 0;
    for (sys, radius) in [(burgers(16).evolution_system(), 1.0), (arctan_system(16), 2.0)] {
        let opts = PropsOptions { seed: 404, state_radius: radius, ..Default::default() };
        let rep = check_deviation_sampled(&sys, &opts, 50).unwrap();
        worst = worst.max(rep.worst_ratio);
        total += rep.samples;
    }
    let pass = worst <= 1.0 && total == 100;
    line("A4", pass, format!("{total} pairs, worst deviation / bound {worst:.3e}"));
    assert!(pass);
}

#[test]
fn a5_zero_class_scaling() {
    let b = BurgersSystem::new(1024, LocalTerm::Zero).unwrap();
    let sg = b.semigroup();
    let op = b.boundary_operator();
    let grid: Vec<f64> = (-14..=-2).map(|k| 2f64.powi(k)).collect();
    let est = estimate_scaling(&sg, &op, &grid, InputNorm::LInf);
    let mut dominated = true;
    for (t, lower) in est.t_grid.iter().zip(&est.raw_lower) {
        dominated &= *lower <= upper_bound_h(&sg, &op, 0.0, *t).unwrap();
    }
    let decreasing = est.raw_lower.windows(2).all(|w| w[0] <= w[1]);
    let pass = est.fitted_exponent >= 0.2 && dominated && decreasing;
    line(
        "A5",
        pass,
        format!(
            "fitted exponent {:.3}, lower bounds {:.3e}..{:.3e}, dominated by upper bound: {dominated}",
            est.fitted_exponent,
            est.raw_lower[0],
            est.raw_lower.last().unwrap()
        ),
    );
    assert!(pass);
}

fn half_norm(x: &SpectralState) -> f64 {
    x.coeffs().iter().enumerate().map(|(i, c)| ((i + 1) as f64 * c).powi(2)).sum::<f64>().sqrt()
}

fn random_half_state(rng: &mut ChaCha8Rng, n: usize, r: f64) -> SpectralState {
    let v: Vec<f64> = (1..=n).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect();
    let x = SpectralState::new(v).unwrap();
    let s = r * rng.gen_range(0.0..=1.0f64) / half_norm(&x);
    x.scale(s)
}

#[test]
fn a6_burgers_inequalities() {
    let n = 128;
    let start = Instant::now();
    let mut violations = 0;
    let mut worst = [0.0f64; 3];
    for (local, h_norm) in [
        (LocalTerm::SinArctan { a: 1.0 }, (PI / 2.0).sqrt()),
        (LocalTerm::Cubic { a: 0.2 }, 0.2 * PI.sqrt()),
    ] {
        let b = BurgersSystem::new(n, local).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        for _ in 0..100 {
            let x = random_half_state(&mut rng, n, 5.0);
            let y = random_half_state(&mut rng, n, 5.0);
            let (nx, ny) = (half_norm(&x), half_norm(&y));
            let g = |r: f64| match local {
                LocalTerm::SinArctan { .. } => r.atan(),
                LocalTerm::Cubic { .. } => r.powi(3),
                _ => unreachable!(),
            };
            let lip = |r: f64| match local {
                LocalTerm::SinArctan { a } => a,
                LocalTerm::Cubic { a } => 3.0 * a * r * r,
                _ => unreachable!(),
            };

            let (sup, _) = b.certify_sup_bound(&x);
            let sup_rhs = PI.sqrt() * nx;
            let (f, _) = b.certify_F_bound(&x);
            let f_rhs = (2.0 * PI).sqrt() * nx * nx + 2f64.sqrt() * h_norm * g(PI.sqrt() * nx);
            let (d, _) = b.certify_lipschitz(&x, &y).unwrap();
            let dn = half_norm(&x.sub(&y).unwrap());
            let d_rhs = PI.sqrt() * (nx + ny) * dn + PI * lip(PI.sqrt() * nx.max(ny)) * dn;

            for (k, (lhs, rhs)) in [(sup, sup_rhs), (f, f_rhs), (d, d_rhs)].into_iter().enumerate() {
                if lhs > rhs + 1e-8 {
                    violations += 1;
                }
                worst[k] = worst[k].max(lhs / rhs.max(1e-300));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = violations == 0 && elapsed < 10.0;
    line(
        "A6",
        pass,
        format!(
            "{violations} violations over 2x100 states, worst ratios sup {:.3} F {:.3} Lipschitz {:.3}, {elapsed:.2}s",
            worst[0], worst[1], worst[2]
        ),
    );
    assert!(pass);
}

#[test]
fn a7_bcs_three_way() {
    let n = 128;
    let bcs = BoundaryControlSystem::dirichlet_heat(n, 0.2).unwrap();
    let mut worst = 0.0f64;
    for coeffs in [vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0, -1.0 / 6.0]] {
        let u = PolynomialInput::scalar(&coeffs, 1.0).unwrap();
        let x0 = bcs.lift(&u.eval(0.0));
        for f in [Nonlinearity::zero(n), Nonlinearity::arctan(n, 0.1)] {
            let rep = representation_crosscheck(&bcs, f, &x0, &u, 1.0, &SolverConfig::default(), 1e-6).unwrap();
            worst = worst.max(rep.max_difference);
        }
    }
    let pass = worst <= 1e-6;
    line("A7", pass, format!("max pairwise difference {worst:.3e} (N = {n})"));
    assert!(pass);
}

#[test]
fn a8_global_bound_dominance() {
    let sys = arctan_system(16);
    let cfg = SolverConfig::default();
    let checkpoints: Vec<f64> = (1..20).map(|k| 0.25 * k as f64).collect();
    let run_cfg = SolverConfig { checkpoints: checkpoints.clone(), ..cfg.clone() };
    let mut s = Sampler::new(&sys, 808);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let x0 = if i == 0 { s.axis_state(0, 3.0) } else { s.state(3.0) };
        let u = if i % 10 == 0 { s.max_input(3.0, 5.0) } else { s.input(3.0, 5.0, 5) };
        let (nx, nu) = (x0.norm_x().unwrap(), u.sup_norm_on(0.0, 5.0));
        let tr = solve(&sys, &x0, &u, 5.0, &run_cfg).unwrap();
        assert!(tr.is_completed());
        let total = global_bound(&sys, nx, nu, 5.0, &cfg).unwrap();
        worst = worst.max(tr.sup_norm_x() / total);
        for t in &checkpoints {
            let b = global_bound(&sys, nx, nu, *t, &cfg).unwrap();
            worst = worst.max(tr.state_at(*t).unwrap().norm_x().unwrap() / b);
        }
    }
    let pass = worst <= 1.0;
    line("A8", pass, format!("100 trajectories, worst norm / global bound {worst:.3e}"));
    assert!(pass);
}

#[test]
fn a9_fractional_smoothing() {
    let mut spreads = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let sups: Vec<f64> = [128usize, 256, 512]
            .iter()
            .map(|&n| {
                let sg = DiagonalSemigroup::dirichlet_laplacian(n, 1.0).unwrap();
                let kappa = sg.growth_bound() + 1.0;
                (0..=30)
                    .map(|j| 2f64.powi(-j))
                    .map(|t| t.powf(alpha) * sg.frac_T_norm(alpha, t).unwrap() * (-kappa * t).exp())
                    .fold(0.0, f64::max)
            })
            .collect();
        let (lo, hi) = sups.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        spreads.push((hi - lo) / lo);
    }
    let pass = spreads.iter().all(|s| *s < 0.1);
    line("A9", pass, format!("relative spread across N for alpha 1/4, 1/2, 3/4: {}", spreads.iter().map(|s| format!("{s:.3e}")).collect::<Vec<_>>().join(", ")));
    assert!(pass);
}

#[test]
fn a10_cep_table() {
    let sys = burgers(16).evolution_system();
    let opts = PropsOptions { seed: 1010, samples: 4, ..Default::default() };
    let rep = check_cep(&sys, &[0.5, 1.0], &[0.5, 1.0], &opts).unwrap();
    let cells: Vec<String> = rep.detail["table"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| format!("(eps {}, h {}) -> {}", c["eps"], c["h"], c["delta"]))
        .collect();
    line("A10", rep.pass, cells.join("; "));
    assert!(rep.pass);
}
