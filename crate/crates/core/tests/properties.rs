use mildflow::admissibility::{convolve, measure_h};
use mildflow::burgers::{BurgersSystem, LocalTerm};
use mildflow::solver::select_step;
use mildflow::{
    solve, DiagonalSemigroup, EvolutionSystem, Forcing, InputNorm, InputOperator, InputSignal,
    KinfFunction, Nonlinearity, OperatorClass, SolverConfig, SpectralState,
};
use proptest::prelude::*;

fn coeffs(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, n)
}

fn signal(channels: usize) -> impl Strategy<Value = InputSignal> {
    (1usize..6).prop_flat_map(move |cells| {
        (
            prop::collection::vec(0.05f64..1.0, cells),
            prop::collection::vec(coeffs(channels, 2.0), cells),
        )
            .prop_map(|(widths, values)| {
                let mut grid = vec![0.0];
                for w in widths {
                    grid.push(grid.last().unwrap() + w);
                }
                InputSignal::new(grid, values).unwrap()
            })
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_is_euclidean(c in coeffs(12, 5.0)) {
        let x = SpectralState::new(c.clone()).unwrap();
        let direct = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(rel_close(x.norm_x().unwrap(), direct, 1e-14));
    }

    #[test]
    fn saturation_lands_in_unit_ball(c in coeffs(8, 10.0)) {
        let x = SpectralState::new(c).unwrap();
        let s = x.saturate(None);
        prop_assert!(s.norm_x().unwrap() <= 1.0 + 1e-14);
        if x.norm_x().unwrap() <= 1.0 {
            prop_assert_eq!(s, x);
        }
    }

    #[test]
    fn shift_does_not_grow_sup_norm(u in signal(2), frac in 0.0f64..0.99) {
        let tau = frac * u.horizon();
        let s = u.shift(tau).unwrap();
        prop_assert!(s.sup_norm() <= u.sup_norm());
        prop_assert!(rel_close(s.horizon(), u.horizon() - tau, 1e-12));
    }

    #[test]
    fn concat_keeps_head_and_tail(u1 in signal(2), u2 in signal(2), frac in 0.01f64..1.0) {
        let t = frac * u1.horizon();
        let c = InputSignal::concat(&u1, &u2, t).unwrap();
        prop_assert!(rel_close(c.horizon(), t + u2.horizon(), 1e-12));
        let probe = 0.5 * t;
        prop_assert_eq!(c.value_at(probe), u1.value_at(probe));
        let later = 0.5 * u2.horizon();
        prop_assert_eq!(c.value_at(t + later), u2.value_at(later));
    }

    #[test]
    fn semigroup_law(c in coeffs(16, 1.0), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let sg = DiagonalSemigroup::dirichlet_laplacian(16, 1.0).unwrap();
        let x = SpectralState::new(c).unwrap();
        let a = sg.apply_T(t, &sg.apply_T(s, &x).unwrap()).unwrap();
        let b = sg.apply_T(t + s, &x).unwrap();
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((p - q).abs() <= 1e-12 * (p.abs().max(q.abs())) + 1e-300);
        }
    }

    #[test]
    fn growth_certificate(c in coeffs(10, 3.0), t in 0.0f64..3.0) {
        let sg = DiagonalSemigroup::new(vec![0.5, -0.1, -1.0, -4.0, -9.0, -16.0, -25.0, -36.0, -49.0, -64.0], 1.0).unwrap();
        let x = SpectralState::new(c).unwrap();
        let y = sg.apply_T(t, &x).unwrap();
        prop_assert!(y.norm_x().unwrap() <= sg.m() * (sg.lambda() * t).exp() * x.norm_x().unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn fractional_powers_commute_with_semigroup(c in coeffs(16, 1.0), alpha in 0.05f64..0.95, t in 0.0f64..1.0) {
        let sg = DiagonalSemigroup::dirichlet_laplacian(16, 1.0).unwrap();
        let x = SpectralState::new(c).unwrap();
        let a = sg.apply_fractional(alpha, &sg.apply_T(t, &x).unwrap()).unwrap();
        let b = sg.apply_T(t, &sg.apply_fractional(alpha, &x).unwrap()).unwrap();
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(q.abs()) + 1e-300);
        }
    }

    #[test]
    fn convolution_respects_measured_bound(u in signal(1), frac in 0.05f64..1.0) {
        let sg = DiagonalSemigroup::dirichlet_laplacian(32, 1.0).unwrap();
        let col: Vec<f64> = (1..=32).map(|n| n as f64).collect();
        let b = InputOperator::from_column(col, OperatorClass::SmoothClass { alpha: 0.2 }).unwrap();
        let t = frac * u.horizon();
        let h = measure_h(&sg, &b, t, InputNorm::LInf);
        let y = convolve(&sg, &b, &u, t).unwrap();
        prop_assert!(y.norm_x().unwrap() <= h.upper * u.sup_norm() * (1.0 + 1e-10) + 1e-14);
    }

    #[test]
    fn kinf_linear_is_strictly_increasing(a in 0.01f64..100.0, r in 0.0f64..1e3, dr in 1e-6f64..1.0) {
        let k = KinfFunction::linear(a).unwrap();
        prop_assert_eq!(k.eval(0.0), 0.0);
        prop_assert!(k.eval(r + dr) > k.eval(r));
    }

    #[test]
    fn arctan_nonlinearity_is_lipschitz(x in coeffs(6, 1.0), y in coeffs(6, 1.0), v in coeffs(6, 1.0)) {
        let f = Nonlinearity::arctan(6, 1.5);
        let (x, y) = (SpectralState::new(x).unwrap(), SpectralState::new(y).unwrap());
        let c = x.norm_x().unwrap().max(y.norm_x().unwrap()).max(1e-12);
        let lhs = f.eval(&y, &v).distance(&f.eval(&x, &v)).unwrap();
        prop_assert!(lhs <= f.lipschitz(c) * y.distance(&x).unwrap() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn select_step_shrinks_with_radius(k in 0.1f64..10.0, factor in 1.0f64..10.0) {
        let sg = DiagonalSemigroup::dirichlet_laplacian(8, 1.0).unwrap();
        let sys = EvolutionSystem::new(sg, InputOperator::identity(8), Nonlinearity::scalar_square(8)).unwrap();
        let cfg = SolverConfig::default();
        let small = select_step(&sys, k, 1.0, &cfg).unwrap();
        let large = select_step(&sys, k * factor, 1.0, &cfg).unwrap();
        prop_assert!(large <= small);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn burgers_transform_is_an_isometry(c in coeffs(24, 1.0)) {
        let bs = BurgersSystem::new(24, LocalTerm::Zero).unwrap();
        let x = SpectralState::new(c).unwrap();
        let g = bs.to_physical(&x);
        prop_assert!(rel_close(bs.quadrature_norm(&g), x.norm_x().unwrap(), 1e-10));
        let back = bs.project(&g);
        prop_assert!(back.distance(&x).unwrap() <= 1e-10 * (1.0 + x.norm_x().unwrap()));
    }

    #[test]
    fn burgers_certified_inequalities(c1 in coeffs(16, 1.0), c2 in coeffs(16, 1.0), a in -2.0f64..2.0) {
        let bs = BurgersSystem::new(16, LocalTerm::SinArctan { a }).unwrap();
        let decay = |c: Vec<f64>| {
            SpectralState::new(c.iter().enumerate().map(|(i, v)| v / (1 + i) as f64).collect()).unwrap()
        };
        let (x1, x2) = (decay(c1), decay(c2));
        let (sup, bound) = bs.certify_sup_bound(&x1);
        prop_assert!(sup <= bound + 1e-8);
        let (lhs, rhs) = bs.certify_F_bound(&x1);
        prop_assert!(lhs <= rhs + 1e-8);
        let (lhs, rhs) = bs.certify_lipschitz(&x1, &x2).unwrap();
        prop_assert!(lhs <= rhs + 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solve_is_deterministic_and_causal(c in coeffs(6, 0.5), u in signal(6), frac in 0.2f64..0.8) {
        let sg = DiagonalSemigroup::dirichlet_laplacian(6, 1.0).unwrap();
        let sys = EvolutionSystem::new(sg, InputOperator::identity(6), Nonlinearity::arctan(6, 1.0)).unwrap();
        let x0 = SpectralState::new(c).unwrap();
        let t_end = u.horizon();
        let t_cut = frac * t_end;
        let cfg = SolverConfig { substeps_per_window: 8, checkpoints: vec![t_cut], ..SolverConfig::default() };
        let a = solve(&sys, &x0, &u, t_end, &cfg).unwrap();
        let b = solve(&sys, &x0, &u, t_end, &cfg).unwrap();
        prop_assert_eq!(&a.states, &b.states);
        let head = solve(&sys, &x0, &u.truncate(t_cut).unwrap(), t_cut, &cfg).unwrap();
        let full_at = a.state_at(t_cut).unwrap();
        prop_assert_eq!(head.final_state(), full_at);
    }
}
