//! Burgers-type equation with a Dirichlet boundary input: simulation and the
//! four inequalities behind its well-posedness.

use mildflow::burgers::{BurgersSystem, LocalTerm};
use mildflow::{InputSignal, SolverConfig, SpectralState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mildflow::Result<()> {
    let n = 48;
    let b = BurgersSystem::new(n, LocalTerm::SinArctan { a: 0.5 })?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 3];
    for _ in 0..50 {
        let raw: Vec<f64> = (1..=n).map(|k| rng.gen_range(-1.0..1.0) / (k * k) as f64).collect();
        let x = SpectralState::new(raw)?;
        let y = x.scale(rng.gen_range(-1.5..1.5));
        let (s, sb) = b.certify_sup_bound(&x);
        let (f, fb) = b.certify_F_bound(&x);
        let (l, lb) = b.certify_lipschitz(&x, &y)?;
        worst[0] = worst[0].max(s / sb);
        worst[1] = worst[1].max(f / fb);
        worst[2] = worst[2].max(if lb > 0.0 { l / lb } else { 0.0 });
    }
    println!("worst ratios  sup: {:.3}  F: {:.3}  Lipschitz: {:.3}", worst[0], worst[1], worst[2]);

    let x0 = b.sine_mode(1, 0.3);
    let d = InputSignal::constant(vec![0.1], 6.0)?;
    let u = InputSignal::zero(n, 6.0)?;
    let cfg = SolverConfig { checkpoints: vec![1.0, 2.0, 4.0], ..Default::default() };
    let tr = b.simulate(&x0, &u, &d, 6.0, &cfg)?;
    for t in [1.0, 2.0, 4.0, 6.0] {
        let x = tr.state_at(t).unwrap();
        println!("t={t}: ‖x‖={:.6}  x(0+)≈{:.5}", x.norm_x()?, b.boundary_value_estimate(x));
    }
    println!("windows: {}  status: {:?}", tr.windows.len(), tr.status);
    Ok(())
}
