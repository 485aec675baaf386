mod common;

use common::{random_soccer_frame, rng, FineOracle};
use rand::Rng;
use spacefield::pitch_control::{solve_ppcf_at, PpcfParams, StepScheme};
use spacefield::space_data::SportConfig;
use spacefield::Vec2;

fn worst_error(scheme: StepScheme) -> f64 {
    let mut r = rng(7);
    let oracle = FineOracle::soccer();
    let mut params = PpcfParams::from_config(&SportConfig::soccer());
    params.integration.scheme = scheme;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let frame = random_soccer_frame(&mut r);
        for _ in 0..20 {
            let target = Vec2::new(r.random_range(-52.0..52.0), r.random_range(-33.0..33.0));
            let coarse = solve_ppcf_at(&frame, target, &params).unwrap();
            let (oa, od) = oracle.solve(&frame, target);
            for (a, b) in coarse.attackers.iter().chain(&coarse.defenders).zip(oa.iter().chain(&od)) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

#[test]
fn coarse_step_matches_fine_oracle() {
    let err = worst_error(StepScheme::Exponential);
    println!("exponential step: worst per-player error {err:.3e}");
    assert!(err <= 1e-3, "worst error {err}");
}

#[test]
fn plain_euler_is_first_order_and_coarser() {
    let euler = worst_error(StepScheme::Euler);
    println!("euler step: worst per-player error {euler:.3e}");
    assert!(euler > worst_error(StepScheme::Exponential));
}
