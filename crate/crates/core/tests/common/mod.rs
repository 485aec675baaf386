#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spacefield::{GameState, PlayerState, Vec2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random 11 v 11 soccer frame with moving players.
pub fn random_soccer_frame(rng: &mut ChaCha8Rng) -> GameState {
    let player = |rng: &mut ChaCha8Rng| {
        PlayerState::moving(
            Vec2::new(rng.random_range(-50.0..50.0), rng.random_range(-32.0..32.0)),
            Vec2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)),
        )
    };
    let attackers = (0..11).map(|_| player(rng)).collect();
    let defenders = (0..11).map(|_| player(rng)).collect();
    GameState {
        attackers,
        defenders,
        ball: Some(Vec2::new(rng.random_range(-45.0..45.0), rng.random_range(-30.0..30.0))),
        ..Default::default()
    }
}

/// Reference race solver: classical RK4 at a fine step, no early exit,
/// arrival times recomputed from first principles.
pub struct FineOracle {
    pub dt: f64,
    pub t_max: f64,
    pub reaction: f64,
    pub v_max: f64,
    pub sigma: f64,
    pub rate: f64,
    pub ball_speed: f64,
}

impl FineOracle {
    pub fn soccer() -> Self {
        FineOracle {
            dt: 0.001,
            t_max: 10.0,
            reaction: 0.7,
            v_max: 5.0,
            sigma: 0.45,
            rate: 4.3,
            ball_speed: 15.0,
        }
    }

    pub fn tau(&self, p: &PlayerState, target: Vec2) -> f64 {
        let rx = p.position.x + p.velocity.x * self.reaction;
        let ry = p.position.y + p.velocity.y * self.reaction;
        self.reaction + ((target.x - rx).powi(2) + (target.y - ry).powi(2)).sqrt() / self.v_max
    }

    fn f(&self, t: f64, tau: f64) -> f64 {
        1.0 / (1.0 + (-std::f64::consts::PI * (t - tau) / (3f64.sqrt() * self.sigma)).exp())
    }

    /// (attacker controls, defender controls)
    pub fn solve(&self, state: &GameState, target: Vec2) -> (Vec<f64>, Vec<f64>) {
        let ball = state.ball.unwrap();
        let t0 = ((target.x - ball.x).powi(2) + (target.y - ball.y).powi(2)).sqrt() / self.ball_speed;
        let players: Vec<&PlayerState> = state.attackers.iter().chain(&state.defenders).collect();
        let taus: Vec<f64> = players.iter().map(|p| self.tau(p, target)).collect();
        let rhs = |t: f64, p: &[f64]| -> Vec<f64> {
            let total: f64 = p.iter().sum();
            taus.iter().map(|&tau| (1.0 - total) * self.f(t, tau) * self.rate).collect()
        };
        let axpy = |p: &[f64], k: &[f64], h: f64| -> Vec<f64> { p.iter().zip(k).map(|(a, b)| a + h * b).collect() };
        // classical Runge-Kutta at the fine step
        let mut p = vec![0.0; players.len()];
        let steps = ((self.t_max - t0) / self.dt).ceil() as usize;
        for k in 0..steps {
            let t = t0 + k as f64 * self.dt;
            let h = self.dt.min(self.t_max - t);
            if h <= 0.0 {
                break;
            }
            let k1 = rhs(t, &p);
            let k2 = rhs(t + h / 2.0, &axpy(&p, &k1, h / 2.0));
            let k3 = rhs(t + h / 2.0, &axpy(&p, &k2, h / 2.0));
            let k4 = rhs(t + h, &axpy(&p, &k3, h));
            for j in 0..p.len() {
                p[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        let defenders = p.split_off(state.attackers.len());
        (p, defenders)
    }
}
