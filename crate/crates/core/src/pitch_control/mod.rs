//! Potential pitch control: a Poisson race for the ball at every target.
//!
//! For each player `j` the accumulated control obeys
//! `dP_j/dT = (1 - sum_k P_k) * f_j(T) * lambda_j`, where `f_j` is the
//! logistic arrival probability. Control is zero until the ball can reach
//! the target, so integration starts at the ball's flight time.

mod export;
mod grid;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use export::{read_grid_binary, write_grid_binary, write_grid_csv, GRID_MAGIC};
pub use grid::GridSpec;

use crate::error::ModelError;
use crate::geometry::Vec2;
use crate::kinematics::{self, BallModel, PlayerMotionParams};
use crate::space_data::SportConfig;
use crate::state::GameState;

/// Which players damp a player's control growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interference {
    /// `k` runs over every player on the field.
    #[default]
    AllPlayers,
    /// `k` runs over the player and their opponents; teammates do not interfere.
    OpponentsOnly,
}

/// Step rule for the race ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepScheme {
    /// Arrival rates taken at the step midpoint and frozen over the step;
    /// the uncontrolled mass then decays exactly. Second order in `dt`.
    #[default]
    Exponential,
    /// Plain forward Euler with rates at the left end of the step.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Integration {
    /// seconds
    pub dt: f64,
    /// seconds
    pub t_max: f64,
    /// Stop once total control exceeds this.
    pub stop_threshold: f64,
    pub scheme: StepScheme,
}

impl Default for Integration {
    fn default() -> Self {
        Integration {
            dt: 0.04,
            t_max: 10.0,
            stop_threshold: 0.9999,
            scheme: StepScheme::Exponential,
        }
    }
}

impl Integration {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ModelError::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(ModelError::Config(format!("t_max must be > 0, got {}", self.t_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcfParams {
    pub attacker: PlayerMotionParams,
    pub defender: PlayerMotionParams,
    pub ball: BallModel,
    pub interference: Interference,
    pub integration: Integration,
}

impl PpcfParams {
    pub fn from_config(config: &SportConfig) -> Self {
        PpcfParams {
            attacker: config.attacker,
            defender: config.defender(),
            ball: config.ball,
            interference: Interference::default(),
            integration: Integration::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.attacker.validate()?;
        self.defender.validate()?;
        self.ball.validate()?;
        self.integration.validate()
    }
}

/// Stable short fingerprint of any `Debug` value (FNV-1a over its rendering).
pub fn fingerprint<T: std::fmt::Debug>(value: &T) -> String {
    let text = format!("{value:?}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// One competitor in the race: where they start and how they move.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Racer {
    pub position: Vec2,
    pub velocity: Vec2,
    pub params: PlayerMotionParams,
    pub attacker: bool,
}

impl Racer {
    pub fn arrival(&self, target: Vec2) -> f64 {
        kinematics::expected_arrival_time(self.position, self.velocity, target, &self.params)
    }
}

pub(crate) fn racers(state: &GameState, params: &PpcfParams, skip_attacker: Option<usize>) -> Vec<Racer> {
    let att = state
        .attackers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip_attacker)
        .map(|(_, p)| Racer {
            position: p.position,
            velocity: p.velocity,
            params: params.attacker,
            attacker: true,
        });
    let def = state.defenders.iter().map(|p| Racer {
        position: p.position,
        velocity: p.velocity,
        params: params.defender,
        attacker: false,
    });
    att.chain(def).collect()
}

/// Integrates the race on `[t_start, t_end]`. `tau(j, T)` gives racer `j`'s
/// expected arrival when the clock reads `T`. Returns per-racer control.
pub(crate) fn integrate_race<F>(
    racers: &[Racer],
    t_start: f64,
    t_end: f64,
    integration: &Integration,
    interference: Interference,
    mut tau: F,
) -> Vec<f64>
where
    F: FnMut(usize, f64) -> f64,
{
    let n = racers.len();
    let mut p = vec![0.0; n];
    let mut rates = vec![0.0; n];
    let mut t = t_start;
    while t < t_end - 1e-12 {
        let h = integration.dt.min(t_end - t);
        let t_rate = match integration.scheme {
            StepScheme::Exponential => t + h / 2.0,
            StepScheme::Euler => t,
        };
        for (j, r) in racers.iter().enumerate() {
            let f = kinematics::logistic_arrival(t_rate, tau(j, t_rate), r.params.arrival_sigma);
            rates[j] = f * r.params.control_rate;
        }
        let (att_total, def_total) = racers
            .iter()
            .zip(&p)
            .fold((0.0f64, 0.0f64), |(a, d), (r, v)| if r.attacker { (a + v, d) } else { (a, d + v) });
        let total = att_total + def_total;
        match (interference, integration.scheme) {
            (Interference::AllPlayers, StepScheme::Exponential) => {
                let sum_rate: f64 = rates.iter().sum();
                if sum_rate > 0.0 {
                    let gained = (1.0 - total).max(0.0) * -(-sum_rate * h).exp_m1();
                    for (pj, rj) in p.iter_mut().zip(&rates) {
                        *pj += gained * rj / sum_rate;
                    }
                }
            }
            (Interference::AllPlayers, StepScheme::Euler) => {
                let remaining = 1.0 - total;
                for (pj, rj) in p.iter_mut().zip(&rates) {
                    *pj = (*pj + remaining * rj * h).max(0.0);
                }
            }
            (Interference::OpponentsOnly, _) => {
                for ((pj, rj), r) in p.iter_mut().zip(&rates).zip(racers) {
                    let opposing = if r.attacker { def_total } else { att_total };
                    *pj = (*pj + (1.0 - opposing - *pj).max(0.0) * rj * h).max(0.0);
                }
            }
        }
        t += h;
        // teammates never saturate each other without interference
        if interference == Interference::AllPlayers && p.iter().sum::<f64>() > integration.stop_threshold {
            break;
        }
    }
    p
}

/// Per-player control at one target.
#[derive(Debug, Clone, PartialEq)]
pub struct PointControl {
    /// Indexed like `GameState::attackers`.
    pub attackers: Vec<f64>,
    /// Indexed like `GameState::defenders`.
    pub defenders: Vec<f64>,
    /// seconds
    pub flight_time: f64,
    /// Total control never reached 0.99 before `t_max`.
    pub flagged: bool,
}

impl PointControl {
    pub fn attack(&self) -> f64 {
        self.attackers.iter().sum()
    }

    pub fn defend(&self) -> f64 {
        self.defenders.iter().sum()
    }
}

pub(crate) fn solve_point(
    state: &GameState,
    target: Vec2,
    params: &PpcfParams,
    origin: Vec2,
    skip_attacker: Option<usize>,
) -> PointControl {
    let racers = racers(state, params, skip_attacker);
    let taus: Vec<f64> = racers.iter().map(|r| r.arrival(target)).collect();
    let flight_time = kinematics::ball_flight_time(origin, target, &params.ball);
    let t_max = params.integration.t_max;
    let p = if flight_time <= t_max {
        integrate_race(
            &racers,
            flight_time,
            t_max,
            &params.integration,
            params.interference,
            |j, _| taus[j],
        )
    } else {
        vec![0.0; racers.len()]
    };
    let total: f64 = p.iter().sum();
    let mut it = p.into_iter();
    let attackers = (0..state.attackers.len())
        .map(|i| if Some(i) == skip_attacker { 0.0 } else { it.next().unwrap() })
        .collect();
    let defenders = it.collect();
    PointControl {
        attackers,
        defenders,
        flight_time,
        flagged: total < 0.99,
    }
}

/// Solves the race at `target` with the ball flying from its current position.
pub fn solve_ppcf_at(state: &GameState, target: Vec2, params: &PpcfParams) -> Result<PointControl, ModelError> {
    params.validate()?;
    let ball = state.ball.ok_or(ModelError::MissingBall)?;
    Ok(solve_point(state, target, params, ball, None))
}

/// Provenance attached to every surface.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridMeta {
    pub frame: Option<usize>,
    pub model: String,
    pub params_hash: String,
}

/// Per-cell attacker and defender control.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    pub spec: GridSpec,
    pub attack: Vec<f64>,
    pub defend: Vec<f64>,
    /// Cells whose race did not saturate (or that are degenerate for the model).
    pub flagged: Vec<bool>,
    pub meta: GridMeta,
}

impl ControlGrid {
    /// Grid with every cell set to constant values.
    pub fn uniform(spec: GridSpec, attack: f64, defend: f64) -> Self {
        let n = spec.len();
        ControlGrid {
            spec,
            attack: vec![attack; n],
            defend: vec![defend; n],
            flagged: vec![false; n],
            meta: GridMeta::default(),
        }
    }

    /// Builds a grid by evaluating `cell` at every unmasked cell center, in parallel.
    pub(crate) fn evaluate<F>(spec: GridSpec, meta: GridMeta, cell: F) -> Self
    where
        F: Fn(Vec2) -> (f64, f64, bool) + Sync,
    {
        let values: Vec<(f64, f64, bool)> = (0..spec.len())
            .into_par_iter()
            .map(|i| if spec.is_masked(i) { (0.0, 0.0, false) } else { cell(spec.center(i)) })
            .collect();
        let mut attack = Vec::with_capacity(values.len());
        let mut defend = Vec::with_capacity(values.len());
        let mut flagged = Vec::with_capacity(values.len());
        for (a, d, f) in values {
            attack.push(a);
            defend.push(d);
            flagged.push(f);
        }
        ControlGrid {
            spec,
            attack,
            defend,
            flagged,
            meta,
        }
    }

    /// Cell-wise map of the attack surface; defence is left as is.
    pub fn map_attack(&self, f: impl Fn(usize, f64) -> f64) -> ControlGrid {
        let mut out = self.clone();
        for (i, v) in out.attack.iter_mut().enumerate() {
            *v = f(i, *v);
        }
        out
    }

    /// Point reflection of the whole surface through the field center.
    pub fn mirrored(&self) -> ControlGrid {
        let n = self.spec.len();
        let pick = |src: &Vec<f64>| (0..n).map(|i| src[self.spec.mirror_index(i)]).collect();
        ControlGrid {
            spec: self.spec.clone(),
            attack: pick(&self.attack),
            defend: pick(&self.defend),
            flagged: (0..n).map(|i| self.flagged[self.spec.mirror_index(i)]).collect(),
            meta: self.meta.clone(),
        }
    }
}

/// A single value per cell (score, transition, OBSO or BIMOS surfaces).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub meta: GridMeta,
}

impl ScalarField {
    /// Sum over unmasked cells.
    pub fn total(&self) -> f64 {
        self.spec.unmasked().map(|i| self.values[i]).sum()
    }

    /// Mean over unmasked cells.
    pub fn mean(&self) -> Result<f64, ModelError> {
        let n = self.spec.unmasked().count();
        if n == 0 {
            return Err(ModelError::EmptySurface);
        }
        Ok(self.total() / n as f64)
    }

    pub fn max(&self) -> f64 {
        self.spec
            .unmasked()
            .map(|i| self.values[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Packs the field into the attack plane of a grid (defend plane zero) for export.
    pub fn to_control_grid(&self) -> ControlGrid {
        let n = self.spec.len();
        ControlGrid {
            spec: self.spec.clone(),
            attack: self.values.clone(),
            defend: vec![0.0; n],
            flagged: vec![false; n],
            meta: self.meta.clone(),
        }
    }
}

/// Team control at every cell center.
pub fn ppcf_grid(state: &GameState, spec: &GridSpec, params: &PpcfParams) -> Result<ControlGrid, ModelError> {
    params.validate()?;
    let ball = state.ball.ok_or(ModelError::MissingBall)?;
    let meta = GridMeta {
        frame: state.frame,
        model: "ppcf".into(),
        params_hash: fingerprint(params),
    };
    Ok(ControlGrid::evaluate(spec.clone(), meta, |target| {
        let pc = solve_point(state, target, params, ball, None);
        (pc.attack(), pc.defend(), pc.flagged)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Attack,
    Defend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub mean: f64,
    pub max: f64,
    /// Sum of value × cell area, m².
    pub mass: f64,
    pub cells: usize,
}

/// Mean, maximum and area-weighted mass over unmasked cells.
pub fn team_control_summary(grid: &ControlGrid, side: Side) -> Result<ControlSummary, ModelError> {
    let values = match side {
        Side::Attack => &grid.attack,
        Side::Defend => &grid.defend,
    };
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut cells = 0;
    for i in grid.spec.unmasked() {
        sum += values[i];
        max = max.max(values[i]);
        cells += 1;
    }
    if cells == 0 {
        return Err(ModelError::EmptySurface);
    }
    Ok(ControlSummary {
        mean: sum / cells as f64,
        max,
        mass: sum * grid.spec.cell_area(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PlayerState;

    fn params() -> PpcfParams {
        PpcfParams::from_config(&SportConfig::soccer())
    }

    fn duel(att: Vec2, def: Vec2, ball: Vec2) -> GameState {
        GameState {
            attackers: vec![PlayerState::at(att)],
            defenders: vec![PlayerState::at(def)],
            ball: Some(ball),
            ..Default::default()
        }
    }

    #[test]
    fn uncontested_attacker_saturates() {
        let target = Vec2::new(10.0, 5.0);
        let s = duel(target, Vec2::new(-45.0, -30.0), Vec2::ZERO);
        let pc = solve_ppcf_at(&s, target, &params()).unwrap();
        assert!(pc.attack() >= 0.99, "{pc:?}");
        assert!(!pc.flagged);
    }

    #[test]
    fn symmetric_duel_splits_evenly() {
        let target = Vec2::new(0.0, 0.0);
        let s = duel(Vec2::new(-6.0, 2.0), Vec2::new(6.0, -2.0), Vec2::new(0.0, 20.0));
        let pc = solve_ppcf_at(&s, target, &params()).unwrap();
        assert!((pc.attack() - 0.5).abs() < 1e-3);
        assert!((pc.defend() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn missing_ball_is_error() {
        let mut s = duel(Vec2::ZERO, Vec2::ZERO, Vec2::ZERO);
        s.ball = None;
        assert!(matches!(solve_ppcf_at(&s, Vec2::ZERO, &params()), Err(ModelError::MissingBall)));
    }

    #[test]
    fn unreachable_horizon_flags_cell() {
        let mut p = params();
        p.integration.t_max = 1.0;
        let s = duel(Vec2::new(-50.0, 0.0), Vec2::new(-50.0, 1.0), Vec2::ZERO);
        let pc = solve_ppcf_at(&s, Vec2::new(50.0, 0.0), &p).unwrap();
        assert!(pc.flagged);
        assert_eq!(pc.attack(), 0.0);
    }

    #[test]
    fn euler_scheme_also_splits_symmetric_duel() {
        let mut p = params();
        p.integration.scheme = StepScheme::Euler;
        let s = duel(Vec2::new(-6.0, 0.0), Vec2::new(6.0, 0.0), Vec2::new(0.0, 20.0));
        let pc = solve_ppcf_at(&s, Vec2::ZERO, &p).unwrap();
        assert!((pc.attack() - pc.defend()).abs() < 1e-12);
    }

    #[test]
    fn opponents_only_interference_lets_teammates_share() {
        let mut p = params();
        p.interference = Interference::OpponentsOnly;
        let mut s = duel(Vec2::new(1.0, 0.0), Vec2::new(-40.0, 0.0), Vec2::new(0.0, 10.0));
        s.attackers.push(PlayerState::at(Vec2::new(-1.0, 0.0)));
        let pc = solve_ppcf_at(&s, Vec2::ZERO, &p).unwrap();
        // teammates do not damp each other, so the sum can pass 1
        assert!(pc.attack() > 1.0);
    }

    #[test]
    fn one_cell_grid_matches_point_solve() {
        let spec = GridSpec::new(1, 1, 105.0, 68.0).unwrap();
        let s = duel(Vec2::new(3.0, 1.0), Vec2::new(-2.0, 4.0), Vec2::new(20.0, 0.0));
        let g = ppcf_grid(&s, &spec, &params()).unwrap();
        let pc = solve_ppcf_at(&s, Vec2::ZERO, &params()).unwrap();
        assert_eq!(g.attack[0], pc.attack());
        assert_eq!(g.defend[0], pc.defend());
    }

    #[test]
    fn summary_examples() {
        let spec = GridSpec::new(4, 5, 10.0, 10.0).unwrap();
        let g = ControlGrid::uniform(spec.clone(), 0.5, 0.5);
        let s = team_control_summary(&g, Side::Attack).unwrap();
        assert_eq!((s.mean, s.max), (0.5, 0.5));

        let mut g = ControlGrid::uniform(spec.clone(), 0.0, 0.0);
        g.attack[7] = 1.0;
        let s = team_control_summary(&g, Side::Attack).unwrap();
        assert!((s.mean - 1.0 / 20.0).abs() < 1e-15);
        assert_eq!(s.max, 1.0);
        assert!((s.mass - spec.cell_area()).abs() < 1e-12);

        let masked = spec.with_mask(vec![true; 20]).unwrap();
        let g = ControlGrid::uniform(masked, 0.3, 0.3);
        assert!(matches!(team_control_summary(&g, Side::Defend), Err(ModelError::EmptySurface)));
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = fingerprint(&params());
        assert_eq!(a, fingerprint(&params()));
        let mut p = params();
        p.integration.dt = 0.05;
        assert_ne!(a, fingerprint(&p));
    }
}
