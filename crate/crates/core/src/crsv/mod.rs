//! Weighted Ultimate pitch control and counterfactual timing of off-disc runs.
//!
//! The thrower is stationary while holding the disc, so they are left out of
//! the race and the disc's flight starts at their position. A receiver's
//! control is then discounted by throw distance and by defenders standing in
//! the throwing lane.

mod counterfactual;
mod reach;
mod scenario;

use serde::{Deserialize, Serialize};

pub use counterfactual::{shift_trajectory, CounterfactualPlay, Play};
pub use reach::{reach_region, MeetRule, ReachRegion};
pub use scenario::{v_frame, v_scenario, vframe_series, v_timing, ScenarioRecord, ScenarioValue, TimingReport};

use crate::error::ModelError;
use crate::geometry::Vec2;
use crate::pitch_control::{fingerprint, solve_point, ControlGrid, GridMeta, GridSpec, PpcfParams};
use crate::space_data::SportConfig;
use crate::state::GameState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightParams {
    /// Throws shorter than this are not penalized, meters.
    pub d_free: f64,
    /// Decay length of the distance weight beyond `d_free`, meters.
    pub distance_scale: f64,
    /// radians
    pub cone_half_angle: f64,
    /// Angular width of the linear fade at the cone edge, radians.
    pub cone_ramp: f64,
    /// Cone depth in meters; `None` uses the throw distance.
    pub cone_depth: Option<f64>,
    /// Moving-average window, frames.
    pub window: usize,
    /// Initiation offsets to evaluate, frames.
    pub xi_range: Vec<i64>,
    /// seconds
    pub tol_meet: f64,
    /// seconds
    pub horizon: f64,
    pub meet_rule: MeetRule,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            d_free: 5.0,
            distance_scale: 20.0,
            cone_half_angle: 0.15,
            cone_ramp: 0.05,
            cone_depth: None,
            window: 10,
            xi_range: (-4..=4).map(|k| k * 5).collect(),
            tol_meet: 0.3,
            horizon: 4.0,
            meet_rule: MeetRule::default(),
        }
    }
}

impl WeightParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("distance_scale", self.distance_scale),
            ("cone_half_angle", self.cone_half_angle),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("d_free", self.d_free),
            ("cone_ramp", self.cone_ramp),
            ("tol_meet", self.tol_meet),
            ("horizon", self.horizon),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if let Some(depth) = self.cone_depth {
            if !(depth > 0.0 && depth.is_finite()) {
                return Err(ModelError::Config(format!("cone_depth must be > 0, got {depth}")));
            }
        }
        if self.window == 0 {
            return Err(ModelError::Config("window must be at least 1 frame".into()));
        }
        if !self.xi_range.contains(&0) {
            return Err(ModelError::Config("xi range must contain 0".into()));
        }
        Ok(())
    }

    /// Distance weight `exp(-max(0, d - d_free) / scale)`.
    pub fn distance_weight(&self, throw_distance: f64) -> f64 {
        (-(throw_distance - self.d_free).max(0.0) / self.distance_scale).exp()
    }

    /// Obstruction of the lane from `disc` to `target` by one defender, in `[0, 1]`.
    pub fn obstruction_by(&self, disc: Vec2, target: Vec2, defender: Vec2) -> f64 {
        let lane = target - disc;
        let length = lane.norm();
        if length == 0.0 {
            return 0.0;
        }
        let dir = lane * (1.0 / length);
        let rel = defender - disc;
        let along = rel.dot(dir);
        let depth = self.cone_depth.unwrap_or(length);
        if along <= 0.0 || along > depth {
            return 0.0;
        }
        let angle = rel.cross(dir).abs().atan2(along);
        if self.cone_ramp == 0.0 {
            return if angle <= self.cone_half_angle { 1.0 } else { 0.0 };
        }
        (0.5 + (self.cone_half_angle - angle) / self.cone_ramp).clamp(0.0, 1.0)
    }

    /// Shadow weight `1 - obstruction`, the strongest obstruction over all defenders.
    pub fn shadow_weight(&self, disc: Vec2, target: Vec2, defenders: impl IntoIterator<Item = Vec2>) -> f64 {
        let worst = defenders
            .into_iter()
            .map(|d| self.obstruction_by(disc, target, d))
            .fold(0.0, f64::max);
        1.0 - worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrsvParams {
    pub ppcf: PpcfParams,
    pub weights: WeightParams,
    /// Leave the holder out of the race and launch the disc from them.
    pub exclude_holder: bool,
}

impl CrsvParams {
    pub fn from_config(config: &SportConfig) -> Self {
        CrsvParams {
            ppcf: PpcfParams::from_config(config),
            weights: WeightParams::default(),
            exclude_holder: true,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.ppcf.validate()?;
        self.weights.validate()
    }
}

/// Launch point of the disc and the attacker left out of the race.
pub(crate) fn disc_origin(state: &GameState, params: &CrsvParams) -> Result<(Vec2, Option<usize>), ModelError> {
    if !params.exclude_holder {
        let origin = match state.ball {
            Some(b) => b,
            None => holder_position(state)?,
        };
        return Ok((origin, None));
    }
    let holder = state.ball_holder.ok_or(ModelError::NoHolder)?;
    Ok((holder_position(state)?, Some(holder)))
}

fn holder_position(state: &GameState) -> Result<Vec2, ModelError> {
    let h = state.ball_holder.ok_or(ModelError::NoHolder)?;
    state
        .attackers
        .get(h)
        .map(|p| p.position)
        .ok_or(ModelError::UnknownPlayer(h))
}

fn meta(state: &GameState, model: &str, params: &CrsvParams) -> GridMeta {
    GridMeta {
        frame: state.frame,
        model: model.into(),
        params_hash: fingerprint(params),
    }
}

/// Team control with a stationary thrower and the disc launched from them.
pub fn uppcf_grid(state: &GameState, spec: &GridSpec, params: &CrsvParams) -> Result<ControlGrid, ModelError> {
    params.validate()?;
    let (origin, skip) = disc_origin(state, params)?;
    Ok(ControlGrid::evaluate(spec.clone(), meta(state, "uppcf", params), |target| {
        let pc = solve_point(state, target, &params.ppcf, origin, skip);
        (pc.attack(), pc.defend(), pc.flagged)
    }))
}

/// Receiver control and its weighted form at one target: `(uppcf_j, wuppcf_j, flagged)`.
pub(crate) fn receiver_control(
    state: &GameState,
    receiver: usize,
    target: Vec2,
    origin: Vec2,
    skip: Option<usize>,
    params: &CrsvParams,
) -> (f64, f64, bool) {
    let pc = solve_point(state, target, &params.ppcf, origin, skip);
    let u = pc.attackers[receiver];
    let w = &params.weights;
    let w_d = w.distance_weight(origin.distance(target));
    let w_s = w.shadow_weight(origin, target, state.defenders.iter().map(|d| d.position));
    (u, u * w_d * w_s, pc.flagged)
}

pub(crate) fn check_receiver(state: &GameState, receiver: usize, skip: Option<usize>) -> Result<(), ModelError> {
    if receiver >= state.attackers.len() {
        return Err(ModelError::UnknownPlayer(receiver));
    }
    if skip == Some(receiver) {
        return Err(ModelError::Config(format!("receiver {receiver} is the disc holder")));
    }
    Ok(())
}

/// Per-cell weighted control of one receiver (attack plane) and defender control (defend plane).
pub fn wuppcf_grid(
    state: &GameState,
    receiver: usize,
    spec: &GridSpec,
    params: &CrsvParams,
) -> Result<ControlGrid, ModelError> {
    params.validate()?;
    let (origin, skip) = disc_origin(state, params)?;
    check_receiver(state, receiver, skip)?;
    Ok(ControlGrid::evaluate(spec.clone(), meta(state, "wuppcf", params), |target| {
        let pc = solve_point(state, target, &params.ppcf, origin, skip);
        let w = &params.weights;
        let w_d = w.distance_weight(origin.distance(target));
        let w_s = w.shadow_weight(origin, target, state.defenders.iter().map(|d| d.position));
        (pc.attackers[receiver] * w_d * w_s, pc.defend(), pc.flagged)
    }))
}

/// Weighted control summed over every eligible receiver.
pub fn team_wuppcf_grid(state: &GameState, spec: &GridSpec, params: &CrsvParams) -> Result<ControlGrid, ModelError> {
    params.validate()?;
    let (origin, skip) = disc_origin(state, params)?;
    Ok(ControlGrid::evaluate(spec.clone(), meta(state, "wuppcf_team", params), |target| {
        let pc = solve_point(state, target, &params.ppcf, origin, skip);
        let w = &params.weights;
        let w_d = w.distance_weight(origin.distance(target));
        let w_s = w.shadow_weight(origin, target, state.defenders.iter().map(|d| d.position));
        (pc.attack() * w_d * w_s, pc.defend(), pc.flagged)
    }))
}

/// Unweighted control of one receiver per cell.
pub fn receiver_uppcf_grid(
    state: &GameState,
    receiver: usize,
    spec: &GridSpec,
    params: &CrsvParams,
) -> Result<ControlGrid, ModelError> {
    params.validate()?;
    let (origin, skip) = disc_origin(state, params)?;
    check_receiver(state, receiver, skip)?;
    Ok(ControlGrid::evaluate(spec.clone(), meta(state, "uppcf_receiver", params), |target| {
        let pc = solve_point(state, target, &params.ppcf, origin, skip);
        (pc.attackers[receiver], pc.defend(), pc.flagged)
    }))
}
