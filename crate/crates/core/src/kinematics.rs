//! Player arrival-time model and the logistic interception probability.
//!
//! A player keeps their current velocity for the reaction time, then runs
//! straight at the target at top speed. The arrival time is therefore
//! `reaction + |target - (p + v * reaction)| / v_max`. The optional
//! [`ArrivalModel::ConstantAcceleration`] mode replaces the instantaneous
//! top-speed phase with a ramp bounded by `max_acceleration`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{name}` must be strictly positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },

    #[error("reaction time must be below 2 s, got {0}")]
    ReactionTooLong(f64),
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NotPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalModel {
    #[default]
    ReactionThenMaxSpeed,
    ConstantAcceleration,
}

/// Motion and control parameters for one class of player (attacker or defender).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlayerMotionParams {
    /// seconds
    pub reaction_time: f64,
    /// m/s
    pub max_speed: f64,
    /// m/s²
    pub max_acceleration: f64,
    /// Logistic spread of the arrival time, seconds.
    pub arrival_sigma: f64,
    /// Control rate λ, 1/s.
    pub control_rate: f64,
    pub arrival_model: ArrivalModel,
}

impl Default for PlayerMotionParams {
    fn default() -> Self {
        PlayerMotionParams {
            reaction_time: 0.7,
            max_speed: 5.0,
            max_acceleration: 7.0,
            arrival_sigma: 0.45,
            control_rate: 4.3,
            arrival_model: ArrivalModel::ReactionThenMaxSpeed,
        }
    }
}

impl PlayerMotionParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check_positive("reaction_time", self.reaction_time)?;
        if self.reaction_time >= 2.0 {
            return Err(ParamError::ReactionTooLong(self.reaction_time));
        }
        check_positive("max_speed", self.max_speed)?;
        check_positive("max_acceleration", self.max_acceleration)?;
        check_positive("arrival_sigma", self.arrival_sigma)?;
        check_positive("control_rate", self.control_rate)?;
        Ok(())
    }

    /// Copy with the control rate multiplied by `factor`.
    pub fn with_rate_factor(mut self, factor: f64) -> Self {
        self.control_rate *= factor;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BallModel {
    /// Average ball (or disc) speed for passes, m/s.
    pub speed: f64,
    /// Ball speed while dribbling, m/s.
    pub dribble_speed: f64,
}

impl Default for BallModel {
    fn default() -> Self {
        BallModel {
            speed: 15.0,
            dribble_speed: 7.0,
        }
    }
}

impl BallModel {
    pub fn validate(&self) -> Result<(), ParamError> {
        check_positive("ball_speed", self.speed)?;
        check_positive("dribble_speed", self.dribble_speed)
    }
}

/// Expected time (s) for a player at `position` moving with `velocity` to reach `target`.
pub fn expected_arrival_time(
    position: Vec2,
    velocity: Vec2,
    target: Vec2,
    params: &PlayerMotionParams,
) -> f64 {
    let after_reaction = position + velocity * params.reaction_time;
    let remaining = target - after_reaction;
    let distance = remaining.norm();
    match params.arrival_model {
        ArrivalModel::ReactionThenMaxSpeed => params.reaction_time + distance / params.max_speed,
        ArrivalModel::ConstantAcceleration => {
            if distance == 0.0 {
                return params.reaction_time;
            }
            let along = velocity.dot(remaining) / distance;
            let start = along.clamp(0.0, params.max_speed);
            let v_max = params.max_speed;
            let accel = params.max_acceleration;
            let ramp_time = (v_max - start) / accel;
            let ramp_distance = 0.5 * (start + v_max) * ramp_time;
            let run = if distance <= ramp_distance {
                // d = u t + a t² / 2
                (-start + (start * start + 2.0 * accel * distance).sqrt()) / accel
            } else {
                ramp_time + (distance - ramp_distance) / v_max
            };
            params.reaction_time + run
        }
    }
}

/// Logistic probability that a player with expected arrival `tau_exp` has
/// arrived by time `t`, with spread `sigma`.
pub fn arrival_probability(t: f64, tau_exp: f64, sigma: f64) -> Result<f64, ParamError> {
    check_positive("arrival_sigma", sigma)?;
    Ok(logistic_arrival(t, tau_exp, sigma))
}

/// Unchecked variant of [`arrival_probability`] for inner loops; `sigma > 0`.
#[inline]
pub(crate) fn logistic_arrival(t: f64, tau_exp: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + (-PI * (t - tau_exp) / (3f64.sqrt() * sigma)).exp())
}

/// d/dT of [`arrival_probability`].
pub fn arrival_density(t: f64, tau_exp: f64, sigma: f64) -> Result<f64, ParamError> {
    let f = arrival_probability(t, tau_exp, sigma)?;
    Ok(PI / (3f64.sqrt() * sigma) * f * (1.0 - f))
}

/// Straight-line flight time at the model's pass speed.
pub fn ball_flight_time(origin: Vec2, target: Vec2, ball: &BallModel) -> f64 {
    origin.distance(target) / ball.speed
}
