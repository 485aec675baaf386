use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::geometry::Vec2;
use crate::kinematics::{BallModel, PlayerMotionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sport {
    Ultimate,
    Soccer,
    Basketball,
}

impl fmt::Display for Sport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sport::Ultimate => "ultimate",
            Sport::Soccer => "soccer",
            Sport::Basketball => "basketball",
        })
    }
}

impl FromStr for Sport {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ultimate" | "ufa" => Ok(Sport::Ultimate),
            "soccer" | "football" => Ok(Sport::Soccer),
            "basketball" | "nba" => Ok(Sport::Basketball),
            other => Err(DataError::Config(format!("unknown sport `{other}`"))),
        }
    }
}

/// What the attack is aiming at, always on the `+x` side after orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetGeometry {
    /// Goal mouth centered on the `+x` goal line.
    Goal { width: f64 },
    /// Scoring zone of the given depth at the `+x` end.
    EndZone { depth: f64 },
    /// Basket center `offset` meters in from the `+x` baseline.
    Basket { offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SportConfig {
    pub sport: Sport,
    /// meters
    pub field_length: f64,
    /// meters
    pub field_width: f64,
    /// meters; zero when the sport has no end zones
    pub endzone_depth: f64,
    pub players_per_side: usize,
    /// Hz
    pub sample_rate: f64,
    pub target: TargetGeometry,
    pub attacker: PlayerMotionParams,
    /// Defender control rate relative to attackers.
    pub defender_rate_factor: f64,
    pub ball: BallModel,
    /// Default grid resolution (cells along length, cells along width).
    pub grid: (usize, usize),
}

impl SportConfig {
    pub fn ultimate() -> Self {
        // 120 x 53 1/3 yd with 20 yd end zones
        SportConfig {
            sport: Sport::Ultimate,
            field_length: 109.73,
            field_width: 48.77,
            endzone_depth: 18.288,
            players_per_side: 7,
            sample_rate: 10.0,
            target: TargetGeometry::EndZone { depth: 18.288 },
            attacker: PlayerMotionParams::default(),
            defender_rate_factor: 1.0,
            ball: BallModel {
                speed: 12.0,
                dribble_speed: 7.0,
            },
            grid: (55, 25),
        }
    }

    pub fn soccer() -> Self {
        SportConfig {
            sport: Sport::Soccer,
            field_length: 105.0,
            field_width: 68.0,
            endzone_depth: 0.0,
            players_per_side: 11,
            sample_rate: 25.0,
            target: TargetGeometry::Goal { width: 7.32 },
            attacker: PlayerMotionParams::default(),
            defender_rate_factor: 1.0,
            ball: BallModel::default(),
            grid: (50, 32),
        }
    }

    pub fn basketball() -> Self {
        SportConfig {
            sport: Sport::Basketball,
            field_length: 28.65,
            field_width: 15.24,
            endzone_depth: 0.0,
            players_per_side: 5,
            sample_rate: 25.0,
            target: TargetGeometry::Basket { offset: 1.575 },
            attacker: PlayerMotionParams::default(),
            defender_rate_factor: 1.0,
            ball: BallModel {
                speed: 10.0,
                dribble_speed: 5.0,
            },
            grid: (28, 15),
        }
    }

    pub fn for_sport(sport: Sport) -> Self {
        match sport {
            Sport::Ultimate => Self::ultimate(),
            Sport::Soccer => Self::soccer(),
            Sport::Basketball => Self::basketball(),
        }
    }

    pub fn defender(&self) -> PlayerMotionParams {
        self.attacker.with_rate_factor(self.defender_rate_factor)
    }

    pub fn half_length(&self) -> f64 {
        self.field_length / 2.0
    }

    pub fn half_width(&self) -> f64 {
        self.field_width / 2.0
    }

    /// Whether `p` lies inside the field, allowing `tolerance` meters outside.
    pub fn contains(&self, p: Vec2, tolerance: f64) -> bool {
        p.x.abs() <= self.half_length() + tolerance && p.y.abs() <= self.half_width() + tolerance
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |msg: String| Err(DataError::Config(msg));
        if !(self.field_length > 0.0 && self.field_length.is_finite()) {
            return bad(format!("field length must be > 0, got {}", self.field_length));
        }
        if !(self.field_width > 0.0 && self.field_width.is_finite()) {
            return bad(format!("field width must be > 0, got {}", self.field_width));
        }
        if self.players_per_side == 0 {
            return bad("players per side must be at least 1".into());
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return bad(format!("sample rate must be > 0, got {}", self.sample_rate));
        }
        if !(self.endzone_depth >= 0.0 && 2.0 * self.endzone_depth < self.field_length) {
            return bad(format!(
                "end zone depth {} does not fit a {} m field",
                self.endzone_depth, self.field_length
            ));
        }
        if !(self.defender_rate_factor > 0.0 && self.defender_rate_factor.is_finite()) {
            return bad("defender rate factor must be > 0".into());
        }
        if self.grid.0 == 0 || self.grid.1 == 0 {
            return bad("grid must have at least one cell per axis".into());
        }
        self.attacker
            .validate()
            .and_then(|_| self.ball.validate())
            .map_err(|e| DataError::Config(e.to_string()))
    }
}
