//! The instantaneous game state every surface model consumes.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::space_data::PlayerRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AttackDirection {
    /// Attacking the `+x` end.
    #[default]
    Positive,
    Negative,
}

impl AttackDirection {
    pub fn sign(self) -> f64 {
        match self {
            AttackDirection::Positive => 1.0,
            AttackDirection::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            AttackDirection::Positive => AttackDirection::Negative,
            AttackDirection::Negative => AttackDirection::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub id: Option<PlayerRef>,
    pub position: Vec2,
    pub velocity: Vec2,
}

impl PlayerState {
    pub fn at(position: Vec2) -> Self {
        PlayerState {
            id: None,
            position,
            velocity: Vec2::ZERO,
        }
    }

    pub fn moving(position: Vec2, velocity: Vec2) -> Self {
        PlayerState {
            id: None,
            position,
            velocity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GameState {
    pub attackers: Vec<PlayerState>,
    pub defenders: Vec<PlayerState>,
    pub ball: Option<Vec2>,
    /// Index into `attackers` of the player holding the ball, if known.
    pub ball_holder: Option<usize>,
    pub direction: AttackDirection,
    /// Source frame index, when the state came from a dataset.
    pub frame: Option<usize>,
}

impl GameState {
    /// Point reflection through the field center; the attack direction flips with it.
    pub fn mirrored(&self) -> GameState {
        let flip = |p: &PlayerState| PlayerState {
            id: p.id,
            position: -p.position,
            velocity: -p.velocity,
        };
        GameState {
            attackers: self.attackers.iter().map(flip).collect(),
            defenders: self.defenders.iter().map(flip).collect(),
            ball: self.ball.map(|b| -b),
            ball_holder: self.ball_holder,
            direction: self.direction.flipped(),
            frame: self.frame,
        }
    }

    /// Attackers and defenders exchange roles. The holder is dropped.
    pub fn swapped_roles(&self) -> GameState {
        GameState {
            attackers: self.defenders.clone(),
            defenders: self.attackers.clone(),
            ball: self.ball,
            ball_holder: None,
            direction: self.direction.flipped(),
            frame: self.frame,
        }
    }

    /// The holder if known, otherwise the attacker nearest the ball.
    pub fn ball_carrier(&self) -> Option<usize> {
        if self.ball_holder.is_some() {
            return self.ball_holder;
        }
        let ball = self.ball?;
        self.attackers
            .iter()
            .enumerate()
            .min_by(|a, b| {
                a.1.position
                    .distance(ball)
                    .total_cmp(&b.1.position.distance(ball))
            })
            .map(|(i, _)| i)
    }
}
