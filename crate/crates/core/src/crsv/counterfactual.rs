use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Vec2;
use crate::space_data::{PlayerRef, SpaceDataset, Team};
use crate::state::{AttackDirection, GameState, PlayerState};

/// One possession as per-player trajectories, attack toward `+x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Play {
    /// `attackers[player][frame]`, meters.
    pub attackers: Vec<Vec<Vec2>>,
    pub defenders: Vec<Vec<Vec2>>,
    pub disc: Vec<Vec2>,
    /// Attacker index holding the disc at each frame.
    pub holder: Vec<Option<usize>>,
    /// Hz
    pub sample_rate: f64,
    /// Frame the analysed run starts.
    pub t0: usize,
    /// Source ids of the attackers, when built from a dataset.
    #[serde(default)]
    pub attacker_ids: Vec<Option<PlayerRef>>,
}

impl Play {
    pub fn len(&self) -> usize {
        self.disc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disc.is_empty()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.len();
        if n == 0 {
            return Err(ModelError::InsufficientFrames { needed: 1, got: 0 });
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(ModelError::Config(format!("sample rate must be > 0, got {}", self.sample_rate)));
        }
        let tracks = self.attackers.iter().chain(&self.defenders);
        if self.holder.len() != n || tracks.clone().any(|t| t.len() != n) {
            return Err(ModelError::DegenerateFrame("trajectories differ in length".into()));
        }
        if self.t0 >= n {
            return Err(ModelError::Range(format!("initiation frame {} outside 0..{n}", self.t0)));
        }
        Ok(())
    }

    /// Central-difference velocity (one-sided at the ends).
    fn velocity(&self, track: &[Vec2], frame: usize) -> Vec2 {
        let n = track.len();
        if n < 2 {
            return Vec2::ZERO;
        }
        let (a, b) = match frame {
            0 => (0, 1),
            f if f + 1 >= n => (n - 2, n - 1),
            f => (f - 1, f + 1),
        };
        (track[b] - track[a]) * (self.sample_rate / (b - a) as f64)
    }

    pub fn state(&self, frame: usize) -> GameState {
        let player = |track: &Vec<Vec2>| PlayerState::moving(track[frame], self.velocity(track, frame));
        let mut attackers: Vec<PlayerState> = self.attackers.iter().map(player).collect();
        for (p, id) in attackers.iter_mut().zip(&self.attacker_ids) {
            p.id = *id;
        }
        GameState {
            attackers,
            defenders: self.defenders.iter().map(player).collect(),
            ball: Some(self.disc[frame]),
            ball_holder: self.holder[frame],
            direction: AttackDirection::Positive,
            frame: Some(frame),
        }
    }

    /// Cuts `frames` out of a dataset with `attacking` oriented toward `+x`.
    ///
    /// Players are those on the field at the first frame; a later gap in any
    /// of their tracks is an error.
    pub fn from_dataset(
        dataset: &SpaceDataset,
        frames: std::ops::Range<usize>,
        attacking: Team,
        t0: usize,
    ) -> Result<Play, ModelError> {
        if frames.is_empty() || frames.end > dataset.len() {
            return Err(ModelError::Range(format!("frames {frames:?} outside 0..{}", dataset.len())));
        }
        let first = dataset.game_state(frames.start, Some(attacking))?;
        let ids = |ps: &[PlayerState]| ps.iter().map(|p| p.id).collect::<Vec<_>>();
        let attacker_ids = ids(&first.attackers);
        let defender_ids = ids(&first.defenders);
        let n = frames.len();
        let mut play = Play {
            attackers: vec![Vec::with_capacity(n); attacker_ids.len()],
            defenders: vec![Vec::with_capacity(n); defender_ids.len()],
            disc: Vec::with_capacity(n),
            holder: Vec::with_capacity(n),
            sample_rate: dataset.config.sample_rate,
            t0: t0.checked_sub(frames.start).ok_or_else(|| {
                ModelError::Range(format!("initiation frame {t0} before frame {}", frames.start))
            })?,
            attacker_ids: attacker_ids.clone(),
        };
        for f in frames {
            let s = dataset.game_state(f, Some(attacking))?;
            let find = |ps: &[PlayerState], id: Option<PlayerRef>| {
                ps.iter()
                    .find(|p| p.id == id)
                    .map(|p| p.position)
                    .ok_or_else(|| ModelError::DegenerateFrame(format!("frame {f}: player left the field")))
            };
            for (track, id) in play.attackers.iter_mut().zip(&attacker_ids) {
                track.push(find(&s.attackers, *id)?);
            }
            for (track, id) in play.defenders.iter_mut().zip(&defender_ids) {
                track.push(find(&s.defenders, *id)?);
            }
            play.disc.push(s.ball.ok_or(ModelError::MissingBall)?);
            let holder_id = s.ball_holder.map(|h| s.attackers[h].id);
            play.holder
                .push(holder_id.and_then(|id| attacker_ids.iter().position(|&a| a == id)));
        }
        play.validate()?;
        Ok(play)
    }
}

/// A play with one receiver's run started `xi` frames away from `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualPlay {
    pub play: Play,
    pub receiver: usize,
    /// frames; negative is earlier
    pub xi: i64,
    /// Too little history before `t0` to estimate the bridge velocity, so it was taken as zero.
    pub velocity_fallback: bool,
}

impl CounterfactualPlay {
    pub fn receiver_track(&self) -> &[Vec2] {
        &self.play.attackers[self.receiver]
    }

    /// First frame whose state differs from the base play.
    pub fn divergence_frame(&self) -> usize {
        let start = self.play.t0 as i64 + self.xi.min(0);
        start.max(0) as usize
    }
}

/// Moves the start of `receiver`'s run from `t0` to `t0 + xi`.
///
/// Earlier: the run from `t0` on is replayed `|xi|` frames sooner, shifted
/// so the receiver does not jump at `t0 + xi`; once the recorded run is used
/// up the receiver holds its last position. Later: the receiver keeps moving
/// at its mean velocity over the preceding second (capped at `max_speed`)
/// for `xi` frames, then runs the recorded path from there. Everyone else is
/// untouched.
pub fn shift_trajectory(play: &Play, receiver: usize, xi: i64, max_speed: f64) -> Result<CounterfactualPlay, ModelError> {
    play.validate()?;
    if receiver >= play.attackers.len() {
        return Err(ModelError::UnknownPlayer(receiver));
    }
    let n = play.len() as i64;
    let t0 = play.t0 as i64;
    let start = t0 + xi;
    if start < 0 || start >= n {
        return Err(ModelError::Range(format!("t0 + xi = {start} outside 0..{n}")));
    }
    let x = &play.attackers[receiver];
    let mut out = x.clone();
    let mut velocity_fallback = false;
    let (t0, n) = (t0 as usize, n as usize);
    if xi < 0 {
        let k = xi.unsigned_abs() as usize;
        let s = t0 - k;
        let correction = x[s] - x[t0];
        for (t, slot) in out.iter_mut().enumerate().skip(s + 1) {
            *slot = x[(t + k).min(n - 1)] + correction;
        }
    } else if xi > 0 {
        let k = xi as usize;
        let history = play.sample_rate.round() as usize;
        let velocity = if history >= 1 && t0 >= history {
            ((x[t0] - x[t0 - history]) * (play.sample_rate / history as f64)).clamp_norm(max_speed)
        } else {
            velocity_fallback = true;
            Vec2::ZERO
        };
        let dt = 1.0 / play.sample_rate;
        for j in 1..=k.min(n - 1 - t0) {
            out[t0 + j] = x[t0] + velocity * (j as f64 * dt);
        }
        let correction = out[t0 + k] - x[t0];
        for t in (t0 + k + 1)..n {
            out[t] = x[t - k] + correction;
        }
    }
    let mut shifted = play.clone();
    shifted.attackers[receiver] = out;
    Ok(CounterfactualPlay {
        play: shifted,
        receiver,
        xi,
        velocity_fallback,
    })
}
