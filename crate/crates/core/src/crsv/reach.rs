use serde::{Deserialize, Serialize};

use super::{check_receiver, disc_origin, CrsvParams};
use crate::error::ModelError;
use crate::kinematics;
use crate::pitch_control::GridSpec;
use crate::state::GameState;

/// When a receiver and the disc count as meeting at a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetRule {
    /// `|tau_exp - T_flight| <= tol`.
    #[default]
    Simultaneous,
    /// The thrower may hold the disc, so only `T_flight <= tau_exp + tol` is required.
    DiscCanWait,
}

/// Cells where the receiver and the disc can arrive together.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachRegion {
    pub spec: GridSpec,
    /// Ascending cell indices.
    pub cells: Vec<usize>,
}

impl ReachRegion {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }
}

pub fn reach_region(
    state: &GameState,
    receiver: usize,
    spec: &GridSpec,
    params: &CrsvParams,
) -> Result<ReachRegion, ModelError> {
    let (origin, skip) = disc_origin(state, params)?;
    check_receiver(state, receiver, skip)?;
    let r = state.attackers[receiver];
    let w = &params.weights;
    let cells = spec
        .unmasked()
        .filter(|&i| {
            let target = spec.center(i);
            let tau = kinematics::expected_arrival_time(r.position, r.velocity, target, &params.ppcf.attacker);
            let t_flight = kinematics::ball_flight_time(origin, target, &params.ppcf.ball);
            let meets = match w.meet_rule {
                MeetRule::Simultaneous => (tau - t_flight).abs() <= w.tol_meet,
                MeetRule::DiscCanWait => t_flight <= tau + w.tol_meet,
            };
            meets && tau <= w.horizon && t_flight <= w.horizon
        })
        .collect();
    Ok(ReachRegion {
        spec: spec.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::space_data::SportConfig;
    use crate::state::PlayerState;

    fn setup() -> (GridSpec, CrsvParams, GameState) {
        let c = SportConfig::ultimate();
        let g = GridSpec::default_for(&c).unwrap();
        let state = GameState {
            attackers: vec![
                PlayerState::at(Vec2::new(-20.0, 0.0)),
                PlayerState::moving(Vec2::new(0.0, 5.0), Vec2::new(4.0, 0.0)),
            ],
            defenders: vec![PlayerState::at(Vec2::new(2.0, 6.0))],
            ball: Some(Vec2::new(-20.0, 0.0)),
            ball_holder: Some(0),
            ..Default::default()
        };
        (g, CrsvParams::from_config(&c), state)
    }

    #[test]
    fn matches_brute_force_filter() {
        let (g, p, s) = setup();
        let region = reach_region(&s, 1, &g, &p).unwrap();
        assert!(!region.is_empty());
        let r = s.attackers[1];
        for i in 0..g.len() {
            let c = g.center(i);
            let tau = p.ppcf.attacker.reaction_time
                + (c - (r.position + r.velocity * p.ppcf.attacker.reaction_time)).norm() / p.ppcf.attacker.max_speed;
            let tf = c.distance(Vec2::new(-20.0, 0.0)) / p.ppcf.ball.speed;
            let expect = (tau - tf).abs() <= 0.3 && tau <= 4.0 && tf <= 4.0;
            assert_eq!(region.contains(i), expect, "cell {i}");
        }
    }

    #[test]
    fn zero_horizon_is_empty() {
        let (g, mut p, s) = setup();
        p.weights.horizon = 0.0;
        assert!(reach_region(&s, 1, &g, &p).unwrap().is_empty());
    }

    #[test]
    fn co_located_receiver_meets_near_disc() {
        let (g, mut p, mut s) = setup();
        s.attackers[1] = PlayerState::at(Vec2::new(-20.0, 0.0));
        // under the simultaneous rule a reaction delay longer than the tolerance
        // rules out every cell, so the receiver reacts within it here
        p.ppcf.attacker.reaction_time = 0.2;
        let region = reach_region(&s, 1, &g, &p).unwrap();
        assert!(region.contains(g.locate(Vec2::new(-20.0, 0.0))));

        let (g, mut p, mut s) = setup();
        s.attackers[1] = PlayerState::at(Vec2::new(-20.0, 0.0));
        p.weights.meet_rule = MeetRule::DiscCanWait;
        let region = reach_region(&s, 1, &g, &p).unwrap();
        assert!(region.contains(g.locate(Vec2::new(-20.0, 0.0))));
    }
}
