//! Deterministic synthetic Ultimate matches for demos and tests.

use std::path::Path;

use spacefield::space_data::{write_events, write_tracking, EventRecord, SportConfig, Team, TrackingRow, TrackingTable};
use spacefield::Vec2;

use crate::config::MatchInput;
use crate::CliError;

/// Both tracking sides and the event log of one synthetic possession.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatch {
    pub home: TrackingTable,
    pub away: TrackingTable,
    pub events: Vec<EventRecord>,
}

const PASS_EVERY: usize = 40;
const FLIGHT: usize = 8;

fn home_position(slot: usize, t: f64, phase: f64) -> Vec2 {
    let k = slot as f64;
    let base = Vec2::new(-40.0 + 10.0 * k, -18.0 + 6.0 * k);
    let drift = Vec2::new(1.2 * t, 0.0);
    let wobble = Vec2::new((0.7 * t + k + phase).sin() * 3.0, (0.5 * t + 2.0 * k + phase).cos() * 4.0);
    base + drift + wobble
}

/// Home attacks `+x` the whole time and passes along its slots; each Away
/// player marks the Home player with the same slot from the `+x` side.
pub fn generate(seed: u64, frames: usize) -> SampleMatch {
    let config = SportConfig::ultimate();
    let k = config.players_per_side;
    let phase = seed as f64 * 0.37;
    let time = |f: usize| f as f64 / config.sample_rate;
    let rows = |side: Team| -> Vec<TrackingRow> {
        (0..frames)
            .map(|f| {
                let t = time(f);
                let players = (0..k)
                    .map(|slot| {
                        let p = home_position(slot, t, phase);
                        Some(match side {
                            Team::Home => p,
                            Team::Away => p + Vec2::new(1.5, 0.8 * (t + slot as f64).sin()),
                        })
                    })
                    .collect();
                TrackingRow {
                    period: 1,
                    time: t,
                    players,
                    ball: None,
                }
            })
            .collect()
    };
    let mut events = Vec::new();
    let mut start = PASS_EVERY / 2;
    let mut thrower = 0;
    while start + FLIGHT < frames {
        let receiver = (thrower + 1) % k;
        let end = start + FLIGHT;
        events.push(EventRecord {
            team: Team::Home,
            kind: "PASS".into(),
            subtype: String::new(),
            period: 1,
            start_frame: start,
            start_time: time(start),
            end_frame: end,
            end_time: time(end),
            from: Some(format!("Home_{}", thrower + 1)),
            to: Some(format!("Home_{}", receiver + 1)),
            start: Some(home_position(thrower, time(start), phase)),
            end: Some(home_position(receiver, time(end), phase)),
        });
        thrower = receiver;
        start += PASS_EVERY;
    }
    SampleMatch {
        home: TrackingTable {
            side: Team::Home,
            rows: rows(Team::Home),
        },
        away: TrackingTable {
            side: Team::Away,
            rows: rows(Team::Away),
        },
        events,
    }
}

impl SampleMatch {
    /// Writes the three tables into `dir` (created if needed) in the layout of [`MatchInput::from_dir`].
    pub fn write_to(&self, dir: &Path) -> Result<MatchInput, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let input = MatchInput::from_dir(dir);
        let create = |p: &Path| std::fs::File::create(p).map_err(|e| CliError::io(p, e));
        write_events(&self.events, create(&input.event_data)?)?;
        write_tracking(&self.home, create(&input.tracking_home)?)?;
        write_tracking(&self.away, create(&input.tracking_away)?)?;
        Ok(input)
    }
}
