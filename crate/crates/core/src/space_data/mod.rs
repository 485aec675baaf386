//! Tracking and event ingestion into a single aligned, metric representation.
//!
//! Inputs are the preprocessed event table (one row per on-ball action) and
//! the per-side tracking tables (`Period`, `Time [s]`, `<Side>_<i>_x/y`,
//! `ball_x/y`). Everything downstream works in meters with the origin at
//! the field center and `x` along the field length.

mod config;
mod dataset;
mod disc;
mod events;
mod provider;
mod tracking;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Sport, SportConfig, TargetGeometry};
pub use dataset::{build_dataset, BuildOptions, DirectionConvention, FrameSnapshot, SpaceDataset};
pub use disc::{disc_holders, interpolate_disc, DiscTrack};
pub use events::{parse_events, write_events, EventRecord, EVENT_COLUMNS};
pub use provider::{normalize_coordinates, OriginConvention, ProviderSpec};
pub use tracking::{parse_tracking, write_tracking, TrackingRow, TrackingTable};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing mandatory column `{0}`")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("row {row}: unknown team `{value}` (expected Home or Away)")]
    UnknownTeam { row: usize, value: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("alignment failed: {0}")]
    Alignment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no possession events to anchor the disc")]
    NoPossessionEvents,

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Team {
    Home,
    Away,
}

impl Team {
    pub fn opponent(self) -> Team {
        match self {
            Team::Home => Team::Away,
            Team::Away => Team::Home,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Team::Home => "Home",
            Team::Away => "Away",
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Team {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Home" | "home" => Ok(Team::Home),
            "Away" | "away" => Ok(Team::Away),
            other => Err(other.to_string()),
        }
    }
}

/// A player slot: team plus zero-based column index (`Home_3` is `Home`, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlayerRef {
    pub team: Team,
    pub slot: usize,
}

impl PlayerRef {
    /// Resolves `Home_3`, `Away_12`, or a bare `3` (taken from `default_team`).
    pub fn parse(id: &str, default_team: Team) -> Option<PlayerRef> {
        let id = id.trim();
        let (team, number) = match id.split_once('_') {
            Some((team, number)) => (team.parse().ok()?, number),
            None => (default_team, id),
        };
        let number: usize = number.parse().ok()?;
        (number >= 1).then(|| PlayerRef {
            team,
            slot: number - 1,
        })
    }
}

impl fmt::Display for PlayerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.team, self.slot + 1)
    }
}

/// Shortest round-trip decimal, the canonical float form of every CSV we write.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v}")
}
