//! Pitch control, off-ball scoring opportunity, counterfactual timing and
//! ball-delivery control surfaces over a shared tracking-data model.

pub mod bimos;
pub mod crsv;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod kinematics;
pub mod obso;
pub mod pitch_control;
pub mod space_data;
pub mod state;

pub use error::ModelError;
pub use geometry::Vec2;
pub use state::{AttackDirection, GameState, PlayerState};
