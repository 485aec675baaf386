use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_receiver, disc_origin, reach_region, receiver_control, shift_trajectory, CrsvParams, Play};
use crate::error::ModelError;
use crate::pitch_control::GridSpec;
use crate::state::GameState;

/// Mean weighted receiver control over the reach region; 0 when the region is empty.
pub fn v_frame(state: &GameState, receiver: usize, spec: &GridSpec, params: &CrsvParams) -> Result<f64, ModelError> {
    params.validate()?;
    let (origin, skip) = disc_origin(state, params)?;
    check_receiver(state, receiver, skip)?;
    let region = reach_region(state, receiver, spec, params)?;
    if region.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = region
        .cells
        .par_iter()
        .map(|&i| receiver_control(state, receiver, spec.center(i), origin, skip, params).1)
        .sum();
    Ok(sum / region.len() as f64)
}

/// Moving-average peak of a frame-value series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioValue {
    pub value: f64,
    /// First frame of the best window.
    pub argmax_frame: usize,
    /// First frame of `series`.
    pub start_frame: usize,
    /// V_frame from `start_frame` to the end of the play.
    pub series: Vec<f64>,
}

/// Highest mean of `series` over `window` consecutive entries; ties go to the earliest.
pub(crate) fn max_moving_average(series: &[f64], window: usize) -> Result<(f64, usize), ModelError> {
    if window == 0 || series.len() < window {
        return Err(ModelError::InsufficientFrames {
            needed: window.max(1),
            got: series.len(),
        });
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, w) in series.windows(window).enumerate() {
        let mean = w.iter().sum::<f64>() / window as f64;
        if mean > best.0 {
            best = (mean, i);
        }
    }
    Ok(best)
}

/// V_frame of every frame from `start_frame` to the end of the play.
pub fn vframe_series(
    play: &Play,
    receiver: usize,
    start_frame: usize,
    spec: &GridSpec,
    params: &CrsvParams,
) -> Result<Vec<f64>, ModelError> {
    play.validate()?;
    (start_frame..play.len())
        .into_par_iter()
        .map(|f| v_frame(&play.state(f), receiver, spec, params))
        .collect()
}

/// Scenario value of `play` from `start_frame` on.
pub fn v_scenario(
    play: &Play,
    receiver: usize,
    start_frame: usize,
    spec: &GridSpec,
    params: &CrsvParams,
) -> Result<ScenarioValue, ModelError> {
    play.validate()?;
    let window = params.weights.window;
    let available = play.len().saturating_sub(start_frame);
    if available < window {
        return Err(ModelError::InsufficientFrames {
            needed: window,
            got: available,
        });
    }
    let series = vframe_series(play, receiver, start_frame, spec, params)?;
    let (value, offset) = max_moving_average(&series, window)?;
    Ok(ScenarioValue {
        value,
        argmax_frame: start_frame + offset,
        start_frame,
        series,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub xi: i64,
    pub v_scenario: f64,
    pub argmax_frame: usize,
    pub velocity_fallback: bool,
    pub series: Vec<f64>,
    pub start_frame: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    /// Realized scenario value minus the best counterfactual.
    pub v_timing: f64,
    pub best_alternative: i64,
    /// One record per offset, ascending.
    pub scenarios: Vec<ScenarioRecord>,
}

impl TimingReport {
    pub fn actual(&self) -> Option<&ScenarioRecord> {
        self.scenarios.iter().find(|s| s.xi == 0)
    }
}

/// Scores every offset in the configured range and compares the realized run with the best alternative.
///
/// Offsets that would start the run outside the play are skipped. Each
/// scenario is valued from its own initiation frame `t0 + xi`.
pub fn v_timing(play: &Play, receiver: usize, spec: &GridSpec, params: &CrsvParams) -> Result<TimingReport, ModelError> {
    params.validate()?;
    play.validate()?;
    let mut offsets: Vec<i64> = params.weights.xi_range.clone();
    offsets.sort_unstable();
    offsets.dedup();
    let t0 = play.t0 as i64;
    let n = play.len() as i64;
    offsets.retain(|&xi| (0..n).contains(&(t0 + xi)));
    if !offsets.iter().any(|&xi| xi != 0) {
        return Err(ModelError::Config("xi range has no usable nonzero offset".into()));
    }
    let max_speed = params.ppcf.attacker.max_speed;
    let scenarios = offsets
        .par_iter()
        .map(|&xi| {
            let cf = shift_trajectory(play, receiver, xi, max_speed)?;
            let start = (t0 + xi) as usize;
            let value = v_scenario(&cf.play, receiver, start, spec, params)?;
            Ok(ScenarioRecord {
                xi,
                v_scenario: value.value,
                argmax_frame: value.argmax_frame,
                velocity_fallback: cf.velocity_fallback,
                series: value.series,
                start_frame: start,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let actual = scenarios.iter().find(|s| s.xi == 0).map(|s| s.v_scenario).unwrap_or(0.0);
    let best = scenarios
        .iter()
        .filter(|s| s.xi != 0)
        .fold(None::<&ScenarioRecord>, |best, s| match best {
            Some(b) if b.v_scenario >= s.v_scenario => Some(b),
            _ => Some(s),
        })
        .expect("a nonzero offset is present");
    Ok(TimingReport {
        v_timing: actual - best.v_scenario,
        best_alternative: best.xi,
        scenarios,
    })
}
