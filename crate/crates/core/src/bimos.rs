//! Ball-delivery control: the race is run against the moving ball, so a
//! defender standing on the passing lane can intercept before the target.
//!
//! `pbcf` integrates over `0 <= T <= T_flight` with each player's arrival
//! time measured to where the ball is at `T`. BIMOS multiplies the score
//! surface by the pass and dribble variants and combines the two.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Vec2;
use crate::kinematics;
use crate::obso::{score_surface, ObsoParams, ScoreParams};
use crate::pitch_control::{
    fingerprint, integrate_race, ppcf_grid, racers, ControlGrid, GridMeta, GridSpec, Integration, PointControl,
    PpcfParams, Racer, ScalarField,
};
use crate::space_data::SportConfig;
use crate::state::GameState;

/// Which attackers take part in a dribble race.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DribbleSet {
    #[default]
    CarrierOnly,
    AllAttackers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Combine {
    /// `w_pass * pass + w_dribble * dribble`
    Mix { w_pass: f64, w_dribble: f64 },
    /// Larger of the two components per cell.
    Max,
}

impl Default for Combine {
    fn default() -> Self {
        Combine::Mix {
            w_pass: 0.8,
            w_dribble: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delivery {
    Pass,
    Dribble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbcfParams {
    pub ppcf: PpcfParams,
    /// m/s
    pub pass_speed: f64,
    /// m/s
    pub dribble_speed: f64,
    pub dribble_set: DribbleSet,
    /// Dribble targets farther than this from the carrier get no control, meters.
    pub dribble_radius: f64,
    pub combine: Combine,
    pub score: ScoreParams,
}

impl PbcfParams {
    pub fn from_config(config: &SportConfig) -> Self {
        PbcfParams {
            ppcf: PpcfParams::from_config(config),
            pass_speed: config.ball.speed,
            dribble_speed: config.ball.dribble_speed,
            dribble_set: DribbleSet::default(),
            dribble_radius: 15.0,
            combine: Combine::default(),
            score: ScoreParams::for_sport(config.sport),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.ppcf.validate()?;
        self.score.validate()?;
        for (name, v) in [
            ("pass_speed", self.pass_speed),
            ("dribble_speed", self.dribble_speed),
            ("dribble_radius", self.dribble_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if let Combine::Mix { w_pass, w_dribble } = self.combine {
            if w_pass < 0.0 || w_dribble < 0.0 || (w_pass + w_dribble - 1.0).abs() > 1e-9 {
                return Err(ModelError::Config(format!(
                    "mixture weights must be >= 0 and sum to 1, got {w_pass} + {w_dribble}"
                )));
            }
        }
        Ok(())
    }

    fn speed(&self, delivery: Delivery) -> f64 {
        match delivery {
            Delivery::Pass => self.pass_speed,
            Delivery::Dribble => self.dribble_speed,
        }
    }
}

/// Racers for one delivery, plus the attacker index each entry stands for.
fn delivery_racers(state: &GameState, params: &PbcfParams, delivery: Delivery) -> (Vec<Racer>, Vec<Option<usize>>) {
    let carrier = state.ball_carrier();
    let all = racers(state, &params.ppcf, None);
    let mut kept = Vec::with_capacity(all.len());
    let mut index = Vec::with_capacity(all.len());
    for (i, r) in all.into_iter().enumerate() {
        let attacker = (i < state.attackers.len()).then_some(i);
        let keep = match (attacker, delivery, params.dribble_set) {
            (None, _, _) => true,
            // the passer cannot receive their own pass
            (Some(a), Delivery::Pass, _) => Some(a) != carrier,
            (Some(a), Delivery::Dribble, DribbleSet::CarrierOnly) => Some(a) == carrier,
            (Some(_), Delivery::Dribble, DribbleSet::AllAttackers) => true,
        };
        if keep {
            kept.push(r);
            index.push(attacker);
        }
    }
    (kept, index)
}

fn degenerate(state: &GameState, flight_time: f64) -> PointControl {
    PointControl {
        attackers: vec![0.0; state.attackers.len()],
        defenders: vec![0.0; state.defenders.len()],
        flight_time,
        flagged: true,
    }
}

/// Control of a delivery from the ball's position to `target`.
///
/// A zero-length delivery integrates over an empty interval and comes back
/// all zero and flagged, as does a dribble beyond the dribble radius
/// (unflagged) or a flight longer than `t_max` (truncated, flagged).
pub fn pbcf_at(state: &GameState, target: Vec2, params: &PbcfParams, delivery: Delivery) -> Result<PointControl, ModelError> {
    params.validate()?;
    let ball = state.ball.ok_or(ModelError::MissingBall)?;
    Ok(pbcf_point(state, ball, target, params, delivery))
}

fn pbcf_point(state: &GameState, ball: Vec2, target: Vec2, params: &PbcfParams, delivery: Delivery) -> PointControl {
    let distance = ball.distance(target);
    let flight_time = distance / params.speed(delivery);
    if flight_time == 0.0 {
        return degenerate(state, 0.0);
    }
    if delivery == Delivery::Dribble {
        let carrier = state.ball_carrier().map(|c| state.attackers[c].position).unwrap_or(ball);
        if carrier.distance(target) > params.dribble_radius {
            return PointControl {
                flagged: false,
                ..degenerate(state, flight_time)
            };
        }
    }
    let (racers, index) = delivery_racers(state, params, delivery);
    // without an early exit the result is monotone in the set of racers
    let integration = Integration {
        stop_threshold: f64::INFINITY,
        ..params.ppcf.integration
    };
    let t_end = flight_time.min(integration.t_max);
    let p = integrate_race(&racers, 0.0, t_end, &integration, params.ppcf.interference, |j, t| {
        let at = ball.lerp(target, (t / flight_time).min(1.0));
        let r = &racers[j];
        kinematics::expected_arrival_time(r.position, r.velocity, at, &r.params)
    });
    let mut attackers = vec![0.0; state.attackers.len()];
    let mut defenders = Vec::with_capacity(state.defenders.len());
    for (v, slot) in p.iter().zip(&index) {
        match slot {
            Some(a) => attackers[*a] = *v,
            None => defenders.push(*v),
        }
    }
    PointControl {
        attackers,
        defenders,
        flight_time,
        flagged: flight_time > integration.t_max,
    }
}

pub fn pbcf_surface(
    state: &GameState,
    spec: &GridSpec,
    params: &PbcfParams,
    delivery: Delivery,
) -> Result<ControlGrid, ModelError> {
    params.validate()?;
    let ball = state.ball.ok_or(ModelError::MissingBall)?;
    let meta = GridMeta {
        frame: state.frame,
        model: match delivery {
            Delivery::Pass => "pbcf_pass".into(),
            Delivery::Dribble => "pbcf_dribble".into(),
        },
        params_hash: fingerprint(params),
    };
    Ok(ControlGrid::evaluate(spec.clone(), meta, |target| {
        let pc = pbcf_point(state, ball, target, params, delivery);
        (pc.attack(), pc.defend(), pc.flagged)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BimosSurface {
    /// score × pass PBCF
    pub pass: ScalarField,
    /// score × dribble PBCF
    pub dribble: ScalarField,
    pub combined: ScalarField,
    /// Per-cell mean of `combined` over unmasked cells.
    pub scalar: f64,
}

/// Combines two component fields cell-wise.
pub fn combine_components(pass: &ScalarField, dribble: &ScalarField, combine: Combine) -> Result<ScalarField, ModelError> {
    if !pass.spec.same_geometry(&dribble.spec) {
        return Err(ModelError::GridMismatch("pass and dribble grids differ".into()));
    }
    let values = pass
        .values
        .iter()
        .zip(&dribble.values)
        .map(|(&p, &d)| match combine {
            Combine::Mix { w_pass, w_dribble } => w_pass * p + w_dribble * d,
            Combine::Max => p.max(d),
        })
        .collect();
    Ok(ScalarField {
        spec: pass.spec.clone(),
        values,
        meta: GridMeta {
            frame: pass.meta.frame,
            model: "bimos".into(),
            params_hash: fingerprint(&(&pass.meta.params_hash, &dribble.meta.params_hash, combine)),
        },
    })
}

pub fn bimos_surface(
    state: &GameState,
    spec: &GridSpec,
    config: &SportConfig,
    params: &PbcfParams,
) -> Result<BimosSurface, ModelError> {
    let score = score_surface(config, spec, &params.score, state.direction);
    let component = |delivery: Delivery| -> Result<ScalarField, ModelError> {
        let grid = pbcf_surface(state, spec, params, delivery)?;
        let values = (0..spec.len())
            .map(|i| if spec.is_masked(i) { 0.0 } else { score.field.values[i] * grid.attack[i] })
            .collect();
        Ok(ScalarField {
            spec: spec.clone(),
            values,
            meta: grid.meta,
        })
    };
    let pass = component(Delivery::Pass)?;
    let dribble = component(Delivery::Dribble)?;
    let combined = combine_components(&pass, &dribble, params.combine)?;
    let scalar = combined.mean()?;
    Ok(BimosSurface {
        pass,
        dribble,
        combined,
        scalar,
    })
}

/// Side-by-side view of PPCF × transition and pass PBCF on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceComparison {
    /// Attacker PPCF times the normalized transition density.
    pub ppcf_transition: ScalarField,
    /// Attacker pass PBCF.
    pub pbcf: ScalarField,
    /// Pearson correlation over unmasked cells; `None` if either is constant.
    pub correlation: Option<f64>,
    pub mean_abs_diff: f64,
}

pub fn compare_surfaces(
    state: &GameState,
    spec: &GridSpec,
    obso: &ObsoParams,
    pbcf: &PbcfParams,
) -> Result<SurfaceComparison, ModelError> {
    obso.validate()?;
    let ball = state.ball.ok_or(ModelError::MissingBall)?;
    let control = ppcf_grid(state, spec, &obso.ppcf)?;
    let transition = crate::obso::transition_from_control(ball, &control, obso.sigma_t)?;
    let product: Vec<f64> = (0..spec.len())
        .map(|i| control.attack[i] * transition.field.values[i])
        .collect();
    let pb = pbcf_surface(state, spec, pbcf, Delivery::Pass)?;
    let cells: Vec<usize> = spec.unmasked().collect();
    if cells.is_empty() {
        return Err(ModelError::EmptySurface);
    }
    let a: Vec<f64> = cells.iter().map(|&i| product[i]).collect();
    let b: Vec<f64> = cells.iter().map(|&i| pb.attack[i]).collect();
    let mean_abs_diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / cells.len() as f64;
    Ok(SurfaceComparison {
        ppcf_transition: ScalarField {
            spec: spec.clone(),
            values: product,
            meta: GridMeta {
                frame: state.frame,
                model: "ppcf_transition".into(),
                params_hash: fingerprint(obso),
            },
        },
        correlation: crate::evaluation::pearson(&a, &b),
        pbcf: ScalarField {
            spec: spec.clone(),
            values: pb.attack,
            meta: pb.meta,
        },
        mean_abs_diff,
    })
}
