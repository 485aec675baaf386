//! Off-ball scoring opportunity: score × control × transition per cell.
//!
//! The three factors are treated as independent, so the scoring probability
//! of a frame is `sum_r P(G_r) * P(C_r) * P(T_r)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Vec2;
use crate::pitch_control::{fingerprint, ppcf_grid, ControlGrid, GridMeta, GridSpec, PpcfParams, ScalarField};
use crate::space_data::{Sport, SportConfig, TargetGeometry};
use crate::state::{AttackDirection, GameState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreParams {
    /// logistic midpoint distance, meters
    pub d0: f64,
    /// logistic scale, meters
    pub beta: f64,
    /// end-zone decay length, meters
    pub sigma_g: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            d0: 18.0,
            beta: 4.0,
            sigma_g: 25.0,
        }
    }
}

impl ScoreParams {
    pub fn for_sport(sport: Sport) -> Self {
        match sport {
            Sport::Basketball => ScoreParams {
                d0: 6.75,
                beta: 1.5,
                ..Default::default()
            },
            _ => ScoreParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [("d0", self.d0), ("beta", self.beta), ("sigma_g", self.sigma_g)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::Config(format!("score parameter {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsoParams {
    pub ppcf: PpcfParams,
    /// transition kernel length, meters
    pub sigma_t: f64,
    pub score: ScoreParams,
}

impl ObsoParams {
    pub fn from_config(config: &SportConfig) -> Self {
        ObsoParams {
            ppcf: PpcfParams::from_config(config),
            sigma_t: match config.sport {
                Sport::Ultimate => 18.0,
                _ => 14.0,
            },
            score: ScoreParams::for_sport(config.sport),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.ppcf.validate()?;
        self.score.validate()?;
        if !(self.sigma_t > 0.0 && self.sigma_t.is_finite()) {
            return Err(ModelError::Config(format!("sigma_t must be > 0, got {}", self.sigma_t)));
        }
        Ok(())
    }
}

/// Where the next on-ball event is likely to happen. Sums to 1 over unmasked cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSurface {
    pub field: ScalarField,
    /// Sum of the unnormalized density.
    pub normalization: f64,
}

/// Probability of scoring from each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSurface {
    pub field: ScalarField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObsoSurface {
    pub field: ScalarField,
    /// Scoring probability of the frame.
    pub total: f64,
}

/// Transition density from an already computed control grid.
pub fn transition_from_control(ball: Vec2, control: &ControlGrid, sigma_t: f64) -> Result<TransitionSurface, ModelError> {
    let spec = &control.spec;
    let mut values = vec![0.0; spec.len()];
    for i in spec.unmasked() {
        let d = spec.center(i).distance(ball);
        values[i] = (-d / sigma_t).exp() * control.attack[i];
    }
    let normalization: f64 = values.iter().sum();
    if !(normalization > 0.0 && normalization.is_finite()) {
        return Err(ModelError::DegenerateFrame("transition density is zero everywhere".into()));
    }
    for v in &mut values {
        *v /= normalization;
    }
    Ok(TransitionSurface {
        field: ScalarField {
            spec: spec.clone(),
            values,
            meta: GridMeta {
                frame: control.meta.frame,
                model: "transition".into(),
                params_hash: fingerprint(&(sigma_t, &control.meta.params_hash)),
            },
        },
        normalization,
    })
}

pub fn transition_surface(state: &GameState, spec: &GridSpec, params: &ObsoParams) -> Result<TransitionSurface, ModelError> {
    params.validate()?;
    let ball = state.ball.ok_or(ModelError::MissingBall)?;
    let control = ppcf_grid(state, spec, &params.ppcf)?;
    transition_from_control(ball, &control, params.sigma_t)
}

fn logistic_score(d: f64, p: &ScoreParams) -> f64 {
    1.0 / (1.0 + ((d - p.d0) / p.beta).exp())
}

/// Score value at a point for a team attacking in `direction`.
pub fn score_at(config: &SportConfig, p: Vec2, params: &ScoreParams, direction: AttackDirection) -> f64 {
    let sign = direction.sign();
    let end = config.half_length();
    match config.target {
        TargetGeometry::Goal { .. } => logistic_score(p.distance(Vec2::new(sign * end, 0.0)), params),
        TargetGeometry::Basket { offset } => {
            logistic_score(p.distance(Vec2::new(sign * (end - offset), 0.0)), params)
        }
        TargetGeometry::EndZone { depth } => {
            let d_ez = (end - depth) - sign * p.x;
            if d_ez <= 0.0 {
                1.0
            } else {
                (-d_ez / params.sigma_g).exp()
            }
        }
    }
}

pub fn score_surface(
    config: &SportConfig,
    spec: &GridSpec,
    params: &ScoreParams,
    direction: AttackDirection,
) -> ScoreSurface {
    let values = (0..spec.len())
        .map(|i| if spec.is_masked(i) { 0.0 } else { score_at(config, spec.center(i), params, direction) })
        .collect();
    ScoreSurface {
        field: ScalarField {
            spec: spec.clone(),
            values,
            meta: GridMeta {
                frame: None,
                model: "score".into(),
                params_hash: fingerprint(&(config.sport, params, direction)),
            },
        },
    }
}

/// Cell-wise product of the three factors. All three must share one geometry.
pub fn compose_obso(
    score: &ScoreSurface,
    control: &ControlGrid,
    transition: &TransitionSurface,
) -> Result<ObsoSurface, ModelError> {
    let spec = &control.spec;
    if !spec.same_geometry(&score.field.spec) || !spec.same_geometry(&transition.field.spec) {
        return Err(ModelError::GridMismatch("score, control and transition grids differ".into()));
    }
    let mut values = vec![0.0; spec.len()];
    for i in spec.unmasked() {
        values[i] = score.field.values[i] * control.attack[i] * transition.field.values[i];
    }
    let field = ScalarField {
        spec: spec.clone(),
        values,
        meta: GridMeta {
            frame: control.meta.frame,
            model: "obso".into(),
            params_hash: fingerprint(&(
                &score.field.meta.params_hash,
                &control.meta.params_hash,
                &transition.field.meta.params_hash,
            )),
        },
    };
    let total = field.total();
    Ok(ObsoSurface { field, total })
}

pub fn obso_surface(
    state: &GameState,
    spec: &GridSpec,
    config: &SportConfig,
    params: &ObsoParams,
) -> Result<ObsoSurface, ModelError> {
    params.validate()?;
    let ball = state.ball.ok_or(ModelError::MissingBall)?;
    let control = ppcf_grid(state, spec, &params.ppcf)?;
    let transition = transition_from_control(ball, &control, params.sigma_t)?;
    let score = score_surface(config, spec, &params.score, state.direction);
    compose_obso(&score, &control, &transition)
}

/// Surfaces keyed by `(frame, params hash)`; readers never block each other.
#[derive(Debug, Default)]
pub struct SurfaceCache {
    inner: RwLock<HashMap<(usize, String), Arc<ObsoSurface>>>,
}

impl SurfaceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, frame: usize, params_hash: &str) -> Option<Arc<ObsoSurface>> {
        let map = self.inner.read().unwrap_or_else(|e| e.into_inner());
        map.get(&(frame, params_hash.to_string())).cloned()
    }

    /// Returns the cached surface, computing it with `make` on a miss.
    pub fn get_or_insert_with<F>(&self, frame: usize, params_hash: &str, make: F) -> Result<Arc<ObsoSurface>, ModelError>
    where
        F: FnOnce() -> Result<ObsoSurface, ModelError>,
    {
        if let Some(hit) = self.get(frame, params_hash) {
            return Ok(hit);
        }
        let surface = Arc::new(make()?);
        let mut map = self.inner.write().unwrap_or_else(|e| e.into_inner());
        Ok(map
            .entry((frame, params_hash.to_string()))
            .or_insert(surface)
            .clone())
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PlayerState;

    fn soccer_spec() -> (SportConfig, GridSpec) {
        let c = SportConfig::soccer();
        let g = GridSpec::for_field(&c, 30, 20).unwrap();
        (c, g)
    }

    #[test]
    fn uniform_control_gives_normalized_kernel() {
        let (_, g) = soccer_spec();
        let ball = Vec2::new(12.0, -7.0);
        let t = transition_from_control(ball, &ControlGrid::uniform(g.clone(), 1.0, 0.0), 14.0).unwrap();
        let kernel: Vec<f64> = g.centers().map(|c| (-c.distance(ball) / 14.0).exp()).collect();
        let z: f64 = kernel.iter().sum();
        for (v, k) in t.field.values.iter().zip(&kernel) {
            assert!((v - k / z).abs() < 1e-15);
        }
        assert!((t.field.total() - 1.0).abs() < 1e-9);
        let argmax = (0..g.len())
            .max_by(|&a, &b| t.field.values[a].total_cmp(&t.field.values[b]))
            .unwrap();
        assert!(g.center(argmax).distance(ball) <= 14.0);
    }

    #[test]
    fn zero_control_is_degenerate() {
        let (_, g) = soccer_spec();
        let r = transition_from_control(Vec2::ZERO, &ControlGrid::uniform(g, 0.0, 1.0), 14.0);
        assert!(matches!(r, Err(ModelError::DegenerateFrame(_))));
    }

    #[test]
    fn score_examples() {
        let c = SportConfig::soccer();
        let p = ScoreParams::default();
        let at_d0 = score_at(&c, Vec2::new(52.5 - 18.0, 0.0), &p, AttackDirection::Positive);
        assert!((at_d0 - 0.5).abs() < 1e-15);

        let u = SportConfig::ultimate();
        let inside = Vec2::new(u.half_length() - 5.0, 10.0);
        assert_eq!(score_at(&u, inside, &p, AttackDirection::Positive), 1.0);
        assert!(score_at(&u, inside, &p, AttackDirection::Negative) < 0.05);
    }

    #[test]
    fn score_symmetric_about_long_axis() {
        for c in [SportConfig::soccer(), SportConfig::ultimate(), SportConfig::basketball()] {
            let g = GridSpec::default_for(&c).unwrap();
            let s = score_surface(&c, &g, &ScoreParams::for_sport(c.sport), AttackDirection::Positive);
            for i in 0..g.len() {
                assert!((s.field.values[i] - s.field.values[g.reflect_y_index(i)]).abs() <= 1e-12);
                assert!((0.0..=1.0).contains(&s.field.values[i]));
            }
        }
    }

    #[test]
    fn soccer_score_decreases_along_rays() {
        let c = SportConfig::soccer();
        let p = ScoreParams::default();
        let goal = Vec2::new(52.5, 0.0);
        for k in 0..16 {
            let a = std::f64::consts::PI * (0.5 + k as f64 / 15.0);
            let dir = Vec2::new(a.cos(), a.sin());
            let mut prev = f64::INFINITY;
            for step in 0..60 {
                let v = score_at(&c, goal + dir * (step as f64), &p, AttackDirection::Positive);
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn zero_score_annihilates() {
        let (_, g) = soccer_spec();
        let control = ControlGrid::uniform(g.clone(), 0.7, 0.3);
        let t = transition_from_control(Vec2::ZERO, &control, 14.0).unwrap();
        let score = ScoreSurface {
            field: ScalarField {
                spec: g.clone(),
                values: vec![0.0; g.len()],
                meta: GridMeta::default(),
            },
        };
        let o = compose_obso(&score, &control, &t).unwrap();
        assert_eq!(o.total, 0.0);
        assert!(o.field.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_score_and_transition_identity() {
        let (_, g) = soccer_spec();
        let n = g.len();
        let control = ControlGrid {
            attack: (0..n).map(|i| (i as f64 * 0.37).sin().abs()).collect(),
            ..ControlGrid::uniform(g.clone(), 0.0, 0.0)
        };
        let flat = |v: f64| ScalarField {
            spec: g.clone(),
            values: vec![v; n],
            meta: GridMeta::default(),
        };
        let t = TransitionSurface {
            field: flat(1.0 / n as f64),
            normalization: 1.0,
        };
        let o = compose_obso(&ScoreSurface { field: flat(0.4) }, &control, &t).unwrap();
        let mean: f64 = control.attack.iter().sum::<f64>() / n as f64;
        assert!((o.total - 0.4 * mean).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let (_, g) = soccer_spec();
        let other = GridSpec::new(10, 10, 105.0, 68.0).unwrap();
        let control = ControlGrid::uniform(g.clone(), 1.0, 0.0);
        let t = transition_from_control(Vec2::ZERO, &control, 14.0).unwrap();
        let s = score_surface(&SportConfig::soccer(), &other, &ScoreParams::default(), AttackDirection::Positive);
        assert!(matches!(compose_obso(&s, &control, &t), Err(ModelError::GridMismatch(_))));
    }

    #[test]
    fn cache_returns_the_same_surface() {
        let (c, g) = soccer_spec();
        let state = GameState {
            attackers: vec![PlayerState::at(Vec2::new(30.0, 0.0))],
            defenders: vec![PlayerState::at(Vec2::new(40.0, 5.0))],
            ball: Some(Vec2::new(25.0, 0.0)),
            ..Default::default()
        };
        let params = ObsoParams::from_config(&c);
        let cache = SurfaceCache::new();
        let hash = fingerprint(&params);
        let a = cache.get_or_insert_with(0, &hash, || obso_surface(&state, &g, &c, &params)).unwrap();
        let b = cache
            .get_or_insert_with(0, &hash, || Err(ModelError::EmptySurface))
            .unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }
}
