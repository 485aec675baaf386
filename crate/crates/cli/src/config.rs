//! Run configuration: a TOML file (optional) overlaid by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spacefield::bimos::{Combine, PbcfParams};
use spacefield::crsv::CrsvParams;
use spacefield::evaluation::RatioParams;
use spacefield::obso::ObsoParams;
use spacefield::pitch_control::{GridSpec, PpcfParams};
use spacefield::space_data::{Sport, SportConfig};

use crate::CliError;

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "SPACEFIELD_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceModel {
    Ppcf,
    Obso,
    Wuppcf,
    Bimos,
}

impl SpaceModel {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceModel::Ppcf => "ppcf",
            SpaceModel::Obso => "obso",
            SpaceModel::Wuppcf => "wuppcf",
            SpaceModel::Bimos => "bimos",
        }
    }
}

impl fmt::Display for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceModel {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ppcf" => Ok(SpaceModel::Ppcf),
            "obso" => Ok(SpaceModel::Obso),
            "wuppcf" | "uppcf" => Ok(SpaceModel::Wuppcf),
            "bimos" | "pbcf" => Ok(SpaceModel::Bimos),
            other => Err(CliError::Config(format!("unknown space model `{other}`"))),
        }
    }
}

/// Half-open frame range `a:b`; either end may be omitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrameRange {
    pub start: Option<usize>,
    pub end: Option<usize>,
}

impl FrameRange {
    pub fn resolve(&self, len: usize) -> Result<std::ops::Range<usize>, CliError> {
        let start = self.start.unwrap_or(0);
        let end = self.end.unwrap_or(len);
        if start >= end || end > len {
            return Err(CliError::Config(format!("frames {start}:{end} outside 0:{len}")));
        }
        Ok(start..end)
    }
}

impl FromStr for FrameRange {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliError::Config(format!("frame range `{s}` is not `a:b`"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let end = |t: &str| -> Result<Option<usize>, CliError> {
            let t = t.trim();
            if t.is_empty() {
                Ok(None)
            } else {
                t.parse().map(Some).map_err(|_| bad())
            }
        };
        Ok(FrameRange {
            start: end(a)?,
            end: end(b)?,
        })
    }
}

/// Offsets `min:max:step`, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiRange {
    pub min: i64,
    pub max: i64,
    pub step: i64,
}

impl XiRange {
    pub fn offsets(&self) -> Vec<i64> {
        let mut out: Vec<i64> = (0..)
            .map(|k| self.min + k * self.step)
            .take_while(|&x| x <= self.max)
            .collect();
        if !out.contains(&0) {
            out.push(0);
            out.sort_unstable();
        }
        out
    }
}

impl FromStr for XiRange {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliError::Config(format!("xi range `{s}` is not `min:max:step`"));
        let parts: Vec<i64> = s
            .split(':')
            .map(|p| p.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match parts[..] {
            [min, max, step] if step > 0 && min <= max => Ok(XiRange { min, max, step }),
            _ => Err(bad()),
        }
    }
}

/// Grid resolution `NXxNY` (also accepts `×`).
pub fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("grid `{s}` is not `NXxNY`"));
    let (a, b) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(bad)?;
    let nx = a.trim().parse().map_err(|_| bad())?;
    let ny = b.trim().parse().map_err(|_| bad())?;
    if nx == 0 || ny == 0 {
        return Err(bad());
    }
    Ok((nx, ny))
}

/// One match: the three input tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchInput {
    pub id: String,
    pub event_data: PathBuf,
    pub tracking_home: PathBuf,
    pub tracking_away: PathBuf,
}

impl MatchInput {
    /// A match directory holding `events.csv`, `tracking_home.csv` and `tracking_away.csv`.
    pub fn from_dir(dir: &Path) -> MatchInput {
        MatchInput {
            id: dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "match".into()),
            event_data: dir.join("events.csv"),
            tracking_home: dir.join("tracking_home.csv"),
            tracking_away: dir.join("tracking_away.csv"),
        }
    }
}

/// Parameter overrides; unset fields keep the sport defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOverrides {
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub ball_speed: Option<f64>,
    pub dribble_speed: Option<f64>,
    pub reaction_time: Option<f64>,
    pub max_speed: Option<f64>,
    pub sigma_t: Option<f64>,
    pub tau: Option<f64>,
    pub delta: Option<f64>,
    pub window: Option<usize>,
    pub bimos_combine: Option<String>,
    pub w_pass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub space_model: SpaceModel,
    pub sport: Sport,
    pub provider: String,
    pub inputs: Vec<MatchInput>,
    /// Every subdirectory is a match (see [`MatchInput::from_dir`]).
    pub input_dir: Option<PathBuf>,
    pub out_path: PathBuf,
    pub grid: Option<(usize, usize)>,
    pub frames: FrameRange,
    /// Use every n-th selected frame.
    pub frame_step: usize,
    pub receiver: Option<String>,
    pub initiation_frame: Option<usize>,
    pub xi_range: Option<XiRange>,
    pub jobs: Option<usize>,
    pub render: bool,
    pub params: ModelOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            space_model: SpaceModel::Ppcf,
            sport: Sport::Ultimate,
            provider: "metric".into(),
            inputs: Vec::new(),
            input_dir: None,
            out_path: PathBuf::new(),
            grid: None,
            frames: FrameRange::default(),
            frame_step: 1,
            receiver: None,
            initiation_frame: None,
            xi_range: None,
            jobs: None,
            render: false,
            params: ModelOverrides::default(),
        }
    }
}

/// Fully resolved model parameters for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedParams {
    pub sport: SportConfig,
    pub grid: GridSpec,
    pub ppcf: PpcfParams,
    pub obso: ObsoParams,
    pub crsv: CrsvParams,
    pub pbcf: PbcfParams,
    pub ratio: RatioParams,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    /// All match inputs, explicit ones first, then `input_dir` subdirectories by name.
    pub fn matches(&self) -> Result<Vec<MatchInput>, CliError> {
        let mut out = self.inputs.clone();
        if let Some(dir) = &self.input_dir {
            let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io {
                path: dir.clone(),
                source: e,
            })?;
            let mut dirs: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            dirs.sort();
            out.extend(dirs.iter().map(|d| MatchInput::from_dir(d)));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.out_path.as_os_str().is_empty() {
            return Err(CliError::Config("out_path is empty".into()));
        }
        if self.inputs.is_empty() && self.input_dir.is_none() {
            return Err(CliError::Config("no inputs given".into()));
        }
        for m in &self.inputs {
            for p in [&m.event_data, &m.tracking_home, &m.tracking_away] {
                if p.as_os_str().is_empty() {
                    return Err(CliError::Config(format!("match `{}` has an empty input path", m.id)));
                }
            }
        }
        if self.frame_step == 0 {
            return Err(CliError::Config("frame_step must be >= 1".into()));
        }
        if self.initiation_frame.is_some() != self.receiver.is_some() {
            return Err(CliError::Config("receiver and initiation frame go together".into()));
        }
        if self.receiver.is_some() && self.space_model != SpaceModel::Wuppcf {
            return Err(CliError::Config("timing analysis needs the wuppcf model".into()));
        }
        self.resolve()?;
        Ok(())
    }

    pub fn resolve(&self) -> Result<ResolvedParams, CliError> {
        let sport = SportConfig::for_sport(self.sport);
        let (nx, ny) = self.grid.unwrap_or(sport.grid);
        let grid = GridSpec::for_field(&sport, nx, ny)?;
        let o = &self.params;
        let mut ppcf = PpcfParams::from_config(&sport);
        if let Some(v) = o.dt {
            ppcf.integration.dt = v;
        }
        if let Some(v) = o.t_max {
            ppcf.integration.t_max = v;
        }
        if let Some(v) = o.ball_speed {
            ppcf.ball.speed = v;
        }
        if let Some(v) = o.dribble_speed {
            ppcf.ball.dribble_speed = v;
        }
        for p in [&mut ppcf.attacker, &mut ppcf.defender] {
            if let Some(v) = o.reaction_time {
                p.reaction_time = v;
            }
            if let Some(v) = o.max_speed {
                p.max_speed = v;
            }
        }
        let mut obso = ObsoParams::from_config(&sport);
        obso.ppcf = ppcf.clone();
        if let Some(v) = o.sigma_t {
            obso.sigma_t = v;
        }
        let mut crsv = CrsvParams::from_config(&sport);
        crsv.ppcf = ppcf.clone();
        if let Some(w) = o.window {
            crsv.weights.window = w;
        }
        if let Some(xi) = self.xi_range {
            crsv.weights.xi_range = xi.offsets();
        }
        let mut pbcf = PbcfParams::from_config(&sport);
        pbcf.ppcf = ppcf.clone();
        pbcf.pass_speed = ppcf.ball.speed;
        pbcf.dribble_speed = ppcf.ball.dribble_speed;
        pbcf.combine = match (o.bimos_combine.as_deref(), o.w_pass) {
            (Some("max"), _) => Combine::Max,
            (None | Some("mix"), Some(w)) => Combine::Mix {
                w_pass: w,
                w_dribble: 1.0 - w,
            },
            (None | Some("mix"), None) => Combine::default(),
            (Some(other), _) => {
                return Err(CliError::Config(format!("bimos combine must be mix or max, got `{other}`")));
            }
        };
        let mut ratio = RatioParams::default();
        if let Some(v) = o.tau {
            ratio.tau = v;
        }
        if let Some(v) = o.delta {
            ratio.delta = v;
        }
        ppcf.validate()?;
        obso.validate()?;
        crsv.validate()?;
        pbcf.validate()?;
        Ok(ResolvedParams {
            sport,
            grid,
            ppcf,
            obso,
            crsv,
            pbcf,
            ratio,
        })
    }
}
