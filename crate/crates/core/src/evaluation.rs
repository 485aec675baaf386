//! Possession- and match-level metrics built on the surfaces.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::crsv::TimingReport;
use crate::error::ModelError;
use crate::pitch_control::{ControlGrid, GridSpec};

/// Fraction of unmasked cells whose value is at least `tau`.
pub fn high_control_ratio_values(spec: &GridSpec, values: &[f64], tau: f64) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(ModelError::Range(format!("threshold {tau} outside [0, 1]")));
    }
    if values.len() != spec.len() {
        return Err(ModelError::LengthMismatch {
            expected: spec.len(),
            got: values.len(),
        });
    }
    let mut cells = 0usize;
    let mut above = 0usize;
    for i in spec.unmasked() {
        cells += 1;
        if values[i] >= tau {
            above += 1;
        }
    }
    if cells == 0 {
        return Err(ModelError::EmptySurface);
    }
    Ok(above as f64 / cells as f64)
}

/// High-control ratio of the attack plane.
pub fn high_control_ratio(grid: &ControlGrid, tau: f64) -> Result<f64, ModelError> {
    high_control_ratio_values(&grid.spec, &grid.attack, tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RatioParams {
    /// cell threshold
    pub tau: f64,
    /// bucket length, seconds
    pub delta: f64,
    /// Ratio level for the time-above summary; defaults to `tau`.
    pub above_level: Option<f64>,
}

impl Default for RatioParams {
    fn default() -> Self {
        RatioParams {
            tau: 0.7,
            delta: 5.0,
            above_level: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub possession: String,
    /// Bucket start times from the first frame, seconds.
    pub timestamps: Vec<f64>,
    pub values: Vec<f64>,
    /// The last bucket is shorter than `delta`.
    pub partial_last: bool,
    /// Highest bucket value.
    pub peak: f64,
    /// Time the per-frame ratio spent at or above the level, seconds.
    pub time_above: f64,
}

/// Averages per-frame ratios over consecutive `delta`-second buckets.
pub fn ratio_series(
    possession: &str,
    frame_ratios: &[f64],
    sample_rate: f64,
    params: &RatioParams,
) -> Result<RatioSeries, ModelError> {
    if frame_ratios.is_empty() {
        return Err(ModelError::InsufficientFrames { needed: 1, got: 0 });
    }
    if !(sample_rate > 0.0 && params.delta > 0.0) {
        return Err(ModelError::Config("sample rate and bucket length must be > 0".into()));
    }
    let per_bucket = (params.delta * sample_rate).round().max(1.0) as usize;
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (k, chunk) in frame_ratios.chunks(per_bucket).enumerate() {
        timestamps.push(k as f64 * params.delta);
        values.push(chunk.iter().sum::<f64>() / chunk.len() as f64);
    }
    let level = params.above_level.unwrap_or(params.tau);
    let above = frame_ratios.iter().filter(|&&r| r >= level).count();
    Ok(RatioSeries {
        possession: possession.to_string(),
        timestamps,
        peak: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        values,
        partial_last: !frame_ratios.len().is_multiple_of(per_bucket),
        time_above: above as f64 / sample_rate,
    })
}

/// Pearson correlation; `None` when either input has zero variance or fewer than two points.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub const INDICATORS: [&str; 4] = ["OBSO", "BIMOS", "Shots", "Goals"];

/// Per-match indicator values of one team, in match order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamMatchSeries {
    pub team: String,
    pub obso: Vec<f64>,
    pub bimos: Vec<f64>,
    pub shots: Vec<f64>,
    pub goals: Vec<f64>,
}

impl TeamMatchSeries {
    fn indicator(&self, k: usize) -> &[f64] {
        match k {
            0 => &self.obso,
            1 => &self.bimos,
            2 => &self.shots,
            _ => &self.goals,
        }
    }

    fn matches(&self) -> Result<usize, ModelError> {
        let n = self.obso.len();
        for k in 1..4 {
            if self.indicator(k).len() != n {
                return Err(ModelError::LengthMismatch {
                    expected: n,
                    got: self.indicator(k).len(),
                });
            }
        }
        if n < 2 {
            return Err(ModelError::InsufficientFrames { needed: 2, got: n });
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// All teams' consecutive pairs in one sample.
    #[default]
    Pooled,
    /// Mean of the per-team correlations (undefined ones skipped).
    PerTeamMean,
}

/// Row indicator at match `i` against column indicator at match `i + 1`.
/// Only the upper triangle (row <= column) is filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub indicators: Vec<String>,
    pub entries: Vec<Vec<Option<f64>>>,
    pub pooling: Pooling,
    pub pairs: usize,
}

impl fmt::Display for CorrelationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = format!("{:>8}", "");
        for name in &self.indicators {
            let _ = write!(out, "{name:>8}");
        }
        writeln!(f, "{}", out.trim_end())?;
        for (r, row) in self.entries.iter().enumerate() {
            let mut line = format!("{:>8}", self.indicators[r]);
            for (c, v) in row.iter().enumerate() {
                let cell = match v {
                    _ if c < r => String::new(),
                    Some(x) => format!("{x:.2}"),
                    None => "n/a".into(),
                };
                let _ = write!(line, "{cell:>8}");
            }
            writeln!(f, "{}", line.trim_end())?;
        }
        Ok(())
    }
}

pub fn lag_correlation_table(series: &[TeamMatchSeries], pooling: Pooling) -> Result<CorrelationTable, ModelError> {
    if series.is_empty() {
        return Err(ModelError::InsufficientFrames { needed: 1, got: 0 });
    }
    let mut pairs = 0;
    for s in series {
        pairs += s.matches()? - 1;
    }
    let lagged = |s: &TeamMatchSeries, a: usize, b: usize| {
        let n = s.obso.len();
        (s.indicator(a)[..n - 1].to_vec(), s.indicator(b)[1..].to_vec())
    };
    let mut entries = vec![vec![None; 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            entries[a][b] = match pooling {
                Pooling::Pooled => {
                    let (mut xs, mut ys) = (Vec::new(), Vec::new());
                    for s in series {
                        let (x, y) = lagged(s, a, b);
                        xs.extend(x);
                        ys.extend(y);
                    }
                    pearson(&xs, &ys)
                }
                Pooling::PerTeamMean => {
                    let rs: Vec<f64> = series
                        .iter()
                        .filter_map(|s| {
                            let (x, y) = lagged(s, a, b);
                            pearson(&x, &y)
                        })
                        .collect();
                    (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64)
                }
            };
        }
    }
    Ok(CorrelationTable {
        indicators: INDICATORS.iter().map(|s| s.to_string()).collect(),
        entries,
        pooling,
        pairs,
    })
}

pub const LOG_LOSS_EPS: f64 = 1e-12;

/// Mean binary cross-entropy with predictions clipped to `[eps, 1 - eps]`.
pub fn log_loss(predicted: &[f64], outcomes: &[bool]) -> Result<f64, ModelError> {
    if predicted.len() != outcomes.len() {
        return Err(ModelError::LengthMismatch {
            expected: predicted.len(),
            got: outcomes.len(),
        });
    }
    if predicted.is_empty() {
        return Err(ModelError::InsufficientFrames { needed: 1, got: 0 });
    }
    let mut sum = 0.0;
    for (&p, &y) in predicted.iter().zip(outcomes) {
        if p.is_nan() {
            return Err(ModelError::Range("prediction is NaN".into()));
        }
        let p = p.clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
        sum += if y { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(-sum / predicted.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMax {
    pub sequence: String,
    pub max: f64,
    /// Offset of the maximum within the series (first on ties).
    pub offset: usize,
}

/// Peak V_frame of each sequence; sequences with no frames are skipped.
pub fn max_vframe_per_sequence<'a>(sequences: impl IntoIterator<Item = (&'a str, &'a [f64])>) -> Vec<SequenceMax> {
    sequences
        .into_iter()
        .filter_map(|(id, series)| {
            let (offset, &max) = series
                .iter()
                .enumerate()
                .fold(None, |best: Option<(usize, &f64)>, (i, v)| match best {
                    Some((_, b)) if b >= v => best,
                    _ => Some((i, v)),
                })?;
            Some(SequenceMax {
                sequence: id.to_string(),
                max,
                offset,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeGroup {
    pub possessions: usize,
    pub mean_peak: Option<f64>,
    /// Share of possessions whose peak ratio exceeds the summary threshold.
    pub share_above: Option<f64>,
}

/// Peak ratio by possession outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub peak_threshold: f64,
    pub scored: OutcomeGroup,
    pub not_scored: OutcomeGroup,
}

pub fn ratio_outcome_summary(records: &[(RatioSeries, bool)], peak_threshold: f64) -> OutcomeSummary {
    let group = |want: bool| {
        let peaks: Vec<f64> = records.iter().filter(|(_, g)| *g == want).map(|(s, _)| s.peak).collect();
        let n = peaks.len();
        OutcomeGroup {
            possessions: n,
            mean_peak: (n > 0).then(|| peaks.iter().sum::<f64>() / n as f64),
            share_above: (n > 0).then(|| peaks.iter().filter(|&&p| p > peak_threshold).count() as f64 / n as f64),
        }
    };
    OutcomeSummary {
        peak_threshold,
        scored: group(true),
        not_scored: group(false),
    }
}

/// Provenance carried by every report.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub sport: String,
    pub model: String,
    pub params_hash: String,
    /// Input file name and SHA-256, in input order.
    #[serde(default)]
    pub inputs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameValue {
    pub frame: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub provenance: Provenance,
    /// Per-frame scalar of the chosen surface (OBSO total, BIMOS mean, ...).
    #[serde(default)]
    pub frame_values: Vec<FrameValue>,
    #[serde(default)]
    pub ratio_series: Vec<RatioSeries>,
    #[serde(default)]
    pub max_vframe: Vec<SequenceMax>,
    #[serde(default)]
    pub timing: Vec<TimingReport>,
    #[serde(default)]
    pub outcome_summary: Option<OutcomeSummary>,
    #[serde(default)]
    pub correlations: Option<CorrelationTable>,
    #[serde(default)]
    pub log_loss: Option<f64>,
    /// Conventions a reader should know about (e.g. the BIMOS scalar normalization).
    #[serde(default)]
    pub notes: Vec<String>,
    /// Frames skipped with the reason.
    #[serde(default)]
    pub skipped: Vec<(usize, String)>,
}
