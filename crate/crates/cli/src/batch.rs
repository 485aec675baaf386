//! Batch orchestration: every match in parallel, every selected frame in parallel.
//!
//! Layout under `out_path`: `<match>/<model>/frame_NNNNNN.{csv,bin,png}`,
//! `<match>/<model>/report.json`, `<match>/<model>/vframe_series.csv` when a
//! timing analysis is requested, and `manifest.tsv` listing every artifact.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use rayon::prelude::*;
use spacefield::bimos::bimos_surface;
use spacefield::crsv::{team_wuppcf_grid, v_timing, Play, TimingReport};
use spacefield::evaluation::{
    high_control_ratio, max_vframe_per_sequence, ratio_series, EvaluationReport, FrameValue, Provenance,
};
use spacefield::obso::obso_surface;
use spacefield::pitch_control::{fingerprint, ppcf_grid, team_control_summary, Side, write_grid_binary, write_grid_csv, ControlGrid};
use spacefield::space_data::{
    build_dataset, parse_events, parse_tracking, BuildOptions, DataError, PlayerRef, ProviderSpec, SpaceDataset, Team,
};
use spacefield::{GameState, ModelError};

use crate::config::{MatchInput, ResolvedParams, RunConfig, SpaceModel};
use crate::render::{render_heatmap, Style};
use crate::report::report_to_string;
use crate::{sha256_hex, CliError};

pub const MANIFEST_FILE: &str = "manifest.tsv";

/// One written file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ManifestEntry {
    pub input_id: String,
    pub model: String,
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchFailure {
    pub input_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    /// Sorted by input id, then path.
    pub manifest: Vec<ManifestEntry>,
    pub failures: Vec<BatchFailure>,
    /// Matches that produced output.
    pub succeeded: Vec<String>,
    pub manifest_path: PathBuf,
}

impl BatchOutcome {
    pub fn all_failed(&self) -> bool {
        self.succeeded.is_empty()
    }
}

/// Runs the configured model over every match.
///
/// A match that cannot be read or yields nothing is logged and skipped; the
/// call itself only fails on an invalid configuration or an unwritable
/// output directory.
pub fn run_batch(config: &RunConfig) -> Result<BatchOutcome, CliError> {
    config.validate()?;
    let resolved = config.resolve()?;
    let matches = config.matches()?;
    if matches.is_empty() {
        return Err(CliError::Config("no matches found".into()));
    }
    let mut ids = BTreeSet::new();
    if let Some(m) = matches.iter().find(|m| !ids.insert(m.id.as_str())) {
        return Err(CliError::Config(format!("duplicate match id `{}`", m.id)));
    }
    std::fs::create_dir_all(&config.out_path).map_err(|e| CliError::io(&config.out_path, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<Result<Vec<ManifestEntry>, CliError>> =
        pool.install(|| matches.par_iter().map(|m| run_match(m, config, &resolved)).collect());

    let mut manifest = Vec::new();
    let mut failures = Vec::new();
    let mut succeeded = Vec::new();
    for (m, r) in matches.iter().zip(results) {
        match r {
            Ok(entries) => {
                info!("{}: {} artifacts", m.id, entries.len());
                succeeded.push(m.id.clone());
                manifest.extend(entries);
            }
            Err(e) => {
                warn!("{}: skipped: {e}", m.id);
                failures.push(BatchFailure {
                    input_id: m.id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    manifest.sort();
    let manifest_path = config.out_path.join(MANIFEST_FILE);
    write_manifest(&manifest, &manifest_path)?;
    Ok(BatchOutcome {
        manifest,
        failures,
        succeeded,
        manifest_path,
    })
}

fn write_manifest(entries: &[ManifestEntry], path: &Path) -> Result<(), CliError> {
    let mut text = String::from("input_id\tmodel\tpath\tsha256\n");
    for e in entries {
        text.push_str(&format!("{}\t{}\t{}\t{}\n", e.input_id, e.model, e.path, e.sha256));
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Parses a manifest written by [`run_batch`].
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .skip(1)
        .map(|line| {
            let cols: Vec<&str> = line.split('\t').collect();
            match cols[..] {
                [id, model, p, sha] => Ok(ManifestEntry {
                    input_id: id.into(),
                    model: model.into(),
                    path: p.into(),
                    sha256: sha.into(),
                }),
                _ => Err(CliError::Config(format!("bad manifest line `{line}`"))),
            }
        })
        .collect()
}

/// Writes one artifact and records it.
struct Sink<'a> {
    root: &'a Path,
    input_id: &'a str,
    model: SpaceModel,
}

impl Sink<'_> {
    fn rel(&self, name: &str) -> String {
        format!("{}/{}/{name}", self.input_id, self.model)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<ManifestEntry, CliError> {
        let rel = self.rel(name);
        let path = self.root.join(&rel);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(ManifestEntry {
            input_id: self.input_id.to_string(),
            model: self.model.to_string(),
            path: rel,
            sha256: sha256_hex(bytes),
        })
    }
}

fn read_input(path: &Path) -> Result<(Vec<u8>, (String, String)), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let name = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let sha = sha256_hex(&bytes);
    Ok((bytes, (name, sha)))
}

/// Loads and aligns one match.
pub fn load_match(input: &MatchInput, config: &RunConfig, resolved: &ResolvedParams) -> Result<(SpaceDataset, Vec<(String, String)>), CliError> {
    let (events, e) = read_input(&input.event_data)?;
    let (home, h) = read_input(&input.tracking_home)?;
    let (away, a) = read_input(&input.tracking_away)?;
    let sport = &resolved.sport;
    let options = BuildOptions {
        provider: Some(ProviderSpec::builtin(&config.provider, sport)?),
        ..Default::default()
    };
    let dataset = build_dataset(
        parse_tracking(home.as_slice(), sport, Team::Home)?,
        parse_tracking(away.as_slice(), sport, Team::Away)?,
        parse_events(events.as_slice())?,
        sport,
        &options,
    )?;
    Ok((dataset, vec![e, h, a]))
}

struct FrameResult {
    frame: usize,
    value: f64,
    ratio: Option<f64>,
    artifacts: Vec<ManifestEntry>,
}

fn surface(model: SpaceModel, state: &GameState, resolved: &ResolvedParams) -> Result<(ControlGrid, f64), ModelError> {
    let spec = &resolved.grid;
    match model {
        SpaceModel::Ppcf => {
            let g = ppcf_grid(state, spec, &resolved.ppcf)?;
            let v = team_control_summary(&g, Side::Attack)?.mean;
            Ok((g, v))
        }
        SpaceModel::Obso => {
            let s = obso_surface(state, spec, &resolved.sport, &resolved.obso)?;
            Ok((s.field.to_control_grid(), s.total))
        }
        SpaceModel::Wuppcf => {
            let g = team_wuppcf_grid(state, spec, &resolved.crsv)?;
            let v = team_control_summary(&g, Side::Attack)?.mean;
            Ok((g, v))
        }
        SpaceModel::Bimos => {
            let s = bimos_surface(state, spec, &resolved.sport, &resolved.pbcf)?;
            Ok((s.combined.to_control_grid(), s.scalar))
        }
    }
}

fn run_frame(
    frame: usize,
    dataset: &SpaceDataset,
    config: &RunConfig,
    resolved: &ResolvedParams,
    sink: &Sink<'_>,
) -> Result<FrameResult, CliError> {
    if !dataset.frame_usable(frame) {
        return Err(DataError::Validation(format!("frame {frame} has missing players or no disc")).into());
    }
    let state = dataset.game_state(frame, None)?;
    let (mut grid, value) = surface(config.space_model, &state, resolved)?;
    grid.meta.frame = Some(frame);
    let ratio = match config.space_model {
        SpaceModel::Ppcf | SpaceModel::Wuppcf => Some(high_control_ratio(&grid, resolved.ratio.tau)?),
        _ => None,
    };
    let stem = format!("frame_{frame:06}");
    let mut csv = Vec::new();
    write_grid_csv(&grid, &mut csv).map_err(|e| CliError::io(sink.rel(&stem), e))?;
    let mut bin = Vec::new();
    write_grid_binary(&grid, &mut bin).map_err(|e| CliError::io(sink.rel(&stem), e))?;
    let mut artifacts = vec![
        sink.write(&format!("{stem}.csv"), &csv)?,
        sink.write(&format!("{stem}.bin"), &bin)?,
    ];
    if config.render {
        let png = render_heatmap(&grid, &state, &resolved.sport, &Style::default())?;
        artifacts.push(sink.write(&format!("{stem}.png"), &png)?);
    }
    Ok(FrameResult {
        frame,
        value,
        ratio,
        artifacts,
    })
}

/// The frames around `t0` (within `frames`) during which `t0`'s holder keeps the disc.
fn held_stretch(
    dataset: &SpaceDataset,
    frames: std::ops::Range<usize>,
    t0: usize,
) -> Result<std::ops::Range<usize>, CliError> {
    if !frames.contains(&t0) {
        return Err(CliError::Config(format!("initiation frame {t0} outside {}:{}", frames.start, frames.end)));
    }
    let holder = dataset.holders[t0].ok_or(ModelError::NoHolder)?;
    let held = |f: usize| dataset.holders[f] == Some(holder);
    let mut start = t0;
    while start > frames.start && held(start - 1) {
        start -= 1;
    }
    let mut end = t0 + 1;
    while end < frames.end && held(end) {
        end += 1;
    }
    Ok(start..end)
}

fn timing(
    dataset: &SpaceDataset,
    frames: std::ops::Range<usize>,
    receiver: &str,
    t0: usize,
    resolved: &ResolvedParams,
) -> Result<(TimingReport, usize), CliError> {
    let default_team = dataset.possession.get(t0).copied().flatten().unwrap_or(Team::Home);
    let who = PlayerRef::parse(receiver, default_team)
        .ok_or_else(|| CliError::Config(format!("receiver `{receiver}` is not a player id")))?;
    let frames = held_stretch(dataset, frames, t0)?;
    let first = frames.start;
    let play = Play::from_dataset(dataset, frames, who.team, t0)?;
    let idx = play
        .attacker_ids
        .iter()
        .position(|&id| id == Some(who))
        .ok_or_else(|| CliError::Config(format!("receiver {who} is not on the field at the first frame")))?;
    Ok((v_timing(&play, idx, &resolved.grid, &resolved.crsv)?, first))
}

fn run_match(input: &MatchInput, config: &RunConfig, resolved: &ResolvedParams) -> Result<Vec<ManifestEntry>, CliError> {
    let (dataset, inputs) = load_match(input, config, resolved)?;
    for w in &dataset.warnings {
        debug!("{}: {w}", input.id);
    }
    let range = config.frames.resolve(dataset.len())?;
    let frames: Vec<usize> = range.clone().step_by(config.frame_step).collect();
    let sink = Sink {
        root: &config.out_path,
        input_id: &input.id,
        model: config.space_model,
    };
    let dir = config.out_path.join(&input.id).join(config.space_model.as_str());
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let results: Vec<Result<FrameResult, CliError>> = frames
        .par_iter()
        .map(|&f| run_frame(f, &dataset, config, resolved, &sink))
        .collect();

    let mut report = EvaluationReport {
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            sport: format!("{:?}", config.sport).to_lowercase(),
            model: config.space_model.to_string(),
            params_hash: fingerprint(resolved),
            inputs,
        },
        ..Default::default()
    };
    let mut artifacts = Vec::new();
    let mut done = Vec::new();
    for (&f, r) in frames.iter().zip(results) {
        match r {
            Ok(fr) => {
                report.frame_values.push(FrameValue {
                    frame: fr.frame,
                    value: fr.value,
                });
                artifacts.extend(fr.artifacts);
                done.push((fr.frame, fr.ratio));
            }
            Err(e) => {
                debug!("{} frame {f}: skipped: {e}", input.id);
                report.skipped.push((f, e.to_string()));
            }
        }
    }

    // Ratio series over runs of consecutive processed frames with one team in possession.
    let mut run: Vec<f64> = Vec::new();
    let mut run_start: Option<(usize, Option<Team>)> = None;
    let mut prev: Option<usize> = None;
    let flush = |run: &mut Vec<f64>, start: Option<(usize, Option<Team>)>, report: &mut EvaluationReport| -> Result<(), CliError> {
        if let (false, Some((f0, team))) = (run.is_empty(), start) {
            let team = team.map_or("none", |t| t.as_str());
            let rate = resolved.sport.sample_rate / config.frame_step as f64;
            report
                .ratio_series
                .push(ratio_series(&format!("{team}@{f0}"), run, rate, &resolved.ratio)?);
        }
        run.clear();
        Ok(())
    };
    for &(f, ratio) in &done {
        let Some(r) = ratio else { continue };
        let team = dataset.possession.get(f).copied().flatten();
        let continues = prev.is_some_and(|p| p + config.frame_step == f) && run_start.is_some_and(|(_, t)| t == team);
        if !continues {
            flush(&mut run, run_start, &mut report)?;
            run_start = Some((f, team));
        }
        run.push(r);
        prev = Some(f);
    }
    flush(&mut run, run_start, &mut report)?;

    if let (Some(receiver), Some(t0)) = (&config.receiver, config.initiation_frame) {
        let (t, first) = timing(&dataset, range.clone(), receiver, t0, resolved)?;
        if let Some(actual) = t.actual() {
            report.max_vframe = max_vframe_per_sequence([(input.id.as_str(), actual.series.as_slice())]);
        }
        let mut csv = String::from("xi,frame,v_frame\n");
        for s in &t.scenarios {
            for (i, v) in s.series.iter().enumerate() {
                csv.push_str(&format!("{},{},{v}\n", s.xi, first + s.start_frame + i));
            }
        }
        artifacts.push(sink.write("vframe_series.csv", csv.as_bytes())?);
        report.timing.push(t);
    }
    if done.is_empty() && report.timing.is_empty() {
        return Err(CliError::Config(format!("no usable frames in {}:{}", range.start, range.end)));
    }
    match config.space_model {
        SpaceModel::Ppcf | SpaceModel::Wuppcf => report.notes.push(format!(
            "frame value is the mean attacking control over unmasked cells; ratio counts cells at or above {}",
            resolved.ratio.tau
        )),
        SpaceModel::Obso => report.notes.push("frame value is the summed scoring opportunity".into()),
        SpaceModel::Bimos => report
            .notes
            .push("frame value is the per-cell mean of the combined surface".into()),
    }
    artifacts.push(sink.write("report.json", report_to_string(&report)?.as_bytes())?);
    Ok(artifacts)
}
