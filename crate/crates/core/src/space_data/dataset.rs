use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{disc, DataError, EventRecord, PlayerRef, ProviderSpec, SportConfig, Team, TrackingRow, TrackingTable};
use crate::geometry::Vec2;
use crate::state::{AttackDirection, GameState, PlayerState};

/// One aligned frame of both teams and the ball, in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSnapshot {
    pub period: u8,
    /// seconds
    pub time: f64,
    pub home: Vec<Option<Vec2>>,
    pub away: Vec<Option<Vec2>>,
    pub ball: Option<Vec2>,
}

impl FrameSnapshot {
    pub fn side(&self, team: Team) -> &[Option<Vec2>] {
        match team {
            Team::Home => &self.home,
            Team::Away => &self.away,
        }
    }

    pub fn player(&self, who: PlayerRef) -> Option<Vec2> {
        self.side(who.team).get(who.slot).copied().flatten()
    }
}

/// How the attacking direction of each team is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionConvention {
    /// Home attacks `+x` in periods 1 and 3.
    #[default]
    HomePositiveOddPeriods,
    /// Home attacks `+x` in periods 2 and 4.
    HomePositiveEvenPeriods,
    /// Per possession, from the net downfield displacement of its events.
    FromEvents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildOptions {
    /// Gaps of at most this many seconds are linearly interpolated.
    pub max_gap: f64,
    /// Centered moving average over this many frames applied to velocities.
    pub velocity_smoothing: Option<usize>,
    pub direction: DirectionConvention,
    /// When set, inputs are mapped from provider coordinates to meters first.
    pub provider: Option<ProviderSpec>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_gap: 0.5,
            velocity_smoothing: None,
            direction: DirectionConvention::default(),
            provider: None,
        }
    }
}

/// Immutable aligned match container.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDataset {
    pub config: SportConfig,
    pub frames: Vec<FrameSnapshot>,
    pub events: Vec<EventRecord>,
    pub home_velocity: Vec<Vec<Option<Vec2>>>,
    pub away_velocity: Vec<Vec<Option<Vec2>>>,
    pub ball_velocity: Vec<Option<Vec2>>,
    /// Team in possession per frame.
    pub possession: Vec<Option<Team>>,
    /// Ball holder per frame, when events identify one.
    pub holders: Vec<Option<PlayerRef>>,
    /// Sign of the home team's attack per frame.
    home_attack_sign: Vec<f64>,
    /// Slots that appear at least once in each period, per team.
    active: Vec<(u8, Vec<bool>, Vec<bool>)>,
    /// Non-fatal findings (e.g. out-of-bounds event coordinates).
    pub warnings: Vec<String>,
}

fn sort_and_check(table: &mut TrackingTable, half_step: f64) -> Result<(), DataError> {
    table
        .rows
        .sort_by(|a, b| a.period.cmp(&b.period).then(a.time.total_cmp(&b.time)));
    for w in table.rows.windows(2) {
        if w[0].period == w[1].period && (w[1].time - w[0].time) < half_step {
            return Err(DataError::Validation(format!(
                "{} tracking has duplicate timestamps near t={} (period {})",
                table.side, w[1].time, w[1].period
            )));
        }
    }
    Ok(())
}

fn rows_in_period(rows: &[TrackingRow], period: u8) -> &[TrackingRow] {
    let start = rows.partition_point(|r| r.period < period);
    let end = rows.partition_point(|r| r.period <= period);
    &rows[start..end]
}

fn merge_period<'a>(
    home: &'a [TrackingRow],
    away: &'a [TrackingRow],
    tol: f64,
) -> Vec<(f64, Option<&'a TrackingRow>, Option<&'a TrackingRow>)> {
    let (Some(h0), Some(a0)) = (home.first(), away.first()) else {
        return Vec::new();
    };
    let lo = h0.time.max(a0.time) - tol;
    let hi = home.last().unwrap().time.min(away.last().unwrap().time) + tol;
    if lo > hi {
        return Vec::new();
    }
    let home: Vec<_> = home.iter().filter(|r| r.time >= lo && r.time <= hi).collect();
    let away: Vec<_> = away.iter().filter(|r| r.time >= lo && r.time <= hi).collect();
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(home.len().max(away.len()));
    while i < home.len() || j < away.len() {
        match (home.get(i), away.get(j)) {
            (Some(h), Some(a)) if (h.time - a.time).abs() <= tol => {
                out.push((h.time, Some(*h), Some(*a)));
                i += 1;
                j += 1;
            }
            (Some(h), Some(a)) if h.time < a.time => {
                out.push((h.time, Some(*h), None));
                i += 1;
            }
            (Some(h), None) => {
                out.push((h.time, Some(*h), None));
                i += 1;
            }
            (_, Some(a)) => {
                out.push((a.time, None, Some(*a)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Linearly fills interior runs of at most `max_missing` consecutive `None`s.
fn fill_gaps(series: &mut [Option<Vec2>], max_missing: usize) {
    let mut last: Option<usize> = None;
    for t in 0..series.len() {
        if series[t].is_none() {
            continue;
        }
        if let Some(prev) = last {
            let missing = t - prev - 1;
            if missing > 0 && missing <= max_missing {
                let (a, b) = (series[prev].unwrap(), series[t].unwrap());
                let span = (t - prev) as f64;
                for (k, slot) in series.iter_mut().enumerate().take(t).skip(prev + 1) {
                    *slot = Some(a.lerp(b, (k - prev) as f64 / span));
                }
            }
        }
        last = Some(t);
    }
}

/// Central differences inside, one-sided where a neighbour is missing.
fn differentiate(series: &[Option<Vec2>], dt: f64) -> Vec<Option<Vec2>> {
    let n = series.len();
    (0..n)
        .map(|t| {
            let here = series[t]?;
            let prev = if t > 0 { series[t - 1] } else { None };
            let next = series.get(t + 1).copied().flatten();
            Some(match (prev, next) {
                (Some(p), Some(q)) => (q - p) / (2.0 * dt),
                (Some(p), None) => (here - p) / dt,
                (None, Some(q)) => (q - here) / dt,
                (None, None) => Vec2::ZERO,
            })
        })
        .collect()
}

fn smooth(series: &[Option<Vec2>], window: usize) -> Vec<Option<Vec2>> {
    let half = window / 2;
    (0..series.len())
        .map(|t| {
            series[t]?;
            let lo = t.saturating_sub(half);
            let hi = (t + half + 1).min(series.len());
            let (sum, count) = series[lo..hi]
                .iter()
                .flatten()
                .fold((Vec2::ZERO, 0usize), |(s, c), v| (s + *v, c + 1));
            Some(sum / count as f64)
        })
        .collect()
}

/// Applies `f` to every entity series (each player slot and the ball) per period.
fn per_series<F>(frames: &mut [FrameSnapshot], ranges: &[(usize, usize)], k: usize, mut f: F)
where
    F: FnMut(&mut [Option<Vec2>]),
{
    for &(lo, hi) in ranges {
        for team in [Team::Home, Team::Away] {
            for slot in 0..k {
                let mut s: Vec<_> = frames[lo..hi]
                    .iter()
                    .map(|fr| fr.side(team)[slot])
                    .collect();
                f(&mut s);
                for (fr, v) in frames[lo..hi].iter_mut().zip(s) {
                    match team {
                        Team::Home => fr.home[slot] = v,
                        Team::Away => fr.away[slot] = v,
                    }
                }
            }
        }
        let mut s: Vec<_> = frames[lo..hi].iter().map(|fr| fr.ball).collect();
        f(&mut s);
        for (fr, v) in frames[lo..hi].iter_mut().zip(s) {
            fr.ball = v;
        }
    }
}

fn period_ranges(frames: &[FrameSnapshot]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for t in 1..=frames.len() {
        if t == frames.len() || frames[t].period != frames[start].period {
            if t > start {
                out.push((start, t));
            }
            start = t;
        }
    }
    out
}

fn normalize_table(table: &mut TrackingTable, provider: &ProviderSpec, config: &SportConfig, mirror: bool) {
    let map = |p: Vec2| {
        let q = provider.normalize(p, config);
        if mirror {
            -q
        } else {
            q
        }
    };
    for row in &mut table.rows {
        for p in row.players.iter_mut().flatten() {
            *p = map(*p);
        }
        // the ball is shared by both sides and never pre-mirrored
        if let Some(b) = row.ball.as_mut() {
            *b = provider.normalize(*b, config);
        }
    }
}

/// Merges both tracking sides with the event log into an aligned dataset.
///
/// Frames are matched on `(period, time)` within half a sample period and
/// snapped onto a regular `1 / sample_rate` lattice; holes in the lattice
/// become frames with every position missing. Frame indices in events refer
/// to positions in the resulting frame list.
pub fn build_dataset(
    mut home: TrackingTable,
    mut away: TrackingTable,
    mut events: Vec<EventRecord>,
    config: &SportConfig,
    options: &BuildOptions,
) -> Result<SpaceDataset, DataError> {
    config.validate()?;
    let k = config.players_per_side;
    for table in [&home, &away] {
        if let Some(bad) = table.rows.iter().find(|r| r.players.len() != k) {
            return Err(DataError::Validation(format!(
                "{} tracking row at t={} has {} players, expected {k}",
                table.side,
                bad.time,
                bad.players.len()
            )));
        }
    }
    let dt = 1.0 / config.sample_rate;
    let tol = dt / 2.0;

    if let Some(provider) = &options.provider {
        provider.validate()?;
        normalize_table(&mut home, provider, config, false);
        normalize_table(&mut away, provider, config, provider.away_preflipped);
        for e in &mut events {
            e.start = e.start.map(|p| provider.normalize(p, config));
            e.end = e.end.map(|p| provider.normalize(p, config));
        }
    }

    sort_and_check(&mut home, tol)?;
    sort_and_check(&mut away, tol)?;

    let home_periods: BTreeSet<u8> = home.rows.iter().map(|r| r.period).collect();
    let away_periods: BTreeSet<u8> = away.rows.iter().map(|r| r.period).collect();
    if home_periods != away_periods {
        return Err(DataError::Alignment(format!(
            "home covers periods {home_periods:?} but away covers {away_periods:?}"
        )));
    }

    let mut frames = Vec::new();
    for &period in &home_periods {
        let merged = merge_period(
            rows_in_period(&home.rows, period),
            rows_in_period(&away.rows, period),
            tol,
        );
        let Some(&(t_first, _, _)) = merged.first() else {
            continue;
        };
        let base = frames.len();
        let mut last_index: Option<usize> = None;
        for (time, h, a) in merged {
            let index = ((time - t_first) * config.sample_rate).round() as usize;
            if last_index.is_some_and(|l| l >= index) {
                return Err(DataError::Alignment(format!(
                    "two samples collapse onto one frame near t={time} (period {period})"
                )));
            }
            while frames.len() < base + index {
                let n = frames.len() - base;
                frames.push(FrameSnapshot {
                    period,
                    time: t_first + n as f64 / config.sample_rate,
                    home: vec![None; k],
                    away: vec![None; k],
                    ball: None,
                });
            }
            frames.push(FrameSnapshot {
                period,
                time: t_first + index as f64 / config.sample_rate,
                home: h.map_or_else(|| vec![None; k], |r| r.players.clone()),
                away: a.map_or_else(|| vec![None; k], |r| r.players.clone()),
                ball: h.and_then(|r| r.ball).or_else(|| a.and_then(|r| r.ball)),
            });
            last_index = Some(index);
        }
    }
    if frames.is_empty() && !(home.rows.is_empty() && away.rows.is_empty()) {
        return Err(DataError::Alignment(
            "home and away tracking do not overlap in time".into(),
        ));
    }

    let n = frames.len();
    for e in &events {
        e.validate()?;
        if e.end_frame >= n {
            return Err(DataError::Validation(format!(
                "event {} at frame {}..{} outside the {n} aligned frames",
                e.kind, e.start_frame, e.end_frame
            )));
        }
    }

    let ranges = period_ranges(&frames);
    let active = ranges
        .iter()
        .map(|&(lo, hi)| {
            let seen = |team: Team| {
                (0..k)
                    .map(|s| frames[lo..hi].iter().any(|f| f.side(team)[s].is_some()))
                    .collect::<Vec<_>>()
            };
            (frames[lo].period, seen(Team::Home), seen(Team::Away))
        })
        .collect();

    let max_missing = (options.max_gap * config.sample_rate + 1e-9).floor() as usize;
    per_series(&mut frames, &ranges, k, |s| fill_gaps(s, max_missing));

    let mut holders = vec![None; n];
    let has_possessions = events.iter().any(|e| e.from.is_some());
    if has_possessions {
        if frames.iter().all(|f| f.ball.is_none()) {
            let track = disc::interpolate_disc(&events, &frames)?;
            for (f, p) in frames.iter_mut().zip(track.positions) {
                f.ball = p;
            }
            holders = track.holders;
        } else {
            holders = disc::disc_holders(&events, n)?;
        }
    }

    let mut home_velocity = vec![vec![None; k]; n];
    let mut away_velocity = vec![vec![None; k]; n];
    let mut ball_velocity = vec![None; n];
    for &(lo, hi) in &ranges {
        let finish = |s: Vec<Option<Vec2>>| match options.velocity_smoothing {
            Some(w) if w > 1 => smooth(&s, w),
            _ => s,
        };
        for slot in 0..k {
            for (team, out) in [(Team::Home, &mut home_velocity), (Team::Away, &mut away_velocity)] {
                let pos: Vec<_> = frames[lo..hi].iter().map(|f| f.side(team)[slot]).collect();
                for (t, v) in finish(differentiate(&pos, dt)).into_iter().enumerate() {
                    out[lo + t][slot] = v;
                }
            }
        }
        let pos: Vec<_> = frames[lo..hi].iter().map(|f| f.ball).collect();
        for (t, v) in finish(differentiate(&pos, dt)).into_iter().enumerate() {
            ball_velocity[lo + t] = v;
        }
    }

    let mut possession = vec![None; n];
    let mut by_start: Vec<&EventRecord> = events.iter().collect();
    by_start.sort_by_key(|e| e.start_frame);
    if let Some(first) = by_start.first() {
        let mut current = first.team;
        let mut next = 0;
        for (t, slot) in possession.iter_mut().enumerate() {
            while next < by_start.len() && by_start[next].start_frame <= t {
                current = by_start[next].team;
                next += 1;
            }
            *slot = Some(current);
        }
    }

    let home_attack_sign = attack_signs(&frames, &events, &possession, options.direction);

    let mut warnings = Vec::new();
    for e in &events {
        for p in [e.start, e.end].into_iter().flatten() {
            if !config.contains(p, 0.5) {
                warnings.push(format!(
                    "event {} at frame {} has coordinate ({}, {}) outside the field",
                    e.kind, e.start_frame, p.x, p.y
                ));
            }
        }
    }

    events.sort_by(|a, b| a.period.cmp(&b.period).then(a.start_time.total_cmp(&b.start_time)));

    Ok(SpaceDataset {
        config: config.clone(),
        frames,
        events,
        home_velocity,
        away_velocity,
        ball_velocity,
        possession,
        holders,
        home_attack_sign,
        active,
        warnings,
    })
}

fn attack_signs(
    frames: &[FrameSnapshot],
    events: &[EventRecord],
    possession: &[Option<Team>],
    convention: DirectionConvention,
) -> Vec<f64> {
    match convention {
        DirectionConvention::HomePositiveOddPeriods => frames
            .iter()
            .map(|f| if f.period % 2 == 1 { 1.0 } else { -1.0 })
            .collect(),
        DirectionConvention::HomePositiveEvenPeriods => frames
            .iter()
            .map(|f| if f.period % 2 == 0 { 1.0 } else { -1.0 })
            .collect(),
        DirectionConvention::FromEvents => {
            let mut signs = vec![1.0; frames.len()];
            let mut start = 0;
            while start < frames.len() {
                let mut end = start + 1;
                while end < frames.len() && possession[end] == possession[start] {
                    end += 1;
                }
                if let Some(team) = possession[start] {
                    let push: f64 = events
                        .iter()
                        .filter(|e| e.team == team && e.start_frame >= start && e.start_frame < end)
                        .filter_map(|e| Some(e.end?.x - e.start?.x))
                        .sum();
                    let team_sign = if push < 0.0 { -1.0 } else { 1.0 };
                    let home_sign = if team == Team::Home { team_sign } else { -team_sign };
                    signs[start..end].iter_mut().for_each(|s| *s = home_sign);
                }
                start = end;
            }
            signs
        }
    }
}

impl SpaceDataset {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn velocity(&self, frame: usize, who: PlayerRef) -> Option<Vec2> {
        let v = match who.team {
            Team::Home => &self.home_velocity,
            Team::Away => &self.away_velocity,
        };
        v.get(frame).and_then(|f| f.get(who.slot)).copied().flatten()
    }

    /// Direction `team` attacks at `frame` in raw field coordinates.
    pub fn attack_direction(&self, frame: usize, team: Team) -> AttackDirection {
        let home = self.home_attack_sign.get(frame).copied().unwrap_or(1.0);
        let sign = if team == Team::Home { home } else { -home };
        if sign > 0.0 {
            AttackDirection::Positive
        } else {
            AttackDirection::Negative
        }
    }

    fn active_slots(&self, period: u8, team: Team) -> Option<&[bool]> {
        self.active
            .iter()
            .find(|(p, _, _)| *p == period)
            .map(|(_, h, a)| match team {
                Team::Home => h.as_slice(),
                Team::Away => a.as_slice(),
            })
    }

    /// Slots of players seen in this period but missing at `frame`.
    pub fn missing_players(&self, frame: usize) -> Vec<PlayerRef> {
        let Some(f) = self.frames.get(frame) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for team in [Team::Home, Team::Away] {
            if let Some(active) = self.active_slots(f.period, team) {
                for (slot, &on) in active.iter().enumerate() {
                    if on && f.side(team)[slot].is_none() {
                        out.push(PlayerRef { team, slot });
                    }
                }
            }
        }
        out
    }

    /// Whether models can run on `frame`: ball present, no on-field player missing.
    pub fn frame_usable(&self, frame: usize) -> bool {
        self.frames.get(frame).is_some_and(|f| f.ball.is_some()) && self.missing_players(frame).is_empty()
    }

    /// Model input for `frame`, rotated so `attacking` plays toward `+x`.
    ///
    /// `attacking` defaults to the team in possession (then Home).
    pub fn game_state(&self, frame: usize, attacking: Option<Team>) -> Result<GameState, DataError> {
        let f = self
            .frames
            .get(frame)
            .ok_or_else(|| DataError::Validation(format!("frame {frame} out of range")))?;
        let missing = self.missing_players(frame);
        if !missing.is_empty() {
            let names: Vec<String> = missing.iter().map(|p| p.to_string()).collect();
            return Err(DataError::Validation(format!(
                "frame {frame} is missing players {}",
                names.join(", ")
            )));
        }
        let attacking = attacking
            .or(self.possession.get(frame).copied().flatten())
            .unwrap_or(Team::Home);
        let sign = self.attack_direction(frame, attacking).sign();
        let orient = |p: Vec2| p * sign;
        let collect = |team: Team| -> (Vec<PlayerState>, Vec<usize>) {
            let mut states = Vec::new();
            let mut slots = Vec::new();
            for (slot, p) in f.side(team).iter().enumerate() {
                if let Some(p) = p {
                    let who = PlayerRef { team, slot };
                    states.push(PlayerState {
                        id: Some(who),
                        position: orient(*p),
                        velocity: orient(self.velocity(frame, who).unwrap_or(Vec2::ZERO)),
                    });
                    slots.push(slot);
                }
            }
            (states, slots)
        };
        let (attackers, attacker_slots) = collect(attacking);
        let (defenders, _) = collect(attacking.opponent());
        let ball_holder = self.holders.get(frame).copied().flatten().and_then(|h| {
            (h.team == attacking)
                .then(|| attacker_slots.iter().position(|&s| s == h.slot))
                .flatten()
        });
        Ok(GameState {
            attackers,
            defenders,
            ball: f.ball.map(orient),
            ball_holder,
            direction: AttackDirection::Positive,
            frame: Some(frame),
        })
    }
}
