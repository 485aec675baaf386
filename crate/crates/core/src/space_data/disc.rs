use super::{DataError, EventRecord, FrameSnapshot, PlayerRef};
use crate::geometry::Vec2;

/// Disc positions and holders per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscTrack {
    pub positions: Vec<Option<Vec2>>,
    pub holders: Vec<Option<PlayerRef>>,
}

struct Possession {
    from: PlayerRef,
    to: Option<PlayerRef>,
    start_frame: usize,
    end_frame: usize,
    start: Option<Vec2>,
    end: Option<Vec2>,
}

fn possessions(events: &[EventRecord]) -> Vec<Possession> {
    let mut out: Vec<Possession> = events
        .iter()
        .filter_map(|e| {
            let from = PlayerRef::parse(e.from.as_deref()?, e.team)?;
            Some(Possession {
                from,
                to: e.to.as_deref().and_then(|t| PlayerRef::parse(t, e.team)),
                start_frame: e.start_frame,
                end_frame: e.end_frame,
                start: e.start,
                end: e.end,
            })
        })
        .collect();
    out.sort_by_key(|p| p.start_frame);
    out
}

fn position_of(frames: &[FrameSnapshot], frame: usize, who: PlayerRef) -> Option<Vec2> {
    frames.get(frame).and_then(|f| f.player(who))
}

/// Who holds the disc at each frame: the thrower up to and including the
/// release frame, the receiver from the catch frame on, nobody in flight.
pub fn disc_holders(events: &[EventRecord], n_frames: usize) -> Result<Vec<Option<PlayerRef>>, DataError> {
    let poss = possessions(events);
    if poss.is_empty() {
        return Err(DataError::NoPossessionEvents);
    }
    let mut holders = vec![None; n_frames];
    let first = &poss[0];
    for h in holders.iter_mut().take(first.start_frame.min(n_frames)) {
        *h = Some(first.from);
    }
    for (k, p) in poss.iter().enumerate() {
        if let Some(h) = holders.get_mut(p.start_frame) {
            *h = Some(p.from);
        }
        let next_start = poss.get(k + 1).map_or(n_frames, |n| n.start_frame.min(n_frames));
        if let Some(to) = p.to {
            for h in holders.iter_mut().take(next_start).skip(p.end_frame) {
                *h = Some(to);
            }
        }
    }
    Ok(holders)
}

/// Reconstructs the disc track from possession events.
///
/// Held frames follow the holder. Between a release at `start_frame` and the
/// catch at `end_frame` the disc moves linearly from the event's start point
/// to its end point. After an event with no receiver the disc drifts
/// linearly to where the next event starts.
pub fn interpolate_disc(events: &[EventRecord], frames: &[FrameSnapshot]) -> Result<DiscTrack, DataError> {
    let n = frames.len();
    let holders = disc_holders(events, n)?;
    let poss = possessions(events);
    let mut positions: Vec<Option<Vec2>> = holders
        .iter()
        .enumerate()
        .map(|(t, h)| h.and_then(|who| position_of(frames, t, who)))
        .collect();

    for (k, p) in poss.iter().enumerate() {
        let release = p.start.or_else(|| position_of(frames, p.start_frame, p.from));
        let catch = p
            .end
            .or_else(|| p.to.and_then(|to| position_of(frames, p.end_frame, to)));
        if let (Some(a), Some(b)) = (release, catch) {
            let span = (p.end_frame - p.start_frame) as f64;
            for t in p.start_frame..=p.end_frame.min(n.saturating_sub(1)) {
                let frac = if span > 0.0 {
                    (t - p.start_frame) as f64 / span
                } else {
                    0.0
                };
                positions[t] = Some(a.lerp(b, frac));
            }
            if p.end_frame < n {
                positions[p.end_frame] = Some(b);
            }
        }
        if p.to.is_none() {
            let next = poss.get(k + 1);
            let stop = next.map_or(n, |q| q.start_frame.min(n));
            let resume = next.and_then(|q| q.start.or_else(|| position_of(frames, q.start_frame, q.from)));
            if let Some(a) = catch {
                let span = next.map_or(0, |q| q.start_frame.saturating_sub(p.end_frame)) as f64;
                for t in (p.end_frame + 1).min(n)..stop {
                    positions[t] = Some(match resume {
                        Some(b) if span > 0.0 => a.lerp(b, (t - p.end_frame) as f64 / span),
                        _ => a,
                    });
                }
            }
        }
    }
    Ok(DiscTrack { positions, holders })
}
