use std::io;

use serde::{Deserialize, Serialize};

use super::{format_f64, DataError, Team};
use crate::geometry::Vec2;

/// Event table columns, in canonical order.
pub const EVENT_COLUMNS: [&str; 14] = [
    "Team",
    "Type",
    "Subtype",
    "Period",
    "Start Frame",
    "Start Time [s]",
    "End Frame",
    "End Time [s]",
    "From",
    "To",
    "Start X",
    "Start Y",
    "End X",
    "End Y",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub team: Team,
    pub kind: String,
    pub subtype: String,
    pub period: u8,
    pub start_frame: usize,
    /// seconds
    pub start_time: f64,
    pub end_frame: usize,
    /// seconds
    pub end_time: f64,
    pub from: Option<String>,
    pub to: Option<String>,
    pub start: Option<Vec2>,
    pub end: Option<Vec2>,
}

impl EventRecord {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.start_frame > self.end_frame {
            return Err(DataError::Validation(format!(
                "event {self:?}: start frame after end frame"
            )));
        }
        if self.start_time > self.end_time {
            return Err(DataError::Validation(format!(
                "event {self:?}: start time after end time"
            )));
        }
        Ok(())
    }
}

struct Columns([usize; 14]);

impl Columns {
    fn locate(headers: &csv::StringRecord) -> Result<Self, DataError> {
        let mut idx = [0; 14];
        for (slot, name) in idx.iter_mut().zip(EVENT_COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
        }
        Ok(Columns(idx))
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, k: usize) -> &'r str {
        record.get(self.0[k]).unwrap_or("").trim()
    }
}

fn parse_field<T: std::str::FromStr>(raw: &str, row: usize, k: usize) -> Result<T, DataError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| DataError::Parse {
        row,
        column: EVENT_COLUMNS[k].to_string(),
        message: format!("`{raw}`: {e}"),
    })
}

fn optional_text(raw: &str) -> Option<String> {
    (!raw.is_empty()).then(|| raw.to_string())
}

fn optional_point(x: &str, y: &str, row: usize, kx: usize) -> Result<Option<Vec2>, DataError> {
    match (x.is_empty(), y.is_empty()) {
        (true, true) => Ok(None),
        (false, false) => Ok(Some(Vec2::new(
            parse_field(x, row, kx)?,
            parse_field(y, row, kx + 1)?,
        ))),
        _ => Err(DataError::Parse {
            row,
            column: EVENT_COLUMNS[kx].to_string(),
            message: "coordinate pair is half blank".into(),
        }),
    }
}

/// Parses the event table and returns records sorted by `(Period, Start Time)`.
/// The sort is stable, so ties keep file order.
pub fn parse_events<R: io::Read>(reader: R) -> Result<Vec<EventRecord>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let cols = Columns::locate(rdr.headers()?)?;
    let mut events = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let team_raw = cols.get(&record, 0);
        let team = team_raw.parse::<Team>().map_err(|value| DataError::UnknownTeam {
            row,
            value,
        })?;
        let event = EventRecord {
            team,
            kind: cols.get(&record, 1).to_string(),
            subtype: cols.get(&record, 2).to_string(),
            period: parse_field(cols.get(&record, 3), row, 3)?,
            start_frame: parse_field(cols.get(&record, 4), row, 4)?,
            start_time: parse_field(cols.get(&record, 5), row, 5)?,
            end_frame: parse_field(cols.get(&record, 6), row, 6)?,
            end_time: parse_field(cols.get(&record, 7), row, 7)?,
            from: optional_text(cols.get(&record, 8)),
            to: optional_text(cols.get(&record, 9)),
            start: optional_point(cols.get(&record, 10), cols.get(&record, 11), row, 10)?,
            end: optional_point(cols.get(&record, 12), cols.get(&record, 13), row, 12)?,
        };
        event.validate().map_err(|e| match e {
            DataError::Validation(msg) => DataError::Validation(format!("row {row}: {msg}")),
            other => other,
        })?;
        events.push(event);
    }
    events.sort_by(|a, b| {
        a.period
            .cmp(&b.period)
            .then(a.start_time.total_cmp(&b.start_time))
    });
    Ok(events)
}

fn point_cells(p: Option<Vec2>) -> [String; 2] {
    match p {
        Some(p) => [format_f64(p.x), format_f64(p.y)],
        None => [String::new(), String::new()],
    }
}

pub fn write_events<W: io::Write>(events: &[EventRecord], writer: W) -> Result<(), DataError> {
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    wtr.write_record(EVENT_COLUMNS)?;
    for e in events {
        let [sx, sy] = point_cells(e.start);
        let [ex, ey] = point_cells(e.end);
        wtr.write_record([
            e.team.to_string(),
            e.kind.clone(),
            e.subtype.clone(),
            e.period.to_string(),
            e.start_frame.to_string(),
            format_f64(e.start_time),
            e.end_frame.to_string(),
            format_f64(e.end_time),
            e.from.clone().unwrap_or_default(),
            e.to.clone().unwrap_or_default(),
            sx,
            sy,
            ex,
            ey,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Team,Type,Subtype,Period,Start Frame,Start Time [s],End Frame,End Time [s],From,To,Start X,Start Y,End X,End Y";

    #[test]
    fn maps_fields() {
        let csv = format!("{HEADER}\nHome,PASS,success,1,120,12,141,14.1,Home_3,Home_5,1.5,-2,20.25,4\n");
        let events = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(
            events,
            vec![EventRecord {
                team: Team::Home,
                kind: "PASS".into(),
                subtype: "success".into(),
                period: 1,
                start_frame: 120,
                start_time: 12.0,
                end_frame: 141,
                end_time: 14.1,
                from: Some("Home_3".into()),
                to: Some("Home_5".into()),
                start: Some(Vec2::new(1.5, -2.0)),
                end: Some(Vec2::new(20.25, 4.0)),
            }]
        );
    }

    #[test]
    fn sorts_by_start_time_and_allows_empty_to() {
        let csv = format!(
            "{HEADER}\nAway,SHOT,,1,50,5,52,5.2,Away_9,,1,1,2,2\nHome,PASS,,1,10,1,12,1.2,Home_1,Home_2,0,0,1,1\n"
        );
        let events = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(events[0].kind, "PASS");
        assert_eq!(events[1].kind, "SHOT");
        assert_eq!(events[1].to, None);
    }

    #[test]
    fn unknown_team_is_rejected() {
        let csv = format!("{HEADER}\nVisitors,PASS,,1,1,0,2,0.1,,,,,,\n");
        assert!(matches!(
            parse_events(csv.as_bytes()),
            Err(DataError::UnknownTeam { row: 1, .. })
        ));
    }

    #[test]
    fn reversed_times_are_rejected() {
        let csv = format!("{HEADER}\nHome,PASS,,1,1,3,2,2,,,,,,\n");
        match parse_events(csv.as_bytes()) {
            Err(DataError::Validation(msg)) => assert!(msg.contains("row 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_header_column() {
        let csv = HEADER.replace(",End Y", "") + "\n";
        assert!(matches!(
            parse_events(csv.as_bytes()),
            Err(DataError::MissingColumn(c)) if c == "End Y"
        ));
    }
}
