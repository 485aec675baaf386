use std::io;

use serde::{Deserialize, Serialize};

use super::{format_f64, DataError, SportConfig, Team};
use crate::geometry::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRow {
    pub period: u8,
    /// seconds
    pub time: f64,
    /// One entry per player slot; `None` where the cell pair was blank.
    pub players: Vec<Option<Vec2>>,
    pub ball: Option<Vec2>,
}

/// One side's tracking table in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingTable {
    pub side: Team,
    pub rows: Vec<TrackingRow>,
}

impl TrackingTable {
    pub fn players_per_side(&self) -> Option<usize> {
        self.rows.first().map(|r| r.players.len())
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn parse_number(raw: &str, row: usize, column: &str) -> Result<f64, DataError> {
    raw.trim().parse::<f64>().map_err(|e| DataError::Parse {
        row,
        column: column.to_string(),
        message: format!("`{raw}` is not a number ({e})"),
    })
}

/// Reads an `(x, y)` column pair. Both blank gives `None`; one blank is an error.
fn parse_point(
    record: &csv::StringRecord,
    (ix, iy): (usize, usize),
    row: usize,
    name: &str,
) -> Result<Option<Vec2>, DataError> {
    let x = record.get(ix).unwrap_or("").trim();
    let y = record.get(iy).unwrap_or("").trim();
    match (x.is_empty(), y.is_empty()) {
        (true, true) => Ok(None),
        (false, false) => Ok(Some(Vec2::new(
            parse_number(x, row, &format!("{name}_x"))?,
            parse_number(y, row, &format!("{name}_y"))?,
        ))),
        _ => Err(DataError::Parse {
            row,
            column: name.to_string(),
            message: "position has only one coordinate".into(),
        }),
    }
}

/// Parses one side's tracking CSV. `row` numbers in errors count data rows from 1.
pub fn parse_tracking<R: io::Read>(
    reader: R,
    config: &SportConfig,
    side: Team,
) -> Result<TrackingTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let period_col = column_index(&headers, "Period")?;
    let time_col = column_index(&headers, "Time [s]")?;
    let player_cols = (1..=config.players_per_side)
        .map(|i| {
            Ok((
                column_index(&headers, &format!("{side}_{i}_x"))?,
                column_index(&headers, &format!("{side}_{i}_y"))?,
            ))
        })
        .collect::<Result<Vec<_>, DataError>>()?;
    let ball_cols = (
        column_index(&headers, "ball_x")?,
        column_index(&headers, "ball_y")?,
    );

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let period_raw = record.get(period_col).unwrap_or("").trim();
        let period: u8 = period_raw.parse().map_err(|_| DataError::Parse {
            row,
            column: "Period".into(),
            message: format!("`{period_raw}` is not a period number"),
        })?;
        if !(1..=4).contains(&period) {
            return Err(DataError::Parse {
                row,
                column: "Period".into(),
                message: format!("period {period} outside 1..=4"),
            });
        }
        let time = parse_number(record.get(time_col).unwrap_or(""), row, "Time [s]")?;
        let players = player_cols
            .iter()
            .enumerate()
            .map(|(k, &cols)| parse_point(&record, cols, row, &format!("{side}_{}", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let ball = parse_point(&record, ball_cols, row, "ball")?;
        rows.push(TrackingRow {
            period,
            time,
            players,
            ball,
        });
    }
    Ok(TrackingTable { side, rows })
}

fn push_point(out: &mut Vec<String>, p: Option<Vec2>) {
    match p {
        Some(p) => {
            out.push(format_f64(p.x));
            out.push(format_f64(p.y));
        }
        None => {
            out.push(String::new());
            out.push(String::new());
        }
    }
}

/// Writes the canonical form: `Period,Time [s],<Side>_1_x,<Side>_1_y,...,ball_x,ball_y`.
pub fn write_tracking<W: io::Write>(table: &TrackingTable, writer: W) -> Result<(), DataError> {
    let k = table.players_per_side().unwrap_or(0);
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    let mut header = vec!["Period".to_string(), "Time [s]".to_string()];
    for i in 1..=k {
        header.push(format!("{}_{i}_x", table.side));
        header.push(format!("{}_{i}_y", table.side));
    }
    header.push("ball_x".into());
    header.push("ball_y".into());
    wtr.write_record(&header)?;
    for row in &table.rows {
        if row.players.len() != k {
            return Err(DataError::Validation(format!(
                "row at t={} has {} players, expected {k}",
                row.time,
                row.players.len()
            )));
        }
        let mut out = vec![row.period.to_string(), format_f64(row.time)];
        for &p in &row.players {
            push_point(&mut out, p);
        }
        push_point(&mut out, row.ball);
        wtr.write_record(&out)?;
    }
    wtr.flush()?;
    Ok(())
}
