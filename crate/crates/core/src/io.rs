//! Flat-file formats: bounce and section CSV, JSON documents.
//!
//! Every file starts with a metadata block (tool version, configuration and
//! seed). In CSV it is a run of `#` comment lines; in JSON it is the `meta`
//! member of the top-level object. Floating-point CSV fields are written with
//! 17 significant digits, so a read-back is exact.

use std::io::{BufRead, BufReader, Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::sos::{SectionDataset, SectionPoint};

/// Provenance written at the top of every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Echo of the configuration that produced the file.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
}

impl Metadata {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Metadata {
        Metadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seed,
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_header<W: Write>(w: &mut W, meta: &Metadata) -> Result<()> {
    writeln!(w, "# tool: {} {}", meta.tool, meta.version).map_err(io_err)?;
    writeln!(w, "# command: {}", meta.command).map_err(io_err)?;
    let config = serde_json::to_string(&meta.config).map_err(io_err)?;
    writeln!(w, "# config: {config}").map_err(io_err)?;
    match meta.seed {
        Some(seed) => writeln!(w, "# seed: {seed}"),
        None => writeln!(w, "# seed: none"),
    }
    .map_err(io_err)
}

/// Reads the `#` header and returns it with the remaining text.
fn split_header<R: Read>(r: R) -> Result<(Metadata, String)> {
    let mut meta = Metadata::new("", serde_json::Value::Null, None);
    meta.tool.clear();
    meta.version.clear();
    let mut body = String::new();
    for line in BufReader::new(r).lines() {
        let line = line.map_err(io_err)?;
        let Some(rest) = line.strip_prefix("# ") else {
            body.push_str(&line);
            body.push('\n');
            continue;
        };
        if let Some(v) = rest.strip_prefix("tool: ") {
            let mut parts = v.splitn(2, ' ');
            meta.tool = parts.next().unwrap_or_default().to_string();
            meta.version = parts.next().unwrap_or_default().to_string();
        } else if let Some(v) = rest.strip_prefix("command: ") {
            meta.command = v.to_string();
        } else if let Some(v) = rest.strip_prefix("config: ") {
            meta.config = serde_json::from_str(v).map_err(io_err)?;
        } else if let Some(v) = rest.strip_prefix("seed: ") {
            meta.seed = if v == "none" {
                None
            } else {
                Some(v.parse().map_err(io_err)?)
            };
        }
    }
    Ok((meta, body))
}

/// One row of a bounce CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BounceRow {
    pub index: usize,
    pub arc_id: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub theta: f64,
    pub chord_length: f64,
}

pub const BOUNCE_COLUMNS: [&str; 8] = ["index", "arc_id", "t", "x", "y", "s", "theta", "chord_length"];

pub const SECTION_COLUMNS: [&str; 4] = ["trajectory_id", "bounce_index", "s", "theta"];

pub fn bounce_rows(traj: &Trajectory) -> Vec<BounceRow> {
    traj.bounces
        .iter()
        .enumerate()
        .map(|(index, b)| BounceRow {
            index,
            arc_id: b.at.arc_id,
            t: b.at.t,
            x: b.at.point.x,
            y: b.at.point.y,
            s: b.at.s,
            theta: b.theta,
            chord_length: b.chord_length,
        })
        .collect()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

pub fn write_bounce_csv<W: Write>(mut w: W, meta: &Metadata, traj: &Trajectory) -> Result<()> {
    write_header(&mut w, meta)?;
    let mut out = csv_writer(w);
    out.write_record(BOUNCE_COLUMNS).map_err(io_err)?;
    for r in bounce_rows(traj) {
        out.write_record([
            r.index.to_string(),
            r.arc_id.to_string(),
            fmt_f64(r.t),
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.s),
            fmt_f64(r.theta),
            fmt_f64(r.chord_length),
        ])
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn read_rows<R: Read, T: DeserializeOwned>(r: R, columns: &[&str]) -> Result<(Metadata, Vec<T>)> {
    let (meta, body) = split_header(r)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = reader.headers().map_err(io_err)?.clone();
    if headers.iter().ne(columns.iter().copied()) {
        return Err(Error::Io(format!(
            "unexpected columns {:?}, want {columns:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(io_err)?;
    Ok((meta, rows))
}

pub fn read_bounce_csv<R: Read>(r: R) -> Result<(Metadata, Vec<BounceRow>)> {
    read_rows(r, &BOUNCE_COLUMNS)
}

pub fn write_section_csv<W: Write>(mut w: W, meta: &Metadata, section: &SectionDataset) -> Result<()> {
    write_header(&mut w, meta)?;
    let mut out = csv_writer(w);
    out.write_record(SECTION_COLUMNS).map_err(io_err)?;
    for p in &section.points {
        out.write_record([
            p.trajectory_id.to_string(),
            p.bounce_index.to_string(),
            fmt_f64(p.s),
            fmt_f64(p.theta),
        ])
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_section_csv<R: Read>(r: R) -> Result<(Metadata, Vec<SectionPoint>)> {
    read_rows(r, &SECTION_COLUMNS)
}

#[derive(Serialize, Deserialize)]
struct Document<T> {
    meta: Metadata,
    kind: String,
    data: T,
}

/// Writes `{"meta": …, "kind": …, "data": …}` as pretty-printed JSON.
pub fn write_json<W: Write, T: Serialize>(mut w: W, meta: &Metadata, kind: &str, data: &T) -> Result<()> {
    let doc = Document {
        meta: meta.clone(),
        kind: kind.to_string(),
        data,
    };
    serde_json::to_writer_pretty(&mut w, &doc).map_err(io_err)?;
    writeln!(w).map_err(io_err)
}

/// Reads a JSON document, checking its `kind`.
pub fn read_json<R: Read, T: DeserializeOwned>(r: R, kind: &str) -> Result<(Metadata, T)> {
    let doc: Document<T> = serde_json::from_reader(r).map_err(io_err)?;
    if doc.kind != kind {
        return Err(Error::Io(format!("expected a {kind} document, found {}", doc.kind)));
    }
    Ok((doc.meta, doc.data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::trace_from_boundary;
    use crate::periodic::{symmetric_orbit, PeriodicOrbit};
    use crate::sos::{build_section, Reduction};
    use crate::table::{build_table, Frame};

    fn meta() -> Metadata {
        Metadata::new("trace", serde_json::json!({"bounces": 30, "theta": 0.7}), Some(42))
    }

    #[test]
    fn bounce_csv_round_trips_exactly() {
        let table = build_table(6, Frame::HexagonCanonical).unwrap();
        let traj = trace_from_boundary(&table, 2.5, 0.7, 30).unwrap();
        let mut buf = Vec::new();
        write_bounce_csv(&mut buf, &meta(), &traj).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# tool: string-billiard "));
        assert!(text.contains("# seed: 42"));
        let (m, rows) = read_bounce_csv(buf.as_slice()).unwrap();
        assert_eq!(m, meta());
        assert_eq!(rows, bounce_rows(&traj));
    }

    #[test]
    fn section_csv_round_trips_exactly() {
        let table = build_table(6, Frame::HexagonCanonical).unwrap();
        let trajs: Vec<_> = (0..3)
            .map(|i| trace_from_boundary(&table, 1.0 + i as f64, 0.4 + 0.3 * i as f64, 20).unwrap())
            .collect();
        let sec = build_section(&table, &trajs, Reduction::Full).unwrap();
        let mut buf = Vec::new();
        write_section_csv(&mut buf, &meta(), &sec).unwrap();
        let (_, points) = read_section_csv(buf.as_slice()).unwrap();
        assert_eq!(points, sec.points);
    }

    #[test]
    fn json_round_trips_and_checks_kind() {
        let table = build_table(6, Frame::HexagonCanonical).unwrap();
        let orbit = symmetric_orbit(&table, 5).unwrap();
        let mut buf = Vec::new();
        write_json(&mut buf, &meta(), "orbit", &orbit).unwrap();
        let (m, back): (Metadata, PeriodicOrbit) = read_json(buf.as_slice(), "orbit").unwrap();
        assert_eq!(m, meta());
        assert_eq!(back, orbit);
        assert!(read_json::<_, PeriodicOrbit>(buf.as_slice(), "table").is_err());
    }

    #[test]
    fn wrong_columns_are_rejected() {
        let text = "# seed: none\na,b\n1,2\n";
        assert!(read_section_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn seventeen_digits() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
