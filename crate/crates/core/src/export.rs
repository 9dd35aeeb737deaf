//! CSV and JSON-lines artifacts: frontiers, witnesses, provenance,
//! vulnerability reports, normalized curves and flow dumps.
//!
//! Output is LF-terminated UTF-8 with a fixed column order. Frontier files
//! hold raw integers only; report floats are written with 12 significant
//! digits.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{ParetoFrontier, ProvenanceEntry};
use crate::supergraph::SuperGraph;
use crate::vulnerability::{NormPoint, VulnerabilityReport};

pub const FRONTIER_HEADER: [&str; 4] = ["z2", "z1", "abs_z1", "witness_id"];
pub const REPORT_HEADER: [&str; 6] = [
    "label",
    "m",
    "concavity_index",
    "n_points",
    "z1_max",
    "z2_max",
];
pub const NORMALIZED_HEADER: [&str; 2] = ["z2_norm", "abs_z1_norm"];
pub const FLOW_HEADER: [&str; 8] = [
    "arc", "tail", "head", "capacity", "class", "object", "t", "flow",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {detail}")]
    Parse { line: u64, detail: String },
}

impl From<io::Error> for ExportError {
    fn from(source: io::Error) -> Self {
        ExportError::Io {
            path: String::new(),
            source,
        }
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// `x` rounded to 12 significant digits, printed in plain decimal.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float round-trips");
    // Avoid a negative zero.
    format!("{}", rounded + 0.0)
}

fn witness_id(k: usize) -> String {
    format!("w{k}")
}

pub fn write_frontier_csv<W: Write>(f: &ParetoFrontier, w: W) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(FRONTIER_HEADER)?;
    for (k, p) in f.points.iter().enumerate() {
        out.write_record([
            p.z2.to_string(),
            p.z1.to_string(),
            p.z1.abs().to_string(),
            witness_id(k),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One frontier row as read back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub z2: i64,
    pub z1: i64,
    pub abs_z1: i64,
    pub witness_id: String,
}

pub fn read_frontier_csv<R: Read>(r: R) -> Result<Vec<FrontierRow>, ExportError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != FRONTIER_HEADER {
        return Err(ExportError::Parse {
            line: 1,
            detail: format!("expected header {}", FRONTIER_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        let row: FrontierRow = rec?;
        if row.abs_z1 != row.z1.abs() {
            return Err(ExportError::Parse {
                line: rows.len() as u64 + 2,
                detail: format!("abs_z1 {} does not match z1 {}", row.abs_z1, row.z1),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Raw `(z1, z2)` pairs of a frontier file.
pub fn frontier_points(rows: &[FrontierRow]) -> Vec<(i64, i64)> {
    rows.iter().map(|r| (r.z1, r.z2)).collect()
}

#[derive(Serialize)]
struct WitnessLine<'a> {
    witness_id: String,
    z1: i64,
    z2: i64,
    arcs: u32,
    nonzeros: &'a [(u32, i64)],
}

/// One JSON object per frontier point with its sparse flow.
pub fn write_witnesses_jsonl<W: Write>(f: &ParetoFrontier, mut w: W) -> Result<(), ExportError> {
    for (k, p) in f.points.iter().enumerate() {
        let line = WitnessLine {
            witness_id: witness_id(k),
            z1: p.z1,
            z2: p.z2,
            arcs: p.witness.arcs,
            nonzeros: &p.witness.nonzeros,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_provenance_jsonl<W: Write>(
    entries: &[ProvenanceEntry],
    mut w: W,
) -> Result<(), ExportError> {
    for e in entries {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_provenance_jsonl<R: Read>(r: R) -> Result<Vec<ProvenanceEntry>, ExportError> {
    let mut text = String::new();
    io::BufReader::new(r).read_to_string(&mut text)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_sig12).unwrap_or_default()
}

pub fn write_reports_csv<W: Write>(
    reports: &[VulnerabilityReport],
    w: W,
) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(REPORT_HEADER)?;
    for r in reports {
        out.write_record([
            r.label.clone(),
            opt_float(r.m),
            opt_float(r.concavity_index),
            r.n_points().to_string(),
            r.z1_max.to_string(),
            r.z2_max.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One report row as read back; absent metrics are empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub m: Option<f64>,
    pub concavity_index: Option<f64>,
    pub n_points: usize,
    pub z1_max: i64,
    pub z2_max: i64,
}

pub fn read_reports_csv<R: Read>(r: R) -> Result<Vec<ReportRow>, ExportError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != REPORT_HEADER {
        return Err(ExportError::Parse {
            line: 1,
            detail: format!("expected header {}", REPORT_HEADER.join(",")),
        });
    }
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_normalized_csv<W: Write>(pts: &[NormPoint], w: W) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(NORMALIZED_HEADER)?;
    for &(x, y) in pts {
        out.write_record([format_sig12(x), format_sig12(y)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_normalized_csv<R: Read>(r: R) -> Result<Vec<NormPoint>, ExportError> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

/// Edge list of `g` with one extra `flow` column.
pub fn write_flow_csv<W: Write>(g: &SuperGraph, flow: &[i64], w: W) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(FLOW_HEADER)?;
    for (a, &x) in flow.iter().enumerate().take(g.arc_count()) {
        let key = g.key(a);
        out.write_record([
            a.to_string(),
            g.node_label(g.tail(a)),
            g.node_label(g.head(a)),
            g.capacity(a).to_string(),
            key.class.as_str().to_string(),
            g.object_id(a).to_string(),
            key.t.to_string(),
            x.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `contents` produced by `f` to `path`, creating parent directories.
pub fn write_file(
    path: &Path,
    f: impl FnOnce(&mut Vec<u8>) -> Result<(), ExportError>,
) -> Result<(), ExportError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    let io_err = |source| ExportError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    fs::write(path, buf).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::pareto_frontier;
    use crate::control::optimal_control;
    use crate::supergraph::fixtures::crossing_with;
    use crate::vulnerability::RunSettings;

    fn settings() -> RunSettings {
        RunSettings {
            network: "crossing".into(),
            demand_veh_per_hr: 0,
            horizon_steps: 6,
        }
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.5), "0.5");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(4.0), "4");
        assert_eq!(format_sig12(-0.0), "0");
        assert_eq!(format_sig12(123_456_789.123_456_8), "123456789.123");
    }

    #[test]
    fn frontier_round_trip() {
        let g = crossing_with(1, 6, 2);
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        let mut buf = Vec::new();
        write_frontier_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "z2,z1,abs_z1,witness_id\n0,-2,2,w0\n2,-4,4,w1\n");
        let rows = read_frontier_csv(buf.as_slice()).unwrap();
        assert_eq!(frontier_points(&rows), f.values());
        let mut again = Vec::new();
        write_frontier_csv(&f, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn bad_frontier_rows_are_rejected() {
        assert!(read_frontier_csv("z2,z1,abs_z1,witness_id\n0,-2,3,w0\n".as_bytes()).is_err());
        assert!(read_frontier_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_frontier_csv("z2,z1,abs_z1,witness_id\n0,x,3,w0\n".as_bytes()).is_err());
    }

    #[test]
    fn report_round_trip() {
        let r = VulnerabilityReport::from_points("A", settings(), &[(-2, 0), (-5, 3), (-6, 9)]);
        let d = VulnerabilityReport::from_points("deg", settings(), &[(0, 0)]);
        let mut buf = Vec::new();
        write_reports_csv(&[r.clone(), d], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "label,m,concavity_index,n_points,z1_max,z2_max\nA,1.5,0.805555555556,3,6,9\ndeg,,,1,0,0\n"
        );
        let rows = read_reports_csv(buf.as_slice()).unwrap();
        assert_eq!(rows[0].m, r.m);
        assert_eq!(rows[1].m, None);
    }

    #[test]
    fn empty_report_list_is_header_only() {
        let mut buf = Vec::new();
        write_reports_csv(&[], &mut buf).unwrap();
        assert_eq!(buf, b"label,m,concavity_index,n_points,z1_max,z2_max\n");
    }

    #[test]
    fn normalized_and_provenance_round_trip() {
        let pts = vec![(0.0, 0.25), (1.0 / 3.0, 0.5), (1.0, 1.0)];
        let mut buf = Vec::new();
        write_normalized_csv(&pts, &mut buf).unwrap();
        let back = read_normalized_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0], pts[0]);
        assert!((back[1].0 - pts[1].0).abs() < 1e-12);

        let g = crossing_with(1, 6, 2);
        let opt = optimal_control(&g).unwrap();
        let f = pareto_frontier(&g, &opt).unwrap();
        let mut buf = Vec::new();
        write_provenance_jsonl(&f.provenance, &mut buf).unwrap();
        assert_eq!(read_provenance_jsonl(buf.as_slice()).unwrap(), f.provenance);
        let mut wit = Vec::new();
        write_witnesses_jsonl(&f, &mut wit).unwrap();
        assert_eq!(
            String::from_utf8(wit).unwrap().lines().count(),
            f.points.len()
        );
    }

    #[test]
    fn flow_dump_matches_edge_list() {
        let g = crossing_with(1, 3, 1);
        let opt = optimal_control(&g).unwrap();
        let mut buf = Vec::new();
        write_flow_csv(&g, &opt.flow.flow, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let edges: Vec<String> = g.edge_list().lines().map(|l| l.replace(' ', ",")).collect();
        for (a, (line, edge)) in text.lines().skip(1).zip(&edges).enumerate() {
            assert_eq!(line, format!("{a},{edge},{}", opt.flow.flow[a]));
        }
        assert_eq!(text.lines().count(), g.arc_count() + 1);
    }
}
