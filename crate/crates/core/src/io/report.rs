//! CSV artifacts.
//!
//! | file             | header                                               |
//! |------------------|------------------------------------------------------|
//! | `agents.csv`     | `agent_id,duration_ms,duration_text,exit_id,waits`   |
//! | `durations.csv`  | `agent_id,loc_X_Y,...` (one duration column per candidate) |
//! | `candidates.csv` | `location_x,location_y,average_s,is_best`            |
//! | `designs.csv`    | `design,best_average_s,is_best`                      |
//! | `trace.csv`      | `tick,agent_id,x,y,status`                           |
//!
//! Seconds carry three decimals, truncated to whole milliseconds.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::domain::{Point, Side};
use crate::engine::{RunResult, Simulation};
use crate::error::{Error, Result};
use crate::io::duration::{format_seconds, parse_duration, DurationMs};
use crate::optimizer::{select_best, DesignReport, OptimizationReport};

pub const AGENTS_HEADER: [&str; 5] = ["agent_id", "duration_ms", "duration_text", "exit_id", "waits"];
pub const CANDIDATES_HEADER: [&str; 4] = ["location_x", "location_y", "average_s", "is_best"];
pub const DESIGNS_HEADER: [&str; 3] = ["design", "best_average_s", "is_best"];
pub const TRACE_HEADER: [&str; 5] = ["tick", "agent_id", "x", "y", "status"];

fn csv_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn write_agents_csv(result: &RunResult, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..result.len())
        .map(|i| {
            vec![
                result.agent_ids[i].to_string(),
                result.durations_ms[i].to_string(),
                DurationMs(result.durations_ms[i]).to_string(),
                result.exit_ids[i].to_string(),
                result.wait_events[i].to_string(),
            ]
        })
        .collect();
    write_rows(path, &header(&AGENTS_HEADER), &rows)
}

fn empty_guard(path: &Path, empty: bool, what: &str) -> Result<()> {
    if empty {
        Err(csv_err(path, format!("refusing to write an empty {what} list")))
    } else {
        Ok(())
    }
}

pub fn write_candidates_csv(report: &OptimizationReport, path: &Path) -> Result<()> {
    empty_guard(path, report.candidates.is_empty(), "candidate")?;
    let rows: Vec<Vec<String>> = report
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                c.location.x.to_string(),
                c.location.y.to_string(),
                format_seconds(c.result.average_s),
                (i == report.best_index).to_string(),
            ]
        })
        .collect();
    write_rows(path, &header(&CANDIDATES_HEADER), &rows)
}

/// One duration column per candidate, rows in agent order.
pub fn write_durations_table(report: &OptimizationReport, path: &Path) -> Result<()> {
    empty_guard(path, report.candidates.is_empty(), "candidate")?;
    let rows_n = report.candidates.iter().map(|c| c.result.len()).max().unwrap_or(0);
    let mut head = vec!["agent_id".to_string()];
    head.extend(
        report
            .candidates
            .iter()
            .map(|c| format!("loc_{}_{}", c.location.x, c.location.y)),
    );
    let rows: Vec<Vec<String>> = (0..rows_n)
        .map(|i| {
            let mut row = vec![(i + 1).to_string()];
            row.extend(report.candidates.iter().map(|c| {
                c.result
                    .durations_ms
                    .get(i)
                    .map(|&d| DurationMs(d).to_string())
                    .unwrap_or_default()
            }));
            row
        })
        .collect();
    write_rows(path, &head, &rows)
}

/// `best` marks the winning design.
pub fn write_designs_csv(reports: &[DesignReport], best: usize, path: &Path) -> Result<()> {
    empty_guard(path, reports.is_empty(), "design")?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                r.design_name.clone(),
                format_seconds(r.best_average_s),
                (i == best).to_string(),
            ]
        })
        .collect();
    write_rows(path, &header(&DESIGNS_HEADER), &rows)
}

/// Files written for one optimized design.
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFiles {
    pub agents: PathBuf,
    pub durations: PathBuf,
    pub candidates: PathBuf,
    pub designs: PathBuf,
}

/// Writes the best candidate's per-agent CSV, the durations table, the
/// candidate summary and a one-row design CSV under `dir`.
pub fn write_optimization(dir: &Path, design: &DesignReport) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = WrittenFiles {
        agents: dir.join("agents.csv"),
        durations: dir.join("durations.csv"),
        candidates: dir.join("candidates.csv"),
        designs: dir.join("designs.csv"),
    };
    write_agents_csv(&design.optimization.best().result, &files.agents)?;
    write_durations_table(&design.optimization, &files.durations)?;
    write_candidates_csv(&design.optimization, &files.candidates)?;
    write_designs_csv(std::slice::from_ref(design), 0, &files.designs)?;
    Ok(files)
}

/// Per-tick agent positions, fed from a simulation observer.
pub struct TraceWriter {
    path: PathBuf,
    writer: csv::Writer<File>,
    error: Option<Error>,
}

impl TraceWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut writer = writer(path)?;
        writer.write_record(TRACE_HEADER).map_err(|e| csv_err(path, e))?;
        Ok(TraceWriter {
            path: path.to_path_buf(),
            writer,
            error: None,
        })
    }

    /// Appends one row per agent; the first write failure is kept for
    /// [`TraceWriter::finish`].
    pub fn record(&mut self, sim: &Simulation) {
        if self.error.is_some() {
            return;
        }
        for a in sim.agents() {
            let row = [
                sim.tick().to_string(),
                a.id.to_string(),
                a.pos.x.to_string(),
                a.pos.y.to_string(),
                a.status.as_str().to_string(),
            ];
            if let Err(e) = self.writer.write_record(&row) {
                self.error = Some(csv_err(&self.path, e));
                return;
            }
        }
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Recorded durations for several candidate locations.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationsTable {
    pub locations: Vec<Point>,
    pub columns: Vec<Vec<u64>>,
}

impl DurationsTable {
    /// Side guessed from the locations: a shared `x` means a vertical wall.
    fn side(&self) -> Side {
        let xs_equal = self.locations.windows(2).all(|w| w[0].x == w[1].x);
        let ys_equal = self.locations.windows(2).all(|w| w[0].y == w[1].y);
        let first = self.locations.first().copied().unwrap_or(Point::new(1, 1));
        match (xs_equal, ys_equal) {
            (true, _) if first.x == 0 => Side::Left,
            (true, _) => Side::Right,
            (false, true) if first.y == 0 => Side::Top,
            (false, true) => Side::Bottom,
            _ => Side::Right,
        }
    }

    pub fn to_report(&self) -> Result<OptimizationReport> {
        let candidates = self
            .locations
            .iter()
            .zip(&self.columns)
            .map(|(p, col)| (*p, RunResult::from_durations(col.clone())))
            .collect();
        Ok(select_best(self.side(), candidates)?)
    }
}

/// Any CSV the tool writes, read back.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportCsv {
    Agents(Vec<u64>),
    Durations(DurationsTable),
    Candidates(Vec<(Point, f64)>),
    Designs(Vec<(String, f64)>),
}

fn parse_cell<T: std::str::FromStr>(path: &Path, row: usize, cell: &str) -> Result<T> {
    cell.trim()
        .parse()
        .map_err(|_| csv_err(path, format!("row {row}: `{cell}` is not a number")))
}

fn parse_location(path: &Path, name: &str) -> Result<Point> {
    let bad = || csv_err(path, format!("column `{name}` is not loc_X_Y"));
    let rest = name.strip_prefix("loc_").ok_or_else(bad)?;
    let (x, y) = rest.split_once('_').ok_or_else(bad)?;
    Ok(Point::new(x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?))
}

fn duration_cell(path: &Path, row: usize, cell: &str) -> Result<u64> {
    if cell.contains(':') {
        parse_duration(cell.trim())
            .map(|d| d.0)
            .map_err(|e| csv_err(path, format!("row {row}: {e}")))
    } else {
        parse_cell(path, row, cell)
    }
}

pub fn read_report_csv(path: &Path) -> Result<ReportCsv> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let head: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let records = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| csv_err(path, e))?;
    let head_ref: Vec<&str> = head.iter().map(String::as_str).collect();

    if head_ref == AGENTS_HEADER {
        let durations = records
            .iter()
            .enumerate()
            .map(|(i, r)| parse_cell(path, i + 2, &r[1]))
            .collect::<Result<_>>()?;
        return Ok(ReportCsv::Agents(durations));
    }
    if head_ref == CANDIDATES_HEADER {
        let rows = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let p = Point::new(parse_cell(path, i + 2, &r[0])?, parse_cell(path, i + 2, &r[1])?);
                Ok((p, parse_cell(path, i + 2, &r[2])?))
            })
            .collect::<Result<_>>()?;
        return Ok(ReportCsv::Candidates(rows));
    }
    if head_ref == DESIGNS_HEADER {
        let rows = records
            .iter()
            .enumerate()
            .map(|(i, r)| Ok((r[0].to_string(), parse_cell(path, i + 2, &r[1])?)))
            .collect::<Result<_>>()?;
        return Ok(ReportCsv::Designs(rows));
    }
    if head_ref.first() == Some(&"agent_id") && head_ref.len() > 1 {
        let locations = head_ref[1..]
            .iter()
            .map(|h| parse_location(path, h))
            .collect::<Result<Vec<_>>>()?;
        let mut columns = vec![Vec::new(); locations.len()];
        for (i, r) in records.iter().enumerate() {
            for (c, col) in columns.iter_mut().enumerate() {
                let cell = r.get(c + 1).unwrap_or("");
                if !cell.is_empty() {
                    col.push(duration_cell(path, i + 2, cell)?);
                }
            }
        }
        return Ok(ReportCsv::Durations(DurationsTable { locations, columns }));
    }
    Err(csv_err(path, format!("unrecognised header `{}`", head.join(","))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_lists_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let report = OptimizationReport {
            side: Side::Right,
            candidates: Vec::new(),
            best_index: 0,
        };
        let path = dir.path().join("c.csv");
        assert!(write_candidates_csv(&report, &path).is_err());
        assert!(!path.exists());
        assert!(write_designs_csv(&[], 0, &dir.path().join("d.csv")).is_err());
    }

    #[test]
    fn unwritable_path() {
        let r = RunResult::from_durations(vec![1]);
        let err = write_agents_csv(&r, Path::new("/nonexistent/dir/agents.csv")).unwrap_err();
        assert_eq!(err.kind(), "io");
    }

    #[test]
    fn agents_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agents.csv");
        let r = RunResult::from_durations(vec![18225, 8077, 15003]);
        write_agents_csv(&r, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("agent_id,duration_ms,duration_text,exit_id,waits\n1,18225,0:18:225,0,0\n"));
        assert_eq!(read_report_csv(&path).unwrap(), ReportCsv::Agents(vec![18225, 8077, 15003]));
    }

    #[test]
    fn unknown_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_report_csv(&path).is_err());
    }
}
