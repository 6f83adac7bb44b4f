//! Recomputes averages and the winner from a CSV written earlier.

use std::fmt;
use std::path::Path;

use crate::domain::Point;
use crate::engine::average_seconds;
use crate::error::{Error, Result};
use crate::io::duration::format_seconds;
use crate::io::report::{read_report_csv, ReportCsv};
use crate::optimizer::argmin;

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayOutcome {
    Run { average_s: f64 },
    Candidates { locations: Vec<Point>, averages: Vec<f64>, best: usize },
    Designs { names: Vec<String>, averages: Vec<f64>, best: usize },
}

impl ReplayOutcome {
    pub fn best_average_s(&self) -> f64 {
        match self {
            ReplayOutcome::Run { average_s } => *average_s,
            ReplayOutcome::Candidates { averages, best, .. } | ReplayOutcome::Designs { averages, best, .. } => {
                averages[*best]
            }
        }
    }
}

impl fmt::Display for ReplayOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayOutcome::Run { average_s } => writeln!(f, "avg={}", format_seconds(*average_s)),
            ReplayOutcome::Candidates { locations, averages, best } => {
                for (p, a) in locations.iter().zip(averages) {
                    writeln!(f, "location={p} avg={}", format_seconds(*a))?;
                }
                writeln!(f, "best={} avg={}", locations[*best], format_seconds(averages[*best]))
            }
            ReplayOutcome::Designs { names, averages, best } => {
                for (n, a) in names.iter().zip(averages) {
                    writeln!(f, "design={n} avg={}", format_seconds(*a))?;
                }
                writeln!(f, "best_design={} avg={}", names[*best], format_seconds(averages[*best]))
            }
        }
    }
}

fn no_rows(path: &Path) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: "no rows to average".into(),
    }
}

pub fn replay_average(path: &Path) -> Result<ReplayOutcome> {
    match read_report_csv(path)? {
        ReportCsv::Agents(durations) => {
            if durations.is_empty() {
                return Err(no_rows(path));
            }
            Ok(ReplayOutcome::Run {
                average_s: average_seconds(&durations),
            })
        }
        ReportCsv::Durations(table) => {
            if table.columns.iter().any(Vec::is_empty) {
                return Err(no_rows(path));
            }
            let averages: Vec<f64> = table.columns.iter().map(|c| average_seconds(c)).collect();
            let best = argmin(&averages).ok_or_else(|| no_rows(path))?;
            Ok(ReplayOutcome::Candidates {
                locations: table.locations,
                averages,
                best,
            })
        }
        ReportCsv::Candidates(rows) => {
            let (locations, averages): (Vec<Point>, Vec<f64>) = rows.into_iter().unzip();
            let best = argmin(&averages).ok_or_else(|| no_rows(path))?;
            Ok(ReplayOutcome::Candidates { locations, averages, best })
        }
        ReportCsv::Designs(rows) => {
            let (names, averages): (Vec<String>, Vec<f64>) = rows.into_iter().unzip();
            let best = argmin(&averages).ok_or_else(|| no_rows(path))?;
            Ok(ReplayOutcome::Designs { names, averages, best })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "agent_id,loc_70_47,loc_70_57\n1,0:10:0,0:9:0\n2,0:12:0,0:12:500\n").unwrap();
        let out = replay_average(&path).unwrap();
        assert_eq!(
            out.to_string(),
            "location=(70,47) avg=11.000\nlocation=(70,57) avg=10.750\nbest=(70,57) avg=10.750\n"
        );
    }

    #[test]
    fn designs_summary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "design,best_average_s,is_best\nA,15.541,false\nB,14.957,true\n").unwrap();
        let out = replay_average(&path).unwrap();
        assert!(out.to_string().ends_with("best_design=B avg=14.957\n"));
    }

    #[test]
    fn empty_agents_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        std::fs::write(&path, "agent_id,duration_ms,duration_text,exit_id,waits\n").unwrap();
        assert!(replay_average(&path).is_err());
    }
}
