//! The `evac` command line.
//!
//! Exit statuses: 0 success, 1 usage, 2 invalid input, 3 runtime failure or
//! timeout. Failures print a single line to stderr:
//!
//! ```text
//! error kind=<kind> status=<n> message="<text>"
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::domain::ExitDoor;
use crate::engine::{run_evacuation, run_evacuation_with, RunResult};
use crate::error::{Error, Result};
use crate::io::duration::format_seconds;
use crate::io::replay::replay_average;
use crate::io::report::{
    read_report_csv, write_agents_csv, write_designs_csv, write_optimization, ReportCsv, TraceWriter,
};
use crate::io::scenario_file::{load_designs, load_scenario, DesignEntry, DesignSource, ScenarioFile};
use crate::optimizer::{compare_designs, optimize, relocated_exits, DesignReport, OptimizeOptions, OptimizerError};

#[derive(Debug, Parser)]
#[command(name = "evac", version, about = "Grid evacuation simulator and exit-placement optimizer")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, global = true, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Seed; defaults to the scenario's own seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Directory for CSV output.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Runs per candidate, pooled.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    repeats: Option<u32>,
    /// Worker threads for candidate evaluation.
    #[arg(long, global = true, value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
    /// Also write trace.csv with every agent's cell after every tick.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario as written.
    Run,
    /// Relocate the configured exit and keep the best candidate.
    Optimize,
    /// Optimize several designs and pick the best one.
    Compare {
        /// A design as NAME=PATH; a .csv path is a recorded durations table.
        #[arg(long = "in", value_name = "NAME=PATH")]
        inputs: Vec<String>,
    },
    /// Recompute averages and the winner from a CSV.
    ReplayAverage {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn quote(message: &str) -> String {
    message.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ")
}

/// Runs the command line with `argv` (program name first).
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error kind=usage status=1 message=\"{}\"", quote(first));
            return 1;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error kind=usage status=1 message=\"{}\"", quote(&m));
            1
        }
        Err(Failure::Run(e)) => {
            let status = e.exit_status();
            eprintln!("error kind={} status={status} message=\"{}\"", e.kind(), quote(&e.to_string()));
            status
        }
    }
}

fn execute(cli: &Cli, out: &mut impl Write) -> std::result::Result<(), Failure> {
    let g = &cli.global;
    if g.trace && g.out.is_none() {
        return Err(Failure::Usage("--trace needs --out".into()));
    }
    match &cli.command {
        Command::Run => run(g, require_scenario(g)?, out),
        Command::Optimize => optimize_cmd(g, require_scenario(g)?, out),
        Command::Compare { inputs } => compare(g, inputs, out),
        Command::ReplayAverage { input } => {
            let outcome = replay_average(input)?;
            write!(out, "{outcome}").map_err(|e| Error::io("<stdout>", e))?;
            Ok(())
        }
    }
}

fn require_scenario(g: &Global) -> std::result::Result<&Path, Failure> {
    g.scenario
        .as_deref()
        .ok_or_else(|| Failure::Usage("the following required argument was not provided: --scenario <PATH>".into()))
}

fn print(out: &mut impl Write, line: String) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn out_dir(g: &Global) -> Result<Option<&Path>> {
    match g.out.as_deref() {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

fn options(g: &Global, file: &ScenarioFile) -> OptimizeOptions {
    OptimizeOptions {
        repeats: g.repeats.or(file.repeats).unwrap_or(1),
        parallel: g.parallel as usize,
    }
}

fn traced_run(file: &ScenarioFile, exits: Option<&[ExitDoor]>, seed: u64, path: &Path) -> Result<RunResult> {
    let mut trace = TraceWriter::create(path)?;
    let result = run_evacuation_with(&file.scenario, exits, seed, |sim| trace.record(sim))?;
    trace.finish()?;
    Ok(result)
}

fn run(g: &Global, path: &Path, out: &mut impl Write) -> std::result::Result<(), Failure> {
    let file = load_scenario(path)?;
    let seed = g.seed.unwrap_or(file.scenario.scenario().seed);
    let dir = out_dir(g)?;
    let result = match (dir, g.trace) {
        (Some(dir), true) => traced_run(&file, None, seed, &dir.join("trace.csv"))?,
        _ => run_evacuation(&file.scenario, None, seed)?,
    };
    if let Some(dir) = dir {
        write_agents_csv(&result, &dir.join("agents.csv"))?;
    }
    print(out, format!("agents={} avg={}", result.len(), format_seconds(result.average_s)))?;
    Ok(())
}

fn optimize_design(g: &Global, name: &str, file: &ScenarioFile) -> Result<DesignReport> {
    let spec = file
        .optimizer
        .as_ref()
        .ok_or_else(|| OptimizerError::InvalidSpec(format!("design {name} has no [optimizer] section")))?;
    let seed = g.seed.unwrap_or(file.scenario.scenario().seed);
    let report = optimize(&file.scenario, spec, seed, &options(g, file))?;
    Ok(DesignReport::new(name, report))
}

fn print_candidates(out: &mut impl Write, d: &DesignReport) -> Result<()> {
    for c in &d.optimization.candidates {
        print(out, format!("location={} avg={}", c.location, format_seconds(c.result.average_s)))?;
    }
    let best = d.optimization.best();
    print(out, format!("best={} avg={}", best.location, format_seconds(best.result.average_s)))
}

fn optimize_cmd(g: &Global, path: &Path, out: &mut impl Write) -> std::result::Result<(), Failure> {
    let file = load_scenario(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("design");
    let design = optimize_design(g, name, &file)?;
    if let Some(dir) = out_dir(g)? {
        write_optimization(dir, &design)?;
        if g.trace {
            let spec = file.optimizer.as_ref().expect("optimized designs have a spec");
            let exits = relocated_exits(file.scenario.area(), spec, design.optimization.best().location)
                .map_err(Error::from)?;
            let seed = g.seed.unwrap_or(file.scenario.scenario().seed);
            traced_run(&file, Some(&exits), seed, &dir.join("trace.csv"))?;
        }
    }
    print_candidates(out, &design)?;
    Ok(())
}

fn parse_inputs(inputs: &[String]) -> std::result::Result<Vec<DesignEntry>, Failure> {
    inputs
        .iter()
        .map(|s| {
            let (name, path) = s
                .split_once('=')
                .filter(|(n, p)| !n.is_empty() && !p.is_empty())
                .ok_or_else(|| Failure::Usage(format!("--in expects NAME=PATH, got `{s}`")))?;
            let path = PathBuf::from(path);
            let source = if path.extension().is_some_and(|e| e == "csv") {
                DesignSource::Durations(path)
            } else {
                DesignSource::Scenario(path)
            };
            Ok(DesignEntry {
                name: name.to_string(),
                source,
            })
        })
        .collect()
}

fn design_report(g: &Global, entry: &DesignEntry) -> Result<DesignReport> {
    match &entry.source {
        DesignSource::Scenario(path) => optimize_design(g, &entry.name, &load_scenario(path)?),
        DesignSource::Durations(path) => match read_report_csv(path)? {
            ReportCsv::Durations(table) => Ok(DesignReport::new(&entry.name, table.to_report()?)),
            _ => Err(Error::Csv {
                path: path.clone(),
                message: "expected a durations table (agent_id,loc_X_Y,...)".into(),
            }),
        },
    }
}

fn compare(g: &Global, inputs: &[String], out: &mut impl Write) -> std::result::Result<(), Failure> {
    let entries = match (inputs.is_empty(), g.scenario.as_deref()) {
        (false, None) => parse_inputs(inputs)?,
        (true, Some(list)) => load_designs(list)?,
        (false, Some(_)) => return Err(Failure::Usage("compare takes either --scenario or --in, not both".into())),
        (true, None) => return Err(Failure::Usage("compare needs --scenario DESIGNS or at least one --in NAME=PATH".into())),
    };
    let reports = entries
        .iter()
        .map(|e| design_report(g, e))
        .collect::<Result<Vec<_>>>()?;
    let best = compare_designs(&reports).map_err(Error::from)?;
    let best_index = reports
        .iter()
        .position(|r| std::ptr::eq(r, best))
        .expect("winner comes from the list");
    if let Some(dir) = out_dir(g)? {
        for r in &reports {
            write_optimization(&dir.join(&r.design_name), r)?;
        }
        write_designs_csv(&reports, best_index, &dir.join("designs.csv"))?;
    }
    for r in &reports {
        print(out, format!("design={} avg={}", r.design_name, format_seconds(r.best_average_s)))?;
    }
    print(out, format!("best_design={} avg={}", best.design_name, format_seconds(best.best_average_s)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(args: &[&str]) -> i32 {
        cli_main(std::iter::once("evac").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors() {
        assert_eq!(status(&["run"]), 1);
        assert_eq!(status(&["bogus"]), 1);
        assert_eq!(status(&["compare"]), 1);
        assert_eq!(status(&["compare", "--in", "nameonly"]), 1);
        assert_eq!(status(&["run", "--scenario", "cafeteria_A", "--trace"]), 1);
        assert_eq!(status(&["optimize", "--scenario", "x", "--parallel", "0"]), 1);
    }

    #[test]
    fn help_is_success() {
        assert_eq!(status(&["--help"]), 0);
        assert_eq!(status(&["--version"]), 0);
    }

    #[test]
    fn input_errors_are_status_two() {
        assert_eq!(status(&["run", "--scenario", "/nonexistent/file.scn"]), 3);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.scn");
        std::fs::write(&p, "[area]\nwidth = 10\nheight = 6\nwieght = 70\n").unwrap();
        assert_eq!(status(&["run", "--scenario", p.to_str().unwrap()]), 2);
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a \"b\"\nc"), "a \\\"b\\\" c");
    }
}
