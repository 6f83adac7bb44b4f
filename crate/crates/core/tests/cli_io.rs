use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evac_core::io::scenario_file::{load_scenario, parse_scenario};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn evac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evac"))
        .args(args)
        .output()
        .expect("evac binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn replaying_a_recorded_table() {
    let o = evac(&["replay-average", "--in", path_str(&data("table4.csv"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("best=(70,47) avg=15.541"));
    assert_eq!(out.lines().next(), Some("location=(70,47) avg=15.541"));
}

#[test]
fn optimize_writes_reports_within_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = evac(&["optimize", "--scenario", "cafeteria_A", "--seed", "7", "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("candidates.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("location_x,location_y,average_s,is_best"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows.iter().filter(|r| r[3] == "true").count(), 1);
    for r in &rows {
        assert_eq!(r[0], "70");
        let y: i32 = r[1].parse().unwrap();
        assert!((35..=83).contains(&y));
    }
    for f in ["agents.csv", "durations.csv", "designs.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn emitted_csvs_replay_to_the_same_averages() {
    let dir = tempfile::tempdir().unwrap();
    let o = evac(&["optimize", "--scenario", "cafeteria_C", "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed = stdout(&o);
    for f in ["durations.csv", "candidates.csv"] {
        let r = evac(&["replay-average", "--in", path_str(&dir.path().join(f))]);
        assert_eq!(stdout(&r), printed, "{f}");
    }
    let best = printed.lines().last().unwrap().split("avg=").nth(1).unwrap().to_string();
    let r = evac(&["replay-average", "--in", path_str(&dir.path().join("agents.csv"))]);
    assert_eq!(stdout(&r).trim(), format!("avg={best}"));
    let r = evac(&["replay-average", "--in", path_str(&dir.path().join("designs.csv"))]);
    assert_eq!(stdout(&r).lines().last().unwrap(), format!("best_design=cafeteria_C avg={best}"));
}

#[test]
fn comparing_recorded_designs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (data("table4.csv"), data("table5.csv"), data("table6.csv"));
    let args = [
        "compare".to_string(),
        "--in".into(),
        format!("A={}", a.display()),
        "--in".into(),
        format!("B={}", b.display()),
        "--in".into(),
        format!("C={}", c.display()),
        "--out".into(),
        dir.path().display().to_string(),
    ];
    let o = evac(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().last(), Some("best_design=B avg=14.957"));
    let designs = std::fs::read_to_string(dir.path().join("designs.csv")).unwrap();
    assert!(designs.lines().any(|l| l == "B,14.957,true"));
    let a_summary = std::fs::read_to_string(dir.path().join("A").join("candidates.csv")).unwrap();
    assert!(a_summary.lines().any(|l| l == "70,47,15.541,true"));

    let listed = evac(&["compare", "--scenario", path_str(&data("tables.scn"))]);
    assert_eq!(stdout(&listed), stdout(&o));
}

#[test]
fn usage_errors_exit_one_with_one_line() {
    for args in [&["run"][..], &["optimize", "--seed", "x"][..], &["frobnicate"][..]] {
        let o = evac(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error kind=usage status=1 message=\""), "{err}");
    }
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    let text = std::fs::read_to_string(data("cafeteria_A.scn")).unwrap().replace("weight = 60..102", "wieght = 60..102");
    std::fs::write(&bad, text).unwrap();
    let o = evac(&["run", "--scenario", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error kind=parse status=2"), "{err}");
    assert!(err.contains("wieght"), "{err}");

    let outside = dir.path().join("outside.scn");
    let text = std::fs::read_to_string(data("cafeteria_A.scn")).unwrap().replace("age = 25..57", "age = 110");
    std::fs::write(&outside, text).unwrap();
    let o = evac(&["run", "--scenario", path_str(&outside)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error kind=agent-out-of-domain"), "{}", stderr(&o));
}

#[test]
fn timeouts_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("short.scn");
    let text = std::fs::read_to_string(data("cafeteria_A.scn")).unwrap().replace("max_ticks = 2400", "max_ticks = 3");
    std::fs::write(&p, text).unwrap();
    let o = evac(&["run", "--scenario", path_str(&p)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error kind=timeout status=3"), "{}", stderr(&o));
}

#[test]
fn run_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = evac(&["run", "--scenario", "cafeteria_B", "--out", path_str(dir.path()), "--trace"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("agents=20 avg="));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("tick,agent_id,x,y,status"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len() % 20, 0);
    assert!(rows[..20].iter().all(|r| r.starts_with("0,") && r.ends_with(",moving")));
    assert!(rows[rows.len() - 20..].iter().all(|r| r.ends_with(",evacuated")));
}

#[test]
fn bundled_designs_have_the_expected_exits() {
    for (name, exits) in [("cafeteria_A", 3), ("cafeteria_B", 4), ("cafeteria_C", 5)] {
        let file = load_scenario(name).unwrap();
        assert_eq!(file.scenario.area().exits.len(), exits, "{name}");
        assert_eq!(file.scenario.scenario().agents.len(), 20);
        assert!(file.optimizer.is_some());
    }
    let b = load_scenario("cafeteria_B").unwrap();
    let student: Vec<u32> = b.scenario.area().exits_for_part("student").iter().map(|e| e.id).collect();
    assert_eq!(student, vec![1, 4]);
}

#[test]
fn section_order_does_not_matter() {
    let text = std::fs::read_to_string(data("cafeteria_C.scn")).unwrap();
    let mut sections: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.starts_with('[') || sections.is_empty() {
            sections.push(String::new());
        }
        let last = sections.last_mut().unwrap();
        last.push_str(line);
        last.push('\n');
    }
    let original = parse_scenario(&text, Path::new("c.scn")).unwrap();
    sections.reverse();
    let reversed = parse_scenario(&sections.concat(), Path::new("c.scn")).unwrap();
    assert_eq!(original, reversed);
    assert_eq!(original, parse_scenario(&text, Path::new("c.scn")).unwrap());
}
