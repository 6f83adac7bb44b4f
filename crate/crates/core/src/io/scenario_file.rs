//! Line-based scenario files.
//!
//! ```text
//! # comment
//! [section]            or  [section ARG]
//! key = value
//! ```
//!
//! Sections: `[simulation]`, `[area]`, `[parts]`, `[exit N]`,
//! `[agents NAME]`, `[agent N]`, `[fuzzy PROPERTY]`, `[optimizer]` and
//! `[design NAME]`. The format is documented in full in `FORMATS.md`.
//! Unknown keys and repeated keys are errors, except for the keys that are
//! meant to repeat (`wall`, `class`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::domain::{
    validate_scenario, AgentDecl, AgentGroup, EvacuationArea, ExitDoor, MembershipClass, Part,
    PersonProfile, Point, PropertyKind, PropertySpec, Rect, Scenario, Side, Start, ValidScenario,
    ValueRange,
};
use crate::error::{Error, Result};
use crate::fuzzy::SpeedModel;
use crate::optimizer::CandidateSpec;

/// Scenarios shipped with the crate, addressable by name.
pub const BUNDLED: [(&str, &str); 4] = [
    ("cafeteria_A", include_str!("../../data/cafeteria_A.scn")),
    ("cafeteria_B", include_str!("../../data/cafeteria_B.scn")),
    ("cafeteria_C", include_str!("../../data/cafeteria_C.scn")),
    ("designs", include_str!("../../data/designs.scn")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".scn").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == stem).map(|(_, text)| *text)
}

/// A loaded and validated scenario with its optional optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub scenario: ValidScenario,
    pub optimizer: Option<CandidateSpec>,
    pub repeats: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignSource {
    /// Simulate and optimize this scenario file.
    Scenario(PathBuf),
    /// Replay a recorded durations table.
    Durations(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignEntry {
    pub name: String,
    pub source: DesignSource,
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

#[derive(Debug)]
struct Section {
    kind: String,
    arg: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

struct Ctx<'a> {
    path: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

const REPEATABLE: [&str; 2] = ["wall", "class"];

fn split_sections(ctx: &Ctx, text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| ctx.err(line, "unterminated section header"))?;
            let mut words = header.split_whitespace();
            let kind = words.next().ok_or_else(|| ctx.err(line, "empty section header"))?.to_string();
            let arg = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(ctx.err(line, "section header takes at most one argument"));
            }
            if let Some(prev) = sections.iter().find(|s| s.kind == kind && s.arg == arg) {
                return Err(ctx.err(line, format!("section [{header}] repeats the one on line {}", prev.line)));
            }
            sections.push(Section {
                kind,
                arg,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ctx.err(line, format!("expected `key = value`, got `{content}`")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| ctx.err(line, "key outside of any section"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(ctx.err(line, "empty key"));
        }
        if !REPEATABLE.contains(&key.as_str()) && section.entries.iter().any(|e| e.key == key) {
            return Err(ctx.err(line, format!("key `{key}` given twice")));
        }
        section.entries.push(Entry {
            key,
            value: value.trim().to_string(),
            line,
            used: false,
        });
    }
    Ok(sections)
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.iter_mut().find(|e| e.key == key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn take_all(&mut self, key: &str) -> Vec<(String, usize)> {
        self.entries
            .iter_mut()
            .filter(|e| e.key == key)
            .map(|e| {
                e.used = true;
                (e.value.clone(), e.line)
            })
            .collect()
    }

    fn require(&mut self, ctx: &Ctx, key: &str) -> Result<(String, usize)> {
        self.take(key)
            .ok_or_else(|| ctx.err(self.line, format!("[{}] is missing `{key}`", self.title())))
    }

    fn title(&self) -> String {
        match &self.arg {
            Some(a) => format!("{} {a}", self.kind),
            None => self.kind.clone(),
        }
    }

    /// Rejects keys outside `allowed` before any value is interpreted.
    fn check_keys(&self, ctx: &Ctx, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(ctx.err(e.line, format!("unknown key `{}` in [{}]", e.key, self.title()))),
            None => Ok(()),
        }
    }

    fn finish(&self, ctx: &Ctx) -> Result<()> {
        match self.entries.iter().find(|e| !e.used) {
            Some(e) => Err(ctx.err(e.line, format!("unknown key `{}` in [{}]", e.key, self.title()))),
            None => Ok(()),
        }
    }
}

fn num<T: std::str::FromStr>(ctx: &Ctx, (value, line): &(String, usize)) -> Result<T> {
    value
        .parse()
        .map_err(|_| ctx.err(*line, format!("`{value}` is not a valid number")))
}

fn ints(ctx: &Ctx, value: &str, line: usize) -> Result<Vec<i32>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| ctx.err(line, format!("`{}` is not an integer", v.trim())))
        })
        .collect()
}

fn rect(ctx: &Ctx, value: &str, line: usize) -> Result<Rect> {
    match ints(ctx, value, line)?[..] {
        [x1, y1, x2, y2] => Ok(Rect::new(x1, y1, x2, y2)),
        _ => Err(ctx.err(line, format!("expected x1,y1,x2,y2, got `{value}`"))),
    }
}

fn boolean(ctx: &Ctx, (value, line): &(String, usize)) -> Result<bool> {
    match value.as_str() {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(ctx.err(*line, format!("`{value}` is not true or false"))),
    }
}

fn range(ctx: &Ctx, (value, line): &(String, usize)) -> Result<ValueRange> {
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| ctx.err(*line, format!("`{}` is not a number", s.trim())))
    };
    match value.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo > hi {
                return Err(ctx.err(*line, format!("range `{value}` is reversed")));
            }
            Ok(ValueRange::new(lo, hi))
        }
        None => Ok(ValueRange::constant(parse(value)?)),
    }
}

fn id_arg(ctx: &Ctx, section: &Section) -> Result<u32> {
    let arg = section
        .arg
        .as_deref()
        .ok_or_else(|| ctx.err(section.line, format!("[{}] needs a numeric id", section.kind)))?;
    arg.parse()
        .map_err(|_| ctx.err(section.line, format!("`{arg}` is not a numeric id")))
}

fn factors(ctx: &Ctx, s: &mut Section, profile: &mut PersonProfile) -> Result<()> {
    if let Some(v) = s.take("familiar") {
        profile.familiar = boolean(ctx, &v)?;
    }
    if let Some(v) = s.take("gender_factor") {
        profile.gender_factor = num(ctx, &v)?;
    }
    if let Some(v) = s.take("emergency_factor") {
        profile.emergency_factor = num(ctx, &v)?;
    }
    Ok(())
}

fn parse_area(ctx: &Ctx, s: &mut Section) -> Result<EvacuationArea> {
    let width = num(ctx, &s.require(ctx, "width")?)?;
    let height = num(ctx, &s.require(ctx, "height")?)?;
    let cell_size = match s.take("cell_size") {
        Some(v) => num(ctx, &v)?,
        None => 0.4,
    };
    let mut area = EvacuationArea::empty(width, height, cell_size);
    for (value, line) in s.take_all("wall") {
        area.walls.extend(rect(ctx, &value, line)?.cells());
    }
    s.finish(ctx)?;
    Ok(area)
}

fn parse_exit(ctx: &Ctx, s: &mut Section) -> Result<ExitDoor> {
    let id = id_arg(ctx, s)?;
    let mut exit = ExitDoor::new(id, num(ctx, &s.require(ctx, "x")?)?, num(ctx, &s.require(ctx, "y")?)?);
    if let Some(v) = s.take("width") {
        exit.width_cells = num(ctx, &v)?;
    }
    if let Some((value, _)) = s.take("parts") {
        exit.parts = value
            .split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect();
    }
    s.finish(ctx)?;
    Ok(exit)
}

fn parse_group(ctx: &Ctx, s: &mut Section) -> Result<AgentGroup> {
    let name = s.arg.clone().unwrap_or_default();
    let part = s.require(ctx, "part")?.0;
    let count = num(ctx, &s.require(ctx, "count")?)?;
    let region = match s.take("region") {
        Some((value, line)) => Some(rect(ctx, &value, line)?),
        None => None,
    };
    let mut ranges = BTreeMap::new();
    for kind in PropertyKind::ALL {
        let v = s.require(ctx, kind.name())?;
        ranges.insert(kind, range(ctx, &v)?);
    }
    let mut profile = PersonProfile::default();
    factors(ctx, s, &mut profile)?;
    s.finish(ctx)?;
    Ok(AgentGroup {
        name,
        part,
        count,
        region,
        ranges,
        familiar: profile.familiar,
        gender_factor: profile.gender_factor,
        emergency_factor: profile.emergency_factor,
    })
}

fn parse_agent(ctx: &Ctx, s: &mut Section) -> Result<AgentDecl> {
    let x = s.take("x");
    let y = s.take("y");
    let part = s.take("part");
    let start = match (x, y, part) {
        (Some(x), Some(y), None) => Start::Cell(Point::new(num(ctx, &x)?, num(ctx, &y)?)),
        (None, None, Some((part, _))) => Start::InPart { part, region: None },
        _ => return Err(ctx.err(s.line, format!("[{}] needs either `x` and `y` or `part`", s.title()))),
    };
    let mut profile = PersonProfile::default();
    for kind in PropertyKind::ALL {
        let v: f64 = num(ctx, &s.require(ctx, kind.name())?)?;
        match kind {
            PropertyKind::Age => profile.age = v,
            PropertyKind::Weight => profile.weight = v,
            PropertyKind::Disease => profile.disease = v,
            PropertyKind::Shock => profile.shock = v,
            PropertyKind::Collaboration => profile.collaboration = v,
        }
    }
    factors(ctx, s, &mut profile)?;
    s.finish(ctx)?;
    Ok(AgentDecl { profile, start })
}

fn parse_fuzzy(ctx: &Ctx, s: &mut Section) -> Result<PropertySpec> {
    let arg = s.arg.clone().unwrap_or_default();
    let kind: PropertyKind = arg.parse().map_err(|m: String| ctx.err(s.line, m))?;
    let mut classes = Vec::new();
    for (value, line) in s.take_all("class") {
        let fields: Vec<&str> = value.split(',').map(str::trim).collect();
        let [name, rest @ ..] = &fields[..] else {
            return Err(ctx.err(line, "empty class"));
        };
        let nums = rest
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| ctx.err(line, format!("`{f}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        let [lo, hi, minisrd, maxisrd] = nums[..] else {
            return Err(ctx.err(line, "expected `class = name, lo, hi, minisrd, maxisrd`"));
        };
        classes.push(MembershipClass::new(*name, lo, hi, minisrd, maxisrd));
    }
    s.finish(ctx)?;
    PropertySpec::new(kind, classes).map_err(|e| ctx.err(s.line, e.to_string()))
}

fn parse_optimizer(ctx: &Ctx, s: &mut Section) -> Result<(CandidateSpec, Option<u32>)> {
    let (side, line) = s.require(ctx, "side")?;
    let side: Side = side.parse().map_err(|m: String| ctx.err(line, m))?;
    let lower = num(ctx, &s.require(ctx, "lower_bound")?)?;
    let upper = num(ctx, &s.require(ctx, "upper_bound")?)?;
    let which = num(ctx, &s.require(ctx, "which_exit")?)?;
    let locations = match s.take("locations") {
        Some((value, line)) => ints(ctx, &value, line)?,
        None => Vec::new(),
    };
    let count = match s.take("count") {
        Some(v) => num(ctx, &v)?,
        None if !locations.is_empty() => locations.len(),
        None => return Err(ctx.err(s.line, "[optimizer] needs `count` or `locations`")),
    };
    let repeats = s.take("repeats").map(|v| num(ctx, &v)).transpose()?;
    s.finish(ctx)?;
    let mut spec = CandidateSpec::new(side, lower, upper, count, which);
    spec.locations = locations;
    Ok((spec, repeats))
}

fn parse_design(ctx: &Ctx, s: &mut Section, base: &Path) -> Result<DesignEntry> {
    let name = s
        .arg
        .clone()
        .ok_or_else(|| ctx.err(s.line, "[design] needs a name"))?;
    let source = match (s.take("scenario"), s.take("durations")) {
        (Some((p, _)), None) => DesignSource::Scenario(base.join(p)),
        (None, Some((p, _))) => DesignSource::Durations(base.join(p)),
        _ => return Err(ctx.err(s.line, format!("[design {name}] needs exactly one of `scenario` or `durations`"))),
    };
    s.finish(ctx)?;
    Ok(DesignEntry { name, source })
}

const PROFILE_KEYS: [&str; 8] = [
    "age",
    "weight",
    "disease",
    "shock",
    "collaboration",
    "familiar",
    "gender_factor",
    "emergency_factor",
];

fn allowed_keys(kind: &str) -> Option<Vec<&'static str>> {
    let fixed: &[&str] = match kind {
        "simulation" => &["seed", "tick_duration", "max_ticks"],
        "area" => &["width", "height", "cell_size", "wall"],
        "exit" => &["x", "y", "width", "parts"],
        "agents" => &["part", "count", "region"],
        "agent" => &["x", "y", "part"],
        "fuzzy" => &["class"],
        "optimizer" => &["side", "lower_bound", "upper_bound", "count", "which_exit", "locations", "repeats"],
        "design" => &["scenario", "durations"],
        _ => return None,
    };
    let mut keys = fixed.to_vec();
    if matches!(kind, "agents" | "agent") {
        keys.extend(PROFILE_KEYS);
    }
    Some(keys)
}

/// Parses and validates scenario text. `path` is only used in messages.
pub fn parse_scenario(text: &str, path: &Path) -> Result<ScenarioFile> {
    let ctx = Ctx { path };
    let mut sections = split_sections(&ctx, text)?;
    let mut area = None;
    let mut sim: Option<(u64, f64, u32)> = None;
    let mut parts = Vec::new();
    let mut exits = Vec::new();
    let mut groups = Vec::new();
    let mut agents: Vec<(u32, AgentDecl)> = Vec::new();
    let mut speed_model = SpeedModel::default();
    let mut optimizer = None;

    for s in &mut sections {
        if let Some(allowed) = allowed_keys(&s.kind) {
            s.check_keys(&ctx, &allowed)?;
        }
        match s.kind.as_str() {
            "area" => area = Some(parse_area(&ctx, s)?),
            "simulation" => {
                let seed = s.take("seed").map(|v| num(&ctx, &v)).transpose()?.unwrap_or(0);
                let tick = s.take("tick_duration").map(|v| num(&ctx, &v)).transpose()?;
                let max = s.take("max_ticks").map(|v| num(&ctx, &v)).transpose()?;
                s.finish(&ctx)?;
                sim = Some((
                    seed,
                    tick.unwrap_or(crate::domain::DEFAULT_TICK_S),
                    max.unwrap_or(crate::domain::DEFAULT_MAX_TICKS),
                ));
            }
            "parts" => {
                for e in &mut s.entries {
                    e.used = true;
                    let rects = e
                        .value
                        .split(';')
                        .map(|r| rect(&ctx, r, e.line))
                        .collect::<Result<Vec<_>>>()?;
                    parts.push(Part::from_rects(e.key.clone(), &rects));
                }
            }
            "exit" => exits.push(parse_exit(&ctx, s)?),
            "agents" => groups.push(parse_group(&ctx, s)?),
            "agent" => {
                let id = id_arg(&ctx, s)?;
                agents.push((id, parse_agent(&ctx, s)?));
            }
            "fuzzy" => speed_model.set(parse_fuzzy(&ctx, s)?),
            "optimizer" => optimizer = Some(parse_optimizer(&ctx, s)?),
            "design" => {
                return Err(ctx.err(s.line, "[design] sections belong in a design list, not a scenario"));
            }
            other => return Err(ctx.err(s.line, format!("unknown section [{other}]"))),
        }
    }

    let mut area = area.ok_or_else(|| ctx.err(1, "missing [area] section"))?;
    parts.sort_by(|a, b| a.name.cmp(&b.name));
    exits.sort_by_key(|e| e.id);
    groups.sort_by(|a, b| a.name.cmp(&b.name));
    agents.sort_by_key(|(id, _)| *id);
    area.parts = parts;
    area.exits = exits;

    let (seed, tick_duration, max_ticks) =
        sim.unwrap_or((0, crate::domain::DEFAULT_TICK_S, crate::domain::DEFAULT_MAX_TICKS));
    let scenario = Scenario {
        area,
        agents: agents.into_iter().map(|(_, a)| a).collect(),
        groups,
        speed_model,
        seed,
        tick_duration,
        max_ticks,
    };
    let (optimizer, repeats) = match optimizer {
        Some((spec, repeats)) => (Some(spec), repeats),
        None => (None, None),
    };
    Ok(ScenarioFile {
        scenario: validate_scenario(scenario)?,
        optimizer,
        repeats,
    })
}

/// Loads a scenario file; a name without a matching file selects a
/// bundled scenario (`cafeteria_A`, `cafeteria_B`, `cafeteria_C`).
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let path = path.as_ref();
    let text = read_or_bundled(path)?;
    parse_scenario(&text, path)
}

fn read_or_bundled(path: &Path) -> Result<String> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) => path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(bundled)
            .map(str::to_string)
            .ok_or_else(|| Error::io(path, e)),
    }
}

/// Loads a list of `[design NAME]` sections, sorted by name. Relative
/// paths resolve against the list's directory.
pub fn load_designs(path: impl AsRef<Path>) -> Result<Vec<DesignEntry>> {
    let path = path.as_ref();
    let text = read_or_bundled(path)?;
    parse_designs(&text, path)
}

pub fn parse_designs(text: &str, path: &Path) -> Result<Vec<DesignEntry>> {
    let ctx = Ctx { path };
    let base = path.parent().unwrap_or(Path::new(""));
    let mut designs = Vec::new();
    for s in &mut split_sections(&ctx, text)? {
        if s.kind != "design" {
            return Err(ctx.err(s.line, format!("expected [design NAME], got [{}]", s.title())));
        }
        s.check_keys(&ctx, &["scenario", "durations"])?;
        designs.push(parse_design(&ctx, s, base)?);
    }
    if designs.is_empty() {
        return Err(ctx.err(1, "no [design NAME] sections"));
    }
    designs.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(designs)
}
