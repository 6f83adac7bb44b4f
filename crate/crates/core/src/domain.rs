//! Shared domain types and their invariants.
//!
//! The grid has `width + 1` columns and `height + 1` rows of cells. The ring
//! at `x == 0`, `x == width`, `y == 0` and `y == height` is the outer wall;
//! exit doors replace wall cells on that ring. Origin is the top-left corner,
//! `x` grows rightward and `y` grows downward.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::fuzzy::SpeedModel;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    /// Squared Euclidean distance, exact in integers.
    pub fn dist2(self, other: Point) -> i64 {
        let dx = (other.x - self.x) as i64;
        let dy = (other.y - self.y) as i64;
        dx * dx + dy * dy
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Inclusive axis-aligned rectangle of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x1: i32,
    pub y1: i32,
    pub x2: i32,
    pub y2: i32,
}

impl Rect {
    pub fn new(x1: i32, y1: i32, x2: i32, y2: i32) -> Self {
        Rect {
            x1: x1.min(x2),
            y1: y1.min(y2),
            x2: x1.max(x2),
            y2: y1.max(y2),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x1..=self.x2).contains(&p.x) && (self.y1..=self.y2).contains(&p.y)
    }

    pub fn cells(&self) -> impl Iterator<Item = Point> + '_ {
        (self.y1..=self.y2).flat_map(move |y| (self.x1..=self.x2).map(move |x| Point::new(x, y)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Top => "top",
            Side::Bottom => "bottom",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "top" => Ok(Side::Top),
            "bottom" => Ok(Side::Bottom),
            other => Err(format!("unknown side `{other}` (expected left, right, top or bottom)")),
        }
    }
}

/// Properties that feed the speed model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyKind {
    Age,
    Weight,
    Disease,
    Shock,
    Collaboration,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 5] = [
        PropertyKind::Age,
        PropertyKind::Weight,
        PropertyKind::Disease,
        PropertyKind::Shock,
        PropertyKind::Collaboration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropertyKind::Age => "age",
            PropertyKind::Weight => "weight",
            PropertyKind::Disease => "disease",
            PropertyKind::Shock => "shock",
            PropertyKind::Collaboration => "collaboration",
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PropertyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown property `{s}`"))
    }
}

/// One agent's raw properties.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonProfile {
    pub age: f64,
    pub weight: f64,
    pub disease: f64,
    pub shock: f64,
    pub collaboration: f64,
    pub gender_factor: f64,
    pub emergency_factor: f64,
    pub familiar: bool,
}

impl PersonProfile {
    pub fn value(&self, kind: PropertyKind) -> f64 {
        match kind {
            PropertyKind::Age => self.age,
            PropertyKind::Weight => self.weight,
            PropertyKind::Disease => self.disease,
            PropertyKind::Shock => self.shock,
            PropertyKind::Collaboration => self.collaboration,
        }
    }
}

impl Default for PersonProfile {
    /// A 30-year-old, 70 kg agent with no disease, shock or collaboration
    /// load and identity factors.
    fn default() -> Self {
        PersonProfile {
            age: 30.0,
            weight: 70.0,
            disease: 0.0,
            shock: 0.0,
            collaboration: 0.0,
            gender_factor: 1.0,
            emergency_factor: 1.0,
            familiar: false,
        }
    }
}

/// A linguistic class of a property domain with its speed sub-range in km/h.
///
/// Covers `[lo, hi)`, or `[lo, hi]` when it is the last class of its spec.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipClass {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub minisrd: f64,
    pub maxisrd: f64,
}

impl MembershipClass {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, minisrd: f64, maxisrd: f64) -> Self {
        MembershipClass {
            name: name.into(),
            lo,
            hi,
            minisrd,
            maxisrd,
        }
    }
}

/// Global walking speed range in km/h.
pub const SPEED_MIN_KMH: f64 = 2.0;
pub const SPEED_MAX_KMH: f64 = 7.0;

/// Fuzzy partition of one property's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertySpec {
    pub property: PropertyKind,
    classes: Vec<MembershipClass>,
}

impl PropertySpec {
    pub fn new(property: PropertyKind, classes: Vec<MembershipClass>) -> Result<Self, ValidationError> {
        let bad = |msg: String| ValidationError::PropertySpec {
            property,
            message: msg,
        };
        if classes.is_empty() {
            return Err(bad("no classes".into()));
        }
        for (i, c) in classes.iter().enumerate() {
            if !(c.lo < c.hi) {
                return Err(bad(format!("class `{}` has lo >= hi", c.name)));
            }
            if !(c.minisrd < c.maxisrd) {
                return Err(bad(format!("class `{}` has minisrd >= maxisrd", c.name)));
            }
            if c.minisrd < SPEED_MIN_KMH || c.maxisrd > SPEED_MAX_KMH {
                return Err(bad(format!(
                    "class `{}` speed range [{}, {}] leaves [{SPEED_MIN_KMH}, {SPEED_MAX_KMH}] km/h",
                    c.name, c.minisrd, c.maxisrd
                )));
            }
            if i > 0 && classes[i - 1].hi != c.lo {
                return Err(bad(format!(
                    "classes `{}` and `{}` do not tile the domain",
                    classes[i - 1].name, c.name
                )));
            }
            if classes[..i].iter().any(|o| o.name == c.name) {
                return Err(bad(format!("duplicate class `{}`", c.name)));
            }
        }
        Ok(PropertySpec { property, classes })
    }

    pub fn classes(&self) -> &[MembershipClass] {
        &self.classes
    }

    /// Inclusive domain `[lo, hi]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.classes[0].lo, self.classes[self.classes.len() - 1].hi)
    }

    pub fn contains(&self, value: f64) -> bool {
        let (lo, hi) = self.domain();
        value >= lo && value <= hi
    }

    /// Index of the class whose interval holds `value`.
    pub fn class_index(&self, value: f64) -> Option<usize> {
        if !self.contains(value) {
            return None;
        }
        let last = self.classes.len() - 1;
        self.classes
            .iter()
            .position(|c| value >= c.lo && value < c.hi)
            .or(Some(last))
    }

    pub fn class(&self, name: &str) -> Option<&MembershipClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Age over `[16, 105]`: younger intervals walk faster.
    pub fn default_age() -> Self {
        let classes = vec![
            MembershipClass::new("adult", 16.0, 25.0, 6.0, 7.0),
            MembershipClass::new("very_young", 25.0, 45.0, 5.0, 6.0),
            MembershipClass::new("young", 45.0, 65.0, 4.0, 5.0),
            MembershipClass::new("old", 65.0, 85.0, 3.0, 4.0),
            MembershipClass::new("very_old", 85.0, 105.0, 2.0, 3.0),
        ];
        PropertySpec::new(PropertyKind::Age, classes).expect("default age spec")
    }

    /// Weight over `[30, 150]` kg in four 30 kg classes: lighter walks faster.
    pub fn default_weight() -> Self {
        let classes = vec![
            MembershipClass::new("very_slim", 30.0, 60.0, 5.75, 7.0),
            MembershipClass::new("slim", 60.0, 90.0, 4.5, 5.75),
            MembershipClass::new("heavy", 90.0, 120.0, 3.25, 4.5),
            MembershipClass::new("very_heavy", 120.0, 150.0, 2.0, 3.25),
        ];
        PropertySpec::new(PropertyKind::Weight, classes).expect("default weight spec")
    }

    /// Five levels over `[0, 100]`; a higher level walks slower.
    pub fn default_level(kind: PropertyKind) -> Self {
        let names = ["very_low", "low", "medium", "high", "very_high"];
        let classes = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let lo = 20.0 * i as f64;
                let top = SPEED_MAX_KMH - i as f64;
                MembershipClass::new(*n, lo, lo + 20.0, top - 1.0, top)
            })
            .collect();
        PropertySpec::new(kind, classes).expect("default level spec")
    }

    pub fn default_for(kind: PropertyKind) -> Self {
        match kind {
            PropertyKind::Age => Self::default_age(),
            PropertyKind::Weight => Self::default_weight(),
            other => Self::default_level(other),
        }
    }
}

/// An exit door centred on `(x, y)` of the outer wall.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitDoor {
    pub id: u32,
    pub x: i32,
    pub y: i32,
    pub width_cells: u32,
    /// Parts served by this door; empty means every part.
    pub parts: Vec<String>,
}

impl ExitDoor {
    pub fn new(id: u32, x: i32, y: i32) -> Self {
        ExitDoor {
            id,
            x,
            y,
            width_cells: 1,
            parts: Vec::new(),
        }
    }

    pub fn center(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn serves(&self, part: &str) -> bool {
        self.parts.is_empty() || self.parts.iter().any(|p| p == part)
    }

    /// Door cells along the wall, or `None` when the centre is not on a wall
    /// or the door does not fit between the corners.
    pub fn door_cells(&self, area: &EvacuationArea) -> Option<Vec<Point>> {
        let side = area.side_of(self.center())?;
        let w = self.width_cells as i32;
        if w < 1 {
            return None;
        }
        let before = (w - 1) / 2;
        let cells: Vec<Point> = (-before..w - before)
            .map(|o| match side {
                Side::Left | Side::Right => Point::new(self.x, self.y + o),
                Side::Top | Side::Bottom => Point::new(self.x + o, self.y),
            })
            .collect();
        cells
            .iter()
            .all(|&c| area.side_of(c) == Some(side))
            .then_some(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub name: String,
    pub cells: BTreeSet<Point>,
}

impl Part {
    pub fn from_rects(name: impl Into<String>, rects: &[Rect]) -> Self {
        Part {
            name: name.into(),
            cells: rects.iter().flat_map(|r| r.cells()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvacuationArea {
    pub width: i32,
    pub height: i32,
    /// Meters per cell.
    pub cell_size: f64,
    /// Interior wall cells; the outer ring is implicit.
    pub walls: BTreeSet<Point>,
    pub parts: Vec<Part>,
    pub exits: Vec<ExitDoor>,
}

impl EvacuationArea {
    /// Empty `width x height` room with no parts or exits.
    pub fn empty(width: i32, height: i32, cell_size: f64) -> Self {
        EvacuationArea {
            width,
            height,
            cell_size,
            walls: BTreeSet::new(),
            parts: Vec::new(),
            exits: Vec::new(),
        }
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        p.x >= 0 && p.y >= 0 && p.x <= self.width && p.y <= self.height
    }

    pub fn is_interior(&self, p: Point) -> bool {
        p.x > 0 && p.y > 0 && p.x < self.width && p.y < self.height
    }

    /// Wall a boundary cell belongs to; corners belong to none.
    pub fn side_of(&self, p: Point) -> Option<Side> {
        let on_x = p.x == 0 || p.x == self.width;
        let on_y = p.y == 0 || p.y == self.height;
        if !self.in_bounds(p) || on_x == on_y {
            return None;
        }
        Some(match (p.x, p.y) {
            (0, _) => Side::Left,
            (x, _) if x == self.width => Side::Right,
            (_, 0) => Side::Top,
            _ => Side::Bottom,
        })
    }

    /// Boundary cell at `along` on the given wall.
    pub fn wall_point(&self, side: Side, along: i32) -> Point {
        match side {
            Side::Left => Point::new(0, along),
            Side::Right => Point::new(self.width, along),
            Side::Top => Point::new(along, 0),
            Side::Bottom => Point::new(along, self.height),
        }
    }

    /// Valid range of positions along a wall, corners excluded.
    pub fn wall_range(&self, side: Side) -> (i32, i32) {
        match side {
            Side::Left | Side::Right => (1, self.height - 1),
            Side::Top | Side::Bottom => (1, self.width - 1),
        }
    }

    pub fn part(&self, name: &str) -> Option<&Part> {
        self.parts.iter().find(|p| p.name == name)
    }

    pub fn part_of(&self, p: Point) -> Option<&Part> {
        self.parts.iter().find(|part| part.cells.contains(&p))
    }

    pub fn exit(&self, id: u32) -> Option<&ExitDoor> {
        self.exits.iter().find(|e| e.id == id)
    }

    /// Exits an agent standing in `part` may use.
    pub fn exits_for_part(&self, part: &str) -> Vec<ExitDoor> {
        self.exits.iter().filter(|e| e.serves(part)).cloned().collect()
    }

    pub fn grid(&self) -> CellGrid {
        CellGrid::new(self)
    }
}

/// Dense lookup tables built from an [`EvacuationArea`].
#[derive(Debug, Clone)]
pub struct CellGrid {
    width: i32,
    height: i32,
    blocked: Vec<bool>,
    door: Vec<Option<u32>>,
}

/// Neighbor offsets in tie-break order.
const NEIGHBORS: [(i32, i32); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

impl CellGrid {
    /// Door cells of exits that do not fit on the wall are ignored.
    pub fn new(area: &EvacuationArea) -> Self {
        let cols = (area.width + 1).max(0) as usize;
        let rows = (area.height + 1).max(0) as usize;
        let mut grid = CellGrid {
            width: area.width,
            height: area.height,
            blocked: vec![false; cols * rows],
            door: vec![None; cols * rows],
        };
        for y in 0..=area.height {
            for x in 0..=area.width {
                let p = Point::new(x, y);
                if !area.is_interior(p) || area.walls.contains(&p) {
                    let i = grid.index(p);
                    grid.blocked[i] = true;
                }
            }
        }
        for exit in &area.exits {
            for cell in exit.door_cells(area).unwrap_or_default() {
                let i = grid.index(cell);
                grid.blocked[i] = false;
                grid.door[i] = Some(exit.id);
            }
        }
        grid
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn index(&self, p: Point) -> usize {
        p.y as usize * (self.width + 1) as usize + p.x as usize
    }

    pub fn point(&self, i: usize) -> Point {
        let cols = (self.width + 1) as usize;
        Point::new((i % cols) as i32, (i / cols) as i32)
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        p.x >= 0 && p.y >= 0 && p.x <= self.width && p.y <= self.height
    }

    pub fn is_blocked(&self, p: Point) -> bool {
        !self.in_bounds(p) || self.blocked[self.index(p)]
    }

    pub fn door_at(&self, p: Point) -> Option<u32> {
        if self.in_bounds(p) {
            self.door[self.index(p)]
        } else {
            None
        }
    }

    /// Open neighbor strictly closer to `target`, nearest first.
    ///
    /// `None` at a local minimum of the distance field.
    pub fn greedy_next(&self, from: Point, target: Point) -> Option<Point> {
        let mut best: Option<(i64, Point)> = None;
        for (dx, dy) in NEIGHBORS {
            let n = Point::new(from.x + dx, from.y + dy);
            if self.is_blocked(n) {
                continue;
            }
            let d = n.dist2(target);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, n));
            }
        }
        best.filter(|&(d, _)| d < from.dist2(target)).map(|(_, n)| n)
    }

    /// For every cell, whether greedy descent from it reaches a door cell
    /// of `exit` on an empty grid.
    pub fn greedy_reach(&self, exit: &ExitDoor) -> Vec<bool> {
        const UNKNOWN: u8 = 0;
        const YES: u8 = 1;
        const NO: u8 = 2;
        let target = exit.center();
        let mut state = vec![UNKNOWN; self.len()];
        let mut chain = Vec::new();
        for start in 0..self.len() {
            if state[start] != UNKNOWN || self.blocked[start] {
                continue;
            }
            let mut cur = start;
            let verdict = loop {
                if state[cur] != UNKNOWN {
                    break state[cur];
                }
                chain.push(cur);
                if self.door[cur] == Some(exit.id) {
                    break YES;
                }
                match self.greedy_next(self.point(cur), target) {
                    Some(next) => cur = self.index(next),
                    None => break NO,
                }
            };
            for i in chain.drain(..) {
                state[i] = verdict;
            }
        }
        state.into_iter().map(|s| s == YES).collect()
    }
}

/// Per-agent start position before validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Cell(Point),
    /// Uniformly random free cell of a part, optionally restricted to a
    /// rectangle inside it.
    InPart { part: String, region: Option<Rect> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentDecl {
    pub profile: PersonProfile,
    pub start: Start,
}

/// Inclusive value range sampled uniformly; `lo == hi` is a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValueRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        ValueRange { lo, hi }
    }

    pub fn constant(v: f64) -> Self {
        ValueRange { lo: v, hi: v }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo >= self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

/// A batch of agents spread uniformly over a part (or a sub-rectangle of it).
#[derive(Debug, Clone, PartialEq)]
pub struct AgentGroup {
    pub name: String,
    pub part: String,
    pub count: usize,
    pub region: Option<Rect>,
    pub ranges: BTreeMap<PropertyKind, ValueRange>,
    pub familiar: bool,
    pub gender_factor: f64,
    pub emergency_factor: f64,
}

impl AgentGroup {
    fn sample_profile(&self, rng: &mut impl Rng) -> PersonProfile {
        let mut profile = PersonProfile {
            familiar: self.familiar,
            gender_factor: self.gender_factor,
            emergency_factor: self.emergency_factor,
            ..PersonProfile::default()
        };
        for kind in PropertyKind::ALL {
            if let Some(r) = self.ranges.get(&kind) {
                let v = r.sample(rng);
                match kind {
                    PropertyKind::Age => profile.age = v,
                    PropertyKind::Weight => profile.weight = v,
                    PropertyKind::Disease => profile.disease = v,
                    PropertyKind::Shock => profile.shock = v,
                    PropertyKind::Collaboration => profile.collaboration = v,
                }
            }
        }
        profile
    }
}

pub const DEFAULT_TICK_S: f64 = 0.25;
pub const DEFAULT_MAX_TICKS: u32 = 2400;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub area: EvacuationArea,
    pub agents: Vec<AgentDecl>,
    pub groups: Vec<AgentGroup>,
    pub speed_model: SpeedModel,
    pub seed: u64,
    /// Seconds per tick.
    pub tick_duration: f64,
    pub max_ticks: u32,
}

impl Scenario {
    pub fn new(area: EvacuationArea) -> Self {
        Scenario {
            area,
            agents: Vec::new(),
            groups: Vec::new(),
            speed_model: SpeedModel::default(),
            seed: 0,
            tick_duration: DEFAULT_TICK_S,
            max_ticks: DEFAULT_MAX_TICKS,
        }
    }
}

/// A scenario whose invariants hold and whose agents all have explicit,
/// distinct start cells inside a part.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidScenario(Scenario);

impl ValidScenario {
    pub fn scenario(&self) -> &Scenario {
        &self.0
    }

    pub fn into_inner(self) -> Scenario {
        self.0
    }

    pub fn area(&self) -> &EvacuationArea {
        &self.0.area
    }

    /// Start cell of every agent.
    pub fn starts(&self) -> impl Iterator<Item = Point> + '_ {
        self.0.agents.iter().map(|a| match a.start {
            Start::Cell(p) => p,
            Start::InPart { .. } => unreachable!("validated scenarios have resolved starts"),
        })
    }

    /// Wraps a scenario without checking it. Test helper for exercising
    /// engine guards that validation normally prevents.
    #[doc(hidden)]
    pub fn assume_valid(scenario: Scenario) -> Self {
        ValidScenario(scenario)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("area {width}x{height} with cell size {cell_size} is not usable")]
    InvalidArea {
        width: i32,
        height: i32,
        cell_size: f64,
    },
    #[error("wall cell {cell} is outside the interior")]
    WallOutside { cell: Point },
    #[error("part `{part}` is empty")]
    EmptyPart { part: String },
    #[error("part `{part}` contains blocked cell {cell}")]
    PartContainsWall { part: String, cell: Point },
    #[error("parts `{a}` and `{b}` overlap at {cell}")]
    OverlappingParts { a: String, b: String, cell: Point },
    #[error("duplicate part `{part}`")]
    DuplicatePart { part: String },
    #[error("unknown part `{part}`")]
    UnknownPart { part: String },
    #[error("duplicate exit id {exit}")]
    DuplicateExit { exit: u32 },
    #[error("exit {exit} at {at} is not on the boundary wall or does not fit")]
    InvalidBoundary { exit: u32, at: Point },
    #[error("exits {a} and {b} share door cell {cell}")]
    OverlappingExits { a: u32, b: u32, cell: Point },
    #[error("part `{part}` has no exit")]
    PartWithoutExit { part: String },
    #[error("exit {exit} is not reachable from {cell} in part `{part}`")]
    UnreachableExit { exit: u32, part: String, cell: Point },
    #[error("agent {agent}: {property} = {value} is outside [{lo}, {hi}]")]
    AgentOutOfDomain {
        agent: usize,
        property: PropertyKind,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("agent {agent}: {factor} must be positive, got {value}")]
    AgentFactor {
        agent: usize,
        factor: &'static str,
        value: f64,
    },
    #[error("agent {agent}: start {cell} {reason}")]
    AgentStart {
        agent: usize,
        cell: Point,
        reason: &'static str,
    },
    #[error("part `{part}` has {available} free cells, {needed} agents requested")]
    NotEnoughCells {
        part: String,
        needed: usize,
        available: usize,
    },
    #[error("property `{property}`: {message}")]
    PropertySpec {
        property: PropertyKind,
        message: String,
    },
    #[error("tick_duration {tick_duration} and max_ticks {max_ticks} must be positive")]
    InvalidTiming { tick_duration: f64, max_ticks: u32 },
}

impl ValidationError {
    pub fn kind(&self) -> &'static str {
        match self {
            ValidationError::UnreachableExit { .. } | ValidationError::PartWithoutExit { .. } => {
                "unreachable-exit"
            }
            ValidationError::InvalidBoundary { .. } => "invalid-boundary",
            ValidationError::OverlappingParts { .. } => "overlapping-parts",
            ValidationError::AgentOutOfDomain { .. } | ValidationError::AgentFactor { .. } => {
                "agent-out-of-domain"
            }
            ValidationError::AgentStart { .. } | ValidationError::NotEnoughCells { .. } => {
                "agent-start"
            }
            _ => "invalid-scenario",
        }
    }
}

/// Checks the area's own invariants: geometry, parts, exits and that every
/// part cell reaches each of its exits by greedy descent.
pub fn validate_area(area: &EvacuationArea) -> Result<(), ValidationError> {
    if area.width < 2 || area.height < 2 || !(area.cell_size > 0.0) {
        return Err(ValidationError::InvalidArea {
            width: area.width,
            height: area.height,
            cell_size: area.cell_size,
        });
    }
    if let Some(&cell) = area.walls.iter().find(|&&c| !area.is_interior(c)) {
        return Err(ValidationError::WallOutside { cell });
    }

    let mut owner: BTreeMap<Point, &str> = BTreeMap::new();
    for (i, part) in area.parts.iter().enumerate() {
        if area.parts[..i].iter().any(|p| p.name == part.name) {
            return Err(ValidationError::DuplicatePart {
                part: part.name.clone(),
            });
        }
        if part.cells.is_empty() {
            return Err(ValidationError::EmptyPart {
                part: part.name.clone(),
            });
        }
        for &cell in &part.cells {
            if !area.is_interior(cell) || area.walls.contains(&cell) {
                return Err(ValidationError::PartContainsWall {
                    part: part.name.clone(),
                    cell,
                });
            }
            if let Some(other) = owner.insert(cell, &part.name) {
                return Err(ValidationError::OverlappingParts {
                    a: other.to_string(),
                    b: part.name.clone(),
                    cell,
                });
            }
        }
    }

    let mut door_owner: BTreeMap<Point, u32> = BTreeMap::new();
    for (i, exit) in area.exits.iter().enumerate() {
        if area.exits[..i].iter().any(|e| e.id == exit.id) {
            return Err(ValidationError::DuplicateExit { exit: exit.id });
        }
        let cells = exit
            .door_cells(area)
            .ok_or(ValidationError::InvalidBoundary {
                exit: exit.id,
                at: exit.center(),
            })?;
        for cell in cells {
            if let Some(other) = door_owner.insert(cell, exit.id) {
                return Err(ValidationError::OverlappingExits {
                    a: other,
                    b: exit.id,
                    cell,
                });
            }
        }
        if let Some(part) = exit.parts.iter().find(|p| area.part(p).is_none()) {
            return Err(ValidationError::UnknownPart { part: part.clone() });
        }
    }

    let grid = area.grid();
    let reach: Vec<(u32, Vec<bool>)> = area
        .exits
        .iter()
        .map(|e| (e.id, grid.greedy_reach(e)))
        .collect();
    for part in &area.parts {
        let mut any = false;
        for (exit, (id, ok)) in area.exits.iter().zip(&reach) {
            if !exit.serves(&part.name) {
                continue;
            }
            any = true;
            if let Some(&cell) = part.cells.iter().find(|&&c| !ok[grid.index(c)]) {
                return Err(ValidationError::UnreachableExit {
                    exit: *id,
                    part: part.name.clone(),
                    cell,
                });
            }
        }
        if !any {
            return Err(ValidationError::PartWithoutExit {
                part: part.name.clone(),
            });
        }
    }
    Ok(())
}

fn check_profile(
    agent: usize,
    profile: &PersonProfile,
    model: &SpeedModel,
) -> Result<(), ValidationError> {
    for spec in model.specs() {
        let value = profile.value(spec.property);
        if !spec.contains(value) {
            let (lo, hi) = spec.domain();
            return Err(ValidationError::AgentOutOfDomain {
                agent,
                property: spec.property,
                value,
                lo,
                hi,
            });
        }
    }
    for (factor, value) in [
        ("gender_factor", profile.gender_factor),
        ("emergency_factor", profile.emergency_factor),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ValidationError::AgentFactor {
                agent,
                factor,
                value,
            });
        }
    }
    Ok(())
}

/// Validates a scenario and resolves every agent's start cell.
///
/// Agents are numbered from 1 in declaration order: explicit agents first,
/// then each group in turn. Validating an already validated scenario returns
/// it unchanged.
pub fn validate_scenario(mut scenario: Scenario) -> Result<ValidScenario, ValidationError> {
    if !(scenario.tick_duration > 0.0) || scenario.max_ticks == 0 {
        return Err(ValidationError::InvalidTiming {
            tick_duration: scenario.tick_duration,
            max_ticks: scenario.max_ticks,
        });
    }
    validate_area(&scenario.area)?;

    let mut profile_rng = rng::stream(scenario.seed, rng::PROFILE, 0);
    for group in std::mem::take(&mut scenario.groups) {
        if scenario.area.part(&group.part).is_none() {
            return Err(ValidationError::UnknownPart { part: group.part });
        }
        for _ in 0..group.count {
            scenario.agents.push(AgentDecl {
                profile: group.sample_profile(&mut profile_rng),
                start: Start::InPart {
                    part: group.part.clone(),
                    region: group.region,
                },
            });
        }
    }
    for (i, a) in scenario.agents.iter().enumerate() {
        check_profile(i + 1, &a.profile, &scenario.speed_model)?;
    }
    resolve_starts(&mut scenario)?;
    Ok(ValidScenario(scenario))
}

fn resolve_starts(scenario: &mut Scenario) -> Result<(), ValidationError> {
    let area = &scenario.area;
    let grid = area.grid();
    let mut taken = vec![false; grid.len()];
    for (i, agent) in scenario.agents.iter().enumerate() {
        if let Start::Cell(cell) = agent.start {
            let reason = if !area.in_bounds(cell) || grid.is_blocked(cell) {
                Some("is outside the grid or blocked")
            } else if area.part_of(cell).is_none() {
                Some("is not inside a part")
            } else if taken[grid.index(cell)] {
                Some("is already taken")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(ValidationError::AgentStart {
                    agent: i + 1,
                    cell,
                    reason,
                });
            }
            taken[grid.index(cell)] = true;
        }
    }

    let mut place_rng = rng::stream(scenario.seed, rng::PLACEMENT, 0);
    let mut resolved = Vec::with_capacity(scenario.agents.len());
    for agent in &scenario.agents {
        let cell = match &agent.start {
            Start::Cell(p) => *p,
            Start::InPart { part, region } => {
                let part_cells = &area
                    .part(part)
                    .ok_or_else(|| ValidationError::UnknownPart { part: part.clone() })?
                    .cells;
                let free: Vec<Point> = part_cells
                    .iter()
                    .copied()
                    .filter(|&c| region.is_none_or(|r| r.contains(c)) && !taken[grid.index(c)])
                    .collect();
                if free.is_empty() {
                    let needed = scenario
                        .agents
                        .iter()
                        .filter(|a| matches!(&a.start, Start::InPart { part: p, .. } if p == part))
                        .count();
                    return Err(ValidationError::NotEnoughCells {
                        part: part.clone(),
                        needed,
                        available: part_cells.len(),
                    });
                }
                let cell = free[place_rng.random_range(0..free.len())];
                taken[grid.index(cell)] = true;
                cell
            }
        };
        resolved.push(cell);
    }
    for (agent, cell) in scenario.agents.iter_mut().zip(resolved) {
        agent.start = Start::Cell(cell);
    }
    Ok(())
}
