//! Discrete-time cellular movement with cell exclusion.
//!
//! Each tick every moving agent earns `speed_cells_per_tick` of movement
//! credit and spends one unit per move. A move goes to the open
//! 8-neighbor closest to the agent's target door centre. Agents wanting
//! the same free cell are ordered by a seeded shuffle; the first moves and
//! the rest wait for the tick with their credit intact. A door cell holds
//! its evacuee until the end of the tick, so a door `w` cells wide lets
//! at most `w` agents out per tick.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{validate_area, CellGrid, EvacuationArea, ExitDoor, PersonProfile, Point, ValidScenario};
use crate::error::Result;
use crate::routing::choose_exit;
use crate::rng;

/// Credit within this of a whole move counts as a whole move.
const CREDIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("agents {stuck:?} not evacuated after {max_ticks} ticks")]
    Timeout { max_ticks: u32, stuck: Vec<u32> },
    #[error("invalid initial state: {0}")]
    InvalidState(String),
}

/// km/h to cells per tick.
pub fn speed_to_cells(kmh: f64, cell_size_m: f64, tick_s: f64) -> Result<f64, EngineError> {
    for (name, value) in [("speed", kmh), ("cell_size", cell_size_m), ("tick_duration", tick_s)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(EngineError::NonPositive { name, value });
        }
    }
    Ok(kmh * (1000.0 / 3600.0) * tick_s / cell_size_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Moving,
    Evacuated,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Moving => "moving",
            Status::Evacuated => "evacuated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: u32,
    pub profile: PersonProfile,
    pub pos: Point,
    pub target_exit: u32,
    pub speed_cells_per_tick: f64,
    pub movement_credit: f64,
    pub status: Status,
    pub evac_tick: Option<u32>,
    pub waits: u32,
}

impl AgentState {
    pub fn new(id: u32, profile: PersonProfile, pos: Point, target_exit: u32, speed_cells_per_tick: f64) -> Self {
        AgentState {
            id,
            profile,
            pos,
            target_exit,
            speed_cells_per_tick,
            movement_credit: 0.0,
            status: Status::Moving,
            evac_tick: None,
            waits: 0,
        }
    }

    fn is_moving(&self) -> bool {
        self.status == Status::Moving
    }

    fn can_move(&self) -> bool {
        self.is_moving() && self.movement_credit + CREDIT_EPS >= 1.0
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    grid: CellGrid,
    targets: BTreeMap<u32, Point>,
    agents: Vec<AgentState>,
    occupancy: Vec<Option<usize>>,
    tick: u32,
    rng: ChaCha8Rng,
}

impl Simulation {
    /// Agents must start on distinct open cells and target an existing exit.
    pub fn new(area: &EvacuationArea, agents: Vec<AgentState>, seed: u64) -> Result<Self, EngineError> {
        let grid = area.grid();
        let targets: BTreeMap<u32, Point> = area.exits.iter().map(|e| (e.id, e.center())).collect();
        let mut occupancy = vec![None; grid.len()];
        for (i, a) in agents.iter().enumerate() {
            if grid.is_blocked(a.pos) {
                return Err(EngineError::InvalidState(format!("agent {} starts on blocked cell {}", a.id, a.pos)));
            }
            if !targets.contains_key(&a.target_exit) {
                return Err(EngineError::InvalidState(format!("agent {} targets unknown exit {}", a.id, a.target_exit)));
            }
            if !(a.speed_cells_per_tick > 0.0) {
                return Err(EngineError::InvalidState(format!("agent {} has no speed", a.id)));
            }
            let cell = grid.index(a.pos);
            if occupancy[cell].replace(i).is_some() {
                return Err(EngineError::InvalidState(format!("two agents start on {}", a.pos)));
            }
        }
        Ok(Simulation {
            grid,
            targets,
            agents,
            occupancy,
            tick: 0,
            rng: rng::stream(seed, rng::CONFLICT, 0),
        })
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn all_evacuated(&self) -> bool {
        self.agents.iter().all(|a| !a.is_moving())
    }

    fn desired_cell(&self, i: usize) -> Option<Point> {
        let a = &self.agents[i];
        self.grid.greedy_next(a.pos, self.targets[&a.target_exit])
    }

    fn move_agent(&mut self, i: usize, to: Point, exited: &mut Vec<usize>) {
        let from = self.grid.index(self.agents[i].pos);
        let to_idx = self.grid.index(to);
        self.occupancy[from] = None;
        self.occupancy[to_idx] = Some(i);
        let tick = self.tick;
        let reached = self.grid.door_at(to) == Some(self.agents[i].target_exit);
        let a = &mut self.agents[i];
        a.pos = to;
        a.movement_credit = (a.movement_credit - 1.0).max(0.0);
        if reached {
            a.status = Status::Evacuated;
            a.evac_tick = Some(tick);
            exited.push(i);
        }
    }

    /// Advances one tick.
    pub fn step(&mut self) {
        self.tick += 1;
        let n = self.agents.len();
        let mut waited = vec![false; n];
        let mut exited = Vec::new();

        for a in self.agents.iter_mut().filter(|a| a.is_moving()) {
            a.movement_credit += a.speed_cells_per_tick;
        }
        let mut active: Vec<usize> = (0..n).filter(|&i| self.agents[i].can_move()).collect();

        while !active.is_empty() {
            let mut pending = Vec::with_capacity(active.len());
            for &i in &active {
                match self.desired_cell(i) {
                    Some(cell) => pending.push((i, cell)),
                    None => waited[i] = true,
                }
            }
            let mut moved = Vec::new();
            loop {
                let mut groups: BTreeMap<usize, (Point, Vec<usize>)> = BTreeMap::new();
                let mut blocked = Vec::new();
                for (i, cell) in pending.drain(..) {
                    let idx = self.grid.index(cell);
                    if self.occupancy[idx].is_none() {
                        groups.entry(idx).or_insert_with(|| (cell, Vec::new())).1.push(i);
                    } else {
                        blocked.push((i, cell));
                    }
                }
                pending = blocked;
                if groups.is_empty() {
                    break;
                }
                for (_, (cell, mut contenders)) in groups {
                    if contenders.len() > 1 {
                        contenders.shuffle(&mut self.rng);
                    }
                    for &loser in &contenders[1..] {
                        waited[loser] = true;
                    }
                    self.move_agent(contenders[0], cell, &mut exited);
                    moved.push(contenders[0]);
                }
            }
            for (i, _) in pending {
                waited[i] = true;
            }
            moved.sort_unstable();
            active = moved
                .into_iter()
                .filter(|&i| !waited[i] && self.agents[i].can_move())
                .collect();
        }

        for (a, w) in self.agents.iter_mut().zip(&waited) {
            if *w && a.is_moving() {
                a.waits += 1;
                a.movement_credit = a.movement_credit.min(1.0);
            }
        }
        for i in exited {
            let cell = self.grid.index(self.agents[i].pos);
            self.occupancy[cell] = None;
        }

        #[cfg(debug_assertions)]
        if let Err(e) = self.check_invariants() {
            panic!("tick {}: {e}", self.tick);
        }
    }

    /// No shared cells, no agent on a blocked cell, credit in range.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = vec![false; self.grid.len()];
        for (i, a) in self.agents.iter().enumerate() {
            if (a.status == Status::Evacuated) != a.evac_tick.is_some() {
                return Err(format!("agent {} status and evac tick disagree", a.id));
            }
            if !a.is_moving() {
                continue;
            }
            if self.grid.is_blocked(a.pos) {
                return Err(format!("agent {} on blocked cell {}", a.id, a.pos));
            }
            let idx = self.grid.index(a.pos);
            if std::mem::replace(&mut seen[idx], true) {
                return Err(format!("cell {} shared", a.pos));
            }
            if self.occupancy[idx] != Some(i) {
                return Err(format!("occupancy out of sync at {}", a.pos));
            }
            if a.movement_credit < 0.0 || a.movement_credit > 1.0 + a.speed_cells_per_tick {
                return Err(format!("agent {} credit {} out of range", a.id, a.movement_credit));
            }
        }
        let occupied = self.occupancy.iter().filter(|o| o.is_some()).count();
        let moving = self.agents.iter().filter(|a| a.is_moving()).count();
        if occupied != moving {
            return Err(format!("{occupied} occupied cells for {moving} moving agents"));
        }
        Ok(())
    }

    pub fn stuck_agents(&self) -> Vec<u32> {
        self.agents.iter().filter(|a| a.is_moving()).map(|a| a.id).collect()
    }
}

/// Per-agent outcome of one evacuation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub agent_ids: Vec<u32>,
    pub exit_ids: Vec<u32>,
    pub durations_ms: Vec<u64>,
    pub wait_events: Vec<u32>,
    /// `Σ durations_ms / (1000 n)`; zero for an empty run.
    pub average_s: f64,
}

pub fn average_seconds(durations_ms: &[u64]) -> f64 {
    if durations_ms.is_empty() {
        return 0.0;
    }
    durations_ms.iter().sum::<u64>() as f64 / (1000.0 * durations_ms.len() as f64)
}

impl RunResult {
    /// Result carrying durations only, agents numbered from 1.
    pub fn from_durations(durations_ms: Vec<u64>) -> Self {
        let n = durations_ms.len();
        RunResult {
            agent_ids: (1..=n as u32).collect(),
            exit_ids: vec![0; n],
            wait_events: vec![0; n],
            average_s: average_seconds(&durations_ms),
            durations_ms,
        }
    }

    /// Concatenates repeated runs; the average is over every duration.
    pub fn merge(results: Vec<RunResult>) -> Self {
        let mut out = RunResult::from_durations(Vec::new());
        for r in results {
            out.agent_ids.extend(r.agent_ids);
            out.exit_ids.extend(r.exit_ids);
            out.durations_ms.extend(r.durations_ms);
            out.wait_events.extend(r.wait_events);
        }
        out.average_s = average_seconds(&out.durations_ms);
        out
    }

    pub fn len(&self) -> usize {
        self.durations_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations_ms.is_empty()
    }
}

/// Initial agent states: speed from the fuzzy model, exit from routing.
///
/// Each agent's exit draw comes from its own stream of `seed`, so the same
/// seed gives the same draws whatever the exit locations are.
pub fn initial_agents(scenario: &ValidScenario, exits: &[ExitDoor], seed: u64) -> Result<Vec<AgentState>> {
    let s = scenario.scenario();
    let area = &s.area;
    scenario
        .starts()
        .zip(&s.agents)
        .enumerate()
        .map(|(i, (pos, decl))| {
            let part = area
                .part_of(pos)
                .ok_or_else(|| EngineError::InvalidState(format!("agent {} outside every part", i + 1)))?;
            let options: Vec<ExitDoor> = exits.iter().filter(|e| e.serves(&part.name)).cloned().collect();
            let mut draw = rng::stream(seed, rng::EXIT_CHOICE, i as u64);
            let target = choose_exit(decl.profile.familiar, pos, &options, &mut draw)?;
            let kmh = s.speed_model.agent_speed(&decl.profile)?.kmh;
            let speed = speed_to_cells(kmh, area.cell_size, s.tick_duration)?;
            Ok(AgentState::new(i as u32 + 1, decl.profile.clone(), pos, target, speed))
        })
        .collect()
}

pub fn run_evacuation(scenario: &ValidScenario, exits_override: Option<&[ExitDoor]>, seed: u64) -> Result<RunResult> {
    run_evacuation_with(scenario, exits_override, seed, |_| {})
}

/// Like [`run_evacuation`], calling `observe` after setup and after every
/// tick.
pub fn run_evacuation_with(
    scenario: &ValidScenario,
    exits_override: Option<&[ExitDoor]>,
    seed: u64,
    mut observe: impl FnMut(&Simulation),
) -> Result<RunResult> {
    let s = scenario.scenario();
    let relocated;
    let area = match exits_override {
        Some(exits) => {
            let mut a = s.area.clone();
            a.exits = exits.to_vec();
            validate_area(&a)?;
            relocated = a;
            &relocated
        }
        None => &s.area,
    };
    let agents = initial_agents(scenario, &area.exits, seed)?;
    let mut sim = Simulation::new(area, agents, seed)?;
    observe(&sim);
    while !sim.all_evacuated() && sim.tick() < s.max_ticks {
        sim.step();
        observe(&sim);
    }
    if !sim.all_evacuated() {
        return Err(EngineError::Timeout {
            max_ticks: s.max_ticks,
            stuck: sim.stuck_agents(),
        }
        .into());
    }
    let durations_ms: Vec<u64> = sim
        .agents()
        .iter()
        .map(|a| (a.evac_tick.unwrap_or(0) as f64 * s.tick_duration * 1000.0).round() as u64)
        .collect();
    Ok(RunResult {
        agent_ids: sim.agents().iter().map(|a| a.id).collect(),
        exit_ids: sim.agents().iter().map(|a| a.target_exit).collect(),
        wait_events: sim.agents().iter().map(|a| a.waits).collect(),
        average_s: average_seconds(&durations_ms),
        durations_ms,
    })
}
