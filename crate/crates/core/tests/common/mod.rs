#![allow(dead_code)]

use evac_core::domain::{
    validate_scenario, AgentDecl, EvacuationArea, ExitDoor, Part, PersonProfile, Point, Rect, Scenario, Side, Start,
    ValidScenario,
};
use evac_core::engine::{AgentState, Simulation};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub const SIDES: [Side; 4] = [Side::Left, Side::Right, Side::Top, Side::Bottom];

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `width x height` room whose whole interior is the part `room`.
pub fn room(width: i32, height: i32) -> EvacuationArea {
    let mut area = EvacuationArea::empty(width, height, 0.4);
    area.parts = vec![Part::from_rects("room", &[Rect::new(1, 1, width - 1, height - 1)])];
    area
}

pub fn random_wall_point(area: &EvacuationArea, rng: &mut impl Rng) -> Point {
    let side = SIDES[rng.random_range(0..4)];
    let (lo, hi) = area.wall_range(side);
    area.wall_point(side, rng.random_range(lo..=hi))
}

/// Distinct single-cell exits at random boundary cells, ids from 1.
pub fn random_exits(area: &EvacuationArea, count: usize, rng: &mut impl Rng) -> Vec<ExitDoor> {
    let mut exits: Vec<ExitDoor> = Vec::new();
    while exits.len() < count {
        let p = random_wall_point(area, rng);
        if exits.iter().all(|e| e.center() != p) {
            exits.push(ExitDoor::new(exits.len() as u32 + 1, p.x, p.y));
        }
    }
    exits
}

pub fn random_profile(rng: &mut impl Rng) -> PersonProfile {
    PersonProfile {
        age: rng.random_range(16.0..=105.0),
        weight: rng.random_range(30.0..=150.0),
        disease: rng.random_range(0.0..=100.0),
        shock: rng.random_range(0.0..=100.0),
        collaboration: rng.random_range(0.0..=100.0),
        familiar: rng.random_bool(0.5),
        gender_factor: rng.random_range(0.8..=1.2),
        emergency_factor: rng.random_range(0.8..=1.5),
    }
}

/// A random valid scenario: room of 6..=24 cells a side, a few interior
/// wall cells, 1..=4 exits (some wider than one cell) and up to 40 agents.
pub fn random_scenario(rng: &mut impl Rng) -> ValidScenario {
    loop {
        let (w, h) = (rng.random_range(6..=24), rng.random_range(6..=24));
        let mut area = room(w, h);
        let obstacles = rng.random_range(0..=4);
        for _ in 0..obstacles {
            area.walls.insert(Point::new(rng.random_range(2..w - 1), rng.random_range(2..h - 1)));
        }
        let walls = area.walls.clone();
        area.parts = vec![Part {
            name: "room".into(),
            cells: Rect::new(1, 1, w - 1, h - 1).cells().filter(|p| !walls.contains(p)).collect(),
        }];
        let exit_count = rng.random_range(1..=4);
        area.exits = random_exits(&area, exit_count, rng);
        for e in &mut area.exits {
            e.width_cells = rng.random_range(1..=3);
        }
        let free = area.parts[0].cells.len();
        let agents = rng.random_range(1..=40.min(free));
        let mut scenario = Scenario::new(area);
        scenario.seed = rng.random();
        scenario.max_ticks = 3_000;
        scenario.agents = (0..agents)
            .map(|_| AgentDecl {
                profile: random_profile(rng),
                start: Start::InPart {
                    part: "room".into(),
                    region: None,
                },
            })
            .collect();
        if let Ok(valid) = validate_scenario(scenario) {
            return valid;
        }
    }
}

/// Ticks for one agent at `speed` cells per tick to walk from `start` to
/// the exit, alone in `area`.
pub fn lone_agent_ticks(area: &EvacuationArea, start: Point, exit_id: u32, speed: f64) -> u32 {
    let agent = AgentState::new(1, PersonProfile::default(), start, exit_id, speed);
    let mut sim = Simulation::new(area, vec![agent], 0).expect("valid lone agent");
    while !sim.all_evacuated() {
        assert!(sim.tick() < 1_000_000, "lone agent never arrives");
        sim.step();
    }
    sim.agents()[0].evac_tick.expect("evacuated")
}

/// Cells a greedy 8-neighbour walk needs on an obstacle-free grid.
pub fn chebyshev(a: Point, b: Point) -> u32 {
    (a.x - b.x).unsigned_abs().max((a.y - b.y).unsigned_abs())
}
