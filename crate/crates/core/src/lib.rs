//! Grid-based pedestrian evacuation simulator.
//!
//! Agents derive a walking speed from fuzzified personal properties
//! ([`fuzzy`]), pick an exit door ([`routing`]), and move through a cellular
//! grid with cell exclusion ([`engine`]). The [`optimizer`] relocates one exit
//! door along a wall, simulates every candidate location and keeps the one
//! with the smallest average evacuation time; whole designs are compared the
//! same way.
//!
//! Scenario files, duration text, CSV reports and the `evac` command line
//! live in [`io`] and [`cli`].

pub mod cli;
pub mod domain;
pub mod engine;
pub mod error;
pub mod fuzzy;
pub mod io;
pub mod optimizer;
pub mod rng;
pub mod routing;

pub use domain::{
    validate_scenario, AgentDecl, AgentGroup, EvacuationArea, ExitDoor, MembershipClass, Part,
    PersonProfile, Point, PropertyKind, PropertySpec, Rect, Scenario, Side, Start, ValidScenario,
};
pub use engine::{run_evacuation, RunResult};
pub use error::{Error, Result};
pub use optimizer::{optimize, CandidateSpec, DesignReport, OptimizationReport, OptimizeOptions};
