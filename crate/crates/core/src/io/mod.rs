pub mod duration;
pub mod replay;
pub mod report;
pub mod scenario_file;
