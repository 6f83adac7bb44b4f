//! Seeded random streams.
//!
//! Every random decision in a run draws from a stream derived from the run
//! seed, a purpose tag and an index. Two runs that share a seed therefore see
//! the same draws for the same agent, whatever else differs between them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Placement of agents that start "somewhere in a part".
pub const PLACEMENT: u64 = 1;
/// Property values sampled for generated agents.
pub const PROFILE: u64 = 2;
/// Exit choice of unfamiliar agents, one stream per agent.
pub const EXIT_CHOICE: u64 = 3;
/// Per-tick conflict arbitration.
pub const CONFLICT: u64 = 4;
/// Candidate exit locations.
pub const CANDIDATES: u64 = 5;

pub fn stream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(purpose);
    rng
}
