//! Deterministic per-trial random substreams.
//!
//! Every trial owns a ChaCha8 generator keyed by the 64-bit run seed and
//! positioned on its own 64-bit stream. The stream id packs
//! `domain << 56 | level << 32 | trial`, so the sweep and the CCC check never
//! share a stream and no trial depends on how many draws another one made.
//! Gaussian draws use the ziggurat sampler from `rand_distr`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which experiment a substream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    NoiseSweep = 1,
    CccCheck = 2,
}

pub fn stream_id(domain: Domain, level: usize, trial: usize) -> u64 {
    assert!(level < (1 << 24), "noise level index out of range");
    assert!(trial < (1 << 32), "trial index out of range");
    (domain as u64) << 56 | (level as u64) << 32 | trial as u64
}

pub fn trial_rng(seed: u64, domain: Domain, level: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(domain, level, trial));
    rng
}
