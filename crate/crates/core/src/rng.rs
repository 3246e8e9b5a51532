//! Seeded random streams. Each (master seed, trial, stream tag) triple maps to
//! an independent ChaCha20 stream, so trials can run in any order or on any
//! thread and still draw identical numbers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamTag {
    Target = 0,
    Adversary = 1,
    Feedback = 2,
    Oracle = 3,
    Learner = 4,
    Suite = 5,
}

pub fn stream_rng(master_seed: u64, trial_index: u64, tag: StreamTag) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream((trial_index << 8) | tag as u64);
    rng
}

/// A single 64-bit seed drawn from the given stream.
pub fn derived_seed(master_seed: u64, trial_index: u64, tag: StreamTag) -> u64 {
    stream_rng(master_seed, trial_index, tag).next_u64()
}
