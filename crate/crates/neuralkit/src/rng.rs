//! Counter-style random streams: every draw is addressed by
//! `(seed, epoch, batch, purpose)`, so results never depend on the order in
//! which workers ask for randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    WindowShuffle = 2,
    EpochShuffle = 3,
    Dropout = 4,
}

pub fn keyed_rng(seed: u64, epoch: u64, batch: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, epoch, batch, purpose as u64]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
