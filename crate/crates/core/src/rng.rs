//! Counter-based random streams.
//!
//! Every replicate draws from its own ChaCha8 keystream. The key is built from
//! the master seed and the experiment cell, the 64-bit stream id is the
//! replicate index, so a replicate's numbers depend only on
//! `(master_seed, cell, replicate)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const DOMAIN: &[u8; 16] = b"cylsim-streams-1";

pub fn stream(master_seed: u64, cell: u64, replicate: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&cell.to_le_bytes());
    key[16..].copy_from_slice(DOMAIN);
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replicate);
    rng
}
