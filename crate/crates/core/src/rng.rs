//! Reproducible random streams.
//!
//! Every trial owns a ChaCha8 generator keyed by the master seed and a
//! configuration label; the trial index selects the ChaCha stream. Streams are
//! independent of the order in which trials are executed, so the worker count
//! never changes results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// FNV-1a hash of a configuration label. Stable across platforms and releases.
pub fn label_id(label: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator for trial `trial` of configuration `config_id` under `master_seed`.
pub fn trial_rng(master_seed: u64, config_id: u64, trial: u64) -> TrialRng {
    let mut seed = [0u8; 32];
    let mut state = master_seed ^ splitmix(config_id);
    for chunk in seed.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}

/// Generator for a one-off computation identified only by a seed.
pub fn seeded(seed: u64) -> TrialRng {
    trial_rng(seed, 0, 0)
}
