//! Deterministic random streams keyed by (master seed, run index, stream).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for scenario layout draws (arms, kinds).
pub const SCENARIO_STREAM: u64 = u64::MAX;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one run, mixing the master seed and the run index.
pub fn run_seed(master: u64, run: u64) -> u64 {
    splitmix(splitmix(master) ^ run.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Independent stream `stream` of the run seeded with `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
