use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent streams within one replication. Arrivals do not depend on the
/// policy, so every policy sees the same arrival sequences for a given seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Arrivals = 1,
    Policy = 2,
    Generator = 3,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for `(master seed, replication, purpose)`.
pub fn stream(master_seed: u64, replication: u64, purpose: Purpose) -> ChaCha8Rng {
    let key = splitmix(splitmix(master_seed) ^ replication.wrapping_mul(0xd134_2543_de82_ef95));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(purpose as u64);
    rng
}
