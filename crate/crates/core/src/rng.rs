//! Seeding conventions.
//!
//! Every random draw in the crate comes from [`Rng`], a ChaCha8 stream
//! seeded from a 64-bit integer with `SeedableRng::seed_from_u64`.

use rand::SeedableRng;

pub type Rng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent unit under `master`:
/// `master × 1_000_003 + index` (wrapping).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    master.wrapping_mul(1_000_003).wrapping_add(index)
}

/// Seed derived from a set of row indices, so that the same held-out rows
/// get the same stream no matter which protocol produced the fold.
pub fn seed_for_rows(master: u64, rows: &[usize]) -> u64 {
    // FNV-1a over the row indices.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &r in rows {
        for b in (r as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    derive_seed(master, h)
}
