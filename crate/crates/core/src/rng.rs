//! Seeded generators and seed derivation for reproducible runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every engine and experiment cell.
pub type EdoRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> EdoRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// FNV-1a, used to fold string coordinates (instance labels) into seeds.
pub fn hash_label(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives a run seed as a pure function of the master seed, the experiment
/// cell coordinates and the repetition index.
pub fn derive_seed(master: u64, cell: &[u64], repetition: u64) -> u64 {
    let mut h = splitmix64(master);
    for &c in cell {
        h = splitmix64(h ^ c);
    }
    splitmix64(h ^ repetition.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}
