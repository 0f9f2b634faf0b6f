//! Seeded random substreams.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by a
//! `(seed, stream)` pair, so a replicate's draws depend only on its own
//! address and never on scheduling. Nested loops derive child seeds with
//! [`child_seed`].

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::normal;

pub type StreamRng = ChaCha8Rng;

/// Stream reserved for tie-breaking coin flips on observed data.
pub const OBSERVED_STREAM: u64 = u64::MAX;
/// Stream reserved for synthetic dataset generation in simulations.
pub const DATA_STREAM: u64 = u64::MAX - 1;

/// Opens stream `stream` under master seed `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Master seed for the `index`-th child of `seed` (e.g. one outer simulation
/// replication).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Uniform on the open interval (0, 1) with 53 bits of resolution.
#[inline]
pub fn open_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal variate by inversion of one open uniform.
#[inline]
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    normal::quantile(open_uniform(rng))
}
