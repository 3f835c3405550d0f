//! Seeded sampling with outputs that do not depend on platform or crate
//! internals beyond the ChaCha8 keystream.
//!
//! Every seed owns two streams of the same key: stream 0 draws the labeled
//! set and stream 1 draws the label noise, so changing the noise rate never
//! changes which instances are labeled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LABEL_STREAM: u64 = 0;
pub const NOISE_STREAM: u64 = 1;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform integer in `0..n` by widening multiplication with rejection.
pub fn below<R: RngCore>(rng: &mut R, n: u64) -> u64 {
    assert!(n > 0, "empty range");
    let threshold = n.wrapping_neg() % n;
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(n);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

/// Uniform `f64` in `[0, 1)` from the top 53 bits.
pub fn unit<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `k` distinct items of `pool`, uniformly, in draw order (partial
/// Fisher-Yates).
pub fn choose<R: RngCore, T: Copy>(rng: &mut R, pool: &[T], k: usize) -> Vec<T> {
    assert!(k <= pool.len(), "cannot draw {k} from {}", pool.len());
    let mut items = pool.to_vec();
    for i in 0..k {
        let j = i + below(rng, (items.len() - i) as u64) as usize;
        items.swap(i, j);
    }
    items.truncate(k);
    items
}
