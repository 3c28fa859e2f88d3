//! Named, seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] derived from a
//! user seed, a stream name and an index. Trials in a batch each get their own
//! index, so results do not depend on the order in which trials run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::{ComplexMatrix, C64};

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

/// RNG for trial `index` of the stream `name` under `seed`.
pub fn stream_rng(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(name));
    rng.set_stream(index);
    rng
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}
