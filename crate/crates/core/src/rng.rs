//! Deterministic, splittable random streams.
//!
//! Every randomized operation in this crate takes an [`RngStream`], a value
//! type naming one keystream of a counter-mode generator. Identical
//! `(seed, stream)` pairs always produce identical variate sequences, and
//! distinct stream ids produce statistically independent sequences, so
//! concurrent trials never share mutable state: each derives its own
//! substream up front.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A named, reproducible stream of randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

impl RngStream {
    /// Root stream for a seed.
    pub fn new(seed: u64) -> Self {
        RngStream { seed, stream: 0 }
    }

    /// A specific (seed, stream-id) pair.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derive an independent child stream. Deterministic in `(self, tag)`;
    /// children with distinct tags get distinct keystreams.
    pub fn substream(&self, tag: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(tag ^ GOLDEN)),
        }
    }

    /// Instantiate the generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; bijective on u64, used only to spread stream tags.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
