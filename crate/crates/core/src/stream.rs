//! Counter-based random streams.
//!
//! Every stochastic task (a user drop, a channel realization, one UE's rKA
//! solve) gets its own stream derived from the master seed and a path of
//! indices, so results do not depend on the order or the number of workers
//! that execute the tasks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    path: u64,
}

const ROOT_PATH: u64 = 0x5851_f42d_4c95_7f2d;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            path: ROOT_PATH,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Key of the `index`-th sub-task.
    pub fn child(self, index: u64) -> Self {
        Self {
            seed: self.seed,
            path: splitmix64(self.path ^ splitmix64(index)),
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.path);
        rng
    }
}
