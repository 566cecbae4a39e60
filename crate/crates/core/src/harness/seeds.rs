//! RNG stream derivation.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed and positioned on
//! one of its 2^64 independent streams:
//!
//! * learning, replication `r` of a variant with id `v`: key
//!   `master_seed`, stream `(v << 32) | r`;
//! * evaluation of replication `r` after iteration `i`: key
//!   `master_seed ^ EVAL_SALT`, stream `(r << 32) | i`. The variant is left out
//!   so that variants compared at the same point face the same piece draws as
//!   far as their games stay in step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::learner::Variant;

pub const EVAL_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn learning_rng(master_seed: u64, variant: Variant, replication: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((variant.id() << 32) | replication as u64);
    rng
}

pub fn evaluation_rng(master_seed: u64, replication: u32, iteration: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ EVAL_SALT);
    rng.set_stream(((replication as u64) << 32) | iteration as u64);
    rng
}
