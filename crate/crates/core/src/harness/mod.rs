//! Seeded query generators, mutants, and round-trip benchmarks.

mod bench;
mod gen;
mod mutate;

use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::query::QueryClass;

pub use bench::{bench, learn_with_stats, write_csv, BenchRow, BenchSummary, CSV_HEADER};
pub use gen::{
    gen_random, gen_random_general, gen_random_qhorn1, gen_random_rp, gen_random_rp_raw, qhorn1_from_partition, PartPlan,
};
pub use mutate::{equivalent_variant, mutate_query, MUTATION_ATTEMPTS};

/// Everything a generator needs; the seed fixes the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub class: QueryClass,
    /// Target number of expressions (rp only; qhorn-1 size follows the partition).
    pub k: usize,
    pub theta: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn qhorn1(n: usize, seed: u64) -> GenSpec {
        GenSpec { n, class: QueryClass::Qhorn1, k: n, theta: 1, seed }
    }

    pub fn rp(n: usize, k: usize, theta: usize, seed: u64) -> GenSpec {
        GenSpec { n, class: QueryClass::Rp, k, theta, seed }
    }

    /// Seed of the `i`-th trial derived from this spec.
    pub fn trial(self, i: usize) -> GenSpec {
        GenSpec { seed: self.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)), ..self }
    }
}

pub fn rng_for(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}
