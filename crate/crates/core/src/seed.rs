//! Counter-based seed derivation.
//!
//! Every trial of an ensemble gets its own generator, seeded by
//! [`trial_seed`]`(base, index)`. The mix is the SplitMix64 output function
//! applied to `base + (index + 1) * γ` with γ the 64-bit golden-ratio
//! increment, i.e. the `index`-th output of a SplitMix64 stream started at
//! `base`. Seeds therefore depend only on `(base, index)` and never on which
//! worker ran the trial or in what order.
//!
//! Independent sub-experiments sharing one user seed (for example the two
//! sides of an inequality check) use [`stream_seed`] to get disjoint bases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-trial generator. ChaCha8 keeps trial streams statistically independent.
pub type TrialRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const STREAM_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// Name of the mixing function, echoed into report provenance.
pub const MIXER: &str = "splitmix64(base + (index+1)*0x9e3779b97f4a7c15) -> chacha8";

fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `base`.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    fmix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// Base seed of the `stream`-th independent sub-experiment under `base`.
pub fn stream_seed(base: u64, stream: u64) -> u64 {
    fmix64(trial_seed(base ^ STREAM_SALT, stream) ^ STREAM_SALT.rotate_left(17))
}

pub fn trial_rng(seed: u64) -> TrialRng {
    TrialRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn matches_reference_splitmix64() {
        // First outputs of SplitMix64 seeded with 0 (reference implementation values).
        assert_eq!(trial_seed(0, 0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(trial_seed(0, 1), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn seeds_are_distinct_across_trials_and_streams() {
        let mut seen = HashSet::new();
        for s in 0..4 {
            let base = stream_seed(42, s);
            for i in 0..10_000 {
                assert!(seen.insert(trial_seed(base, i)));
            }
        }
    }

    #[test]
    fn rng_is_a_pure_function_of_seed() {
        let a: Vec<u64> = (0..5)
            .map({
                let mut r = trial_rng(7);
                move |_| r.random()
            })
            .collect();
        let mut r = trial_rng(7);
        let b: Vec<u64> = (0..5).map(|_| r.random()).collect();
        assert_eq!(a, b);
    }
}
