//! Seeded randomness.
//!
//! Every random choice in this crate flows through two named primitives so
//! that runs are reproducible byte-for-byte and can be replayed by other
//! implementations:
//!
//! * ChaCha8 (via [`rand_chacha::ChaCha8Rng`]) as the stream generator. It is
//!   counter-based, platform-independent, and its output is stable across
//!   `rand_chacha` releases.
//! * SplitMix64 as the seed-derivation hash, used to split one master seed
//!   into independent per-graph / per-split / per-task seeds.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 golden-gamma increment.
const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for stream `stream` from a master seed.
///
/// Computed as `splitmix64(master + (stream + 1) * GAMMA)`, i.e. the
/// (`stream`+1)-th output of a SplitMix64 generator seeded with `master`.
/// Distinct streams give statistically independent seeds.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master.wrapping_add(stream.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// Derive a domain-separated master seed, so that different subsystems
/// (feature sampling, data splits, solver pair selection, ...) consuming the
/// same user-facing seed never share streams.
pub fn domain_seed(master: u64, domain: Domain) -> u64 {
    splitmix64(master ^ (domain as u64).wrapping_mul(GAMMA))
}

/// Subsystems drawing from one user-facing master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Per-graph pair sampling for reduced feature vectors.
    FeatureSampling = 1,
    /// Train/test shuffles in the benchmark protocol.
    Splits = 2,
    /// Working-pair fallback selection in the SVM solver.
    Solver = 3,
    /// Graph generation in batch experiments.
    Generation = 4,
}

/// ChaCha8 generator for the given 64-bit seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_is_deterministic_and_stream_dependent() {
        assert_eq!(derive_seed(42, 0), derive_seed(42, 0));
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 0), derive_seed(43, 0));
    }

    #[test]
    fn domains_do_not_collide() {
        let ds = [
            Domain::FeatureSampling,
            Domain::Splits,
            Domain::Solver,
            Domain::Generation,
        ];
        for (i, &a) in ds.iter().enumerate() {
            for &b in ds.iter().skip(i + 1) {
                assert_ne!(domain_seed(7, a), domain_seed(7, b));
            }
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // First three outputs of SplitMix64 seeded with 0, from the
        // reference implementation.
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(derive_seed(0, 2), 0x06C4_5D18_8009_454F);
    }
}
