//! Deterministic random streams for generators and Monte-Carlo tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; mixes a master seed with a stream index.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over a label, for deriving per-family seed streams.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn gaussian_vec(rng: &mut Rng, n: usize, sigma: f64) -> Vec<f64> {
    let dist = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Gaussian random walk (cumulative sum of iid steps).
pub fn random_walk(rng: &mut Rng, n: usize, sigma: f64) -> Vec<f64> {
    let mut acc = 0.0;
    gaussian_vec(rng, n, sigma)
        .into_iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect()
}
