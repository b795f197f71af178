//! Additive Gaussian measurement noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::trace::BoundaryTrace;

/// Which trace the noise perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScope {
    /// Each linearized ND-map trace.
    Linearized,
    /// The difference `Λ_rho f - Λ_rho0 f` before division by `eps`.
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation relative to the RMS of the clean trace.
    pub level: f64,
    pub seed: u64,
    pub scope: NoiseScope,
}

impl NoiseModel {
    pub fn new(level: f64, seed: u64, scope: NoiseScope) -> Self {
        assert!(
            level >= 0.0 && level.is_finite(),
            "noise level must be >= 0"
        );
        NoiseModel { level, seed, scope }
    }

    pub fn clean() -> Self {
        NoiseModel::new(0.0, 0, NoiseScope::Linearized)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the stream for one trace: a mix of the model seed and a stable
/// per-trace key, so the draw does not depend on evaluation order.
pub fn stream_seed(seed: u64, key: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ key)
}

/// Adds i.i.d. `N(0, (level * rms)^2)` samples to every entry, where `rms` is
/// taken over both sides and all times of `trace`. Level 0 returns the input
/// unchanged.
pub fn add_noise(trace: &BoundaryTrace, model: &NoiseModel, key: u64) -> BoundaryTrace {
    let sigma = model.level * trace.rms();
    if model.level == 0.0 || sigma == 0.0 {
        return trace.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(model.seed, key));
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut out = trace.clone();
    for v in out.left.iter_mut().chain(out.right.iter_mut()) {
        *v += normal.sample(&mut rng);
    }
    out
}
