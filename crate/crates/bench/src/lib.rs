//! Fixture systems shared by the benchmarks under `benches/`.

use sensor_place_core::generators::{diffusion_grid, integrator_chain, seeded_random_system, RandomSystemConfig};
use sensor_place_core::{LtvSystem, ProcessNoise};

/// Integrator chain with identity covariances.
pub fn chain(n: usize, k: usize) -> LtvSystem {
    LtvSystem::with_identity_covariances(integrator_chain(n), k).expect("chain is valid")
}

/// `side x side` diffusion grid without process noise (reduced path).
pub fn grid(side: usize, k: usize) -> LtvSystem {
    LtvSystem::with_identity_covariances(diffusion_grid(side, side, 0.2).expect("valid coupling"), k)
        .and_then(|s| s.with_process_noise(ProcessNoise::Zero))
        .expect("grid is valid")
}

/// Random stable system with process noise (general path).
pub fn random(n: usize, k: usize, seed: u64) -> LtvSystem {
    let mut cfg = RandomSystemConfig::new(n, k);
    cfg.mu = Some(0.9);
    seeded_random_system(seed, &cfg).expect("random system is valid")
}
