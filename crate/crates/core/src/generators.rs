//! Example system generators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg;
use crate::system::{Dynamics, LtvSystem, ProcessNoise};

/// Integrator chain: `-1` on the diagonal, `1` on the first subdiagonal.
pub fn integrator_chain(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -1.0
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    })
}

/// Diffusion over a `rows x cols` grid with 4-neighbour coupling.
///
/// Node `(r, c)` maps to state `r * cols + c`. Each node keeps weight
/// `1 - coupling * degree` and receives `coupling` from every neighbour, so
/// the matrix is symmetric and row-stochastic.
pub fn diffusion_grid(rows: usize, cols: usize, coupling: f64) -> Result<DMatrix<f64>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("grid dimensions must be positive".into()));
    }
    let max_degree = grid_max_degree(rows, cols);
    let reach = coupling * max_degree as f64;
    if !(coupling > 0.0 && coupling < 1.0) || !(reach < 1.0) {
        return Err(Error::InvalidCoupling { coupling, degree: max_degree });
    }
    let n = rows * cols;
    let mut a = DMatrix::zeros(n, n);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let mut degree = 0;
            for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < cols {
                    a[(i, nr as usize * cols + nc as usize)] = coupling;
                    degree += 1;
                }
            }
            a[(i, i)] = 1.0 - coupling * degree as f64;
        }
    }
    Ok(a)
}

fn grid_max_degree(rows: usize, cols: usize) -> usize {
    let axis = |len: usize| len.saturating_sub(1).min(2);
    axis(rows) + axis(cols)
}

/// Parameters for [`random_system`].
#[derive(Debug, Clone)]
pub struct RandomSystemConfig {
    pub n: usize,
    pub k: usize,
    /// Target spectral norm of the dynamics; `None` leaves it unscaled.
    pub mu: Option<f64>,
    pub time_varying: bool,
    pub zero_process_noise: bool,
    /// Noise standard deviation is drawn from `[sigma_range.0, sigma_range.1]`.
    pub sigma_range: (f64, f64),
}

impl RandomSystemConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k, mu: None, time_varying: false, zero_process_noise: false, sigma_range: (0.5, 1.5) }
    }
}

/// Random SPD matrix `B B^T / n + 0.1 I` with `B` uniform in `[-1, 1]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut m = &b * b.transpose() / n as f64;
    for i in 0..n {
        m[(i, i)] += 0.1;
    }
    linalg::symmetrize(&m)
}

fn random_dynamics<R: Rng + ?Sized>(rng: &mut R, n: usize, mu: Option<f64>) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    match mu {
        Some(target) => {
            let norm = linalg::spectral_norm(&a);
            if norm > 0.0 {
                a * (target / norm)
            } else {
                a
            }
        }
        None => a,
    }
}

/// A random valid system. With `mu = Some(m)` every `A_i` is scaled to spectral norm `m`.
pub fn random_system<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomSystemConfig) -> Result<LtvSystem> {
    let n = cfg.n;
    let dynamics = if cfg.time_varying {
        Dynamics::TimeVarying((0..cfg.k).map(|_| random_dynamics(rng, n, cfg.mu)).collect())
    } else {
        Dynamics::TimeInvariant(random_dynamics(rng, n, cfg.mu))
    };
    let cov_x0 = random_spd(rng, n);
    let cov_w = if cfg.zero_process_noise {
        ProcessNoise::Zero
    } else if cfg.time_varying {
        ProcessNoise::PerStep((0..cfg.k).map(|_| random_spd(rng, n)).collect())
    } else {
        ProcessNoise::Constant(random_spd(rng, n))
    };
    let (lo, hi) = cfg.sigma_range;
    let sigma = if hi > lo { rng.random_range(lo..hi) } else { lo };
    LtvSystem::new(cfg.k, dynamics, cov_x0, cov_w, sigma)
}

/// [`random_system`] driven by a ChaCha8 stream seeded with `seed`; reproducible across platforms.
pub fn seeded_random_system(seed: u64, cfg: &RandomSystemConfig) -> Result<LtvSystem> {
    random_system(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed), cfg)
}
