//! Linear time-variant system instances and their noise priors.
//!
//! The model is `x_{k+1} = A_k x_k + w_k`, `y_k = C x_k + v_k` with
//! uncorrelated `x_0`, `w_k` and `v_k ~ (0, sigma^2 I)`. A validated
//! [`LtvSystem`] is immutable and can be shared freely across threads.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, SYMMETRY_TOL};

/// State transition matrices over the observation interval.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    /// One matrix used at every step; never materialized per step.
    TimeInvariant(DMatrix<f64>),
    /// `A_0, ..., A_{k-1}`.
    TimeVarying(Vec<DMatrix<f64>>),
}

impl Dynamics {
    /// Transition matrix `A_m`.
    pub fn at(&self, m: usize) -> &DMatrix<f64> {
        match self {
            Dynamics::TimeInvariant(a) => a,
            Dynamics::TimeVarying(seq) => &seq[m],
        }
    }
}

/// Process-noise covariances `C(w_0), ..., C(w_{k-1})`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessNoise {
    /// All `w_k` vanish. Selects the reduced, `n`-dimensional formulation.
    Zero,
    Constant(DMatrix<f64>),
    PerStep(Vec<DMatrix<f64>>),
}

impl ProcessNoise {
    pub fn at(&self, m: usize) -> Option<&DMatrix<f64>> {
        match self {
            ProcessNoise::Zero => None,
            ProcessNoise::Constant(c) => Some(c),
            ProcessNoise::PerStep(seq) => seq.get(m),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ProcessNoise::Zero)
    }
}

/// A validated placement instance: dynamics, noise priors and horizon `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtvSystem {
    n: usize,
    k: usize,
    dynamics: Dynamics,
    cov_x0: DMatrix<f64>,
    cov_w: ProcessNoise,
    sigma: f64,
}

impl LtvSystem {
    /// Validates and builds a system.
    ///
    /// The state dimension is taken from `cov_x0`. Covariances whose
    /// asymmetry is at most `1e-10` are symmetrized by averaging with their
    /// transpose; larger asymmetry or a failed Cholesky factorization is
    /// reported as [`Error::NotPositiveDefinite`].
    pub fn new(k: usize, dynamics: Dynamics, cov_x0: DMatrix<f64>, cov_w: ProcessNoise, sigma: f64) -> Result<Self> {
        let n = cov_x0.nrows();
        if n == 0 {
            return Err(Error::DimensionMismatch("state dimension must be positive".into()));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositiveSigma(sigma));
        }
        let check_square = |m: &DMatrix<f64>, name: &str| -> Result<()> {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("{name} has non-finite entries")));
            }
            Ok(())
        };

        let dynamics = match dynamics {
            Dynamics::TimeInvariant(a) => {
                check_square(&a, "A")?;
                Dynamics::TimeInvariant(a)
            }
            Dynamics::TimeVarying(seq) => {
                if seq.len() != k {
                    return Err(Error::DimensionMismatch(format!(
                        "dynamics sequence has {} matrices, expected k = {k}",
                        seq.len()
                    )));
                }
                for (m, a) in seq.iter().enumerate() {
                    check_square(a, &format!("A_{m}"))?;
                }
                Dynamics::TimeVarying(seq)
            }
        };

        check_square(&cov_x0, "cov_x0")?;
        let cov_x0 = validated_covariance(cov_x0, "cov_x0")?;

        let cov_w = match cov_w {
            ProcessNoise::Zero => ProcessNoise::Zero,
            ProcessNoise::Constant(c) => {
                check_square(&c, "cov_w")?;
                ProcessNoise::Constant(validated_covariance(c, "cov_w")?)
            }
            ProcessNoise::PerStep(seq) => {
                if seq.len() != k {
                    return Err(Error::DimensionMismatch(format!(
                        "cov_w sequence has {} matrices, expected k = {k}",
                        seq.len()
                    )));
                }
                let mut out = Vec::with_capacity(k);
                for (m, c) in seq.into_iter().enumerate() {
                    let name = format!("cov_w[{m}]");
                    check_square(&c, &name)?;
                    out.push(validated_covariance(c, &name)?);
                }
                ProcessNoise::PerStep(out)
            }
        };

        Ok(Self { n, k, dynamics, cov_x0, cov_w, sigma })
    }

    /// Time-invariant system with `C(x_0) = C(w) = I` and `sigma = 1`.
    pub fn with_identity_covariances(a: DMatrix<f64>, k: usize) -> Result<Self> {
        let n = a.nrows();
        Self::new(
            k,
            Dynamics::TimeInvariant(a),
            DMatrix::identity(n, n),
            ProcessNoise::Constant(DMatrix::identity(n, n)),
            1.0,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension `n (k + 1)` of the stacked vector `z = (x_0, w_0, ..., w_{k-1})`.
    pub fn stacked_dim(&self) -> usize {
        self.n * (self.k + 1)
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn a(&self, m: usize) -> &DMatrix<f64> {
        self.dynamics.at(m)
    }

    pub fn cov_x0(&self) -> &DMatrix<f64> {
        &self.cov_x0
    }

    pub fn cov_w(&self) -> &ProcessNoise {
        &self.cov_w
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn has_zero_process_noise(&self) -> bool {
        self.cov_w.is_zero()
    }

    /// Returns a copy with `sigma` replaced.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.k, self.dynamics.clone(), self.cov_x0.clone(), self.cov_w.clone(), sigma)
    }

    /// Returns a copy with the process noise replaced.
    pub fn with_process_noise(&self, cov_w: ProcessNoise) -> Result<Self> {
        Self::new(self.k, self.dynamics.clone(), self.cov_x0.clone(), cov_w, self.sigma)
    }

    /// Prior covariance of `z = (x_0, w_0, ..., w_{k-1})`, block diagonal.
    pub fn prior_covariance_z(&self) -> Result<DMatrix<f64>> {
        if self.has_zero_process_noise() {
            return Err(Error::ZeroProcessNoise);
        }
        let mut blocks = Vec::with_capacity(self.k + 1);
        blocks.push(&self.cov_x0);
        for m in 0..self.k {
            blocks.push(self.cov_w.at(m).expect("validated process noise"));
        }
        Ok(linalg::block_diag(&blocks))
    }

    /// Inverse of [`prior_covariance_z`](Self::prior_covariance_z), assembled
    /// from the `k + 1` per-block inverses.
    pub fn prior_information_z(&self) -> Result<DMatrix<f64>> {
        if self.has_zero_process_noise() {
            return Err(Error::ZeroProcessNoise);
        }
        let x0_inv = linalg::spd_inverse(&self.cov_x0, "cov_x0")?;
        let mut inverses = vec![x0_inv];
        match &self.cov_w {
            ProcessNoise::Constant(c) => {
                let inv = linalg::spd_inverse(c, "cov_w")?;
                inverses.extend(std::iter::repeat_n(inv, self.k));
            }
            ProcessNoise::PerStep(seq) => {
                for (m, c) in seq.iter().enumerate() {
                    inverses.push(linalg::spd_inverse(c, &format!("cov_w[{m}]"))?);
                }
            }
            ProcessNoise::Zero => unreachable!(),
        }
        let refs: Vec<&DMatrix<f64>> = inverses.iter().collect();
        Ok(linalg::block_diag(&refs))
    }

    /// Scalars entering the estimation-error bounds.
    pub fn noise_prior_summary(&self) -> Result<NoisePriorSummary> {
        let max_diag = |m: &DMatrix<f64>| m.diagonal().max();
        let sigma0_sq = max_diag(&self.cov_x0);
        let sigma0_inv_sq = max_diag(&linalg::spd_inverse(&self.cov_x0, "cov_x0")?);
        let sigmaw_sq = match &self.cov_w {
            ProcessNoise::Zero => 0.0,
            ProcessNoise::Constant(c) => max_diag(c),
            ProcessNoise::PerStep(seq) => seq.iter().map(max_diag).fold(0.0, f64::max),
        };
        let mu = match &self.dynamics {
            Dynamics::TimeInvariant(a) => linalg::spectral_norm(a),
            Dynamics::TimeVarying(seq) => seq.iter().map(linalg::spectral_norm).fold(0.0, f64::max),
        };
        Ok(NoisePriorSummary { sigma0_sq, sigma0_inv_sq, sigmaw_sq, mu })
    }
}

fn validated_covariance(m: DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    if linalg::max_asymmetry(&m) > SYMMETRY_TOL {
        return Err(Error::NotPositiveDefinite(format!("{name} (asymmetric)")));
    }
    let m = linalg::symmetrize(&m);
    if nalgebra::Cholesky::new(m.clone()).is_none() {
        return Err(Error::NotPositiveDefinite(name.to_string()));
    }
    Ok(m)
}

/// Maximum diagonal elements of the priors and the spectral-norm bound of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePriorSummary {
    /// Max diagonal of `C(x_0)`.
    pub sigma0_sq: f64,
    /// Max diagonal of `C(x_0)^{-1}`.
    pub sigma0_inv_sq: f64,
    /// Max diagonal over all `C(w_m)`; zero without process noise.
    pub sigmaw_sq: f64,
    /// `max_m ||A_m||_2`.
    pub mu: f64,
}

/// A set of measured states.
///
/// Stored as strictly increasing 0-based indices. The 1-based indices used
/// in files, on the command line and in printed output are converted only
/// by [`SensorSet::from_one_based`] and [`SensorSet::one_based`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SensorSet {
    indices: Vec<usize>,
}

impl SensorSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full(n: usize) -> Self {
        Self { indices: (0..n).collect() }
    }

    /// Builds a set from 1-based indices in `1..=n`; order is irrelevant,
    /// duplicates are rejected.
    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::InvalidSensorSet(format!("index {i} outside 1..={n}")));
            }
            zero.push(i - 1);
        }
        Self::from_zero_based(&zero, n)
    }

    pub fn from_zero_based(indices: &[usize], n: usize) -> Result<Self> {
        let mut v = indices.to_vec();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSensorSet(format!("duplicate index {}", w[0] + 1)));
        }
        if let Some(&last) = v.last() {
            if last >= n {
                return Err(Error::InvalidSensorSet(format!("index {} outside 1..={n}", last + 1)));
            }
        }
        Ok(Self { indices: v })
    }

    /// Set whose bit `i` of `mask` marks 0-based sensor `i`.
    pub fn from_mask(mask: u64) -> Self {
        Self { indices: (0..64).filter(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0, |m, &i| m | 1 << i)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Adds 0-based index `i`; returns false if already present.
    pub fn insert(&mut self, i: usize) -> bool {
        match self.indices.binary_search(&i) {
            Ok(_) => false,
            Err(at) => {
                self.indices.insert(at, i);
                true
            }
        }
    }

    pub fn is_subset(&self, other: &SensorSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// 0-based indices in ascending order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }
}

impl std::fmt::Display for SensorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
