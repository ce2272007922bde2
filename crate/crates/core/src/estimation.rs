//! Error covariance and log-det error of the optimal linear estimator.
//!
//! The production route is the information form
//! `log det(Sigma) = 2 d log(sigma) - log det(O_{k,S} + sigma^2 C(z)^{-1})`,
//! evaluated by Cholesky. The covariance form (`error_covariance_direct*`)
//! is kept only as a test oracle: it builds the stacked observation matrix
//! explicitly and never touches the information atoms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{self, Chol};
use crate::stacked::{transition_products, InformationAtoms, StackedMaps};
use crate::system::{LtvSystem, SensorSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EstimationPath {
    General,
    ReducedZeroProcessNoise,
}

/// Error statistics of one sensor set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Natural-log determinant of the error covariance.
    pub logdet_error: f64,
    /// Trace of the full error covariance.
    pub mmse_z: f64,
    pub mmse_x0: f64,
    pub mmse_xk: f64,
    pub path: EstimationPath,
}

/// Covariance-form error covariance of `z`, with the stacked observation
/// matrix restricted to `sensors` built row by row.
///
/// Test oracle only; [`logdet_error`] is the production route.
pub fn error_covariance_direct(system: &LtvSystem, sensors: &SensorSet) -> Result<DMatrix<f64>> {
    let prior = system.prior_covariance_z()?;
    let maps = StackedMaps::build(system);
    let rows: Vec<_> =
        maps.blocks().iter().flat_map(|l| sensors.indices().iter().map(move |&m| l.row(m).into_owned())).collect();
    covariance_form(&prior, &rows, system.sigma())
}

/// Covariance-form error covariance of `x_0` when all process noise vanishes.
///
/// Test oracle for [`logdet_error_reduced`].
pub fn error_covariance_direct_zero_noise(system: &LtvSystem, sensors: &SensorSet) -> Result<DMatrix<f64>> {
    let rows: Vec<_> = transition_products(system)
        .iter()
        .flat_map(|phi| sensors.indices().iter().map(move |&m| phi.row(m).into_owned()))
        .collect();
    covariance_form(system.cov_x0(), &rows, system.sigma())
}

fn covariance_form(prior: &DMatrix<f64>, rows: &[nalgebra::RowDVector<f64>], sigma: f64) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Ok(prior.clone());
    }
    let obs = DMatrix::from_rows(rows);
    let mut innovation = &obs * prior * obs.transpose();
    for i in 0..innovation.nrows() {
        innovation[(i, i)] += sigma * sigma;
    }
    let gain_rhs = &obs * prior;
    let solved = linalg::cholesky(&linalg::symmetrize(&innovation), "innovation covariance")?.solve(&gain_rhs);
    Ok(linalg::symmetrize(&(prior - gain_rhs.transpose() * solved)))
}

/// Log-det error on the general path from precomputed atoms.
pub fn logdet_error(system: &LtvSystem, atoms: &InformationAtoms, sensors: &SensorSet) -> Result<f64> {
    let prior_info = scaled_prior_information(system)?;
    let m = atoms.information_matrix(sensors) + prior_info;
    Ok(offset(system.sigma(), m.nrows()) - linalg::logdet_spd(&m, "information matrix")?)
}

/// Log-det error of `x_0` when the process noise is zero:
/// `2 n log(sigma) - log det(O~_{k,S} + sigma^2 C(x_0)^{-1})`.
pub fn logdet_error_reduced(system: &LtvSystem, sensors: &SensorSet) -> Result<f64> {
    if !system.has_zero_process_noise() {
        return Err(Error::InvalidParameter("reduced path requires zero process noise".into()));
    }
    let prior_info = reduced_prior_information(system)?;
    let m = crate::stacked::reduced_observability(system, sensors) + prior_info;
    Ok(offset(system.sigma(), m.nrows()) - linalg::logdet_spd(&m, "reduced information matrix")?)
}

/// `2 d log(sigma)`.
fn offset(sigma: f64, dim: usize) -> f64 {
    2.0 * dim as f64 * sigma.ln()
}

fn scaled_prior_information(system: &LtvSystem) -> Result<DMatrix<f64>> {
    Ok(system.prior_information_z()? * system.sigma().powi(2))
}

fn reduced_prior_information(system: &LtvSystem) -> Result<DMatrix<f64>> {
    Ok(linalg::spd_inverse(system.cov_x0(), "cov_x0")? * system.sigma().powi(2))
}

/// `log vol` of the `epsilon`-confidence ellipsoid in `dim` dimensions:
/// `(d/2) log(epsilon pi) - log Gamma(d/2 + 1) + logdet / 2`.
pub fn log_ellipsoid_volume(dim: usize, logdet_error: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let half = dim as f64 / 2.0;
    Ok(half * (epsilon * std::f64::consts::PI).ln() - ln_gamma(half + 1.0) + 0.5 * logdet_error)
}

/// The log-det objective of one instance, on whichever path its process
/// noise selects.
///
/// Holds the scaled prior information `sigma^2 C^{-1}`, the per-sensor
/// atoms and the map to the final state. Greedy search evaluates marginal
/// values through [`IncrementalState`], extending a Cholesky factor by the
/// `k + 1` rank-one factors of a candidate atom.
#[derive(Debug, Clone)]
pub struct LogDetObjective {
    path: EstimationPath,
    n: usize,
    sigma: f64,
    prior_info: DMatrix<f64>,
    atoms: InformationAtoms,
    final_map: DMatrix<f64>,
}

/// Factored information matrix of a sensor set.
#[derive(Debug, Clone)]
pub struct IncrementalState {
    sensors: SensorSet,
    chol: Chol,
    value: f64,
}

impl IncrementalState {
    pub fn sensors(&self) -> &SensorSet {
        &self.sensors
    }

    /// Log-det error of [`sensors`](Self::sensors).
    pub fn value(&self) -> f64 {
        self.value
    }
}

impl LogDetObjective {
    pub fn new(system: &LtvSystem) -> Result<Self> {
        if system.has_zero_process_noise() {
            Ok(Self {
                path: EstimationPath::ReducedZeroProcessNoise,
                n: system.n(),
                sigma: system.sigma(),
                prior_info: reduced_prior_information(system)?,
                atoms: InformationAtoms::reduced(system),
                final_map: transition_products(system).pop().expect("Phi_0 always present"),
            })
        } else {
            let maps = StackedMaps::build(system);
            Ok(Self::from_parts(system, &maps, InformationAtoms::build(&maps))?)
        }
    }

    /// General-path objective from maps and atoms built by the caller.
    pub fn from_parts(system: &LtvSystem, maps: &StackedMaps, atoms: InformationAtoms) -> Result<Self> {
        Ok(Self {
            path: EstimationPath::General,
            n: system.n(),
            sigma: system.sigma(),
            prior_info: scaled_prior_information(system)?,
            atoms,
            final_map: maps.last().clone(),
        })
    }

    pub fn path(&self) -> EstimationPath {
        self.path
    }

    /// Number of candidate sensors (the state dimension).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the estimated vector.
    pub fn dim(&self) -> usize {
        self.prior_info.nrows()
    }

    pub fn atoms(&self) -> &InformationAtoms {
        &self.atoms
    }

    fn offset(&self) -> f64 {
        offset(self.sigma, self.dim())
    }

    fn information(&self, sensors: &SensorSet) -> DMatrix<f64> {
        self.atoms.information_matrix(sensors) + &self.prior_info
    }

    fn check(&self, sensors: &SensorSet) -> Result<()> {
        match sensors.indices().last() {
            Some(&m) if m >= self.n => Err(Error::InvalidSensorSet(format!("index {} outside 1..={}", m + 1, self.n))),
            _ => Ok(()),
        }
    }

    /// Log-det error by a fresh factorization.
    pub fn value(&self, sensors: &SensorSet) -> Result<f64> {
        self.check(sensors)?;
        Ok(self.offset() - linalg::logdet_spd(&self.information(sensors), "information matrix")?)
    }

    /// Error covariance `sigma^2 (O_{k,S} + sigma^2 C^{-1})^{-1}`.
    pub fn error_covariance(&self, sensors: &SensorSet) -> Result<DMatrix<f64>> {
        self.check(sensors)?;
        let chol = linalg::cholesky(&self.information(sensors), "information matrix")?;
        Ok(linalg::symmetrize(&chol.inverse()) * self.sigma.powi(2))
    }

    pub fn report(&self, sensors: &SensorSet) -> Result<ErrorReport> {
        self.check(sensors)?;
        let chol = linalg::cholesky(&self.information(sensors), "information matrix")?;
        let logdet_error = self.offset() - linalg::logdet(&chol);
        let sigma_cov = linalg::symmetrize(&chol.inverse()) * self.sigma.powi(2);
        let mmse_z = sigma_cov.trace();
        let mmse_x0 = sigma_cov.view((0, 0), (self.n, self.n)).trace();
        let mmse_xk = (&self.final_map * &sigma_cov * self.final_map.transpose()).trace();
        debug_assert!(logdet_error <= mmse_z - self.dim() as f64 + 1e-9);
        Ok(ErrorReport { logdet_error, mmse_z, mmse_x0, mmse_xk, path: self.path })
    }

    /// Factored state for `sensors`.
    pub fn state(&self, sensors: &SensorSet) -> Result<IncrementalState> {
        self.check(sensors)?;
        let chol = linalg::cholesky(&self.information(sensors), "information matrix")?;
        let value = self.offset() - linalg::logdet(&chol);
        Ok(IncrementalState { sensors: sensors.clone(), chol, value })
    }

    /// Log-det error of `state ∪ {a}` through `k + 1` rank-one Cholesky updates.
    pub fn value_with(&self, state: &IncrementalState, a: usize) -> f64 {
        if state.sensors.contains(a) {
            return state.value;
        }
        let mut chol = state.chol.clone();
        for r in self.atoms.rows(a) {
            chol.rank_one_update(r, 1.0);
        }
        self.offset() - linalg::logdet(&chol)
    }

    /// Same quantity as [`value_with`](Self::value_with) by full refactorization.
    pub fn value_with_refactored(&self, state: &IncrementalState, a: usize) -> Result<f64> {
        let mut s = state.sensors.clone();
        s.insert(a);
        self.value(&s)
    }

    /// Adds sensor `a` to `state` in place.
    pub fn push(&self, state: &mut IncrementalState, a: usize) {
        if !state.sensors.insert(a) {
            return;
        }
        for r in self.atoms.rows(a) {
            state.chol.rank_one_update(r, 1.0);
        }
        state.value = self.offset() - linalg::logdet(&state.chol);
    }
}

/// Report for `sensors`, dispatching on the process-noise model.
pub fn mmse_report(system: &LtvSystem, sensors: &SensorSet) -> Result<ErrorReport> {
    LogDetObjective::new(system)?.report(sensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Dynamics, ProcessNoise};

    fn unit_scalar(k: usize, noise: ProcessNoise) -> LtvSystem {
        LtvSystem::new(
            k,
            Dynamics::TimeInvariant(DMatrix::from_element(1, 1, 0.5)),
            DMatrix::identity(1, 1),
            noise,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn direct_scalar() {
        let s = unit_scalar(0, ProcessNoise::Constant(DMatrix::identity(1, 1)));
        let one = SensorSet::full(1);
        assert!((error_covariance_direct(&s, &one).unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(error_covariance_direct(&s, &SensorSet::empty()).unwrap(), s.prior_covariance_z().unwrap());
    }

    #[test]
    fn closed_form_scalar() {
        let s = unit_scalar(0, ProcessNoise::Constant(DMatrix::identity(1, 1)));
        let atoms = InformationAtoms::build(&StackedMaps::build(&s));
        assert!(logdet_error(&s, &atoms, &SensorSet::empty()).unwrap().abs() < 1e-15);
        let v = logdet_error(&s, &atoms, &SensorSet::full(1)).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-14);
        let rep = mmse_report(&s, &SensorSet::full(1)).unwrap();
        assert!((rep.mmse_x0 - 0.5).abs() < 1e-14);
        assert_eq!(rep.path, EstimationPath::General);
    }

    #[test]
    fn reduced_scalar() {
        let s = unit_scalar(0, ProcessNoise::Zero);
        assert!(logdet_error_reduced(&s, &SensorSet::empty()).unwrap().abs() < 1e-15);
        let v = logdet_error_reduced(&s, &SensorSet::full(1)).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-14);
        let rep = mmse_report(&s, &SensorSet::full(1)).unwrap();
        assert_eq!(rep.path, EstimationPath::ReducedZeroProcessNoise);
        assert_eq!(rep.mmse_z, rep.mmse_x0);
    }

    #[test]
    fn direct_requires_process_noise() {
        let s = unit_scalar(1, ProcessNoise::Zero);
        assert_eq!(error_covariance_direct(&s, &SensorSet::empty()), Err(Error::ZeroProcessNoise));
        let g = unit_scalar(1, ProcessNoise::Constant(DMatrix::identity(1, 1)));
        assert!(logdet_error_reduced(&g, &SensorSet::empty()).is_err());
    }

    #[test]
    fn prior_only_report() {
        let s = LtvSystem::with_identity_covariances(DMatrix::identity(2, 2) * 0.5, 2).unwrap();
        let rep = mmse_report(&s, &SensorSet::empty()).unwrap();
        assert!((rep.mmse_z - 6.0).abs() < 1e-12);
        assert!((rep.mmse_x0 - 2.0).abs() < 1e-12);
        assert!(rep.logdet_error.abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_volume() {
        let v = log_ellipsoid_volume(1, 0.0, 1.0 / std::f64::consts::PI).unwrap();
        let expected = -(std::f64::consts::PI.sqrt() / 2.0).ln();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.1208).abs() < 1e-4);
        let w = log_ellipsoid_volume(1, -2.0, 1.0 / std::f64::consts::PI).unwrap();
        assert!((v - w - 1.0).abs() < 1e-12);
        // Two dimensions, epsilon = 1: pi^(2/2) / Gamma(2) = pi.
        let two = log_ellipsoid_volume(2, 0.0, 1.0).unwrap();
        assert!((two - std::f64::consts::PI.ln()).abs() < 1e-12);
        assert!(log_ellipsoid_volume(2, 0.0, 0.0).is_err());
    }

    #[test]
    fn rank_one_updates_match_refactorization() {
        let s = LtvSystem::with_identity_covariances(crate::generators::integrator_chain(4), 3).unwrap();
        let obj = LogDetObjective::new(&s).unwrap();
        let mut st = obj.state(&SensorSet::empty()).unwrap();
        for a in [2, 0, 3] {
            for b in 0..4 {
                let fast = obj.value_with(&st, b);
                let slow = obj.value_with_refactored(&st, b).unwrap();
                assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
            }
            obj.push(&mut st, a);
            assert!((st.value() - obj.value(st.sensors()).unwrap()).abs() < 1e-9);
        }
    }
}
