//! Sensor placement for Kalman filtering of linear time-variant systems.
//!
//! The objective is the log-determinant of the estimation error covariance
//! of `z = (x_0, w_0, ..., w_{k-1})` given measurements of the selected
//! states over `[0, k]`. It is non-increasing and supermodular in the sensor
//! set, which gives the greedy algorithms in [`placement`] their worst-case
//! guarantees. [`oracle`] enumerates all subsets for verification and
//! [`bounds`] evaluates the mean-square-error limits.
//!
//! ```
//! use sensor_place_core::{generators, greedy_p1, GreedyOptions, LogDetObjective, LtvSystem, SensorSet};
//!
//! let system = LtvSystem::with_identity_covariances(generators::integrator_chain(5), 5).unwrap();
//! let objective = LogDetObjective::new(&system).unwrap();
//! let budget = objective.value(&SensorSet::from_one_based(&[2, 4], 5).unwrap()).unwrap();
//! let result = greedy_p1(&objective, budget, GreedyOptions::default()).unwrap();
//! assert_eq!(result.chosen.one_based(), vec![3, 5]);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod format;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod placement;
pub mod stacked;
pub mod system;

pub use nalgebra;

pub use bounds::{BoundTarget, BoundsReport};
pub use error::{Error, Result};
pub use estimation::{ErrorReport, EstimationPath, LogDetObjective};
pub use oracle::{enumerate_all, OracleTable};
pub use placement::{greedy_p1, greedy_p2, GreedyOptions, Guarantee, PlacementResult, PlacementStatus, TraceStep};
pub use stacked::{InformationAtoms, StackedMaps};
pub use system::{Dynamics, LtvSystem, NoisePriorSummary, ProcessNoise, SensorSet};
