//! Where a command gets its system from: a JSON file, stdin, or an inline
//! generator spec such as `chain:n=5,k=5` or `grid:rows=3,cols=3,coupling=0.2,k=20,zero`.

use std::collections::BTreeMap;
use std::io::Read;

use sensor_place_core::generators::{diffusion_grid, integrator_chain, seeded_random_system, RandomSystemConfig};
use sensor_place_core::io::system_from_json;
use sensor_place_core::nalgebra::DMatrix;
use sensor_place_core::{Dynamics, LtvSystem, ProcessNoise};

use crate::failure::{CliResult, Failure};

#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Chain { n: usize, k: usize, sigma: f64, cov_x0: f64, cov_w: f64, zero_noise: bool },
    Grid { rows: usize, cols: usize, coupling: f64, k: usize, sigma: f64, zero_noise: bool },
    Random { n: usize, k: usize, seed: u64, mu: Option<f64>, time_varying: bool, zero_noise: bool },
}

impl GenSpec {
    pub fn build(&self) -> CliResult<LtvSystem> {
        match *self {
            GenSpec::Chain { n, k, sigma, cov_x0, cov_w, zero_noise } => {
                if n == 0 {
                    return Err(Failure::usage("chain needs n >= 1"));
                }
                scaled_identity_system(integrator_chain(n), k, sigma, cov_x0, cov_w, zero_noise)
            }
            GenSpec::Grid { rows, cols, coupling, k, sigma, zero_noise } => {
                if rows == 0 || cols == 0 {
                    return Err(Failure::usage("grid needs rows, cols >= 1"));
                }
                scaled_identity_system(diffusion_grid(rows, cols, coupling)?, k, sigma, 1.0, 1.0, zero_noise)
            }
            GenSpec::Random { n, k, seed, mu, time_varying, zero_noise } => {
                if n == 0 {
                    return Err(Failure::usage("random needs n >= 1"));
                }
                let mut cfg = RandomSystemConfig::new(n, k);
                cfg.mu = mu;
                cfg.time_varying = time_varying;
                cfg.zero_process_noise = zero_noise;
                Ok(seeded_random_system(seed, &cfg)?)
            }
        }
    }

    /// Parses `kind:key=value,...,flag`.
    pub fn parse(spec: &str) -> CliResult<Self> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut fields = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').unwrap_or((item, "true"));
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut f = Fields { kind, fields };
        let spec = match kind {
            "chain" => GenSpec::Chain {
                n: f.required("n")?,
                k: f.required("k")?,
                sigma: f.optional("sigma", 1.0)?,
                cov_x0: f.optional("cov_x0", 1.0)?,
                cov_w: f.optional("cov_w", 1.0)?,
                zero_noise: f.flag("zero")?,
            },
            "grid" => GenSpec::Grid {
                rows: f.required("rows")?,
                cols: f.required("cols")?,
                coupling: f.required("coupling")?,
                k: f.required("k")?,
                sigma: f.optional("sigma", 1.0)?,
                zero_noise: f.flag("zero")?,
            },
            "random" => GenSpec::Random {
                n: f.required("n")?,
                k: f.required("k")?,
                seed: f.optional("seed", 0)?,
                mu: f.optional_opt("mu")?,
                time_varying: f.flag("tv")?,
                zero_noise: f.flag("zero")?,
            },
            other => {
                return Err(Failure::usage(format!("unknown generator {other:?}; expected chain, grid or random")))
            }
        };
        f.finish()?;
        Ok(spec)
    }
}

struct Fields<'a> {
    kind: &'a str,
    fields: BTreeMap<String, String>,
}

impl Fields<'_> {
    fn take<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.fields.remove(key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| Failure::usage(format!("{}: bad value {v:?} for {key}", self.kind)))
            }
        }
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<T> {
        self.take(key)?.ok_or_else(|| Failure::usage(format!("{}: missing {key}", self.kind)))
    }

    fn optional<T: std::str::FromStr>(&mut self, key: &str, default: T) -> CliResult<T> {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn optional_opt<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        self.take(key)
    }

    fn flag(&mut self, key: &str) -> CliResult<bool> {
        self.optional(key, false)
    }

    fn finish(self) -> CliResult<()> {
        match self.fields.keys().next() {
            Some(key) => Err(Failure::usage(format!("{}: unknown field {key:?}", self.kind))),
            None => Ok(()),
        }
    }
}

/// Covariances are scalar multiples of the identity.
fn scaled_identity_system(
    a: DMatrix<f64>,
    k: usize,
    sigma: f64,
    cov_x0: f64,
    cov_w: f64,
    zero_noise: bool,
) -> CliResult<LtvSystem> {
    let n = a.nrows();
    let eye = |s: f64| DMatrix::identity(n, n) * s;
    let noise = if zero_noise { ProcessNoise::Zero } else { ProcessNoise::Constant(eye(cov_w)) };
    Ok(LtvSystem::new(k, Dynamics::TimeInvariant(a), eye(cov_x0), noise, sigma)?)
}

/// Loads a system from `--system PATH|-` or `--gen SPEC`.
pub fn load(system: Option<&str>, generator: Option<&str>) -> CliResult<LtvSystem> {
    match (system, generator) {
        (Some(_), Some(_)) => Err(Failure::usage("--system and --gen are mutually exclusive")),
        (None, None) => Err(Failure::usage("one of --system or --gen is required")),
        (None, Some(spec)) => GenSpec::parse(spec)?.build(),
        (Some("-"), None) => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            Ok(system_from_json(&text)?)
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?;
            Ok(system_from_json(&text)?)
        }
    }
}
