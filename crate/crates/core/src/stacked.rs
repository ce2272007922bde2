//! Stacked state-transition maps and per-sensor information atoms.
//!
//! With `z = (x_0, w_0, ..., w_{k-1})` every state is linear in `z`:
//! `x_j = L_j z`. Measuring state `m` over `[0, k]` contributes the rows
//! `e_m^T L_j`, `j = 0..=k`, to the stacked observation matrix, so the
//! information matrix of a sensor set is a sum of per-sensor atoms
//! `O_{k,{m}} = sum_j L_j^T e_m e_m^T L_j`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::system::{LtvSystem, SensorSet};

/// The maps `L_0, ..., L_k`, each `n x n(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedMaps {
    n: usize,
    k: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl StackedMaps {
    /// Builds `L_0 = [I, 0]` and, for `i >= 1`, `L_i` whose first `i` column
    /// blocks are `A_{i-1}` times those of `L_{i-1}`, followed by `I` and
    /// zero padding. Cost `O(k^2 n^3)`.
    pub fn build(system: &LtvSystem) -> Self {
        let (n, k) = (system.n(), system.k());
        let dim = system.stacked_dim();
        let mut blocks: Vec<DMatrix<f64>> = Vec::with_capacity(k + 1);
        let mut first = DMatrix::zeros(n, dim);
        first.view_mut((0, 0), (n, n)).fill_with_identity();
        blocks.push(first);
        for i in 1..=k {
            let mut l = DMatrix::zeros(n, dim);
            let prefix = system.a(i - 1) * blocks[i - 1].columns(0, i * n);
            l.columns_mut(0, i * n).copy_from(&prefix);
            l.view_mut((0, i * n), (n, n)).fill_with_identity();
            blocks.push(l);
        }
        Self { n, k, blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.n * (self.k + 1)
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &DMatrix<f64> {
        &self.blocks[j]
    }

    /// `L_k`, mapping `z` to the final state.
    pub fn last(&self) -> &DMatrix<f64> {
        &self.blocks[self.k]
    }
}

/// State-transition products `Phi_0 = I`, `Phi_m = A_{m-1} ... A_0` for `m = 0..=k`.
pub fn transition_products(system: &LtvSystem) -> Vec<DMatrix<f64>> {
    let n = system.n();
    let mut out = Vec::with_capacity(system.k() + 1);
    out.push(DMatrix::identity(n, n));
    for m in 1..=system.k() {
        let next = system.a(m - 1) * &out[m - 1];
        out.push(next);
    }
    out
}

/// Per-sensor information atoms, dense and in rank-one factored form.
///
/// Atom `m` equals `sum_j r_{m,j} r_{m,j}^T` where `r_{m,j}` is row `m`
/// of the `j`-th map. The same structure serves the general path (maps
/// `L_j`, dimension `n(k+1)`) and the zero-process-noise path (maps
/// `Phi_j`, dimension `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct InformationAtoms {
    dim: usize,
    rows: Vec<Vec<DVector<f64>>>,
    atoms: Vec<DMatrix<f64>>,
}

impl InformationAtoms {
    /// Atoms of the general path from the stacked maps.
    pub fn build(maps: &StackedMaps) -> Self {
        Self::from_maps(maps.blocks(), maps.n(), maps.dim())
    }

    /// Atoms of the zero-process-noise path, built from `Phi_0, ..., Phi_k`.
    pub fn reduced(system: &LtvSystem) -> Self {
        Self::from_maps(&transition_products(system), system.n(), system.n())
    }

    fn from_maps(maps: &[DMatrix<f64>], n: usize, dim: usize) -> Self {
        let per_sensor: Vec<(Vec<DVector<f64>>, DMatrix<f64>)> = (0..n)
            .into_par_iter()
            .map(|m| {
                let rows: Vec<DVector<f64>> = maps.iter().map(|l| l.row(m).transpose()).collect();
                let mut atom = DMatrix::zeros(dim, dim);
                for r in &rows {
                    atom.ger(1.0, r, r, 1.0);
                }
                (rows, atom)
            })
            .collect();
        let (rows, atoms) = per_sensor.into_iter().unzip();
        Self { dim, rows, atoms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_sensors(&self) -> usize {
        self.atoms.len()
    }

    /// Dense atom of 0-based sensor `m`.
    pub fn atom(&self, m: usize) -> &DMatrix<f64> {
        &self.atoms[m]
    }

    pub fn atoms(&self) -> &[DMatrix<f64>] {
        &self.atoms
    }

    /// Rank-one factors of atom `m`, one per time step.
    pub fn rows(&self, m: usize) -> &[DVector<f64>] {
        &self.rows[m]
    }

    /// `O_{k,S}`: the sum of the atoms in `sensors`, added in ascending index order.
    pub fn information_matrix(&self, sensors: &SensorSet) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for &m in sensors.indices() {
            out += &self.atoms[m];
        }
        out
    }
}

/// Observability matrix of the zero-process-noise model restricted to `sensors`:
/// `sum_{m=0..=k} Phi_m^T C_S^T C_S Phi_m`.
pub fn reduced_observability(system: &LtvSystem, sensors: &SensorSet) -> DMatrix<f64> {
    let n = system.n();
    let mut out = DMatrix::zeros(n, n);
    for phi in transition_products(system) {
        for &i in sensors.indices() {
            let r = phi.row(i).transpose();
            out.ger(1.0, &r, &r, 1.0);
        }
    }
    out
}
