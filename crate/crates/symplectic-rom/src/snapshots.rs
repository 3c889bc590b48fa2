//! Snapshot ensembles and the γ-weighted rescaling of the momentum block.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::models::WaveSystem;

/// Time-stamped state columns M_x = [x(t₁), …, x(t_N)], optionally with the
/// matching nonlinear-term columns [f_N(x(t₁)), …].
///
/// `gamma` records the cumulative weight applied to the momentum rows; the
/// physical ensemble has `gamma = 1`. A weighted ensemble represents the
/// rescaled state x_γ = [q; γp], whose dynamics are Hamiltonian for
/// H_γ(q, p_γ) = γ·H(q, p_γ/γ); reduced models built on it integrate that
/// rescaled system.
#[derive(Debug, Clone)]
pub struct SnapshotEnsemble {
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
    pub nonlinear: Option<DMatrix<f64>>,
    pub gamma: f64,
}

impl SnapshotEnsemble {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        if traj.is_empty() {
            return Err(Error::Domain(
                "snapshot ensemble needs at least one state".into(),
            ));
        }
        Ok(Self {
            times: traj.times.clone(),
            states: traj.as_matrix(),
            nonlinear: None,
            gamma: 1.0,
        })
    }

    /// Collects states and f_N(x(tᵢ)) columns from a full-model trajectory.
    pub fn from_trajectory_with_nonlinear(traj: &Trajectory, system: &WaveSystem) -> Result<Self> {
        let mut ens = Self::from_trajectory(traj)?;
        let dim = traj.dim();
        let mut cols = DMatrix::zeros(dim, traj.len());
        let mut buf = vec![0.0; dim];
        for (j, s) in traj.states.iter().enumerate() {
            system.f_n(s.as_slice(), &mut buf);
            for i in 0..dim {
                cols[(i, j)] = buf[i];
            }
        }
        ens.nonlinear = Some(cols);
        Ok(ens)
    }

    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }

    pub fn half_dim(&self) -> usize {
        self.states.nrows() / 2
    }

    /// q-block (first n rows).
    pub fn q_rows(&self) -> nalgebra::DMatrixView<'_, f64> {
        let n = self.half_dim();
        self.states.view((0, 0), (n, self.len()))
    }

    /// p-block (last n rows, weighted by the current `gamma`).
    pub fn p_rows(&self) -> nalgebra::DMatrixView<'_, f64> {
        let n = self.half_dim();
        self.states.view((n, 0), (n, self.len()))
    }

    /// Multiplies the momentum rows by `gamma` (composing with any weight
    /// already applied). The nonlinear columns, when present, are rescaled to
    /// the forcing of the rescaled system, which is γ·f_N in the q-block.
    pub fn assemble_weighted(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Domain(format!(
                "weighting coefficient must be positive, got {gamma}"
            )));
        }
        let mut out = self.clone();
        if gamma == 1.0 {
            return Ok(out);
        }
        let n = self.half_dim();
        let cols = self.len();
        for j in 0..cols {
            for i in 0..n {
                out.states[(n + i, j)] *= gamma;
            }
        }
        if let Some(nl) = out.nonlinear.as_mut() {
            for j in 0..cols {
                for i in 0..n {
                    nl[(i, j)] *= gamma;
                }
            }
        }
        out.gamma = self.gamma * gamma;
        Ok(out)
    }
}
