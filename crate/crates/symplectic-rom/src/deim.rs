//! Discrete empirical interpolation for nonlinear-term compression.
//!
//! The greedy algorithm picks m interpolation rows β from a basis Ψ so that
//! f ≈ Ψ(PᵀΨ)⁻¹Pᵀf; classical DEIM uses a collateral POD basis of f_N
//! snapshots inside a POD-Galerkin model, while SDEIM takes Ψ equal to the
//! symplectic basis A built from the extended ensemble
//! M₃ = [x(tᵢ) …, f_N(x(tᵢ)) …], so that AᵀΨ = I and W = (PᵀA)⁻¹.
//! Online cost then depends on k and the sample footprint only, not on n.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integrators::Stepper;
use crate::linalg;
use crate::models::WaveSystem;
use crate::psd::{cotangent_lift_from_columns, SingularSpectrum, SpectrumSource};
use crate::reduction::{
    assemble_reduced, project_linear_for, ReducedKind, ReducedModel, ReducedNonlinear,
};
use crate::snapshots::SnapshotEnsemble;
use crate::symplectic::{OrthonormalBasis, SymplecticBasis};

/// Condition numbers of PᵀΨ above this are reported as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e8;

/// Greedy interpolation indices (0-based internally; persisted 1-based).
#[derive(Debug, Clone)]
pub struct InterpolationIndices {
    pub indices: Vec<usize>,
}

impl InterpolationIndices {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Greedy index selection: β₁ = argmax|ψ₁|; step i solves U(β,:)τ = ψᵢ(β),
/// takes the residual r = ψᵢ − Uτ and picks β_i = argmax|r|. Ties break to
/// the smallest index; a zero residual maximum means dependent columns and
/// is a typed error. A nonzero ρ at every step guarantees PᵀΨ nonsingular.
pub fn greedy_indices(psi: &DMatrix<f64>) -> Result<InterpolationIndices> {
    let (n, m) = (psi.nrows(), psi.ncols());
    if m == 0 || m > n {
        return Err(Error::dims(
            "greedy_indices",
            "1 <= cols <= rows",
            format!("{n}x{m}"),
        ));
    }
    let argmax = |v: &DVector<f64>| -> (usize, f64) {
        let mut best = 0;
        let mut mag = v[0].abs();
        for i in 1..v.len() {
            let a = v[i].abs();
            if a > mag {
                mag = a;
                best = i;
            }
        }
        (best, mag)
    };

    let first = psi.column(0).into_owned();
    let (b0, rho) = argmax(&first);
    if rho == 0.0 {
        return Err(Error::DeimSelection { step: 1 });
    }
    let mut beta = vec![b0];

    for i in 1..m {
        let col = psi.column(i).into_owned();
        // Solve U(β,:) τ = ψᵢ(β) on the selected rows.
        let mut sub = DMatrix::zeros(i, i);
        let mut rhs = DVector::zeros(i);
        for (r, &row) in beta.iter().enumerate() {
            for c in 0..i {
                sub[(r, c)] = psi[(row, c)];
            }
            rhs[r] = col[row];
        }
        let tau = sub
            .lu()
            .solve(&rhs)
            .ok_or(Error::DeimSelection { step: i + 1 })?;
        let mut resid = col;
        for c in 0..i {
            let t = tau[c];
            for row in 0..n {
                resid[row] -= t * psi[(row, c)];
            }
        }
        let (bi, rho) = argmax(&resid);
        if rho == 0.0 {
            return Err(Error::DeimSelection { step: i + 1 });
        }
        beta.push(bi);
    }
    Ok(InterpolationIndices { indices: beta })
}

/// Rows β of a basis matrix: PᵀΨ (m×cols).
pub fn select_rows(m: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(indices.len(), m.ncols());
    for (r, &i) in indices.iter().enumerate() {
        for c in 0..m.ncols() {
            out[(r, c)] = m[(i, c)];
        }
    }
    out
}

/// DEIM approximation operator Ψ(PᵀΨ)⁻¹Pᵀ applied to full vectors; used by
/// the exactness checks and the verification suite.
pub fn deim_reconstruct(
    psi: &DMatrix<f64>,
    indices: &[usize],
    f: &DVector<f64>,
) -> Result<DVector<f64>> {
    let p_psi = select_rows(psi, indices);
    let sampled = DVector::from_fn(indices.len(), |r, _| f[indices[r]]);
    let tau = p_psi.lu().solve(&sampled).ok_or(Error::DeimSingular {
        cond: f64::INFINITY,
    })?;
    Ok(psi * tau)
}

/// Collateral POD basis for the nonlinear term, from the ensemble's f_N
/// columns.
pub fn deim_nonlinear_basis(
    ensemble: &SnapshotEnsemble,
    m: usize,
) -> Result<(OrthonormalBasis, SingularSpectrum)> {
    let cols = ensemble
        .nonlinear
        .as_ref()
        .ok_or_else(|| Error::Domain("ensemble carries no nonlinear snapshots".into()))?;
    let svd = linalg::thin_svd(cols)?;
    let values = svd.singular_values.clone();
    let (basis, _) = crate::psd::pod_basis(cols, m)?;
    Ok((
        basis,
        SingularSpectrum {
            values,
            source: SpectrumSource::Deim,
        },
    ))
}

/// Construction diagnostics for (S)DEIM operators.
#[derive(Debug, Clone)]
pub struct DeimReport {
    /// Condition estimate of PᵀΨ.
    pub condition: f64,
    pub ill_conditioned: bool,
    pub indices: InterpolationIndices,
}

/// Classical DEIM reduced model on a POD basis Φ with collateral basis Ψ:
/// ż = L̃z + W g(z), W = ΦᵀJ₂ₙΨ(PᵀΨ)⁻¹, g(z) = Pᵀf_N(Φz). The J₂ₙ factor
/// carries the Hamiltonian split ẋ = Kx + J₂ₙf_N(x) through the Galerkin
/// projection, so exact reconstruction (f_N ∈ Range Ψ) reproduces the
/// POD-Galerkin model.
pub fn build_deim_model(
    system: &Arc<WaveSystem>,
    phi: &OrthonormalBasis,
    psi: &OrthonormalBasis,
    indices: &InterpolationIndices,
    gamma: f64,
) -> Result<(ReducedModel, DeimReport)> {
    let two_n = system.dim();
    if phi.matrix().nrows() != two_n || psi.matrix().nrows() != two_n {
        return Err(Error::dims("build_deim_model", two_n, phi.matrix().nrows()));
    }
    let p_psi = select_rows(psi.matrix(), &indices.indices);
    let condition = linalg::condition_estimate(&p_psi)?;
    if !condition.is_finite() {
        return Err(Error::DeimSingular { cond: condition });
    }
    // W = (ΦᵀJΨ)(PᵀΨ)⁻¹, solved as (PᵀΨ)ᵀ Wᵀ = (ΦᵀJΨ)ᵀ.
    let phi_j_psi = phi.matrix().transpose() * crate::symplectic::j_mul_mat(psi.matrix());
    let w_t = p_psi
        .transpose()
        .lu()
        .solve(&phi_j_psi.transpose())
        .ok_or(Error::DeimSingular { cond: condition })?;
    let w = w_t.transpose();

    let lift = phi.matrix().clone();
    let restrict = phi.matrix().transpose();
    let reduced_linear = project_linear_for(system, gamma, &lift, &restrict);
    let sampled_rows = select_rows(&lift, &indices.indices);
    let model = assemble_reduced(
        ReducedKind::Deim,
        reduced_linear,
        lift,
        restrict,
        ReducedNonlinear::Deim {
            w,
            indices: indices.indices.clone(),
            sampled_rows,
        },
        Arc::clone(system),
        gamma,
    )?;
    Ok((
        model,
        DeimReport {
            condition,
            ill_conditioned: condition > CONDITION_WARNING,
            indices: indices.clone(),
        },
    ))
}

/// The extended column stack [q-cols, p-cols, f_N-q-cols] (n×3N) the SDEIM
/// basis decomposes. The ensemble must already carry its weights and its
/// nonlinear snapshots.
pub fn extended_snapshot_matrix(ensemble: &SnapshotEnsemble) -> Result<DMatrix<f64>> {
    let nl = ensemble
        .nonlinear
        .as_ref()
        .ok_or_else(|| Error::Domain("SDEIM needs nonlinear snapshots in the ensemble".into()))?;
    let n = ensemble.half_dim();
    let cols = ensemble.len();
    let mut m = DMatrix::zeros(n, 3 * cols);
    m.view_mut((0, 0), (n, cols)).copy_from(&ensemble.q_rows());
    m.view_mut((0, cols), (n, cols))
        .copy_from(&ensemble.p_rows());
    m.view_mut((0, 2 * cols), (n, cols))
        .copy_from(&nl.view((0, 0), (n, cols)));
    Ok(m)
}

/// SDEIM basis: cotangent lift of the extended ensemble whose columns stack
/// q, γp, and the q-block of the (rescaled) nonlinear snapshots, so the
/// block-diagonal A fits both the state and f_N.
pub fn sdeim_basis(
    ensemble: &SnapshotEnsemble,
    k: usize,
    gamma: f64,
) -> Result<(SymplecticBasis, SingularSpectrum)> {
    let w = ensemble.assemble_weighted(gamma)?;
    let m = extended_snapshot_matrix(&w)?;
    cotangent_lift_from_columns(&m, k, SpectrumSource::Sdeim)
}

/// SDEIM reduced model: ż = K̃z + J₂ₖW g(z) with Ψ = A, W = (PᵀA)⁻¹ and
/// g(z) = Pᵀf_N(Az); m = 2k interpolation rows (the full basis width).
/// Verifies AᵀΨ = I₂ₖ, which the W = (PᵀA)⁻¹ simplification needs.
pub fn build_sdeim_model(
    system: &Arc<WaveSystem>,
    basis: &SymplecticBasis,
    gamma: f64,
) -> Result<(ReducedModel, DeimReport)> {
    let two_n = system.dim();
    if basis.matrix().nrows() != two_n {
        return Err(Error::dims(
            "build_sdeim_model",
            two_n,
            basis.matrix().nrows(),
        ));
    }
    let a = basis.matrix();
    let ortho = linalg::orthonormality_residual(a);
    if ortho > 1e-10 {
        return Err(Error::NotOrthonormal {
            residual: ortho,
            tolerance: 1e-10,
        });
    }
    let indices = greedy_indices(a)?;
    let p_a = select_rows(a, &indices.indices);
    let condition = linalg::condition_estimate(&p_a)?;
    if !condition.is_finite() {
        return Err(Error::DeimSingular { cond: condition });
    }
    let w = p_a
        .lu()
        .try_inverse()
        .ok_or(Error::DeimSingular { cond: condition })?;

    let lift = a.clone();
    let restrict = basis.sympl_inverse().clone();
    let reduced_linear = project_linear_for(system, gamma, &lift, &restrict);
    let sampled_rows = select_rows(&lift, &indices.indices);
    let model = assemble_reduced(
        ReducedKind::Sdeim,
        reduced_linear,
        lift,
        restrict,
        ReducedNonlinear::Sdeim {
            w,
            indices: indices.indices.clone(),
            sampled_rows,
        },
        Arc::clone(system),
        gamma,
    )?;
    Ok((
        model,
        DeimReport {
            condition,
            ill_conditioned: condition > CONDITION_WARNING,
            indices,
        },
    ))
}

/// One row of the online-cost table.
#[derive(Debug, Clone)]
pub struct SpeedupRow {
    pub label: String,
    pub k: usize,
    pub per_step_seconds: f64,
    pub total_seconds: f64,
    pub steps: usize,
}

/// Median per-step wall time over `repeats` runs of `steps` steps each,
/// starting from `z0` every run. Offline work (factorizations inside the
/// stepper constructor) must be done before calling.
pub fn measure_per_step(
    stepper: &mut dyn Stepper,
    z0: &DVector<f64>,
    steps: usize,
    repeats: usize,
) -> Result<(f64, f64)> {
    let mut totals = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let mut z = z0.clone();
        let start = Instant::now();
        for _ in 0..steps {
            stepper.advance(&mut z)?;
        }
        totals.push(start.elapsed().as_secs_f64());
    }
    totals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = totals[totals.len() / 2];
    Ok((median / steps as f64, median))
}
