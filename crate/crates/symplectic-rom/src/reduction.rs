//! Reduced dynamical systems.
//!
//! Symplectic Galerkin projection of ẋ = Kx + J₂ₙf_N(x) with a symplectic
//! basis A gives ż = K̃z + J₂ₖAᵀf_N(Az), K̃ = A⁺KA — again Hamiltonian, so
//! energy and stability carry over. The POD-Galerkin baseline
//! ż = ΦᵀKΦz + ΦᵀJ₂ₙf_N(Φz) has no such guarantee and is the comparison
//! target in the experiments.
//!
//! Bases may be built on a γ-weighted ensemble; the model then integrates
//! the rescaled system ẋ_γ = K_γx_γ + Jf_γ(x_γ) (x_γ = [q; γp]) and
//! [`ReducedModel::lift_state`] undoes the rescaling, so callers always see
//! physical states.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integrators::{
    DenseMidpoint, IntegratorSpec, NewtonParams, Scheme, Stepper, Trajectory,
};
use crate::models::WaveSystem;
use crate::symplectic::{OrthonormalBasis, SymplecticBasis};

/// Norm growth factor that declares a reduced trajectory divergent.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedKind {
    PsdLinear,
    PsdNonlinearFull,
    PodLinear,
    PodNonlinearFull,
    Deim,
    Sdeim,
}

impl ReducedKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ReducedKind::PsdLinear => "psd_linear",
            ReducedKind::PsdNonlinearFull => "psd_nonlinear_full",
            ReducedKind::PodLinear => "pod_linear",
            ReducedKind::PodNonlinearFull => "pod_nonlinear_full",
            ReducedKind::Deim => "deim",
            ReducedKind::Sdeim => "sdeim",
        }
    }

    pub fn is_symplectic(&self) -> bool {
        matches!(
            self,
            ReducedKind::PsdLinear | ReducedKind::PsdNonlinearFull | ReducedKind::Sdeim
        )
    }
}

/// How the reduced nonlinear term is evaluated.
#[derive(Debug, Clone)]
pub enum ReducedNonlinear {
    /// f_N ≡ 0 in the reduced dynamics.
    None,
    /// Exact projection: evaluates f_N on the full lifted state, O(n) per call.
    Full,
    /// DEIM: ż gains W·g(z) with W = ΦᵀJ₂ₙΨ(PᵀΨ)⁻¹ and g(z) = Pᵀf_N(Φz).
    Deim {
        w: DMatrix<f64>,
        indices: Vec<usize>,
        sampled_rows: DMatrix<f64>,
    },
    /// SDEIM: ż gains J₂ₖW g(z) with Ψ = A, W = (PᵀA)⁻¹.
    Sdeim {
        w: DMatrix<f64>,
        indices: Vec<usize>,
        sampled_rows: DMatrix<f64>,
    },
}

/// A reduced model: projected linear operator, lift/restrict maps, and a
/// nonlinear evaluator. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub kind: ReducedKind,
    reduced_linear: DMatrix<f64>,
    lift: DMatrix<f64>,
    restrict: DMatrix<f64>,
    nonlinear: ReducedNonlinear,
    system: Arc<WaveSystem>,
    gamma: f64,
    /// Gate for the structural invariants; matches the basis validation
    /// tolerance (1e−10 for SVD-built bases, 1e−8 for NLP-refined ones).
    invariant_tol: f64,
}

/// Applies J_w to a reduced vector in place (w = 2k).
fn j_reduced_inplace(v: &mut DVector<f64>, scratch: &mut DVector<f64>) {
    let w = v.len();
    let k = w / 2;
    scratch.copy_from(v);
    for i in 0..k {
        v[i] = scratch[k + i];
        v[k + i] = -scratch[i];
    }
}

/// J_w M by row-block swap.
fn j_reduced_mat(m: &DMatrix<f64>) -> DMatrix<f64> {
    crate::symplectic::j_mul_mat(m)
}

impl ReducedModel {
    /// Width of the reduced state (2k for symplectic kinds, k for POD).
    pub fn reduced_dim(&self) -> usize {
        self.reduced_linear.nrows()
    }

    pub fn full_dim(&self) -> usize {
        self.lift.nrows()
    }

    pub fn reduced_linear(&self) -> &DMatrix<f64> {
        &self.reduced_linear
    }

    pub fn lift_matrix(&self) -> &DMatrix<f64> {
        &self.lift
    }

    pub fn restrict_matrix(&self) -> &DMatrix<f64> {
        &self.restrict
    }

    pub fn system(&self) -> &Arc<WaveSystem> {
        &self.system
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nonlinear(&self) -> &ReducedNonlinear {
        &self.nonlinear
    }

    /// Number of lifted-state entries the sampled nonlinearity touches (m′).
    pub fn sample_footprint(&self) -> usize {
        let n = self.system.half_dim();
        match &self.nonlinear {
            ReducedNonlinear::Deim { indices, .. } | ReducedNonlinear::Sdeim { indices, .. } => {
                indices.iter().filter(|&&i| i < n).count()
            }
            _ => 0,
        }
    }

    /// x̂ = unscale(A z): lifts to the physical full state.
    pub fn lift_state(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        if z.len() != self.reduced_dim() {
            return Err(Error::dims("lift_state", self.reduced_dim(), z.len()));
        }
        let mut x = &self.lift * z;
        if self.gamma != 1.0 {
            let n = self.system.half_dim();
            for i in 0..n {
                x[n + i] /= self.gamma;
            }
        }
        Ok(x)
    }

    /// z = A⁺ scale(x): restricts a physical full state.
    pub fn restrict_state(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.full_dim() {
            return Err(Error::dims("restrict_state", self.full_dim(), x.len()));
        }
        if self.gamma == 1.0 {
            return Ok(&self.restrict * x);
        }
        let n = self.system.half_dim();
        let mut xs = x.clone();
        for i in 0..n {
            xs[n + i] *= self.gamma;
        }
        Ok(&self.restrict * xs)
    }

    /// Reduced energy H̃(z) = H_d(lift z), reported in physical units.
    pub fn energy(&self, z: &DVector<f64>) -> Result<f64> {
        Ok(self.system.energy(self.lift_state(z)?.as_slice()))
    }

    /// Energy discrepancy ΔH = H(x₀) − H(AA⁺x₀) fixed by the initial
    /// condition (constant along the reduced flow for symplectic kinds).
    pub fn energy_discrepancy(&self, x0: &DVector<f64>) -> Result<f64> {
        let z0 = self.restrict_state(x0)?;
        Ok(self.system.energy(x0.as_slice()) - self.energy(&z0)?)
    }

    /// ż = K̃z + (reduced nonlinear term).
    pub fn rhs(&self, z: &DVector<f64>, out: &mut DVector<f64>, ws: &mut ReducedWorkspace) {
        out.gemv(1.0, &self.reduced_linear, z, 0.0);
        match &self.nonlinear {
            ReducedNonlinear::None => {}
            ReducedNonlinear::Full => {
                let n = self.system.half_dim();
                // Lifted q-block is physical q regardless of γ.
                ws.lifted.gemv(1.0, &ws.lift_q, z, 0.0);
                for i in 0..n {
                    ws.fvec[i] = self.gamma * self.system.f_n_entry(i, ws.lifted[i]);
                }
                match self.kind {
                    ReducedKind::PsdNonlinearFull => {
                        // J₂ₖ Aᵀ f_γ: only the q-rows of A meet the nonzero block.
                        ws.term.gemv(1.0, &ws.lift_q.transpose(), &ws.fvec, 0.0);
                        j_reduced_inplace(&mut ws.term, &mut ws.scratch_w);
                        *out += &ws.term;
                    }
                    _ => {
                        // Φᵀ J f_γ = −Φ_pᵀ f_γ,q.
                        ws.term.gemv(-1.0, &ws.lift_p.transpose(), &ws.fvec, 0.0);
                        *out += &ws.term;
                    }
                }
            }
            ReducedNonlinear::Deim {
                w: wmat,
                indices,
                sampled_rows,
            } => {
                self.sampled_g(z, indices, sampled_rows, ws);
                ws.term.gemv(1.0, wmat, &ws.gvec, 0.0);
                *out += &ws.term;
            }
            ReducedNonlinear::Sdeim {
                w: wmat,
                indices,
                sampled_rows,
            } => {
                self.sampled_g(z, indices, sampled_rows, ws);
                ws.term.gemv(1.0, wmat, &ws.gvec, 0.0);
                j_reduced_inplace(&mut ws.term, &mut ws.scratch_w);
                *out += &ws.term;
            }
        }
    }

    /// g(z) = Pᵀ f_γ(lift·z): each sampled entry needs only its own lifted
    /// entry (pointwise nonlinearity).
    fn sampled_g(
        &self,
        z: &DVector<f64>,
        indices: &[usize],
        sampled_rows: &DMatrix<f64>,
        ws: &mut ReducedWorkspace,
    ) {
        ws.sampled.gemv(1.0, sampled_rows, z, 0.0);
        for (r, &idx) in indices.iter().enumerate() {
            ws.gvec[r] = self.gamma * self.system.f_n_entry(idx, ws.sampled[r]);
        }
    }

    /// Jacobian of the right-hand side at z (dense w×w).
    pub fn rhs_jacobian(&self, z: &DVector<f64>, ws: &mut ReducedWorkspace) -> DMatrix<f64> {
        let mut jac = self.reduced_linear.clone();
        match &self.nonlinear {
            ReducedNonlinear::None => {}
            ReducedNonlinear::Full => {
                let n = self.system.half_dim();
                ws.lifted.gemv(1.0, &ws.lift_q, z, 0.0);
                for i in 0..n {
                    ws.dvec[i] = self.gamma * self.system.f_n_entry_derivative(i, ws.lifted[i]);
                }
                let mut scaled = ws.lift_q.clone();
                for i in 0..n {
                    let d = ws.dvec[i];
                    scaled.row_mut(i).scale_mut(d);
                }
                match self.kind {
                    ReducedKind::PsdNonlinearFull => {
                        let m1 = crate::linalg::mat_mul_tn(&ws.lift_q, &scaled);
                        jac += j_reduced_mat(&m1);
                    }
                    _ => {
                        jac -= crate::linalg::mat_mul_tn(&ws.lift_p, &scaled);
                    }
                }
            }
            ReducedNonlinear::Deim {
                w: wmat,
                indices,
                sampled_rows,
            }
            | ReducedNonlinear::Sdeim {
                w: wmat,
                indices,
                sampled_rows,
            } => {
                ws.sampled.gemv(1.0, sampled_rows, z, 0.0);
                let mut scaled = sampled_rows.clone();
                for (r, &idx) in indices.iter().enumerate() {
                    let d = self.gamma * self.system.f_n_entry_derivative(idx, ws.sampled[r]);
                    scaled.row_mut(r).scale_mut(d);
                }
                let term = crate::linalg::mat_mul(wmat, &scaled);
                if matches!(self.nonlinear, ReducedNonlinear::Sdeim { .. }) {
                    jac += j_reduced_mat(&term);
                } else {
                    jac += term;
                }
            }
        }
        jac
    }

    pub fn has_nonlinear(&self) -> bool {
        !matches!(self.nonlinear, ReducedNonlinear::None)
    }

    /// Structural invariants: J_wᵀK̃ symmetric for symplectic kinds and
    /// restrict∘lift = I, both at the model's invariant tolerance (1e−10
    /// for SVD-built bases; NLP bases carry their 1e−8 constraint gate).
    pub fn check_invariants(&self) -> Result<()> {
        let w = self.reduced_dim();
        let tol = self.invariant_tol;
        if self.kind.is_symplectic() {
            let l = crate::symplectic::jt_mul_mat(&self.reduced_linear);
            let asym = (&l - l.transpose()).norm();
            if asym > tol * (1.0 + l.norm()) {
                return Err(Error::Solver(format!(
                    "reduced operator is not Hamiltonian: ‖L̃ − L̃ᵀ‖ = {asym:.3e}"
                )));
            }
        }
        let prod = &self.restrict * &self.lift;
        let resid = (&prod - DMatrix::<f64>::identity(w, w)).norm();
        if resid > tol {
            return Err(Error::Solver(format!(
                "restrict∘lift deviates from identity by {resid:.3e} (gate {tol:.1e})"
            )));
        }
        Ok(())
    }
}

/// Scratch buffers reused across steps, including owned contiguous copies
/// of the lift's coordinate blocks so the Jacobian products can run through
/// faer's kernels.
#[derive(Debug, Clone)]
pub struct ReducedWorkspace {
    lifted: DVector<f64>,
    fvec: DVector<f64>,
    dvec: DVector<f64>,
    term: DVector<f64>,
    scratch_w: DVector<f64>,
    sampled: DVector<f64>,
    gvec: DVector<f64>,
    /// Rows 0..n of the lift (Full nonlinearity only).
    lift_q: DMatrix<f64>,
    /// Rows n..2n of the lift (POD Full only).
    lift_p: DMatrix<f64>,
}

impl ReducedWorkspace {
    pub fn for_model(model: &ReducedModel) -> Self {
        let n = model.system.half_dim();
        let w = model.reduced_dim();
        let m = match &model.nonlinear {
            ReducedNonlinear::Deim { indices, .. } | ReducedNonlinear::Sdeim { indices, .. } => {
                indices.len()
            }
            _ => 0,
        };
        let full = matches!(model.nonlinear, ReducedNonlinear::Full);
        let lift_q = if full {
            model.lift.rows(0, n).into_owned()
        } else {
            DMatrix::zeros(0, 0)
        };
        let lift_p = if full && !model.kind.is_symplectic() {
            model.lift.rows(n, n).into_owned()
        } else {
            DMatrix::zeros(0, 0)
        };
        Self {
            lifted: DVector::zeros(n),
            fvec: DVector::zeros(n),
            dvec: DVector::zeros(n),
            term: DVector::zeros(w),
            scratch_w: DVector::zeros(w),
            sampled: DVector::zeros(m),
            gvec: DVector::zeros(m),
            lift_q,
            lift_p,
        }
    }
}

/// K_γ action of the rescaled system: [q̇; ṗ_γ] = [p_γ/γ; γ·c²D_xx q].
fn k_gamma_action(system: &WaveSystem, gamma: f64, y: &[f64], out: &mut [f64]) {
    let n = system.half_dim();
    let (q, p) = y.split_at(n);
    let (out_q, out_p) = out.split_at_mut(n);
    for i in 0..n {
        out_q[i] = p[i] / gamma;
    }
    system.dxx().apply(q, out_p);
    let s = gamma * system.wave_speed() * system.wave_speed();
    out_p.iter_mut().for_each(|v| *v *= s);
}

/// K̃ = restrict · K_γ · lift, assembled column by column with the sparse
/// K action.
fn project_linear(
    system: &WaveSystem,
    gamma: f64,
    lift: &DMatrix<f64>,
    restrict: &DMatrix<f64>,
) -> DMatrix<f64> {
    let (two_n, w) = (lift.nrows(), lift.ncols());
    let mut k_lift = DMatrix::zeros(two_n, w);
    let mut col = vec![0.0; two_n];
    let mut out = vec![0.0; two_n];
    for j in 0..w {
        for i in 0..two_n {
            col[i] = lift[(i, j)];
        }
        k_gamma_action(system, gamma, &col, &mut out);
        for i in 0..two_n {
            k_lift[(i, j)] = out[i];
        }
    }
    restrict * k_lift
}

fn check_basis_dims(system: &WaveSystem, rows: usize) -> Result<()> {
    if rows != system.dim() {
        return Err(Error::dims("galerkin projection", system.dim(), rows));
    }
    Ok(())
}

/// Symplectic Galerkin projection of the linear part only; rejects systems
/// with a nonlinear term so it cannot silently drop one.
pub fn symplectic_galerkin_linear(
    system: &Arc<WaveSystem>,
    basis: &SymplecticBasis,
    gamma: f64,
) -> Result<ReducedModel> {
    check_basis_dims(system, basis.matrix().nrows())?;
    if !system.is_linear() {
        return Err(Error::Unsupported(
            "system has a nonlinear term; use symplectic_galerkin_nonlinear".into(),
        ));
    }
    let lift = basis.matrix().clone();
    let restrict = basis.sympl_inverse().clone();
    let reduced_linear = project_linear(system, gamma, &lift, &restrict);
    let model = ReducedModel {
        kind: ReducedKind::PsdLinear,
        reduced_linear,
        lift,
        restrict,
        nonlinear: ReducedNonlinear::None,
        system: Arc::clone(system),
        gamma,
        invariant_tol: basis.tolerance().max(1e-10),
    };
    model.check_invariants()?;
    Ok(model)
}

/// Symplectic Galerkin projection with the exact reduced nonlinear term
/// ż = K̃z + J₂ₖAᵀf_γ(Az); online cost O(n) per evaluation.
pub fn symplectic_galerkin_nonlinear(
    system: &Arc<WaveSystem>,
    basis: &SymplecticBasis,
    gamma: f64,
) -> Result<ReducedModel> {
    check_basis_dims(system, basis.matrix().nrows())?;
    let lift = basis.matrix().clone();
    let restrict = basis.sympl_inverse().clone();
    let reduced_linear = project_linear(system, gamma, &lift, &restrict);
    let nonlinear = if system.is_linear() {
        ReducedNonlinear::None
    } else {
        ReducedNonlinear::Full
    };
    let model = ReducedModel {
        kind: ReducedKind::PsdNonlinearFull,
        reduced_linear,
        lift,
        restrict,
        nonlinear,
        system: Arc::clone(system),
        gamma,
        invariant_tol: basis.tolerance().max(1e-10),
    };
    model.check_invariants()?;
    Ok(model)
}

/// Classical POD-Galerkin baseline on the full first-order state:
/// ż = ΦᵀK_γΦz + ΦᵀJf_γ(Φz), z₀ = Φᵀx₀.
pub fn pod_galerkin(
    system: &Arc<WaveSystem>,
    basis: &OrthonormalBasis,
    gamma: f64,
) -> Result<ReducedModel> {
    check_basis_dims(system, basis.matrix().nrows())?;
    let lift = basis.matrix().clone();
    let restrict = basis.matrix().transpose();
    let reduced_linear = project_linear(system, gamma, &lift, &restrict);
    let (kind, nonlinear) = if system.is_linear() {
        (ReducedKind::PodLinear, ReducedNonlinear::None)
    } else {
        (ReducedKind::PodNonlinearFull, ReducedNonlinear::Full)
    };
    let model = ReducedModel {
        kind,
        reduced_linear,
        lift,
        restrict,
        nonlinear,
        system: Arc::clone(system),
        gamma,
        invariant_tol: 1e-10,
    };
    model.check_invariants()?;
    Ok(model)
}

/// Internal constructor for the deim module.
pub(crate) fn assemble_reduced(
    kind: ReducedKind,
    reduced_linear: DMatrix<f64>,
    lift: DMatrix<f64>,
    restrict: DMatrix<f64>,
    nonlinear: ReducedNonlinear,
    system: Arc<WaveSystem>,
    gamma: f64,
) -> Result<ReducedModel> {
    let model = ReducedModel {
        kind,
        reduced_linear,
        lift,
        restrict,
        nonlinear,
        system,
        gamma,
        invariant_tol: 1e-10,
    };
    model.check_invariants()?;
    Ok(model)
}

pub(crate) fn project_linear_for(
    system: &WaveSystem,
    gamma: f64,
    lift: &DMatrix<f64>,
    restrict: &DMatrix<f64>,
) -> DMatrix<f64> {
    project_linear(system, gamma, lift, restrict)
}

/// Newton midpoint stepper for reduced models with a nonlinear term.
/// Exact Newton: the dense w×w Jacobian is rebuilt and refactored every
/// iteration.
pub struct ReducedMidpointNewton<'a> {
    model: &'a ReducedModel,
    dt: f64,
    newton: NewtonParams,
    ws: ReducedWorkspace,
    z_new: DVector<f64>,
    z_mid: DVector<f64>,
    rhs_mid: DVector<f64>,
    resid: DVector<f64>,
}

impl<'a> ReducedMidpointNewton<'a> {
    pub fn new(model: &'a ReducedModel, dt: f64, newton: NewtonParams) -> Self {
        let w = model.reduced_dim();
        Self {
            model,
            dt,
            newton,
            ws: ReducedWorkspace::for_model(model),
            z_new: DVector::zeros(w),
            z_mid: DVector::zeros(w),
            rhs_mid: DVector::zeros(w),
            resid: DVector::zeros(w),
        }
    }
}

impl Stepper for ReducedMidpointNewton<'_> {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn advance(&mut self, z: &mut DVector<f64>) -> Result<()> {
        let w = self.model.reduced_dim();
        let dt = self.dt;
        let threshold = self.newton.tol * (1.0 + z.norm());
        self.z_new.copy_from(z);

        let mut res_norm = f64::INFINITY;
        for _ in 0..self.newton.max_iters {
            for i in 0..w {
                self.z_mid[i] = 0.5 * (z[i] + self.z_new[i]);
            }
            self.model.rhs(&self.z_mid, &mut self.rhs_mid, &mut self.ws);
            res_norm = 0.0;
            for i in 0..w {
                let r = self.z_new[i] - z[i] - dt * self.rhs_mid[i];
                self.resid[i] = -r;
                res_norm += r * r;
            }
            res_norm = res_norm.sqrt();
            if res_norm <= threshold {
                z.copy_from(&self.z_new);
                return Ok(());
            }
            let mut jac = self.model.rhs_jacobian(&self.z_mid, &mut self.ws);
            jac.scale_mut(-0.5 * dt);
            for i in 0..w {
                jac[(i, i)] += 1.0;
            }
            crate::linalg::lu_solve_in_place(&jac, &mut self.resid)?;
            self.z_new += &self.resid;
        }
        Err(Error::NewtonDivergence {
            residual: res_norm,
            iters: self.newton.max_iters,
        })
    }
}

/// Builds a stepper for a reduced model: precomputed Cayley factor for
/// linear kinds, Newton midpoint otherwise. Symplectic Euler is refused —
/// a reduced Hamiltonian H(Az) is not separable in z.
pub fn reduced_stepper<'a>(
    model: &'a ReducedModel,
    spec: &IntegratorSpec,
) -> Result<Box<dyn Stepper + 'a>> {
    spec.validate()?;
    match spec.scheme {
        Scheme::ImplicitMidpoint => {
            if model.has_nonlinear() {
                Ok(Box::new(ReducedMidpointNewton::new(
                    model,
                    spec.dt,
                    spec.newton,
                )))
            } else {
                Ok(Box::new(DenseMidpoint::new(
                    model.reduced_linear(),
                    spec.dt,
                )?))
            }
        }
        Scheme::SymplecticEulerQp | Scheme::SymplecticEulerPq => Err(Error::Unsupported(
            "symplectic Euler needs a separable Hamiltonian; reduced models are not separable"
                .into(),
        )),
    }
}

/// Why a guarded reduced integration stopped early.
#[derive(Debug, Clone)]
pub struct Blowup {
    pub time: f64,
    pub step: usize,
    pub reason: String,
}

/// A reduced-model integration with blow-up detection: divergence is data
/// (recorded stop time), not a process failure.
#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub trajectory: Trajectory,
    pub blowup: Option<Blowup>,
}

/// Integrates a reduced model, recording every `stride` steps, and stops
/// early when ‖z‖ exceeds [`BLOWUP_FACTOR`]×‖z₀‖ or a step solver fails.
pub fn integrate_guarded(
    stepper: &mut dyn Stepper,
    z0: &DVector<f64>,
    steps: usize,
    stride: usize,
) -> ReducedRun {
    let stride = stride.max(1);
    let dt = stepper.dt();
    let mut z = z0.clone();
    let norm0 = z0.norm();
    let threshold = if norm0 > 0.0 {
        BLOWUP_FACTOR * norm0
    } else {
        BLOWUP_FACTOR
    };
    let mut trajectory = Trajectory {
        times: vec![0.0],
        states: vec![z.clone()],
        stride,
    };
    let mut blowup = None;
    for step in 1..=steps {
        if let Err(e) = stepper.advance(&mut z) {
            blowup = Some(Blowup {
                time: step as f64 * dt,
                step,
                reason: e.to_string(),
            });
            break;
        }
        let norm = z.norm();
        if !norm.is_finite() || norm > threshold {
            blowup = Some(Blowup {
                time: step as f64 * dt,
                step,
                reason: format!("state norm {norm:.3e} exceeded {threshold:.3e}"),
            });
            break;
        }
        if step % stride == 0 {
            trajectory.times.push(step as f64 * dt);
            trajectory.states.push(z.clone());
        }
    }
    ReducedRun { trajectory, blowup }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{integrate, step_count};
    use crate::models::{
        build_linear_wave, build_sine_gordon, kink_state, BoundaryCondition, GridSpec,
    };
    use crate::psd::{complex_svd_basis, cotangent_lift};
    use crate::snapshots::SnapshotEnsemble;
    use nalgebra::{DMatrix, DVector};

    fn small_linear() -> Arc<WaveSystem> {
        let grid = GridSpec::new(6, 1.0).unwrap();
        Arc::new(build_linear_wave(grid, 0.1, BoundaryCondition::Periodic).unwrap())
    }

    fn small_sine_gordon() -> Arc<WaveSystem> {
        let grid = GridSpec::new(8, 8.0).unwrap();
        Arc::new(build_sine_gordon(grid, BoundaryCondition::Periodic).unwrap())
    }

    fn identity_basis(dim: usize) -> SymplecticBasis {
        SymplecticBasis::validate(DMatrix::identity(dim, dim), 1e-12).unwrap()
    }

    fn k_dense(sys: &WaveSystem) -> DMatrix<f64> {
        let d = sys.dim();
        let mut k = DMatrix::zeros(d, d);
        let mut out = vec![0.0; d];
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            sys.k_action(&e, &mut out);
            for i in 0..d {
                k[(i, j)] = out[i];
            }
        }
        k
    }

    fn data_basis(sys: &Arc<WaveSystem>, k: usize) -> SymplecticBasis {
        let y0 = DVector::from_fn(sys.dim(), |i, _| ((i + 1) as f64 * 0.43).sin());
        let spec = IntegratorSpec::midpoint(0.02);
        let mut stepper = crate::integrators::wave_stepper(sys, &spec).unwrap();
        let traj = integrate(stepper.as_mut(), &y0, 200, 5).unwrap();
        let ens = SnapshotEnsemble::from_trajectory(&traj).unwrap();
        cotangent_lift(&ens, k, 1.0).unwrap().0
    }

    #[test]
    fn identity_basis_reproduces_k() {
        let sys = small_linear();
        let basis = identity_basis(sys.dim());
        let model = symplectic_galerkin_linear(&sys, &basis, 1.0).unwrap();
        assert!((model.reduced_linear() - k_dense(&sys)).norm() < 1e-12);
    }

    #[test]
    fn identity_basis_reduced_flow_equals_full_flow() {
        // With A = I the reduction is exact: integrating the reduced model
        // reproduces the full midpoint trajectory to roundoff.
        let sys = small_linear();
        let basis = identity_basis(sys.dim());
        let model = symplectic_galerkin_linear(&sys, &basis, 1.0).unwrap();
        let y0 = crate::models::spline_bump_initial(sys.grid());
        let spec = IntegratorSpec::midpoint(0.02);
        let full = {
            let mut stepper = crate::integrators::wave_stepper(&sys, &spec).unwrap();
            integrate(stepper.as_mut(), &y0, 100, 10).unwrap()
        };
        let z0 = model.restrict_state(&y0).unwrap();
        let reduced = {
            let mut stepper = reduced_stepper(&model, &spec).unwrap();
            integrate(stepper.as_mut(), &z0, 100, 10).unwrap()
        };
        for (a, b) in full.states.iter().zip(reduced.states.iter()) {
            let lifted = model.lift_state(b).unwrap();
            assert!((a - lifted).norm() <= 1e-11 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn reduced_operator_is_hamiltonian() {
        let sys = small_linear();
        let basis = data_basis(&sys, 2);
        let model = symplectic_galerkin_linear(&sys, &basis, 1.0).unwrap();
        let l = crate::symplectic::jt_mul_mat(model.reduced_linear());
        assert!((&l - l.transpose()).norm() < 1e-12);
    }

    #[test]
    fn nonlinear_builder_collapses_to_linear_when_f_vanishes() {
        let sys = small_linear();
        let basis = data_basis(&sys, 2);
        let lin = symplectic_galerkin_linear(&sys, &basis, 1.0).unwrap();
        let nl = symplectic_galerkin_nonlinear(&sys, &basis, 1.0).unwrap();
        assert!((lin.reduced_linear() - nl.reduced_linear()).norm() < 1e-14);
        assert!(!nl.has_nonlinear());
    }

    #[test]
    fn pod_identity_basis_is_full_system() {
        let sys = small_sine_gordon();
        let phi = crate::symplectic::OrthonormalBasis::validate(
            DMatrix::identity(sys.dim(), sys.dim()),
            1e-12,
        )
        .unwrap();
        let model = pod_galerkin(&sys, &phi, 1.0).unwrap();
        assert!((model.reduced_linear() - k_dense(&sys)).norm() < 1e-12);

        // rhs matches the full system's rhs.
        let z = DVector::from_fn(sys.dim(), |i, _| (i as f64 * 0.3).cos());
        let mut out = DVector::zeros(sys.dim());
        let mut ws = ReducedWorkspace::for_model(&model);
        model.rhs(&z, &mut out, &mut ws);
        let mut full = vec![0.0; sys.dim()];
        sys.rhs(z.as_slice(), &mut full);
        for i in 0..sys.dim() {
            assert!((out[i] - full[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_restrict_round_trip() {
        let sys = small_sine_gordon();
        let basis = data_basis(&sys, 3);
        let model = symplectic_galerkin_nonlinear(&sys, &basis, 0.7).unwrap();
        let z = DVector::from_fn(model.reduced_dim(), |i, _| (i as f64 + 0.5).sin());
        let back = model
            .restrict_state(&model.lift_state(&z).unwrap())
            .unwrap();
        assert!((back - &z).norm() < 1e-10);
        // z = 0 lifts to 0.
        let zero = model
            .lift_state(&DVector::zeros(model.reduced_dim()))
            .unwrap();
        assert!(zero.norm() == 0.0);
        // Projector idempotence for states already in range.
        let x = model.lift_state(&z).unwrap();
        let x2 = model
            .lift_state(&model.restrict_state(&x).unwrap())
            .unwrap();
        assert!((x2 - x).norm() < 1e-10);
    }

    #[test]
    fn energy_discrepancy_constant_along_reduced_flow() {
        let sys = small_sine_gordon();
        let basis = data_basis(&sys, 3);
        let model = symplectic_galerkin_nonlinear(&sys, &basis, 1.0).unwrap();
        let x0 = DVector::from_fn(sys.dim(), |i, _| 0.4 * ((i + 2) as f64 * 0.37).sin());
        let delta0 = model.energy_discrepancy(&x0).unwrap();

        let z0 = model.restrict_state(&x0).unwrap();
        let spec = IntegratorSpec::midpoint(0.02);
        let mut stepper = reduced_stepper(&model, &spec).unwrap();
        let traj = integrate(stepper.as_mut(), &z0, 500, 50).unwrap();
        // Constant up to the midpoint rule's bounded O(δt²) energy
        // oscillation on a non-quadratic Hamiltonian (measured ~9e−7 at
        // δt = 0.02); a wrong reduced model drifts secularly, orders beyond
        // this bound.
        let h_full_0 = sys.energy(x0.as_slice());
        for s in &traj.states {
            let delta = h_full_0 - model.energy(s).unwrap();
            assert!(
                (delta - delta0).abs() <= 1e-5,
                "ΔH drifted: {delta} vs {delta0}"
            );
        }
    }

    #[test]
    fn energy_discrepancy_zero_when_x0_in_range() {
        let sys = small_sine_gordon();
        let basis = data_basis(&sys, 3);
        let model = symplectic_galerkin_nonlinear(&sys, &basis, 1.0).unwrap();
        let z = DVector::from_fn(model.reduced_dim(), |i, _| (i as f64).cos());
        let x0 = model.lift_state(&z).unwrap();
        let delta = model.energy_discrepancy(&x0).unwrap();
        assert!(delta.abs() < 1e-9, "ΔH = {delta}");
    }

    #[test]
    fn psd_reduced_linear_conserves_energy_to_solver_tolerance() {
        let grid = GridSpec::new(64, 1.0).unwrap();
        let sys = Arc::new(build_linear_wave(grid, 0.1, BoundaryCondition::Periodic).unwrap());
        let y0 = crate::models::spline_bump_initial(sys.grid());
        let spec = IntegratorSpec::midpoint(0.01);
        let mut full_stepper = crate::integrators::wave_stepper(&sys, &spec).unwrap();
        let traj = integrate(full_stepper.as_mut(), &y0, 1000, 20).unwrap();
        let ens = SnapshotEnsemble::from_trajectory(&traj).unwrap();
        let (basis, _) = cotangent_lift(&ens, 8, 1.0).unwrap();
        let model = symplectic_galerkin_linear(&sys, &basis, 1.0).unwrap();

        let z0 = model.restrict_state(&y0).unwrap();
        let mut stepper = reduced_stepper(&model, &spec).unwrap();
        let rtraj = integrate(stepper.as_mut(), &z0, 2000, 100).unwrap();
        let e0 = model.energy(&z0).unwrap();
        for s in &rtraj.states {
            let e = model.energy(s).unwrap();
            assert!((e - e0).abs() <= 1e-10 * (1.0 + e0.abs()));
        }
    }

    #[test]
    fn gamma_weighted_reduction_round_trips_states() {
        let sys = small_linear();
        let gamma = 0.01;
        let y0 = crate::models::spline_bump_initial(sys.grid());
        let spec = IntegratorSpec::midpoint(0.05);
        let mut st = crate::integrators::wave_stepper(&sys, &spec).unwrap();
        let traj = integrate(st.as_mut(), &y0, 100, 10).unwrap();
        let ens = SnapshotEnsemble::from_trajectory(&traj).unwrap();
        let (basis, _) = complex_svd_basis(&ens, 3, gamma).unwrap();
        let model = symplectic_galerkin_linear(&sys, &basis, gamma).unwrap();
        let z = DVector::from_fn(6, |i, _| (i as f64 * 1.3).sin());
        let x = model.lift_state(&z).unwrap();
        let z2 = model.restrict_state(&x).unwrap();
        assert!((z2 - z).norm() < 1e-9);
    }

    #[test]
    fn reduced_jacobian_matches_finite_differences() {
        let sys = small_sine_gordon();
        let basis = data_basis(&sys, 3);
        let model = symplectic_galerkin_nonlinear(&sys, &basis, 1.0).unwrap();
        let w = model.reduced_dim();
        let z = DVector::from_fn(w, |i, _| 0.3 * (i as f64 + 1.0).sin());
        let mut ws = ReducedWorkspace::for_model(&model);
        let jac = model.rhs_jacobian(&z, &mut ws);
        let h = 1e-6;
        let mut out_p = DVector::zeros(w);
        let mut out_m = DVector::zeros(w);
        for j in 0..w {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            model.rhs(&zp, &mut out_p, &mut ws);
            model.rhs(&zm, &mut out_m, &mut ws);
            for i in 0..w {
                let fd = (out_p[i] - out_m[i]) / (2.0 * h);
                assert!(
                    (fd - jac[(i, j)]).abs() < 1e-6 * (1.0 + fd.abs()),
                    "jac ({i},{j}): fd {fd} vs {}",
                    jac[(i, j)]
                );
            }
        }
    }

    #[test]
    fn euler_refused_on_reduced_models() {
        let sys = small_linear();
        let basis = data_basis(&sys, 2);
        let model = symplectic_galerkin_linear(&sys, &basis, 1.0).unwrap();
        let spec = IntegratorSpec {
            scheme: Scheme::SymplecticEulerQp,
            dt: 0.1,
            newton: NewtonParams::default(),
        };
        assert!(matches!(
            reduced_stepper(&model, &spec),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn guarded_integration_detects_blowup() {
        let sys = small_linear();
        let basis = data_basis(&sys, 1);
        let mut model = symplectic_galerkin_linear(&sys, &basis, 1.0).unwrap();
        // ż = z: crosses the 1e6 threshold long before T = 50.
        model.reduced_linear = DMatrix::identity(2, 2);
        let z0 = DVector::from_vec(vec![1.0, 0.0]);
        let spec = IntegratorSpec::midpoint(0.5);
        let mut stepper = reduced_stepper(&model, &spec).unwrap();
        let run = integrate_guarded(stepper.as_mut(), &z0, step_count(50.0, 0.5).unwrap(), 1);
        let blowup = run.blowup.expect("should blow up");
        assert!(blowup.time < 50.0);
        assert!(run.trajectory.len() < 101);
    }

    #[test]
    fn sine_gordon_reduced_tracks_full_briefly() {
        let grid = GridSpec::new(64, 50.0).unwrap();
        let sys = Arc::new(
            build_sine_gordon(
                grid,
                BoundaryCondition::Dirichlet {
                    left: 0.0,
                    right: 2.0 * std::f64::consts::PI,
                },
            )
            .unwrap(),
        );
        let y0 = kink_state(sys.grid(), 0.0, 0.2, 10.0).unwrap();
        let spec = IntegratorSpec::midpoint(0.05);
        let mut full_stepper = crate::integrators::wave_stepper(&sys, &spec).unwrap();
        let steps = step_count(10.0, 0.05).unwrap();
        let traj = integrate(full_stepper.as_mut(), &y0, steps, 10).unwrap();
        let ens = SnapshotEnsemble::from_trajectory(&traj).unwrap();
        let (basis, _) = cotangent_lift(&ens, 12, 1.0).unwrap();
        let model = symplectic_galerkin_nonlinear(&sys, &basis, 1.0).unwrap();

        let z0 = model.restrict_state(&y0).unwrap();
        let mut stepper = reduced_stepper(&model, &spec).unwrap();
        let rtraj = integrate(stepper.as_mut(), &z0, steps, 10).unwrap();
        let x_end = model.lift_state(rtraj.states.last().unwrap()).unwrap();
        let full_end = traj.states.last().unwrap();
        let err = (x_end - full_end).norm() / full_end.norm();
        assert!(err < 1e-2, "relative error {err}");
    }
}
