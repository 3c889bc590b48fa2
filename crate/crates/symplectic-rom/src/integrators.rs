//! Structure-preserving time integration.
//!
//! Implicit midpoint x⁺ = x + δt·J∇H((x⁺+x)/2) is the workhorse: second
//! order and symplectic. For linear systems the one-step map is the Cayley
//! transform (I − δt/2 K)⁻¹(I + δt/2 K), factorized once per (system, δt).
//! For the wave family the nonlinear midpoint equations reduce to an
//! n-dimensional Newton iteration with a tridiagonal (or cyclic
//! tridiagonal) Jacobian, refactored every iteration.
//!
//! Symplectic Euler (both variants) is provided for separable Hamiltonians,
//! where it is explicit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{solve_cyclic_tridiag, solve_tridiag};
use crate::models::WaveSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SymplecticEulerQp,
    SymplecticEulerPq,
    ImplicitMidpoint,
}

impl Scheme {
    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::SymplecticEulerQp => "symplectic_euler_qp",
            Scheme::SymplecticEulerPq => "symplectic_euler_pq",
            Scheme::ImplicitMidpoint => "implicit_midpoint",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonParams {
    /// Relative residual tolerance: converged when ‖R‖ ≤ tol·(1 + ‖x‖).
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 50,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorSpec {
    pub scheme: Scheme,
    pub dt: f64,
    pub newton: NewtonParams,
}

impl IntegratorSpec {
    pub fn midpoint(dt: f64) -> Self {
        Self {
            scheme: Scheme::ImplicitMidpoint,
            dt,
            newton: NewtonParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Domain(format!(
                "timestep must be positive, got {}",
                self.dt
            )));
        }
        if !(self.newton.tol > 0.0) {
            return Err(Error::Domain("newton tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Recorded states of one integration, sampled every `stride` steps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub stride: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    /// States as a dim×N matrix (columns are records).
    pub fn as_matrix(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, self.len());
        for (j, s) in self.states.iter().enumerate() {
            m.set_column(j, s);
        }
        m
    }
}

/// Advances a state by one fixed timestep.
pub trait Stepper {
    fn dt(&self) -> f64;
    fn advance(&mut self, y: &mut DVector<f64>) -> Result<()>;
}

/// Midpoint for ẋ = Kx with dense K: the Cayley map
/// (I − δt/2 K)⁻¹(I + δt/2 K), factored once.
pub struct DenseMidpoint {
    dt: f64,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    forward: DMatrix<f64>,
    scratch: DVector<f64>,
}

impl DenseMidpoint {
    pub fn new(k: &DMatrix<f64>, dt: f64) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n {
            return Err(Error::dims(
                "midpoint_step_linear",
                "square K",
                format!("{}x{}", n, k.ncols()),
            ));
        }
        let half = 0.5 * dt;
        let mut back = DMatrix::identity(n, n);
        back -= k * half;
        let mut forward = DMatrix::identity(n, n);
        forward += k * half;
        let lu = back.lu();
        if lu.determinant().abs() == 0.0 {
            return Err(Error::Solver(format!(
                "shifted operator I - (dt/2)K is singular at dt = {dt}"
            )));
        }
        Ok(Self {
            dt,
            lu,
            forward,
            scratch: DVector::zeros(n),
        })
    }
}

impl Stepper for DenseMidpoint {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn advance(&mut self, y: &mut DVector<f64>) -> Result<()> {
        self.scratch.gemv(1.0, &self.forward, y, 0.0);
        y.copy_from(&self.scratch);
        if !self.lu.solve_mut(y) {
            return Err(Error::Solver("midpoint solve failed".into()));
        }
        Ok(())
    }
}

/// One midpoint step of a dense linear system (convenience wrapper).
pub fn midpoint_step_linear(k: &DMatrix<f64>, x: &DVector<f64>, dt: f64) -> Result<DVector<f64>> {
    let mut stepper = DenseMidpoint::new(k, dt)?;
    let mut y = x.clone();
    stepper.advance(&mut y)?;
    Ok(y)
}

/// Midpoint for the linear wave system: the 2n system is eliminated to an
/// n-dimensional (cyclic) tridiagonal solve for q⁺, factorable once since
/// the operator is state-independent:
///   (I − (δt²/4) c²D_xx) q⁺ = q + δt p + (δt²/4) c²D_xx q,
///   p⁺ = 2(q⁺ − q)/δt − p.
pub struct WaveMidpointLinear<'a> {
    system: &'a WaveSystem,
    dt: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    corner: f64,
    rhs: Vec<f64>,
    dq: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> WaveMidpointLinear<'a> {
    pub fn new(system: &'a WaveSystem, dt: f64) -> Result<Self> {
        if !system.is_linear() {
            return Err(Error::Unsupported(
                "linear midpoint path requires f_N = 0; use the Newton step".into(),
            ));
        }
        let n = system.half_dim();
        let dxx = system.dxx();
        let c2 = system.wave_speed() * system.wave_speed();
        let a = 0.25 * dt * dt * c2;
        let lower = vec![-a * dxx.off; n];
        let upper = vec![-a * dxx.off; n];
        let diag: Vec<f64> = dxx.diag.iter().map(|d| 1.0 - a * d).collect();
        let corner = if dxx.periodic { -a * dxx.off } else { 0.0 };
        Ok(Self {
            system,
            dt,
            lower,
            diag,
            upper,
            corner,
            rhs: vec![0.0; n],
            dq: vec![0.0; n],
            scratch: Vec::new(),
        })
    }
}

impl Stepper for WaveMidpointLinear<'_> {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn advance(&mut self, y: &mut DVector<f64>) -> Result<()> {
        let n = self.system.half_dim();
        let dt = self.dt;
        let c2 = self.system.wave_speed() * self.system.wave_speed();
        let a = 0.25 * dt * dt * c2;
        let ys = y.as_mut_slice();
        let (q, p) = ys.split_at_mut(n);
        self.system.dxx().apply(q, &mut self.dq);
        for i in 0..n {
            self.rhs[i] = q[i] + dt * p[i] + a * self.dq[i];
        }
        if self.system.dxx().periodic {
            solve_cyclic_tridiag(
                &self.lower,
                &self.diag,
                &self.upper,
                self.corner,
                self.corner,
                &mut self.rhs,
            )?;
        } else {
            solve_tridiag(
                &self.lower,
                &self.diag,
                &self.upper,
                &mut self.rhs,
                &mut self.scratch,
            )?;
        }
        for i in 0..n {
            let q_new = self.rhs[i];
            let p_new = 2.0 * (q_new - q[i]) / dt - p[i];
            q[i] = q_new;
            p[i] = p_new;
        }
        Ok(())
    }
}

/// Midpoint with Newton for the (possibly nonlinear) wave family.
///
/// The 2n midpoint equations are reduced to the momentum-block residual
///   F(q⁺) = 2(q⁺ − q)/δt − 2p − δt[c²D_xx q_m − f(q_m)],  q_m = (q + q⁺)/2,
/// whose Jacobian (2/δt)I − (δt/2)c²D_xx + (δt/2)diag(f'(q_m)) is
/// tridiagonal. The q-block equation holds identically with
/// p⁺ = 2(q⁺ − q)/δt − p, so ‖F‖ is the full residual norm. Converged when
/// ‖F‖ ≤ tol·(1 + ‖x‖); exact Newton, Jacobian refactored every iteration.
pub struct WaveMidpointNewton<'a> {
    system: &'a WaveSystem,
    dt: f64,
    newton: NewtonParams,
    q_new: Vec<f64>,
    q_mid: Vec<f64>,
    resid: Vec<f64>,
    dq: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> WaveMidpointNewton<'a> {
    pub fn new(system: &'a WaveSystem, dt: f64, newton: NewtonParams) -> Self {
        let n = system.half_dim();
        Self {
            system,
            dt,
            newton,
            q_new: vec![0.0; n],
            q_mid: vec![0.0; n],
            resid: vec![0.0; n],
            dq: vec![0.0; n],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            scratch: Vec::new(),
        }
    }

    fn residual(&mut self, q: &[f64], p: &[f64]) -> f64 {
        let n = self.system.half_dim();
        let dt = self.dt;
        let c2 = self.system.wave_speed() * self.system.wave_speed();
        for i in 0..n {
            self.q_mid[i] = 0.5 * (q[i] + self.q_new[i]);
        }
        self.system.dxx().apply(&self.q_mid, &mut self.dq);
        let mut norm2 = 0.0;
        for i in 0..n {
            let force = c2 * self.dq[i] - self.system.f_n_entry(i, self.q_mid[i]);
            let r = 2.0 * (self.q_new[i] - q[i]) / dt - 2.0 * p[i] - dt * force;
            self.resid[i] = r;
            norm2 += r * r;
        }
        norm2.sqrt()
    }
}

impl Stepper for WaveMidpointNewton<'_> {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn advance(&mut self, y: &mut DVector<f64>) -> Result<()> {
        let n = self.system.half_dim();
        let dt = self.dt;
        let c2 = self.system.wave_speed() * self.system.wave_speed();
        let dxx_off = self.system.dxx().off;
        let dxx_periodic = self.system.dxx().periodic;
        let state_norm = y.norm();
        let threshold = self.newton.tol * (1.0 + state_norm);

        let ys = y.as_mut_slice();
        let (q, p) = ys.split_at_mut(n);
        self.q_new.copy_from_slice(q);

        let mut res_norm = f64::INFINITY;
        for _ in 0..self.newton.max_iters {
            res_norm = self.residual(q, p);
            if res_norm <= threshold {
                for i in 0..n {
                    let p_new = 2.0 * (self.q_new[i] - q[i]) / dt - p[i];
                    q[i] = self.q_new[i];
                    p[i] = p_new;
                }
                return Ok(());
            }
            // Jacobian at the current midpoint.
            let half_dt = 0.5 * dt;
            for i in 0..n {
                self.lower[i] = -half_dt * c2 * dxx_off;
                self.upper[i] = -half_dt * c2 * dxx_off;
                self.diag[i] = 2.0 / dt - half_dt * c2 * self.system.dxx().diag[i]
                    + half_dt * self.system.f_n_entry_derivative(i, self.q_mid[i]);
            }
            for r in self.resid.iter_mut() {
                *r = -*r;
            }
            if dxx_periodic {
                let corner = -half_dt * c2 * dxx_off;
                solve_cyclic_tridiag(
                    &self.lower,
                    &self.diag,
                    &self.upper,
                    corner,
                    corner,
                    &mut self.resid,
                )?;
            } else {
                solve_tridiag(
                    &self.lower,
                    &self.diag,
                    &self.upper,
                    &mut self.resid,
                    &mut self.scratch,
                )?;
            }
            for i in 0..n {
                self.q_new[i] += self.resid[i];
            }
        }
        Err(Error::NewtonDivergence {
            residual: res_norm,
            iters: self.newton.max_iters,
        })
    }
}

/// One nonlinear midpoint step of a wave system (convenience wrapper; the
/// result coincides with the linear path when f_N ≡ 0).
pub fn midpoint_step_nonlinear(
    system: &WaveSystem,
    x: &DVector<f64>,
    dt: f64,
    newton: NewtonParams,
) -> Result<DVector<f64>> {
    let mut stepper = WaveMidpointNewton::new(system, dt, newton);
    let mut y = x.clone();
    stepper.advance(&mut y)?;
    Ok(y)
}

/// Separable Hamiltonians expose q̇ as a function of p and ṗ as a function
/// of q, which makes both symplectic Euler variants explicit.
pub trait SeparableHamiltonian {
    fn half_dim(&self) -> usize;
    /// q̇ = ∇_p T(p).
    fn velocity(&self, p: &[f64], out: &mut [f64]);
    /// ṗ = −∇_q U(q).
    fn force(&self, q: &[f64], out: &mut [f64]);
}

impl SeparableHamiltonian for WaveSystem {
    fn half_dim(&self) -> usize {
        self.half_dim()
    }

    fn velocity(&self, p: &[f64], out: &mut [f64]) {
        out.copy_from_slice(p);
    }

    fn force(&self, q: &[f64], out: &mut [f64]) {
        self.dxx().apply(q, out);
        let c2 = self.wave_speed() * self.wave_speed();
        for (i, v) in out.iter_mut().enumerate() {
            *v = c2 * *v - self.f_n_entry(i, q[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerVariant {
    /// Update q with the old p, then p with the new q.
    QThenP,
    /// Update p with the old q, then q with the new p.
    PThenQ,
}

/// One explicit symplectic Euler step for a separable Hamiltonian.
pub fn symplectic_euler_step<S: SeparableHamiltonian>(
    system: &S,
    x: &DVector<f64>,
    dt: f64,
    variant: EulerVariant,
) -> Result<DVector<f64>> {
    let n = system.half_dim();
    if x.len() != 2 * n {
        return Err(Error::dims("symplectic_euler_step", 2 * n, x.len()));
    }
    let mut y = x.clone();
    let mut buf = vec![0.0; n];
    let ys = y.as_mut_slice();
    let (q, p) = ys.split_at_mut(n);
    match variant {
        EulerVariant::QThenP => {
            system.velocity(p, &mut buf);
            for i in 0..n {
                q[i] += dt * buf[i];
            }
            system.force(q, &mut buf);
            for i in 0..n {
                p[i] += dt * buf[i];
            }
        }
        EulerVariant::PThenQ => {
            system.force(q, &mut buf);
            for i in 0..n {
                p[i] += dt * buf[i];
            }
            system.velocity(p, &mut buf);
            for i in 0..n {
                q[i] += dt * buf[i];
            }
        }
    }
    Ok(y)
}

struct WaveEuler<'a> {
    system: &'a WaveSystem,
    dt: f64,
    variant: EulerVariant,
}

impl Stepper for WaveEuler<'_> {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn advance(&mut self, y: &mut DVector<f64>) -> Result<()> {
        *y = symplectic_euler_step(self.system, y, self.dt, self.variant)?;
        Ok(())
    }
}

/// Builds the stepper a [`IntegratorSpec`] asks for on a full wave system.
pub fn wave_stepper<'a>(
    system: &'a WaveSystem,
    spec: &IntegratorSpec,
) -> Result<Box<dyn Stepper + 'a>> {
    spec.validate()?;
    match spec.scheme {
        Scheme::ImplicitMidpoint => {
            if system.is_linear() {
                Ok(Box::new(WaveMidpointLinear::new(system, spec.dt)?))
            } else {
                Ok(Box::new(WaveMidpointNewton::new(
                    system,
                    spec.dt,
                    spec.newton,
                )))
            }
        }
        Scheme::SymplecticEulerQp => Ok(Box::new(WaveEuler {
            system,
            dt: spec.dt,
            variant: EulerVariant::QThenP,
        })),
        Scheme::SymplecticEulerPq => Ok(Box::new(WaveEuler {
            system,
            dt: spec.dt,
            variant: EulerVariant::PThenQ,
        })),
    }
}

/// Applies `stepper` for `steps` steps, recording every `stride` steps
/// (including the initial state; the final state is always recorded when
/// `steps` is a multiple of `stride`). Step failures are wrapped with their
/// step index and time.
pub fn integrate(
    stepper: &mut dyn Stepper,
    x0: &DVector<f64>,
    steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    let stride = stride.max(1);
    let dt = stepper.dt();
    let mut y = x0.clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![y.clone()],
        stride,
    };
    for step in 1..=steps {
        stepper.advance(&mut y).map_err(|e| Error::Step {
            step,
            time: step as f64 * dt,
            source: Box::new(e),
        })?;
        if step % stride == 0 {
            traj.times.push(step as f64 * dt);
            traj.states.push(y.clone());
        }
    }
    Ok(traj)
}

/// Number of steps m with T = m·δt, requiring T to be a near-integer
/// multiple of δt.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    let m = t_final / dt;
    let rounded = m.round();
    if (m - rounded).abs() > 1e-6 * (1.0 + m.abs()) {
        return Err(Error::Domain(format!(
            "final time {t_final} is not an integer multiple of dt = {dt}"
        )));
    }
    Ok(rounded as usize)
}
