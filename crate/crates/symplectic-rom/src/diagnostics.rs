//! Error, energy, and spectral-stability analysis of reduced trajectories.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integrators::Trajectory;
use crate::linalg::{self, CVector};
use crate::models::{GridSpec, WaveSystem};
use crate::reduction::ReducedModel;
use crate::symplectic::OrthonormalBasis;

/// Which components enter the instant error norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// ‖q̂ − q‖₂ only (the linear-wave convention).
    QOnly,
    /// ‖x̂ − x‖₂ on the whole phase state (the sine-Gordon convention).
    FullState,
}

/// Per-timestep error and energy series with the total-error quadrature.
#[derive(Debug, Clone)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub instant_error: Vec<f64>,
    /// √(Σ ‖e(t_j)‖²·δt) over the recording grid (left Riemann sum);
    /// infinite when the compared trajectory ended early (blow-up).
    pub total_error: f64,
    pub truncated: bool,
    /// True when nearest-step resampling was needed to align the grids.
    pub resampled: bool,
}

/// Left-Riemann total error on a uniform recording grid.
fn total_from_instant(times: &[f64], instant: &[f64]) -> f64 {
    if times.len() < 2 {
        return 0.0;
    }
    let dt = times[1] - times[0];
    let sum: f64 = instant[..instant.len() - 1].iter().map(|e| e * e).sum();
    (sum * dt).sqrt()
}

/// Instant and total L² error between a reference trajectory and lifted
/// approximate states on (nearly) the same recording grid. A grid offset of
/// up to one recording step is resampled to the nearest reference record
/// and flagged; beyond that it is an alignment error. An approximation that
/// stops early (blow-up) yields a truncated series with infinite total
/// error.
pub fn error_series(
    reference: &Trajectory,
    approx_times: &[f64],
    approx_states: &[DVector<f64>],
    norm: ErrorNorm,
    half_dim: usize,
) -> Result<DiagnosticsSeries> {
    if reference.is_empty() {
        return Err(Error::Alignment("reference trajectory is empty".into()));
    }
    if approx_times.len() != approx_states.len() {
        return Err(Error::dims(
            "error_series",
            approx_times.len(),
            approx_states.len(),
        ));
    }
    let ref_step = if reference.times.len() > 1 {
        reference.times[1] - reference.times[0]
    } else {
        f64::INFINITY
    };
    let mut resampled = false;
    let mut times = Vec::with_capacity(approx_times.len());
    let mut instant = Vec::with_capacity(approx_times.len());
    for (j, &t) in approx_times.iter().enumerate() {
        // Nearest reference record.
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, &rt) in reference.times.iter().enumerate() {
            let gap = (rt - t).abs();
            if gap < best_gap {
                best_gap = gap;
                best = i;
            }
        }
        if best_gap > ref_step * (1.0 + 1e-9) {
            return Err(Error::Alignment(format!(
                "approximation time {t} is {best_gap} away from the nearest reference record"
            )));
        }
        if best_gap > 1e-9 * (1.0 + t.abs()) {
            resampled = true;
        }
        let r = &reference.states[best];
        let a = &approx_states[j];
        if r.len() != a.len() {
            return Err(Error::dims("error_series", r.len(), a.len()));
        }
        let err = match norm {
            ErrorNorm::FullState => (a - r).norm(),
            ErrorNorm::QOnly => {
                let mut acc = 0.0;
                for i in 0..half_dim {
                    let d = a[i] - r[i];
                    acc += d * d;
                }
                acc.sqrt()
            }
        };
        times.push(t);
        instant.push(err);
    }
    let truncated = approx_times.len() < reference.times.len();
    let total_error = if truncated {
        f64::INFINITY
    } else {
        total_from_instant(&times, &instant)
    };
    Ok(DiagnosticsSeries {
        times,
        instant_error: instant,
        total_error,
        truncated,
        resampled,
    })
}

/// E(t_j) = H_d(x̂(t_j)) for a full-model trajectory.
pub fn energy_series_full(system: &WaveSystem, traj: &Trajectory) -> Vec<f64> {
    traj.states
        .iter()
        .map(|s| system.energy(s.as_slice()))
        .collect()
}

/// E(t_j) = H_d(lift z_j) for a reduced trajectory.
pub fn energy_series_reduced(model: &ReducedModel, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.states.iter().map(|z| model.energy(z)).collect()
}

/// The dominant eigenpair of a reduced linear operator and the projection
/// coefficient of the initial condition onto it.
#[derive(Debug, Clone)]
pub struct SpectralStability {
    /// Eigenvalue with maximal real part (ties: larger |Im|, then lower index).
    pub lambda_star: Complex<f64>,
    /// a* = ξ*ᵀ z₀ (bilinear pairing, z₀ = Φᵀy₀).
    pub a_star: Complex<f64>,
    /// Unit eigenvector ξ*.
    pub eigvec: CVector,
    /// ‖Mξ* − λ*ξ*‖ / ‖M‖_F.
    pub residual: f64,
}

/// Eigen-analysis of the POD reduced operator ΦᵀKΦ: the mode with maximal
/// real part drives the a*·exp(λ*t) growth of the reduced solution.
pub fn pod_spectral_stability(
    reduced_linear: &DMatrix<f64>,
    y0: &DVector<f64>,
    phi: &OrthonormalBasis,
) -> Result<SpectralStability> {
    if reduced_linear.nrows() != reduced_linear.ncols() {
        return Err(Error::dims(
            "pod_spectral_stability",
            "square operator",
            format!("{}x{}", reduced_linear.nrows(), reduced_linear.ncols()),
        ));
    }
    let eig = linalg::eigen_general(reduced_linear)?;
    let mut best = 0;
    for i in 1..eig.values.len() {
        let (a, b) = (eig.values[i], eig.values[best]);
        let better = a.re > b.re + 1e-14 * (1.0 + b.re.abs())
            || ((a.re - b.re).abs() <= 1e-14 * (1.0 + b.re.abs()) && a.im.abs() > b.im.abs());
        if better {
            best = i;
        }
    }
    let lambda_star = eig.values[best];
    let mut xi = eig.vectors.column(best).into_owned();
    let norm = xi.norm();
    if norm > 0.0 {
        xi /= Complex::new(norm, 0.0);
    }
    let mc = linalg::CMatrix::from_fn(reduced_linear.nrows(), reduced_linear.ncols(), |i, j| {
        Complex::new(reduced_linear[(i, j)], 0.0)
    });
    let residual = (&mc * &xi - &xi * lambda_star).norm() / reduced_linear.norm().max(1e-300);

    let z0 = phi.matrix().transpose() * y0;
    let mut a_star = Complex::new(0.0, 0.0);
    for i in 0..z0.len() {
        a_star += xi[i] * Complex::new(z0[i], 0.0);
    }
    Ok(SpectralStability {
        lambda_star,
        a_star,
        eigvec: xi,
        residual,
    })
}

/// Closed-form spectrum of the periodic linear-wave Hamiltonian matrix K.
#[derive(Debug, Clone)]
pub struct AnalyticWaveSpectrum {
    /// β_i = −(2/Δx²)(1 − cos(2πi/n)), i = 1..n.
    pub beta: Vec<f64>,
    /// γ_i = c√(−β_i).
    pub gamma: Vec<f64>,
    /// Eigenvectors ξ_i for +ιγ_i.
    pub xi: Vec<CVector>,
    /// Eigenvectors ζ_i for −ιγ_i, with ζ_n redefined to (1/√n)[0; 1] so
    /// (ξ_n, ζ_n) carries the Jordan block [0 1; 0 0] at γ_n = 0.
    pub zeta: Vec<CVector>,
}

pub fn analytic_wave_spectrum(grid: &GridSpec, c: f64) -> Result<AnalyticWaveSpectrum> {
    let n = grid.n();
    let dx = grid.dx();
    let mut beta = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    let mut zeta = Vec::with_capacity(n);
    for i in 1..=n {
        let b =
            -(2.0 / (dx * dx)) * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos());
        let g = c * (-b).max(0.0).sqrt();
        beta.push(b);
        gamma.push(g);
        // w_i entries e^{−2πι i j / n}/√n for j = 1..n.
        let scale = 1.0 / (n as f64).sqrt();
        let w = CVector::from_fn(n, |j, _| {
            let phase = -2.0 * std::f64::consts::PI * (i as f64) * ((j + 1) as f64) / n as f64;
            Complex::new(phase.cos(), phase.sin()) * scale
        });
        let denom = (1.0 + g * g).sqrt();
        let mut xi_i = CVector::zeros(2 * n);
        let mut zeta_i = CVector::zeros(2 * n);
        for j in 0..n {
            xi_i[j] = w[j] / denom;
            xi_i[n + j] = Complex::new(0.0, g) * w[j] / denom;
            zeta_i[j] = w[j] / denom;
            zeta_i[n + j] = Complex::new(0.0, -g) * w[j] / denom;
        }
        xi.push(xi_i);
        zeta.push(zeta_i);
    }
    // Redefine ζ_n so (ξ_n, ζ_n) spans the Jordan block at the zero mode.
    let scale = 1.0 / (n as f64).sqrt();
    let mut zeta_n = CVector::zeros(2 * n);
    for j in 0..n {
        zeta_n[n + j] = Complex::new(scale, 0.0);
    }
    zeta[n - 1] = zeta_n;
    Ok(AnalyticWaveSpectrum {
        beta,
        gamma,
        xi,
        zeta,
    })
}

/// ζ_nᵀ y (bilinear): the projection of a state onto the unstable Jordan
/// mode; vanishes for any initial condition with zero momentum.
pub fn jordan_mode_coefficient(spectrum: &AnalyticWaveSpectrum, y: &DVector<f64>) -> Complex<f64> {
    let zeta_n = &spectrum.zeta[spectrum.zeta.len() - 1];
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..y.len() {
        acc += zeta_n[i] * Complex::new(y[i], 0.0);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_linear_wave, spline_bump_initial, BoundaryCondition};

    fn traj(times: &[f64], vals: &[&[f64]]) -> Trajectory {
        Trajectory {
            times: times.to_vec(),
            states: vals.iter().map(|v| DVector::from_column_slice(v)).collect(),
            stride: 1,
        }
    }

    #[test]
    fn identical_series_zero_error() {
        let t = traj(&[0.0, 0.5, 1.0], &[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let d = error_series(&t, &t.times, &t.states, ErrorNorm::FullState, 1).unwrap();
        assert!(d.instant_error.iter().all(|e| *e == 0.0));
        assert_eq!(d.total_error, 0.0);
        assert!(!d.truncated && !d.resampled);
    }

    #[test]
    fn constant_offset_total_error_closed_form() {
        // Offset c in one coordinate over [0, T]: total = c√T with the left
        // Riemann sum.
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.4).collect();
        let ref_states: Vec<DVector<f64>> = times.iter().map(|_| DVector::zeros(2)).collect();
        let reference = Trajectory {
            times: times.clone(),
            states: ref_states,
            stride: 1,
        };
        let c = 0.3;
        let approx: Vec<DVector<f64>> = times
            .iter()
            .map(|_| DVector::from_vec(vec![c, 0.0]))
            .collect();
        let d = error_series(&reference, &times, &approx, ErrorNorm::FullState, 1).unwrap();
        let t_final: f64 = 4.0;
        assert!((d.total_error - c * t_final.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn total_error_scales_linearly() {
        let times: Vec<f64> = (0..=5).map(|i| i as f64).collect();
        let reference = Trajectory {
            times: times.clone(),
            states: times.iter().map(|_| DVector::zeros(2)).collect(),
            stride: 1,
        };
        let mk = |s: f64| -> Vec<DVector<f64>> {
            times
                .iter()
                .enumerate()
                .map(|(i, _)| DVector::from_vec(vec![s * (i as f64 + 1.0), 0.0]))
                .collect()
        };
        let d1 = error_series(&reference, &times, &mk(1.0), ErrorNorm::FullState, 1).unwrap();
        let d3 = error_series(&reference, &times, &mk(3.0), ErrorNorm::FullState, 1).unwrap();
        assert!((d3.total_error - 3.0 * d1.total_error).abs() < 1e-12);
    }

    #[test]
    fn truncated_series_is_infinite() {
        let t = traj(&[0.0, 1.0, 2.0], &[&[0.0], &[0.0], &[0.0]]);
        let approx = vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![1.0])];
        let d = error_series(&t, &[0.0, 1.0], &approx, ErrorNorm::FullState, 0).unwrap();
        assert!(d.truncated);
        assert!(d.total_error.is_infinite());
    }

    #[test]
    fn misaligned_grid_errors_out() {
        let t = traj(&[0.0, 1.0], &[&[0.0], &[0.0]]);
        let approx = vec![DVector::from_vec(vec![0.0])];
        assert!(error_series(&t, &[5.0], &approx, ErrorNorm::FullState, 0).is_err());
    }

    #[test]
    fn q_only_norm_ignores_momentum() {
        let t = traj(&[0.0, 1.0], &[&[0.0, 0.0], &[0.0, 0.0]]);
        let approx = vec![
            DVector::from_vec(vec![0.0, 9.0]),
            DVector::from_vec(vec![0.0, 9.0]),
        ];
        let d = error_series(&t, &t.times, &approx, ErrorNorm::QOnly, 1).unwrap();
        assert!(d.instant_error.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn skew_operator_has_zero_max_real_part() {
        let op = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let phi = OrthonormalBasis::validate(DMatrix::identity(2, 2), 1e-12).unwrap();
        let s = pod_spectral_stability(&op, &y0, &phi).unwrap();
        assert!(s.lambda_star.re.abs() < 1e-12);
        assert!(s.residual < 1e-10);
        assert!((s.eigvec.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_spectrum_matches_numerical_eigendecomposition() {
        let grid = GridSpec::new(8, 1.0).unwrap();
        let c = 0.3;
        let sys = build_linear_wave(grid, c, BoundaryCondition::Periodic).unwrap();
        let spec = analytic_wave_spectrum(&grid, c).unwrap();

        // β_n = 0 at the constant mode (Jordan block).
        assert!(spec.beta[7].abs() < 1e-9);
        assert!(spec.gamma[7].abs() < 1e-9);

        // K ξ_i = ιγ_i ξ_i within 1e−8 (residual oracle).
        let d = sys.dim();
        let mut col = vec![0.0; d];
        let mut out = vec![0.0; d];
        for i in 0..8 {
            let xi = &spec.xi[i];
            let lam = Complex::new(0.0, spec.gamma[i]);
            // Apply real K to real and imaginary parts separately.
            let mut k_xi = CVector::zeros(d);
            for part in 0..2 {
                for j in 0..d {
                    col[j] = if part == 0 { xi[j].re } else { xi[j].im };
                }
                sys.k_action(&col, &mut out);
                for j in 0..d {
                    if part == 0 {
                        k_xi[j] += Complex::new(out[j], 0.0);
                    } else {
                        k_xi[j] += Complex::new(0.0, out[j]);
                    }
                }
            }
            let resid = (&k_xi - xi * lam).norm();
            assert!(resid < 1e-8, "mode {i}: residual {resid}");
        }
    }

    #[test]
    fn jordan_mode_not_excited_by_spline_initial_condition() {
        let grid = GridSpec::new(500, 1.0).unwrap();
        let spec = analytic_wave_spectrum(&grid, 0.1).unwrap();
        let y0 = spline_bump_initial(&grid);
        let coeff = jordan_mode_coefficient(&spec, &y0);
        assert!(coeff.norm() < 1e-14, "ζ_nᵀy₀ = {coeff}");
    }

    #[test]
    fn nested_pod_operator_norms_nondecreasing() {
        // Φ_{k1}ᵀKΦ_{k1} is a submatrix of Φ_{k2}ᵀKΦ_{k2} for nested POD
        // bases, so the spectral norms are nondecreasing in k.
        let grid = GridSpec::new(48, 1.0).unwrap();
        let sys = build_linear_wave(grid, 0.1, BoundaryCondition::Periodic).unwrap();
        let y0 = spline_bump_initial(sys.grid());
        let spec = crate::integrators::IntegratorSpec::midpoint(0.02);
        let traj = {
            let mut stepper = crate::integrators::wave_stepper(&sys, &spec).unwrap();
            crate::integrators::integrate(stepper.as_mut(), &y0, 800, 20).unwrap()
        };
        let ens = crate::snapshots::SnapshotEnsemble::from_trajectory(&traj).unwrap();
        let svd = crate::linalg::thin_svd(&ens.states).unwrap();
        let sys = std::sync::Arc::new(sys);
        let mut prev = 0.0;
        for k in [4usize, 8, 12, 16] {
            let phi = crate::psd::pod_from_svd(&svd, k).unwrap();
            let model = crate::reduction::pod_galerkin(&sys, &phi, 1.0).unwrap();
            let norm = crate::linalg::thin_svd(model.reduced_linear()).unwrap().singular_values[0];
            assert!(norm >= prev - 1e-10, "k={k}: {norm} < {prev}");
            prev = norm;
        }
    }

    #[test]
    fn energy_series_constant_for_conserved_flow() {
        let grid = GridSpec::new(32, 1.0).unwrap();
        let sys = build_linear_wave(grid, 0.1, BoundaryCondition::Periodic).unwrap();
        let y0 = spline_bump_initial(sys.grid());
        let spec = crate::integrators::IntegratorSpec::midpoint(0.01);
        let traj = {
            let mut stepper = crate::integrators::wave_stepper(&sys, &spec).unwrap();
            crate::integrators::integrate(stepper.as_mut(), &y0, 500, 100).unwrap()
        };
        let series = energy_series_full(&sys, &traj);
        let e0 = series[0];
        assert!(series
            .iter()
            .all(|e| (e - e0).abs() <= 1e-10 * (1.0 + e0.abs())));
    }
}
