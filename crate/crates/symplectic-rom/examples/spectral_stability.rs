//! Why POD blows up on the linear wave: the reduced operator picks up an
//! eigenvalue with positive real part that the initial condition excites,
//! while the analytic spectrum of K itself is purely imaginary (plus one
//! Jordan block the initial data never touches).

use std::sync::Arc;
use symplectic_rom::diagnostics::{
    analytic_wave_spectrum, jordan_mode_coefficient, pod_spectral_stability,
};
use symplectic_rom::integrators::{integrate, wave_stepper, IntegratorSpec};
use symplectic_rom::models::{build_linear_wave, spline_bump_initial, BoundaryCondition, GridSpec};
use symplectic_rom::psd::pod_basis;
use symplectic_rom::reduction::pod_galerkin;
use symplectic_rom::snapshots::SnapshotEnsemble;

fn main() {
    let grid = GridSpec::new(200, 1.0).unwrap();
    let c = 0.1;
    let system = Arc::new(build_linear_wave(grid, c, BoundaryCondition::Periodic).unwrap());
    let y0 = spline_bump_initial(system.grid());

    // Analytic spectrum of K: β_i, γ_i, and the Jordan mode ζ_n.
    let spectrum = analytic_wave_spectrum(&grid, c).unwrap();
    println!(
        "β_n = {:.3e}, γ_n = {:.3e} (zero mode -> Jordan block)",
        spectrum.beta[199], spectrum.gamma[199]
    );
    println!(
        "ζ_nᵀ y₀ = {:.3e} (the unstable mode is not excited)",
        jordan_mode_coefficient(&spectrum, &y0).norm()
    );

    // POD reduced operator: λ* with positive real part, a* ≠ 0.
    let spec = IntegratorSpec::midpoint(0.01);
    let traj = {
        let mut stepper = wave_stepper(&system, &spec).unwrap();
        integrate(stepper.as_mut(), &y0, 5000, 50).unwrap()
    };
    let ensemble = SnapshotEnsemble::from_trajectory(&traj).unwrap();
    let gamma = 0.01;
    let weighted = ensemble.assemble_weighted(gamma).unwrap();
    for k in [10usize, 20, 40] {
        let (phi, _) = pod_basis(&weighted.states, k).unwrap();
        let model = pod_galerkin(&system, &phi, gamma).unwrap();
        let s = pod_spectral_stability(model.reduced_linear(), &y0, &phi).unwrap();
        println!(
            "k={k:2}: λ* = {:+.4} {:+.4}i, |a*| = {:.4}, eig residual {:.1e}",
            s.lambda_star.re,
            s.lambda_star.im,
            s.a_star.norm(),
            s.residual
        );
    }
}
