//! POD instability vs symplectic stability on the periodic linear wave — a
//! scaled-down version of the benchmark experiment.

use std::sync::Arc;
use symplectic_rom::integrators::{integrate, wave_stepper, IntegratorSpec};
use symplectic_rom::models::{build_linear_wave, spline_bump_initial, BoundaryCondition, GridSpec};
use symplectic_rom::psd::{cotangent_lift, pod_basis};
use symplectic_rom::reduction::{
    integrate_guarded, pod_galerkin, reduced_stepper, symplectic_galerkin_linear,
};
use symplectic_rom::snapshots::SnapshotEnsemble;

fn main() {
    let grid = GridSpec::new(250, 1.0).unwrap();
    let system = Arc::new(build_linear_wave(grid, 0.1, BoundaryCondition::Periodic).unwrap());
    let y0 = spline_bump_initial(system.grid());
    let spec = IntegratorSpec::midpoint(0.01);
    let steps = 5000; // T = 50
    let stride = 50;
    let reference = {
        let mut stepper = wave_stepper(&system, &spec).unwrap();
        integrate(stepper.as_mut(), &y0, steps, stride).unwrap()
    };
    let ensemble = SnapshotEnsemble::from_trajectory(&reference).unwrap();
    let gamma = 0.01; // γ = δt weighting
    let weighted = ensemble.assemble_weighted(gamma).unwrap();
    let e0 = system.energy(y0.as_slice());
    println!("full model: E0 = {e0:.6}, {} snapshots", reference.len());

    let k = 20;
    // POD-Galerkin baseline.
    let (phi, _) = pod_basis(&weighted.states, k).unwrap();
    let pod = pod_galerkin(&system, &phi, gamma).unwrap();
    let z0 = pod.restrict_state(&y0).unwrap();
    let run = {
        let mut stepper = reduced_stepper(&pod, &spec).unwrap();
        integrate_guarded(stepper.as_mut(), &z0, steps, stride)
    };
    let max_e = run
        .trajectory
        .states
        .iter()
        .map(|z| pod.energy(z).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    match run.blowup {
        Some(b) => println!(
            "pod k={k}: blows up at t = {:.2} (max E/E0 = {:.2e})",
            b.time,
            max_e / e0
        ),
        None => println!("pod k={k}: bounded (max E/E0 = {:.2e})", max_e / e0),
    }

    // Cotangent-lift symplectic reduction.
    let (basis, _) = cotangent_lift(&ensemble, k, gamma).unwrap();
    let psd = symplectic_galerkin_linear(&system, &basis, gamma).unwrap();
    let z0 = psd.restrict_state(&y0).unwrap();
    let run = {
        let mut stepper = reduced_stepper(&psd, &spec).unwrap();
        integrate_guarded(stepper.as_mut(), &z0, steps, stride)
    };
    let e_start = psd.energy(&run.trajectory.states[0]).unwrap();
    let drift = run
        .trajectory
        .states
        .iter()
        .map(|z| (psd.energy(z).unwrap() - e_start).abs() / e_start)
        .fold(0.0f64, f64::max);
    println!(
        "cotangent k={k}: blowup = {:?}, relative energy drift = {drift:.2e}",
        run.blowup.as_ref().map(|b| b.time)
    );
}
