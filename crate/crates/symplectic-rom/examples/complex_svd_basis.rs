//! Complex SVD basis: A₂ = [Φ, −Ψ; Ψ, Φ] from the SVD of q + ιp, which is
//! symplectic and orthonormal at once, and the structure map 𝒜 that makes
//! the construction work.

use nalgebra::Complex;
use symplectic_rom::linalg::{orthonormality_residual, CMatrix};
use symplectic_rom::psd::{complex_svd_basis, structure_map};
use symplectic_rom::snapshots::SnapshotEnsemble;

fn main() {
    // Synthetic snapshots.
    let n = 40;
    let cols = 25;
    let states = nalgebra::DMatrix::from_fn(2 * n, cols, |i, j| {
        let (x, t) = (i as f64 * 0.23, j as f64 * 0.71);
        (x * (1.0 + 0.3 * t).sin()).sin() + 0.2 * (x * x * 0.01 + t).cos()
    });
    let ensemble = SnapshotEnsemble {
        times: (0..cols).map(|i| i as f64).collect(),
        states,
        nonlinear: None,
        gamma: 1.0,
    };

    let (basis, spectrum) = complex_svd_basis(&ensemble, 6, 1.0).unwrap();
    println!(
        "A₂ is 2n×2k = {}x{}",
        basis.matrix().nrows(),
        basis.matrix().ncols()
    );
    println!("symplecticity residual: {:.3e}", basis.residual());
    println!(
        "orthonormality residual: {:.3e}",
        orthonormality_residual(basis.matrix())
    );
    println!(
        "A₂⁺ = A₂ᵀ residual: {:.3e}",
        (basis.sympl_inverse() - basis.matrix().transpose()).norm()
    );
    println!(
        "leading singular values: {:?}",
        &spectrum.values[..6.min(spectrum.values.len())]
    );

    // The structure map is an algebra homomorphism: 𝒜(C)𝒜(D) = 𝒜(CD).
    let c = CMatrix::from_fn(3, 2, |i, j| Complex::new(i as f64 + 0.3, j as f64 - 0.7));
    let d = CMatrix::from_fn(2, 4, |i, j| {
        Complex::new((i + j) as f64 * 0.2, 0.4 - i as f64)
    });
    let gap = (structure_map(&c) * structure_map(&d) - structure_map(&(&c * &d))).norm();
    println!("homomorphism gap ‖𝒜(C)𝒜(D) − 𝒜(CD)‖ = {gap:.3e}");
}
