//! Greedy interpolation indices and DEIM exactness on the basis range.

use nalgebra::{DMatrix, DVector};
use symplectic_rom::deim::{deim_reconstruct, greedy_indices};

fn main() {
    // The worked two-column case: β = (1, 2) in 1-based terms.
    let psi = DMatrix::from_column_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
    let idx = greedy_indices(&psi).unwrap();
    println!(
        "hand example indices (1-based): {:?}",
        idx.indices.iter().map(|i| i + 1).collect::<Vec<_>>()
    );

    // A smooth basis on 200 points.
    let n = 200;
    let m = 8;
    let raw = DMatrix::from_fn(n, m, |i, j| {
        let x = i as f64 / n as f64;
        (std::f64::consts::PI * (j + 1) as f64 * x).sin() * (-x * (j as f64 + 1.0)).exp()
    });
    let psi = raw.qr().q();
    let idx = greedy_indices(&psi).unwrap();
    println!(
        "selected rows (1-based): {:?}",
        idx.indices.iter().map(|i| i + 1).collect::<Vec<_>>()
    );

    // Any vector in Range(Ψ) is reproduced exactly; one outside is not.
    let coeff = DVector::from_fn(m, |i, _| (i as f64 + 1.0) * 0.3);
    let inside = &psi * &coeff;
    let rec = deim_reconstruct(&psi, &idx.indices, &inside).unwrap();
    println!(
        "in-range reconstruction error:  {:.3e}",
        (rec - &inside).norm()
    );

    let outside = DVector::from_fn(n, |i, _| ((i * i) as f64 * 0.017).sin());
    let rec = deim_reconstruct(&psi, &idx.indices, &outside).unwrap();
    println!(
        "out-of-range reconstruction error: {:.3e}",
        (rec - &outside).norm()
    );
}
