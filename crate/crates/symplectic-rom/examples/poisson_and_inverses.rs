//! Structured Poisson-matrix action and symplectic inverses.
//!
//! J₂ₙ is never stored: applying it is a block swap with one negation.
//! The symplectic inverse A⁺ = J₂ₖᵀAᵀJ₂ₙ acts as a left inverse for
//! symplectic matrices and obeys the inverse identities for any matrix.

use nalgebra::DMatrix;
use symplectic_rom::symplectic::{symplectic_inverse, PoissonStructure, SymplecticBasis};

fn main() {
    let j = PoissonStructure::new(3);
    let v: Vec<f64> = (1..=6).map(|i| i as f64).collect();
    println!("v      = {v:?}");
    println!("J v    = {:?}", j.apply(&v).unwrap());
    println!(
        "J(J v) = {:?}  (= -v exactly)",
        j.apply(&j.apply(&v).unwrap()).unwrap()
    );

    // Inverse identities hold for arbitrary even-shaped matrices.
    let a = DMatrix::from_fn(6, 4, |i, k| ((i * 3 + k) as f64 * 0.7).sin());
    let plus = symplectic_inverse(&a).unwrap();
    let back = symplectic_inverse(&plus).unwrap();
    println!("\nrandom 6x4 A: ‖(A⁺)⁺ − A‖ = {:.3e}", (&back - &a).norm());

    // J₂ₙ itself is symplectic (k = n) and validates with a zero residual.
    let n = 3;
    let mut jm = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        jm[(i, n + i)] = 1.0;
        jm[(n + i, i)] = -1.0;
    }
    let basis = SymplecticBasis::validate(jm, 1e-12).unwrap();
    println!(
        "J as a basis: symplecticity residual {:.3e}",
        basis.residual()
    );
    let prod = basis.sympl_inverse() * basis.matrix();
    println!(
        "A⁺A = I residual: {:.3e}",
        (prod - DMatrix::<f64>::identity(6, 6)).norm()
    );
}
