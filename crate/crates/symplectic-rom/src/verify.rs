//! Randomized cross-module invariant suite behind the `verify` subcommand.
//!
//! Each property draws small random instances from a seeded generator and
//! reports its worst residual; the suite passes only if every property
//! passes. The lemma checks mirror the identities the reduction machinery
//! relies on; the remaining checks cross-validate construction paths
//! against independent oracles.

use nalgebra::{Complex, DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::deim::{deim_reconstruct, greedy_indices};
use crate::linalg::CMatrix;
use crate::psd::{complex_svd_basis, cotangent_lift, structure_map};
use crate::snapshots::SnapshotEnsemble;
use crate::symplectic::{j_mul_mat, symplectic_inverse, symplecticity_residual, SymplecticBasis};

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: &'static str,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyResult {
    fn new(name: &'static str, trials: usize, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            trials,
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<38} residual {:.3e} (tol {:.1e}, {} trials)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual,
            self.tolerance,
            self.trials
        )
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_complex_stiefel(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, k, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    g.qr().q()
}

fn random_ensemble(rng: &mut ChaCha8Rng, n: usize, cols: usize) -> SnapshotEnsemble {
    SnapshotEnsemble {
        times: (0..cols).map(|i| i as f64).collect(),
        states: random_matrix(rng, 2 * n, cols),
        nonlinear: None,
        gamma: 1.0,
    }
}

/// A random orthonormal symplectic basis (alternates between the two PSD
/// construction paths).
fn random_ortho_symplectic(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    flavor: bool,
) -> SymplecticBasis {
    let ens = random_ensemble(rng, n, 2 * n.max(k));
    if flavor {
        cotangent_lift(&ens, k, 1.0)
            .expect("random data has full rank")
            .0
    } else {
        complex_svd_basis(&ens, k, 1.0)
            .expect("random data has full rank")
            .0
    }
}

/// Lemma: (A⁺)⁺ = A, (((A⁺)ᵀ)⁺)ᵀ = A, and A⁺J₂ₙ = J₂ₖAᵀ for arbitrary
/// even-dimensioned A.
fn lemma_symplectic_inverse_identities(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(2..6);
        let k = rng.gen_range(1..=n);
        let a = random_matrix(rng, 2 * n, 2 * k);
        let scale = a.norm();
        let plus = symplectic_inverse(&a).unwrap();

        let r1 = (&symplectic_inverse(&plus).unwrap() - &a).norm() / scale;
        let r2 = {
            let inner = symplectic_inverse(&plus.transpose()).unwrap();
            (inner.transpose() - &a).norm() / scale
        };
        let r3 = {
            // A⁺J₂ₙ vs J₂ₖAᵀ.
            let lhs = -j_mul_mat(&plus.transpose()).transpose(); // (J₂ₙᵀ(A⁺)ᵀ)ᵀ = A⁺J₂ₙ
            let rhs = j_mul_mat(&a).transpose(); // (J₂ₙ... careful below
                                                 // Compute both sides directly instead: lhs = A⁺ J₂ₙ.
            let j2n = {
                let mut j = DMatrix::zeros(2 * n, 2 * n);
                for i in 0..n {
                    j[(i, n + i)] = 1.0;
                    j[(n + i, i)] = -1.0;
                }
                j
            };
            let j2k = {
                let mut j = DMatrix::zeros(2 * k, 2 * k);
                for i in 0..k {
                    j[(i, k + i)] = 1.0;
                    j[(k + i, i)] = -1.0;
                }
                j
            };
            let _ = (lhs, rhs);
            (&plus * j2n - j2k * a.transpose()).norm() / scale
        };
        worst = worst.max(r1).max(r2).max(r3);
    }
    PropertyResult::new("lemma_symplectic_inverse_identities", trials, worst, 1e-10)
}

/// Lemma: A symplectic ⟺ (A⁺)ᵀ symplectic ⟺ A⁺A = I; perturbed bases fail
/// all three.
fn lemma_symplectic_equivalences(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let n = rng.gen_range(2..5);
        let k = rng.gen_range(1..=n.min(3));
        let basis = random_ortho_symplectic(rng, n, k, t % 2 == 0);
        let a = basis.matrix();
        // (a) ⇒ (b).
        let plus_t = basis.sympl_inverse().transpose();
        worst = worst.max(symplecticity_residual(&plus_t));
        // (a) ⇒ (c).
        let prod = basis.sympl_inverse() * a;
        worst = worst.max((prod - DMatrix::identity(2 * k, 2 * k)).norm());
        // Violation direction: a perturbed matrix fails both (a) and (c).
        let mut bad = a.clone();
        bad[(0, 0)] += 0.01;
        let r_bad = symplecticity_residual(&bad);
        let plus_bad = symplectic_inverse(&bad).unwrap();
        let c_bad = (plus_bad * &bad - DMatrix::identity(2 * k, 2 * k)).norm();
        if r_bad < 1e-6 || c_bad < 1e-6 {
            worst = worst.max(1.0);
        }
    }
    PropertyResult::new("lemma_symplectic_equivalences", trials, worst, 1e-10)
}

/// Lemma: 𝒜 maps the complex Stiefel manifold into the symplectic block
/// forms (the comcon identities).
fn lemma_structure_map_image(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(2..6);
        let k = rng.gen_range(1..=n);
        let u = random_complex_stiefel(rng, n, k);
        let a = structure_map(&u);
        worst = worst.max(symplecticity_residual(&a));
        // ΦᵀΦ + ΨᵀΨ = I and ΦᵀΨ = ΨᵀΦ.
        let phi = DMatrix::from_fn(n, k, |i, j| u[(i, j)].re);
        let psi = DMatrix::from_fn(n, k, |i, j| u[(i, j)].im);
        let gram = phi.transpose() * &phi + psi.transpose() * &psi;
        worst = worst.max((gram - DMatrix::identity(k, k)).norm());
        let cross = phi.transpose() * &psi - psi.transpose() * &phi;
        worst = worst.max(cross.norm());
    }
    PropertyResult::new("lemma_structure_map_image", trials, worst, 1e-10)
}

/// Lemma: the image is exactly the orthonormal ∩ symplectic block forms
/// (A⁺ = Aᵀ there).
fn lemma_ortho_symplectic_isomorphism(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(2..6);
        let k = rng.gen_range(1..=n);
        let u = random_complex_stiefel(rng, n, k);
        let a = structure_map(&u);
        worst = worst.max(crate::linalg::orthonormality_residual(&a));
        let plus = symplectic_inverse(&a).unwrap();
        worst = worst.max((plus - a.transpose()).norm());
    }
    PropertyResult::new("lemma_ortho_symplectic_isomorphism", trials, worst, 1e-10)
}

/// Lemma: 𝒜(C)𝒜(D) = 𝒜(CD) and 𝒜(Cᴴ) = 𝒜(C)ᵀ.
fn lemma_structure_map_homomorphism(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (n1, n2, n3) = (
            rng.gen_range(1..5),
            rng.gen_range(1..5),
            rng.gen_range(1..5),
        );
        let c = CMatrix::from_fn(n1, n2, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let d = CMatrix::from_fn(n2, n3, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let lhs = structure_map(&c) * structure_map(&d);
        let rhs = structure_map(&(&c * &d));
        let scale = 1.0 + rhs.norm();
        worst = worst.max((lhs - rhs).norm() / scale);
        worst =
            worst.max((structure_map(&c.adjoint()) - structure_map(&c).transpose()).norm() / scale);
    }
    PropertyResult::new("lemma_structure_map_homomorphism", trials, worst, 1e-10)
}

/// Lemma-level identity behind the complex-SVD optimality statement:
/// 𝒜(M₂) = [M_x, −J₂ₙM_x], with paired singular values.
fn lemma_structure_map_snapshots(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(2..6);
        let cols = rng.gen_range(1..6);
        let ens = random_ensemble(rng, n, cols);
        let m2 = crate::psd::complex_snapshot_matrix(&ens);
        let image = structure_map(&m2);
        // [M_x, −J M_x] assembled directly.
        let mut expected = DMatrix::zeros(2 * n, 2 * cols);
        expected
            .view_mut((0, 0), (2 * n, cols))
            .copy_from(&ens.states);
        let minus_j_m = {
            let mut j = j_mul_mat(&ens.states);
            j.neg_mut();
            j
        };
        expected
            .view_mut((0, cols), (2 * n, cols))
            .copy_from(&minus_j_m);
        worst = worst.max((&image - &expected).norm() / (1.0 + expected.norm()));
        // Paired singular values.
        let sv = crate::linalg::thin_svd(&image).unwrap().singular_values;
        for pair in sv.chunks(2) {
            if pair.len() == 2 {
                worst = worst.max((pair[0] - pair[1]).abs() / (1.0 + pair[0]));
            }
        }
    }
    PropertyResult::new("lemma_structure_map_snapshots", trials, worst, 1e-10)
}

/// Constructed PSD bases are symplectic at the SVD gate.
fn psd_bases_symplectic(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let n = rng.gen_range(3..7);
        let k = rng.gen_range(1..=3.min(n));
        let basis = random_ortho_symplectic(rng, n, k, t % 2 == 0);
        worst = worst.max(basis.residual());
    }
    PropertyResult::new("psd_bases_symplectic", trials, worst, 1e-10)
}

/// Basis extension: for x₀ ∉ Range(A), A_ext = [A₁, r̂₀, A₂, Jᵀr̂₀] is symplectic
/// and reconstructs x₀.
fn basis_extension_reconstructs(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let n = rng.gen_range(3..7);
        let k = rng.gen_range(1..n.min(4));
        let basis = random_ortho_symplectic(rng, n, k, t % 2 == 0);
        let x0 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-1.0..1.0));
        let (ext, _) = basis.extend_with_state(&x0).unwrap();
        worst = worst.max(symplecticity_residual(ext.matrix()));
        let rec = ext.lift(&ext.restrict(&x0));
        worst = worst.max((rec - &x0).norm() / x0.norm());
    }
    PropertyResult::new("basis_extension_reconstructs", trials, worst, 1e-10)
}

/// Midpoint on random small stable linear Hamiltonian systems conserves the
/// quadratic energy to solver tolerance. L is drawn positive definite so the
/// flow stays bounded; hyperbolic systems grow exponentially and lose
/// relative precision in H by plain floating-point evaluation.
fn midpoint_conserves_quadratic_energy(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(1..4);
        let g = random_matrix(rng, 2 * n, 2 * n);
        let mut l = g.transpose() * &g;
        for i in 0..2 * n {
            l[(i, i)] += 0.1;
        }
        let k = j_mul_mat(&l);
        let x0 = DVector::from_fn(2 * n, |_, _| rng.gen_range(-1.0..1.0));
        let h = |x: &DVector<f64>| 0.5 * (x.transpose() * &l * x)[(0, 0)];
        let h0 = h(&x0);
        let mut stepper = crate::integrators::DenseMidpoint::new(&k, 0.05).unwrap();
        let mut x = x0.clone();
        for _ in 0..100 {
            use crate::integrators::Stepper;
            stepper.advance(&mut x).unwrap();
            worst = worst.max((h(&x) - h0).abs() / (1.0 + h0.abs()));
        }
    }
    PropertyResult::new("midpoint_conserves_quadratic_energy", trials, worst, 1e-10)
}

/// DEIM reconstruction is exact on Range(Ψ) and greedy selection is
/// deterministic.
fn deim_exactness(rng: &mut ChaCha8Rng, trials: usize) -> PropertyResult {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(6..20);
        let m = rng.gen_range(1..=5.min(n / 2));
        let psi = random_matrix(rng, n, m).qr().q();
        let idx = greedy_indices(&psi).unwrap();
        let idx2 = greedy_indices(&psi).unwrap();
        if idx.indices != idx2.indices {
            worst = worst.max(1.0);
        }
        let coeff = DVector::from_fn(m, |_, _| rng.gen_range(-2.0..2.0));
        let f = &psi * coeff;
        let rec = deim_reconstruct(&psi, &idx.indices, &f).unwrap();
        worst = worst.max((rec - &f).norm() / (1.0 + f.norm()));
    }
    PropertyResult::new("deim_exactness", trials, worst, 1e-12)
}

/// Runs the whole suite with a seeded generator.
pub fn run_all(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        lemma_symplectic_inverse_identities(&mut rng, 1000),
        lemma_symplectic_equivalences(&mut rng, 1000),
        lemma_structure_map_image(&mut rng, 1000),
        lemma_ortho_symplectic_isomorphism(&mut rng, 1000),
        lemma_structure_map_homomorphism(&mut rng, 1000),
        lemma_structure_map_snapshots(&mut rng, 1000),
        psd_bases_symplectic(&mut rng, 200),
        basis_extension_reconstructs(&mut rng, 100),
        midpoint_conserves_quadratic_energy(&mut rng, 50),
        deim_exactness(&mut rng, 1000),
    ]
}

/// `verify` subcommand: prints one line per property, errors when any fails.
pub fn cmd_verify(seed: u64) -> crate::error::Result<()> {
    let results = run_all(seed);
    let mut ok = true;
    for r in &results {
        println!("{}", r.line());
        ok &= r.passed;
    }
    if ok {
        println!(
            "verify: all {} properties passed (seed {seed})",
            results.len()
        );
        Ok(())
    } else {
        Err(crate::error::Error::Solver(
            "verification suite failed".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seed_suite_passes() {
        for r in run_all(7) {
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn verdicts_stable_across_seeds() {
        for seed in 0..10 {
            let verdicts: Vec<bool> = run_all(seed).iter().map(|r| r.passed).collect();
            assert!(
                verdicts.iter().all(|v| *v),
                "seed {seed} failed: {verdicts:?}"
            );
        }
    }
}
