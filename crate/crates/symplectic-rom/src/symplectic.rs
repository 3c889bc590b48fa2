//! Canonical symplectic linear algebra.
//!
//! The Poisson matrix J₂ₙ = [0 I; −I 0] is never materialized: every product
//! with J is a two-block swap-and-negate, which is O(n) and exact. A matrix
//! A ∈ ℝ^{2n×2k} with AᵀJ₂ₙA = J₂ₖ is *symplectic*; its symplectic inverse
//! A⁺ = J₂ₖᵀAᵀJ₂ₙ acts as a left inverse (A⁺A = I₂ₖ).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Default symplecticity tolerance for bases produced by an SVD.
pub const SVD_BASIS_TOL: f64 = 1e-10;
/// Symplecticity tolerance for NLP-refined bases.
pub const NLP_BASIS_TOL: f64 = 1e-8;
/// Residuals below `NOISE_FACTOR·‖x‖` are treated as "already in range"
/// when extending a basis.
pub const EXTEND_NOISE_FACTOR: f64 = 1e-12;

/// The canonical Poisson structure on ℝ^{2n}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoissonStructure {
    half_dim: usize,
}

impl PoissonStructure {
    pub fn new(half_dim: usize) -> Self {
        assert!(half_dim > 0, "half dimension must be positive");
        Self { half_dim }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    /// J v = [v_p; −v_q] without forming J.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.apply_to(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_to(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.half_dim;
        if v.len() != 2 * n || out.len() != 2 * n {
            return Err(Error::dims("poisson_apply", 2 * n, v.len()));
        }
        for i in 0..n {
            out[i] = v[n + i];
            out[n + i] = -v[i];
        }
        Ok(())
    }

    /// Jᵀ v = −J v = [−v_p; v_q].
    pub fn apply_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.apply(v)?;
        out.iter_mut().for_each(|x| *x = -*x);
        Ok(out)
    }
}

/// J M for a matrix with 2n rows: swaps the row blocks and negates the lower.
pub fn j_mul_mat(m: &DMatrix<f64>) -> DMatrix<f64> {
    let two_n = m.nrows();
    assert!(two_n % 2 == 0, "J needs an even row count");
    let n = two_n / 2;
    let mut out = DMatrix::zeros(two_n, m.ncols());
    for j in 0..m.ncols() {
        for i in 0..n {
            out[(i, j)] = m[(n + i, j)];
            out[(n + i, j)] = -m[(i, j)];
        }
    }
    out
}

/// Jᵀ M = −(J M).
pub fn jt_mul_mat(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = j_mul_mat(m);
    out.neg_mut();
    out
}

/// The symplectic inverse A⁺ = J₂ₖᵀ Aᵀ J₂ₙ, computed with two structured J
/// applications and one transpose.
pub fn symplectic_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() % 2 != 0 || a.ncols() % 2 != 0 {
        return Err(Error::dims(
            "symplectic_inverse",
            "even row and column counts",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    // A⁺ = J₂ₖᵀ Aᵀ J₂ₙ = (J₂ₙᵀ A J₂ₖ)ᵀ; evaluate as Jᵀ_{2k} (J_{2n}ᵀ A)ᵀ‥
    // simplest structured form: A⁺ = Jᵀ_{2k} (A ᵀ applied after J_{2n}):
    let ja = jt_mul_mat(a); // J₂ₙᵀ A  (2n×2k)
                            // (J₂ₙᵀA)ᵀ = Aᵀ J₂ₙ  (2k×2n)
    let at_j = ja.transpose();
    // J₂ₖᵀ (Aᵀ J₂ₙ)
    Ok(jt_mul_mat(&at_j))
}

/// Frobenius residual ‖AᵀJ₂ₙA − J₂ₖ‖_F.
pub fn symplecticity_residual(a: &DMatrix<f64>) -> f64 {
    let ja = j_mul_mat(a);
    let mut g = a.transpose() * ja; // AᵀJA
    let two_k = a.ncols();
    let k = two_k / 2;
    for i in 0..k {
        g[(i, k + i)] -= 1.0;
        g[(k + i, i)] += 1.0;
    }
    g.norm()
}

/// Outcome of [`SymplecticBasis::extend_with_state`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendOutcome {
    /// The state was already in the range of the basis; basis returned unchanged.
    AlreadyInRange,
    /// Two columns [r̂₀, J₂ₙᵀr̂₀] were appended.
    Extended,
}

/// A validated symplectic basis matrix with its cached symplectic inverse.
#[derive(Debug, Clone)]
pub struct SymplecticBasis {
    matrix: DMatrix<f64>,
    sympl_inverse: DMatrix<f64>,
    tolerance: f64,
    residual: f64,
}

impl SymplecticBasis {
    /// Validates `‖AᵀJA − J₂ₖ‖_F ≤ tol` and caches A⁺. Out-of-tolerance input
    /// is a typed failure carrying the residual, never a panic.
    pub fn validate(matrix: DMatrix<f64>, tolerance: f64) -> Result<Self> {
        if tolerance < 0.0 {
            return Err(Error::Domain("tolerance must be nonnegative".into()));
        }
        if matrix.nrows() % 2 != 0 || matrix.ncols() % 2 != 0 {
            return Err(Error::dims(
                "check_symplectic",
                "even dimensions",
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        if matrix.ncols() > matrix.nrows() {
            return Err(Error::dims(
                "check_symplectic",
                "2k <= 2n",
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        let residual = symplecticity_residual(&matrix);
        if !(residual <= tolerance) {
            return Err(Error::NotSymplectic {
                residual,
                tolerance,
            });
        }
        let sympl_inverse = symplectic_inverse(&matrix)?;
        Ok(Self {
            matrix,
            sympl_inverse,
            tolerance,
            residual,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Cached A⁺ = J₂ₖᵀAᵀJ₂ₙ.
    pub fn sympl_inverse(&self) -> &DMatrix<f64> {
        &self.sympl_inverse
    }

    pub fn half_dim_full(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn half_dim_reduced(&self) -> usize {
        self.matrix.ncols() / 2
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Measured ‖AᵀJA − J₂ₖ‖_F at validation time.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// x̂ = A z.
    pub fn lift(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.matrix * z
    }

    /// z = A⁺ x.
    pub fn restrict(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.sympl_inverse * x
    }

    /// Energy-preserving extension: appends the normalized
    /// projection residual r̂₀ of `x0` and Jᵀr̂₀, splitting columns so the
    /// result keeps the [q-block | p-block] layout.
    ///
    /// Well-defined for bases that are also orthonormal (every SVD-built PSD
    /// basis is); the output is re-validated, so a non-orthonormal input that
    /// breaks the construction surfaces as `NotSymplectic`.
    pub fn extend_with_state(&self, x0: &DVector<f64>) -> Result<(Self, ExtendOutcome)> {
        let two_n = self.matrix.nrows();
        if x0.len() != two_n {
            return Err(Error::dims("extend_basis_with_state", two_n, x0.len()));
        }
        let z = self.restrict(x0);
        let proj = self.lift(&z);
        let r0 = x0 - proj;
        let r0_norm = r0.norm();
        if r0_norm <= EXTEND_NOISE_FACTOR * x0.norm() {
            return Ok((self.clone(), ExtendOutcome::AlreadyInRange));
        }
        let r_hat = r0 / r0_norm;
        let n = two_n / 2;
        let k = self.half_dim_reduced();
        let mut jt_r = DVector::zeros(two_n);
        for i in 0..n {
            jt_r[i] = -r_hat[n + i];
            jt_r[n + i] = r_hat[i];
        }
        let mut ext = DMatrix::zeros(two_n, 2 * k + 2);
        ext.view_mut((0, 0), (two_n, k))
            .copy_from(&self.matrix.columns(0, k));
        ext.set_column(k, &r_hat);
        ext.view_mut((0, k + 1), (two_n, k))
            .copy_from(&self.matrix.columns(k, k));
        ext.set_column(2 * k + 1, &jt_r);
        let extended = Self::validate(ext, self.tolerance)?;
        Ok((extended, ExtendOutcome::Extended))
    }
}

/// A matrix with orthonormal columns (POD basis).
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    matrix: DMatrix<f64>,
    tolerance: f64,
    residual: f64,
}

impl OrthonormalBasis {
    pub fn validate(matrix: DMatrix<f64>, tolerance: f64) -> Result<Self> {
        let residual = linalg::orthonormality_residual(&matrix);
        if !(residual <= tolerance) {
            return Err(Error::NotOrthonormal {
                residual,
                tolerance,
            });
        }
        Ok(Self {
            matrix,
            tolerance,
            residual,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0x5eed)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn poisson_apply_small_cases() {
        let j2 = PoissonStructure::new(1);
        assert_eq!(j2.apply(&[3.0, 5.0]).unwrap(), vec![5.0, -3.0]);

        let j4 = PoissonStructure::new(2);
        assert_eq!(
            j4.apply(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![3.0, 4.0, -1.0, -2.0]
        );

        let j = PoissonStructure::new(5);
        let v: Vec<f64> = (0..10).map(|i| (i as f64 * 0.71).sin()).collect();
        let twice = j.apply(&j.apply(&v).unwrap()).unwrap();
        for i in 0..10 {
            assert_eq!(twice[i], -v[i]); // exact: only swaps and negations
        }
        let back = j.apply_transpose(&j.apply(&v).unwrap()).unwrap();
        for i in 0..10 {
            assert_eq!(back[i], v[i]);
        }
    }

    #[test]
    fn poisson_apply_rejects_bad_length() {
        let j = PoissonStructure::new(3);
        assert!(j.apply(&[1.0; 5]).is_err());
    }

    #[test]
    fn symplectic_inverse_identity() {
        let a = DMatrix::<f64>::identity(6, 6);
        let plus = symplectic_inverse(&a).unwrap();
        assert_eq!(plus, DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn symplectic_inverse_block_diag_orthonormal_is_transpose() {
        // A = diag(Φ,Φ) with orthonormal Φ gives A⁺ = Aᵀ.
        let phi = DMatrix::from_column_slice(3, 1, &[2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]);
        let mut a = DMatrix::zeros(6, 2);
        a.view_mut((0, 0), (3, 1)).copy_from(&phi);
        a.view_mut((3, 1), (3, 1)).copy_from(&phi);
        let plus = symplectic_inverse(&a).unwrap();
        assert!((plus - a.transpose()).norm() < 1e-15);
    }

    #[test]
    fn symplectic_inverse_is_involutive() {
        // (A⁺)⁺ = A for any even-dimensioned A (Lemma identity, direct recomputation).
        let mut r = rng();
        let a = random_matrix(&mut r, 6, 4);
        let back = symplectic_inverse(&symplectic_inverse(&a).unwrap()).unwrap();
        assert!((&back - &a).norm() < 1e-14);
    }

    #[test]
    fn symplectic_inverse_rejects_odd_dims() {
        let a = DMatrix::<f64>::zeros(5, 4);
        assert!(symplectic_inverse(&a).is_err());
        let a = DMatrix::<f64>::zeros(6, 3);
        assert!(symplectic_inverse(&a).is_err());
    }

    #[test]
    fn check_symplectic_accepts_j() {
        // A = J₂ₙ (k = n) satisfies JᵀJJ = J.
        let n = 3;
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = -1.0;
        }
        let basis = SymplecticBasis::validate(j, 1e-12).unwrap();
        assert!(basis.residual() <= 1e-12);
        // A⁺A = I within tolerance (Lemma 3.2(c)).
        let prod = basis.sympl_inverse() * basis.matrix();
        assert!((prod - DMatrix::identity(2 * n, 2 * n)).norm() < 1e-14);
    }

    #[test]
    fn check_symplectic_rejects_identity_slab() {
        // First 2k columns of I₂ₙ with k < n: AᵀJA has zero blocks where J₂ₖ
        // needs ±I.
        let a = DMatrix::<f64>::identity(8, 4);
        let err = SymplecticBasis::validate(a, 1e-10).unwrap_err();
        match err {
            Error::NotSymplectic { residual, .. } => assert!(residual > 1.0),
            other => panic!("expected NotSymplectic, got {other}"),
        }
    }

    #[test]
    fn extend_noop_when_in_range() {
        let phi = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let mut a = DMatrix::zeros(4, 2);
        a.view_mut((0, 0), (2, 1)).copy_from(&phi);
        a.view_mut((2, 1), (2, 1)).copy_from(&phi);
        let basis = SymplecticBasis::validate(a, 1e-12).unwrap();
        let x0 = DVector::from_vec(vec![2.0, 0.0, -1.0, 0.0]); // in Range(A)
        let (ext, outcome) = basis.extend_with_state(&x0).unwrap();
        assert_eq!(outcome, ExtendOutcome::AlreadyInRange);
        assert_eq!(ext.matrix().ncols(), 2);
    }

    #[test]
    fn extend_hand_example() {
        // n = 2, A = diag(e₁,e₁), x0 = e₂: the new columns are e₂ and J₄ᵀe₂ = e₄.
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let mut a = DMatrix::zeros(4, 2);
        a.view_mut((0, 0), (2, 1)).copy_from(&e1);
        a.view_mut((2, 1), (2, 1)).copy_from(&e1);
        let basis = SymplecticBasis::validate(a, 1e-12).unwrap();
        let x0 = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        let (ext, outcome) = basis.extend_with_state(&x0).unwrap();
        assert_eq!(outcome, ExtendOutcome::Extended);
        let m = ext.matrix();
        assert_eq!(m.ncols(), 4);
        // Column order: [A₁, r̂₀, A₂, Jᵀr̂₀].
        assert_eq!(m.column(1).as_slice(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(m.column(3).as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        // Reconstructs x0 exactly.
        let rec = ext.lift(&ext.restrict(&x0));
        assert!((rec - x0).norm() < 1e-14);
    }
}
