//! Dense decomposition kernels and banded solvers.
//!
//! Large SVD/eigen work is delegated to `faer`; everything that crosses a
//! public API boundary is expressed in `nalgebra` types. Snapshot matrices
//! stay well under 10^4 on a side, so copies between the two layouts are
//! not a concern.

use faer::prelude::*;
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex<f64>>;
pub type CVector = DVector<Complex<f64>>;

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn to_faer_c(m: &CMatrix) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        c64::new(m[(i, j)].re, m[(i, j)].im)
    })
}

/// Thin SVD returning only what basis construction needs: the left singular
/// vectors and the singular values (nonincreasing).
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

pub fn thin_svd(m: &DMatrix<f64>) -> Result<ThinSvd> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("real SVD: {e:?}")))?;
    let rank = m.nrows().min(m.ncols());
    let fu = svd.U();
    let u = DMatrix::from_fn(m.nrows(), rank, |i, j| fu[(i, j)]);
    let s = svd.S();
    let singular_values = (0..rank).map(|i| s[i]).collect();
    Ok(ThinSvd { u, singular_values })
}

/// Thin SVD of a complex matrix; returns left singular vectors and values.
pub struct ThinSvdComplex {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
}

pub fn thin_svd_complex(m: &CMatrix) -> Result<ThinSvdComplex> {
    let svd = to_faer_c(m)
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("complex SVD: {e:?}")))?;
    let rank = m.nrows().min(m.ncols());
    let fu = svd.U();
    let u = CMatrix::from_fn(m.nrows(), rank, |i, j| {
        Complex::new(fu[(i, j)].re, fu[(i, j)].im)
    });
    let s = svd.S();
    let singular_values = (0..rank).map(|i| s[i].re).collect();
    Ok(ThinSvdComplex { u, singular_values })
}

/// Eigenvalues and right eigenvectors of a general real square matrix.
pub struct Eigen {
    pub values: Vec<Complex<f64>>,
    /// Column j is the eigenvector for `values[j]`.
    pub vectors: CMatrix,
}

pub fn eigen_general(m: &DMatrix<f64>) -> Result<Eigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims(
            "eigen_general",
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let evd = to_faer(m)
        .eigen()
        .map_err(|e| Error::Decomposition(format!("eigendecomposition: {e:?}")))?;
    let n = m.nrows();
    let s = evd.S();
    let u = evd.U();
    let values = (0..n).map(|i| Complex::new(s[i].re, s[i].im)).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| Complex::new(u[(i, j)].re, u[(i, j)].im));
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only, for stability scans.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    Ok(eigen_general(m)?.values)
}

/// Solves a tridiagonal system in place via the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (lower[0] unused), `diag[i]`
/// multiplies `x[i]`, `upper[i]` multiplies `x[i+1]` (upper[n-1] unused).
/// Requires diagonal dominance; every matrix solved here is an
/// identity-plus-small-stencil and satisfies it.
pub fn solve_tridiag(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Result<()> {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut d0 = diag[0];
    if d0 == 0.0 {
        return Err(Error::Solver("tridiagonal pivot is zero".into()));
    }
    scratch[0] = upper[0] / d0;
    rhs[0] /= d0;
    for i in 1..n {
        let m = diag[i] - lower[i] * scratch[i - 1];
        if m == 0.0 {
            return Err(Error::Solver("tridiagonal pivot is zero".into()));
        }
        if i < n - 1 {
            scratch[i] = upper[i] / m;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / m;
        d0 = m;
    }
    let _ = d0;
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}

/// Solves a cyclic tridiagonal system (corner entries `corner_tr` at (0, n-1)
/// and `corner_bl` at (n-1, 0)) with the Sherman–Morrison correction.
pub fn solve_cyclic_tridiag(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    corner_tr: f64,
    corner_bl: f64,
    rhs: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::Solver("cyclic tridiagonal needs n >= 3".into()));
    }
    // A = T + u vᵀ with u = [gamma, 0, .., 0, corner_bl], v = [1, 0, .., 0, corner_tr/gamma].
    let gamma = -diag[0];
    let mut dmod = diag.to_vec();
    dmod[0] = diag[0] - gamma;
    dmod[n - 1] = diag[n - 1] - corner_tr * corner_bl / gamma;

    let mut scratch = Vec::new();
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_bl;

    solve_tridiag(lower, &dmod, upper, rhs, &mut scratch)?;
    solve_tridiag(lower, &dmod, upper, &mut u, &mut scratch)?;

    let vy = rhs[0] + corner_tr / gamma * rhs[n - 1];
    let vz = u[0] + corner_tr / gamma * u[n - 1];
    let factor = vy / (1.0 + vz);
    for i in 0..n {
        rhs[i] -= factor * u[i];
    }
    Ok(())
}

/// C = A·B through faer's parallel kernels, zero-copy over the column-major
/// nalgebra storage. Worth it once the operands reach Newton-Jacobian sizes.
pub fn mat_mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut c = DMatrix::zeros(a.nrows(), b.ncols());
    let av = MatRef::from_column_major_slice(a.as_slice(), a.nrows(), a.ncols());
    let bv = MatRef::from_column_major_slice(b.as_slice(), b.nrows(), b.ncols());
    let (rows, cols) = (c.nrows(), c.ncols());
    let cv = faer::MatMut::from_column_major_slice_mut(c.as_mut_slice(), rows, cols);
    faer::linalg::matmul::matmul(cv, faer::Accum::Replace, av, bv, 1.0, faer::Par::rayon(0));
    c
}

/// C = Aᵀ·B (same kernel, transposed view).
pub fn mat_mul_tn(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut c = DMatrix::zeros(a.ncols(), b.ncols());
    let av = MatRef::from_column_major_slice(a.as_slice(), a.nrows(), a.ncols());
    let bv = MatRef::from_column_major_slice(b.as_slice(), b.nrows(), b.ncols());
    let (rows, cols) = (c.nrows(), c.ncols());
    let cv = faer::MatMut::from_column_major_slice_mut(c.as_mut_slice(), rows, cols);
    faer::linalg::matmul::matmul(
        cv,
        faer::Accum::Replace,
        av.transpose(),
        bv,
        1.0,
        faer::Par::rayon(0),
    );
    c
}

/// Solves A x = rhs in place with faer's blocked partial-pivot LU.
pub fn lu_solve_in_place(a: &DMatrix<f64>, rhs: &mut DVector<f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n || rhs.len() != n {
        return Err(Error::dims("lu_solve_in_place", n, rhs.len()));
    }
    let av = MatRef::from_column_major_slice(a.as_slice(), n, n);
    let lu = av.partial_piv_lu();
    let rv = faer::MatMut::from_column_major_slice_mut(rhs.as_mut_slice(), n, 1);
    lu.solve_in_place(rv);
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("singular Newton Jacobian".into()));
    }
    Ok(())
}

/// Frobenius norm of `AᵀA − I`.
pub fn orthonormality_residual(a: &DMatrix<f64>) -> f64 {
    let mut g = a.transpose() * a;
    for i in 0..g.nrows() {
        g[(i, i)] -= 1.0;
    }
    g.norm()
}

/// Flips each column so its first nonzero entry is positive.
///
/// Keeps SVD output deterministic across runs so golden CSV files are
/// byte-stable.
pub fn fix_column_signs(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        let mut sign = 0.0;
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                sign = v.signum();
                break;
            }
        }
        if sign < 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}

/// Rotates each column by a unit phase so its first nonzero entry is real
/// and positive (the complex analogue of `fix_column_signs`).
pub fn fix_column_phases(m: &mut CMatrix) {
    for j in 0..m.ncols() {
        let mut phase = None;
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v.norm_sqr() != 0.0 {
                phase = Some(v / v.norm());
                break;
            }
        }
        if let Some(ph) = phase {
            let rot = ph.conj();
            for i in 0..m.nrows() {
                m[(i, j)] *= rot;
            }
        }
    }
}

/// Condition number estimate via the singular value ratio.
pub fn condition_estimate(m: &DMatrix<f64>) -> Result<f64> {
    let sv = thin_svd(m)?.singular_values;
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    if min == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(max / min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn thomas_matches_dense_solve() {
        let n = 12;
        let lower: Vec<f64> = (0..n)
            .map(|i| if i == 0 { 0.0 } else { -0.3 + 0.01 * i as f64 })
            .collect();
        let upper: Vec<f64> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    0.0
                } else {
                    -0.2 - 0.01 * i as f64
                }
            })
            .collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();

        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = diag[i];
            if i > 0 {
                a[(i, i - 1)] = lower[i];
            }
            if i < n - 1 {
                a[(i, i + 1)] = upper[i];
            }
        }
        let want = a.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();

        let mut x = rhs;
        let mut scratch = Vec::new();
        solve_tridiag(&lower, &diag, &upper, &mut x, &mut scratch).unwrap();
        for i in 0..n {
            assert!((x[i] - want[i]).abs() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn cyclic_thomas_matches_dense_solve() {
        let n = 10;
        let lower = vec![1.0; n];
        let upper = vec![1.0; n];
        let diag = vec![-4.0; n];
        let (ctr, cbl) = (1.0, 1.0);
        let rhs: Vec<f64> = (0..n).map(|i| (0.7 * i as f64).cos()).collect();

        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = diag[i];
            if i > 0 {
                a[(i, i - 1)] = lower[i];
            }
            if i < n - 1 {
                a[(i, i + 1)] = upper[i];
            }
        }
        a[(0, n - 1)] = ctr;
        a[(n - 1, 0)] = cbl;
        let want = a.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();

        let mut x = rhs;
        solve_cyclic_tridiag(&lower, &diag, &upper, ctr, cbl, &mut x).unwrap();
        for i in 0..n {
            assert!(
                (x[i] - want[i]).abs() < 1e-11,
                "entry {i}: {} vs {}",
                x[i],
                want[i]
            );
        }
    }

    #[test]
    fn svd_reconstructs() {
        let m = DMatrix::from_fn(9, 5, |i, j| ((i * 3 + j) as f64 * 0.37).sin());
        let svd = thin_svd(&m).unwrap();
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(orthonormality_residual(&svd.u) < 1e-12);
    }

    #[test]
    fn eigen_residuals_small() {
        let m = DMatrix::from_fn(6, 6, |i, j| ((i + 2 * j) as f64).cos());
        let eig = eigen_general(&m).unwrap();
        let mc = CMatrix::from_fn(6, 6, |i, j| Complex::new(m[(i, j)], 0.0));
        for j in 0..6 {
            let v = eig.vectors.column(j);
            let resid = (&mc * v) - v * eig.values[j];
            assert!(resid.norm() < 1e-10);
        }
    }
}
