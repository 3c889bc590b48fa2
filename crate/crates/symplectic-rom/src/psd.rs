//! Proper symplectic decomposition: reduced-basis construction from data.
//!
//! Three algorithms build a symplectic basis from a snapshot ensemble:
//!
//! * cotangent lift — SVD of the stacked [q, γp] columns, A₁ = diag(Φ, Φ);
//! * complex SVD — SVD of q + ιγp, A₂ = [Φ, −Ψ; Ψ, Φ];
//! * NLP refinement — searches A₃ = A₁C over symplectic coefficient
//!   matrices C by a penalty method, starting from the truncated lift.
//!
//! POD (plain truncated SVD) is the non-structure-preserving baseline.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::linalg;
use crate::snapshots::SnapshotEnsemble;
use crate::symplectic::{OrthonormalBasis, SymplecticBasis, NLP_BASIS_TOL, SVD_BASIS_TOL};

/// Directions with σ_k below this fraction of σ₁ are treated as noise.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Pod,
    Cotangent,
    ComplexSvd,
    Deim,
    Sdeim,
}

impl SpectrumSource {
    pub fn tag(&self) -> &'static str {
        match self {
            SpectrumSource::Pod => "pod",
            SpectrumSource::Cotangent => "cotangent",
            SpectrumSource::ComplexSvd => "complex_svd",
            SpectrumSource::Deim => "deim",
            SpectrumSource::Sdeim => "sdeim",
        }
    }

    /// Symplectic constructions use each singular direction twice, so their
    /// reported spectra duplicate every value.
    pub fn duplicates(&self) -> bool {
        matches!(
            self,
            SpectrumSource::Cotangent | SpectrumSource::ComplexSvd | SpectrumSource::Sdeim
        )
    }
}

/// Nonincreasing singular values of the snapshot matrix a basis came from.
#[derive(Debug, Clone)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub source: SpectrumSource,
}

impl SingularSpectrum {
    fn new(values: Vec<f64>, source: SpectrumSource) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] >= w[1] - 1e-12 * w[0].abs()));
        Self { values, source }
    }

    /// The sequence as plotted against basis width: {σ₁, σ₁, σ₂, σ₂, …} for
    /// symplectic sources, the raw values otherwise.
    pub fn plot_values(&self) -> Vec<f64> {
        if self.source.duplicates() {
            self.values.iter().flat_map(|v| [*v, *v]).collect()
        } else {
            self.values.clone()
        }
    }

    /// Largest mode index k (1-based) with σ_k ≥ threshold·σ₁; 0 when even
    /// σ₁ is below it.
    pub fn rank_at(&self, threshold: f64) -> usize {
        let s1 = self.values.first().copied().unwrap_or(0.0);
        self.values
            .iter()
            .take_while(|v| **v >= threshold * s1)
            .count()
    }
}

fn check_rank(values: &[f64], k: usize) -> Result<()> {
    let sigma_1 = values.first().copied().unwrap_or(0.0);
    if k == 0 || k > values.len() {
        return Err(Error::RankDeficient {
            requested: k,
            sigma_k: 0.0,
            sigma_1,
        });
    }
    let sigma_k = values[k - 1];
    if sigma_k < RANK_TOL * sigma_1 || sigma_1 == 0.0 {
        return Err(Error::RankDeficient {
            requested: k,
            sigma_k,
            sigma_1,
        });
    }
    Ok(())
}

/// Leading k left singular vectors of a precomputed SVD.
pub fn pod_from_svd(svd: &linalg::ThinSvd, k: usize) -> Result<OrthonormalBasis> {
    check_rank(&svd.singular_values, k)?;
    let mut u = svd.u.columns(0, k).into_owned();
    linalg::fix_column_signs(&mut u);
    OrthonormalBasis::validate(u, 1e-10)
}

/// Leading k left singular vectors of `m` with the full singular spectrum.
pub fn pod_basis(m: &DMatrix<f64>, k: usize) -> Result<(OrthonormalBasis, SingularSpectrum)> {
    let svd = linalg::thin_svd(m)?;
    let basis = pod_from_svd(&svd, k)?;
    Ok((
        basis,
        SingularSpectrum::new(svd.singular_values, SpectrumSource::Pod),
    ))
}

/// Block-diagonal symplectic basis diag(Φ, Φ) from a precomputed SVD of an
/// n-row column stack.
pub fn cotangent_from_svd(svd: &linalg::ThinSvd, k: usize) -> Result<SymplecticBasis> {
    check_rank(&svd.singular_values, k)?;
    let mut phi = svd.u.columns(0, k).into_owned();
    linalg::fix_column_signs(&mut phi);
    let n = svd.u.nrows();
    let mut a = DMatrix::zeros(2 * n, 2 * k);
    a.view_mut((0, 0), (n, k)).copy_from(&phi);
    a.view_mut((n, k), (n, k)).copy_from(&phi);
    SymplecticBasis::validate(a, SVD_BASIS_TOL)
}

/// Builds the block-diagonal symplectic basis diag(Φ, Φ) from the SVD of an
/// n×(…) column stack. Shared by the cotangent lift and the SDEIM extended
/// ensemble.
pub fn cotangent_lift_from_columns(
    m1: &DMatrix<f64>,
    k: usize,
    source: SpectrumSource,
) -> Result<(SymplecticBasis, SingularSpectrum)> {
    let svd = linalg::thin_svd(m1)?;
    let basis = cotangent_from_svd(&svd, k)?;
    Ok((basis, SingularSpectrum::new(svd.singular_values, source)))
}

/// The stacked matrix M₁ = [q-columns, weighted-p-columns] (n×2N) the
/// cotangent lift decomposes. The ensemble must already carry its weights.
pub fn stacked_snapshot_matrix(ensemble: &SnapshotEnsemble) -> DMatrix<f64> {
    let n = ensemble.half_dim();
    let cols = ensemble.len();
    let mut m1 = DMatrix::zeros(n, 2 * cols);
    m1.view_mut((0, 0), (n, cols)).copy_from(&ensemble.q_rows());
    m1.view_mut((0, cols), (n, cols))
        .copy_from(&ensemble.p_rows());
    m1
}

/// Algorithm: stack the extended snapshot matrix M₁ = [q(tᵢ) … γp(tᵢ) …],
/// take the leading k left singular vectors Φ, return A₁ = diag(Φ, Φ).
pub fn cotangent_lift(
    ensemble: &SnapshotEnsemble,
    k: usize,
    gamma: f64,
) -> Result<(SymplecticBasis, SingularSpectrum)> {
    let w = ensemble.assemble_weighted(gamma)?;
    let m1 = stacked_snapshot_matrix(&w);
    cotangent_lift_from_columns(&m1, k, SpectrumSource::Cotangent)
}

/// The complex snapshot matrix M₂ = M_q + ιM_p of an (already weighted)
/// ensemble.
pub fn complex_snapshot_matrix(ensemble: &SnapshotEnsemble) -> linalg::CMatrix {
    let n = ensemble.half_dim();
    let cols = ensemble.len();
    let q = ensemble.q_rows();
    let p = ensemble.p_rows();
    DMatrix::from_fn(n, cols, |i, j| Complex::new(q[(i, j)], p[(i, j)]))
}

/// A₂ = 𝒜(U_k) from a precomputed complex SVD.
pub fn complex_from_svd(svd: &linalg::ThinSvdComplex, k: usize) -> Result<SymplecticBasis> {
    check_rank(&svd.singular_values, k)?;
    let mut u = svd.u.columns(0, k).into_owned();
    linalg::fix_column_phases(&mut u);
    let a = complex_to_symplectic(&u);
    SymplecticBasis::validate(a, SVD_BASIS_TOL)
}

/// Algorithm: SVD of the complex snapshot matrix M₂ = M_q + ιM_{γp}; the
/// leading k singular vectors U = Φ + ιΨ give A₂ = [Φ, −Ψ; Ψ, Φ], which is
/// both symplectic and orthonormal (so A₂⁺ = A₂ᵀ).
pub fn complex_svd_basis(
    ensemble: &SnapshotEnsemble,
    k: usize,
    gamma: f64,
) -> Result<(SymplecticBasis, SingularSpectrum)> {
    let w = ensemble.assemble_weighted(gamma)?;
    let m2 = complex_snapshot_matrix(&w);
    let svd = linalg::thin_svd_complex(&m2)?;
    let basis = complex_from_svd(&svd, k)?;
    Ok((
        basis,
        SingularSpectrum::new(svd.singular_values, SpectrumSource::ComplexSvd),
    ))
}

/// The structure map 𝒜(Φ + ιΨ) = [Φ, −Ψ; Ψ, Φ].
pub fn complex_to_symplectic(u: &linalg::CMatrix) -> DMatrix<f64> {
    let (n, k) = (u.nrows(), u.ncols());
    let mut a = DMatrix::zeros(2 * n, 2 * k);
    for j in 0..k {
        for i in 0..n {
            let v = u[(i, j)];
            a[(i, j)] = v.re;
            a[(n + i, j)] = v.im;
            a[(i, k + j)] = -v.im;
            a[(n + i, k + j)] = v.re;
        }
    }
    a
}

/// 𝒜 extended to arbitrary complex matrices (used by the structure-map
/// property checks): 𝒜(C) = [Re C, −Im C; Im C, Re C].
pub fn structure_map(c: &linalg::CMatrix) -> DMatrix<f64> {
    complex_to_symplectic(c)
}

/// Projection residual ‖M − B B⁺M‖_F for a symplectic basis.
pub fn projection_residual(m: &DMatrix<f64>, basis: &SymplecticBasis) -> f64 {
    let reduced = basis.sympl_inverse() * m;
    let back = basis.matrix() * reduced;
    (m - back).norm()
}

/// Projection residual ‖M − ΦΦᵀM‖_F for an orthonormal basis.
pub fn pod_projection_residual(m: &DMatrix<f64>, basis: &OrthonormalBasis) -> f64 {
    let phi = basis.matrix();
    let back = phi * (phi.transpose() * m);
    (m - back).norm()
}

/// Penalty-method settings for [`nlp_refine`]. The inner solver is L-BFGS
/// with Armijo backtracking; μ grows by ×10 from `mu0` until the
/// symplecticity constraint residual passes its gate.
#[derive(Debug, Clone, Copy)]
pub struct NlpSettings {
    pub mu0: f64,
    pub mu_growth: f64,
    pub mu_stages: usize,
    pub inner_iters: usize,
    pub constraint_tol: f64,
    pub grad_tol: f64,
}

impl Default for NlpSettings {
    fn default() -> Self {
        Self {
            mu0: 1e2,
            mu_growth: 10.0,
            mu_stages: 8,
            inner_iters: 200,
            constraint_tol: 1e-8,
            grad_tol: 1e-12,
        }
    }
}

struct NlpProblem {
    h1: DMatrix<f64>, // (A₁ᵀM)(A₁⁺M)ᵀ, 2r×2r
    h2: DMatrix<f64>, // (A₁⁺M)(A₁⁺M)ᵀ, 2r×2r
    m_norm2: f64,
    r: usize,
    k: usize,
}

fn j_mat(half: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * half, 2 * half);
    for i in 0..half {
        j[(i, half + i)] = 1.0;
        j[(half + i, i)] = -1.0;
    }
    j
}

impl NlpProblem {
    /// C⁺ = J₂ₖᵀ Cᵀ J₂ᵣ.
    fn c_plus(&self, c: &DMatrix<f64>) -> DMatrix<f64> {
        crate::symplectic::symplectic_inverse(c).expect("C has even dims")
    }

    /// Normalized objective f₁(C)/‖M‖² with f₁ = ‖M − A₁CC⁺A₁⁺M‖²_F.
    fn objective(&self, c: &DMatrix<f64>) -> f64 {
        let p = c * self.c_plus(c);
        let t1 = (&p * self.h1.transpose()).trace();
        let t2 = (p.transpose() * &p * &self.h2).trace();
        ((self.m_norm2 - 2.0 * t1 + t2) / self.m_norm2).max(0.0)
    }

    fn constraint_residual(&self, c: &DMatrix<f64>) -> f64 {
        crate::symplectic::symplecticity_residual(c)
    }

    fn penalty(&self, c: &DMatrix<f64>, mu: f64) -> f64 {
        let e = self.constraint_residual(c);
        self.objective(c) + mu * e * e
    }

    fn gradient(&self, c: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
        let jr = j_mat(self.r);
        let jk = j_mat(self.k);
        let c_plus = self.c_plus(c);
        let p = c * &c_plus;
        // ∇f₁ = −2(G C⁺ᵀ + J₂ᵣ Gᵀ C J₂ₖᵀ) with G = H₁ − P H₂.
        let g = &self.h1 - &p * &self.h2;
        let grad_obj = (&g * c_plus.transpose() + &jr * g.transpose() * c * jk.transpose())
            * (-2.0 / self.m_norm2);
        // ∇‖CᵀJC − J‖² = −4 J₂ᵣ C E with E = CᵀJ₂ᵣC − J₂ₖ.
        let e = c.transpose() * &jr * c - &jk;
        let grad_pen = &jr * c * e * (-4.0 * mu);
        grad_obj + grad_pen
    }
}

/// Refines a cotangent-lift basis A₁ (width 2r) to a symplectic basis
/// A₃ = A₁C of width 2k < 2r that better fits the ensemble, per the
/// reduced optimization over C ∈ Sp(2k, ℝ^{2r}). Starts from
/// C = diag(I_{r×k}, I_{r×k}) (the truncated lift) and returns the best
/// iterate whose constraint residual passes the gate, so the final
/// objective never exceeds the initial one.
pub fn nlp_refine(
    ensemble: &SnapshotEnsemble,
    gamma: f64,
    a1: &SymplecticBasis,
    k: usize,
    settings: &NlpSettings,
) -> Result<SymplecticBasis> {
    let r = a1.half_dim_reduced();
    if k > r {
        return Err(Error::Domain(format!(
            "nlp_refine needs k <= r, got k = {k}, r = {r}"
        )));
    }
    if k == r {
        return Ok(a1.clone());
    }
    // The derivation below uses A₁ᵀA₁ = I (true for every SVD-built lift).
    let ortho = linalg::orthonormality_residual(a1.matrix());
    if ortho > 1e-8 {
        return Err(Error::NotOrthonormal {
            residual: ortho,
            tolerance: 1e-8,
        });
    }

    let w = ensemble.assemble_weighted(gamma)?;
    let m = &w.states;
    let b = a1.matrix().transpose() * m; // A₁ᵀM
    let y = a1.sympl_inverse() * m; // A₁⁺M
    let problem = NlpProblem {
        h1: &b * y.transpose(),
        h2: &y * y.transpose(),
        m_norm2: m.norm_squared(),
        r,
        k,
    };

    // Initial C = diag(I_{r×k}, I_{r×k}).
    let mut c = DMatrix::zeros(2 * r, 2 * k);
    for i in 0..k {
        c[(i, i)] = 1.0;
        c[(r + i, k + i)] = 1.0;
    }

    let mut best_c = c.clone();
    let mut best_obj = problem.objective(&c);

    let mut mu = settings.mu0;
    for _stage in 0..settings.mu_stages {
        lbfgs(&problem, &mut c, mu, settings);
        let resid = problem.constraint_residual(&c);
        let obj = problem.objective(&c);
        if resid <= settings.constraint_tol && obj < best_obj {
            best_obj = obj;
            best_c = c.clone();
        }
        if resid <= settings.constraint_tol && mu > settings.mu0 {
            break;
        }
        mu *= settings.mu_growth;
    }

    let refined = a1.matrix() * &best_c;
    SymplecticBasis::validate(refined, NLP_BASIS_TOL).map_err(|e| match e {
        Error::NotSymplectic { residual, .. } => Error::NlpRefinement {
            constraint_residual: residual,
            best_objective: best_obj,
        },
        other => other,
    })
}

/// Plain L-BFGS (two-loop recursion, memory 8) with Armijo backtracking on
/// the penalty function for a fixed μ.
fn lbfgs(problem: &NlpProblem, c: &mut DMatrix<f64>, mu: f64, settings: &NlpSettings) {
    const MEMORY: usize = 8;
    let mut s_hist: Vec<DMatrix<f64>> = Vec::new();
    let mut y_hist: Vec<DMatrix<f64>> = Vec::new();
    let mut f = problem.penalty(c, mu);
    let mut grad = problem.gradient(c, mu);

    for _ in 0..settings.inner_iters {
        let gnorm = grad.norm();
        if gnorm <= settings.grad_tol * (1.0 + f.abs()) {
            break;
        }
        // Two-loop recursion.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for (s, yv) in s_hist.iter().zip(y_hist.iter()).rev() {
            let rho = 1.0 / yv.dot(s);
            let alpha = rho * s.dot(&q);
            q -= yv * alpha;
            alphas.push(alpha);
        }
        if let (Some(s), Some(yv)) = (s_hist.last(), y_hist.last()) {
            let scale = s.dot(yv) / yv.dot(yv);
            q *= scale;
        }
        for ((s, yv), alpha) in s_hist.iter().zip(y_hist.iter()).zip(alphas.iter().rev()) {
            let rho = 1.0 / yv.dot(s);
            let beta = rho * yv.dot(&q);
            q += s * (alpha - beta);
        }
        let mut dir = -q;
        if dir.dot(&grad) >= 0.0 {
            dir = -grad.clone(); // fall back to steepest descent
            s_hist.clear();
            y_hist.clear();
        }

        // Armijo backtracking.
        let slope = dir.dot(&grad);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &*c + &dir * step;
            let f_cand = problem.penalty(&cand, mu);
            if f_cand <= f + 1e-4 * step * slope {
                let grad_new = problem.gradient(&cand, mu);
                let s = &cand - &*c;
                let yv = &grad_new - &grad;
                if s.dot(&yv) > 1e-12 * s.norm() * yv.norm() {
                    s_hist.push(s);
                    y_hist.push(yv);
                    if s_hist.len() > MEMORY {
                        s_hist.remove(0);
                        y_hist.remove(0);
                    }
                }
                *c = cand;
                f = f_cand;
                grad = grad_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
}
