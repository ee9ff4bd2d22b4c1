//! Hermitian eigendecomposition by cyclic Jacobi rotations, singular values
//! through the Gram matrix, and projection onto the positive semidefinite
//! cone.
//!
//! Jacobi is quadratically convergent and keeps the accumulated eigenvector
//! matrix unitary to machine precision, which is what the certificate checks
//! downstream rely on. All matrices here are desk scale, so the O(n^3) sweep
//! cost is irrelevant.

use num_complex::Complex64;

use crate::error::Result;
use crate::matrix::ComplexMatrix;

/// Eigenvalues in ascending order with stable tie order, eigenvectors as the
/// columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// Relative Hermiticity tolerance accepted by the eigensolver entry points.
pub const HERMITIAN_REL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose Hermitian deviation exceeds `1e-10` relative to the
/// largest entry modulus; the decomposition itself runs on `(A + A*)/2`.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigensystem> {
    a.check_hermitian(HERMITIAN_REL_TOL)?;
    Ok(jacobi_hermitian(&a.hermitize()))
}

/// Nearest positive semidefinite matrix in Frobenius distance: eigenvalues
/// clamped at zero.
pub fn psd_project(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.check_hermitian(HERMITIAN_REL_TOL)?;
    let eig = jacobi_hermitian(&m.hermitize());
    let clamped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    Ok(reassemble(&eig.eigenvectors, &clamped))
}

/// V diag(values) V*.
pub fn reassemble(vectors: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = vectors.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = vectors[(i, k)] * lambda;
            for j in 0..n {
                out[(i, j)] += vik * vectors[(j, k)].conj();
            }
        }
    }
    out.hermitize()
}

/// Smallest eigenvalue of a Hermitian matrix; input is hermitized first.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    jacobi_hermitian(&m.hermitize())
        .eigenvalues
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Relative noise floor for Gram-matrix eigenvalues: anything at or below
/// `lambda_max * dim * GRAM_NOISE_REL` is numerically indistinguishable
/// from zero and would otherwise surface as a spurious singular value of
/// order 1e-8 after the square root.
const GRAM_NOISE_REL: f64 = 1e-14;

fn gram_cutoff(eigenvalues: &[f64]) -> f64 {
    let lam_max = eigenvalues.iter().cloned().fold(0.0, f64::max);
    lam_max * (eigenvalues.len() as f64) * GRAM_NOISE_REL
}

/// Singular values in descending order, computed as square roots of the
/// Gram-matrix eigenvalues on the smaller side, with values at the noise
/// floor clamped at zero.
pub fn gram_singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let gram = if a.rows() <= a.cols() {
        a.matmul(&a.adjoint())
    } else {
        a.adjoint().matmul(a)
    };
    let eig = jacobi_hermitian(&gram.hermitize());
    let cutoff = gram_cutoff(&eig.eigenvalues);
    let mut sigma: Vec<f64> = eig
        .eigenvalues
        .iter()
        .rev()
        .map(|&l| if l <= cutoff { 0.0 } else { l.sqrt() })
        .collect();
    // guard against clamp leaving a spurious ascending pair
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sigma
}

/// Thin singular value decomposition `A ≈ Σ σ_k left_k right_k*` with
/// singular values above the numerical-rank cutoff, in descending order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub sigma: Vec<f64>,
    /// Left singular vectors, length `rows` each.
    pub left: Vec<Vec<Complex64>>,
    /// Right singular vectors, length `cols` each.
    pub right: Vec<Vec<Complex64>>,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn trace_norm(&self) -> f64 {
        self.sigma.iter().sum()
    }

    /// Σ σ_k left_k right_k*.
    pub fn reconstruct(&self, rows: usize, cols: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rows, cols);
        for k in 0..self.rank() {
            let s = self.sigma[k];
            for i in 0..rows {
                let w = self.left[k][i] * s;
                for j in 0..cols {
                    out[(i, j)] += w * self.right[k][j].conj();
                }
            }
        }
        out
    }

    /// Σ left_k right_k*, the polar/sign factor used as a trace-norm dual
    /// witness.
    pub fn polar_factor(&self, rows: usize, cols: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rows, cols);
        for k in 0..self.rank() {
            for i in 0..rows {
                let w = self.left[k][i];
                for j in 0..cols {
                    out[(i, j)] += w * self.right[k][j].conj();
                }
            }
        }
        out
    }

    /// Σ σ_k/sqrt(σ_k² + μ²) left_k right_k*: the gradient factor of the
    /// smoothed trace norm Σ sqrt(σ² + μ²). Ascent directions built from it
    /// cut through the kinks at singular-value crossings where the plain
    /// polar factor stalls.
    pub fn smoothed_polar_factor(&self, rows: usize, cols: usize, mu: f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rows, cols);
        for k in 0..self.rank() {
            let s = self.sigma[k];
            let weight = s / (s * s + mu * mu).sqrt();
            for i in 0..rows {
                let w = self.left[k][i] * weight;
                for j in 0..cols {
                    out[(i, j)] += w * self.right[k][j].conj();
                }
            }
        }
        out
    }
}

/// Thin SVD via the Gram matrix on the smaller side.
pub fn thin_svd(a: &ComplexMatrix) -> ThinSvd {
    let (m, n) = (a.rows(), a.cols());
    let use_left_gram = m <= n;
    let gram = if use_left_gram {
        a.matmul(&a.adjoint())
    } else {
        a.adjoint().matmul(a)
    };
    let eig = jacobi_hermitian(&gram.hermitize());
    let k = gram.rows();
    let cutoff = gram_cutoff(&eig.eigenvalues);

    let mut sigma = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    // eigenvalues ascending -> iterate in reverse for descending sigma
    for idx in (0..k).rev() {
        let lam = eig.eigenvalues[idx];
        if lam <= cutoff || lam <= 0.0 {
            break;
        }
        let s = lam.sqrt();
        let g: Vec<Complex64> = (0..k).map(|i| eig.eigenvectors[(i, idx)]).collect();
        if use_left_gram {
            // g is a left singular vector; right = A* g / s
            let r: Vec<Complex64> = a
                .adjoint()
                .matvec(&g)
                .into_iter()
                .map(|z| z / s)
                .collect();
            sigma.push(s);
            left.push(g);
            right.push(r);
        } else {
            let l: Vec<Complex64> = a.matvec(&g).into_iter().map(|z| z / s).collect();
            sigma.push(s);
            left.push(l);
            right.push(g);
        }
    }
    ThinSvd { sigma, left, right }
}

/// Cyclic Jacobi on a Hermitian matrix. Assumes the input is exactly
/// Hermitian (callers hermitize first).
fn jacobi_hermitian(a: &ComplexMatrix) -> HermitianEigensystem {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);

    let scale = frobenius(&m).max(f64::MIN_POSITIVE);
    let target = scale * 1e-15;
    const MAX_SWEEPS: usize = 60;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_frobenius(&m) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let b = apq.norm();
                if b <= scale * 1e-300 || b == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // phase that makes the pivot real: conj(apq)/|apq|
                let phase = apq.conj() / b;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // column rotation: unitary U acts on coordinates p, q as
                //   [c        s      ]
                //   [-s*ph    c*ph   ]   with ph = conj(apq)/|apq|
                let sp = Complex64::new(s, 0.0) * phase;
                let cp = Complex64::new(c, 0.0) * phase;
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c - miq * sp;
                    m[(i, q)] = mip * s + miq * cp;
                }
                // row rotation with U*
                let sp_c = sp.conj();
                let cp_c = cp.conj();
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c - mqj * sp_c;
                    m[(q, j)] = mpj * s + mqj * cp_c;
                }
                // the pivot is eliminated by construction; pin it to keep
                // the off-diagonal decay monotone
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * sp;
                    v[(i, q)] = vip * s + viq * cp;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .re
            .partial_cmp(&m[(j, j)].re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigensystem {
        eigenvalues,
        eigenvectors,
    }
}

fn frobenius(m: &ComplexMatrix) -> f64 {
    m.entries()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn off_diagonal_frobenius(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::operator_norm;
    use crate::random::SeededRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(a: &ComplexMatrix, eig: &HermitianEigensystem) -> f64 {
        // max entry of A V - V diag(lambda)
        let av = a.matmul(&eig.eigenvectors);
        let mut worst: f64 = 0.0;
        for j in 0..eig.eigenvalues.len() {
            for i in 0..a.rows() {
                let want = eig.eigenvectors[(i, j)] * eig.eigenvalues[j];
                worst = worst.max((av[(i, j)] - want).norm());
            }
        }
        worst
    }

    fn unitarity_defect(v: &ComplexMatrix) -> f64 {
        let g = v.adjoint().matmul(v);
        let mut worst: f64 = 0.0;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - c(want, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn diagonal_input() {
        let a = ComplexMatrix::from_real(2, 2, &[2.0, 0.0, 0.0, 1.0]).unwrap();
        let eig = hermitian_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0]);
        // permutation eigenvectors
        assert!((eig.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((eig.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_flip() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = hermitian_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = SeededRng::new(7);
        for trial in 0..20 {
            let n = 2 + (trial % 5);
            let a = rng.hermitian(n);
            let eig = hermitian_eig(&a).unwrap();
            let norm = operator_norm(&a).max(1e-12);
            assert!(residual(&a, &eig) <= 1e-10 * norm, "trial {trial}");
            assert!(unitarity_defect(&eig.eigenvectors) <= 1e-12, "trial {trial}");
            for w in eig.eigenvalues.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(hermitian_eig(&a).is_err());
        assert!(psd_project(&a).is_err());
    }

    #[test]
    fn psd_project_examples() {
        // PSD input is a fixed point
        let mut rng = SeededRng::new(3);
        let g = rng.complex_matrix(3, 3);
        let psd = g.matmul(&g.adjoint());
        let proj = psd_project(&psd).unwrap();
        assert!(proj.sub(&psd).unwrap().max_abs() <= 1e-12 * (1.0 + psd.max_abs()));

        // indefinite diagonal clamps
        let d = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let pd = psd_project(&d).unwrap();
        assert!((pd[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(pd[(1, 1)].norm() < 1e-14);

        // -I projects to zero
        let neg = ComplexMatrix::identity(3).scale(c(-1.0, 0.0));
        assert!(psd_project(&neg).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn psd_project_idempotent_and_nearly_psd() {
        let mut rng = SeededRng::new(11);
        for _ in 0..10 {
            let h = rng.hermitian(4);
            let p1 = psd_project(&h).unwrap();
            let p2 = psd_project(&p1).unwrap();
            assert!(p1.sub(&p2).unwrap().max_abs() <= 1e-12 * (1.0 + p1.max_abs()));
            assert!(min_eigenvalue(&p1) >= -1e-12);
        }
    }

    #[test]
    fn thin_svd_reconstructs() {
        let mut rng = SeededRng::new(5);
        for &(m, n) in &[(3usize, 5usize), (5, 3), (4, 4), (1, 6)] {
            let a = rng.complex_matrix(m, n);
            let svd = thin_svd(&a);
            let rec = svd.reconstruct(m, n);
            assert!(rec.sub(&a).unwrap().max_abs() <= 1e-12 * (1.0 + a.max_abs()));
            for w in svd.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }
}
