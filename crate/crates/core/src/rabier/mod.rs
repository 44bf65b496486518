//! Distance of a linear operator to the singular operators.
//!
//! For a `k x n` matrix `A`, `nu(A) = min_{|phi| = 1} |A^T phi|`, i.e. the
//! square root of the smallest eigenvalue of the `k x k` Gram matrix
//! `A A^T`. When `k > n` the adjoint has a kernel and `nu` is exactly zero.
//!
//! Working through the Gram matrix squares the condition number: values of
//! `nu` near zero keep only about half of the available digits. Callers here
//! only compare `nu` against thresholds of at least `1e-6`, where this does
//! not matter.

mod jacobi;
mod matrix;

pub use jacobi::symmetric_eigenvalues;
pub use matrix::OperatorMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RabierError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("characterizations diverge: kernel form needs full row rank {k}, found rank {rank}")]
    CharacterizationsDiverge { rank: usize, k: usize },
    #[error("closed-form oracle needs k <= 3 or n <= 3, got {k}x{n}")]
    SizeExceeded { k: usize, n: usize },
}

/// Rabier function by the dual characterization.
pub fn nu(a: &OperatorMatrix) -> Result<f64, RabierError> {
    if !a.is_finite() {
        return Err(RabierError::NonFinite);
    }
    if a.rows() > a.cols() {
        return Ok(0.0);
    }
    let eig = symmetric_eigenvalues(&a.gram_rows());
    Ok(eig[0].max(0.0).sqrt())
}

/// Rank tolerance relative to the Frobenius norm.
pub const RANK_TOL: f64 = 1e-10;

/// Householder QR of the `n x k` matrix `m` (n >= k). Returns the first `k`
/// columns of `Q` (as an `n x k` matrix) and the diagonal of `R`.
fn thin_qr(m: &OperatorMatrix) -> (OperatorMatrix, Vec<f64>) {
    let (n, k) = (m.rows(), m.cols());
    let mut r = m.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut diag = Vec::with_capacity(k);
    for j in 0..k {
        let norm: f64 = (j..n).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>().sqrt();
        let mut v: Vec<f64> = (j..n).map(|i| r[(i, j)]).collect();
        if norm == 0.0 {
            reflectors.push(vec![0.0; n - j]);
            diag.push(0.0);
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= vnorm);
        for c in j..k {
            let dot: f64 = (j..n).map(|i| v[i - j] * r[(i, c)]).sum();
            for i in j..n {
                r[(i, c)] -= 2.0 * v[i - j] * dot;
            }
        }
        diag.push(r[(j, j)]);
        reflectors.push(v);
    }
    // Q e_c for c < k, applying reflectors in reverse.
    let mut q = OperatorMatrix::zeros(n, k);
    for c in 0..k {
        let mut col = vec![0.0; n];
        col[c] = 1.0;
        for (j, v) in reflectors.iter().enumerate().rev() {
            let dot: f64 = (j..n).map(|i| v[i - j] * col[i]).sum();
            for i in j..n {
                col[i] -= 2.0 * v[i - j] * dot;
            }
        }
        for i in 0..n {
            q[(i, c)] = col[i];
        }
    }
    (q, diag)
}

/// Rabier function by the kernel characterization:
/// `min { |A v| : v orthogonal to ker A, |v| = 1 }`.
///
/// Only defined for full row rank `A` (which forces `n >= k`); on
/// rank-deficient input the two characterizations disagree and this returns
/// [`RabierError::CharacterizationsDiverge`].
pub fn nu_kernel(a: &OperatorMatrix) -> Result<f64, RabierError> {
    if !a.is_finite() {
        return Err(RabierError::NonFinite);
    }
    let (k, n) = (a.rows(), a.cols());
    if k > n {
        return Err(RabierError::CharacterizationsDiverge { rank: n, k });
    }
    // Orthonormal basis of the row space = (ker A)^perp.
    let (basis, r_diag) = thin_qr(&a.transpose());
    let tol = RANK_TOL * a.frobenius();
    let rank = r_diag.iter().filter(|d| d.abs() > tol).count();
    if rank < k || a.frobenius() == 0.0 {
        return Err(RabierError::CharacterizationsDiverge { rank, k });
    }
    // |A (basis c)|^2 = c^T (B^T B) c with B = A * basis.
    let b = a.matmul(&basis);
    let eig = symmetric_eigenvalues(&b.transpose().gram_rows());
    Ok(eig[0].max(0.0).sqrt())
}

/// Eigenvalues of a symmetric matrix of size <= 3 from the closed-form roots
/// of its characteristic polynomial, ascending.
pub fn closed_form_eigenvalues(g: &OperatorMatrix) -> Result<Vec<f64>, RabierError> {
    let d = g.rows();
    match d {
        1 => Ok(vec![g[(0, 0)]]),
        2 => {
            let (a, b, c) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            let mean = 0.5 * (a + c);
            let h = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            Ok(vec![mean - h, mean + h])
        }
        3 => {
            let p1 = g[(0, 1)].powi(2) + g[(0, 2)].powi(2) + g[(1, 2)].powi(2);
            let q = (g[(0, 0)] + g[(1, 1)] + g[(2, 2)]) / 3.0;
            let p2 = (g[(0, 0)] - q).powi(2) + (g[(1, 1)] - q).powi(2) + (g[(2, 2)] - q).powi(2) + 2.0 * p1;
            if p2 == 0.0 {
                return Ok(vec![q; 3]);
            }
            let p = (p2 / 6.0).sqrt();
            let b = |i: usize, j: usize| (g[(i, j)] - if i == j { q } else { 0.0 }) / p;
            let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
            let r = (det_b / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            let largest = q + 2.0 * p * phi.cos();
            let smallest = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            let middle = 3.0 * q - largest - smallest;
            let mut e = vec![smallest, middle, largest];
            e.sort_by(f64::total_cmp);
            Ok(e)
        }
        _ => Err(RabierError::SizeExceeded { k: d, n: d }),
    }
}

/// Independent oracle for [`nu`]: the `k`-th singular value from the
/// closed-form spectrum of `A A^T` (or zero when `k > n`).
pub fn smallest_singular_oracle(a: &OperatorMatrix) -> Result<f64, RabierError> {
    let (k, n) = (a.rows(), a.cols());
    if k > 3 && n > 3 {
        return Err(RabierError::SizeExceeded { k, n });
    }
    if k > n {
        return Ok(0.0);
    }
    let mut g = OperatorMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = (0..n).map(|l| a[(i, l)] * a[(j, l)]).sum();
        }
    }
    let eig = closed_form_eigenvalues(&g)?;
    Ok(eig[0].max(0.0).sqrt())
}
