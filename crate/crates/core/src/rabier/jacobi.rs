//! Cyclic Jacobi eigenvalue iteration for small symmetric matrices.

use super::OperatorMatrix;

pub(crate) const MAX_SWEEPS: usize = 100;
pub(crate) const REL_TOL: f64 = 1e-14;

/// Eigenvalues of the symmetric matrix `a`, ascending.
///
/// Sweeps rotate away every off-diagonal entry until the off-diagonal
/// Frobenius norm drops below `1e-14 * trace` (absolute trace for safety on
/// indefinite input), or 100 sweeps have run.
pub fn symmetric_eigenvalues(a: &OperatorMatrix) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "matrix must be square");
    let mut m = a.clone();
    let scale: f64 = (0..n).map(|i| m[(i, i)].abs()).sum();
    let threshold = REL_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, p, q);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

fn off_diagonal_norm(m: &OperatorMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Annihilate entry (p, q) with a Givens rotation applied on both sides.
fn rotate(m: &mut OperatorMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = m.rows();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[(r, p)];
        let arq = m[(r, q)];
        let np = c * arp - s * arq;
        let nq = s * arp + c * arq;
        m[(r, p)] = np;
        m[(p, r)] = np;
        m[(r, q)] = nq;
        m[(q, r)] = nq;
    }
    m[(p, p)] = app - t * apq;
    m[(q, q)] = aqq + t * apq;
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let m = OperatorMatrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(symmetric_eigenvalues(&m), vec![1.0, 4.0]);
    }

    #[test]
    fn two_by_two() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let m = OperatorMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = symmetric_eigenvalues(&m);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14, "{e:?}");
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // 2 on the diagonal, -1 off it: eigenvalues 2 - 2cos(j*pi/(n+1))
        let n = 6;
        let mut m = OperatorMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 2.0;
            if i + 1 < n {
                m[(i, i + 1)] = -1.0;
                m[(i + 1, i)] = -1.0;
            }
        }
        let e = symmetric_eigenvalues(&m);
        for (j, v) in e.iter().enumerate() {
            let want = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - want).abs() < 1e-13, "{j}: {v} vs {want}");
        }
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(symmetric_eigenvalues(&OperatorMatrix::zeros(3, 3)), vec![0.0; 3]);
    }
}
