use rand_distr::{Distribution, StandardNormal};

use super::ThinError;
use crate::rabier::OperatorMatrix;
use crate::rng;

/// Seeded random orthogonal projection `R^n -> R^k` as a `k x n` matrix with
/// orthonormal rows.
///
/// Rows come from a Gaussian matrix orthonormalized by two passes of
/// modified Gram-Schmidt. A numerically degenerate draw is replaced by the
/// next sub-stream.
pub fn random_projection(n: usize, k: usize, seed: u64) -> Result<OperatorMatrix, ThinError> {
    if k == 0 || k > n {
        return Err(ThinError::BadTargetDimension { k, n });
    }
    for attempt in 0u64.. {
        let mut rng = rng::stream(seed, &[rng::tag::PROJECTION, attempt]);
        let mut rows: Vec<Vec<f64>> =
            (0..k).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        if orthonormalize(&mut rows) {
            return Ok(OperatorMatrix::from_rows(&rows));
        }
    }
    unreachable!("infinite retry loop")
}

fn orthonormalize(rows: &mut [Vec<f64>]) -> bool {
    for i in 0..rows.len() {
        for _ in 0..2 {
            for j in 0..i {
                let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = rows.split_at_mut(i);
                for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                    *a -= dot * b;
                }
            }
            let norm = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-10 {
                return false;
            }
            rows[i].iter_mut().for_each(|v| *v /= norm);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_error(p: &OperatorMatrix) -> f64 {
        let g = p.gram_rows();
        let mut err: f64 = 0.0;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((g[(i, j)] - want).abs());
            }
        }
        err
    }

    #[test]
    fn square_is_orthogonal() {
        for n in 1..6 {
            let p = random_projection(n, n, 11).unwrap();
            assert!(gram_error(&p) < 1e-10);
            assert!(gram_error(&p.transpose()) < 1e-10);
        }
    }

    #[test]
    fn three_to_two() {
        let p = random_projection(3, 2, 5).unwrap();
        assert_eq!((p.rows(), p.cols()), (2, 3));
        assert!(gram_error(&p) < 1e-10);
    }

    #[test]
    fn deterministic() {
        assert_eq!(random_projection(4, 2, 99).unwrap(), random_projection(4, 2, 99).unwrap());
        assert_ne!(random_projection(4, 2, 99).unwrap(), random_projection(4, 2, 98).unwrap());
    }

    #[test]
    fn bad_dimensions() {
        assert!(random_projection(2, 3, 0).is_err());
        assert!(random_projection(2, 0, 0).is_err());
    }

    #[test]
    fn degenerate_rows_rejected() {
        let mut rows = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(!orthonormalize(&mut rows));
    }
}
