//! Cyclic Jacobi eigen-solver for small dense symmetric matrices.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

/// Converged when the off-diagonal Frobenius norm drops below this fraction
/// of the full Frobenius norm (absolute for matrices with norm below 1).
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition with eigenvalues sorted ascending; column `i` of
/// `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<const N: usize> {
    pub values: SVector<f64, N>,
    pub vectors: SMatrix<f64, N, N>,
    pub sweeps: usize,
}

fn off_norm<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

pub fn symmetric_eigen<const N: usize>(m: &SMatrix<f64, N, N>) -> Result<SymmetricEigen<N>> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite matrix entry".into()));
    }
    let asym = (m - m.transpose()).abs().max();
    let scale = m.norm().max(1.0);
    if asym > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (max |A - A^T| = {asym:.3e})"
        )));
    }

    let mut a = (m + m.transpose()) * 0.5;
    let mut v = SMatrix::<f64, N, N>::identity();
    let tol = OFF_DIAGONAL_TOL * scale;
    let mut sweeps = 0;
    while off_norm(&a) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::InvalidArgument(format!(
                "Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {:.3e})",
                off_norm(&a)
            )));
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle from the classic stable formulation (Golub & Van Loan 8.5.2).
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..N {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = SVector::<f64, N>::from_fn(|i, _| a[(order[i], order[i])]);
    let vectors = SMatrix::<f64, N, N>::from_fn(|r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix4, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_is_already_converged() {
        let m = Matrix4::from_diagonal(&Vector4::new(3.0, -1.0, 2.0, 0.5));
        let e = symmetric_eigen(&m).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, Vector4::new(-1.0, 0.5, 2.0, 3.0));
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = Matrix2::new(2.0, 1.0, 1.0, 2.0);
        let e = symmetric_eigen(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let b = Matrix4::from_fn(|_, _| rng.gen_range(-5.0..5.0));
            let m = b + b.transpose();
            let e = symmetric_eigen(&m).unwrap();
            assert!(e.sweeps <= 10);
            let recon = e.vectors * Matrix4::from_diagonal(&e.values) * e.vectors.transpose();
            assert!((recon - m).abs().max() < 1e-12);
            let ortho = e.vectors.transpose() * e.vectors - Matrix4::identity();
            assert!(ortho.abs().max() < 1e-13);
            for i in 0..3 {
                assert!(e.values[i] <= e.values[i + 1]);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut m = Matrix4::<f64>::identity();
        m[(0, 1)] = 1.0;
        assert!(symmetric_eigen(&m).is_err());
    }
}
