//! Small dense decompositions: one-sided Jacobi SVD, Moore-Penrose
//! pseudo-inverse and Cholesky factorization.

use alloc::vec::Vec;

use crate::matrix::Matrix;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
///
/// For an `m × n` input, `u` is `m × n`, `singular_values` has length `n`
/// (sorted descending, trailing entries may be zero) and `v` is a full
/// `n × n` orthogonal matrix.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of a working copy of `a` are orthogonalised by plane rotations
/// which are accumulated into `V`. Converges to full relative accuracy for
/// the small matrices this crate handles.
pub fn svd(a: &Matrix) -> Svd {
    let (m, n) = a.shape();
    let mut work = a.clone();
    let mut v = Matrix::identity(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (work[(i, p)], work[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (work[(i, p)], work[(i, q)]);
                    work[(i, p)] = c * x - s * y;
                    work[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| libm::sqrt((0..m).map(|i| work[(i, j)] * work[(i, j)]).sum()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps column order for equal singular values.
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let mut u = Matrix::zeros(m, n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        singular_values.push(sigma);
        if sigma > 0.0 {
            for i in 0..m {
                u[(i, dst)] = work[(i, src)] / sigma;
            }
        }
        for i in 0..n {
            v_sorted[(i, dst)] = v[(i, src)];
        }
    }
    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

/// Moore-Penrose pseudo-inverse via SVD.
///
/// Singular values below `rel_tol × σ_max` are treated as zero.
pub fn pinv(a: &Matrix, rel_tol: f64) -> Matrix {
    let (m, n) = a.shape();
    let Svd {
        u,
        singular_values,
        v,
    } = svd(a);
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = rel_tol * sigma_max;
    let mut out = Matrix::zeros(n, m);
    for (k, &sigma) in singular_values.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        let inv = 1.0 / sigma;
        for i in 0..n {
            let vik = v[(i, k)] * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[(i, j)] += vik * u[(j, k)];
            }
        }
    }
    out
}

/// Failure of [`cholesky`] at the given pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
///
/// A pivot `d` is rejected when `d <= rel_tol × max diag(A)`.
pub fn cholesky(a: &Matrix, rel_tol: f64) -> Result<Matrix, NotPositiveDefinite> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky needs a square matrix");
    let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(a[(i, i)]));
    let floor = rel_tol * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) || d <= 0.0 {
            return Err(NotPositiveDefinite { pivot: j });
        }
        let djj = libm::sqrt(d);
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = b[i];
        for (k, xk) in x.iter().enumerate() {
            s -= l[(i, k)] * xk;
        }
        x.push(s / l[(i, i)]);
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub fn solve_lower_transpose(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `A x = b` given the Cholesky factor of `A`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn svd_reconstructs() {
        let a = Matrix::from_rows(&[[3.0, 1.0, 2.0], [-1.0, 4.0, 0.5], [2.0, 2.0, 2.0], [0.0, 1.0, -3.0]]);
        let s = svd(&a);
        let sigma = Matrix::from_fn(3, 3, |i, j| if i == j { s.singular_values[i] } else { 0.0 });
        let back = s.u.matmul(&sigma).matmul(&s.v.transpose());
        assert_close(&back, &a, 1e-12);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pinv_identity_is_identity() {
        for n in 1..6 {
            assert_close(&pinv(&Matrix::identity(n), 1e-10), &Matrix::identity(n), 1e-15);
        }
    }

    #[test]
    fn pinv_rank_one_ones() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert_close(&pinv(&a, 1e-10), &Matrix::from_rows(&[[0.25, 0.25], [0.25, 0.25]]), 1e-15);
    }

    #[test]
    fn pinv_zero_is_zero() {
        let z = Matrix::zeros(3, 2);
        assert_eq!(pinv(&z, 1e-10), Matrix::zeros(2, 3));
    }

    #[test]
    fn cholesky_solves_and_rejects() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]);
        let l = cholesky(&a, 1e-12).unwrap();
        let x = cholesky_solve(&l, &[2.0, 1.0]);
        assert_abs_diff_eq!(4.0 * x[0] + 2.0 * x[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(2.0 * x[0] + 3.0 * x[1], 1.0, epsilon = 1e-14);
        let singular = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(cholesky(&singular, 1e-12), Err(NotPositiveDefinite { pivot: 1 }));
    }
}
