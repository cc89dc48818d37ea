use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-column mean / population standard deviation, reusable on new rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns with zero variance; these pass through unchanged.
    pub constant: Vec<bool>,
}

impl StandardScaler {
    pub fn fit(x: &Matrix) -> Self {
        let (n, d) = x.shape();
        let mut mean = alloc::vec![0.0; d];
        let mut std = alloc::vec![0.0; d];
        let mut constant = alloc::vec![false; d];
        for j in 0..d {
            let col = x.column(j);
            let m = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            let s = libm::sqrt(var);
            let scale = col.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            mean[j] = m;
            std[j] = s;
            constant[j] = !(s > 1e-12 * scale);
        }
        Self { mean, std, constant }
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::Shape(alloc::format!(
                "scaler fitted on {} columns, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            if self.constant[j] {
                x[(i, j)]
            } else {
                (x[(i, j)] - self.mean[j]) / self.std[j]
            }
        }))
    }

    pub fn has_constant_columns(&self) -> bool {
        self.constant.iter().any(|&c| c)
    }
}

/// Standardizes every non-constant column to mean 0 and population
/// standard deviation 1.
pub fn standardize_features(x: &Matrix) -> (Matrix, StandardScaler) {
    let scaler = StandardScaler::fit(x);
    let out = scaler.transform(x).expect("same shape");
    (out, scaler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn examples() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]);
        let (z, s) = standardize_features(&x);
        let e = libm::sqrt(1.5);
        assert_abs_diff_eq!(z[(0, 0)], -e, epsilon = 1e-14);
        assert_abs_diff_eq!(z[(1, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z[(2, 0)], e, epsilon = 1e-14);
        assert_abs_diff_eq!(e, 1.2247, epsilon = 1e-4);
        assert_eq!(s.constant, alloc::vec![false, true]);
        assert!(z.column(1).iter().all(|&v| v == 5.0));

        let (again, _) = standardize_features(&z);
        for (a, b) in again.as_slice().iter().zip(z.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
