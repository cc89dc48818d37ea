use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::matrix::Matrix;

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PcaSelector {
    Components(usize),
    /// Smallest `k` whose cumulative explained-variance ratio reaches `v`.
    Variance(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// One component per row, orthonormal, by descending singular value.
    pub components: Matrix,
    pub explained_variance_ratio: Vec<f64>,
}

/// Mean-centred SVD. Each component's sign is fixed so that its largest
/// magnitude entry is positive.
pub fn fit_pca(x: &Matrix) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::InsufficientData(alloc::format!("PCA needs at least 2 rows, got {n}")));
    }
    let mean: Vec<f64> = (0..d).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let centered = Matrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let dec = svd(&centered);
    let mut components = dec.v.transpose();
    for k in 0..d {
        let row = components.row_mut(k);
        let lead = row.iter().fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let sq: Vec<f64> = dec.singular_values.iter().map(|s| s * s).collect();
    let total: f64 = sq.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        sq.iter().map(|s| s / total).collect()
    } else {
        let mut r = alloc::vec![0.0; d];
        if d > 0 {
            r[0] = 1.0;
        }
        r
    };
    Ok(PcaModel {
        mean,
        components,
        explained_variance_ratio,
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn cumulative_ratio(&self, k: usize) -> f64 {
        self.explained_variance_ratio[..k].iter().sum::<f64>().min(1.0)
    }

    pub fn n_components(&self, selector: PcaSelector) -> Result<usize> {
        let d = self.dim();
        match selector {
            PcaSelector::Components(k) if (1..=d).contains(&k) => Ok(k),
            PcaSelector::Components(k) => Err(Error::InvalidSpec(alloc::format!(
                "component count {k} outside 1..={d}"
            ))),
            PcaSelector::Variance(v) if v > 0.0 && v <= 1.0 => {
                if v >= 1.0 {
                    return Ok(d);
                }
                let mut acc = 0.0;
                for (i, r) in self.explained_variance_ratio.iter().enumerate() {
                    acc += r;
                    if acc >= v - 1e-12 {
                        return Ok(i + 1);
                    }
                }
                Ok(d)
            }
            PcaSelector::Variance(v) => Err(Error::InvalidSpec(alloc::format!(
                "variance threshold {v} outside (0, 1]"
            ))),
        }
    }

    /// Projects centred rows onto the first `k` components.
    pub fn project(&self, x: &Matrix, k: usize) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::Shape(alloc::format!(
                "PCA fitted on {} columns, got {}",
                self.dim(),
                x.cols()
            )));
        }
        Ok(Matrix::from_fn(x.rows(), k, |i, c| {
            let comp = self.components.row(c);
            x.row(i)
                .iter()
                .zip(&self.mean)
                .zip(comp)
                .map(|((v, m), w)| (v - m) * w)
                .sum()
        }))
    }

    /// Maps scores back into the input space.
    pub fn reconstruct(&self, scores: &Matrix) -> Matrix {
        let k = scores.cols();
        Matrix::from_fn(scores.rows(), self.dim(), |i, j| {
            self.mean[j] + (0..k).map(|c| scores[(i, c)] * self.components[(c, j)]).sum::<f64>()
        })
    }
}

pub fn transform_pca(model: &PcaModel, x: &Matrix, selector: PcaSelector) -> Result<Matrix> {
    let k = model.n_components(selector)?;
    model.project(x, k)
}
