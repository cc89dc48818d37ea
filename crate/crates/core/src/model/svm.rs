//! Soft-margin kernel SVM trained by sequential minimal optimization with
//! second-order working-set selection.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { degree: u32, coef0: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                libm::exp(-gamma * d2)
            }
            Kernel::Polynomial { degree, coef0 } => libm::pow(dot(a, b) + coef0, degree as f64),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Kernel choice before the data is seen; `gamma: None` resolves to
/// `1 / (d · mean column variance)` of the training features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: Option<f64> },
    Polynomial { degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn rbf() -> Self {
        KernelSpec::Rbf { gamma: None }
    }

    pub fn polynomial() -> Self {
        KernelSpec::Polynomial { degree: 3, coef0: 1.0 }
    }

    pub fn resolve(&self, x: &Matrix) -> Kernel {
        match *self {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Polynomial { degree, coef0 } => Kernel::Polynomial { degree, coef0 },
            KernelSpec::Rbf { gamma: Some(gamma) } => Kernel::Rbf { gamma },
            KernelSpec::Rbf { gamma: None } => Kernel::Rbf {
                gamma: default_gamma(x),
            },
        }
    }
}

/// `1 / (d · mean population variance of the columns)`, or `1/d` when the
/// features carry no variance.
pub fn default_gamma(x: &Matrix) -> f64 {
    let (n, d) = x.shape();
    if n == 0 || d == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    for j in 0..d {
        let col = x.column(j);
        let m = col.iter().sum::<f64>() / n as f64;
        total += col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    }
    let mean_var = total / d as f64;
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0 / d as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::rbf(),
            c: 1.0,
            tol: 1e-3,
            max_iterations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub support_vectors: Matrix,
    /// `α_i · y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub tol: f64,
    pub iterations: usize,
    pub training_accuracy: f64,
    /// Dual variables and labels over all training rows, in canonical order.
    pub alpha: Vec<f64>,
    pub labels: Vec<i8>,
}

/// Sorts rows by feature values then label so that the solver sees the same
/// problem whatever the caller's row order.
fn canonical_order(x: &Matrix, y: &[i8]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.rows()).collect();
    idx.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(y[a].cmp(&y[b]))
    });
    idx
}

pub fn train_svm(x: &Matrix, y: &[i8], config: &SvmConfig) -> Result<SvmModel> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::Shape(alloc::format!("{n} rows but {} labels", y.len())));
    }
    if let Some(bad) = y.iter().find(|&&l| l != 1 && l != -1) {
        return Err(Error::Label(alloc::format!("labels must be ±1, got {bad}")));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(Error::Label("SVM training needs both classes present".into()));
    }
    if !(config.c > 0.0) || !(config.tol > 0.0) {
        return Err(Error::InvalidSpec("SVM C and tol must be positive".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("SVM features".into()));
    }

    let order = canonical_order(x, y);
    let xs = x.select_rows(&order);
    let ys: Vec<i8> = order.iter().map(|&i| y[i]).collect();
    let yf: Vec<f64> = ys.iter().map(|&l| l as f64).collect();
    let kernel = config.kernel.resolve(&xs);
    let c = config.c;

    let k = Matrix::from_fn(n, n, |i, j| kernel.eval(xs.row(i), xs.row(j)));
    let q = |i: usize, j: usize| yf[i] * yf[j] * k[(i, j)];
    let mut alpha = alloc::vec![0.0; n];
    let mut grad = alloc::vec![-1.0; n];
    let mut iterations = 0;

    loop {
        let in_up = |t: usize, a: &[f64]| (yf[t] > 0.0 && a[t] < c) || (yf[t] < 0.0 && a[t] > 0.0);
        let in_low = |t: usize, a: &[f64]| (yf[t] > 0.0 && a[t] > 0.0) || (yf[t] < 0.0 && a[t] < c);

        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let v = -yf[t] * grad[t];
            if in_up(t, &alpha) && v >= gmax && (v > gmax || i_sel.is_none()) {
                gmax = v;
                i_sel = Some(t);
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(t, &alpha) {
                    continue;
                }
                let v = -yf[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = k[(i, i)] + k[(t, t)] - 2.0 * k[(i, t)];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj < obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else { break };
        if gmax - gmin < config.tol {
            break;
        }
        if iterations >= config.max_iterations {
            return Err(Error::Divergence {
                epoch: iterations,
                lr: 0.0,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if yf[i] != yf[j] {
            let mut quad = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Bias from free vectors, midpoint of the feasible interval otherwise.
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..n {
        let yg = yf[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free += 1;
            free_sum += yg;
        } else if (alpha[t] >= c && yf[t] < 0.0) || (alpha[t] <= 0.0 && yf[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };

    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let mut model = SvmModel {
        kernel,
        support_vectors: xs.select_rows(&sv),
        dual_coef: sv.iter().map(|&t| alpha[t] * yf[t]).collect(),
        bias: -rho,
        c,
        tol: config.tol,
        iterations,
        training_accuracy: 0.0,
        alpha,
        labels: ys,
    };
    let pred = predict_svm(&model, x)?;
    model.training_accuracy = pred.iter().zip(y).filter(|(p, l)| p == l).count() as f64 / n as f64;
    Ok(model)
}

pub fn decision_function(model: &SvmModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != model.support_vectors.cols() {
        return Err(Error::Shape(alloc::format!(
            "SVM trained on {} features, got {}",
            model.support_vectors.cols(),
            x.cols()
        )));
    }
    Ok(x.iter_rows()
        .map(|row| {
            model
                .support_vectors
                .iter_rows()
                .zip(&model.dual_coef)
                .map(|(sv, a)| a * model.kernel.eval(sv, row))
                .sum::<f64>()
                + model.bias
        })
        .collect())
}

/// Sign of the decision value; exact zero goes to `+1`.
pub fn predict_svm(model: &SvmModel, x: &Matrix) -> Result<Vec<i8>> {
    Ok(decision_function(model, x)?
        .into_iter()
        .map(|v| if v >= 0.0 { 1 } else { -1 })
        .collect())
}
