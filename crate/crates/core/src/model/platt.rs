use alloc::vec::Vec;

use super::svm::{decision_function, SvmModel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const MAX_ITERATIONS: usize = 100;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;
const GRADIENT_TOL: f64 = 1e-5;

/// `p(+1 | f) = 1 / (1 + exp(a·f + b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlattScaling {
    pub a: f64,
    pub b: f64,
    /// All decision values were equal; `probability` returns the class prior.
    pub degenerate: bool,
    pub prior: f64,
}

impl PlattScaling {
    pub fn probability(&self, decision: f64) -> f64 {
        if self.degenerate {
            return self.prior;
        }
        let t = self.a * decision + self.b;
        if t >= 0.0 {
            let e = libm::exp(-t);
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + libm::exp(t))
        }
    }
}

/// Penalised maximum-likelihood sigmoid fit, Newton's method with
/// backtracking line search.
pub fn fit_platt(decision: &[f64], labels: &[i8]) -> Result<PlattScaling> {
    if decision.len() != labels.len() {
        return Err(Error::Shape(alloc::format!(
            "{} decision values but {} labels",
            decision.len(),
            labels.len()
        )));
    }
    let prior1 = labels.iter().filter(|&&l| l == 1).count() as f64;
    let prior0 = labels.iter().filter(|&&l| l == -1).count() as f64;
    if prior1 == 0.0 || prior0 == 0.0 || prior1 + prior0 != labels.len() as f64 {
        return Err(Error::Label("calibration needs ±1 labels with both classes present".into()));
    }
    let prior = prior1 / (prior0 + prior1);
    let first = decision[0];
    if decision.iter().all(|&d| d == first) {
        return Ok(PlattScaling {
            a: 0.0,
            b: 0.0,
            degenerate: true,
            prior,
        });
    }

    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l == 1 { hi } else { lo }).collect();
    let objective = |a: f64, b: f64| -> f64 {
        decision
            .iter()
            .zip(&t)
            .map(|(&f, &ti)| {
                let fx = f * a + b;
                if fx >= 0.0 {
                    ti * fx + libm::log1p(libm::exp(-fx))
                } else {
                    (ti - 1.0) * fx + libm::log1p(libm::exp(fx))
                }
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = libm::log((prior0 + 1.0) / (prior1 + 1.0));
    let mut fval = objective(a, b);
    for _ in 0..MAX_ITERATIONS {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (HESSIAN_RIDGE, HESSIAN_RIDGE, 0.0, 0.0, 0.0);
        for (&f, &ti) in decision.iter().zip(&t) {
            let fx = f * a + b;
            let (p, q) = if fx >= 0.0 {
                let e = libm::exp(-fx);
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = libm::exp(fx);
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < GRADIENT_TOL && g2.abs() < GRADIENT_TOL {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < MIN_STEP {
            break;
        }
    }
    Ok(PlattScaling {
        a,
        b,
        degenerate: false,
        prior,
    })
}

pub fn platt_calibrate(model: &SvmModel, x: &Matrix, y: &[i8]) -> Result<PlattScaling> {
    fit_platt(&decision_function(model, x)?, y)
}
