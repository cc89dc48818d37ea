//! 12→4→12 autoencoder: `tanh` encoder, linear decoder, mean squared error.

use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

/// Width of the bottleneck layer.
pub const LATENT_DIM: usize = 4;
/// Lower bound for the denominator of the relative gradient error.
pub const GRADIENT_CHECK_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoencoderConfig {
    pub lr: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Stop once the best loss has not improved by `min_improvement`
    /// within this many epochs.
    pub patience: usize,
    pub min_improvement: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            lr: 1e-2,
            momentum: 0.9,
            epochs: 2000,
            patience: 50,
            min_improvement: 1e-8,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

/// Parameters are stored flat as `[W1 (4×d), b1 (4), W2 (d×4), b2 (d)]`,
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    input_dim: usize,
    params: Vec<f64>,
}

/// Loss per epoch, starting with the loss of the initial parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingHistory {
    pub losses: Vec<f64>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainingHistory {
    pub fn initial_loss(&self) -> f64 {
        self.losses[0]
    }

    pub fn final_loss(&self) -> f64 {
        self.losses[self.best_epoch]
    }
}

struct Forward {
    hidden: Matrix,
    output: Matrix,
}

impl Autoencoder {
    pub fn n_params(input_dim: usize) -> usize {
        2 * LATENT_DIM * input_dim + LATENT_DIM + input_dim
    }

    pub fn zeros(input_dim: usize) -> Self {
        Self {
            input_dim,
            params: alloc::vec![0.0; Self::n_params(input_dim)],
        }
    }

    pub fn from_params(input_dim: usize, params: Vec<f64>) -> Result<Self> {
        if params.len() != Self::n_params(input_dim) {
            return Err(Error::Shape(alloc::format!(
                "expected {} parameters, got {}",
                Self::n_params(input_dim),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("autoencoder parameter".into()));
        }
        Ok(Self { input_dim, params })
    }

    /// Uniform `(−scale, scale)` initialisation.
    pub fn random(input_dim: usize, scale: f64, seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let params = (0..Self::n_params(input_dim))
            .map(|_| r.random_range(-scale..scale))
            .collect();
        Self { input_dim, params }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let d = self.input_dim;
        let b1 = LATENT_DIM * d;
        let w2 = b1 + LATENT_DIM;
        let b2 = w2 + d * LATENT_DIM;
        (b1, w2, b2)
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim {
            return Err(Error::Shape(alloc::format!(
                "autoencoder expects {} columns, got {}",
                self.input_dim,
                x.cols()
            )));
        }
        Ok(())
    }

    fn hidden(&self, x: &Matrix) -> Matrix {
        let d = self.input_dim;
        let (b1, _, _) = self.offsets();
        let p = &self.params;
        Matrix::from_fn(x.rows(), LATENT_DIM, |r, k| {
            let row = x.row(r);
            let z = p[b1 + k] + (0..d).map(|j| p[k * d + j] * row[j]).sum::<f64>();
            libm::tanh(z)
        })
    }

    fn output(&self, h: &Matrix) -> Matrix {
        let d = self.input_dim;
        let (_, w2, b2) = self.offsets();
        let p = &self.params;
        Matrix::from_fn(h.rows(), d, |r, j| {
            let row = h.row(r);
            p[b2 + j] + (0..LATENT_DIM).map(|k| p[w2 + j * LATENT_DIM + k] * row[k]).sum::<f64>()
        })
    }

    fn forward(&self, x: &Matrix) -> Forward {
        let hidden = self.hidden(x);
        let output = self.output(&hidden);
        Forward { hidden, output }
    }

    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        Ok(self.hidden(x))
    }

    pub fn decode(&self, latent: &Matrix) -> Result<Matrix> {
        if latent.cols() != LATENT_DIM {
            return Err(Error::Shape(alloc::format!(
                "decoder expects {LATENT_DIM} columns, got {}",
                latent.cols()
            )));
        }
        Ok(self.output(latent))
    }

    /// Mean over all `n·d` squared reconstruction residuals.
    pub fn loss(&self, x: &Matrix) -> Result<f64> {
        self.check_input(x)?;
        Ok(mse(&self.forward(x).output, x))
    }

    /// Loss and its gradient with respect to the flat parameter vector.
    pub fn loss_and_gradient(&self, x: &Matrix) -> Result<(f64, Vec<f64>)> {
        self.check_input(x)?;
        let d = self.input_dim;
        let (b1, w2, b2) = self.offsets();
        let p = &self.params;
        let fw = self.forward(x);
        let loss = mse(&fw.output, x);
        let mut grad = alloc::vec![0.0; p.len()];
        if x.rows() == 0 {
            return Ok((loss, grad));
        }
        let scale = 2.0 / (x.rows() * d) as f64;
        let mut dy = alloc::vec![0.0; d];
        let mut dz = [0.0; LATENT_DIM];
        for r in 0..x.rows() {
            let xr = x.row(r);
            let hr = fw.hidden.row(r);
            let yr = fw.output.row(r);
            for j in 0..d {
                dy[j] = scale * (yr[j] - xr[j]);
                grad[b2 + j] += dy[j];
                for k in 0..LATENT_DIM {
                    grad[w2 + j * LATENT_DIM + k] += dy[j] * hr[k];
                }
            }
            for k in 0..LATENT_DIM {
                let dh: f64 = (0..d).map(|j| p[w2 + j * LATENT_DIM + k] * dy[j]).sum();
                dz[k] = dh * (1.0 - hr[k] * hr[k]);
                grad[b1 + k] += dz[k];
                for j in 0..d {
                    grad[k * d + j] += dz[k] * xr[j];
                }
            }
        }
        Ok((loss, grad))
    }
}

fn mse(y: &Matrix, x: &Matrix) -> f64 {
    let n = y.as_slice().len();
    if n == 0 {
        return 0.0;
    }
    y.as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n as f64
}

/// Full-batch gradient descent with heavy-ball momentum. Returns the
/// parameters with the lowest loss seen and the per-epoch loss curve.
pub fn train_autoencoder(x: &Matrix, config: &AutoencoderConfig) -> Result<(Autoencoder, TrainingHistory)> {
    if x.rows() < 2 {
        return Err(Error::InsufficientData(alloc::format!(
            "autoencoder needs at least 2 rows, got {}",
            x.rows()
        )));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("autoencoder input".into()));
    }
    let mut model = Autoencoder::random(x.cols(), config.init_scale, config.seed);
    let mut velocity = alloc::vec![0.0; model.params.len()];
    let mut best = model.clone();
    let mut history = TrainingHistory::default();
    let mut best_loss = f64::INFINITY;
    let mut last_improvement = 0usize;

    for epoch in 0..=config.epochs {
        let (loss, grad) = model.loss_and_gradient(x)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, lr: config.lr });
        }
        history.losses.push(loss);
        if loss < best_loss {
            if best_loss - loss >= config.min_improvement {
                last_improvement = epoch;
            }
            best_loss = loss;
            best.params.copy_from_slice(&model.params);
            history.best_epoch = epoch;
        }
        if epoch == config.epochs {
            break;
        }
        if epoch - last_improvement >= config.patience {
            history.stopped_early = true;
            break;
        }
        for ((p, v), g) in model.params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
            *v = config.momentum * *v - config.lr * g;
            *p += *v;
        }
    }
    Ok((best, history))
}

/// Largest relative discrepancy between the analytic gradient and central
/// finite differences with the given step, over every parameter.
pub fn gradient_check(model: &Autoencoder, x: &Matrix, step: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::InvalidSpec(alloc::format!("gradient-check step {step} outside [1e-7, 1e-3]")));
    }
    let (_, analytic) = model.loss_and_gradient(x)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        let orig = probe.params[i];
        probe.params[i] = orig + step;
        let plus = probe.loss(x)?;
        probe.params[i] = orig - step;
        let minus = probe.loss(x)?;
        probe.params[i] = orig;
        let numeric = (plus - minus) / (2.0 * step);
        let denom = a.abs().max(numeric.abs()).max(GRADIENT_CHECK_FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}
