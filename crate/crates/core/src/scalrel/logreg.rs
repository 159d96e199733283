//! L2-regularized logistic regression by full-batch gradient descent.
//!
//! Loss: `mean_i [softplus(z_i) - y_i z_i] + l2/2 * |w|^2` with
//! `z_i = w.x_i + b`; the bias is not regularized. Training starts from
//! zero and is single-threaded, so identical inputs give bit-identical
//! models.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub l2: f64,
    pub lr: f64,
    pub max_iter: usize,
    /// Stop when the Euclidean norm of the full gradient (weights and
    /// bias) falls below this.
    pub tol: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            l2: 1e-4,
            lr: 0.1,
            max_iter: 5000,
            tol: 1e-8,
        }
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logit(w: &[f64], b: f64, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b
}

/// Regularized mean loss.
pub fn loss(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = logit(w, b, x);
            softplus(z) - y * z
        })
        .sum();
    data / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of [`loss`] with respect to `(w, b)`.
pub fn gradient(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], l2: f64) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let r = sigmoid(logit(w, b, x)) - y;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += r * xi;
        }
        gb += r;
    }
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    (gw, gb / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyper: Hyperparams,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    /// Probability of the positive class.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(logit(&self.weights, self.bias, x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        logit(&self.weights, self.bias, x) >= 0.0
    }

    /// Fraction of examples whose prediction matches `ys` (1 = positive).
    pub fn accuracy(&self, xs: &[Vec<f64>], ys: &[f64]) -> Option<f64> {
        if xs.is_empty() {
            return None;
        }
        let correct = xs
            .iter()
            .zip(ys)
            .filter(|(x, &y)| self.predict(x) == (y >= 0.5))
            .count();
        Some(correct as f64 / xs.len() as f64)
    }
}

fn check_inputs(xs: &[Vec<f64>], ys: &[f64]) -> Result<usize> {
    if xs.len() != ys.len() {
        return Err(Error::Data(format!("{} feature rows but {} labels", xs.len(), ys.len())));
    }
    let dim = xs.first().map(Vec::len).ok_or_else(|| Error::Data("no training examples".into()))?;
    for (i, x) in xs.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::Dimension { left: dim, right: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature in example {i}")));
        }
    }
    if ys.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::Data("labels must be 0 or 1".into()));
    }
    if !ys.contains(&1.0) || !ys.contains(&0.0) {
        return Err(Error::Data("training data needs both classes".into()));
    }
    Ok(dim)
}

pub fn train_logreg(xs: &[Vec<f64>], ys: &[f64], hyper: Hyperparams) -> Result<LogisticModel> {
    let dim = check_inputs(xs, ys)?;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < hyper.max_iter {
        let (gw, gb) = gradient(&w, b, xs, ys, hyper.l2);
        let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if gnorm < hyper.tol {
            converged = true;
            break;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= hyper.lr * g;
        }
        b -= hyper.lr * gb;
        iterations += 1;
    }
    Ok(LogisticModel {
        weights: w,
        bias: b,
        hyper,
        iterations,
        converged,
    })
}
